//! File formats: mesh JSON/CSV input, and CSV/JSON exports for spectra,
//! trees, contours, subdivided meshes, and per-triangle quadric dumps.
//!
//! Numbers are written with the shortest round-trip formatting, so outputs
//! built from bitwise-equal data are byte-identical — spectrum and tree
//! exports double as determinism witnesses.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::{Tensor2S, TensorMesh};
use crate::quadric::QuadricKind;
use crate::scalar::{flt, Scalar};
use crate::spectrum::ContourSpectrum;
use crate::subdivision::{SubdividedMesh, VertexOrigin};
use crate::topology::{ContourSet, JoinTree, NodeKind};

#[derive(Serialize, Deserialize)]
struct MeshFile<S> {
    vertices: Vec<[S; 2]>,
    triangles: Vec<[usize; 3]>,
    tensors: Vec<[S; 3]>,
}

/// Reads a mesh from JSON (`.csv` paths go through the grid reader instead).
pub fn read_mesh<S: Scalar>(path: &Path) -> Result<TensorMesh<S>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_mesh_csv(path),
        _ => read_mesh_json(path),
    }
}

pub fn read_mesh_json<S: Scalar>(path: &Path) -> Result<TensorMesh<S>> {
    let text = std::fs::read_to_string(path)?;
    let file: MeshFile<S> = serde_json::from_str(&text)?;
    let vertices = file.vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
    let tensors = file
        .tensors
        .iter()
        .map(|t| Tensor2S::new(t[0], t[1], t[2]))
        .collect();
    TensorMesh::new(vertices, file.triangles, tensors)
}

pub fn write_mesh_json<S: Scalar>(path: &Path, mesh: &TensorMesh<S>) -> Result<()> {
    let file = MeshFile {
        vertices: mesh.vertices.iter().map(|p| [p.x, p.y]).collect(),
        triangles: mesh.triangles.clone(),
        tensors: mesh.tensors.iter().map(|t| [t.e, t.f, t.g]).collect(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

/// Reads tensors sampled on a rectangular grid from CSV with header
/// `x,y,e,f,g`. Coordinates are grouped by exact value to infer the grid;
/// every (x, y) cell must appear exactly once. Quads are triangulated along
/// the lower-left to upper-right diagonal, matching the synthetic generator.
pub fn read_mesh_csv<S: Scalar>(path: &Path) -> Result<TensorMesh<S>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut records: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    for row in reader.deserialize() {
        records.push(row?);
    }
    if records.is_empty() {
        return Err(Error::InvalidInput("empty tensor grid CSV".into()));
    }

    let mut xs: Vec<f64> = records.iter().map(|r| r.0).collect();
    let mut ys: Vec<f64> = records.iter().map(|r| r.1).collect();
    for v in xs.iter().chain(ys.iter()) {
        if !v.is_finite() {
            return Err(Error::InvalidInput("non-finite grid coordinate".into()));
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    xs.dedup();
    ys.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    ys.dedup();
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!(
            "tensor grid needs at least 2 distinct coordinates per axis, got {nx}x{ny}"
        )));
    }
    if nx * ny != records.len() {
        return Err(Error::InvalidInput(format!(
            "tensor grid is incomplete: {} rows for a {nx}x{ny} grid",
            records.len()
        )));
    }

    let find = |sorted: &[f64], v: f64| sorted.binary_search_by(|p| p.partial_cmp(&v).expect("finite")).ok();
    let mut tensors: Vec<Option<Tensor2S<S>>> = vec![None; nx * ny];
    for &(x, y, e, f, g) in &records {
        let (xi, yi) = match (find(&xs, x), find(&ys, y)) {
            (Some(xi), Some(yi)) => (xi, yi),
            _ => unreachable!("coordinates come from the dedup lists"),
        };
        let slot = &mut tensors[yi * nx + xi];
        if slot.is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate grid cell at ({x}, {y})"
            )));
        }
        *slot = Some(Tensor2S::new(flt(e), flt(f), flt(g)));
    }
    let tensors: Vec<Tensor2S<S>> = tensors
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvalidInput("tensor grid has missing cells".into()))?;

    let mut vertices = Vec::with_capacity(nx * ny);
    for &y in &ys {
        for &x in &xs {
            vertices.push(Point::new(flt::<S>(x), flt::<S>(y)));
        }
    }
    let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v00 = j * nx + i;
            let v10 = v00 + 1;
            let v01 = v00 + nx;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TensorMesh::new(vertices, triangles, tensors)
}

#[derive(Serialize)]
struct SubdividedFile<S> {
    vertices: Vec<[S; 2]>,
    triangles: Vec<[usize; 3]>,
    tensors: Vec<[S; 3]>,
    values: Vec<S>,
    provenance: Vec<usize>,
}

/// Tensor at a subdivided vertex, interpolated from the original mesh.
fn interpolated_tensor<S: Scalar>(
    mesh: &TensorMesh<S>,
    sub: &SubdividedMesh<S>,
    vid: usize,
) -> Tensor2S<S> {
    match sub.vertex_origin[vid] {
        VertexOrigin::Original(v) => mesh.tensors[v],
        VertexOrigin::EdgeInterior(a, b) => {
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let d = pb - pa;
            let t = ((sub.vertices[vid] - pa).dot(d) / d.norm_sq())
                .max(S::zero())
                .min(S::one());
            mesh.tensors[a].lerp(&mesh.tensors[b], t)
        }
        VertexOrigin::CriticalPoint(tri) => {
            let [a, b, c] = mesh.triangles[tri];
            let verts = mesh.triangle_points(tri);
            let w = crate::geom::barycentric(sub.vertices[vid], verts[0], verts[1], verts[2])
                .unwrap_or([S::one(), S::zero(), S::zero()]);
            let t = |i: usize| mesh.tensors[i];
            Tensor2S::new(
                w[0] * t(a).e + w[1] * t(b).e + w[2] * t(c).e,
                w[0] * t(a).f + w[1] * t(b).f + w[2] * t(c).f,
                w[0] * t(a).g + w[1] * t(b).g + w[2] * t(c).g,
            )
        }
    }
}

/// Writes the monotone subdivision in the mesh JSON format extended with
/// per-vertex field values and per-triangle provenance (parent triangle).
pub fn write_subdivided_json<S: Scalar>(
    path: &Path,
    mesh: &TensorMesh<S>,
    sub: &SubdividedMesh<S>,
) -> Result<()> {
    let file = SubdividedFile {
        vertices: sub.vertices.iter().map(|p| [p.x, p.y]).collect(),
        triangles: sub.triangles.clone(),
        tensors: (0..sub.vertices.len())
            .map(|v| {
                let t = interpolated_tensor(mesh, sub, v);
                [t.e, t.f, t.g]
            })
            .collect(),
        values: sub.values.clone(),
        provenance: sub.provenance.clone(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

/// Spectrum CSV: `value,cumulative_<m>...,density_<m>...` with one column
/// pair per requested mode in mode order. `bins + 1` data rows; the last row
/// has empty density cells (density is per-interval).
pub fn spectra_csv_string<S: Scalar>(spectra: &[&ContourSpectrum<S>]) -> Result<String> {
    let mut spectra: Vec<&ContourSpectrum<S>> = spectra.to_vec();
    spectra.sort_by_key(|s| s.mode);
    validate_spectra(&spectra)?;
    let bins = spectra[0].bins();

    let mut out = String::from("value");
    for s in &spectra {
        write!(out, ",cumulative_{}", s.mode.letter()).expect("string write");
    }
    for s in &spectra {
        write!(out, ",density_{}", s.mode.letter()).expect("string write");
    }
    out.push('\n');
    for j in 0..=bins {
        write!(out, "{}", spectra[0].bin_values[j]).expect("string write");
        for s in &spectra {
            write!(out, ",{}", s.cumulative[j]).expect("string write");
        }
        for s in &spectra {
            if j < bins {
                write!(out, ",{}", s.density[j]).expect("string write");
            } else {
                out.push(',');
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn validate_spectra<S: Scalar>(spectra: &[&ContourSpectrum<S>]) -> Result<()> {
    if spectra.is_empty() {
        return Err(Error::InvalidInput("no spectra to export".into()));
    }
    for pair in spectra.windows(2) {
        if pair[0].mode == pair[1].mode {
            return Err(Error::InvalidInput("duplicate spectrum mode".into()));
        }
        if pair[0].bin_values != pair[1].bin_values {
            return Err(Error::InvalidInput(
                "spectra share a value column and must use identical bins".into(),
            ));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectraFile<S> {
    #[serde(flatten)]
    columns: BTreeMap<String, Vec<S>>,
}

/// JSON mirror of the spectrum CSV: one array per column, keyed by the CSV
/// column name.
pub fn spectra_json_string<S: Scalar>(spectra: &[&ContourSpectrum<S>]) -> Result<String> {
    let mut spectra: Vec<&ContourSpectrum<S>> = spectra.to_vec();
    spectra.sort_by_key(|s| s.mode);
    validate_spectra(&spectra)?;
    let mut columns = BTreeMap::new();
    columns.insert("value".to_string(), spectra[0].bin_values.clone());
    for s in &spectra {
        columns.insert(format!("cumulative_{}", s.mode.letter()), s.cumulative.clone());
        columns.insert(format!("density_{}", s.mode.letter()), s.density.clone());
    }
    Ok(serde_json::to_string_pretty(&SpectraFile { columns })?)
}

pub fn write_spectra_csv<S: Scalar>(path: &Path, spectra: &[&ContourSpectrum<S>]) -> Result<()> {
    std::fs::write(path, spectra_csv_string(spectra)?)?;
    Ok(())
}

pub fn write_spectra_json<S: Scalar>(path: &Path, spectra: &[&ContourSpectrum<S>]) -> Result<()> {
    std::fs::write(path, spectra_json_string(spectra)?)?;
    Ok(())
}

#[derive(Serialize)]
struct TreeNodeOut<S> {
    id: usize,
    value: S,
    x: S,
    y: S,
    kind: NodeKind,
    degenerate: bool,
}

#[derive(Serialize)]
struct TreeFile<S> {
    nodes: Vec<TreeNodeOut<S>>,
    edges: Vec<(usize, usize)>,
}

pub fn tree_json_string<S: Scalar>(tree: &JoinTree<S>) -> Result<String> {
    let file = TreeFile {
        nodes: tree
            .nodes
            .iter()
            .map(|n| TreeNodeOut {
                id: n.id,
                value: n.value,
                x: n.x,
                y: n.y,
                kind: n.kind,
                degenerate: n.degenerate,
            })
            .collect(),
        edges: tree.edges.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn write_tree_json<S: Scalar>(path: &Path, tree: &JoinTree<S>) -> Result<()> {
    std::fs::write(path, tree_json_string(tree)?)?;
    Ok(())
}

/// Contour CSV: `contour_id,x,y`, points in polyline order. Closed loops
/// repeat their first point at the end.
pub fn contours_csv_string<S: Scalar>(contours: &[&ContourSet<S>]) -> String {
    let mut out = String::from("contour_id,x,y\n");
    let mut id = 0usize;
    for set in contours {
        for (pl, &closed) in set.polylines.iter().zip(&set.closed) {
            for p in pl {
                writeln!(out, "{id},{},{}", p.x, p.y).expect("string write");
            }
            if closed {
                if let Some(p) = pl.first() {
                    writeln!(out, "{id},{},{}", p.x, p.y).expect("string write");
                }
            }
            id += 1;
        }
    }
    out
}

pub fn write_contours_csv<S: Scalar>(path: &Path, contours: &[&ContourSet<S>]) -> Result<()> {
    std::fs::write(path, contours_csv_string(contours))?;
    Ok(())
}

/// Debug CSV of per-triangle quadric models:
/// `tri,A,B,C,D,E,F,H,I,kind,xc,yc` with empty `xc,yc` for strips without a
/// unique minimizer.
pub fn quadrics_csv_string<S: Scalar>(sub: &SubdividedMesh<S>) -> String {
    let mut out = String::from("tri,A,B,C,D,E,F,H,I,kind,xc,yc\n");
    for (tri, q) in sub.quadrics.iter().enumerate() {
        let kind = match q.kind {
            QuadricKind::EllipticMin => "elliptic",
            QuadricKind::DegenerateParallel => "degenerate",
        };
        let (xc, yc) = match q.critical_point {
            Some(p) => (format!("{}", p.x), format!("{}", p.y)),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{tri},{},{},{},{},{},{},{},{},{kind},{xc},{yc}",
            q.a, q.b, q.c, q.d, q.e2, q.f2, q.h, q.i_inv
        )
        .expect("string write");
    }
    out
}

pub fn write_quadrics_csv<S: Scalar>(path: &Path, sub: &SubdividedMesh<S>) -> Result<()> {
    std::fs::write(path, quadrics_csv_string(sub))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{cumulative_histogram, Mode};
    use crate::subdivision::subdivide_mesh;
    use crate::synth::{generate_synthetic, SynthOptions};
    use crate::topology::{extract_contours, join_tree};

    fn sample_mesh() -> TensorMesh<f64> {
        generate_synthetic(&SynthOptions {
            grid_n: 3,
            perturb_directions: true,
            seed: 5,
            ..SynthOptions::default()
        })
        .unwrap()
    }

    #[test]
    fn mesh_json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.json");
        let mesh = sample_mesh();
        write_mesh_json(&path, &mesh).unwrap();
        let back: TensorMesh<f64> = read_mesh(&path).unwrap();
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.tensors, mesh.tensors);
    }

    #[test]
    fn csv_grid_reader_builds_the_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        // 2x2 grid, shuffled row order.
        std::fs::write(
            &path,
            "x,y,e,f,g\n1,1,2,0,1\n0,0,2,0,1\n1,0,1.5,0.5,1.5\n0,1,1,0,2\n",
        )
        .unwrap();
        let mesh: TensorMesh<f64> = read_mesh(&path).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.triangles, vec![[0, 1, 3], [0, 3, 2]]);
        assert_eq!(mesh.tensors[1], Tensor2S::new(1.5, 0.5, 1.5));
    }

    #[test]
    fn csv_grid_reader_rejects_incomplete_grids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        std::fs::write(&path, "x,y,e,f,g\n0,0,1,0,1\n1,0,1,0,1\n0,1,1,0,1\n").unwrap();
        assert!(read_mesh::<f64>(&path).is_err());
    }

    #[test]
    fn spectrum_csv_has_expected_shape() {
        let mesh = sample_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        let sa = cumulative_histogram(&mesh, &sub, Mode::A, 4).unwrap();
        let sc = cumulative_histogram(&mesh, &sub, Mode::C, 4).unwrap();
        let csv = spectra_csv_string(&[&sc, &sa]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "value,cumulative_a,cumulative_c,density_a,density_c");
        assert_eq!(lines.len(), 1 + 5);
        assert!(lines[5].ends_with(",,"), "last row has empty densities");
    }

    #[test]
    fn spectrum_json_mirrors_columns() {
        let mesh = sample_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        let sb = cumulative_histogram(&mesh, &sub, Mode::B, 3).unwrap();
        let json = spectra_json_string(&[&sb]).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["value"].as_array().unwrap().len(), 4);
        assert_eq!(value["cumulative_b"].as_array().unwrap().len(), 4);
        assert_eq!(value["density_b"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn tree_json_lists_nodes_and_edges() {
        let mesh = sample_mesh();
        let tree = join_tree(&mesh, Mode::A).unwrap();
        let json = tree_json_string(&tree).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["nodes"].as_array().unwrap().len(), tree.nodes.len());
        assert_eq!(value["edges"].as_array().unwrap().len(), tree.edges.len());
        assert!(json.contains("\"kind\""));
    }

    #[test]
    fn subdivided_export_interpolates_tensors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub.json");
        let mesh = sample_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        write_subdivided_json(&path, &mesh, &sub).unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let nv = sub.vertices.len();
        assert_eq!(value["vertices"].as_array().unwrap().len(), nv);
        assert_eq!(value["tensors"].as_array().unwrap().len(), nv);
        assert_eq!(value["values"].as_array().unwrap().len(), nv);
        assert_eq!(
            value["provenance"].as_array().unwrap().len(),
            sub.triangles.len()
        );
    }

    #[test]
    fn contours_csv_repeats_first_point_for_loops() {
        let mesh = sample_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        let set = extract_contours(&mesh, &sub, Mode::C, 0.5).unwrap();
        let csv = contours_csv_string(&[&set]);
        assert!(csv.starts_with("contour_id,x,y\n"));
        let n_points: usize = set.polylines.iter().map(|p| p.len()).sum();
        let n_closed = set.closed.iter().filter(|&&c| c).count();
        assert_eq!(csv.lines().count(), 1 + n_points + n_closed);
    }

    #[test]
    fn quadrics_csv_has_one_row_per_triangle() {
        let mesh = sample_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        let csv = quadrics_csv_string(&sub);
        assert_eq!(csv.lines().count(), 1 + mesh.triangles.len());
        assert!(csv.lines().nth(1).unwrap().contains("elliptic") || csv.contains("degenerate"));
    }
}
