//! Monotone subdivision of tensor mesh triangles.
//!
//! Each triangle is split so that every piece is value-monotone: walking from
//! the piece's lowest-value vertex toward the boundary never decreases the
//! squared anisotropy. Elliptic triangles split around the critical point
//! (when it lies inside) and the interior minima of their edges; degenerate
//! triangles split along their valley line. Edge split points are computed
//! once per undirected mesh edge from the endpoint tensors, so neighboring
//! triangles insert the same welded vertex and the result stays a conforming
//! triangulation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geom::{barycentric, signed_area_x2, Point};
use crate::mesh::{anisotropy, tensor_field_coeffs, Tensor2S, TensorMesh};
use crate::quadric::{NormalizedFrame, QuadricKind, QuadricModel};
use crate::scalar::{flt, Scalar};

/// Parameter snap: an edge minimum closer than this to an endpoint (in edge
/// parameter) is treated as hitting the endpoint and not inserted.
pub const EDGE_SNAP_TOL: f64 = 1e-10;

/// Barycentric slack for the "critical point inside the triangle" test.
pub const INSIDE_SNAP_TOL: f64 = 1e-9;

/// Pieces with |area| at or below this fraction of the parent area are
/// dropped (they arise when the critical point snaps onto the boundary).
pub const PIECE_AREA_REL_TOL: f64 = 1e-12;

/// Monotonicity class of one subdivision piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonotoneCase {
    /// The quadric's minimum is a vertex of the piece; contours are circular
    /// arcs around that vertex in normalized coordinates.
    MinAtVertex,
    /// Elliptic quadric, minimum outside the piece.
    Generic,
    /// Degenerate quadric; values vary only across the strip direction.
    DegenerateStrip,
}

/// Interior minimum of a quadric restricted to a segment.
#[derive(Clone, Copy, Debug)]
pub struct EdgeMin<S> {
    /// Parameter in `(0, 1)` along the segment.
    pub t: S,
    pub point: Point<S>,
    pub value: S,
}

/// Minimum of the 1D restriction of the squared anisotropy along an edge
/// with linearly interpolated endpoint tensors. Canonical for welding: both
/// triangles sharing the edge see the same inputs.
pub fn edge_minimum_from_tensors<S: Scalar>(
    pa: Point<S>,
    ta: &Tensor2S<S>,
    pb: Point<S>,
    tb: &Tensor2S<S>,
) -> Option<EdgeMin<S>> {
    let u0 = ta.e - ta.g;
    let w0 = ta.f + ta.f;
    let u1 = tb.e - tb.g;
    let w1 = tb.f + tb.f;
    interior_min_1d(u0, w0, u1 - u0, w1 - w0).map(|(t, value)| EdgeMin {
        t,
        point: pa.lerp(pb, t),
        value,
    })
}

/// Interior minimum of a quadric restricted to segment `[p, r]`.
pub fn edge_minimum<S: Scalar>(
    q: &QuadricModel<S>,
    p: Point<S>,
    r: Point<S>,
) -> Option<EdgeMin<S>> {
    // Quadratic restriction s(t) = q2 t^2 + q1 t + q0 from endpoint values
    // and the quadratic form on the direction.
    let dir = r - p;
    let q2 = q.a * dir.x * dir.x + q.b * dir.x * dir.y + q.c * dir.y * dir.y;
    let s0 = q.eval(p);
    let s1 = q.eval(r);
    let q1 = s1 - s0 - q2;
    if q2 <= S::zero() {
        return None;
    }
    let t = -q1 / (q2 + q2);
    let snap = flt::<S>(EDGE_SNAP_TOL);
    if t <= snap || t >= S::one() - snap {
        return None;
    }
    let point = p.lerp(r, t);
    Some(EdgeMin {
        t,
        point,
        value: q.eval(point),
    })
}

/// Interior minimum of `(u0 + t du)^2 + (w0 + t dw)^2` on `(0, 1)`.
fn interior_min_1d<S: Scalar>(u0: S, w0: S, du: S, dw: S) -> Option<(S, S)> {
    let den = du * du + dw * dw;
    if den <= S::zero() {
        return None;
    }
    let t = -(u0 * du + w0 * dw) / den;
    let snap = flt::<S>(EDGE_SNAP_TOL);
    if t <= snap || t >= S::one() - snap {
        return None;
    }
    let ru = u0 + t * du;
    let rw = w0 + t * dw;
    Some((t, ru * ru + rw * rw))
}

/// Symbolic vertex of a subdivision piece, before welding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PieceVertex {
    /// Parent corner `i`.
    Corner(u8),
    /// Interior minimum of parent edge `(i, i+1)`.
    Edge(u8),
    /// Interior critical point.
    Center,
}

/// Cyclic boundary chain of a triangle: corners interleaved with its present
/// edge minima, in counterclockwise order.
fn boundary_chain(mins: [bool; 3]) -> Vec<PieceVertex> {
    let mut chain = Vec::with_capacity(6);
    for i in 0u8..3 {
        chain.push(PieceVertex::Corner(i));
        if mins[i as usize] {
            chain.push(PieceVertex::Edge(i));
        }
    }
    chain
}

/// Piece layout for one triangle: a fan from the minimizer of the quadric
/// over the triangle.
///
/// With an interior critical point the fan runs from `Center` over the whole
/// boundary chain (`3 + k` pieces for `k` edge minima). Otherwise the fan
/// root is the chain vertex at index `root` — the lowest-value boundary
/// vertex, which is the projection of the normalized origin onto the
/// triangle — giving `k + 1` pieces. Rooting the fan at the projection is
/// what makes every piece monotone: for any point `X` of the triangle,
/// `(O - root) . (X - root) <= 0`, so no piece edge sees the foot of the
/// origin in its interior and values can only grow away from the root.
fn assemble_pieces(center: bool, mins: [bool; 3], root: usize) -> Vec<[PieceVertex; 3]> {
    let chain = boundary_chain(mins);
    let n = chain.len();
    let mut pieces = Vec::with_capacity(n);
    for i in 0..n {
        let j = (i + 1) % n;
        if center {
            pieces.push([PieceVertex::Center, chain[i], chain[j]]);
        } else if i != root && j != root {
            pieces.push([chain[root], chain[i], chain[j]]);
        }
    }
    pieces
}

/// Splits one triangle into monotone pieces in original coordinates.
///
/// Piece counts: interior critical point with all edge minima gives 6;
/// exterior critical point gives `k + 1` pieces for `k` interior edge minima
/// (4, 3, 2, or 1); degenerate strips split along the valley line.
pub fn subdivide_triangle<S: Scalar>(
    q: &QuadricModel<S>,
    verts: &[Point<S>; 3],
) -> Vec<([Point<S>; 3], MonotoneCase)> {
    let mins = [
        edge_minimum(q, verts[0], verts[1]),
        edge_minimum(q, verts[1], verts[2]),
        edge_minimum(q, verts[2], verts[0]),
    ];
    let min_flags = [mins[0].is_some(), mins[1].is_some(), mins[2].is_some()];
    let (center, default_case) = match q.kind {
        QuadricKind::DegenerateParallel => (None, MonotoneCase::DegenerateStrip),
        QuadricKind::EllipticMin => {
            let pc = q.critical_point.expect("elliptic quadric has critical point");
            match snap_inside(pc, verts) {
                Some(snapped) => (Some(snapped), MonotoneCase::MinAtVertex),
                None => (None, MonotoneCase::Generic),
            }
        }
    };
    let root = if center.is_none() {
        let chain = boundary_chain(min_flags);
        let chain_value = |pv: PieceVertex| match pv {
            PieceVertex::Corner(i) => q.eval(verts[i as usize]),
            PieceVertex::Edge(i) => mins[i as usize].expect("edge min present").value,
            PieceVertex::Center => unreachable!("no center in boundary chain"),
        };
        let mut best = 0;
        for i in 1..chain.len() {
            if chain_value(chain[i]) < chain_value(chain[best]) {
                best = i;
            }
        }
        best
    } else {
        0
    };
    let layout = assemble_pieces(center.is_some(), min_flags, root);
    let resolve = |pv: PieceVertex| match pv {
        PieceVertex::Corner(i) => verts[i as usize],
        PieceVertex::Edge(i) => mins[i as usize].expect("edge min present").point,
        PieceVertex::Center => center.expect("center present"),
    };
    let parent_area2 = signed_area_x2(verts[0], verts[1], verts[2]).abs();
    let drop_tol = flt::<S>(PIECE_AREA_REL_TOL) * parent_area2;
    layout
        .into_iter()
        .filter_map(|refs| {
            let tri = [resolve(refs[0]), resolve(refs[1]), resolve(refs[2])];
            let area2 = signed_area_x2(tri[0], tri[1], tri[2]);
            (area2.abs() > drop_tol).then_some((tri, default_case))
        })
        .collect()
}

/// Critical point snapped into the triangle, or `None` when it lies clearly
/// outside. Barycentric coordinates within [`INSIDE_SNAP_TOL`] below zero are
/// clamped so boundary-grazing minima produce boundary vertices instead of
/// inverted slivers.
fn snap_inside<S: Scalar>(pc: Point<S>, verts: &[Point<S>; 3]) -> Option<Point<S>> {
    let w = barycentric(pc, verts[0], verts[1], verts[2])?;
    let tol = flt::<S>(INSIDE_SNAP_TOL);
    if w.iter().any(|&wi| wi < -tol) {
        return None;
    }
    let clamped = [
        w[0].max(S::zero()),
        w[1].max(S::zero()),
        w[2].max(S::zero()),
    ];
    let sum = clamped[0] + clamped[1] + clamped[2];
    let p = Point::new(
        (verts[0].x * clamped[0] + verts[1].x * clamped[1] + verts[2].x * clamped[2]) / sum,
        (verts[0].y * clamped[0] + verts[1].y * clamped[1] + verts[2].y * clamped[2]) / sum,
    );
    Some(p)
}

/// Where a subdivided-mesh vertex came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexOrigin {
    /// Original mesh vertex with the same index.
    Original(usize),
    /// Interior minimum of the original edge `(a, b)`, `a < b`.
    EdgeInterior(usize, usize),
    /// Critical point of the given original triangle.
    CriticalPoint(usize),
}

/// One monotone piece with the data the area kernels need.
#[derive(Clone, Debug)]
pub struct MonotoneTriangle<S> {
    /// Index of the original triangle this piece came from.
    pub parent: usize,
    /// Subdivided-mesh vertex ids, aligned with the coordinate arrays.
    pub vertex_ids: [usize; 3],
    /// Original coordinates; first vertex has the lowest value (for
    /// [`MonotoneCase::MinAtVertex`] it is the critical point).
    pub verts_orig: [Point<S>; 3],
    /// Normalized (circular-contour) coordinates for elliptic parents;
    /// equal to `verts_orig` for strips.
    pub verts_norm: [Point<S>; 3],
    /// Values at the three vertices, ascending.
    pub values: [S; 3],
    pub case: MonotoneCase,
    /// Jacobian of the normalization: normalized area / original area.
    pub area_factor: S,
}

/// Conforming triangulation refining a tensor mesh into monotone pieces.
#[derive(Clone, Debug)]
pub struct SubdividedMesh<S> {
    pub vertices: Vec<Point<S>>,
    /// Squared anisotropy at each vertex; exact tensor values at original
    /// vertices, restriction minima at inserted ones.
    pub values: Vec<S>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Original triangle index per sub-triangle.
    pub provenance: Vec<usize>,
    pub vertex_origin: Vec<VertexOrigin>,
    /// Kernel-ready view of each sub-triangle, aligned with `triangles`.
    pub monotone: Vec<MonotoneTriangle<S>>,
    /// Quadric per original triangle.
    pub quadrics: Vec<QuadricModel<S>>,
    /// Normalizing frame per original triangle (elliptic only).
    pub frames: Vec<Option<NormalizedFrame<S>>>,
}

impl<S: Scalar> SubdividedMesh<S> {
    pub fn total_area(&self) -> S {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                signed_area_x2(self.vertices[a], self.vertices[b], self.vertices[c]) / flt(2.0)
            })
            .sum()
    }

    /// Largest vertex value (shared bin range for all interpolation modes).
    pub fn max_value(&self) -> S {
        self.values.iter().copied().fold(S::zero(), S::max)
    }
}

/// Subdivides every triangle of a mesh into monotone pieces with welded,
/// canonical split vertices.
pub fn subdivide_mesh<S: Scalar>(mesh: &TensorMesh<S>) -> Result<SubdividedMesh<S>> {
    let nt = mesh.triangles.len();
    let mut quadrics = Vec::with_capacity(nt);
    let mut frames = Vec::with_capacity(nt);
    for t in 0..nt {
        let [ce, cf, cg] = tensor_field_coeffs(mesh, t);
        let q = QuadricModel::from_tensor_coeffs(&ce, &cf, &cg);
        frames.push(match q.kind {
            QuadricKind::EllipticMin => Some(q.normalize()?),
            QuadricKind::DegenerateParallel => None,
        });
        quadrics.push(q);
    }

    // Canonical interior minimum per undirected edge, evaluated from the
    // lower-index endpoint so both adjacent triangles agree bitwise.
    let mut edge_mins: BTreeMap<(usize, usize), Option<EdgeMin<S>>> = BTreeMap::new();
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (i, j) = ordered(tri[k], tri[(k + 1) % 3]);
            edge_mins.entry((i, j)).or_insert_with(|| {
                edge_minimum_from_tensors(
                    mesh.vertices[i],
                    &mesh.tensors[i],
                    mesh.vertices[j],
                    &mesh.tensors[j],
                )
            });
        }
    }

    let mut vertices: Vec<Point<S>> = mesh.vertices.clone();
    let mut values: Vec<S> = mesh.tensors.iter().map(anisotropy).collect();
    let mut vertex_origin: Vec<VertexOrigin> =
        (0..mesh.vertices.len()).map(VertexOrigin::Original).collect();
    let mut edge_vertex: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&(i, j), rec) in &edge_mins {
        if let Some(em) = rec {
            edge_vertex.insert((i, j), vertices.len());
            vertices.push(em.point);
            values.push(em.value);
            vertex_origin.push(VertexOrigin::EdgeInterior(i, j));
        }
    }

    let mut out = SubdividedMesh {
        vertices,
        values,
        triangles: Vec::new(),
        provenance: Vec::new(),
        vertex_origin,
        monotone: Vec::new(),
        quadrics,
        frames,
    };

    for t in 0..nt {
        let corner_ids = mesh.triangles[t];
        let verts = mesh.triangle_points(t);
        let q = &out.quadrics[t];
        let local_edge = |i: usize| ordered(corner_ids[i], corner_ids[(i + 1) % 3]);
        let min_ids: [Option<usize>; 3] = [
            edge_vertex.get(&local_edge(0)).copied(),
            edge_vertex.get(&local_edge(1)).copied(),
            edge_vertex.get(&local_edge(2)).copied(),
        ];
        let min_flags = [min_ids[0].is_some(), min_ids[1].is_some(), min_ids[2].is_some()];

        // Interior critical point: insert a vertex unless it snapped onto
        // the boundary, where the canonical edge minimum (or corner) already
        // provides a welded vertex.
        let mut center_id: Option<usize> = None;
        let mut case = match q.kind {
            QuadricKind::DegenerateParallel => MonotoneCase::DegenerateStrip,
            QuadricKind::EllipticMin => MonotoneCase::Generic,
        };
        if q.kind == QuadricKind::EllipticMin {
            let pc = q.critical_point.expect("elliptic quadric has critical point");
            if let Some(snapped) = snap_inside(pc, &verts) {
                let w = barycentric(snapped, verts[0], verts[1], verts[2])
                    .expect("non-degenerate triangle");
                let tol = flt::<S>(INSIDE_SNAP_TOL);
                let zeros: Vec<usize> = (0..3).filter(|&i| w[i] <= tol).collect();
                center_id = match zeros.len() {
                    0 => {
                        let id = out.vertices.len();
                        out.vertices.push(snapped);
                        out.values.push(q.eval(snapped));
                        out.vertex_origin.push(VertexOrigin::CriticalPoint(t));
                        Some(id)
                    }
                    1 => {
                        // On the open edge opposite to the vanished corner;
                        // reuse its canonical minimum if present.
                        let edge = (zeros[0] + 1) % 3;
                        min_ids[edge]
                    }
                    _ => {
                        // At a corner: the corner with barycentric ~1.
                        let i = (0..3usize).max_by(|&i, &j| {
                            w[i].partial_cmp(&w[j]).expect("finite barycentrics")
                        });
                        i.map(|i| corner_ids[i])
                    }
                };
                if center_id.is_some() {
                    case = MonotoneCase::MinAtVertex;
                }
            }
        }

        let resolve = |pv: PieceVertex| -> usize {
            match pv {
                PieceVertex::Corner(i) => corner_ids[i as usize],
                PieceVertex::Edge(i) => min_ids[i as usize].expect("edge min present"),
                PieceVertex::Center => center_id.expect("center present"),
            }
        };
        let root = if center_id.is_none() {
            // Lowest-value chain vertex, ties by id: matches the piece
            // vertex ordering so the fan root is each piece's first vertex.
            let chain = boundary_chain(min_flags);
            (0..chain.len())
                .min_by(|&a, &b| {
                    let (ia, ib) = (resolve(chain[a]), resolve(chain[b]));
                    (out.values[ia], ia)
                        .partial_cmp(&(out.values[ib], ib))
                        .expect("finite vertex values")
                })
                .unwrap_or(0)
        } else {
            0
        };
        let layout = assemble_pieces(center_id.is_some(), min_flags, root);
        let parent_area2 = signed_area_x2(verts[0], verts[1], verts[2]).abs();
        let drop_tol = flt::<S>(PIECE_AREA_REL_TOL) * parent_area2;
        for refs in layout {
            let mut ids = [resolve(refs[0]), resolve(refs[1]), resolve(refs[2])];
            if ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2] {
                continue;
            }
            let pt = |i: usize| out.vertices[i];
            let area2 = signed_area_x2(pt(ids[0]), pt(ids[1]), pt(ids[2]));
            if area2.abs() <= drop_tol {
                continue;
            }
            if area2 < S::zero() {
                ids.swap(1, 2);
            }
            let mono = make_monotone(&out, t, ids, case, center_id);
            out.triangles.push(ids);
            out.provenance.push(t);
            out.monotone.push(mono);
        }
    }
    Ok(out)
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Builds the kernel view of one piece: vertices sorted ascending by value
/// (critical point first for [`MonotoneCase::MinAtVertex`]) plus normalized
/// coordinates.
fn make_monotone<S: Scalar>(
    out: &SubdividedMesh<S>,
    parent: usize,
    ids: [usize; 3],
    case: MonotoneCase,
    center_id: Option<usize>,
) -> MonotoneTriangle<S> {
    let mut order: Vec<usize> = ids.to_vec();
    order.sort_by(|&a, &b| {
        out.values[a]
            .partial_cmp(&out.values[b])
            .expect("finite values")
            .then(a.cmp(&b))
    });
    if case == MonotoneCase::MinAtVertex {
        // The origin vertex must come first even under value ties.
        let c = center_id.expect("min-at-vertex piece has center");
        if let Some(pos) = order.iter().position(|&i| i == c) {
            let v = order.remove(pos);
            order.insert(0, v);
        }
    }
    let vertex_ids = [order[0], order[1], order[2]];
    let verts_orig = vertex_ids.map(|i| out.vertices[i]);
    let values = vertex_ids.map(|i| out.values[i]);
    let (verts_norm, area_factor) = match &out.frames[parent] {
        Some(frame) => (
            verts_orig.map(|p| frame.to_normalized(p)),
            frame.area_factor,
        ),
        None => (verts_orig, S::one()),
    };
    MonotoneTriangle {
        parent,
        vertex_ids,
        verts_orig,
        verts_norm,
        values,
        case,
        area_factor,
    }
}

/// Largest monotonicity violation of `q` along `rays` random segments from
/// the piece's lowest vertex to the boundary, sampled at 32 points each.
/// Values are expected to be non-decreasing within a small tolerance of the
/// piece's value range; returns the worst observed decrease.
pub fn max_ray_violation<S: Scalar>(
    q: &QuadricModel<S>,
    tri: &MonotoneTriangle<S>,
    rays: usize,
    seed: u64,
) -> S {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let apex = tri.verts_orig[0];
    let mut worst = S::zero();
    for _ in 0..rays {
        let e = rng.gen_range(0..3usize);
        let t = flt::<S>(rng.gen_range(0.0..1.0));
        let target = tri.verts_orig[e].lerp(tri.verts_orig[(e + 1) % 3], t);
        let mut prev = q.eval(apex);
        for k in 1..=32 {
            let s = flt::<S>(k as f64 / 32.0);
            let val = q.eval(apex.lerp(target, s));
            let drop = prev - val;
            if drop > worst {
                worst = drop;
            }
            prev = val;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::linear_coeffs;

    fn bowl() -> QuadricModel<f64> {
        // s = x^2 + y^2 from a tensor field: e - g = x, 2f = y.
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let ce = linear_coeffs(&pts, &[0.0, 1.0, 0.0]);
        let cf = linear_coeffs(&pts, &[0.0, 0.0, 0.5]);
        let cg = linear_coeffs(&pts, &[0.0, 0.0, 0.0]);
        QuadricModel::from_tensor_coeffs(&ce, &cf, &cg)
    }

    #[test]
    fn bowl_is_unit_paraboloid() {
        let q = bowl();
        assert_eq!(q.kind, QuadricKind::EllipticMin);
        assert!((q.eval(Point::new(0.3, -0.4)) - 0.25).abs() < 1e-14);
        let pc = q.critical_point().unwrap();
        assert!(pc.norm() < 1e-14);
    }

    #[test]
    fn edge_minimum_matches_projection() {
        let q = bowl();
        // Against the origin-distance projection onto the segment.
        let p = Point::new(-1.0, -1.0);
        let r = Point::new(2.0, -1.0);
        let em = edge_minimum(&q, p, r).unwrap();
        assert!((em.point.x - 0.0).abs() < 1e-12);
        assert!((em.point.y + 1.0).abs() < 1e-12);
        assert!((em.value - 1.0).abs() < 1e-12);
        // Foot outside the segment: no interior minimum.
        assert!(edge_minimum(&q, Point::new(1.0, 0.1), Point::new(2.0, 0.2)).is_none());
    }

    #[test]
    fn interior_minimum_gives_six_pieces() {
        let q = bowl();
        let verts = [
            Point::new(-1.0, -1.0),
            Point::new(2.0, -1.0),
            Point::new(-1.0, 2.0),
        ];
        let pieces = subdivide_triangle(&q, &verts);
        assert_eq!(pieces.len(), 6);
        assert!(pieces.iter().all(|(_, c)| *c == MonotoneCase::MinAtVertex));
        let total: f64 = pieces
            .iter()
            .map(|(t, _)| signed_area_x2(t[0], t[1], t[2]).abs() / 2.0)
            .sum();
        assert!((total - 4.5).abs() < 1e-12);
    }

    #[test]
    fn exterior_minimum_piece_counts() {
        let q = bowl();
        // Three interior edge minima.
        let k3 = [
            Point::new(0.1, -1.0),
            Point::new(2.0, 0.0),
            Point::new(0.1, 1.0),
        ];
        assert_eq!(subdivide_triangle(&q, &k3).len(), 4);
        // One interior edge minimum on the left edge.
        let k1 = [
            Point::new(1.0, -0.5),
            Point::new(3.0, 0.0),
            Point::new(1.0, 0.5),
        ];
        assert_eq!(subdivide_triangle(&q, &k1).len(), 2);
        // No interior edge minima.
        let k0 = [
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 1.0),
        ];
        let pieces = subdivide_triangle(&q, &k0);
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].1, MonotoneCase::Generic);
    }

    #[test]
    fn two_edge_minima_give_three_pieces() {
        let q = bowl();
        // Origin outside; only the two edges meeting at the bottom corner
        // have interior feet of the perpendicular from the origin.
        let verts = [
            Point::new(0.5, -2.0),
            Point::new(0.5, 0.1),
            Point::new(3.0, 0.1),
        ];
        let with_min: Vec<bool> = (0..3)
            .map(|i| edge_minimum(&q, verts[i], verts[(i + 1) % 3]).is_some())
            .collect();
        assert_eq!(with_min.iter().filter(|&&b| b).count(), 2);
        assert_eq!(subdivide_triangle(&q, &verts).len(), 3);
    }

    #[test]
    fn pieces_partition_parent_area() {
        let q = bowl();
        let configs: [[Point<f64>; 3]; 3] = [
            [Point::new(-1.0, -1.0), Point::new(2.0, -1.0), Point::new(-1.0, 2.0)],
            [Point::new(0.1, -1.0), Point::new(2.0, 0.0), Point::new(0.1, 1.0)],
            [Point::new(1.0, -0.5), Point::new(3.0, 0.0), Point::new(1.0, 0.5)],
        ];
        for verts in configs {
            let parent = signed_area_x2(verts[0], verts[1], verts[2]).abs() / 2.0;
            let total: f64 = subdivide_triangle(&q, &verts)
                .iter()
                .map(|(t, _)| signed_area_x2(t[0], t[1], t[2]).abs() / 2.0)
                .sum();
            assert!((total - parent).abs() <= 1e-12 * parent.max(1.0));
        }
    }

    #[test]
    fn strip_triangle_splits_along_the_valley() {
        // u = e - g = x - 1 and w = 2f = 0.5 x + 0.1 are parallel forms, so
        // s = 1.25 x^2 - 1.9 x + 1.01 depends on x alone: a strip with its
        // valley at x = 0.76, crossing the bottom and left edges.
        let verts: Vec<Point<f64>> = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 1.5),
        ];
        let tensors = verts
            .iter()
            .map(|p| Tensor2S::new(p.x, 0.25 * p.x + 0.05, 1.0))
            .collect();
        let mesh = TensorMesh::new(verts, vec![[0, 1, 2]], tensors).unwrap();
        let sub = subdivide_mesh(&mesh).unwrap();

        assert_eq!(sub.quadrics[0].kind, QuadricKind::DegenerateParallel);
        assert_eq!(sub.monotone.len(), 3);
        assert!(sub
            .monotone
            .iter()
            .all(|t| t.case == MonotoneCase::DegenerateStrip));

        // Both valley crossings are inserted at x = 0.76 with the valley
        // minimum value, and no piece straddles the valley line.
        let inserted: Vec<usize> = (3..sub.vertices.len()).collect();
        assert_eq!(inserted.len(), 2);
        for &vid in &inserted {
            assert!((sub.vertices[vid].x - 0.76).abs() < 1e-12);
            assert!((sub.values[vid] - 0.288).abs() < 1e-12);
        }
        for tri in &sub.monotone {
            let sides: Vec<f64> = tri.verts_orig.iter().map(|p| p.x - 0.76).collect();
            let pos = sides.iter().any(|&s| s > 1e-9);
            let neg = sides.iter().any(|&s| s < -1e-9);
            assert!(!(pos && neg), "piece straddles the valley: {sides:?}");
        }

        // Monotone from each piece's lowest vertex.
        let vmax = sub.max_value();
        for (i, tri) in sub.monotone.iter().enumerate() {
            let viol = max_ray_violation(&sub.quadrics[0], tri, 64, 90 + i as u64);
            assert!(viol <= 1e-9 * vmax, "piece {i}: decrease {viol}");
        }
    }
}
