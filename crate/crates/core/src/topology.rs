//! Join trees, split trees, and topologically faithful contours.
//!
//! Trees come from a union-find sweep over mesh vertices in value order with
//! index tie-breaking (a symbolic perturbation making all values distinct).
//! For the quadratic field the sweep runs on the monotone subdivision, whose
//! vertex set contains every critical point of the field; per-triangle
//! convexity rules out any other extrema, so the subdivision join tree is the
//! join tree of the quadratic field itself. Multi-way merges unfold into
//! chains of binary saddles so a tree with `L` leaves always has `L - 1`
//! saddles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{barycentric, Point};
use crate::mesh::{anisotropy, TensorMesh};
use crate::quadric::QuadricKind;
use crate::scalar::{flt, Scalar};
use crate::spectrum::Mode;
use crate::subdivision::{subdivide_mesh, MonotoneCase, SubdividedMesh, VertexOrigin};

/// Leaves at or below `1e-7 * max anisotropy` are flagged as degenerate
/// (tensor degeneracies, where the eigenvalues coincide).
pub const DEGENERATE_LEAF_REL_TOL: f64 = 1e-7;

/// Fraction of the bounding box diagonal used as chordal tolerance when
/// discretizing curved contours.
pub const CHORD_REL_TOL: f64 = 1e-3;

/// Fraction of the bounding box diagonal used to snap contour endpoints
/// together while chaining segments.
pub const CHAIN_SNAP_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Minimum,
    Maximum,
    Saddle,
    Root,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode<S> {
    pub id: usize,
    pub value: S,
    pub x: S,
    pub y: S,
    pub kind: NodeKind,
    /// True for minima at (numerically) zero anisotropy: tensor degeneracies.
    pub degenerate: bool,
    /// Index of the swept vertex this node sits on.
    pub vertex: usize,
    /// Original triangle that produced an inserted vertex, if any.
    pub parent_triangle: Option<usize>,
}

/// Merge tree from an ascending (join) or descending (split) sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JoinTree<S> {
    pub nodes: Vec<TreeNode<S>>,
    /// `(child, parent)` pairs; every non-root node has exactly one parent.
    pub edges: Vec<(usize, usize)>,
}

impl<S: Scalar> JoinTree<S> {
    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Minimum | NodeKind::Maximum))
            .count()
    }

    pub fn saddle_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Saddle).count()
    }

    pub fn degenerate_leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.degenerate).count()
    }
}

/// Union-find with path halving and union by size.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        big
    }
}

/// Value-order sweep over an arbitrary triangulation.
fn sweep_tree<S: Scalar>(
    vertices: &[Point<S>],
    values: &[S],
    triangles: &[[usize; 3]],
    parent_triangle: &[Option<usize>],
    descending: bool,
) -> Result<JoinTree<S>> {
    let n = vertices.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    for adj in adjacency.iter_mut() {
        adj.sort_unstable();
        adj.dedup();
    }

    // Symbolic perturbation: order by (value, index), flipped for splits.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let cmp = values[a].partial_cmp(&values[b]).expect("finite values");
        let cmp = if descending { cmp.reverse() } else { cmp };
        cmp.then(a.cmp(&b))
    });
    let mut rank = vec![0usize; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }

    let vmax = values.iter().copied().fold(S::zero(), S::max);
    let eps_zero = flt::<S>(DEGENERATE_LEAF_REL_TOL) * vmax;
    let leaf_kind = if descending { NodeKind::Maximum } else { NodeKind::Minimum };

    let mut uf = UnionFind::new(n);
    let mut comp_node: Vec<Option<usize>> = vec![None; n];
    let mut nodes: Vec<TreeNode<S>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    let push_node = |nodes: &mut Vec<TreeNode<S>>, v: usize, kind: NodeKind| -> usize {
        let id = nodes.len();
        let value = values[v];
        nodes.push(TreeNode {
            id,
            value,
            x: vertices[v].x,
            y: vertices[v].y,
            kind,
            degenerate: kind == NodeKind::Minimum && value <= eps_zero,
            vertex: v,
            parent_triangle: parent_triangle[v],
        });
        id
    };

    for &v in &order {
        // Distinct earlier components among the neighbors, in node-id order.
        let mut comps: Vec<(usize, usize)> = Vec::new();
        for &u in &adjacency[v] {
            if rank[u] < rank[v] {
                let root = uf.find(u);
                if !comps.iter().any(|&(r, _)| r == root) {
                    comps.push((root, comp_node[root].expect("component has a node")));
                }
            }
        }
        comps.sort_by_key(|&(_, node)| node);

        match comps.len() {
            0 => {
                let id = push_node(&mut nodes, v, leaf_kind);
                let root = uf.find(v);
                comp_node[root] = Some(id);
            }
            1 => {
                let root = uf.union(v, comps[0].0);
                comp_node[root] = Some(comps[0].1);
            }
            _ => {
                // Chain of binary saddles at this vertex.
                let mut acc_node = comps[0].1;
                let mut root = uf.union(v, comps[0].0);
                for &(other_root, other_node) in &comps[1..] {
                    let saddle = push_node(&mut nodes, v, NodeKind::Saddle);
                    edges.push((acc_node, saddle));
                    edges.push((other_node, saddle));
                    root = uf.union(root, other_root);
                    acc_node = saddle;
                }
                comp_node[root] = Some(acc_node);
            }
        }
    }

    let top = *order.last().ok_or_else(|| Error::InvalidInput("empty mesh".into()))?;
    let final_root = uf.find(top);
    if (0..n).any(|v| uf.find(v) != final_root) {
        return Err(Error::InvalidInput(
            "mesh is not connected; merge tree undefined".into(),
        ));
    }
    let last_node = comp_node[final_root].expect("final component has a node");
    let root_id = push_node(&mut nodes, top, NodeKind::Root);
    edges.push((last_node, root_id));

    Ok(JoinTree { nodes, edges })
}

/// Lowest original triangle adjacent to each subdivided vertex, used as
/// provenance for inserted vertices.
fn vertex_parents<S: Scalar>(sub: &SubdividedMesh<S>) -> Vec<Option<usize>> {
    let mut best: Vec<Option<usize>> = vec![None; sub.vertices.len()];
    for (i, tri) in sub.triangles.iter().enumerate() {
        let parent = sub.provenance[i];
        for &vid in tri {
            if matches!(sub.vertex_origin[vid], VertexOrigin::Original(_)) {
                continue;
            }
            best[vid] = Some(best[vid].map_or(parent, |p: usize| p.min(parent)));
        }
    }
    best
}

/// Join tree of the quadratic field, swept on the monotone subdivision.
pub fn join_tree_subdivided<S: Scalar>(sub: &SubdividedMesh<S>) -> Result<JoinTree<S>> {
    sweep_tree(
        &sub.vertices,
        &sub.values,
        &sub.triangles,
        &vertex_parents(sub),
        false,
    )
}

/// Split tree of the quadratic field: the join tree of the negated values.
pub fn split_tree_subdivided<S: Scalar>(sub: &SubdividedMesh<S>) -> Result<JoinTree<S>> {
    sweep_tree(
        &sub.vertices,
        &sub.values,
        &sub.triangles,
        &vertex_parents(sub),
        true,
    )
}

fn linear_parts<S: Scalar>(mesh: &TensorMesh<S>) -> (Vec<S>, Vec<Option<usize>>) {
    let values: Vec<S> = mesh.tensors.iter().map(anisotropy).collect();
    let parents = vec![None; mesh.vertices.len()];
    (values, parents)
}

/// Join tree for one interpolation mode. Modes `b` and `c` share the
/// subdivision sweep; mode `a` sweeps the original vertices.
pub fn join_tree<S: Scalar>(mesh: &TensorMesh<S>, mode: Mode) -> Result<JoinTree<S>> {
    match mode {
        Mode::A => {
            let (values, parents) = linear_parts(mesh);
            sweep_tree(&mesh.vertices, &values, &mesh.triangles, &parents, false)
        }
        Mode::B | Mode::C => join_tree_subdivided(&subdivide_mesh(mesh)?),
    }
}

/// Split tree for one interpolation mode.
pub fn split_tree<S: Scalar>(mesh: &TensorMesh<S>, mode: Mode) -> Result<JoinTree<S>> {
    match mode {
        Mode::A => {
            let (values, parents) = linear_parts(mesh);
            sweep_tree(&mesh.vertices, &values, &mesh.triangles, &parents, true)
        }
        Mode::B | Mode::C => split_tree_subdivided(&subdivide_mesh(mesh)?),
    }
}

/// Contour of one isovalue: polylines in original coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContourSet<S> {
    pub isovalue: S,
    pub polylines: Vec<Vec<Point<S>>>,
    /// Whether each polyline is a closed loop.
    pub closed: Vec<bool>,
    /// Per polyline, per segment: index of the producing triangle (mode `a`)
    /// or monotone piece (modes `b`, `c`). Point contours have no segments.
    pub sources: Vec<Vec<usize>>,
}

/// Oriented segment soup entry prior to chaining.
struct RawSegment<S> {
    a: Point<S>,
    b: Point<S>,
    source: usize,
}

/// Extracts the isovalue contour for a mode. Modes `a` and `b` march the
/// respective piecewise linear meshes; mode `c` intersects the exact conic
/// contours (circles in normalized coordinates, parallel lines for strips)
/// with each monotone piece and discretizes them to the chordal tolerance.
pub fn extract_contours<S: Scalar>(
    mesh: &TensorMesh<S>,
    sub: &SubdividedMesh<S>,
    mode: Mode,
    isovalue: S,
) -> Result<ContourSet<S>> {
    let diag = mesh.bbox_diagonal_sq().sqrt();
    let snap = flt::<S>(CHAIN_SNAP_REL_TOL) * diag.max(S::one());
    let chord_tol = flt::<S>(CHORD_REL_TOL) * diag.max(S::one());

    let mut segments: Vec<RawSegment<S>> = Vec::new();
    let mut points: Vec<(Point<S>, usize)> = Vec::new();

    match mode {
        Mode::A => {
            for t in 0..mesh.triangles.len() {
                let verts = mesh.triangle_points(t);
                let tens = mesh.triangle_tensors(t);
                let values = [
                    anisotropy(&tens[0]),
                    anisotropy(&tens[1]),
                    anisotropy(&tens[2]),
                ];
                march_triangle(&verts, &values, isovalue, t, &mut segments);
            }
        }
        Mode::B => {
            for (i, tri) in sub.triangles.iter().enumerate() {
                let verts = tri.map(|v| sub.vertices[v]);
                let values = tri.map(|v| sub.values[v]);
                march_triangle(&verts, &values, isovalue, i, &mut segments);
            }
        }
        Mode::C => {
            exact_contours(sub, isovalue, chord_tol, &mut segments, &mut points)?;
        }
    }

    let (mut polylines, mut closed, mut sources) = chain_segments(segments, snap);
    for (p, _src) in points {
        polylines.push(vec![p]);
        closed.push(false);
        sources.push(Vec::new());
    }
    Ok(ContourSet {
        isovalue,
        polylines,
        closed,
        sources,
    })
}

/// Piecewise linear contour of one triangle. Vertices exactly on the level
/// count as the upper side, so each triangle yields zero or two crossings.
fn march_triangle<S: Scalar>(
    verts: &[Point<S>; 3],
    values: &[S; 3],
    isovalue: S,
    source: usize,
    out: &mut Vec<RawSegment<S>>,
) {
    let below = [
        values[0] < isovalue,
        values[1] < isovalue,
        values[2] < isovalue,
    ];
    let mut crossings: Vec<Point<S>> = Vec::new();
    for i in 0..3 {
        let j = (i + 1) % 3;
        if below[i] != below[j] {
            let t = (isovalue - values[i]) / (values[j] - values[i]);
            crossings.push(verts[i].lerp(verts[j], t));
        }
    }
    if crossings.len() == 2 {
        out.push(RawSegment {
            a: crossings[0],
            b: crossings[1],
            source,
        });
    }
}

/// Exact contours of the quadratic field, per monotone piece.
fn exact_contours<S: Scalar>(
    sub: &SubdividedMesh<S>,
    isovalue: S,
    chord_tol: S,
    segments: &mut Vec<RawSegment<S>>,
    points: &mut Vec<(Point<S>, usize)>,
) -> Result<()> {
    let vmax = sub.max_value();
    let eps_zero = flt::<S>(DEGENERATE_LEAF_REL_TOL) * vmax;
    let mut emitted_apexes: BTreeSet<usize> = BTreeSet::new();

    for (i, tri) in sub.monotone.iter().enumerate() {
        let q = &sub.quadrics[tri.parent];
        match q.kind {
            QuadricKind::EllipticMin => {
                let frame = sub.frames[tri.parent]
                    .as_ref()
                    .expect("elliptic parent has frame");
                let offset = tri.values[0] - tri.verts_norm[0].norm_sq();
                let radius2 = isovalue - offset;
                if radius2 < S::zero() {
                    continue;
                }
                if tri.case == MonotoneCase::MinAtVertex
                    && isovalue <= eps_zero
                    && tri.values[0] <= eps_zero
                {
                    // Isolated zero of the anisotropy: a point contour, once
                    // per apex vertex.
                    if emitted_apexes.insert(tri.vertex_ids[0]) {
                        points.push((tri.verts_orig[0], i));
                    }
                    continue;
                }
                if radius2 <= S::zero() {
                    continue;
                }
                circle_arcs_in_triangle(
                    &tri.verts_norm,
                    radius2.sqrt(),
                    frame,
                    chord_tol,
                    i,
                    segments,
                );
            }
            QuadricKind::DegenerateParallel => {
                let strip = q
                    .strip_model()
                    .ok_or_else(|| Error::Kernel("degenerate quadric without strip".into()))?;
                if strip.kappa <= S::zero() || isovalue < strip.min_value {
                    continue;
                }
                let hw = ((isovalue - strip.min_value) / strip.kappa).sqrt();
                let mut lines = vec![strip.t_star + hw];
                if hw > S::zero() {
                    lines.push(strip.t_star - hw);
                }
                for line_t in lines {
                    if let Some((a, b)) =
                        line_in_triangle(&tri.verts_orig, strip.normal, line_t)
                    {
                        segments.push(RawSegment { a, b, source: i });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Arcs of the circle `|p| = radius` inside a (normalized) triangle, mapped
/// back to original coordinates and flattened to the chordal tolerance.
fn circle_arcs_in_triangle<S: Scalar>(
    verts: &[Point<S>; 3],
    radius: S,
    frame: &crate::quadric::NormalizedFrame<S>,
    chord_tol: S,
    source: usize,
    out: &mut Vec<RawSegment<S>>,
) {
    let two_pi = flt::<S>(std::f64::consts::TAU);
    let mut angles: Vec<S> = Vec::new();
    let r2 = radius * radius;
    for i in 0..3 {
        let a = verts[i];
        let d = verts[(i + 1) % 3] - a;
        let roots = crate::geom::quadratic_roots(
            d.norm_sq(),
            a.dot(d) * flt(2.0),
            a.norm_sq() - r2,
        );
        for t in roots {
            if t >= S::zero() && t <= S::one() {
                let p = a + d * t;
                angles.push(p.y.atan2(p.x));
            }
        }
    }
    if angles.is_empty() {
        return;
    }
    angles.sort_by(|x, y| x.partial_cmp(y).expect("finite angles"));
    angles.dedup_by(|a, b| (*a - *b).abs() <= flt(1e-12));

    // Chord flattening: normalized sagitta shrinks by the largest inverse
    // scale when mapped back, so budget accordingly.
    let min_scale = frame.scales.1.sqrt();
    let tol_norm = chord_tol * min_scale;
    let max_step = if tol_norm >= radius {
        flt::<S>(std::f64::consts::FRAC_PI_2)
    } else {
        let c = (S::one() - tol_norm / radius).max(-S::one());
        (flt::<S>(2.0) * c.acos()).max(flt(1e-3))
    };

    let k = angles.len();
    for idx in 0..k {
        let a0 = angles[idx];
        let mut a1 = angles[(idx + 1) % k];
        if idx + 1 == k {
            a1 += two_pi;
        }
        let span = a1 - a0;
        if span <= flt(1e-12) {
            continue;
        }
        let mid = a0 + span / flt(2.0);
        let mid_pt = Point::new(radius * mid.cos(), radius * mid.sin());
        if !point_in_triangle(mid_pt, verts) {
            continue;
        }
        let steps = (span / max_step).ceil();
        let steps = steps.to_usize().unwrap_or(1).clamp(1, 65_536);
        let mut prev = arc_point(radius, a0, frame);
        for s in 1..=steps {
            let phi = a0 + span * flt(s as f64 / steps as f64);
            let cur = arc_point(radius, phi, frame);
            out.push(RawSegment { a: prev, b: cur, source });
            prev = cur;
        }
    }
}

fn arc_point<S: Scalar>(
    radius: S,
    phi: S,
    frame: &crate::quadric::NormalizedFrame<S>,
) -> Point<S> {
    frame.to_original(Point::new(radius * phi.cos(), radius * phi.sin()))
}

fn point_in_triangle<S: Scalar>(p: Point<S>, verts: &[Point<S>; 3]) -> bool {
    match barycentric(p, verts[0], verts[1], verts[2]) {
        Some(w) => w.iter().all(|&wi| wi >= flt(-1e-9)),
        None => false,
    }
}

/// Chord of the line `normal . p = c` inside a triangle, if any.
fn line_in_triangle<S: Scalar>(
    verts: &[Point<S>; 3],
    normal: Point<S>,
    c: S,
) -> Option<(Point<S>, Point<S>)> {
    let mut pts: Vec<Point<S>> = Vec::new();
    for i in 0..3 {
        let a = verts[i];
        let b = verts[(i + 1) % 3];
        let da = normal.dot(a) - c;
        let db = normal.dot(b) - c;
        if (da < S::zero()) != (db < S::zero()) {
            let t = da / (da - db);
            pts.push(a.lerp(b, t));
        }
    }
    if pts.len() < 2 {
        return None;
    }
    // With more than two hits (vertex grazing), take the extreme pair along
    // the line direction.
    let dir = normal.perp();
    pts.sort_by(|p, q| dir.dot(*p).partial_cmp(&dir.dot(*q)).expect("finite"));
    let a = pts[0];
    let b = pts[pts.len() - 1];
    ((b - a).norm_sq() > S::zero()).then_some((a, b))
}

/// Chained polylines: points, closed flags, and source triangles per chain.
type Chained<S> = (Vec<Vec<Point<S>>>, Vec<bool>, Vec<Vec<usize>>);

/// Joins raw segments into polylines by quantized endpoint matching.
/// Open chains start at degree-1 endpoints (smallest key first); remaining
/// loops start at their smallest key, so output order is deterministic.
fn chain_segments<S: Scalar>(segments: Vec<RawSegment<S>>, snap: S) -> Chained<S> {
    let key = |p: Point<S>| -> (i64, i64) {
        let q = |x: S| (x / snap).round().to_f64().map_or(0, |v| v as i64);
        (q(p.x), q(p.y))
    };
    let mut adj: BTreeMap<(i64, i64), Vec<(usize, bool)>> = BTreeMap::new();
    for (i, seg) in segments.iter().enumerate() {
        adj.entry(key(seg.a)).or_default().push((i, false));
        adj.entry(key(seg.b)).or_default().push((i, true));
    }

    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    let mut closed_flags = Vec::new();
    let mut sources = Vec::new();

    let walk = |start_seg: usize,
                    start_from_b: bool,
                    used: &mut Vec<bool>|
     -> (Vec<Point<S>>, Vec<usize>, bool) {
        let mut pts = Vec::new();
        let mut srcs = Vec::new();
        let seg = &segments[start_seg];
        let (mut cur, first) = if start_from_b {
            (seg.a, seg.b)
        } else {
            (seg.b, seg.a)
        };
        pts.push(first);
        pts.push(cur);
        srcs.push(seg.source);
        used[start_seg] = true;
        let start_key = key(first);
        loop {
            let k = key(cur);
            if k == start_key && pts.len() > 2 {
                return (pts, srcs, true);
            }
            let next = adj
                .get(&k)
                .and_then(|ends| ends.iter().find(|&&(s, _)| !used[s]).copied());
            match next {
                None => return (pts, srcs, false),
                Some((s, at_b)) => {
                    used[s] = true;
                    let seg = &segments[s];
                    cur = if at_b { seg.a } else { seg.b };
                    pts.push(cur);
                    srcs.push(seg.source);
                }
            }
        }
    };

    // Open chains first: endpoints whose key has odd degree.
    let open_starts: Vec<(usize, bool)> = adj
        .values()
        .filter(|ends| ends.len() % 2 == 1)
        .flat_map(|ends| ends.iter().copied())
        .collect();
    for (s, at_b) in open_starts {
        if !used[s] {
            // Walk away from the open endpoint.
            let (pts, srcs, closed) = walk(s, at_b, &mut used);
            polylines.push(pts);
            closed_flags.push(closed);
            sources.push(srcs);
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            let (pts, srcs, closed) = walk(s, false, &mut used);
            polylines.push(pts);
            closed_flags.push(closed);
            sources.push(srcs);
        }
    }
    (polylines, closed_flags, sources)
}
