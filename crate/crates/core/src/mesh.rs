//! Triangulated 2D symmetric tensor fields.
//!
//! A [`TensorMesh`] stores one symmetric 2x2 tensor per vertex; inside each
//! triangle the tensor is interpolated component-wise linearly. Ingestion
//! validates the mesh and reorients every triangle counterclockwise so that
//! downstream area computations can rely on positive orientation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationIssue, ValidationReport};
use crate::geom::{signed_area_x2, Point};
use crate::scalar::{flt, to_f64, Scalar};

/// Relative degeneracy threshold: a triangle counts as degenerate when its
/// |signed area| is at most `1e-12 * (bbox diagonal)^2`.
pub const DEGENERACY_REL_TOL: f64 = 1e-12;

/// Symmetric 2x2 tensor `((e, f), (f, g))`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tensor2S<S> {
    pub e: S,
    pub f: S,
    pub g: S,
}

impl<S: Scalar> Tensor2S<S> {
    pub fn new(e: S, f: S, g: S) -> Self {
        Self { e, f, g }
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> (S, S) {
        let half = flt::<S>(0.5);
        let mid = (self.e + self.g) * half;
        let rad = ((self.e - self.g) * half).hypot(self.f);
        (mid + rad, mid - rad)
    }

    /// Tensor with eigenvalues `(lam, mu)` and major eigenvector at `angle`.
    pub fn from_eigen(lam: S, mu: S, angle: S) -> Self {
        let (s, c) = angle.sin_cos();
        let d = lam - mu;
        Self {
            e: mu + d * c * c,
            f: d * c * s,
            g: mu + d * s * s,
        }
    }

    pub fn lerp(&self, o: &Self, t: S) -> Self {
        let one = S::one();
        Self {
            e: self.e * (one - t) + o.e * t,
            f: self.f * (one - t) + o.f * t,
            g: self.g * (one - t) + o.g * t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite() && self.f.is_finite() && self.g.is_finite()
    }
}

/// Squared eigenvalue difference `(lambda - mu)^2 = (e - g)^2 + 4 f^2`.
///
/// Non-negative by construction and zero exactly at degenerate tensors
/// (equal eigenvalues).
pub fn anisotropy<S: Scalar>(t: &Tensor2S<S>) -> S {
    let d = t.e - t.g;
    let two_f = t.f + t.f;
    d * d + two_f * two_f
}

/// Linear scalar field `s(x, y) = sx * x + sy * y + sc`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearCoeffs<S> {
    pub sx: S,
    pub sy: S,
    pub sc: S,
}

impl<S: Scalar> LinearCoeffs<S> {
    pub fn eval(&self, p: Point<S>) -> S {
        self.sx * p.x + self.sy * p.y + self.sc
    }

    pub fn gradient(&self) -> Point<S> {
        Point::new(self.sx, self.sy)
    }
}

/// Coefficients of the linear interpolant taking `values[i]` at `pts[i]`.
///
/// Closed form via the adjugate of the vertex matrix; the shared denominator
/// is twice the signed triangle area, so callers must pass a non-degenerate
/// triangle.
pub fn linear_coeffs<S: Scalar>(pts: &[Point<S>; 3], values: &[S; 3]) -> LinearCoeffs<S> {
    let [p1, p2, p3] = *pts;
    let [s1, s2, s3] = *values;
    let den = (p2.y - p3.y) * (p1.x - p3.x) + (p3.x - p2.x) * (p1.y - p3.y);
    LinearCoeffs {
        sx: ((p2.y - p3.y) * s1 + (p3.y - p1.y) * s2 + (p1.y - p2.y) * s3) / den,
        sy: ((p3.x - p2.x) * s1 + (p1.x - p3.x) * s2 + (p2.x - p1.x) * s3) / den,
        sc: ((p2.x * p3.y - p3.x * p2.y) * s1
            + (p3.x * p1.y - p1.x * p3.y) * s2
            + (p1.x * p2.y - p2.x * p1.y) * s3)
            / den,
    }
}

/// Triangle mesh with one symmetric tensor per vertex.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorMesh<S> {
    pub vertices: Vec<Point<S>>,
    pub triangles: Vec<[usize; 3]>,
    pub tensors: Vec<Tensor2S<S>>,
}

impl<S: Scalar> TensorMesh<S> {
    /// Builds a mesh, reorienting clockwise triangles, and rejects invalid
    /// input with the full validation report.
    pub fn new(
        vertices: Vec<Point<S>>,
        triangles: Vec<[usize; 3]>,
        tensors: Vec<Tensor2S<S>>,
    ) -> Result<Self> {
        let mut mesh = Self {
            vertices,
            triangles,
            tensors,
        };
        let report = mesh.normalize_orientation();
        if report.is_valid() {
            Ok(mesh)
        } else {
            Err(Error::InvalidMesh(report))
        }
    }

    /// Validates in place and flips clockwise triangles to counterclockwise.
    /// Returns the report; the mesh is usable only if `report.is_valid()`.
    pub fn normalize_orientation(&mut self) -> ValidationReport {
        let mut report = self.validate();
        if !report.is_valid() {
            return report;
        }
        for tri in self.triangles.iter_mut() {
            let [a, b, c] = *tri;
            let area2 = signed_area_x2(self.vertices[a], self.vertices[b], self.vertices[c]);
            if area2 < S::zero() {
                tri.swap(1, 2);
                report.reoriented += 1;
            }
        }
        report
    }

    /// Checks counts, finiteness, index bounds, and triangle degeneracy.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.vertices.len() != self.tensors.len() {
            report.issues.push(ValidationIssue::CountMismatch {
                vertices: self.vertices.len(),
                tensors: self.tensors.len(),
            });
        }
        if self.triangles.is_empty() {
            report.issues.push(ValidationIssue::Empty);
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let tensor_ok = self.tensors.get(i).is_none_or(Tensor2S::is_finite);
            if !(v.x.is_finite() && v.y.is_finite() && tensor_ok) {
                report.issues.push(ValidationIssue::NonFiniteValue { index: i });
            }
        }
        let area_tol = flt::<S>(DEGENERACY_REL_TOL) * self.bbox_diagonal_sq();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= self.vertices.len()) {
                report.issues.push(ValidationIssue::IndexOutOfRange {
                    triangle: t,
                    index: bad,
                });
                continue;
            }
            let area2 = signed_area_x2(
                self.vertices[tri[0]],
                self.vertices[tri[1]],
                self.vertices[tri[2]],
            );
            if area2.abs() <= area_tol + area_tol {
                report.issues.push(ValidationIssue::DegenerateTriangle {
                    triangle: t,
                    area: to_f64(area2 / flt(2.0)),
                });
            }
        }
        report
    }

    pub fn triangle_points(&self, t: usize) -> [Point<S>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_tensors(&self, t: usize) -> [Tensor2S<S>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.tensors[a], self.tensors[b], self.tensors[c]]
    }

    /// Sum of (counterclockwise) triangle areas.
    pub fn total_area(&self) -> S {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                signed_area_x2(a, b, c) / flt(2.0)
            })
            .sum()
    }

    /// Axis-aligned bounding box as `(min, max)` corners.
    pub fn bbox(&self) -> (Point<S>, Point<S>) {
        let mut lo = Point::new(S::infinity(), S::infinity());
        let mut hi = Point::new(S::neg_infinity(), S::neg_infinity());
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    pub fn bbox_diagonal_sq(&self) -> S {
        if self.vertices.is_empty() {
            return S::zero();
        }
        let (lo, hi) = self.bbox();
        (hi - lo).norm_sq()
    }

    /// Largest per-vertex anisotropy; zero for an empty mesh.
    pub fn max_anisotropy(&self) -> S {
        self.tensors
            .iter()
            .map(anisotropy)
            .fold(S::zero(), S::max)
    }
}

/// Linear coefficient planes of the three tensor components `(e, f, g)` over
/// one triangle.
pub fn tensor_field_coeffs<S: Scalar>(
    mesh: &TensorMesh<S>,
    t: usize,
) -> [LinearCoeffs<S>; 3] {
    let pts = mesh.triangle_points(t);
    let [t1, t2, t3] = mesh.triangle_tensors(t);
    [
        linear_coeffs(&pts, &[t1.e, t2.e, t3.e]),
        linear_coeffs(&pts, &[t1.f, t2.f, t3.f]),
        linear_coeffs(&pts, &[t1.g, t2.g, t3.g]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anisotropy_of_diagonal_tensor() {
        let t = Tensor2S::new(3.0, 0.0, 1.0);
        assert_eq!(anisotropy(&t), 4.0);
    }

    #[test]
    fn anisotropy_matches_eigenvalue_gap() {
        let mut state = 0x243f6a88u64;
        for _ in 0..100 {
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            };
            let t = Tensor2S::new(next(), next(), next());
            let (l1, l2) = t.eigenvalues();
            let gap = (l1 - l2) * (l1 - l2);
            assert!((gap - anisotropy(&t)).abs() <= 1e-12 * anisotropy(&t).max(1.0));
        }
    }

    #[test]
    fn from_eigen_round_trips() {
        let t = Tensor2S::<f64>::from_eigen(2.0, 1.0, 0.7);
        let (l1, l2) = t.eigenvalues();
        assert!((l1 - 2.0).abs() < 1e-14);
        assert!((l2 - 1.0).abs() < 1e-14);
        assert!((anisotropy(&t) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_coeffs_right_triangle() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 2.0),
        ];
        let c = linear_coeffs(&pts, &[1.0, 3.0, 5.0]);
        assert_eq!((c.sx, c.sy, c.sc), (1.0, 2.0, 1.0));
    }

    #[test]
    fn linear_coeffs_reproduce_vertex_values() {
        let pts: [Point<f64>; 3] = [
            Point::new(-1.3, 0.4),
            Point::new(2.1, -0.7),
            Point::new(0.3, 3.9),
        ];
        let values = [4.0f64, -2.5, 7.25];
        let c = linear_coeffs(&pts, &values);
        for i in 0..3 {
            let err = (c.eval(pts[i]) - values[i]).abs();
            assert!(err <= 1e-12 * values[i].abs().max(1.0), "vertex {i}: {err}");
        }
    }

    fn unit_mesh() -> TensorMesh<f64> {
        TensorMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
            vec![
                Tensor2S::new(1.0, 0.0, 0.0),
                Tensor2S::new(0.0, 1.0, 0.0),
                Tensor2S::new(0.0, 0.0, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ingestion_reorients_clockwise_triangles() {
        let mesh = TensorMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 2, 1]],
            vec![Tensor2S::default(); 3],
        )
        .unwrap();
        let [a, b, c] = mesh.triangle_points(0);
        assert!(signed_area_x2(a, b, c) > 0.0);
    }

    #[test]
    fn validation_catches_bad_input() {
        let mut mesh = unit_mesh();
        mesh.triangles.push([0, 1, 7]);
        let report = mesh.validate();
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::IndexOutOfRange { index: 7, .. })));

        let mut mesh = unit_mesh();
        mesh.triangles.push([0, 1, 1]);
        let report = mesh.validate();
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::DegenerateTriangle { .. })));

        let mut mesh = unit_mesh();
        mesh.vertices[1].x = f64::NAN;
        assert!(!mesh.validate().is_valid());
    }

    #[test]
    fn tensor_planes_interpolate_components() {
        let mesh = unit_mesh();
        let [ce, cf, cg] = tensor_field_coeffs(&mesh, 0);
        let mid = Point::new(0.25, 0.25);
        // Component planes evaluated at the centroid-ish point agree with
        // direct barycentric interpolation.
        assert!((ce.eval(mid) - 0.5).abs() < 1e-14);
        assert!((cf.eval(mid) - 0.25).abs() < 1e-14);
        assert!((cg.eval(mid) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn mesh_area_and_bbox() {
        let mesh = unit_mesh();
        assert!((mesh.total_area() - 0.5).abs() < 1e-15);
        assert!((mesh.bbox_diagonal_sq() - 2.0).abs() < 1e-15);
        // Vertex (0,1,0) dominates: 4f² = 4.
        assert!((mesh.max_anisotropy() - 4.0).abs() < 1e-15);
    }
}
