//! Per-triangle quadratic model of the squared anisotropy.
//!
//! With component-wise linear tensors, `u = e - g` and `w = 2 f` are linear
//! over each triangle and the squared anisotropy is `s = u^2 + w^2`, a
//! quadratic `a x^2 + b x y + c y^2 + d x + e2 y + f2` whose discriminant
//! `h = 4ac - b^2` is a perfect square and therefore never negative: contours
//! are ellipses (gradients of `u` and `w` independent) or parallel line pairs
//! (gradients parallel). Tensor-built models keep the two linear forms so the
//! critical point comes from a 2x2 linear solve and evaluation stays a sum of
//! squares; both sidestep the cancellation the raw coefficient formulas incur
//! near the degenerate boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::LinearCoeffs;
use crate::scalar::{flt, Scalar};

/// Relative threshold on `h` below which a quadric counts as degenerate.
pub const H_CLASSIFY_REL_TOL: f64 = 1e-10;

/// Relative agreement required between the two `h` formulas.
pub const H_CROSSCHECK_REL_TOL: f64 = 1e-7;

/// Contour shape of the quadratic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadricKind {
    /// `h > eps_h`: elliptic contours around an isolated minimum.
    EllipticMin,
    /// `h <= eps_h`: parallel gradients, contours are line pairs.
    DegenerateParallel,
}

/// Quadratic `s(x, y) = a x^2 + b x y + c y^2 + d x + e2 y + f2` plus its
/// invariants and classification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadricModel<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
    pub e2: S,
    pub f2: S,
    /// Discriminant `4ac - b^2`; computed as `4 (u x w)^2` for tensor-built
    /// models, which is exactly non-negative.
    pub h: S,
    /// Second invariant `b d e2 - a e2^2 - c d^2`; vanishes with `h`.
    pub i_inv: S,
    pub kind: QuadricKind,
    /// Isolated minimum, present exactly for [`QuadricKind::EllipticMin`].
    pub critical_point: Option<Point<S>>,
    /// Linear forms `(u, w)` when built from a tensor field.
    uw: Option<(LinearCoeffs<S>, LinearCoeffs<S>)>,
}

/// Rigid-plus-scaling change of coordinates under which an elliptic quadric
/// becomes `x^2 + y^2 + translated_constant`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizedFrame<S> {
    /// Critical point; subtracted first.
    pub translation: Point<S>,
    /// Orthonormal columns (major axis first), determinant `+1`.
    pub rotation: [Point<S>; 2],
    /// Eigenvalues `(lam1, lam2)` of the quadratic form, `lam1 >= lam2 > 0`.
    pub scales: (S, S),
    /// `sqrt(lam1 * lam2)`: normalized area = original area * area_factor.
    pub area_factor: S,
}

/// One-dimensional reduction of a degenerate quadric: values depend only on
/// `t = normal . p` via `s = kappa (t - t_star)^2 + min_value`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StripModel<S> {
    pub normal: Point<S>,
    pub kappa: S,
    pub t_star: S,
    pub min_value: S,
}

impl<S: Scalar> QuadricModel<S> {
    /// Builds the model from the linear component planes of `(e, f, g)`.
    pub fn from_tensor_coeffs(
        ce: &LinearCoeffs<S>,
        cf: &LinearCoeffs<S>,
        cg: &LinearCoeffs<S>,
    ) -> Self {
        let two = flt::<S>(2.0);
        let u = LinearCoeffs {
            sx: ce.sx - cg.sx,
            sy: ce.sy - cg.sy,
            sc: ce.sc - cg.sc,
        };
        let w = LinearCoeffs {
            sx: two * cf.sx,
            sy: two * cf.sy,
            sc: two * cf.sc,
        };
        let a = u.sx * u.sx + w.sx * w.sx;
        let b = two * (u.sx * u.sy + w.sx * w.sy);
        let c = u.sy * u.sy + w.sy * w.sy;
        let d = two * (u.sx * u.sc + w.sx * w.sc);
        let e2 = two * (u.sy * u.sc + w.sy * w.sc);
        let f2 = u.sc * u.sc + w.sc * w.sc;
        // h = 4ac - b^2 collapses to 4 (ux wy - uy wx)^2, a perfect square.
        let cross = u.sx * w.sy - u.sy * w.sx;
        let h = flt::<S>(4.0) * cross * cross;
        let i_inv = b * d * e2 - a * e2 * e2 - c * d * d;
        let kind = classify(h, a, b, c);
        let critical_point = match kind {
            QuadricKind::EllipticMin => Some(Point::new(
                (w.sc * u.sy - u.sc * w.sy) / cross,
                (w.sx * u.sc - u.sx * w.sc) / cross,
            )),
            QuadricKind::DegenerateParallel => None,
        };
        Self {
            a,
            b,
            c,
            d,
            e2,
            f2,
            h,
            i_inv,
            kind,
            critical_point,
            uw: Some((u, w)),
        }
    }

    /// Builds the model from raw quadratic coefficients.
    pub fn from_coefficients(a: S, b: S, c: S, d: S, e2: S, f2: S) -> Self {
        let four = flt::<S>(4.0);
        let h = four * a * c - b * b;
        let i_inv = b * d * e2 - a * e2 * e2 - c * d * d;
        let kind = classify(h, a, b, c);
        let critical_point = match kind {
            QuadricKind::EllipticMin => Some(Point::new(
                (-(c + c) * d + b * e2) / h,
                (-(a + a) * e2 + b * d) / h,
            )),
            QuadricKind::DegenerateParallel => None,
        };
        Self {
            a,
            b,
            c,
            d,
            e2,
            f2,
            h,
            i_inv,
            kind,
            critical_point,
            uw: None,
        }
    }

    /// Evaluates the quadric; tensor-built models use the sum of squares of
    /// the linear forms, which cannot go negative.
    pub fn eval(&self, p: Point<S>) -> S {
        match &self.uw {
            Some((u, w)) => {
                let uv = u.eval(p);
                let wv = w.eval(p);
                uv * uv + wv * wv
            }
            None => self.eval_coefficients(p),
        }
    }

    /// Evaluates via the raw polynomial, regardless of construction.
    pub fn eval_coefficients(&self, p: Point<S>) -> S {
        (self.a * p.x + self.b * p.y + self.d) * p.x
            + (self.c * p.y + self.e2) * p.y
            + self.f2
    }

    /// Discriminant recomputed from the coefficients (`4ac - b^2`), for
    /// cross-checking against the stored `h`.
    pub fn h_discriminant(&self) -> S {
        flt::<S>(4.0) * self.a * self.c - self.b * self.b
    }

    /// Classification threshold used for this model's coefficients.
    pub fn h_tolerance(&self) -> S {
        classify_tolerance(self.a, self.b, self.c)
    }

    /// Tolerance within which `i_inv` must vanish for degenerate models:
    /// rounding noise of the three products plus the analytic remainder
    /// `|f2| * h` at the classification boundary.
    pub fn i_tolerance(&self) -> S {
        let t1 = (self.b * self.d * self.e2).abs();
        let t2 = (self.a * self.e2 * self.e2).abs();
        let t3 = (self.c * self.d * self.d).abs();
        let s2 = (flt::<S>(4.0) * self.a * self.c)
            .abs()
            .max(self.b * self.b);
        flt::<S>(H_CLASSIFY_REL_TOL) * (t1.max(t2).max(t3) + self.f2.abs() * s2 + S::one())
    }

    /// Scale of the quadratic coefficients, for relative tolerances.
    pub fn coeff_scale(&self) -> S {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(S::one())
    }

    /// The isolated minimum, or an error for degenerate models.
    pub fn critical_point(&self) -> Result<Point<S>> {
        self.critical_point.ok_or(Error::NoCriticalPoint)
    }

    /// Constant term after translating the origin into the critical point,
    /// i.e. the minimum value `f2 + i_inv / h`. Tensor-built models evaluate
    /// at the critical point instead, which is exact up to a sum of squares.
    pub fn translated_constant(&self) -> Result<S> {
        let pc = self.critical_point()?;
        if self.uw.is_some() {
            Ok(self.eval(pc))
        } else {
            Ok(self.f2 + self.i_inv / self.h)
        }
    }

    /// Diagonalizing frame of an elliptic model.
    pub fn normalize(&self) -> Result<NormalizedFrame<S>> {
        let translation = self.critical_point()?;
        let half = flt::<S>(0.5);
        let ma = self.a;
        let mc = self.c;
        let mb = self.b * half;
        let mid = (ma + mc) * half;
        let rad = ((ma - mc) * half).hypot(mb);
        let lam1 = mid + rad;
        // lam2 via the determinant h/4 avoids cancellation when rad ~ mid.
        let lam2 = self.h * flt::<S>(0.25) / lam1;
        if !(lam1 > S::zero() && lam2 > S::zero()) {
            return Err(Error::Kernel(format!(
                "non-positive eigenvalues ({lam1:?}, {lam2:?}) for elliptic quadric"
            )));
        }
        let rotation = if rad <= flt::<S>(1e-14) * mid.abs().max(S::one()) {
            // Nearly isotropic: any orthonormal basis diagonalizes.
            [Point::new(S::one(), S::zero()), Point::new(S::zero(), S::one())]
        } else {
            // Eigenvector of lam1; pick the better conditioned expression.
            let v1 = Point::new(mb, lam1 - ma);
            let v2 = Point::new(lam1 - mc, mb);
            let v = if v1.norm_sq() >= v2.norm_sq() { v1 } else { v2 };
            let ev1 = v
                .normalized()
                .unwrap_or(Point::new(S::one(), S::zero()));
            [ev1, ev1.perp()]
        };
        Ok(NormalizedFrame {
            translation,
            rotation,
            scales: (lam1, lam2),
            area_factor: (lam1 * lam2).sqrt(),
        })
    }

    /// One-dimensional reduction; `None` for elliptic models.
    pub fn strip_model(&self) -> Option<StripModel<S>> {
        if self.kind != QuadricKind::DegenerateParallel {
            return None;
        }
        Some(match &self.uw {
            Some((u, w)) => {
                let gu = u.gradient();
                let gw = w.gradient();
                let dir = if gu.norm_sq() >= gw.norm_sq() { gu } else { gw };
                match dir.normalized() {
                    None => StripModel {
                        // Constant field.
                        normal: Point::new(S::one(), S::zero()),
                        kappa: S::zero(),
                        t_star: S::zero(),
                        min_value: self.f2,
                    },
                    Some(normal) => {
                        let au = gu.dot(normal);
                        let aw = gw.dot(normal);
                        let kappa = au * au + aw * aw;
                        let t_star = -(au * u.sc + aw * w.sc) / kappa;
                        let ru = au * t_star + u.sc;
                        let rw = aw * t_star + w.sc;
                        StripModel {
                            normal,
                            kappa,
                            t_star,
                            min_value: ru * ru + rw * rw,
                        }
                    }
                }
            }
            None => {
                // Principal direction of the quadratic form; kappa is its
                // dominant eigenvalue (the other vanishes with h).
                let half = flt::<S>(0.5);
                let mb = self.b * half;
                let mid = (self.a + self.c) * half;
                let rad = ((self.a - self.c) * half).hypot(mb);
                let kappa = mid + rad;
                if kappa.abs() <= flt::<S>(1e-300) {
                    return Some(StripModel {
                        normal: Point::new(S::one(), S::zero()),
                        kappa: S::zero(),
                        t_star: S::zero(),
                        min_value: self.f2,
                    });
                }
                let v1 = Point::new(mb, kappa - self.a);
                let v2 = Point::new(kappa - self.c, mb);
                let v = if v1.norm_sq() >= v2.norm_sq() { v1 } else { v2 };
                let normal = v
                    .normalized()
                    .unwrap_or(Point::new(S::one(), S::zero()));
                let lin = Point::new(self.d, self.e2).dot(normal);
                let t_star = -lin / (kappa + kappa);
                StripModel {
                    normal,
                    kappa,
                    t_star,
                    min_value: self.f2 - kappa * t_star * t_star,
                }
            }
        })
    }
}

impl<S: Scalar> NormalizedFrame<S> {
    /// Original to normalized coordinates (translate, rotate, scale).
    pub fn to_normalized(&self, p: Point<S>) -> Point<S> {
        let t = p - self.translation;
        let r = Point::new(self.rotation[0].dot(t), self.rotation[1].dot(t));
        Point::new(r.x * self.scales.0.sqrt(), r.y * self.scales.1.sqrt())
    }

    /// Normalized back to original coordinates.
    pub fn to_original(&self, q: Point<S>) -> Point<S> {
        let r = Point::new(q.x / self.scales.0.sqrt(), q.y / self.scales.1.sqrt());
        self.translation + self.rotation[0] * r.x + self.rotation[1] * r.y
    }
}

impl<S: Scalar> StripModel<S> {
    /// Value of the reduced profile at `p`.
    pub fn eval(&self, p: Point<S>) -> S {
        let t = self.normal.dot(p) - self.t_star;
        self.kappa * t * t + self.min_value
    }
}

/// Classification threshold `eps_h = 1e-10 * max(|a c|, b^2, 1)`.
pub fn classify_tolerance<S: Scalar>(a: S, b: S, c: S) -> S {
    flt::<S>(H_CLASSIFY_REL_TOL) * (a * c).abs().max(b * b).max(S::one())
}

/// Splits quadrics into elliptic and degenerate by comparing `h` with the
/// coefficient-relative threshold.
pub fn classify<S: Scalar>(h: S, a: S, b: S, c: S) -> QuadricKind {
    if h > classify_tolerance(a, b, c) {
        QuadricKind::EllipticMin
    } else {
        QuadricKind::DegenerateParallel
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{linear_coeffs, tensor_field_coeffs, Tensor2S, TensorMesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
    }

    /// Reference model with known closed-form behavior.
    fn reference() -> QuadricModel<f64> {
        QuadricModel::from_coefficients(1.0, 1.0, 1.0, 0.4, 0.5, 0.07)
    }

    #[test]
    fn reference_model_invariants() {
        let q = reference();
        close(q.h, 3.0, 1e-15);
        close(q.i_inv, -0.21, 1e-15);
        assert_eq!(q.kind, QuadricKind::EllipticMin);
        let pc = q.critical_point().unwrap();
        close(pc.x, -0.1, 1e-15);
        close(pc.y, -0.2, 1e-15);
        // Minimum value vanishes for this model.
        assert!(q.translated_constant().unwrap().abs() <= 1e-12);
    }

    #[test]
    fn reference_model_normalization() {
        let q = reference();
        let frame = q.normalize().unwrap();
        let (l1, l2) = frame.scales;
        close(l1, 1.5, 1e-12);
        close(l2, 0.5, 1e-12);
        close(frame.area_factor, 0.75f64.sqrt(), 1e-12);
        // det of rotation is +1.
        close(frame.rotation[0].cross(frame.rotation[1]), 1.0, 1e-14);
        // Round trip and diagonalization.
        let p = Point::new(0.3, -0.7);
        let n = frame.to_normalized(p);
        close(n.norm_sq(), q.eval(p) - q.translated_constant().unwrap(), 1e-12);
        let back = frame.to_original(n);
        close(back.x, p.x, 1e-13);
        close(back.y, p.y, 1e-13);
    }

    fn random_tensor_quadric(rng: &mut ChaCha8Rng) -> QuadricModel<f64> {
        let pts: [Point<f64>; 3] = [
            Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ];
        if crate::geom::signed_area_x2(pts[0], pts[1], pts[2]).abs() < 1e-3 {
            return random_tensor_quadric(rng);
        }
        let mut comp = || {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]
        };
        let (es, fs, gs) = (comp(), comp(), comp());
        let ce = linear_coeffs(&pts, &es);
        let cf = linear_coeffs(&pts, &fs);
        let cg = linear_coeffs(&pts, &gs);
        QuadricModel::from_tensor_coeffs(&ce, &cf, &cg)
    }

    #[test]
    fn tensor_models_keep_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let q = random_tensor_quadric(&mut rng);
            assert!(q.h >= 0.0);
            assert!(q.a >= 0.0 && q.c >= 0.0);
            let scale = q.coeff_scale();
            close(q.h, q.h_discriminant(), 1e-7 * scale * scale);
            if q.kind == QuadricKind::EllipticMin {
                let pc = q.critical_point().unwrap();
                assert!(q.eval(pc).abs() <= 1e-7 * scale);
                assert!(q.translated_constant().unwrap() >= 0.0);
            } else {
                assert!(q.i_inv.abs() <= q.i_tolerance());
            }
        }
    }

    #[test]
    fn both_evaluation_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let q = random_tensor_quadric(&mut rng);
            let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let scale = q.coeff_scale();
            close(q.eval(p), q.eval_coefficients(p), 1e-10 * scale);
        }
    }

    #[test]
    fn normalization_diagonalizes_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut seen = 0;
        while seen < 100 {
            let q = random_tensor_quadric(&mut rng);
            if q.kind != QuadricKind::EllipticMin {
                continue;
            }
            seen += 1;
            let frame = q.normalize().unwrap();
            assert!(frame.scales.0 >= frame.scales.1);
            let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = frame.to_normalized(p);
            let expect = q.eval(p) - q.translated_constant().unwrap();
            close(n.norm_sq(), expect, 1e-7 * q.coeff_scale().max(expect.abs()));
            let back = frame.to_original(n);
            close(back.x, p.x, 1e-9);
            close(back.y, p.y, 1e-9);
        }
    }

    /// Degenerate field: f proportional to e - g makes the gradients parallel.
    fn degenerate_quadric(alpha: f64, shift: f64) -> QuadricModel<f64> {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let us = [0.3, -0.9, 0.5];
        let es: Vec<f64> = us.iter().map(|u| u + 0.2).collect();
        let gs = [0.2; 3];
        let fs: Vec<f64> = us.iter().map(|u| 0.5 * (alpha * u + shift)).collect();
        let ce = linear_coeffs(&pts, &[es[0], es[1], es[2]]);
        let cf = linear_coeffs(&pts, &[fs[0], fs[1], fs[2]]);
        let cg = linear_coeffs(&pts, &[gs[0], gs[1], gs[2]]);
        QuadricModel::from_tensor_coeffs(&ce, &cf, &cg)
    }

    #[test]
    fn degenerate_fields_reduce_to_strip() {
        let q = degenerate_quadric(0.75, 0.4);
        assert_eq!(q.kind, QuadricKind::DegenerateParallel);
        assert!(q.critical_point().is_err());
        let strip = q.strip_model().unwrap();
        assert!(strip.kappa > 0.0);
        assert!(strip.min_value >= 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            close(strip.eval(p), q.eval(p), 1e-9 * q.coeff_scale());
            assert!(q.eval(p) >= strip.min_value - 1e-12);
        }
    }

    #[test]
    fn constant_field_strip_has_zero_curvature() {
        let mesh = TensorMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
            vec![Tensor2S::new(2.0, 0.5, 1.0); 3],
        )
        .unwrap();
        let [ce, cf, cg] = tensor_field_coeffs(&mesh, 0);
        let q = QuadricModel::from_tensor_coeffs(&ce, &cf, &cg);
        assert_eq!(q.kind, QuadricKind::DegenerateParallel);
        let strip = q.strip_model().unwrap();
        assert_eq!(strip.kappa, 0.0);
        close(strip.min_value, 2.0, 1e-12);
    }

    #[test]
    fn generic_strip_model_matches_polynomial() {
        // q = x^2 translated: strip along x with t_star = 1, min -0.25.
        let q = QuadricModel::from_coefficients(1.0, 0.0, 0.0, -2.0, 0.0, 0.75);
        assert_eq!(q.kind, QuadricKind::DegenerateParallel);
        let strip = q.strip_model().unwrap();
        close(strip.kappa, 1.0, 1e-15);
        close(strip.t_star.abs(), 1.0, 1e-15);
        close(strip.min_value, -0.25, 1e-15);
        let p = Point::new(1.7, 3.0);
        close(strip.eval(p), q.eval(p), 1e-13);
    }
}
