//! Exact and Monte Carlo sublevel-set area kernels.
//!
//! In normalized coordinates the sublevel set of an elliptic quadric is a
//! disc centered at the origin, so per-piece areas reduce to disc-triangle
//! intersections built from one primitive: the area of the disc inside a
//! wedge `(origin, B, C)`. Pieces whose minimum sits at a vertex are a
//! single wedge; generic pieces are a signed sum of three wedges (the fan
//! identity of the triangle with respect to the origin). Degenerate strips
//! reduce to half-plane clipping, and the linear baselines are a single clip.
//! A seeded Monte Carlo estimator serves as the independent oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{
    angle_between, clip_half_plane, polygon_area, quadratic_roots, sample_triangle,
    signed_area_x2, Point,
};
use crate::mesh::LinearCoeffs;
use crate::quadric::QuadricModel;
use crate::scalar::{flt, Scalar};
use crate::subdivision::{MonotoneCase, MonotoneTriangle};

/// Circle-edge intersection parameters this close to an endpoint snap onto it.
pub const ROOT_SNAP_TOL: f64 = 1e-9;

/// Area of the sector `{radius^2 <= v}` of a wedge with apex angle `theta`
/// at the disc center: `theta * v / 2`.
pub fn sector_area<S: Scalar>(theta: S, v: S) -> S {
    theta * v.max(S::zero()) / flt(2.0)
}

/// Derivative of [`sector_area`] in `v`: the constant `theta / 2`.
pub fn sector_density<S: Scalar>(theta: S) -> S {
    theta / flt(2.0)
}

/// Area of `{|p|^2 <= v}` inside the triangle `(origin, b, c)`.
///
/// Requires the squared radius to be monotone along segment `bc`; if the
/// perpendicular foot of the origin falls inside `bc` the wedge is split
/// there, making both halves monotone. With `rb <= rc` the area is the
/// sector up to `rb^2`, then a sector plus triangle shaped by the unique
/// circle crossing of `bc`, then the full wedge.
fn wedge_sublevel<S: Scalar>(b: Point<S>, c: Point<S>, v: S) -> S {
    let full = b.cross(c).abs() / flt(2.0);
    if full <= S::zero() {
        return S::zero();
    }
    if v <= S::zero() {
        return S::zero();
    }
    // Split at an interior perpendicular foot so each half is monotone.
    let d = c - b;
    let len2 = d.norm_sq();
    if len2 > S::zero() {
        let t = -b.dot(d) / len2;
        let snap = flt::<S>(ROOT_SNAP_TOL);
        if t > snap && t < S::one() - snap {
            let foot = b.lerp(c, t);
            return wedge_sublevel(b, foot, v) + wedge_sublevel(foot, c, v);
        }
    }
    let (near, far) = if b.norm_sq() <= c.norm_sq() { (b, c) } else { (c, b) };
    let rb2 = near.norm_sq();
    let rc2 = far.norm_sq();
    if v >= rc2 {
        return full;
    }
    let theta_a = angle_between(near, far);
    if v <= rb2 {
        return sector_area(theta_a, v).min(full);
    }
    // Unique crossing of the circle radius sqrt(v) with segment near-far.
    let dir = far - near;
    let t = circle_segment_crossing(near, dir, v);
    let f = near.lerp(far, t);
    let theta = angle_between(f, far);
    let area = sector_area(theta_a, rb2)
        + (theta * v - theta_a * rb2) / flt(2.0)
        + (v * rb2).sqrt() * (theta_a - theta).sin() / flt(2.0);
    area.max(S::zero()).min(full)
}

/// Parameter in `[0, 1]` where `|p + t d|^2 = v`, assuming the squared
/// radius is monotone increasing along the segment. Roots within
/// [`ROOT_SNAP_TOL`] of an endpoint snap onto it.
fn circle_segment_crossing<S: Scalar>(p: Point<S>, d: Point<S>, v: S) -> S {
    let q2 = d.norm_sq();
    let q1 = (p.dot(d)) * flt(2.0);
    let q0 = p.norm_sq() - v;
    let snap = flt::<S>(ROOT_SNAP_TOL);
    let lo = -snap;
    let hi = S::one() + snap;
    let mut best: Option<S> = None;
    for r in quadratic_roots(q2, q1, q0) {
        if r >= lo && r <= hi {
            // With monotone radius the upward crossing is the largest root
            // in range.
            best = Some(r);
        }
    }
    match best {
        Some(r) => r.max(S::zero()).min(S::one()),
        // Tangency lost to rounding: the whole segment sits at radius ~v.
        None => S::zero(),
    }
}

/// Per-piece offset that turns absolute values into squared radii in
/// normalized coordinates (the translated constant of the parent quadric).
fn value_offset<S: Scalar>(tri: &MonotoneTriangle<S>) -> S {
    tri.values[0] - tri.verts_norm[0].norm_sq()
}

/// Sublevel area (original coordinates) of a piece whose lowest vertex is
/// the quadric minimum: a single wedge around the origin.
pub fn case1_area<S: Scalar>(tri: &MonotoneTriangle<S>, v: S) -> S {
    debug_assert_eq!(tri.case, MonotoneCase::MinAtVertex);
    let radius2 = v - value_offset(tri);
    wedge_sublevel(tri.verts_norm[1], tri.verts_norm[2], radius2) / tri.area_factor
}

/// Sublevel area (original coordinates) of an elliptic piece that does not
/// contain the minimum: signed sum of the three origin wedges of its edges.
pub fn case2_area<S: Scalar>(tri: &MonotoneTriangle<S>, v: S) -> S {
    debug_assert_eq!(tri.case, MonotoneCase::Generic);
    let radius2 = v - value_offset(tri);
    let p = tri.verts_norm;
    let orient2 = signed_area_x2(p[0], p[1], p[2]);
    let full = orient2.abs() / flt(2.0);
    if full <= S::zero() {
        return S::zero();
    }
    let orient = if orient2 >= S::zero() { S::one() } else { -S::one() };
    let mut acc = S::zero();
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let cr = a.cross(b);
        let sgn = if cr >= S::zero() { S::one() } else { -S::one() };
        acc += sgn * wedge_sublevel(a, b, radius2);
    }
    (orient * acc).max(S::zero()).min(full) / tri.area_factor
}

/// Sublevel area of a degenerate quadric inside an arbitrary triangle: the
/// band `|t - t_star| <= sqrt((v - min) / kappa)` across the strip direction,
/// cut out with two half-plane clips.
pub fn degenerate_strip_area<S: Scalar>(
    q: &QuadricModel<S>,
    verts: &[Point<S>; 3],
    v: S,
) -> Result<S> {
    let strip = q
        .strip_model()
        .ok_or_else(|| Error::Kernel("strip area requested for elliptic quadric".into()))?;
    let full = signed_area_x2(verts[0], verts[1], verts[2]).abs() / flt(2.0);
    if strip.kappa <= S::zero() {
        // Constant profile: all or nothing.
        return Ok(if v >= strip.min_value { full } else { S::zero() });
    }
    if v < strip.min_value {
        return Ok(S::zero());
    }
    let hw = ((v - strip.min_value) / strip.kappa).sqrt();
    let poly: Vec<Point<S>> = verts.to_vec();
    let poly = clip_half_plane(&poly, strip.normal, strip.t_star + hw);
    let poly = clip_half_plane(&poly, -strip.normal, -(strip.t_star - hw));
    Ok(polygon_area(&poly).abs().min(full))
}

/// Sublevel area of a linear field inside a triangle: one half-plane clip.
pub fn linear_sublevel_area<S: Scalar>(
    coeffs: &LinearCoeffs<S>,
    verts: &[Point<S>; 3],
    v: S,
) -> S {
    let full = signed_area_x2(verts[0], verts[1], verts[2]).abs() / flt(2.0);
    let g = coeffs.gradient();
    if g.norm_sq() <= S::zero() {
        return if coeffs.sc <= v { full } else { S::zero() };
    }
    let poly: Vec<Point<S>> = verts.to_vec();
    let poly = clip_half_plane(&poly, g, v - coeffs.sc);
    polygon_area(&poly).abs().min(full)
}

/// Exact sublevel area of one monotone piece, dispatching on its case.
pub fn monotone_area<S: Scalar>(
    tri: &MonotoneTriangle<S>,
    q: &QuadricModel<S>,
    v: S,
) -> Result<S> {
    match tri.case {
        MonotoneCase::MinAtVertex => Ok(case1_area(tri, v)),
        MonotoneCase::Generic => Ok(case2_area(tri, v)),
        MonotoneCase::DegenerateStrip => degenerate_strip_area(q, &tri.verts_orig, v),
    }
}

/// Monte Carlo estimate of `area({p in triangle : eval(p) <= v})` with its
/// binomial standard error. Uniform triangle samples come from the seeded
/// portable ChaCha8 generator, so results are reproducible bit for bit.
pub fn mc_sublevel_area<S: Scalar, F: Fn(Point<S>) -> S>(
    eval: F,
    verts: &[Point<S>; 3],
    v: S,
    samples: u64,
    seed: u64,
) -> (S, S) {
    let area = signed_area_x2(verts[0], verts[1], verts[2]).abs() / flt(2.0);
    if samples == 0 {
        return (S::zero(), S::zero());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: u64 = 0;
    for _ in 0..samples {
        let r1: f64 = rng.gen();
        let r2: f64 = rng.gen();
        let p = sample_triangle(verts[0], verts[1], verts[2], flt::<S>(r1), flt::<S>(r2));
        if eval(p) <= v {
            hits += 1;
        }
    }
    let n = flt::<S>(samples as f64);
    let frac = flt::<S>(hits as f64) / n;
    let est = area * frac;
    let se = area * (frac * (S::one() - frac) / n).sqrt();
    (est, se)
}
