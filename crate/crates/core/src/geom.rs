//! Small planar geometry toolkit: points, areas, half-plane clipping, and
//! uniform triangle sampling.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::{flt, Scalar};

/// Point (or vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y
    }

    /// z component of the cross product `self x o`.
    pub fn cross(self, o: Self) -> S {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.norm_sq().sqrt()
    }

    /// Counterclockwise rotation by a quarter turn.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Self, t: S) -> Self {
        self + (o - self) * t
    }

    /// Unit vector in the same direction; `None` for vanishing length.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > S::zero()).then(|| self / n)
    }
}

impl<S: Scalar> Add for Point<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<S: Scalar> Sub for Point<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<S: Scalar> Mul<S> for Point<S> {
    type Output = Self;
    fn mul(self, s: S) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<S: Scalar> Div<S> for Point<S> {
    type Output = Self;
    fn div(self, s: S) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

impl<S: Scalar> Neg for Point<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Twice the signed area of triangle `(a, b, c)`; positive when
/// counterclockwise.
pub fn signed_area_x2<S: Scalar>(a: Point<S>, b: Point<S>, c: Point<S>) -> S {
    (b - a).cross(c - a)
}

/// Signed area of triangle `(a, b, c)`.
pub fn triangle_area<S: Scalar>(a: Point<S>, b: Point<S>, c: Point<S>) -> S {
    signed_area_x2(a, b, c) / flt(2.0)
}

/// Shoelace area of a simple polygon; positive when counterclockwise.
pub fn polygon_area<S: Scalar>(poly: &[Point<S>]) -> S {
    if poly.len() < 3 {
        return S::zero();
    }
    let mut acc = S::zero();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a.cross(b);
    }
    acc / flt(2.0)
}

/// Unsigned angle between two direction vectors, in `[0, pi]`.
///
/// Uses `atan2(|cross|, dot)`, which stays accurate for nearly parallel and
/// nearly opposite directions alike.
pub fn angle_between<S: Scalar>(u: Point<S>, v: Point<S>) -> S {
    u.cross(v).abs().atan2(u.dot(v))
}

/// Clips a convex polygon against the half plane `n . p <= c`.
///
/// Standard Sutherland-Hodgman step; vertices on the boundary are kept.
pub fn clip_half_plane<S: Scalar>(poly: &[Point<S>], n: Point<S>, c: S) -> Vec<Point<S>> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    if poly.is_empty() {
        return out;
    }
    let dist = |p: Point<S>| n.dot(p) - c;
    for i in 0..poly.len() {
        let cur = poly[i];
        let nxt = poly[(i + 1) % poly.len()];
        let dc = dist(cur);
        let dn = dist(nxt);
        if dc <= S::zero() {
            out.push(cur);
        }
        if (dc < S::zero() && dn > S::zero()) || (dc > S::zero() && dn < S::zero()) {
            let t = dc / (dc - dn);
            out.push(cur.lerp(nxt, t));
        }
    }
    out
}

/// Barycentric coordinates of `p` with respect to triangle `(a, b, c)`,
/// normalized to sum to one. Returns `None` for a degenerate triangle.
pub fn barycentric<S: Scalar>(
    p: Point<S>,
    a: Point<S>,
    b: Point<S>,
    c: Point<S>,
) -> Option<[S; 3]> {
    let den = signed_area_x2(a, b, c);
    if den == S::zero() {
        return None;
    }
    let wa = signed_area_x2(p, b, c) / den;
    let wb = signed_area_x2(a, p, c) / den;
    let wc = signed_area_x2(a, b, p) / den;
    Some([wa, wb, wc])
}

/// Maps two unit uniform variates to a uniform point of triangle `(a, b, c)`.
///
/// Square-root warping of the first variate makes the density uniform in
/// area; passing a low-discrepancy or pseudorandom pair through this map is
/// the standard way to sample a triangle.
pub fn sample_triangle<S: Scalar>(
    a: Point<S>,
    b: Point<S>,
    c: Point<S>,
    r1: S,
    r2: S,
) -> Point<S> {
    let sq = r1.sqrt();
    let wa = S::one() - sq;
    let wb = sq * (S::one() - r2);
    let wc = sq * r2;
    Point::new(
        a.x * wa + b.x * wb + c.x * wc,
        a.y * wa + b.y * wb + c.y * wc,
    )
}

/// Real roots of `q2 t^2 + q1 t + q0 = 0`, ascending, using the stable
/// quadratic formula. Linear and constant cases degrade gracefully.
pub fn quadratic_roots<S: Scalar>(q2: S, q1: S, q0: S) -> Vec<S> {
    if q2 == S::zero() {
        if q1 == S::zero() {
            return Vec::new();
        }
        return vec![-q0 / q1];
    }
    let disc = q1 * q1 - flt::<S>(4.0) * q2 * q0;
    if disc < S::zero() {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // q = -(q1 + sign(q1) sqrt(disc)) / 2 avoids cancellation in one root.
    let sign = if q1 >= S::zero() { S::one() } else { -S::one() };
    let qq = -(q1 + sign * sq) / flt(2.0);
    let mut roots = if qq == S::zero() {
        vec![S::zero(), S::zero()]
    } else {
        vec![qq / q2, q0 / qq]
    };
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots
}
