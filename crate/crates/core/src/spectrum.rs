//! Continuous histograms (contour spectra) of the squared anisotropy.
//!
//! The cumulative histogram at threshold `v` is the total area of the
//! sublevel set `{s <= v}`, accumulated per triangle over a shared uniform
//! bin grid on `[0, max vertex anisotropy]`. Per-triangle contributions are
//! computed in parallel but summed in triangle-index order, so the result is
//! bitwise identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::areas::{linear_sublevel_area, monotone_area};
use crate::error::{Error, Result};
use crate::mesh::{anisotropy, linear_coeffs, TensorMesh};
use crate::scalar::{flt, Scalar};
use crate::subdivision::SubdividedMesh;

/// Interpolation mode of a spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// Piecewise linear interpolation of per-vertex anisotropy values.
    A,
    /// Piecewise linear interpolation on the monotone subdivision.
    B,
    /// Exact per-triangle quadratic.
    C,
}

impl Mode {
    pub fn letter(self) -> char {
        match self {
            Mode::A => 'a',
            Mode::B => 'b',
            Mode::C => 'c',
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" | "A" => Ok(Mode::A),
            "b" | "B" => Ok(Mode::B),
            "c" | "C" => Ok(Mode::C),
            other => Err(Error::InvalidInput(format!(
                "unknown mode {other:?} (expected a, b, or c)"
            ))),
        }
    }
}

/// Cumulative histogram and density of one interpolation mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContourSpectrum<S> {
    pub mode: Mode,
    /// Uniform bin edges, `bins + 1` values from 0 to the maximum vertex
    /// anisotropy inclusive.
    pub bin_values: Vec<S>,
    /// Sublevel-set area at each bin edge; non-decreasing.
    pub cumulative: Vec<S>,
    /// Forward difference quotients, one per bin.
    pub density: Vec<S>,
    /// Total mesh area (the limit of `cumulative`).
    pub total_area: S,
    /// Largest decreasing step removed by the monotonicity post-pass;
    /// should stay below `1e-7 * total_area`.
    pub monotonicity_fix: S,
}

impl<S: Scalar> ContourSpectrum<S> {
    pub fn bins(&self) -> usize {
        self.density.len()
    }

    /// Density-weighted mean value of the distribution.
    pub fn spectral_mean(&self) -> S {
        let mut num = S::zero();
        let mut den = S::zero();
        for j in 0..self.density.len() {
            let dv = self.bin_values[j + 1] - self.bin_values[j];
            let mid = (self.bin_values[j] + self.bin_values[j + 1]) / flt(2.0);
            num += mid * self.density[j] * dv;
            den += self.density[j] * dv;
        }
        if den > S::zero() {
            num / den
        } else {
            S::zero()
        }
    }
}

/// Shared bin edges for a mesh: `bins + 1` uniform values on
/// `[0, max vertex anisotropy]`. All three modes use the same grid because
/// inserted subdivision vertices are restriction minima and never exceed the
/// original vertex maximum.
pub fn bin_edges<S: Scalar>(vmax: S, bins: usize) -> Vec<S> {
    (0..=bins)
        .map(|j| vmax * flt(j as f64 / bins as f64))
        .collect()
}

/// Computes the contour spectrum of one mode.
///
/// `sub` must be the subdivision of `mesh`; it is consulted for modes `b`
/// and `c` and for the shared value range.
pub fn cumulative_histogram<S: Scalar>(
    mesh: &TensorMesh<S>,
    sub: &SubdividedMesh<S>,
    mode: Mode,
    bins: usize,
) -> Result<ContourSpectrum<S>> {
    if bins == 0 {
        return Err(Error::InvalidInput("bin count must be at least 1".into()));
    }
    let edges = bin_edges(sub.max_value(), bins);
    let contribs: Vec<Vec<S>> = match mode {
        Mode::A => (0..mesh.triangles.len())
            .into_par_iter()
            .map(|t| {
                let verts = mesh.triangle_points(t);
                let tens = mesh.triangle_tensors(t);
                let values = [
                    anisotropy(&tens[0]),
                    anisotropy(&tens[1]),
                    anisotropy(&tens[2]),
                ];
                let coeffs = linear_coeffs(&verts, &values);
                edges
                    .iter()
                    .map(|&v| linear_sublevel_area(&coeffs, &verts, v))
                    .collect()
            })
            .collect(),
        Mode::B => (0..sub.triangles.len())
            .into_par_iter()
            .map(|i| {
                let tri = &sub.monotone[i];
                let coeffs = linear_coeffs(&tri.verts_orig, &tri.values);
                edges
                    .iter()
                    .map(|&v| linear_sublevel_area(&coeffs, &tri.verts_orig, v))
                    .collect()
            })
            .collect(),
        Mode::C => (0..sub.triangles.len())
            .into_par_iter()
            .map(|i| {
                let tri = &sub.monotone[i];
                let q = &sub.quadrics[tri.parent];
                edges
                    .iter()
                    .map(|&v| monotone_area(tri, q, v))
                    .collect::<Result<Vec<S>>>()
            })
            .collect::<Result<Vec<_>>>()?,
    };

    // Fixed-order reduction: worker count cannot change the result.
    let mut cumulative = vec![S::zero(); edges.len()];
    for unit in &contribs {
        for (acc, &x) in cumulative.iter_mut().zip(unit) {
            *acc += x;
        }
    }

    let mut monotonicity_fix = S::zero();
    for j in 1..cumulative.len() {
        let drop = cumulative[j - 1] - cumulative[j];
        if drop > S::zero() {
            monotonicity_fix = monotonicity_fix.max(drop);
            cumulative[j] = cumulative[j - 1];
        }
    }

    let density = (0..bins)
        .map(|j| {
            let dv = edges[j + 1] - edges[j];
            if dv > S::zero() {
                (cumulative[j + 1] - cumulative[j]) / dv
            } else {
                S::zero()
            }
        })
        .collect();

    Ok(ContourSpectrum {
        mode,
        bin_values: edges,
        cumulative,
        density,
        total_area: mesh.total_area(),
        monotonicity_fix,
    })
}

/// Pairwise comparison of two spectra on identical bins.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeComparison<S> {
    pub mode_first: Mode,
    pub mode_second: Mode,
    /// Largest |cumulative difference| over the bin edges.
    pub linf_cumulative: S,
    /// Largest signed excess `first - second`; negative when the first
    /// cumulative histogram lies entirely below the second.
    pub max_first_minus_second: S,
    pub mean_first: S,
    pub mean_second: S,
}

pub fn compare_modes<S: Scalar>(
    first: &ContourSpectrum<S>,
    second: &ContourSpectrum<S>,
) -> Result<ModeComparison<S>> {
    if first.bin_values.len() != second.bin_values.len()
        || first
            .bin_values
            .iter()
            .zip(&second.bin_values)
            .any(|(a, b)| a != b)
    {
        return Err(Error::InvalidInput(
            "spectra to compare must share identical bin edges".into(),
        ));
    }
    let mut linf = S::zero();
    let mut max_diff = S::neg_infinity();
    for (a, b) in first.cumulative.iter().zip(&second.cumulative) {
        let d = *a - *b;
        linf = linf.max(d.abs());
        max_diff = max_diff.max(d);
    }
    Ok(ModeComparison {
        mode_first: first.mode,
        mode_second: second.mode,
        linf_cumulative: linf,
        max_first_minus_second: max_diff,
        mean_first: first.spectral_mean(),
        mean_second: second.spectral_mean(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::mesh::Tensor2S;
    use crate::subdivision::subdivide_mesh;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
    }

    /// One triangle around the origin of the field with s = x^2 + y^2.
    fn bowl_mesh() -> TensorMesh<f64> {
        TensorMesh::new(
            vec![
                Point::new(-1.0, -1.0),
                Point::new(2.0, -1.0),
                Point::new(-1.0, 2.0),
            ],
            vec![[0, 1, 2]],
            // e - g = 2x and f = y at each vertex give s = 4(x^2 + y^2).
            vec![
                Tensor2S::new(-1.0, -1.0, 1.0),
                Tensor2S::new(2.0, -1.0, -2.0),
                Tensor2S::new(-1.0, 2.0, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn constant_field_saturates_immediately() {
        let mesh = TensorMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
            vec![Tensor2S::new(3.0, 0.0, 1.0); 3],
        )
        .unwrap();
        let sub = subdivide_mesh(&mesh).unwrap();
        for mode in [Mode::A, Mode::B, Mode::C] {
            let s = cumulative_histogram(&mesh, &sub, mode, 16).unwrap();
            close(s.cumulative[0], 0.0, 1e-15);
            close(s.cumulative[16], 0.5, 1e-15);
            // Constant value 4: everything appears in the final bin.
            close(s.bin_values[16], 4.0, 1e-15);
        }
    }

    #[test]
    fn all_modes_reach_total_area() {
        let mesh = bowl_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        for mode in [Mode::A, Mode::B, Mode::C] {
            let s = cumulative_histogram(&mesh, &sub, mode, 64).unwrap();
            let last = s.cumulative[64];
            close(last, 4.5, 1e-9 * 4.5);
            assert!(s.monotonicity_fix <= 1e-7 * s.total_area);
            for j in 1..s.cumulative.len() {
                assert!(s.cumulative[j] >= s.cumulative[j - 1]);
            }
        }
    }

    #[test]
    fn refined_linear_mode_underestimates_exact_mode() {
        let mesh = bowl_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        let b = cumulative_histogram(&mesh, &sub, Mode::B, 64).unwrap();
        let c = cumulative_histogram(&mesh, &sub, Mode::C, 64).unwrap();
        let cmp = compare_modes(&b, &c).unwrap();
        // Convexity: the PL interpolant overestimates values, so its
        // sublevel sets are smaller.
        assert!(cmp.max_first_minus_second <= 1e-9 * b.total_area);
        assert!(cmp.mean_first >= cmp.mean_second - 1e-12);
        assert!(cmp.linf_cumulative > 0.0);
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let mesh = bowl_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        for mode in [Mode::A, Mode::B, Mode::C] {
            let s1 = pool1.install(|| cumulative_histogram(&mesh, &sub, mode, 128).unwrap());
            let s4 = pool4.install(|| cumulative_histogram(&mesh, &sub, mode, 128).unwrap());
            assert_eq!(s1.cumulative, s4.cumulative);
            assert_eq!(s1.density, s4.density);
        }
    }

    #[test]
    fn mismatched_bins_are_rejected() {
        let mesh = bowl_mesh();
        let sub = subdivide_mesh(&mesh).unwrap();
        let x = cumulative_histogram(&mesh, &sub, Mode::B, 16).unwrap();
        let y = cumulative_histogram(&mesh, &sub, Mode::C, 32).unwrap();
        assert!(compare_modes(&x, &y).is_err());
    }
}
