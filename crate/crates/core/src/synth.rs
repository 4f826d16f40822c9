//! Synthetic tensor meshes on regular grids.
//!
//! The generator places tensors with a fixed eigenvalue pair at the vertices
//! of a unit-spacing grid and optionally randomizes the eigenvector
//! directions per vertex. With the default lattice angles the tensor
//! components are built from exact dyadic multiples of the eigenvalue gap,
//! so the per-vertex anisotropy is bitwise identical for every direction
//! draw — direction perturbation changes the field between vertices without
//! touching the values at them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::{Tensor2S, TensorMesh};
use crate::scalar::{flt, Scalar};

/// How eigenvector angles are drawn when directions are perturbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleDistribution {
    /// Angles from {0°, 45°, 90°, 135°}. Component factors (cos²θ, cosθ·sinθ)
    /// are exact dyadics, so vertex anisotropy is preserved bitwise.
    Lattice,
    /// Continuous angles in [0, 2π). Anisotropy is preserved only up to
    /// floating-point rounding of the trigonometric construction.
    Uniform,
}

#[derive(Clone, Copy, Debug)]
pub struct SynthOptions<S> {
    /// Vertices per side; the mesh has `2·(grid_n−1)²` triangles.
    pub grid_n: usize,
    pub seed: u64,
    /// Major eigenvalue at every vertex.
    pub lambda1: S,
    /// Minor eigenvalue at every vertex.
    pub lambda2: S,
    pub perturb_directions: bool,
    pub angles: AngleDistribution,
}

impl<S: Scalar> Default for SynthOptions<S> {
    fn default() -> Self {
        Self {
            grid_n: 5,
            seed: 0,
            lambda1: flt(2.0),
            lambda2: flt(1.0),
            perturb_directions: false,
            angles: AngleDistribution::Lattice,
        }
    }
}

/// (cos²θ, cosθ·sinθ) for θ ∈ {0°, 45°, 90°, 135°}, all exactly
/// representable. The tensor for eigenvalues (μ+d, μ) at angle θ is
/// e = μ + d·cos²θ, f = d·cosθ·sinθ, g = μ + d·sin²θ.
const LATTICE_FACTORS: [(f64, f64); 4] = [(1.0, 0.0), (0.5, 0.5), (0.0, 0.0), (0.5, -0.5)];

fn lattice_tensor<S: Scalar>(mu: S, d: S, k: usize) -> Tensor2S<S> {
    let (cc, cs) = LATTICE_FACTORS[k];
    let (cc, cs) = (flt::<S>(cc), flt::<S>(cs));
    Tensor2S::new(mu + d * cc, d * cs, mu + d * (S::one() - cc))
}

/// Builds the grid mesh. Vertex `(i, j)` sits at coordinates `(i, j)` and
/// has row-major index `j·grid_n + i`; every quad is split along the same
/// diagonal (lower-left to upper-right).
pub fn generate_synthetic<S: Scalar>(opts: &SynthOptions<S>) -> Result<TensorMesh<S>> {
    let n = opts.grid_n;
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "grid_n must be at least 2, got {n}"
        )));
    }
    if !(opts.lambda1.is_finite() && opts.lambda2.is_finite()) || opts.lambda1 < opts.lambda2 {
        return Err(Error::InvalidInput(
            "eigenvalue profile requires finite lambda1 >= lambda2".into(),
        ));
    }
    let mu = opts.lambda2;
    let d = opts.lambda1 - opts.lambda2;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut vertices = Vec::with_capacity(n * n);
    let mut tensors = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vertices.push(Point::new(flt::<S>(i as f64), flt::<S>(j as f64)));
            let tensor = if opts.perturb_directions {
                match opts.angles {
                    AngleDistribution::Lattice => {
                        lattice_tensor(mu, d, rng.gen_range(0..4usize))
                    }
                    AngleDistribution::Uniform => {
                        let theta = flt::<S>(rng.gen::<f64>() * std::f64::consts::TAU);
                        Tensor2S::from_eigen(opts.lambda1, opts.lambda2, theta)
                    }
                }
            } else {
                lattice_tensor(mu, d, 0)
            };
            tensors.push(tensor);
        }
    }

    let mut triangles = Vec::with_capacity(2 * (n - 1) * (n - 1));
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let v00 = j * n + i;
            let v10 = v00 + 1;
            let v01 = v00 + n;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TensorMesh::new(vertices, triangles, tensors)
}
