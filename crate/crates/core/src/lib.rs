//! Exact continuous histograms (contour spectra), contours, and join trees for
//! the squared eigenvalue difference (squared anisotropy) of piecewise linear
//! 2D symmetric tensor fields.
//!
//! Component-wise linear interpolation of a symmetric 2x2 tensor over a
//! triangle makes the squared anisotropy a quadratic polynomial per triangle.
//! This crate models that quadratic in closed form, subdivides each triangle
//! into monotone pieces, and integrates sublevel-set areas exactly, next to
//! two piecewise linear baselines:
//!
//! * mode `a`: linear interpolation of per-vertex anisotropy values,
//! * mode `b`: the same linear interpolation on the monotone subdivision,
//! * mode `c`: exact areas of the per-triangle quadratic.
//!
//! All randomized operations take explicit 64-bit seeds and use the portable
//! ChaCha8 generator, and all reductions run in a fixed order, so every
//! result is bitwise reproducible regardless of worker count.

pub mod areas;
pub mod error;
pub mod geom;
pub mod io;
pub mod mesh;
pub mod quadric;
pub mod scalar;
pub mod spectrum;
pub mod subdivision;
pub mod synth;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double precision aliases for the main artifact types.
pub type Point64 = geom::Point<f64>;
pub type Tensor2S64 = mesh::Tensor2S<f64>;
pub type TensorMesh64 = mesh::TensorMesh<f64>;
pub type LinearCoeffs64 = mesh::LinearCoeffs<f64>;
pub type QuadricModel64 = quadric::QuadricModel<f64>;
pub type NormalizedFrame64 = quadric::NormalizedFrame<f64>;
pub type SubdividedMesh64 = subdivision::SubdividedMesh<f64>;
pub type MonotoneTriangle64 = subdivision::MonotoneTriangle<f64>;
pub type ContourSpectrum64 = spectrum::ContourSpectrum<f64>;
pub type JoinTree64 = topology::JoinTree<f64>;
pub type ContourSet64 = topology::ContourSet<f64>;

/// Single precision aliases; every operation is generic over [`Scalar`].
pub type Point32 = geom::Point<f32>;
pub type Tensor2S32 = mesh::Tensor2S<f32>;
pub type TensorMesh32 = mesh::TensorMesh<f32>;
pub type QuadricModel32 = quadric::QuadricModel<f32>;
pub type SubdividedMesh32 = subdivision::SubdividedMesh<f32>;
pub type ContourSpectrum32 = spectrum::ContourSpectrum<f32>;
