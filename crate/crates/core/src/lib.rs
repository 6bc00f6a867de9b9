//! Fourier restriction and extension estimates over prime fields.
//!
//! The crate works with dense functions on `F_p^n` and provides:
//!
//! - [`field`]: prime-field arithmetic, point indexing and characters;
//! - [`fourier`]: transforms, convolution and `ℓ^q` / `L^p(μ)` norms;
//! - [`measures`]: cubes, Bohr sets, random sets, the combined measure, the
//!   paraboloid, and their measured regularity/decay exponents;
//! - [`restriction`]: the extension operator and lower bounds for `R*(p→q)`;
//! - [`stein_tomas`]: the kernel `K = μ^∨ - δ_0` and its endpoint bounds;
//! - [`experiments`]: prime sweeps and slope fits used by the CLI.

pub mod error;
pub mod experiments;
pub mod exponent;
pub mod field;
pub mod fourier;
pub mod measures;
pub mod restriction;
pub mod selftest;
pub mod stein_tomas;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use field::{balanced_abs, dot_mod, index_to_point, is_prime, point_to_index, Field, Point};
pub use fourier::{convolve, dft, idft, lp_mu_norm, lq_norm, GridFn, TransformMethod};
pub use measures::{Measure, PointSet, SpectralReport};
pub use restriction::{RStarEstimate, EstimateKind};
