//! Weighted radial-stretch series maps `F(x) = sum_n 2^-n S_{lambda_n}(x)`
//! over a finite ordered set of centers, with analytic Jacobians, runtime
//! checks of the `K`-quasiconformal distortion bound, and multiscale
//! estimates of the stretching exponent at the centers.
//!
//! Modules, bottom up:
//! - [`symmat`]: small dense symmetric matrices, Jacobi spectra,
//!   elementary symmetric polynomials.
//! - [`stretch`]: a single radial stretch and its Jacobian.
//! - [`composite`]: the series map, its Jacobian and the weight
//!   decomposition `DF = W (I - alpha B)`.
//! - [`analysis`]: distortion reports, spectral bound checks, exponent
//!   estimation and `r*` planning.
//! - [`field`]: config files, grid sweeps, the verification suite and CSV
//!   or JSON exports.

pub mod analysis;
pub mod composite;
pub mod error;
pub mod field;
pub mod par;
pub mod sampling;
pub mod stretch;
pub mod symmat;
pub mod vector;

pub use composite::{
    eval_map, jac_map, weight_decomposition, LambdaSet, MapConfig, WeightDecomposition,
};
pub use error::{Error, Result};
pub use par::Execution;
pub use stretch::StretchParams;
pub use symmat::{ElemSymPolys, Spectrum, SymMatrix};
