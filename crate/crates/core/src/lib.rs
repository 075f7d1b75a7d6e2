//! Numerical verification of `det(A + B) = det(I + K)` for nested-contour
//! finite-rank kernels.
//!
//! The finite side is built from truncated Laurent series; the Fredholm side
//! is evaluated both through the rank-`n` reduction and by Nyström
//! discretization on a circular contour.

pub mod contour;
pub mod error;
pub mod fredholm;
pub mod funcs;
pub mod harness;
pub mod kernel;
pub mod series;
pub mod structmat;

pub use num_complex::Complex64;

pub use contour::{ContourSpec, QuadratureRule};
pub use error::{Error, Result};
pub use fredholm::{fred_det_nystrom, fred_det_rank, FredholmResult, Method};
pub use funcs::{Polynomial, RationalFunction};
pub use harness::{
    gen_random, gen_tasep, run_suite, verify_identity, Instance, Outcome, SuiteConfig, VerificationReport,
    VerifyConfig,
};
pub use kernel::{construct_h, derive_g, t_chain, trace_decompose, BridgeH, ChainEngine, KernelForm};
pub use series::LaurentSeries;
pub use structmat::{build_a, build_b, build_w, lu_det, ComplexMatrix};
