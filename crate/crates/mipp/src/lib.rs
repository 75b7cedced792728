//! Multiply iterated Poisson processes (MIPP) and their application to ruin theory.
//!
//! A MIPP of depth `n` is built by composing `n` independent Poisson processes of
//! common intensity λ: `V(n) = N^n(V(n-1))` with `V(1)` a plain Poisson process.
//! The crate provides
//!
//! - [`dist`]: exact (truncated-series) distributions, transforms, moments and
//!   jump laws of the process,
//! - [`sim`]: exact-in-distribution Monte Carlo simulation of MIPP paths and of
//!   the MIPP-driven risk surplus with unbiased ruin detection,
//! - [`scale`]: the analytic scale function of the risk process via a Bessel-kernel
//!   convolution series, with survival/ruin and two-sided exit probabilities.
//!
//! Every analytic quantity has an independent cross-check (Monte Carlo estimate,
//! Laplace-transform identity, or a second algebraic route); the `validate`
//! subcommand of the companion CLI runs the full battery.
//!
//! ```
//! use mipp::dist::{pmf, MippParams};
//! use mipp::scale::{survival_probability, Grid, RiskModel};
//!
//! // P(V_1^{(2)} = 0) for a depth-2 process at unit intensity.
//! let params = MippParams::new(1.0, 2)?;
//! let law = pmf(&params, 1.0, 1e-12)?;
//! assert!((law.mass(0) - f64::exp_m1(-1.0).exp()).abs() < 1e-12);
//!
//! // Survival probability of the clustered-claims surplus from capital 1.
//! let model = RiskModel::single(2.0, 0.5, 1.0, 1.0)?;
//! let grid = Grid::covering(0.01, 12.0)?;
//! let survival = survival_probability(&model, 1.0, grid, 1e-8)?;
//! assert!(survival > 0.0 && survival < 1.0);
//! # Ok::<(), mipp::Error>(())
//! ```

pub mod dist;
pub mod error;
pub mod scale;
pub mod sim;

mod special;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
