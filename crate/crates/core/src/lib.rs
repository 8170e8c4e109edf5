//! Joint distributions of stochastically ordered pairs.
//!
//! Given marginals `F1 <= F2` pointwise, every law of `(X1, X2)` with
//! `P(X1 >= X2) = 1` is obtained from a symmetric copula evaluated at the
//! mixture cdf `G = (F1 + F2) / 2`. This crate builds those laws, the
//! pointwise lower and upper bounds on them, the minimal Kendall's tau and
//! Spearman's rho, the maximum-entropy joint density, and exact samplers.
//!
//! Numeric kernels that sweep grids or draw many samples run on rayon when
//! the `parallel` feature is enabled (the default) and fall back to plain
//! iterators otherwise; see [`exec::Execution`].

pub mod bounds;
pub mod cli;
pub mod config;
pub mod copula;
pub mod dependence;
pub mod distcore;
pub mod error;
pub mod exec;
pub mod maxent;
pub mod numeric;
pub mod sampling;

pub use error::{Error, Result};
pub use exec::Execution;

/// Slack used when clamping floating-point probabilities back into `[0, 1]`.
pub const PROB_SLACK: f64 = 1e-12;

/// Clamp a computed probability into `[0, 1]`.
#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    if p.is_nan() {
        return p;
    }
    p.clamp(0.0, 1.0)
}
