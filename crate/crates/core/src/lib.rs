//! Zeta-regularized values of divergent integrals over `[0, inf)`.
//!
//! For `f` analytic at 0 the regularized value of the integral of `f` is
//! `sum_k (-1)^(k+1) f^(k)(0) / (k+2)!`. The crate parses an expression,
//! expands it as a truncated Maclaurin series, sums the series in exact
//! rational or multiprecision float arithmetic, and cross-checks every term
//! against an independent evaluation through Bernoulli numbers.

pub mod expr;
pub mod numerics;
pub mod series;
pub mod zetafn;
pub mod regularize;
pub mod catalog;
pub mod cli;
