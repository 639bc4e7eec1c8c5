//! Regularized integrals from truncated series.
//!
//! Two independent evaluations of each summand are available:
//!
//! * direct: `term_k = (-1)^(k+1) c_k / ((k+1)(k+2))`,
//! * Bernoulli path: `term_k = c_k / (k+1) * sum_{p<=k} C(k+1,p) (-1)^(k-p) zeta(-p)`.
//!
//! With exact coefficients the two agree term by term.

mod convergence;
mod pipeline;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::numerics::Scalar;
use crate::series::PowerSeries;
use crate::zetafn::zeta_weight;

pub use convergence::{assess_sequence, convergence_assess, Assessment, ConvergenceConfig};
pub use pipeline::{
    regularize_expression, CrossCheck, Evaluation, PipelineError, RegularizeConfig, Stage,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegularizeError {
    #[error("{terms} terms requested but the series only has order {order}")]
    TermsExceedOrder { terms: usize, order: usize },
    #[error("the Bernoulli path needs exact coefficients")]
    InexactSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Inconclusive,
    SeriesDivergent,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Inconclusive => "inconclusive",
            Verdict::SeriesDivergent => "series-divergent",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermRecord {
    pub k: usize,
    pub term: Scalar,
    pub partial_sum: Scalar,
    /// The same summand computed on the other path, when it was computed.
    pub cross_term: Option<Scalar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationResult {
    /// Partial sum through `terms_used - 1`. Not a limit when the verdict is
    /// `SeriesDivergent`.
    pub value: Scalar,
    pub terms: Vec<TermRecord>,
    pub verdict: Verdict,
    /// Bound on `|limit - value|`, present when the verdict is `Converged`.
    pub tail_bound: Option<Scalar>,
    pub terms_used: usize,
    pub backend: Backend,
    /// Estimated per-index ratio of term magnitudes.
    pub ratio_estimate: Option<f64>,
}

fn q(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `(-1)^(k+1) c_k / ((k+1)(k+2))`.
pub fn direct_term(c_k: &Scalar, k: usize) -> Scalar {
    let t = c_k.mul_rational(&q(1, (k + 1) * (k + 2)));
    if k.is_multiple_of(2) {
        t.neg()
    } else {
        t
    }
}

/// The unsimplified summand `(-1)^(k+1) f^(k)(0) / (k+2)!`.
pub fn derivative_term(f_k: &Scalar, k: usize) -> Scalar {
    let t = f_k
        .div(&Scalar::factorial(k as u32 + 2))
        .expect("factorial is nonzero");
    if k.is_multiple_of(2) {
        t.neg()
    } else {
        t
    }
}

/// `(k! c_k / (k+1)!) * sum_p C(k+1,p) (-1)^(k-p) zeta(-p)`.
pub fn bernoulli_term(c_k: &Scalar, k: usize) -> Scalar {
    c_k.mul_rational(&(zeta_weight(k) * q(1, k + 1)))
}

fn accumulate(
    s: &PowerSeries,
    k_max: usize,
    primary: fn(&Scalar, usize) -> Scalar,
    cross: Option<fn(&Scalar, usize) -> Scalar>,
) -> Vec<TermRecord> {
    let mut partial = if s.is_exact() {
        Scalar::zero()
    } else {
        Scalar::Float(Scalar::zero().to_float(float_bits(s)))
    };
    (0..=k_max)
        .map(|k| {
            let c = s.coeff(k);
            let term = primary(c, k);
            partial = partial.add(&term);
            TermRecord {
                k,
                term,
                partial_sum: partial.clone(),
                cross_term: cross.map(|f| f(c, k)),
            }
        })
        .collect()
}

fn float_bits(s: &PowerSeries) -> usize {
    s.coeffs().iter().filter_map(Scalar::bits).max().unwrap_or(crate::numerics::DEFAULT_FLOAT_BITS)
}

fn finish(s: &PowerSeries, k_max: usize, terms: Vec<TermRecord>, cfg: &ConvergenceConfig) -> RegularizationResult {
    let value = terms.last().expect("k_max >= 0").partial_sum.clone();
    let backend = if s.is_exact() { Backend::Exact } else { Backend::Float };
    let mut out = RegularizationResult {
        value,
        terms,
        verdict: Verdict::Inconclusive,
        tail_bound: None,
        terms_used: k_max + 1,
        backend,
        ratio_estimate: None,
    };
    if s.degree_bound().is_some_and(|d| d <= k_max) {
        // Every omitted summand is zero.
        out.verdict = Verdict::Converged;
        out.tail_bound = Some(Scalar::zero());
        return out;
    }
    let derivatives = s.derivatives_at_zero();
    if let Ok(a) = convergence_assess(&out.terms, &derivatives, cfg) {
        out.verdict = a.verdict;
        out.ratio_estimate = a.ratio_estimate;
        out.tail_bound = a.tail_bound.map(|t| match backend {
            Backend::Exact => t,
            Backend::Float => t.add(&rounding_slack(&out.terms, float_bits(s))),
        });
    }
    out
}

/// Accumulated rounding error of a float summation, generously bounded.
fn rounding_slack(terms: &[TermRecord], bits: usize) -> Scalar {
    let scale = terms
        .iter()
        .flat_map(|t| [t.term.log2_abs(), t.partial_sum.log2_abs()])
        .flatten()
        .fold(0.0f64, f64::max);
    let exponent = scale.ceil() as i64 + (terms.len() as f64).log2().ceil() as i64 + 2 - bits as i64;
    Scalar::Exact(pow2(exponent))
}

fn pow2(e: i64) -> BigRational {
    let p = BigInt::from(1) << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::from(1), p)
    }
}

/// Sums the direct summand for `k = 0..=K` with the default convergence
/// settings. Cross terms are left empty; the pipeline fills them in.
pub fn regularize_direct(s: &PowerSeries, terms: usize) -> Result<RegularizationResult, RegularizeError> {
    regularize_direct_with(s, terms, &ConvergenceConfig::default())
}

pub fn regularize_direct_with(
    s: &PowerSeries,
    terms: usize,
    cfg: &ConvergenceConfig,
) -> Result<RegularizationResult, RegularizeError> {
    check_terms(s, terms)?;
    let records = accumulate(s, terms, direct_term, None);
    Ok(finish(s, terms, records, cfg))
}

/// Sums the Bernoulli-path summand for `k = 0..=K`. Exact series only.
pub fn regularize_bernoulli(s: &PowerSeries, terms: usize) -> Result<RegularizationResult, RegularizeError> {
    if !s.is_exact() {
        return Err(RegularizeError::InexactSeries);
    }
    check_terms(s, terms)?;
    let records = accumulate(s, terms, bernoulli_term, Some(direct_term));
    Ok(finish(s, terms, records, &ConvergenceConfig::default()))
}

fn check_terms(s: &PowerSeries, terms: usize) -> Result<(), RegularizeError> {
    if terms > s.order() {
        Err(RegularizeError::TermsExceedOrder {
            terms,
            order: s.order(),
        })
    } else {
        Ok(())
    }
}
