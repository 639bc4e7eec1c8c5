use std::fmt;

use serde::Serialize;

use super::{bernoulli_term, regularize_direct_with, Backend, ConvergenceConfig, RegularizationResult};
use crate::expr::{parse, validate_analytic_at_zero_with, Expr};
use crate::numerics::{PrecisionConfig, Scalar};
use crate::series::{maclaurin, PowerSeries, DEFAULT_ORDER};

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizeConfig {
    /// Highest summand index `K`.
    pub terms: usize,
    pub precision: PrecisionConfig,
    /// Reject expressions that need float arithmetic.
    pub exact_only: bool,
    pub convergence: ConvergenceConfig,
}

impl Default for RegularizeConfig {
    fn default() -> Self {
        Self {
            terms: DEFAULT_ORDER,
            precision: PrecisionConfig::default(),
            exact_only: false,
            convergence: ConvergenceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Analyticity,
    Series,
    Backend,
    Regularize,
    CrossCheck,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Analyticity => "analyticity",
            Stage::Series => "series",
            Stage::Backend => "backend",
            Stage::Regularize => "regularize",
            Stage::CrossCheck => "cross-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
    /// Character offset into the input, for parse errors.
    pub position: Option<usize>,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error", self.stage.name())?;
        if let Some(p) = self.position {
            write!(f, " at position {p}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl PipelineError {
    fn new(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            message: message.into(),
            position: None,
        }
    }

    /// User errors as opposed to internal failures.
    pub fn is_user_error(&self) -> bool {
        matches!(self.stage, Stage::Parse | Stage::Analyticity | Stage::Backend)
    }
}

/// Term-by-term comparison of the two summation paths.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossCheck {
    ExactEqual,
    /// First index where exact terms differ.
    ExactMismatch { k: usize },
    /// Largest `|direct - bernoulli|` over all terms (float backend).
    MaxDiscrepancy(Scalar),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Canonical rendering of the parsed expression.
    pub expression: String,
    pub series: PowerSeries,
    pub result: RegularizationResult,
    pub cross_check: CrossCheck,
}

/// Parses, validates, expands to order `K + 2`, sums, and cross-checks.
///
/// The two extra coefficients feed the first-omitted-term bound.
pub fn regularize_expression(text: &str, config: &RegularizeConfig) -> Result<Evaluation, PipelineError> {
    let e = parse(text).map_err(|err| PipelineError {
        stage: Stage::Parse,
        message: err.message.clone(),
        position: Some(err.position),
    })?;
    regularize_parsed(&e, config)
}

pub(crate) fn regularize_parsed(e: &Expr, config: &RegularizeConfig) -> Result<Evaluation, PipelineError> {
    validate_analytic_at_zero_with(e, &config.precision)
        .map_err(|err| PipelineError::new(Stage::Analyticity, err.to_string()))?;
    let series = maclaurin(e, config.terms + 2, &config.precision)
        .map_err(|err| PipelineError::new(Stage::Series, err.to_string()))?;
    if config.exact_only && !series.is_exact() {
        return Err(PipelineError::new(
            Stage::Backend,
            "expression needs float arithmetic but --exact-only was given",
        ));
    }
    let mut result = regularize_direct_with(&series, config.terms, &config.convergence)
        .map_err(|err| PipelineError::new(Stage::Regularize, err.to_string()))?;
    for t in result.terms.iter_mut() {
        t.cross_term = Some(bernoulli_term(series.coeff(t.k), t.k));
    }
    let cross_check = cross_check(&result)?;
    Ok(Evaluation {
        expression: e.render(),
        series,
        result,
        cross_check,
    })
}

fn cross_check(result: &RegularizationResult) -> Result<CrossCheck, PipelineError> {
    let missing = || PipelineError::new(Stage::CrossCheck, "missing cross term");
    match result.backend {
        Backend::Exact => {
            for t in &result.terms {
                if t.cross_term.as_ref().ok_or_else(missing)? != &t.term {
                    return Ok(CrossCheck::ExactMismatch { k: t.k });
                }
            }
            Ok(CrossCheck::ExactEqual)
        }
        Backend::Float => {
            let mut worst = Scalar::zero();
            for t in &result.terms {
                let d = t.cross_term.as_ref().ok_or_else(missing)?.sub(&t.term).abs();
                if d.compare(&worst).is_gt() {
                    worst = d;
                }
            }
            Ok(CrossCheck::MaxDiscrepancy(worst))
        }
    }
}

#[derive(Serialize)]
struct TermJson {
    k: usize,
    term: String,
    partial_sum: String,
}

#[derive(Serialize)]
#[serde(untagged)]
enum CrossCheckJson {
    Label(&'static str),
    Discrepancy { max_discrepancy: String },
    Mismatch { mismatch_at: usize },
}

#[derive(Serialize)]
struct EvaluationJson {
    expression: String,
    backend: &'static str,
    terms_used: usize,
    value: String,
    verdict: &'static str,
    tail_bound: Option<String>,
    terms: Vec<TermJson>,
    cross_check: CrossCheckJson,
}

impl Evaluation {
    /// Pretty-printed JSON. Exact values render as `p/q`, floats as decimals
    /// with `digits` significant digits.
    pub fn to_json(&self, digits: usize) -> String {
        let r = &self.result;
        let doc = EvaluationJson {
            expression: self.expression.clone(),
            backend: r.backend.name(),
            terms_used: r.terms_used,
            value: r.value.render(digits),
            verdict: r.verdict.name(),
            tail_bound: r.tail_bound.as_ref().map(|t| t.render(digits)),
            terms: r
                .terms
                .iter()
                .map(|t| TermJson {
                    k: t.k,
                    term: t.term.render(digits),
                    partial_sum: t.partial_sum.render(digits),
                })
                .collect(),
            cross_check: match &self.cross_check {
                CrossCheck::ExactEqual => CrossCheckJson::Label("exact-equal"),
                CrossCheck::ExactMismatch { k } => CrossCheckJson::Mismatch { mismatch_at: *k },
                CrossCheck::MaxDiscrepancy(d) => CrossCheckJson::Discrepancy {
                    max_discrepancy: d.render_decimal(digits),
                },
            },
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularize::Verdict;

    #[test]
    fn cubic_is_exact() {
        let ev = regularize_expression("x^3", &RegularizeConfig::default()).unwrap();
        assert_eq!(ev.result.value, Scalar::ratio(1, 20));
        assert_eq!(ev.cross_check, CrossCheck::ExactEqual);
        assert_eq!(ev.result.terms_used, 65);
    }

    #[test]
    fn sine_converges() {
        let ev = regularize_expression("sin(x)", &RegularizeConfig::default()).unwrap();
        assert_eq!(ev.result.verdict, Verdict::Converged);
        assert_eq!(ev.cross_check, CrossCheck::ExactEqual);
    }

    #[test]
    fn stage_labels() {
        let cfg = RegularizeConfig::default();
        let err = regularize_expression("log(x)", &cfg).unwrap_err();
        assert_eq!(err.stage, Stage::Analyticity);
        let err = regularize_expression("sin(x", &cfg).unwrap_err();
        assert_eq!(err.stage, Stage::Parse);
        assert_eq!(err.position, Some(3));
        let exact_only = RegularizeConfig {
            exact_only: true,
            ..RegularizeConfig::default()
        };
        let err = regularize_expression("erf(x)", &exact_only).unwrap_err();
        assert_eq!(err.stage, Stage::Backend);
        assert!(regularize_expression("exp(x)", &exact_only).is_ok());
    }

    #[test]
    fn float_cross_check_is_tiny() {
        let ev = regularize_expression("erf(x)", &RegularizeConfig::default()).unwrap();
        match ev.cross_check {
            CrossCheck::MaxDiscrepancy(d) => assert!(d.log2_abs().is_none_or(|l| l < -120.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_shape() {
        let cfg = RegularizeConfig {
            terms: 8,
            ..RegularizeConfig::default()
        };
        let ev = regularize_expression("x", &cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&ev.to_json(30)).unwrap();
        assert_eq!(v["value"], "1/6");
        assert_eq!(v["backend"], "exact");
        assert_eq!(v["verdict"], "converged");
        assert_eq!(v["tail_bound"], "0");
        assert_eq!(v["cross_check"], "exact-equal");
        assert_eq!(v["terms"].as_array().unwrap().len(), 9);
        assert_eq!(v["terms"][1]["term"], "1/6");
    }
}
