//! Worked examples with closed-form references and an audit of the printed
//! summands.
//!
//! Each entry carries three independent descriptions of the same number:
//! the expression the engine regularizes, the summand as printed alongside
//! the example, and a closed form. [`catalog_verify`] evaluates all three and
//! reports which pairs agree.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::expr::parse;
use crate::numerics::{eval_constant, factorial_bigint, Float, NumericError, PrecisionConfig, Scalar};
use crate::regularize::{
    assess_sequence, regularize_expression, ConvergenceConfig, PipelineError, RegularizationResult,
    RegularizeConfig, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Closed form not trusted until [`catalog_verify`] has run.
    Unaudited,
    Verified,
    /// The printed closed form disagrees with the engine.
    PaperDiscrepant,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Unaudited => "unaudited",
            Status::Verified => "verified",
            Status::PaperDiscrepant => "paper-discrepant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Formula {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log1p,
    ExpX2,
    Erf,
    ExpNegX2,
    XSin,
    Monomial(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: String,
    pub expression_text: String,
    /// The printed summand, verbatim.
    pub paper_series_text: String,
    /// The printed closed form as a constant expression.
    pub paper_closed_form: String,
    pub status: Status,
    pub note: &'static str,
    /// Set when the ordinary integral converges, so the regularized value
    /// can be compared with it.
    pub classical_value: Option<&'static str>,
    formula: Formula,
}

fn entry(
    id: &str,
    expression_text: &str,
    paper_series_text: &str,
    paper_closed_form: &str,
    status: Status,
    note: &'static str,
    formula: Formula,
) -> CatalogEntry {
    CatalogEntry {
        id: id.to_string(),
        expression_text: expression_text.to_string(),
        paper_series_text: paper_series_text.to_string(),
        paper_closed_form: paper_closed_form.to_string(),
        status,
        note,
        classical_value: None,
        formula,
    }
}

/// The integral of `x^m`.
pub fn monomial_entry(m: u32) -> CatalogEntry {
    let closed = BigRational::new(
        if m % 2 == 1 { BigInt::one() } else { -BigInt::one() },
        BigInt::from((m as u64 + 1) * (m as u64 + 2)),
    );
    entry(
        &format!("x{m}"),
        &format!("x^{m}"),
        r"\frac{(-1)^{m+1} }{(m+2)!} m!",
        &closed.to_string(),
        Status::Verified,
        "single nonzero term at k = m",
        Formula::Monomial(m),
    )
}

pub fn catalog_entries() -> Vec<CatalogEntry> {
    let mut v = vec![
        entry(
            "sin",
            "sin(x)",
            r"\frac{(-1)^{k+1}}{(2k +3)!}",
            "sin(1)-1",
            Status::PaperDiscrepant,
            "the printed series sums to sin(1)-1 but the regularization formula gives 1-sin(1)",
            Formula::Sin,
        ),
        entry(
            "cos",
            "cos(x)",
            r"\frac{(-1)^{2k+1}}{(2k +2)!}",
            "cos(1)-1",
            Status::Verified,
            "the printed summand has constant sign and sums to 1-cosh(1)",
            Formula::Cos,
        ),
        entry(
            "sinh",
            "sinh(x)",
            r"\frac{1}{(2k +3)!}",
            "sinh(1)-1",
            Status::Verified,
            "",
            Formula::Sinh,
        ),
        entry(
            "cosh",
            "cosh(x)",
            r"\frac{(-1)^{2k+1}}{(2k +2)!}",
            "1-cosh(1)",
            Status::Verified,
            "",
            Formula::Cosh,
        ),
        entry(
            "exp",
            "e^x",
            r"\frac{(-1)^{k+1}}{(k +2)!}",
            "-1/e",
            Status::Verified,
            "",
            Formula::Exp,
        ),
        entry(
            "log1p",
            "log(1+x)",
            r"\frac{1}{k(k+1)(k+2)}",
            "1/4",
            Status::Verified,
            "radius of convergence 1; the printed sum starts at k = 0 where the summand is undefined, summed from k = 1",
            Formula::Log1p,
        ),
        entry(
            "exp_x2",
            "e^(x^2)",
            r"\frac{(-1)^{k+1}}{2(k +2)(k+1)k!}",
            "1/2 - 1/(2*e) - sqrt(pi)/e*erf(1)",
            Status::Unaudited,
            "",
            Formula::ExpX2,
        ),
        entry(
            "erf",
            "erf(x)",
            r"\frac{2}{\sqrt{\pi}} \sum_{k=0}^{\infty} \frac{(-1)^k}{2(2k+1)(k+1)(2k+3)k!}",
            "3/2*erf(1) + 1/(2*e*sqrt(pi)) - 1/sqrt(pi)",
            Status::Unaudited,
            "",
            Formula::Erf,
        ),
        entry(
            "exp_neg_x2",
            "e^(-x^2)",
            r"\frac{2}{\sqrt{\pi}} \sum_{k=0}^{\infty} \frac{(-1)^{k+1}}{2(2k+1)(k+1)!}",
            "-sqrt(pi)/2*erf(1) + (1-e)/(2*e)",
            Status::Unaudited,
            "",
            Formula::ExpNegX2,
        ),
        entry(
            "xsin",
            "x*sin(x)",
            r"\frac{1}{2(k+2)(2k+3)(1+2k)!}",
            "2 + sinh(1) - 2*cosh(1)",
            Status::Unaudited,
            "",
            Formula::XSin,
        ),
    ];
    v.iter_mut()
        .find(|e| e.id == "exp_neg_x2")
        .expect("present")
        .classical_value = Some("sqrt(pi)/2");
    v.extend((0..=3).map(monomial_entry));
    v
}

pub fn find_entry(id: &str) -> Option<CatalogEntry> {
    if let Some(m) = id.strip_prefix('x').and_then(|m| m.parse::<u32>().ok()) {
        return Some(monomial_entry(m));
    }
    catalog_entries().into_iter().find(|e| e.id == id)
}

fn q(n: BigInt, d: BigInt) -> Scalar {
    Scalar::Exact(BigRational::new(n, d))
}

fn sign(odd: bool) -> BigInt {
    if odd {
        -BigInt::one()
    } else {
        BigInt::one()
    }
}

fn fact(n: usize) -> BigInt {
    factorial_bigint(n as u32)
}

fn two_over_sqrt_pi(bits: usize) -> Scalar {
    let two = Float::from_i64(2, bits);
    Scalar::Float(two.div(&Float::pi(bits).sqrt().expect("pi > 0"), bits))
}

impl CatalogEntry {
    /// The regularization summand at index `k`, written out in closed form
    /// for this particular function.
    pub fn derived_term(&self, k: usize, bits: usize) -> Scalar {
        let zero = Scalar::zero();
        let even = k.is_multiple_of(2);
        let j = k / 2;
        let b = BigInt::from;
        match self.formula {
            // k = 2j+1: (-1)^j / (2j+3)!
            Formula::Sin if !even => q(sign(j % 2 == 1), fact(2 * j + 3)),
            // k = 2j: -(-1)^j / (2j+2)!
            Formula::Cos if even => q(sign(j.is_multiple_of(2)), fact(2 * j + 2)),
            Formula::Sinh if !even => q(b(1), fact(2 * j + 3)),
            Formula::Cosh if even => q(-BigInt::one(), fact(2 * j + 2)),
            Formula::Exp => q(sign(k.is_multiple_of(2)), fact(k + 2)),
            Formula::Log1p if k >= 1 => q(b(1), b(k * (k + 1) * (k + 2))),
            // k = 2j: -1 / (2 (2j+1) (j+1) j!)
            Formula::ExpX2 if even => q(-BigInt::one(), b(2 * (2 * j + 1) * (j + 1)) * fact(j)),
            // k = 2j+1: (2/sqrt(pi)) (-1)^j / (2 (2j+1) (j+1) (2j+3) j!)
            Formula::Erf if !even => two_over_sqrt_pi(bits).mul(&q(
                sign(j % 2 == 1),
                b(2 * (2 * j + 1) * (j + 1) * (2 * j + 3)) * fact(j),
            )),
            // k = 2j: (-1)^(j+1) / (2 (2j+1) (j+1)!)
            Formula::ExpNegX2 if even => q(sign(j.is_multiple_of(2)), b(2 * (2 * j + 1)) * fact(j + 1)),
            // k = 2i+2: (-1)^(i+1) / (2 (i+2) (2i+3) (2i+1)!)
            Formula::XSin if even && k >= 2 => {
                let i = j - 1;
                q(sign(i.is_multiple_of(2)), b(2 * (i + 2) * (2 * i + 3)) * fact(2 * i + 1))
            }
            Formula::Monomial(m) if k == m as usize => q(sign(k.is_multiple_of(2)), b((k + 1) * (k + 2))),
            _ => zero,
        }
    }

    /// The printed summand at its own index `j`.
    pub fn paper_term(&self, j: usize, bits: usize) -> Scalar {
        let b = BigInt::from;
        match self.formula {
            Formula::Sin => q(sign(j.is_multiple_of(2)), fact(2 * j + 3)),
            Formula::Cos | Formula::Cosh => q(sign((2 * j + 1) % 2 == 1), fact(2 * j + 2)),
            Formula::Sinh => q(b(1), fact(2 * j + 3)),
            Formula::Exp => q(sign(j.is_multiple_of(2)), fact(j + 2)),
            Formula::Log1p => q(b(1), b(j * (j + 1) * (j + 2))),
            Formula::ExpX2 => q(sign(j.is_multiple_of(2)), b(2 * (j + 2) * (j + 1)) * fact(j)),
            Formula::Erf => two_over_sqrt_pi(bits).mul(&q(
                sign(j % 2 == 1),
                b(2 * (2 * j + 1) * (j + 1) * (2 * j + 3)) * fact(j),
            )),
            Formula::ExpNegX2 => {
                two_over_sqrt_pi(bits).mul(&q(sign(j.is_multiple_of(2)), b(2 * (2 * j + 1)) * fact(j + 1)))
            }
            Formula::XSin => q(b(1), b(2 * (j + 2) * (2 * j + 3)) * fact(2 * j + 1)),
            Formula::Monomial(m) => {
                if j == m as usize {
                    q(sign(j.is_multiple_of(2)), fact(j + 2)).mul(&Scalar::from_bigint(fact(j)))
                } else {
                    Scalar::zero()
                }
            }
        }
    }

    /// First index of the printed sum that is actually summed.
    pub fn paper_start(&self) -> usize {
        match self.formula {
            Formula::Log1p => 1,
            _ => 0,
        }
    }

    /// How many printed terms to sum for `K` engine terms.
    pub fn paper_terms(&self, terms: usize) -> usize {
        match self.formula {
            Formula::Log1p => terms.max(2000),
            Formula::Monomial(m) => terms.max(m as usize + 1).max(8),
            _ => terms.max(8),
        }
    }

    /// The printed sum has finitely many nonzero terms, all of them summed.
    fn paper_series_finite(&self) -> bool {
        matches!(self.formula, Formula::Monomial(_))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("no catalog entry '{0}'")]
    UnknownId(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("closed form '{form}': {source}")]
    ClosedForm { form: String, source: NumericError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub delta: Scalar,
    pub tolerance: Scalar,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSum {
    pub value: Scalar,
    pub terms: usize,
    pub verdict: Verdict,
    pub tail_bound: Option<Scalar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub id: String,
    pub terms: usize,
    pub engine: RegularizationResult,
    /// The printed closed form, evaluated.
    pub reference: Scalar,
    pub engine_vs_reference: Comparison,
    /// The printed summand, summed independently of the engine.
    pub paper_series: SequenceSum,
    pub paper_series_vs_reference: Comparison,
    pub engine_vs_paper_series: Comparison,
    /// [`CatalogEntry::derived_term`] summed past `K` at doubled precision.
    pub derived_sum: Scalar,
    pub engine_vs_derived: Comparison,
    pub status: Status,
    pub note: &'static str,
    pub classical_value: Option<Scalar>,
}

impl VerificationReport {
    /// Which of the three numbers agree, in words.
    pub fn agreement(&self) -> &'static str {
        match (
            self.engine_vs_reference.agrees,
            self.paper_series_vs_reference.agrees,
            self.engine_vs_paper_series.agrees,
        ) {
            (true, true, true) => "all agree",
            (true, _, _) => "engine matches closed form; printed series differs",
            (false, true, _) => "printed series matches closed form; engine differs",
            (false, false, true) => "engine matches printed series; closed form differs",
            (false, false, false) => "no pair agrees",
        }
    }
}

fn pow2(e: i64) -> Scalar {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        q(p, BigInt::one())
    } else {
        q(BigInt::one(), p)
    }
}

fn compare(a: &Scalar, ta: Option<&Scalar>, b: &Scalar, tb: Option<&Scalar>, bits: usize) -> Comparison {
    let delta = a.sub(b).abs();
    let magnitude = a.abs().log2_abs().unwrap_or(0.0).max(0.0).ceil() as i64;
    let mut tolerance = pow2(magnitude + 16 - bits as i64);
    let mut bounded = true;
    for t in [ta, tb] {
        match t {
            Some(t) => tolerance = tolerance.add(t),
            None => bounded = false,
        }
    }
    let agrees = bounded && delta.compare(&tolerance).is_le();
    Comparison {
        delta,
        tolerance,
        agrees,
    }
}

fn sum_sequence(values: &[Scalar], first: usize, bits: usize) -> SequenceSum {
    let mut total = Scalar::Float(Float::from_i64(0, bits));
    for v in values {
        total = total.add(v);
    }
    let assessed = assess_sequence(first, values, &ConvergenceConfig::default()).ok();
    let rounding = pow2((values.len() as f64).log2().ceil() as i64 + 4 - bits as i64);
    SequenceSum {
        value: total,
        terms: values.len(),
        verdict: assessed.as_ref().map_or(Verdict::Inconclusive, |a| a.verdict),
        tail_bound: assessed.and_then(|a| a.tail_bound).map(|t| t.add(&rounding)),
    }
}

/// Runs the engine on entry `id` with `K = terms` and audits it.
pub fn catalog_verify(id: &str, terms: usize, precision: &PrecisionConfig) -> Result<VerificationReport, CatalogError> {
    let entry = find_entry(id).ok_or_else(|| CatalogError::UnknownId(id.to_string()))?;
    verify_entry(&entry, terms, precision)
}

pub fn verify_entry(
    entry: &CatalogEntry,
    terms: usize,
    precision: &PrecisionConfig,
) -> Result<VerificationReport, CatalogError> {
    let bits = precision.float_bits;
    let config = RegularizeConfig {
        terms,
        precision: *precision,
        ..RegularizeConfig::default()
    };
    let engine = regularize_expression(&entry.expression_text, &config)?.result;
    let constant = |form: &str| {
        let e = parse(form).expect("catalog constants parse");
        eval_constant(&e, precision).map_err(|source| CatalogError::ClosedForm {
            form: form.to_string(),
            source,
        })
    };
    let reference = constant(&entry.paper_closed_form)?;
    let classical_value = entry.classical_value.map(constant).transpose()?;

    let start = entry.paper_start();
    let printed: Vec<Scalar> = (start..start + entry.paper_terms(terms))
        .map(|j| entry.paper_term(j, bits))
        .collect();
    let mut paper_series = sum_sequence(&printed, start, bits);
    if entry.paper_series_finite() {
        paper_series.verdict = Verdict::Converged;
        paper_series.tail_bound = Some(pow2(4 - bits as i64));
    }

    let wide = 2 * bits;
    let mut derived_sum = Scalar::Float(Float::from_i64(0, wide));
    for k in 0..=terms + 20 {
        derived_sum = derived_sum.add(&entry.derived_term(k, wide));
    }

    let et = engine.tail_bound.as_ref();
    let pt = paper_series.tail_bound.as_ref();
    let zero = Scalar::zero();
    let engine_vs_reference = compare(&engine.value, et, &reference, Some(&zero), bits);
    let paper_series_vs_reference = compare(&paper_series.value, pt, &reference, Some(&zero), bits);
    let engine_vs_paper_series = compare(&engine.value, et, &paper_series.value, pt, bits);
    let engine_vs_derived = compare(&engine.value, et, &derived_sum, Some(&zero), bits);
    let status = if engine_vs_reference.agrees {
        Status::Verified
    } else {
        Status::PaperDiscrepant
    };
    Ok(VerificationReport {
        id: entry.id.clone(),
        terms,
        engine,
        reference,
        engine_vs_reference,
        paper_series,
        paper_series_vs_reference,
        engine_vs_paper_series,
        derived_sum,
        engine_vs_derived,
        status,
        note: entry.note,
        classical_value,
    })
}
