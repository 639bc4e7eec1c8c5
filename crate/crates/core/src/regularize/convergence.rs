use num_rational::BigRational;

use super::{derivative_term, TermRecord, Verdict};
use crate::numerics::Scalar;

/// Thresholds for [`convergence_assess`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    /// Ratio estimates below this count as geometric decay.
    pub ratio_threshold: f64,
    /// Fraction of the nonzero terms examined at the end of the sum.
    pub window_fraction: f64,
    pub min_window: usize,
    /// Power-law decay `k^-a` is accepted only for `a` above this.
    pub min_power_exponent: f64,
    /// Fewer retained terms than this is an error.
    pub min_terms: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            ratio_threshold: 0.9,
            window_fraction: 0.25,
            min_window: 4,
            min_power_exponent: 1.5,
            min_terms: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub verdict: Verdict,
    pub tail_bound: Option<Scalar>,
    /// Limsup estimate of the per-index ratio `|t_{k+1}| / |t_k|`.
    pub ratio_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConvergenceError {
    #[error("need at least {needed} terms, got {got}")]
    TooFewTerms { needed: usize, got: usize },
}

impl Assessment {
    fn inconclusive(ratio_estimate: Option<f64>) -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            tail_bound: None,
            ratio_estimate,
        }
    }
}

/// Classifies the summed terms and bounds what was left out.
///
/// `derivatives` holds `f^(k)(0)` and may run past the last term; the extra
/// entries supply the first omitted summand for the alternating-series bound.
///
/// The ratio `|f^(k+1)(0)| / ((k+3) |f^(k)(0)|)` is the ratio of consecutive
/// summands. It is undefined when derivatives vanish, so ratios are taken
/// between consecutive nonzero summands and normalized per index step.
pub fn convergence_assess(
    terms: &[TermRecord],
    derivatives: &[Scalar],
    cfg: &ConvergenceConfig,
) -> Result<Assessment, ConvergenceError> {
    if terms.len() < cfg.min_terms {
        return Err(ConvergenceError::TooFewTerms {
            needed: cfg.min_terms,
            got: terms.len(),
        });
    }
    let last_k = terms.last().map_or(0, |t| t.k);
    let points: Vec<(usize, &Scalar)> = terms
        .iter()
        .filter(|t| !t.term.is_zero())
        .map(|t| (t.k, &t.term))
        .collect();
    let omitted = derivatives
        .iter()
        .enumerate()
        .skip(last_k + 1)
        .map(|(k, d)| derivative_term(d, k))
        .find(|t| !t.is_zero());
    Ok(assess(&points, omitted, cfg))
}

/// Same classification for a plain sequence of summands, indexed from
/// `first_index`.
pub fn assess_sequence(
    first_index: usize,
    values: &[Scalar],
    cfg: &ConvergenceConfig,
) -> Result<Assessment, ConvergenceError> {
    if values.len() < cfg.min_terms {
        return Err(ConvergenceError::TooFewTerms {
            needed: cfg.min_terms,
            got: values.len(),
        });
    }
    let points: Vec<(usize, &Scalar)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (first_index + i, v))
        .collect();
    Ok(assess(&points, None, cfg))
}

fn assess(points: &[(usize, &Scalar)], omitted: Option<Scalar>, cfg: &ConvergenceConfig) -> Assessment {
    let m = points.len();
    let w = ((m as f64 * cfg.window_fraction).ceil() as usize).max(cfg.min_window);
    if m < cfg.min_window || w > m {
        return Assessment::inconclusive(None);
    }
    let window = &points[m - w..];
    let logs: Vec<f64> = window
        .iter()
        .map(|(_, t)| t.log2_abs().expect("nonzero"))
        .collect();
    let ks: Vec<f64> = window.iter().map(|(k, _)| *k as f64).collect();

    // Per-index ratios between consecutive nonzero summands.
    let ratios: Vec<f64> = (0..w - 1)
        .map(|i| ((logs[i + 1] - logs[i]) / (ks[i + 1] - ks[i])).exp2())
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0f64, f64::max);
    // Removes a 1/k drift from the ratio sequence.
    let (kf, kl) = (ks[0], ks[w - 2]);
    let extrapolated = if kl > kf {
        (kl * ratios[w - 2] - kf * ratios[0]) / (kl - kf)
    } else {
        ratios[0]
    };
    let rho = max_ratio.max(extrapolated).max(0.0);

    if logs[w - 1] > logs[0] {
        return Assessment {
            verdict: Verdict::SeriesDivergent,
            tail_bound: None,
            ratio_estimate: Some(rho),
        };
    }

    let monotone = logs.windows(2).all(|p| p[1] < p[0]);
    let alternating = window.windows(2).all(|p| p[0].1.signum() == -p[1].1.signum());
    let last = window[w - 1].1.abs();

    let tail = if monotone && alternating {
        // Alternating series: the error is at most the first omitted summand.
        Some(omitted.map_or_else(|| last.clone(), |t| t.abs()))
    } else if monotone && rho < cfg.ratio_threshold {
        let r = Scalar::Exact(BigRational::from_float(rho).expect("finite"));
        let factor = r.div(&Scalar::one().sub(&r)).expect("rho < 1");
        Some(last.mul(&factor))
    } else if monotone {
        // Power-law decay |t_k| ~ C k^-a, bounded by comparison with an integral.
        let alpha = (logs[0] - logs[w - 1]) / (ks[w - 1] / ks[0]).log2();
        if ks[0] > 0.0 && alpha > cfg.min_power_exponent {
            let k = ks[w - 1];
            let factor = BigRational::from_float((k + alpha - 1.0) / (alpha - 1.0)).expect("finite");
            Some(last.mul_rational(&factor))
        } else {
            None
        }
    } else {
        None
    };

    match tail {
        Some(t) => Assessment {
            verdict: Verdict::Converged,
            tail_bound: Some(t),
            ratio_estimate: Some(rho),
        },
        None => Assessment::inconclusive(Some(rho)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularize::regularize_direct;
    use crate::series::PowerSeries;

    fn series_from_derivatives(f: impl Fn(u32) -> Scalar, n: u32) -> PowerSeries {
        PowerSeries::from_derivatives((0..=n).map(f).collect())
    }

    #[test]
    fn exp_like_terms_converge_fast() {
        let s = series_from_derivatives(|_| Scalar::one(), 42);
        let res = regularize_direct(&s, 40).unwrap();
        assert_eq!(res.verdict, Verdict::Converged);
        assert!(res.ratio_estimate.unwrap() < 0.05);
    }

    #[test]
    fn factorial_squared_diverges() {
        let s = series_from_derivatives(|k| Scalar::factorial(k).pow_int(2), 42);
        let res = regularize_direct(&s, 40).unwrap();
        assert_eq!(res.verdict, Verdict::SeriesDivergent);
        assert!(res.tail_bound.is_none());
    }

    #[test]
    fn slow_positive_terms_use_power_law() {
        // t_k = 1/(k(k+1)(k+2)): ratio tends to 1, terms are all positive.
        let values: Vec<Scalar> = (1..=64i64)
            .map(|k| Scalar::ratio(1, k * (k + 1) * (k + 2)))
            .collect();
        let a = assess_sequence(1, &values, &ConvergenceConfig::default()).unwrap();
        assert_eq!(a.verdict, Verdict::Converged);
        let true_tail = Scalar::ratio(1, 2 * 65 * 66);
        assert!(true_tail.compare(a.tail_bound.as_ref().unwrap()).is_le());
    }

    #[test]
    fn harmonic_terms_are_inconclusive() {
        let values: Vec<Scalar> = (1..=64i64).map(|k| Scalar::ratio(1, k)).collect();
        let a = assess_sequence(1, &values, &ConvergenceConfig::default()).unwrap();
        assert_eq!(a.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn too_few_terms() {
        let values = vec![Scalar::one(); 3];
        assert_eq!(
            assess_sequence(0, &values, &ConvergenceConfig::default()),
            Err(ConvergenceError::TooFewTerms { needed: 8, got: 3 })
        );
    }

    #[test]
    fn growing_terms_diverge() {
        let values: Vec<Scalar> = (0..20i64).map(|k| Scalar::from_int(k + 1)).collect();
        let a = assess_sequence(0, &values, &ConvergenceConfig::default()).unwrap();
        assert_eq!(a.verdict, Verdict::SeriesDivergent);
    }
}
