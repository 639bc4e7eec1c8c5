use crate::expr::{Expr, Func};

use super::{Float, NumericError, PrecisionConfig, Scalar};

/// Evaluates an expression without `x`.
///
/// Rational literals combined with `+ - * / ^` stay exact. `pi`, `e` and any
/// function application produce floats at `precision.float_bits`.
pub fn eval_constant(e: &Expr, precision: &PrecisionConfig) -> Result<Scalar, NumericError> {
    let bits = precision.float_bits;
    Ok(match e {
        Expr::Literal(r) => Scalar::Exact(r.clone()),
        Expr::Pi => Scalar::Float(Float::pi(bits)),
        Expr::E => Scalar::Float(Float::e(bits)),
        Expr::Var => return Err(NumericError::NotConstant),
        Expr::Neg(a) => eval_constant(a, precision)?.neg(),
        Expr::Add(a, b) => eval_constant(a, precision)?.add(&eval_constant(b, precision)?),
        Expr::Sub(a, b) => eval_constant(a, precision)?.sub(&eval_constant(b, precision)?),
        Expr::Mul(a, b) => eval_constant(a, precision)?.mul(&eval_constant(b, precision)?),
        Expr::Div(a, b) => eval_constant(a, precision)?.div(&eval_constant(b, precision)?)?,
        Expr::Pow(a, n) => eval_constant(a, precision)?.pow_int(*n),
        Expr::Apply(f, a) => {
            let arg = eval_constant(a, precision)?;
            Scalar::Float(apply_float(*f, &arg.to_float(bits.max(arg.bits().unwrap_or(0))))?)
        }
    })
}

/// Applies an elementary function in the float backend.
pub(crate) fn apply_float(f: Func, x: &Float) -> Result<Float, NumericError> {
    Ok(match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Sinh => x.sinh(),
        Func::Cosh => x.cosh(),
        Func::Exp => x.exp(),
        Func::Log => x.ln()?,
        Func::Erf => x.erf(),
        Func::Sqrt => x.sqrt()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::numerics::parse_decimal;
    use num_rational::BigRational;
    use num_traits::Signed;

    fn eval(s: &str) -> Result<Scalar, NumericError> {
        eval_constant(&parse(s).unwrap(), &PrecisionConfig::default())
    }

    fn close(a: &Scalar, reference: &str, tol_log2: f64) -> bool {
        let r = Scalar::Exact(parse_decimal(reference).unwrap());
        a.sub(&r).log2_abs().is_none_or(|l| l < tol_log2)
    }

    #[test]
    fn rational_constant_stays_exact() {
        let v = eval("1/4").unwrap();
        assert_eq!(v.as_exact(), Some(&BigRational::new(1.into(), 4.into())));
        let v = eval("(1 + 1/2)^2 - 0.25").unwrap();
        assert_eq!(v, Scalar::from_int(2));
        assert!(v.is_exact());
    }

    #[test]
    fn transcendental_constants() {
        // sin(1) - 1 = -0.15852901519210349335...
        let v = eval("sin(1)-1").unwrap();
        assert_eq!(v.bits(), Some(128));
        assert!(close(&v, "-0.158529015192103493347497678369701000377", -125.0));
        // -1/e
        assert!(close(&eval("-1/e").unwrap(), "-0.367879441171442321595523770161460867446", -125.0));
        // sqrt(pi) = 1.7724538509055160272981674833411451828
        assert!(close(&eval("sqrt(pi)").unwrap(), "1.77245385090551602729816748334114518280", -124.0));
        assert!(close(&eval("cosh(1)").unwrap(), "1.54308063481524377847790562075706168261", -124.0));
        assert!(close(&eval("erf(1)").unwrap(), "0.842700792949714869341220635082609259296", -125.0));
    }

    #[test]
    fn e_identity_within_two_ulp() {
        let v = eval("e^1 - e").unwrap();
        assert!(!v.is_exact());
        assert!(v.abs().log2_abs().is_none_or(|l| l <= -126.0));
    }

    #[test]
    fn function_results_are_floats() {
        assert!(!eval("sin(0)").unwrap().is_exact());
        assert!(eval("sin(0)").unwrap().is_zero());
        assert!(eval("log(1)").unwrap().is_zero());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(eval("log(0)"), Err(NumericError::Domain { function: "log", .. })));
        assert!(matches!(eval("log(-2)"), Err(NumericError::Domain { .. })));
        assert!(matches!(eval("sqrt(-1)"), Err(NumericError::Domain { function: "sqrt", .. })));
        assert_eq!(eval("1/(1-1)"), Err(NumericError::DivisionByZero));
        assert_eq!(eval("x + 1"), Err(NumericError::NotConstant));
    }

    #[test]
    fn precision_is_configurable() {
        let cfg = PrecisionConfig::new(256, 60).unwrap();
        let v = eval_constant(&parse("pi").unwrap(), &cfg).unwrap();
        assert_eq!(v.bits(), Some(256));
        let pi = parse_decimal("3.14159265358979323846264338327950288419716939937510582097494459230781640628620899").unwrap();
        let err = (v.to_rational() - pi).abs();
        assert!(Scalar::Exact(err).log2_abs().unwrap() < -253.0);
    }
}
