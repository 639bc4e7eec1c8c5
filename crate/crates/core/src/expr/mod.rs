//! Expressions for f(x): AST, parser, renderer and the analyticity check.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := primary ("^" unary)?
//! primary  := number | "x" | "pi" | "e" | func "(" expr ")" | "(" expr ")"
//! func     := "sin" | "cos" | "sinh" | "cosh" | "exp" | "log" | "erf" | "sqrt"
//! number   := digits ("." digits)?
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. The exponent of
//! `^` must be a nonnegative integer literal, except when the base is `e`, in
//! which case `e^u` means `exp(u)`. A quotient of two integer literals such as
//! `1/4` is folded into a single rational literal, and decimals become exact
//! rationals. Implicit multiplication (`2x`) is not supported.

mod lexer;
mod parser;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::numerics::{render_exact, PrecisionConfig};

pub use parser::{parse, ParseError, ParseErrorKind, MAX_DEPTH, MAX_EXPONENT};

/// Functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Erf,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Exp,
        Func::Log,
        Func::Erf,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Erf => "erf",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Literal(BigRational),
    Pi,
    E,
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Apply(Func, Box<Expr>),
}

// Node constructors, named after the operators they build.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Literal(BigRational::from_integer(n.into()))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, n: u32) -> Expr {
        Expr::Pow(Box::new(a), n)
    }

    pub fn apply(f: Func, a: Expr) -> Expr {
        Expr::Apply(f, Box::new(a))
    }

    /// True if `x` occurs anywhere in the tree.
    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Literal(_) | Expr::Pi | Expr::E => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Apply(_, a) => a.contains_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains_var() || b.contains_var()
            }
        }
    }

    /// Degree of the expression as a polynomial in `x`, if it is one.
    /// Transcendental functions of constants count as constants; a division
    /// is polynomial only when the divisor is constant.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            Expr::Literal(_) | Expr::Pi | Expr::E => Some(0),
            Expr::Var => Some(1),
            Expr::Neg(a) => a.polynomial_degree(),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                Some(a.polynomial_degree()?.max(b.polynomial_degree()?))
            }
            Expr::Mul(a, b) => a.polynomial_degree()?.checked_add(b.polynomial_degree()?),
            Expr::Div(a, b) => {
                if b.contains_var() {
                    None
                } else {
                    a.polynomial_degree()
                }
            }
            Expr::Pow(a, n) => a.polynomial_degree()?.checked_mul(*n as usize),
            Expr::Apply(_, a) => {
                if a.contains_var() {
                    None
                } else {
                    Some(0)
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Literal(r) if !r.denom().is_one() || r.is_negative() => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, out: &mut String, min_prec: u8) {
        let paren = self.precedence() < min_prec;
        if paren {
            out.push('(');
        }
        match self {
            Expr::Literal(r) => {
                if r.is_negative() {
                    out.push('-');
                    out.push_str(&render_exact(&-r));
                } else {
                    out.push_str(&render_exact(r));
                }
            }
            Expr::Pi => out.push_str("pi"),
            Expr::E => out.push('e'),
            Expr::Var => out.push('x'),
            Expr::Neg(a) => {
                out.push('-');
                a.write_at(out, 3);
            }
            Expr::Add(a, b) => {
                a.write_at(out, 1);
                out.push_str(" + ");
                b.write_at(out, 2);
            }
            Expr::Sub(a, b) => {
                a.write_at(out, 1);
                out.push_str(" - ");
                b.write_at(out, 2);
            }
            Expr::Mul(a, b) => {
                a.write_at(out, 2);
                out.push('*');
                b.write_at(out, 3);
            }
            Expr::Div(a, b) => {
                a.write_at(out, 2);
                out.push('/');
                b.write_at(out, 3);
            }
            Expr::Pow(a, n) => {
                a.write_at(out, 5);
                out.push('^');
                out.push_str(&n.to_string());
            }
            Expr::Apply(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write_at(out, 0);
                out.push(')');
            }
        }
        if paren {
            out.push(')');
        }
    }

    /// Text form that parses back to the same tree.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write_at(&mut s, 0);
        s
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// The rule an expression broke when it cannot be expanded at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationRule {
    /// Division by a subexpression whose value at 0 is zero.
    ZeroDivisorConstant,
    /// log of a subexpression whose value at 0 is not positive.
    LogConstantNotPositive,
    /// sqrt of something other than a positive constant.
    SqrtArgumentNotPositive,
    SqrtArgumentNotConstant,
    /// erf of a subexpression whose value at 0 is nonzero.
    ErfConstantNotZero,
}

impl fmt::Display for ValidationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationRule::ZeroDivisorConstant => {
                "division by a series with zero constant term"
            }
            ValidationRule::LogConstantNotPositive => "log argument constant term is not positive",
            ValidationRule::SqrtArgumentNotPositive => "sqrt argument is not a positive constant",
            ValidationRule::SqrtArgumentNotConstant => "sqrt argument depends on x",
            ValidationRule::ErfConstantNotZero => {
                "erf argument must vanish at 0 (shifted erf is not supported)"
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{rule} in `{subtree}`")]
pub struct ValidationError {
    /// Rendered offending subtree.
    pub subtree: String,
    pub rule: ValidationRule,
}

impl ValidationError {
    pub fn new(subtree: &Expr, rule: ValidationRule) -> Self {
        Self {
            subtree: subtree.render(),
            rule,
        }
    }
}

/// Accepts `e` iff the series engine can expand it at 0.
///
/// The checks only depend on constant terms of subexpressions, so this runs the
/// engine at order 0: success there implies success at every order.
pub fn validate_analytic_at_zero(e: &Expr) -> Result<(), ValidationError> {
    validate_analytic_at_zero_with(e, &PrecisionConfig::default())
}

pub fn validate_analytic_at_zero_with(
    e: &Expr,
    precision: &PrecisionConfig,
) -> Result<(), ValidationError> {
    crate::series::maclaurin(e, 0, precision).map(|_| ())
}

/// Value of a literal, if `e` is one.
pub(crate) fn literal_value(e: &Expr) -> Option<&BigRational> {
    match e {
        Expr::Literal(r) => Some(r),
        _ => None,
    }
}

pub(crate) fn is_integer_literal(e: &Expr) -> bool {
    literal_value(e).is_some_and(|r| r.denom().is_one() && !r.is_negative())
}

pub(crate) fn is_zero_literal(e: &Expr) -> bool {
    literal_value(e).is_some_and(|r| r.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn render_round_trips() {
        for s in [
            "sin(x)",
            "x*sin(x)",
            "log(1 + x)",
            "1/2/3",
            "-x^2",
            "(-x)^2",
            "e^(x^2)",
            "2*(x + 1)^3 - 4/5*x",
            "--x",
            "x - (x - x)",
            "x/(2*x + 1)",
            "sqrt(pi)*erf(x)/2",
            "0.125*x",
            "(x^2)^3",
            "x*-x",
            "1/0",
        ] {
            let a = p(s);
            let r = a.render();
            assert_eq!(p(&r), a, "{s} -> {r}");
        }
    }

    #[test]
    fn render_is_readable() {
        assert_eq!(p("x*sin(x)").render(), "x*sin(x)");
        assert_eq!(p("log(1+x)").render(), "log(1 + x)");
        assert_eq!(p("e^x").render(), "exp(x)");
        assert_eq!(p("0.5*x").render(), "1/2*x");
        assert_eq!(p("x*0.5").render(), "x*(1/2)");
    }

    #[test]
    fn polynomial_degree() {
        assert_eq!(p("x^3").polynomial_degree(), Some(3));
        assert_eq!(p("(x+1)*(x^2-1)/3").polynomial_degree(), Some(3));
        assert_eq!(p("sin(1)*x").polynomial_degree(), Some(1));
        assert_eq!(p("sin(x)").polynomial_degree(), None);
        assert_eq!(p("1/(1+x)").polynomial_degree(), None);
    }

    #[test]
    fn validation_accepts_paper_examples() {
        for s in [
            "sin(x)",
            "cos(x)",
            "sinh(x)",
            "cosh(x)",
            "e^x",
            "log(1+x)",
            "e^(x^2)",
            "erf(x)",
            "e^(-x^2)",
            "x*sin(x)",
        ] {
            validate_analytic_at_zero(&p(s)).unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }

    #[test]
    fn validation_rejections() {
        let err = validate_analytic_at_zero(&p("log(x)")).unwrap_err();
        assert_eq!(err.rule, ValidationRule::LogConstantNotPositive);
        assert_eq!(err.subtree, "log(x)");

        let err = validate_analytic_at_zero(&p("1/x")).unwrap_err();
        assert_eq!(err.rule, ValidationRule::ZeroDivisorConstant);

        let err = validate_analytic_at_zero(&p("sin(x)/x")).unwrap_err();
        assert_eq!(err.rule, ValidationRule::ZeroDivisorConstant);
        assert_eq!(err.subtree, "sin(x)/x");

        let err = validate_analytic_at_zero(&p("x + erf(1 + x)")).unwrap_err();
        assert_eq!(err.rule, ValidationRule::ErfConstantNotZero);
        assert_eq!(err.subtree, "erf(1 + x)");

        let err = validate_analytic_at_zero(&p("sqrt(0)")).unwrap_err();
        assert_eq!(err.rule, ValidationRule::SqrtArgumentNotPositive);

        let err = validate_analytic_at_zero(&p("log(1 - 1 + x)")).unwrap_err();
        assert_eq!(err.rule, ValidationRule::LogConstantNotPositive);

        let programmatic = Expr::apply(Func::Sqrt, Expr::Var);
        let err = validate_analytic_at_zero(&programmatic).unwrap_err();
        assert_eq!(err.rule, ValidationRule::SqrtArgumentNotConstant);
    }

    #[test]
    fn validation_accepts_shifted_functions() {
        for s in ["log(2 + x)", "exp(1 + x)", "sin(pi/2 + x)", "cos(x + 1)", "1/(cos(x))", "sqrt(2)*x"] {
            validate_analytic_at_zero(&p(s)).unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }
}
