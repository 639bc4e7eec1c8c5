#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use zetareg::expr::{Expr, Func};
use zetareg::numerics::{Float, Scalar};
use zetareg::series::PowerSeries;

// ---------------------------------------------------------------------------
// Symbolic differentiation, used as an oracle for Maclaurin coefficients.

fn lit(r: BigRational) -> Expr {
    Expr::Literal(r)
}

fn as_lit(e: &Expr) -> Option<&BigRational> {
    match e {
        Expr::Literal(r) => Some(r),
        _ => None,
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (as_lit(&a), as_lit(&b)) {
        (Some(x), Some(y)) => lit(x + y),
        (Some(x), _) if x.is_zero() => b,
        (_, Some(y)) if y.is_zero() => a,
        _ => Expr::add(a, b),
    }
}

fn neg(a: Expr) -> Expr {
    match as_lit(&a) {
        Some(x) => lit(-x),
        None => Expr::neg(a),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    add(a, neg(b))
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (as_lit(&a), as_lit(&b)) {
        (Some(x), Some(y)) => lit(x * y),
        (Some(x), _) if x.is_zero() => lit(BigRational::zero()),
        (_, Some(y)) if y.is_zero() => lit(BigRational::zero()),
        (Some(x), _) if x.is_one() => b,
        (_, Some(y)) if y.is_one() => a,
        _ => Expr::mul(a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (as_lit(&a), as_lit(&b)) {
        (Some(x), _) if x.is_zero() => lit(BigRational::zero()),
        (_, Some(y)) if y.is_one() => a,
        _ => Expr::div(a, b),
    }
}

fn pow(a: Expr, n: u32) -> Expr {
    match n {
        0 => lit(BigRational::one()),
        1 => a,
        _ => Expr::pow(a, n),
    }
}

fn apply(f: Func, a: Expr) -> Expr {
    Expr::apply(f, a)
}

/// d/dx with light simplification.
pub fn diff(e: &Expr) -> Expr {
    let zero = || lit(BigRational::zero());
    match e {
        Expr::Literal(_) | Expr::Pi | Expr::E => zero(),
        Expr::Var => lit(BigRational::one()),
        Expr::Neg(a) => neg(diff(a)),
        Expr::Add(a, b) => add(diff(a), diff(b)),
        Expr::Sub(a, b) => sub(diff(a), diff(b)),
        Expr::Mul(a, b) => add(mul(diff(a), (**b).clone()), mul((**a).clone(), diff(b))),
        Expr::Div(a, b) => div(
            sub(mul(diff(a), (**b).clone()), mul((**a).clone(), diff(b))),
            pow((**b).clone(), 2),
        ),
        Expr::Pow(a, n) => {
            if *n == 0 {
                zero()
            } else {
                mul(
                    mul(lit(BigRational::from_integer(BigInt::from(*n))), pow((**a).clone(), n - 1)),
                    diff(a),
                )
            }
        }
        Expr::Apply(f, a) => {
            let da = diff(a);
            if as_lit(&da).is_some_and(|r| r.is_zero()) {
                return zero();
            }
            let a = (**a).clone();
            let outer = match f {
                Func::Sin => apply(Func::Cos, a),
                Func::Cos => neg(apply(Func::Sin, a)),
                Func::Sinh => apply(Func::Cosh, a),
                Func::Cosh => apply(Func::Sinh, a),
                Func::Exp => apply(Func::Exp, a),
                Func::Log => return div(da, a),
                Func::Erf => mul(
                    div(lit(BigRational::from_integer(2.into())), apply(Func::Sqrt, Expr::Pi)),
                    apply(Func::Exp, neg(pow(a, 2))),
                ),
                Func::Sqrt => return zero(),
            };
            mul(outer, da)
        }
    }
}

/// Value at `x = 0`, exact where the function value is rational.
pub fn eval_at_zero(e: &Expr, bits: usize) -> Scalar {
    match e {
        Expr::Literal(r) => Scalar::Exact(r.clone()),
        Expr::Var => Scalar::zero(),
        Expr::Pi => Scalar::Float(Float::pi(bits)),
        Expr::E => Scalar::Float(Float::e(bits)),
        Expr::Neg(a) => eval_at_zero(a, bits).neg(),
        Expr::Add(a, b) => eval_at_zero(a, bits).add(&eval_at_zero(b, bits)),
        Expr::Sub(a, b) => eval_at_zero(a, bits).sub(&eval_at_zero(b, bits)),
        Expr::Mul(a, b) => eval_at_zero(a, bits).mul(&eval_at_zero(b, bits)),
        Expr::Div(a, b) => eval_at_zero(a, bits).div(&eval_at_zero(b, bits)).unwrap(),
        Expr::Pow(a, n) => eval_at_zero(a, bits).pow_int(*n),
        Expr::Apply(f, a) => {
            let v = eval_at_zero(a, bits);
            if v.is_exact() {
                let special = if v.is_zero() {
                    match f {
                        Func::Sin | Func::Sinh | Func::Erf => Some(Scalar::zero()),
                        Func::Cos | Func::Cosh | Func::Exp => Some(Scalar::one()),
                        _ => None,
                    }
                } else if *f == Func::Log && v == Scalar::one() {
                    Some(Scalar::zero())
                } else {
                    None
                };
                if let Some(s) = special {
                    return s;
                }
            }
            let x = v.to_float(bits);
            Scalar::Float(match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Exp => x.exp(),
                Func::Log => x.ln().unwrap(),
                Func::Erf => x.erf(),
                Func::Sqrt => x.sqrt().unwrap(),
            })
        }
    }
}

/// `f^(k)(0)` for `k = 0..=n` by repeated symbolic differentiation.
pub fn derivatives_by_differentiation(e: &Expr, n: usize, bits: usize) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = e.clone();
    for k in 0..=n {
        out.push(eval_at_zero(&cur, bits));
        if k < n {
            cur = diff(&cur);
        }
    }
    out
}

/// Exact equality for exact pairs, otherwise relative agreement to `2^-tol_bits`.
pub fn scalars_agree(a: &Scalar, b: &Scalar, tol_bits: f64) -> bool {
    if a.is_exact() && b.is_exact() {
        return a == b;
    }
    let diff = a.sub(b).abs();
    match diff.log2_abs() {
        None => true,
        Some(d) => {
            let scale = a.log2_abs().unwrap_or(0.0).max(b.log2_abs().unwrap_or(0.0)).max(0.0);
            d - scale < -tol_bits
        }
    }
}

/// Every grammar function, alone and in combination. Orders are capped where
/// the symbolic derivatives swell (quotients, logs, compositions).
pub const ORACLE_EXPRESSIONS: &[(&str, usize)] = &[
    ("sin(x)", 12),
    ("cos(x)", 12),
    ("sinh(x)", 12),
    ("cosh(x)", 12),
    ("exp(x)", 12),
    ("e^x", 12),
    ("log(1+x)", 9),
    ("erf(x)", 12),
    ("sqrt(2)*x^3", 12),
    ("x^5 - 3*x^2 + 1/2", 12),
    ("1/(1-x)", 9),
    ("(2+x)/(3-x^2)", 8),
    ("sin(1+x)", 12),
    ("cos(pi*x)", 12),
    ("log(2+x)", 9),
    ("exp(x^2)", 11),
    ("e^(-x^2)", 11),
    ("x*sin(x)", 12),
    ("sinh(x)*cosh(x)", 12),
    ("erf(2*x)", 10),
    ("exp(sin(x))", 9),
    ("log(1+sin(x))", 8),
    ("cosh(cos(x) - 1)", 9),
    ("erf(sin(x))", 8),
];

// ---------------------------------------------------------------------------
// Seeded random inputs.

pub fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let n: i64 = rng.gen_range(-50..=50);
    let d: i64 = rng.gen_range(1..=12);
    BigRational::new(n.into(), d.into())
}

pub fn random_exact_series(rng: &mut ChaCha8Rng, order: usize) -> PowerSeries {
    PowerSeries::from_coeffs((0..=order).map(|_| Scalar::Exact(random_rational(rng))).collect())
}

/// A random polynomial expression built from `x`, rational literals, `+ - *`
/// and small powers.
pub fn random_polynomial_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.5) {
            Expr::Var
        } else {
            Expr::Literal(random_rational(rng))
        };
    }
    match rng.gen_range(0..5) {
        0 => Expr::add(random_polynomial_expr(rng, depth - 1), random_polynomial_expr(rng, depth - 1)),
        1 => Expr::sub(random_polynomial_expr(rng, depth - 1), random_polynomial_expr(rng, depth - 1)),
        2 => Expr::mul(random_polynomial_expr(rng, depth - 1), random_polynomial_expr(rng, depth - 1)),
        3 => Expr::pow(random_polynomial_expr(rng, depth - 1), rng.gen_range(0..=4)),
        _ => Expr::neg(random_polynomial_expr(rng, depth - 1)),
    }
}

// ---------------------------------------------------------------------------
// Golden files for the command-line interface.

pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

pub const GOLDEN_CASES: &[GoldenCase] = &[
    GoldenCase { name: "eval_text", args: &["eval", "sin(x)", "--terms", "12"], exit: 0 },
    GoldenCase { name: "eval_json", args: &["--format", "json", "--terms", "12", "eval", "sin(x)"], exit: 0 },
    GoldenCase { name: "eval_float_json", args: &["--format", "json", "--terms", "10", "eval", "erf(x)"], exit: 0 },
    GoldenCase { name: "eval_divergent_text", args: &["--terms", "16", "eval", "1/(1-2*x)"], exit: 3 },
    GoldenCase { name: "series_text", args: &["--terms", "8", "series", "x*sin(x)"], exit: 0 },
    GoldenCase { name: "series_json", args: &["--terms", "6", "--format", "json", "series", "log(1+x)"], exit: 0 },
    GoldenCase { name: "examples_text", args: &["--terms", "40", "examples"], exit: 0 },
    GoldenCase { name: "examples_json", args: &["--terms", "40", "--format", "json", "examples"], exit: 0 },
    GoldenCase { name: "identities_text", args: &["identities"], exit: 0 },
    GoldenCase { name: "identities_json", args: &["identities", "--format", "json"], exit: 0 },
];

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"))
}

pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("zetareg").chain(args.iter().copied());
    let code = zetareg::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Runs a golden case. With `UPDATE_GOLDEN=1` the file is rewritten first.
pub fn check_golden(case: &GoldenCase) -> Result<(), String> {
    let (code, out, _) = run_cli(case.args);
    if code != case.exit {
        return Err(format!("{}: exit {code}, expected {}", case.name, case.exit));
    }
    let path = golden_path(case.name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &out).unwrap();
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want != out {
        return Err(format!("{}: output differs from {}", case.name, path.display()));
    }
    Ok(())
}
