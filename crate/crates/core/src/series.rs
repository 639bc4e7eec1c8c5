//! Truncated Maclaurin series.
//!
//! A [`PowerSeries`] of order `N` stores `c_0..=c_N` with `c_k = f^(k)(0)/k!`.
//! Products are Cauchy products truncated at `N`; elementary functions of a
//! series are computed from their differential equations (`h' = g' h` for
//! `exp`, and so on), which costs O(N^2) per application.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::expr::{Expr, Func, ValidationError, ValidationRule};
use crate::numerics::{eval_constant, Float, NumericError, PrecisionConfig, Scalar};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 64;
/// Largest order the CLI accepts.
pub const MAX_ORDER: usize = 512;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("divisor has zero constant term")]
    ZeroConstantTerm,
    #[error("inner series of a composition must have zero constant term")]
    NonZeroInnerConstant,
    #[error("{0} cannot be applied to a series with nonzero constant term")]
    UnsupportedShift(Kernel),
    #[error("log of a series whose constant term is not positive")]
    LogNonPositive,
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Functions with a built-in Maclaurin expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
    /// `log(1 + u)`.
    Log1p,
    /// `erf` without its `2/sqrt(pi)` prefactor, i.e. the integral of
    /// `exp(-t^2)` from 0 to `u`.
    Erf,
}

impl Kernel {
    pub const ALL: [Kernel; 7] = [
        Kernel::Exp,
        Kernel::Sin,
        Kernel::Cos,
        Kernel::Sinh,
        Kernel::Cosh,
        Kernel::Log1p,
        Kernel::Erf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Exp => "exp",
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Sinh => "sinh",
            Kernel::Cosh => "cosh",
            Kernel::Log1p => "log1p",
            Kernel::Erf => "erf",
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SeriesError::UnknownFunction(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct PowerSeries {
    coeffs: Vec<Scalar>,
    exact: bool,
    /// Every coefficient of the underlying function above this degree is
    /// known to be zero (not just the retained ones).
    degree_bound: Option<usize>,
}

impl PartialEq for PowerSeries {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn min_bound(a: Option<usize>, b: Option<usize>, f: impl Fn(usize, usize) -> Option<usize>) -> Option<usize> {
    f(a?, b?)
}

impl PowerSeries {
    /// Builds a series from `c_0..=c_N`. Nothing is assumed about the function
    /// beyond order `N`. Panics on an empty vector.
    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least c_0");
        let exact = coeffs.iter().all(Scalar::is_exact);
        Self {
            coeffs,
            exact,
            degree_bound: None,
        }
    }

    /// A polynomial: coefficients past the end are zero.
    pub fn polynomial(coeffs: Vec<Scalar>) -> Self {
        let n = coeffs.len() - 1;
        let mut s = Self::from_coeffs(coeffs);
        s.degree_bound = Some(n);
        s
    }

    /// Builds a series from derivative values `f^(k)(0)`.
    pub fn from_derivatives(derivatives: Vec<Scalar>) -> Self {
        let coeffs = derivatives
            .into_iter()
            .enumerate()
            .map(|(k, d)| d.div(&Scalar::factorial(k as u32)).expect("k! > 0"))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(Scalar::zero(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Scalar::one(), order)
    }

    pub fn constant(c: Scalar, order: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(); order + 1];
        coeffs[0] = c;
        let mut s = Self::from_coeffs(coeffs);
        s.degree_bound = Some(0);
        s
    }

    /// The series of `x`.
    pub fn variable(order: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(); order + 1];
        if order >= 1 {
            coeffs[1] = Scalar::one();
        }
        let mut s = Self::from_coeffs(coeffs);
        s.degree_bound = Some(1);
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn degree_bound(&self) -> Option<usize> {
        self.degree_bound
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Scalar {
        &self.coeffs[k]
    }

    pub fn constant_term(&self) -> &Scalar {
        &self.coeffs[0]
    }

    /// `f^(k)(0) = k! c_k`.
    pub fn derivative_at_zero(&self, k: usize) -> Scalar {
        self.coeffs[k].mul(&Scalar::factorial(k as u32))
    }

    pub fn derivatives_at_zero(&self) -> Vec<Scalar> {
        (0..=self.order()).map(|k| self.derivative_at_zero(k)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Keeps `c_0..=c_m`.
    pub fn truncate(&self, m: usize) -> PowerSeries {
        let m = m.min(self.order());
        let mut s = Self::from_coeffs(self.coeffs[..=m].to_vec());
        s.degree_bound = self.degree_bound;
        s
    }

    fn with_bound(mut self, bound: Option<usize>) -> Self {
        self.degree_bound = bound;
        self
    }

    fn check_order(&self, other: &PowerSeries) -> Result<(), SeriesError> {
        if self.order() != other.order() {
            Err(SeriesError::OrderMismatch {
                left: self.order(),
                right: other.order(),
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect();
        Ok(Self::from_coeffs(coeffs).with_bound(min_bound(
            self.degree_bound,
            other.degree_bound,
            |a, b| Some(a.max(b)),
        )))
    }

    pub fn sub(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect();
        Ok(Self::from_coeffs(coeffs).with_bound(min_bound(
            self.degree_bound,
            other.degree_bound,
            |a, b| Some(a.max(b)),
        )))
    }

    pub fn scale(&self, c: &Scalar) -> PowerSeries {
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect();
        Self::from_coeffs(coeffs).with_bound(self.degree_bound)
    }

    pub fn neg(&self) -> PowerSeries {
        let coeffs = self.coeffs.iter().map(Scalar::neg).collect();
        Self::from_coeffs(coeffs).with_bound(self.degree_bound)
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check_order(other)?;
        let n = self.order();
        let mut out = vec![Scalar::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        // Keep float-ness visible even when every product was skipped.
        let out = self.carry_backend(other, out);
        Ok(Self::from_coeffs(out).with_bound(min_bound(
            self.degree_bound,
            other.degree_bound,
            |a, b| a.checked_add(b),
        )))
    }

    /// Quotient `q` with `q * other = self` to the common order.
    pub fn div(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check_order(other)?;
        let b0 = other.constant_term();
        if b0.is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let n = self.order();
        let mut quot: Vec<Scalar> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[k].clone();
            for i in 1..=k {
                let b = &other.coeffs[i];
                if b.is_zero() || quot[k - i].is_zero() {
                    continue;
                }
                acc = acc.sub(&b.mul(&quot[k - i]));
            }
            quot.push(acc.div(b0)?);
        }
        let bound = match other.degree_bound {
            Some(0) => self.degree_bound,
            _ => None,
        };
        let quot = self.carry_backend(other, quot);
        Ok(Self::from_coeffs(quot).with_bound(bound))
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, exp: u32) -> PowerSeries {
        let mut result = PowerSeries::one(self.order());
        if !self.exact {
            result = result.scale(&Scalar::Float(Float::from_i64(1, self.float_bits())));
        }
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same order");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same order");
            }
        }
        result
    }

    fn float_bits(&self) -> usize {
        self.coeffs.iter().filter_map(Scalar::bits).max().unwrap_or(0)
    }

    /// If either operand is float, make sure the result is too.
    fn carry_backend(&self, other: &PowerSeries, mut out: Vec<Scalar>) -> Vec<Scalar> {
        if self.exact && other.exact {
            return out;
        }
        let bits = self.float_bits().max(other.float_bits());
        for c in out.iter_mut() {
            if c.is_exact() {
                *c = Scalar::Float(c.to_float(bits));
            }
        }
        out
    }

    fn derivative_coeff(&self, j: usize) -> Scalar {
        self.coeffs[j].mul_rational(&BigRational::from_integer(BigInt::from(j)))
    }
}

/// Textbook Maclaurin coefficients of a kernel to order `n`. All exact; the
/// `Erf` kernel omits the `2/sqrt(pi)` prefactor.
pub fn elementary_series(kernel: Kernel, n: usize) -> PowerSeries {
    let coeffs = (0..=n)
        .map(|k| {
            let kf = crate::numerics::factorial_bigint(k as u32);
            let inv_fact = BigRational::new(BigInt::one(), kf);
            let r = match kernel {
                Kernel::Exp => inv_fact,
                Kernel::Sinh => {
                    if k % 2 == 1 {
                        inv_fact
                    } else {
                        BigRational::zero()
                    }
                }
                Kernel::Cosh => {
                    if k % 2 == 0 {
                        inv_fact
                    } else {
                        BigRational::zero()
                    }
                }
                Kernel::Sin => {
                    if k % 2 == 1 {
                        if (k / 2) % 2 == 0 {
                            inv_fact
                        } else {
                            -inv_fact
                        }
                    } else {
                        BigRational::zero()
                    }
                }
                Kernel::Cos => {
                    if k % 2 == 0 {
                        if (k / 2) % 2 == 0 {
                            inv_fact
                        } else {
                            -inv_fact
                        }
                    } else {
                        BigRational::zero()
                    }
                }
                Kernel::Log1p => {
                    if k == 0 {
                        BigRational::zero()
                    } else if k % 2 == 1 {
                        q(1, k as i64)
                    } else {
                        q(-1, k as i64)
                    }
                }
                Kernel::Erf => {
                    // x^(2j+1) coefficient (-1)^j / (j! (2j+1)).
                    if k % 2 == 1 {
                        let j = (k - 1) / 2;
                        let denom = crate::numerics::factorial_bigint(j as u32) * BigInt::from(k);
                        let v = BigRational::new(BigInt::one(), denom);
                        if j % 2 == 0 {
                            v
                        } else {
                            -v
                        }
                    } else {
                        BigRational::zero()
                    }
                }
            };
            Scalar::Exact(r)
        })
        .collect();
    PowerSeries::from_coeffs(coeffs)
}

/// Outer function of a composition.
#[derive(Debug, Clone, Copy)]
pub enum Outer<'a> {
    Kernel(Kernel),
    Series(&'a PowerSeries),
}

/// `outer(inner)` truncated at `inner`'s order.
///
/// A series outer requires `inner` to vanish at 0. A kernel outer accepts a
/// nonzero constant term `g0` for the shift-supported kernels:
/// `exp(g) = e^g0 exp(g - g0)`, `sin(g) = sin(g0) cos(g - g0) + cos(g0) sin(g - g0)`
/// (likewise `cos`, `sinh`, `cosh`), and `log1p(g) = log(1 + g0) + log1p((g - g0)/(1 + g0))`.
/// `Erf` has no shift rule.
pub fn compose(
    outer: Outer<'_>,
    inner: &PowerSeries,
    precision: &PrecisionConfig,
) -> Result<PowerSeries, SeriesError> {
    match outer {
        Outer::Series(s) => compose_series(s, inner),
        Outer::Kernel(k) => apply_kernel(k, inner, precision),
    }
}

fn compose_series(outer: &PowerSeries, inner: &PowerSeries) -> Result<PowerSeries, SeriesError> {
    if !inner.constant_term().is_zero() {
        return Err(SeriesError::NonZeroInnerConstant);
    }
    let n = inner.order();
    // Horner: a_0 + g (a_1 + g (a_2 + ...)).
    let top = outer.order().min(n);
    let mut acc = PowerSeries::constant(outer.coeffs[top].clone(), n);
    for k in (0..top).rev() {
        acc = acc.mul(inner)?;
        acc.coeffs[0] = acc.coeffs[0].add(&outer.coeffs[k]);
        acc.exact = acc.coeffs.iter().all(Scalar::is_exact);
    }
    let bound = min_bound(outer.degree_bound, inner.degree_bound, |a, b| a.checked_mul(b));
    Ok(acc.with_bound(bound))
}

fn shift_parts(g: &PowerSeries) -> (Scalar, PowerSeries) {
    let g0 = g.constant_term().clone();
    let mut h = g.clone();
    h.coeffs[0] = g0.sub(&g0);
    h.exact = h.coeffs.iter().all(Scalar::is_exact);
    h.degree_bound = None;
    (g0, h)
}

/// Value of a kernel at a constant, exact at 0 and float otherwise.
fn kernel_at(f: Func, x: &Scalar, precision: &PrecisionConfig) -> Result<Scalar, NumericError> {
    if x.is_exact() && x.is_zero() {
        return Ok(match f {
            Func::Cos | Func::Cosh | Func::Exp => Scalar::one(),
            _ => Scalar::zero(),
        });
    }
    let bits = precision.float_bits.max(x.bits().unwrap_or(0));
    Ok(Scalar::Float(crate::numerics::constant::apply_float(f, &x.to_float(bits))?))
}

fn apply_kernel(
    kernel: Kernel,
    g: &PowerSeries,
    precision: &PrecisionConfig,
) -> Result<PowerSeries, SeriesError> {
    let (g0, h) = shift_parts(g);
    let shifted = !(g0.is_exact() && g0.is_zero());
    let out = match kernel {
        Kernel::Exp => {
            let e = exp_of(&h);
            if shifted {
                e.scale(&kernel_at(Func::Exp, &g0, precision)?)
            } else {
                e
            }
        }
        Kernel::Sin | Kernel::Cos => {
            let (s, c) = sin_cos_of(&h, -1);
            if !shifted {
                if kernel == Kernel::Sin {
                    s
                } else {
                    c
                }
            } else {
                let sg = kernel_at(Func::Sin, &g0, precision)?;
                let cg = kernel_at(Func::Cos, &g0, precision)?;
                if kernel == Kernel::Sin {
                    c.scale(&sg).add(&s.scale(&cg))?
                } else {
                    c.scale(&cg).sub(&s.scale(&sg))?
                }
            }
        }
        Kernel::Sinh | Kernel::Cosh => {
            let (s, c) = sin_cos_of(&h, 1);
            if !shifted {
                if kernel == Kernel::Sinh {
                    s
                } else {
                    c
                }
            } else {
                let sg = kernel_at(Func::Sinh, &g0, precision)?;
                let cg = kernel_at(Func::Cosh, &g0, precision)?;
                if kernel == Kernel::Sinh {
                    c.scale(&sg).add(&s.scale(&cg))?
                } else {
                    c.scale(&cg).add(&s.scale(&sg))?
                }
            }
        }
        Kernel::Log1p => {
            if !shifted {
                log1p_of(&h)
            } else {
                let a0 = Scalar::one().add(&g0);
                if a0.signum() <= 0 {
                    return Err(SeriesError::LogNonPositive);
                }
                let u = h.scale(&Scalar::one().div(&a0)?);
                let l = log1p_of(&u);
                let c = if a0.is_exact() && a0 == Scalar::one() {
                    Scalar::zero()
                } else {
                    kernel_at(Func::Log, &a0, precision)?
                };
                let mut l = l;
                l.coeffs[0] = l.coeffs[0].add(&c);
                PowerSeries::from_coeffs(l.coeffs)
            }
        }
        Kernel::Erf => {
            if !g0.is_zero() {
                return Err(SeriesError::UnsupportedShift(Kernel::Erf));
            }
            gauss_integral_of(&h)
        }
    };
    Ok(out)
}

/// `log(g)` for `g0 > 0`.
pub fn log_of(g: &PowerSeries, precision: &PrecisionConfig) -> Result<PowerSeries, SeriesError> {
    let g0 = g.constant_term();
    if g0.signum() <= 0 {
        return Err(SeriesError::LogNonPositive);
    }
    let shifted = g.sub(&PowerSeries::one(g.order()))?;
    apply_kernel(Kernel::Log1p, &shifted, precision)
}

/// exp(h) for h_0 = 0: E_k = (1/k) sum_{j=1..k} j h_j E_{k-j}.
fn exp_of(h: &PowerSeries) -> PowerSeries {
    let n = h.order();
    let dh: Vec<Scalar> = (0..=n).map(|j| h.derivative_coeff(j)).collect();
    let mut e: Vec<Scalar> = Vec::with_capacity(n + 1);
    e.push(Scalar::one());
    for k in 1..=n {
        let mut acc = Scalar::zero();
        for j in 1..=k {
            if dh[j].is_zero() || e[k - j].is_zero() {
                continue;
            }
            acc = acc.add(&dh[j].mul(&e[k - j]));
        }
        e.push(acc.mul_rational(&q(1, k as i64)));
    }
    let e = h.carry_backend(h, e);
    PowerSeries::from_coeffs(e)
}

/// (sin h, cos h) for `sign = -1`, (sinh h, cosh h) for `sign = 1`, with h_0 = 0.
fn sin_cos_of(h: &PowerSeries, sign: i64) -> (PowerSeries, PowerSeries) {
    let n = h.order();
    let dh: Vec<Scalar> = (0..=n).map(|j| h.derivative_coeff(j)).collect();
    let mut s: Vec<Scalar> = vec![Scalar::zero()];
    let mut c: Vec<Scalar> = vec![Scalar::one()];
    for k in 1..=n {
        let mut sa = Scalar::zero();
        let mut ca = Scalar::zero();
        for j in 1..=k {
            if dh[j].is_zero() {
                continue;
            }
            if !c[k - j].is_zero() {
                sa = sa.add(&dh[j].mul(&c[k - j]));
            }
            if !s[k - j].is_zero() {
                ca = ca.add(&dh[j].mul(&s[k - j]));
            }
        }
        s.push(sa.mul_rational(&q(1, k as i64)));
        c.push(ca.mul_rational(&q(sign, k as i64)));
    }
    (
        PowerSeries::from_coeffs(h.carry_backend(h, s)),
        PowerSeries::from_coeffs(h.carry_backend(h, c)),
    )
}

/// log(1 + u) for u_0 = 0: L_k = u_k - (1/k) sum_{j=1..k-1} j L_j u_{k-j}.
#[allow(clippy::needless_range_loop)]
fn log1p_of(u: &PowerSeries) -> PowerSeries {
    let n = u.order();
    let mut l: Vec<Scalar> = vec![Scalar::zero()];
    for k in 1..=n {
        let mut acc = Scalar::zero();
        for j in 1..k {
            if l[j].is_zero() || u.coeffs[k - j].is_zero() {
                continue;
            }
            acc = acc.add(&l[j].mul_rational(&q(j as i64, 1)).mul(&u.coeffs[k - j]));
        }
        l.push(u.coeffs[k].sub(&acc.mul_rational(&q(1, k as i64))));
    }
    PowerSeries::from_coeffs(u.carry_backend(u, l))
}

/// Integral of exp(-t^2) from 0 to h, for h_0 = 0: G' = h' exp(-h^2).
#[allow(clippy::needless_range_loop)]
fn gauss_integral_of(h: &PowerSeries) -> PowerSeries {
    let n = h.order();
    let h2 = h.mul(h).expect("same order").neg();
    let w = exp_of(&h2);
    let mut g = vec![Scalar::zero(); n + 1];
    for k in 1..=n {
        // coefficient of x^(k-1) in h' w
        let mut acc = Scalar::zero();
        for i in 0..k {
            let dh = h.derivative_coeff(i + 1);
            if dh.is_zero() || w.coeffs[k - 1 - i].is_zero() {
                continue;
            }
            acc = acc.add(&dh.mul(&w.coeffs[k - 1 - i]));
        }
        g[k] = acc.mul_rational(&q(1, k as i64));
    }
    PowerSeries::from_coeffs(h.carry_backend(h, g))
}

/// Maclaurin series of `e` to order `order`.
///
/// Errors name the offending subtree. The failure conditions depend only on
/// constant terms, which are computed identically at every order.
pub fn maclaurin(
    e: &Expr,
    order: usize,
    precision: &PrecisionConfig,
) -> Result<PowerSeries, ValidationError> {
    let mut s = expand(e, order, precision)?;
    if let Some(d) = e.polynomial_degree() {
        s.degree_bound = Some(d);
    }
    Ok(s)
}

fn arithmetic(e: &Expr, err: SeriesError) -> ValidationError {
    let rule = match err {
        SeriesError::ZeroConstantTerm | SeriesError::Numeric(NumericError::DivisionByZero) => {
            ValidationRule::ZeroDivisorConstant
        }
        SeriesError::LogNonPositive => ValidationRule::LogConstantNotPositive,
        SeriesError::UnsupportedShift(_) => ValidationRule::ErfConstantNotZero,
        other => unreachable!("series engine error {other} at {e}"),
    };
    ValidationError::new(e, rule)
}

fn expand(e: &Expr, n: usize, precision: &PrecisionConfig) -> Result<PowerSeries, ValidationError> {
    let bits = precision.float_bits;
    Ok(match e {
        Expr::Literal(r) => PowerSeries::constant(Scalar::Exact(r.clone()), n),
        Expr::Pi => PowerSeries::constant(Scalar::Float(Float::pi(bits)), n),
        Expr::E => PowerSeries::constant(Scalar::Float(Float::e(bits)), n),
        Expr::Var => PowerSeries::variable(n),
        Expr::Neg(a) => expand(a, n, precision)?.neg(),
        Expr::Add(a, b) => expand(a, n, precision)?
            .add(&expand(b, n, precision)?)
            .expect("same order"),
        Expr::Sub(a, b) => expand(a, n, precision)?
            .sub(&expand(b, n, precision)?)
            .expect("same order"),
        Expr::Mul(a, b) => expand(a, n, precision)?
            .mul(&expand(b, n, precision)?)
            .expect("same order"),
        Expr::Div(a, b) => expand(a, n, precision)?
            .div(&expand(b, n, precision)?)
            .map_err(|err| arithmetic(e, err))?,
        Expr::Pow(a, k) => expand(a, n, precision)?.pow(*k),
        Expr::Apply(f, a) => {
            if *f == Func::Sqrt {
                if a.contains_var() {
                    return Err(ValidationError::new(e, ValidationRule::SqrtArgumentNotConstant));
                }
                let v = eval_constant(a, precision)
                    .map_err(|_| ValidationError::new(e, ValidationRule::SqrtArgumentNotPositive))?;
                if v.signum() <= 0 {
                    return Err(ValidationError::new(e, ValidationRule::SqrtArgumentNotPositive));
                }
                let bits = bits.max(v.bits().unwrap_or(0));
                let root = v.to_float(bits).sqrt().expect("positive");
                return Ok(PowerSeries::constant(Scalar::Float(root), n));
            }
            let g = expand(a, n, precision)?;
            let result = match f {
                Func::Exp => apply_kernel(Kernel::Exp, &g, precision),
                Func::Sin => apply_kernel(Kernel::Sin, &g, precision),
                Func::Cos => apply_kernel(Kernel::Cos, &g, precision),
                Func::Sinh => apply_kernel(Kernel::Sinh, &g, precision),
                Func::Cosh => apply_kernel(Kernel::Cosh, &g, precision),
                Func::Log => log_of(&g, precision),
                Func::Erf => apply_kernel(Kernel::Erf, &g, precision).map(|s| {
                    let two = Float::from_i64(2, bits);
                    let prefactor = two.div(&Float::pi(bits).sqrt().expect("pi > 0"), bits);
                    s.scale(&Scalar::Float(prefactor))
                }),
                Func::Sqrt => unreachable!(),
            };
            result.map_err(|err| arithmetic(e, err))?
        }
    })
}
