//! Scalar arithmetic over two backends: exact rationals and big floats.
//!
//! Every quantity in the pipeline (series coefficients, factorials, Bernoulli
//! numbers, partial sums, tail bounds) is a [`Scalar`]. Exact values stay
//! exact until they meet a float, at which point the result is a float at the
//! larger of the two precisions. Nothing ever turns a float back into an
//! exact value.

pub(crate) mod constant;
mod float;
mod render;

use std::cmp::Ordering;
use std::fmt;

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use constant::eval_constant;
pub use float::Float;
pub use render::{parse_decimal, render_decimal_rational, render_scientific_rational};

/// Default working precision of the float backend, in bits.
pub const DEFAULT_FLOAT_BITS: usize = 128;
/// Default number of significant decimal digits used when rendering.
pub const DEFAULT_RENDER_DIGITS: usize = 30;
/// Smallest accepted float precision.
pub const MIN_FLOAT_BITS: usize = 53;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{function} is undefined at {argument}")]
    Domain {
        function: &'static str,
        argument: String,
    },
    #[error("expression is not constant (contains x)")]
    NotConstant,
    #[error("invalid precision: {0}")]
    InvalidPrecision(String),
}

/// Precision settings shared by every stage that touches floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionConfig {
    pub float_bits: usize,
    pub render_digits: usize,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self {
            float_bits: DEFAULT_FLOAT_BITS,
            render_digits: DEFAULT_RENDER_DIGITS,
        }
    }
}

impl PrecisionConfig {
    pub fn new(float_bits: usize, render_digits: usize) -> Result<Self, NumericError> {
        if float_bits < MIN_FLOAT_BITS {
            return Err(NumericError::InvalidPrecision(format!(
                "float_bits must be at least {MIN_FLOAT_BITS}, got {float_bits}"
            )));
        }
        if render_digits == 0 {
            return Err(NumericError::InvalidPrecision(
                "render_digits must be at least 1".into(),
            ));
        }
        Ok(Self {
            float_bits,
            render_digits,
        })
    }
}

/// A number in one of the two backends.
#[derive(Debug, Clone)]
pub enum Scalar {
    /// Reduced rational with positive denominator (guaranteed by `BigRational`).
    Exact(BigRational),
    Float(Float),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar::Exact(BigRational::from_integer(n))
    }

    /// `num/den` as an exact value. Panics if `den` is zero.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_float(value: BigFloat, bits: usize) -> Self {
        Scalar::Float(Float::new(value, bits))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => f.is_zero(),
        }
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Exact(r) => {
                if r.is_zero() {
                    0
                } else if r.is_negative() {
                    -1
                } else {
                    1
                }
            }
            Scalar::Float(f) => f.signum(),
        }
    }

    /// Precision in bits for floats, `None` for exact values.
    pub fn bits(&self) -> Option<usize> {
        match self {
            Scalar::Exact(_) => None,
            Scalar::Float(f) => Some(f.bits()),
        }
    }

    /// Converts to the float backend at `bits`, rounding to nearest.
    pub fn to_float(&self, bits: usize) -> Float {
        match self {
            Scalar::Exact(r) => Float::from_rational(r, bits),
            Scalar::Float(f) => f.with_bits(bits),
        }
    }

    /// The exact rational value of this scalar. Floats are binary fractions, so
    /// this conversion is lossless.
    pub fn to_rational(&self) -> BigRational {
        match self {
            Scalar::Exact(r) => r.clone(),
            Scalar::Float(f) => f.to_rational(),
        }
    }

    fn promote(a: &Scalar, b: &Scalar) -> Option<(Float, Float, usize)> {
        let bits = match (a.bits(), b.bits()) {
            (None, None) => return None,
            (Some(x), None) | (None, Some(x)) => x,
            (Some(x), Some(y)) => x.max(y),
        };
        Some((a.to_float(bits), b.to_float(bits), bits))
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => {
                let (a, b, bits) = Self::promote(self, other).expect("float operand");
                Scalar::Float(a.add(&b, bits))
            }
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => {
                let (a, b, bits) = Self::promote(self, other).expect("float operand");
                Scalar::Float(a.sub(&b, bits))
            }
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => {
                let (a, b, bits) = Self::promote(self, other).expect("float operand");
                Scalar::Float(a.mul(&b, bits))
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, NumericError> {
        if other.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a / b),
            _ => {
                let (a, b, bits) = Self::promote(self, other).expect("float operand");
                Scalar::Float(a.div(&b, bits))
            }
        })
    }

    /// Multiplication by an exact rational, the common case in the series
    /// recurrences.
    pub fn mul_rational(&self, r: &BigRational) -> Scalar {
        self.mul(&Scalar::Exact(r.clone()))
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(f.neg()),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        }
    }

    pub fn pow_int(&self, exp: u32) -> Scalar {
        let mut result = match self {
            Scalar::Exact(_) => Scalar::one(),
            Scalar::Float(f) => Scalar::Float(Float::from_rational(&BigRational::one(), f.bits())),
        };
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn factorial(n: u32) -> Scalar {
        Scalar::from_bigint(factorial_bigint(n))
    }

    /// Total order. Mixed comparisons are carried out at the float operand's
    /// precision.
    pub fn compare(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b, _) = Self::promote(self, other).expect("float operand");
                a.compare(&b)
            }
        }
    }

    /// `log2(|self|)` as an `f64`, valid far outside the `f64` exponent range.
    /// `None` for zero.
    pub fn log2_abs(&self) -> Option<f64> {
        match self {
            Scalar::Exact(r) => {
                if r.is_zero() {
                    None
                } else {
                    Some(log2_bigint(r.numer()) - log2_bigint(r.denom()))
                }
            }
            Scalar::Float(f) => f.log2_abs(),
        }
    }

    /// Nearest `f64`; saturates to 0 or infinity outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        match self.log2_abs() {
            None => 0.0,
            Some(l) => (self.signum() as f64) * l.exp2(),
        }
    }

    /// Decimal rendering at `digits` significant digits, round-half-even.
    pub fn render_decimal(&self, digits: usize) -> String {
        render_decimal_rational(&self.to_rational(), digits)
    }

    /// Exact values as `p/q` (or `p`), floats as decimals at `digits`.
    pub fn render(&self, digits: usize) -> String {
        match self {
            Scalar::Exact(r) => render_exact(r),
            Scalar::Float(_) => self.render_decimal(digits),
        }
    }
}

impl PartialEq for Scalar {
    /// Exact values compare by value. Floats compare equal to anything with the
    /// same numeric value at the float's precision.
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(DEFAULT_RENDER_DIGITS))
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

pub fn render_exact(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn factorial_bigint(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub(crate) fn log2_bigint(n: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    let n = n.abs();
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().expect("fits in f64").log2()
    } else {
        let shift = bits - 64;
        let top: BigInt = &n >> shift;
        top.to_f64().expect("fits in f64").log2() + shift as f64
    }
}
