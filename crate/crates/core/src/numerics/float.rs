use std::cell::RefCell;
use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::NumericError;

const RM: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: usize = Word::BITS as usize;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// A binary big float tagged with its nominal precision.
///
/// The underlying library rounds precisions up to whole machine words; `bits`
/// records the precision that was asked for and is what propagates through
/// mixed arithmetic.
#[derive(Debug, Clone)]
pub struct Float {
    value: BigFloat,
    bits: usize,
}

impl Float {
    pub fn new(value: BigFloat, bits: usize) -> Self {
        Self { value, bits }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn value(&self) -> &BigFloat {
        &self.value
    }

    pub fn with_bits(&self, bits: usize) -> Float {
        if bits == self.bits {
            return self.clone();
        }
        let mut v = self.value.clone();
        v.set_precision(bits, RM).expect("precision change");
        Float::new(v, bits)
    }

    pub fn from_i64(n: i64, bits: usize) -> Float {
        Float::new(BigFloat::from_i64(n, bits), bits)
    }

    /// `n` as a float holding every bit of `n`.
    fn exact_bigint(n: &BigInt) -> BigFloat {
        if n.is_zero() {
            return BigFloat::new(WORD_BITS);
        }
        let words: Vec<Word> = n.magnitude().iter_u64_digits().map(|d| d as Word).collect();
        let sign = if n.is_negative() { Sign::Neg } else { Sign::Pos };
        // Integer mantissa words with the binary point after the last word.
        let exponent = (words.len() * WORD_BITS) as i32;
        BigFloat::from_words(&words, sign, exponent)
    }

    pub fn from_bigint(n: &BigInt, bits: usize) -> Float {
        let mut v = Self::exact_bigint(n);
        v.set_precision(bits, RM).expect("precision change");
        Float::new(v, bits)
    }

    pub fn from_rational(r: &BigRational, bits: usize) -> Float {
        if r.denom().is_one() {
            return Float::from_bigint(r.numer(), bits);
        }
        let n = Self::exact_bigint(r.numer());
        let d = Self::exact_bigint(r.denom());
        Float::new(n.div(&d, bits, RM), bits)
    }

    /// Exact rational value of the binary float.
    pub fn to_rational(&self) -> BigRational {
        let Some((words, _, sign, exponent, _)) = self.value.as_raw_parts() else {
            panic!("non-finite float {}", self.value)
        };
        let digits: Vec<u64> = words.to_vec();
        let mantissa = BigInt::from(BigUint::from_slice(&u64s_to_u32s(&digits)));
        if mantissa.is_zero() {
            return BigRational::zero();
        }
        let mantissa = if sign == Sign::Neg { -mantissa } else { mantissa };
        let shift = exponent as i64 - (words.len() * WORD_BITS) as i64;
        if shift >= 0 {
            BigRational::from_integer(mantissa << shift as usize)
        } else {
            BigRational::new(mantissa, BigInt::one() << (-shift) as usize)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn signum(&self) -> i32 {
        if self.value.is_zero() {
            0
        } else if self.value.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn add(&self, other: &Float, bits: usize) -> Float {
        Float::new(self.value.add(&other.value, bits, RM), bits)
    }

    pub fn sub(&self, other: &Float, bits: usize) -> Float {
        Float::new(self.value.sub(&other.value, bits, RM), bits)
    }

    pub fn mul(&self, other: &Float, bits: usize) -> Float {
        Float::new(self.value.mul(&other.value, bits, RM), bits)
    }

    pub fn div(&self, other: &Float, bits: usize) -> Float {
        Float::new(self.value.div(&other.value, bits, RM), bits)
    }

    pub fn neg(&self) -> Float {
        Float::new(self.value.neg(), self.bits)
    }

    pub fn abs(&self) -> Float {
        Float::new(self.value.abs(), self.bits)
    }

    pub fn compare(&self, other: &Float) -> Ordering {
        match self.value.cmp(&other.value) {
            Some(c) if c < 0 => Ordering::Less,
            Some(0) => Ordering::Equal,
            Some(_) => Ordering::Greater,
            None => panic!("comparison with NaN"),
        }
    }

    pub fn log2_abs(&self) -> Option<f64> {
        if self.value.is_zero() {
            return None;
        }
        let (words, _, _, exponent, _) = self.value.as_raw_parts()?;
        let top = *words.last()?;
        // Mantissa is normalized: top word holds the leading bit.
        Some(exponent as f64 + (top as f64 / 2f64.powi(64)).log2())
    }

    pub fn pi(bits: usize) -> Float {
        Float::new(with_consts(|cc| cc.pi(bits, RM)), bits)
    }

    pub fn e(bits: usize) -> Float {
        Float::new(with_consts(|cc| cc.e(bits, RM)), bits)
    }

    pub fn exp(&self) -> Float {
        let b = self.bits;
        Float::new(with_consts(|cc| self.value.exp(b, RM, cc)), b)
    }

    pub fn sin(&self) -> Float {
        let b = self.bits;
        Float::new(with_consts(|cc| self.value.sin(b, RM, cc)), b)
    }

    pub fn cos(&self) -> Float {
        let b = self.bits;
        Float::new(with_consts(|cc| self.value.cos(b, RM, cc)), b)
    }

    pub fn sinh(&self) -> Float {
        let b = self.bits;
        Float::new(with_consts(|cc| self.value.sinh(b, RM, cc)), b)
    }

    pub fn cosh(&self) -> Float {
        let b = self.bits;
        Float::new(with_consts(|cc| self.value.cosh(b, RM, cc)), b)
    }

    pub fn ln(&self) -> Result<Float, NumericError> {
        if self.signum() <= 0 {
            return Err(NumericError::Domain {
                function: "log",
                argument: self.describe(),
            });
        }
        let b = self.bits;
        Ok(Float::new(with_consts(|cc| self.value.ln(b, RM, cc)), b))
    }

    pub fn sqrt(&self) -> Result<Float, NumericError> {
        if self.signum() < 0 {
            return Err(NumericError::Domain {
                function: "sqrt",
                argument: self.describe(),
            });
        }
        Ok(Float::new(self.value.sqrt(self.bits, RM), self.bits))
    }

    /// Error function.
    ///
    /// Uses `erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (2n+1)!!`,
    /// whose terms are all of one sign, evaluated with 64 guard bits. Beyond
    /// the point where `erfc(|x|)` is below half an ulp the result is `+-1`.
    pub fn erf(&self) -> Float {
        let bits = self.bits;
        if self.is_zero() {
            return Float::from_i64(0, bits);
        }
        let negative = self.signum() < 0;
        let wp = bits + 64;
        let x = self.abs().with_bits(wp);
        let x2 = x.mul(&x, wp);
        // erfc(x) < exp(-x^2) for x > 0.6; saturate when that is below 2^-(bits+2).
        let saturation = (bits as f64 + 2.0) * std::f64::consts::LN_2;
        if x2.log2_abs().map(f64::exp2).unwrap_or(0.0) > saturation {
            let one = Float::from_i64(1, bits);
            return if negative { one.neg() } else { one };
        }
        let two_x2 = x2.add(&x2, wp);
        let mut term = x.clone();
        let mut sum = x.clone();
        let mut n: i64 = 1;
        loop {
            term = term
                .mul(&two_x2, wp)
                .div(&Float::from_i64(2 * n + 1, wp), wp);
            sum = sum.add(&term, wp);
            let (Some(lt), Some(ls)) = (term.log2_abs(), sum.log2_abs()) else {
                break;
            };
            if lt < ls - wp as f64 {
                break;
            }
            n += 1;
        }
        let gauss = x2.neg().exp();
        let prefactor = Float::from_i64(2, wp).div(&Float::pi(wp).sqrt().expect("pi > 0"), wp);
        let r = sum.mul(&gauss, wp).mul(&prefactor, wp).with_bits(bits);
        if negative {
            r.neg()
        } else {
            r
        }
    }

    fn describe(&self) -> String {
        super::render_decimal_rational(&self.to_rational(), 20)
    }
}

fn u64s_to_u32s(digits: &[u64]) -> Vec<u32> {
    digits
        .iter()
        .flat_map(|d| [(*d & 0xffff_ffff) as u32, (*d >> 32) as u32])
        .collect()
}
