use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Renders `r` as a plain positional decimal with `digits` significant digits,
/// rounding half to even. Trailing fractional zeros are dropped; no exponent
/// notation is ever used.
pub fn render_decimal_rational(r: &BigRational, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit");
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let (n, d) = round_significant(&r.abs(), digits);

    let mut s = n.to_string();
    debug_assert_eq!(s.len(), digits);
    // Value is 0.s * 10^(d+1).
    let point = d + 1;
    let (int_part, frac_part) = if point <= 0 {
        ("0".to_string(), format!("{}{}", "0".repeat((-point) as usize), s))
    } else if point as usize >= s.len() {
        s.push_str(&"0".repeat(point as usize - s.len()));
        (s, String::new())
    } else {
        let frac = s.split_off(point as usize);
        (s, frac)
    };
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// For `a > 0`, returns `(n, d)` with `10^(digits-1) <= n < 10^digits` and
/// `a ~ n * 10^(d + 1 - digits)`, rounded half to even.
fn round_significant(a: &BigRational, digits: usize) -> (BigInt, i64) {
    let ten = BigInt::from(10);
    // d = floor(log10(a)), found from a bit-length estimate then corrected.
    let est = ((super::log2_bigint(a.numer()) - super::log2_bigint(a.denom()))
        * std::f64::consts::LOG10_2)
        .floor() as i64;
    let mut d = est;
    while &pow10(d) > a {
        d -= 1;
    }
    while &pow10(d + 1) <= a {
        d += 1;
    }

    // n = round_half_even(a * 10^(digits-1-d))
    let scaled = a * pow10(digits as i64 - 1 - d);
    let (q, rem): (BigInt, BigInt) = scaled.numer().div_rem(scaled.denom());
    let twice: BigInt = &rem * 2;
    let mut n = match twice.cmp(scaled.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    };
    if n == ten.pow(digits as u32) {
        n /= &ten;
        d += 1;
    }
    (n, d)
}

/// Renders `r` as `m.mmme-x` with `digits` significant digits, trailing
/// zeros of the mantissa dropped.
pub fn render_scientific_rational(r: &BigRational, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit");
    if r.is_zero() {
        return "0".to_string();
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let (n, d) = round_significant(&r.abs(), digits);
    let s = n.to_string();
    let frac = s[1..].trim_end_matches('0');
    let mantissa = if frac.is_empty() {
        s[..1].to_string()
    } else {
        format!("{}.{}", &s[..1], frac)
    };
    format!("{sign}{mantissa}e{d}")
}

fn pow10(e: i64) -> BigRational {
    let p = BigInt::from(10).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Parses an optionally signed plain decimal (`-12.5`, `0.001`, `7`) into an
/// exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if body.contains('.') && (frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit())) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let value = BigRational::new(digits, BigInt::from(10).pow(frac_part.len() as u32));
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(render_scientific_rational(&r(1, 8), 3), "1.25e-1");
        assert_eq!(render_scientific_rational(&r(-1, 3), 2), "-3.3e-1");
        assert_eq!(render_scientific_rational(&r(1000, 1), 4), "1e3");
        assert_eq!(render_scientific_rational(&r(999, 1000), 2), "1e0");
        assert_eq!(render_scientific_rational(&r(0, 1), 2), "0");
    }
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn basic_rendering() {
        assert_eq!(render_decimal_rational(&q(1, 4), 30), "0.25");
        assert_eq!(render_decimal_rational(&q(-1, 3), 5), "-0.33333");
        assert_eq!(render_decimal_rational(&q(2, 3), 5), "0.66667");
        assert_eq!(render_decimal_rational(&q(120, 1), 30), "120");
        assert_eq!(render_decimal_rational(&q(123456, 1), 3), "123000");
        assert_eq!(render_decimal_rational(&q(1, 1000), 2), "0.001");
        assert_eq!(render_decimal_rational(&q(0, 1), 2), "0");
    }

    #[test]
    fn round_half_even() {
        assert_eq!(render_decimal_rational(&q(125, 1000), 2), "0.12");
        assert_eq!(render_decimal_rational(&q(135, 1000), 2), "0.14");
        assert_eq!(render_decimal_rational(&q(-25, 10), 1), "-2");
        assert_eq!(render_decimal_rational(&q(999, 1000), 2), "1");
        assert_eq!(render_decimal_rational(&q(995, 10), 2), "100");
    }

    #[test]
    fn parse_decimal_forms() {
        assert_eq!(parse_decimal("0.5"), Some(q(1, 2)));
        assert_eq!(parse_decimal("-12.25"), Some(q(-49, 4)));
        assert_eq!(parse_decimal("7"), Some(q(7, 1)));
        assert_eq!(parse_decimal("1."), None);
        assert_eq!(parse_decimal(".5"), None);
        assert_eq!(parse_decimal("1e5"), None);
    }

    proptest! {
        #[test]
        fn render_then_parse_is_close(n in -10_000_000i64..10_000_000, d in 1i64..1_000_000, digits in 1usize..40) {
            prop_assume!(n != 0);
            let r = q(n, d);
            let back = parse_decimal(&render_decimal_rational(&r, digits)).unwrap();
            let rel = ((back - &r) / &r).abs();
            let bound = BigRational::new(BigInt::one(), BigInt::from(10).pow(digits as u32 - 1));
            prop_assert!(rel <= bound);
        }
    }
}
