//! Binomial coefficients, Bernoulli numbers and `zeta(-p)`.

use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Zero};

/// `m! / (l! (m - l)!)`, or 0 when `l` is outside `0..=m`.
pub fn binomial(m: u64, l: i64) -> BigInt {
    if l < 0 || l as u64 > m {
        return BigInt::zero();
    }
    let l = (l as u64).min(m - l as u64);
    let mut acc = BigInt::one();
    for i in 0..l {
        acc = acc * BigInt::from(m - i) / BigInt::from(i + 1);
    }
    acc
}

/// Grow-only memo of `B_0, B_1, ...` with `B_1 = -1/2`.
///
/// Each `B_n` comes from `sum_{p=0}^{n} C(n+1, p) B_p = 0`.
#[derive(Debug)]
pub struct BernoulliTable {
    values: RwLock<Vec<BigRational>>,
}

impl Default for BernoulliTable {
    fn default() -> Self {
        Self::new()
    }
}

impl BernoulliTable {
    pub fn new() -> Self {
        Self {
            values: RwLock::new(vec![BigRational::one()]),
        }
    }

    pub fn len(&self) -> usize {
        self.values.read().expect("bernoulli table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, p: usize) -> BigRational {
        {
            let values = self.values.read().expect("bernoulli table poisoned");
            if let Some(b) = values.get(p) {
                return b.clone();
            }
        }
        let mut values = self.values.write().expect("bernoulli table poisoned");
        while values.len() <= p {
            let n = values.len();
            if n >= 3 && n % 2 == 1 {
                values.push(BigRational::zero());
                continue;
            }
            // C(n+1, j) built along the row.
            let mut c = BigInt::one();
            let mut parts = Vec::with_capacity(n);
            for (j, b) in values.iter().enumerate() {
                if !b.is_zero() {
                    parts.push((c.clone(), b));
                }
                c = c * BigInt::from(n + 1 - j) / BigInt::from(j + 1);
            }
            let sum = linear_combination(parts);
            values.push(-sum / BigRational::from_integer(BigInt::from(n + 1)));
        }
        values[p].clone()
    }
}

/// `sum a_i r_i` over a common denominator, reduced once at the end.
///
/// Bernoulli denominators are small (products of distinct primes), so this
/// avoids a gcd of large numerators at every addition.
fn linear_combination(parts: Vec<(BigInt, &BigRational)>) -> BigRational {
    let l = parts
        .iter()
        .fold(BigInt::one(), |l, (_, r)| l.lcm(r.denom()));
    let num = parts
        .into_iter()
        .fold(BigInt::zero(), |acc, (a, r)| acc + a * r.numer() * (&l / r.denom()));
    BigRational::new(num, l)
}

static TABLE: LazyLock<BernoulliTable> = LazyLock::new(BernoulliTable::new);

pub fn bernoulli(p: usize) -> BigRational {
    TABLE.get(p)
}

/// Grow-only table where entry `n` is computed from entries `0..n`.
struct Memo {
    values: RwLock<Vec<BigRational>>,
    next: fn(&[BigRational]) -> BigRational,
}

impl Memo {
    const fn new(next: fn(&[BigRational]) -> BigRational) -> Self {
        Self {
            values: RwLock::new(Vec::new()),
            next,
        }
    }

    fn ensure(&self, n: usize) {
        if self.values.read().expect("memo poisoned").len() > n {
            return;
        }
        let mut values = self.values.write().expect("memo poisoned");
        while values.len() <= n {
            let v = (self.next)(&values);
            values.push(v);
        }
    }

    fn get(&self, n: usize) -> BigRational {
        self.ensure(n);
        self.values.read().expect("memo poisoned")[n].clone()
    }
}

static ZETAS: Memo = Memo::new(|prev| {
    let p = prev.len();
    let b = bernoulli(p + 1) / BigRational::from_integer(BigInt::from(p + 1));
    if p % 2 == 0 {
        b
    } else {
        -b
    }
});

/// `zeta(-p) = (-1)^p B_{p+1} / (p+1)`.
pub fn zeta_nonpositive(p: usize) -> BigRational {
    ZETAS.get(p)
}

static WEIGHTS: Memo = Memo::new(|prev| {
    let n = prev.len();
    ZETAS.ensure(n);
    let zetas = ZETAS.values.read().expect("memo poisoned");
    let mut c = BigInt::one();
    let mut parts = Vec::with_capacity(n / 2 + 2);
    for (p, z) in zetas[..=n].iter().enumerate() {
        if !z.is_zero() {
            let signed = if (n - p) % 2 == 0 { c.clone() } else { -c.clone() };
            parts.push((signed, z));
        }
        c = c * BigInt::from(n + 1 - p) / BigInt::from(p + 1);
    }
    linear_combination(parts)
});

/// `sum_{p=0}^{k} C(k+1, p) (-1)^(k-p) zeta(-p)`, memoized.
///
/// This is the weight that multiplies `f^(k)(0)/(k+1)!` on the Bernoulli path.
pub fn zeta_weight(k: usize) -> BigRational {
    WEIGHTS.get(k)
}

/// Outcome of checking an identity over a range of indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub range: String,
    pub cases: usize,
    /// Index tuples where the identity failed.
    pub failures: Vec<Vec<u64>>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `C(k+1, p) = (p+1)/(k+2) * C(k+2, p+1)` for `0 <= p <= k <= k_max`.
pub fn check_binomial_shift(k_max: u64) -> IdentityCheck {
    let mut cases = 0;
    let mut failures = Vec::new();
    for k in 0..=k_max {
        for p in 0..=k {
            cases += 1;
            let lhs = BigRational::from_integer(binomial(k + 1, p as i64));
            let rhs = BigRational::new(BigInt::from(p + 1), BigInt::from(k + 2))
                * BigRational::from_integer(binomial(k + 2, p as i64 + 1));
            if lhs != rhs {
                failures.push(vec![k, p]);
            }
        }
    }
    IdentityCheck {
        name: "binomial-shift",
        range: format!("0 <= p <= k <= {k_max}"),
        cases,
        failures,
    }
}

/// `sum_{p=0}^{m-1} C(m, p) B_p = 0` for `2 <= m <= m_max`.
pub fn check_bernoulli_sum(m_max: u64) -> IdentityCheck {
    let mut failures = Vec::new();
    for m in 2..=m_max {
        let s = (0..m).fold(BigRational::zero(), |acc, p| {
            acc + BigRational::from_integer(binomial(m, p as i64)) * bernoulli(p as usize)
        });
        if !s.is_zero() {
            failures.push(vec![m]);
        }
    }
    IdentityCheck {
        name: "bernoulli-sum",
        range: format!("2 <= m <= {m_max}"),
        cases: m_max.saturating_sub(1) as usize,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6.into());
        assert_eq!(binomial(0, 0), 1.into());
        assert_eq!(binomial(37, 0), 1.into());
        assert_eq!(binomial(5, 7), 0.into());
        assert_eq!(binomial(5, -1), 0.into());
        assert_eq!(binomial(60, 30), "118264581564861424".parse::<BigInt>().unwrap());
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), q(1, 1));
        assert_eq!(bernoulli(1), q(-1, 2));
        assert_eq!(bernoulli(2), q(1, 6));
        assert_eq!(bernoulli(3), q(0, 1));
        assert_eq!(bernoulli(12), q(-691, 2730));
        assert_eq!(bernoulli(20), q(-174611, 330));
    }

    /// von Staudt-Clausen: B_2n + sum over primes p with (p-1) | 2n of 1/p is an integer.
    #[test]
    fn von_staudt_clausen() {
        let is_prime = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 1..=40u64 {
            let mut v = bernoulli(2 * n as usize);
            for p in (2..=2 * n + 1).filter(|&p| is_prime(p) && (2 * n) % (p - 1) == 0) {
                v += q(1, p as i64);
            }
            assert!(v.is_integer(), "n={n}");
        }
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta_nonpositive(0), q(-1, 2));
        assert_eq!(zeta_nonpositive(1), q(-1, 12));
        assert_eq!(zeta_nonpositive(2), q(0, 1));
        assert_eq!(zeta_nonpositive(3), q(1, 120));
        for n in 1..=25 {
            assert!(zeta_nonpositive(2 * n).is_zero());
        }
    }

    #[test]
    fn weight_by_hand() {
        // k = 2: C(3,0) zeta(0) - C(3,1) zeta(-1) + C(3,2) zeta(-2) = -1/2 + 1/4 + 0
        assert_eq!(zeta_weight(2), q(-1, 4));
        assert_eq!(zeta_weight(0), q(-1, 2));
    }

    #[test]
    fn recurrence_holds() {
        for m in 2..=60u64 {
            let s: BigRational = (0..m)
                .map(|p| BigRational::from_integer(binomial(m, p as i64)) * bernoulli(p as usize))
                .sum();
            assert!(s.is_zero(), "m={m}");
        }
    }

    #[test]
    fn identity_suites() {
        let a = check_binomial_shift(50);
        assert!(a.passed());
        assert_eq!(a.cases, 51 * 52 / 2);
        let b = check_bernoulli_sum(60);
        assert!(b.passed());
        assert_eq!(b.cases, 59);
    }

    #[test]
    fn concurrent_readers_agree() {
        let table = BernoulliTable::new();
        let results: Vec<Vec<BigRational>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..8)
                .map(|t| {
                    let table = &table;
                    s.spawn(move || (0..50).map(|i| table.get((i * 7 + t * 3) % 50)).collect())
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (t, r) in results.iter().enumerate() {
            for (i, b) in r.iter().enumerate() {
                assert_eq!(b, &bernoulli((i * 7 + t * 3) % 50));
            }
        }
    }

    proptest! {
        #[test]
        fn pascal(m in 1u64..=100, l in -2i64..=102) {
            prop_assert_eq!(binomial(m, l), binomial(m - 1, l - 1) + binomial(m - 1, l));
        }
    }
}
