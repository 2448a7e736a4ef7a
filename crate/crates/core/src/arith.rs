//! Exact integer primitives: modular exponentiation, deterministic primality,
//! factorization, modular inverses and the Chinese remainder theorem.
//!
//! Everything works on 128-bit machine integers with checked arithmetic.
//! Moduli are limited to 127 bits so that a sum of two residues never
//! overflows `u128`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible modulus: `2^127 - 1`.
pub const MAX_MODULUS: u128 = (1u128 << 127) - 1;

/// Primes below this bound are removed by trial division before
/// Pollard rho takes over.
pub const TRIAL_DIVISION_BOUND: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("modulus {0} is below 2")]
    ModulusTooSmall(u128),
    #[error("modulus {0} exceeds 127 bits")]
    ModulusTooWide(u128),
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),
    #[error("zero has no factorization")]
    Zero,
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u128, u128),
    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(u128, u128),
    #[error("cofactor {0} exceeds the 64-bit range supported by the primality test")]
    TooLargeToFactor(u128),
}

/// A modulus `m` with `2 <= m < 2^127`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u128", into = "u128")]
pub struct NaturalModulus(u128);

impl NaturalModulus {
    pub fn new(value: u128) -> Result<Self, ArithError> {
        if value < 2 {
            Err(ArithError::ModulusTooSmall(value))
        } else if value > MAX_MODULUS {
            Err(ArithError::ModulusTooWide(value))
        } else {
            Ok(NaturalModulus(value))
        }
    }

    #[inline]
    pub fn get(self) -> u128 {
        self.0
    }

    /// Reduces a signed integer into `[0, m)`.
    #[inline]
    pub fn reduce(self, a: i128) -> u128 {
        reduce_signed(a, self.0)
    }
}

impl TryFrom<u128> for NaturalModulus {
    type Error = ArithError;

    fn try_from(value: u128) -> Result<Self, Self::Error> {
        NaturalModulus::new(value)
    }
}

impl From<NaturalModulus> for u128 {
    fn from(m: NaturalModulus) -> u128 {
        m.0
    }
}

impl fmt::Display for NaturalModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `a mod m` in `[0, m)` for any signed `a` and `m >= 1`.
#[inline]
pub fn reduce_signed(a: i128, m: u128) -> u128 {
    debug_assert!(m >= 1);
    if a >= 0 {
        (a as u128) % m
    } else {
        let r = a.unsigned_abs() % m;
        if r == 0 {
            0
        } else {
            m - r
        }
    }
}

/// `a * b mod m` for `a, b < m <= MAX_MODULUS`.
#[inline]
pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    debug_assert!(a < m && b < m);
    if m <= u64::MAX as u128 {
        return (a * b) % m;
    }
    // Double-and-add; every intermediate stays below 2m < 2^128.
    let (mut x, mut y) = if a < b { (b, a) } else { (a, b) };
    let mut acc = 0u128;
    while y > 0 {
        if y & 1 == 1 {
            acc = add_mod(acc, x, m);
        }
        x = add_mod(x, x, m);
        y >>= 1;
    }
    acc
}

#[inline]
fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

/// `base^exp mod m` for a raw modulus `1 <= m <= MAX_MODULUS`.
pub fn pow_mod_u128(base: u128, mut exp: u128, m: u128) -> u128 {
    debug_assert!((1..=MAX_MODULUS).contains(&m));
    if m == 1 {
        return 0;
    }
    let mut b = base % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    acc
}

/// `base^exp mod m` on 64-bit operands.
#[inline]
pub fn pow_mod_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// `base^exp mod m`, result in `[0, m)`.
pub fn mod_pow(base: i128, exp: u128, m: NaturalModulus) -> u128 {
    pow_mod_u128(m.reduce(base), exp, m.get())
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in SMALL {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `is_prime` for a `u128`, rejecting values outside the 64-bit range.
pub fn is_prime_u128(n: u128) -> Result<bool, ArithError> {
    u64::try_from(n)
        .map(is_prime)
        .map_err(|_| ArithError::TooLargeToFactor(n))
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m`, in `[0, m)`.
pub fn mod_inverse(a: u128, m: u128) -> Result<u128, ArithError> {
    if m == 1 {
        return Ok(0);
    }
    // Extended Euclid on signed values; m < 2^127 fits in i128.
    let (mut old_r, mut r) = ((a % m) as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        // |s| stays bounded by m, so the product cannot overflow.
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return Err(ArithError::NotInvertible(a, m));
    }
    Ok(reduce_signed(old_s, m))
}

/// Combines `x ≡ r1 (mod m1)` and `x ≡ r2 (mod m2)` for coprime moduli.
pub fn crt_pair(
    r1: i128,
    m1: NaturalModulus,
    r2: i128,
    m2: NaturalModulus,
) -> Result<(u128, NaturalModulus), ArithError> {
    let (a, b) = (m1.get(), m2.get());
    if gcd(a, b) != 1 {
        return Err(ArithError::NotCoprime(a, b));
    }
    let product = a
        .checked_mul(b)
        .filter(|&p| p <= MAX_MODULUS)
        .ok_or(ArithError::Overflow("product of CRT moduli"))?;
    let (r1, r2) = (m1.reduce(r1), m2.reduce(r2));
    let inv = mod_inverse(a % b, b)?;
    let diff = (r2 + b - r1 % b) % b;
    let t = mul_mod(diff, inv, b);
    // r1 + a*t < a + a*(b-1) = product.
    let r = r1 + a * t;
    Ok((r, NaturalModulus(product)))
}

/// Combines a list of `(residue, modulus)` pairs with pairwise coprime moduli.
/// Moduli equal to 1 are accepted and ignored.
pub fn crt_all(parts: &[(u128, u128)]) -> Result<(u128, u128), ArithError> {
    let mut acc: Option<(u128, NaturalModulus)> = None;
    for &(r, m) in parts {
        if m == 1 {
            continue;
        }
        let m = NaturalModulus::new(m)?;
        let r = (r % m.get()) as i128;
        acc = Some(match acc {
            None => (r as u128, m),
            Some((ar, am)) => crt_pair(ar as i128, am, r, m)?,
        });
    }
    Ok(acc.map_or((0, 1), |(r, m)| (r, m.get())))
}

/// `base^exp` as an exact integer, or `None` on overflow past `MAX_MODULUS`.
pub fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp).filter(|&v| v <= MAX_MODULUS)
}

/// Exponent of `p` in `n` (`n != 0`).
pub fn valuation(mut n: u128, p: u128) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(n: i128) -> Sign {
        if n < 0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn as_i128(self) -> i128 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

/// Canonical signed prime factorization of a nonzero integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredInteger {
    pub sign: Sign,
    /// `(prime, exponent)` pairs, strictly increasing by prime, exponents >= 1.
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// Reconstructs the integer, failing on overflow.
    pub fn value(&self) -> Result<i128, ArithError> {
        let mut acc: i128 = 1;
        for &(p, e) in &self.factors {
            let pe = (p as i128)
                .checked_pow(e)
                .ok_or(ArithError::Overflow("reconstruction of a factorization"))?;
            acc = acc
                .checked_mul(pe)
                .ok_or(ArithError::Overflow("reconstruction of a factorization"))?;
        }
        Ok(acc * self.sign.as_i128())
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .binary_search_by_key(&p, |&(q, _)| q)
            .map_or(0, |i| self.factors[i].1)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_DIVISION_BOUND))
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Factors a nonzero integer. Trial division by small primes, then
/// Pollard rho (Brent) with a fixed increment schedule.
pub fn factorize(n: i128) -> Result<FactoredInteger, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let sign = Sign::of(n);
    let mut rest = n.unsigned_abs();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for &p in small_primes() {
        let p128 = p as u128;
        if p128 * p128 > rest {
            break;
        }
        if rest.is_multiple_of(p128) {
            let mut e = 0;
            while rest.is_multiple_of(p128) {
                rest /= p128;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        let rest = u64::try_from(rest).map_err(|_| ArithError::TooLargeToFactor(rest))?;
        let mut large = Vec::new();
        split_into_primes(rest, &mut large);
        large.sort_unstable();
        for p in large {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
    }
    Ok(FactoredInteger { sign, factors })
}

fn split_into_primes(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_into_primes(d, out);
    split_into_primes(n / d, out);
}

/// Returns a nontrivial factor of the composite `n`.
fn pollard_brent(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    if let Some(r) = exact_square_root(n) {
        return r;
    }
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    for c in 1..u64::MAX {
        let f = |x: u64| (mulm(x, x) + c) % n;
        let (mut y, mut r, mut q, m) = (2u64, 1u64, 1u64, 128u64);
        let (mut g, mut x, mut ys) = (1u64, 0u64, 0u64);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mulm(q, x.abs_diff(y));
                }
                g = gcd(q as u128, n as u128) as u64;
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys) as u128, n as u128) as u64;
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("Pollard rho exhausted every increment")
}

fn exact_square_root(n: u64) -> Option<u64> {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&s| s.checked_mul(s) == Some(n))
}

/// Prime powers `p^e <= bound` in increasing order, as `(p, e, p^e)`.
pub fn prime_powers_up_to(bound: u64) -> Vec<(u64, u32, u64)> {
    let mut out = Vec::new();
    for p in primes_up_to(bound) {
        let mut pe = p;
        let mut e = 1;
        loop {
            out.push((p, e, pe));
            match pe.checked_mul(p) {
                Some(next) if next <= bound => {
                    pe = next;
                    e += 1;
                }
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|&(_, _, pe)| pe);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u128) -> NaturalModulus {
        NaturalModulus::new(v).unwrap()
    }

    fn slow_pow(base: i128, exp: u32, modulus: u128) -> u128 {
        let mut acc = 1 % modulus;
        let b = reduce_signed(base, modulus);
        for _ in 0..exp {
            acc = acc * b % modulus;
        }
        acc
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(2, 10, m(1000)), 24);
        assert_eq!(mod_pow(123456789, 0, m(97)), 1);
        assert_eq!(mod_pow(3, 83, m(251)), slow_pow(3, 83, 251));
        assert_eq!(mod_pow(3, 83, m(251)), 195);
        assert_eq!(mod_pow(-2, 3, m(7)), 6);
    }

    #[test]
    fn mod_pow_wide_modulus() {
        let big = MAX_MODULUS; // 2^127 - 1 is a Mersenne prime
        assert_eq!(mod_pow(3, big - 1, m(big)), 1);
        assert_eq!(mod_pow(-1, 3, m(big)), big - 1);
    }

    #[test]
    fn modulus_width_is_enforced() {
        assert_eq!(NaturalModulus::new(1), Err(ArithError::ModulusTooSmall(1)));
        assert!(matches!(
            NaturalModulus::new(1u128 << 127),
            Err(ArithError::ModulusTooWide(_))
        ));
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(2141));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(!is_prime(12299));
        assert!(is_prime(18446744073709551557)); // largest 64-bit prime
        assert!(!is_prime(3215031751)); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn primality_matches_trial_division() {
        let sieve = primes_up_to(1_000_000);
        let mut flags = vec![false; 1_000_001];
        for p in sieve {
            flags[p as usize] = true;
        }
        for n in 0..=1_000_000u64 {
            assert_eq!(is_prime(n), flags[n as usize], "n = {n}");
        }
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(
            factorize(24).unwrap(),
            FactoredInteger {
                sign: Sign::Positive,
                factors: vec![(2, 3), (3, 1)]
            }
        );
        assert_eq!(
            factorize(-104).unwrap(),
            FactoredInteger {
                sign: Sign::Negative,
                factors: vec![(2, 3), (13, 1)]
            }
        );
        assert_eq!(factorize(1).unwrap().factors, vec![]);
        assert_eq!(factorize(0), Err(ArithError::Zero));
    }

    #[test]
    fn factorize_large_semiprime() {
        let p = 4294967291u64; // largest 32-bit prime
        let q = 4294967279u64;
        let n = p as i128 * q as i128;
        let f = factorize(n).unwrap();
        assert_eq!(f.factors, vec![(q, 1), (p, 1)]);
        assert_eq!(f.value().unwrap(), n);
    }

    #[test]
    fn factorize_rejects_huge_cofactor() {
        assert!(matches!(
            factorize(MAX_MODULUS as i128),
            Err(ArithError::TooLargeToFactor(_))
        ));
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_pair(2, m(3), 3, m(5)).unwrap(), (8, m(15)));
        assert_eq!(crt_pair(0, m(7), 0, m(11)).unwrap(), (0, m(77)));
        let scanned = (0..216u128).find(|x| x % 27 == 1 && x % 8 == 5).unwrap();
        assert_eq!(crt_pair(1, m(27), 5, m(8)).unwrap(), (scanned, m(216)));
        assert_eq!(scanned, 109);
        assert_eq!(crt_pair(-1, m(4), 2, m(9)).unwrap().0, 11);
    }

    #[test]
    fn crt_errors() {
        assert_eq!(
            crt_pair(1, m(6), 1, m(4)),
            Err(ArithError::NotCoprime(6, 4))
        );
        let big = m(1u128 << 100);
        assert_eq!(
            crt_pair(0, big, 0, m((1u128 << 40) + 1)),
            Err(ArithError::Overflow("product of CRT moduli"))
        );
    }

    #[test]
    fn inverse_and_valuation() {
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert_eq!(mod_inverse(6, 9), Err(ArithError::NotInvertible(6, 9)));
        assert_eq!(valuation(243 * 2, 3), 5);
        assert_eq!(valuation(7, 3), 0);
    }

    #[test]
    fn prime_powers_are_sorted() {
        let pp = prime_powers_up_to(30);
        let moduli: Vec<u64> = pp.iter().map(|t| t.2).collect();
        assert_eq!(
            moduli,
            vec![2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29]
        );
    }
}
