//! q-th power residues modulo primes, prime powers and composite moduli.
//!
//! Small moduli are handled by scanning, which makes the answer a
//! certificate by construction. Larger prime powers go through the
//! valuation reduction `a = p^v u`, a root of the unit part modulo `p`
//! (or modulo `q^q` when `p = q`), and Newton-Hensel lifting. Composite
//! moduli are split into prime powers and recombined by CRT.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    self, checked_pow, mod_inverse, mul_mod, pow_mod_u128, pow_mod_u64, reduce_signed, ArithError,
    NaturalModulus,
};
use crate::qfree::ProblemInstance;

/// Moduli up to this size are decided by exhaustive scan.
pub const SCAN_LIMIT: u128 = 1_000_000;

const MAX_NEWTON_STEPS: usize = 256;
const MAX_SPLIT_NODES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResidueError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{p} divides {a}; the residue symbol is undefined there")]
    PrimeDividesA { p: u64, a: i128 },
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("search for a split root modulo {p}^{e} exceeded its node budget")]
    SearchBudget { p: u64, e: u32 },
    #[error(transparent)]
    Hensel(#[from] HenselError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HenselError {
    #[error("target exponent must be at least 1")]
    ZeroTarget,
    #[error("{p} divides the seed root {root}")]
    RootDivisibleByPrime { p: u64, root: u128 },
    #[error(
        "Hensel criterion fails: v_p(g(x0)) = {valuation_g} is not greater than \
         2 v_p(g'(x0)) = {}",
        2 * valuation_derivative
    )]
    CriterionFailed {
        valuation_g: u32,
        valuation_derivative: u32,
    },
    #[error("Newton iteration did not converge")]
    NoConvergence,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePowerModulus {
    pub p: u64,
    pub b: u32,
    pub value: u128,
}

impl PrimePowerModulus {
    pub fn new(p: u64, b: u32) -> Result<Self, ResidueError> {
        if !arith::is_prime(p) {
            return Err(ResidueError::NotPrime(p));
        }
        let value = pow_checked(p, b)?;
        Ok(PrimePowerModulus { p, b, value })
    }
}

fn pow_checked(p: u64, e: u32) -> Result<u128, ArithError> {
    checked_pow(p as u128, e).ok_or(ArithError::Overflow("prime power"))
}

/// `x^q - a` reduced modulo `m`.
#[inline]
fn g_mod(x: u128, q: u64, a: i128, m: u128) -> u128 {
    let xq = pow_mod_u128(x % m, q as u128, m);
    let ar = reduce_signed(a, m);
    (xq + m - ar) % m
}

/// `∏_j (x^q - a_j) mod m`.
pub fn eval_product_mod(entries: &[i128], q: u64, x: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let xq = pow_mod_u128(x % m, q as u128, m);
    entries.iter().fold(1 % m, |acc, &a| {
        let d = (xq + m - reduce_signed(a, m)) % m;
        mul_mod(acc, d, m)
    })
}

/// Smallest `x` in `[0, m)` with `x^q ≡ a (mod m)`, by scanning. `m` must
/// fit comfortably in 64 bits.
pub fn scan_qth_root(a: i128, q: u64, m: u64) -> Option<u64> {
    let target = reduce_signed(a, m as u128) as u64;
    (0..m).find(|&x| pow_mod_u64(x, q, m) == target)
}

/// Euler-criterion test: is `a` a q-th power modulo the prime `p`, `p ∤ a`?
pub fn is_qth_power_mod_p(a: i128, q: u64, p: u64) -> Result<bool, ResidueError> {
    if !arith::is_prime(p) {
        return Err(ResidueError::NotPrime(p));
    }
    let ar = reduce_signed(a, p as u128) as u64;
    if ar == 0 {
        return Err(ResidueError::PrimeDividesA { p, a });
    }
    if p == q || !(p - 1).is_multiple_of(q) {
        return Ok(true);
    }
    Ok(pow_mod_u64(ar, (p - 1) / q, p) == 1)
}

/// Every `x` in `[0, p)` with `x^q ≡ a (mod p)`, ascending.
pub fn roots_mod_prime(a: i128, q: u64, p: u64) -> Result<Vec<u64>, ResidueError> {
    if !arith::is_prime(p) {
        return Err(ResidueError::NotPrime(p));
    }
    let ar = reduce_signed(a, p as u128) as u64;
    if ar == 0 {
        return Ok(vec![0]);
    }
    if (p as u128) <= SCAN_LIMIT {
        return Ok((1..p).filter(|&x| pow_mod_u64(x, q, p) == ar).collect());
    }
    if p == q {
        return Ok(vec![ar]);
    }
    let Some(x) = qth_root_mod_prime(ar as i128, q, p)? else {
        return Ok(Vec::new());
    };
    if p == q || !(p - 1).is_multiple_of(q) {
        return Ok(vec![x]);
    }
    // The q roots differ by the q-th roots of unity.
    let zeta = root_of_unity(q, p);
    let mut roots: Vec<u64> = std::iter::successors(Some(x), |&r| {
        Some(((r as u128 * zeta as u128) % p as u128) as u64)
    })
    .take(q as usize)
    .collect();
    roots.sort_unstable();
    Ok(roots)
}

/// `p - 1 = q^s t` with `q ∤ t`.
fn split_order(q: u64, p: u64) -> (u32, u64) {
    let (mut s, mut t) = (0, p - 1);
    while t % q == 0 {
        s += 1;
        t /= q;
    }
    (s, t)
}

/// Generator of the q-Sylow subgroup of `(Z/p)^*`, for `p ≡ 1 (mod q)`.
fn sylow_generator(q: u64, p: u64) -> u64 {
    let (_, t) = split_order(q, p);
    let rho = (2..p)
        .find(|&r| pow_mod_u64(r, (p - 1) / q, p) != 1)
        .expect("a non-residue exists when q | p - 1");
    pow_mod_u64(rho, t, p)
}

/// A primitive q-th root of unity modulo `p ≡ 1 (mod q)`.
fn root_of_unity(q: u64, p: u64) -> u64 {
    let (s, _) = split_order(q, p);
    pow_mod_u64(sylow_generator(q, p), q.pow(s - 1), p)
}

/// Some `x` with `x^q ≡ a (mod p)`, any prime `p`.
///
/// For `q ∤ p - 1` the exponent is inverted. Otherwise, with
/// `p - 1 = q^s t`, `a^k` for `qk ≡ 1 (mod t)` is off by an element of the
/// q-Sylow subgroup; its discrete logarithm there is found digit by digit
/// and divided by q.
pub fn qth_root_mod_prime(a: i128, q: u64, p: u64) -> Result<Option<u64>, ResidueError> {
    if !arith::is_prime(p) {
        return Err(ResidueError::NotPrime(p));
    }
    let a = reduce_signed(a, p as u128) as u64;
    if a == 0 {
        return Ok(Some(0));
    }
    if p == q {
        return Ok(Some(a));
    }
    if !(p - 1).is_multiple_of(q) {
        // x -> x^q is a bijection; invert the exponent modulo p - 1.
        let d = if p == 2 {
            1
        } else {
            mod_inverse(q as u128, (p - 1) as u128)? as u64
        };
        return Ok(Some(pow_mod_u64(a, d, p)));
    }
    if pow_mod_u64(a, (p - 1) / q, p) != 1 {
        return Ok(None);
    }
    let (s, t) = split_order(q, p);
    let k = if t == 1 {
        0
    } else {
        mod_inverse(q as u128 % t as u128, t as u128)? as u64
    };
    let x = pow_mod_u64(a, k, p);
    let inv_a = mod_inverse(a as u128, p as u128)? as u64;
    // e = x^q / a lies in the Sylow subgroup <g> of order q^s.
    let e = mul(pow_mod_u64(x, q, p), inv_a, p);
    let g = sylow_generator(q, p);
    let g_inv = mod_inverse(g as u128, p as u128)? as u64;
    let gamma = pow_mod_u64(g, q.pow(s - 1), p);
    let mut log: u128 = 0;
    let mut qi: u128 = 1;
    for i in 0..s {
        let undone = mul(e, pow_mod_u128(g_inv as u128, log, p as u128) as u64, p);
        let h = pow_mod_u64(undone, q.pow(s - 1 - i), p);
        let d = (0..q)
            .find(|&d| pow_mod_u64(gamma, d, p) == h)
            .expect("h has order dividing q");
        log += d as u128 * qi;
        qi *= q as u128;
    }
    debug_assert_eq!(log % q as u128, 0);
    let y = pow_mod_u128(g_inv as u128, log / q as u128, p as u128) as u64;
    let root = mul(x, y, p);
    debug_assert_eq!(pow_mod_u64(root, q, p), a);
    Ok(Some(root))
}

fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Lifts a root of `x^q ≡ a` to a root modulo `p^b` by Newton iteration.
///
/// The seed must satisfy `v_p(root^q - a) > 2 v_p(q root^(q-1))` with
/// `p ∤ root`; for `p ≠ q` that is just `root^q ≡ a (mod p)`, for `p = q`
/// it needs `q^3 | root^q - a` (a seed modulo `q^q` always qualifies).
/// The result is congruent to `root` modulo `p^(v - v')` where `v` and
/// `v'` are the two valuations above.
pub fn hensel_lift(a: i128, q: u64, p: u64, root: u128, b: u32) -> Result<u128, HenselError> {
    if b == 0 {
        return Err(HenselError::ZeroTarget);
    }
    let p128 = p as u128;
    if root.is_multiple_of(p128) {
        return Err(HenselError::RootDivisibleByPrime { p, root });
    }
    let dv: u32 = u32::from(p == q);
    let target = pow_checked(p, b)?;
    let work = pow_checked(p, b + dv)?;
    let probe_exp = (b + dv).max(2 * dv + 1);
    let probe = pow_checked(p, probe_exp)?;
    let g0 = g_mod(root, q, a, probe);
    let vg = if g0 == 0 {
        probe_exp
    } else {
        arith::valuation(g0, p128)
    };
    if vg <= 2 * dv {
        return Err(HenselError::CriterionFailed {
            valuation_g: vg,
            valuation_derivative: dv,
        });
    }
    let pdv = if dv == 1 { p128 } else { 1 };
    let dcoef = (q as u128 / pdv) % target;
    let mut x = root % target;
    for _ in 0..MAX_NEWTON_STEPS {
        let gx = g_mod(x, q, a, work);
        if gx.is_multiple_of(target) {
            return Ok(x);
        }
        let h = (gx / pdv) % target;
        let deriv = mul_mod(dcoef, pow_mod_u128(x, (q - 1) as u128, target), target);
        let step = mul_mod(h, mod_inverse(deriv, target)?, target);
        x = (x + target - step) % target;
    }
    Err(HenselError::NoConvergence)
}

/// A q-th root of the unit `u` modulo `p^e`.
fn unit_qth_root(u: u128, q: u64, p: u64, e: u32) -> Result<Option<u128>, ResidueError> {
    if p != q {
        let Some(r) = qth_root_mod_prime(u as i128, q, p)? else {
            return Ok(None);
        };
        if e == 1 {
            return Ok(Some(r as u128));
        }
        return Ok(Some(hensel_lift(u as i128, q, p, r as u128, e)?));
    }
    // p = q: x^q ≡ x (mod q), so level 1 has the single root u mod q.
    // Breadth-first lifting keeps at most q^2 candidates per level.
    let q128 = q as u128;
    let seed_level = e.min(q as u32);
    let mut level: Vec<u128> = vec![u % q128];
    let mut modulus = q128;
    for _ in 1..seed_level {
        let next_mod = modulus * q128;
        let target = u % next_mod;
        let next: Vec<u128> = level
            .iter()
            .flat_map(|&x| (0..q128).map(move |c| x + c * modulus))
            .filter(|&y| pow_mod_u128(y, q128, next_mod) == target)
            .collect();
        if next.is_empty() {
            return Ok(None);
        }
        level = next;
        modulus = next_mod;
    }
    let seed = *level.iter().min().expect("nonempty level");
    if e <= seed_level {
        return Ok(Some(seed));
    }
    Ok(Some(hensel_lift(u as i128, q, q, seed, e)?))
}

/// Some `x` in `[0, p^e)` with `x^q ≡ a (mod p^e)`, if any.
pub fn qth_root_mod_prime_power(
    a: i128,
    q: u64,
    p: u64,
    e: u32,
) -> Result<Option<u128>, ResidueError> {
    let m = pow_checked(p, e)?;
    let ar = reduce_signed(a, m);
    if ar == 0 {
        return Ok(Some(0));
    }
    let v = arith::valuation(ar, p as u128);
    if !(v as u64).is_multiple_of(q) {
        // v_p(x^q) is a multiple of q, so it can never match v < e.
        return Ok(None);
    }
    let pv = pow_checked(p, v)?;
    let unit = ar / pv;
    let Some(y) = unit_qth_root(unit, q, p, e - v)? else {
        return Ok(None);
    };
    let scale = pow_checked(p, v / q as u32)?;
    Ok(Some(scale * y % m))
}

/// Some `x` in `[0, m)` with `x^q ≡ a (mod m)`, if any.
pub fn is_qth_power_mod(a: i128, q: u64, m: NaturalModulus) -> Result<Option<u128>, ResidueError> {
    is_qth_power_mod_with(a, q, m, SCAN_LIMIT)
}

pub fn is_qth_power_mod_with(
    a: i128,
    q: u64,
    m: NaturalModulus,
    scan_limit: u128,
) -> Result<Option<u128>, ResidueError> {
    if m.get() <= scan_limit.min(u32::MAX as u128) {
        return Ok(scan_qth_root(a, q, m.get() as u64).map(u128::from));
    }
    let f = arith::factorize(m.get() as i128)?;
    let mut parts = Vec::with_capacity(f.factors.len());
    for &(p, e) in &f.factors {
        match qth_root_mod_prime_power(a, q, p, e)? {
            Some(r) => parts.push((r, pow_checked(p, e)?)),
            None => return Ok(None),
        }
    }
    Ok(Some(arith::crt_all(&parts)?.0))
}

/// Root of the whole product modulo one prime power.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRoot {
    pub prime: u64,
    pub exponent: u32,
    pub root: u128,
    /// Entry whose factor alone vanishes here; `None` when the
    /// divisibility is spread over several factors.
    pub factor_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootCertificate {
    pub modulus: u128,
    pub root: u128,
    /// Smallest `j` with `root^q ≡ a_j (mod modulus)`, if one exists.
    pub factor_index: Option<usize>,
    pub parts: Vec<LocalRoot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootVerifyError {
    #[error("product does not vanish at {root} modulo {modulus}")]
    ProductNonzero { root: u128, modulus: u128 },
    #[error("factor {index} does not vanish at {root} modulo {modulus}")]
    FactorNonzero {
        index: usize,
        root: u128,
        modulus: u128,
    },
    #[error("factor index {0} is out of range")]
    BadIndex(usize),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl RootCertificate {
    pub fn verify(&self, inst: &ProblemInstance) -> Result<(), RootVerifyError> {
        let q = inst.q();
        let entries = inst.entries();
        let check = |root: u128, modulus: u128, idx: Option<usize>| {
            if eval_product_mod(entries, q, root, modulus) != 0 {
                return Err(RootVerifyError::ProductNonzero { root, modulus });
            }
            if let Some(j) = idx {
                let a = *entries.get(j).ok_or(RootVerifyError::BadIndex(j))?;
                if modulus > 1 && g_mod(root, q, a, modulus) != 0 {
                    return Err(RootVerifyError::FactorNonzero {
                        index: j,
                        root,
                        modulus,
                    });
                }
            }
            Ok(())
        };
        check(self.root, self.modulus, self.factor_index)?;
        for part in &self.parts {
            let m = pow_checked(part.prime, part.exponent)?;
            check(part.root, m, part.factor_index)?;
            if self.root % m != part.root % m {
                return Err(RootVerifyError::ProductNonzero {
                    root: self.root,
                    modulus: m,
                });
            }
        }
        Ok(())
    }
}

/// A root of `∏ (x^q - a_j)` modulo `p^e`, if any.
pub fn local_product_root(
    inst: &ProblemInstance,
    p: u64,
    e: u32,
) -> Result<Option<LocalRoot>, ResidueError> {
    let q = inst.q();
    let entries = inst.entries();
    for (j, &a) in entries.iter().enumerate() {
        if let Some(root) = qth_root_mod_prime_power(a, q, p, e)? {
            return Ok(Some(LocalRoot {
                prime: p,
                exponent: e,
                root,
                factor_index: Some(j),
            }));
        }
    }
    let m = pow_checked(p, e)?;
    let split = |root| LocalRoot {
        prime: p,
        exponent: e,
        root,
        factor_index: None,
    };
    // Entries are q-free, so every x ≡ 0 (mod p) gives the same valuations
    // as x = 0.
    if eval_product_mod(entries, q, 0, m) == 0 {
        return Ok(Some(split(0)));
    }
    if p != q {
        // At a unit x a factor vanishing mod p has a simple root and would
        // have lifted above, so the product is a unit there.
        return Ok(None);
    }
    split_unit_search(entries, q, e).map(|found| found.map(split))
}

/// Depth-first search over units modulo `q^t` for an `x` whose factor
/// valuations sum to at least `e`.
fn split_unit_search(entries: &[i128], q: u64, e: u32) -> Result<Option<u128>, ResidueError> {
    let q128 = q as u128;
    let mut stack: Vec<(u128, u32)> = (1..q128).rev().map(|x| (x, 1)).collect();
    let mut nodes = 0usize;
    while let Some((x, t)) = stack.pop() {
        nodes += 1;
        if nodes > MAX_SPLIT_NODES {
            return Err(ResidueError::SearchBudget { p: q, e });
        }
        let mt = pow_checked(q, t)?;
        let (mut fixed, mut open) = (0u32, 0u32);
        for &a in entries {
            let g = g_mod(x, q, a, mt);
            if g == 0 {
                open += 1;
            } else {
                fixed += arith::valuation(g, q128);
            }
        }
        if fixed + t * open >= e {
            return Ok(Some(x));
        }
        if open == 0 {
            continue;
        }
        for c in (0..q128).rev() {
            stack.push((x + c * mt, t + 1));
        }
    }
    Ok(None)
}

/// A root of the instance's polynomial modulo `m`, with its per-prime-power
/// decomposition.
pub fn root_mod(inst: &ProblemInstance, m: u128) -> Result<Option<RootCertificate>, ResidueError> {
    if m == 0 {
        return Err(ResidueError::ZeroModulus);
    }
    if m == 1 {
        return Ok(Some(RootCertificate {
            modulus: 1,
            root: 0,
            factor_index: Some(0),
            parts: Vec::new(),
        }));
    }
    structured_root(inst, NaturalModulus::new(m)?)
}

fn structured_root(
    inst: &ProblemInstance,
    m: NaturalModulus,
) -> Result<Option<RootCertificate>, ResidueError> {
    let f = arith::factorize(m.get() as i128)?;
    let mut parts = Vec::with_capacity(f.factors.len());
    for &(p, e) in &f.factors {
        match local_product_root(inst, p, e)? {
            Some(local) => parts.push(local),
            None => return Ok(None),
        }
    }
    let residues: Vec<(u128, u128)> = parts
        .iter()
        .map(|l| Ok((l.root, pow_checked(l.prime, l.exponent)?)))
        .collect::<Result<_, ArithError>>()?;
    let (root, _) = arith::crt_all(&residues)?;
    Ok(Some(certificate(inst, m.get(), root, parts)))
}

fn certificate(
    inst: &ProblemInstance,
    m: u128,
    root: u128,
    parts: Vec<LocalRoot>,
) -> RootCertificate {
    let factor_index = inst
        .entries()
        .iter()
        .position(|&a| g_mod(root, inst.q(), a, m) == 0);
    RootCertificate {
        modulus: m,
        root,
        factor_index,
        parts,
    }
}
