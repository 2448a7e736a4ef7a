//! q-free radicals, instance validation and the exponent matrix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError, FactoredInteger, Sign};

/// Above this many vectors in `F_q^k` the classifier refuses to enumerate.
pub const COVERING_WARN_LIMIT: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("q = {0} is not an odd prime")]
    NotOddPrime(i128),
    #[error("no entries given")]
    Empty,
    #[error("entry {index} is zero")]
    ZeroEntry { index: usize },
    #[error("entry {index} is {value}; ±1 is excluded")]
    UnitEntry { index: usize, value: i128 },
    #[error("entry {index} = {value} is not {q}-free: {prime}^{exponent} divides it")]
    NotQFree {
        index: usize,
        value: i128,
        q: u64,
        prime: u64,
        exponent: u32,
    },
    #[error("entries {first} and {second} are both {value}")]
    Duplicate {
        first: usize,
        second: usize,
        value: i128,
    },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A validated `(q, [a_1, ..., a_l])`, standing for `∏ (x^q - a_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RawInstance", try_from = "RawInstance")]
pub struct ProblemInstance {
    q: u64,
    entries: Vec<i128>,
    factored: Vec<FactoredInteger>,
    /// Set for derived instances where repeated entries are allowed.
    multiset: bool,
}

/// Wire form of an instance; deserialization re-runs validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawInstance {
    q: u64,
    entries: Vec<i128>,
    #[serde(default)]
    multiset: bool,
}

impl From<ProblemInstance> for RawInstance {
    fn from(inst: ProblemInstance) -> Self {
        RawInstance {
            q: inst.q,
            entries: inst.entries,
            multiset: inst.multiset,
        }
    }
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = InstanceError;

    fn try_from(raw: RawInstance) -> Result<Self, Self::Error> {
        build_instance(raw.q as i128, &raw.entries, raw.multiset)
    }
}

impl ProblemInstance {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn entries(&self) -> &[i128] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_multiset(&self) -> bool {
        self.multiset
    }

    pub fn factorizations(&self) -> &[FactoredInteger] {
        &self.factored
    }

    /// Primes dividing some entry, ascending.
    pub fn support(&self) -> Vec<u64> {
        let mut primes: Vec<u64> = self.factored.iter().flat_map(|f| f.primes()).collect();
        primes.sort_unstable();
        primes.dedup();
        primes
    }

    /// `q^k`, the size of the space the covering check enumerates, or
    /// `None` if it does not fit in 128 bits.
    pub fn covering_space_size(&self) -> Option<u128> {
        (self.q as u128).checked_pow(self.support().len() as u32)
    }

    /// Warnings worth surfacing to a user before classification.
    pub fn warnings(&self) -> Vec<String> {
        match self.covering_space_size() {
            Some(n) if n <= COVERING_WARN_LIMIT => Vec::new(),
            _ => vec![format!(
                "q^k exceeds {COVERING_WARN_LIMIT}; the covering check will refuse this instance"
            )],
        }
    }
}

fn check_q(q: i128) -> Result<u64, InstanceError> {
    match u64::try_from(q) {
        Ok(q64) if q64 != 2 && arith::is_prime(q64) => Ok(q64),
        _ => Err(InstanceError::NotOddPrime(q)),
    }
}

/// Checks every hypothesis on `(q, entries)` and returns the instance.
pub fn validate_instance(q: i128, entries: &[i128]) -> Result<ProblemInstance, InstanceError> {
    build_instance(q, entries, false)
}

/// Like [`validate_instance`] but keeps repeated entries.
pub fn validate_multiset(q: i128, entries: &[i128]) -> Result<ProblemInstance, InstanceError> {
    build_instance(q, entries, true)
}

fn build_instance(
    q: i128,
    entries: &[i128],
    multiset: bool,
) -> Result<ProblemInstance, InstanceError> {
    let q = check_q(q)?;
    if entries.is_empty() {
        return Err(InstanceError::Empty);
    }
    let mut factored = Vec::with_capacity(entries.len());
    for (index, &value) in entries.iter().enumerate() {
        if value == 0 {
            return Err(InstanceError::ZeroEntry { index });
        }
        if value == 1 || value == -1 {
            return Err(InstanceError::UnitEntry { index, value });
        }
        let f = arith::factorize(value)?;
        if let Some(&(prime, exponent)) = f.factors.iter().find(|&&(_, e)| e as u64 >= q) {
            return Err(InstanceError::NotQFree {
                index,
                value,
                q,
                prime,
                exponent,
            });
        }
        if !multiset {
            if let Some(first) = entries[..index].iter().position(|&v| v == value) {
                return Err(InstanceError::Duplicate {
                    first,
                    second: index,
                    value,
                });
            }
        }
        factored.push(f);
    }
    Ok(ProblemInstance {
        q,
        entries: entries.to_vec(),
        factored,
        multiset,
    })
}

fn rebuild(f: &FactoredInteger, q: u64) -> Result<i128, ArithError> {
    FactoredInteger {
        sign: f.sign,
        factors: f
            .factors
            .iter()
            .filter_map(|&(p, e)| {
                let r = (e as u64 % q) as u32;
                (r > 0).then_some((p, r))
            })
            .collect(),
    }
    .value()
}

/// `sign(n) · ∏ p^(e mod q)`.
pub fn rad_q_signed(n: i128, q: u64) -> Result<i128, ArithError> {
    rebuild(&arith::factorize(n)?, q)
}

/// `rad_q(|n|)`.
pub fn rad_q_abs(n: i128, q: u64) -> Result<i128, ArithError> {
    let mut f = arith::factorize(n)?;
    f.sign = Sign::Positive;
    rebuild(&f, q)
}

/// `rad_q(a^c)` computed on the factorization, so `a^c` itself never
/// has to fit in 128 bits.
pub fn rad_q_of_power(a: i128, c: u64, q: u64) -> Result<i128, ArithError> {
    let mut f = arith::factorize(a)?;
    for (_, e) in f.factors.iter_mut() {
        *e = ((*e as u64 * c) % q) as u32;
    }
    f.factors.retain(|&(_, e)| e > 0);
    if c.is_multiple_of(2) {
        f.sign = Sign::Positive;
    }
    f.value()
}

/// Support primes and the `ν_ij` exponents (`p_i^ν_ij ∥ a_j`) of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentMatrix {
    pub q: u64,
    pub primes: Vec<u64>,
    /// `nu[i][j]`, row per prime, column per entry.
    pub nu: Vec<Vec<u32>>,
    pub signs: Vec<Sign>,
}

impl ExponentMatrix {
    pub fn k(&self) -> usize {
        self.primes.len()
    }

    pub fn l(&self) -> usize {
        self.signs.len()
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        self.nu.iter().map(|row| row[j]).collect()
    }
}

pub fn exponent_matrix(inst: &ProblemInstance) -> ExponentMatrix {
    let primes = inst.support();
    let nu = primes
        .iter()
        .map(|&p| {
            inst.factorizations()
                .iter()
                .map(|f| f.exponent_of(p))
                .collect()
        })
        .collect();
    ExponentMatrix {
        q: inst.q(),
        primes,
        nu,
        signs: inst.factorizations().iter().map(|f| f.sign).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radicals() {
        assert_eq!(rad_q_signed(24, 3).unwrap(), 3);
        assert_eq!(rad_q_signed(54, 3).unwrap(), 2);
        assert_eq!(rad_q_signed(-104, 3).unwrap(), -13);
        assert_eq!(rad_q_abs(-104, 3).unwrap(), 13);
        assert_eq!(rad_q_abs(8, 3).unwrap(), 1);
        assert_eq!(rad_q_abs(49, 3).unwrap(), 49);
        assert_eq!(rad_q_signed(-1, 5).unwrap(), -1);
        assert_eq!(rad_q_signed(1, 5).unwrap(), 1);
    }

    #[test]
    fn radical_of_power() {
        assert_eq!(rad_q_of_power(12299, 2, 3).unwrap(), 7 * 251 * 251);
        assert_eq!(rad_q_of_power(-7, 3, 5).unwrap(), -343);
        assert_eq!(rad_q_of_power(-7, 2, 5).unwrap(), 49);
    }

    #[test]
    fn example_7_251_is_valid() {
        let inst = validate_instance(3, &[7, 251, 1757, 12299]).unwrap();
        assert_eq!(inst.len(), 4);
        assert_eq!(inst.support(), vec![7, 251]);
    }

    #[test]
    fn rejections() {
        assert_eq!(
            validate_instance(3, &[16]),
            Err(InstanceError::NotQFree {
                index: 0,
                value: 16,
                q: 3,
                prime: 2,
                exponent: 4
            })
        );
        assert_eq!(
            validate_instance(3, &[-1, 5]),
            Err(InstanceError::UnitEntry {
                index: 0,
                value: -1
            })
        );
        assert_eq!(
            validate_instance(3, &[5, 0]),
            Err(InstanceError::ZeroEntry { index: 1 })
        );
        assert_eq!(
            validate_instance(3, &[5, 7, 5]),
            Err(InstanceError::Duplicate {
                first: 0,
                second: 2,
                value: 5
            })
        );
        assert_eq!(
            validate_instance(2, &[5]),
            Err(InstanceError::NotOddPrime(2))
        );
        assert_eq!(
            validate_instance(9, &[5]),
            Err(InstanceError::NotOddPrime(9))
        );
        assert_eq!(validate_instance(3, &[]), Err(InstanceError::Empty));
        assert!(validate_multiset(3, &[4, 4]).is_ok());
    }

    #[test]
    fn exponent_matrices() {
        let inst = validate_instance(3, &[7, 251, 1757, 12299]).unwrap();
        let m = exponent_matrix(&inst);
        assert_eq!(m.primes, vec![7, 251]);
        assert_eq!(m.nu, vec![vec![1, 0, 1, 2], vec![0, 1, 1, 1]]);

        let (p1, p2) = (2i128, 3i128);
        let entries = [p1, p2, p1 * p2, p1 * p1 * p2, p1 * p2 * p2, p1.pow(4) * p2];
        let m = exponent_matrix(&validate_instance(5, &entries).unwrap());
        assert_eq!(m.nu, vec![vec![1, 0, 1, 2, 1, 4], vec![0, 1, 1, 1, 2, 1]]);

        let m = exponent_matrix(&validate_instance(3, &[2]).unwrap());
        assert_eq!((m.primes.clone(), m.nu.clone()), (vec![2], vec![vec![1]]));
    }

    #[test]
    fn warns_on_huge_support() {
        let primes = [
            2i128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
        ];
        let product: i128 = primes.iter().product();
        let inst = validate_instance(3, &[product]).unwrap();
        assert_eq!(inst.warnings().len(), 1);
    }
}
