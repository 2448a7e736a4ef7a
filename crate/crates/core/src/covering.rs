//! Hyperplanes of `F_q^k` attached to an instance, and exhaustive
//! verification of linear coverings.
//!
//! Vectors of `F_q^k` are enumerated in lexicographic order with the first
//! coordinate most significant; the rank of a vector in that order is its
//! index into [`CoveringReport::per_vector_assignment`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qfree::ExponentMatrix;

/// Hard cap on `q^k` for exhaustive enumeration.
pub const ENUMERATION_HARD_CAP: u128 = 100_000_000;

/// Cap on the number of hyperplane subsets `min_covering_size` will try.
pub const SUBSET_SEARCH_CAP: u128 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoveringError {
    #[error("column {column} of the exponent matrix vanishes mod q")]
    ZeroColumn { column: usize },
    #[error("hyperplane coefficients must not all vanish")]
    ZeroHyperplane,
    #[error("hyperplane has {got} coefficients, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("enumerating {requested} vectors exceeds the bound {bound}")]
    BoundExceeded { requested: u128, bound: u128 },
    #[error("a covering needs dimension k >= 2, got {0}")]
    DimensionTooSmall(usize),
}

/// `{x : Σ coeffs_i x_i = 0}` in `F_q^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hyperplane {
    pub coeffs: Vec<u32>,
}

impl Hyperplane {
    pub fn new(coeffs: Vec<u32>, q: u64) -> Result<Self, CoveringError> {
        let coeffs: Vec<u32> = coeffs.into_iter().map(|c| (c as u64 % q) as u32).collect();
        if coeffs.iter().all(|&c| c == 0) {
            return Err(CoveringError::ZeroHyperplane);
        }
        Ok(Hyperplane { coeffs })
    }

    pub fn contains(&self, v: &[u32], q: u64) -> bool {
        let s: u64 = self
            .coeffs
            .iter()
            .zip(v)
            .map(|(&c, &x)| c as u64 * x as u64)
            .sum();
        s.is_multiple_of(q)
    }

    /// Scales so the first nonzero coefficient is 1.
    pub fn normalized(&self, q: u64) -> Hyperplane {
        let lead = *self
            .coeffs
            .iter()
            .find(|&&c| c != 0)
            .expect("nonzero hyperplane");
        let inv = inverse_mod_small(lead as u64, q);
        Hyperplane {
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| (c as u64 * inv % q) as u32)
                .collect(),
        }
    }

    pub fn scaled(&self, c: u64, q: u64) -> Hyperplane {
        Hyperplane {
            coeffs: self
                .coeffs
                .iter()
                .map(|&x| (x as u64 * c % q) as u32)
                .collect(),
        }
    }
}

fn inverse_mod_small(a: u64, q: u64) -> u64 {
    crate::arith::pow_mod_u64(a, q - 2, q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub covers: bool,
    pub uncovered_vector: Option<Vec<u32>>,
    /// For each vector (by lexicographic rank), the smallest index of a
    /// hyperplane containing it.
    pub per_vector_assignment: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoveringVerifyError {
    #[error("report claims a covering but carries no assignment")]
    MissingAssignment,
    #[error("report denies a covering but names no uncovered vector")]
    MissingUncovered,
    #[error("assignment has {got} entries, expected {expected}")]
    WrongLength { expected: u128, got: usize },
    #[error("vector {vector:?} is not on its assigned hyperplane {plane}")]
    BadAssignment { vector: Vec<u32>, plane: u32 },
    #[error("vector {0:?} lies on a listed hyperplane")]
    NotUncovered(Vec<u32>),
    #[error(transparent)]
    Covering(#[from] CoveringError),
}

impl CoveringReport {
    /// Re-checks the certificate against the hyperplanes it was built from.
    pub fn verify(
        &self,
        planes: &[Hyperplane],
        q: u64,
        k: usize,
    ) -> Result<(), CoveringVerifyError> {
        if self.covers {
            let assignment = self
                .per_vector_assignment
                .as_ref()
                .ok_or(CoveringVerifyError::MissingAssignment)?;
            let total = space_size(q, k, ENUMERATION_HARD_CAP)?;
            if assignment.len() as u128 != total {
                return Err(CoveringVerifyError::WrongLength {
                    expected: total,
                    got: assignment.len(),
                });
            }
            for (v, &plane) in VectorIter::new(q, k).zip(assignment) {
                let ok = planes
                    .get(plane as usize)
                    .is_some_and(|h| h.contains(&v, q));
                if !ok {
                    return Err(CoveringVerifyError::BadAssignment { vector: v, plane });
                }
            }
        } else {
            let v = self
                .uncovered_vector
                .as_ref()
                .ok_or(CoveringVerifyError::MissingUncovered)?;
            if v.len() != k || v.iter().any(|&x| x as u64 >= q) {
                return Err(CoveringVerifyError::Covering(
                    CoveringError::DimensionMismatch {
                        expected: k,
                        got: v.len(),
                    },
                ));
            }
            if planes.iter().any(|h| h.contains(v, q)) {
                return Err(CoveringVerifyError::NotUncovered(v.clone()));
            }
        }
        Ok(())
    }

    /// Number of vectors assigned to each hyperplane.
    pub fn assignment_counts(&self, planes: usize) -> Option<Vec<u64>> {
        let assignment = self.per_vector_assignment.as_ref()?;
        let mut counts = vec![0u64; planes];
        for &a in assignment {
            counts[a as usize] += 1;
        }
        Some(counts)
    }
}

fn space_size(q: u64, k: usize, bound: u128) -> Result<u128, CoveringError> {
    let bound = bound.min(ENUMERATION_HARD_CAP);
    match (q as u128).checked_pow(k as u32) {
        Some(n) if n <= bound => Ok(n),
        Some(n) => Err(CoveringError::BoundExceeded {
            requested: n,
            bound,
        }),
        None => Err(CoveringError::BoundExceeded {
            requested: u128::MAX,
            bound,
        }),
    }
}

/// Lexicographic odometer over `F_q^k`.
#[derive(Debug, Clone)]
pub struct VectorIter {
    q: u32,
    current: Option<Vec<u32>>,
}

impl VectorIter {
    pub fn new(q: u64, k: usize) -> Self {
        VectorIter {
            q: q as u32,
            current: Some(vec![0; k]),
        }
    }
}

impl Iterator for VectorIter {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        for i in (0..next.len()).rev() {
            next[i] += 1;
            if next[i] < self.q {
                self.current = Some(next);
                return Some(out);
            }
            next[i] = 0;
        }
        Some(out)
    }
}

/// One hyperplane per entry: the column `(ν_1j, ..., ν_kj) mod q`.
pub fn hyperplanes_of(matrix: &ExponentMatrix) -> Result<Vec<Hyperplane>, CoveringError> {
    (0..matrix.l())
        .map(|j| {
            Hyperplane::new(matrix.column(j), matrix.q)
                .map_err(|_| CoveringError::ZeroColumn { column: j })
        })
        .collect()
}

/// Exhaustive covering check with the default enumeration cap.
pub fn check_covering(
    planes: &[Hyperplane],
    q: u64,
    k: usize,
) -> Result<CoveringReport, CoveringError> {
    check_covering_bounded(planes, q, k, ENUMERATION_HARD_CAP)
}

pub fn check_covering_bounded(
    planes: &[Hyperplane],
    q: u64,
    k: usize,
    bound: u128,
) -> Result<CoveringReport, CoveringError> {
    if let Some(h) = planes.iter().find(|h| h.coeffs.len() != k) {
        return Err(CoveringError::DimensionMismatch {
            expected: k,
            got: h.coeffs.len(),
        });
    }
    let total = space_size(q, k, bound)?;
    let mut assignment = Vec::with_capacity(total as usize);
    for v in VectorIter::new(q, k) {
        match planes.iter().position(|h| h.contains(&v, q)) {
            Some(j) => assignment.push(j as u32),
            None => {
                return Ok(CoveringReport {
                    covers: false,
                    uncovered_vector: Some(v),
                    per_vector_assignment: None,
                })
            }
        }
    }
    Ok(CoveringReport {
        covers: true,
        uncovered_vector: None,
        per_vector_assignment: Some(assignment),
    })
}

/// All hyperplanes of `F_q^k` up to scalars, each with first nonzero
/// coefficient 1, in lexicographic order.
pub fn normalized_hyperplanes(q: u64, k: usize) -> Vec<Hyperplane> {
    VectorIter::new(q, k)
        .filter(|v| v.iter().find(|&&c| c != 0) == Some(&1))
        .map(|coeffs| Hyperplane { coeffs })
        .collect()
}

struct Bitset(Vec<u64>);

impl Bitset {
    fn full(bits: usize) -> Bitset {
        let mut words = vec![u64::MAX; bits.div_ceil(64)];
        if !bits.is_multiple_of(64) {
            *words.last_mut().unwrap() = (1u64 << (bits % 64)) - 1;
        }
        Bitset(words)
    }
}

/// Searches for `size` hyperplanes (up to scalars) whose union is `F_q^k`.
pub fn covering_of_size(
    q: u64,
    k: usize,
    size: usize,
) -> Result<Option<Vec<Hyperplane>>, CoveringError> {
    let total = space_size(q, k, ENUMERATION_HARD_CAP)? as usize;
    let planes = normalized_hyperplanes(q, k);
    let n = planes.len();
    if size > n {
        return Ok(None);
    }
    let combos = binomial(n as u128, size as u128);
    if combos > SUBSET_SEARCH_CAP {
        return Err(CoveringError::BoundExceeded {
            requested: combos,
            bound: SUBSET_SEARCH_CAP,
        });
    }
    let words = total.div_ceil(64);
    let sets: Vec<Vec<u64>> = planes
        .iter()
        .map(|h| {
            let mut bits = vec![0u64; words];
            for (i, v) in VectorIter::new(q, k).enumerate() {
                if h.contains(&v, q) {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            bits
        })
        .collect();
    let full = Bitset::full(total).0;
    let mut chosen = Vec::with_capacity(size);
    let found = search(&sets, &full, size, 0, &vec![0u64; words], &mut chosen);
    Ok(found.then(|| chosen.iter().map(|&i| planes[i].clone()).collect()))
}

fn search(
    sets: &[Vec<u64>],
    full: &[u64],
    remaining: usize,
    start: usize,
    acc: &[u64],
    chosen: &mut Vec<usize>,
) -> bool {
    if remaining == 0 {
        return acc == full;
    }
    for i in start..=sets.len() - remaining {
        let next: Vec<u64> = acc.iter().zip(&sets[i]).map(|(a, b)| a | b).collect();
        chosen.push(i);
        if search(sets, full, remaining - 1, i + 1, &next, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Smallest number of hyperplanes covering `F_q^k`, with a witness.
pub fn min_covering(q: u64, k: usize) -> Result<(usize, Vec<Hyperplane>), CoveringError> {
    if k < 2 {
        return Err(CoveringError::DimensionTooSmall(k));
    }
    let n = normalized_hyperplanes(q, k).len();
    for size in 1..=n {
        if let Some(cover) = covering_of_size(q, k, size)? {
            return Ok((size, cover));
        }
    }
    unreachable!("the set of all hyperplanes covers F_q^k for k >= 2")
}

/// `#LC(F_q^k)` by exhaustive search.
pub fn min_covering_size(q: u64, k: usize) -> Result<usize, CoveringError> {
    min_covering(q, k).map(|(size, _)| size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planes(q: u64, raw: &[&[u32]]) -> Vec<Hyperplane> {
        raw.iter()
            .map(|c| Hyperplane::new(c.to_vec(), q).unwrap())
            .collect()
    }

    #[test]
    fn hyperplanes_from_matrix() {
        let m = ExponentMatrix {
            q: 3,
            primes: vec![7, 251],
            nu: vec![vec![1, 0, 1, 2], vec![0, 1, 1, 1]],
            signs: vec![crate::arith::Sign::Positive; 4],
        };
        let hs = hyperplanes_of(&m).unwrap();
        let coeffs: Vec<Vec<u32>> = hs.into_iter().map(|h| h.coeffs).collect();
        assert_eq!(coeffs, vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1]]);
    }

    #[test]
    fn zero_column_is_rejected() {
        let m = ExponentMatrix {
            q: 3,
            primes: vec![2],
            nu: vec![vec![1, 3]],
            signs: vec![crate::arith::Sign::Positive; 2],
        };
        assert_eq!(
            hyperplanes_of(&m),
            Err(CoveringError::ZeroColumn { column: 1 })
        );
    }

    #[test]
    fn two_prime_family_covers() {
        let hs = planes(3, &[&[1, 0], &[0, 1], &[1, 1], &[2, 1]]);
        let r = check_covering(&hs, 3, 2).unwrap();
        assert!(r.covers);
        assert_eq!(r.per_vector_assignment.as_ref().unwrap().len(), 9);
        r.verify(&hs, 3, 2).unwrap();
    }

    #[test]
    fn three_planes_miss_a_vector() {
        let hs = planes(3, &[&[1, 0], &[0, 1], &[1, 1]]);
        let r = check_covering(&hs, 3, 2).unwrap();
        assert!(!r.covers);
        // brute force: first vector in lexicographic order on no plane
        let expected = VectorIter::new(3, 2)
            .find(|v| !hs.iter().any(|h| h.contains(v, 3)))
            .unwrap();
        assert_eq!(expected, vec![1, 1]);
        assert_eq!(r.uncovered_vector, Some(expected));
        r.verify(&hs, 3, 2).unwrap();
    }

    #[test]
    fn dimension_one_never_covers() {
        let hs = planes(3, &[&[1]]);
        let r = check_covering(&hs, 3, 1).unwrap();
        assert_eq!(r.uncovered_vector, Some(vec![1]));
    }

    #[test]
    fn enumeration_bound_refuses() {
        let hs = planes(3, &[&[1; 20]]);
        assert!(matches!(
            check_covering(&hs, 3, 20),
            Err(CoveringError::BoundExceeded { .. })
        ));
        assert!(matches!(
            check_covering_bounded(&planes(3, &[&[1, 1]]), 3, 2, 8),
            Err(CoveringError::BoundExceeded {
                requested: 9,
                bound: 8
            })
        ));
    }

    #[test]
    fn tampered_certificates_fail_verification() {
        let hs = planes(3, &[&[1, 0], &[0, 1], &[1, 1], &[2, 1]]);
        let mut r = check_covering(&hs, 3, 2).unwrap();
        r.per_vector_assignment.as_mut().unwrap()[4] = 0; // (1,1) is not on x1 = 0
        assert!(matches!(
            r.verify(&hs, 3, 2),
            Err(CoveringVerifyError::BadAssignment { .. })
        ));
        let fake = CoveringReport {
            covers: false,
            uncovered_vector: Some(vec![0, 0]),
            per_vector_assignment: None,
        };
        assert!(fake.verify(&hs, 3, 2).is_err());
    }

    #[test]
    fn normalized_hyperplane_count() {
        assert_eq!(normalized_hyperplanes(3, 2).len(), 4);
        assert_eq!(normalized_hyperplanes(5, 2).len(), 6);
        assert_eq!(normalized_hyperplanes(3, 3).len(), 13);
    }

    #[test]
    fn minimum_coverings() {
        assert_eq!(min_covering_size(3, 2).unwrap(), 4);
        assert_eq!(min_covering_size(5, 2).unwrap(), 6);
        assert_eq!(min_covering_size(3, 3).unwrap(), 4);
        assert_eq!(
            min_covering_size(3, 1),
            Err(CoveringError::DimensionTooSmall(1))
        );
    }

    #[test]
    fn normalization() {
        let h = Hyperplane::new(vec![0, 2, 1], 3).unwrap();
        assert_eq!(h.normalized(3).coeffs, vec![0, 1, 2]);
    }
}
