//! The decision procedure.
//!
//! For an instance with support primes `p_1 < ... < p_k` (`k >= 2`) the
//! polynomial `∏ (x^q - a_j)` has a root modulo every integer iff
//!
//! 1. the hyperplanes `Σ_i ν_ij x_i = 0` cover `F_q^k`,
//! 2. some `a_i` is a q-th power modulo `q^q`,
//! 3. every `p_i` has some `a_j` with `p_i ∤ a_j` that is a q-th power mod `p_i`.
//!
//! A support of a single prime never qualifies: the only hyperplane of
//! `F_q^1` is `{0}`.
//!
//! Every condition is recorded with a re-checkable witness.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, checked_pow, pow_mod_u128, reduce_signed, ArithError, NaturalModulus};
use crate::covering::{
    self, hyperplanes_of, CoveringError, CoveringReport, CoveringVerifyError, Hyperplane,
};
use crate::qfree::{self, exponent_matrix, InstanceError, ProblemInstance};
use crate::residue::{self, ResidueError, SCAN_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("q^q = {q}^{q} does not fit in 127 bits")]
    ModulusTooWide { q: u64 },
    #[error("expected {expected} exponents, got {got}")]
    ExponentCount { expected: usize, got: usize },
    #[error("exponent {0} is not a nonzero residue mod q")]
    BadExponent(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Intersective,
    NotIntersective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    CoveringFails,
    ModQqFails,
    PrimeConditionFails { prime: u64 },
    KEqualsOne,
}

/// `a_index` is a q-th power modulo `modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerWitness {
    pub index: usize,
    pub value: i128,
    pub modulus: u128,
    /// `value mod modulus`.
    pub residue: u128,
    /// A q-th root of `residue`.
    pub root: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeCondition {
    pub prime: u64,
    pub witness: Option<PowerWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub q: u64,
    pub entries: Vec<i128>,
    pub primes: Vec<u64>,
    pub hyperplanes: Vec<Hyperplane>,
    pub condition1: CoveringReport,
    pub condition2: Option<PowerWitness>,
    pub condition3: Vec<PrimeCondition>,
    pub failure_reason: Option<FailureReason>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Largest `q^k` the covering check will enumerate.
    pub covering_bound: u128,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            covering_bound: covering::ENUMERATION_HARD_CAP,
        }
    }
}

/// `q^q`, the modulus of condition 2.
pub fn q_to_the_q(q: u64) -> Result<NaturalModulus, ClassifyError> {
    checked_pow(q as u128, q as u32)
        .and_then(|v| NaturalModulus::new(v).ok())
        .ok_or(ClassifyError::ModulusTooWide { q })
}

pub fn classify(inst: &ProblemInstance) -> Result<ClassificationReport, ClassifyError> {
    classify_with(inst, &ClassifyOptions::default())
}

pub fn classify_with(
    inst: &ProblemInstance,
    opts: &ClassifyOptions,
) -> Result<ClassificationReport, ClassifyError> {
    let q = inst.q();
    let matrix = exponent_matrix(inst);
    let hyperplanes = hyperplanes_of(&matrix)?;
    let condition1 =
        covering::check_covering_bounded(&hyperplanes, q, matrix.k(), opts.covering_bound)?;
    let condition2 = mod_qq_witness(inst)?;
    let condition3 = matrix
        .primes
        .iter()
        .map(|&p| {
            Ok(PrimeCondition {
                prime: p,
                witness: prime_witness(inst, p)?,
            })
        })
        .collect::<Result<Vec<_>, ClassifyError>>()?;

    let failure_reason = if matrix.k() == 1 {
        Some(FailureReason::KEqualsOne)
    } else if !condition1.covers {
        Some(FailureReason::CoveringFails)
    } else if condition2.is_none() {
        Some(FailureReason::ModQqFails)
    } else {
        condition3
            .iter()
            .find(|c| c.witness.is_none())
            .map(|c| FailureReason::PrimeConditionFails { prime: c.prime })
    };
    let verdict = if failure_reason.is_none() {
        Verdict::Intersective
    } else {
        Verdict::NotIntersective
    };
    debug_assert!(!(lower_bound_check(inst) && verdict == Verdict::Intersective));
    Ok(ClassificationReport {
        verdict,
        q,
        entries: inst.entries().to_vec(),
        primes: matrix.primes,
        hyperplanes,
        condition1,
        condition2,
        condition3,
        failure_reason,
    })
}

fn mod_qq_witness(inst: &ProblemInstance) -> Result<Option<PowerWitness>, ClassifyError> {
    let q = inst.q();
    let m = q_to_the_q(q)?;
    for (index, &value) in inst.entries().iter().enumerate() {
        if let Some(root) = residue::is_qth_power_mod(value, q, m)? {
            return Ok(Some(PowerWitness {
                index,
                value,
                modulus: m.get(),
                residue: m.reduce(value),
                root,
            }));
        }
    }
    Ok(None)
}

/// Smallest root of `x^q ≡ a (mod p)` by scan when `p` is small, else
/// some root.
fn root_mod_prime(a: i128, q: u64, p: u64) -> Result<Option<u128>, ResidueError> {
    if (p as u128) <= SCAN_LIMIT {
        return Ok(residue::scan_qth_root(a, q, p).map(u128::from));
    }
    Ok(residue::qth_root_mod_prime(a, q, p)?.map(u128::from))
}

fn prime_witness(inst: &ProblemInstance, p: u64) -> Result<Option<PowerWitness>, ClassifyError> {
    let q = inst.q();
    for (index, &value) in inst.entries().iter().enumerate() {
        if value % p as i128 == 0 {
            continue;
        }
        if let Some(root) = root_mod_prime(value, q, p)? {
            return Ok(Some(PowerWitness {
                index,
                value,
                modulus: p as u128,
                residue: reduce_signed(value, p as u128),
                root,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportVerifyError {
    #[error("report does not describe this instance")]
    InstanceMismatch,
    #[error("support primes or hyperplanes do not match the instance")]
    GeometryMismatch,
    #[error(transparent)]
    Covering(#[from] CoveringVerifyError),
    #[error("witness for entry {index} modulo {modulus} does not check out")]
    BadWitness { index: usize, modulus: u128 },
    #[error("entry {index} is a q-th power modulo {modulus} although the report says none is")]
    MissedWitness { index: usize, modulus: u128 },
    #[error("verdict or failure reason disagrees with the recorded conditions")]
    InconsistentVerdict,
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

impl ClassificationReport {
    /// Re-checks every certificate in the report by direct arithmetic.
    pub fn verify(&self, inst: &ProblemInstance) -> Result<(), ReportVerifyError> {
        let q = inst.q();
        if self.q != q || self.entries != inst.entries() {
            return Err(ReportVerifyError::InstanceMismatch);
        }
        let matrix = exponent_matrix(inst);
        let planes = hyperplanes_of(&matrix).map_err(ClassifyError::from)?;
        if self.primes != matrix.primes || self.hyperplanes != planes {
            return Err(ReportVerifyError::GeometryMismatch);
        }
        self.condition1.verify(&planes, q, matrix.k())?;

        let qq = q_to_the_q(q)?;
        match &self.condition2 {
            Some(w) => check_witness(w, inst, qq.get())?,
            None => {
                // Absence is re-derived by the prime-power route, not the scan.
                for (index, &a) in inst.entries().iter().enumerate() {
                    let found = residue::qth_root_mod_prime_power(a, q, q, q as u32)
                        .map_err(ClassifyError::from)?;
                    if found.is_some() {
                        return Err(ReportVerifyError::MissedWitness {
                            index,
                            modulus: qq.get(),
                        });
                    }
                }
            }
        }

        if self.condition3.len() != matrix.k()
            || self
                .condition3
                .iter()
                .zip(&matrix.primes)
                .any(|(c, &p)| c.prime != p)
        {
            return Err(ReportVerifyError::GeometryMismatch);
        }
        for cond in &self.condition3 {
            let p = cond.prime;
            match &cond.witness {
                Some(w) => {
                    if w.value % p as i128 == 0 {
                        return Err(ReportVerifyError::BadWitness {
                            index: w.index,
                            modulus: p as u128,
                        });
                    }
                    check_witness(w, inst, p as u128)?;
                }
                None => {
                    for (index, &a) in inst.entries().iter().enumerate() {
                        if a % p as i128 != 0
                            && residue::is_qth_power_mod_p(a, q, p).map_err(ClassifyError::from)?
                        {
                            return Err(ReportVerifyError::MissedWitness {
                                index,
                                modulus: p as u128,
                            });
                        }
                    }
                }
            }
        }

        let all_hold = self.condition1.covers
            && self.condition2.is_some()
            && self.condition3.iter().all(|c| c.witness.is_some());
        let expected = if all_hold && matrix.k() >= 2 {
            Verdict::Intersective
        } else {
            Verdict::NotIntersective
        };
        if self.verdict != expected
            || (self.verdict == Verdict::Intersective) != self.failure_reason.is_none()
        {
            return Err(ReportVerifyError::InconsistentVerdict);
        }
        Ok(())
    }
}

fn check_witness(
    w: &PowerWitness,
    inst: &ProblemInstance,
    modulus: u128,
) -> Result<(), ReportVerifyError> {
    let bad = || ReportVerifyError::BadWitness {
        index: w.index,
        modulus,
    };
    let q = inst.q();
    if inst.entries().get(w.index) != Some(&w.value)
        || w.modulus != modulus
        || w.residue != reduce_signed(w.value, modulus)
    {
        return Err(bad());
    }
    let ok = w.root < modulus && pow_mod_u128(w.root, q as u128, modulus) == w.residue;
    if ok {
        Ok(())
    } else {
        Err(bad())
    }
}

/// Outcome of testing every prime `p <= prime_bound` outside
/// `{q, p_1, ..., p_k}` for some entry that is a q-th power mod `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueEverywhereReport {
    pub prime_bound: u64,
    pub primes_checked: u64,
    pub first_failure: Option<u64>,
}

pub fn check_residue_everywhere(
    inst: &ProblemInstance,
    prime_bound: u64,
) -> Result<ResidueEverywhereReport, ClassifyError> {
    let q = inst.q();
    let support = inst.support();
    let mut checked = 0;
    for p in arith::primes_up_to(prime_bound) {
        if p == q || support.binary_search(&p).is_ok() {
            continue;
        }
        checked += 1;
        let mut hit = false;
        for &a in inst.entries() {
            if residue::is_qth_power_mod_p(a, q, p)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(ResidueEverywhereReport {
                prime_bound,
                primes_checked: checked,
                first_failure: Some(p),
            });
        }
    }
    Ok(ResidueEverywhereReport {
        prime_bound,
        primes_checked: checked,
        first_failure: None,
    })
}

/// `true` iff `l <= q`. Such instances can never qualify, since no entry
/// is a perfect q-th power and a covering needs at least `q + 1` hyperplanes.
pub fn lower_bound_check(inst: &ProblemInstance) -> bool {
    inst.len() as u64 <= inst.q()
}

/// Replaces each `a_j` by `rad_q(a_j^c_j)`. Repeated entries are allowed in
/// the result.
pub fn exponentiate_instance(
    inst: &ProblemInstance,
    exponents: &[u64],
) -> Result<ProblemInstance, ClassifyError> {
    let q = inst.q();
    if exponents.len() != inst.len() {
        return Err(ClassifyError::ExponentCount {
            expected: inst.len(),
            got: exponents.len(),
        });
    }
    if let Some(&c) = exponents.iter().find(|&&c| c == 0 || c >= q) {
        return Err(ClassifyError::BadExponent(c));
    }
    let entries = inst
        .entries()
        .iter()
        .zip(exponents)
        .map(|(&a, &c)| qfree::rad_q_of_power(a, c, q))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(qfree::validate_multiset(q as i128, &entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfree::validate_instance;

    #[test]
    fn example_7_251() {
        let inst = validate_instance(3, &[7, 251, 1757, 12299]).unwrap();
        let r = classify(&inst).unwrap();
        assert_eq!(r.verdict, Verdict::Intersective);
        let w2 = r.condition2.as_ref().unwrap();
        assert_eq!(
            (w2.index, w2.value, w2.residue, w2.modulus),
            (1, 251, 8, 27)
        );
        let w3: Vec<(u64, i128)> = r
            .condition3
            .iter()
            .map(|c| (c.prime, c.witness.as_ref().unwrap().value))
            .collect();
        assert_eq!(w3, vec![(7, 251), (251, 7)]);
        r.verify(&inst).unwrap();
    }

    #[test]
    fn example_7_2141() {
        let inst = validate_instance(3, &[7, 2141, 7 * 2141, 49 * 2141]).unwrap();
        let r = classify(&inst).unwrap();
        assert_eq!(r.verdict, Verdict::Intersective);
        assert_eq!(r.condition2.as_ref().unwrap().value, 2141);
        r.verify(&inst).unwrap();
    }

    #[test]
    fn single_prime_support() {
        let inst = validate_instance(3, &[2, 4]).unwrap();
        let r = classify(&inst).unwrap();
        assert_eq!(r.verdict, Verdict::NotIntersective);
        assert_eq!(r.failure_reason, Some(FailureReason::KEqualsOne));
        r.verify(&inst).unwrap();
    }

    #[test]
    fn few_entries_never_qualify() {
        let inst = validate_instance(3, &[7, 251, 1757]).unwrap();
        assert!(lower_bound_check(&inst));
        let r = classify(&inst).unwrap();
        assert_eq!(r.verdict, Verdict::NotIntersective);
        assert_eq!(r.failure_reason, Some(FailureReason::CoveringFails));

        let inst = validate_instance(3, &[7, 251, 1757, 12299]).unwrap();
        assert!(!lower_bound_check(&inst));

        let inst = validate_instance(5, &[2, 3, 6, 12, 18]).unwrap();
        assert!(lower_bound_check(&inst));
        assert_eq!(classify(&inst).unwrap().verdict, Verdict::NotIntersective);
    }

    #[test]
    fn residue_everywhere() {
        let inst = validate_instance(3, &[7, 251, 1757, 12299]).unwrap();
        assert_eq!(
            check_residue_everywhere(&inst, 10_000)
                .unwrap()
                .first_failure,
            None
        );

        let inst = validate_instance(3, &[2]).unwrap();
        assert_eq!(
            check_residue_everywhere(&inst, 100).unwrap().first_failure,
            Some(7)
        );

        let inst = validate_instance(3, &[1757]).unwrap();
        assert_eq!(
            check_residue_everywhere(&inst, 100).unwrap().first_failure,
            Some(13)
        );
    }

    #[test]
    fn exponentiation() {
        let inst = validate_instance(3, &[7, 251, 1757, 12299]).unwrap();
        let squared = exponentiate_instance(&inst, &[2, 2, 2, 2]).unwrap();
        assert_eq!(
            squared.entries(),
            &[49, 251 * 251, 49 * 251 * 251, 7 * 251 * 251]
        );
        assert_eq!(classify(&squared).unwrap().verdict, Verdict::Intersective);
        let same = exponentiate_instance(&inst, &[1, 1, 1, 1]).unwrap();
        assert_eq!(same.entries(), inst.entries());

        let inst = validate_instance(3, &[2, 4]).unwrap();
        let dup = exponentiate_instance(&inst, &[2, 1]).unwrap();
        assert_eq!(dup.entries(), &[4, 4]);
        assert_eq!(classify(&dup).unwrap().verdict, Verdict::NotIntersective);

        assert_eq!(
            exponentiate_instance(&inst, &[3, 1]),
            Err(ClassifyError::BadExponent(3))
        );
    }

    #[test]
    fn forged_reports_are_rejected() {
        let inst = validate_instance(3, &[7, 251, 1757, 12299]).unwrap();
        let good = classify(&inst).unwrap();

        let mut r = good.clone();
        r.condition2.as_mut().unwrap().root = 3;
        assert!(matches!(
            r.verify(&inst),
            Err(ReportVerifyError::BadWitness { .. })
        ));

        let mut r = good.clone();
        r.condition2 = None;
        r.verdict = Verdict::NotIntersective;
        r.failure_reason = Some(FailureReason::ModQqFails);
        assert!(matches!(
            r.verify(&inst),
            Err(ReportVerifyError::MissedWitness { .. })
        ));

        let mut r = good;
        r.verdict = Verdict::NotIntersective;
        assert_eq!(r.verify(&inst), Err(ReportVerifyError::InconsistentVerdict));
    }

    #[test]
    fn wide_q_is_refused() {
        let inst = validate_instance(29, &[2, 3]).unwrap();
        assert_eq!(
            classify(&inst),
            Err(ClassifyError::ModulusTooWide { q: 29 })
        );
    }
}
