//! The two two-prime families, pair mining, and exponentiation variants.
//!
//! For distinct primes `p1, p2` the q = 3 family is
//! `[p1, p2, p1 p2, p1^2 p2]` and the q = 5 family is
//! `[p1, p2, p1 p2, p1^2 p2, p1 p2^2, p1^4 p2]`. In both the hyperplanes
//! cover `F_q^2`, so the verdict reduces to: some entry is a q-th power
//! mod `q^q`, `p1` is a q-th power mod `p2`, and `p2` is one mod `p1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, checked_pow, ArithError};
use crate::classifier::{
    classify, exponentiate_instance, ClassificationReport, ClassifyError, Verdict,
};
use crate::oracle::{self, OracleError};
use crate::qfree::{validate_instance, InstanceError, ProblemInstance};
use crate::residue::{self, ResidueError, SCAN_LIMIT};

/// Modulus bound of the oracle spot-check attached to mined pairs.
pub const SPOT_CHECK_BOUND: u64 = 1_000;
/// Above this many exponent vectors only a sample is classified.
pub const EXHAUSTIVE_VARIANT_CAP: u128 = 256;
pub const VARIANT_SAMPLE_SIZE: u128 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("family is only defined for q = 3 and q = 5, not {0}")]
    UnsupportedQ(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p1 and p2 must differ")]
    EqualPrimes,
    #[error("{p} equals q")]
    PrimeIsQ { p: u64 },
    #[error("classifier verdict for ({p1}, {p2}) disagrees with the reduced conditions")]
    FamilyConditionDisagreement { p1: u64, p2: u64 },
    #[error("hyperplanes for ({p1}, {p2}) do not cover")]
    CoveringMissing { p1: u64, p2: u64 },
    #[error("exponent variants do not share one verdict")]
    NonUniformVerdict,
    #[error("oracle found a modulus without roots for the mined pair ({p1}, {p2})")]
    SpotCheckFailed { p1: u64, p2: u64 },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// The reduced conditions, each evaluated on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyConditions {
    /// Index of the first entry that is a q-th power mod `q^q`.
    pub power_mod_qq: Option<usize>,
    pub p1_power_mod_p2: bool,
    pub p2_power_mod_p1: bool,
}

impl FamilyConditions {
    pub fn holds(&self) -> bool {
        self.power_mod_qq.is_some() && self.p1_power_mod_p2 && self.p2_power_mod_p1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub p1: u64,
    pub p2: u64,
    pub instance: ProblemInstance,
    pub report: ClassificationReport,
    pub conditions: FamilyConditions,
}

/// Exponent rows `(e1, e2)` of the family members `p1^e1 p2^e2`.
pub fn family_exponents(q: u64) -> Result<&'static [(u32, u32)], GenerateError> {
    match q {
        3 => Ok(&[(1, 0), (0, 1), (1, 1), (2, 1)]),
        5 => Ok(&[(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (4, 1)]),
        _ => Err(GenerateError::UnsupportedQ(q)),
    }
}

pub fn family_entries(q: u64, p1: u64, p2: u64) -> Result<Vec<i128>, GenerateError> {
    for p in [p1, p2] {
        if !arith::is_prime(p) {
            return Err(GenerateError::NotPrime(p));
        }
        if p == q {
            return Err(GenerateError::PrimeIsQ { p });
        }
    }
    if p1 == p2 {
        return Err(GenerateError::EqualPrimes);
    }
    family_exponents(q)?
        .iter()
        .map(|&(e1, e2)| {
            checked_pow(p1 as u128, e1)
                .and_then(|a| a.checked_mul(checked_pow(p2 as u128, e2)?))
                .and_then(|v| i128::try_from(v).ok())
                .ok_or(GenerateError::Arith(ArithError::Overflow("family entry")))
        })
        .collect()
}

/// q-th power test by scanning when the modulus is small.
fn is_power_mod_prime(a: i128, q: u64, p: u64) -> Result<bool, ResidueError> {
    if (p as u128) <= SCAN_LIMIT {
        Ok(residue::scan_qth_root(a, q, p).is_some())
    } else {
        residue::is_qth_power_mod_p(a, q, p)
    }
}

pub fn family_conditions(
    q: u64,
    p1: u64,
    p2: u64,
    entries: &[i128],
) -> Result<FamilyConditions, GenerateError> {
    let qq = checked_pow(q as u128, q as u32).expect("q^q fits for q <= 5") as u64;
    Ok(FamilyConditions {
        power_mod_qq: entries
            .iter()
            .position(|&a| residue::scan_qth_root(a, q, qq).is_some()),
        p1_power_mod_p2: is_power_mod_prime(p1 as i128, q, p2)?,
        p2_power_mod_p1: is_power_mod_prime(p2 as i128, q, p1)?,
    })
}

fn family(q: u64, p1: u64, p2: u64) -> Result<FamilyReport, GenerateError> {
    let entries = family_entries(q, p1, p2)?;
    let instance = validate_instance(q as i128, &entries)?;
    let report = classify(&instance)?;
    if !report.condition1.covers {
        return Err(GenerateError::CoveringMissing { p1, p2 });
    }
    let conditions = family_conditions(q, p1, p2, &entries)?;
    if conditions.holds() != (report.verdict == Verdict::Intersective) {
        return Err(GenerateError::FamilyConditionDisagreement { p1, p2 });
    }
    Ok(FamilyReport {
        p1,
        p2,
        instance,
        report,
        conditions,
    })
}

pub fn family_q3(p1: u64, p2: u64) -> Result<FamilyReport, GenerateError> {
    family(3, p1, p2)
}

pub fn family_q5(p1: u64, p2: u64) -> Result<FamilyReport, GenerateError> {
    family(5, p1, p2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub bound: u64,
    pub checked_moduli: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinedPair {
    pub family: FamilyReport,
    pub spot_check: SpotCheck,
}

/// All pairs `p1 < p2 <= search_bound` (both `≠ q`) whose family is
/// intersective, ordered by `p1` and then `p2`.
pub fn mine_pairs(q: u64, search_bound: u64) -> Result<Vec<MinedPair>, GenerateError> {
    family_exponents(q)?;
    let primes: Vec<u64> = arith::primes_up_to(search_bound)
        .into_iter()
        .filter(|&p| p != q)
        .collect();
    let strata: Vec<Vec<MinedPair>> = primes
        .par_iter()
        .enumerate()
        .map(|(i, &p1)| {
            let mut found = Vec::new();
            for &p2 in &primes[i + 1..] {
                // Cheap prefilter before the full classification.
                if !residue::is_qth_power_mod_p(p1 as i128, q, p2)?
                    || !residue::is_qth_power_mod_p(p2 as i128, q, p1)?
                {
                    continue;
                }
                let family = family(q, p1, p2)?;
                if family.report.verdict != Verdict::Intersective {
                    continue;
                }
                let scan = oracle::scan_solvability(&family.instance, SPOT_CHECK_BOUND)?;
                if scan.first_failure.is_some() {
                    return Err(GenerateError::SpotCheckFailed { p1, p2 });
                }
                found.push(MinedPair {
                    family,
                    spot_check: SpotCheck {
                        bound: scan.bound,
                        checked_moduli: scan.checked_moduli,
                    },
                });
            }
            Ok(found)
        })
        .collect::<Result<_, GenerateError>>()?;
    let mut pairs: Vec<MinedPair> = strata.into_iter().flatten().collect();
    pairs.sort_by_key(|m| (m.family.p1, m.family.p2));
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedVariant {
    pub exponents: Vec<u64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    /// `(q - 1)^l`, or `None` if that overflows.
    pub total: Option<u128>,
    pub exhaustive: bool,
    pub verdict: Verdict,
    pub exponents: Vec<Vec<u64>>,
    pub variants: Vec<ProblemInstance>,
    pub skipped: Vec<SkippedVariant>,
}

/// Exponent vector number `index` in mixed radix, digits in `1..q`.
fn exponent_vector(mut index: u128, q: u64, l: usize) -> Vec<u64> {
    let base = (q - 1) as u128;
    let mut c = vec![1; l];
    for slot in c.iter_mut().rev() {
        *slot = (index % base) as u64 + 1;
        index /= base;
    }
    c
}

/// Replaces the entries by `rad_q(a_j^c_j)` for every `c` in `(F_q^*)^l`
/// (or a deterministic sample of 64 when there are more than 256) and
/// checks that all variants share the original verdict.
pub fn expand_by_exponentiation(inst: &ProblemInstance) -> Result<Expansion, GenerateError> {
    let q = inst.q();
    let l = inst.len();
    let verdict = classify(inst)?.verdict;
    let total = ((q - 1) as u128).checked_pow(l as u32);
    let exhaustive = total.is_some_and(|t| t <= EXHAUSTIVE_VARIANT_CAP);
    let indices: Vec<u128> = match total {
        Some(t) if exhaustive => (0..t).collect(),
        Some(t) => (0..VARIANT_SAMPLE_SIZE)
            .map(|i| i * t / VARIANT_SAMPLE_SIZE)
            .collect(),
        // Sample along the first 127 bits of the index space.
        None => (0..VARIANT_SAMPLE_SIZE)
            .map(|i| i * (u128::MAX / VARIANT_SAMPLE_SIZE))
            .collect(),
    };
    let mut out = Expansion {
        total,
        exhaustive,
        verdict,
        exponents: Vec::new(),
        variants: Vec::new(),
        skipped: Vec::new(),
    };
    for index in indices {
        let c = exponent_vector(index, q, l);
        match exponentiate_instance(inst, &c) {
            Ok(variant) => {
                if classify(&variant)?.verdict != verdict {
                    return Err(GenerateError::NonUniformVerdict);
                }
                out.exponents.push(c);
                out.variants.push(variant);
            }
            Err(e @ ClassifyError::Instance(InstanceError::Arith(_))) => {
                out.skipped.push(SkippedVariant {
                    exponents: c,
                    note: e.to_string(),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}
