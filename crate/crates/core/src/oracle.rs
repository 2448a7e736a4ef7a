//! Brute-force checks that do not go through the decision procedure:
//! solvability scans over bounded moduli, witness moduli for instances
//! without roots everywhere, and empirical residue densities.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, checked_pow, pow_mod_u64, ArithError};
use crate::classifier::{ClassificationReport, ClassifyError, FailureReason, Verdict};
use crate::qfree::ProblemInstance;
use crate::residue::{self, eval_product_mod, ResidueError, SCAN_LIMIT};

/// Largest modulus bound [`scan_solvability`] accepts.
pub const ORACLE_BOUND_CAP: u64 = 1_000_000;
/// Default bound for witness-prime searches.
pub const DEFAULT_SEARCH_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("bound {requested} exceeds the limit {limit}")]
    BoundExceeded { requested: u64, limit: u64 },
    #[error("the instance is intersective; there is no witness to find")]
    NotFailing,
    #[error("no witness found with primes up to {search_bound}")]
    SearchExhausted { search_bound: u64 },
    #[error("report does not belong to this instance")]
    ReportMismatch,
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `x` with `∏ (x^q - a_j) ≡ 0 (mod m)`, smallest first, by scanning `[0, m)`.
pub fn scan_product_root(inst: &ProblemInstance, m: u128) -> Option<u128> {
    (0..m).find(|&x| eval_product_mod(inst.entries(), inst.q(), x, m) == 0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulusRoot {
    pub modulus: u64,
    pub root: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub bound: u64,
    pub checked_moduli: u64,
    pub first_failure: Option<WitnessCertificate>,
    /// One root per prime power that was checked and solved.
    pub roots: Vec<ModulusRoot>,
}

impl OracleVerdict {
    /// Index into `roots` of the first entry that fails to re-check.
    pub fn verify_roots(&self, inst: &ProblemInstance) -> Result<(), usize> {
        let q = inst.q();
        match self.roots.iter().position(|r| {
            eval_product_mod(inst.entries(), q, r.root as u128, r.modulus as u128) != 0
        }) {
            Some(i) => Err(i),
            None => Ok(()),
        }
    }
}

/// Checks every prime power `p^b <= modulus_bound` in increasing order and
/// stops at the first one without a root. That covers every modulus up to
/// the bound, since a composite modulus has a root iff each of its
/// prime-power parts does.
pub fn scan_solvability(
    inst: &ProblemInstance,
    modulus_bound: u64,
) -> Result<OracleVerdict, OracleError> {
    if modulus_bound > ORACLE_BOUND_CAP {
        return Err(OracleError::BoundExceeded {
            requested: modulus_bound,
            limit: ORACLE_BOUND_CAP,
        });
    }
    let q = inst.q();
    let entries = inst.entries();
    let support = inst.support();
    // For primes off the support a root of one factor mod p is simple, so
    // it lifts; remember which factor and where.
    let mut simple: HashMap<u64, (usize, u64)> = HashMap::new();
    let mut roots = Vec::new();
    let mut checked = 0u64;

    for (p, b, m) in arith::prime_powers_up_to(modulus_bound) {
        checked += 1;
        let generic = p != q && support.binary_search(&p).is_err();
        let root = if !generic {
            scan_product_root(inst, m as u128).map(|x| x as u64)
        } else if b == 1 {
            let found = simple_root_mod_prime(entries, q, p)?;
            if let Some((j, x)) = found {
                simple.insert(p, (j, x));
            }
            found.map(|(_, x)| x)
        } else {
            let (j, x0) = simple[&p];
            let x = residue::hensel_lift(entries[j], q, p, x0 as u128, b)
                .map_err(ResidueError::from)?;
            Some(x as u64)
        };
        match root {
            Some(root) => roots.push(ModulusRoot { modulus: m, root }),
            None => {
                return Ok(OracleVerdict {
                    bound: modulus_bound,
                    checked_moduli: checked,
                    first_failure: Some(scanned_certificate(
                        inst,
                        Construction::Direct { m: m as u128 },
                        m as u128,
                    )?),
                    roots,
                })
            }
        }
    }
    Ok(OracleVerdict {
        bound: modulus_bound,
        checked_moduli: checked,
        first_failure: None,
        roots,
    })
}

/// A factor index and a root of that factor modulo a prime off the support.
fn simple_root_mod_prime(
    entries: &[i128],
    q: u64,
    p: u64,
) -> Result<Option<(usize, u64)>, OracleError> {
    for (j, &a) in entries.iter().enumerate() {
        if let Some(x) = residue::qth_root_mod_prime(a, q, p)? {
            return Ok(Some((j, x)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Every factor is unsolvable mod `p^q`, so the product is unsolvable
    /// mod `p^(q l)`.
    FactorwisePrimePower { p: u64, exponent: u32 },
    /// A prime where no entry is a q-th power.
    SearchedPrime { p: u64 },
    /// A modulus found to have no root directly.
    Direct { m: u128 },
}

/// Every `x` in `[start, end)` was evaluated and none was a root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanProof {
    pub start: u128,
    pub end: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstruction {
    /// `p^nu ∥ a` with `1 <= nu < q`: not a q-th power mod `p^(nu+1)`.
    Valuation { nu: u32 },
    /// `p ∤ a` and `a` is not a q-th power mod `p`.
    NonResidueModPrime,
    /// `q ∤ a` and `a` is not a q-th power mod `q^q`.
    NonResidueModQq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorObstruction {
    pub index: usize,
    pub value: i128,
    pub obstruction: Obstruction,
}

/// No factor has a root mod `p^q`, hence the product has none mod `p^(q l)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorwiseProof {
    pub p: u64,
    pub factor_exponent: u32,
    pub factors: Vec<FactorObstruction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    /// Absent when `p^(q l)` does not fit in 128 bits.
    pub modulus: Option<u128>,
    pub construction: Construction,
    pub scan_proof: Option<ScanProof>,
    pub symbolic_proof: Option<FactorwiseProof>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessVerifyError {
    #[error("modulus does not match the construction")]
    ModulusMismatch,
    #[error("{0} is a root")]
    RootFound(u128),
    #[error("scan range is not [0, modulus) or is too large to replay")]
    BadScanRange,
    #[error("factor {0} has no valid obstruction")]
    BadObstruction(usize),
    #[error("certificate carries no proof")]
    NoProof,
}

impl WitnessCertificate {
    pub fn verify(&self, inst: &ProblemInstance) -> Result<(), WitnessVerifyError> {
        let q = inst.q();
        let l = inst.len() as u32;
        let expected = match self.construction {
            Construction::FactorwisePrimePower { p, exponent } => {
                if exponent != q as u32 * l {
                    return Err(WitnessVerifyError::ModulusMismatch);
                }
                checked_pow(p as u128, exponent)
            }
            Construction::SearchedPrime { p } => {
                if !arith::is_prime(p) {
                    return Err(WitnessVerifyError::ModulusMismatch);
                }
                Some(p as u128)
            }
            Construction::Direct { m } => Some(m),
        };
        if expected != self.modulus {
            return Err(WitnessVerifyError::ModulusMismatch);
        }
        if self.scan_proof.is_none() && self.symbolic_proof.is_none() {
            return Err(WitnessVerifyError::NoProof);
        }
        if let Some(scan) = &self.scan_proof {
            let m = self.modulus.ok_or(WitnessVerifyError::BadScanRange)?;
            if scan.start != 0 || scan.end != m || m > SCAN_LIMIT {
                return Err(WitnessVerifyError::BadScanRange);
            }
            if let Some(x) = scan_product_root(inst, m) {
                return Err(WitnessVerifyError::RootFound(x));
            }
        }
        if let Some(proof) = &self.symbolic_proof {
            let Construction::FactorwisePrimePower { p, .. } = self.construction else {
                return Err(WitnessVerifyError::ModulusMismatch);
            };
            if proof.p != p || proof.factor_exponent != q as u32 {
                return Err(WitnessVerifyError::ModulusMismatch);
            }
            if proof.factors.len() != inst.len() {
                return Err(WitnessVerifyError::BadObstruction(proof.factors.len()));
            }
            for (j, f) in proof.factors.iter().enumerate() {
                if f.index != j
                    || f.value != inst.entries()[j]
                    || !obstruction_holds(f.value, q, p, f.obstruction)
                {
                    return Err(WitnessVerifyError::BadObstruction(j));
                }
            }
        }
        Ok(())
    }
}

fn obstruction_holds(a: i128, q: u64, p: u64, ob: Obstruction) -> bool {
    let v = arith::valuation(a.unsigned_abs(), p as u128);
    match ob {
        Obstruction::Valuation { nu } => nu == v && nu >= 1 && (nu as u64) < q,
        Obstruction::NonResidueModPrime => {
            v == 0 && p != q && residue::is_qth_power_mod_p(a, q, p) == Ok(false)
        }
        Obstruction::NonResidueModQq => {
            v == 0 && p == q && residue::qth_root_mod_prime_power(a, q, q, q as u32) == Ok(None)
        }
    }
}

fn scanned_certificate(
    inst: &ProblemInstance,
    construction: Construction,
    m: u128,
) -> Result<WitnessCertificate, OracleError> {
    debug_assert!(scan_product_root(inst, m).is_none());
    Ok(WitnessCertificate {
        modulus: Some(m),
        construction,
        scan_proof: Some(ScanProof { start: 0, end: m }),
        symbolic_proof: None,
    })
}

/// Per-factor obstructions mod `p^q`, if every factor has one.
fn factorwise_proof(inst: &ProblemInstance, p: u64) -> Option<FactorwiseProof> {
    let q = inst.q();
    let factors = inst
        .entries()
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let nu = arith::valuation(value.unsigned_abs(), p as u128);
            let obstruction = if nu > 0 {
                Obstruction::Valuation { nu }
            } else if p == q {
                Obstruction::NonResidueModQq
            } else {
                Obstruction::NonResidueModPrime
            };
            obstruction_holds(value, q, p, obstruction).then_some(FactorObstruction {
                index,
                value,
                obstruction,
            })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(FactorwiseProof {
        p,
        factor_exponent: q as u32,
        factors,
    })
}

fn factorwise_certificate(inst: &ProblemInstance, p: u64) -> Option<WitnessCertificate> {
    let proof = factorwise_proof(inst, p)?;
    let exponent = inst.q() as u32 * inst.len() as u32;
    let modulus = checked_pow(p as u128, exponent);
    let scan_proof = modulus
        .filter(|&m| m <= SCAN_LIMIT)
        .map(|m| ScanProof { start: 0, end: m });
    Some(WitnessCertificate {
        modulus,
        construction: Construction::FactorwisePrimePower { p, exponent },
        scan_proof,
        symbolic_proof: Some(proof),
    })
}

/// Smallest prime `p <= bound`, `p ≡ 1 (mod q)` off the support, where no
/// entry is a q-th power.
fn search_witness_prime(inst: &ProblemInstance, bound: u64) -> Result<Option<u64>, OracleError> {
    let q = inst.q();
    let support = inst.support();
    for p in arith::primes_up_to(bound) {
        if (p - 1) % q != 0 || support.binary_search(&p).is_ok() {
            continue;
        }
        let mut any = false;
        for &a in inst.entries() {
            if residue::is_qth_power_mod_p(a, q, p)? {
                any = true;
                break;
            }
        }
        if !any {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Smallest `b` with no root mod `p^b` and `p^b <= SCAN_LIMIT`.
fn direct_prime_power(inst: &ProblemInstance, p: u64) -> Result<Option<u128>, OracleError> {
    let mut b = 1;
    while let Some(m) = checked_pow(p as u128, b).filter(|&m| m <= SCAN_LIMIT) {
        if residue::local_product_root(inst, p, b)?.is_none() {
            return Ok(Some(m));
        }
        b += 1;
    }
    Ok(None)
}

/// A modulus without roots for an instance the classifier rejected.
///
/// Failures of the mod-`q^q` or per-prime conditions give `p^(q l)`; a
/// failed covering gives a searched prime. The smallest scan-checkable
/// modulus wins. When none is small enough to scan, the smallest
/// prime power `p^b` without roots is used, and failing that the symbolic
/// per-factor proof.
pub fn find_witness(
    inst: &ProblemInstance,
    report: &ClassificationReport,
    search_bound: u64,
) -> Result<WitnessCertificate, OracleError> {
    if search_bound > SCAN_LIMIT as u64 {
        return Err(OracleError::BoundExceeded {
            requested: search_bound,
            limit: SCAN_LIMIT as u64,
        });
    }
    if report.q != inst.q() || report.entries != inst.entries() {
        return Err(OracleError::ReportMismatch);
    }
    if report.verdict == Verdict::Intersective {
        return Err(OracleError::NotFailing);
    }
    let q = inst.q();
    let mut local_primes: Vec<u64> = Vec::new();
    if report.condition2.is_none() {
        local_primes.push(q);
    }
    local_primes.extend(
        report
            .condition3
            .iter()
            .filter(|c| c.witness.is_none())
            .map(|c| c.prime),
    );
    let factorwise: Vec<WitnessCertificate> = local_primes
        .iter()
        .filter_map(|&p| factorwise_certificate(inst, p))
        .collect();

    let mut best: Option<WitnessCertificate> = factorwise
        .iter()
        .filter(|c| c.scan_proof.is_some())
        .min_by_key(|c| c.modulus)
        .cloned();
    let covering_failed =
        !report.condition1.covers || report.failure_reason == Some(FailureReason::KEqualsOne);
    if covering_failed {
        let cap = best
            .as_ref()
            .and_then(|c| c.modulus)
            .map_or(search_bound, |m| (m as u64).min(search_bound));
        if let Some(p) = search_witness_prime(inst, cap)? {
            best = Some(scanned_certificate(
                inst,
                Construction::SearchedPrime { p },
                p as u128,
            )?);
        }
    }
    if let Some(c) = best {
        return Ok(c);
    }
    let mut direct: Option<u128> = None;
    for &p in &local_primes {
        if let Some(m) = direct_prime_power(inst, p)? {
            direct = Some(direct.map_or(m, |d| d.min(m)));
        }
    }
    if let Some(m) = direct {
        return scanned_certificate(inst, Construction::Direct { m }, m);
    }
    factorwise
        .into_iter()
        .min_by_key(|c| c.modulus.unwrap_or(u128::MAX))
        .ok_or(OracleError::SearchExhausted { search_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityScan {
    pub prime_bound: u64,
    pub primes_counted: u64,
    pub primes_with_residue: u64,
    /// `primes_with_residue / primes_counted`; 1 when nothing was counted.
    pub fraction: f64,
}

/// Fraction of primes `p <= prime_bound` off `{q} ∪ support` at which some
/// entry is a q-th power.
pub fn residue_density_scan(
    inst: &ProblemInstance,
    prime_bound: u64,
) -> Result<DensityScan, OracleError> {
    let q = inst.q();
    let support = inst.support();
    let (mut counted, mut hits) = (0u64, 0u64);
    for p in arith::primes_up_to(prime_bound) {
        if p == q || support.binary_search(&p).is_ok() {
            continue;
        }
        counted += 1;
        // Scan rather than the Euler criterion, for independence.
        let powers: Vec<bool> = {
            let mut seen = vec![false; p as usize];
            for x in 1..p {
                seen[pow_mod_u64(x, q, p) as usize] = true;
            }
            seen
        };
        if inst
            .entries()
            .iter()
            .any(|&a| powers[arith::reduce_signed(a, p as u128) as usize])
        {
            hits += 1;
        }
    }
    Ok(DensityScan {
        prime_bound,
        primes_counted: counted,
        primes_with_residue: hits,
        fraction: if counted == 0 {
            1.0
        } else {
            hits as f64 / counted as f64
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::classify;
    use crate::qfree::validate_instance;

    fn inst(q: i128, a: &[i128]) -> ProblemInstance {
        validate_instance(q, a).unwrap()
    }

    #[test]
    fn scan_first_example_has_no_failure() {
        let i = inst(3, &[7, 251, 1757, 12299]);
        let v = scan_solvability(&i, 10_000).unwrap();
        assert!(v.first_failure.is_none());
        assert_eq!(
            v.checked_moduli as usize,
            arith::prime_powers_up_to(10_000).len()
        );
        v.verify_roots(&i).unwrap();
    }

    #[test]
    fn scan_finds_failures() {
        let v = scan_solvability(&inst(3, &[2, 4]), 100).unwrap();
        assert_eq!(v.first_failure.unwrap().modulus, Some(7));

        let i = inst(3, &[7, 251, 1757]);
        let v = scan_solvability(&i, 10_000).unwrap();
        let w = v.first_failure.as_ref().unwrap();
        w.verify(&i).unwrap();
        v.verify_roots(&i).unwrap();
    }

    #[test]
    fn scan_refuses_large_bounds() {
        assert!(matches!(
            scan_solvability(&inst(3, &[2]), ORACLE_BOUND_CAP + 1),
            Err(OracleError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn witnesses_for_examples() {
        let i = inst(3, &[2, 4]);
        let w = find_witness(&i, &classify(&i).unwrap(), DEFAULT_SEARCH_BOUND).unwrap();
        assert_eq!(w.modulus, Some(7));
        assert_eq!(w.construction, Construction::SearchedPrime { p: 7 });
        w.verify(&i).unwrap();

        let i = inst(3, &[7]);
        let w = find_witness(&i, &classify(&i).unwrap(), DEFAULT_SEARCH_BOUND).unwrap();
        assert_eq!(w.modulus, Some(13));
        w.verify(&i).unwrap();
    }

    #[test]
    fn witness_for_mod_qq_failure() {
        // Covering and the per-prime conditions hold, but no entry is a
        // cube mod 27.
        let i = inst(3, &[2, 3, 6, 12]);
        let r = classify(&i).unwrap();
        assert_eq!(r.failure_reason, Some(FailureReason::ModQqFails));
        let w = find_witness(&i, &r, DEFAULT_SEARCH_BOUND).unwrap();
        assert_eq!(
            w.construction,
            Construction::FactorwisePrimePower { p: 3, exponent: 12 }
        );
        assert_eq!(w.modulus, Some(3u128.pow(12)));
        assert!(w.scan_proof.is_some());
        w.verify(&i).unwrap();
    }

    #[test]
    fn symbolic_proof_when_modulus_is_huge() {
        let i = inst(3, &[2, 3, 6, 12]);
        let proof = factorwise_certificate(&i, 3).unwrap();
        let mut big = proof.clone();
        big.scan_proof = None;
        big.verify(&i).unwrap();

        let mut forged = big.clone();
        forged.symbolic_proof.as_mut().unwrap().factors[0].obstruction =
            Obstruction::Valuation { nu: 1 };
        assert_eq!(
            forged.verify(&i),
            Err(WitnessVerifyError::BadObstruction(0))
        );
    }

    #[test]
    fn forged_witness_is_rejected() {
        let i = inst(3, &[7, 251, 1757, 12299]);
        let fake = WitnessCertificate {
            modulus: Some(13),
            construction: Construction::SearchedPrime { p: 13 },
            scan_proof: Some(ScanProof { start: 0, end: 13 }),
            symbolic_proof: None,
        };
        assert!(matches!(
            fake.verify(&i),
            Err(WitnessVerifyError::RootFound(_))
        ));
    }

    #[test]
    fn intersective_instances_have_no_witness() {
        let i = inst(3, &[7, 251, 1757, 12299]);
        assert_eq!(
            find_witness(&i, &classify(&i).unwrap(), 1000),
            Err(OracleError::NotFailing)
        );
    }

    #[test]
    fn densities() {
        let d = residue_density_scan(&inst(3, &[7, 251, 1757, 12299]), 10_000).unwrap();
        assert_eq!(d.fraction, 1.0);
        let d = residue_density_scan(&inst(3, &[7]), 10_000).unwrap();
        assert_eq!((d.primes_with_residue, d.primes_counted), (810, 1227));
        let d = residue_density_scan(&inst(3, &[7]), 2).unwrap();
        assert_eq!(d.primes_counted, 1);
    }
}
