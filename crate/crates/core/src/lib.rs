//! Decide whether `∏ (x^q - a_j)` has a root modulo every positive integer.
//!
//! ```
//! use qsective::{classifier, qfree};
//!
//! let inst = qfree::validate_instance(3, &[7, 251, 1757, 12299]).unwrap();
//! let report = classifier::classify(&inst).unwrap();
//! assert_eq!(report.verdict, classifier::Verdict::Intersective);
//! report.verify(&inst).unwrap();
//! ```

pub mod arith;
pub mod classifier;
pub mod cli;
pub mod covering;
pub mod generate;
pub mod oracle;
pub mod qfree;
pub mod residue;

use thiserror::Error;

use arith::ArithError;
use classifier::ClassifyError;
use covering::CoveringError;
use generate::GenerateError;
use oracle::OracleError;
use qfree::InstanceError;
use residue::{HenselError, ResidueError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Hensel(#[from] HenselError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("{0}")]
    Usage(String),
    #[error("certificate check failed: {0}")]
    Verification(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit status for an error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Internal = 1,
    Validation = 2,
    BoundRefusal = 3,
}

impl Error {
    pub fn exit_kind(&self) -> ExitKind {
        match self {
            Error::Instance(e) => instance_kind(e),
            Error::Arith(e) => arith_kind(e),
            Error::Covering(e) => covering_kind(e),
            Error::Residue(e) => residue_kind(e),
            Error::Hensel(e) => hensel_kind(e),
            Error::Classify(e) => classify_kind(e),
            Error::Oracle(e) => oracle_kind(e),
            Error::Generate(e) => generate_kind(e),
            Error::Usage(_) => ExitKind::Validation,
            // Malformed input documents are the caller's problem.
            Error::Json(_) => ExitKind::Validation,
            Error::Verification(_) | Error::Io(_) => ExitKind::Internal,
        }
    }
}

fn arith_kind(e: &ArithError) -> ExitKind {
    match e {
        ArithError::ModulusTooWide(_)
        | ArithError::Overflow(_)
        | ArithError::TooLargeToFactor(_) => ExitKind::BoundRefusal,
        ArithError::ModulusTooSmall(_)
        | ArithError::Zero
        | ArithError::NotCoprime(..)
        | ArithError::NotInvertible(..) => ExitKind::Validation,
    }
}

fn instance_kind(e: &InstanceError) -> ExitKind {
    match e {
        InstanceError::Arith(a) => arith_kind(a),
        _ => ExitKind::Validation,
    }
}

fn covering_kind(e: &CoveringError) -> ExitKind {
    match e {
        CoveringError::BoundExceeded { .. } => ExitKind::BoundRefusal,
        CoveringError::DimensionTooSmall(_) => ExitKind::Validation,
        _ => ExitKind::Internal,
    }
}

fn hensel_kind(e: &HenselError) -> ExitKind {
    match e {
        HenselError::Arith(a) => arith_kind(a),
        HenselError::NoConvergence => ExitKind::Internal,
        _ => ExitKind::Validation,
    }
}

fn residue_kind(e: &ResidueError) -> ExitKind {
    match e {
        ResidueError::NotPrime(_)
        | ResidueError::PrimeDividesA { .. }
        | ResidueError::ZeroModulus => ExitKind::Validation,
        ResidueError::SearchBudget { .. } => ExitKind::BoundRefusal,
        ResidueError::Hensel(h) => hensel_kind(h),
        ResidueError::Arith(a) => arith_kind(a),
    }
}

fn classify_kind(e: &ClassifyError) -> ExitKind {
    match e {
        ClassifyError::Covering(c) => covering_kind(c),
        ClassifyError::Residue(r) => residue_kind(r),
        ClassifyError::Arith(a) => arith_kind(a),
        ClassifyError::Instance(i) => instance_kind(i),
        ClassifyError::ModulusTooWide { .. } => ExitKind::BoundRefusal,
        ClassifyError::ExponentCount { .. } | ClassifyError::BadExponent(_) => ExitKind::Validation,
    }
}

fn oracle_kind(e: &OracleError) -> ExitKind {
    match e {
        OracleError::BoundExceeded { .. } | OracleError::SearchExhausted { .. } => {
            ExitKind::BoundRefusal
        }
        OracleError::NotFailing | OracleError::ReportMismatch => ExitKind::Validation,
        OracleError::Residue(r) => residue_kind(r),
        OracleError::Classify(c) => classify_kind(c),
        OracleError::Arith(a) => arith_kind(a),
    }
}

fn generate_kind(e: &GenerateError) -> ExitKind {
    match e {
        GenerateError::UnsupportedQ(_)
        | GenerateError::NotPrime(_)
        | GenerateError::EqualPrimes
        | GenerateError::PrimeIsQ { .. } => ExitKind::Validation,
        GenerateError::Instance(i) => instance_kind(i),
        GenerateError::Classify(c) => classify_kind(c),
        GenerateError::Oracle(o) => oracle_kind(o),
        GenerateError::Residue(r) => residue_kind(r),
        GenerateError::Arith(a) => arith_kind(a),
        _ => ExitKind::Internal,
    }
}
