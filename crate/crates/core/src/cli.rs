//! The `qsective` command line.
//!
//! Every command prints one JSON document (mining prints one per line)
//! that starts with `"qsective_schema":1` and a `"kind"` tag.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::arith::{checked_pow, NaturalModulus};
use crate::classifier::{self, ClassificationReport, Verdict};
use crate::covering::{self, Hyperplane};
use crate::generate::{self, FamilyReport, MinedPair};
use crate::oracle::{self, OracleVerdict, WitnessCertificate};
use crate::qfree::{self, validate_instance, ProblemInstance};
use crate::residue::{self, RootCertificate};
use crate::{Error, ExitKind};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_ORACLE_BOUND: u64 = 100_000;

fn parse_int<T: FromStr>(s: &str) -> Result<T, String> {
    if s.is_empty() {
        return Err("empty integer".into());
    }
    if s.contains('+') || s.chars().any(char::is_whitespace) {
        return Err(format!(
            "'{s}': signs other than '-' and whitespace are not allowed"
        ));
    }
    s.parse::<T>()
        .map_err(|_| format!("'{s}' is not a decimal integer in range"))
}

/// A comma-separated integer list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<i128>);

fn parse_list(s: &str) -> Result<IntList, String> {
    s.split(',')
        .map(parse_int::<i128>)
        .collect::<Result<_, _>>()
        .map(IntList)
}

#[derive(Debug, Parser)]
#[command(
    name = "qsective",
    version,
    about = "Roots of ∏(x^q - a_j) modulo every integer"
)]
pub struct Cli {
    /// Print a short human summary on standard error.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Re-parse the emitted JSON and re-check its certificates.
    #[arg(long, global = true)]
    pub verify: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long, value_parser = parse_int::<i128>, allow_hyphen_values = true)]
    pub q: i128,
    /// Comma-separated entries, e.g. `7,251,1757,12299`.
    #[arg(long = "a", value_parser = parse_list, allow_hyphen_values = true)]
    pub a: IntList,
}

impl InstanceArgs {
    fn instance(&self) -> Result<ProblemInstance, Error> {
        Ok(validate_instance(self.q, &self.a.0)?)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    Q3,
    Q5,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide the instance and print the report with its certificates.
    Classify {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BOUND, value_parser = parse_int::<u64>)]
        oracle_bound: u64,
        /// Also run the brute-force oracle and the prime residue scan.
        #[arg(long)]
        cross_check: bool,
    },
    /// Check every prime power up to the bound for a root.
    Oracle {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_parser = parse_int::<u64>)]
        bound: u64,
    },
    /// A modulus without roots for a non-intersective instance.
    Witness {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = oracle::DEFAULT_SEARCH_BOUND, value_parser = parse_int::<u64>)]
        search_bound: u64,
    },
    /// q-free part of an integer.
    Radq {
        #[arg(long, value_parser = parse_int::<u64>)]
        q: u64,
        #[arg(long, value_parser = parse_int::<i128>, allow_hyphen_values = true)]
        n: i128,
    },
    /// Covering check for the instance's hyperplanes.
    Covering {
        #[command(flatten)]
        inst: InstanceArgs,
    },
    /// Is `a` a q-th power modulo `m`?
    Residue {
        #[arg(long, value_parser = parse_int::<u64>)]
        q: u64,
        #[arg(long = "a", value_parser = parse_int::<i128>, allow_hyphen_values = true)]
        a: i128,
        #[arg(long = "mod", value_parser = parse_int::<u128>)]
        modulus: u128,
    },
    /// Lift a root of `x^q ≡ a` to modulus `p^b`.
    Hensel {
        #[arg(long, value_parser = parse_int::<u64>)]
        q: u64,
        #[arg(long = "a", value_parser = parse_int::<i128>, allow_hyphen_values = true)]
        a: i128,
        #[arg(long, value_parser = parse_int::<u64>)]
        p: u64,
        #[arg(long, value_parser = parse_int::<u32>)]
        b: u32,
    },
    /// A root of the product modulo `m`.
    Rootmod {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_parser = parse_int::<u128>)]
        m: u128,
    },
    /// Build and classify one member of a two-prime family.
    Generate {
        #[arg(value_enum)]
        family: Family,
        #[arg(long, value_parser = parse_int::<u64>)]
        p1: u64,
        #[arg(long, value_parser = parse_int::<u64>)]
        p2: u64,
    },
    /// Stream every intersective family pair up to the bound.
    Mine {
        #[arg(long, value_parser = parse_int::<u64>)]
        q: u64,
        #[arg(long, value_parser = parse_int::<u64>)]
        bound: u64,
    },
    /// Smallest number of hyperplanes covering `F_q^k`.
    Minlc {
        #[arg(long, value_parser = parse_int::<u64>)]
        q: u64,
        #[arg(long, value_parser = parse_int::<usize>)]
        k: usize,
    },
    /// Re-check the certificates in a document printed earlier (`-` for stdin).
    Verify {
        #[arg(long)]
        input: String,
    },
}

#[derive(Debug, Deserialize)]
struct Header {
    qsective_schema: u32,
    kind: String,
}

/// Serializes `body` (a JSON object) behind the schema and kind fields.
pub fn envelope<T: Serialize>(kind: &str, body: &T) -> Result<String, Error> {
    let inner = serde_json::to_string(body)?;
    let rest = inner
        .strip_prefix('{')
        .ok_or_else(|| Error::Usage("document body is not an object".into()))?;
    let sep = if rest == "}" { "" } else { "," };
    Ok(format!(
        "{{\"qsective_schema\":{SCHEMA_VERSION},\"kind\":\"{kind}\"{sep}{rest}"
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossCheck {
    pub oracle_bound: u64,
    pub oracle_checked_moduli: u64,
    pub oracle_failure_modulus: Option<u128>,
    pub witness: Option<WitnessCertificate>,
    /// Intersective and no failure, or not intersective and either a
    /// failure below the bound or a witness above it.
    pub oracle_agrees: bool,
    pub residue_prime_bound: u64,
    pub residue_first_failure: Option<u64>,
    /// Some entry is a q-th power at every prime off the support exactly
    /// when the hyperplanes cover.
    pub residue_agrees: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyOutput {
    pub report: ClassificationReport,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cross_check: Option<CrossCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleOutput {
    pub q: u64,
    pub entries: Vec<i128>,
    pub verdict: OracleVerdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessOutput {
    pub q: u64,
    pub entries: Vec<i128>,
    pub failure_reason: Option<classifier::FailureReason>,
    pub witness: WitnessCertificate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadqOutput {
    pub q: u64,
    pub n: i128,
    pub signed: i128,
    pub abs: i128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringOutput {
    pub q: u64,
    pub entries: Vec<i128>,
    pub primes: Vec<u64>,
    pub hyperplanes: Vec<Hyperplane>,
    pub vectors: u128,
    pub covers: bool,
    pub uncovered_vector: Option<Vec<u32>>,
    /// Vectors assigned to each hyperplane.
    pub assignment_counts: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidueOutput {
    pub q: u64,
    pub a: i128,
    pub modulus: u128,
    pub is_power: bool,
    pub root: Option<u128>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HenselOutput {
    pub q: u64,
    pub a: i128,
    pub p: u64,
    pub b: u32,
    pub seed: Option<u128>,
    pub seed_modulus: Option<u128>,
    pub root: Option<u128>,
    pub modulus: Option<u128>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootmodOutput {
    pub q: u64,
    pub entries: Vec<i128>,
    pub m: u128,
    pub certificate: Option<RootCertificate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinlcOutput {
    pub q: u64,
    pub k: usize,
    pub min_covering_size: usize,
    pub covering: Vec<Hyperplane>,
}

/// Parses and runs one invocation, writing the JSON document(s) to `out`
/// and diagnostics to `err`. Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitKind::Validation as i32
            } else {
                0
            };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        // The reader went away (`qsective mine ... | head`).
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let kind = e.exit_kind();
            let doc = ErrorOutput {
                exit_code: kind as i32,
                message: e.to_string(),
            };
            if let Ok(line) = envelope("error", &doc) {
                let _ = writeln!(out, "{line}");
            }
            let _ = writeln!(err, "error: {e}");
            kind as i32
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorOutput {
    exit_code: i32,
    message: String,
}

fn emit(cli: &Cli, out: &mut dyn Write, doc: String) -> Result<(), Error> {
    if cli.verify {
        verify_document(&doc)?;
    }
    writeln!(out, "{doc}")?;
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Error> {
    match &cli.command {
        Command::Classify {
            inst,
            oracle_bound,
            cross_check,
        } => {
            let instance = inst.instance()?;
            let report = classifier::classify(&instance)?;
            let cross = if *cross_check {
                Some(run_cross_check(&instance, &report, *oracle_bound)?)
            } else {
                None
            };
            if cli.pretty {
                writeln!(
                    err,
                    "q={} entries={:?}: {:?} ({:?})",
                    report.q, report.entries, report.verdict, report.failure_reason
                )?;
            }
            let output = ClassifyOutput {
                report,
                warnings: instance.warnings(),
                cross_check: cross,
            };
            emit(cli, out, envelope("classification_report", &output)?)
        }
        Command::Oracle { inst, bound } => {
            let instance = inst.instance()?;
            let verdict = oracle::scan_solvability(&instance, *bound)?;
            if cli.pretty {
                writeln!(
                    err,
                    "checked {} prime powers up to {}; first failure: {:?}",
                    verdict.checked_moduli,
                    bound,
                    verdict.first_failure.as_ref().and_then(|w| w.modulus)
                )?;
            }
            let output = OracleOutput {
                q: instance.q(),
                entries: instance.entries().to_vec(),
                verdict,
            };
            emit(cli, out, envelope("oracle_verdict", &output)?)
        }
        Command::Witness { inst, search_bound } => {
            let instance = inst.instance()?;
            let report = classifier::classify(&instance)?;
            let witness = oracle::find_witness(&instance, &report, *search_bound)?;
            if cli.pretty {
                writeln!(err, "witness modulus: {:?}", witness.modulus)?;
            }
            let output = WitnessOutput {
                q: instance.q(),
                entries: instance.entries().to_vec(),
                failure_reason: report.failure_reason,
                witness,
            };
            emit(cli, out, envelope("witness_certificate", &output)?)
        }
        Command::Radq { q, n } => {
            check_odd_prime(*q)?;
            let output = RadqOutput {
                q: *q,
                n: *n,
                signed: qfree::rad_q_signed(*n, *q)?,
                abs: qfree::rad_q_abs(*n, *q)?,
            };
            emit(cli, out, envelope("radq", &output)?)
        }
        Command::Covering { inst } => {
            let instance = inst.instance()?;
            let matrix = qfree::exponent_matrix(&instance);
            let planes = covering::hyperplanes_of(&matrix)?;
            let report = covering::check_covering(&planes, instance.q(), matrix.k())?;
            let output = CoveringOutput {
                q: instance.q(),
                entries: instance.entries().to_vec(),
                primes: matrix.primes.clone(),
                vectors: instance.covering_space_size().unwrap_or(u128::MAX),
                covers: report.covers,
                uncovered_vector: report.uncovered_vector.clone(),
                assignment_counts: report.assignment_counts(planes.len()),
                hyperplanes: planes,
            };
            if cli.pretty {
                writeln!(err, "covers: {}", output.covers)?;
            }
            emit(cli, out, envelope("covering_report", &output)?)
        }
        Command::Residue { q, a, modulus } => {
            check_odd_prime(*q)?;
            let m = NaturalModulus::new(*modulus)?;
            let root = residue::is_qth_power_mod(*a, *q, m)?;
            let output = ResidueOutput {
                q: *q,
                a: *a,
                modulus: *modulus,
                is_power: root.is_some(),
                root,
            };
            emit(cli, out, envelope("residue", &output)?)
        }
        Command::Hensel { q, a, p, b } => {
            check_odd_prime(*q)?;
            let output = hensel_command(*q, *a, *p, *b)?;
            if cli.pretty {
                writeln!(err, "root: {:?} failure: {:?}", output.root, output.failure)?;
            }
            emit(cli, out, envelope("hensel", &output)?)
        }
        Command::Rootmod { inst, m } => {
            let instance = inst.instance()?;
            let certificate = residue::root_mod(&instance, *m)?;
            let output = RootmodOutput {
                q: instance.q(),
                entries: instance.entries().to_vec(),
                m: *m,
                certificate,
            };
            emit(cli, out, envelope("root_certificate", &output)?)
        }
        Command::Generate { family, p1, p2 } => {
            let report = match family {
                Family::Q3 => generate::family_q3(*p1, *p2)?,
                Family::Q5 => generate::family_q5(*p1, *p2)?,
            };
            if cli.pretty {
                writeln!(err, "({p1}, {p2}): {:?}", report.report.verdict)?;
            }
            emit(cli, out, envelope("family_report", &report)?)
        }
        Command::Mine { q, bound } => {
            let pairs = generate::mine_pairs(*q, *bound)?;
            for (i, pair) in pairs.iter().enumerate() {
                emit(cli, out, envelope("mined_pair", pair)?)?;
                if cli.pretty {
                    writeln!(err, "[{}] ({}, {})", i + 1, pair.family.p1, pair.family.p2)?;
                }
            }
            Ok(())
        }
        Command::Minlc { q, k } => {
            check_odd_prime(*q)?;
            let (size, planes) = covering::min_covering(*q, *k)?;
            let output = MinlcOutput {
                q: *q,
                k: *k,
                min_covering_size: size,
                covering: planes,
            };
            emit(cli, out, envelope("min_covering", &output)?)
        }
        Command::Verify { input } => {
            let mut text = String::new();
            if input == "-" {
                std::io::stdin().read_to_string(&mut text)?;
            } else {
                text = std::fs::read_to_string(input)?;
            }
            let mut kinds = Vec::new();
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                kinds.push(verify_document(line)?);
            }
            if kinds.is_empty() {
                return Err(Error::Usage("no documents in input".into()));
            }
            #[derive(Serialize)]
            struct Verified {
                documents: usize,
                kinds: Vec<String>,
            }
            let doc = envelope(
                "verification",
                &Verified {
                    documents: kinds.len(),
                    kinds,
                },
            )?;
            writeln!(out, "{doc}")?;
            Ok(())
        }
    }
}

fn check_odd_prime(q: u64) -> Result<(), Error> {
    if q == 2 || !crate::arith::is_prime(q) {
        return Err(qfree::InstanceError::NotOddPrime(q as i128).into());
    }
    Ok(())
}

fn run_cross_check(
    inst: &ProblemInstance,
    report: &ClassificationReport,
    bound: u64,
) -> Result<CrossCheck, Error> {
    let scan = oracle::scan_solvability(inst, bound)?;
    let failure = scan.first_failure.as_ref().and_then(|w| w.modulus);
    let (witness, oracle_agrees) = match report.verdict {
        Verdict::Intersective => (None, failure.is_none()),
        Verdict::NotIntersective => {
            let w = oracle::find_witness(inst, report, oracle::DEFAULT_SEARCH_BOUND)?;
            let agrees = failure.is_some() || w.modulus.is_none_or(|m| m > bound as u128);
            (Some(w), agrees)
        }
    };
    let everywhere = classifier::check_residue_everywhere(inst, bound)?;
    let residue_agrees = match everywhere.first_failure {
        // Only a failure is conclusive at a finite bound.
        Some(_) => !report.condition1.covers,
        None => true,
    };
    Ok(CrossCheck {
        oracle_bound: bound,
        oracle_checked_moduli: scan.checked_moduli,
        oracle_failure_modulus: failure,
        witness,
        oracle_agrees,
        residue_prime_bound: bound,
        residue_first_failure: everywhere.first_failure,
        residue_agrees,
    })
}

fn hensel_command(q: u64, a: i128, p: u64, b: u32) -> Result<HenselOutput, Error> {
    let mut output = HenselOutput {
        q,
        a,
        p,
        b,
        seed: None,
        seed_modulus: None,
        root: None,
        modulus: None,
        failure: None,
    };
    if !crate::arith::is_prime(p) {
        return Err(residue::ResidueError::NotPrime(p).into());
    }
    if a % p as i128 == 0 {
        output.failure = Some(format!("{p} divides {a}"));
        return Ok(output);
    }
    // For p = q the seed comes from a root modulo q^q.
    let seed_exp = if p == q { q as u32 } else { 1 };
    let seed_modulus = checked_pow(p as u128, seed_exp)
        .ok_or(crate::arith::ArithError::Overflow("seed modulus"))?;
    output.seed_modulus = Some(seed_modulus);
    let seed = residue::qth_root_mod_prime_power(a, q, p, seed_exp)?;
    let Some(seed) = seed else {
        output.failure = Some(format!("x^{q} = {a} has no solution modulo {seed_modulus}"));
        return Ok(output);
    };
    output.seed = Some(seed);
    match residue::hensel_lift(a, q, p, seed, b) {
        Ok(root) => {
            output.root = Some(root);
            output.modulus = checked_pow(p as u128, b);
        }
        Err(e @ residue::HenselError::Arith(_)) => return Err(e.into()),
        Err(e) => output.failure = Some(e.to_string()),
    }
    Ok(output)
}

fn parse_as<T: DeserializeOwned>(doc: &str) -> Result<T, Error> {
    Ok(serde_json::from_str(doc)?)
}

fn fail(what: impl std::fmt::Display) -> Error {
    Error::Verification(what.to_string())
}

/// Re-checks one emitted document and returns its kind.
pub fn verify_document(doc: &str) -> Result<String, Error> {
    let header: Header = serde_json::from_str(doc)?;
    if header.qsective_schema != SCHEMA_VERSION {
        return Err(Error::Usage(format!(
            "unsupported schema version {}",
            header.qsective_schema
        )));
    }
    match header.kind.as_str() {
        "classification_report" => {
            let o: ClassifyOutput = parse_as(doc)?;
            let inst = validate_instance(o.report.q as i128, &o.report.entries)?;
            o.report.verify(&inst).map_err(fail)?;
            if let Some(w) = o.cross_check.and_then(|c| c.witness) {
                w.verify(&inst).map_err(fail)?;
            }
        }
        "oracle_verdict" => {
            let o: OracleOutput = parse_as(doc)?;
            let inst = validate_instance(o.q as i128, &o.entries)?;
            o.verdict
                .verify_roots(&inst)
                .map_err(|i| fail(format!("root {i} does not check out")))?;
            if let Some(w) = &o.verdict.first_failure {
                w.verify(&inst).map_err(fail)?;
            }
        }
        "witness_certificate" => {
            let o: WitnessOutput = parse_as(doc)?;
            let inst = validate_instance(o.q as i128, &o.entries)?;
            o.witness.verify(&inst).map_err(fail)?;
        }
        "radq" => {
            let o: RadqOutput = parse_as(doc)?;
            if qfree::rad_q_signed(o.n, o.q)? != o.signed || qfree::rad_q_abs(o.n, o.q)? != o.abs {
                return Err(fail("radical mismatch"));
            }
        }
        "covering_report" => {
            let o: CoveringOutput = parse_as(doc)?;
            let inst = validate_instance(o.q as i128, &o.entries)?;
            let matrix = qfree::exponent_matrix(&inst);
            let planes = covering::hyperplanes_of(&matrix)?;
            if planes != o.hyperplanes {
                return Err(fail("hyperplanes do not match the entries"));
            }
            match &o.uncovered_vector {
                Some(v) if planes.iter().any(|h| h.contains(v, o.q)) => {
                    return Err(fail("the uncovered vector lies on a hyperplane"))
                }
                _ => {}
            }
            let fresh = covering::check_covering(&planes, o.q, matrix.k())?;
            if fresh.covers != o.covers {
                return Err(fail("covering flag is wrong"));
            }
        }
        "residue" => {
            let o: ResidueOutput = parse_as(doc)?;
            let m = NaturalModulus::new(o.modulus)?;
            match o.root {
                Some(r) => {
                    if crate::arith::pow_mod_u128(r, o.q as u128, o.modulus) != m.reduce(o.a) {
                        return Err(fail("root does not check out"));
                    }
                }
                None if m.get() <= residue::SCAN_LIMIT
                    && residue::scan_qth_root(o.a, o.q, m.get() as u64).is_some() =>
                {
                    return Err(fail("a root exists"));
                }
                None => {}
            }
        }
        "hensel" => {
            let o: HenselOutput = parse_as(doc)?;
            if let (Some(r), Some(m)) = (o.root, o.modulus) {
                let target = crate::arith::reduce_signed(o.a, m);
                if crate::arith::pow_mod_u128(r, o.q as u128, m) != target {
                    return Err(fail("lifted root does not check out"));
                }
            }
        }
        "root_certificate" => {
            let o: RootmodOutput = parse_as(doc)?;
            let inst = validate_instance(o.q as i128, &o.entries)?;
            if let Some(c) = &o.certificate {
                if c.modulus != o.m {
                    return Err(fail("certificate modulus mismatch"));
                }
                c.verify(&inst).map_err(fail)?;
            }
        }
        "family_report" => {
            let o: FamilyReport = parse_as(doc)?;
            o.report.verify(&o.instance).map_err(fail)?;
        }
        "mined_pair" => {
            let o: MinedPair = parse_as(doc)?;
            o.family.report.verify(&o.family.instance).map_err(fail)?;
            if o.family.report.verdict != Verdict::Intersective {
                return Err(fail("mined pair is not intersective"));
            }
        }
        "min_covering" => {
            let o: MinlcOutput = parse_as(doc)?;
            if o.covering.len() != o.min_covering_size {
                return Err(fail("covering size mismatch"));
            }
            let r = covering::check_covering(&o.covering, o.q, o.k)?;
            if !r.covers {
                return Err(fail("listed hyperplanes do not cover"));
            }
            if o.min_covering_size > 1
                && covering::covering_of_size(o.q, o.k, o.min_covering_size - 1)?.is_some()
            {
                return Err(fail("a smaller covering exists"));
            }
        }
        other => return Err(Error::Usage(format!("unknown document kind '{other}'"))),
    }
    Ok(header.kind)
}
