//! The `umetric` command line.
//!
//! Every subcommand reads its inputs from files, runs one library operation
//! and prints a versioned JSON [`Report`] (or a short text summary with
//! `--text`). Exit codes: 0 holds / succeeded, 1 fails with a witness,
//! 2 input or precondition error, 3 undecided at the precision cap,
//! 4 internal consistency failure.

#![allow(clippy::result_large_err)]

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use umetric_core::axioms::{triple_sides, AxiomReport, SpaceClass};
use umetric_core::calculus::{classify_function, FunctionClass};
use umetric_core::decomposition::{decompose, zero_gap_radius};
use umetric_core::format::{self, FormatError, MatrixFile};
use umetric_core::generators::{generate, FunctionGenClass, GenClass, GenError, GenSpec, Generated, ValuePool};
use umetric_core::interval::Precision;
use umetric_core::rational::Rational;
use umetric_core::separating::{
    counterexample_space, find_separator, is_k_separating_on, power_separator_exponent, ultrametric_by_family, FamilyError, FamilyVerdict,
    FunctionFamily,
};
use umetric_core::snowflake::{default_tolerance, min_falsifying_exponent, probe_snowflake, SnowflakeVerdict};
use umetric_core::theorems::{
    apply, dual_witness, probe_fab, witness_not_pseudoultrametric_preserving, witness_not_semimetric_preserving,
    witness_not_ultrametric_metric_preserving, TheoremError, WitnessPackage,
};
use umetric_core::{classify_space, Dissimilarity, TransformFunction, Verdict};

pub const SCHEMA: &str = "umetric-report/1";

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "umetric", version, about = "Ultrametric and metric-preserving function checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit the JSON report (default).
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Emit a short human-readable summary instead of JSON.
    #[arg(long, global = true)]
    pub text: bool,
    /// Precision cap in bits for certified power comparisons.
    #[arg(long, global = true, default_value_t = umetric_core::interval::DEFAULT_PRECISION_BITS)]
    pub precision: u32,
    /// Include wall-clock timing in the report (makes output nondeterministic).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a distance matrix against every axiom.
    ClassifySpace {
        #[arg(long)]
        input: PathBuf,
        /// Exit 1 unless the space belongs to this class.
        #[arg(long)]
        require: Option<String>,
    },
    /// Classify a transform function.
    ClassifyFn {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        require: Option<String>,
    },
    /// Apply a function entrywise and classify the result.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "fn")]
        function: PathBuf,
    },
    /// The f_{a,b} witness for a metric that is not an ultrametric.
    DualWitness {
        #[arg(long)]
        input: PathBuf,
    },
    /// Decide ultrametricity of a metric through the f_{a,b} family.
    ProbeFab {
        #[arg(long)]
        input: PathBuf,
    },
    /// Check whether d^alpha is still a metric.
    ProbeSnowflake {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: String,
    },
    /// Smallest alpha at which d^alpha stops being a metric.
    MinExponent {
        #[arg(long)]
        input: PathBuf,
        /// Bracket width (default 2^-30).
        #[arg(long)]
        tol: Option<String>,
    },
    /// Factor a pseudoultrametric as a threshold of an ultrametric.
    Decompose {
        #[arg(long)]
        input: PathBuf,
    },
    /// Radius below which f vanishes on an ultrametric's distances.
    ZeroGap {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "fn")]
        function: PathBuf,
    },
    /// k-separation of a family on explicit pairs.
    FamilyCheck {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value = "2")]
        k: String,
        /// Pairs as `t1,t2;t1,t2;...`.
        #[arg(long)]
        pairs: String,
    },
    /// First family member with k f(t1) < f(t2).
    FindSeparator {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        t1: String,
        #[arg(long)]
        t2: String,
        #[arg(long, default_value = "2")]
        k: String,
    },
    /// Least integer alpha with k t1^alpha < t2^alpha.
    PowerSeparator {
        #[arg(long)]
        t1: String,
        #[arg(long)]
        t2: String,
        #[arg(long, default_value = "2")]
        k: String,
    },
    /// Metric that a family failing 2-separation at (t1, t2) cannot detect.
    FamilyCounterexample {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        t1: String,
        #[arg(long)]
        t2: String,
    },
    /// Decide ultrametricity of a metric through a 2-separating family.
    FamilyUltrametric {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Generate a space or function in the standard file format.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// ultrametric, metric, pseudoultrametric, or a function class such
        /// as increasing_amenable.
        #[arg(long)]
        class: String,
        #[arg(long)]
        zero_pairs: Option<String>,
        #[arg(long)]
        embed_345: bool,
        #[arg(long, default_value_t = 10)]
        max: u32,
        #[arg(long, default_value_t = 4)]
        denominator: u32,
    },
    /// Re-run a saved report and check that it reproduces.
    Replay {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub precision_bits: u32,
    pub exit_code: i32,
    pub summary: String,
    pub result: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

/// What a run produced: the exit code and the text destined for stdout and
/// stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            kind: "input",
            message: message.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<TheoremError> for Failure {
    fn from(e: TheoremError) -> Self {
        let (code, kind) = match &e {
            TheoremError::Undecided(_) => (EXIT_UNDECIDED, "undecided"),
            TheoremError::Internal(_) => (EXIT_INTERNAL, "internal"),
            _ => (EXIT_INPUT, "precondition"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<FamilyError> for Failure {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::Theorem(t) => t.into(),
            FamilyError::Undecided { .. } | FamilyError::Exponent { .. } => Failure {
                code: EXIT_UNDECIDED,
                kind: "undecided",
                message: e.to_string(),
            },
            other => Failure {
                code: EXIT_INPUT,
                kind: "precondition",
                message: other.to_string(),
            },
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        let (code, kind) = match e {
            GenError::SelfCheck(_) => (EXIT_INTERNAL, "internal"),
            _ => (EXIT_INPUT, "input"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

/// Result of one subcommand before it is wrapped into a report.
struct Done {
    code: i32,
    summary: String,
    result: Value,
}

impl Done {
    fn new(code: i32, summary: impl Into<String>, result: Value) -> Self {
        Done {
            code,
            summary: summary.into(),
            result,
        }
    }
}

#[derive(Default)]
struct Inputs {
    digests: Vec<InputDigest>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        self.digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|_| Failure::input(format!("{}: not UTF-8", path.display())))
    }

    fn space(&mut self, path: &Path) -> Result<Dissimilarity, Failure> {
        let text = self.read(path)?;
        format::parse_matrix(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    fn function(&mut self, path: &Path) -> Result<TransformFunction, Failure> {
        let text = self.read(path)?;
        format::parse_function(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    fn family(&mut self, path: &Path) -> Result<FunctionFamily, Failure> {
        let text = self.read(path)?;
        let members = format::parse_family(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        FunctionFamily::new(members).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

fn rational(name: &str, text: &str) -> Result<Rational, Failure> {
    text.parse().map_err(|e| Failure::input(format!("--{name}: {e}")))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn parse_space_class(s: &str) -> Result<SpaceClass, Failure> {
    serde_json::from_value(Value::String(s.replace('-', "_"))).map_err(|_| {
        Failure::input(format!(
            "unknown space class `{s}` (expected semimetric, pseudometric, pseudoultrametric, metric or ultrametric)"
        ))
    })
}

fn parse_function_class(s: &str) -> Result<FunctionClass, Failure> {
    serde_json::from_value(Value::String(s.replace('_', "-"))).map_err(|_| {
        Failure::input(format!(
            "unknown function class `{s}` (expected increasing, amenable, doubling, pseudoultrametric-preserving, \
             semimetric-preserving, ultrametric-preserving or ultrametric-metric-preserving)"
        ))
    })
}

fn parse_pairs(text: &str) -> Result<Vec<(Rational, Rational)>, Failure> {
    text.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let parts: Vec<&str> = p.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [a, b] => Ok((rational("pairs", a)?, rational("pairs", b)?)),
                _ => Err(Failure::input(format!("--pairs: `{p}` is not `t1,t2`"))),
            }
        })
        .collect()
}

fn class_name<T: Serialize>(v: &T) -> String {
    match to_json(v) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

/// Distances at each failing witness: the diagonal entry, the zero
/// off-diagonal entry, or the sides `d(x,y), d(x,z), d(z,y)`.
fn witness_values(d: &Dissimilarity, report: &AxiomReport) -> Value {
    json!({
        "reflexive": report.reflexive.witness().map(|&i| d.get(i, i)),
        "identity_of_indiscernibles": report.identity_of_indiscernibles.witness().map(|&(i, j)| d.get(i, j)),
        "triangle": report.triangle.witness().map(|&t| triple_sides(d, t)),
        "strong_triangle": report.strong_triangle.witness().map(|&t| triple_sides(d, t)),
    })
}

/// A witness showing `f` lacks `class`, when one of the constructions applies.
fn function_witness(f: &TransformFunction, class: FunctionClass) -> Option<WitnessPackage> {
    let w = match class {
        FunctionClass::PseudoultrametricPreserving => witness_not_pseudoultrametric_preserving(f),
        FunctionClass::SemimetricPreserving | FunctionClass::Amenable => witness_not_semimetric_preserving(f),
        FunctionClass::UltrametricPreserving => {
            witness_not_semimetric_preserving(f).or_else(|_| witness_not_pseudoultrametric_preserving(f))
        }
        FunctionClass::UltrametricMetricPreserving => {
            witness_not_semimetric_preserving(f).or_else(|_| witness_not_ultrametric_metric_preserving(f))
        }
        FunctionClass::Increasing => witness_not_pseudoultrametric_preserving(f),
        FunctionClass::Doubling => witness_not_ultrametric_metric_preserving(f),
    };
    w.ok()
}

fn execute(command: &Command, precision: Precision, inputs: &mut Inputs) -> Result<Done, Failure> {
    match command {
        Command::ClassifySpace { input, require } => {
            let d = inputs.space(input)?;
            let report = classify_space(&d);
            let required = require.as_deref().map(parse_space_class).transpose()?;
            let (code, summary) = match required {
                Some(c) if report.classes.has(c) => (EXIT_HOLDS, format!("space is {}", class_name(&c))),
                Some(c) => (EXIT_FAILS, format!("space is not {}", class_name(&c))),
                None => (EXIT_HOLDS, format!("classes: {}", to_json(&report.classes))),
            };
            let values = witness_values(&d, &report);
            Ok(Done::new(
                code,
                summary,
                json!({ "n": d.n(), "require": required, "report": report, "witness_values": values }),
            ))
        }
        Command::ClassifyFn { function, require } => {
            let f = inputs.function(function)?;
            let c = classify_function(&f);
            let required = require.as_deref().map(parse_function_class).transpose()?;
            match required {
                Some(class) if c.has(class) => Ok(Done::new(
                    EXIT_HOLDS,
                    format!("function is {}", class_name(&class)),
                    json!({ "require": class, "classification": c }),
                )),
                Some(class) => {
                    let witness = function_witness(&f, class);
                    Ok(Done::new(
                        EXIT_FAILS,
                        format!("function is not {}", class_name(&class)),
                        json!({ "require": class, "classification": c, "witness": witness }),
                    ))
                }
                None => Ok(Done::new(EXIT_HOLDS, "function classified", json!({ "classification": c }))),
            }
        }
        Command::Transform { input, function } => {
            let d = inputs.space(input)?;
            let f = inputs.function(function)?;
            let image = apply(&f, &d)?;
            let report = classify_space(&image);
            Ok(Done::new(
                EXIT_HOLDS,
                format!("f ∘ d classes: {}", to_json(&report.classes)),
                json!({
                    "transformed": MatrixFile::from_space(&image, None),
                    "witness_values": witness_values(&image, &report),
                    "report": report,
                }),
            ))
        }
        Command::DualWitness { input } => {
            let d = inputs.space(input)?;
            Ok(match dual_witness(&d)? {
                None => Done::new(EXIT_HOLDS, "metric is an ultrametric; no witness", json!({ "witness": null })),
                Some(w) => Done::new(
                    EXIT_FAILS,
                    format!("f ∘ d breaks the triangle inequality at {:?}", w.indices),
                    json!({ "witness": w }),
                ),
            })
        }
        Command::ProbeFab { input } => {
            let d = inputs.space(input)?;
            let probe = probe_fab(&d)?;
            let (code, summary) = match &probe.verdict {
                Verdict::Holds => (EXIT_HOLDS, format!("all {} pairs pass; ultrametric", probe.pairs_checked)),
                Verdict::Fails(f) => (EXIT_FAILS, format!("f_(a,b) with a = {}, b = {} breaks the metric", f.a, f.b)),
            };
            Ok(Done::new(code, summary, to_json(&probe)))
        }
        Command::ProbeSnowflake { input, alpha } => {
            let d = inputs.space(input)?;
            let alpha = rational("alpha", alpha)?;
            let probe = probe_snowflake(&d, &alpha, precision)?;
            let (code, summary) = match &probe.verdict {
                SnowflakeVerdict::Holds => (EXIT_HOLDS, format!("d^{alpha} is a metric")),
                SnowflakeVerdict::Fails { triple } => (EXIT_FAILS, format!("d^{alpha} fails the triangle inequality at {triple}")),
                SnowflakeVerdict::Undecided { triples, bits } => {
                    (EXIT_UNDECIDED, format!("{} triples undecided at 2^-{bits}", triples.len()))
                }
            };
            let mut result = to_json(&probe);
            if let SnowflakeVerdict::Fails { triple } = &probe.verdict {
                result["sides"] = to_json(&triple_sides(&d, *triple));
            }
            Ok(Done::new(code, summary, result))
        }
        Command::MinExponent { input, tol } => {
            let d = inputs.space(input)?;
            let tol = match tol {
                Some(t) => rational("tol", t)?,
                None => default_tolerance(),
            };
            let c = min_falsifying_exponent(&d, &tol, precision)?;
            let summary = match &c {
                None => "ultrametric; every power is a metric".to_string(),
                Some(c) => format!("alpha* in [{}, {}] ≈ {:.9}", c.lower, c.upper, c.estimate().to_f64()),
            };
            Ok(Done::new(EXIT_HOLDS, summary, json!({ "tolerance": tol, "critical": c })))
        }
        Command::Decompose { input } => {
            let d = inputs.space(input)?;
            let r = decompose(&d)?;
            Ok(Done::new(
                EXIT_HOLDS,
                format!("r* = {}; factor verified", r.r_star),
                json!({
                    "r_star": r.r_star,
                    "ultrametric": MatrixFile::from_space(&r.ultrametric, None),
                    "threshold_fn": r.threshold_fn,
                    "composition_verified": r.composition_verified,
                }),
            ))
        }
        Command::ZeroGap { input, function } => {
            let d = inputs.space(input)?;
            let f = inputs.function(function)?;
            let r0 = zero_gap_radius(&d, &f)?;
            let summary = match &r0 {
                Some(r) => format!("f vanishes on [0, {r}]; f ∘ d is not an ultrametric"),
                None => "f ∘ d is an ultrametric".to_string(),
            };
            Ok(Done::new(EXIT_HOLDS, summary, json!({ "r0": r0 })))
        }
        Command::FamilyCheck { family, k, pairs } => {
            let fam = inputs.family(family)?;
            let k = rational("k", k)?;
            let pairs = parse_pairs(pairs)?;
            let v = is_k_separating_on(&fam, &k, &pairs, precision)?;
            let (code, summary) = match &v {
                Verdict::Holds => (EXIT_HOLDS, format!("{k}-separating on all {} pairs", pairs.len())),
                Verdict::Fails(p) => (EXIT_FAILS, format!("no member separates ({}, {}) at k = {k}", p.t1, p.t2)),
            };
            Ok(Done::new(code, summary, json!({ "k": k, "pairs": pairs.len(), "verdict": v })))
        }
        Command::FindSeparator { family, t1, t2, k } => {
            let fam = inputs.family(family)?;
            let (t1, t2, k) = (rational("t1", t1)?, rational("t2", t2)?, rational("k", k)?);
            let member = find_separator(&fam, &t1, &t2, &k, precision)?;
            Ok(match member {
                Some(m) => Done::new(EXIT_HOLDS, format!("member {m} separates"), json!({ "member": m })),
                None => Done::new(EXIT_FAILS, "no member separates", json!({ "member": null })),
            })
        }
        Command::PowerSeparator { t1, t2, k } => {
            let (t1, t2, k) = (rational("t1", t1)?, rational("t2", t2)?, rational("k", k)?);
            let alpha = power_separator_exponent(&t1, &t2, &k, precision)?;
            Ok(Done::new(EXIT_HOLDS, format!("t^{alpha} separates"), json!({ "alpha": alpha })))
        }
        Command::FamilyCounterexample { family, t1, t2 } => {
            let fam = inputs.family(family)?;
            let (t1, t2) = (rational("t1", t1)?, rational("t2", t2)?);
            let c = counterexample_space(&fam, &t1, &t2, precision)?;
            Ok(Done::new(
                EXIT_HOLDS,
                format!("sides ({}, {}, {}): metric, not ultrametric, every image metric", t2, c.t3, c.t3),
                to_json(&c),
            ))
        }
        Command::FamilyUltrametric { family, input } => {
            let fam = inputs.family(family)?;
            let d = inputs.space(input)?;
            let v = ultrametric_by_family(&fam, &d, precision)?;
            let (code, summary) = match &v {
                FamilyVerdict::Ultrametric => (EXIT_HOLDS, "ultrametric".to_string()),
                FamilyVerdict::NotUltrametric { member, triple } => {
                    (EXIT_FAILS, format!("member {member} breaks the triangle inequality at {triple}"))
                }
                FamilyVerdict::Inconclusive { t1, t2 } => (EXIT_UNDECIDED, format!("pair ({t1}, {t2}) is not 2-separated")),
            };
            Ok(Done::new(code, summary, to_json(&v)))
        }
        Command::Gen { .. } | Command::Replay { .. } => unreachable!("handled before dispatch"),
    }
}

fn gen_class(class: &str, zero_pairs: Option<&str>, embed_345: bool) -> Result<GenClass, Failure> {
    let class = class.replace('-', "_");
    Ok(match class.as_str() {
        "ultrametric" => GenClass::Ultrametric,
        "metric" => GenClass::Metric { embed_345 },
        "pseudoultrametric" => GenClass::Pseudoultrametric {
            zero_pairs: rational("zero-pairs", zero_pairs.unwrap_or("1/2"))?,
        },
        other => GenClass::Function {
            class: serde_json::from_value::<FunctionGenClass>(Value::String(other.into()))
                .map_err(|_| Failure::input(format!("unknown class `{other}`")))?,
        },
    })
}

fn run_gen(command: &Command) -> Result<String, Failure> {
    let Command::Gen {
        seed,
        n,
        class,
        zero_pairs,
        embed_345,
        max,
        denominator,
    } = command
    else {
        unreachable!()
    };
    let spec = GenSpec {
        seed: *seed,
        n: *n,
        pool: ValuePool {
            max: *max,
            denominator: *denominator,
        },
        class: gen_class(class, zero_pairs.as_deref(), *embed_345)?,
    };
    if spec.pool.size() == 0 {
        return Err(Failure::input("value pool is empty"));
    }
    let meta = |extra: Value| json!({ "gen": spec, "extra": extra });
    let text = match generate(&spec)? {
        Generated::Space(d) => serde_json::to_string(&MatrixFile::from_space(&d, Some(meta(Value::Null)))),
        Generated::Metric(m) => serde_json::to_string(&MatrixFile::from_space(
            &m.space,
            Some(meta(json!({ "ultrametric": m.ultrametric }))),
        )),
        Generated::Function(f) => {
            let mut v = to_json(&f);
            v["meta"] = meta(Value::Null);
            serde_json::to_string(&v)
        }
    };
    Ok(text.expect("generated output serializes"))
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::ClassifySpace { .. } => "classify-space",
        Command::ClassifyFn { .. } => "classify-fn",
        Command::Transform { .. } => "transform",
        Command::DualWitness { .. } => "dual-witness",
        Command::ProbeFab { .. } => "probe-fab",
        Command::ProbeSnowflake { .. } => "probe-snowflake",
        Command::MinExponent { .. } => "min-exponent",
        Command::Decompose { .. } => "decompose",
        Command::ZeroGap { .. } => "zero-gap",
        Command::FamilyCheck { .. } => "family-check",
        Command::FindSeparator { .. } => "find-separator",
        Command::PowerSeparator { .. } => "power-separator",
        Command::FamilyCounterexample { .. } => "family-counterexample",
        Command::FamilyUltrametric { .. } => "family-ultrametric",
        Command::Gen { .. } => "gen",
        Command::Replay { .. } => "replay",
    }
}

/// Runs a command and builds its report.
fn build_report(cli: &Cli, argv: &[String]) -> Report {
    let precision = Precision::new(cli.precision);
    let mut inputs = Inputs::default();
    let start = Instant::now();
    let outcome = execute(&cli.command, precision, &mut inputs);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let (exit_code, summary, result) = match outcome {
        Ok(done) => (done.code, done.summary, done.result),
        Err(f) => (
            f.code,
            f.message.clone(),
            json!({ "error": { "kind": f.kind, "message": f.message } }),
        ),
    };
    Report {
        schema: SCHEMA.into(),
        command: command_name(&cli.command).into(),
        argv: std::iter::once("umetric".to_string())
            .chain(argv.iter().skip(1).filter(|a| *a != "--timing").cloned())
            .collect(),
        inputs: inputs.digests,
        precision_bits: precision.bits,
        exit_code,
        summary,
        result,
        timing_ms: cli.timing.then_some(elapsed),
    }
}

fn render(cli: &Cli, report: &Report) -> String {
    if cli.text {
        let mut s = format!("{}: {}\n", report.command, report.summary);
        if let Some(ms) = report.timing_ms {
            s.push_str(&format!("time: {ms:.3} ms\n"));
        }
        s
    } else {
        let mut s = serde_json::to_string_pretty(report).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Collects every embedded witness package in a report result.
fn witness_packages(v: &Value, out: &mut Vec<Value>) {
    match v {
        Value::Object(map) => {
            if map.contains_key("violated_axiom") && map.contains_key("transformed") {
                out.push(v.clone());
            }
            map.values().for_each(|x| witness_packages(x, out));
        }
        Value::Array(xs) => xs.iter().for_each(|x| witness_packages(x, out)),
        _ => {}
    }
}

/// Checks a saved report: inputs unchanged, embedded witnesses replay, and a
/// fresh run gives the same exit code and result.
pub fn replay_report(report: &Report) -> Result<Vec<String>, String> {
    let mut notes = Vec::new();
    for input in &report.inputs {
        let bytes = std::fs::read(&input.path).map_err(|e| format!("{}: {e}", input.path))?;
        if hex::encode(Sha256::digest(&bytes)) != input.sha256 {
            return Err(format!("{}: contents changed since the report was written", input.path));
        }
    }
    let mut packages = Vec::new();
    witness_packages(&report.result, &mut packages);
    for p in packages {
        let w: WitnessPackage = serde_json::from_value(p).map_err(|e| format!("witness does not parse: {e}"))?;
        w.replay().map_err(|e| format!("witness does not replay: {e}"))?;
        notes.push(format!("witness {:?} at {:?} replays", w.violated_axiom, w.indices));
    }
    let cli = Cli::try_parse_from(&report.argv).map_err(|e| format!("argv does not parse: {e}"))?;
    if matches!(cli.command, Command::Replay { .. } | Command::Gen { .. }) {
        return Err("only analysis reports can be replayed".into());
    }
    let fresh = build_report(&cli, &report.argv);
    if fresh.exit_code != report.exit_code || fresh.result != report.result {
        return Err("re-running the command gives a different result".into());
    }
    notes.push(format!("{} reproduces with exit code {}", report.command, report.exit_code));
    Ok(notes)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_HOLDS };
            let text = e.render().to_string();
            return if code == EXIT_HOLDS {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match &cli.command {
        Command::Gen { .. } => match run_gen(&cli.command) {
            Ok(text) => Outcome {
                code: EXIT_HOLDS,
                stdout: text + "\n",
                stderr: String::new(),
            },
            Err(f) => Outcome {
                code: f.code,
                stdout: String::new(),
                stderr: format!("error: {}\n", f.message),
            },
        },
        Command::Replay { report } => {
            let loaded = std::fs::read_to_string(report)
                .map_err(|e| format!("{}: {e}", report.display()))
                .and_then(|t| serde_json::from_str::<Report>(&t).map_err(|e| format!("{}: {e}", report.display())));
            let loaded = match loaded {
                Ok(r) => r,
                Err(e) => {
                    return Outcome {
                        code: EXIT_INPUT,
                        stdout: String::new(),
                        stderr: format!("error: {e}\n"),
                    }
                }
            };
            match replay_report(&loaded) {
                Ok(notes) => Outcome {
                    code: EXIT_HOLDS,
                    stdout: notes.join("\n") + "\n",
                    stderr: String::new(),
                },
                Err(e) => Outcome {
                    code: EXIT_FAILS,
                    stdout: String::new(),
                    stderr: format!("replay failed: {e}\n"),
                },
            }
        }
        _ => {
            let report = build_report(&cli, &argv);
            let stderr = if report.exit_code >= EXIT_INPUT && report.exit_code != EXIT_UNDECIDED {
                format!("error: {}\n", report.summary)
            } else {
                String::new()
            };
            Outcome {
                code: report.exit_code,
                stdout: render(&cli, &report),
                stderr,
            }
        }
    }
}
