//! The `chanent` command line: `compute`, `check` and `oracle`.
//!
//! Exit codes: 0 success, 1 a property check failed, 2 malformed input or
//! arguments, 3 a channel incompatible with the requested measure, 4 an
//! optimizer or numerical failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::channel_measures::{choi_relative_entropy, measure_rc, measure_rkme, measure_rr, strength_value};
use crate::channels::{named_channel, Channel, FreeChannelFamily};
use crate::error::Error;
use crate::linalg::{ComplexMatrix, C64};
use crate::optim::OptimizerConfig;
use crate::oracle::{exhaustive_partition_check, grid_max_concurrence, sampled_free_distance_floor};
use crate::properties::{run_suite, CheckConfig, Fault, Suite};
use crate::states::{QuantumState, SystemDims};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_INCOMPATIBLE: i32 = 3;
pub const EXIT_OPTIMIZER: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "chanent", version, about = "Entanglement measures for quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one measure on a channel.
    Compute(ComputeArgs),
    /// Run the randomized property suites.
    Check(CheckArgs),
    /// Run a brute-force reference computation.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MeasureKind {
    Sc,
    Rr,
    Rc,
    Rkme,
    Strength,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Local,
    Mixture,
}

#[derive(clap::Args, Debug)]
struct ComputeArgs {
    #[arg(long, value_enum)]
    measure: MeasureKind,
    #[arg(long)]
    channel: PathBuf,
    /// Second channel (only for `sc`).
    #[arg(long)]
    channel2: Option<PathBuf>,
    /// Number of blocks (only for `rkme`).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Values at or below this count as zero when classifying.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    /// Alternating rounds for `rr`.
    #[arg(long, default_value_t = 5)]
    rounds: usize,
    /// Free family for `rr`.
    #[arg(long, value_enum, default_value_t = FamilyArg::Local)]
    family: FamilyArg,
    #[arg(long, default_value_t = 2)]
    family_terms: usize,
    /// Local Kraus rank of the free family (default: full).
    #[arg(long)]
    family_rank: Option<usize>,
    /// Kraus rank of `S_C` probes (default: the dimension).
    #[arg(long)]
    probe_rank: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Sc,
    Rr,
    Rc,
    Rkme,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    SignFlipConcurrence,
}

#[derive(clap::Args, Debug)]
struct CheckArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    /// Include the expensive sampled additivity check.
    #[arg(long)]
    nightly: bool,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    GridRc,
    Partition,
    FreeFloor,
}

#[derive(clap::Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum)]
    kind: OracleKind,
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 32)]
    steps: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Report written by every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: Vec<String>,
    /// SHA-256 of the input files' bytes, in argument order.
    pub digest: String,
    pub seed: u64,
    pub results: Vec<Value>,
    pub wall_ms: u64,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_BAD_INPUT, message: message.into() }
    }

    fn incompatible(message: impl Into<String>) -> Self {
        Self { code: EXIT_INCOMPATIBLE, message: message.into() }
    }
}

/// Library errors raised by a measure: shape problems are incompatibilities,
/// everything else is a numerical failure.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimMismatch(_)
            | Error::NotSquare(..)
            | Error::NotBipartite(_)
            | Error::BadArity(_)
            | Error::UnsupportedMixedOutput(_)
            | Error::MixedOutputUnsupported => EXIT_INCOMPATIBLE,
            Error::TooLarge(_) | Error::BadParam(_) => EXIT_BAD_INPUT,
            _ => EXIT_OPTIMIZER,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { 0 };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let outcome = match cli.command {
        Command::Compute(a) => compute(a, echo),
        Command::Check(a) => check(a, echo),
        Command::Oracle(a) => oracle(a, echo),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

// ----- input files ----------------------------------------------------------

fn read_json(path: &Path) -> CliResult<(Vec<u8>, Value)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::input(format!("{}: invalid JSON: {e}", path.display())))?;
    Ok((bytes, value))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> CliResult<&'a Value> {
    obj.get(key).ok_or_else(|| CliError::input(format!("{ctx}: missing field `{key}`")))
}

fn parse_dims(v: &Value, name: &str, ctx: &str) -> CliResult<SystemDims> {
    let bad = || CliError::input(format!("{ctx}: field `{name}` must be a list of integers >= 2"));
    let dims: Vec<usize> = serde_json::from_value(v.clone()).map_err(|_| bad())?;
    SystemDims::new(dims).map_err(|e| CliError::input(format!("{ctx}: field `{name}`: {e}")))
}

fn parse_complex(v: &Value, path: &str, ctx: &str) -> CliResult<C64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(CliError::input(format!("{ctx}: field `{path}` must be [re, im] numbers"))),
        },
        _ => Err(CliError::input(format!("{ctx}: field `{path}` must be a [re, im] pair"))),
    }
}

fn parse_vector(v: &Value, name: &str, ctx: &str) -> CliResult<Vec<C64>> {
    let items = v.as_array().ok_or_else(|| CliError::input(format!("{ctx}: field `{name}` must be a list")))?;
    items.iter().enumerate().map(|(i, z)| parse_complex(z, &format!("{name}[{i}]"), ctx)).collect()
}

fn parse_matrix(v: &Value, name: &str, ctx: &str) -> CliResult<ComplexMatrix> {
    let rows = v.as_array().ok_or_else(|| CliError::input(format!("{ctx}: field `{name}` must be a list of rows")))?;
    let parsed: Vec<Vec<C64>> = rows
        .iter()
        .enumerate()
        .map(|(r, row)| parse_vector(row, &format!("{name}[{r}]"), ctx))
        .collect::<CliResult<_>>()?;
    let cols = parsed.first().map_or(0, Vec::len);
    if cols == 0 || parsed.iter().any(|r| r.len() != cols) {
        return Err(CliError::input(format!("{ctx}: field `{name}` must be a nonempty rectangular matrix")));
    }
    Ok(ComplexMatrix::from_rows(&parsed))
}

fn params_of(obj: &Map<String, Value>, ctx: &str) -> CliResult<Map<String, Value>> {
    match obj.get("params") {
        None => Ok(Map::new()),
        Some(Value::Object(m)) => Ok(m.clone()),
        Some(_) => Err(CliError::input(format!("{ctx}: field `params` must be an object"))),
    }
}

/// Channel from either the explicit Kraus form or the named form.
pub fn parse_channel(v: &Value, ctx: &str) -> CliResult<Channel> {
    let obj = v.as_object().ok_or_else(|| CliError::input(format!("{ctx}: expected a JSON object")))?;
    if let Some(name) = obj.get("name") {
        let name = name.as_str().ok_or_else(|| CliError::input(format!("{ctx}: field `name` must be a string")))?;
        let params = params_of(obj, ctx)?;
        return named_channel(name, &params).map_err(|e| match e {
            Error::UnknownName(_) => CliError::input(format!("{ctx}: field `name`: {e}")),
            other => CliError::input(format!("{ctx}: field `params`: {other}")),
        });
    }
    let in_dims = parse_dims(field(obj, "in_dims", ctx)?, "in_dims", ctx)?;
    let out_dims = parse_dims(field(obj, "out_dims", ctx)?, "out_dims", ctx)?;
    let ops = field(obj, "kraus", ctx)?
        .as_array()
        .ok_or_else(|| CliError::input(format!("{ctx}: field `kraus` must be a list of matrices")))?;
    let kraus = ops
        .iter()
        .enumerate()
        .map(|(i, m)| parse_matrix(m, &format!("kraus[{i}]"), ctx))
        .collect::<CliResult<Vec<_>>>()?;
    Channel::new(in_dims, out_dims, kraus).map_err(|e| CliError::input(format!("{ctx}: field `kraus`: {e}")))
}

/// State from `{dims, vector}`, `{dims, rho}` or a named form
/// (`ghz {n, d}`, `w {n}`, `max_entangled {d}`).
pub fn parse_state(v: &Value, ctx: &str) -> CliResult<QuantumState> {
    let obj = v.as_object().ok_or_else(|| CliError::input(format!("{ctx}: expected a JSON object")))?;
    let wrap = |field: &str, e: Error| CliError::input(format!("{ctx}: field `{field}`: {e}"));
    if let Some(name) = obj.get("name") {
        let params = params_of(obj, ctx)?;
        let get = |key: &str, default: Option<u64>| -> CliResult<usize> {
            params
                .get(key)
                .map(|x| x.as_u64().ok_or_else(|| CliError::input(format!("{ctx}: field `params.{key}` must be an integer"))))
                .unwrap_or_else(|| default.ok_or_else(|| CliError::input(format!("{ctx}: missing field `params.{key}`"))))
                .map(|x| x as usize)
        };
        return match name.as_str() {
            Some("ghz") => QuantumState::ghz(get("n", None)?, get("d", Some(2))?).map_err(|e| wrap("params", e)),
            Some("w") => QuantumState::w(get("n", None)?).map_err(|e| wrap("params", e)),
            Some("max_entangled") => QuantumState::max_entangled(get("d", Some(2))?).map_err(|e| wrap("params", e)),
            _ => Err(CliError::input(format!("{ctx}: field `name` must be one of ghz, w, max_entangled"))),
        };
    }
    let dims = parse_dims(field(obj, "dims", ctx)?, "dims", ctx)?;
    if let Some(vec) = obj.get("vector") {
        let psi = parse_vector(vec, "vector", ctx)?;
        return QuantumState::from_vector(dims, psi).map_err(|e| wrap("vector", e));
    }
    if let Some(rho) = obj.get("rho") {
        let m = parse_matrix(rho, "rho", ctx)?;
        return QuantumState::from_density(dims, m).map_err(|e| wrap("rho", e));
    }
    Err(CliError::input(format!("{ctx}: missing field `vector` or `rho`")))
}

fn load_channel(path: &Path, digest: &mut Sha256) -> CliResult<Channel> {
    let (bytes, value) = read_json(path)?;
    digest.update(&bytes);
    parse_channel(&value, &path.display().to_string())
}

// ----- output ----------------------------------------------------------------

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Rounds every float to 12 significant digits. A `value` below `1e-12` in
/// magnitude is written as `0.0` with the unrounded number in `value_raw`.
pub fn normalize_numbers(v: &mut Value) {
    match v {
        Value::Object(map) => {
            let mut raw = None;
            for (key, item) in map.iter_mut() {
                if key == "value" {
                    if let Some(x) = item.as_f64() {
                        if x != 0.0 && x.abs() < 1e-12 {
                            raw = Some(x);
                            *item = json!(0.0);
                            continue;
                        }
                    }
                }
                normalize_numbers(item);
            }
            if let Some(x) = raw {
                map.insert("value_raw".into(), json!(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(normalize_numbers),
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round12(x));
            }
        }
        _ => {}
    }
}

fn finish(
    command: Vec<String>,
    digest: Sha256,
    seed: u64,
    mut results: Vec<Value>,
    started: Instant,
    out: Option<&Path>,
) -> CliResult<()> {
    results.iter_mut().for_each(normalize_numbers);
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        digest: digest.finalize().iter().map(|b| format!("{b:02x}")).collect(),
        seed,
        results,
        wall_ms: started.elapsed().as_millis() as u64,
    };
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&report).expect("reports serialize");
        std::fs::write(path, text + "\n")
            .map_err(|e| CliError { code: EXIT_BAD_INPUT, message: format!("{}: {e}", path.display()) })?;
    }
    Ok(())
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

// ----- commands ----------------------------------------------------------------

fn compute(a: ComputeArgs, command: Vec<String>) -> CliResult<i32> {
    let started = Instant::now();
    match (a.measure, &a.channel2) {
        (MeasureKind::Sc, None) => return Err(CliError::incompatible("sc compares two channels; pass --channel2")),
        (m, Some(_)) if m != MeasureKind::Sc => {
            return Err(CliError::incompatible(format!("{m:?} takes a single channel; --channel2 is not allowed").to_lowercase()))
        }
        _ => {}
    }
    if a.k.is_some() && a.measure != MeasureKind::Rkme {
        return Err(CliError::incompatible("--k only applies to rkme"));
    }
    if a.starts == 0 || a.tol.is_nan() || a.tol < 0.0 {
        return Err(CliError::input("--starts must be positive and --tol nonnegative"));
    }
    let mut digest = Sha256::new();
    let n = load_channel(&a.channel, &mut digest)?;
    let m = a.channel2.as_deref().map(|p| load_channel(p, &mut digest)).transpose()?;
    let cfg = OptimizerConfig {
        starts: a.starts,
        max_iters: a.max_iters,
        seed: a.seed,
        rounds: a.rounds,
        probe_rank: a.probe_rank,
        sep_tol: a.tol,
        ..OptimizerConfig::default()
    };
    let (result, headline) = match a.measure {
        MeasureKind::Sc => {
            let r = choi_relative_entropy(&n, m.as_ref().expect("checked above"), &cfg)?;
            let h = format!("sc = {:.12} bits ({})", r.value, r.bound);
            (to_value(&r), h)
        }
        MeasureKind::Rr => {
            let mut family = match a.family {
                FamilyArg::Local => FreeChannelFamily::local_product(n.in_dims()),
                FamilyArg::Mixture => FreeChannelFamily::mixture(n.in_dims(), a.family_terms)?,
            };
            if let Some(r) = a.family_rank {
                family = family.with_kraus_rank(r)?;
            }
            let r = measure_rr(&n, &family, &cfg)?;
            let h = format!("rr = {:.12} bits ({})", r.value, r.bound);
            (to_value(&r), h)
        }
        MeasureKind::Rc => {
            let r = measure_rc(&n, &cfg)?;
            let h = format!("rc = {:.12} ({})", r.value, r.bound);
            (to_value(&r), h)
        }
        MeasureKind::Rkme => {
            let k = a.k.ok_or_else(|| CliError::incompatible("rkme needs --k"))?;
            let r = measure_rkme(&n, k, &cfg)?;
            let h = format!("rkme(k={k}) = {:.12} ({})", r.value, r.bound);
            (to_value(&r), h)
        }
        MeasureKind::Strength => {
            let s = strength_value(&n, &cfg)?;
            let h = format!("strength K = {} ({}){}", s.k, s.classification, if s.caveat { ", mixed outputs skipped" } else { "" });
            let mut v = to_value(&s);
            let obj = v.as_object_mut().expect("struct");
            obj.insert("measure".into(), json!("strength"));
            obj.insert("value".into(), json!(s.k));
            obj.insert("bound".into(), json!("exact"));
            (v, h)
        }
    };
    println!("{headline}");
    finish(command, digest, a.seed, vec![result], started, a.out.as_deref())?;
    Ok(0)
}

fn check(a: CheckArgs, command: Vec<String>) -> CliResult<i32> {
    let started = Instant::now();
    if a.trials == 0 || a.starts == 0 {
        return Err(CliError::input("--trials and --starts must be positive"));
    }
    let suite = match a.suite {
        SuiteArg::Sc => Suite::Sc,
        SuiteArg::Rr => Suite::Rr,
        SuiteArg::Rc => Suite::Rc,
        SuiteArg::Rkme => Suite::Rkme,
        SuiteArg::All => Suite::All,
    };
    let cfg = CheckConfig {
        trials: a.trials,
        seed: a.seed,
        starts: a.starts,
        nightly: a.nightly,
        fault: a.inject_fault.map(|f| match f {
            FaultArg::SignFlipConcurrence => Fault::SignFlipConcurrence,
        }),
    };
    let report = run_suite(suite, &cfg)?;
    for p in &report.properties {
        println!(
            "{} {:<36} trials={:<3} worst_margin={:.3e}",
            if p.pass { "PASS" } else { "FAIL" },
            p.name,
            p.trials,
            p.worst_margin
        );
    }
    let results = report.properties.iter().map(to_value).collect();
    finish(command, Sha256::new(), a.seed, results, started, a.out.as_deref())?;
    Ok(if report.pass { 0 } else { EXIT_CHECK_FAILED })
}

fn oracle(a: OracleArgs, command: Vec<String>) -> CliResult<i32> {
    let started = Instant::now();
    let mut digest = Sha256::new();
    let need_channel = |d: &mut Sha256| -> CliResult<Channel> {
        let path = a.channel.as_deref().ok_or_else(|| CliError::input("this oracle needs --channel"))?;
        load_channel(path, d)
    };
    let result = match a.kind {
        OracleKind::GridRc => {
            let ch = need_channel(&mut digest)?;
            let v = grid_max_concurrence(&ch, a.steps)?;
            println!("grid-rc = {v:.12} (steps = {})", a.steps);
            json!({"oracle": "grid-rc", "value": v, "steps": a.steps})
        }
        OracleKind::Partition => {
            let path = a.state.as_deref().ok_or_else(|| CliError::input("partition oracle needs --state"))?;
            let k = a.k.ok_or_else(|| CliError::input("partition oracle needs --k"))?;
            let (bytes, value) = read_json(path)?;
            digest.update(&bytes);
            let state = parse_state(&value, &path.display().to_string())?;
            let check = exhaustive_partition_check(&state, k)?;
            println!(
                "{} in every {k}-partition",
                if check.nonseparable_everywhere { "nonseparable" } else { "not nonseparable" }
            );
            for p in &check.partitions {
                println!("  {:<16} {}", p.partition, if p.separable { "separable" } else { "entangled" });
            }
            let mut v = to_value(&check);
            v.as_object_mut().expect("struct").insert("oracle".into(), json!("partition"));
            v
        }
        OracleKind::FreeFloor => {
            let ch = need_channel(&mut digest)?;
            if a.samples == 0 {
                return Err(CliError::input("--samples must be positive"));
            }
            let v = sampled_free_distance_floor(&ch, a.samples, a.seed)?;
            println!("free-floor = {v:.12} bits ({} samples)", a.samples);
            json!({"oracle": "free-floor", "value": v, "samples": a.samples})
        }
    };
    finish(command, digest, a.seed, vec![result], started, a.out.as_deref())?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_and_sidecar() {
        assert_eq!(round12(0.1234567890123456), 0.123456789012);
        let mut v = json!({"value": 3e-15, "nested": [{"value": 1.0000000000004}], "k": 3});
        normalize_numbers(&mut v);
        assert_eq!(v["value"], json!(0.0));
        assert_eq!(v["value_raw"], json!(3e-15));
        assert_eq!(v["nested"][0]["value"], json!(1.0));
        assert_eq!(v["k"], json!(3));
    }

    #[test]
    fn parses_explicit_and_named_channels() {
        let explicit = json!({
            "in_dims": [2], "out_dims": [2],
            "kraus": [[[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]]
        });
        let x = parse_channel(&explicit, "x").unwrap();
        assert_eq!(x.kraus().len(), 1);
        let named = parse_channel(&json!({"name": "cyclic_shift", "params": {"n": 3}}), "c").unwrap();
        assert_eq!(named.in_dims().as_slice(), &[2, 2, 2]);
    }

    #[test]
    fn parse_errors_name_the_field() {
        let missing = parse_channel(&json!({"in_dims": [2], "out_dims": [2]}), "f").unwrap_err();
        assert!(missing.message.contains("`kraus`") && missing.code == EXIT_BAD_INPUT);
        let bad = parse_channel(&json!({"in_dims": [2], "out_dims": [2], "kraus": [[[[1.0]]]]}), "f").unwrap_err();
        assert!(bad.message.contains("kraus[0][0][0]"), "{}", bad.message);
        let not_tp = parse_channel(
            &json!({"in_dims": [2], "out_dims": [2], "kraus": [[[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]}),
            "f",
        )
        .unwrap_err();
        assert!(not_tp.message.contains("`kraus`"));
        let unknown = parse_channel(&json!({"name": "toffoli"}), "f").unwrap_err();
        assert!(unknown.message.contains("`name`"));
    }

    #[test]
    fn parses_states() {
        let ghz = parse_state(&json!({"name": "ghz", "params": {"n": 3}}), "s").unwrap();
        assert_eq!(ghz.dims().len(), 3);
        let v = parse_state(&json!({"dims": [2], "vector": [[0.6, 0.0], [0.0, 0.8]]}), "s").unwrap();
        assert!(v.is_pure());
        let bad = parse_state(&json!({"dims": [2], "vector": [[1.0, 0.0], [1.0, 0.0]]}), "s").unwrap_err();
        assert!(bad.message.contains("`vector`"));
    }
}
