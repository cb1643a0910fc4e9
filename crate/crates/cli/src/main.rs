mod config;
mod tasks;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{Assertion, Config, Task};
use pauli_core::field::{builtin_catalog, ProfileSpec};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use tasks::{Table, TaskOutput};

const OUT_ENV: &str = "PAULI_OUT_DIR";
const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(name = "pauli", version, about = "Spectral experiments for 2D Pauli operators in localized magnetic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flux F, its integer part and the zero-mode count.
    Flux(RunArgs),
    /// Negative eigenvalues from the radial or planar solver.
    Spectrum(RunArgs),
    /// Variational lower bound on the number of bound states.
    Certify(RunArgs),
    /// Weak-coupling s-wave energies against the predicted u(λ).
    Sweep(RunArgs),
    /// Birman–Schwinger bound states and the small-coupling expansion.
    Bs(RunArgs),
    /// ∫A² against the logarithmic pair integral of B.
    Identity(RunArgs),
    /// Aharonov–Casher zero modes: decay, residuals, field moments.
    Zeromodes(RunArgs),
    /// Built-in field profiles with their fluxes.
    Profiles {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Parent directory for run directories [default: $PAULI_OUT_DIR or ./runs].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides numerics.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Format of the tables.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Ok(false) when a scenario assertion fails.
fn dispatch(cli: Cli) -> Result<bool> {
    let (task, args) = match cli.command {
        Command::Profiles { format } => {
            print_profiles(format)?;
            return Ok(true);
        }
        Command::Flux(a) => (Task::Flux, a),
        Command::Spectrum(a) => (Task::Spectrum, a),
        Command::Certify(a) => (Task::Certify, a),
        Command::Sweep(a) => (Task::Sweep, a),
        Command::Bs(a) => (Task::Bs, a),
        Command::Identity(a) => (Task::Identity, a),
        Command::Zeromodes(a) => (Task::Zeromodes, a),
    };
    run_scenario(task, &args)
}

fn print_profiles(format: Format) -> Result<()> {
    let cat = builtin_catalog()?;
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&cat)?)?,
        Format::Csv => {
            let table = Table {
                name: "profiles".into(),
                header: vec!["name", "kind", "flux", "nonsymmetric", "corpus", "parameters", "description"],
                rows: cat
                    .iter()
                    .map(|e| {
                        vec![
                            e.name.to_string(),
                            serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                            tasks::num(Some(e.flux)),
                            e.nonsymmetric.to_string(),
                            e.corpus.to_string(),
                            e.parameters.to_string(),
                            e.description.to_string(),
                        ]
                    })
                    .collect(),
            };
            out.write_all(&csv_bytes(&table))?;
        }
    }
    Ok(())
}

fn config_hash(cfg: &Config, base: Option<&Path>) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cfg)?);
    if let ProfileSpec::Sampled { path } = &cfg.profile {
        let p = match base {
            Some(b) if path.is_relative() => b.join(path),
            _ => path.clone(),
        };
        h.update(std::fs::read(&p).with_context(|| format!("reading sampled field {}", p.display()))?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn run_scenario(task: Task, args: &RunArgs) -> Result<bool> {
    let t0 = Instant::now();
    let mut cfg = Config::load(&args.config)?;
    if let Some(t) = cfg.task {
        if t != task {
            bail!("config task is {:?} but the subcommand is {}", t.name(), task.name());
        }
    }
    cfg.task = Some(task);
    if let Some(s) = args.seed {
        cfg.numerics.seed = Some(s);
    }
    let seed = cfg.numerics.seed.unwrap_or(DEFAULT_SEED);
    let base = args.config.parent().filter(|p| !p.as_os_str().is_empty());
    let hash = config_hash(&cfg, base)?;
    let profile = cfg.build_profile(base)?;

    let t_compute = Instant::now();
    let result = tasks::run(task, &cfg, &profile, seed).with_context(|| format!("task {}", task.name()))?;
    let compute_s = t_compute.elapsed().as_secs_f64();

    let checks: Vec<Value> = cfg.assertions.iter().map(|a| check(a, &result.outputs)).collect();
    let passed = checks.iter().all(|c| c["pass"] == json!(true));

    let parent = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    let dir = new_run_dir(&parent, &format!("{}-{}", task.name(), &hash[..12]))?;
    let files = write_artifacts(&dir, &result, args.format)?;

    let summary = json!({
        "tool": "pauli",
        "version": env!("CARGO_PKG_VERSION"),
        "task": task.name(),
        "config_hash": hash,
        "config": cfg,
        "seed": seed,
        "profile": { "name": profile.name, "radial": profile.is_radial() },
        "outputs": result.outputs,
        "tolerances": result.tolerances,
        "assertions": checks,
        "passed": passed,
        "files": files,
        "timings": { "compute_s": compute_s, "total_s": t0.elapsed().as_secs_f64() },
    });
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;

    println!("{}", dir.display());
    for c in &checks {
        println!(
            "{} {} {} {} (actual {})",
            if c["pass"] == json!(true) { "PASS" } else { "FAIL" },
            c["metric"].as_str().unwrap_or_default(),
            c["op"].as_str().unwrap_or_default(),
            c["value"],
            c["actual"]
        );
    }
    Ok(passed)
}

/// Value at a dot-separated path; numeric segments index arrays.
fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |cur, seg| match cur {
        Value::Object(m) => m.get(seg),
        Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => None,
    })
}

fn check(a: &Assertion, outputs: &Value) -> Value {
    let actual = lookup(outputs, &a.metric).and_then(|v| v.as_f64().or_else(|| v.as_bool().map(|b| b as u8 as f64)));
    let pass = actual.is_some_and(|x| a.op.holds(x, a.value));
    json!({
        "metric": a.metric,
        "op": serde_json::to_value(a.op).unwrap_or(Value::Null),
        "value": a.value,
        "actual": actual,
        "pass": pass,
    })
}

/// First free `<parent>/<stem>-NNN`; existing runs are never touched.
fn new_run_dir(parent: &Path, stem: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    for k in 1..100_000 {
        let dir = parent.join(format!("{stem}-{k:03}"));
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
    bail!("no free run directory under {}", parent.display())
}

fn csv_bytes(t: &Table) -> Vec<u8> {
    let quote = |s: &str| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut out = t.header.join(",");
    out.push('\n');
    for r in &t.rows {
        out.push_str(&r.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn json_bytes(t: &Table) -> Result<Vec<u8>> {
    let rows: Vec<Value> =
        t.rows.iter().map(|r| Value::Object(t.header.iter().zip(r).map(|(h, c)| (h.to_string(), json!(c))).collect())).collect();
    Ok((serde_json::to_string_pretty(&rows)? + "\n").into_bytes())
}

fn write_artifacts(dir: &Path, result: &TaskOutput, format: Format) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for t in &result.tables {
        let (name, bytes) = match format {
            Format::Csv => (format!("{}.csv", t.name), csv_bytes(t)),
            Format::Json => (format!("{}.json", t.name), json_bytes(t)?),
        };
        std::fs::write(dir.join(&name), bytes)?;
        names.push(name);
    }
    for (name, bytes) in &result.files {
        std::fs::write(dir.join(name), bytes)?;
        names.push(name.clone());
    }
    Ok(names)
}
