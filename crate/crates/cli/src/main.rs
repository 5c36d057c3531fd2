mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use a2_building::dynamics::{
    combinatorial_convergence_stats, drift_estimate, empirical_boundary_measure,
    find_independent_srh_pair, opposite_pair_frequency, srh_proportion_curve, DynamicsError,
    SOFT_STEP_CAP,
};
use a2_building::isometry::classify;
use a2_building::tits::{
    falsify_margins, free_group_certificate, local_global_fixed_point, pingpong_power,
    verify_certificate, FixedPointVerdict, PingPongCertificate, TitsError, Verdict, VerifyOutcome,
};

use config::{positive, RunConfig};

#[derive(Parser)]
#[command(
    name = "a2walk",
    version,
    about = "Random walks, isometries and ping-pong on the SL3 building"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; never changes the output.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for report.json and CSV files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, PartialEq, Eq)]
enum Command {
    /// Classify the elements of [classify].
    Classify,
    /// Strongly regular proportion of Z_n over a grid of n.
    Proportion,
    /// Drift estimate θ(o, Z_n·o)/n.
    Drift,
    /// Stabilization of the germ of Z_n·o at o.
    Converge,
    /// Opposition of two independent walks.
    Opposite,
    /// Search for an independent strongly regular pair.
    Pair,
    /// Ping-pong certificate for [free_cert].
    FreeCert,
    /// Re-verify a certificate JSON file.
    Verify { certificate: PathBuf },
    /// Local-to-global fixed-point search for [fixed_point].
    FixedPoint,
    /// Boundary histogram over depth-k cylinders.
    Boundary,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Proportion => "proportion",
            Command::Drift => "drift",
            Command::Converge => "converge",
            Command::Opposite => "opposite",
            Command::Pair => "pair",
            Command::FreeCert => "free-cert",
            Command::Verify { .. } => "verify",
            Command::FixedPoint => "fixed-point",
            Command::Boundary => "boundary",
        }
    }

    /// Commands that sample the configured measure.
    fn uses_measure(&self) -> bool {
        matches!(
            self,
            Command::Proportion
                | Command::Drift
                | Command::Converge
                | Command::Opposite
                | Command::Pair
                | Command::Boundary
        )
    }
}

/// Maps to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Success,
    Refuted,
    Witness,
    Inconclusive,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Refuted | Status::Witness => 2,
            Status::Inconclusive => 3,
        }
    }
}

struct Output {
    status: Status,
    result: Value,
    csv: Vec<(&'static str, String)>,
    /// Extra JSON artifacts written next to the report.
    files: Vec<(&'static str, Value)>,
}

impl Output {
    fn new(status: Status, result: impl Serialize) -> Result<Self> {
        Ok(Output {
            status,
            result: serde_json::to_value(result)?,
            csv: Vec::new(),
            files: Vec::new(),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let (bytes, cfg) = match (&cli.config, &cli.command) {
        (_, Command::Verify { .. }) => (None, None),
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg = RunConfig::parse(&text).with_context(|| path.display().to_string())?;
            (Some(text), Some(cfg))
        }
        (None, _) => bail!("--config is required for {}", cli.command.name()),
    };
    let seed = cli.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let workers = cli
        .workers
        .or(cfg.as_ref().and_then(|c| c.workers))
        .unwrap_or(1);
    positive(workers, "workers")?;

    let output = match (&cli.command, &cfg) {
        (Command::Verify { certificate }, _) => verify(certificate)?,
        (cmd, Some(cfg)) => dispatch(cmd, cfg, seed, workers)?,
        (_, None) => unreachable!("config loaded above"),
    };

    let mut report = json!({
        "command": cli.command.name(),
        "status": output.status,
    });
    if let Some(text) = &bytes {
        report["schema_version"] = json!(config::SCHEMA_VERSION);
        report["config_sha256"] = json!(hex::encode(Sha256::digest(text.as_bytes())));
        report["seed"] = json!(seed);
    }
    if cli.command.uses_measure() {
        // symmetry and the rest are validated; generation is the user's claim
        report["assumptions"] =
            json!(["the measure support generates the group as a semigroup; not checked"]);
    }
    report["result"] = output.result;
    let rendered = serde_json::to_string_pretty(&report)? + "\n";

    let out = cli
        .out
        .clone()
        .or(cfg.as_ref().and_then(|c| c.out.clone()).map(PathBuf::from));
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            write(&dir.join("report.json"), &rendered)?;
            for (name, body) in &output.csv {
                write(&dir.join(name), body)?;
            }
            for (name, value) in &output.files {
                write(
                    &dir.join(name),
                    &(serde_json::to_string_pretty(value)? + "\n"),
                )?;
            }
        }
        None => print!("{rendered}"),
    }
    Ok(output.status.code())
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn warn_long(n: usize) {
    if n > SOFT_STEP_CAP {
        eprintln!("warning: n = {n} exceeds {SOFT_STEP_CAP}; exact products get slow");
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig, seed: u64, workers: usize) -> Result<Output> {
    let o = cfg.basepoint()?;
    match cmd {
        Command::Classify => {
            let c = &cfg.classify;
            if c.elements.is_empty() {
                bail!("classify.elements is empty");
            }
            let mut reports = Vec::new();
            for (i, rows) in c.elements.iter().enumerate() {
                let g = cfg.element(rows, &format!("classify.elements[{i}]"))?;
                let class = classify(&g).with_context(|| {
                    format!(
                        "classify.elements[{i}] rejected (type_shift={})",
                        g.type_shift()
                    )
                })?;
                reports.push(json!({ "matrix": g.matrix(), "class": class }));
            }
            Output::new(Status::Success, reports)
        }
        Command::Proportion => {
            let c = &cfg.proportion;
            positive(c.trials, "proportion.trials")?;
            if c.n_grid.is_empty() || c.n_grid.contains(&0) {
                bail!("proportion.n_grid must be a nonempty list of positive steps");
            }
            c.n_grid.iter().for_each(|&n| warn_long(n));
            let spec = cfg.measure()?;
            let curve = srh_proportion_curve(&spec, &c.n_grid, c.trials, seed, workers)?;
            let mut out = Output::new(Status::Success, &curve)?;
            out.csv.push(("proportion.csv", curve.to_csv()));
            Ok(out)
        }
        Command::Drift => {
            let c = &cfg.drift;
            positive(c.trials, "drift.trials")?;
            positive(c.n, "drift.n")?;
            warn_long(c.n);
            let spec = cfg.measure()?;
            Output::new(
                Status::Success,
                drift_estimate(&spec, c.n, c.trials, seed, workers, &o)?,
            )
        }
        Command::Converge => {
            let c = &cfg.converge;
            positive(c.trials, "converge.trials")?;
            positive(c.n, "converge.n")?;
            let horizon = c.horizon.unwrap_or(2 * c.n);
            if horizon < c.n {
                bail!("converge.horizon must be at least n");
            }
            warn_long(horizon);
            let spec = cfg.measure()?;
            let report =
                combinatorial_convergence_stats(&spec, horizon, c.trials, seed, workers, &o)?;
            let stabilized = report.stabilized_by(c.n);
            let mut csv = String::from("trial,stabilization_time\n");
            for (t, s) in report.stabilization_times.iter().enumerate() {
                csv.push_str(&format!(
                    "{t},{}\n",
                    s.map(|s| s.to_string()).unwrap_or_default()
                ));
            }
            let mut out = Output::new(
                Status::Success,
                json!({
                    "n": c.n,
                    "horizon": horizon,
                    "trials": c.trials,
                    "stabilized": stabilized,
                    "display": { "fraction": stabilized as f64 / c.trials as f64 },
                    "stabilization_times": report.stabilization_times,
                }),
            )?;
            out.csv.push(("converge.csv", csv));
            Ok(out)
        }
        Command::Opposite => {
            let c = &cfg.opposite;
            positive(c.trials, "opposite.trials")?;
            positive(c.n, "opposite.n")?;
            warn_long(c.n);
            let spec = cfg.measure()?;
            Output::new(
                Status::Success,
                opposite_pair_frequency(&spec, c.n, c.trials, seed, workers, &o)?,
            )
        }
        Command::Pair => {
            let c = &cfg.pair;
            warn_long(c.budget);
            let spec = cfg.measure()?;
            match find_independent_srh_pair(&spec, seed, c.budget, c.precision) {
                Ok(pair) => Output::new(Status::Success, pair),
                Err(DynamicsError::BudgetExhausted(b)) => {
                    Output::new(Status::Inconclusive, json!({ "budget_exhausted": b }))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::FreeCert => free_cert(cfg, seed),
        Command::FixedPoint => {
            let c = &cfg.fixed_point;
            if c.generators.is_empty() {
                bail!("fixed_point.generators is empty");
            }
            let gens = c
                .generators
                .iter()
                .enumerate()
                .map(|(i, g)| cfg.element(g, &format!("fixed_point.generators[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let report = local_global_fixed_point(&gens, c.radius, c.word_depth, &o)?;
            let status = match report.result {
                FixedPointVerdict::FixedVertex { .. } => Status::Success,
                FixedPointVerdict::HyperbolicWitness { .. } => Status::Witness,
                FixedPointVerdict::Inconclusive { .. } => Status::Inconclusive,
            };
            Output::new(status, report)
        }
        Command::Boundary => {
            let c = &cfg.boundary;
            positive(c.trials, "boundary.trials")?;
            positive(c.n, "boundary.n")?;
            warn_long(c.n);
            let spec = cfg.measure()?;
            let report =
                empirical_boundary_measure(&spec, c.n, c.trials, seed, workers, &o, c.depth)?;
            let mut csv = String::from("cylinder,count\n");
            for (key, count) in &report.bins {
                csv.push_str(&format!("\"{key}\",{count}\n"));
            }
            let mut out = Output::new(Status::Success, &report)?;
            out.csv.push(("boundary.csv", csv));
            Ok(out)
        }
        Command::Verify { .. } => unreachable!("handled without a config"),
    }
}

fn free_cert(cfg: &RunConfig, seed: u64) -> Result<Output> {
    let c = &cfg.free_cert;
    let (Some(g1), Some(g2)) = (&c.g1, &c.g2) else {
        bail!("free_cert.g1 and free_cert.g2 are required");
    };
    let g1 = cfg.element(g1, "free_cert.g1")?;
    let g2 = cfg.element(g2, "free_cert.g2")?;
    let power = match c.power {
        Some(0) => bail!("free_cert.power must be positive"),
        Some(n) => n,
        None => match pingpong_power(&g1, &g2, c.precision, c.margin) {
            Ok(n) => n,
            Err(e) => {
                eprintln!("warning: no certified power ({e}); using N = 1");
                1
            }
        },
    };
    let cert = match free_group_certificate(&g1, &g2, power, c.depth, c.margin, c.precision) {
        Ok(cert) => cert,
        Err(TitsError::WordCollision(word)) => {
            return Output::new(
                Status::Refuted,
                json!({ "power": power, "word_collision": word }),
            );
        }
        Err(e) => return Err(e.into()),
    };
    let falsifier = if c.falsifier_samples > 0 && cert.margins.is_some() {
        Some(falsify_margins(
            &g1,
            &g2,
            c.precision,
            c.margin,
            power,
            c.falsifier_samples,
            seed,
        )?)
    } else {
        None
    };
    let falsified = falsifier.as_ref().is_some_and(|f| {
        f.inclusion_failures + f.overlap_failures + f.membership_disagreements > 0
    });
    let status = match cert.verdict {
        _ if falsified => Status::Refuted,
        Verdict::Pass => Status::Success,
        Verdict::Inconclusive => Status::Inconclusive,
    };
    let mut out = Output::new(
        status,
        json!({ "certificate": cert, "falsifier": falsifier }),
    )?;
    out.files
        .push(("certificate.json", serde_json::to_value(&cert)?));
    Ok(out)
}

fn verify(path: &Path) -> Result<Output> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cert: PingPongCertificate = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            return Output::new(
                Status::Refuted,
                VerifyOutcome::Refuted(format!("unreadable certificate: {e}")),
            );
        }
    };
    let outcome = verify_certificate(&cert);
    let status = match outcome {
        VerifyOutcome::Pass => Status::Success,
        VerifyOutcome::Inconclusive => Status::Inconclusive,
        VerifyOutcome::Refuted(_) => Status::Refuted,
    };
    Output::new(status, outcome)
}
