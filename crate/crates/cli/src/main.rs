//! `rqbc`: run scenarios, tabulate bounds, sweep the brute-force oracles,
//! estimate hiding and audit transcripts.
//!
//! Data goes to stdout as CSV, a readable summary to stderr. Exit status is
//! 0 on success, 1 for usage and input errors, 2 for faults and failed checks.

mod config;
mod report;

use std::collections::hash_map::RandomState;
use std::fs;
use std::hash::BuildHasher;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rqbc::adversary::{
    brute_force_epsilon_chsh, brute_force_epsilon_rccbc, evaluate_nosignalling_lp,
    NOSIGNALLING_LP_CAP,
};
use rqbc::bitmath::{check_xi, epsilon_bound};
use rqbc::harness::{
    audit_no_signalling, builtin, run_scenario, two_sample_tv, Scenario, BUILTIN_NAMES,
};
use rqbc::protocols::Transcript;
use rqbc::BitString;
use serde::Serialize;

use crate::config::ScenarioFile;
use crate::report::RunReport;

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Fault(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn fault<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Fault(e.into())
}

#[derive(Parser, Debug)]
#[command(
    name = "rqbc",
    version,
    about = "Relativistic quantum bit commitment simulator"
)]
struct Cli {
    /// Worker threads for trial parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write per-trial CSV.
    Run(RunArgs),
    /// Tabulate the analytic binding bound.
    Bounds(BoundsArgs),
    /// Exhaustive cheating optimum against the bound.
    Bruteforce(BruteArgs),
    /// Estimate Bob's commit-phase guessing advantage.
    Hiding(HidingArgs),
    /// Check transcripts for signalling and causality violations.
    Audit(AuditArgs),
    /// List builtin scenarios.
    List,
}

#[derive(Args, Debug, Clone, Default)]
struct ScenarioArgs {
    /// Builtin scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// TOML scenario file; its values override the builtin, flags override both.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    xi: Option<f64>,
    /// RCCBC distance-check constant.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeat: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// CSV destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the full TOML report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write each transcript in line format into this directory.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Round counts, e.g. `1,10,100` or `1-8`.
    #[arg(long, default_value = "1,10,100,1000,10000")]
    n: String,
    #[arg(long, default_value = "0.02,0.05,0.1")]
    xi: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum OracleVariant {
    Chsh1,
    Rccbc,
}

#[derive(Args, Debug)]
struct BruteArgs {
    #[arg(long, value_enum, default_value = "chsh1")]
    variant: OracleVariant,
    /// Round counts, e.g. `1-6` or `8,10,12`.
    #[arg(long, default_value = "1-6")]
    n: String,
    #[arg(long, default_value_t = 0.05)]
    xi: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Agreed `L⁰` pattern for CHSH1, repeated to length N.
    #[arg(long, default_value = "0")]
    l0: String,
    /// Add the no-signalling LP value where N is small enough.
    #[arg(long)]
    lp: bool,
}

#[derive(Args, Debug)]
struct HidingArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Compare views against a second builtin scenario instead of across bit values.
    #[arg(long)]
    against: Option<String>,
    /// Fail (exit 2) when the advantage exceeds this.
    #[arg(long)]
    max_advantage: Option<f64>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Line-format transcript files.
    files: Vec<PathBuf>,
    /// Also run and audit a scenario.
    #[command(flatten)]
    scenario: ScenarioArgs,
}

/// Comma-separated counts; items may be inclusive ranges `a-b`.
fn parse_counts(text: &str) -> anyhow::Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || anyhow!("cannot parse {item:?}; expected a count or a range like 1-6");
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    bail!("empty range {item:?}");
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        bail!("empty list");
    }
    Ok(out)
}

fn parse_reals(text: &str) -> anyhow::Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        out.push(
            item.parse()
                .map_err(|_| anyhow!("cannot parse {item:?} as a number"))?,
        );
    }
    if out.is_empty() {
        bail!("empty list");
    }
    Ok(out)
}

impl ScenarioArgs {
    /// The scenario after builtin, file and flags are layered, with the
    /// seed drawn from entropy when nothing set it.
    fn resolve(&self) -> Result<Scenario, Failure> {
        let mut file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))
                    .map_err(usage)?;
                config::parse(&text)
                    .with_context(|| format!("in {}", path.display()))
                    .map_err(usage)?
            }
            None => ScenarioFile::default(),
        };
        if let Some(name) = self.scenario.as_deref() {
            file.base = Some(name.to_string());
        }
        let p = &mut file.protocol;
        p.n = self.n.or(p.n);
        p.xi = self.xi.or(p.xi);
        p.c = self.c.or(p.c);
        p.delta = self.delta.or(p.delta);
        file.seed = self.seed.or(file.seed);
        file.repeat = self.repeat.or(file.repeat);
        if file.base.is_none() && file.protocol.variant.is_none() {
            return Err(usage(anyhow!("give --scenario NAME or --config FILE")));
        }
        let (mut s, seeded) = file.resolve().map_err(usage)?;
        if !seeded {
            s.seed = RandomState::new().hash_one(std::process::id());
        }
        s.config.validate().map_err(usage)?;
        if s.repeat == 0 {
            return Err(usage(anyhow!("repeat must be positive")));
        }
        Ok(s)
    }
}

fn csv_out(path: Option<&Path>) -> anyhow::Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn write_rows<R: Serialize>(path: Option<&Path>, rows: &[R]) -> anyhow::Result<()> {
    let mut w = csv_out(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_run(args: &RunArgs) -> CmdResult {
    let s = args.scenario.resolve()?;
    eprintln!("running {} with seed {}", s.name, s.seed);
    let out = run_scenario(&s).map_err(fault)?;
    let report = RunReport::new(&s, &out);
    write_rows(args.out.as_deref(), &report.trials).map_err(fault)?;
    if let Some(dir) = &args.transcripts {
        fs::create_dir_all(dir).map_err(fault)?;
        for t in &out.trials {
            for (k, tr) in t.transcripts.iter().enumerate() {
                let path = dir.join(format!("trial-{:05}-{k}.txt", t.trial));
                fs::write(&path, tr.render()).map_err(fault)?;
            }
        }
    }
    if let Some(path) = &args.report {
        let text = toml::to_string(&report).map_err(fault)?;
        fs::write(path, text).map_err(fault)?;
    }
    for line in report.summary_lines() {
        eprintln!("{line}");
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundRow {
    n: usize,
    xi: f64,
    radius_fraction: f64,
    entropy: f64,
    epsilon: f64,
    log2_epsilon: f64,
}

fn cmd_bounds(args: &BoundsArgs) -> CmdResult {
    let ns = parse_counts(&args.n).map_err(usage)?;
    let xis = parse_reals(&args.xi).map_err(usage)?;
    for &xi in &xis {
        check_xi(xi).map_err(usage)?;
    }
    let mut rows = Vec::new();
    for &xi in &xis {
        for &n in &ns {
            let b = epsilon_bound(n, xi).map_err(usage)?;
            rows.push(BoundRow {
                n,
                xi,
                radius_fraction: b.radius_fraction,
                entropy: b.entropy,
                epsilon: b.epsilon,
                log2_epsilon: b.log2_epsilon(),
            });
        }
    }
    write_rows(None, &rows).map_err(fault)?;
    eprintln!("{} rows", rows.len());
    Ok(())
}

#[derive(Serialize)]
struct BruteRow {
    variant: &'static str,
    n: usize,
    parameter: f64,
    epsilon_star: f64,
    p0: f64,
    p1: f64,
    bound: Option<f64>,
    gap: Option<f64>,
    nosignalling: Option<f64>,
}

fn cmd_bruteforce(args: &BruteArgs) -> CmdResult {
    let ns = parse_counts(&args.n).map_err(usage)?;
    let mut rows = Vec::new();
    match args.variant {
        OracleVariant::Chsh1 => {
            check_xi(args.xi).map_err(usage)?;
            let pattern: BitString = args.l0.parse().map_err(usage)?;
            if pattern.is_empty() {
                return Err(usage(anyhow!("--l0 must not be empty")));
            }
            for &n in &ns {
                let bits: Vec<u8> = (0..n).map(|i| pattern.get(i % pattern.len())).collect();
                let l0 = BitString::from_bits(&bits);
                let r = brute_force_epsilon_chsh(n, args.xi, &l0).map_err(usage)?;
                let bound = epsilon_bound(n, args.xi).map_err(usage)?.epsilon;
                let nosignalling = if args.lp && n <= NOSIGNALLING_LP_CAP {
                    Some(evaluate_nosignalling_lp::<f64>(n, args.xi, &l0).map_err(fault)?)
                } else {
                    None
                };
                rows.push(BruteRow {
                    variant: "chsh1",
                    n,
                    parameter: args.xi,
                    epsilon_star: r.epsilon_star,
                    p0: r.p0,
                    p1: r.p1,
                    bound: Some(bound),
                    gap: Some(bound - r.epsilon_star),
                    nosignalling,
                });
            }
        }
        OracleVariant::Rccbc => {
            for &n in &ns {
                let r = brute_force_epsilon_rccbc(n, args.c).map_err(usage)?;
                rows.push(BruteRow {
                    variant: "rccbc",
                    n,
                    parameter: args.c,
                    epsilon_star: r.epsilon_star,
                    p0: r.p0,
                    p1: r.p1,
                    bound: None,
                    gap: None,
                    nosignalling: None,
                });
            }
        }
    }
    write_rows(None, &rows).map_err(fault)?;
    let broken: Vec<usize> = rows
        .iter()
        .filter(|r| r.gap.is_some_and(|g| g < 0.0))
        .map(|r| r.n)
        .collect();
    if !broken.is_empty() {
        return Err(fault(anyhow!(
            "brute-force optimum exceeds the bound at N = {broken:?}"
        )));
    }
    eprintln!("{} rows", rows.len());
    Ok(())
}

#[derive(Serialize)]
struct HidingRow {
    scenario: String,
    against: Option<String>,
    trials: usize,
    samples0: usize,
    samples1: usize,
    advantage: f64,
    std_error: Option<f64>,
    plug_in_tv: Option<f64>,
    total_variation: f64,
}

fn cmd_hiding(args: &HidingArgs) -> CmdResult {
    let s = args.scenario.resolve()?;
    eprintln!("running {} with seed {}", s.name, s.seed);
    let out = run_scenario(&s).map_err(fault)?;
    let row = match &args.against {
        None => {
            let h = out.summary.hiding.ok_or_else(|| {
                fault(anyhow!(
                    "{} produced fewer than two views per bit value",
                    s.name
                ))
            })?;
            HidingRow {
                scenario: s.name.clone(),
                against: None,
                trials: out.trials.len(),
                samples0: h.samples[0],
                samples1: h.samples[1],
                advantage: h.advantage,
                std_error: Some(h.std_error),
                plug_in_tv: Some(h.plug_in_tv),
                total_variation: h.total_variation(),
            }
        }
        Some(other) => {
            let mut t = ScenarioArgs {
                scenario: Some(other.clone()),
                ..args.scenario.clone()
            };
            t.config = None;
            let s2 = t.resolve()?;
            let out2 = run_scenario(&s2).map_err(fault)?;
            let a: Vec<&str> = out.trials.iter().map(|t| t.view.as_str()).collect();
            let b: Vec<&str> = out2.trials.iter().map(|t| t.view.as_str()).collect();
            let tv = two_sample_tv(&a, &b).map_err(fault)?;
            HidingRow {
                scenario: s.name.clone(),
                against: Some(s2.name.clone()),
                trials: out.trials.len(),
                samples0: a.len(),
                samples1: b.len(),
                advantage: tv / 2.0,
                std_error: None,
                plug_in_tv: None,
                total_variation: tv,
            }
        }
    };
    eprintln!(
        "advantage {:.4} (total variation {:.4}) over {} + {} views",
        row.advantage, row.total_variation, row.samples0, row.samples1
    );
    let adv = row.advantage;
    write_rows(None, &[row]).map_err(fault)?;
    if let Some(max) = args.max_advantage {
        if adv > max {
            return Err(fault(anyhow!("advantage {adv:.4} exceeds {max}")));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ViolationRow {
    source: String,
    event: usize,
    agent: String,
    label: String,
    detail: String,
}

fn cmd_audit(args: &AuditArgs) -> CmdResult {
    let mut sources: Vec<(String, Transcript)> = Vec::new();
    for path in &args.files {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(usage)?;
        let t = Transcript::parse(&text)
            .with_context(|| format!("in {}", path.display()))
            .map_err(usage)?;
        sources.push((path.display().to_string(), t));
    }
    let sa = &args.scenario;
    if sa.scenario.is_some() || sa.config.is_some() {
        let s = sa.resolve()?;
        let out = run_scenario(&s).map_err(fault)?;
        for t in out.trials {
            for (k, tr) in t.transcripts.into_iter().enumerate() {
                sources.push((format!("{}#{}.{k}", s.name, t.trial), tr));
            }
        }
    }
    if sources.is_empty() {
        return Err(usage(anyhow!(
            "nothing to audit: give transcript files or --scenario"
        )));
    }
    let mut rows = Vec::new();
    let mut bad = 0;
    for (source, t) in &sources {
        if let Err(vs) = audit_no_signalling(t) {
            bad += 1;
            for v in vs {
                rows.push(ViolationRow {
                    source: source.clone(),
                    event: v.event,
                    agent: v.agent.to_string(),
                    label: v.label.clone(),
                    detail: v.to_string(),
                });
            }
        }
    }
    write_rows(None, &rows).map_err(fault)?;
    eprintln!(
        "{} transcripts audited, {bad} with violations",
        sources.len()
    );
    if bad > 0 {
        return Err(fault(anyhow!("{} violations found", rows.len())));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Bruteforce(a) => cmd_bruteforce(a),
        Command::Hiding(a) => cmd_hiding(a),
        Command::Audit(a) => cmd_audit(a),
        Command::List => {
            for name in BUILTIN_NAMES {
                let s = builtin(name).expect("builtin names resolve");
                println!(
                    "{name}\t{}\tN={}\trepeat={}",
                    s.config.variant, s.config.n, s.repeat
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(usage(anyhow!("--jobs must be positive"))),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(fault(e)),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Fault(e)) => {
            eprintln!("fault: {e:#}");
            ExitCode::from(2)
        }
    }
}
