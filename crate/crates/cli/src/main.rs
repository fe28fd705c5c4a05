//! `hardcore` command-line front end.
//!
//! Every run prints its configuration as one JSON line, then one JSON result
//! line. Exit status is 2 for bad arguments, 1 for numerical failures and 0
//! otherwise.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hardcore::acceptance;
use hardcore::graph::{from_spec, Graph, RegularGraph};
use hardcore::recursion::MarginalRecursion;
use hardcore::rewire::{rewire_chain, ChainMode};
use hardcore::shooting::{find_cstar_with, ShootingOptions};
use hardcore::volume::{
    gamma_asymptotic, limit_integrals, mc_volume_sis_with, ratio_lemma_check, rewire_ratio, Proposal,
    SignVariant, SisOptions,
};
use hardcore::{GridDistribution, MeasureKind, SpinMeasure};

#[derive(Parser, Debug)]
#[command(name = "hardcore", version, about = "Hardcore model on [0,1]: tree recursion, limit ODE, volumes, rewiring")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Tree branching (marginal, ode) or graph degree (gamma).
    #[arg(long, global = true)]
    delta: Option<usize>,

    /// Activity.
    #[arg(long, global = true, default_value_t = 1.0)]
    lambda: f64,

    /// continuous | two-state | multi:M | eps:E
    #[arg(long, global = true, default_value = "continuous")]
    measure: MeasureKind,

    /// Maximum recursion depth.
    #[arg(long, global = true, default_value_t = 10_000)]
    depth: usize,

    /// Grid intervals on [0,1].
    #[arg(long, global = true, default_value_t = 4096)]
    grid: usize,

    /// Convergence tolerance (recursion gap, or |tau - 1| for shooting) [default: 1e-8]
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Edge-list file or generator: cycle:N, path:N, complete:N, edge,
    /// triangle, matching:N, tree:B:D, petersen, heawood, random:N:D:SEED[:GIRTH]
    #[arg(long, global = true)]
    graph: Option<String>,

    /// SIS sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output path prefix; files are PREFIX.csv, PREFIX.json, PREFIX_NNNN.edges
    /// depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// corrected | as-printed
    #[arg(long, global = true, default_value = "corrected")]
    sign: SignVariant,

    /// SIS proposal: prior | cavity
    #[arg(long, global = true, default_value = "prior")]
    proposal: Proposal,

    /// Minimum girth kept by the rewiring chain.
    #[arg(long, global = true, default_value_t = 4)]
    girth: usize,

    #[arg(long, global = true, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,

    /// Acceptance criteria to run, e.g. 1,3,7 (verify only).
    #[arg(long, global = true, value_delimiter = ',')]
    only: Vec<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Tree recursion to its odd/even limits.
    Marginal,
    /// Shooting solution of the limit ODE at lambda = 1.
    Ode,
    /// Per-node log-partition limit for degree-delta regular graphs.
    Gamma,
    /// SIS estimate of log Z on a graph.
    Volume,
    /// Rewiring chain on a regular graph.
    Rewire,
    /// Acceptance suite; exits 1 if any criterion fails.
    Verify,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Lemma,
    Exhaustive,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: Command,
    measure: MeasureKind,
    lambda: f64,
    delta: Option<usize>,
    depth: usize,
    grid: usize,
    tol: f64,
    graph: Option<&'a str>,
    samples: u64,
    seed: u64,
    out: Option<&'a Path>,
    sign_variant: SignVariant,
    proposal: Proposal,
    girth: usize,
    mode: Mode,
    only: &'a [usize],
}

enum Fail {
    Usage(String),
    Numeric(String),
}

type Outcome<T> = std::result::Result<T, Fail>;

fn usage(e: impl std::fmt::Display) -> Fail {
    Fail::Usage(e.to_string())
}

fn numeric(e: impl std::fmt::Display) -> Fail {
    Fail::Numeric(e.to_string())
}

/// Everything checked before dispatch.
struct Prepared {
    measure: SpinMeasure,
    graph: Option<Graph>,
}

fn prepare(cli: &Cli) -> Outcome<Prepared> {
    let measure = SpinMeasure::new(cli.measure, cli.lambda).map_err(usage)?;
    let need_delta = matches!(cli.command, Command::Marginal | Command::Ode | Command::Gamma);
    match cli.delta {
        None if need_delta => return Err(usage("--delta is required")),
        Some(0) if cli.command != Command::Ode => return Err(usage("--delta must be >= 1")),
        _ => {}
    }
    if cli.tol.map_or(false, |t| !(t > 0.0)) {
        return Err(usage("--tol must be positive"));
    }
    if cli.grid < 4 {
        return Err(usage("--grid must be at least 4"));
    }
    match cli.command {
        Command::Ode if cli.lambda != 1.0 || cli.measure != MeasureKind::Continuous => {
            return Err(usage("ode solves the continuous model at --lambda 1"));
        }
        Command::Gamma if cli.measure != MeasureKind::Continuous => {
            return Err(usage("gamma needs --measure continuous"));
        }
        Command::Marginal if cli.depth < 2 => return Err(usage("--depth must be >= 2")),
        _ => {}
    }
    if let Some(&bad) = cli.only.iter().find(|&&i| !(1..=acceptance::CRITERIA).contains(&i)) {
        return Err(usage(format!("--only: no criterion {bad}")));
    }
    let graph = match cli.command {
        Command::Volume | Command::Rewire => {
            let spec = cli.graph.as_deref().ok_or_else(|| usage("--graph is required"))?;
            Some(from_spec(spec).map_err(|e| usage(format!("--graph {spec}: {e}")))?)
        }
        _ => None,
    };
    Ok(Prepared { measure, graph })
}

fn default_tol(cli: &Cli) -> f64 {
    cli.tol.unwrap_or(1e-8)
}

/// Write-then-rename next to the target.
fn write_atomic(path: &Path, contents: &str) -> Outcome<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(usage)?;
    tmp.write_all(contents.as_bytes()).map_err(usage)?;
    tmp.persist(path).map_err(|e| usage(e.error))?;
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(cli: &Cli, value: &serde_json::Value) -> Outcome<()> {
    let text = serde_json::to_string(value).map_err(numeric)?;
    println!("{text}");
    if let Some(out) = &cli.out {
        write_atomic(&with_suffix(out, ".json"), &format!("{text}\n"))?;
    }
    Ok(())
}

fn marginal(cli: &Cli, p: &Prepared) -> Outcome<()> {
    let delta = cli.delta.expect("validated");
    let rec = MarginalRecursion::new(&p.measure, delta, cli.grid).map_err(usage)?;
    let rep = rec.run(cli.depth, default_tol(cli)).map_err(numeric)?;
    if let Some(out) = &cli.out {
        write_atomic(&with_suffix(out, "_odd.csv"), &rep.f_odd.to_csv())?;
        write_atomic(&with_suffix(out, "_even.csv"), &rep.f_even.to_csv())?;
    }
    emit(cli, &serde_json::to_value(&rep).map_err(numeric)?)
}

fn ode(cli: &Cli) -> Outcome<()> {
    let delta = cli.delta.expect("validated");
    let opts = ShootingOptions { intervals: cli.grid, ..ShootingOptions::default() };
    let res = find_cstar_with(delta, default_tol(cli), &opts).map_err(numeric)?;
    if let Some(out) = &cli.out {
        write_atomic(&with_suffix(out, ".csv"), &res.to_csv())?;
    }
    emit(cli, &serde_json::to_value(&res).map_err(numeric)?)
}

/// Tree limit for branching `delta - 1`: `F_0` for matchings, the shooting
/// profile at `λ = 1`, the odd recursion limit otherwise.
fn tree_limit(cli: &Cli, m: &SpinMeasure, delta: usize, grid: usize) -> Outcome<(GridDistribution, &'static str)> {
    let branching = delta - 1;
    if branching == 0 {
        let rec = MarginalRecursion::new(m, 1, grid).map_err(usage)?;
        return Ok((rec.initial(), "initial"));
    }
    if cli.lambda == 1.0 {
        let opts = ShootingOptions { intervals: grid, ..ShootingOptions::default() };
        let res = find_cstar_with(branching, default_tol(cli), &opts).map_err(numeric)?;
        return Ok((res.f, "shooting"));
    }
    let rep = MarginalRecursion::new(m, branching, grid)
        .map_err(usage)?
        .run(cli.depth, default_tol(cli))
        .map_err(numeric)?;
    if !rep.converged {
        return Err(numeric(format!("recursion did not converge by depth {} (gap {:.3e})", rep.depth_reached, rep.gap_sup)));
    }
    Ok((rep.f_odd, "recursion"))
}

fn gamma(cli: &Cli, p: &Prepared) -> Outcome<()> {
    let delta = cli.delta.expect("validated");
    let (f, source) = tree_limit(cli, &p.measure, delta, cli.grid)?;
    let g = gamma_asymptotic(delta, cli.lambda, &f, cli.sign).map_err(numeric)?;
    let (coarse, _) = tree_limit(cli, &p.measure, delta, cli.grid / 2)?;
    let gc = gamma_asymptotic(delta, cli.lambda, &coarse, cli.sign).map_err(numeric)?;
    let ints = limit_integrals(delta, cli.lambda, &f).map_err(numeric)?;
    let ratio = rewire_ratio(delta, cli.lambda, &f, cli.sign).map_err(numeric)?;
    let (r1, r2) = ratio_lemma_check(delta, cli.lambda, &f).map_err(numeric)?;
    emit(
        cli,
        &json!({
            "delta": delta,
            "lambda": cli.lambda,
            "sign_variant": cli.sign,
            "gamma": g,
            "grid_error": (g - gc).abs(),
            "limit_source": source,
            "A": ints.a,
            "B": ints.b,
            "rewire_ratio": ratio,
            "r1": r1,
            "r2": r2,
        }),
    )
}

fn volume(cli: &Cli, p: &Prepared) -> Outcome<()> {
    let g = p.graph.as_ref().expect("validated");
    let mut opts = SisOptions::new(cli.samples, cli.seed);
    opts.proposal = cli.proposal;
    opts.graph_label = cli.graph.clone().unwrap_or_default();
    let est = mc_volume_sis_with(g, &p.measure, &opts).map_err(|e| match e {
        hardcore::Error::InvalidParameter(_) | hardcore::Error::AtomsNotSupported(_) => usage(e),
        other => numeric(other),
    })?;
    emit(cli, &serde_json::to_value(&est).map_err(numeric)?)
}

fn rewire(cli: &Cli, p: &Prepared) -> Outcome<()> {
    let g = RegularGraph::new(p.graph.clone().expect("validated")).map_err(usage)?;
    let mode = match cli.mode {
        Mode::Lemma => ChainMode::Lemma,
        Mode::Exhaustive => ChainMode::Exhaustive,
    };
    let chain = rewire_chain(&g, cli.girth, mode).map_err(|e| match e {
        hardcore::Error::InvalidParameter(_) => usage(e),
        other => numeric(other),
    })?;
    if let Some(out) = &cli.out {
        for (i, s) in chain.snapshots.iter().enumerate() {
            write_atomic(&with_suffix(out, &format!("_{i:04}.edges")), &s.to_edge_list())?;
        }
    }
    let cycles = chain.snapshots.last().and_then(|s| s.cycle_canonical_form());
    emit(
        cli,
        &json!({
            "steps": chain.log.len(),
            "stop_reason": chain.stop_reason,
            "final_nodes": chain.snapshots.last().map(|s| s.n()),
            "final_cycles": cycles,
            "log": chain.log,
        }),
    )
}

fn verify(cli: &Cli) -> Outcome<bool> {
    let results = if cli.only.is_empty() { acceptance::run_all() } else { acceptance::run(&cli.only) };
    for r in &results {
        eprintln!("{r}");
    }
    let pass = results.iter().all(|r| r.pass);
    emit(cli, &json!({ "pass": pass, "criteria": results }))?;
    Ok(pass)
}

fn dispatch(cli: &Cli) -> Outcome<bool> {
    let config = RunConfig {
        command: cli.command,
        measure: cli.measure,
        lambda: cli.lambda,
        delta: cli.delta,
        depth: cli.depth,
        grid: cli.grid,
        tol: default_tol(cli),
        graph: cli.graph.as_deref(),
        samples: cli.samples,
        seed: cli.seed,
        out: cli.out.as_deref(),
        sign_variant: cli.sign,
        proposal: cli.proposal,
        girth: cli.girth,
        mode: cli.mode,
        only: &cli.only,
    };
    println!("{}", serde_json::to_string(&config).map_err(numeric)?);
    let p = prepare(cli)?;
    match cli.command {
        Command::Marginal => marginal(cli, &p)?,
        Command::Ode => ode(cli)?,
        Command::Gamma => gamma(cli, &p)?,
        Command::Volume => volume(cli, &p)?,
        Command::Rewire => rewire(cli, &p)?,
        Command::Verify => return verify(cli),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(1)
        }
    }
}
