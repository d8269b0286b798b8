//! Command-line front end.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alternation::{run_alternation, AlternationOptions};
use crate::analysis::{bisect_rate, certificate_margin, AnalysisOptions, BisectionOptions, LambdaMode, RateCertificate, RateOutcome};
use crate::model::{
    packet_drop_delay_plant, ring_plant, scenario_plant, trivial_plant, Scenario, SwitchedPlant, SwitchedSystem,
    SwitchingGraph,
};
use crate::regulation::solve_regulator;
use crate::simulate::{
    baseline_gd, deploy, empirical_rate, make_function, minimize_oracle, random_path, random_state, seed_stream,
    DEFAULT_BURN_IN,
};
use crate::synthesis::{bisect_synthesis, SynthesisOptions, SynthesisOutcome, SynthesisResult};
use crate::transforms::{FilterCoefficients, SectorSpec};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_REGULATOR: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "switchopt", version, about = "Rate certification and synthesis of first-order algorithms over switched networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certify the smallest rate of a closed-loop model.
    Analyze(AnalyzeArgs),
    /// Synthesize a mode-dependent algorithm for a network model.
    Synthesize(SynthesizeArgs),
    /// Alternate synthesis and multiplier search.
    Alternate(AlternateArgs),
    /// Run a synthesized closed loop on random test functions and paths.
    Simulate(SimulateArgs),
    /// Re-check a rate certificate against a closed-loop model.
    Verify(VerifyArgs),
    /// Grid of synthesis runs over L, the delay bound or the switching scenario.
    Sweep(SweepArgs),
    /// Check that every vertex of a switching graph reaches a cycle.
    GraphCheck(GraphCheckArgs),
    /// Write the bundled example models into a directory.
    Examples(ExamplesArgs),
}

#[derive(Args, Debug, Clone, Copy)]
pub struct SectorArgs {
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long = "L", default_value_t = 10.0)]
    pub l: f64,
}

impl SectorArgs {
    fn sector(&self) -> Result<SectorSpec> {
        SectorSpec::new(self.m, self.l)
    }
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Closed-loop model JSON (a switched system or a synthesis result).
    #[arg(long)]
    pub model: PathBuf,
    /// Replacement switching graph JSON.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub sector: SectorArgs,
    /// Multiplier order; 0 uses the static multiplier.
    #[arg(long, default_value_t = 0)]
    pub order: usize,
    #[arg(long = "rho-tol", default_value_t = 1e-4)]
    pub rho_tol: f64,
    #[arg(long = "common-storage")]
    pub common_storage: bool,
    /// Certificate output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Certificate JSON written by `analyze`.
    #[arg(long)]
    pub certificate: PathBuf,
    #[command(flatten)]
    pub sector: SectorArgs,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    /// Network model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub sector: SectorArgs,
    #[arg(long = "rho-tol", default_value_t = 1e-4)]
    pub rho_tol: f64,
    #[arg(long = "common-storage")]
    pub common_storage: bool,
    /// Result output path (controller, closed loop and certificate).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AlternateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub sector: SectorArgs,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 5)]
    pub iters: usize,
    #[arg(long = "rho-tol", default_value_t = 1e-4)]
    pub rho_tol: f64,
    #[arg(long = "common-storage")]
    pub common_storage: bool,
    /// Result output path; the trace goes next to it with extension `.trace.jsonl`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Synthesis result JSON, or a closed-loop model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub sector: SectorArgs,
    /// Largest curvature of the test functions (defaults to L).
    #[arg(long = "Lprime")]
    pub l_prime: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub paths: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for one CSV trace per run.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Summary JSON output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    /// Upper sector bound; needs `--model`.
    #[value(name = "L")]
    L,
    /// Packet-drop delay bound `--from..=--to` at each `--L-values` entry.
    Delay,
    /// The four switching scenarios at each L of the grid.
    Scenario,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long = "sweep-param", value_enum)]
    pub sweep_param: SweepParam,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 1)]
    pub points: usize,
    /// L values for delay sweeps.
    #[arg(long = "L-values", value_delimiter = ',', default_value = "2")]
    pub l_values: Vec<f64>,
    /// Delay bound for scenario sweeps.
    #[arg(long = "max-delay", default_value_t = 3)]
    pub max_delay: usize,
    #[arg(long = "rho-tol", default_value_t = 1e-3)]
    pub rho_tol: f64,
    #[arg(long = "common-storage")]
    pub common_storage: bool,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV output path (stdout if absent).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GraphCheckArgs {
    /// Graph JSON.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Network or closed-loop model JSON whose graph is checked.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExamplesArgs {
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Dimension(_) | Error::InvalidArgument(_) | Error::InvalidGraph(_) | Error::Json(_) | Error::IllPosed { .. } => {
            EXIT_INVALID
        }
        Error::RegulatorInfeasible { .. } | Error::NoWitness { .. } => EXIT_REGULATOR,
        Error::Reconstruction(_) | Error::Solver(_) => EXIT_SOLVER,
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Synthesize(a) => cmd_synthesize(&a),
        Command::Alternate(a) => cmd_alternate(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::GraphCheck(a) => cmd_graph_check(&a),
        Command::Examples(a) => cmd_examples(&a),
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// A closed loop read either directly or out of a synthesis result.
pub fn load_closed_loop(path: &Path) -> Result<(SwitchedSystem, Option<SynthesisResult>)> {
    let v: serde_json::Value = read_json(path)?;
    if v.get("closed_loop").is_some() {
        let r: SynthesisResult = serde_json::from_value(v)?;
        Ok((r.closed_loop.clone(), Some(r)))
    } else {
        let s: SwitchedSystem = serde_json::from_value(v)?;
        s.check()?;
        Ok((s, None))
    }
}

fn load_plant(model: &Path, graph: Option<&Path>) -> Result<SwitchedPlant> {
    let plant: SwitchedPlant = read_json(model)?;
    let plant = match graph {
        Some(g) => plant.with_graph(read_json(g)?)?,
        None => plant,
    };
    plant.graph.require_valid()?;
    Ok(plant)
}

fn bisection(tol: f64) -> Result<BisectionOptions> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rho tolerance {tol} outside (0, 1)")));
    }
    Ok(BisectionOptions { tol, ..BisectionOptions::default() })
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<i32> {
    let (mut cl, _) = load_closed_loop(&a.model)?;
    if let Some(g) = &a.graph {
        cl = SwitchedSystem::new(cl.modes, read_json(g)?)?;
    }
    cl.graph.require_valid()?;
    let lambda = if a.order == 0 { LambdaMode::Fixed(FilterCoefficients::identity(0)) } else { LambdaMode::free(a.order) };
    let opts = AnalysisOptions::new(lambda, a.common_storage);
    match bisect_rate(&cl, a.sector.sector()?, &opts, bisection(a.rho_tol)?)? {
        RateOutcome::Certified(cert) => {
            println!("rho = {:.6}", cert.rho);
            println!("lambda = {:?}", cert.lambda.coefficients());
            if let Some(out) = &a.out {
                write_json(out, &cert)?;
            }
            Ok(EXIT_OK)
        }
        RateOutcome::Diverged => {
            println!("diverged");
            Ok(EXIT_DIVERGED)
        }
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let (cl, _) = load_closed_loop(&a.model)?;
    let cert: RateCertificate = read_json(&a.certificate)?;
    let margin = certificate_margin(&cl, a.sector.sector()?, &cert)?;
    println!("rho = {:.6}, margin = {margin:.3e}", cert.rho);
    Ok(if margin > 0.0 { EXIT_OK } else { EXIT_SOLVER })
}

fn report_synthesis(r: &SynthesisResult) {
    println!("rho = {:.6}", r.rho);
    println!("controller order = {}", r.order());
    match r.cross_certified_at {
        Some(at) => println!("cross-certified at {at:.6}"),
        None => println!("cross-certification failed"),
    }
}

fn cmd_synthesize(a: &SynthesizeArgs) -> Result<i32> {
    let plant = load_plant(&a.model, a.graph.as_deref())?;
    let sol = solve_regulator(&plant)?;
    let opts = SynthesisOptions::new(FilterCoefficients::identity(0), a.common_storage);
    match bisect_synthesis(&plant, &sol, a.sector.sector()?, &opts, bisection(a.rho_tol)?)? {
        SynthesisOutcome::Synthesized(r) => {
            report_synthesis(&r);
            if let Some(out) = &a.out {
                write_json(out, &*r)?;
            }
            Ok(EXIT_OK)
        }
        SynthesisOutcome::Diverged => {
            println!("diverged");
            Ok(EXIT_DIVERGED)
        }
    }
}

fn cmd_alternate(a: &AlternateArgs) -> Result<i32> {
    let plant = load_plant(&a.model, a.graph.as_deref())?;
    let sol = solve_regulator(&plant)?;
    let opts = AlternationOptions {
        order: a.order,
        iter_max: a.iters,
        common_storage: a.common_storage,
        bisection: bisection(a.rho_tol)?,
    };
    let out = run_alternation(&plant, &sol, a.sector.sector()?, &opts)?;
    out.trace.write_json_lines(std::io::stdout().lock())?;
    if let Some(path) = &a.out {
        let mut tp = path.clone().into_os_string();
        tp.push(".trace.jsonl");
        out.trace.write_json_lines(BufWriter::new(File::create(PathBuf::from(tp))?))?;
    }
    match out.result {
        Some(r) => {
            report_synthesis(&r);
            if let Some(path) = &a.out {
                write_json(path, &r)?;
            }
            Ok(EXIT_OK)
        }
        None => {
            println!("diverged");
            Ok(EXIT_DIVERGED)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub function_seed: u64,
    pub path_seed: u64,
    pub empirical_rate: f64,
    pub final_distance: f64,
    pub diverged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub certified_rho: Option<f64>,
    pub max_empirical_rate: f64,
    pub max_final_distance: f64,
    pub diverged_runs: usize,
    pub runs: Vec<RunSummary>,
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let (cl, result) = load_closed_loop(&a.model)?;
    cl.graph.require_valid()?;
    let sector = a.sector.sector()?;
    let lp = a.l_prime.unwrap_or(sector.l);
    let summary = simulate_runs(&cl, sector, lp, a.dim, a.paths, a.steps, a.seed, a.csv.as_deref())?;
    let summary = SimulationSummary { certified_rho: result.map(|r| r.rho), ..summary };
    println!("max empirical rate = {:.6}", summary.max_empirical_rate);
    if let Some(rho) = summary.certified_rho {
        println!("certified rho = {rho:.6}");
    }
    println!("max final distance = {:.3e}", summary.max_final_distance);
    println!("diverged runs = {}", summary.diverged_runs);
    if let Some(out) = &a.out {
        write_json(out, &summary)?;
    }
    Ok(EXIT_OK)
}

/// Deploys `cl` (lifted to dimension `dim`) on `paths` random functions and
/// paths. Seeds come from [`seed_stream`] on `seed`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_runs(
    cl: &SwitchedSystem,
    sector: SectorSpec,
    l_prime: f64,
    dim: usize,
    paths: usize,
    steps: usize,
    seed: u64,
    csv_dir: Option<&Path>,
) -> Result<SimulationSummary> {
    if dim == 0 || steps == 0 {
        return Err(Error::InvalidArgument("dimension and step count must be positive".into()));
    }
    let lifted = cl.kron_lift(dim);
    let n = lifted.dims().0;
    if let Some(dir) = csv_dir {
        fs::create_dir_all(dir)?;
    }
    let seeds = seed_stream(seed, 3 * paths);
    let mut runs = Vec::with_capacity(paths);
    for (i, s) in seeds.chunks(3).enumerate() {
        let f = make_function(sector, l_prime, dim, s[0])?;
        let z_star = minimize_oracle(&f)?;
        let path = random_path(&lifted.graph, steps, s[1])?;
        let tr = deploy(&lifted, &f, &z_star, &path, &random_state(n, s[2]))?;
        if let Some(dir) = csv_dir {
            tr.write_csv(BufWriter::new(File::create(dir.join(format!("run_{:03}.csv", i + 1)))?))?;
        }
        runs.push(RunSummary {
            run: i + 1,
            function_seed: s[0],
            path_seed: s[1],
            empirical_rate: empirical_rate(&tr.distances, DEFAULT_BURN_IN),
            final_distance: tr.final_distance(),
            diverged: tr.diverged,
        });
    }
    Ok(SimulationSummary {
        certified_rho: None,
        max_empirical_rate: runs.iter().map(|r| r.empirical_rate).fold(0.0, f64::max),
        max_final_distance: runs.iter().map(|r| r.final_distance).fold(0.0, f64::max),
        diverged_runs: runs.iter().filter(|r| r.diverged).count(),
        runs,
    })
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub label: String,
    pub delay: Option<usize>,
    pub l: f64,
    pub rho: Option<f64>,
    pub order: Option<usize>,
    pub cross_certified: Option<bool>,
    pub seconds: f64,
}

pub fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![from],
        _ => (0..points).map(|i| from + (to - from) * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Network of the delay sweep at bound `h`.
pub fn delay_network(h: usize) -> Result<SwitchedPlant> {
    if h == 0 {
        Ok(trivial_plant())
    } else {
        packet_drop_delay_plant(h)
    }
}

/// Static-multiplier synthesis at one grid point.
pub fn synthesize_point(plant: &SwitchedPlant, sector: SectorSpec, common: bool, tol: f64) -> Result<Option<SynthesisResult>> {
    let sol = solve_regulator(plant)?;
    let opts = SynthesisOptions::new(FilterCoefficients::identity(0), common);
    let out = bisect_synthesis(plant, &sol, sector, &opts, bisection(tol)?)?;
    Ok(out.result().cloned())
}

struct Job {
    label: String,
    delay: Option<usize>,
    l: f64,
    plant: SwitchedPlant,
    common: bool,
}

fn sweep_jobs(a: &SweepArgs) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    match a.sweep_param {
        SweepParam::L => {
            let path = a.model.as_deref().ok_or_else(|| Error::InvalidArgument("L sweeps need --model".into()))?;
            let plant = load_plant(path, None)?;
            for l in linspace(a.from, a.to, a.points) {
                jobs.push(Job { label: "model".into(), delay: None, l, plant: plant.clone(), common: a.common_storage });
            }
        }
        SweepParam::Delay => {
            if a.from < 0.0 || a.to < a.from || a.from.fract() != 0.0 || a.to.fract() != 0.0 {
                return Err(Error::InvalidArgument("delay range must be integers with 0 <= from <= to".into()));
            }
            for h in a.from as usize..=a.to as usize {
                let plant = delay_network(h)?;
                for &l in &a.l_values {
                    jobs.push(Job { label: "packet-drop".into(), delay: Some(h), l, plant: plant.clone(), common: a.common_storage });
                }
            }
        }
        SweepParam::Scenario => {
            for s in Scenario::ALL {
                let plant = scenario_plant(s, a.max_delay)?;
                for l in linspace(a.from, a.to, a.points) {
                    jobs.push(Job {
                        label: s.name().into(),
                        delay: Some(a.max_delay),
                        l,
                        plant: plant.clone(),
                        common: a.common_storage || s.requires_common_storage(),
                    });
                }
            }
        }
    }
    Ok(jobs)
}

pub fn run_sweep(a: &SweepArgs) -> Result<Vec<SweepPoint>> {
    let jobs = sweep_jobs(a)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|j| {
                let t = Instant::now();
                let r = synthesize_point(&j.plant, SectorSpec::new(a.m, j.l)?, j.common, a.rho_tol)?;
                Ok(SweepPoint {
                    label: j.label.clone(),
                    delay: j.delay,
                    l: j.l,
                    rho: r.as_ref().map(|r| r.rho),
                    order: r.as_ref().map(|r| r.order()),
                    cross_certified: r.as_ref().map(|r| r.cross_certified_at.is_some()),
                    seconds: t.elapsed().as_secs_f64(),
                })
            })
            .collect()
    })
}

pub fn write_sweep_csv(points: &[SweepPoint], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["network", "delay", "L", "rho", "order", "cross_certified", "seconds"])?;
    for p in points {
        out.write_record([
            p.label.clone(),
            p.delay.map_or(String::new(), |h| h.to_string()),
            p.l.to_string(),
            p.rho.map_or("diverged".into(), |r| r.to_string()),
            p.order.map_or(String::new(), |o| o.to_string()),
            p.cross_certified.map_or(String::new(), |c| c.to_string()),
            format!("{:.3}", p.seconds),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let points = run_sweep(a)?;
    match &a.csv {
        Some(p) => write_sweep_csv(&points, BufWriter::new(File::create(p)?))?,
        None => write_sweep_csv(&points, std::io::stdout().lock())?,
    }
    Ok(EXIT_OK)
}

fn cmd_graph_check(a: &GraphCheckArgs) -> Result<i32> {
    let graph: SwitchingGraph = match (&a.graph, &a.model) {
        (Some(g), _) => read_json(g)?,
        (None, Some(m)) => {
            let v: serde_json::Value = read_json(m)?;
            serde_json::from_value(v.get("graph").cloned().ok_or_else(|| Error::InvalidArgument("model has no graph".into()))?)?
        }
        (None, None) => return Err(Error::InvalidArgument("graph-check needs --graph or --model".into())),
    };
    match graph.require_valid() {
        Ok(()) => {
            println!("valid: {} modes, {} edges", graph.num_modes(), graph.edges().len());
            Ok(EXIT_OK)
        }
        Err(e) => {
            println!("{e}");
            Ok(EXIT_INVALID)
        }
    }
}

/// Bundled example models keyed by file name.
pub fn bundled_examples() -> Result<Vec<(String, serde_json::Value)>> {
    let mut out = vec![
        ("trivial.json".to_string(), serde_json::to_value(trivial_plant())?),
        ("ring.json".to_string(), serde_json::to_value(ring_plant())?),
    ];
    for h in 1..=6 {
        out.push((format!("delay_{h}.json"), serde_json::to_value(packet_drop_delay_plant(h)?)?));
    }
    for s in Scenario::ALL {
        out.push((format!("scenario_{}.graph.json", s.name()), serde_json::to_value(s.graph(3)?)?));
    }
    out.push(("delay_3_rate-1.json".to_string(), serde_json::to_value(scenario_plant(Scenario::RateOne, 3)?)?));
    let gd = baseline_gd(SectorSpec::new(1.0, 10.0)?, &crate::model::single_mode_graph())?;
    out.push(("gd_closed_loop.json".to_string(), serde_json::to_value(gd)?));
    Ok(out)
}

fn cmd_examples(a: &ExamplesArgs) -> Result<i32> {
    for (name, v) in bundled_examples()? {
        write_json(&a.out.join(&name), &v)?;
        println!("{}", a.out.join(name).display());
    }
    Ok(EXIT_OK)
}
