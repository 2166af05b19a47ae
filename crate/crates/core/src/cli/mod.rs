//! Command-line front end. Every subcommand produces CSV text; with an
//! output directory the files are written there together with a
//! `manifest.json`, otherwise the single CSV goes to stdout. The resolved
//! parameters are echoed to stderr as one JSON line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 computation failure.

pub mod manifest;
pub mod sweep;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::classical::{
    lyapunov_for_points, sample_energy_shell, sections_for_points, ClassicalError, LyapunovOptions, SectionDirection,
    SectionOptions,
};
use crate::eigen::{default_m, eigs_near_zero_with, mirror_residual, mirror_residual_union, SolverConfig};
use crate::model::{build_time_reversal_check, reduce, BlockLabel, ModelError, ModelParams, SymmetryClass};
use crate::rmt::sampling::{sample_chgoe, sample_goe};
use crate::rmt::{delta_n_prediction, gap_cdf, predict, uniform_grid, wigner_surmise_cdf, CurveKind, SymmetryClassId};
use crate::spinops::TwoJ;
use crate::stats::{solve_members, EmpiricalCurves, EnsembleMember, EnsembleSpec, StatsError};
use manifest::{OutputDir, RunManifest, TaskStatus, BUILD_ID};
use sweep::{load_sweep, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Solver { .. } | StatsError::InsufficientWindow { .. } => CliError::Failed(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ClassicalError> for CliError {
    fn from(e: ClassicalError) -> Self {
        match e {
            ClassicalError::InvalidPoint(_) | ClassicalError::InvalidEpsilon(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "coupled-tops",
    version,
    about = "Coupled quantum tops: spectra, random-matrix statistics and classical dynamics"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "COUPLED_TOPS_THREADS")]
    threads: Option<usize>,
    /// Directory for CSV files and the run manifest; stdout when absent.
    #[arg(long, global = true, env = "COUPLED_TOPS_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Consistency checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Quantum spectra.
    #[command(subcommand)]
    Quantum(QuantumCommand),
    /// Classical dynamics.
    #[command(subcommand)]
    Classical(ClassicalCommand),
    /// Random-matrix predictions and samples.
    #[command(subcommand)]
    Rmt(RmtCommand),
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Block dimensions, classes and symmetry residuals.
    Symmetry(SymmetryArgs),
}

#[derive(Debug, Subcommand)]
enum QuantumCommand {
    /// Eigenvalues nearest zero of one block.
    Spectrum(SpectrumArgs),
    /// Ensemble statistics over a range of spins.
    Ensemble(EnsembleArgs),
}

#[derive(Debug, Subcommand)]
enum ClassicalCommand {
    /// Surface of section at Q2 = pi/2.
    Poincare(PoincareArgs),
    /// Finite-time Lyapunov estimates.
    Lyapunov(LyapunovArgs),
}

#[derive(Debug, Subcommand)]
enum RmtCommand {
    /// Analytic curve on a uniform grid.
    Predict(PredictArgs),
    /// Monte Carlo histogram.
    Sample(SampleArgs),
}

#[derive(Debug, Args, Serialize)]
struct SymmetryArgs {
    #[arg(long)]
    two_j: u32,
    #[arg(long)]
    lambda: f64,
}

#[derive(Debug, Args, Serialize)]
struct SpectrumArgs {
    #[arg(long)]
    two_j: u32,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    block: BlockLabel,
    /// Window size (default 61 for odd block dimension, 60 for even).
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct EnsembleArgs {
    /// Sweep configuration file; replaces the range flags.
    #[arg(long, conflicts_with_all = ["lambda", "j_min", "j_max", "blocks"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    lambda: Option<f64>,
    /// Comma-separated subset of pp, pm, mp, mm.
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<BlockLabel>,
    #[arg(long, required_unless_present = "config")]
    j_min: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    j_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Direction {
    Positive,
    Negative,
    Both,
}

#[derive(Debug, Args, Serialize)]
struct PoincareArgs {
    #[arg(long)]
    lambda: f64,
    /// Number of starting points.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    #[arg(long, default_value_t = 1000)]
    crossings: usize,
    /// Seed of the starting-point generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Direction::Positive)]
    direction: Direction,
}

#[derive(Debug, Args, Serialize)]
struct LyapunovArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = crate::classical::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000.0)]
    t_cutoff: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    sample_dt: f64,
}

#[derive(Debug, Args, Serialize)]
struct PredictArgs {
    /// ai-goe, ai-poisson, bdi0, bdi1 or ci
    #[arg(long)]
    class: SymmetryClassId,
    /// d (density), delta-n or gap
    #[arg(long)]
    curve: CurveKind,
    #[arg(long, default_value_t = 3.0)]
    emax: f64,
    #[arg(long, default_value_t = 301)]
    points: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SampleEnsemble {
    Goe,
    Chgoe,
}

#[derive(Debug, Args, Serialize)]
struct SampleArgs {
    #[arg(long, value_enum)]
    ensemble: SampleEnsemble,
    /// Zero-mode count of the chiral ensemble.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=1))]
    nu: u32,
    /// Matrix size parameter.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    bin_width: f64,
    #[arg(long, default_value_t = 3.0)]
    emax: f64,
}

/// Round-trippable float formatting, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// What a subcommand produced.
#[derive(Debug, Default)]
struct Report {
    files: Vec<(String, String)>,
    tasks: Vec<TaskStatus>,
    summary: serde_json::Value,
    /// Overrides `--out`, for sweeps naming their own directory.
    out_dir: Option<PathBuf>,
}

impl Report {
    fn single(name: &str, csv: String) -> Self {
        Self { files: vec![(name.to_string(), csv)], ..Self::default() }
    }

    fn failed(&self) -> bool {
        self.tasks.iter().any(|t| !t.ok)
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (name, params) = describe(&cli.command);
    eprintln!("{}", json!({ "subcommand": name, "parameters": params, "tool_version": BUILD_ID }));
    let out = cli.out.clone();
    let pool = match cli.threads {
        Some(0) => return Err(CliError::Invalid("--threads must be positive".into())),
        Some(n) => {
            Some(rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Failed(e.to_string()))?)
        }
        None => None,
    };
    let started = Instant::now();
    let report = match &pool {
        Some(p) => p.install(|| execute(&cli.command, out.as_ref()))?,
        None => execute(&cli.command, out.as_ref())?,
    };
    let elapsed = started.elapsed().as_secs_f64();
    match report.out_dir.clone().or(out) {
        Some(dir) => {
            let mut sink = OutputDir::create(&dir)?;
            for (file, text) in &report.files {
                sink.write(file, text.as_bytes())?;
            }
            let failed = report.failed();
            sink.finish(RunManifest {
                subcommand: name,
                parameters: params,
                tool_version: BUILD_ID.to_string(),
                wall_time_seconds: elapsed,
                tasks: report.tasks,
                outputs: Vec::new(),
                summary: report.summary,
            })?;
            Ok(if failed { EXIT_FAILED } else { EXIT_OK })
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for (_, text) in &report.files {
                stdout.write_all(text.as_bytes())?;
            }
            for t in report.tasks.iter().filter(|t| !t.ok) {
                eprintln!("task {} failed: {}", t.task, t.detail.as_deref().unwrap_or(""));
            }
            Ok(if report.failed() { EXIT_FAILED } else { EXIT_OK })
        }
    }
}

fn describe(cmd: &Command) -> (String, serde_json::Value) {
    let to_value = |v: Result<serde_json::Value, serde_json::Error>| v.expect("argument structs serialize");
    match cmd {
        Command::Verify(VerifyCommand::Symmetry(a)) => ("verify symmetry".into(), to_value(serde_json::to_value(a))),
        Command::Quantum(QuantumCommand::Spectrum(a)) => ("quantum spectrum".into(), to_value(serde_json::to_value(a))),
        Command::Quantum(QuantumCommand::Ensemble(a)) => ("quantum ensemble".into(), to_value(serde_json::to_value(a))),
        Command::Classical(ClassicalCommand::Poincare(a)) => {
            ("classical poincare".into(), to_value(serde_json::to_value(a)))
        }
        Command::Classical(ClassicalCommand::Lyapunov(a)) => {
            ("classical lyapunov".into(), to_value(serde_json::to_value(a)))
        }
        Command::Rmt(RmtCommand::Predict(a)) => ("rmt predict".into(), to_value(serde_json::to_value(a))),
        Command::Rmt(RmtCommand::Sample(a)) => ("rmt sample".into(), to_value(serde_json::to_value(a))),
    }
}

fn execute(cmd: &Command, out: Option<&PathBuf>) -> Result<Report, CliError> {
    match cmd {
        Command::Verify(VerifyCommand::Symmetry(a)) => verify_symmetry(a),
        Command::Quantum(QuantumCommand::Spectrum(a)) => quantum_spectrum(a),
        Command::Quantum(QuantumCommand::Ensemble(a)) => quantum_ensemble(a, out),
        Command::Classical(ClassicalCommand::Poincare(a)) => classical_poincare(a),
        Command::Classical(ClassicalCommand::Lyapunov(a)) => classical_lyapunov(a),
        Command::Rmt(RmtCommand::Predict(a)) => rmt_predict(a),
        Command::Rmt(RmtCommand::Sample(a)) => rmt_sample(a),
    }
}

fn class_columns(class: SymmetryClass) -> (&'static str, u32) {
    match class {
        SymmetryClass::AI => ("AI", 0),
        SymmetryClass::Bdi(nu) => ("BDI", nu),
        SymmetryClass::CI => ("CI", 0),
    }
}

/// Mirror residual of a chiral window, dropping the outermost level when the
/// window size and the zero-mode count differ in parity (its partner lies
/// outside the window).
fn chiral_mirror_residual(energies: &[f64], class: SymmetryClass) -> f64 {
    let mut by_size = energies.to_vec();
    by_size.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    if (by_size.len() as u32 + class.zero_modes()) % 2 == 1 {
        by_size.pop();
    }
    by_size.sort_by(f64::total_cmp);
    mirror_residual(&by_size)
}

fn verify_symmetry(a: &SymmetryArgs) -> Result<Report, CliError> {
    let params = ModelParams::new(TwoJ::new(a.two_j), a.lambda)?;
    let dec = reduce(params)?;
    let solver = SolverConfig::default();
    let window = |label: BlockLabel| -> Result<Vec<f64>, CliError> {
        let h = &dec[label].hamiltonian;
        eigs_near_zero_with(h, default_m(h.dim()), &solver).map_err(|e| CliError::Failed(e.to_string()))
    };
    let windows: BTreeMap<BlockLabel, Vec<f64>> =
        BlockLabel::ALL.iter().map(|&b| window(b).map(|w| (b, w))).collect::<Result<_, _>>()?;
    let paired = mirror_residual_union(&windows[&BlockLabel::PM], &windows[&BlockLabel::MM]);
    let tr = build_time_reversal_check(params);
    let r = dec.residuals;
    let mut csv = String::new();
    let _ = writeln!(csv, "# two_j={} lambda={}", a.two_j, fmt_f64(a.lambda));
    let _ = writeln!(csv, "# cross_block_residual={}", fmt_f64(r.cross_block));
    let _ = writeln!(csv, "# chirality_leakage={}", fmt_f64(r.chirality_leakage));
    let _ = writeln!(csv, "# orthonormality_residual={}", fmt_f64(r.orthonormality));
    let _ = writeln!(csv, "# hermiticity_residual={}", fmt_f64(tr.hermiticity_residual));
    csv.push_str("block,dim,class,nu,anticommutator_residual,mirror_residual\n");
    for label in BlockLabel::ALL {
        let block = &dec[label];
        let (class, nu) = class_columns(block.class);
        let anti = block
            .chirality
            .as_ref()
            .map(|c| fmt_f64(block.hamiltonian.anticommutator(c).max_abs()))
            .unwrap_or_default();
        let mirror = if label.is_chiral() { chiral_mirror_residual(&windows[&label], block.class) } else { paired };
        let _ = writeln!(csv, "{label},{},{class},{nu},{anti},{}", block.dim(), fmt_f64(mirror));
    }
    Ok(Report::single("symmetry.csv", csv))
}

fn quantum_spectrum(a: &SpectrumArgs) -> Result<Report, CliError> {
    let params = ModelParams::new(TwoJ::new(a.two_j), a.lambda)?;
    let dec = reduce(params)?;
    let h = &dec[a.block].hamiltonian;
    let m = a.m.unwrap_or_else(|| default_m(h.dim()));
    if m < 2 || m > h.dim() {
        return Err(CliError::Invalid(format!("--m {m} must lie in [2, {}]", h.dim())));
    }
    let solver = SolverConfig::default();
    let solve = |b: BlockLabel| {
        let hb = &dec[b].hamiltonian;
        eigs_near_zero_with(hb, m.min(hb.dim()), &solver).map_err(|e| CliError::Failed(e.to_string()))
    };
    let energies = solve(a.block)?;
    let mirror = if a.block.is_chiral() {
        chiral_mirror_residual(&energies, dec[a.block].class)
    } else {
        let partner = if a.block == BlockLabel::PM { BlockLabel::MM } else { BlockLabel::PM };
        mirror_residual_union(&energies, &solve(partner)?)
    };
    let spacing = (energies[m - 1] - energies[0]) / (m - 1) as f64;
    let mut csv = String::new();
    let _ = writeln!(csv, "# j={}", TwoJ::new(a.two_j).j());
    let _ = writeln!(csv, "# lambda={}", fmt_f64(a.lambda));
    let _ = writeln!(csv, "# block={}", a.block);
    let _ = writeln!(csv, "# class={}", dec[a.block].class);
    let _ = writeln!(csv, "# M={m}");
    let _ = writeln!(csv, "# mean_spacing={}", fmt_f64(spacing));
    let _ = writeln!(csv, "# mirror_residual={}", fmt_f64(mirror));
    csv.push_str("energy\n");
    for e in &energies {
        let _ = writeln!(csv, "{}", fmt_f64(*e));
    }
    Ok(Report::single("spectrum.csv", csv))
}

fn ensemble_config(a: &EnsembleArgs, out: Option<&PathBuf>) -> Result<SweepConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => load_sweep(path).map_err(|e| CliError::Invalid(e.to_string()))?,
        None => {
            let mut text = format!(
                "lambda = {}\nj_min = {}\nj_max = {}\n",
                a.lambda.unwrap_or_default(),
                a.j_min.unwrap_or_default(),
                a.j_max.unwrap_or_default()
            );
            if !a.blocks.is_empty() {
                let names: Vec<&str> = a.blocks.iter().map(|b| b.as_str()).collect();
                let _ = writeln!(text, "blocks = {}", names.join(", "));
            }
            sweep::parse_sweep(&text).map_err(|e| CliError::Invalid(e.to_string()))?
        }
    };
    if let Some(dir) = out {
        cfg.out = Some(dir.clone());
    }
    if cfg.out.is_none() {
        return Err(CliError::Invalid("quantum ensemble writes several files and needs --out <dir>".into()));
    }
    Ok(cfg)
}

fn quantum_ensemble(a: &EnsembleArgs, out: Option<&PathBuf>) -> Result<Report, CliError> {
    let cfg = ensemble_config(a, out)?;
    if cfg.long_running() {
        eprintln!("note: j_max = {} makes this a long-running sweep", cfg.j_max);
    }
    let grid = uniform_grid(cfg.emax, cfg.points);
    let solver = cfg.solver();
    // Validate every ensemble before any eigenvalue is computed.
    let mut plans = Vec::new();
    for &lambda in &cfg.lambdas {
        let mut by_class: BTreeMap<String, (SymmetryClass, Vec<EnsembleMember>)> = BTreeMap::new();
        for two_j in cfg.spins() {
            for &block in &cfg.blocks {
                let class = crate::model::classify(block, two_j);
                by_class
                    .entry(class.to_string())
                    .or_insert_with(|| (class, Vec::new()))
                    .1
                    .push(EnsembleMember { two_j, block });
            }
        }
        for (_, (class, members)) in by_class {
            let id = SymmetryClassId::from_class(class).ok_or(StatsError::NoPrediction(class))?;
            plans.push(EnsembleSpec::new(id, lambda, members)?);
        }
    }
    if plans.is_empty() {
        return Err(CliError::Invalid("the sweep selects no blocks".into()));
    }
    let mut report = Report::default();
    let mut summaries = Vec::new();
    for spec in plans {
        let task = format!("lambda={} class={}", spec.lambda(), spec.class_id());
        let curves = solve_members(spec.lambda(), spec.members(), cfg.window, &solver)
            .map_err(CliError::from)
            .and_then(|spectra| EmpiricalCurves::from_spectra(spec.clone(), &spectra, &grid).map_err(CliError::from));
        match curves {
            Ok(c) => {
                let file = format!("ensemble_lambda{}_{}.csv", spec.lambda(), spec.class_id());
                report.files.push((file.clone(), ensemble_csv(&c)));
                summaries.push(ensemble_summary(&c, &file));
                report.tasks.push(TaskStatus { task, ok: true, detail: None });
            }
            Err(e) => report.tasks.push(TaskStatus { task, ok: false, detail: Some(e.to_string()) }),
        }
    }
    report.out_dir = cfg.out.clone();
    report.summary = json!({
        "long_running": cfg.long_running(),
        "config": cfg,
        "ensembles": summaries,
    });
    Ok(report)
}

fn ensemble_csv(c: &EmpiricalCurves) -> String {
    let dn_pred = c.delta_n_prediction();
    let gap_pred = c.gap_prediction();
    let mut csv = String::from("e,delta_n_empirical,delta_n_prediction,gap_empirical,gap_prediction\n");
    for i in 0..c.grid.len() {
        let row = [c.grid[i], c.delta_n[i], dn_pred[i], c.gap_cdf[i], gap_pred[i]].map(fmt_f64);
        let _ = writeln!(csv, "{}", row.join(","));
    }
    csv
}

fn ensemble_summary(c: &EmpiricalCurves, file: &str) -> serde_json::Value {
    let lo = 0.2f64.min(*c.grid.last().unwrap_or(&0.0));
    let hi = *c.grid.last().unwrap_or(&0.0);
    let mut ks = serde_json::Map::new();
    ks.insert(c.spec.class_id().to_string(), json!(c.gap_ks()));
    if c.spec.class() == SymmetryClass::AI {
        for id in [SymmetryClassId::AiGoe, SymmetryClassId::AiPoisson] {
            let reference: Vec<f64> = c.grid.iter().map(|&e| gap_cdf(id, e)).collect();
            ks.insert(id.to_string(), json!(crate::stats::ks_distance(&c.gap_cdf, &reference)));
        }
    }
    json!({
        "file": file,
        "lambda": c.spec.lambda(),
        "class": c.spec.class().to_string(),
        "reference": c.spec.class_id(),
        "n_spectra": c.n_spectra,
        "gap_ks": ks,
        "delta_n_sup_deviation": c.delta_n_deviation(lo, hi),
        "delta_n_range": [lo, hi],
    })
}

fn check_coupling(lambda: f64) -> Result<(), CliError> {
    ModelParams::new(TwoJ::new(1), lambda)?;
    Ok(())
}

fn classical_poincare(a: &PoincareArgs) -> Result<Report, CliError> {
    check_coupling(a.lambda)?;
    let direction = match a.direction {
        Direction::Positive => SectionDirection::Positive,
        Direction::Negative => SectionDirection::Negative,
        Direction::Both => SectionDirection::Both,
    };
    let points = sample_energy_shell(a.lambda, a.seed, a.seeds);
    let options = SectionOptions { direction, ..SectionOptions::default() };
    let sections = sections_for_points(&points, a.lambda, a.crossings, &options)?;
    let mut csv = String::from("seed_id,t,q1,p1\n");
    for (id, section) in sections.iter().enumerate() {
        for p in section {
            let _ = writeln!(csv, "{id},{},{},{}", fmt_f64(p.crossing_time), fmt_f64(p.q1), fmt_f64(p.p1));
        }
    }
    Ok(Report::single("poincare.csv", csv))
}

fn classical_lyapunov(a: &LyapunovArgs) -> Result<Report, CliError> {
    check_coupling(a.lambda)?;
    if !(a.t_cutoff > 0.0 && a.sample_dt > 0.0) {
        return Err(CliError::Invalid("--t-cutoff and --sample-dt must be positive".into()));
    }
    let points = sample_energy_shell(a.lambda, a.seed, a.seeds);
    let options = LyapunovOptions {
        epsilon: a.epsilon,
        t_cutoff: a.t_cutoff,
        sample_dt: a.sample_dt,
        ..LyapunovOptions::default()
    };
    let estimates = lyapunov_for_points(&points, a.lambda, &options)?;
    let mut csv = String::new();
    for (id, est) in estimates.iter().enumerate() {
        let _ = writeln!(
            csv,
            "# seed_id={id} summary={} summary_time={} saturated={}",
            fmt_f64(est.summary),
            fmt_f64(est.summary_time),
            est.saturated
        );
    }
    csv.push_str("seed_id,t,lambda_eps,delta\n");
    for (id, est) in estimates.iter().enumerate() {
        for s in &est.series {
            let _ = writeln!(csv, "{id},{},{},{}", fmt_f64(s.t), fmt_f64(s.lambda_eps), fmt_f64(s.delta));
        }
    }
    let mut report = Report::single("lyapunov.csv", csv);
    report.summary = json!(estimates
        .iter()
        .enumerate()
        .map(|(id, e)| json!({"seed_id": id, "summary": e.summary, "summary_time": e.summary_time, "saturated": e.saturated}))
        .collect::<Vec<_>>());
    Ok(report)
}

fn rmt_predict(a: &PredictArgs) -> Result<Report, CliError> {
    if !(a.emax > 0.0 && a.emax.is_finite()) || a.points < 2 {
        return Err(CliError::Invalid("--emax must be positive and --points at least 2".into()));
    }
    let curve = predict(a.class, a.curve, &uniform_grid(a.emax, a.points));
    let mut csv = String::from("e,value\n");
    for (e, v) in curve.grid.iter().zip(&curve.values) {
        let _ = writeln!(csv, "{},{}", fmt_f64(*e), fmt_f64(*v));
    }
    Ok(Report::single("prediction.csv", csv))
}

fn rmt_sample(a: &SampleArgs) -> Result<Report, CliError> {
    if !(a.bin_width > 0.0 && a.emax > a.bin_width) || a.count == 0 || a.n < 2 {
        return Err(CliError::Invalid("need --bin-width > 0, --emax > --bin-width, --count > 0 and --n >= 2".into()));
    }
    let bins = (a.emax / a.bin_width).round() as usize;
    let w = a.emax / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * w).collect();
    let bin_of = |x: f64| -> Option<usize> { (x >= 0.0 && x < a.emax).then(|| ((x / w) as usize).min(bins - 1)) };
    let (density, stderr, prediction): (Vec<f64>, Vec<f64>, Vec<f64>) = match a.ensemble {
        SampleEnsemble::Chgoe => {
            let levels = (1.5 * a.emax).ceil() as usize + 8;
            let samples = sample_chgoe(a.n, a.nu as usize, a.count, levels, a.seed);
            // Per-sample bin counts give the standard error of the mean density.
            let mut sum = vec![0.0; bins];
            let mut sum_sq = vec![0.0; bins];
            let mut counts = vec![0u32; bins];
            for s in &samples {
                counts.iter_mut().for_each(|c| *c = 0);
                for &e in s {
                    if let Some(b) = bin_of(e) {
                        counts[b] += 1;
                    }
                }
                for b in 0..bins {
                    let c = f64::from(counts[b]);
                    sum[b] += c;
                    sum_sq[b] += c * c;
                }
            }
            let n = samples.len() as f64;
            let id = if a.nu == 0 { SymmetryClassId::Bdi0 } else { SymmetryClassId::Bdi1 };
            let dn = delta_n_prediction(id, &edges).values;
            let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
            let se = (0..bins).map(|b| ((sum_sq[b] / n - mean[b] * mean[b]).max(0.0) / n).sqrt() / w).collect();
            let pred = (0..bins).map(|b| 1.0 + (dn[b + 1] - dn[b]) / w).collect();
            (mean.iter().map(|m| m / w).collect(), se, pred)
        }
        SampleEnsemble::Goe => {
            let spacings = sample_goe(a.n, a.count, a.seed);
            let mut counts = vec![0.0; bins];
            for &s in &spacings {
                if let Some(b) = bin_of(s) {
                    counts[b] += 1.0;
                }
            }
            let total = spacings.len().max(1) as f64;
            let p: Vec<f64> = counts.iter().map(|c| c / total).collect();
            let se = p.iter().map(|p| (p * (1.0 - p) / total).sqrt() / w).collect();
            let pred =
                (0..bins).map(|b| (wigner_surmise_cdf(edges[b + 1]) - wigner_surmise_cdf(edges[b])) / w).collect();
            (p.iter().map(|p| p / w).collect(), se, pred)
        }
    };
    let mut csv = String::from("e_lo,e_hi,density,std_error,prediction\n");
    for b in 0..bins {
        let row = [edges[b], edges[b + 1], density[b], stderr[b], prediction[b]].map(fmt_f64);
        let _ = writeln!(csv, "{}", row.join(","));
    }
    Ok(Report::single("sample.csv", csv))
}
