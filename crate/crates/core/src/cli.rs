//! Command-line front end. Exit codes: 0 success, 1 catalog failure, 2 input or
//! usage error, 3 optimizer budget exhausted, 4 witness of a violated inequality.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::accinfo::{self, ComplementarityReport, Verdict};
use crate::basis::{BasisFamily, MeasurementBasis};
use crate::catalog::{self, BoundKind, EntryOutcome, EntryParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::{self, BasisFile};
use crate::optimizer::{OptimizerConfig, OptimizerTrace};
use crate::qmeasure::{self, MeasureConfig, QReport};
use crate::qstate::Ensemble;
use crate::sweep::{self, SweepConfig, SweepKind, SweepSource};

pub const SEED_ENV: &str = "QENSEMBLE_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CATALOG_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_WITNESS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qensemble", version, about = "Quantumness and accessible information of ensembles of quantum states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunOpts {
    /// Optimizer restarts (restart 0 always starts at the computational basis).
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Function evaluations allowed per restart.
    #[arg(long, default_value_t = 20_000)]
    pub max_evals: usize,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Certification tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Run restarts and scans on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputOpts {
    /// Emit a JSON run report.
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Emit CSV.
    #[arg(long)]
    pub csv: bool,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum entropy production over a basis family.
    Q {
        ensemble: PathBuf,
        /// full, local-product or explicit:<basis.json>. Repeat to search several families.
        /// Defaults to local-product when the file declares subsystems, full otherwise.
        #[arg(long)]
        family: Vec<String>,
        /// Try to certify the value as exact.
        #[arg(long)]
        certify: bool,
        #[command(flatten)]
        run: RunOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Projective lower bound on accessible information, optionally with upper bounds.
    Iacc {
        ensemble: PathBuf,
        /// Restrict to product measurements over the declared subsystems.
        #[arg(long)]
        local: bool,
        /// Also report the Holevo quantity and the entanglement bound.
        #[arg(long)]
        bounds: bool,
        #[command(flatten)]
        run: RunOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Bracket both sides of I_acc + Q <= log2 N and classify.
    Check {
        ensemble: PathBuf,
        #[arg(long)]
        family: Vec<String>,
        #[command(flatten)]
        run: RunOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Reference ensembles with known values.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Exploratory sweep writing one CSV row per sample.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        /// Ensemble source for the two-qubit sweeps.
        #[arg(long, value_enum, default_value = "random")]
        source: SweepSource,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Random bases per sample (random-heisenberg).
        #[arg(long, default_value_t = 1000)]
        bases: usize,
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 20_000)]
        max_evals: usize,
        #[arg(long)]
        sequential: bool,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// List entry names and expectations.
    List,
    /// Run one entry.
    Run {
        name: String,
        /// |a|² for b-prime.
        #[arg(long, default_value_t = 0.3)]
        a2: f64,
        /// |c|² for b-prime.
        #[arg(long, default_value_t = 0.5)]
        c2: f64,
        /// Angle between the two states of two-state-qubit, in radians.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        angle: f64,
        #[command(flatten)]
        run: RunOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run every entry with default parameters.
    RunAll {
        #[command(flatten)]
        run: RunOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    pub convergence_tol: f64,
    pub certification_tol: f64,
    pub overlap_tol: f64,
    pub grid_resolution: f64,
    pub certify: bool,
    pub execution: Execution,
}

impl ConfigEcho {
    fn new(cfg: &MeasureConfig) -> Self {
        Self {
            seed: cfg.optimizer.seed,
            restarts: cfg.optimizer.restarts,
            max_evals_per_restart: cfg.optimizer.max_evals_per_restart,
            convergence_tol: cfg.optimizer.convergence_tol,
            certification_tol: cfg.certification_tol,
            overlap_tol: cfg.overlap_tol,
            grid_resolution: cfg.grid_resolution,
            certify: cfg.certify,
            execution: cfg.optimizer.execution,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport<T: Serialize> {
    pub command: Vec<String>,
    pub config: ConfigEcho,
    pub results: T,
    pub wall_clock_seconds: f64,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct IaccReport {
    pub lower: f64,
    pub local: bool,
    pub achieving_basis: MeasurementBasis,
    pub holevo: Option<f64>,
    pub entanglement_bound: Option<f64>,
    pub optimizer_trace: OptimizerTrace,
}

fn measure_config(run: &RunOpts, certify: bool) -> Result<MeasureConfig> {
    let cfg = MeasureConfig {
        optimizer: OptimizerConfig {
            restarts: run.restarts,
            max_evals_per_restart: run.max_evals,
            seed: run.seed,
            execution: if run.sequential { Execution::Sequential } else { Execution::Parallel },
            ..OptimizerConfig::default()
        },
        certify,
        certification_tol: run.tol,
        ..MeasureConfig::default()
    };
    cfg.optimizer.validate()?;
    if !(cfg.certification_tol > 0.0) {
        return Err(Error::InvalidConfig("--tol must be positive".into()));
    }
    Ok(cfg)
}

fn parse_family(spec: &str, ensemble: &Ensemble) -> Result<BasisFamily> {
    match spec {
        "full" => Ok(BasisFamily::FullUnitary),
        "local-product" => Ok(BasisFamily::LocalProduct(ensemble.partition().ok_or(Error::MissingPartition)?.clone())),
        other => match other.strip_prefix("explicit:") {
            Some(path) => BasisFile::read(Path::new(path))?.to_family(),
            None => Err(Error::InvalidConfig(format!(
                "unknown family '{other}' (expected full, local-product or explicit:<path>)"
            ))),
        },
    }
}

fn families(specs: &[String], ensemble: &Ensemble) -> Result<Vec<BasisFamily>> {
    if specs.is_empty() {
        return Ok(vec![match ensemble.partition() {
            Some(p) => BasisFamily::LocalProduct(p.clone()),
            None => BasisFamily::FullUnitary,
        }]);
    }
    specs.iter().map(|s| parse_family(s, ensemble)).collect()
}

struct Emitter {
    out: Option<PathBuf>,
    buffer: Vec<u8>,
}

impl Emitter {
    fn new(out: Option<PathBuf>) -> Self {
        Self { out, buffer: Vec::new() }
    }

    fn finish(self) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, &self.buffer).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
            None => std::io::stdout().write_all(&self.buffer).map_err(|e| Error::Io(e.to_string())),
        }
    }
}

impl Write for Emitter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.buffer.write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

fn json_report<T: Serialize>(argv: &[String], cfg: &MeasureConfig, results: T, start: Instant) -> String {
    let report = RunReport {
        command: argv.to_vec(),
        config: ConfigEcho::new(cfg),
        results,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

fn csv_text<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"))
}

#[derive(Serialize)]
struct QRow<'a> {
    value: f64,
    direction: &'a str,
    family: &'a str,
    lower_bound: Option<f64>,
    lower_bound_source: &'a str,
    evaluations: u64,
    budget_exhausted: bool,
}

fn direction_name(d: qmeasure::Direction) -> &'static str {
    match d {
        qmeasure::Direction::Exact => "exact",
        qmeasure::Direction::UpperBound => "upper-bound",
    }
}

fn cmd_q(argv: &[String], path: &Path, family: &[String], certify: bool, run: &RunOpts, output: &OutputOpts) -> Result<i32> {
    let start = Instant::now();
    let ensemble = io::read_ensemble(path)?;
    let cfg = measure_config(run, certify)?;
    let fams = families(family, &ensemble)?;
    let report: QReport = qmeasure::quantum_correlation_over(&ensemble, &fams, &cfg)?;
    let mut out = Emitter::new(output.out.clone());
    if output.json {
        out.write_all(json_report(argv, &cfg, &report, start).as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    } else if output.csv {
        let row = QRow {
            value: report.value,
            direction: direction_name(report.direction),
            family: &report.family,
            lower_bound: report.lower_bound,
            lower_bound_source: &report.lower_bound_source,
            evaluations: report.optimizer_trace.evaluations,
            budget_exhausted: report.budget_exhausted(),
        };
        out.write_all(csv_text(&[row])?.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    } else {
        let _ = writeln!(out, "Q = {:.6} ({})", report.value, direction_name(report.direction));
        let _ = writeln!(out, "family: {}", report.family);
        let _ = writeln!(out, "basis status: {:?}", report.basis_status);
        if let Some(lb) = report.lower_bound {
            let _ = writeln!(out, "lower bound: {lb:.6} ({})", report.lower_bound_source);
        }
        let _ = writeln!(
            out,
            "evaluations: {}{}",
            report.optimizer_trace.evaluations,
            if report.budget_exhausted() { " (budget exhausted)" } else { "" }
        );
    }
    out.finish()?;
    Ok(if report.budget_exhausted() { EXIT_BUDGET } else { EXIT_OK })
}

fn cmd_iacc(argv: &[String], path: &Path, local: bool, bounds: bool, run: &RunOpts, output: &OutputOpts) -> Result<i32> {
    let start = Instant::now();
    let ensemble = io::read_ensemble(path)?;
    let cfg = measure_config(run, false)?;
    let est = accinfo::accessible_info_projective(&ensemble, &cfg.optimizer, local)?;
    let report = IaccReport {
        lower: est.value,
        local,
        achieving_basis: est.achieving_basis,
        holevo: bounds.then(|| accinfo::holevo_bound(&ensemble)),
        entanglement_bound: if bounds { accinfo::entanglement_complementarity_bound(&ensemble).ok() } else { None },
        optimizer_trace: est.optimizer_trace,
    };
    let mut out = Emitter::new(output.out.clone());
    if output.json {
        out.write_all(json_report(argv, &cfg, &report, start).as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    } else if output.csv {
        #[derive(Serialize)]
        struct Row {
            lower: f64,
            local: bool,
            holevo: Option<f64>,
            entanglement_bound: Option<f64>,
            evaluations: u64,
            budget_exhausted: bool,
        }
        let row = Row {
            lower: report.lower,
            local,
            holevo: report.holevo,
            entanglement_bound: report.entanglement_bound,
            evaluations: report.optimizer_trace.evaluations,
            budget_exhausted: report.optimizer_trace.budget_exhausted,
        };
        out.write_all(csv_text(&[row])?.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    } else {
        let scope = if local { "local product" } else { "global" };
        let _ = writeln!(out, "I_acc >= {:.6} ({scope} projective optimum)", report.lower);
        if bounds {
            let _ = writeln!(out, "holevo upper: {}", opt(report.holevo));
            let _ = writeln!(out, "entanglement upper: {}", opt(report.entanglement_bound));
        }
    }
    out.finish()?;
    Ok(if report.optimizer_trace.budget_exhausted { EXIT_BUDGET } else { EXIT_OK })
}

fn cmd_check(argv: &[String], path: &Path, family: &[String], run: &RunOpts, output: &OutputOpts) -> Result<i32> {
    let start = Instant::now();
    let ensemble = io::read_ensemble(path)?;
    let cfg = measure_config(run, true)?;
    let fams = families(family, &ensemble)?;
    let report: ComplementarityReport = accinfo::check_complementarity(&ensemble, &fams, &cfg)?;
    let mut out = Emitter::new(output.out.clone());
    if output.json {
        out.write_all(json_report(argv, &cfg, &report, start).as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    } else if output.csv {
        #[derive(Serialize)]
        struct Row {
            n_states: usize,
            log2_n: f64,
            iacc_lower: f64,
            iacc_upper: f64,
            q_upper: f64,
            q_lower: f64,
            q_exact: Option<f64>,
            verdict: Verdict,
            saturated: bool,
        }
        let row = Row {
            n_states: report.n_states,
            log2_n: report.log2_n,
            iacc_lower: report.iacc_lower,
            iacc_upper: report.iacc_upper,
            q_upper: report.q_upper,
            q_lower: report.q_lower,
            q_exact: report.q_exact,
            verdict: report.verdict,
            saturated: report.saturated,
        };
        out.write_all(csv_text(&[row])?.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    } else {
        let _ = writeln!(out, "I_acc in [{:.6}, {:.6}] (upper: {})", report.iacc_lower, report.iacc_upper, report.iacc_upper_source);
        let _ = writeln!(out, "Q in [{:.6}, {:.6}]{}", report.q_lower, report.q_upper, if report.q_exact.is_some() { " exact" } else { "" });
        let _ = writeln!(out, "log2 N = {:.6}", report.log2_n);
        let _ = writeln!(out, "verdict: {:?}{}", report.verdict, if report.saturated { " (saturated)" } else { "" });
        let _ = writeln!(out, "note: {}", report.details);
    }
    out.finish()?;
    let exhausted = report.q_report.budget_exhausted() || report.iacc_estimate.optimizer_trace.budget_exhausted;
    Ok(check_exit_code(report.verdict, exhausted))
}

/// A witness outranks an exhausted budget: its bounds are one-sided in the safe direction.
pub fn check_exit_code(verdict: Verdict, budget_exhausted: bool) -> i32 {
    match verdict {
        Verdict::WitnessOfViolation => EXIT_WITNESS,
        _ if budget_exhausted => EXIT_BUDGET,
        _ => EXIT_OK,
    }
}

#[derive(Serialize)]
struct CatalogRow<'a> {
    name: &'a str,
    quantity: &'static str,
    expected: f64,
    direction: BoundKind,
    tolerance: f64,
    observed: f64,
    certified_exact: bool,
    result: &'static str,
}

fn catalog_rows(outcomes: &[EntryOutcome]) -> Vec<CatalogRow<'_>> {
    let mut rows = Vec::new();
    for o in outcomes {
        for (quantity, check) in [("Q", &o.q), ("I_acc", &o.iacc)] {
            if let Some(c) = check {
                rows.push(CatalogRow {
                    name: &o.name,
                    quantity,
                    expected: c.expected.value,
                    direction: c.expected.direction,
                    tolerance: c.expected.tolerance,
                    observed: c.observed,
                    certified_exact: c.certified_exact,
                    result: if c.pass { "PASS" } else { "FAIL" },
                });
            }
        }
    }
    rows
}

fn bound_symbol(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::Exact => "=",
        BoundKind::UpperBound => "<=",
        BoundKind::LowerBound => ">=",
    }
}

fn cmd_catalog_run(argv: &[String], entries: Vec<catalog::CatalogEntry>, run: &RunOpts, output: &OutputOpts) -> Result<i32> {
    let start = Instant::now();
    let cfg = measure_config(run, true)?;
    let outcomes = entries.iter().map(|e| catalog::run_entry(e, &cfg)).collect::<Result<Vec<_>>>()?;
    let all_pass = outcomes.iter().all(|o| o.pass);
    let mut out = Emitter::new(output.out.clone());
    if output.json {
        out.write_all(json_report(argv, &cfg, &outcomes, start).as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    } else if output.csv {
        out.write_all(csv_text(&catalog_rows(&outcomes))?.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    } else {
        let _ = writeln!(out, "{:<18} {:<6} {:>3} {:>10} {:>10}  {:<6} result", "entry", "qty", "", "expected", "observed", "exact");
        for r in catalog_rows(&outcomes) {
            let _ = writeln!(
                out,
                "{:<18} {:<6} {:>3} {:>10.6} {:>10.6}  {:<6} {}",
                r.name,
                r.quantity,
                bound_symbol(r.direction),
                r.expected,
                r.observed,
                r.certified_exact,
                r.result
            );
        }
    }
    out.finish()?;
    Ok(if all_pass { EXIT_OK } else { EXIT_CATALOG_FAIL })
}

fn cmd_catalog_list() -> Result<i32> {
    for e in catalog::all_entries(&EntryParams::default()) {
        let show = |x: Option<catalog::Expectation>| {
            x.map_or_else(|| "-".to_string(), |x| format!("{} {:.6}", bound_symbol(x.direction), x.value))
        };
        println!(
            "{:<16} Q {:<12} I_acc {:<12} {}",
            e.name,
            show(e.expected_q),
            show(e.expected_iacc),
            e.provenance
        );
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    kind: SweepKind,
    source: SweepSource,
    samples: usize,
    bases: usize,
    seed: u64,
    restarts: usize,
    max_evals: usize,
    sequential: bool,
    out_path: Option<PathBuf>,
) -> Result<i32> {
    let run = RunOpts { restarts, max_evals, seed, tol: 1e-4, sequential };
    let cfg = SweepConfig {
        kind,
        source,
        samples,
        seed,
        bases,
        measure: measure_config(&run, true)?,
    };
    let rows = sweep::run_sweep(&cfg)?;
    let mut out = Emitter::new(out_path);
    sweep::write_csv(&rows, &mut out)?;
    out.finish()?;
    let flagged: Vec<usize> = rows.iter().filter(|r| r.candidate).map(|r| r.sample).collect();
    if !flagged.is_empty() {
        eprintln!(
            "{} candidate row(s) flagged for inspection: samples {:?} (reproduce with --kind {:?} --source {:?} --seed {seed})",
            flagged.len(),
            flagged,
            kind,
            source
        );
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli, argv: &[String]) -> Result<i32> {
    match cli.command {
        Command::Q { ensemble, family, certify, run, output } => cmd_q(argv, &ensemble, &family, certify, &run, &output),
        Command::Iacc { ensemble, local, bounds, run, output } => cmd_iacc(argv, &ensemble, local, bounds, &run, &output),
        Command::Check { ensemble, family, run, output } => cmd_check(argv, &ensemble, &family, &run, &output),
        Command::Catalog { action } => match action {
            CatalogAction::List => cmd_catalog_list(),
            CatalogAction::Run { name, a2, c2, angle, run, output } => {
                let entry = catalog::by_name(&name, &EntryParams { a2, c2, angle })?;
                cmd_catalog_run(argv, vec![entry], &run, &output)
            }
            CatalogAction::RunAll { run, output } => {
                cmd_catalog_run(argv, catalog::all_entries(&EntryParams::default()), &run, &output)
            }
        },
        Command::Sweep { kind, source, samples, bases, seed, restarts, max_evals, sequential, out } => {
            cmd_sweep(kind, source, samples, bases, seed, restarts, max_evals, sequential, out)
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    let mut argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    argv.insert(0, "qensemble".into());
    match dispatch(cli, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
