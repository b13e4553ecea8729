//! `qd`: cohomology tables of bundles on quadrics and verification of the
//! vanishing of `H^i(Q_n, D_1)`.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qd_core::cohomeng::{sheaf_cohomology_with, EngineConfig};
use qd_core::theoremkit::{verify_theorem_with, Route, TheoremReport, VerifyOptions, ENGINE_VERSION};
use qd_core::{BundleExpr, QdError};

use report::{cell_rows, merge, table_row, Report};

#[derive(Parser, Debug)]
#[command(name = "qd", version, about = "Cohomology of Frobenius-twisted sheaves on quadrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RouteArg {
    Oracle,
    Paper,
    Both,
}

#[derive(clap::Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Record wall-clock seconds (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cohomology table of a bundle expression.
    Cohomology {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        bundle: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        twist: i32,
        /// Starting internal degree bound.
        #[arg(long)]
        bound: Option<i32>,
        #[command(flatten)]
        out: Output,
    },
    /// Verify the vanishing theorem on a grid of (n, p).
    Verify {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<u32>,
        #[arg(long, value_enum, default_value = "both")]
        route: RouteArg,
        #[arg(long)]
        bound: Option<i32>,
        /// Run cells outside the default budget.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Merge JSON reports into one summary.
    Report {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

/// Exit codes: 1 usage or input, 2 verification failure, 3 bound or budget.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Verify(String),
    Bound(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Verify(_) => 2,
            Failure::Bound(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verify(m) | Failure::Bound(m) => m,
        }
    }
}

impl From<QdError> for Failure {
    fn from(e: QdError) -> Self {
        match e {
            QdError::BoundExhausted(_) | QdError::BudgetExceeded { .. } => Failure::Bound(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn engine(bound: Option<i32>) -> EngineConfig {
    EngineConfig {
        start_bound: bound,
        ..EngineConfig::from_env()
    }
}

fn emit(report: &Report, out: &Output) -> Result<(), Failure> {
    let text = match out.format {
        Format::Json => report::to_json(report),
        Format::Csv => report::to_csv(report),
        Format::Text => report::to_text(report),
    };
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_cohomology(n: usize, p: u32, bundle: &str, twist: i32, bound: Option<i32>, out: &Output) -> Result<(), Failure> {
    let expr = BundleExpr::parse(bundle)?;
    let start = Instant::now();
    let module = expr.realize(n, p)?;
    let table = sheaf_cohomology_with(&module, twist, &engine(bound))?;
    let object = if twist == 0 {
        expr.to_string()
    } else {
        BundleExpr::Twist(Box::new(expr), twist).to_string()
    };
    let seconds = out.timing.then(|| start.elapsed().as_secs_f64());
    let report = Report {
        engine_version: ENGINE_VERSION.into(),
        rows: vec![table_row(n, p, object, &table, seconds)],
        ..Default::default()
    };
    emit(&report, out)
}

fn strip_timing(mut r: TheoremReport) -> TheoremReport {
    if let Some(o) = r.oracle.as_mut() {
        o.seconds = 0.0;
    }
    if let Some(c) = r.certificate.as_mut() {
        c.seconds = 0.0;
    }
    r
}

fn cmd_verify(ns: &[usize], ps: &[u32], route: RouteArg, bound: Option<i32>, force: bool, out: &Output) -> Result<(), Failure> {
    let opts = VerifyOptions {
        route: match route {
            RouteArg::Oracle => Route::Oracle,
            RouteArg::Paper => Route::Paper,
            RouteArg::Both => Route::Both,
        },
        engine: engine(bound),
        force,
    };
    let mut grid: Vec<(usize, u32)> = ns.iter().flat_map(|&n| ps.iter().map(move |&p| (n, p))).collect();
    grid.sort_unstable();
    grid.dedup();
    // refuse the whole grid before any work when a cell is out of range
    for &(n, p) in &grid {
        qd_core::RingSpec::quadric(n, p)?;
        if !force && !qd_core::theoremkit::within_budget(n, p) {
            return Err(QdError::BudgetExceeded { n, p }.into());
        }
    }
    let results: Vec<Result<TheoremReport, QdError>> =
        grid.par_iter().map(|&(n, p)| verify_theorem_with(n, p, &opts)).collect();
    let mut cells = vec![];
    for r in results {
        let r = r?;
        cells.push(if out.timing { r } else { strip_timing(r) });
    }
    let rows = cells.iter().flat_map(|c| cell_rows(c, out.timing)).collect();
    let notes = cells
        .iter()
        .flat_map(|c| c.diagnostics.iter().map(move |d| format!("n={} p={}: {d}", c.n, c.p)))
        .collect();
    let report = Report {
        engine_version: ENGINE_VERSION.into(),
        rows,
        cells,
        notes,
    };
    emit(&report, out)?;
    let failed: Vec<&TheoremReport> = report.cells.iter().filter(|c| !c.pass).collect();
    let summary: Vec<String> = report
        .cells
        .iter()
        .map(|c| format!("n={} p={}: {}", c.n, c.p, if c.pass { "PASS" } else { "FAIL" }))
        .collect();
    eprintln!("{}", summary.join("\n"));
    if failed.is_empty() {
        Ok(())
    } else if failed.iter().all(|c| c.bound_exhausted() && c.agree != Some(false)) {
        Err(Failure::Bound("internal degree bound exhausted".into()))
    } else {
        Err(Failure::Verify(format!("{} of {} cells failed", failed.len(), report.cells.len())))
    }
}

fn cmd_report(inputs: &[PathBuf], out: &Output) -> Result<(), Failure> {
    let mut reports = vec![];
    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let r: Report =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: malformed report: {e}", path.display())))?;
        reports.push(r);
    }
    let mut merged = merge(reports);
    if merged.engine_version.is_empty() {
        merged.engine_version = ENGINE_VERSION.into();
    }
    emit(&merged, out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Cohomology {
            n,
            p,
            bundle,
            twist,
            bound,
            out,
        } => cmd_cohomology(*n, *p, bundle, *twist, *bound, out),
        Command::Verify {
            n,
            p,
            route,
            bound,
            force,
            out,
        } => cmd_verify(n, p, *route, *bound, *force, out),
        Command::Report { inputs, out } => cmd_report(inputs, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qd: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
