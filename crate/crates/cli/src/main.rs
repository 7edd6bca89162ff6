mod args;
mod output;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use nakamoto_bounds::sim::{simulate_end_to_end, SimConfig, SimMode};
use nakamoto_bounds::{
    sweep, BoundOptions, BoundResult, Error, ProtocolParams, RegimeReport, SweepAxis, SweepRow, Which,
};

use args::{BoundArgs, Cli, Command, FiguresArgs, NumericArgs, PointArgs, SimulateArgs};
use output::{Cell, Table};

const BOUND_COLUMNS: [&str; 12] = [
    "lambda",
    "delta",
    "alpha",
    "k",
    "lower",
    "upper",
    "lower_trunc_err",
    "upper_trunc_err",
    "ultimate_fault_tolerance",
    "rigged_fault_tolerance",
    "two_step_drift",
    "three_way_drift",
];

const SIM_COLUMNS: [&str; 8] = ["mode", "trials", "seed", "warmup", "horizon", "freq", "stderr", "truncated_trials"];

enum Failure {
    Usage(String),
    Io(PathBuf, io::Error),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Failure::Io(path, e) => {
                eprintln!("error: {}: {e}", path.display());
                ExitCode::from(2)
            }
        }
    }
}

type Outcome = Result<(), Failure>;

fn stdout_err(e: io::Error) -> Failure {
    Failure::Io(PathBuf::from("<stdout>"), e)
}

fn options(n: &NumericArgs, lead: args::LeadArg) -> BoundOptions {
    BoundOptions { lead_variant: lead.into(), pmf_variant: n.pmf_variant.into(), eps: n.eps }
}

fn base_point(p: &PointArgs) -> Result<ProtocolParams, Failure> {
    ProtocolParams::new(p.lambda, p.delta, p.alpha, *p.k.start()).map_err(|e| Failure::Usage(e.to_string()))
}

/// A bound, or `None` when its regime conditions fail. Other failures are
/// reported on stderr and also leave the cell empty.
fn bound_value(
    r: &Option<nakamoto_bounds::Result<BoundResult>>,
    what: &str,
    p: &ProtocolParams,
) -> Option<BoundResult> {
    match r {
        Some(Ok(b)) => Some(b.clone()),
        Some(Err(Error::RegimeViolation(_))) | None => None,
        Some(Err(e)) => {
            eprintln!("warning: {what} bound at k={} not computed: {e}", p.k());
            None
        }
    }
}

fn bound_cells(row: &SweepRow, digits: u32) -> Vec<Cell> {
    let p = &row.params;
    let lower = bound_value(&row.lower, "lower", p);
    let upper = bound_value(&row.upper, "upper", p);
    let RegimeReport { ultimate_fault_tolerance, rigged_fault_tolerance, two_step_drift, three_way_drift } = row.regime;
    vec![
        Cell::Num(p.lambda()),
        Cell::Num(p.delta()),
        Cell::Num(p.alpha()),
        Cell::Int(p.k().into()),
        Cell::prob(lower.as_ref().map(|b| b.value), digits),
        Cell::prob(upper.as_ref().map(|b| b.value), digits),
        Cell::prob(lower.as_ref().map(|b| b.truncation_error), digits),
        Cell::prob(upper.as_ref().map(|b| b.truncation_error), digits),
        Cell::Bool(ultimate_fault_tolerance),
        Cell::Bool(rigged_fault_tolerance),
        Cell::Bool(two_step_drift),
        Cell::Bool(three_way_drift),
    ]
}

fn k_sweep(p: &PointArgs, opts: &BoundOptions) -> Result<Vec<SweepRow>, Failure> {
    let base = base_point(p)?;
    sweep(&base, &SweepAxis::K(p.k.clone().collect()), Which::Both, opts).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_bound(a: &BoundArgs) -> Outcome {
    let opts = options(&a.numeric, a.lead_variant);
    let digits = a.numeric.precision;
    let mut table = Table::new(BOUND_COLUMNS.to_vec(), digits);
    for row in k_sweep(&a.point, &opts)? {
        table.push(bound_cells(&row, digits));
    }
    table.write(a.point.format, io::stdout().lock()).map_err(stdout_err)
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome {
    let opts = options(&a.numeric, a.lead_variant);
    let digits = a.numeric.precision;
    let mode: SimMode = a.mode.into();
    let mut columns = BOUND_COLUMNS.to_vec();
    columns.extend(SIM_COLUMNS);
    let mut table = Table::new(columns, digits);
    let mut hist = Table::new(vec!["k", "histogram", "value", "count"], digits);

    for row in k_sweep(&a.point, &opts)? {
        let cfg = SimConfig {
            params: row.params,
            trials: a.trials,
            warmup_blocks: a.warmup,
            seed: a.seed,
            mode,
            horizon: a.horizon,
        };
        let report = simulate_end_to_end(&cfg).map_err(|e| match e {
            Error::HorizonTooSmall { .. } => Failure::Usage(format!("{e}; raise --horizon")),
            e => Failure::Usage(e.to_string()),
        })?;
        let mut cells = bound_cells(&row, digits);
        cells.extend([
            Cell::Text(match mode {
                SimMode::PrivateAttackDelta => "private-delta",
                SimMode::RiggedModel => "rigged",
            }),
            Cell::Int(a.trials),
            Cell::Int(a.seed),
            Cell::Int(a.warmup),
            Cell::Int(a.horizon),
            Cell::prob(Some(report.discard_freq()), digits),
            Cell::prob(Some(report.stderr()), digits),
            Cell::Int(report.truncated_trials()),
        ]);
        table.push(cells);

        let k = Cell::Int(row.params.k().into());
        for (name, h) in [("lead", &report.lead_hist), ("confirmation", &report.conf_count_hist)] {
            for (v, &c) in h.counts().iter().enumerate() {
                hist.push(vec![k, Cell::Text(name), Cell::Int(v as u64), Cell::Int(c)]);
            }
        }
    }

    if let Some(path) = &a.hist_out {
        write_csv_file(path, &hist)?;
    }
    table.write(a.point.format, io::stdout().lock()).map_err(stdout_err)
}

fn write_csv_file(path: &Path, table: &Table) -> Outcome {
    let io_err = |e| Failure::Io(path.to_path_buf(), e);
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    table.write_csv(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn cmd_figures(a: &FiguresArgs) -> Outcome {
    let opts = options(&a.numeric, a.lead_variant);
    let digits = a.numeric.precision;
    fs::create_dir_all(&a.out_dir).map_err(|e| Failure::Io(a.out_dir.clone(), e))?;

    let bitcoin = |alpha| ProtocolParams::bitcoin(alpha, 6).expect("valid preset");
    let ks: Vec<u32> = (1..=a.k_max).collect();
    let alphas: Vec<f64> = (52..=99).map(|a| a as f64 / 100.0).collect();
    let figures = [
        ("fig3.csv", bitcoin(0.75), SweepAxis::K(ks.clone())),
        ("fig4.csv", bitcoin(0.9), SweepAxis::K(ks.clone())),
        ("fig5.csv", ProtocolParams::ethereum(0.75, 6).expect("valid preset"), SweepAxis::K(ks)),
        ("fig6.csv", bitcoin(0.9), SweepAxis::Alpha(alphas)),
    ];
    for (name, base, axis) in figures {
        let rows = sweep(&base, &axis, Which::Both, &opts).map_err(|e| Failure::Usage(e.to_string()))?;
        let key = if matches!(axis, SweepAxis::K(_)) { "k" } else { "alpha" };
        let mut table = Table::new(vec![key, "lower", "upper"], digits);
        for row in &rows {
            let p = &row.params;
            let x = if key == "k" { Cell::Int(p.k().into()) } else { Cell::Num(p.alpha()) };
            let lower = bound_value(&row.lower, "lower", p).map(|b| b.value);
            let upper = bound_value(&row.upper, "upper", p).map(|b| b.value);
            table.push(vec![x, Cell::prob(lower, digits), Cell::prob(upper, digits)]);
        }
        write_csv_file(&a.out_dir.join(name), &table)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Figures(a) => cmd_figures(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
