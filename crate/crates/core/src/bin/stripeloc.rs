use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stripeloc::bounds::{compute_bounds, SyncModel};
use stripeloc::harness::config::ConfigFile;
use stripeloc::harness::{average_sdnr, emit_csv, fig2, fig3, fig4, run_monte_carlo, run_sweep, write_csv, CurveRecord, ModeSelection};
use stripeloc::{Error, Result, Scenario};

#[derive(Parser, Debug)]
#[command(name = "stripeloc", version, about = "Radio-stripe positioning: bounds, Monte-Carlo runs and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment file; absent keys take reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the Monte-Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,

    #[arg(long, value_enum, global = true)]
    mode: Option<ModeArg>,

    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// PEB and CEB of the configured scenario.
    Bounds,
    /// One Monte-Carlo run at the configured SDNR.
    Simulate,
    /// Sweep described by the [sweep] section.
    Sweep,
    /// PEB versus bandwidth for M in {2, 4, 6, 8}.
    Fig2,
    /// Position RMSE and PEB versus SDNR.
    Fig3,
    /// Clock RMSE and CEB versus SDNR.
    Fig4,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Cp,
    Ncp,
    Both,
}

impl From<ModeArg> for ModeSelection {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Cp => ModeSelection::Cp,
            ModeArg::Ncp => ModeSelection::Ncp,
            ModeArg::Both => ModeSelection::Both,
        }
    }
}

/// SDNR in dB for the x column, rounded so solver round-off does not leak
/// into the CSV (`11.999999999999996` → `12`).
fn sdnr_axis(scenario: &Scenario) -> Result<f64> {
    let x = (average_sdnr(scenario)? * 1e9).round() / 1e9;
    Ok(if x == 0.0 { 0.0 } else { x })
}

fn bounds_records(scenario: &Scenario, mode: ModeSelection) -> Result<Vec<CurveRecord>> {
    let x = sdnr_axis(scenario)?;
    let n = scenario.stripe_count();
    let mut out = Vec::new();
    for (wanted, label, sync) in [
        (mode.wants_cp(), "cp", SyncModel::coherent(n)),
        (mode.wants_ncp(), "ncp", SyncModel::non_coherent(n)),
    ] {
        if !wanted {
            continue;
        }
        let b = compute_bounds(scenario, &sync)?;
        out.push(CurveRecord::new(x, format!("peb_{label}"), b.peb, "m"));
        out.push(CurveRecord::new(x, format!("ceb_{label}"), b.ceb * 1e9, "ns"));
    }
    Ok(out)
}

fn simulate_records(scenario: &Scenario, mode: ModeSelection, trials: usize, cfg: &ConfigFile) -> Result<Vec<CurveRecord>> {
    let x = sdnr_axis(scenario)?;
    let report = run_monte_carlo(scenario, mode, trials, &cfg.refine_options()?)?;
    let mut out = Vec::new();
    let mut push = |label: &str, s: &stripeloc::harness::RmseSummary<f64>| {
        out.push(CurveRecord::new(x, format!("rmse_position_{label}"), s.position, "m"));
        out.push(CurveRecord::new(x, format!("rmse_position_{label}_excl_failures"), s.position_excluding_failures, "m"));
        out.push(CurveRecord::new(x, format!("rmse_clock_{label}"), s.clock * 1e9, "ns"));
        out.push(CurveRecord::new(x, format!("rmse_clock_{label}_excl_failures"), s.clock_excluding_failures * 1e9, "ns"));
        out.push(CurveRecord::new(x, format!("failed_trials_{label}"), s.failures as f64, "count"));
    };
    if mode == ModeSelection::Both {
        push("ils", &report.ils);
    }
    if let Some(s) = &report.cp {
        push("cp", s);
    }
    if let Some(s) = &report.ncp {
        push("ncp", s);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(t) = cli.trials {
        if t == 0 {
            return Err(Error::Config("--trials must be >= 1".into()));
        }
        cfg.trials = Some(t);
        cfg.sweep.trials = Some(t);
    }
    let scenario: Scenario = cfg.scenario()?;
    let opts = cfg.refine_options()?;
    let mode: ModeSelection = cli.mode.map(Into::into).unwrap_or(ModeSelection::Both);

    let records = match cli.command {
        Command::Bounds => bounds_records(&scenario, mode)?,
        Command::Simulate => simulate_records(&scenario, mode, cfg.trials(), &cfg)?,
        Command::Sweep => {
            let mut spec = cfg.sweep_spec();
            if let Some(m) = cli.mode {
                spec.mode = m.into();
            }
            run_sweep(&spec, &scenario, &opts)?
        }
        Command::Fig2 => fig2(&scenario, mode, &opts)?,
        Command::Fig3 => fig3(&scenario, mode, cfg.trials(), &opts)?,
        Command::Fig4 => fig4(&scenario, mode, cfg.trials(), &opts)?,
    };

    match &cli.out {
        Some(p) => emit_csv(&records, p),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&records, &mut lock).map_err(|source| Error::Csv {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
            lock.flush().map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
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
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
