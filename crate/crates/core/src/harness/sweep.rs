//! Parameter sweeps producing bound and RMSE curves.

use crate::bounds::{compute_bounds, SyncModel};
use crate::error::{Error, Result};
use crate::estimators::{Mode, RefineOptions};
use crate::scalar::Real;
use crate::scenario::ScenarioConfig;

use super::monte_carlo::{run_monte_carlo, ModeSelection, RmseSummary};
use super::records::CurveRecord;
use super::sdnr::average_sdnr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    SdnrDb,
    /// Hz.
    Bandwidth,
    Antennas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SweepOutput {
    RmsePosition,
    RmseClock,
    Peb,
    Ceb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub mode: ModeSelection,
    pub trials: usize,
    pub outputs: Vec<SweepOutput>,
    /// SDNR held fixed for bandwidth/antenna sweeps; `None` keeps the
    /// scenario's current SDNR.
    pub hold_sdnr_db: Option<f64>,
    /// Appended to every series name (e.g. `_M4`).
    pub series_suffix: String,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if self.trials == 0 && self.outputs.iter().any(|o| matches!(o, SweepOutput::RmsePosition | SweepOutput::RmseClock)) {
            return Err(Error::Config("RMSE outputs need trials >= 1".into()));
        }
        if self.variable == SweepVariable::Antennas && self.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
            return Err(Error::Config("antenna counts must be positive integers".into()));
        }
        Ok(())
    }

    fn modes(&self) -> Vec<Mode> {
        let mut m = Vec::new();
        if self.mode.wants_cp() {
            m.push(Mode::Cp);
        }
        if self.mode.wants_ncp() {
            m.push(Mode::Ncp);
        }
        m
    }
}

const NS: f64 = 1e9;

/// Scenario at one sweep point. Bandwidth and antenna sweeps re-solve the
/// transmit power so the average SDNR stays at `hold_db`.
pub fn scenario_at<T: Real>(base: &ScenarioConfig<T>, variable: SweepVariable, x: f64, hold_db: T) -> Result<ScenarioConfig<T>> {
    match variable {
        SweepVariable::SdnrDb => base.with_sdnr_db(T::lit(x)),
        SweepVariable::Bandwidth => base.with_bandwidth(T::lit(x))?.with_sdnr_db(hold_db),
        SweepVariable::Antennas => base.with_antennas(x as usize)?.with_sdnr_db(hold_db),
    }
}

fn bound_records<T: Real>(spec: &SweepSpec, scenario: &ScenarioConfig<T>, x: f64, out: &mut Vec<CurveRecord>) {
    for mode in spec.modes() {
        let sync = match mode {
            Mode::Cp => SyncModel::coherent(scenario.stripe_count()),
            Mode::Ncp => SyncModel::non_coherent(scenario.stripe_count()),
        };
        let label = mode.label();
        let peb_name = format!("peb_{label}{}", spec.series_suffix);
        let ceb_name = format!("ceb_{label}{}", spec.series_suffix);
        let want_peb = spec.outputs.contains(&SweepOutput::Peb);
        let want_ceb = spec.outputs.contains(&SweepOutput::Ceb);
        match compute_bounds(scenario, &sync) {
            Ok(b) => {
                if want_peb {
                    out.push(CurveRecord::new(x, peb_name, b.peb.to_f64_lossy(), "m"));
                }
                if want_ceb {
                    out.push(CurveRecord::new(x, ceb_name, b.ceb.to_f64_lossy() * NS, "ns"));
                }
            }
            Err(_) => {
                if want_peb {
                    out.push(CurveRecord::failed(x, peb_name));
                }
                if want_ceb {
                    out.push(CurveRecord::failed(x, ceb_name));
                }
            }
        }
    }
}

fn rmse_records<T: Real>(spec: &SweepSpec, label: &str, summary: Option<&RmseSummary<T>>, x: f64, out: &mut Vec<CurveRecord>) {
    let pos = format!("rmse_position_{label}{}", spec.series_suffix);
    let clk = format!("rmse_clock_{label}{}", spec.series_suffix);
    let want_pos = spec.outputs.contains(&SweepOutput::RmsePosition);
    let want_clk = spec.outputs.contains(&SweepOutput::RmseClock);
    match summary {
        Some(s) => {
            if want_pos {
                out.push(CurveRecord::new(x, pos, s.position.to_f64_lossy(), "m"));
                out.push(CurveRecord::new(
                    x,
                    format!("rmse_position_{label}_excl_failures{}", spec.series_suffix),
                    s.position_excluding_failures.to_f64_lossy(),
                    "m",
                ));
            }
            if want_clk {
                out.push(CurveRecord::new(x, clk, s.clock.to_f64_lossy() * NS, "ns"));
                out.push(CurveRecord::new(
                    x,
                    format!("rmse_clock_{label}_excl_failures{}", spec.series_suffix),
                    s.clock_excluding_failures.to_f64_lossy() * NS,
                    "ns",
                ));
            }
            out.push(CurveRecord::new(x, format!("failed_trials_{label}{}", spec.series_suffix), s.failures as f64, "count"));
        }
        None => {
            if want_pos {
                out.push(CurveRecord::failed(x, pos));
            }
            if want_clk {
                out.push(CurveRecord::failed(x, clk));
            }
        }
    }
}

fn failed_point(spec: &SweepSpec, x: f64, wants_rmse: bool, out: &mut Vec<CurveRecord>) {
    for mode in spec.modes() {
        let label = mode.label();
        if spec.outputs.contains(&SweepOutput::Peb) {
            out.push(CurveRecord::failed(x, format!("peb_{label}{}", spec.series_suffix)));
        }
        if spec.outputs.contains(&SweepOutput::Ceb) {
            out.push(CurveRecord::failed(x, format!("ceb_{label}{}", spec.series_suffix)));
        }
        if wants_rmse {
            rmse_records::<f64>(spec, label, None, x, out);
        }
    }
}

/// Evaluates the requested curves at every sweep value. A point that fails
/// is emitted with [`FAILED_UNITS`](super::records::FAILED_UNITS) and the
/// sweep continues.
pub fn run_sweep<T: Real>(spec: &SweepSpec, scenario: &ScenarioConfig<T>, opts: &RefineOptions<T>) -> Result<Vec<CurveRecord>> {
    spec.validate()?;
    scenario.validate()?;
    let hold = match spec.hold_sdnr_db {
        Some(v) => T::lit(v),
        None => average_sdnr(scenario)?,
    };
    let wants_rmse = spec
        .outputs
        .iter()
        .any(|o| matches!(o, SweepOutput::RmsePosition | SweepOutput::RmseClock));
    let mut out = Vec::new();
    for &x in &spec.values {
        let point = match scenario_at(scenario, spec.variable, x, hold) {
            Ok(s) => s,
            Err(e) if e.exit_code() == 1 => return Err(e),
            Err(_) => {
                failed_point(spec, x, wants_rmse, &mut out);
                continue;
            }
        };
        bound_records(spec, &point, x, &mut out);
        if wants_rmse {
            match run_monte_carlo(&point, spec.mode, spec.trials, opts) {
                Ok(r) => {
                    if spec.mode == ModeSelection::Both {
                        rmse_records(spec, "ils", Some(&r.ils), x, &mut out);
                    }
                    if spec.mode.wants_cp() {
                        rmse_records(spec, "cp", r.cp.as_ref(), x, &mut out);
                    }
                    if spec.mode.wants_ncp() {
                        rmse_records(spec, "ncp", r.ncp.as_ref(), x, &mut out);
                    }
                }
                Err(e) if e.exit_code() == 1 => return Err(e),
                Err(_) => {
                    for mode in spec.modes() {
                        rmse_records::<T>(spec, mode.label(), None, x, &mut out);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Log-spaced values from `lo` to `hi` with `per_decade` points per decade.
pub fn log_space(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n)
        .map(|i| {
            let v = lo * 10f64.powf(i as f64 / per_decade as f64);
            // snap to 6 significant digits for stable CSV x values
            let mag = 10f64.powi(v.log10().floor() as i32 - 5);
            (v / mag).round() * mag
        })
        .collect()
}

/// SDNR grid of the canned RMSE figures, dB.
pub const FIGURE_SDNR_DB: [f64; 6] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0];

/// Bandwidth grid of the canned bandwidth figure, Hz (1–2–4 steps per decade).
pub const FIGURE_BANDWIDTHS_HZ: [f64; 10] = [1e6, 2e6, 4e6, 1e7, 2e7, 4e7, 1e8, 2e8, 4e8, 1e9];

/// Antenna counts of the bandwidth figure.
pub const FIGURE_ANTENNAS: [usize; 4] = [2, 4, 6, 8];

/// PEB versus bandwidth (1 MHz – 1 GHz) at fixed SDNR for M ∈ {2, 4, 6, 8}.
pub fn fig2<T: Real>(scenario: &ScenarioConfig<T>, mode: ModeSelection, opts: &RefineOptions<T>) -> Result<Vec<CurveRecord>> {
    // held at the scenario's own SDNR, rounded so x values and re-solved powers are stable
    let hold = (average_sdnr(scenario)?.to_f64_lossy() * 1e9).round() / 1e9;
    let mut out = Vec::new();
    for m in FIGURE_ANTENNAS {
        let spec = SweepSpec {
            variable: SweepVariable::Bandwidth,
            values: FIGURE_BANDWIDTHS_HZ.to_vec(),
            mode,
            trials: 0,
            outputs: vec![SweepOutput::Peb],
            hold_sdnr_db: Some(hold),
            series_suffix: format!("_M{m}"),
        };
        out.extend(run_sweep(&spec, &scenario.with_antennas(m)?, opts)?);
    }
    Ok(out)
}

/// Position RMSE and PEB versus SDNR.
pub fn fig3<T: Real>(scenario: &ScenarioConfig<T>, mode: ModeSelection, trials: usize, opts: &RefineOptions<T>) -> Result<Vec<CurveRecord>> {
    let spec = SweepSpec {
        variable: SweepVariable::SdnrDb,
        values: FIGURE_SDNR_DB.to_vec(),
        mode,
        trials,
        outputs: vec![SweepOutput::RmsePosition, SweepOutput::Peb],
        hold_sdnr_db: None,
        series_suffix: String::new(),
    };
    run_sweep(&spec, scenario, opts)
}

/// Clock RMSE and CEB versus SDNR.
pub fn fig4<T: Real>(scenario: &ScenarioConfig<T>, mode: ModeSelection, trials: usize, opts: &RefineOptions<T>) -> Result<Vec<CurveRecord>> {
    let spec = SweepSpec {
        variable: SweepVariable::SdnrDb,
        values: FIGURE_SDNR_DB.to_vec(),
        mode,
        trials,
        outputs: vec![SweepOutput::RmseClock, SweepOutput::Ceb],
        hold_sdnr_db: None,
        series_suffix: String::new(),
    };
    run_sweep(&spec, scenario, opts)
}
