//! Monte-Carlo driver: synthesize, estimate, accumulate squared errors.

use rayon::prelude::*;

use crate::error::Result;
use crate::estimators::{estimate, CostContext, EstimateBundle, RefineOptions};
use crate::scalar::Real;
use crate::scenario::ScenarioConfig;
use crate::signal::synthesize_observations;

/// Which estimators a run exercises. `Both` records ILS, NCP and CP on the
/// same trials; `Cp` still runs NCP internally (it seeds the CP search).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Cp,
    Ncp,
    Both,
}

impl ModeSelection {
    pub fn wants_cp(self) -> bool {
        matches!(self, ModeSelection::Cp | ModeSelection::Both)
    }

    pub fn wants_ncp(self) -> bool {
        matches!(self, ModeSelection::Ncp | ModeSelection::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialError<T> {
    /// Euclidean 2D position error, meters.
    pub position: T,
    /// Absolute clock-offset error, seconds.
    pub clock: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord<T> {
    pub trial: usize,
    pub seed: u64,
    pub ils: Option<TrialError<T>>,
    pub ncp: Option<TrialError<T>>,
    pub cp: Option<TrialError<T>>,
    /// Set when the trial failed (initialization or numerics); estimates are absent.
    pub failure: Option<String>,
    /// Error of the fallback guess (stripe centroid, zero clock offset) used
    /// for failed trials in the inclusive RMSE.
    pub fallback: TrialError<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseSummary<T> {
    /// Meters; failed trials count with their fallback error.
    pub position: T,
    /// Seconds; failed trials count with their fallback error.
    pub clock: T,
    pub position_excluding_failures: T,
    pub clock_excluding_failures: T,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport<T> {
    pub ils: RmseSummary<T>,
    pub ncp: Option<RmseSummary<T>>,
    pub cp: Option<RmseSummary<T>>,
    pub records: Vec<TrialRecord<T>>,
}

fn errors<T: Real>(scenario: &ScenarioConfig<T>, p: [T; 2], clock: T) -> TrialError<T> {
    let t = scenario.ue.position_2d();
    let (dx, dy) = (p[0] - t[0], p[1] - t[1]);
    TrialError {
        position: (dx * dx + dy * dy).sqrt(),
        clock: (clock - scenario.ue.clock_offset).abs(),
    }
}

fn summarize<T: Real>(records: &[TrialRecord<T>], pick: impl Fn(&TrialRecord<T>) -> Option<TrialError<T>>) -> RmseSummary<T> {
    let mut incl = (T::zero(), T::zero());
    let mut excl = (T::zero(), T::zero());
    let mut ok = 0usize;
    for r in records {
        let e = match pick(r) {
            Some(e) => {
                ok += 1;
                excl.0 += e.position * e.position;
                excl.1 += e.clock * e.clock;
                e
            }
            None => r.fallback,
        };
        incl.0 += e.position * e.position;
        incl.1 += e.clock * e.clock;
    }
    let n = T::from_usize_lossy(records.len().max(1));
    let m = T::from_usize_lossy(ok);
    let rms = |s: T, d: T| if d > T::zero() { (s / d).sqrt() } else { T::nan() };
    RmseSummary {
        position: rms(incl.0, n),
        clock: rms(incl.1, n),
        position_excluding_failures: rms(excl.0, m),
        clock_excluding_failures: rms(excl.1, m),
        trials: records.len(),
        failures: records.len() - ok,
    }
}

/// Runs `trials` independent trials; trial `i` uses seed `scenario.seed + i`,
/// so results do not depend on the parallel schedule.
pub fn run_monte_carlo<T: Real>(
    scenario: &ScenarioConfig<T>,
    mode: ModeSelection,
    trials: usize,
    opts: &RefineOptions<T>,
) -> Result<MonteCarloReport<T>> {
    scenario.validate()?;
    if trials == 0 {
        return Err(crate::error::Error::Config("trials must be >= 1".into()));
    }
    let ctx = CostContext::from_scenario(scenario)?;
    let inv_n = T::one() / T::from_usize_lossy(scenario.stripe_count());
    let centroid = [
        scenario.stripes.iter().fold(T::zero(), |a, s| a + s.position[0]) * inv_n,
        scenario.stripes.iter().fold(T::zero(), |a, s| a + s.position[1]) * inv_n,
    ];
    let fallback = errors(scenario, centroid, T::zero());

    let records: Vec<TrialRecord<T>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = scenario.seed.wrapping_add(i as u64);
            let outcome: Result<EstimateBundle<T>> =
                synthesize_observations(scenario, seed).and_then(|obs| estimate(&obs, &ctx, mode.wants_cp(), opts));
            match outcome {
                Ok(b) => TrialRecord {
                    trial: i,
                    seed,
                    ils: Some(errors(scenario, b.ils.position_2d, b.ils.clock_offset)),
                    ncp: Some(errors(scenario, b.ncp.position_2d, b.ncp.clock_offset)),
                    cp: b.cp.map(|c| errors(scenario, c.position_2d, c.clock_offset)),
                    failure: None,
                    fallback,
                },
                Err(e) => TrialRecord {
                    trial: i,
                    seed,
                    ils: None,
                    ncp: None,
                    cp: None,
                    failure: Some(e.to_string()),
                    fallback,
                },
            }
        })
        .collect();

    Ok(MonteCarloReport {
        ils: summarize(&records, |r| r.ils),
        ncp: mode.wants_ncp().then(|| summarize(&records, |r| r.ncp)),
        cp: mode.wants_cp().then(|| summarize(&records, |r| r.cp)),
        records,
    })
}
