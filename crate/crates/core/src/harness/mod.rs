//! Experiment plumbing: SDNR calibration, Monte-Carlo runs, sweeps, CSV and
//! configuration files.

pub mod config;
pub mod monte_carlo;
pub mod records;
pub mod sdnr;
pub mod sweep;

pub use monte_carlo::{run_monte_carlo, ModeSelection, MonteCarloReport, RmseSummary, TrialError, TrialRecord};
pub use records::{emit_csv, parse_csv, read_csv, write_csv, CurveRecord, FAILED_UNITS};
pub use sdnr::{average_sdnr, average_sdnr_linear, solve_power_for_sdnr};
pub use sweep::{
    fig2, fig3, fig4, log_space, run_sweep, scenario_at, SweepOutput, SweepSpec, SweepVariable, FIGURE_ANTENNAS, FIGURE_BANDWIDTHS_HZ,
    FIGURE_SDNR_DB,
};
