//! TOML experiment file. Every key is optional; an empty file gives the
//! reference scenario (see the README for the schema).

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimators::RefineOptions;
use crate::geometry::{StripePose, UeState};
use crate::scalar::{Real, SPEED_OF_LIGHT};
use crate::scenario::{ScenarioConfig, REFERENCE_SDNR_DB, REFERENCE_STRIPE_ORIENTATIONS, REFERENCE_STRIPE_POSITIONS};
use crate::signal::OfdmConfig;

use super::monte_carlo::ModeSelection;
use super::sweep::{SweepOutput, SweepSpec, SweepVariable, FIGURE_SDNR_DB};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StripeEntry {
    pub position: [f64; 3],
    pub orientation_rad: f64,
    pub antennas: Option<usize>,
    pub element_spacing_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PilotKind {
    #[default]
    Unit,
    Random,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub carrier_freq_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub subcarriers: Option<usize>,
    pub pilots: Option<PilotKind>,
    pub pilot_seed: Option<u64>,
    /// Default antenna count for stripes that do not set their own.
    pub antennas: Option<usize>,
    /// Default element spacing; half a wavelength when absent.
    pub element_spacing_m: Option<f64>,
    pub stripes: Option<Vec<StripeEntry>>,
    pub ue_position: Option<[f64; 3]>,
    /// Clock offset expressed as a distance `c·δτ`, meters.
    pub clock_offset_m: Option<f64>,
    pub phase_offset_deg: Option<f64>,
    /// Average SDNR the transmit power is solved for. Ignored when
    /// `transmit_power_w` is given.
    pub sdnr_db: Option<f64>,
    pub transmit_power_w: Option<f64>,
    pub dnr_db: Option<f64>,
    pub dmc: Option<bool>,
    pub dmc_decay_m: Option<f64>,
    pub dmc_onset_excess_m: Option<f64>,
    pub noise_temperature_k: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub nfft: Option<usize>,
    pub max_iterations: Option<usize>,
    pub position_tolerance_m: Option<f64>,
    pub clock_tolerance_s: Option<f64>,
    pub initial_position_step_m: Option<f64>,
    pub initial_clock_step_m: Option<f64>,
    pub cp_grid_half_span_wavelengths: Option<f64>,
    pub cp_grid_step_wavelengths: Option<f64>,
    pub cp_grid_clock: Option<bool>,
    pub cp_candidates: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VariableKey {
    SdnrDb,
    Bandwidth,
    Antennas,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OutputKey {
    RmsePosition,
    RmseClock,
    Peb,
    Ceb,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ModeKey {
    Cp,
    Ncp,
    Both,
}

impl From<ModeKey> for ModeSelection {
    fn from(m: ModeKey) -> Self {
        match m {
            ModeKey::Cp => ModeSelection::Cp,
            ModeKey::Ncp => ModeSelection::Ncp,
            ModeKey::Both => ModeSelection::Both,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: Option<VariableKey>,
    pub values: Option<Vec<f64>>,
    pub mode: Option<ModeKey>,
    pub trials: Option<usize>,
    pub outputs: Option<Vec<OutputKey>>,
    pub hold_sdnr_db: Option<f64>,
}

/// Default trial count for Monte-Carlo runs.
pub const DEFAULT_TRIALS: usize = 1000;

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    /// Builds the scenario, filling every absent key with its reference value.
    pub fn scenario<T: Real>(&self) -> Result<ScenarioConfig<T>> {
        let sc = &self.scenario;
        let fc = sc.carrier_freq_hz.unwrap_or(3.5e9);
        let bw = sc.bandwidth_hz.unwrap_or(100e6);
        let k = sc.subcarriers.unwrap_or(100);
        let ofdm = match sc.pilots.unwrap_or_default() {
            PilotKind::Unit => OfdmConfig::with_unit_pilots(T::lit(fc), T::lit(bw), k)?,
            PilotKind::Random => OfdmConfig::with_random_pilots(T::lit(fc), T::lit(bw), k, sc.pilot_seed.unwrap_or(0))?,
        };
        let lambda = SPEED_OF_LIGHT / fc;
        let antennas = sc.antennas.unwrap_or(4);
        let spacing = sc.element_spacing_m.unwrap_or(lambda / 2.0);
        let entries: Vec<StripeEntry> = match &sc.stripes {
            Some(v) => v.clone(),
            None => REFERENCE_STRIPE_POSITIONS
                .iter()
                .zip(REFERENCE_STRIPE_ORIENTATIONS)
                .map(|(p, b)| StripeEntry {
                    position: *p,
                    orientation_rad: b,
                    antennas: None,
                    element_spacing_m: None,
                })
                .collect(),
        };
        let stripes = entries
            .iter()
            .map(|e| {
                StripePose::new(
                    e.position.map(T::lit),
                    T::lit(e.orientation_rad),
                    e.antennas.unwrap_or(antennas),
                    T::lit(e.element_spacing_m.unwrap_or(spacing)),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let ue = UeState::new(
            sc.ue_position.unwrap_or([7.0, 3.0, 1.0]).map(T::lit),
            T::lit(sc.clock_offset_m.unwrap_or(100.0) / SPEED_OF_LIGHT),
            T::lit(sc.phase_offset_deg.unwrap_or(10.0).to_radians()),
        );
        let mut s = ScenarioConfig {
            stripes,
            ue,
            ofdm,
            transmit_power: T::one(),
            dnr_db: T::lit(sc.dnr_db.unwrap_or(20.0)),
            dmc_enabled: sc.dmc.unwrap_or(true),
            dmc_decay_distance: T::lit(sc.dmc_decay_m.unwrap_or(20.0)),
            dmc_onset_excess: T::lit(sc.dmc_onset_excess_m.unwrap_or(1.0)),
            noise_temperature: T::lit(sc.noise_temperature_k.unwrap_or(crate::scalar::STANDARD_NOISE_TEMPERATURE)),
            seed: self.seed.unwrap_or(0),
        };
        s.transmit_power = match sc.transmit_power_w {
            Some(p) => T::lit(p),
            None => s.with_sdnr_db(T::lit(sc.sdnr_db.unwrap_or(REFERENCE_SDNR_DB)))?.transmit_power,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn refine_options<T: Real>(&self) -> Result<RefineOptions<T>> {
        let e = &self.estimator;
        let d = RefineOptions::<T>::default();
        let o = RefineOptions {
            nfft: e.nfft.unwrap_or(d.nfft),
            max_iterations: e.max_iterations.unwrap_or(d.max_iterations),
            position_tolerance: e.position_tolerance_m.map(T::lit).unwrap_or(d.position_tolerance),
            clock_tolerance: e.clock_tolerance_s.map(T::lit).unwrap_or(d.clock_tolerance),
            initial_position_step: e.initial_position_step_m.map(T::lit).unwrap_or(d.initial_position_step),
            initial_clock_step: e
                .initial_clock_step_m
                .map(|m| T::lit(m / SPEED_OF_LIGHT))
                .unwrap_or(d.initial_clock_step),
            cp_grid_half_span: e.cp_grid_half_span_wavelengths.map(T::lit).unwrap_or(d.cp_grid_half_span),
            cp_grid_step: e.cp_grid_step_wavelengths.map(T::lit).unwrap_or(d.cp_grid_step),
            cp_grid_clock: e.cp_grid_clock.unwrap_or(d.cp_grid_clock),
            cp_candidates: e.cp_candidates.unwrap_or(d.cp_candidates),
        };
        if o.nfft == 0 || o.max_iterations == 0 || o.cp_candidates == 0 {
            return Err(Error::Config("nfft, max_iterations and cp_candidates must be >= 1".into()));
        }
        if !(o.cp_grid_step > T::zero()) || !(o.cp_grid_half_span >= T::zero()) {
            return Err(Error::Config("CP grid step must be > 0 and span >= 0".into()));
        }
        if !(o.position_tolerance > T::zero()) || !(o.clock_tolerance > T::zero()) || !(o.initial_position_step > T::zero()) {
            return Err(Error::Config("tolerances and initial steps must be > 0".into()));
        }
        Ok(o)
    }

    /// Sweep description; defaults to an SDNR sweep over 0..25 dB of all outputs in both modes.
    pub fn sweep_spec(&self) -> SweepSpec {
        let sw = &self.sweep;
        SweepSpec {
            variable: match sw.variable.unwrap_or(VariableKey::SdnrDb) {
                VariableKey::SdnrDb => SweepVariable::SdnrDb,
                VariableKey::Bandwidth => SweepVariable::Bandwidth,
                VariableKey::Antennas => SweepVariable::Antennas,
            },
            values: sw.values.clone().unwrap_or_else(|| FIGURE_SDNR_DB.to_vec()),
            mode: sw.mode.unwrap_or(ModeKey::Both).into(),
            trials: sw.trials.unwrap_or_else(|| self.trials()),
            outputs: sw
                .outputs
                .clone()
                .unwrap_or_else(|| vec![OutputKey::RmsePosition, OutputKey::RmseClock, OutputKey::Peb, OutputKey::Ceb])
                .into_iter()
                .map(|o| match o {
                    OutputKey::RmsePosition => SweepOutput::RmsePosition,
                    OutputKey::RmseClock => SweepOutput::RmseClock,
                    OutputKey::Peb => SweepOutput::Peb,
                    OutputKey::Ceb => SweepOutput::Ceb,
                })
                .collect(),
            hold_sdnr_db: sw.hold_sdnr_db,
            series_suffix: String::new(),
        }
    }
}
