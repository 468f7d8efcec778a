//! Full experiment description shared by synthesis, estimation and bounds.

use crate::dmc::{total_covariance, DisturbanceModel, DmcParams};
use crate::error::{Error, Result};
use crate::geometry::{link_geometry, norm3, sub3, LinkGeometry, StripePose, UeState};
use crate::harness::sdnr::solve_power_for_sdnr;
use crate::scalar::{Real, BOLTZMANN, SPEED_OF_LIGHT, STANDARD_NOISE_TEMPERATURE};
use crate::signal::OfdmConfig;

/// Stripe poses, UE truth, OFDM numerology, DMC and noise parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    pub stripes: Vec<StripePose<T>>,
    pub ue: UeState<T>,
    pub ofdm: OfdmConfig<T>,
    /// Transmit power `P`, watts.
    pub transmit_power: T,
    /// DMC peak power over noise power, dB.
    pub dnr_db: T,
    /// When false the DMC is absent (`α_d = 0`) and only thermal noise remains.
    pub dmc_enabled: bool,
    /// `c T_d`, meters.
    pub dmc_decay_distance: T,
    /// Extra path length before the DMC onset, meters.
    pub dmc_onset_excess: T,
    /// Kelvin. Zero gives noiseless synthesis (whitening then needs an explicit model).
    pub noise_temperature: T,
    pub seed: u64,
}

/// Reference SDNR (dB) that the default transmit power is calibrated to.
pub const REFERENCE_SDNR_DB: f64 = 12.0;

/// Corner positions of the reference 10 m × 10 m area, stripes at 5 m height.
pub const REFERENCE_STRIPE_POSITIONS: [[f64; 3]; 4] = [[0.0, 0.0, 5.0], [10.0, 0.0, 5.0], [10.0, 10.0, 5.0], [0.0, 10.0, 5.0]];

/// Orientations that point each corner stripe's boresight (local +y) at the area center.
pub const REFERENCE_STRIPE_ORIENTATIONS: [f64; 4] = [
    -std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_4,
    3.0 * std::f64::consts::FRAC_PI_4,
    -3.0 * std::f64::consts::FRAC_PI_4,
];

impl<T: Real> ScenarioConfig<T> {
    /// The reference scenario: four 4-element half-wavelength stripes on the
    /// corners, UE at [7, 3, 1], 3.5 GHz, 100 MHz, 100 subcarriers, DNR 20 dB,
    /// and transmit power set for a 12 dB average SDNR.
    pub fn reference() -> Result<Self> {
        let ofdm = OfdmConfig::with_unit_pilots(T::lit(3.5e9), T::lit(100e6), 100)?;
        let d = ofdm.wavelength() / T::lit(2.0);
        let stripes = REFERENCE_STRIPE_POSITIONS
            .iter()
            .zip(REFERENCE_STRIPE_ORIENTATIONS)
            .map(|(p, b)| StripePose::new(p.map(T::lit), T::lit(b), 4, d))
            .collect::<Result<Vec<_>>>()?;
        let ue = UeState::new(
            [T::lit(7.0), T::lit(3.0), T::lit(1.0)],
            T::lit(100.0 / SPEED_OF_LIGHT),
            T::lit(10f64.to_radians()),
        );
        let mut s = Self {
            stripes,
            ue,
            ofdm,
            transmit_power: T::one(),
            dnr_db: T::lit(20.0),
            dmc_enabled: true,
            dmc_decay_distance: T::lit(20.0),
            dmc_onset_excess: T::one(),
            noise_temperature: T::lit(STANDARD_NOISE_TEMPERATURE),
            seed: 0,
        };
        s.transmit_power = solve_power_for_sdnr(&s, T::lit(REFERENCE_SDNR_DB))?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stripes.is_empty() {
            return Err(Error::Config("scenario needs at least one stripe".into()));
        }
        if !(self.ofdm.bandwidth > T::zero()) || self.ofdm.subcarrier_count == 0 {
            return Err(Error::Config("bandwidth and subcarrier count must be > 0".into()));
        }
        if !(self.transmit_power > T::zero()) || !self.transmit_power.is_finite() {
            return Err(Error::Config("transmit power must be finite and > 0".into()));
        }
        if !(self.noise_temperature >= T::zero()) {
            return Err(Error::Config("noise temperature must be >= 0".into()));
        }
        if !(self.dmc_decay_distance > T::zero()) {
            return Err(Error::Config("DMC decay distance must be > 0".into()));
        }
        if !self.dnr_db.is_finite() {
            return Err(Error::Config("DNR must be finite".into()));
        }
        if self.ofdm.pilots.len() != self.ofdm.subcarrier_count {
            return Err(Error::Config("pilot count must equal subcarrier count".into()));
        }
        Ok(())
    }

    pub fn stripe_count(&self) -> usize {
        self.stripes.len()
    }

    pub fn wavelength(&self) -> T {
        self.ofdm.wavelength()
    }

    /// `σ² = k_B T₀ B`.
    pub fn noise_power(&self) -> T {
        T::lit(BOLTZMANN) * self.noise_temperature * self.ofdm.bandwidth
    }

    pub fn ue_height(&self) -> T {
        self.ue.position[2]
    }

    pub fn links(&self) -> Result<Vec<LinkGeometry<T>>> {
        self.stripes
            .iter()
            .map(|s| link_geometry(&self.ue, s, self.ofdm.carrier_freq))
            .collect()
    }

    /// Free-space path gains `ρ_n = λ / (4π ‖p − p_n‖)`.
    pub fn path_gains(&self) -> Result<Vec<T>> {
        let lambda = self.wavelength();
        self.stripes
            .iter()
            .map(|s| {
                let d = norm3(&sub3(&self.ue.position, &s.position));
                if !(d > T::zero()) {
                    return Err(Error::Domain("zero range: UE colocated with stripe".into()));
                }
                Ok(lambda / (T::lit(4.0) * T::PI() * d))
            })
            .collect()
    }

    /// `α_n = √P ρ_n`.
    pub fn amplitudes(&self) -> Result<Vec<T>> {
        let sp = self.transmit_power.sqrt();
        Ok(self.path_gains()?.into_iter().map(|r| sp * r).collect())
    }

    /// DMC parameters for a link with LoS delay `link_delay`.
    pub fn dmc_params(&self, link_delay: T) -> Result<DmcParams<T>> {
        if !self.dmc_enabled {
            return Ok(DmcParams::disabled());
        }
        DmcParams::from_link(
            self.ofdm.bandwidth,
            self.ofdm.subcarrier_count,
            link_delay,
            self.noise_power(),
            self.dnr_db,
            self.dmc_decay_distance,
            self.dmc_onset_excess,
        )
    }

    /// Per-stripe disturbance covariances at the true UE position.
    pub fn disturbance_models(&self) -> Result<Vec<DisturbanceModel<T>>> {
        let noise = self.noise_power();
        self.links()?
            .iter()
            .zip(&self.stripes)
            .map(|(l, s)| total_covariance(&self.dmc_params(l.delay)?, noise, &self.ofdm.pilots, s.antenna_count))
            .collect()
    }

    /// Same scenario with a different bandwidth; pilots and K are kept.
    pub fn with_bandwidth(&self, bandwidth: T) -> Result<Self> {
        let mut s = self.clone();
        s.ofdm = OfdmConfig::new(self.ofdm.carrier_freq, bandwidth, self.ofdm.pilots.clone())?;
        Ok(s)
    }

    /// Same scenario with every stripe carrying `antennas` elements.
    pub fn with_antennas(&self, antennas: usize) -> Result<Self> {
        let mut s = self.clone();
        s.stripes = self
            .stripes
            .iter()
            .map(|p| StripePose::new(p.position, p.orientation, antennas, p.element_spacing))
            .collect::<Result<_>>()?;
        Ok(s)
    }

    /// Same scenario with the transmit power re-solved for `sdnr_db`.
    pub fn with_sdnr_db(&self, sdnr_db: T) -> Result<Self> {
        let mut s = self.clone();
        s.transmit_power = solve_power_for_sdnr(self, sdnr_db)?;
        Ok(s)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> ScenarioConfig<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        ScenarioConfig {
            stripes: self
                .stripes
                .iter()
                .map(|s| StripePose {
                    position: s.position.map(c),
                    orientation: c(s.orientation),
                    antenna_count: s.antenna_count,
                    element_spacing: c(s.element_spacing),
                })
                .collect(),
            ue: UeState {
                position: self.ue.position.map(c),
                clock_offset: c(self.ue.clock_offset),
                phase_offset: c(self.ue.phase_offset),
            },
            ofdm: OfdmConfig {
                carrier_freq: c(self.ofdm.carrier_freq),
                bandwidth: c(self.ofdm.bandwidth),
                subcarrier_count: self.ofdm.subcarrier_count,
                pilots: self.ofdm.pilots.iter().map(|p| num_complex::Complex::new(c(p.re), c(p.im))).collect(),
            },
            transmit_power: c(self.transmit_power),
            dnr_db: c(self.dnr_db),
            dmc_enabled: self.dmc_enabled,
            dmc_decay_distance: c(self.dmc_decay_distance),
            dmc_onset_excess: c(self.dmc_onset_excess),
            noise_temperature: c(self.noise_temperature),
            seed: self.seed,
        }
    }
}
