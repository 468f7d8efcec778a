//! Shared fixtures for unit tests.

use crate::geometry::{StripePose, UeState};
use crate::scalar::SPEED_OF_LIGHT;
use crate::scenario::ScenarioConfig;
use crate::signal::OfdmConfig;

/// Three 2-element stripes, 4 subcarriers, DMC on, SDNR 10 dB.
pub(crate) fn small_scenario() -> ScenarioConfig<f64> {
    let ofdm = OfdmConfig::with_unit_pilots(3.5e9, 4e6, 4).unwrap();
    let d = ofdm.wavelength() / 2.0;
    let stripes = vec![
        StripePose::new([0.0, 0.0, 3.0], -0.6, 2, d).unwrap(),
        StripePose::new([6.0, 0.0, 3.0], 0.9, 2, d).unwrap(),
        StripePose::new([3.0, 6.0, 3.0], 3.0, 2, d).unwrap(),
    ];
    let s = ScenarioConfig {
        stripes,
        ue: UeState::new([2.0, 2.5, 1.0], 40.0 / SPEED_OF_LIGHT, 0.4),
        ofdm,
        transmit_power: 1.0,
        dnr_db: 20.0,
        dmc_enabled: true,
        dmc_decay_distance: 20.0,
        dmc_onset_excess: 1.0,
        noise_temperature: 290.0,
        seed: 0,
    };
    s.with_sdnr_db(10.0).unwrap()
}
