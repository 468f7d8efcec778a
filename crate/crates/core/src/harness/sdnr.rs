//! Average signal-to-(DMC plus noise) ratio and transmit-power calibration.

use crate::dmc::total_covariance;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::ScenarioConfig;
use crate::signal::{array_steering, modulated_freq_steering};

/// Linear average SDNR `(P/(NK)) Σ_n ρ_n² c_n^H R_n^{-1} c_n`.
pub fn average_sdnr_linear<T: Real>(scenario: &ScenarioConfig<T>) -> Result<T> {
    scenario.validate()?;
    let lambda = scenario.wavelength();
    let links = scenario.links()?;
    let gains = scenario.path_gains()?;
    let noise = scenario.noise_power();
    let mut acc = T::zero();
    for ((stripe, link), rho) in scenario.stripes.iter().zip(&links).zip(&gains) {
        let model = total_covariance(&scenario.dmc_params(link.delay)?, noise, &scenario.ofdm.pilots, stripe.antenna_count)?;
        let a = array_steering(link.aoa, stripe, lambda);
        let g = modulated_freq_steering(link.pseudo_delay, &scenario.ofdm);
        acc += *rho * *rho * model.quad_form(&g, &a, &g, &a).re;
    }
    let nk = T::from_usize_lossy(scenario.stripe_count() * scenario.ofdm.subcarrier_count);
    Ok(scenario.transmit_power / nk * acc)
}

/// Average SDNR in dB.
pub fn average_sdnr<T: Real>(scenario: &ScenarioConfig<T>) -> Result<T> {
    Ok(T::lit(10.0) * average_sdnr_linear(scenario)?.log10())
}

/// Transmit power giving `target_db` average SDNR. The SDNR is linear in `P`,
/// so this is closed form.
pub fn solve_power_for_sdnr<T: Real>(scenario: &ScenarioConfig<T>, target_db: T) -> Result<T> {
    if !target_db.is_finite() {
        return Err(Error::Config("target SDNR must be finite".into()));
    }
    let mut unit = scenario.clone();
    unit.transmit_power = T::one();
    let per_watt = average_sdnr_linear(&unit)?;
    if !(per_watt > T::zero()) {
        return Err(Error::Config("scenario has zero received signal energy".into()));
    }
    Ok(T::lit(10.0).powf(target_db / T::lit(10.0)) / per_watt)
}
