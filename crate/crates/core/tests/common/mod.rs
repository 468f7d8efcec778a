//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stripeloc::bounds::{SyncKind, SyncModel};
use stripeloc::dmc::{DisturbanceModel, DisturbanceSampler};
use stripeloc::estimators::{whiten, CostContext, WhitenedData};
use stripeloc::geometry::{link_geometry, StripePose, UeState};
use stripeloc::scalar::SPEED_OF_LIGHT;
use stripeloc::signal::{
    array_steering, array_steering_derivative, deterministic_observation, freq_steering, freq_steering_derivative, synthesize_observations,
    OfdmConfig,
};
use stripeloc::Scenario;

/// Three 2-element stripes, 4 subcarriers, DMC on, SDNR 10 dB.
pub fn small_scenario() -> Scenario {
    let ofdm = OfdmConfig::with_unit_pilots(3.5e9, 4e6, 4).unwrap();
    let d = ofdm.wavelength() / 2.0;
    let stripes = vec![
        StripePose::new([0.0, 0.0, 3.0], -0.6, 2, d).unwrap(),
        StripePose::new([6.0, 0.0, 3.0], 0.9, 2, d).unwrap(),
        StripePose::new([3.0, 6.0, 3.0], 3.0, 2, d).unwrap(),
    ];
    let s = Scenario {
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

/// Same as [`small_scenario`] with random QPSK-like pilots, so `s ≠ 1`
/// exercises the pilot modulation paths.
pub fn small_scenario_random_pilots() -> Scenario {
    let mut s = small_scenario();
    s.ofdm = OfdmConfig::with_random_pilots(3.5e9, 4e6, 4, 11).unwrap();
    s.with_sdnr_db(10.0).unwrap()
}

pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frobenius_c(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `Σ conj(a) b` over matching matrices.
fn inner(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Full parameter vector `[p_x, p_y, δτ, phase offsets…, α_1..α_N]` at the truth.
pub fn true_parameters(s: &Scenario, sync: &SyncModel) -> Vec<f64> {
    let mut eta = vec![s.ue.position[0], s.ue.position[1], s.ue.clock_offset];
    match sync.kind {
        SyncKind::Coherent => eta.push(s.ue.phase_offset),
        SyncKind::NonCoherent => eta.extend(std::iter::repeat_n(s.ue.phase_offset, s.stripe_count())),
    }
    eta.extend(s.amplitudes().unwrap());
    eta
}

/// Noise-free observation of every stripe as a function of the full
/// parameter vector, built from geometry alone.
pub fn stacked_mean(s: &Scenario, sync: &SyncModel, eta: &[f64]) -> Vec<Array2<Complex64>> {
    let n_stripes = s.stripe_count();
    let amp0 = 2 + sync.sync_param_count();
    (0..n_stripes)
        .map(|n| {
            let phase = match sync.kind {
                SyncKind::Coherent => eta[3],
                SyncKind::NonCoherent => eta[3 + n],
            };
            let ue = UeState::new([eta[0], eta[1], s.ue.position[2]], eta[2], phase);
            let stripe = &s.stripes[n];
            let link = link_geometry(&ue, stripe, s.ofdm.carrier_freq).unwrap();
            deterministic_observation(eta[amp0 + n], link.carrier_phase, link.aoa, link.pseudo_delay, &s.ofdm, stripe)
        })
        .collect()
}

/// Central-difference FIM `2 Re Σ_n (∂μ_n)^H R_n^{-1} (∂μ_n)` of the stacked mean.
pub fn finite_difference_fim(s: &Scenario, sync: &SyncModel) -> Array2<f64> {
    let eta = true_parameters(s, sync);
    let models = s.disturbance_models().unwrap();
    let d = eta.len();
    let amp0 = 2 + sync.sync_param_count();
    let step = |i: usize| -> f64 {
        match i {
            0 | 1 => 1e-6,
            2 => 1e-12,
            i if i < amp0 => 1e-6,
            i => 1e-6 * eta[i],
        }
    };
    let derivs: Vec<Vec<Array2<Complex64>>> = (0..d)
        .map(|i| {
            let h = step(i);
            let mut up = eta.clone();
            let mut dn = eta.clone();
            up[i] += h;
            dn[i] -= h;
            let (mu_up, mu_dn) = (stacked_mean(s, sync, &up), stacked_mean(s, sync, &dn));
            mu_up
                .iter()
                .zip(&mu_dn)
                .zip(&models)
                .map(|((u, l), m)| m.whiten_matrix(&((u - l) / Complex64::new(2.0 * h, 0.0))).unwrap())
                .collect()
        })
        .collect();
    Array2::from_shape_fn((d, d), |(i, j)| {
        2.0 * derivs[i].iter().zip(&derivs[j]).map(|(a, b)| inner(a, b)).sum::<Complex64>().re
    })
}

/// Relative Frobenius error after symmetric diagonal scaling by `1/√J_ii`
/// of the reference, so every parameter contributes regardless of units.
pub fn scaled_relative_error(reference: &Array2<f64>, other: &Array2<f64>) -> f64 {
    let d: Vec<f64> = (0..reference.nrows()).map(|i| 1.0 / reference[[i, i]].sqrt()).collect();
    let scale = |m: &Array2<f64>| Array2::from_shape_fn(m.dim(), |(i, j)| m[[i, j]] * d[i] * d[j]);
    let r = scale(reference);
    frobenius(&(&scale(other) - &r)) / frobenius(&r)
}

/// Channel-FIM entries from analytic derivative signatures, whitened and
/// contracted directly: order `[θ, τ̃, φ, α]`.
pub fn analytic_channel_fim(s: &Scenario, n: usize, model: &DisturbanceModel<f64>) -> Array2<f64> {
    let links = s.links().unwrap();
    let link = &links[n];
    let amp = s.amplitudes().unwrap()[n];
    let stripe = &s.stripes[n];
    let lam = s.wavelength();
    let g = Complex64::from_polar(1.0, link.carrier_phase);
    let j = Complex64::new(0.0, 1.0);
    let a = array_steering(link.aoa, stripe, lam);
    let da = array_steering_derivative(link.aoa, stripe, lam);
    let modulated = |v: Vec<Complex64>| v.iter().zip(&s.ofdm.pilots).map(|(b, p)| b * p).collect::<Vec<_>>();
    let b = modulated(freq_steering(link.pseudo_delay, &s.ofdm));
    let db = modulated(freq_steering_derivative(link.pseudo_delay, &s.ofdm));
    let outer = |u: &[Complex64], v: &[Complex64], c: Complex64| Array2::from_shape_fn((u.len(), v.len()), |(m, k)| c * u[m] * v[k]);
    let partials = [
        outer(&da, &b, g * amp),
        outer(&a, &db, g * amp),
        outer(&a, &b, j * g * amp),
        outer(&a, &b, g),
    ];
    let w: Vec<_> = partials.iter().map(|p| model.whiten_matrix(p).unwrap()).collect();
    Array2::from_shape_fn((4, 4), |(r, c)| 2.0 * inner(&w[r], &w[c]).re)
}

/// Nested brute-force coherent cost: for each common phase offset on a
/// uniform grid over one period of the `(α, δφ) ~ (−α, δφ+π)` symmetry,
/// fit the real amplitudes in closed form and keep the smallest residual.
pub fn brute_force_cp(p: [f64; 2], dt: f64, data: &WhitenedData<f64>, ctx: &CostContext<f64>, grid: usize) -> f64 {
    let links = ctx.candidate_links(p, dt).unwrap();
    let sig: Vec<Array2<Complex64>> = links
        .iter()
        .zip(&ctx.stripes)
        .zip(&ctx.models)
        .map(|((l, st), m)| {
            let y = deterministic_observation(1.0, l.carrier_phase, l.aoa, l.pseudo_delay, &ctx.ofdm, st);
            m.whiten_matrix(&y).unwrap()
        })
        .collect();
    let corr: Vec<(Complex64, f64)> = sig.iter().zip(&data.per_stripe).map(|(c, y)| (inner(c, y), inner(c, c).re)).collect();
    let energy: f64 = data.per_stripe.iter().map(|y| inner(y, y).re).sum();
    (0..grid)
        .map(|i| {
            let dphi = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / grid as f64;
            let rot = Complex64::from_polar(1.0, -dphi);
            corr.iter().fold(energy, |acc, (z, e)| {
                let alpha = (rot * z).re / e;
                // ‖y − α e^{jδφ} c‖² = ‖y‖² − 2α Re(e^{-jδφ} c^H y) + α² ‖c‖²
                acc - 2.0 * alpha * (rot * z).re + alpha * alpha * e
            })
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn random_candidates(count: usize, seed: u64) -> Vec<([f64; 2], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = [rng.random_range(0.5..5.5), rng.random_range(0.5..5.5)];
            (p, rng.random_range(0.0..100.0) / SPEED_OF_LIGHT)
        })
        .collect()
}

pub fn whitened_small(s: &Scenario, seed: u64) -> (WhitenedData<f64>, CostContext<f64>) {
    let ctx = CostContext::from_scenario(s).unwrap();
    let obs = synthesize_observations(s, seed).unwrap();
    (whiten(&obs, &ctx.models).unwrap(), ctx)
}

/// Empirical covariance of `draws` disturbance samples (vec order, antenna
/// fastest) and of their whitened versions, as relative Frobenius errors
/// against `R` and `I`.
pub fn disturbance_statistics(s: &Scenario, stripe: usize, draws: usize, seed: u64) -> (f64, f64) {
    let link = &s.links().unwrap()[stripe];
    let params = s.dmc_params(link.delay).unwrap();
    let m = s.stripes[stripe].antenna_count;
    let model = &s.disturbance_models().unwrap()[stripe];
    let sampler = DisturbanceSampler::new(&params, s.noise_power(), &s.ofdm.pilots, m);
    let dim = m * s.ofdm.subcarrier_count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cov = Array2::<Complex64>::zeros((dim, dim));
    let mut wcov = Array2::<Complex64>::zeros((dim, dim));
    let accumulate = |acc: &mut Array2<Complex64>, w: &Array2<Complex64>| {
        // vec order: index k·M + m
        let v: Vec<Complex64> = (0..w.ncols()).flat_map(|k| (0..w.nrows()).map(move |mm| w[[mm, k]])).collect();
        for i in 0..dim {
            for j in 0..dim {
                acc[[i, j]] += v[i] * v[j].conj();
            }
        }
    };
    for _ in 0..draws {
        let w = sampler.sample(&mut rng);
        accumulate(&mut cov, &w);
        accumulate(&mut wcov, &model.whiten_matrix(&w).unwrap());
    }
    let scale = Complex64::new(1.0 / draws as f64, 0.0);
    cov.mapv_inplace(|v| v * scale);
    wcov.mapv_inplace(|v| v * scale);
    let r = model.covariance();
    let cov_err = frobenius_c(&(&cov - &r)) / frobenius_c(&r);
    let eye = Array2::<Complex64>::from_diag_elem(dim, Complex64::new(1.0, 0.0));
    let white_err = frobenius_c(&(&wcov - &eye)) / frobenius_c(&eye);
    (cov_err, white_err)
}
