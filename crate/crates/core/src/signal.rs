//! Steering vectors and synthesis of the per-stripe observation matrices.
//!
//! Vectorization convention: `vec(Y)[k*M + m] = Y[m, k]` (antenna index
//! fastest), so `vec(a u^T) = u ⊗ a`.

use ndarray::Array2;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dmc::DisturbanceSampler;
use crate::error::{Error, Result};
use crate::geometry::StripePose;
use crate::scalar::{cis, Cplx, Real, SPEED_OF_LIGHT};
use crate::scenario::ScenarioConfig;

/// OFDM numerology and pilot symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmConfig<T> {
    pub carrier_freq: T,
    pub bandwidth: T,
    pub subcarrier_count: usize,
    pub pilots: Vec<Cplx<T>>,
}

impl<T: Real> OfdmConfig<T> {
    pub fn new(carrier_freq: T, bandwidth: T, pilots: Vec<Cplx<T>>) -> Result<Self> {
        if pilots.is_empty() {
            return Err(Error::Config("at least one subcarrier is required".into()));
        }
        if !(carrier_freq > T::zero()) || !(bandwidth > T::zero()) {
            return Err(Error::Config("carrier frequency and bandwidth must be > 0".into()));
        }
        if pilots.iter().any(|s| !(s.norm() > T::zero())) {
            return Err(Error::Config("pilot symbols must be nonzero".into()));
        }
        Ok(Self {
            carrier_freq,
            bandwidth,
            subcarrier_count: pilots.len(),
            pilots,
        })
    }

    /// All-ones pilots.
    pub fn with_unit_pilots(carrier_freq: T, bandwidth: T, subcarrier_count: usize) -> Result<Self> {
        Self::new(carrier_freq, bandwidth, vec![Complex::new(T::one(), T::zero()); subcarrier_count])
    }

    /// Unit-modulus pilots with phases drawn uniformly from a seeded stream.
    pub fn with_random_pilots(carrier_freq: T, bandwidth: T, subcarrier_count: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pilots = (0..subcarrier_count)
            .map(|_| cis(T::lit(rng.random::<f64>() * std::f64::consts::TAU)))
            .collect();
        Self::new(carrier_freq, bandwidth, pilots)
    }

    /// `Δf = B / K`.
    pub fn subcarrier_spacing(&self) -> T {
        self.bandwidth / T::from_usize_lossy(self.subcarrier_count)
    }

    pub fn wavelength(&self) -> T {
        T::lit(SPEED_OF_LIGHT) / self.carrier_freq
    }
}

/// Centered element offsets `m - (M-1)/2`.
fn element_offsets<T: Real>(antennas: usize) -> impl Iterator<Item = T> {
    let center = T::from_usize_lossy(antennas.saturating_sub(1)) / T::lit(2.0);
    (0..antennas).map(move |m| T::from_usize_lossy(m) - center)
}

/// ULA response `a_m = exp(j 2π/λ d (m - (M-1)/2) sin θ)`, referenced to the array centroid.
pub fn array_steering<T: Real>(aoa: T, stripe: &StripePose<T>, wavelength: T) -> Vec<Cplx<T>> {
    let k = T::two_pi() / wavelength * stripe.element_spacing * aoa.sin();
    element_offsets::<T>(stripe.antenna_count).map(|o| cis(k * o)).collect()
}

/// `∂a/∂θ`.
pub fn array_steering_derivative<T: Real>(aoa: T, stripe: &StripePose<T>, wavelength: T) -> Vec<Cplx<T>> {
    let base = T::two_pi() / wavelength * stripe.element_spacing;
    let (s, c) = aoa.sin_cos();
    element_offsets::<T>(stripe.antenna_count)
        .map(|o| cis(base * o * s) * Complex::new(T::zero(), base * o * c))
        .collect()
}

/// `b_k = exp(-j 2π k Δf τ)`.
pub fn freq_steering<T: Real>(tau: T, ofdm: &OfdmConfig<T>) -> Vec<Cplx<T>> {
    let w = -T::two_pi() * ofdm.subcarrier_spacing() * tau;
    (0..ofdm.subcarrier_count).map(|k| cis(w * T::from_usize_lossy(k))).collect()
}

/// `∂b/∂τ`.
pub fn freq_steering_derivative<T: Real>(tau: T, ofdm: &OfdmConfig<T>) -> Vec<Cplx<T>> {
    let df = ofdm.subcarrier_spacing();
    freq_steering(tau, ofdm)
        .into_iter()
        .enumerate()
        .map(|(k, b)| b * Complex::new(T::zero(), -T::two_pi() * T::from_usize_lossy(k) * df))
        .collect()
}

/// `b(τ) ⊙ s`.
pub fn modulated_freq_steering<T: Real>(tau: T, ofdm: &OfdmConfig<T>) -> Vec<Cplx<T>> {
    freq_steering(tau, ofdm)
        .into_iter()
        .zip(&ofdm.pilots)
        .map(|(b, s)| b * *s)
        .collect()
}

/// `u ⊗ a` in the crate's vec order.
pub fn kron_vec<T: Real>(u: &[Cplx<T>], a: &[Cplx<T>]) -> Vec<Cplx<T>> {
    u.iter().flat_map(|uk| a.iter().map(move |am| *uk * *am)).collect()
}

/// Spatial-frequency signature `c(θ, τ) = (b(τ) ⊙ s) ⊗ a(θ)`, length MK.
pub fn spatial_freq_signature<T: Real>(aoa: T, pseudo_delay: T, ofdm: &OfdmConfig<T>, stripe: &StripePose<T>) -> Vec<Cplx<T>> {
    let a = array_steering(aoa, stripe, ofdm.wavelength());
    kron_vec(&modulated_freq_steering(pseudo_delay, ofdm), &a)
}

/// `vec(Y)` with the antenna index fastest.
pub fn vectorize<T: Real>(y: &Array2<Cplx<T>>) -> Vec<Cplx<T>> {
    y.t().iter().copied().collect()
}

/// Observation matrices `Y_n` (M×K each) and the pilots that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet<T> {
    pub per_stripe: Vec<Array2<Cplx<T>>>,
    pub pilots: Vec<Cplx<T>>,
}

impl<T: Real> ObservationSet<T> {
    pub fn new(per_stripe: Vec<Array2<Cplx<T>>>, pilots: Vec<Cplx<T>>) -> Result<Self> {
        let Some(first) = per_stripe.first() else {
            return Err(Error::Dimension("observation set needs at least one stripe".into()));
        };
        let dim = first.dim();
        if dim.1 != pilots.len() || per_stripe.iter().any(|y| y.dim() != dim) {
            return Err(Error::Dimension("observation matrices must all be MxK".into()));
        }
        Ok(Self { per_stripe, pilots })
    }

    pub fn stripe_count(&self) -> usize {
        self.per_stripe.len()
    }
}

/// Noise-free term `α e^{jφ} a (b ⊙ s)^T`.
pub fn deterministic_observation<T: Real>(
    amplitude: T,
    phase: T,
    aoa: T,
    pseudo_delay: T,
    ofdm: &OfdmConfig<T>,
    stripe: &StripePose<T>,
) -> Array2<Cplx<T>> {
    let a = array_steering(aoa, stripe, ofdm.wavelength());
    let bs = modulated_freq_steering(pseudo_delay, ofdm);
    let g = cis(phase) * amplitude;
    Array2::from_shape_fn((a.len(), bs.len()), |(m, k)| g * a[m] * bs[k])
}

/// Draws `Y_n = α_n e^{jφ_n} a(θ_n)(b(τ̃_n) ⊙ s)^T + W_n` for every stripe.
///
/// The seed fixes all randomness; stripes consume the stream in order, so
/// their disturbances are independent.
pub fn synthesize_observations<T: Real>(scenario: &ScenarioConfig<T>, seed: u64) -> Result<ObservationSet<T>> {
    let links = scenario.links()?;
    let amplitudes = scenario.amplitudes()?;
    let noise = scenario.noise_power();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_stripe = Vec::with_capacity(links.len());
    for ((stripe, link), amp) in scenario.stripes.iter().zip(&links).zip(&amplitudes) {
        let mut y = deterministic_observation(*amp, link.carrier_phase, link.aoa, link.pseudo_delay, &scenario.ofdm, stripe);
        let params = scenario.dmc_params(link.delay)?;
        let sampler = DisturbanceSampler::new(&params, noise, &scenario.ofdm.pilots, stripe.antenna_count);
        y += &sampler.sample(&mut rng);
        per_stripe.push(y);
    }
    ObservationSet::new(per_stripe, scenario.ofdm.pilots.clone())
}
