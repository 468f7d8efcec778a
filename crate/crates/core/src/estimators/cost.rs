use ndarray::Array2;
use num_complex::Complex;
use num_traits::Zero;

use crate::dmc::DisturbanceModel;
use crate::error::{Error, Result};
use crate::geometry::{link_geometry, LinkGeometry, StripePose, UeState};
use crate::linalg::{cdot, cmatmul, norm_sqr};
use crate::scalar::{cis, Cplx, Real};
use crate::scenario::ScenarioConfig;
use crate::signal::{array_steering, kron_vec, modulated_freq_steering, vectorize, ObservationSet, OfdmConfig};

/// Known network layout plus the per-stripe disturbance models used for whitening.
#[derive(Debug, Clone)]
pub struct CostContext<T> {
    pub stripes: Vec<StripePose<T>>,
    pub ofdm: OfdmConfig<T>,
    /// Known UE height; only `p_2D` is estimated.
    pub ue_height: T,
    pub models: Vec<DisturbanceModel<T>>,
    /// Per stripe, `h_d = Σ_{k-k'=d} s̄_k [G^{-1}]_{k,k'} s_k'` for `d = 0..K-1`.
    lag_sums: Vec<Vec<Cplx<T>>>,
}

impl<T: Real> CostContext<T> {
    pub fn new(stripes: Vec<StripePose<T>>, ofdm: OfdmConfig<T>, ue_height: T, models: Vec<DisturbanceModel<T>>) -> Result<Self> {
        if stripes.is_empty() || stripes.len() != models.len() {
            return Err(Error::Dimension(format!("{} stripes vs {} covariance models", stripes.len(), models.len())));
        }
        for (s, m) in stripes.iter().zip(&models) {
            if m.antenna_count() != s.antenna_count || m.subcarrier_count() != ofdm.subcarrier_count {
                return Err(Error::Dimension("covariance model does not match stripe/OFDM dimensions".into()));
            }
        }
        let lag_sums = models.iter().map(|m| lag_sums(m.frequency_factor_inverse(), &ofdm.pilots)).collect();
        Ok(Self {
            stripes,
            ofdm,
            ue_height,
            models,
            lag_sums,
        })
    }

    /// Context with the scenario's own (true-geometry) disturbance models.
    pub fn from_scenario(scenario: &ScenarioConfig<T>) -> Result<Self> {
        Self::new(scenario.stripes.clone(), scenario.ofdm.clone(), scenario.ue_height(), scenario.disturbance_models()?)
    }

    /// Candidate per-link geometry for `(p_2D, δτ)` at the known height.
    pub fn candidate_links(&self, p: [T; 2], delta_tau: T) -> Result<Vec<LinkGeometry<T>>> {
        let ue = UeState {
            position: [p[0], p[1], self.ue_height],
            clock_offset: delta_tau,
            phase_offset: T::zero(),
        };
        self.stripes.iter().map(|s| link_geometry(&ue, s, self.ofdm.carrier_freq)).collect()
    }

    pub fn stripe_count(&self) -> usize {
        self.stripes.len()
    }
}

fn lag_sums<T: Real>(ginv: &Array2<Cplx<T>>, pilots: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let k = pilots.len();
    (0..k)
        .map(|d| (d..k).fold(Cplx::zero(), |acc, i| acc + pilots[i].conj() * ginv[[i, i - d]] * pilots[i - d]))
        .collect()
}

/// Whitened observations `y'_n = R_n^{-1/2} vec(Y_n)`, stored as M×K matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitenedData<T> {
    pub per_stripe: Vec<Array2<Cplx<T>>>,
}

impl<T: Real> WhitenedData<T> {
    /// `y'_n` in vec order.
    pub fn vector(&self, n: usize) -> Vec<Cplx<T>> {
        vectorize(&self.per_stripe[n])
    }
}

pub fn whiten<T: Real>(obs: &ObservationSet<T>, models: &[DisturbanceModel<T>]) -> Result<WhitenedData<T>> {
    if obs.per_stripe.len() != models.len() {
        return Err(Error::Dimension(format!("{} observations vs {} models", obs.per_stripe.len(), models.len())));
    }
    let per_stripe = obs
        .per_stripe
        .iter()
        .zip(models)
        .map(|(y, m)| m.whiten_matrix(y))
        .collect::<Result<_>>()?;
    Ok(WhitenedData { per_stripe })
}

/// `c'(θ, τ̃) = R^{-1/2} c(θ, τ̃)` in vec order.
pub fn whitened_signature<T: Real>(link: &LinkGeometry<T>, stripe: &StripePose<T>, ofdm: &OfdmConfig<T>, model: &DisturbanceModel<T>) -> Vec<Cplx<T>> {
    let a = array_steering(link.aoa, stripe, ofdm.wavelength());
    let g = model.whiten_freq(&modulated_freq_steering(link.pseudo_delay, ofdm));
    kron_vec(&g, &a)
}

/// `α̂ = Re{(e^{jφ} c')^H y'} / ‖c'‖²`.
pub fn amplitude_hat<T: Real>(phase: T, signature: &[Cplx<T>], data: &[Cplx<T>]) -> Result<T> {
    let e = norm_sqr(signature);
    if !(e > T::zero()) {
        return Err(Error::ZeroSignature);
    }
    Ok((cis(-phase) * cdot(signature, data)).re / e)
}

/// Common phase offset estimate; `value` is the principal value in `[-π/2, π/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate<T> {
    pub value: T,
    /// Always set: the estimate is only defined modulo π.
    pub ambiguous_mod_pi: bool,
}

/// Per-stripe sufficient statistics at a candidate: `z = c'^H y'`,
/// `e = ‖c'‖²`, and the geometric carrier phase `-2π f_c τ_n`.
#[derive(Debug, Clone, Copy)]
struct Correlation<T> {
    z: Cplx<T>,
    e: T,
    geo_phase: T,
}

fn literal_correlations<T: Real>(p: [T; 2], delta_tau: T, data: &WhitenedData<T>, ctx: &CostContext<T>) -> Result<(Vec<Correlation<T>>, T)> {
    if data.per_stripe.len() != ctx.stripe_count() {
        return Err(Error::Dimension("whitened data vs context stripe count".into()));
    }
    let links = ctx.candidate_links(p, delta_tau)?;
    let mut energy = T::zero();
    let mut out = Vec::with_capacity(links.len());
    for (n, link) in links.iter().enumerate() {
        let c = whitened_signature(link, &ctx.stripes[n], &ctx.ofdm, &ctx.models[n]);
        let y = data.vector(n);
        if c.len() != y.len() {
            return Err(Error::Dimension("signature vs data length".into()));
        }
        energy += norm_sqr(&y);
        out.push(Correlation {
            z: cdot(&c, &y),
            e: norm_sqr(&c),
            geo_phase: link.carrier_phase,
        });
    }
    Ok((out, energy))
}

/// `Σ_n e^{j4π f_c τ_n} z_n² / e_n`; its half-angle is the phase estimate.
fn coherent_sum<T: Real>(corr: &[Correlation<T>]) -> Result<Cplx<T>> {
    let mut s = Cplx::zero();
    for c in corr {
        if !(c.e > T::zero()) {
            return Err(Error::ZeroSignature);
        }
        s += cis(-(c.geo_phase + c.geo_phase)) * c.z * c.z / c.e;
    }
    Ok(s)
}

fn cp_from<T: Real>(corr: &[Correlation<T>], energy: T) -> Result<T> {
    let half = T::lit(0.5);
    let mut cost = energy;
    for c in corr {
        cost -= half * c.z.norm_sqr() / c.e;
    }
    cost -= half * coherent_sum(corr)?.norm();
    Ok(cost.max(T::zero()))
}

fn ncp_from<T: Real>(corr: &[Correlation<T>], energy: T) -> Result<T> {
    let mut cost = energy;
    for c in corr {
        if !(c.e > T::zero()) {
            return Err(Error::ZeroSignature);
        }
        cost -= c.z.norm_sqr() / c.e;
    }
    Ok(cost.max(T::zero()))
}

fn phase_from<T: Real>(corr: &[Correlation<T>]) -> Result<PhaseEstimate<T>> {
    let s = coherent_sum(corr)?;
    if s.norm() == T::zero() {
        return Err(Error::UndefinedPhase);
    }
    let mut v = s.arg() / T::lit(2.0);
    if v >= T::FRAC_PI_2() {
        v -= T::PI();
    }
    Ok(PhaseEstimate {
        value: v,
        ambiguous_mod_pi: true,
    })
}

/// Closed-form common phase offset at a candidate `(p_2D, δτ)`.
pub fn phase_offset_hat<T: Real>(p: [T; 2], delta_tau: T, data: &WhitenedData<T>, ctx: &CostContext<T>) -> Result<PhaseEstimate<T>> {
    let (corr, _) = literal_correlations(p, delta_tau, data, ctx)?;
    phase_from(&corr)
}

/// Compressed coherent ML cost: the whitened residual minimized in closed form
/// over the real amplitudes and the common phase offset.
pub fn ml_cost_cp<T: Real>(p: [T; 2], delta_tau: T, data: &WhitenedData<T>, ctx: &CostContext<T>) -> Result<T> {
    let (corr, energy) = literal_correlations(p, delta_tau, data, ctx)?;
    cp_from(&corr, energy)
}

/// Non-coherent cost `Σ_n ‖Π⊥_{c'_n} y'_n‖²`.
pub fn ml_cost_ncp<T: Real>(p: [T; 2], delta_tau: T, data: &WhitenedData<T>, ctx: &CostContext<T>) -> Result<T> {
    let (corr, energy) = literal_correlations(p, delta_tau, data, ctx)?;
    ncp_from(&corr, energy)
}

/// Fast evaluation of the same costs using precomputed `G^{-1} Y^T` and the
/// lag sums of `G^{-1}`, so each candidate costs O(MK) per stripe.
#[derive(Debug, Clone)]
pub struct CostEvaluator<'a, T> {
    ctx: &'a CostContext<T>,
    /// `G_n^{-1} Y_n^T` (K×M).
    projected: Vec<Array2<Cplx<T>>>,
    energy: T,
}

impl<'a, T: Real> CostEvaluator<'a, T> {
    pub fn new(obs: &ObservationSet<T>, ctx: &'a CostContext<T>) -> Result<Self> {
        if obs.per_stripe.len() != ctx.stripe_count() {
            return Err(Error::Dimension("observations vs context stripe count".into()));
        }
        let mut energy = T::zero();
        let mut projected = Vec::with_capacity(obs.per_stripe.len());
        for (y, model) in obs.per_stripe.iter().zip(&ctx.models) {
            if y.dim() != (model.antenna_count(), model.subcarrier_count()) {
                return Err(Error::Dimension("observation vs covariance dimensions".into()));
            }
            let q = cmatmul(model.frequency_factor_inverse(), &y.t().to_owned());
            // y^H R^{-1} y = Σ_{k,m} conj(Y[m,k]) q[k,m]
            let mut e = T::zero();
            for ((m, k), v) in y.indexed_iter() {
                e += (v.conj() * q[[k, m]]).re;
            }
            energy += e;
            projected.push(q);
        }
        Ok(Self { ctx, projected, energy })
    }

    pub fn context(&self) -> &CostContext<T> {
        self.ctx
    }

    fn correlations(&self, p: [T; 2], delta_tau: T) -> Result<Vec<Correlation<T>>> {
        let links = self.ctx.candidate_links(p, delta_tau)?;
        let lambda = self.ctx.ofdm.wavelength();
        let df = self.ctx.ofdm.subcarrier_spacing();
        links
            .iter()
            .enumerate()
            .map(|(n, link)| {
                let a = array_steering(link.aoa, &self.ctx.stripes[n], lambda);
                // b_k = w^k by recurrence; the lag phasors e^{+j2πdΔfτ} are conj(b_d)
                let step = cis(-T::two_pi() * df * link.pseudo_delay);
                let q = &self.projected[n];
                let h = &self.ctx.lag_sums[n];
                let mut b = Cplx::new(T::one(), T::zero());
                let mut z = Cplx::zero();
                let mut quad = h[0].re;
                for (k, s) in self.ctx.ofdm.pilots.iter().enumerate() {
                    if k > 0 {
                        quad += T::lit(2.0) * (h[k] * b.conj()).re;
                    }
                    let mut acc = Cplx::zero();
                    for (m, am) in a.iter().enumerate() {
                        acc += am.conj() * q[[k, m]];
                    }
                    z += (b * *s).conj() * acc;
                    b *= step;
                }
                Ok(Correlation {
                    z,
                    e: quad * norm_sqr(&a),
                    geo_phase: link.carrier_phase,
                })
            })
            .collect()
    }

    pub fn cp(&self, p: [T; 2], delta_tau: T) -> Result<T> {
        cp_from(&self.correlations(p, delta_tau)?, self.energy)
    }

    pub fn ncp(&self, p: [T; 2], delta_tau: T) -> Result<T> {
        ncp_from(&self.correlations(p, delta_tau)?, self.energy)
    }

    pub fn phase(&self, p: [T; 2], delta_tau: T) -> Result<PhaseEstimate<T>> {
        phase_from(&self.correlations(p, delta_tau)?)
    }

    /// CP amplitudes `α̂_n` given the common phase offset.
    pub fn amplitudes(&self, p: [T; 2], delta_tau: T, phase_offset: T) -> Result<Vec<T>> {
        self.correlations(p, delta_tau)?
            .iter()
            .map(|c| {
                if !(c.e > T::zero()) {
                    return Err(Error::ZeroSignature);
                }
                Ok((cis(-(c.geo_phase + phase_offset)) * c.z).re / c.e)
            })
            .collect()
    }

    /// NCP complex gains `γ̂_n = z_n / e_n`.
    pub fn complex_gains(&self, p: [T; 2], delta_tau: T) -> Result<Vec<Cplx<T>>> {
        self.correlations(p, delta_tau)?
            .iter()
            .map(|c| {
                if !(c.e > T::zero()) {
                    return Err(Error::ZeroSignature);
                }
                Ok(c.z / Complex::new(c.e, T::zero()))
            })
            .collect()
    }
}
