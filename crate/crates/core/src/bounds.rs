//! Fisher information, Jacobian transformation to position/sync parameters,
//! equivalent FIM and the position / clock error bounds.
//!
//! Parameter order: `[p_x, p_y, δτ, (δφ | δφ_1..δφ_N), α_1..α_N]`; channel
//! parameter order per link: `[θ, τ̃, φ, α]`.

use ndarray::{s, Array2};
use num_complex::Complex;

use crate::dmc::{total_covariance, DisturbanceModel};
use crate::error::{Error, Result};
use crate::geometry::{norm3, sub3, LinkGeometry, StripePose, Vec3};
use crate::linalg::{invert_psd, matmul};
use crate::scalar::{Real, SPEED_OF_LIGHT};
use crate::scenario::ScenarioConfig;
use crate::signal::{array_steering, array_steering_derivative, freq_steering, freq_steering_derivative, OfdmConfig};

/// Per-link channel parameters `[θ, τ̃, φ, α]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    pub aoa: T,
    pub pseudo_delay: T,
    pub phase: T,
    pub amplitude: T,
}

impl<T: Real> ChannelParams<T> {
    pub fn from_link(link: &LinkGeometry<T>, amplitude: T) -> Self {
        Self {
            aoa: link.aoa,
            pseudo_delay: link.pseudo_delay,
            phase: link.carrier_phase,
            amplitude,
        }
    }
}

/// 4×4 FIM over `[θ, τ̃, φ, α]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFim<T> {
    pub matrix: Array2<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncKind {
    /// One common phase offset (carrier phase exploited).
    Coherent,
    /// Independent phase offset per stripe.
    NonCoherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncModel {
    pub kind: SyncKind,
    pub stripe_count: usize,
}

impl SyncModel {
    pub fn coherent(stripe_count: usize) -> Self {
        Self {
            kind: SyncKind::Coherent,
            stripe_count,
        }
    }

    pub fn non_coherent(stripe_count: usize) -> Self {
        Self {
            kind: SyncKind::NonCoherent,
            stripe_count,
        }
    }

    /// `N_c`: 2 (clock, phase) or `N + 1` (clock, per-stripe phases).
    pub fn sync_param_count(&self) -> usize {
        match self.kind {
            SyncKind::Coherent => 2,
            SyncKind::NonCoherent => self.stripe_count + 1,
        }
    }

    /// Dimension of the full parameter vector.
    pub fn dimension(&self) -> usize {
        2 + self.sync_param_count() + self.stripe_count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsResult<T> {
    pub fim: Array2<T>,
    /// 3×3 equivalent FIM over `[p_x, p_y, δτ]`.
    pub efim: Array2<T>,
    /// Meters.
    pub peb: T,
    /// Seconds.
    pub ceb: T,
    /// Stripes whose angle information was dropped because the UE lies on
    /// their local y-axis (`[p']_1 = 0`).
    pub angle_dropped: Vec<usize>,
}

impl<T: Real> BoundsResult<T> {
    pub fn ceb_meters(&self) -> T {
        self.ceb * T::lit(SPEED_OF_LIGHT)
    }
}

/// Closed-form channel FIM. The θ cross terms and `J_{φ,α}` are exact zeros
/// because the array phase reference is its centroid.
pub fn channel_fim<T: Real>(link: &ChannelParams<T>, model: &DisturbanceModel<T>, ofdm: &OfdmConfig<T>, stripe: &StripePose<T>) -> ChannelFim<T> {
    let lambda = ofdm.wavelength();
    let modulate = |v: Vec<Complex<T>>| -> Vec<Complex<T>> { v.into_iter().zip(&ofdm.pilots).map(|(b, s)| b * *s).collect() };
    let a = array_steering(link.aoa, stripe, lambda);
    let ad = array_steering_derivative(link.aoa, stripe, lambda);
    let bs = modulate(freq_steering(link.pseudo_delay, ofdm));
    let bds = modulate(freq_steering_derivative(link.pseudo_delay, ofdm));
    let al = link.amplitude;
    let two = T::lit(2.0);
    let j = Complex::new(T::zero(), T::one());

    let q_cc = model.quad_form(&bs, &a, &bs, &a);
    let q_tc = model.quad_form(&bds, &a, &bs, &a);
    let mut m = Array2::<T>::zeros((4, 4));
    m[[0, 0]] = two * al * al * model.quad_form(&bs, &ad, &bs, &ad).re;
    m[[1, 1]] = two * al * al * model.quad_form(&bds, &a, &bds, &a).re;
    m[[1, 2]] = two * (j * q_tc * al * al).re;
    m[[1, 3]] = two * al * q_tc.re;
    m[[2, 2]] = two * al * al * q_cc.re;
    m[[3, 3]] = two * q_cc.re;
    for (r, c) in [(1, 2), (1, 3)] {
        m[[c, r]] = m[[r, c]];
    }
    ChannelFim { matrix: m }
}

/// `T_n` mapping channel parameters of stripe `n` to the full parameter
/// vector; rows follow the parameter order, columns `[θ, τ̃, φ, α]`.
///
/// Returns the matrix and whether the angle block was zeroed because the UE
/// lies on the stripe's local y-axis.
pub fn jacobian<T: Real>(
    link: &LinkGeometry<T>,
    ue_position: &Vec3<T>,
    stripe: &StripePose<T>,
    sync: &SyncModel,
    n: usize,
    wavelength: T,
) -> Result<(Array2<T>, bool)> {
    if n >= sync.stripe_count {
        return Err(Error::Dimension(format!("stripe index {n} out of {}", sync.stripe_count)));
    }
    let r = sub3(ue_position, &stripe.position);
    let range = norm3(&r);
    let r2 = r[0] * r[0] + r[1] * r[1];
    if !(range > T::zero()) || !(r2 > T::zero()) {
        return Err(Error::Domain("Jacobian undefined: UE horizontally colocated with stripe".into()));
    }
    let c = T::lit(SPEED_OF_LIGHT);
    let mut t = Array2::<T>::zeros((sync.dimension(), 4));
    let dropped = link.local_position[0] == T::zero();
    if !dropped {
        t[[0, 0]] = r[1] / r2;
        t[[1, 0]] = -r[0] / r2;
    }
    for i in 0..2 {
        t[[i, 1]] = r[i] / (c * range);
        t[[i, 2]] = -T::two_pi() * r[i] / (wavelength * range);
    }
    t[[2, 1]] = T::one();
    let phase_row = match sync.kind {
        SyncKind::Coherent => 3,
        SyncKind::NonCoherent => 3 + n,
    };
    t[[phase_row, 2]] = T::one();
    t[[2 + sync.sync_param_count() + n, 3]] = T::one();
    Ok((t, dropped))
}

/// `J_η = Σ_n T_n J_n T_n^T` for the scenario, using each stripe's own covariance.
/// Also returns the stripes whose angle block was dropped.
pub fn position_fim<T: Real>(scenario: &ScenarioConfig<T>, sync: &SyncModel) -> Result<(Array2<T>, Vec<usize>)> {
    scenario.validate()?;
    if sync.stripe_count != scenario.stripe_count() {
        return Err(Error::Dimension("sync model stripe count differs from scenario".into()));
    }
    let links = scenario.links()?;
    let amps = scenario.amplitudes()?;
    let noise = scenario.noise_power();
    let lambda = scenario.wavelength();
    let mut fim = Array2::<T>::zeros((sync.dimension(), sync.dimension()));
    let mut dropped = Vec::new();
    for (n, ((stripe, link), amp)) in scenario.stripes.iter().zip(&links).zip(&amps).enumerate() {
        let model = total_covariance(&scenario.dmc_params(link.delay)?, noise, &scenario.ofdm.pilots, stripe.antenna_count)?;
        let jc = channel_fim(&ChannelParams::from_link(link, *amp), &model, &scenario.ofdm, stripe);
        let (t, d) = jacobian(link, &scenario.ue.position, stripe, sync, n, lambda)?;
        if d {
            dropped.push(n);
        }
        fim += &matmul(&matmul(&t, &jc.matrix), &t.t().to_owned());
    }
    Ok((fim, dropped))
}

/// Schur-complement EFIM over `[p_x, p_y, δτ]`, then PEB and CEB.
pub fn efim_and_bounds<T: Real>(fim: &Array2<T>, sync_param_count: usize) -> Result<BoundsResult<T>> {
    let d = fim.nrows();
    if fim.ncols() != d || d < 2 + sync_param_count {
        return Err(Error::Dimension(format!("FIM {}x{} for N_c = {sync_param_count}", d, fim.ncols())));
    }
    let jww = fim.slice(s![0..3, 0..3]).to_owned();
    let efim = if d > 3 {
        let jwu = fim.slice(s![0..3, 3..]).to_owned();
        let juu = fim.slice(s![3.., 3..]).to_owned();
        let juu_inv = invert_psd(&juu, "nuisance (phase offsets and amplitudes)")?;
        let corr = matmul(&matmul(&jwu, &juu_inv), &jwu.t().to_owned());
        let mut e = jww - corr;
        // restore exact symmetry lost to rounding
        for i in 0..3 {
            for j in (i + 1)..3 {
                let m = (e[[i, j]] + e[[j, i]]) / T::lit(2.0);
                e[[i, j]] = m;
                e[[j, i]] = m;
            }
        }
        e
    } else {
        jww
    };
    let inv = invert_psd(&efim, "equivalent FIM (position and clock)")?;
    let pos = inv[[0, 0]] + inv[[1, 1]];
    let clk = inv[[2, 2]];
    if !(pos >= T::zero()) || !(clk >= T::zero()) {
        return Err(Error::SingularFim {
            block: "equivalent FIM (position and clock)",
        });
    }
    Ok(BoundsResult {
        fim: fim.clone(),
        efim,
        peb: pos.sqrt(),
        ceb: clk.sqrt(),
        angle_dropped: Vec::new(),
    })
}

/// PEB and CEB of a scenario under the given synchronization model.
pub fn compute_bounds<T: Real>(scenario: &ScenarioConfig<T>, sync: &SyncModel) -> Result<BoundsResult<T>> {
    let (fim, dropped) = position_fim(scenario, sync)?;
    let mut b = efim_and_bounds(&fim, sync.sync_param_count())?;
    b.angle_dropped = dropped;
    Ok(b)
}
