//! Coarse initializer: per-stripe delay peaks from a zero-padded IFFT, then
//! Gauss-Newton multilateration of `(p_2D, δτ)` at the known UE height.

use num_complex::Complex;
use num_traits::Zero;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{norm3, StripePose};
use crate::linalg::solve_small;
use crate::scalar::{Cplx, Real, SPEED_OF_LIGHT};
use crate::signal::{ObservationSet, OfdmConfig};

pub const DEFAULT_NFFT: usize = 4096;

const MAX_ITERATIONS: usize = 50;
const STEP_TOLERANCE_M: f64 = 1e-9;
const DIVERGENCE_RUN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct IlsEstimate<T> {
    pub position_2d: [T; 2],
    pub clock_offset: T,
    /// Pseudo-delays that fed the least-squares fit, seconds.
    pub pseudo_delays: Vec<T>,
    pub iterations: usize,
}

/// Pseudo-delay of one stripe: `argmax_q Σ_m |IFFT_{N_F}(Y[m,:] ⊙ s̄)[q]|²`,
/// mapped by `q / (N_F Δf)`. Ties go to the smallest bin.
fn peak_delay<T: Real>(y: &ndarray::Array2<Cplx<T>>, pilots: &[Cplx<T>], nfft: usize, df: T, planner: &mut FftPlanner<T>) -> T {
    let ifft = planner.plan_fft_inverse(nfft);
    let mut energy = vec![T::zero(); nfft];
    let mut buf = vec![Complex::<T>::zero(); nfft];
    for row in y.rows() {
        buf.iter_mut().for_each(|v| *v = Complex::zero());
        for (k, (v, s)) in row.iter().zip(pilots).enumerate() {
            buf[k] = *v * s.conj();
        }
        ifft.process(&mut buf);
        for (e, v) in energy.iter_mut().zip(&buf) {
            *e += v.norm_sqr();
        }
    }
    let mut best = 0;
    for (q, e) in energy.iter().enumerate() {
        if *e > energy[best] {
            best = q;
        }
    }
    T::from_usize_lossy(best) / (T::from_usize_lossy(nfft) * df)
}

/// Full initializer: IFFT peaks per stripe, then [`ils_solve`].
///
/// Delays are only observable modulo `1/Δf`; each peak is unwrapped to lie
/// within half a period of the first stripe's so that all links alias alike.
pub fn ils_initializer<T: Real>(
    obs: &ObservationSet<T>,
    stripes: &[StripePose<T>],
    ofdm: &OfdmConfig<T>,
    ue_height: T,
    nfft: usize,
) -> Result<IlsEstimate<T>> {
    if nfft < ofdm.subcarrier_count {
        return Err(Error::Config(format!("IFFT size {nfft} smaller than subcarrier count")));
    }
    if obs.per_stripe.len() != stripes.len() {
        return Err(Error::Dimension("observations vs stripes".into()));
    }
    let df = ofdm.subcarrier_spacing();
    let period = T::one() / df;
    let mut planner = FftPlanner::new();
    let mut delays: Vec<T> = obs
        .per_stripe
        .iter()
        .map(|y| peak_delay(y, &obs.pilots, nfft, df, &mut planner))
        .collect();
    let reference = delays[0];
    for d in delays.iter_mut().skip(1) {
        *d = *d - ((*d - reference) / period).round() * period;
    }
    ils_solve(&delays, stripes, ue_height)
}

/// Gauss-Newton fit of `τ̂_n = ‖p − p_n‖/c + δτ` in meters (`x, y, c·δτ`).
///
/// Starts at the stripe centroid. Stops when the step norm falls below 1e-9 m
/// or after 50 iterations; five consecutive growing steps are reported as
/// divergence.
pub fn ils_solve<T: Real>(pseudo_delays: &[T], stripes: &[StripePose<T>], ue_height: T) -> Result<IlsEstimate<T>> {
    let n = stripes.len();
    if n < 3 {
        return Err(Error::Initialization(format!("need at least 3 stripes, got {n}")));
    }
    if pseudo_delays.len() != n {
        return Err(Error::Dimension("one pseudo-delay per stripe is required".into()));
    }
    let c = T::lit(SPEED_OF_LIGHT);
    let ranges: Vec<T> = pseudo_delays.iter().map(|t| *t * c).collect();
    let inv_n = T::one() / T::from_usize_lossy(n);
    let mut x = stripes.iter().fold(T::zero(), |a, s| a + s.position[0]) * inv_n;
    let mut y = stripes.iter().fold(T::zero(), |a, s| a + s.position[1]) * inv_n;
    let dist = |x: T, y: T, s: &StripePose<T>| norm3(&[x - s.position[0], y - s.position[1], ue_height - s.position[2]]);
    let mut b = stripes
        .iter()
        .zip(&ranges)
        .fold(T::zero(), |a, (s, r)| a + *r - dist(x, y, s))
        * inv_n;

    let tol = T::lit(STEP_TOLERANCE_M);
    let mut prev_step = T::infinity();
    let mut growing = 0;
    let mut iterations = 0;
    for it in 1..=MAX_ITERATIONS {
        iterations = it;
        // normal equations J^T J δ = -J^T r with r_n = ρ_n - d_n - b
        let mut jtj = ndarray::Array2::<T>::zeros((3, 3));
        let mut jtr = [T::zero(); 3];
        for (s, rho) in stripes.iter().zip(&ranges) {
            let d = dist(x, y, s);
            if !(d > T::zero()) {
                return Err(Error::Initialization("iterate coincides with a stripe".into()));
            }
            let row = [-(x - s.position[0]) / d, -(y - s.position[1]) / d, -T::one()];
            let r = *rho - d - b;
            for i in 0..3 {
                jtr[i] += row[i] * r;
                for j in 0..3 {
                    jtj[[i, j]] += row[i] * row[j];
                }
            }
        }
        let rhs = [-jtr[0], -jtr[1], -jtr[2]];
        let step = solve_small(&jtj, &rhs).ok_or_else(|| Error::Initialization("singular multilateration geometry".into()))?;
        x += step[0];
        y += step[1];
        b += step[2];
        let norm = (step[0] * step[0] + step[1] * step[1] + step[2] * step[2]).sqrt();
        if !norm.is_finite() || !x.is_finite() || !y.is_finite() || !b.is_finite() {
            return Err(Error::Initialization("multilateration produced non-finite iterate".into()));
        }
        if norm < tol {
            break;
        }
        if norm > prev_step {
            growing += 1;
            if growing >= DIVERGENCE_RUN {
                return Err(Error::Initialization("multilateration diverged".into()));
            }
        } else {
            growing = 0;
        }
        prev_step = norm;
    }
    Ok(IlsEstimate {
        position_2d: [x, y],
        clock_offset: b / c,
        pseudo_delays: pseudo_delays.to_vec(),
        iterations,
    })
}
