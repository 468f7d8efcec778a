//! Dense multipath (DMC) statistics and the total disturbance covariance.
//!
//! The DMC is spatially white and Kronecker-separable, so the disturbance
//! covariance of `vec(W_n)` (antenna index fastest) is
//!
//! ```text
//! R = (R_f ⊙ s s^H) ⊗ I_M + σ² I_MK = G ⊗ I_M,   G = R_f ⊙ s s^H + σ² I_K
//! ```
//!
//! Everything here works on the K×K frequency factor `G`; the full MK×MK
//! matrices are only materialized on request. The whitener is
//! `L_G^{-1} ⊗ I_M` with `L_G` the lower Cholesky factor of `G`, which
//! satisfies `F R F^H = I`.
//!
//! The PSD is sampled at `f_k = k`, i.e. frequency in units of the subcarrier
//! spacing, so a normalized onset `τ_d` is a delay in units of `1/Δf`. With
//! `τ_d = Δf (τ_n + Δ/c)` the phase ramp of `κ` then puts the DMC onset just
//! behind the line-of-sight delay, matching the steering phase `e^{-j2πkΔfτ}`.

use ndarray::Array2;
use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{adjoint, cholesky, cmatmul, forward_solve, kron, lower_inverse, psd_factor};
use crate::scalar::{Cplx, Real, SPEED_OF_LIGHT};

/// DMC parameter vector `[α_d, β_d, τ_d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmcParams<T> {
    /// Peak power `α_d` (same units as the noise power).
    pub peak_power: T,
    /// Normalized coherence bandwidth `β_d`.
    pub coherence_bandwidth_norm: T,
    /// Normalized onset time `τ_d`.
    pub onset_time_norm: T,
}

impl<T: Real> DmcParams<T> {
    pub fn new(peak_power: T, coherence_bandwidth_norm: T, onset_time_norm: T) -> Result<Self> {
        if !(peak_power >= T::zero()) {
            return Err(Error::Config("DMC peak power must be >= 0".into()));
        }
        if !(coherence_bandwidth_norm > T::zero()) {
            return Err(Error::Config("DMC coherence bandwidth must be > 0".into()));
        }
        Ok(Self {
            peak_power,
            coherence_bandwidth_norm,
            onset_time_norm,
        })
    }

    /// No dense multipath (`α_d = 0`).
    pub fn disabled() -> Self {
        Self {
            peak_power: T::zero(),
            coherence_bandwidth_norm: T::one(),
            onset_time_norm: T::zero(),
        }
    }

    /// Parameters used by the reference scenario for one link:
    /// `β_d = 1/(T_d B)` with `T_d = decay_distance / c`,
    /// `τ_d = (B/K)(τ_n + onset_excess / c)`, `α_d = σ² 10^(DNR/10)`.
    pub fn from_link(
        bandwidth: T,
        subcarrier_count: usize,
        link_delay: T,
        noise_power: T,
        dnr_db: T,
        decay_distance: T,
        onset_excess: T,
    ) -> Result<Self> {
        let c = T::lit(SPEED_OF_LIGHT);
        let decay_time = decay_distance / c;
        let beta = T::one() / (decay_time * bandwidth);
        let tau = bandwidth / T::from_usize_lossy(subcarrier_count) * (link_delay + onset_excess / c);
        let alpha = noise_power * T::lit(10.0).powf(dnr_db / T::lit(10.0));
        Self::new(alpha, beta, tau)
    }
}

/// Sampled DMC power spectral density `κ[k] = α_d / (β_d + j2πf_k) · e^{-j2πf_k τ_d}`,
/// `f_k = k`.
pub fn dmc_psd_samples<T: Real>(params: &DmcParams<T>, subcarrier_count: usize) -> Vec<Cplx<T>> {
    (0..subcarrier_count)
        .map(|k| {
            let f = T::from_usize_lossy(k);
            let w = T::two_pi() * f;
            let denom = Complex::new(params.coherence_bandwidth_norm, w);
            Complex::new(params.peak_power, T::zero()) / denom * Complex::from_polar(T::one(), -w * params.onset_time_norm)
        })
        .collect()
}

/// Hermitian Toeplitz frequency covariance `Toep(κ, κ^H)`.
pub fn freq_covariance<T: Real>(params: &DmcParams<T>, subcarrier_count: usize) -> Array2<Cplx<T>> {
    let kappa = dmc_psd_samples(params, subcarrier_count);
    Array2::from_shape_fn((subcarrier_count, subcarrier_count), |(i, j)| {
        if i >= j {
            kappa[i - j]
        } else {
            kappa[j - i].conj()
        }
    })
}

/// `R_f ⊙ s s^H`: DMC covariance across subcarriers after pilot modulation.
pub fn modulated_freq_covariance<T: Real>(params: &DmcParams<T>, pilots: &[Cplx<T>]) -> Array2<Cplx<T>> {
    let rf = freq_covariance(params, pilots.len());
    Array2::from_shape_fn(rf.dim(), |(i, j)| rf[[i, j]] * pilots[i] * pilots[j].conj())
}

/// Known disturbance covariance of one stripe and its whitening factor.
#[derive(Debug, Clone)]
pub struct DisturbanceModel<T> {
    params: DmcParams<T>,
    noise_power: T,
    antennas: usize,
    /// `G = R_f ⊙ s s^H + σ² I_K`.
    freq_cov: Array2<Cplx<T>>,
    /// Lower Cholesky factor of `G`.
    chol: Array2<Cplx<T>>,
    /// `G^{-1} = L^{-H} L^{-1}`.
    freq_inv: Array2<Cplx<T>>,
}

/// Builds `R(η_DMC, σ²)` and its whitener for an `M`-antenna stripe.
pub fn total_covariance<T: Real>(
    params: &DmcParams<T>,
    noise_power: T,
    pilots: &[Cplx<T>],
    antennas: usize,
) -> Result<DisturbanceModel<T>> {
    if !(noise_power > T::zero()) {
        return Err(Error::Config("noise power must be > 0 to whiten".into()));
    }
    if antennas == 0 || pilots.is_empty() {
        return Err(Error::Dimension("empty array or pilot vector".into()));
    }
    let mut g = modulated_freq_covariance(params, pilots);
    for k in 0..pilots.len() {
        g[[k, k]] += Complex::new(noise_power, T::zero());
    }
    let chol = cholesky(&g)?;
    let linv = lower_inverse(&chol);
    let freq_inv = cmatmul(&adjoint(&linv), &linv);
    Ok(DisturbanceModel {
        params: *params,
        noise_power,
        antennas,
        freq_cov: g,
        chol,
        freq_inv,
    })
}

impl<T: Real> DisturbanceModel<T> {
    pub fn params(&self) -> &DmcParams<T> {
        &self.params
    }

    pub fn noise_power(&self) -> T {
        self.noise_power
    }

    pub fn antenna_count(&self) -> usize {
        self.antennas
    }

    pub fn subcarrier_count(&self) -> usize {
        self.freq_cov.nrows()
    }

    /// The K×K frequency factor `G` of `R = G ⊗ I_M`.
    pub fn frequency_factor(&self) -> &Array2<Cplx<T>> {
        &self.freq_cov
    }

    /// `G^{-1}`, so that `R^{-1} = G^{-1} ⊗ I_M`.
    pub fn frequency_factor_inverse(&self) -> &Array2<Cplx<T>> {
        &self.freq_inv
    }

    /// Full MK×MK covariance `R`.
    pub fn covariance(&self) -> Array2<Cplx<T>> {
        kron(&self.freq_cov, &Array2::eye(self.antennas))
    }

    /// Full MK×MK whitener `R^{-1/2}` (Cholesky based).
    pub fn whitener(&self) -> Array2<Cplx<T>> {
        kron(&lower_inverse(&self.chol), &Array2::eye(self.antennas))
    }

    /// `L_G^{-1} g` for a length-K frequency vector.
    pub fn whiten_freq(&self, g: &[Cplx<T>]) -> Vec<Cplx<T>> {
        forward_solve(&self.chol, g)
    }

    /// Whitens an M×K observation matrix: row-wise `L_G^{-1}`, equivalent to
    /// `R^{-1/2} vec(Y)`.
    pub fn whiten_matrix(&self, y: &Array2<Cplx<T>>) -> Result<Array2<Cplx<T>>> {
        let (m, k) = y.dim();
        if m != self.antennas || k != self.subcarrier_count() {
            return Err(Error::Dimension(format!(
                "observation {}x{} vs covariance for {}x{}",
                m,
                k,
                self.antennas,
                self.subcarrier_count()
            )));
        }
        let mut out = Array2::<Cplx<T>>::zeros((m, k));
        for (row_in, mut row_out) in y.rows().into_iter().zip(out.rows_mut()) {
            let w = forward_solve(&self.chol, &row_in.to_vec());
            row_out.iter_mut().zip(w).for_each(|(o, v)| *o = v);
        }
        Ok(out)
    }

    /// Whitens a full MK vector in `vec` order (antenna index fastest).
    pub fn whiten_vec(&self, y: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        let m = self.antennas;
        let k = self.subcarrier_count();
        if y.len() != m * k {
            return Err(Error::Dimension(format!("vector length {} vs {}", y.len(), m * k)));
        }
        let mat = Array2::from_shape_fn((m, k), |(mi, ki)| y[ki * m + mi]);
        let w = self.whiten_matrix(&mat)?;
        Ok((0..m * k).map(|i| w[[i % m, i / m]]).collect())
    }

    /// `(g1 ⊗ a1)^H R^{-1} (g2 ⊗ a2)` using the Kronecker structure.
    pub fn quad_form(&self, g1: &[Cplx<T>], a1: &[Cplx<T>], g2: &[Cplx<T>], a2: &[Cplx<T>]) -> Cplx<T> {
        let w1 = self.whiten_freq(g1);
        let w2 = self.whiten_freq(g2);
        crate::linalg::cdot(&w1, &w2) * crate::linalg::cdot(a1, a2)
    }

    /// Draws one disturbance matrix `W` (M×K) with `vec(W) ~ CN(0, R)`.
    pub fn sample<R: Rng + ?Sized>(&self, pilots: &[Cplx<T>], rng: &mut R) -> Array2<Cplx<T>> {
        DisturbanceSampler::new(&self.params, self.noise_power, pilots, self.antennas).sample(rng)
    }
}

/// Draws DMC-plus-noise disturbances; tolerates `σ² = 0` and `α_d = 0`.
#[derive(Debug, Clone)]
pub struct DisturbanceSampler<T> {
    dmc_factor: Array2<Cplx<T>>,
    dmc_active: bool,
    noise_std: T,
    antennas: usize,
}

impl<T: Real> DisturbanceSampler<T> {
    pub fn new(params: &DmcParams<T>, noise_power: T, pilots: &[Cplx<T>], antennas: usize) -> Self {
        let dmc_active = params.peak_power > T::zero();
        let dmc_factor = if dmc_active {
            psd_factor(&modulated_freq_covariance(params, pilots))
        } else {
            Array2::zeros((pilots.len(), pilots.len()))
        };
        Self {
            dmc_factor,
            dmc_active,
            noise_std: noise_power.max(T::zero()).sqrt(),
            antennas,
        }
    }

    /// Pilot-modulated DMC for each antenna row, plus white noise.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Array2<Cplx<T>> {
        let k = self.dmc_factor.nrows();
        let mut w = Array2::<Cplx<T>>::zeros((self.antennas, k));
        if self.dmc_active {
            for m in 0..self.antennas {
                let z: Vec<Cplx<T>> = (0..k).map(|_| complex_normal(rng)).collect();
                for i in 0..k {
                    let mut acc = Cplx::zero();
                    for (j, zj) in z.iter().enumerate().take(i + 1) {
                        acc += self.dmc_factor[[i, j]] * *zj;
                    }
                    w[[m, i]] = acc;
                }
            }
        }
        if self.noise_std > T::zero() {
            for v in w.iter_mut() {
                *v += complex_normal::<T, R>(rng) * self.noise_std;
            }
        }
        w
    }
}

/// Circularly-symmetric `CN(0, 1)` draw.
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Cplx<T> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re * h), T::lit(im * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_pilots(k: usize) -> Vec<Cplx<f64>> {
        vec![Complex::new(1.0, 0.0); k]
    }

    fn params() -> DmcParams<f64> {
        DmcParams::new(1.0, 0.05, 0.1).unwrap()
    }

    #[test]
    fn psd_zero_when_disabled() {
        let p = DmcParams::new(0.0, 0.3, 1.2).unwrap();
        assert!(dmc_psd_samples(&p, 6).iter().all(|v| v.norm() == 0.0));
        assert!(freq_covariance(&p, 4).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn psd_dc_is_ratio() {
        let p = DmcParams::new(2.0, 0.25, 17.3).unwrap();
        let k0 = dmc_psd_samples(&p, 5)[0];
        assert_eq!(k0, Complex::new(8.0, 0.0));
    }

    #[test]
    fn psd_matches_scalar_formula() {
        // independent evaluation with std complex arithmetic in polar form
        let p = params();
        let got = dmc_psd_samples(&p, 8);
        for (k, g) in got.iter().enumerate() {
            let f = k as f64;
            let w = 2.0 * std::f64::consts::PI * f;
            let mag = 1.0 / (0.05_f64.powi(2) + w * w).sqrt();
            let ph = -(w / 0.05).atan() - w * 0.1;
            let expected = Complex::from_polar(mag, ph);
            assert!((g - expected).norm() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn toeplitz_fill() {
        let p = params();
        let kappa = dmc_psd_samples(&p, 4);
        let rf = freq_covariance(&p, 4);
        for i in 0..4 {
            assert!((rf[[i, i]] - Complex::new(1.0 / 0.05, 0.0)).norm() < 1e-12);
            for j in 0..4 {
                let e = if i >= j { kappa[i - j] } else { kappa[j - i].conj() };
                assert_eq!(rf[[i, j]], e);
                assert_eq!(rf[[i, j]], rf[[j, i]].conj());
            }
        }
    }

    #[test]
    fn white_case() {
        let sigma2 = 0.25;
        let model = total_covariance(&DmcParams::disabled(), sigma2, &unit_pilots(3), 2).unwrap();
        let r = model.covariance();
        let w = model.whitener();
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((r[[i, j]] - Complex::new(e * sigma2, 0.0)).norm() < 1e-15);
                assert!((w[[i, j]] - Complex::new(e / sigma2.sqrt(), 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_hermitian_and_whitening_identity() {
        let model = total_covariance(&params(), 0.1, &unit_pilots(5), 3).unwrap();
        let r = model.covariance();
        let rh = adjoint(&r);
        assert!(r.iter().zip(rh.iter()).all(|(a, b)| a == b));
        let f = model.whitener();
        let id = cmatmul(&cmatmul(&f, &r), &adjoint(&f));
        let n = id.nrows();
        let mut fro = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                fro += (id[[i, j]] - Complex::new(e, 0.0)).norm_sqr();
            }
        }
        assert!(fro.sqrt() / (n as f64).sqrt() < 1e-8);
    }

    #[test]
    fn kronecker_block_per_antenna() {
        let pil: Vec<_> = (0..4).map(|k| Complex::from_polar(1.0, 0.3 * k as f64)).collect();
        let p = params();
        let sigma2 = 0.2;
        let model = total_covariance(&p, sigma2, &pil, 3).unwrap();
        let r = model.covariance();
        let rf = freq_covariance(&p, 4);
        for m in 0..3 {
            for i in 0..4 {
                for j in 0..4 {
                    let mut e = rf[[i, j]] * pil[i] * pil[j].conj();
                    if i == j {
                        e += sigma2;
                    }
                    assert!((r[[i * 3 + m, j * 3 + m]] - e).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigen_floor_is_noise_power() {
        // R - σ² I is PSD: check x^H (R - σ² I) x >= 0 on random probes
        let model = total_covariance(&params(), 0.3, &unit_pilots(6), 1).unwrap();
        let r = model.covariance();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x: Vec<Cplx<f64>> = (0..6).map(|_| complex_normal(&mut rng)).collect();
            let mut q = Complex::new(0.0, 0.0);
            for i in 0..6 {
                for j in 0..6 {
                    q += x[i].conj() * r[[i, j]] * x[j];
                }
            }
            let nx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            assert!(q.re >= 0.3 * nx * (1.0 - 1e-9));
        }
    }

    #[test]
    fn whiten_vec_matches_full_whitener() {
        let model = total_covariance(&params(), 0.1, &unit_pilots(4), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<Cplx<f64>> = (0..8).map(|_| complex_normal(&mut rng)).collect();
        let fast = model.whiten_vec(&y).unwrap();
        let f = model.whitener();
        for i in 0..8 {
            let mut s = Complex::new(0.0, 0.0);
            for j in 0..8 {
                s += f[[i, j]] * y[j];
            }
            assert!((s - fast[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn from_link_reference_values() {
        let c = SPEED_OF_LIGHT;
        let sigma2 = 4e-13;
        let tau = 5.0 / c;
        let p = DmcParams::from_link(1e8, 100, tau, sigma2, 20.0, 20.0, 1.0).unwrap();
        assert!((p.peak_power - 100.0 * sigma2).abs() < 1e-12 * 100.0 * sigma2);
        let beta = c / (20.0 * 1e8);
        assert!((p.coherence_bandwidth_norm - beta).abs() < 1e-14 * beta);
        let td = 1e6 * 6.0 / c;
        assert!((p.onset_time_norm - td).abs() < 1e-14 * td);
    }

    #[test]
    fn rejects_nonpositive_noise() {
        assert!(matches!(
            total_covariance(&params(), 0.0, &unit_pilots(3), 1),
            Err(Error::Config(_))
        ));
    }
}
