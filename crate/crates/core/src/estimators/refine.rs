use crate::error::Result;
use crate::scalar::{Real, SPEED_OF_LIGHT};
use crate::signal::ObservationSet;

use super::cost::{CostContext, CostEvaluator};
use super::ils::{ils_initializer, IlsEstimate, DEFAULT_NFFT};
use super::simplex::NelderMead;
use super::{EstimationResult, Initializer, Mode, StripeGains};

/// Which compressed likelihood to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Cp,
    Ncp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOptions<T> {
    pub nfft: usize,
    pub max_iterations: usize,
    /// Simplex diameter tolerance on position, meters.
    pub position_tolerance: T,
    /// Simplex diameter tolerance on the clock offset, seconds.
    pub clock_tolerance: T,
    /// Initial simplex edge from the ILS point, meters.
    pub initial_position_step: T,
    /// Initial simplex edge on the clock axis, seconds.
    pub initial_clock_step: T,
    /// CP grid half-span around the NCP solution, in wavelengths.
    pub cp_grid_half_span: T,
    /// CP grid spacing, in wavelengths.
    pub cp_grid_step: T,
    /// Also perturb `c·δτ` on the CP grid with the same span and spacing.
    pub cp_grid_clock: bool,
    /// Number of grid local minima (lowest first) that are refined; the
    /// lowest refined cost wins.
    pub cp_candidates: usize,
}

impl<T: Real> Default for RefineOptions<T> {
    fn default() -> Self {
        Self {
            nfft: DEFAULT_NFFT,
            max_iterations: 500,
            position_tolerance: T::lit(1e-6),
            clock_tolerance: T::lit(1e-14),
            initial_position_step: T::lit(0.1),
            initial_clock_step: T::lit(0.1 / SPEED_OF_LIGHT),
            cp_grid_half_span: T::lit(1.5),
            cp_grid_step: T::lit(1.0 / 32.0),
            cp_grid_clock: false,
            cp_candidates: 8,
        }
    }
}

fn evaluate<T: Real>(ev: &CostEvaluator<'_, T>, kind: CostKind, p: [T; 2], dt: T) -> T {
    let r = match kind {
        CostKind::Cp => ev.cp(p, dt),
        CostKind::Ncp => ev.ncp(p, dt),
    };
    r.unwrap_or(T::infinity())
}

fn finish<T: Real>(
    ev: &CostEvaluator<'_, T>,
    kind: CostKind,
    p: [T; 2],
    dt: T,
    cost: T,
    iterations: usize,
    converged: bool,
) -> Result<EstimationResult<T>> {
    let (mode, phase_offset, gains) = match kind {
        CostKind::Cp => {
            let phase = ev.phase(p, dt)?.value;
            (Mode::Cp, Some(phase), StripeGains::Real(ev.amplitudes(p, dt, phase)?))
        }
        CostKind::Ncp => (Mode::Ncp, None, StripeGains::Complex(ev.complex_gains(p, dt)?)),
    };
    Ok(EstimationResult {
        mode,
        position_2d: p,
        clock_offset: dt,
        phase_offset,
        gains,
        final_cost: cost,
        iterations,
        initializer: Initializer::UserSupplied,
        converged,
    })
}

fn refine_with_steps<T: Real>(
    kind: CostKind,
    ev: &CostEvaluator<'_, T>,
    init: ([T; 2], T),
    position_step: T,
    clock_step: T,
    opts: &RefineOptions<T>,
) -> Result<EstimationResult<T>> {
    let c = T::lit(SPEED_OF_LIGHT);
    let (p0, dt0) = init;
    // 2D pre-search at fixed clock
    let nm2 = NelderMead::new(vec![opts.position_tolerance; 2], opts.max_iterations);
    let pre = nm2.minimize(|x| evaluate(ev, kind, [x[0], x[1]], dt0), &[p0[0], p0[1]], &[position_step; 2]);
    // joint refinement with the clock axis scaled to meters
    let nm3 = NelderMead::new(
        vec![opts.position_tolerance, opts.position_tolerance, opts.clock_tolerance * c],
        opts.max_iterations,
    );
    let joint = nm3.minimize(
        |x| evaluate(ev, kind, [x[0], x[1]], x[2] / c),
        &[pre.point[0], pre.point[1], dt0 * c],
        &[position_step, position_step, clock_step * c],
    );
    finish(
        ev,
        kind,
        [joint.point[0], joint.point[1]],
        joint.point[2] / c,
        joint.value,
        pre.iterations + joint.iterations,
        joint.converged,
    )
}

/// Simplex refinement of `(p_2D, δτ)` from `init`: a 2D search at the fixed
/// initial clock, then a joint 3D search. The returned cost never exceeds
/// the cost at `init`.
pub fn refine<T: Real>(kind: CostKind, ev: &CostEvaluator<'_, T>, init: ([T; 2], T), opts: &RefineOptions<T>) -> Result<EstimationResult<T>> {
    refine_with_steps(kind, ev, init, opts.initial_position_step, opts.initial_clock_step, opts)
}

/// Coherent estimate seeded from an NCP solution: evaluate the CP cost on a
/// local grid (positions, and optionally `c·δτ`), then refine the lowest
/// `cp_candidates` grid local minima and keep the best.
///
/// The coherent lobes are only a few millimeters wide, so a single refine
/// from the best grid point easily settles on a sidelobe.
pub fn estimate_cp_from<T: Real>(ev: &CostEvaluator<'_, T>, ncp: &EstimationResult<T>, opts: &RefineOptions<T>) -> Result<EstimationResult<T>> {
    let c = T::lit(SPEED_OF_LIGHT);
    let lambda = ev.context().ofdm.wavelength();
    let step = opts.cp_grid_step * lambda;
    let half = (opts.cp_grid_half_span / opts.cp_grid_step).round().to_i64().unwrap_or(0).max(0);
    let clock_half = if opts.cp_grid_clock { half } else { 0 };
    let (np, nc) = ((2 * half + 1) as usize, (2 * clock_half + 1) as usize);
    let [x0, y0] = ncp.position_2d;
    let point = |i: usize, j: usize, l: usize| {
        let off = |k: usize, h: i64| T::lit((k as i64 - h) as f64) * step;
        ([x0 + off(i, half), y0 + off(j, half)], ncp.clock_offset + off(l, clock_half) / c)
    };

    let mut grid = ndarray::Array3::<T>::from_elem((np, np, nc), T::infinity());
    for ((i, j, l), v) in grid.indexed_iter_mut() {
        let (p, dt) = point(i, j, l);
        *v = evaluate(ev, CostKind::Cp, p, dt);
    }

    let is_local_min = |i: usize, j: usize, l: usize| {
        let v = grid[[i, j, l]];
        if !v.is_finite() {
            return false;
        }
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                for dl in -1i64..=1 {
                    let (a, b, d) = (i as i64 + di, j as i64 + dj, l as i64 + dl);
                    if (di, dj, dl) == (0, 0, 0) || a < 0 || b < 0 || d < 0 || a >= np as i64 || b >= np as i64 || d >= nc as i64 {
                        continue;
                    }
                    if grid[[a as usize, b as usize, d as usize]] < v {
                        return false;
                    }
                }
            }
        }
        true
    };
    let mut minima: Vec<(T, usize, usize, usize)> = grid
        .indexed_iter()
        .filter(|((i, j, l), _)| is_local_min(*i, *j, *l))
        .map(|((i, j, l), v)| (*v, i, j, l))
        .collect();
    minima.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    minima.truncate(opts.cp_candidates.max(1));

    let mut starts: Vec<([T; 2], T)> = minima.iter().map(|&(_, i, j, l)| point(i, j, l)).collect();
    if starts.is_empty() {
        starts.push((ncp.position_2d, ncp.clock_offset));
    }
    let fine = step / T::lit(2.0);
    let mut best: Option<EstimationResult<T>> = None;
    for s in starts {
        let r = refine_with_steps(CostKind::Cp, ev, s, fine, fine / c, opts)?;
        if best.as_ref().is_none_or(|b| r.final_cost < b.final_cost) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Results of the full pipeline on one observation set.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateBundle<T> {
    pub ils: IlsEstimate<T>,
    pub ncp: EstimationResult<T>,
    pub cp: Option<EstimationResult<T>>,
}

/// ILS → NCP refinement → (optionally) CP grid and refinement.
pub fn estimate<T: Real>(obs: &ObservationSet<T>, ctx: &CostContext<T>, with_cp: bool, opts: &RefineOptions<T>) -> Result<EstimateBundle<T>> {
    let ils = ils_initializer(obs, &ctx.stripes, &ctx.ofdm, ctx.ue_height, opts.nfft)?;
    let ev = CostEvaluator::new(obs, ctx)?;
    let mut ncp = refine(CostKind::Ncp, &ev, (ils.position_2d, ils.clock_offset), opts)?;
    ncp.initializer = Initializer::Ils;
    let cp = if with_cp {
        let mut cp = estimate_cp_from(&ev, &ncp, opts)?;
        cp.initializer = Initializer::Ils;
        Some(cp)
    } else {
        None
    };
    Ok(EstimateBundle { ils, ncp, cp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::total_covariance;
    use crate::scenario::ScenarioConfig;
    use crate::signal::synthesize_observations;

    fn noiseless_reference() -> (ScenarioConfig<f64>, ObservationSet<f64>, CostContext<f64>) {
        let mut s = ScenarioConfig::<f64>::reference().unwrap();
        s.dmc_enabled = false;
        let models = s
            .stripes
            .iter()
            .map(|st| total_covariance(&crate::dmc::DmcParams::disabled(), 1e-12, &s.ofdm.pilots, st.antenna_count).unwrap())
            .collect();
        let ctx = CostContext::new(s.stripes.clone(), s.ofdm.clone(), s.ue_height(), models).unwrap();
        s.noise_temperature = 0.0;
        let obs = synthesize_observations(&s, 0).unwrap();
        (s, obs, ctx)
    }

    #[test]
    fn refine_from_truth_stays() {
        let (s, obs, ctx) = noiseless_reference();
        let ev = CostEvaluator::new(&obs, &ctx).unwrap();
        let opts = RefineOptions::default();
        for kind in [CostKind::Ncp, CostKind::Cp] {
            let r = refine(kind, &ev, (s.ue.position_2d(), s.ue.clock_offset), &opts).unwrap();
            assert!((r.position_2d[0] - 7.0).abs() < 1e-9, "{kind:?} {:?}", r.position_2d);
            assert!((r.position_2d[1] - 3.0).abs() < 1e-9);
            assert!((r.clock_offset - s.ue.clock_offset).abs() < 1e-17);
        }
    }

    #[test]
    fn noise_free_pipeline_recovers_truth() {
        let (s, obs, ctx) = noiseless_reference();
        let b = estimate(&obs, &ctx, true, &RefineOptions::default()).unwrap();
        let cp = b.cp.unwrap();
        assert!((cp.position_2d[0] - 7.0).abs() < 1e-5, "{:?}", cp.position_2d);
        assert!((cp.position_2d[1] - 3.0).abs() < 1e-5);
        assert!((cp.clock_offset - s.ue.clock_offset).abs() < 1e-13);
        let phase = cp.phase_offset.unwrap();
        assert!(crate::scalar::wrap_phase(2.0 * (phase - s.ue.phase_offset)).abs() < 1e-4);
        assert!((b.ncp.position_2d[0] - 7.0).abs() < 1e-4);
        assert_eq!(cp.initializer, Initializer::Ils);
    }

    #[test]
    fn refine_never_increases_cost() {
        let s = ScenarioConfig::<f64>::reference().unwrap();
        let ctx = CostContext::from_scenario(&s).unwrap();
        let obs = synthesize_observations(&s, 3).unwrap();
        let ev = CostEvaluator::new(&obs, &ctx).unwrap();
        let init = ([6.8, 3.3], s.ue.clock_offset + 5e-10);
        let c0 = ev.ncp(init.0, init.1).unwrap();
        let r = refine(CostKind::Ncp, &ev, init, &RefineOptions::default()).unwrap();
        assert!(r.final_cost <= c0);
        assert!(r.final_cost >= 0.0);
    }
}
