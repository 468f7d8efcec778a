//! Single-precision smoke test: the same pipeline instantiated with `f32`.

use stripeloc::bounds::{compute_bounds, SyncModel};
use stripeloc::estimators::{CostContext, CostEvaluator};
use stripeloc::scenario::ScenarioConfig;
use stripeloc::signal::synthesize_observations;

#[test]
fn f32_bounds_track_f64() {
    let s64 = ScenarioConfig::<f64>::reference().unwrap();
    let s32: ScenarioConfig<f32> = s64.cast();
    let n = s64.stripe_count();
    let a = compute_bounds(&s64, &SyncModel::coherent(n)).unwrap();
    let b = compute_bounds(&s32, &SyncModel::coherent(n)).unwrap();
    assert!(((b.peb as f64) / a.peb - 1.0).abs() < 1e-3, "{} vs {}", b.peb, a.peb);
    assert!(((b.ceb as f64) / a.ceb - 1.0).abs() < 1e-3, "{} vs {}", b.ceb, a.ceb);
}

// Eliminating the per-stripe phases is a Schur complement of a block whose
// phase information dwarfs the residual position information; single
// precision loses most of the digits there, so only the clock bound (which
// barely depends on the phases) is compared tightly.
#[test]
fn f32_non_coherent_bounds_are_finite() {
    let s64 = ScenarioConfig::<f64>::reference().unwrap();
    let s32: ScenarioConfig<f32> = s64.cast();
    let n = s64.stripe_count();
    let a = compute_bounds(&s64, &SyncModel::non_coherent(n)).unwrap();
    let b = compute_bounds(&s32, &SyncModel::non_coherent(n)).unwrap();
    assert!(b.peb.is_finite() && b.peb > 0.0);
    assert!((b.peb as f64) >= a.peb * 0.5 && (b.peb as f64) <= a.peb * 2.0, "{} vs {}", b.peb, a.peb);
    assert!(((b.ceb as f64) / a.ceb - 1.0).abs() < 1e-3, "{} vs {}", b.ceb, a.ceb);
}

#[test]
fn f32_costs_are_finite_and_minimal_near_truth() {
    let s: ScenarioConfig<f32> = ScenarioConfig::<f64>::reference().unwrap().with_sdnr_db(20.0).unwrap().cast();
    let ctx = CostContext::from_scenario(&s).unwrap();
    let obs = synthesize_observations(&s, 1).unwrap();
    let ev = CostEvaluator::new(&obs, &ctx).unwrap();
    let t = s.ue.position_2d();
    let at = ev.ncp(t, s.ue.clock_offset).unwrap();
    let off = ev.ncp([t[0] + 0.5, t[1] - 0.5], s.ue.clock_offset).unwrap();
    assert!(at.is_finite() && off.is_finite());
    assert!(at < off);
}
