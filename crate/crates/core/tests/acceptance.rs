//! Acceptance suite. Every criterion prints one summary line
//! `criterion N: PASS|FAIL` preceded by its individual checks, then asserts.
//! Run with `cargo test --release --test acceptance -- --nocapture --test-threads 1`
//! for readable output.

mod common;

use std::fmt::Write as _;

use common::*;
use stripeloc::bounds::{position_fim, SyncModel};
use stripeloc::dmc::{total_covariance, DmcParams};
use stripeloc::estimators::{ils_solve, ml_cost_cp, refine, CostContext, CostEvaluator, CostKind, RefineOptions};
use stripeloc::harness::{fig2, fig3, fig4, run_monte_carlo, CurveRecord, ModeSelection, FIGURE_SDNR_DB};
use stripeloc::signal::synthesize_observations;
use stripeloc::Scenario;

struct Report {
    id: u32,
    lines: String,
    ok: bool,
}

impl Report {
    fn new(id: u32) -> Self {
        Self { id, lines: String::new(), ok: true }
    }

    fn check(&mut self, what: &str, pass: bool, detail: String) {
        self.ok &= pass;
        let tag = if pass { "ok  " } else { "MISS" };
        let _ = writeln!(self.lines, "  [{tag}] {what}: {detail}");
    }

    fn relative(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let rel = (got - want).abs() / want.abs();
        self.check(what, rel <= tol, format!("got {got:.6e}, expected {want:.6e}, rel err {rel:.3e} (tol {tol:e})"));
    }

    fn ratio_in(&mut self, what: &str, got: f64, reference: f64, lo: f64, hi: f64) {
        let r = got / reference;
        self.check(what, (lo..=hi).contains(&r), format!("{got:.6e} / {reference:.6e} = {r:.3} (allowed [{lo}, {hi}])"));
    }

    fn below(&mut self, what: &str, got: f64, tol: f64) {
        self.check(what, got <= tol, format!("{got:.3e} (tol {tol:e})"));
    }

    fn finish(self) {
        let verdict = if self.ok { "PASS" } else { "FAIL" };
        println!("{}criterion {}: {verdict}", self.lines, self.id);
        assert!(self.ok, "criterion {} failed", self.id);
    }
}

fn lookup(records: &[CurveRecord], series: &str, x: f64) -> f64 {
    records
        .iter()
        .find(|r| r.series == series && (r.x - x).abs() <= 1e-9 * x.abs().max(1.0))
        .unwrap_or_else(|| panic!("no record {series} at x={x}"))
        .value
}

#[test]
fn criterion_1_bandwidth_bounds() {
    let mut rep = Report::new(1);
    let recs = fig2(&Scenario::reference().unwrap(), ModeSelection::Both, &RefineOptions::default()).unwrap();
    rep.relative("CP PEB, M=4, 100 MHz", lookup(&recs, "peb_cp_M4", 1e8), 0.0021375, 0.05);
    rep.relative("NCP PEB, M=4, 100 MHz", lookup(&recs, "peb_ncp_M4", 1e8), 0.19792, 0.05);
    rep.relative("NCP PEB, M=2, 100 MHz", lookup(&recs, "peb_ncp_M2", 1e8), 0.28865, 0.05);
    rep.relative("NCP PEB, M=2, 1 MHz", lookup(&recs, "peb_ncp_M2", 1e6), 0.5443, 0.05);
    rep.relative("NCP PEB, M=2, 1 GHz", lookup(&recs, "peb_ncp_M2", 1e9), 0.02651, 0.05);
    rep.finish();
}

#[test]
fn criterion_2_sdnr_bounds() {
    const PEB_CP: [f64; 6] = [0.0125324, 0.00704749, 0.00396310, 0.00222861, 0.00125324, 0.000704749];
    const PEB_NCP: [f64; 6] = [0.939784, 0.528480, 0.297186, 0.167120, 0.0939784, 0.0528480];
    const CEB_CP: [f64; 6] = [2.20327, 1.23899, 0.696736, 0.391803, 0.220327, 0.123899];
    const CEB_NCP: [f64; 6] = [28.6365, 16.1035, 9.05567, 5.09237, 2.86365, 1.61035];
    let mut rep = Report::new(2);
    let s = Scenario::reference().unwrap();
    let opts = RefineOptions::default();
    // bounds only: a single trial keeps the RMSE part of the figures cheap
    let mut recs = fig3(&s, ModeSelection::Both, 1, &opts).unwrap();
    recs.extend(fig4(&s, ModeSelection::Both, 1, &opts).unwrap());
    for (i, &x) in FIGURE_SDNR_DB.iter().enumerate() {
        rep.relative(&format!("CP PEB @ {x} dB"), lookup(&recs, "peb_cp", x), PEB_CP[i], 0.05);
        rep.relative(&format!("NCP PEB @ {x} dB"), lookup(&recs, "peb_ncp", x), PEB_NCP[i], 0.05);
        rep.relative(&format!("CP CEB @ {x} dB"), lookup(&recs, "ceb_cp", x), CEB_CP[i], 0.05);
        rep.relative(&format!("NCP CEB @ {x} dB"), lookup(&recs, "ceb_ncp", x), CEB_NCP[i], 0.05);
    }
    rep.finish();
}

#[test]
fn criterion_3_estimator_efficiency() {
    const TRIALS: usize = 200;
    let mut rep = Report::new(3);
    let base = Scenario::reference().unwrap();
    let opts = RefineOptions::default();
    let mut reports = Vec::new();
    for db in [10.0, 15.0, 20.0, 25.0] {
        let s = base.with_sdnr_db(db).unwrap();
        reports.push((db, s.clone(), run_monte_carlo(&s, ModeSelection::Both, TRIALS, &opts).unwrap()));
    }
    for (db, s, r) in &reports {
        let (cp, ncp) = (r.cp.as_ref().unwrap(), r.ncp.as_ref().unwrap());
        if *db == 20.0 {
            let n = s.stripe_count();
            let b = stripeloc::bounds::compute_bounds(s, &SyncModel::coherent(n)).unwrap();
            rep.ratio_in("CP position RMSE / CP PEB @ 20 dB", cp.position, b.peb, 0.8, 3.0);
            rep.ratio_in("CP clock RMSE / CP CEB @ 20 dB", cp.clock, b.ceb, 0.8, 3.0);
        }
        if *db == 25.0 {
            rep.ratio_in("NCP position RMSE vs 0.0532 m @ 25 dB", ncp.position, 0.0532, 0.5, 2.0);
            rep.ratio_in("NCP clock RMSE vs 1.624 ns @ 25 dB", ncp.clock * 1e9, 1.624, 0.5, 2.0);
        }
        let ils = &r.ils;
        rep.check(
            &format!("position ordering ILS >= NCP >= CP @ {db} dB"),
            ils.position >= ncp.position && ncp.position >= cp.position,
            format!("{:.4e} >= {:.4e} >= {:.4e} m", ils.position, ncp.position, cp.position),
        );
        rep.check(
            &format!("clock ordering ILS >= NCP >= CP @ {db} dB"),
            ils.clock >= ncp.clock && ncp.clock >= cp.clock,
            format!("{:.4e} >= {:.4e} >= {:.4e} ns", ils.clock * 1e9, ncp.clock * 1e9, cp.clock * 1e9),
        );
        rep.check(&format!("failed trials @ {db} dB"), true, format!("{} of {TRIALS}", cp.failures.max(ncp.failures)));
    }
    rep.finish();
}

#[test]
fn criterion_4_fim_oracle() {
    let mut rep = Report::new(4);
    let s = small_scenario();
    for (name, sync) in [("coherent", SyncModel::coherent(3)), ("non-coherent", SyncModel::non_coherent(3))] {
        let (fim, _) = position_fim(&s, &sync).unwrap();
        let fd = finite_difference_fim(&s, &sync);
        rep.below(&format!("{name} J vs finite differences (rel. Frobenius)"), frobenius(&(&fd - &fim)) / frobenius(&fd), 1e-4);
    }
    let models = s.disturbance_models().unwrap();
    let mut worst: f64 = 0.0;
    for n in 0..s.stripe_count() {
        let j = analytic_channel_fim(&s, n, &models[n]);
        for (r, c) in [(0, 1), (0, 2), (0, 3), (2, 3)] {
            worst = worst.max(j[[r, c]].abs() / (j[[r, r]] * j[[c, c]]).sqrt());
        }
    }
    rep.below("zero pattern (angle/delay, angle/phase, angle/amplitude, phase/amplitude)", worst, 1e-10);
    rep.finish();
}

#[test]
fn criterion_5_compression_consistency() {
    let mut rep = Report::new(5);
    let s = small_scenario();
    let (w, ctx) = whitened_small(&s, 3);
    let mut worst: f64 = 0.0;
    for (p, dt) in random_candidates(20, 5) {
        let compressed = ml_cost_cp(p, dt, &w, &ctx).unwrap();
        let brute = brute_force_cp(p, dt, &w, &ctx, 10_000);
        worst = worst.max((compressed - brute).abs() / brute);
    }
    rep.below("compressed CP cost vs brute force over 20 points", worst, 1e-6);
    rep.finish();
}

#[test]
fn criterion_6_noise_free_exactness() {
    let mut rep = Report::new(6);
    let mut s = Scenario::reference().unwrap();
    s.dmc_enabled = false;
    s.noise_temperature = 0.0;
    let models = s
        .stripes
        .iter()
        .map(|st| total_covariance(&DmcParams::disabled(), 1e-12, &s.ofdm.pilots, st.antenna_count).unwrap())
        .collect();
    let ctx = CostContext::new(s.stripes.clone(), s.ofdm.clone(), s.ue_height(), models).unwrap();
    let t = s.ue.position_2d();
    let dist = |p: [f64; 2]| ((p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2)).sqrt();

    let delays: Vec<f64> = s.links().unwrap().iter().map(|l| l.pseudo_delay).collect();
    let ils = ils_solve(&delays, &s.stripes, s.ue_height()).unwrap();
    rep.below("ILS position error from exact delays (m)", dist(ils.position_2d), 1e-6);
    rep.below("ILS clock error from exact delays (s)", (ils.clock_offset - s.ue.clock_offset).abs(), 1e-14);

    let obs = synthesize_observations(&s, 0).unwrap();
    let ev = CostEvaluator::new(&obs, &ctx).unwrap();
    let energy = ev.ncp([t[0] + 3.0, t[1] - 2.0], 0.0).unwrap();
    rep.below("CP cost at truth / off-truth cost", ev.cp(t, s.ue.clock_offset).unwrap().abs() / energy, 1e-9);
    rep.below("NCP cost at truth / off-truth cost", ev.ncp(t, s.ue.clock_offset).unwrap().abs() / energy, 1e-9);
    for kind in [CostKind::Cp, CostKind::Ncp] {
        let r = refine(kind, &ev, (t, s.ue.clock_offset), &RefineOptions::default()).unwrap();
        rep.below(&format!("{kind:?} refine from truth, position (m)"), dist(r.position_2d), 1e-6);
        rep.below(&format!("{kind:?} refine from truth, clock (s)"), (r.clock_offset - s.ue.clock_offset).abs(), 1e-14);
    }
    rep.finish();
}

#[test]
fn criterion_7_dmc_statistics() {
    let mut rep = Report::new(7);
    let s = small_scenario();
    for stripe in 0..s.stripe_count() {
        let (cov_err, white_err) = disturbance_statistics(&s, stripe, 10_000, 100 + stripe as u64);
        rep.below(&format!("stripe {stripe} empirical covariance vs R"), cov_err, 0.05);
        rep.below(&format!("stripe {stripe} whitened covariance vs I"), white_err, 0.05);
    }
    rep.finish();
}

#[test]
fn criterion_8_sweep_determinism() {
    let mut rep = Report::new(8);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "seed = 42\n[sweep]\nvariable = \"sdnr_db\"\nvalues = [10.0, 20.0]\nmode = \"both\"\ntrials = 16\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_stripeloc"))
            .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    rep.check("two sweep runs byte-identical", a == b && !a.is_empty(), format!("{} and {} bytes", a.len(), b.len()));
    rep.finish();
}
