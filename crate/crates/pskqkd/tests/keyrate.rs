mod common;

use common::{random_density, random_hermitian, rng};
use pskqkd::channel::{build_constraint_set, ChannelParams};
use pskqkd::keyrate::{
    build_maps, compute_key_rate_detailed, evaluate, frank_wolfe, gradient, honest_state, initial_point,
    objective, postselection_stats, step2_lower_bound, zeta_eps, FwConfig, FwStop, PostprocessingMaps, RunStatus,
    ScenarioConfig,
};
use pskqkd::numerics::{relative_entropy, HermitianMatrix};
use pskqkd::operators::{region_ops_cross, region_ops_ra, RegionParams, RegionStrategy};
use pskqkd::protocol::build_constellation;
use proptest::prelude::*;

fn toy_maps(dr: f64) -> PostprocessingMaps {
    build_maps(region_ops_ra(3, dr, 0.0).unwrap(), 4).unwrap()
}

/// Traceless Hermitian direction of unit Frobenius norm.
fn direction(r: &mut rand::rngs::StdRng, n: usize) -> HermitianMatrix {
    let h = random_hermitian(r, n, 1.0);
    let t = h.trace() / n as f64;
    let h = &h - &HermitianMatrix::identity(n).scaled(t);
    let norm = h.frobenius_norm();
    h.scaled(1.0 / norm)
}

#[test]
fn gradient_matches_central_differences() {
    let eps = 1e-11;
    let h = 1e-5;
    let mut r = rng(41);
    for (k, dr) in [0.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.3, 0.3, 0.6, 0.6].iter().enumerate() {
        let maps = toy_maps(*dr);
        // keep ρ ± hΔ inside the state space
        let rho = &random_density(&mut r, 16).scaled(0.9) + &HermitianMatrix::identity(16).scaled(0.1 / 16.0);
        let d = direction(&mut r, 16);
        let g = gradient(&rho, &maps, eps).unwrap();
        let analytic = d.inner(&g);
        let fp = objective(&rho.axpy(h, &d), &maps, eps).unwrap();
        let fm = objective(&rho.axpy(-h, &d), &maps, eps).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        let rel = (analytic - fd).abs() / g.frobenius_norm();
        assert!(rel < 1e-5, "state {k}: analytic {analytic}, finite difference {fd}, rel {rel:e}");
    }
}

#[test]
fn objective_matches_dense_relative_entropy() {
    let mut r = rng(43);
    let eps = 1e-9;
    let maps = build_maps(region_ops_cross(3, 0.2).unwrap(), 4).unwrap();
    let rho = random_density(&mut r, 16);
    let g = maps.apply(&rho);
    let d = g.dim() as f64;
    let perturb = |m: &HermitianMatrix| {
        &m.scaled(1.0 - eps) + &HermitianMatrix::identity(g.dim()).scaled(eps / d)
    };
    let want = relative_entropy(&perturb(&g), &perturb(&maps.pinch(&g))).unwrap();
    let got = objective(&rho, &maps, eps).unwrap();
    assert!((want - got).abs() < 1e-6, "{got} vs {want}");
}

#[test]
fn kraus_map_is_trace_nonincreasing() {
    let full = toy_maps(0.0);
    let gram = full.kraus_gram();
    assert!(gram.max_abs_diff(&HermitianMatrix::identity(16)) < 1e-9);
    let mut last = 16.0;
    for dr in [0.2, 0.5, 1.0, 5.0] {
        let m = toy_maps(dr);
        let defect = &HermitianMatrix::identity(16) - &m.kraus_gram();
        assert!(defect.min_eigenvalue().unwrap() >= -1e-9);
        let t = m.kraus_gram().trace();
        assert!(t < last);
        last = t;
    }
    assert!(last / 16.0 < 1e-6);
    for z in 0..4 {
        let s = full.sqrt_region(z);
        let sq = HermitianMatrix::hermitian_part((s.as_mat() * s.as_mat()).as_ref());
        assert!(sq.max_abs_diff(&full.region_set.ops[z]) < 1e-9);
        assert!(s.min_eigenvalue().unwrap() >= -1e-12);
    }
}

#[test]
fn perturbation_converges() {
    let mut r = rng(47);
    let maps = toy_maps(0.2);
    let rho = random_density(&mut r, 16);
    let v: Vec<f64> = [1e-7, 1e-9, 1e-11].iter().map(|&e| objective(&rho, &maps, e).unwrap()).collect();
    assert!((v[0] - v[1]).abs() < 1e-4 && (v[1] - v[2]).abs() < 1e-6, "{v:?}");
    let ev = evaluate(&rho, &maps, 1e-11).unwrap();
    assert_eq!(ev.value, v[2]);
    assert!(objective(&rho, &maps, 0.0).is_err());
    assert!(objective(&HermitianMatrix::identity(4), &maps, 1e-11).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn objective_is_nonnegative_and_bounded(seed in any::<u64>(), dr in 0.0..0.8f64) {
        let mut r = rng(seed);
        let maps = toy_maps(dr);
        let rho = random_density(&mut r, 16);
        let f = objective(&rho, &maps, 1e-11).unwrap();
        prop_assert!(f >= -1e-10);
        // pinching into four blocks costs at most two bits
        prop_assert!(f <= 2.0 + 1e-9);
    }
}

#[test]
fn zeta_formula() {
    let (e, d): (f64, usize) = (1e-11, 208);
    let want = 2.0 * e * 207.0 * (208.0 / (e * 207.0)).log2();
    assert!(((zeta_eps(e, d) - want) / want).abs() < 1e-14);
    assert!(zeta_eps(1e-11, 4 * 4 * 13) < 1e-6);
}

fn small_problem() -> (pskqkd::channel::ConstraintSet, PostprocessingMaps) {
    let c = build_constellation(4, 0.45).unwrap();
    let ch = ChannelParams::new(20.0, 0.01).unwrap();
    let cs = build_constraint_set(&c, &ch, None, 6).unwrap();
    let maps = build_maps(region_ops_ra(6, 0.2, 0.0).unwrap(), 4).unwrap();
    (cs, maps)
}

#[test]
fn frank_wolfe_on_small_problem() {
    let (cs, maps) = small_problem();
    let cfg = FwConfig::default();
    let rho0 = initial_point(&cs, &cfg.ipm).unwrap();
    assert!(cs.max_violation(&rho0) <= 1e-8);
    assert!((rho0.trace() - 1.0).abs() < 1e-9);
    assert!(rho0.min_eigenvalue().unwrap() >= -1e-12);

    let fw = frank_wolfe(&cs, &maps, rho0, &cfg).unwrap();
    assert!(fw.iterations() <= cfg.max_iters);
    for w in fw.trace.windows(2) {
        assert!(w[1].value <= w[0].value, "objective increased: {} -> {}", w[0].value, w[1].value);
    }
    assert!(fw.rho.min_eigenvalue().unwrap() >= -1e-12);
    assert!(cs.max_violation(&fw.rho) < 1e-6);

    let st2 = step2_lower_bound(&fw.rho, &cs, &maps, &cfg).unwrap();
    assert!(st2.lower <= fw.upper + 1e-6);
    assert!(st2.eps_prime >= 0.0 && st2.eps_prime <= 1e-6);
    if fw.stop == FwStop::Converged {
        assert!(fw.upper - st2.lower < 1e-3, "upper {} lower {}", fw.upper, st2.lower);
    }
    // recompute the dual slack from scratch
    let mut slack = gradient(&fw.rho, &maps, cfg.eps_tilde).unwrap();
    for (i, y) in st2.dual_y.iter().enumerate() {
        slack = &slack - &cs.dense_operator(i).scaled(*y);
    }
    assert!(slack.min_eigenvalue().unwrap() >= -1e-8);

    // the returned state is a local optimum: no feasible direction from
    // another feasible point decreases the linearization by more than the gap
    let g = gradient(&fw.rho, &maps, cfg.eps_tilde).unwrap();
    let other = initial_point(&cs, &cfg.ipm).unwrap();
    let dir = &other - &fw.rho;
    let gap = fw.trace.last().map(|t| t.gap).unwrap_or(0.0);
    assert!(dir.inner(&g) >= -gap - 1e-6);
}

#[test]
fn postselection_probability_decreases() {
    let c = build_constellation(4, 0.7).unwrap();
    let ch = ChannelParams::new(50.0, 0.01).unwrap();
    let rho = honest_state(&c, &ch, 12).unwrap();
    let mut last = f64::INFINITY;
    for k in 0..15 {
        let dr = 0.05 * k as f64;
        let set = region_ops_ra(12, dr, 0.0).unwrap();
        let st = postselection_stats(&rho, &set, &c, 0.95).unwrap();
        if k == 0 {
            assert!((st.p_pass - 1.0).abs() < 1e-9);
        }
        assert!(st.p_pass < last);
        last = st.p_pass;
        let row_sums: f64 = st.cond_probs.iter().flatten().sum::<f64>() / 4.0;
        assert!((row_sums - st.p_pass).abs() < 1e-12);
        assert!(st.delta_ec >= 0.0);
    }
}

#[test]
fn error_correction_leakage_falls_with_amplitude() {
    // β = 1 and no loss: δ_EC = H(Z|X) shrinks as the states separate
    let ch = ChannelParams::new(0.0, 0.0).unwrap();
    let set = region_ops_ra(30, 0.0, 0.0).unwrap();
    let mut last = f64::INFINITY;
    for amp in [0.5, 1.0, 1.5, 2.0, 2.5] {
        let c = build_constellation(4, amp).unwrap();
        let rho = honest_state(&c, &ch, 30).unwrap();
        let st = postselection_stats(&rho, &set, &c, 1.0).unwrap();
        assert!((st.delta_ec - st.h_z_given_x).abs() < 1e-12);
        assert!(st.delta_ec < last);
        last = st.delta_ec;
    }
    assert!(last < 0.2);
}

#[test]
fn full_pipeline_on_small_scenario() {
    let ch = ChannelParams::new(20.0, 0.01).unwrap();
    let mut s = ScenarioConfig::new(4, 0.45, ch, RegionStrategy::RadialAngular, 6, 0.95);
    s.region = RegionParams { delta_r: 0.2, delta_a: 0.0, delta_c: 0.0 };
    let (res, art) = compute_key_rate_detailed(&s).unwrap();
    assert!(res.step2_lower <= res.step1_upper + 1e-6);
    assert!((res.final_rate - (res.step2_lower - res.p_pass * res.delta_ec)).abs() < 1e-15);
    assert_eq!(res.reported_rate, res.final_rate.max(0.0));
    assert!(res.p_pass < 1.0 && res.p_pass > 0.5);
    assert!(res.dual_slack_min_eigenvalue >= -1e-8);
    assert_eq!(res.iterations, art.fw_trace.len());
    match res.fw_stop {
        FwStop::Converged => assert_eq!(res.status, RunStatus::Optimal),
        _ => assert_ne!(res.status, RunStatus::Optimal),
    }
    let mut bad = s.clone();
    bad.region.delta_c = 0.3;
    assert!(compute_key_rate_detailed(&bad).is_err());
}
