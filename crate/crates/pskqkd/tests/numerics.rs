mod common;

use std::f64::consts::PI;

use common::{adaptive, factorial, random_density, random_hermitian, rng};
use pskqkd::c64;
use pskqkd::numerics::quadrature::{integrate, integrate_to_infinity};
use pskqkd::numerics::{
    binomial, generalized_laguerre, kron, matrix_log2, partial_trace_b, psd_project, relative_entropy,
    upper_incomplete_gamma, von_neumann_entropy, HermitianMatrix, IncompleteGammaTable,
};
use proptest::prelude::*;

/// Γ(s, x) = ∫_{√x}^∞ 2 u^{2s−1} e^{−u²} du
fn gamma_quadrature(s: f64, x: f64) -> f64 {
    adaptive(
        |u| c64::new(2.0 * u.powf(2.0 * s - 1.0) * (-u * u).exp(), 0.0),
        x.sqrt(),
        x.sqrt() + 14.0,
        1e-14 * complete_gamma(s).max(1.0),
        64,
    )
    .re
}

fn complete_gamma(s: f64) -> f64 {
    if s.fract() == 0.0 {
        factorial(s as usize - 1)
    } else {
        let k = (s - 0.5) as usize;
        PI.sqrt() * factorial(2 * k) / (4f64.powi(k as i32) * factorial(k))
    }
}

#[test]
fn incomplete_gamma_at_zero_is_complete_gamma() {
    for h in 1..=40 {
        let s = h as f64 / 2.0;
        let got = upper_incomplete_gamma(s, 0.0).unwrap();
        let want = complete_gamma(s);
        assert!(((got - want) / want).abs() < 1e-13, "Γ({s}) = {got}, expected {want}");
    }
}

#[test]
fn incomplete_gamma_matches_quadrature() {
    for &x in &[0.01, 0.16, 0.25, 1.0, 2.5, 6.0] {
        for h in 1..=30 {
            let s = h as f64 / 2.0;
            let got = upper_incomplete_gamma(s, x).unwrap();
            let want = gamma_quadrature(s, x);
            assert!(
                (got - want).abs() < 1e-11 * want.max(1.0),
                "Γ({s}, {x}) = {got}, quadrature {want}"
            );
        }
        let t = IncompleteGammaTable::new(x, 30).unwrap();
        for h in 1..=30 {
            let direct = upper_incomplete_gamma(h as f64 / 2.0, x).unwrap();
            assert!((t.half(h) - direct).abs() <= 1e-13 * direct.max(1.0));
        }
    }
    // generic order goes through the regularized series
    let got = upper_incomplete_gamma(2.3, 0.7).unwrap();
    assert!((got - gamma_quadrature(2.3, 0.7)).abs() < 1e-10);
    assert!(upper_incomplete_gamma(0.0, 1.0).is_err());
    assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
}

#[test]
fn laguerre_matches_explicit_sum() {
    for n in 0..15usize {
        for a in 0..6usize {
            for &x in &[0.0f64, 0.3, 1.7, 5.0] {
                let explicit: f64 = (0..=n)
                    .map(|i| {
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binomial((n + a) as u64, (n - i) as u64) * x.powi(i as i32) / factorial(i)
                    })
                    .sum();
                let got = generalized_laguerre(n, a as f64, x);
                assert!((got - explicit).abs() < 1e-10 * explicit.abs().max(1.0), "L_{n}^({a})({x})");
            }
        }
    }
}

#[test]
fn quadrature_rules() {
    let (v, _) = integrate(f64::sin, 0.0, PI, 1e-13, 1e-13);
    assert!((v - 2.0).abs() < 1e-12);
    let r = integrate_to_infinity(|x| c64::new((-x * x).exp(), 0.0), 0.0, 1e-12, 1e-12);
    assert!((r.value.re - PI.sqrt() / 2.0).abs() < 1e-10);
}

#[test]
fn entropy_of_uniform_spectrum() {
    for n in 1..10 {
        let eigs = vec![1.0 / n as f64; n];
        assert!((von_neumann_entropy(&eigs) - (n as f64).log2()).abs() < 1e-13);
    }
    assert_eq!(von_neumann_entropy(&[1.0, 0.0, -1e-18]), 0.0);
}

#[test]
fn commuting_relative_entropy_is_classical() {
    let p: [f64; 4] = [0.5, 0.25, 0.125, 0.125];
    let q: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
    let want: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).log2()).sum();
    let got = relative_entropy(&HermitianMatrix::diagonal(&p), &HermitianMatrix::diagonal(&q)).unwrap();
    assert!((got - want).abs() < 1e-13);
}

#[test]
fn partial_trace_of_product() {
    let mut r = rng(3);
    let a = random_density(&mut r, 3);
    let b = random_hermitian(&mut r, 4, 1.0);
    let ab = HermitianMatrix::hermitian_part(kron(a.as_ref(), b.as_ref()).as_ref());
    let got = partial_trace_b(&ab, 3, 4).unwrap();
    assert!(got.max_abs_diff(&a.scaled(b.trace())) < 1e-13);
    assert!(partial_trace_b(&ab, 4, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn klein_inequality(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, n);
        let sigma = random_density(&mut r, n);
        prop_assert!(relative_entropy(&rho, &sigma).unwrap() >= -1e-12);
        prop_assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-10);
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, n, 2.0);
        let sd = h.eigen().unwrap();
        prop_assert!(sd.reconstruct().max_abs_diff(&h) < 1e-12 * n as f64 * 4.0);
        prop_assert!(sd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = sd.eigenvalues.iter().sum();
        prop_assert!((sum - h.trace()).abs() < 1e-11 * n as f64);
    }

    #[test]
    fn log_round_trip(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, n);
        let back = matrix_log2(&rho).unwrap().eigen().unwrap().map(f64::exp2);
        prop_assert!(back.max_abs_diff(&rho) < 1e-11);
    }

    #[test]
    fn projection_is_psd_and_keeps_trace(seed in any::<u64>(), n in 2usize..10) {
        let mut r = rng(seed);
        let h = &random_density(&mut r, n) + &random_hermitian(&mut r, n, 0.05);
        let (p, neg) = psd_project(&h).unwrap();
        prop_assert!(neg >= 0.0);
        prop_assert!(p.min_eigenvalue().unwrap() >= -1e-13);
        prop_assert!((p.trace() - h.trace()).abs() < 1e-12);
        let psd = random_density(&mut r, n);
        let (same, zero) = psd_project(&psd).unwrap();
        prop_assert_eq!(zero, 0.0);
        prop_assert!(same.max_abs_diff(&psd) == 0.0);
    }
}
