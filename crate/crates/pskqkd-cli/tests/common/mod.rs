#![allow(dead_code)]

use pskqkd_cli::ResultRow;

/// A two-point QPSK sweep that solves in about a second.
pub const TINY: &str = r#"
[scenario]
protocol = "qpsk"
strategy = "ra"
xi = 0.01
cutoff = 5

[solver]
max_iters = 40
eps_fw = 1e-3
eps_tilde = 1e-10
line_search_tol = 1e-8
tol_feas = 1e-9
tol_gap = 1e-9
ipm_max_iter = 100

[axes]
distance_km = 20.0
alpha = 0.45
delta_r = [0.0, 0.3]
"#;

pub fn row(alpha: f64, delta_r: f64, p_pass: f64, rate: f64) -> ResultRow {
    ResultRow {
        protocol: "QPSK".into(),
        n_states: 4,
        l_km: 50.0,
        eta: 0.1,
        xi: 0.01,
        beta: 0.95,
        detector_kind: "untrusted".into(),
        eta_d: 1.0,
        nu_el: 0.0,
        strategy: "raPS".into(),
        alpha,
        delta_r,
        delta_a: 0.0,
        delta_c: 0.0,
        nc: 12,
        step1_upper: 1.0,
        step2_lower: 1.0,
        p_pass,
        delta_ec: 0.9,
        eps_prime: 1e-8,
        final_rate: rate,
        reported_rate: rate.max(0.0),
        iterations: 10,
        status: "optimal".into(),
        wallclock_s: 1.0,
    }
}
