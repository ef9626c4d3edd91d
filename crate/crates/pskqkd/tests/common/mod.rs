//! Reference computations shared by the integration tests. Nothing here
//! calls into the library except for plain data types.

#![allow(dead_code)]

use pskqkd::c64;
use pskqkd::numerics::HermitianMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn simpson_step<F: FnMut(f64) -> c64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: c64,
    fm: c64,
    fb: c64,
    whole: c64,
    tol: f64,
    depth: u32,
) -> c64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let flm = f(lm);
    let frm = f(rm);
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let diff = left + right - whole;
    // below the rounding level of the panel, refinement cannot help
    let floor = 1e-15 * (left.norm() + right.norm());
    if depth == 0 || diff.norm() <= 15.0 * tol.max(floor) {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson rule for complex integrands. The interval is split into
/// `pieces` panels first so narrow peaks are not missed.
pub fn adaptive<F: FnMut(f64) -> c64>(mut f: F, a: f64, b: f64, tol: f64, pieces: usize) -> c64 {
    let h = (b - a) / pieces as f64;
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..pieces {
        let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = (fa + fm * 4.0 + fb) * (h / 6.0);
        acc += simpson_step(&mut f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40);
    }
    acc
}

/// ∫∫ f(x, y) over [x0, x1] × [y0, y1], nested adaptive Simpson.
pub fn adaptive_2d<F: Fn(f64, f64) -> c64>(f: F, x: (f64, f64), y: (f64, f64), tol: f64) -> c64 {
    let span = y.1 - y.0;
    adaptive(
        |xv| adaptive(|yv| f(xv, yv), y.0, y.1, tol / (x.1 - x.0).abs().max(1.0), 16),
        x.0,
        x.1,
        tol * span.abs().max(1.0),
        16,
    )
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// ⟨n|γ⟩ for a coherent state.
pub fn coherent_amp(gamma: c64, n: usize) -> c64 {
    let mut pow = c64::new(1.0, 0.0);
    for _ in 0..n {
        pow *= gamma;
    }
    pow * ((-gamma.norm_sqr() / 2.0).exp() / factorial(n).sqrt())
}

/// L_n^{(a)}(x) by the three-term recurrence.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + a - x) * l1 - (k + a) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// ⟨n|D(β)|k⟩.
pub fn displacement_element(beta: c64, n: usize, k: usize) -> c64 {
    let x = beta.norm_sqr();
    let e = (-x / 2.0).exp();
    if n >= k {
        let mut p = c64::new(1.0, 0.0);
        for _ in 0..n - k {
            p *= beta;
        }
        p * (e * (factorial(k) / factorial(n)).sqrt() * laguerre(k, (n - k) as f64, x))
    } else {
        let mut p = c64::new(1.0, 0.0);
        for _ in 0..k - n {
            p *= -beta.conj();
        }
        p * (e * (factorial(n) / factorial(k)).sqrt() * laguerre(n, (k - n) as f64, x))
    }
}

/// ⟨n| D(β) ρ_th(n̄) D(β)† |m⟩ as a sum over the thermal populations.
pub fn displaced_thermal_element(beta: c64, nbar: f64, n: usize, m: usize, kmax: usize) -> c64 {
    let mut acc = c64::new(0.0, 0.0);
    for k in 0..=kmax {
        let pk = nbar.powi(k as i32) / (1.0 + nbar).powi(k as i32 + 1);
        acc += displacement_element(beta, n, k) * displacement_element(beta, m, k).conj() * pk;
    }
    acc
}

pub fn random_hermitian(rng: &mut StdRng, n: usize, scale: f64) -> HermitianMatrix {
    let mut rows = vec![vec![c64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        rows[i][i] = c64::new(rng.random_range(-scale..scale), 0.0);
        for j in i + 1..n {
            let v = c64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
            rows[i][j] = v;
            rows[j][i] = v.conj();
        }
    }
    HermitianMatrix::from_fn(n, |i, j| rows[i][j]).expect("hermitian by construction")
}

/// Random full-rank density matrix G G† / Tr.
pub fn random_density(rng: &mut StdRng, n: usize) -> HermitianMatrix {
    let g = faer::Mat::<c64>::from_fn(n, n, |_, _| {
        c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let m = &g * g.adjoint();
    let h = HermitianMatrix::hermitian_part(m.as_ref());
    let t = h.trace();
    h.scaled(1.0 / t)
}
