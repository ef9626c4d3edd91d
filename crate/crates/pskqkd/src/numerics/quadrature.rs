//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use faer::c64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: c64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: c64,
    error: f64,
}

fn kronrod(f: &mut impl FnMut(f64) -> c64, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    Segment {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).norm(),
    }
}

/// Integrate a complex-valued function over [a, b].
pub fn integrate_complex(
    mut f: impl FnMut(f64) -> c64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    let mut segs = vec![kronrod(&mut f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: c64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        let target = abs_tol.max(rel_tol * value.norm());
        if error <= target || segs.len() >= MAX_INTERVALS {
            return QuadResult {
                value,
                error,
                evaluations,
                converged: error <= target,
            };
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval cannot be split further in floating point
            return QuadResult {
                value,
                error,
                evaluations,
                converged: false,
            };
        }
        segs.push(kronrod(&mut f, s.a, mid));
        segs.push(kronrod(&mut f, mid, s.b));
        evaluations += 30;
    }
}

/// Integrate a real function over [a, b]; returns (value, error estimate).
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let r = integrate_complex(|x| c64::new(f(x), 0.0), a, b, abs_tol, rel_tol);
    (r.value.re, r.error)
}

/// Integrate over [a, ∞) through the map x = a + t/(1−t).
pub fn integrate_to_infinity(
    mut f: impl FnMut(f64) -> c64,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    integrate_complex(
        |t| {
            let u = 1.0 - t;
            f(a + t / u) / (u * u)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let (v, _) = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 0.0);
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate_to_infinity(|x| c64::new((-x * x).exp(), 0.0), 0.0, 1e-13, 1e-13);
        assert!((r.value.re - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_complex() {
        let r = integrate_complex(|x| c64::new(0.0, 5.0 * x).exp(), 0.0, 3.0, 1e-13, 0.0);
        let exact = (c64::new(0.0, 15.0).exp() - 1.0) / c64::new(0.0, 5.0);
        assert!((r.value - exact).norm() < 1e-12);
    }
}
