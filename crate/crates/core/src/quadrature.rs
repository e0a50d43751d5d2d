//! Adaptive Gauss–Kronrod (7/15 point) integration.
//!
//! Globally adaptive: the panel with the largest error estimate is bisected
//! until the summed estimate drops below `max(abs, rel * |value|)` or the
//! evaluation budget runs out. Error estimates follow the QUADPACK `qk15`
//! heuristic.

use crate::error::{Error, Result};

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Convergence controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Hard cap on integrand evaluations.
    pub max_evals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-8,
            max_evals: 10_000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_evals: usize) -> Self {
        Tolerance { abs, rel, max_evals }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrate `f` over `[points[0], points[last]]`, starting from one panel
/// per consecutive pair of break points. Break points should sit on kinks
/// or sharp features of the integrand.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Integral> {
    assert!(points.len() >= 2, "need at least two integration limits");
    let mut panels: Vec<Panel> = Vec::with_capacity(64);
    let mut evals = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            panels.push(kronrod15(&mut f, w[0], w[1]));
            evals += 15;
        }
    }
    if panels.is_empty() {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evals,
        });
    }

    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature {
                value,
                error_estimate: error,
                evaluations: evals,
            });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Integral { value, error, evals });
        }
        if evals + 30 > tol.max_evals {
            return Err(Error::Quadrature {
                value,
                error_estimate: error,
                evaluations: evals,
            });
        }
        let (worst, _) =
            panels.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, p)| {
                    if p.error > acc.1 {
                        (i, p.error)
                    } else {
                        acc
                    }
                },
            );
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // panel has collapsed to machine resolution; accept what we have
            return Ok(Integral { value, error, evals });
        }
        panels.push(kronrod15(&mut f, p.a, mid));
        panels.push(kronrod15(&mut f, mid, p.b));
        evals += 30;
    }
}

/// Integrate over `[a, ∞)` through the map `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<Integral> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, 8.0, max_relative = 1e-14);
        assert_eq!(r.evals, 15);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::new(1e-12, 1e-10, 20_000)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn kink_with_break_point() {
        let f = |x: f64| (x - 0.3).abs();
        let r = integrate_with_breaks(f, &[0.0, 0.3, 1.0], Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, 0.045 + 0.245, max_relative = 1e-13);
        assert_eq!(r.evals, 30);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_partial() {
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, Tolerance::new(0.0, 1e-14, 200)).unwrap_err();
        match err {
            Error::Quadrature { evaluations, .. } => assert!(evaluations <= 200),
            other => panic!("unexpected {other:?}"),
        }
    }
}
