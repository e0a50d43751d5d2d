//! Horizontal UAV placement for the sensor uplink alone: sum-rate
//! maximisation (closed-form approximations and a numerical optimum) and
//! max-min fairness.

use serde::Serialize;

use crate::channel::UavPosition;
use crate::error::{Error, Result};
use crate::uplink::{sum_rate, SensorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    HighSnr,
    LowSnr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Approx2DSolution {
    pub x_star: f64,
    pub y_star: f64,
    pub regime: Regime,
    /// Approximation margin used in the high-SNR derivation; metadata only.
    pub gamma: f64,
}

pub const DEFAULT_GAMMA: f64 = 100.0;

/// High-SNR optimum: weighted mean of the sensor positions with weights
/// `σ_0² / (P_m β_0) − 1/z²`.
pub fn highsnr_optimum(field: &SensorField, z: f64, gamma: f64) -> Result<Approx2DSolution> {
    field.validate()?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid("z", format!("must be positive, got {z}")));
    }
    let inv_z2 = 1.0 / (z * z);
    let w: Vec<f64> = field
        .power
        .iter()
        .map(|p| field.noise / (p * field.reference_gain) - inv_z2)
        .collect();
    let positive = w.iter().all(|&v| v > 0.0);
    let negative = w.iter().all(|&v| v < 0.0);
    if !positive && !negative {
        return Err(Error::ApproximationInvalid(
            "high-SNR weights change sign across sensors; use numeric_optimum_2d instead".into(),
        ));
    }
    let total: f64 = w.iter().sum();
    let scale: f64 = w.iter().map(|v| v.abs()).sum();
    if total.abs() <= 1e-12 * scale {
        return Err(Error::ApproximationInvalid(
            "high-SNR weight sum is numerically zero; use numeric_optimum_2d instead".into(),
        ));
    }
    let x = w.iter().zip(&field.x).map(|(a, b)| a * b).sum::<f64>() / total;
    let y = w.iter().zip(&field.y).map(|(a, b)| a * b).sum::<f64>() / total;
    Ok(Approx2DSolution {
        x_star: x,
        y_star: y,
        regime: Regime::HighSnr,
        gamma,
    })
}

/// Low-SNR optimum: the power-weighted centroid.
pub fn lowsnr_optimum(field: &SensorField) -> Result<Approx2DSolution> {
    field.validate()?;
    let total: f64 = field.power.iter().sum();
    let x = field.power.iter().zip(&field.x).map(|(p, v)| p * v).sum::<f64>() / total;
    let y = field.power.iter().zip(&field.y).map(|(p, v)| p * v).sum::<f64>() / total;
    Ok(Approx2DSolution {
        x_star: x,
        y_star: y,
        regime: Regime::LowSnr,
        gamma: DEFAULT_GAMMA,
    })
}

/// `‖approx − exact‖² / ‖exact‖²`.
pub fn nmse(approx: (f64, f64), exact: (f64, f64)) -> Result<f64> {
    let norm = exact.0 * exact.0 + exact.1 * exact.1;
    if norm == 0.0 {
        return Err(Error::invalid(
            "exact",
            "reference optimum at the origin has no normalisation",
        ));
    }
    let dx = approx.0 - exact.0;
    let dy = approx.1 - exact.1;
    Ok((dx * dx + dy * dy) / norm)
}

/// Per-sensor `(K_m, x − x_m, y − y_m)` with `K_m = P_m β_0 / σ_0²`.
fn sensor_terms(field: &SensorField, x: f64, y: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    (0..field.len()).map(move |m| {
        (
            field.power[m] * field.reference_gain / field.noise,
            x - field.x[m],
            y - field.y[m],
        )
    })
}

/// Analytic gradient and Hessian of `C_s` in `(x, y)` at height `z`.
fn derivatives(field: &SensorField, x: f64, y: f64, z: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let z2 = z * z;
    let mut g = [0.0; 2];
    let mut h = [[0.0; 2]; 2];
    for (k, dx, dy) in sensor_terms(field, x, y) {
        let q = z2 + dx * dx + dy * dy;
        // d/dq ln(1 + K/q) and its derivative
        let phi = -k / (q * (q + k));
        let dphi = k * (2.0 * q + k) / (q * q * (q + k) * (q + k));
        g[0] += 2.0 * phi * dx;
        g[1] += 2.0 * phi * dy;
        h[0][0] += 2.0 * phi + 4.0 * dx * dx * dphi;
        h[1][1] += 2.0 * phi + 4.0 * dy * dy * dphi;
        h[0][1] += 4.0 * dx * dy * dphi;
    }
    h[1][0] = h[0][1];
    (g, h)
}

/// Gradient of the sum rate with respect to the UAV's horizontal position.
pub fn sum_rate_gradient(field: &SensorField, x: f64, y: f64, z: f64) -> (f64, f64) {
    let (g, _) = derivatives(field, x, y, z);
    (g[0], g[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericOptimum {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub gradient_norm: f64,
    /// The maximiser sits on the search-box boundary.
    pub on_boundary: bool,
}

/// Search box: sensor bounding box inflated by 50 %, never thinner than `z`.
fn search_box(field: &SensorField, z: f64) -> (f64, f64, f64, f64) {
    let (x0, x1, y0, y1) = field.bounding_box();
    let span = (x1 - x0).max(y1 - y0).max(z);
    let wx = ((x1 - x0).max(span * 0.1)) * 0.25;
    let wy = ((y1 - y0).max(span * 0.1)) * 0.25;
    (x0 - wx, x1 + wx, y0 - wy, y1 + wy)
}

/// Numerical maximiser of `C_s` at height `z`: a coarse grid with step
/// `D/200`, two ×10 refinements around the best node, then Newton steps on
/// the analytic gradient.
pub fn numeric_optimum_2d(field: &SensorField, z: f64) -> Result<NumericOptimum> {
    field.validate()?;
    let uav = |x: f64, y: f64| UavPosition::new(x, y, z);
    uav(0.0, 0.0)?;
    let cs = |x: f64, y: f64| sum_rate(&UavPosition { x, y, z }, field);
    let (bx0, bx1, by0, by1) = search_box(field, z);
    let clamp = |x: f64, y: f64| (x.clamp(bx0, bx1), y.clamp(by0, by1));

    let mut step = (bx1 - bx0).max(by1 - by0) / 200.0;
    let mut best = ((bx0 + bx1) / 2.0, (by0 + by1) / 2.0);
    let mut best_val = cs(best.0, best.1);
    let nx = ((bx1 - bx0) / step).ceil() as usize;
    let ny = ((by1 - by0) / step).ceil() as usize;
    for i in 0..=nx {
        for j in 0..=ny {
            let (x, y) = clamp(bx0 + i as f64 * step, by0 + j as f64 * step);
            let v = cs(x, y);
            if v > best_val {
                best_val = v;
                best = (x, y);
            }
        }
    }
    for _ in 0..2 {
        let centre = best;
        let fine = step / 10.0;
        for i in -10i32..=10 {
            for j in -10i32..=10 {
                let (x, y) = clamp(centre.0 + i as f64 * fine, centre.1 + j as f64 * fine);
                let v = cs(x, y);
                if v > best_val {
                    best_val = v;
                    best = (x, y);
                }
            }
        }
        step = fine;
    }

    // Newton polish with backtracking; the grid result is already inside the
    // basin of the maximiser.
    let (mut x, mut y) = best;
    for _ in 0..100 {
        let (g, h) = derivatives(field, x, y, z);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let (mut dx, mut dy) = if h[0][0] < 0.0 && det > 0.0 {
            (
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(h[0][0] * g[1] - h[1][0] * g[0]) / det,
            )
        } else {
            // not locally concave: fall back to a gradient step of one grid cell
            let n = g[0].hypot(g[1]);
            if n == 0.0 {
                break;
            }
            (step * g[0] / n, step * g[1] / n)
        };
        let here = cs(x, y);
        let mut accepted = false;
        for _ in 0..40 {
            let (tx, ty) = clamp(x + dx, y + dy);
            if cs(tx, ty) >= here {
                accepted = (tx, ty) != (x, y);
                x = tx;
                y = ty;
                break;
            }
            dx *= 0.5;
            dy *= 0.5;
        }
        if !accepted || dx.hypot(dy) < 1e-12 * (1.0 + x.hypot(y)) {
            break;
        }
    }
    let (g, _) = derivatives(field, x, y, z);
    let tol = 1e-9 * (bx1 - bx0).max(by1 - by0);
    let on_boundary =
        (x - bx0).abs() <= tol || (bx1 - x).abs() <= tol || (y - by0).abs() <= tol || (by1 - y).abs() <= tol;
    Ok(NumericOptimum {
        x,
        y,
        value: cs(x, y),
        gradient_norm: g[0].hypot(g[1]),
        on_boundary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxMinSolution {
    pub position: (f64, f64),
    /// `min_m C_m` at `position`, nats/s/Hz.
    pub value: f64,
    /// Intersection points `x^(i)`, in the caller's sensor order (`None` where
    /// sensor `i` yields no admissible root, and for the weakest sensor).
    pub intersections: Vec<Option<(f64, f64)>>,
    /// Caller index of the sensor whose rate equals the weakest sensor's at
    /// the solution; the weakest sensor itself in the special case.
    pub binding_sensor: usize,
}

/// `min_m C_m` at `(x, y, z)`.
pub fn min_capacity(field: &SensorField, x: f64, y: f64, z: f64) -> f64 {
    let pos = UavPosition { x, y, z };
    (0..field.len())
        .map(|m| field.snr(&pos, m).ln_1p())
        .fold(f64::INFINITY, f64::min)
}

/// Caller indices sorted by non-decreasing power; rejects coincident sensors.
fn power_order(field: &SensorField) -> Result<Vec<usize>> {
    field.validate()?;
    let mut idx: Vec<usize> = (0..field.len()).collect();
    idx.sort_by(|&a, &b| field.power[a].total_cmp(&field.power[b]));
    for a in 0..field.len() {
        for b in a + 1..field.len() {
            if field.x[a] == field.x[b] && field.y[a] == field.y[b] {
                return Err(Error::invalid(
                    "sensors",
                    format!("sensors {a} and {b} share a position"),
                ));
            }
        }
    }
    Ok(idx)
}

/// Real roots of `a t² + b t + c`, the "preferred" one first.
fn quadratic_roots(a: f64, b: f64, c: f64, prefer_plus: bool) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs().sqrt());
    if a.abs() <= 1e-14 * scale.max(1e-300) {
        return if b != 0.0 { vec![-c / b] } else { vec![] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    let plus = (-b + s) / (2.0 * a);
    let minus = (-b - s) / (2.0 * a);
    if prefer_plus {
        vec![plus, minus]
    } else {
        vec![minus, plus]
    }
}

/// `|P_0 q_i − P_i q_0| / (P_0 q_i + P_i q_0)`: relative mismatch of the
/// capacity equality `C_0 = C_i`.
fn equality_residual(p0: f64, q0: f64, pi: f64, qi: f64) -> f64 {
    (p0 * qi - pi * q0).abs() / (p0 * qi + pi * q0)
}

const ROOT_TOL: f64 = 1e-9;

/// Max-min placement along x with the weakest sensor's y held fixed.
///
/// Candidates are the crossings `C_0(x) = C_i(x)` at or beyond `x_0`; the
/// solution is the largest. Without any crossing the weakest sensor is the
/// minimum everywhere to its right and the solution is `x_0`.
pub fn maxmin_1d(field: &SensorField, z: f64) -> Result<MaxMinSolution> {
    UavPosition::new(0.0, 0.0, z)?;
    let order = power_order(field)?;
    let w = order[0];
    let (x0, y0, p0) = (field.x[w], field.y[w], field.power[w]);
    let z2 = z * z;
    let e0 = 0.0;
    let mut intersections = vec![None; field.len()];
    let mut best: Option<(f64, usize)> = None;
    for &i in &order[1..] {
        let (xi, pi) = (field.x[i], field.power[i]);
        let ei = (field.y[i] - y0).powi(2);
        let a = pi - p0;
        let b = 2.0 * (p0 * xi - pi * x0);
        let c = pi * x0 * x0 - p0 * xi * xi + pi * (z2 + e0) - p0 * (z2 + ei);
        let root = quadratic_roots(a, b, c, true).into_iter().find(|&x| {
            let q0 = z2 + e0 + (x - x0).powi(2);
            let qi = z2 + ei + (x - xi).powi(2);
            x >= x0 - ROOT_TOL * (1.0 + x0.abs()) && equality_residual(p0, q0, pi, qi) < 1e-6
        });
        if let Some(x) = root {
            let x = x.max(x0);
            intersections[i] = Some((x, y0));
            if best.is_none_or(|(bx, _)| x > bx) {
                best = Some((x, i));
            }
        }
    }
    let (x, binding) = best.unwrap_or((x0, w));
    Ok(MaxMinSolution {
        position: (x, y0),
        value: min_capacity(field, x, y0, z),
        intersections,
        binding_sensor: binding,
    })
}

/// Max-min placement in the plane: for each sensor `i` the crossing point on
/// the segment from the weakest sensor towards `i`; the candidate farthest
/// from the origin is returned.
pub fn maxmin_2d(field: &SensorField, z: f64) -> Result<MaxMinSolution> {
    UavPosition::new(0.0, 0.0, z)?;
    let order = power_order(field)?;
    let w = order[0];
    let (x0, y0, p0) = (field.x[w], field.y[w], field.power[w]);
    let z2 = z * z;
    let mut intersections = vec![None; field.len()];
    let mut best: Option<((f64, f64), usize)> = None;
    for &i in &order[1..] {
        let pi = field.power[i];
        let (ux, uy) = (field.x[i] - x0, field.y[i] - y0);
        let d_i = ux.hypot(uy);
        let (cos, sin) = (ux / d_i, uy / d_i);
        let a = p0 - pi;
        let b = -2.0 * p0 * d_i;
        let c = (p0 - pi) * z2 + p0 * d_i * d_i;
        let root = quadratic_roots(a, b, c, false).into_iter().find(|&d| {
            let q0 = z2 + d * d;
            let qi = z2 + (d_i - d).powi(2);
            d > 0.0 && d <= d_i * (1.0 + ROOT_TOL) && equality_residual(p0, q0, pi, qi) < 1e-6
        });
        if let Some(d) = root {
            let d = d.min(d_i);
            let pt = (x0 + d * cos, y0 + d * sin);
            intersections[i] = Some(pt);
            if best.is_none_or(|(b, _)| pt.0.hypot(pt.1) > b.0.hypot(b.1)) {
                best = Some((pt, i));
            }
        }
    }
    let (pt, binding) = best.unwrap_or(((x0, y0), w));
    Ok(MaxMinSolution {
        position: pt,
        value: min_capacity(field, pt.0, pt.1, z),
        intersections,
        binding_sensor: binding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig2_field(noise: f64) -> SensorField {
        SensorField::new(
            vec![0.0, 100.0, 150.0, 200.0, 250.0, 350.0, 450.0, 550.0, 750.0, 1000.0],
            vec![0.0, 150.0, 250.0, 300.0, 450.0, 550.0, 650.0, 700.0, 800.0, 1000.0],
            (1..=10).map(|i| 0.5 * i as f64).collect(),
            0.4,
            noise,
        )
        .unwrap()
    }

    fn line(x: Vec<f64>, p: Vec<f64>, beta: f64) -> SensorField {
        SensorField::on_line(x, p, beta, 1e-6).unwrap()
    }

    #[test]
    fn single_sensor_optima() {
        let f = SensorField::new(vec![120.0], vec![-40.0], vec![2.0], 0.4, 1e-6).unwrap();
        let h = highsnr_optimum(&f, 500.0, DEFAULT_GAMMA).unwrap();
        assert_relative_eq!(h.x_star, 120.0, max_relative = 1e-14);
        assert_relative_eq!(h.y_star, -40.0, max_relative = 1e-14);
        let l = lowsnr_optimum(&f).unwrap();
        assert_eq!((l.x_star, l.y_star), (120.0, -40.0));
        let n = numeric_optimum_2d(&f, 500.0).unwrap();
        assert!((n.x - 120.0).abs() < 1e-6 && (n.y + 40.0).abs() < 1e-6);
    }

    #[test]
    fn equal_powers_give_centroid() {
        let f = SensorField::new(vec![0.0, 100.0, 500.0], vec![0.0, 300.0, 0.0], vec![1.0; 3], 0.4, 1e-6).unwrap();
        let h = highsnr_optimum(&f, 5000.0, DEFAULT_GAMMA).unwrap();
        assert_relative_eq!(h.x_star, 200.0, max_relative = 1e-12);
        assert_relative_eq!(h.y_star, 100.0, max_relative = 1e-12);
        let l = lowsnr_optimum(&f).unwrap();
        assert_relative_eq!(l.x_star, 200.0, max_relative = 1e-14);
    }

    #[test]
    fn lowsnr_arithmetic() {
        let f = line(vec![0.0, 400.0], vec![1.0, 3.0], 0.4);
        assert_relative_eq!(lowsnr_optimum(&f).unwrap().x_star, 300.0);
    }

    #[test]
    fn highsnr_rejects_mixed_weights() {
        // weights 1e-6/(P·0.4) − 1/z² change sign between P = 0.5 and P = 5 at z = 400
        let f = fig2_field(1e-6);
        let z = 1.0 / (1e-6f64 / (2.0 * 0.4)).sqrt();
        assert!(matches!(
            highsnr_optimum(&f, z, DEFAULT_GAMMA),
            Err(Error::ApproximationInvalid(_))
        ));
    }

    #[test]
    fn nmse_examples() {
        assert_eq!(nmse((3.0, 4.0), (3.0, 4.0)).unwrap(), 0.0);
        assert_relative_eq!(nmse((3.0, 4.0), (0.0, 5.0)).unwrap(), 0.4);
        assert!(nmse((1.0, 1.0), (0.0, 0.0)).is_err());
    }

    #[test]
    fn symmetric_pair_optimum_is_midpoint() {
        let f = SensorField::new(vec![100.0, 700.0], vec![50.0, 450.0], vec![2.0, 2.0], 0.4, 1e-6).unwrap();
        let n = numeric_optimum_2d(&f, 500.0).unwrap();
        assert!((n.x - 400.0).abs() < 1e-6 && (n.y - 250.0).abs() < 1e-6, "{n:?}");
    }

    #[test]
    fn fig3_interior_stationary_point() {
        let f = fig2_field(1e-6);
        let n = numeric_optimum_2d(&f, 500.0).unwrap();
        assert!(!n.on_boundary);
        assert!(n.gradient_norm < 1e-6, "{}", n.gradient_norm);
        // no 1 m grid node beats it
        for i in -20..=20 {
            for j in -20..=20 {
                let p = UavPosition::new(n.x + i as f64, n.y + j as f64, 500.0).unwrap();
                assert!(sum_rate(&p, &f) <= n.value + 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = fig2_field(1e-6);
        let (gx, gy) = sum_rate_gradient(&f, 300.0, 420.0, 500.0);
        let h = 1e-3;
        let c = |x: f64, y: f64| sum_rate(&UavPosition::new(x, y, 500.0).unwrap(), &f);
        let fx = (c(300.0 + h, 420.0) - c(300.0 - h, 420.0)) / (2.0 * h);
        let fy = (c(300.0, 420.0 + h) - c(300.0, 420.0 - h)) / (2.0 * h);
        assert_relative_eq!(gx, fx, max_relative = 1e-6);
        assert_relative_eq!(gy, fy, max_relative = 1e-6);
    }

    #[test]
    fn nmse_vanishes_with_height() {
        let f = fig2_field(1e-6);
        let mut prev = f64::INFINITY;
        for z in [5000.0, 10000.0, 20000.0, 40000.0] {
            let exact = numeric_optimum_2d(&f, z).unwrap();
            let lo = lowsnr_optimum(&f).unwrap();
            let e = nmse((lo.x_star, lo.y_star), (exact.x, exact.y)).unwrap();
            assert!(e < prev, "z={z}: {e} !< {prev}");
            prev = e;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn lowsnr_argmax_invariant_to_power_scaling() {
        let f = fig2_field(1.0);
        let a = numeric_optimum_2d(&f, 5000.0).unwrap();
        let scaled = SensorField {
            power: f.power.iter().map(|p| p * 3.0).collect(),
            ..f.clone()
        };
        let b = numeric_optimum_2d(&scaled, 5000.0).unwrap();
        assert!((a.x - b.x).abs() < 1e-3 && (a.y - b.y).abs() < 1e-3);
    }

    fn scan_1d(field: &SensorField, z: f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
        let y = field.y[0];
        let n = ((hi - lo) / step).round() as usize;
        let mut best = (lo, f64::NEG_INFINITY);
        for k in 0..=n {
            let x = lo + k as f64 * step;
            let v = min_capacity(field, x, y, z);
            if v > best.1 {
                best = (x, v);
            }
        }
        best
    }

    #[test]
    fn maxmin_equal_pair_midpoint() {
        let f = line(vec![0.0, 1000.0], vec![1.0, 1.0], 0.2);
        let s = maxmin_1d(&f, 300.0).unwrap();
        assert_relative_eq!(s.position.0, 500.0, max_relative = 1e-12);
        assert_eq!(s.binding_sensor, 1);
    }

    #[test]
    fn maxmin_low_altitude_ratio() {
        // P_0 (D − x)² = P_1 x² → x = 300
        let f = line(vec![0.0, 900.0], vec![1.0, 4.0], 0.2);
        let s = maxmin_1d(&f, 1e-3).unwrap();
        assert!((s.position.0 - 300.0).abs() < 1e-3);
        let (bx, _) = scan_1d(&f, 1e-3, 0.0, 900.0, 0.01);
        assert!((bx - s.position.0).abs() <= 0.01);
    }

    #[test]
    fn maxmin_special_case() {
        let f = line(
            vec![0.0, 200.0, 400.0, 700.0, 1000.0],
            vec![0.3, 3.0, 3.5, 4.0, 5.0],
            0.2,
        );
        let s = maxmin_1d(&f, 300.0).unwrap();
        assert_eq!(s.position.0, 0.0);
        assert_eq!(s.binding_sensor, 0);
        assert!(s.intersections.iter().all(Option::is_none));
    }

    #[test]
    fn maxmin_general_case_roots_and_binding() {
        let f = line(
            vec![0.0, 200.0, 400.0, 700.0, 1000.0],
            vec![2.5, 3.0, 3.5, 4.0, 5.0],
            0.2,
        );
        let z = 300.0;
        let s = maxmin_1d(&f, z).unwrap();
        let largest = s
            .intersections
            .iter()
            .flatten()
            .map(|p| p.0)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.position.0, largest);
        let pos = UavPosition::new(s.position.0, 0.0, z).unwrap();
        let c0 = f.snr(&pos, 0).ln_1p();
        let cj = f.snr(&pos, s.binding_sensor).ln_1p();
        assert!((c0 - cj).abs() < 1e-9);
        assert!((s.value - c0).abs() < 1e-9);
        for (i, p) in s.intersections.iter().enumerate() {
            if let Some((x, _)) = p {
                let q0 = z * z + x * x;
                let qi = z * z + (x - f.x[i]).powi(2);
                assert!(equality_residual(f.power[0], q0, f.power[i], qi) < 1e-6);
            }
        }
    }

    #[test]
    fn maxmin_unsorted_input_is_remapped() {
        let sorted = line(
            vec![0.0, 200.0, 400.0, 700.0, 1000.0],
            vec![2.5, 3.0, 3.5, 4.0, 5.0],
            0.2,
        );
        let shuffled = line(
            vec![700.0, 0.0, 1000.0, 200.0, 400.0],
            vec![4.0, 2.5, 5.0, 3.0, 3.5],
            0.2,
        );
        let a = maxmin_1d(&sorted, 300.0).unwrap();
        let b = maxmin_1d(&shuffled, 300.0).unwrap();
        assert_eq!(a.position, b.position);
        assert_eq!(sorted.x[a.binding_sensor], shuffled.x[b.binding_sensor]);
    }

    #[test]
    fn maxmin_rejects_coincident_sensors() {
        let f = line(vec![0.0, 0.0], vec![1.0, 2.0], 0.2);
        assert!(maxmin_1d(&f, 300.0).is_err());
    }

    #[test]
    fn maxmin_2d_midpoint_and_collinear() {
        let f = SensorField::new(vec![0.0, 600.0], vec![0.0, 800.0], vec![1.0, 1.0], 0.2, 1e-6).unwrap();
        let s = maxmin_2d(&f, 300.0).unwrap();
        assert_relative_eq!(s.position.0, 300.0, max_relative = 1e-12);
        assert_relative_eq!(s.position.1, 400.0, max_relative = 1e-12);

        let l = line(
            vec![0.0, 200.0, 400.0, 700.0, 1000.0],
            vec![2.5, 3.0, 3.5, 4.0, 5.0],
            0.2,
        );
        let a = maxmin_1d(&l, 300.0).unwrap();
        let b = maxmin_2d(&l, 300.0).unwrap();
        for (p, q) in a.intersections.iter().zip(&b.intersections) {
            match (p, q) {
                (Some(p), Some(q)) => assert!((p.0 - q.0).abs() < 1e-6 && q.1.abs() < 1e-12),
                (None, None) => {}
                _ => panic!("candidate sets differ: {p:?} vs {q:?}"),
            }
        }
        assert!((a.position.0 - b.position.0).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn maxmin_1d_matches_scan(
            gaps in prop::collection::vec(50.0f64..400.0, 1..5),
            extra in prop::collection::vec(0.1f64..3.0, 5),
            p0 in 0.2f64..2.0,
            z in 50.0f64..600.0,
        ) {
            let mut x = vec![0.0];
            for g in &gaps {
                x.push(x.last().unwrap() + g);
            }
            let mut p = vec![p0];
            for k in 0..gaps.len() {
                p.push(p0 + extra[k]);
            }
            let f = line(x.clone(), p, 0.2);
            let s = maxmin_1d(&f, z).unwrap();
            let hi = *x.last().unwrap();
            let (bx, bv) = scan_1d(&f, z, 0.0, hi, 0.01);
            prop_assert!(s.value >= bv - 1e-6, "algorithm {} < scan {} at {}", s.value, bv, bx);
            prop_assert!((bx - s.position.0).abs() <= 0.01 + 1e-9);
        }
    }
}
