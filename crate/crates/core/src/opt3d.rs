//! Three-dimensional relay placement and the parameter sweeps built on it.
//!
//! The capacity surface is multimodal in altitude (one peak inside the cloud,
//! one above it) and has kinks at the layer boundaries, so the optimiser
//! evaluates a coarse grid whose altitude axis is stratified by layer and then
//! runs a bounded Nelder–Mead search from the best few grid nodes.

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{average_capacity, RelayScheme};
use crate::channel::{Atmosphere, UavPosition};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::solar::min_altitude;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    /// D: the search square is `[0, D]²`, metres.
    pub box_size: f64,
    /// Upper altitude bound, metres.
    pub z_max: f64,
    /// Local searches, each started from a distinct top grid node.
    pub starts: usize,
    /// Grid nodes along x, y and z.
    pub coarse_grid: [usize; 3],
    /// Local search stops once the simplex is smaller than this, metres.
    pub local_tol: f64,
    /// Objective evaluations allowed per local search.
    pub max_evals: usize,
    /// Orients the initial simplices.
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            box_size: 2000.0,
            z_max: 10_000.0,
            starts: 8,
            coarse_grid: [20, 20, 40],
            local_tol: 0.1,
            max_evals: 2_000,
            seed: 7,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.box_size > 0.0 && self.box_size.is_finite()) {
            return Err(Error::invalid(
                "optimizer.box_size",
                format!("must be positive, got {}", self.box_size),
            ));
        }
        if !(self.z_max > 0.0 && self.z_max.is_finite()) {
            return Err(Error::invalid(
                "optimizer.z_max",
                format!("must be positive, got {}", self.z_max),
            ));
        }
        if self.starts < 4 {
            return Err(Error::invalid(
                "optimizer.starts",
                format!("must be at least 4, got {}", self.starts),
            ));
        }
        if self.coarse_grid[0] < 2 || self.coarse_grid[1] < 2 || self.coarse_grid[2] < 6 {
            return Err(Error::invalid(
                "optimizer.coarse_grid",
                "needs at least 2 nodes in x and y and 6 in z",
            ));
        }
        if !(self.local_tol > 0.0) {
            return Err(Error::invalid(
                "optimizer.local_tol",
                format!("must be positive, got {}", self.local_tol),
            ));
        }
        if self.max_evals < 10 {
            return Err(Error::invalid(
                "optimizer.max_evals",
                format!("must be at least 10, got {}", self.max_evals),
            ));
        }
        Ok(())
    }
}

/// `β_c = k ψ_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    pub slope: f64,
}

impl CouplingModel {
    pub const DEFAULT_SLOPES: [f64; 3] = [0.5, 1.0, 2.0];

    pub fn new(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::invalid(
                "coupling",
                format!("slope must be positive, got {slope}"),
            ));
        }
        Ok(CouplingModel { slope })
    }

    pub fn apply(&self, atm: &mut Atmosphere, laser_ext_cloud: f64) {
        atm.laser_ext_cloud = laser_ext_cloud;
        atm.solar_ext_cloud = self.slope * laser_ext_cloud;
    }
}

impl Default for CouplingModel {
    fn default() -> Self {
        CouplingModel { slope: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalSearch {
    pub start: UavPosition,
    pub optimum: UavPosition,
    pub value: f64,
    pub evals: usize,
}

/// Box faces within `local_tol` of the returned optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ActiveConstraints {
    pub x_min: bool,
    pub x_max: bool,
    pub y_min: bool,
    pub y_max: bool,
    pub z_min: bool,
    pub z_max: bool,
}

impl ActiveConstraints {
    pub fn any(&self) -> bool {
        self.x_min || self.x_max || self.y_min || self.y_max || self.z_min || self.z_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub position: UavPosition,
    /// nats/s/Hz.
    pub capacity: f64,
    pub scheme: RelayScheme,
    pub evals: usize,
    pub all_starts: Vec<LocalSearch>,
    pub constraint_active: ActiveConstraints,
    /// Some local search hit `max_evals` before converging.
    pub budget_exhausted: bool,
    /// Lowest feasible altitude for this scenario.
    pub min_altitude: f64,
}

/// Feasible search region.
#[derive(Debug, Clone, Copy)]
struct Bounds {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Bounds {
    fn clamp(&self, p: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| p[i].clamp(self.lo[i], self.hi[i]))
    }
}

/// Strict lower altitude bound just above the hover threshold.
fn feasible_floor(z0: f64) -> f64 {
    z0 + 1e-6 * z0.max(1.0)
}

fn bounds(scenario: &Scenario) -> Result<(Bounds, f64)> {
    let z0 = min_altitude(&scenario.solar, &scenario.atmosphere)?;
    let s = &scenario.optimizer;
    let floor = feasible_floor(z0);
    if floor >= s.z_max {
        return Err(Error::InfeasibleAltitude(format!(
            "minimum altitude {z0:.3} m is above z_max = {} m",
            s.z_max
        )));
    }
    Ok((
        Bounds {
            lo: [0.0, 0.0, floor],
            hi: [s.box_size, s.box_size, s.z_max],
        },
        z0,
    ))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Altitude grid with nodes in every layer above `lo`, including the cloud
/// base and top themselves. Above the cloud the spacing is geometric.
pub fn altitude_grid(lo: f64, hi: f64, atm: &Atmosphere, n: usize) -> Vec<f64> {
    let base = atm.cloud_base;
    let top = atm.cloud_top();
    let mut layers: Vec<(f64, f64, usize, bool)> = Vec::new();
    if lo < base && base < hi {
        layers.push((lo, base, 1, false));
    }
    if lo < top && base < hi && top > base {
        layers.push((lo.max(base), top.min(hi), 2, false));
    }
    if top < hi {
        layers.push((lo.max(top), hi, 2, true));
    }
    if layers.is_empty() {
        return linspace(lo, hi, n);
    }
    let weight: usize = layers.iter().map(|l| l.2).sum();
    let mut counts: Vec<usize> = layers.iter().map(|l| (n * l.2 / weight).max(2)).collect();
    let last = counts.len() - 1;
    let used: usize = counts[..last].iter().sum();
    counts[last] = n.saturating_sub(used).max(2);
    let mut z = Vec::with_capacity(n + 2);
    for (&(a, b, _, geometric), &c) in layers.iter().zip(&counts) {
        if geometric && a > 0.0 {
            let r = (b / a).ln();
            z.extend((0..c).map(|i| {
                if i + 1 == c {
                    b
                } else {
                    a * (r * i as f64 / (c - 1) as f64).exp()
                }
            }));
        } else {
            z.extend(linspace(a, b, c));
        }
    }
    z.sort_by(f64::total_cmp);
    z.dedup();
    z
}

/// Larger capacity wins; values within 1e−9 prefer smaller z, then x, then y.
fn better(a: (f64, [f64; 3]), b: (f64, [f64; 3])) -> Ordering {
    if (a.0 - b.0).abs() > 1e-9 {
        return b.0.total_cmp(&a.0);
    }
    a.1[2]
        .total_cmp(&b.1[2])
        .then(a.1[0].total_cmp(&b.1[0]))
        .then(a.1[1].total_cmp(&b.1[1]))
}

/// Strict total order used for sorting: capacity descending, then z, x, y.
fn rank(a: (f64, [f64; 3]), b: (f64, [f64; 3])) -> Ordering {
    b.0.total_cmp(&a.0)
        .then(a.1[2].total_cmp(&b.1[2]))
        .then(a.1[0].total_cmp(&b.1[0]))
        .then(a.1[1].total_cmp(&b.1[1]))
}

fn objective(scenario: &Scenario, p: [f64; 3]) -> f64 {
    let pos = UavPosition {
        x: p[0],
        y: p[1],
        z: p[2],
    };
    // quadrature failures rank below every feasible value
    average_capacity(&pos, scenario)
        .map(|r| r.value)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Nelder–Mead on the box, with trial points projected onto it. A converged
/// simplex is restarted around its best vertex (with smaller steps) until a
/// restart no longer improves, which undoes simplex collapse.
fn nelder_mead<F: Fn([f64; 3]) -> f64>(
    f: &F,
    start: [f64; 3],
    steps: [f64; 3],
    b: &Bounds,
    tol: f64,
    max_evals: usize,
) -> ([f64; 3], f64, usize, bool) {
    let (mut x, mut v, mut evals, mut exhausted) = nelder_mead_once(f, start, steps, b, tol, max_evals);
    let mut scale = 0.1;
    while !exhausted && evals < max_evals {
        let restart = steps.map(|s| (s * scale).abs().max(10.0 * tol) * s.signum());
        let (x2, v2, n, e) = nelder_mead_once(f, x, restart, b, tol, max_evals - evals);
        evals += n;
        exhausted = e;
        if v2 > v {
            let moved = (0..3).map(|i| (x2[i] - x[i]).abs()).fold(0.0, f64::max);
            x = x2;
            v = v2;
            if moved < tol {
                break;
            }
        } else {
            break;
        }
        scale *= 0.1;
    }
    (x, v, evals, exhausted)
}

fn nelder_mead_once<F: Fn([f64; 3]) -> f64>(
    f: &F,
    start: [f64; 3],
    steps: [f64; 3],
    b: &Bounds,
    tol: f64,
    max_evals: usize,
) -> ([f64; 3], f64, usize, bool) {
    let evals = std::cell::Cell::new(0usize);
    let eval = |p: [f64; 3]| {
        evals.set(evals.get() + 1);
        -f(p)
    };
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    let s0 = b.clamp(start);
    simplex.push((s0, eval(s0)));
    for i in 0..3 {
        let mut p = s0;
        p[i] += steps[i];
        if p[i] > b.hi[i] || p[i] < b.lo[i] {
            p[i] = s0[i] - steps[i];
        }
        let p = b.clamp(p);
        simplex.push((p, eval(p)));
    }
    let order = |s: &mut Vec<([f64; 3], f64)>| {
        s.sort_by(|a, c| rank((-a.1, a.0), (-c.1, c.0)));
    };
    let mut converged = false;
    while evals.get() < max_evals {
        order(&mut simplex);
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| (0..3).map(|i| (p[i] - simplex[0].0[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < tol {
            converged = true;
            break;
        }
        let mut centroid = [0.0; 3];
        for (p, _) in &simplex[..3] {
            for i in 0..3 {
                centroid[i] += p[i] / 3.0;
            }
        }
        let worst = simplex[3];
        let along = |t: f64| b.clamp([0, 1, 2].map(|i| centroid[i] + t * (worst.0[i] - centroid[i])));
        let xr = along(-1.0);
        let fr = eval(xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(xe);
            simplex[3] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(-0.5);
                (x, eval(x))
            } else {
                let x = along(0.5);
                (x, eval(x))
            };
            if fc < worst.1.min(fr) {
                simplex[3] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let p = b.clamp([0, 1, 2].map(|i| best[i] + 0.5 * (v.0[i] - best[i])));
                    *v = (p, eval(p));
                }
            }
        }
    }
    order(&mut simplex);
    (simplex[0].0, -simplex[0].1, evals.get(), !converged)
}

/// Maximise the averaged end-to-end capacity over the feasible box.
pub fn optimize_position(scenario: &Scenario) -> Result<OptimizationResult> {
    scenario.validate()?;
    let settings = &scenario.optimizer;
    let (b, z0) = bounds(scenario)?;
    let [nx, ny, nz] = settings.coarse_grid;
    let xs = linspace(b.lo[0], b.hi[0], nx);
    let ys = linspace(b.lo[1], b.hi[1], ny);
    let zs = altitude_grid(b.lo[2], b.hi[2], &scenario.atmosphere, nz);

    let mut nodes: Vec<[f64; 3]> = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &z in &zs {
        for &x in &xs {
            nodes.extend(ys.iter().map(|&y| [x, y, z]));
        }
    }
    let values: Vec<f64> = nodes.par_iter().map(|&p| objective(scenario, p)).collect();
    let mut ranked: Vec<usize> = (0..nodes.len()).collect();
    ranked.sort_by(|&i, &j| rank((values[i], nodes[i]), (values[j], nodes[j])));

    let spacing = |v: &[f64], t: f64| {
        let k = v.partition_point(|&s| s < t).min(v.len() - 1);
        let lo = if k > 0 { v[k] - v[k - 1] } else { f64::INFINITY };
        let hi = if k + 1 < v.len() {
            v[k + 1] - v[k]
        } else {
            f64::INFINITY
        };
        lo.min(hi)
    };

    let starts: Vec<(usize, [f64; 3])> = ranked.iter().take(settings.starts).map(|&i| (i, nodes[i])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let signs: Vec<[f64; 3]> = starts
        .iter()
        .map(|_| [0; 3].map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }))
        .collect();
    let f = |p: [f64; 3]| objective(scenario, p);
    let local: Vec<(LocalSearch, bool)> = starts
        .par_iter()
        .zip(signs.par_iter())
        .map(|(&(_, p), sign)| {
            let steps = [
                sign[0] * spacing(&xs, p[0]),
                sign[1] * spacing(&ys, p[1]),
                sign[2] * spacing(&zs, p[2]),
            ];
            let (opt, value, evals, exhausted) = nelder_mead(&f, p, steps, &b, settings.local_tol, settings.max_evals);
            (
                LocalSearch {
                    start: UavPosition {
                        x: p[0],
                        y: p[1],
                        z: p[2],
                    },
                    optimum: UavPosition {
                        x: opt[0],
                        y: opt[1],
                        z: opt[2],
                    },
                    value,
                    evals,
                },
                exhausted,
            )
        })
        .collect();

    let mut best = (values[ranked[0]], nodes[ranked[0]]);
    for (ls, _) in &local {
        let cand = (ls.value, [ls.optimum.x, ls.optimum.y, ls.optimum.z]);
        if better(cand, best) == Ordering::Less {
            best = cand;
        }
    }
    let p = best.1;
    let tol = settings.local_tol;
    let constraint_active = ActiveConstraints {
        x_min: p[0] - b.lo[0] <= tol,
        x_max: b.hi[0] - p[0] <= tol,
        y_min: p[1] - b.lo[1] <= tol,
        y_max: b.hi[1] - p[1] <= tol,
        z_min: p[2] - b.lo[2] <= tol,
        z_max: b.hi[2] - p[2] <= tol,
    };
    Ok(OptimizationResult {
        position: UavPosition {
            x: p[0],
            y: p[1],
            z: p[2],
        },
        capacity: best.0,
        scheme: scenario.relay.scheme,
        evals: nodes.len() + local.iter().map(|(l, _)| l.evals).sum::<usize>(),
        budget_exhausted: local.iter().any(|(_, e)| *e),
        all_starts: local.into_iter().map(|(l, _)| l).collect(),
        constraint_active,
        min_altitude: z0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Capacity along one axis with the other two coordinates taken from
/// `fixed`. Rows are `(coordinate, capacity)`; altitudes where the UAV cannot
/// hover report `NaN`.
pub fn capacity_slice(scenario: &Scenario, axis: Axis, fixed: &UavPosition, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    for &t in grid {
        if !t.is_finite() || (axis == Axis::Z && t <= 0.0) {
            return Err(Error::invalid("grid", format!("invalid {axis:?} coordinate {t}")));
        }
    }
    grid.par_iter()
        .map(|&t| {
            let mut p = *fixed;
            match axis {
                Axis::X => p.x = t,
                Axis::Y => p.y = t,
                Axis::Z => p.z = t,
            }
            match average_capacity(&p, scenario) {
                Ok(r) => Ok((t, r.value)),
                Err(Error::NegativeNetPower { .. }) => Ok((t, f64::NAN)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// σ_N².
    OgsNoise,
    /// ψ_c, with β_c set by the coupling model.
    CloudExtinction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub capacity: f64,
}

/// Re-optimise the position for each parameter value.
pub fn sweep_optimal_position(
    scenario: &Scenario,
    parameter: SweepParameter,
    values: &[f64],
    coupling: CouplingModel,
) -> Result<Vec<SweepRow>> {
    if values.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("values", "sweep values must be sorted ascending"));
    }
    values
        .iter()
        .map(|&v| {
            let mut s = scenario.clone();
            match parameter {
                SweepParameter::OgsNoise => s.optical.noise = v,
                SweepParameter::CloudExtinction => coupling.apply(&mut s.atmosphere, v),
            }
            let r = optimize_position(&s)?;
            Ok(SweepRow {
                value: v,
                x: r.position.x,
                y: r.position.y,
                z: r.position.z,
                capacity: r.capacity,
            })
        })
        .collect()
}
