//! Seeded Monte Carlo estimates of fading-averaged capacity.
//!
//! Samples are drawn in fixed-size blocks; block `i` uses ChaCha8 stream `i`
//! under the configured seed, so the estimate does not depend on how blocks
//! are scheduled across threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{LinkState, RelayScheme};
use crate::channel::{
    Atmosphere, Backhaul, FadingMode, PointingErrorModel, ScintillationModel, TurbulencePreset, UavPosition,
};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::solar::min_altitude;

pub const MIN_SAMPLES: u64 = 1_000;
const BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
    /// Pair every uniform draw `u` with `1 − u`.
    pub antithetic: bool,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            samples: 1_000_000,
            seed: 7,
            antithetic: false,
        }
    }
}

impl McSettings {
    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::invalid(
                "mc.samples",
                format!("must be at least {MIN_SAMPLES}, got {}", self.samples),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Uniform on `(0, 1)`.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Gain for given uniforms: `u_r` drives the Rayleigh radius, `u_s` the
/// scintillation inverse CDF.
fn gain_from_uniforms(
    bh: &Backhaul,
    pe: &PointingErrorModel,
    pos: &UavPosition,
    sc: &ScintillationModel,
    mode: FadingMode,
    u_r: f64,
    u_s: f64,
) -> f64 {
    let radius = pe.jitter * pos.slant_range() * (-2.0 * u_r.ln()).sqrt();
    let hp = pe.gain_at_offset(radius, pos);
    let fixed = hp * bh.attenuation.combined();
    match mode {
        FadingMode::Pointing => fixed,
        FadingMode::Composite => fixed * sc.inverse_cdf(u_s).unwrap_or(0.0),
    }
}

/// One draw of the backhaul gain `h_p h_s h_a h_c` (or `h_p h_a h_c` when
/// `mode` is pointing-only).
pub fn sample_channel_gain<R: Rng + ?Sized>(
    rng: &mut R,
    pos: &UavPosition,
    atm: &Atmosphere,
    pe: &PointingErrorModel,
    sc: &ScintillationModel,
    mode: FadingMode,
) -> f64 {
    let bh = Backhaul::new(pos, atm, pe);
    let u_r = open_uniform(rng);
    let u_s = open_uniform(rng);
    gain_from_uniforms(&bh, pe, pos, sc, mode, u_r, u_s)
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64),
        }
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Mean and standard error of `f(h)` over `samples` gains.
///
/// With antithetic sampling each pair average counts as one observation for
/// the standard error, and `samples` counts individual draws.
pub fn mc_expectation<F>(pos: &UavPosition, scenario: &Scenario, settings: &McSettings, f: F) -> Result<McEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    settings.validate()?;
    let opt = &scenario.optical;
    let bh = Backhaul::new(pos, &scenario.atmosphere, &opt.pointing);
    let draw = |u_r: f64, u_s: f64| {
        f(gain_from_uniforms(
            &bh,
            &opt.pointing,
            pos,
            &opt.scintillation,
            opt.fading,
            u_r,
            u_s,
        ))
    };

    let per_obs = if settings.antithetic { 2 } else { 1 };
    let observations = settings.samples / per_obs;
    let blocks = observations.div_ceil(BLOCK);
    let moments = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(settings.seed, b);
            let n = BLOCK.min(observations - b * BLOCK);
            let mut m = Moments::default();
            for _ in 0..n {
                let u_r = open_uniform(&mut rng);
                let u_s = open_uniform(&mut rng);
                let v = if settings.antithetic {
                    0.5 * (draw(u_r, u_s) + draw(1.0 - u_r, 1.0 - u_s))
                } else {
                    draw(u_r, u_s)
                };
                m.push(v);
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);

    let var = if moments.n > 1 {
        moments.m2 / (moments.n - 1) as f64
    } else {
        0.0
    };
    Ok(McEstimate {
        mean: moments.mean,
        std_error: (var / moments.n as f64).sqrt(),
        samples: moments.n * per_obs,
    })
}

/// Monte Carlo estimate of the averaged end-to-end capacity, nats/s/Hz.
pub fn mc_capacity(
    scenario: &Scenario,
    pos: &UavPosition,
    scheme: RelayScheme,
    settings: &McSettings,
) -> Result<McEstimate> {
    let st = LinkState::new(pos, scenario)?;
    mc_expectation(pos, scenario, settings, |h| st.conditional(scheme, h))
}

/// `base` at a reference position followed by `count` random variants, each
/// paired with a UAV position where the platform can hover.
///
/// The variants redraw the cloud extinction (with `β_c = ψ_c`), jitter,
/// turbulence preset and both noise powers.
pub fn validation_cases(base: &Scenario, count: usize, seed: u64) -> Result<Vec<(Scenario, UavPosition)>> {
    base.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x0, x1, y0, y1) = base.sensors.bounding_box();
    let mut cases = Vec::with_capacity(count + 1);
    let first = feasible_position(base, &mut rng, Some((0.5 * (x0 + x1), 0.5 * (y0 + y1))))?;
    cases.push((base.clone(), first));
    for _ in 0..count {
        let mut s = base.clone();
        s.atmosphere.laser_ext_cloud = rng.gen_range(0.001..0.01);
        s.atmosphere.solar_ext_cloud = s.atmosphere.laser_ext_cloud;
        s.optical.pointing.jitter = s.optical.pointing.beamwidth * rng.gen_range(0.5..2.0);
        s.optical.scintillation = TurbulencePreset::ALL[rng.gen_range(0..3)].model();
        s.optical.noise = 10f64.powf(rng.gen_range(-14.0..-8.0));
        s.sensors.noise = 10f64.powf(rng.gen_range(-8.0..-5.0));
        let p = feasible_position(&s, &mut rng, None)?;
        cases.push((s, p));
    }
    Ok(cases)
}

fn feasible_position(s: &Scenario, rng: &mut ChaCha8Rng, xy: Option<(f64, f64)>) -> Result<UavPosition> {
    let lo = min_altitude(&s.solar, &s.atmosphere)?.max(1.0) * 1.01;
    let d = s.optimizer.box_size;
    for _ in 0..1000 {
        let (x, y) = xy.unwrap_or_else(|| (rng.gen_range(0.0..=d), rng.gen_range(0.0..=d)));
        let p = UavPosition::new(x, y, rng.gen_range(lo..lo + 2500.0))?;
        if LinkState::new(&p, s).is_ok() {
            return Ok(p);
        }
    }
    Err(Error::InfeasibleAltitude(format!(
        "no altitude above {lo} m where the UAV can hover"
    )))
}

/// Draw `n` gains with the scenario's fading mode, in stream order.
pub fn sample_gains(pos: &UavPosition, scenario: &Scenario, n: u64, seed: u64) -> Vec<f64> {
    let opt = &scenario.optical;
    let bh = Backhaul::new(pos, &scenario.atmosphere, &opt.pointing);
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = block_rng(seed, b);
            let count = BLOCK.min(n - b * BLOCK);
            (0..count)
                .map(|_| {
                    let u_r = open_uniform(&mut rng);
                    let u_s = open_uniform(&mut rng);
                    gain_from_uniforms(&bh, &opt.pointing, pos, &opt.scintillation, opt.fading, u_r, u_s)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between a sample and a reference CDF.
/// Sorts `samples` in place.
pub fn ks_distance<F: FnMut(f64) -> f64>(samples: &mut [f64], mut cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}
