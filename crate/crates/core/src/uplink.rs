//! Sensor → UAV RF uplink under line-of-sight path loss.

use serde::{Deserialize, Serialize};

use crate::channel::UavPosition;
use crate::error::{Error, Result};

/// Ground sensors with their transmit powers and the shared link constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorField {
    /// x_m, metres.
    pub x: Vec<f64>,
    /// y_m, metres.
    pub y: Vec<f64>,
    /// P_m, watts.
    pub power: Vec<f64>,
    /// β_0, channel power gain at 1 m.
    pub reference_gain: f64,
    /// σ_0², watts.
    pub noise: f64,
}

impl Default for SensorField {
    fn default() -> Self {
        SensorField {
            x: vec![
                700.0, 800.0, 900.0, 1000.0, 1200.0, 1400.0, 1500.0, 1600.0, 1800.0, 2000.0,
            ],
            y: vec![
                800.0, 900.0, 1000.0, 1200.0, 1300.0, 1500.0, 1600.0, 1700.0, 1900.0, 2000.0,
            ],
            power: (1..=10).map(|i| 0.5 * i as f64).collect(),
            reference_gain: 0.4,
            noise: 1e-6,
        }
    }
}

impl SensorField {
    pub fn new(x: Vec<f64>, y: Vec<f64>, power: Vec<f64>, reference_gain: f64, noise: f64) -> Result<Self> {
        let f = SensorField {
            x,
            y,
            power,
            reference_gain,
            noise,
        };
        f.validate()?;
        Ok(f)
    }

    /// Sensors on the x-axis.
    pub fn on_line(x: Vec<f64>, power: Vec<f64>, reference_gain: f64, noise: f64) -> Result<Self> {
        let y = vec![0.0; x.len()];
        SensorField::new(x, y, power, reference_gain, noise)
    }

    pub fn validate(&self) -> Result<()> {
        if self.power.is_empty() {
            return Err(Error::invalid("sensors.power", "at least one sensor is required"));
        }
        if self.x.len() != self.power.len() || self.y.len() != self.power.len() {
            return Err(Error::invalid(
                "sensors",
                format!(
                    "x, y and power must have equal lengths (got {}, {}, {})",
                    self.x.len(),
                    self.y.len(),
                    self.power.len()
                ),
            ));
        }
        if let Some(p) = self.power.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::invalid(
                "sensors.power",
                format!("powers must be positive, got {p}"),
            ));
        }
        if self.x.iter().chain(&self.y).any(|c| !c.is_finite()) {
            return Err(Error::invalid("sensors", "coordinates must be finite"));
        }
        if !(self.reference_gain.is_finite() && self.reference_gain > 0.0) {
            return Err(Error::invalid("sensors.reference_gain", "must be positive"));
        }
        if !(self.noise.is_finite() && self.noise > 0.0) {
            return Err(Error::invalid("sensors.noise", "must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Squared UAV–sensor distance `z² + (x−x_m)² + (y−y_m)²`.
    #[inline]
    pub(crate) fn dist_sq(&self, pos: &UavPosition, m: usize) -> f64 {
        let dx = pos.x - self.x[m];
        let dy = pos.y - self.y[m];
        pos.z * pos.z + dx * dx + dy * dy
    }

    /// Per-sensor SNR λ_m at the UAV.
    #[inline]
    pub(crate) fn snr(&self, pos: &UavPosition, m: usize) -> f64 {
        self.power[m] * self.reference_gain / (self.noise * self.dist_sq(pos, m))
    }

    /// Smallest axis-aligned box containing every sensor: `(x_min, x_max, y_min, y_max)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let fold = |v: &[f64]| {
            v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                (lo.min(c), hi.max(c))
            })
        };
        let (x0, x1) = fold(&self.x);
        let (y0, y1) = fold(&self.y);
        (x0, x1, y0, y1)
    }
}

/// `G_m = β_0 / (z² + (x_m−x)² + (y_m−y)²)`.
pub fn channel_gain(pos: &UavPosition, field: &SensorField, m: usize) -> Result<f64> {
    if m >= field.len() {
        return Err(Error::SensorIndex {
            index: m,
            count: field.len(),
        });
    }
    Ok(field.reference_gain / field.dist_sq(pos, m))
}

/// Shannon rate of sensor `m`, nats/s/Hz.
pub fn sensor_capacity(pos: &UavPosition, field: &SensorField, m: usize) -> Result<f64> {
    channel_gain(pos, field, m)?;
    Ok(field.snr(pos, m).ln_1p())
}

/// Aggregate sum rate `C_s = Σ_m ln(1 + P_m G_m / σ_0²)`.
pub fn sum_rate(pos: &UavPosition, field: &SensorField) -> f64 {
    (0..field.len()).map(|m| field.snr(pos, m).ln_1p()).sum()
}

/// `Π_m (1 + λ_m) − 1`, computed without forming the product directly.
pub(crate) fn sum_rate_snr(pos: &UavPosition, field: &SensorField) -> f64 {
    sum_rate(pos, field).exp_m1()
}

/// Aggregate amplitude and noise of the signal arriving at an AF relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UplinkStats {
    /// S_X = Σ_m √(P_m G_m), root-watts.
    pub amplitude: f64,
    /// σ_s² = M σ_0², watts.
    pub noise: f64,
}

pub fn uplink_stats(pos: &UavPosition, field: &SensorField) -> UplinkStats {
    let amplitude = (0..field.len())
        .map(|m| (field.power[m] * field.reference_gain / field.dist_sq(pos, m)).sqrt())
        .sum();
    UplinkStats {
        amplitude,
        noise: field.len() as f64 * field.noise,
    }
}
