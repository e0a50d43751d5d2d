//! Solar harvesting versus altitude and rotor hover power.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::Atmosphere;
use crate::error::{Error, Result};

/// Photovoltaic platform and airframe parameters.
///
/// `transmittance_ext` (B_0) multiplies `exp(−z/δ)` and is dimensionless in
/// the transmittance expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolarPlatform {
    /// η_p.
    pub photo_eff: f64,
    /// A, m².
    pub panel_area: f64,
    /// G_r, W/m².
    pub solar_const: f64,
    /// A_0.
    pub transmittance_max: f64,
    /// B_0.
    pub transmittance_ext: f64,
    /// δ, metres.
    pub scale_height: f64,
    /// kg, airframe plus panels.
    pub uav_mass: f64,
    pub gravity: f64,
    /// metres.
    pub rotor_radius: f64,
    /// kg/m³.
    pub air_density: f64,
    pub hover_power: HoverPower,
}

/// Hover power source: a fixed wattage, or the rotor-disc model.
///
/// In scenario files this is either a number or the string `"rotor"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HoverPower {
    Fixed(f64),
    Model(RotorModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotorModel {
    Rotor,
}

impl HoverPower {
    pub const ROTOR: HoverPower = HoverPower::Model(RotorModel::Rotor);
}

impl Default for SolarPlatform {
    fn default() -> Self {
        SolarPlatform {
            photo_eff: 0.4,
            panel_area: 2.0,
            solar_const: 1361.0,
            transmittance_max: 0.8978,
            transmittance_ext: 0.2804,
            scale_height: 8000.0,
            uav_mass: 5.0,
            gravity: 9.8,
            rotor_radius: 0.5,
            air_density: 1.225,
            hover_power: HoverPower::Fixed(100.0),
        }
    }
}

impl SolarPlatform {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("solar.photo_eff", self.photo_eff),
            ("solar.panel_area", self.panel_area),
            ("solar.solar_const", self.solar_const),
            ("solar.transmittance_max", self.transmittance_max),
            ("solar.transmittance_ext", self.transmittance_ext),
            ("solar.scale_height", self.scale_height),
            ("solar.uav_mass", self.uav_mass),
            ("solar.gravity", self.gravity),
            ("solar.rotor_radius", self.rotor_radius),
            ("solar.air_density", self.air_density),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        if self.transmittance_max <= self.transmittance_ext {
            return Err(Error::invalid(
                "solar.transmittance_ext",
                "must be below transmittance_max so that transmittance stays positive at ground level",
            ));
        }
        if let HoverPower::Fixed(p) = self.hover_power {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::invalid(
                    "solar.hover_power",
                    format!("must be non-negative, got {p}"),
                ));
            }
        }
        Ok(())
    }

    /// Power reaching the panels outside the atmosphere, `η_p A G_r`.
    fn panel_peak(&self) -> f64 {
        self.photo_eff * self.panel_area * self.solar_const
    }
}

/// Harvested and consumed power at one altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBudget {
    pub harvested: f64,
    pub consumed: f64,
}

impl PowerBudget {
    pub fn new(harvested: f64, consumed: f64) -> Self {
        PowerBudget { harvested, consumed }
    }

    pub fn at(z: f64, platform: &SolarPlatform, atm: &Atmosphere) -> Self {
        PowerBudget {
            harvested: harvested_power(z, platform, atm),
            consumed: hover_power(platform),
        }
    }

    /// Power left for transmission, `P_H − P_0`.
    pub fn net(&self) -> f64 {
        self.harvested - self.consumed
    }
}

/// `α_0(z) = A_0 − B_0 exp(−z/δ)`.
pub fn transmittance(z: f64, platform: &SolarPlatform) -> f64 {
    platform.transmittance_max - platform.transmittance_ext * (-z / platform.scale_height).exp()
}

/// Harvested solar power at altitude `z`, watts.
///
/// Above the cloud only the clear-sky transmittance applies; inside it the
/// sunlight also crosses `Z_c + Z_d − z` metres of cloud; below it, the full
/// cloud and `Z_d − z` metres of dirty air.
pub fn harvested_power(z: f64, platform: &SolarPlatform, atm: &Atmosphere) -> f64 {
    let clear = platform.panel_peak() * transmittance(z, platform);
    let top = atm.cloud_top();
    if z >= top {
        clear
    } else if z >= atm.cloud_base {
        clear * (-atm.solar_ext_cloud * (top - z)).exp()
    } else {
        clear * (-atm.solar_ext_cloud * atm.cloud_thickness).exp() * (-atm.solar_ext_air * (atm.cloud_base - z)).exp()
    }
}

/// Rotor power to hover, `√((m g)³ / (2π r² ρ))`, or the configured fixed value.
pub fn hover_power(platform: &SolarPlatform) -> f64 {
    if let HoverPower::Fixed(p) = platform.hover_power {
        return p;
    }
    let weight = platform.uav_mass * platform.gravity;
    (weight.powi(3) / (2.0 * PI * platform.rotor_radius.powi(2) * platform.air_density)).sqrt()
}

/// Lowest altitude at which the harvest covers the hover power.
///
/// Returns 0 when the constraint never binds. The root is bracketed on
/// `[0, 10 δ]` (widened once to `100 δ`) and bisected until the power
/// mismatch is below `1e−9 P_0` or the bracket is below machine resolution.
pub fn min_altitude(platform: &SolarPlatform, atm: &Atmosphere) -> Result<f64> {
    let p0 = hover_power(platform);
    let f = |z: f64| harvested_power(z, platform, atm) - p0;
    if f(0.0) >= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 10.0 * platform.scale_height;
    if f(hi) <= 0.0 {
        hi = 100.0 * platform.scale_height;
        if f(hi) <= 0.0 {
            let ceiling = platform.panel_peak() * platform.transmittance_max;
            return Err(Error::InfeasibleAltitude(format!(
                "harvest never exceeds hover power: at most {ceiling:.3} W available, {p0:.3} W needed"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.abs() <= 1e-9 * p0 && hi - lo < 1e-3 {
            return Ok(mid);
        }
        if v > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rotor_platform() -> SolarPlatform {
        SolarPlatform {
            hover_power: HoverPower::ROTOR,
            ..SolarPlatform::default()
        }
    }

    #[test]
    fn transmittance_table_values() {
        let p = SolarPlatform::default();
        assert_relative_eq!(transmittance(1e9, &p), 0.8978, max_relative = 1e-15);
        assert_relative_eq!(transmittance(0.0, &p), 0.6174, max_relative = 1e-14);
        let expected = 0.8978 - 0.2804 / std::f64::consts::E;
        assert_relative_eq!(transmittance(8000.0, &p), expected, max_relative = 1e-14);
        assert_relative_eq!(transmittance(8000.0, &p), 0.7946, epsilon = 1e-4);
    }

    #[test]
    fn harvest_at_cloud_top() {
        let p = SolarPlatform::default();
        let a = Atmosphere::default();
        let ph = harvested_power(1000.0, &p, &a);
        assert_relative_eq!(ph, 1088.8 * (0.8978 - 0.2804 * (-0.125f64).exp()), max_relative = 1e-14);
        assert_relative_eq!(ph, 708.1, epsilon = 0.05);
        // the in-cloud formula at the top boundary agrees
        let just_below = harvested_power(1000.0 - 1e-9, &p, &a);
        assert!((ph - just_below).abs() < 1e-6);
    }

    #[test]
    fn harvest_mid_cloud() {
        let p = SolarPlatform::default();
        let a = Atmosphere {
            solar_ext_cloud: 0.02,
            ..Atmosphere::default()
        };
        let clear = p.panel_peak() * transmittance(750.0, &p);
        assert_relative_eq!(
            harvested_power(750.0, &p, &a),
            clear * (-5.0f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn harvest_continuous_and_increasing() {
        let p = SolarPlatform::default();
        let a = Atmosphere {
            solar_ext_cloud: 0.01,
            ..Atmosphere::default()
        };
        let mut prev = harvested_power(1e-3, &p, &a);
        let mut z = 1e-3;
        while z < 20_000.0 {
            z += 0.5;
            let v = harvested_power(z, &p, &a);
            assert!(v > prev, "not increasing at z={z}");
            // relative step bounded by the steepest local rate (β_a = 0.5 per metre)
            assert!(v / prev < (0.5f64 * 0.5).exp() * 1.001, "jump at z={z}");
            prev = v;
        }
        for boundary in [a.cloud_base, a.cloud_top()] {
            let l = harvested_power(boundary - 1e-9, &p, &a);
            let r = harvested_power(boundary, &p, &a);
            assert!((l - r).abs() < 1e-6 * r);
        }
    }

    #[test]
    fn hover_power_rotor_model() {
        let p = rotor_platform();
        let p0 = hover_power(&p);
        assert!((p0 - 247.0).abs() < 1.0, "{p0}");
        let wide = SolarPlatform { rotor_radius: 1.0, ..p };
        assert_relative_eq!(hover_power(&wide), p0 / 2.0, max_relative = 1e-14);
        assert_eq!(hover_power(&SolarPlatform::default()), 100.0);
    }

    #[test]
    fn min_altitude_zero_when_never_binding() {
        let p = SolarPlatform {
            hover_power: HoverPower::Fixed(0.0),
            ..SolarPlatform::default()
        };
        assert_eq!(min_altitude(&p, &Atmosphere::default()).unwrap(), 0.0);

        let clear = Atmosphere {
            solar_ext_cloud: 0.0,
            solar_ext_air: 0.0,
            ..Atmosphere::default()
        };
        // ground-level harvest 1088.8 · 0.6174 ≈ 672 W > 100 W
        assert_eq!(min_altitude(&SolarPlatform::default(), &clear).unwrap(), 0.0);
    }

    #[test]
    fn min_altitude_table_defaults() {
        let p = SolarPlatform::default();
        let a = Atmosphere::default();
        let z0 = min_altitude(&p, &a).unwrap();
        assert!(z0 > 0.0 && z0 < a.cloud_base);
        let p0 = hover_power(&p);
        assert!((harvested_power(z0, &p, &a) - p0).abs() < 1e-6 * p0);
        assert!(harvested_power(z0 - 1e-3, &p, &a) < p0);
        assert!(harvested_power(z0 + 1e-3, &p, &a) > p0);
    }

    #[test]
    fn min_altitude_infeasible() {
        let p = SolarPlatform {
            hover_power: HoverPower::Fixed(5000.0),
            ..SolarPlatform::default()
        };
        assert!(matches!(
            min_altitude(&p, &Atmosphere::default()),
            Err(Error::InfeasibleAltitude(_))
        ));
    }
}
