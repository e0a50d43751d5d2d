//! UAV → ground-station optical channel.
//!
//! The backhaul gain is the product `h = h_p · h_s · h_a · h_c` of a
//! pointing-error factor, a scintillation factor and two deterministic
//! Beer–Lambert attenuations (cloud and clear air). The ground station sits
//! at the origin; the UAV at `(x, y, z)`.
//!
//! Everything that depends on the UAV position but not on the random gain
//! is gathered in [`Backhaul`] so that densities and capacity integrals can
//! be evaluated repeatedly at one position without recomputing geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, Tolerance};

/// UAV location in metres, ground station at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavPosition {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UavPosition {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::invalid("position", "coordinates must be finite"));
        }
        if z <= 0.0 {
            return Err(Error::invalid(
                "position.z",
                format!("altitude must be positive, got {z}"),
            ));
        }
        Ok(UavPosition { x, y, z })
    }

    pub fn slant_squared(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn slant_range(&self) -> f64 {
        self.slant_squared().sqrt()
    }
}

/// Cloud/dirt layer geometry and extinction coefficients.
///
/// `laser_*` coefficients attenuate the backhaul beam, `solar_*` the
/// sunlight reaching the panels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Atmosphere {
    /// Z_c, metres.
    pub cloud_thickness: f64,
    /// Z_d, height of the cloud base above ground, metres.
    pub cloud_base: f64,
    /// ψ_a, per metre.
    pub laser_ext_air: f64,
    /// ψ_c, per metre.
    pub laser_ext_cloud: f64,
    /// β_c, per metre.
    pub solar_ext_cloud: f64,
    /// β_a, per metre.
    pub solar_ext_air: f64,
}

impl Default for Atmosphere {
    fn default() -> Self {
        Atmosphere {
            cloud_thickness: 500.0,
            cloud_base: 500.0,
            laser_ext_air: 0.001,
            laser_ext_cloud: 0.003,
            solar_ext_cloud: 0.003,
            solar_ext_air: 0.5,
        }
    }
}

impl Atmosphere {
    pub fn cloud_top(&self) -> f64 {
        self.cloud_thickness + self.cloud_base
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("atmosphere.cloud_thickness", self.cloud_thickness),
            ("atmosphere.cloud_base", self.cloud_base),
            ("atmosphere.laser_ext_air", self.laser_ext_air),
            ("atmosphere.laser_ext_cloud", self.laser_ext_cloud),
            ("atmosphere.solar_ext_cloud", self.solar_ext_cloud),
            ("atmosphere.solar_ext_air", self.solar_ext_air),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and non-negative, got {value}"),
                ));
            }
        }
        Ok(())
    }
}

/// Split of the slant path into in-cloud and clear-air parts, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegments {
    pub in_cloud: f64,
    pub in_air: f64,
}

/// Length of the UAV→OGS path inside the cloud layer.
///
/// Branch boundaries belong to the upper branch: `z >= Z_c + Z_d` is above
/// the cloud and `z >= Z_d` is inside it. Both boundaries are continuity
/// points, so the choice only matters for exact floating-point ties.
pub fn cloud_path_length(pos: &UavPosition, atm: &Atmosphere) -> PathSegments {
    let slant = pos.slant_range();
    let z = pos.z;
    let in_cloud = if z >= atm.cloud_top() {
        atm.cloud_thickness / z * slant
    } else if z >= atm.cloud_base {
        (z - atm.cloud_base) / z * slant
    } else {
        0.0
    };
    PathSegments {
        in_cloud,
        in_air: (slant - in_cloud).max(0.0),
    }
}

/// Deterministic attenuation factors `h_c` and `h_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attenuation {
    pub cloud: f64,
    pub air: f64,
}

impl Attenuation {
    pub fn combined(&self) -> f64 {
        self.cloud * self.air
    }
}

pub fn attenuation_gains(seg: &PathSegments, atm: &Atmosphere) -> Attenuation {
    Attenuation {
        cloud: (-atm.laser_ext_cloud * seg.in_cloud).exp(),
        air: (-atm.laser_ext_air * seg.in_air).exp(),
    }
}

/// Gaussian-beam pointing-error model with Rayleigh radial jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointingErrorModel {
    /// a_d, receiver telescope radius in metres.
    pub aperture_radius: f64,
    /// θ, angular beamwidth in radians.
    pub beamwidth: f64,
    /// σ, angular jitter standard deviation in radians.
    pub jitter: f64,
}

impl Default for PointingErrorModel {
    fn default() -> Self {
        PointingErrorModel {
            aperture_radius: 0.5,
            beamwidth: 1e-2,
            jitter: 1e-2,
        }
    }
}

impl PointingErrorModel {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("optical.aperture_radius", self.aperture_radius),
            ("optical.beamwidth", self.beamwidth),
            ("optical.jitter", self.jitter),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    /// θ²/σ², the power-law exponent of the gain distribution.
    pub fn shape(&self) -> f64 {
        let r = self.beamwidth / self.jitter;
        r * r
    }

    /// Peak gain `B = a_d² / (2 θ² (x² + y² + z²))`.
    pub fn peak_gain(&self, pos: &UavPosition) -> f64 {
        self.aperture_radius * self.aperture_radius / (2.0 * self.beamwidth * self.beamwidth * pos.slant_squared())
    }

    /// Φ, the density normaliser on `[0, B)`.
    pub fn normalization(&self, pos: &UavPosition) -> f64 {
        let k = self.shape();
        k * self.peak_gain(pos).powf(-k)
    }

    /// `f(h) = Φ h^{(θ²−σ²)/σ²}` on `[0, B)`.
    pub fn pdf(&self, h: f64, pos: &UavPosition) -> f64 {
        let b = self.peak_gain(pos);
        if !(0.0..b).contains(&h) {
            return 0.0;
        }
        let k = self.shape();
        if h == 0.0 {
            return if k > 1.0 {
                0.0
            } else if k == 1.0 {
                1.0 / b
            } else {
                f64::INFINITY
            };
        }
        k / b * (h / b).powf(k - 1.0)
    }

    /// Instantaneous gain for a radial beam offset `r` metres at the receiver.
    pub fn gain_at_offset(&self, r: f64, pos: &UavPosition) -> f64 {
        let spread = 2.0 * self.beamwidth * self.beamwidth * pos.slant_squared();
        self.peak_gain(pos) * (-(r * r) / spread).exp()
    }
}

/// Exponentiated-Weibull scintillation `(a, b, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScintillationModel {
    pub shape_a: f64,
    pub shape_b: f64,
    pub scale: f64,
}

/// Named turbulence presets. These are configuration defaults, not fitted
/// values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurbulencePreset {
    Weak,
    Moderate,
    Strong,
}

impl TurbulencePreset {
    pub const ALL: [TurbulencePreset; 3] = [
        TurbulencePreset::Weak,
        TurbulencePreset::Moderate,
        TurbulencePreset::Strong,
    ];

    pub fn model(self) -> ScintillationModel {
        match self {
            TurbulencePreset::Weak => ScintillationModel::new_unchecked(4.0, 2.5, 0.8),
            TurbulencePreset::Moderate => ScintillationModel::new_unchecked(2.5, 1.5, 0.9),
            TurbulencePreset::Strong => ScintillationModel::new_unchecked(1.5, 1.0, 1.0),
        }
    }
}

impl Default for ScintillationModel {
    fn default() -> Self {
        TurbulencePreset::Moderate.model()
    }
}

/// Quantile used to truncate the scintillation support in capacity integrals.
pub const SCINTILLATION_TAIL: f64 = 1e-9;

impl ScintillationModel {
    pub fn new(shape_a: f64, shape_b: f64, scale: f64) -> Result<Self> {
        let m = ScintillationModel::new_unchecked(shape_a, shape_b, scale);
        m.validate()?;
        Ok(m)
    }

    const fn new_unchecked(shape_a: f64, shape_b: f64, scale: f64) -> Self {
        ScintillationModel {
            shape_a,
            shape_b,
            scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("scintillation.shape_a", self.shape_a),
            ("scintillation.shape_b", self.shape_b),
            ("scintillation.scale", self.scale),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    pub fn pdf(&self, h: f64) -> f64 {
        let (a, b, eta) = (self.shape_a, self.shape_b, self.scale);
        if h < 0.0 {
            return 0.0;
        }
        if h == 0.0 {
            // limit of a b / η (h/η)^{ab-1}
            let e = a * b - 1.0;
            return if e > 0.0 {
                0.0
            } else if e == 0.0 {
                a * b / eta
            } else {
                f64::INFINITY
            };
        }
        let t = h / eta;
        let tb = t.powf(b);
        if tb > 745.0 {
            return 0.0;
        }
        let log_f = (a * b / eta).ln() + (b - 1.0) * t.ln() - tb + (a - 1.0) * (-(-tb).exp_m1()).ln();
        log_f.exp()
    }

    /// `F(h) = (1 − e^{−(h/η)^b})^a`.
    pub fn cdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let tb = (h / self.scale).powf(self.shape_b);
        (-(-tb).exp_m1()).powf(self.shape_a)
    }

    /// Survival function `1 − F(h)`, accurate in the upper tail.
    pub fn sf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 1.0;
        }
        let tb = (h / self.scale).powf(self.shape_b);
        // 1 - (1 - e^{-tb})^a = -expm1(a * ln1p(-e^{-tb}))
        -(self.shape_a * (-(-tb).exp()).ln_1p()).exp_m1()
    }

    /// `h = η (−ln(1 − u^{1/a}))^{1/b}` for `u ∈ (0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::invalid("u", format!("probability must lie in (0, 1), got {u}")));
        }
        Ok(self.quantile(u))
    }

    fn quantile(&self, u: f64) -> f64 {
        let v = u.powf(1.0 / self.shape_a);
        self.scale * (-(-v).ln_1p()).powf(1.0 / self.shape_b)
    }

    /// Quantile of the upper tail: the `h` with `1 − F(h) = tail`.
    pub fn upper_quantile(&self, tail: f64) -> f64 {
        // u^{1/a} = (1 - tail)^{1/a} = exp(ln1p(-tail)/a); 1 - that = -expm1(...)
        let one_minus_v = -((-tail).ln_1p() / self.shape_a).exp_m1();
        self.scale * (-one_minus_v.ln()).powf(1.0 / self.shape_b)
    }

    /// Quantiles used as quadrature break points.
    pub(crate) fn break_quantiles(&self) -> Vec<f64> {
        let mut q: Vec<f64> = [1e-9, 1e-6, 1e-3, 0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98]
            .iter()
            .map(|&u| self.quantile(u))
            .collect();
        q.extend([1e-3, 1e-6, SCINTILLATION_TAIL].iter().map(|&t| self.upper_quantile(t)));
        q
    }
}

/// Which random factors enter the backhaul gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FadingMode {
    /// `h = h_p h_a h_c`.
    Pointing,
    /// `h = h_p h_s h_a h_c`.
    #[default]
    Composite,
}

/// Position-dependent constants of the optical backhaul.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backhaul {
    pub segments: PathSegments,
    pub attenuation: Attenuation,
    /// Pointing-error peak gain `B`.
    pub peak: f64,
    /// θ²/σ².
    pub shape: f64,
}

impl Backhaul {
    pub fn new(pos: &UavPosition, atm: &Atmosphere, pe: &PointingErrorModel) -> Self {
        let segments = cloud_path_length(pos, atm);
        Backhaul {
            segments,
            attenuation: attenuation_gains(&segments, atm),
            peak: pe.peak_gain(pos),
            shape: pe.shape(),
        }
    }

    /// Upper end of the pointing-only gain support, `B h_a h_c`.
    pub fn support(&self) -> f64 {
        self.peak * self.attenuation.combined()
    }

    /// Density of `h_p h_a h_c`.
    pub fn pointing_only_pdf(&self, h: f64) -> f64 {
        let s = self.support();
        if !(0.0..s).contains(&h) {
            return 0.0;
        }
        let k = self.shape;
        if h == 0.0 {
            return if k > 1.0 {
                0.0
            } else if k == 1.0 {
                1.0 / s
            } else {
                f64::INFINITY
            };
        }
        k / s * (h / s).powf(k - 1.0)
    }

    pub fn pointing_only_cdf(&self, h: f64) -> f64 {
        let s = self.support();
        if h <= 0.0 {
            0.0
        } else if h >= s {
            1.0
        } else {
            (h / s).powf(self.shape)
        }
    }

    /// Break points in the normalised pointing variable `v = h_p / B` for a
    /// product evaluated at normalised gain `w = h / (B h_a h_c)`.
    fn product_breaks(&self, w: f64, sc: &ScintillationModel) -> Vec<f64> {
        let mut pts = vec![0.0, 1.0];
        pts.extend(
            sc.break_quantiles()
                .into_iter()
                .map(|q| w / q)
                .filter(|&v| v > 0.0 && v < 1.0),
        );
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Density of the composite gain `h_p h_s h_a h_c`, by quadrature of the
    /// product-distribution integral over the pointing factor.
    pub fn composite_pdf(&self, h: f64, sc: &ScintillationModel) -> Result<f64> {
        if h <= 0.0 {
            return Ok(0.0);
        }
        let s = self.support();
        let w = h / s;
        let k = self.shape;
        let breaks = self.product_breaks(w, sc);
        let r = integrate_with_breaks(
            |v| {
                if v <= 0.0 {
                    return 0.0;
                }
                let f = sc.pdf(w / v);
                if f == 0.0 {
                    0.0
                } else {
                    k * v.powf(k - 2.0) * f
                }
            },
            &breaks,
            Tolerance::new(1e-14, 1e-8, 20_000),
        )?;
        Ok(r.value / s)
    }

    /// CDF of the composite gain, `∫ f_V(v) F_S(w / v) dv`.
    pub fn composite_cdf(&self, h: f64, sc: &ScintillationModel) -> Result<f64> {
        if h <= 0.0 {
            return Ok(0.0);
        }
        let w = h / self.support();
        let k = self.shape;
        let breaks = self.product_breaks(w, sc);
        let r = integrate_with_breaks(
            |v| {
                if v <= 0.0 {
                    return 0.0;
                }
                k * v.powf(k - 1.0) * sc.cdf(w / v)
            },
            &breaks,
            Tolerance::new(1e-14, 1e-10, 20_000),
        )?;
        Ok(r.value.min(1.0))
    }
}

pub fn pointing_pdf(h: f64, pos: &UavPosition, model: &PointingErrorModel) -> f64 {
    model.pdf(h, pos)
}

pub fn scintillation_pdf(h: f64, model: &ScintillationModel) -> f64 {
    model.pdf(h)
}

pub fn scintillation_inverse_cdf(u: f64, model: &ScintillationModel) -> Result<f64> {
    model.inverse_cdf(u)
}

pub fn pointing_only_pdf(h: f64, pos: &UavPosition, atm: &Atmosphere, pe: &PointingErrorModel) -> f64 {
    Backhaul::new(pos, atm, pe).pointing_only_pdf(h)
}

pub fn composite_pdf(
    h: f64,
    pos: &UavPosition,
    atm: &Atmosphere,
    pe: &PointingErrorModel,
    sc: &ScintillationModel,
) -> Result<f64> {
    Backhaul::new(pos, atm, pe).composite_pdf(h, sc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity};
    use approx::assert_relative_eq;

    fn atm(zc: f64, zd: f64) -> Atmosphere {
        Atmosphere {
            cloud_thickness: zc,
            cloud_base: zd,
            ..Atmosphere::default()
        }
    }

    #[test]
    fn vertical_path_above_cloud() {
        let p = UavPosition::new(0.0, 0.0, 2000.0).unwrap();
        let seg = cloud_path_length(&p, &atm(500.0, 500.0));
        assert_relative_eq!(seg.in_cloud, 500.0, epsilon = 1e-12);
        assert_relative_eq!(seg.in_air, 1500.0, epsilon = 1e-12);
    }

    #[test]
    fn below_cloud_has_no_cloud_path() {
        let p = UavPosition::new(0.0, 0.0, 400.0).unwrap();
        let seg = cloud_path_length(&p, &atm(500.0, 500.0));
        assert_eq!(seg.in_cloud, 0.0);
        assert_relative_eq!(seg.in_air, 400.0);
    }

    #[test]
    fn slanted_path_inside_cloud() {
        let p = UavPosition::new(300.0, 400.0, 750.0).unwrap();
        let seg = cloud_path_length(&p, &atm(500.0, 500.0));
        let slant = (300.0f64 * 300.0 + 400.0 * 400.0 + 750.0 * 750.0).sqrt();
        let expected = 250.0 / 750.0 * slant;
        assert_relative_eq!(seg.in_cloud, expected, max_relative = 1e-14);
        assert_relative_eq!(seg.in_cloud, 300.46, epsilon = 0.01);
        assert_relative_eq!(seg.in_cloud + seg.in_air, slant, max_relative = 1e-14);
    }

    #[test]
    fn path_is_continuous_at_layer_boundaries() {
        let a = atm(500.0, 500.0);
        for boundary in [500.0, 1000.0] {
            let lo = cloud_path_length(&UavPosition::new(120.0, -80.0, boundary - 1e-9).unwrap(), &a);
            let at = cloud_path_length(&UavPosition::new(120.0, -80.0, boundary).unwrap(), &a);
            assert!((lo.in_cloud - at.in_cloud).abs() < 1e-6, "jump at {boundary}");
        }
    }

    #[test]
    fn attenuation_examples() {
        let a = Atmosphere {
            laser_ext_cloud: 0.003,
            laser_ext_air: 0.001,
            ..Atmosphere::default()
        };
        let g = attenuation_gains(
            &PathSegments {
                in_cloud: 0.0,
                in_air: 1500.0,
            },
            &a,
        );
        assert_eq!(g.cloud, 1.0);
        assert_relative_eq!(g.air, (-1.5f64).exp(), max_relative = 1e-15);
        let g = attenuation_gains(
            &PathSegments {
                in_cloud: 500.0,
                in_air: 0.0,
            },
            &a,
        );
        assert_relative_eq!(g.cloud, 0.2231, epsilon = 1e-4);
    }

    #[test]
    fn peak_gain_table_values() {
        let pe = PointingErrorModel::default();
        let p = UavPosition::new(0.0, 0.0, 1000.0).unwrap();
        assert_relative_eq!(pe.peak_gain(&p), 1.25e-3, max_relative = 1e-14);
        assert_eq!(pe.pdf(1.25e-3, &p), 0.0);
        assert_eq!(pe.pdf(2e-3, &p), 0.0);
    }

    #[test]
    fn pointing_pdf_normalizes() {
        let p = UavPosition::new(300.0, 100.0, 900.0).unwrap();
        for jitter in [1e-2, 0.7e-2, 1.3e-2] {
            let pe = PointingErrorModel {
                jitter,
                ..Default::default()
            };
            let b = pe.peak_gain(&p);
            let r = integrate(|h| pe.pdf(h, &p), 0.0, b, Tolerance::new(0.0, 1e-12, 50_000)).unwrap();
            assert_relative_eq!(r.value, 1.0, epsilon = 1e-6);
            // Φ agrees with the normaliser built into pdf
            assert_relative_eq!(
                pe.pdf(0.5 * b, &p),
                pe.normalization(&p) * (0.5 * b).powf(pe.shape() - 1.0),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn ew_reduces_to_weibull() {
        let m = ScintillationModel::new(1.0, 1.7, 0.8).unwrap();
        for h in [0.1, 0.5, 1.0, 2.3] {
            let t: f64 = h / 0.8;
            let weibull = 1.7 / 0.8 * t.powf(0.7) * (-t.powf(1.7)).exp();
            assert_relative_eq!(m.pdf(h), weibull, max_relative = 1e-13);
        }
        let exp = ScintillationModel::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(exp.pdf(0.0), 1.0);
        assert_relative_eq!(exp.pdf(1e-12), 1.0, epsilon = 1e-11);
    }

    #[test]
    fn ew_normalizes() {
        let m = ScintillationModel::new(2.0, 1.5, 1.0).unwrap();
        let r = integrate_to_infinity(|h| m.pdf(h), 0.0, Tolerance::new(1e-14, 1e-12, 50_000)).unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn ew_inverse_cdf_examples() {
        let exp = ScintillationModel::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            exp.inverse_cdf(0.5).unwrap(),
            std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        let m = ScintillationModel::new(2.0, 1.0, 1.0).unwrap();
        let h = m.inverse_cdf(0.25).unwrap();
        assert_relative_eq!(h, std::f64::consts::LN_2, max_relative = 1e-15);
        assert!((m.cdf(h) - 0.25).abs() < 1e-12);
        assert!(m.inverse_cdf(1e-300).unwrap() < 1e-100);
        assert!(m.inverse_cdf(0.0).is_err());
        assert!(m.inverse_cdf(1.0).is_err());
        assert!(m.inverse_cdf(f64::NAN).is_err());
    }

    #[test]
    fn upper_quantile_matches_survival() {
        for preset in TurbulencePreset::ALL {
            let m = preset.model();
            for tail in [1e-3, 1e-6, 1e-9] {
                let q = m.upper_quantile(tail);
                assert_relative_eq!(m.sf(q), tail, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn pointing_only_under_theta_sq_eq_two_sigma_sq() {
        let pe = PointingErrorModel {
            beamwidth: 2f64.sqrt() * 1e-2,
            ..Default::default()
        };
        let p = UavPosition::new(200.0, 300.0, 1200.0).unwrap();
        let bh = Backhaul::new(&p, &Atmosphere::default(), &pe);
        let s = bh.support();
        for frac in [0.1, 0.5, 0.9] {
            let h = frac * s;
            assert_relative_eq!(bh.pointing_only_pdf(h), 2.0 * h / (s * s), max_relative = 1e-12);
        }
    }

    #[test]
    fn pointing_only_without_attenuation_is_pointing_pdf() {
        let a = Atmosphere {
            laser_ext_air: 0.0,
            laser_ext_cloud: 0.0,
            ..Atmosphere::default()
        };
        let pe = PointingErrorModel {
            jitter: 0.8e-2,
            ..Default::default()
        };
        let p = UavPosition::new(200.0, 300.0, 1200.0).unwrap();
        let b = pe.peak_gain(&p);
        for frac in [0.05, 0.4, 0.95] {
            assert_relative_eq!(
                pointing_only_pdf(frac * b, &p, &a, &pe),
                pointing_pdf(frac * b, &p, &pe),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn pointing_only_normalizes() {
        let pe = PointingErrorModel {
            jitter: 0.8e-2,
            ..Default::default()
        };
        let p = UavPosition::new(700.0, 300.0, 800.0).unwrap();
        let bh = Backhaul::new(&p, &Atmosphere::default(), &pe);
        let r = integrate(
            |h| bh.pointing_only_pdf(h),
            0.0,
            bh.support(),
            Tolerance::new(0.0, 1e-13, 50_000),
        )
        .unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn composite_cdf_is_integral_of_pdf() {
        let p = UavPosition::new(700.0, 300.0, 800.0).unwrap();
        let bh = Backhaul::new(&p, &Atmosphere::default(), &PointingErrorModel::default());
        let sc = TurbulencePreset::Strong.model();
        let s = bh.support();
        for w in [0.2, 0.7, 1.5] {
            let h = w * s;
            let direct = integrate(
                |t| bh.composite_pdf(t, &sc).unwrap(),
                0.0,
                h,
                Tolerance::new(1e-12, 1e-9, 50_000),
            )
            .unwrap();
            assert_relative_eq!(direct.value, bh.composite_cdf(h, &sc).unwrap(), epsilon = 1e-7);
        }
    }

    #[test]
    fn composite_with_sharp_scintillation_is_scaled_pointing() {
        let p = UavPosition::new(100.0, 100.0, 900.0).unwrap();
        let bh = Backhaul::new(&p, &Atmosphere::default(), &PointingErrorModel::default());
        let s = bh.support();
        // b = 200: E[1/S] = Γ(1 − 1/200) ≈ 1.0029, so the interior density sits ~0.3% high
        let sc = ScintillationModel::new(1.0, 200.0, 1.0).unwrap();
        for w in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let c = bh.composite_pdf(w * s, &sc).unwrap() * s;
            let po = bh.pointing_only_pdf(w * s) * s;
            assert!((c - po).abs() < 5e-3, "w={w}: {c} vs {po}");
        }
    }
}
