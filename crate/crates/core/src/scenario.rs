//! Scenario files, digests, and result records.
//!
//! A scenario is a TOML document with one table per component. Every key is
//! optional; missing keys take the default parameter set, and unknown keys
//! are rejected.
//!
//! ```toml
//! [sensors]
//! x = [0.0, 400.0]
//! y = [0.0, 0.0]
//! power = [1.0, 3.0]
//!
//! [atmosphere]
//! laser_ext_cloud = 0.005
//!
//! [relay]
//! scheme = "df"
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capacity::{OpticalLink, RelayConfig};
use crate::channel::Atmosphere;
use crate::error::{Error, Result};
use crate::montecarlo::McSettings;
use crate::opt3d::OptimizerSettings;
use crate::solar::SolarPlatform;
use crate::uplink::SensorField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub sensors: SensorField,
    pub atmosphere: Atmosphere,
    pub optical: OpticalLink,
    pub solar: SolarPlatform,
    pub relay: RelayConfig,
    pub optimizer: OptimizerSettings,
    pub mc: McSettings,
}

impl Scenario {
    /// Check every section plus cross-section consistency.
    pub fn validate(&self) -> Result<()> {
        self.sensors.validate()?;
        self.atmosphere.validate()?;
        self.optical.validate()?;
        self.solar.validate()?;
        self.relay.validate()?;
        self.optimizer.validate()?;
        self.mc.validate()?;
        let (x0, x1, y0, y1) = self.sensors.bounding_box();
        let d = self.optimizer.box_size;
        if x0 < 0.0 || y0 < 0.0 || x1 > d || y1 > d {
            return Err(Error::invalid(
                "optimizer.box_size",
                format!("search square [0, {d}]² does not cover the sensors ([{x0}, {x1}] × [{y0}, {y1}])"),
            ));
        }
        Ok(())
    }

    /// Parse and validate a TOML scenario.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    ///
    /// Field order is fixed by the type, so the digest ignores key order and
    /// formatting in the source file.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serialises to JSON");
        let hash = Sha256::digest(&json);
        let mut out = String::with_capacity(64);
        for b in hash {
            let _ = write!(out, "{b:02x}");
        }
        out
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Scenario::from_toml_str(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Numeric table written as CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// CSV with a header line. Numbers use the shortest representation that
    /// parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}

/// Output of one CLI command, tagged with the scenario it came from.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub scenario_digest: String,
    pub command: String,
    pub outputs: Table,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: u64,
    pub library_version: String,
}

impl ResultRecord {
    pub fn new(scenario: &Scenario, command: impl Into<String>, outputs: Table, started_at: u64) -> Self {
        ResultRecord {
            scenario_digest: scenario.digest(),
            command: command.into(),
            outputs,
            started_at,
            finished_at: unix_now(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::RelayScheme;
    use crate::channel::FadingMode;
    use crate::solar::HoverPower;

    #[test]
    fn empty_file_is_default_scenario() {
        let s = Scenario::from_toml_str("").unwrap();
        assert_eq!(s, Scenario::default());
        assert_eq!(s.optical.pointing.aperture_radius, 0.5);
        assert_eq!(s.optical.pointing.beamwidth, 1e-2);
        assert_eq!(s.optical.pointing.jitter, 1e-2);
        assert_eq!(s.atmosphere.cloud_thickness, 500.0);
        assert_eq!(s.atmosphere.cloud_base, 500.0);
        assert_eq!(s.solar.hover_power, HoverPower::Fixed(100.0));
        assert_eq!(s.sensors.noise, 1e-6);
        assert_eq!(s.optical.noise, 1e-10);
    }

    #[test]
    fn partial_sections_merge_with_defaults() {
        let s = Scenario::from_toml_str(
            "[atmosphere]\nlaser_ext_cloud = 0.005\n[relay]\nscheme = \"df\"\n[optical]\nfading = \"pointing\"\n",
        )
        .unwrap();
        assert_eq!(s.atmosphere.laser_ext_cloud, 0.005);
        assert_eq!(s.atmosphere.cloud_base, 500.0);
        assert_eq!(s.relay.scheme, RelayScheme::Df);
        assert_eq!(s.optical.fading, FadingMode::Pointing);
    }

    #[test]
    fn rotor_hover_model_parses() {
        let s = Scenario::from_toml_str("[solar]\nhover_power = \"rotor\"\n").unwrap();
        assert_eq!(s.solar.hover_power, HoverPower::ROTOR);
        let back = Scenario::from_toml_str(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn negative_panel_area_names_field() {
        let err = Scenario::from_toml_str("[solar]\npanel_area = -2.0\n").unwrap_err();
        match err {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "solar.panel_area"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let err = Scenario::from_toml_str("[atmosphere]\ncloud_hieght = 3.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse(_)));
        assert!(msg.contains("cloud_hieght"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
        assert!(Scenario::from_toml_str("[bogus]\n").is_err());
    }

    #[test]
    fn sensors_outside_box_rejected() {
        let err = Scenario::from_toml_str("[optimizer]\nbox_size = 1000.0\n").unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { ref field, .. } if field == "optimizer.box_size"));
    }

    #[test]
    fn round_trip_preserves_digest() {
        let mut s = Scenario::default();
        s.atmosphere.laser_ext_cloud = 0.0071;
        s.optical.noise = 3.3e-11;
        let text = s.to_toml().unwrap();
        let back = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(back.digest(), s.digest());
    }

    #[test]
    fn digest_ignores_key_order_and_tracks_values() {
        let a = Scenario::from_toml_str("[atmosphere]\ncloud_base = 400.0\ncloud_thickness = 600.0\n").unwrap();
        let b = Scenario::from_toml_str("[atmosphere]\ncloud_thickness = 600.0\n\n# comment\ncloud_base = 400.0\n")
            .unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = Scenario::from_toml_str("[atmosphere]\ncloud_thickness = 600.0\ncloud_base = 401.0\n").unwrap();
        assert_ne!(a.digest(), c.digest());
        // spelling out a default does not change the scenario
        let d = Scenario::from_toml_str("[optical]\nnoise = 1e-10\n").unwrap();
        assert_eq!(d.digest(), Scenario::default().digest());
    }

    #[test]
    fn csv_numbers_round_trip() {
        let mut t = Table::new(["a", "b"]);
        let vals = [0.1 + 0.2, 1e-300, 123456.789, -0.0];
        t.push(vals[..2].to_vec());
        t.push(vals[2..].to_vec());
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("a,b"));
        let parsed: Vec<f64> = lines
            .flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect();
        for (p, v) in parsed.iter().zip(vals) {
            assert_eq!(p.to_bits(), v.to_bits());
        }
    }
}
