//! Placement of a solar-powered UAV relay between a field of RF sensors and
//! an optical ground station (OGS) at the origin.
//!
//! The crate models the optical backhaul (pointing error, exponentiated
//! Weibull scintillation, cloud and air attenuation), the RF uplink, the
//! solar power budget, and the end-to-end amplify-and-forward and
//! decode-and-forward capacities. On top of those it provides 2-D and 3-D
//! position optimisers and a seeded Monte Carlo cross-check.
//!
//! ```
//! use uavrelay_core::{average_capacity, Scenario, UavPosition};
//!
//! let scenario = Scenario::default();
//! let pos = UavPosition::new(900.0, 1000.0, 1200.0)?;
//! let c = average_capacity(&pos, &scenario)?;
//! assert!(c.value > 0.0);
//! # Ok::<(), uavrelay_core::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod opt2d;
pub mod opt3d;
pub mod quadrature;
pub mod scenario;
pub mod solar;
pub mod uplink;

pub use capacity::{
    af_average_capacity, average_capacity, df_average_capacity, df_closed_form, CapacityResult, CapacityUnit,
    LinkState, Method, OpticalLink, RelayConfig, RelayScheme,
};
pub use channel::{
    Atmosphere, Backhaul, FadingMode, PointingErrorModel, ScintillationModel, TurbulencePreset, UavPosition,
};
pub use error::{Error, Result};
pub use montecarlo::{mc_capacity, validation_cases, McEstimate, McSettings};
pub use opt3d::{optimize_position, CouplingModel, OptimizationResult, OptimizerSettings};
pub use scenario::{load_scenario, ResultRecord, Scenario, Table};
pub use solar::{min_altitude, HoverPower, PowerBudget, SolarPlatform};
pub use uplink::{SensorField, UplinkStats};
