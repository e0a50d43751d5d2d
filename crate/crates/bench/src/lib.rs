//! Shared fixtures for the benchmarks.

use uavrelay_core::{FadingMode, Scenario, UavPosition};

/// Inside the cloud, above the sensor field.
pub fn reference_position() -> UavPosition {
    UavPosition::new(900.0, 1000.0, 800.0).expect("valid position")
}

pub fn scenario(fading: FadingMode) -> Scenario {
    let mut s = Scenario::default();
    s.optical.fading = fading;
    s
}

/// Small optimizer grid so one solve fits in a benchmark iteration.
pub fn quick_scenario() -> Scenario {
    let mut s = scenario(FadingMode::Pointing);
    s.optimizer.coarse_grid = [8, 8, 16];
    s.optimizer.starts = 4;
    s
}
