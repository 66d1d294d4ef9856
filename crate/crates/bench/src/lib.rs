//! Fixtures shared by the benchmarks.

use msp_core::experiments::lambda_grid;
use msp_core::simgen::gen_scenario;
use msp_core::{standardize, Scenario, ScenarioConfig, StandardizedDesign};
use ndarray::Array1;

pub const SEED: u64 = 2024;

pub struct Fixture {
    pub design: StandardizedDesign,
    pub y: Array1<f64>,
    pub grid: Vec<f64>,
}

/// Standardized scenario draw with its default penalty grid.
pub fn fixture(scenario: Scenario, n: usize, p: usize, grid_size: usize) -> Fixture {
    let data = gen_scenario(&ScenarioConfig::new(scenario, n, p, SEED)).expect("valid scenario");
    let design = standardize(&data, false).expect("simulated columns are nonconstant");
    let y = design.response().to_owned();
    let grid = lambda_grid(&design, y.view(), grid_size).expect("nonzero response");
    Fixture { design, y, grid }
}
