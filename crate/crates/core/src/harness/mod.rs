//! Scenario suites, randomized sweeps, reports and CSV export.

pub mod config;
pub mod export;
pub mod suite;

pub use config::{AnalyticSolution, CheckSpec, Expectation, PotentialSpec, Scenario, SuiteConfig};
pub use export::{write_curve_csv, write_prufer_csv, write_trace_csv};
pub use suite::{
    default_energies, random_sweep, run_scenario, run_suite, run_suite_path, scenario_trace, sweep_scenarios,
    FamilyKind, ScenarioReport, Status, SuiteReport,
};
