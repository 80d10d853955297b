//! Property checks mirroring the comparison arguments: slope comparison,
//! enlargement containment, fiber isoperimetry and refinement studies.

mod bundle;
mod containment;
pub mod fuzz;
mod lemma;
mod oracle;
mod scenarios;
mod suite;

pub use bundle::{mc_radii, run_bundle_scenario, BundleScenario, BundleScenarioReport, SymmetralPerimeter, BUNDLE_BASE_CELLS, REFERENCE};
pub use containment::{containment_check, ContainmentReport};
pub use lemma::{check_derivative_comparison, ComparisonVerdict, COMPARISON_TOL};
pub use oracle::{fiber_isoperimetry_oracle, Candidate, OracleOptions, OracleReport};
pub use scenarios::{
    convergence_study, convergence_table, grid_scenario, grid_scenarios, ConvergenceTable, GridScenario, ScenarioRun,
};
pub use suite::{
    case_names, minkowski_levels, rosales_line, run_case, run_suite, tilted_strip, CaseResult, Evidence, Level, Suite,
    SuiteReport, Tolerances,
};
