//! Configuration-driven experiments producing CSV tables.

mod config;
mod runners;
mod setup;
pub mod solutions;
mod table;
mod verify;

pub use config::{parse_number, Beta, ExperimentConfig, ExperimentKind, GeometrySpec, Sweep};
pub use runners::{
    conditioning_points, conditioning_table, convergence_table, observed_rates, run,
    run_conditioning, run_convergence, run_solve, run_stability_sweep, solve_table,
    stability_table, variants, ConditioningRow, ConvergenceRow, SolveOutput, StabilityRow,
};
pub use setup::{build_map, build_region, build_space, Scenario, SweepPoint};
pub use solutions::{ManufacturedSolution, SOLUTION_NAMES};
pub use table::{fmt_f64, Table};
pub use verify::{run_verify, Check};
