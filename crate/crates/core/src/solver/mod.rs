//! Reference numerical solutions of the transmission problem.
//!
//! Both solvers are cell-centred finite volumes in space and Crank–Nicolson in time.
//! λ = ∞ and λ = 0 are solved as one field. For finite λ the Ω₊ and Ω₋ blocks are
//! solved alternately, coupled through the Robin film conductance, until the interface
//! trace settles; a monolithic solve is available for comparison.

mod config;
mod engine;
mod field;
mod grid;
mod one_d;
mod schedule;
mod two_d;

pub use config::{GeometrySpec, LambdaSpec, SampleTimes, SolverConfig};
pub use engine::{Coupling, PicardOptions};
pub use field::{HeatField, SnapshotHeader};
pub use grid::{Grid2D, NodeClass, Symmetry, MIN_CONTAINER_FACTOR};
pub use one_d::{solve_1d, Initial1d, Solution1d, Solve1dParams, MAX_DT_OVER_H2};
pub use schedule::TimeSchedule;
pub use two_d::{
    localization_check, solve_2d, solve_2d_observed, LocalizationReport, Simulation2d,
    Solve2dOutput, Solve2dParams, DEFAULT_CONTAINER_FACTOR, MASS_DRIFT_FLOOR, MASS_DRIFT_RATE,
};
