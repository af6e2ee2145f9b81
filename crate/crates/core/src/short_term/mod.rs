//! Per-round power and CPU-frequency allocation for a fixed UE selection,
//! by successive convex approximation.

mod bounds;
mod sca;
mod subproblem;

pub use bounds::{
    build_bounds, downlink_bound, uplink_bound, BoundCoefficients, NormalizedBound, RateBound,
};
pub use sca::{
    initial_point, initial_point_random, sca_solve, write_solution_csv, ScaOptions,
    ShortTermPoint, ShortTermSolution, INEXACT_STEP_KKT,
};
pub use subproblem::{
    assemble_subproblem, Layout, Subproblem, SubproblemTally, FREQ_UNIT, RATE_FLOOR, RATE_UNIT,
};
