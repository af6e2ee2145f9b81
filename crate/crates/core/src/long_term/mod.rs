//! Online two-timescale selection of the participating UEs.
//!
//! The binary selection is relaxed to `[0, 1]^N` with a concave penalty
//! `V(a) = sum_k a_k (1 - a_k)`. The stochastic objective is tracked by a
//! recursive surrogate built from one sampled gradient per large-scale
//! state, and each step solves a proximal linearization over
//! `H = {0 <= a <= 1, sum a >= N_qol}` followed by iterate averaging.

mod algorithm;
mod master;
mod surrogate;

pub use algorithm::{
    lambda_sweep, round_selection, run_algorithm2, write_trace_csv, Alg2Options, Alg2Result,
    TraceRow,
};
pub use master::{
    in_h, master_kkt_residual, project_onto_h, solve_master, solve_master_conic, step_update,
};
pub use surrogate::{
    penalty_value_and_grad, sample_t_and_grad, update_surrogate, Schedules, SurrogateState,
};
