use std::io::Write;

use rand::RngExt;

use crate::par::{self, ExecMode};
use crate::params::SystemParams;
use crate::rates::Selection;
use crate::seed;
use crate::short_term::{sca_solve, ScaOptions};
use crate::stream::RealizationStream;
use crate::{Error, Result};

use super::master::{in_h, project_onto_h, solve_master, step_update};
use super::surrogate::{
    penalty_value_and_grad, sample_t_and_grad, update_surrogate, Schedules, SurrogateState,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alg2Options {
    pub max_iter: usize,
    /// Sup-norm iterate change regarded as stationary.
    pub tol: f64,
    /// Consecutive stationary iterations that end the run.
    pub patience: usize,
    pub schedules: Schedules,
    pub sca: ScaOptions,
    /// Consecutive short-term solver failures tolerated before aborting.
    pub max_failures: usize,
}

impl Default for Alg2Options {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-4,
            patience: 5,
            schedules: Schedules::default(),
            sca: ScaOptions::default(),
            max_failures: 3,
        }
    }
}

/// One iteration of the online method.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub sum_a: f64,
    pub penalty: f64,
    /// Surrogate estimate of the penalized objective, `g + lambda V`.
    pub l_estimate: f64,
    pub t_sample: f64,
    /// Round time of the short-term solution at this iterate.
    pub short_term_obj: f64,
    /// `||a^(n+1) - a^(n)||_inf`.
    pub step: f64,
    /// `||a^(n) - a*^(n)||_inf`.
    pub prox_gap: f64,
}

#[derive(Debug, Clone)]
pub struct Alg2Result {
    pub a_relaxed: Selection,
    pub a_binary: Selection,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub converged: bool,
    pub surrogate: SurrogateState,
}

/// Thresholds at 0.5, then promotes the largest remaining entries (lowest
/// index first among ties) until `n_qol` UEs are selected.
pub fn round_selection(a: &[f64], n_qol: usize) -> Selection {
    let mut out: Vec<f64> = a.iter().map(|&x| if x > 0.5 { 1.0 } else { 0.0 }).collect();
    let mut count = out.iter().filter(|&&x| x == 1.0).count();
    if count < n_qol {
        let mut rest: Vec<usize> = (0..a.len()).filter(|&k| out[k] == 0.0).collect();
        rest.sort_by(|&i, &j| a[j].total_cmp(&a[i]).then(i.cmp(&j)));
        for k in rest {
            if count >= n_qol {
                break;
            }
            out[k] = 1.0;
            count += 1;
        }
    }
    Selection::new(out)
}

/// Runs the online two-timescale method on the states of `stream`.
///
/// Iteration `n` solves the short-term problem at the current relaxed
/// selection on state `n`, folds the sampled objective and gradient into
/// the surrogate, takes the proximal master step, and averages. The
/// starting point is a seeded uniform draw projected onto `H`.
pub fn run_algorithm2(
    stream: &RealizationStream,
    p: &SystemParams,
    seed_value: u64,
    opts: &Alg2Options,
) -> Result<Alg2Result> {
    let n_ue = stream.base().n_ue();
    p.validate(n_ue)?;
    let mut rng = seed::sub_rng(seed_value, "alg2-init", 0);
    let start: Vec<f64> = (0..n_ue).map(|_| rng.random::<f64>()).collect();
    let mut a = project_onto_h(&start, p.n_qol)?;
    let mut state = SurrogateState::new(a.clone());
    let mut trace = Vec::new();
    let mut failures = 0;
    let mut still = 0;
    let mut converged = false;
    let mut n = 0;

    while n < opts.max_iter {
        n += 1;
        let net = stream.realization(n as u64)?;
        let sol = match sca_solve(&Selection::new(a.clone()), &net, p, &opts.sca) {
            Ok(s) => {
                failures = 0;
                s
            }
            Err(e @ Error::Solver { .. }) => {
                failures += 1;
                if failures > opts.max_failures {
                    return Err(Error::RepeatedSolverFailure(failures, e.to_string()));
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let (t_val, t_grad) = sample_t_and_grad(&a, &sol.timing.onehot_sum(), p.q)?;
        update_surrogate(&mut state, t_val, &t_grad, opts.schedules.phi(n));
        let (penalty, v_grad) = penalty_value_and_grad(&a, p.lambda);
        let grad: Vec<f64> = state.g_grad.iter().zip(&v_grad).map(|(g, v)| g + v).collect();
        let a_star = solve_master(&a, &grad, p.tau_prox, p.n_qol)?;
        let next = step_update(&a, &a_star, opts.schedules.pi(n));
        debug_assert!(in_h(&next, p.n_qol, 1e-9));
        let sup = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        let step = sup(&next, &a);
        trace.push(TraceRow {
            n,
            sum_a: a.iter().sum(),
            penalty,
            l_estimate: state.g_val + p.lambda * penalty,
            t_sample: t_val,
            short_term_obj: sol.objective(),
            step,
            prox_gap: sup(&a, &a_star),
        });
        a = next;
        state.a = a.clone();
        still = if step < opts.tol { still + 1 } else { 0 };
        if still >= opts.patience {
            converged = true;
            break;
        }
    }

    Ok(Alg2Result {
        a_binary: round_selection(&a, p.n_qol),
        a_relaxed: Selection::new(a),
        iterations: n,
        converged,
        trace,
        surrogate: state,
    })
}

/// Runs the method once per penalty weight on the same stream and seed.
pub fn lambda_sweep(
    stream: &RealizationStream,
    p: &SystemParams,
    seed_value: u64,
    lambdas: &[f64],
    opts: &Alg2Options,
    mode: ExecMode,
) -> Result<Vec<(f64, Alg2Result)>> {
    par::map(mode, lambdas.to_vec(), |lambda| {
        let q = SystemParams { lambda, ..p.clone() };
        run_algorithm2(stream, &q, seed_value, opts).map(|r| (lambda, r))
    })
    .into_iter()
    .collect()
}

pub fn write_trace_csv<W: Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n", "sum_a", "penalty", "l_estimate", "t_sample", "short_term_obj", "step", "prox_gap",
    ])?;
    for r in trace {
        w.write_record([
            r.n.to_string(),
            r.sum_a.to_string(),
            r.penalty.to_string(),
            r.l_estimate.to_string(),
            r.t_sample.to_string(),
            r.short_term_obj.to_string(),
            r.step.to_string(),
            r.prox_gap.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
