use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus};

use super::kkt::residuals;
use super::{ConicProgram, KktResiduals, Lowered};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
    NumError,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::NumError => "num_error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibilityKind {
    /// No feasible point exists.
    Primal,
    /// The objective is unbounded below.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    /// Multipliers, one per lowered row.
    pub z: Vec<f64>,
    pub obj: f64,
    pub status: SolveStatus,
    pub infeasibility: Option<InfeasibilityKind>,
    pub kkt: KktResiduals,
    pub iterations: u32,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

fn run(low: &Lowered, tol: f64, max_iter: u32) -> Result<clarabel::solver::DefaultSolution<f64>> {
    let settings = DefaultSettings {
        verbose: false,
        max_iter,
        tol_gap_abs: tol,
        tol_gap_rel: tol,
        tol_feas: tol,
        tol_ktratio: tol.max(1e-10),
        ..DefaultSettings::default()
    };
    let p = low.p_csc();
    let a = low.a_csc();
    let cones = low.clarabel_cones();
    let mut solver = DefaultSolver::new(&p, &low.q, &a, &low.b, &cones, settings)
        .map_err(|e| Error::Dimension(format!("conic solver setup: {e}")))?;
    solver.solve();
    Ok(solver.solution)
}

/// Solves `prog`. A point returned by the backend is reported optimal only
/// if its KKT residuals on the lowered program are within `tol`, whatever
/// the backend's own verdict; when the first solve falls short, one solve
/// at a tighter internal tolerance is attempted.
pub fn solve(prog: &ConicProgram, opts: &SolveOptions) -> Result<ConicSolution> {
    prog.validate()?;
    let low = Lowered::from_program(prog);
    let mut total_iters = 0;
    let mut best: Option<(ConicSolution, f64)> = None;
    for inner in [0.1 * opts.tol, 1e-4 * opts.tol] {
        let sol = run(&low, inner, opts.max_iter)?;
        total_iters += sol.iterations;
        let infeasibility = match sol.status {
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                Some(InfeasibilityKind::Primal)
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                Some(InfeasibilityKind::Dual)
            }
            _ => None,
        };
        if infeasibility.is_some() {
            return Ok(ConicSolution {
                obj: f64::NAN,
                x: sol.x,
                z: sol.z,
                status: SolveStatus::Infeasible,
                infeasibility,
                kkt: KktResiduals::default(),
                iterations: total_iters,
            });
        }
        if !sol.x.iter().chain(&sol.z).all(|v| v.is_finite()) {
            continue;
        }
        let kkt = residuals(&low, &sol.x, &sol.z);
        let status = if kkt.within(opts.tol) {
            SolveStatus::Optimal
        } else if matches!(sol.status, SolverStatus::MaxIterations | SolverStatus::MaxTime) {
            SolveStatus::MaxIter
        } else {
            SolveStatus::NumError
        };
        let cand = ConicSolution {
            obj: prog.objective_value(&sol.x),
            x: sol.x,
            z: sol.z,
            status,
            infeasibility: None,
            kkt,
            iterations: total_iters,
        };
        if status == SolveStatus::Optimal {
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|(_, r)| kkt.max() < *r) {
            best = Some((cand, kkt.max()));
        }
    }
    Ok(match best {
        Some((mut s, _)) => {
            s.iterations = total_iters;
            s
        }
        None => ConicSolution {
            x: vec![f64::NAN; prog.n_vars],
            z: vec![f64::NAN; low.m()],
            obj: f64::NAN,
            status: SolveStatus::NumError,
            infeasibility: None,
            kkt: KktResiduals {
                stationarity: f64::INFINITY,
                ..KktResiduals::default()
            },
            iterations: total_iters,
        },
    })
}
