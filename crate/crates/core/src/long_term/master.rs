use crate::conic::{self, ConicProgram, Sense, SolveOptions};
use crate::{Error, Result};

fn clip_sum(y: &[f64], mu: f64) -> f64 {
    y.iter().map(|v| (v + mu).clamp(0.0, 1.0)).sum()
}

/// Whether `a` lies in `H = {0 <= a <= 1, sum a >= n_qol}` up to `tol`.
pub fn in_h(a: &[f64], n_qol: usize, tol: f64) -> bool {
    a.iter().all(|&x| x >= -tol && x <= 1.0 + tol) && a.iter().sum::<f64>() >= n_qol as f64 - tol
}

/// Euclidean projection onto `H`.
///
/// The minimizer is `clip(y + mu, 0, 1)` with the smallest `mu >= 0` that
/// meets the sum constraint. `mu` is bracketed by bisection on the
/// monotone map `mu -> sum clip(y + mu)`, then solved exactly on the
/// resulting linear piece.
pub fn project_onto_h(y: &[f64], n_qol: usize) -> Result<Vec<f64>> {
    let n = y.len();
    if n_qol > n {
        return Err(Error::Domain(format!(
            "selection set is empty: N_qol = {n_qol} exceeds N = {n}"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("projection of a non-finite point".into()));
    }
    let target = n_qol as f64;
    if clip_sum(y, 0.0) >= target {
        return Ok(y.iter().map(|v| v.clamp(0.0, 1.0)).collect());
    }
    let min_y = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (0.0, 1.0 - min_y);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if clip_sum(y, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    // Free coordinates at the bracket decide the linear piece.
    let mid = 0.5 * (lo + hi);
    let mut ones = 0.0;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for &v in y {
        let x = v + mid;
        if x >= 1.0 {
            ones += 1.0;
        } else if x > 0.0 {
            free_sum += v;
            free += 1;
        }
    }
    let mu = if free > 0 {
        ((target - ones - free_sum) / free as f64).clamp(lo, hi)
    } else {
        hi
    };
    Ok(y.iter().map(|v| (v + mu).clamp(0.0, 1.0)).collect())
}

/// Minimizer of `grad'(a - a_n) + tau ||a - a_n||^2` over `H`, i.e. the
/// projection of `a_n - grad / (2 tau)`.
pub fn solve_master(a_n: &[f64], grad: &[f64], tau: f64, n_qol: usize) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("proximal constant {tau} must be positive")));
    }
    if a_n.len() != grad.len() {
        return Err(Error::Dimension("iterate and gradient lengths differ".into()));
    }
    let y: Vec<f64> = a_n.iter().zip(grad).map(|(a, g)| a - g / (2.0 * tau)).collect();
    project_onto_h(&y, n_qol)
}

/// The same problem through the generic conic solver.
pub fn solve_master_conic(
    a_n: &[f64],
    grad: &[f64],
    tau: f64,
    n_qol: usize,
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    let n = a_n.len();
    let mut prog = ConicProgram::new(n);
    let st = tau.sqrt();
    prog.objective_quad = (0..n).map(|k| vec![(k, st)]).collect();
    prog.objective = (0..n).map(|k| grad[k] - 2.0 * tau * a_n[k]).collect();
    prog.bounds = vec![(0.0, 1.0); n];
    prog.add_linear((0..n).map(|k| (k, 1.0)).collect(), Sense::Ge, n_qol as f64);
    let sol = conic::solve(&prog, opts)?;
    if !sol.is_optimal() {
        return Err(Error::Solver {
            status: sol.status,
            detail: "master problem".into(),
        });
    }
    Ok(sol.x)
}

/// KKT residual of `a` as the projection of `y` onto `H`, using the
/// closed-form multiplier of the sum constraint read off the free
/// coordinates.
pub fn master_kkt_residual(y: &[f64], a: &[f64], n_qol: usize) -> f64 {
    let free: Vec<usize> = (0..a.len()).filter(|&k| a[k] > 1e-12 && a[k] < 1.0 - 1e-12).collect();
    let sum: f64 = a.iter().sum();
    let mu = if !free.is_empty() {
        free.iter().map(|&k| a[k] - y[k]).sum::<f64>() / free.len() as f64
    } else if sum <= n_qol as f64 + 1e-9 {
        // No free coordinate: the smallest multiplier that keeps every
        // saturated coordinate at its upper bound.
        (0..a.len())
            .filter(|&k| a[k] >= 1.0 - 1e-12)
            .map(|k| 1.0 - y[k])
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let mut r = (n_qol as f64 - sum).max(0.0);
    r = r.max(-mu).max((mu * (sum - n_qol as f64)).abs());
    for k in 0..a.len() {
        r = r.max(-a[k]).max(a[k] - 1.0);
        // Stationarity of the box multipliers: a = clip(y + mu).
        r = r.max((a[k] - (y[k] + mu).clamp(0.0, 1.0)).abs());
    }
    r
}

/// `(1 - pi) a_n + pi a_star`.
pub fn step_update(a_n: &[f64], a_star: &[f64], pi: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&pi), "step weight {pi} outside [0, 1]");
    a_n.iter().zip(a_star).map(|(x, y)| (1.0 - pi) * x + pi * y).collect()
}
