//! Quick self-checks of the numerical core, run by the `validate` command.

use rand::RngExt;

use crate::long_term::{project_onto_h, solve_master, solve_master_conic};
use crate::network::{generate_placement, Case, PlacementConfig};
use crate::params::SystemParams;
use crate::rates::{bl2_round_count, downlink_rate, round_count, uplink_rate, PowerAllocation, Selection};
use crate::seed;
use crate::short_term::{build_bounds, downlink_bound, initial_point, sca_solve, uplink_bound, ScaOptions};
use crate::stream::RealizationStream;
use crate::conic::SolveOptions;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, r: Result<(bool, String)>) -> Check {
    match r {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn instance(m: usize, n: usize, s: u64) -> Result<(crate::network::NetworkRealization, SystemParams)> {
    let p = SystemParams::for_network(n);
    let case = if s.is_multiple_of(2) { Case::C1 } else { Case::C2 };
    let pl = generate_placement(&PlacementConfig::new(m, n, 0.6, case), s)?;
    Ok((RealizationStream::new(pl, p.clone(), s).realization(0)?, p))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn bound_tightness(instances: u64) -> Result<(bool, String)> {
    let mut tight: f64 = 0.0;
    let mut above: f64 = 0.0;
    for s in 0..instances {
        let (net, p) = instance(3 + (s as usize % 6), 2 + (s as usize % 4), s)?;
        let a = Selection::all(net.n_ue());
        let x = initial_point(&a, &net, &p)?.alloc;
        let b = build_bounds(&x, &net, &p);
        let (rd, ru) = (downlink_rate(&x.v, &net, &p), uplink_rate(&x.u, &net, &p));
        let (bd, bu) = (downlink_bound(&b, &x.v, &net, &p), uplink_bound(&b, &x.u, &net, &p));
        for k in 0..net.n_ue() {
            tight = tight.max(rel(bd[k], rd[k])).max(rel(bu[k], ru[k]));
        }
        let mut rng = seed::sub_rng(s, "validate-bounds", 0);
        for _ in 0..20 {
            let y = PowerAllocation {
                v: x.v.map(|v| v * rng.random::<f64>()),
                u: x.u.iter().map(|u| u * rng.random::<f64>()).collect(),
                f: x.f.clone(),
            };
            let (rd, ru) = (downlink_rate(&y.v, &net, &p), uplink_rate(&y.u, &net, &p));
            let (bd, bu) = (downlink_bound(&b, &y.v, &net, &p), uplink_bound(&b, &y.u, &net, &p));
            for k in 0..net.n_ue() {
                above = above.max((bd[k] - rd[k]) / rd[k].max(1.0)).max((bu[k] - ru[k]) / ru[k].max(1.0));
            }
        }
    }
    Ok((
        tight <= 1e-9 && above <= 1e-9,
        format!("max relative gap at the expansion point {tight:.1e}, max excess over the rate {above:.1e}"),
    ))
}

fn sca_monotone(instances: u64) -> Result<(bool, String)> {
    let mut worst_rise: f64 = 0.0;
    let mut worst_violation: f64 = 0.0;
    for s in 0..instances {
        let (net, p) = instance(4 + s as usize % 3, 3 + s as usize % 2, 100 + s)?;
        let sol = sca_solve(&Selection::all(net.n_ue()), &net, &p, &ScaOptions::default())?;
        for w in sol.obj_trace.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
        worst_violation = worst_violation.max(sol.point.violation(&sol.selection, &net, &p));
    }
    Ok((
        worst_rise <= 1e-8 && worst_violation <= 1e-6,
        format!("largest objective rise {worst_rise:.1e}, largest constraint violation {worst_violation:.1e}"),
    ))
}

fn projection_oracle(instances: u64) -> Result<(bool, String)> {
    let opts = SolveOptions { tol: 1e-10, max_iter: 400 };
    let mut worst: f64 = 0.0;
    for s in 0..instances {
        let mut rng = seed::sub_rng(s, "validate-projection", 0);
        let n = 3 + (s as usize % 10);
        let q = rng.random_range(0..=n);
        let a_n = project_onto_h(&(0..n).map(|_| rng.random::<f64>()).collect::<Vec<_>>(), q)?;
        let g: Vec<f64> = (0..n).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
        let tau = 0.1 + rng.random::<f64>();
        let fast = solve_master(&a_n, &g, tau, q)?;
        let slow = solve_master_conic(&a_n, &g, tau, q, &opts)?;
        worst = fast.iter().zip(&slow).fold(worst, |w, (x, y)| w.max((x - y).abs()));
    }
    Ok((worst <= 1e-6, format!("largest coordinate difference {worst:.1e}")))
}

fn round_counts() -> Result<(bool, String)> {
    let p = SystemParams::for_network(15);
    let g = round_count(&Selection::all(15), &p)?;
    let gt = bl2_round_count(5, 15, &p)?;
    Ok((g == 6.0 && gt == 78.0, format!("G(15 of 15) = {g}, G~(K=5, N=15) = {gt}")))
}

/// Runs every check; `quick` shrinks the instance counts.
pub fn run_checks(quick: bool) -> Vec<Check> {
    let scale = if quick { 1 } else { 4 };
    vec![
        check("bound tightness and underestimation", bound_tightness(5 * scale)),
        check("short-term monotonicity and feasibility", sca_monotone(2 * scale)),
        check("master projection against conic solve", projection_oracle(25 * scale)),
        check("round-count identities", round_counts()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_checks_pass() {
        for c in run_checks(true) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
