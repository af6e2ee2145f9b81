use std::io::Write;

use nalgebra::DMatrix;
use rand::RngExt;

use crate::conic::{self, KktResiduals, SolveOptions};
use crate::network::NetworkRealization;
use crate::params::SystemParams;
use crate::rates::{
    downlink_rate, is_selected, timing_from_rates, uplink_rate, PowerAllocation, RoundTiming,
    Selection,
};
use crate::seed;
use crate::{Error, Result};

use super::bounds::build_bounds;
use super::subproblem::{assemble_subproblem, Layout, FREQ_UNIT};

/// Largest KKT residual of a subproblem solution that is still used as a
/// step when the solver could not certify its own tolerance. Every step is
/// re-evaluated exactly before it is accepted, so a loose step can only end
/// the iteration early, never break feasibility or monotonicity.
pub const INEXACT_STEP_KKT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaOptions {
    /// Relative objective change that ends the iteration.
    pub eps: f64,
    pub max_outer: usize,
    pub solver: SolveOptions,
    /// Seeded random feasible start instead of the equal-share start.
    pub random_start: Option<u64>,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            max_outer: 30,
            solver: SolveOptions::default(),
            random_start: None,
        }
    }
}

/// A point of the exact short-term feasible set, with its epigraph values.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortTermPoint {
    pub alloc: PowerAllocation,
    /// Per-link budget shares, M x N.
    pub vtilde: DMatrix<f64>,
    /// Rate variables (bit/s).
    pub r_d: Vec<f64>,
    pub r_u: Vec<f64>,
    pub t_d: f64,
    pub t_c: f64,
    pub t_u: f64,
}

impl ShortTermPoint {
    pub fn objective(&self) -> f64 {
        self.t_d + self.t_c + self.t_u
    }

    /// Largest relative violation of the exact constraints, using the exact
    /// rate formulas. Zero when feasible.
    pub fn violation(&self, a: &Selection, net: &NetworkRealization, p: &SystemParams) -> f64 {
        let (m_ap, n_ue) = net.beta.shape();
        let mut worst = self.alloc.violation(net, p);
        for m in 0..m_ap {
            let mut share = 0.0;
            for k in 0..n_ue {
                let vt = self.vtilde[(m, k)];
                let load = net.sigma2_dl[(m, k)] * self.alloc.v[(m, k)].powi(2);
                worst = worst.max(load - vt).max(vt - a.a[k]).max(-vt);
                share += vt;
            }
            worst = worst.max(share - 1.0);
        }
        let rd = downlink_rate(&self.alloc.v, net, p);
        let ru = uplink_rate(&self.alloc.u, net, p);
        for k in 0..n_ue {
            worst = worst.max(self.alloc.u[k].powi(2) - a.a[k]);
            worst = worst.max(-self.r_d[k]).max(-self.r_u[k]);
            worst = worst.max((self.r_d[k] - rd[k]) / rd[k].max(1.0));
            worst = worst.max((self.r_u[k] - ru[k]) / ru[k].max(1.0));
            if is_selected(a.a[k]) {
                let need = [
                    (a.a[k] * p.s_d / self.r_d[k], self.t_d),
                    (a.a[k] * p.round_cycles() / self.alloc.f[k], self.t_c),
                    (a.a[k] * p.s_u / self.r_u[k], self.t_u),
                ];
                for (lhs, t) in need {
                    worst = worst.max((lhs - t) / t.max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct ShortTermSolution {
    pub selection: Selection,
    pub point: ShortTermPoint,
    /// Exact step times, one-hot vectors and bottleneck UEs at the final point.
    pub timing: RoundTiming,
    /// Round time at the start and after every accepted iteration.
    pub obj_trace: Vec<f64>,
    /// KKT residuals of the last subproblem solve.
    pub kkt: KktResiduals,
    /// Subproblem solutions that would have raised the round time.
    pub rejected_steps: usize,
    /// Steps taken from solves certified only to [`INEXACT_STEP_KKT`].
    pub inexact_steps: usize,
    pub solver_iterations: u32,
}

impl ShortTermSolution {
    pub fn objective(&self) -> f64 {
        self.timing.round_time
    }
}

fn check_selection(a: &Selection, net: &NetworkRealization) -> Result<Vec<usize>> {
    if a.len() != net.n_ue() {
        return Err(Error::Dimension(format!(
            "selection of {} for {} UEs",
            a.len(),
            net.n_ue()
        )));
    }
    let sel = a.selected();
    if sel.is_empty() {
        return Err(Error::Degenerate("no UE is selected".into()));
    }
    Ok(sel)
}

/// Completes an allocation to a point with tight shares, exact rates and
/// the implied step times, scaled by the given slack factors.
fn complete(
    a: &Selection,
    alloc: PowerAllocation,
    net: &NetworkRealization,
    p: &SystemParams,
    rate_factor: f64,
    time_factor: f64,
) -> Result<(ShortTermPoint, RoundTiming)> {
    let vtilde = alloc.v.zip_map(&net.sigma2_dl, |v, s| s * v * v);
    let rd = downlink_rate(&alloc.v, net, p);
    let ru = uplink_rate(&alloc.u, net, p);
    let timing = timing_from_rates(a, &rd, &ru, &alloc.f, p)?;
    let r_d: Vec<f64> = rd.iter().map(|r| r * rate_factor).collect();
    let r_u: Vec<f64> = ru.iter().map(|r| r * rate_factor).collect();
    let implied = timing_from_rates(a, &r_d, &r_u, &alloc.f, p)?;
    let max_of = |t: &[f64]| t.iter().cloned().fold(0.0, f64::max);
    let point = ShortTermPoint {
        t_d: max_of(&implied.t_dl) * time_factor,
        t_c: max_of(&implied.t_cp) * time_factor,
        t_u: max_of(&implied.t_ul) * time_factor,
        r_d,
        r_u,
        alloc,
        vtilde,
    };
    Ok((point, timing))
}

/// Equal-share feasible start: every selected UE gets `min(a_k, 1/N_sel)`
/// of each AP's budget, 90 % of its uplink limit and the full CPU frequency.
/// Rates sit 1 % below the exact rates and times 1 % above the maxima
/// those rates imply.
pub fn initial_point(
    a: &Selection,
    net: &NetworkRealization,
    p: &SystemParams,
) -> Result<ShortTermPoint> {
    let sel = check_selection(a, net)?;
    let (m_ap, n_ue) = net.beta.shape();
    let mut v = DMatrix::zeros(m_ap, n_ue);
    let share = 1.0 / sel.len() as f64;
    for &k in &sel {
        let vt = a.a[k].min(share);
        for m in 0..m_ap {
            v[(m, k)] = (vt / net.sigma2_dl[(m, k)]).sqrt();
        }
    }
    let u = (0..n_ue)
        .map(|k| if is_selected(a.a[k]) { 0.9 * a.a[k].min(1.0).sqrt() } else { 0.0 })
        .collect();
    let alloc = PowerAllocation {
        v,
        u,
        f: vec![p.f_max; n_ue],
    };
    Ok(complete(a, alloc, net, p, 0.99, 1.01)?.0)
}

/// Random feasible start drawn from `seed`.
pub fn initial_point_random(
    a: &Selection,
    net: &NetworkRealization,
    p: &SystemParams,
    seed_value: u64,
) -> Result<ShortTermPoint> {
    let sel = check_selection(a, net)?;
    let (m_ap, n_ue) = net.beta.shape();
    let mut rng = seed::rng(seed_value);
    let mut v = DMatrix::zeros(m_ap, n_ue);
    for m in 0..m_ap {
        let w: Vec<f64> = sel.iter().map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        let used = rng.random_range(0.5..1.0);
        for (i, &k) in sel.iter().enumerate() {
            let vt = a.a[k].min(1.0) * used * w[i] / total;
            v[(m, k)] = (vt / net.sigma2_dl[(m, k)]).sqrt();
        }
    }
    let mut u = vec![0.0; n_ue];
    let mut f = vec![p.f_max; n_ue];
    for &k in &sel {
        u[k] = a.a[k].min(1.0).sqrt() * rng.random_range(0.1..1.0);
        f[k] = p.f_max * rng.random_range(0.5..1.0);
    }
    Ok(complete(a, PowerAllocation { v, u, f }, net, p, 0.99, 1.01)?.0)
}

/// Reads the allocation out of a subproblem solution and projects away the
/// solver's residual infeasibility.
fn extract(x: &[f64], lay: &Layout, a: &Selection, net: &NetworkRealization, p: &SystemParams) -> PowerAllocation {
    let (m_ap, n_ue) = (lay.m, lay.n);
    let mut w = DMatrix::from_fn(m_ap, n_ue, |m, k| {
        if is_selected(a.a[k]) {
            x[lay.w(m, k)].clamp(0.0, a.a[k].min(1.0).sqrt())
        } else {
            0.0
        }
    });
    for m in 0..m_ap {
        let load: f64 = w.row(m).iter().map(|v| v * v).sum();
        if load > 1.0 {
            let c = 1.0 / load.sqrt();
            w.row_mut(m).iter_mut().for_each(|v| *v *= c);
        }
    }
    let v = w.zip_map(&net.sigma2_dl, |w, s| w / s.sqrt());
    let u = (0..n_ue)
        .map(|k| {
            if is_selected(a.a[k]) {
                x[lay.u(k)].clamp(0.0, a.a[k].min(1.0).sqrt())
            } else {
                0.0
            }
        })
        .collect();
    let f = (0..n_ue)
        .map(|k| {
            if is_selected(a.a[k]) {
                (x[lay.f(k)] * FREQ_UNIT).clamp(f64::MIN_POSITIVE, p.f_max)
            } else {
                p.f_max
            }
        })
        .collect();
    PowerAllocation { v, u, f }
}

/// Minimizes the round time `t_d + t_c + t_u` for a fixed selection.
///
/// Each iteration linearizes both rates at the current allocation, solves
/// the convex subproblem, and moves to its solution. The current point is
/// feasible for the next subproblem, so the round time cannot increase
/// beyond solver accuracy; a step that would increase it ends the iteration
/// at the current point.
pub fn sca_solve(
    a: &Selection,
    net: &NetworkRealization,
    p: &SystemParams,
    opts: &ScaOptions,
) -> Result<ShortTermSolution> {
    let start = match opts.random_start {
        Some(s) => initial_point_random(a, net, p, s)?,
        None => initial_point(a, net, p)?,
    };
    let (mut point, mut timing) = complete(a, start.alloc, net, p, 1.0, 1.0)?;
    let mut trace = vec![timing.round_time];
    let mut kkt = KktResiduals::default();
    let mut rejected = 0;
    let mut inexact = 0;
    let mut iterations = 0;

    for _ in 0..opts.max_outer {
        let bounds = build_bounds(&point.alloc, net, p);
        let sub = assemble_subproblem(a, &bounds, net, p)?;
        let sol = conic::solve(&sub.program, &opts.solver)?;
        iterations += sol.iterations;
        let loose = sol.x.iter().all(|v| v.is_finite()) && sol.kkt.within(INEXACT_STEP_KKT);
        if !sol.is_optimal() && !loose {
            return Err(Error::Solver {
                status: sol.status,
                detail: format!("short-term subproblem after {} iterations", trace.len() - 1),
            });
        }
        inexact += usize::from(!sol.is_optimal());
        kkt = sol.kkt;
        let alloc = extract(&sol.x, &sub.layout, a, net, p);
        let (cand, cand_timing) = complete(a, alloc, net, p, 1.0, 1.0)?;
        let prev = *trace.last().unwrap();
        let next = cand_timing.round_time;
        if next > prev {
            rejected += 1;
            break;
        }
        point = cand;
        timing = cand_timing;
        trace.push(next);
        if (prev - next) / prev < opts.eps {
            break;
        }
    }

    Ok(ShortTermSolution {
        selection: a.clone(),
        point,
        timing,
        obj_trace: trace,
        kkt,
        rejected_steps: rejected,
        inexact_steps: inexact,
        solver_iterations: iterations,
    })
}

/// Writes one record per UE: rates, step times, transmit powers and CPU
/// frequency.
pub fn write_solution_csv<W: Write>(sol: &ShortTermSolution, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "ue", "a", "rate_dl_bps", "rate_ul_bps", "t_dl_s", "t_cp_s", "t_ul_s", "eta_sum",
        "zeta", "freq_hz",
    ])?;
    let v = &sol.point.alloc.v;
    for k in 0..sol.selection.len() {
        let eta: f64 = v.column(k).iter().map(|x| x * x).sum();
        let rec = [
            sol.selection.a[k],
            sol.point.r_d[k],
            sol.point.r_u[k],
            sol.timing.t_dl[k],
            sol.timing.t_cp[k],
            sol.timing.t_ul[k],
            eta,
            sol.point.alloc.u[k].powi(2),
            sol.point.alloc.f[k],
        ];
        let mut row = vec![k.to_string()];
        row.extend(rec.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate_placement, Case, PlacementConfig};
    use crate::short_term::{assemble_subproblem, build_bounds};

    fn instance(m: usize, n: usize, s: u64) -> (NetworkRealization, SystemParams) {
        let p = SystemParams::for_network(n);
        let pl = generate_placement(&PlacementConfig::new(m, n, 1.0, Case::C1), s).unwrap();
        (NetworkRealization::draw(&pl, &p, s ^ 0xabc).unwrap(), p)
    }

    fn random_selection(n: usize, rng: &mut seed::SimRng) -> Selection {
        let mut a: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random_range(0.05..1.0) }).collect();
        a[rng.random_range(0..n)] = 1.0;
        Selection::new(a)
    }

    #[test]
    fn initial_point_is_feasible() {
        let mut rng = seed::rng(1);
        for i in 0..100 {
            let m = rng.random_range(1..12);
            let n = rng.random_range(1..10);
            let (net, p) = instance(m, n, i);
            let a = random_selection(n, &mut rng);
            let x = initial_point(&a, &net, &p).unwrap();
            assert!(x.violation(&a, &net, &p) <= 1e-12, "{}", x.violation(&a, &net, &p));
            let y = initial_point_random(&a, &net, &p, i).unwrap();
            assert!(y.violation(&a, &net, &p) <= 1e-12);
        }
    }

    #[test]
    fn lone_ue_takes_full_share() {
        let (net, p) = instance(4, 5, 2);
        let a = Selection::from_indices(5, &[3]);
        let x = initial_point(&a, &net, &p).unwrap();
        for m in 0..4 {
            assert!((x.vtilde[(m, 3)] - 1.0).abs() < 1e-12);
            assert_eq!(x.vtilde[(m, 0)], 0.0);
        }
    }

    #[test]
    fn no_selection_is_degenerate() {
        let (net, p) = instance(2, 3, 3);
        let a = Selection::new(vec![0.0; 3]);
        assert!(matches!(initial_point(&a, &net, &p), Err(Error::Degenerate(_))));
        let x = initial_point(&Selection::all(3), &net, &p).unwrap();
        let b = build_bounds(&x.alloc, &net, &p);
        assert!(matches!(assemble_subproblem(&a, &b, &net, &p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn tally_matches_closed_form() {
        let (m, n) = (6, 4);
        let (net, p) = instance(m, n, 4);
        let a = Selection::all(n);
        let x = initial_point(&a, &net, &p).unwrap();
        let sub = assemble_subproblem(&a, &build_bounds(&x.alloc, &net, &p), &net, &p).unwrap();
        let t = sub.tally;
        assert_eq!(t.variables, 2 * m * n + 4 * n + 3);
        assert_eq!(t.auxiliary, m);
        assert_eq!(t.linear, 2 * m * n + m + 4 * n + 3);
        assert_eq!(t.conic, m * n + 5 * n);
        assert_eq!(t.hyperbolic, 3 * n);

        let one = Selection::from_indices(n, &[0]);
        let sub = assemble_subproblem(&one, &build_bounds(&x.alloc, &net, &p), &net, &p).unwrap();
        assert_eq!(sub.tally.hyperbolic, 3);
    }

    #[test]
    fn subproblem_solution_satisfies_raw_constraints() {
        let (net, p) = instance(5, 4, 5);
        let a = Selection::new(vec![1.0, 0.6, 0.0, 0.3]);
        let x = initial_point(&a, &net, &p).unwrap();
        let sub = assemble_subproblem(&a, &build_bounds(&x.alloc, &net, &p), &net, &p).unwrap();
        let sol = conic::solve(&sub.program, &SolveOptions::default()).unwrap();
        assert!(sol.is_optimal());
        assert!(sub.program.max_violation(&sol.x) <= 1e-6);
        // Raw constraints on the model variables.
        let lay = sub.layout;
        let alloc = extract(&sol.x, &lay, &a, &net, &p);
        let rd = downlink_rate(&alloc.v, &net, &p);
        let ru = uplink_rate(&alloc.u, &net, &p);
        for k in a.selected() {
            let r_d = sol.x[lay.r_d(k)] * super::super::RATE_UNIT;
            let r_u = sol.x[lay.r_u(k)] * super::super::RATE_UNIT;
            assert!(r_d <= rd[k] * (1.0 + 1e-6), "{r_d} > {}", rd[k]);
            assert!(r_u <= ru[k] * (1.0 + 1e-6));
            let t_d = sol.x[lay.t_d()] * sub.time_unit;
            assert!(a.a[k] * p.s_d / r_d <= t_d * (1.0 + 1e-6));
            for m in 0..5 {
                let vt = sol.x[lay.vt(m, k)];
                assert!(vt <= a.a[k] + 1e-6);
                assert!(sol.x[lay.w(m, k)].powi(2) <= vt + 1e-6);
            }
        }
    }

    #[test]
    fn trace_is_monotone_and_iterates_feasible() {
        let mut rng = seed::rng(2);
        for i in 0..20 {
            let m = rng.random_range(2..10);
            let n = rng.random_range(2..7);
            let (net, p) = instance(m, n, 100 + i);
            let a = random_selection(n, &mut rng);
            let sol = sca_solve(&a, &net, &p, &ScaOptions::default()).unwrap();
            for w in sol.obj_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-8, "{:?}", sol.obj_trace);
            }
            let viol = sol.point.violation(&a, &net, &p);
            assert!(viol <= 1e-9, "violation {viol}");
            assert!(sol.kkt.within(SolveOptions::default().tol));
            let oh: f64 = sol.timing.onehot_sum().iter().zip(&a.a).map(|(t, a)| t * a).sum();
            assert!((oh - sol.point.objective()).abs() <= 1e-12 * oh);
            assert!((sol.objective() - sol.obj_trace.last().unwrap()).abs() == 0.0);
            assert!(sol.obj_trace.len() >= 2, "{:?}", sol.obj_trace);
            assert!(sol.obj_trace.last().unwrap() < &sol.obj_trace[0]);
        }
    }

    #[test]
    fn single_link_saturates_resources() {
        let (net, p) = instance(1, 1, 7);
        let sol = sca_solve(&Selection::all(1), &net, &p, &ScaOptions::default()).unwrap();
        let load = net.sigma2_dl[(0, 0)] * sol.point.alloc.v[(0, 0)].powi(2);
        assert!((load - 1.0).abs() < 1e-6, "{load}");
        assert!((sol.point.alloc.f[0] - p.f_max).abs() < 1e-6 * p.f_max);
        assert!((sol.point.alloc.u[0] - 1.0).abs() < 1e-6);
    }

    /// Round time on a lattice: the AP budget split between the two UEs
    /// (always fully used), both uplink amplitudes, and f = f_max, which is
    /// the lattice's best frequency since the compute time falls with f.
    /// Downlink and uplink decouple, so each is minimized on its own, then
    /// a zoomed second pass removes most of the lattice error.
    fn two_ue_grid(net: &NetworkRealization, p: &SystemParams) -> f64 {
        let a = Selection::all(2);
        let pts = 50;
        let td = |theta: f64| {
            let v = DMatrix::from_fn(1, 2, |m, k| {
                let sh = if k == 0 { theta } else { 1.0 - theta };
                (sh / net.sigma2_dl[(m, k)]).sqrt()
            });
            let r = downlink_rate(&v, net, p);
            (p.s_d / r[0]).max(p.s_d / r[1])
        };
        let tu = |u0: f64, u1: f64| {
            let r = uplink_rate(&[u0, u1], net, p);
            (p.s_u / r[0]).max(p.s_u / r[1])
        };
        let lat = |lo: f64, hi: f64| (0..pts).map(move |i| lo + (hi - lo) * i as f64 / (pts - 1) as f64);
        let mut best_theta = (f64::INFINITY, 0.5);
        for t in lat(0.0, 1.0) {
            best_theta = best_theta.min_by(td(t), t);
        }
        let h = 1.0 / (pts - 1) as f64;
        for t in lat((best_theta.1 - h).max(0.0), (best_theta.1 + h).min(1.0)) {
            best_theta = best_theta.min_by(td(t), t);
        }
        let mut best_u = (f64::INFINITY, (1.0, 1.0));
        for x in lat(0.0, 1.0) {
            for y in lat(0.0, 1.0) {
                best_u = best_u.min_by(tu(x, y), (x, y));
            }
        }
        let (x0, y0) = best_u.1;
        for x in lat((x0 - h).max(0.0), (x0 + h).min(1.0)) {
            for y in lat((y0 - h).max(0.0), (y0 + h).min(1.0)) {
                best_u = best_u.min_by(tu(x, y), (x, y));
            }
        }
        let _ = a;
        best_theta.0 + p.round_cycles() / p.f_max + best_u.0
    }

    trait MinBy<T> {
        fn min_by(self, val: f64, arg: T) -> Self;
    }
    impl<T> MinBy<T> for (f64, T) {
        fn min_by(self, val: f64, arg: T) -> Self {
            if val.is_finite() && val < self.0 {
                (val, arg)
            } else {
                self
            }
        }
    }

    #[test]
    fn two_ue_matches_grid_search() {
        for s in 0..5 {
            let (net, p) = instance(1, 2, 40 + s);
            let sol = sca_solve(&Selection::all(2), &net, &p, &ScaOptions::default()).unwrap();
            let grid = two_ue_grid(&net, &p);
            let gap = (sol.objective() - grid) / grid;
            assert!(gap.abs() <= 5e-3, "seed {s}: sca {} grid {grid}", sol.objective());
        }
    }

    #[test]
    fn csv_has_one_row_per_ue() {
        let (net, p) = instance(3, 3, 8);
        let sol = sca_solve(&Selection::all(3), &net, &p, &ScaOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_solution_csv(&sol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("ue,a,rate_dl_bps"));
    }
}
