//! Convex inner approximation of the short-term problem at an iterate.

use crate::conic::{AffineExpr, ConicProgram, QuadConstraint, RotatedCone, Sense};
use crate::network::NetworkRealization;
use crate::params::SystemParams;
use crate::rates::{is_selected, rate_scale, uplink_coupling, Selection};
use crate::{Error, Result};

use super::bounds::BoundCoefficients;

/// Rate variables are in Mbit/s.
pub const RATE_UNIT: f64 = 1e6;
/// Frequency variables are in GHz.
pub const FREQ_UNIT: f64 = 1e9;
/// Smallest admissible rate of a selected UE (bit/s).
pub const RATE_FLOOR: f64 = 1e-3;

/// Variable indices. The power variable is `w_mk = sigma_mk v_mk`, so the
/// per-link budget `sigma_mk^2 v_mk^2 <= vt_mk` reads `w_mk^2 <= vt_mk`.
/// After the model variables come `M` auxiliary AP loads `sum_k vt_mk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub m: usize,
    pub n: usize,
}

impl Layout {
    pub fn w(&self, m: usize, k: usize) -> usize {
        m * self.n + k
    }
    pub fn vt(&self, m: usize, k: usize) -> usize {
        self.m * self.n + m * self.n + k
    }
    pub fn u(&self, k: usize) -> usize {
        2 * self.m * self.n + k
    }
    pub fn f(&self, k: usize) -> usize {
        2 * self.m * self.n + self.n + k
    }
    pub fn r_d(&self, k: usize) -> usize {
        2 * self.m * self.n + 2 * self.n + k
    }
    pub fn r_u(&self, k: usize) -> usize {
        2 * self.m * self.n + 3 * self.n + k
    }
    pub fn t_d(&self) -> usize {
        2 * self.m * self.n + 4 * self.n
    }
    pub fn t_c(&self) -> usize {
        self.t_d() + 1
    }
    pub fn t_u(&self) -> usize {
        self.t_d() + 2
    }
    pub fn load(&self, m: usize) -> usize {
        self.t_d() + 3 + m
    }
    /// Variables of the model, without the auxiliary loads.
    pub fn model_vars(&self) -> usize {
        self.t_d() + 3
    }
    pub fn n_vars(&self) -> usize {
        self.model_vars() + self.m
    }
}

/// Constraint counts of an assembled subproblem. A variable box counts as
/// one linear constraint, and an AP budget (load definition plus its bound)
/// as one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubproblemTally {
    /// Model variables.
    pub variables: usize,
    /// Auxiliary AP-load variables on top of `variables`.
    pub auxiliary: usize,
    pub linear: usize,
    pub conic: usize,
    pub hyperbolic: usize,
}

#[derive(Debug, Clone)]
pub struct Subproblem {
    pub program: ConicProgram,
    pub layout: Layout,
    pub tally: SubproblemTally,
    /// Seconds per unit of the time variables: the round time at the
    /// expansion point, so the objective is of order one.
    pub time_unit: f64,
}

/// Round time implied by the rates at the expansion point with every CPU at
/// full speed.
fn expansion_round_time(a: &Selection, sel: &[usize], bounds: &BoundCoefficients, p: &SystemParams) -> f64 {
    let c = rate_scale(p);
    let slowest = |size: f64, rb: &[super::bounds::RateBound]| {
        sel.iter()
            .map(|&k| a.a[k] * size / (c * rb[k].value(rb[k].x0, rb[k].y0)))
            .fold(0.0, f64::max)
    };
    let cp = sel.iter().map(|&k| a.a[k]).fold(0.0, f64::max) * p.round_cycles() / p.f_max;
    let t = slowest(p.s_d, &bounds.dl) + cp + slowest(p.s_u, &bounds.ul);
    if t.is_finite() && t > 0.0 {
        t
    } else {
        1.0
    }
}

/// Builds the convex subproblem around the iterate behind `bounds`.
///
/// In the interference term of the downlink bound the squared amplitudes
/// `w_ml^2` are replaced by their budget shares `vt_ml >= w_ml^2`. The bound
/// only decreases, and lowering `vt` to `w^2` at any solution restores the
/// original expression, so the optimal value is unchanged while each rate
/// cone involves only the pilot-sharing UEs. The remaining power term
/// `sum_m beta_mk sum_l vt_ml` goes through the AP loads, which keeps the
/// rate rows short and the interior-point factorization sparse.
pub fn assemble_subproblem(
    a: &Selection,
    bounds: &BoundCoefficients,
    net: &NetworkRealization,
    p: &SystemParams,
) -> Result<Subproblem> {
    let (m_ap, n_ue) = net.beta.shape();
    if a.len() != n_ue || bounds.dl.len() != n_ue || bounds.ul.len() != n_ue {
        return Err(Error::Dimension(format!(
            "selection of {} and bounds of {}/{} for {n_ue} UEs",
            a.len(),
            bounds.dl.len(),
            bounds.ul.len()
        )));
    }
    let sel: Vec<usize> = a.selected();
    if sel.is_empty() {
        return Err(Error::Degenerate("no UE is selected".into()));
    }
    let lay = Layout { m: m_ap, n: n_ue };
    let time_unit = expansion_round_time(a, &sel, bounds, p);
    let mut prog = ConicProgram::new(lay.n_vars());
    let inf = f64::INFINITY;
    let sigma = net.sigma2_dl.map(f64::sqrt);

    prog.objective[lay.t_d()] = 1.0;
    prog.objective[lay.t_c()] = 1.0;
    prog.objective[lay.t_u()] = 1.0;
    for t in [lay.t_d(), lay.t_c(), lay.t_u()] {
        prog.bounds[t] = (0.0, inf);
    }

    let floor = RATE_FLOOR / RATE_UNIT;
    for k in 0..n_ue {
        let on = is_selected(a.a[k]);
        let ak = a.a[k].min(1.0);
        for m in 0..m_ap {
            prog.bounds[lay.w(m, k)] = if on { (0.0, inf) } else { (0.0, 0.0) };
            prog.bounds[lay.vt(m, k)] = if on { (0.0, ak) } else { (0.0, 0.0) };
            if on {
                prog.rsoc.push(RotatedCone {
                    x: AffineExpr::var(lay.vt(m, k)),
                    y: AffineExpr::constant(0.5),
                    z: vec![AffineExpr::var(lay.w(m, k))],
                });
            }
        }
        prog.bounds[lay.u(k)] = if on { (0.0, ak.sqrt()) } else { (0.0, 0.0) };
        prog.bounds[lay.f(k)] = (0.0, p.f_max / FREQ_UNIT);
        prog.bounds[lay.r_d(k)] = if on { (floor, inf) } else { (0.0, 0.0) };
        prog.bounds[lay.r_u(k)] = if on { (floor, inf) } else { (0.0, 0.0) };
    }
    for m in 0..m_ap {
        prog.bounds[lay.load(m)] = (0.0, 1.0);
        let mut row: Vec<(usize, f64)> = sel.iter().map(|&k| (lay.vt(m, k), 1.0)).collect();
        row.push((lay.load(m), -1.0));
        prog.add_linear(row, Sense::Eq, 0.0);
    }

    let unit_over_c = RATE_UNIT / rate_scale(p);
    let sqrt_rho_d = p.rho_d.sqrt();
    for &k in &sel {
        // Downlink: gamma x^2 + gamma (pc + iui + 1) + r/C - alpha - beta x <= 0
        // in the normalized coordinates.
        let nb = bounds.dl[k].normalized();
        let s = nb.scale;
        let x_terms: Vec<(usize, f64)> =
            (0..m_ap).map(|m| (lay.w(m, k), s * sqrt_rho_d * sigma[(m, k)])).collect();
        let g = nb.gamma.sqrt();
        let mut factor = vec![x_terms.iter().map(|&(i, c)| (i, g * c)).collect::<Vec<_>>()];
        for &l in &sel {
            let gram = net.pilot_gram[(l, k)];
            if l == k || gram == 0.0 {
                continue;
            }
            let c = g * s * (p.rho_d * gram).sqrt();
            factor.push(
                (0..m_ap)
                    .map(|m| (lay.w(m, l), c * sigma[(m, l)] * net.beta[(m, k)] / net.beta[(m, l)]))
                    .collect(),
            );
        }
        let mut linear: Vec<(usize, f64)> = Vec::with_capacity(2 * m_ap + 1);
        linear.extend(
            (0..m_ap).map(|m| (lay.load(m), nb.gamma * s * s * p.rho_d * net.beta[(m, k)])),
        );
        linear.extend(x_terms.iter().map(|&(i, c)| (i, -nb.beta * c)));
        linear.push((lay.r_d(k), unit_over_c));
        prog.quad.push(QuadConstraint {
            factor,
            linear,
            constant: nb.gamma * s * s - nb.alpha,
        });

        // Uplink, with the same structure in u.
        let nb = bounds.ul[k].normalized();
        let s = nb.scale;
        let gain: f64 = (0..m_ap).map(|m| net.sigma2_ul[(m, k)]).sum();
        let x_coef = s * (p.rho_u * gain).sqrt();
        let g = nb.gamma.sqrt();
        let mut factor = Vec::with_capacity(sel.len());
        for &l in &sel {
            let mut sq = s * s * p.rho_u * uplink_coupling(net, k, l) / gain;
            if l == k {
                sq += x_coef * x_coef;
            }
            factor.push(vec![(lay.u(l), g * sq.sqrt())]);
        }
        prog.quad.push(QuadConstraint {
            factor,
            linear: vec![(lay.u(k), -nb.beta * x_coef), (lay.r_u(k), unit_over_c)],
            constant: nb.gamma * s * s - nb.alpha,
        });
    }

    let mut hyperbolic = 0;
    for &k in &sel {
        let ak = a.a[k];
        let pairs = [
            (lay.t_d(), lay.r_d(k), p.s_d / RATE_UNIT / time_unit),
            (lay.t_c(), lay.f(k), p.round_cycles() / FREQ_UNIT / time_unit),
            (lay.t_u(), lay.r_u(k), p.s_u / RATE_UNIT / time_unit),
        ];
        for (t, r, load) in pairs {
            prog.rsoc.push(RotatedCone::hyperbolic(t, r, (2.0 * ak * load).sqrt()));
            hyperbolic += 1;
        }
    }

    let boxed = prog.bounds[..lay.model_vars()]
        .iter()
        .filter(|(lo, hi)| lo.is_finite() || hi.is_finite())
        .count();
    let tally = SubproblemTally {
        variables: lay.model_vars(),
        auxiliary: m_ap,
        linear: prog.linear.len() + boxed,
        conic: prog.quad.len() + prog.rsoc.len(),
        hyperbolic,
    };
    Ok(Subproblem {
        program: prog,
        layout: lay,
        tally,
        time_unit,
    })
}
