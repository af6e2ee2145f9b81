//! Convex programs with linear, convex-quadratic and rotated second-order
//! cone constraints, and their certified solution.
//!
//! Programs are lowered to the standard form `min 1/2 x'Px + q'x` subject to
//! `Ax + s = b`, `s` in a product of zero, nonnegative and second-order cones,
//! and handed to an interior-point solver. Every returned point is re-checked
//! against the lowered KKT conditions before it is reported as optimal.

mod kkt;
mod lower;
mod solve;

pub use kkt::{kkt_residuals, KktResiduals};
pub use lower::{ConeBlock, Lowered};
pub use solve::{solve, ConicSolution, InfeasibilityKind, SolveOptions, SolveStatus};

use std::fmt::Write as _;

/// Sparse linear form plus a constant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![],
            constant: c,
        }
    }

    pub fn var(i: usize) -> Self {
        Self {
            terms: vec![(i, 1.0)],
            constant: 0.0,
        }
    }

    pub fn scaled_var(i: usize, c: f64) -> Self {
        Self {
            terms: vec![(i, c)],
            constant: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `row . x  (sense)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub row: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `||F x||^2 + c'x + d <= 0`, with `F` given by its sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadConstraint {
    pub factor: Vec<Vec<(usize, f64)>>,
    pub linear: Vec<(usize, f64)>,
    pub constant: f64,
}

impl QuadConstraint {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let sq: f64 = self
            .factor
            .iter()
            .map(|r| {
                let v: f64 = r.iter().map(|&(i, c)| c * x[i]).sum();
                v * v
            })
            .sum();
        sq + self.linear.iter().map(|&(i, c)| c * x[i]).sum::<f64>() + self.constant
    }
}

/// Rotated cone `2 x y >= ||z||^2`, `x, y >= 0`, over affine expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedCone {
    pub x: AffineExpr,
    pub y: AffineExpr,
    pub z: Vec<AffineExpr>,
}

impl RotatedCone {
    /// Hyperbolic constraint `s^2 <= 2 t r` for variables `t`, `r` and a
    /// constant `s`.
    pub fn hyperbolic(t: usize, r: usize, s: f64) -> Self {
        Self {
            x: AffineExpr::var(t),
            y: AffineExpr::var(r),
            z: vec![AffineExpr::constant(s)],
        }
    }

    /// Violation `max(||z||^2 - 2xy, -x, -y, 0)`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let (a, b) = (self.x.eval(x), self.y.eval(x));
        let zz: f64 = self.z.iter().map(|e| e.eval(x).powi(2)).sum();
        (zz - 2.0 * a * b).max(-a).max(-b).max(0.0)
    }
}

/// Linear objective (plus an optional `||F x||^2` term) over linear,
/// quadratic and rotated-cone constraints and a per-variable box.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    /// Rows of `F` in an objective term `||F x||^2`.
    pub objective_quad: Vec<Vec<(usize, f64)>>,
    pub linear: Vec<LinearConstraint>,
    pub quad: Vec<QuadConstraint>,
    pub rsoc: Vec<RotatedCone>,
    /// `(lower, upper)`, infinite sides allowed.
    pub bounds: Vec<(f64, f64)>,
}

impl ConicProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            objective_constant: 0.0,
            objective_quad: vec![],
            linear: vec![],
            quad: vec![],
            rsoc: vec![],
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n_vars],
        }
    }

    pub fn add_linear(&mut self, row: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.linear.push(LinearConstraint { row, sense, rhs });
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.objective.iter().zip(x).map(|(c, v)| c * v).sum();
        let quad: f64 = self
            .objective_quad
            .iter()
            .map(|r| r.iter().map(|&(i, c)| c * x[i]).sum::<f64>().powi(2))
            .sum();
        lin + quad + self.objective_constant
    }

    /// Largest constraint violation of `x`, evaluated directly on the model.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.linear {
            let v: f64 = c.row.iter().map(|&(i, a)| a * x[i]).sum();
            let viol = match c.sense {
                Sense::Le => v - c.rhs,
                Sense::Ge => c.rhs - v,
                Sense::Eq => (v - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for q in &self.quad {
            worst = worst.max(q.eval(x));
        }
        for r in &self.rsoc {
            worst = worst.max(r.violation(x));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - x[i]).max(x[i] - hi);
        }
        worst
    }

    /// Checks that every index is in range and every number finite.
    pub fn validate(&self) -> crate::Result<()> {
        let n = self.n_vars;
        let bad = |what: &str| Err(crate::Error::Dimension(format!("conic program: {what}")));
        if self.objective.len() != n || self.bounds.len() != n {
            return bad("objective or bounds length differs from n_vars");
        }
        let ok_terms = |t: &[(usize, f64)]| t.iter().all(|&(i, c)| i < n && c.is_finite());
        let ok_expr = |e: &AffineExpr| ok_terms(&e.terms) && e.constant.is_finite();
        if !self.objective_quad.iter().all(|r| ok_terms(r)) {
            return bad("objective quadratic references an unknown variable");
        }
        if !self.linear.iter().all(|c| ok_terms(&c.row) && c.rhs.is_finite()) {
            return bad("linear constraint out of range");
        }
        if !self
            .quad
            .iter()
            .all(|q| q.factor.iter().all(|r| ok_terms(r)) && ok_terms(&q.linear) && q.constant.is_finite())
        {
            return bad("quadratic constraint out of range");
        }
        if !self
            .rsoc
            .iter()
            .all(|r| ok_expr(&r.x) && ok_expr(&r.y) && r.z.iter().all(ok_expr))
        {
            return bad("rotated cone out of range");
        }
        if self.bounds.iter().any(|&(lo, hi)| lo > hi || lo.is_nan() || hi.is_nan()) {
            return bad("empty or NaN bound");
        }
        Ok(())
    }

    /// Plain-text listing for debugging.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let terms = |t: &[(usize, f64)]| {
            t.iter()
                .map(|(i, c)| format!("{c:+e}*x{i}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let expr = |e: &AffineExpr| format!("{} {:+e}", terms(&e.terms), e.constant);
        let _ = writeln!(s, "vars {}", self.n_vars);
        let obj: Vec<(usize, f64)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (i, *c))
            .collect();
        let _ = writeln!(s, "minimize {} {:+e}", terms(&obj), self.objective_constant);
        for r in &self.objective_quad {
            let _ = writeln!(s, "  + ({})^2", terms(r));
        }
        for c in &self.linear {
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "==",
            };
            let _ = writeln!(s, "lin {} {op} {:e}", terms(&c.row), c.rhs);
        }
        for q in &self.quad {
            let rows: Vec<String> = q.factor.iter().map(|r| format!("({})", terms(r))).collect();
            let _ = writeln!(
                s,
                "quad ||{}||^2 + {} {:+e} <= 0",
                rows.join(", "),
                terms(&q.linear),
                q.constant
            );
        }
        for r in &self.rsoc {
            let z: Vec<String> = r.z.iter().map(|e| format!("({})", expr(e))).collect();
            let _ = writeln!(s, "rsoc 2 ({}) ({}) >= ||{}||^2", expr(&r.x), expr(&r.y), z.join(", "));
        }
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_finite() || hi.is_finite() {
                let _ = writeln!(s, "bound {lo:e} <= x{i} <= {hi:e}");
            }
        }
        s
    }
}
