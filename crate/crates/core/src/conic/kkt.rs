use super::{ConeBlock, ConicProgram, Lowered};

/// Normalized KKT residuals of a primal-dual pair on the lowered program.
///
/// Feasibility residuals are scaled the way interior-point codes scale
/// their stopping tests: by `max(1, ||q|| + ||x|| + ||z||)` for
/// stationarity and `max(1, ||b|| + ||x|| + ||s||)` for the primal cone,
/// with infinity norms throughout.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KktResiduals {
    /// `||Px + q + A'z||`, scaled.
    pub stationarity: f64,
    /// Distance of `s = b - Ax` from the primal cone, scaled.
    pub primal: f64,
    /// Distance of `z` from the dual cone, relative to `z`.
    pub dual: f64,
    /// Largest per-block `|s_i' z_i|`, relative to the objective and the
    /// multiplier size.
    pub complementarity: f64,
    /// Primal-dual objective gap, relative to the objective.
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
            .max(self.gap)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Residuals of `(x, z)` where `z` holds one multiplier per lowered row.
pub fn kkt_residuals(prog: &ConicProgram, x: &[f64], multipliers: &[f64]) -> KktResiduals {
    residuals(&Lowered::from_program(prog), x, multipliers)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Violation of `v` in a block: zero cone when `zero` is set, else the
/// nonnegative orthant or the second-order cone.
fn cone_violation(block: &ConeBlock, v: &[f64], dual: bool) -> f64 {
    match block {
        ConeBlock::Zero(_) if dual => 0.0,
        ConeBlock::Zero(_) => inf_norm(v),
        ConeBlock::Nonneg(_) => v.iter().fold(0.0f64, |a, &x| a.max(-x)),
        ConeBlock::Soc(_) => {
            let tail = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
            (tail - v[0]).max(0.0)
        }
    }
}

pub(crate) fn residuals(low: &Lowered, x: &[f64], z: &[f64]) -> KktResiduals {
    assert_eq!(x.len(), low.n, "primal dimension");
    assert_eq!(z.len(), low.m(), "dual dimension");
    let px = low.p_mul(x);
    let ax = low.a_mul(x);
    let atz = low.at_mul(z);
    let s: Vec<f64> = low.b.iter().zip(&ax).map(|(b, a)| b - a).collect();

    let stat: Vec<f64> = (0..low.n).map(|i| px[i] + low.q[i] + atz[i]).collect();
    let (nx, nz, ns) = (inf_norm(x), inf_norm(z), inf_norm(&s));
    let stat_scale = (inf_norm(&low.q) + nx + nz).max(1.0);

    let xpx: f64 = x.iter().zip(&px).map(|(a, b)| a * b).sum();
    let qx: f64 = x.iter().zip(&low.q).map(|(a, b)| a * b).sum();
    let bz: f64 = low.b.iter().zip(z).map(|(a, b)| a * b).sum();
    let pobj = 0.5 * xpx + qx;
    let dobj = -0.5 * xpx - bz;
    let obj_scale = 1.0 + pobj.abs().min(dobj.abs());

    let mut primal = 0.0f64;
    let mut dual = 0.0f64;
    let mut comp = 0.0f64;
    let mut start = 0;
    for block in &low.cones {
        let r = start..start + block.dim();
        primal = primal.max(cone_violation(block, &s[r.clone()], false));
        dual = dual.max(cone_violation(block, &z[r.clone()], true));
        if !matches!(block, ConeBlock::Zero(_)) {
            let sz: f64 = s[r.clone()].iter().zip(&z[r]).map(|(a, b)| a * b).sum();
            comp = comp.max(sz.abs());
        }
        start += block.dim();
    }

    KktResiduals {
        stationarity: inf_norm(&stat) / stat_scale,
        primal: primal / (inf_norm(&low.b) + nx + ns).max(1.0),
        dual: dual / (1.0 + inf_norm(z)),
        complementarity: comp / (obj_scale + inf_norm(z)),
        gap: (pobj - dobj).abs() / obj_scale,
    }
}
