use clarabel::algebra::CscMatrix;
use clarabel::solver::SupportedConeT;

use super::{AffineExpr, ConicProgram, Sense};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeBlock {
    Zero(usize),
    Nonneg(usize),
    Soc(usize),
}

impl ConeBlock {
    pub fn dim(&self) -> usize {
        match *self {
            ConeBlock::Zero(d) | ConeBlock::Nonneg(d) | ConeBlock::Soc(d) => d,
        }
    }
}

/// Standard form `min 1/2 x'Px + q'x  s.t.  Ax + s = b, s in K`.
#[derive(Debug, Clone)]
pub struct Lowered {
    pub n: usize,
    /// Upper triangle of `P` as triplets.
    pub p_triplets: Vec<(usize, usize, f64)>,
    pub q: Vec<f64>,
    pub a_triplets: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub cones: Vec<ConeBlock>,
    pub objective_constant: f64,
}

struct Rows {
    a: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
}

impl Rows {
    /// Appends a row with `s_row = expr(x)`.
    fn push_expr(&mut self, terms: &[(usize, f64)], constant: f64) {
        let r = self.b.len();
        for &(j, c) in terms {
            if c != 0.0 {
                self.a.push((r, j, -c));
            }
        }
        self.b.push(constant);
    }

    /// Appends a rotated cone `2XY >= ||Z||^2` as the second-order cone
    /// `((X+Y)/sqrt2, (X-Y)/sqrt2, Z)`.
    fn push_rotated(&mut self, x: &AffineExpr, y: &AffineExpr, z: &[AffineExpr]) {
        let comb = |sy: f64| {
            let mut t: Vec<(usize, f64)> = x.terms.iter().map(|&(i, c)| (i, SQRT_HALF * c)).collect();
            t.extend(y.terms.iter().map(|&(i, c)| (i, sy * SQRT_HALF * c)));
            (t, SQRT_HALF * (x.constant + sy * y.constant))
        };
        let (t0, c0) = comb(1.0);
        let (t1, c1) = comb(-1.0);
        self.push_expr(&t0, c0);
        self.push_expr(&t1, c1);
        for e in z {
            self.push_expr(&e.terms, e.constant);
        }
    }
}

impl Lowered {
    pub fn from_program(prog: &ConicProgram) -> Self {
        let mut rows = Rows { a: vec![], b: vec![] };
        let mut cones = Vec::new();

        let mut zero = 0;
        for c in prog.linear.iter().filter(|c| c.sense == Sense::Eq) {
            rows.push_expr(&c.row, -c.rhs);
            zero += 1;
        }
        for (i, &(lo, hi)) in prog.bounds.iter().enumerate() {
            if lo == hi {
                rows.push_expr(&[(i, 1.0)], -lo);
                zero += 1;
            }
        }
        if zero > 0 {
            cones.push(ConeBlock::Zero(zero));
        }

        let mut nonneg = 0;
        for c in &prog.linear {
            match c.sense {
                Sense::Le => {
                    let neg: Vec<(usize, f64)> = c.row.iter().map(|&(i, a)| (i, -a)).collect();
                    rows.push_expr(&neg, c.rhs);
                }
                Sense::Ge => rows.push_expr(&c.row, -c.rhs),
                Sense::Eq => continue,
            }
            nonneg += 1;
        }
        for (i, &(lo, hi)) in prog.bounds.iter().enumerate() {
            if lo == hi {
                continue;
            }
            if lo.is_finite() {
                rows.push_expr(&[(i, 1.0)], -lo);
                nonneg += 1;
            }
            if hi.is_finite() {
                rows.push_expr(&[(i, -1.0)], hi);
                nonneg += 1;
            }
        }
        if nonneg > 0 {
            cones.push(ConeBlock::Nonneg(nonneg));
        }

        for q in &prog.quad {
            // ||Fx||^2 <= -(c'x + d)  <=>  2 * (1/2) * (-(c'x + d)) >= ||Fx||^2.
            let y = AffineExpr {
                terms: q.linear.iter().map(|&(i, c)| (i, -c)).collect(),
                constant: -q.constant,
            };
            let z: Vec<AffineExpr> = q
                .factor
                .iter()
                .map(|r| AffineExpr {
                    terms: r.clone(),
                    constant: 0.0,
                })
                .collect();
            rows.push_rotated(&AffineExpr::constant(0.5), &y, &z);
            cones.push(ConeBlock::Soc(2 + z.len()));
        }
        for r in &prog.rsoc {
            rows.push_rotated(&r.x, &r.y, &r.z);
            cones.push(ConeBlock::Soc(2 + r.z.len()));
        }

        // P = 2 F'F, upper triangle.
        let mut p = std::collections::BTreeMap::<(usize, usize), f64>::new();
        for r in &prog.objective_quad {
            for &(i, ci) in r {
                for &(j, cj) in r {
                    if i <= j {
                        *p.entry((i, j)).or_insert(0.0) += 2.0 * ci * cj;
                    }
                }
            }
        }

        Self {
            n: prog.n_vars,
            p_triplets: p.into_iter().map(|((i, j), v)| (i, j, v)).collect(),
            q: prog.objective.clone(),
            a_triplets: rows.a,
            b: rows.b,
            cones,
            objective_constant: prog.objective_constant,
        }
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn p_csc(&self) -> CscMatrix<f64> {
        let (i, j, v) = split(&self.p_triplets);
        CscMatrix::new_from_triplets(self.n, self.n, i, j, v)
    }

    pub fn a_csc(&self) -> CscMatrix<f64> {
        let (i, j, v) = split(&self.a_triplets);
        CscMatrix::new_from_triplets(self.m(), self.n, i, j, v)
    }

    pub fn clarabel_cones(&self) -> Vec<SupportedConeT<f64>> {
        self.cones
            .iter()
            .map(|c| match *c {
                ConeBlock::Zero(d) => SupportedConeT::ZeroConeT(d),
                ConeBlock::Nonneg(d) => SupportedConeT::NonnegativeConeT(d),
                ConeBlock::Soc(d) => SupportedConeT::SecondOrderConeT(d),
            })
            .collect()
    }

    /// `P x` using the symmetric expansion of the stored upper triangle.
    pub fn p_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(i, j, v) in &self.p_triplets {
            out[i] += v * x[j];
            if i != j {
                out[j] += v * x[i];
            }
        }
        out
    }

    pub fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for &(i, j, v) in &self.a_triplets {
            out[i] += v * x[j];
        }
        out
    }

    pub fn at_mul(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(i, j, v) in &self.a_triplets {
            out[j] += v * z[i];
        }
        out
    }
}

fn split(t: &[(usize, usize, f64)]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let mut i = Vec::with_capacity(t.len());
    let mut j = Vec::with_capacity(t.len());
    let mut v = Vec::with_capacity(t.len());
    for &(a, b, c) in t {
        i.push(a);
        j.push(b);
        v.push(c);
    }
    (i, j, v)
}
