use nalgebra::DMatrix;
use rand::RngExt;

use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PilotAssignment {
    /// Pilot index of each UE in `1..=tau_t`.
    pub index: Vec<usize>,
    /// `gram[k][l] = 1` iff UEs k and l share a pilot.
    pub gram: DMatrix<f64>,
}

impl PilotAssignment {
    pub fn from_indices(index: Vec<usize>) -> Self {
        let n = index.len();
        let gram = DMatrix::from_fn(n, n, |k, l| if index[k] == index[l] { 1.0 } else { 0.0 });
        Self { index, gram }
    }
}

/// Each UE draws its pilot uniformly from `tau_t` orthogonal sequences,
/// independently of the others, so collisions can occur.
pub fn assign_pilots(n_ue: usize, tau_t: usize, seed: u64) -> Result<PilotAssignment> {
    if tau_t == 0 {
        return Err(Error::Config("pilot length must be positive".into()));
    }
    let mut rng = seed::rng(seed);
    let index = (0..n_ue).map(|_| rng.random_range(1..=tau_t)).collect();
    Ok(PilotAssignment::from_indices(index))
}

/// Variance of the MMSE channel estimate,
/// `tau rho beta_mk^2 / (tau rho sum_l beta_ml |phi_k^H phi_l|^2 + 1)`.
pub fn mmse_variance(
    beta: &DMatrix<f64>,
    pilot_gram: &DMatrix<f64>,
    tau_t: usize,
    rho_t: f64,
) -> Result<DMatrix<f64>> {
    let (m, n) = beta.shape();
    if pilot_gram.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "pilot gram {:?} for {n} UEs",
            pilot_gram.shape()
        )));
    }
    let tr = tau_t as f64 * rho_t;
    // Received pilot power at AP m on UE k's sequence.
    let contaminated = beta * pilot_gram;
    Ok(DMatrix::from_fn(m, n, |ap, k| {
        let b = beta[(ap, k)];
        tr * b * b / (tr * contaminated[(ap, k)] + 1.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn single_pilot_means_full_contamination() {
        let p = assign_pilots(6, 1, 3).unwrap();
        assert!(p.index.iter().all(|&i| i == 1));
        assert!(p.gram.iter().all(|&g| g == 1.0));
    }

    #[test]
    fn distinct_pilots_give_identity_gram() {
        let p = PilotAssignment::from_indices(vec![3, 1, 2]);
        assert_eq!(p.gram, DMatrix::identity(3, 3));
    }

    #[test]
    fn collision_rate_matches_birthday_bound() {
        for (n, tau) in [(5usize, 15usize), (4, 10), (15, 15)] {
            let expected = 1.0 - (0..n).map(|k| 1.0 - k as f64 / tau as f64).product::<f64>();
            let trials = 10_000;
            let hits = (0..trials)
                .filter(|&s| {
                    let p = assign_pilots(n, tau, s as u64).unwrap();
                    let mut seen = vec![false; tau + 1];
                    p.index.iter().any(|&i| std::mem::replace(&mut seen[i], true))
                })
                .count();
            let rate = hits as f64 / trials as f64;
            assert!((rate - expected).abs() < 0.03, "n={n} tau={tau}: {rate} vs {expected}");
        }
    }

    #[test]
    fn single_ue_half_variance() {
        let beta = DMatrix::from_element(1, 1, 1.0);
        let s = mmse_variance(&beta, &DMatrix::identity(1, 1), 1, 1.0).unwrap();
        assert!((s[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn high_snr_limit_is_beta() {
        let beta = DMatrix::from_row_slice(1, 2, &[2e-10, 3e-12]);
        let s = mmse_variance(&beta, &DMatrix::identity(2, 2), 2, 1e20).unwrap();
        for k in 0..2 {
            assert!((s[(0, k)] / beta[(0, k)] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn contamination_lowers_variance() {
        let beta = DMatrix::from_row_slice(1, 2, &[1e-9, 1e-9]);
        let clean = mmse_variance(&beta, &DMatrix::identity(2, 2), 2, 1e10).unwrap();
        let shared = mmse_variance(&beta, &DMatrix::from_element(2, 2, 1.0), 2, 1e10).unwrap();
        assert!(shared[(0, 0)] < clean[(0, 0)]);
    }

    #[test]
    fn monte_carlo_estimator_variance() {
        // Pilot reception y = sqrt(tau rho) sum_l g_l gram[k][l] + w, with
        // g_l ~ CN(0, beta_l), w ~ CN(0, 1); linear MMSE filter c = E[g y*]/E|y|^2.
        let beta = DMatrix::from_row_slice(1, 3, &[2.0, 0.7, 1.3]);
        let gram = PilotAssignment::from_indices(vec![1, 2, 1]).gram;
        let (tau, rho) = (3usize, 0.4);
        let formula = mmse_variance(&beta, &gram, tau, rho).unwrap();
        let a = (tau as f64 * rho).sqrt();
        let mut rng = crate::seed::rng(2024);
        let draws = 1_000_000;
        let mut acc = [0.0f64; 3];
        let cn = |rng: &mut crate::seed::SimRng, var: f64| {
            let s = (var / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            (s * re, s * im)
        };
        for _ in 0..draws {
            let g: Vec<(f64, f64)> = (0..3).map(|l| cn(&mut rng, beta[(0, l)])).collect();
            let w: Vec<(f64, f64)> = (0..3).map(|_| cn(&mut rng, 1.0)).collect();
            for k in 0..3 {
                let mut y = w[k];
                let mut power = 1.0;
                for l in 0..3 {
                    if gram[(k, l)] == 1.0 {
                        y.0 += a * g[l].0;
                        y.1 += a * g[l].1;
                        power += a * a * beta[(0, l)];
                    }
                }
                let c = a * beta[(0, k)] / power;
                acc[k] += c * c * (y.0 * y.0 + y.1 * y.1);
            }
        }
        for k in 0..3 {
            let emp = acc[k] / draws as f64;
            assert!(
                (emp / formula[(0, k)] - 1.0).abs() < 0.01,
                "UE {k}: {emp} vs {}",
                formula[(0, k)]
            );
        }
    }
}
