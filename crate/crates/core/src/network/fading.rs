use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use super::geometry::{wrap_distance, Placement};
use crate::seed;
use crate::{Error, Result};

/// Shadowing standard deviation (dB).
pub const SHADOW_STD_DB: f64 = 4.0;
/// Distance at which the shadowing correlation halves (m).
const DECORRELATION_M: f64 = 9.0;
const MIN_DISTANCE_M: f64 = 1.0;

/// Path loss in dB at distance `d` meters; distances under 1 m are clamped.
pub fn path_loss_db(d: f64) -> f64 {
    -30.5 - 36.7 * d.max(MIN_DISTANCE_M).log10()
}

/// M x N matrix of AP-UE path losses (dB) using wrapped distances.
pub fn path_loss_matrix_db(placement: &Placement) -> DMatrix<f64> {
    DMatrix::from_fn(placement.n_ap(), placement.n_ue(), |m, k| {
        path_loss_db(wrap_distance(placement.aps[m], placement.ues[k], placement.side))
    })
}

/// Covariance of one AP's shadowing vector across UEs: `16 * 2^(-delta/9 m)`.
pub fn shadowing_covariance(placement: &Placement) -> DMatrix<f64> {
    let n = placement.n_ue();
    DMatrix::from_fn(n, n, |k, l| {
        let delta = wrap_distance(placement.ues[k], placement.ues[l], placement.side);
        SHADOW_STD_DB * SHADOW_STD_DB * 2f64.powf(-delta / DECORRELATION_M)
    })
}

/// Symmetric square root factor `A` with `A A^T = C`. Eigenvalues below a
/// relative floor are treated as zero so co-located UEs get identical rows.
fn covariance_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(cov.clone());
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-12 * top.max(1.0);
    let mut factor = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -1e-9 * top.max(1.0) {
            return Err(Error::Domain(format!(
                "shadowing covariance has eigenvalue {lam:e}"
            )));
        }
        let s = if lam > floor { lam.sqrt() } else { 0.0 };
        factor.column_mut(j).scale_mut(s);
    }
    Ok(factor)
}

/// M x N shadowing matrix in dB: rows independent, each row `N(0, C)` with
/// `C` from [`shadowing_covariance`].
pub fn sample_shadowing(placement: &Placement, seed: u64) -> Result<DMatrix<f64>> {
    let (m, n) = (placement.n_ap(), placement.n_ue());
    let factor = covariance_factor(&shadowing_covariance(placement))?;
    let mut rng = seed::rng(seed);
    let mut out = DMatrix::zeros(m, n);
    for ap in 0..m {
        let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let row = &factor * z;
        out.row_mut(ap).copy_from(&row.transpose());
    }
    Ok(out)
}

/// Elementwise `10^(PL/10) * 10^(F/10)`.
pub fn large_scale_fading(pl_db: &DMatrix<f64>, f_db: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if pl_db.shape() != f_db.shape() {
        return Err(Error::Dimension(format!(
            "path loss {:?} vs shadowing {:?}",
            pl_db.shape(),
            f_db.shape()
        )));
    }
    Ok(pl_db.zip_map(f_db, |pl, f| 10f64.powf((pl + f) / 10.0)))
}

#[cfg(test)]
mod tests {
    use super::super::geometry::Point;
    use super::*;

    fn placement(ues: Vec<Point>, n_ap: usize) -> Placement {
        Placement {
            side: 1000.0,
            aps: vec![Point::new(500.0, 500.0); n_ap],
            ues,
        }
    }

    #[test]
    fn path_loss_values() {
        assert!((path_loss_db(1.0) + 30.5).abs() < 1e-12);
        assert!((path_loss_db(10.0) + 67.2).abs() < 1e-12);
        assert!((path_loss_db(100.0) + 103.9).abs() < 1e-12);
        // Clamped below 1 m.
        assert_eq!(path_loss_db(0.0), path_loss_db(1.0));
    }

    #[test]
    fn fading_combines_in_linear_scale() {
        let z = DMatrix::from_element(1, 1, 0.0);
        assert_eq!(large_scale_fading(&z, &z).unwrap()[(0, 0)], 1.0);
        let pl = DMatrix::from_element(1, 1, -30.5);
        let b = large_scale_fading(&pl, &z).unwrap()[(0, 0)];
        assert!((b / 10f64.powf(-3.05) - 1.0).abs() < 1e-12);
        let f = DMatrix::from_element(1, 1, 4.0);
        let b = large_scale_fading(&pl, &f).unwrap()[(0, 0)];
        assert!((b / 10f64.powf(-2.65) - 1.0).abs() < 1e-12);
        assert!(large_scale_fading(&pl, &DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn covariance_kernel_at_nine_meters() {
        let pl = placement(vec![Point::new(0.0, 0.0), Point::new(9.0, 0.0)], 1);
        let c = shadowing_covariance(&pl);
        assert!((c[(0, 1)] - 8.0).abs() < 1e-12);
        assert_eq!(c[(0, 0)], 16.0);
    }

    #[test]
    fn colocated_ues_share_shadowing() {
        let pl = placement(
            vec![Point::new(10.0, 10.0), Point::new(10.0, 10.0), Point::new(300.0, 40.0)],
            4,
        );
        let f = sample_shadowing(&pl, 3).unwrap();
        for m in 0..4 {
            assert!((f[(m, 0)] - f[(m, 1)]).abs() < 1e-9);
            assert!((f[(m, 0)] - f[(m, 2)]).abs() > 1e-6);
        }
    }

    #[test]
    fn sample_covariance_matches_kernel() {
        // 10^5 independent rows (one AP per row) of a 4-UE layout.
        let ues = vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(9.0, 0.0),
            Point::new(30.0, 0.0),
        ];
        let pl = placement(ues, 100_000);
        let f = sample_shadowing(&pl, 77).unwrap();
        let c = shadowing_covariance(&pl);
        let rows = f.nrows() as f64;
        for k in 0..4 {
            for l in 0..4 {
                let emp: f64 = f.column(k).dot(&f.column(l)) / rows;
                if c[(k, l)] > 1.0 {
                    assert!(
                        (emp / c[(k, l)] - 1.0).abs() < 0.05,
                        "({k},{l}): {emp} vs {}",
                        c[(k, l)]
                    );
                } else {
                    assert!((emp - c[(k, l)]).abs() < 0.05 * 16.0);
                }
            }
        }
    }

    #[test]
    fn beta_decreases_with_distance_without_shadowing() {
        let ues: Vec<Point> = (0..20).map(|i| Point::new(500.0 + 20.0 * i as f64, 500.0)).collect();
        let pl = placement(ues, 1);
        let beta = large_scale_fading(&path_loss_matrix_db(&pl), &DMatrix::zeros(1, 20)).unwrap();
        for k in 1..20 {
            assert!(beta[(0, k)] < beta[(0, k - 1)]);
        }
    }
}
