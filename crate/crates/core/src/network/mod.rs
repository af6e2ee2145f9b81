//! Network realizations: geometry, large-scale fading, pilots and the
//! statistics of the MMSE channel estimates.

mod dump;
mod fading;
mod geometry;
mod pilots;

pub use dump::{parse_dump, write_dump};
pub use fading::{
    large_scale_fading, path_loss_db, path_loss_matrix_db, sample_shadowing,
    shadowing_covariance, SHADOW_STD_DB,
};
pub use geometry::{
    generate_placement, perturb_ues, wrap_distance, Case, Placement, PlacementConfig, Point,
};
pub use pilots::{assign_pilots, mmse_variance, PilotAssignment};

use nalgebra::DMatrix;

use crate::params::SystemParams;
use crate::seed;
use crate::Result;

/// One large-scale state of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub placement: Placement,
    /// Large-scale gains, M x N, linear.
    pub beta: DMatrix<f64>,
    /// Pilot index of each UE, in `1..=tau_t`.
    pub pilot: Vec<usize>,
    /// `|phi_k^H phi_l|^2`, N x N with entries in {0, 1}.
    pub pilot_gram: DMatrix<f64>,
    /// Variance of the downlink-phase MMSE estimates, M x N.
    pub sigma2_dl: DMatrix<f64>,
    /// Variance of the uplink-phase MMSE estimates, M x N.
    pub sigma2_ul: DMatrix<f64>,
}

impl NetworkRealization {
    /// Draws shadowing and pilots for `placement` and derives the estimate
    /// statistics. Both estimation phases reuse the same pilots, so the two
    /// variance matrices coincide.
    pub fn draw(placement: &Placement, params: &SystemParams, seed: u64) -> Result<Self> {
        let pl = path_loss_matrix_db(placement);
        let shadow = sample_shadowing(placement, seed::derive(seed, &[seed::label("shadowing")]))?;
        let beta = large_scale_fading(&pl, &shadow)?;
        let pilots = assign_pilots(
            placement.n_ue(),
            params.tau_t,
            seed::derive(seed, &[seed::label("pilots")]),
        )?;
        Self::from_parts(placement.clone(), beta, pilots, params)
    }

    pub fn from_parts(
        placement: Placement,
        beta: DMatrix<f64>,
        pilots: PilotAssignment,
        params: &SystemParams,
    ) -> Result<Self> {
        let sigma2 = mmse_variance(&beta, &pilots.gram, params.tau_t, params.rho_t)?;
        Ok(Self {
            placement,
            beta,
            pilot: pilots.index,
            pilot_gram: pilots.gram,
            sigma2_ul: sigma2.clone(),
            sigma2_dl: sigma2,
        })
    }

    pub fn n_ap(&self) -> usize {
        self.beta.nrows()
    }

    pub fn n_ue(&self) -> usize {
        self.beta.ncols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PlacementConfig {
        PlacementConfig::new(12, 6, 0.5, Case::C1)
    }

    #[test]
    fn same_seed_same_realization() {
        let p = SystemParams::for_network(6);
        let pl = generate_placement(&cfg(), 3).unwrap();
        let a = NetworkRealization::draw(&pl, &p, 11).unwrap();
        let b = NetworkRealization::draw(&pl, &p, 11).unwrap();
        assert_eq!(a, b);
        let c = NetworkRealization::draw(&pl, &p, 12).unwrap();
        assert_ne!(a.beta, c.beta);
    }

    #[test]
    fn variances_strictly_inside_zero_beta() {
        let p = SystemParams::for_network(6);
        let pl = generate_placement(&cfg(), 4).unwrap();
        let net = NetworkRealization::draw(&pl, &p, 5).unwrap();
        for (s, b) in net.sigma2_dl.iter().zip(net.beta.iter()) {
            assert!(*s > 0.0 && s < b);
        }
        assert_eq!(net.sigma2_dl, net.sigma2_ul);
        let g = &net.pilot_gram;
        for k in 0..6 {
            assert_eq!(g[(k, k)], 1.0);
            for l in 0..6 {
                assert_eq!(g[(k, l)], g[(l, k)]);
            }
        }
    }
}
