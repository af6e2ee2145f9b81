//! Scalar system constants.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Scalar constants of the network and the learning task.
///
/// Powers `rho_*` are normalized by the noise power (linear, dimensionless).
/// Sizes are in bits, frequencies in cycles/s, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Coherence block length (samples).
    pub tau_c: f64,
    /// Pilot length (samples).
    pub tau_t: usize,
    pub rho_d: f64,
    pub rho_u: f64,
    pub rho_t: f64,
    pub noise_dbm: f64,
    /// Bandwidth (Hz).
    pub bandwidth: f64,
    /// Global update size (bits).
    pub s_d: f64,
    /// Local update size (bits).
    pub s_u: f64,
    /// Local computing iterations per round.
    pub local_iters: f64,
    /// Data samples per UE.
    pub samples: f64,
    /// CPU cycles per sample.
    pub cycles_per_sample: f64,
    /// Maximum CPU frequency (cycles/s).
    pub f_max: f64,
    /// Round-count constant.
    pub q: f64,
    /// Extra-round constant of the per-round sampling baseline.
    pub q_tilde: f64,
    /// Minimum number of participating UEs.
    pub n_qol: usize,
    /// Penalty weight of the binary relaxation.
    pub lambda: f64,
    /// Proximal constant of the master problem.
    pub tau_prox: f64,
}

impl SystemParams {
    /// Default constants for a network with `n_ue` UEs: pilot length equals
    /// the UE count, 1 W / 0.2 W / 0.2 W transmit powers over -92 dBm noise,
    /// 5 MB updates, 20 MHz.
    pub fn for_network(n_ue: usize) -> Self {
        let noise_dbm = -92.0;
        let noise_w = dbm_to_watts(noise_dbm);
        Self {
            tau_c: 200.0,
            tau_t: n_ue.max(1),
            rho_d: 1.0 / noise_w,
            rho_u: 0.2 / noise_w,
            rho_t: 0.2 / noise_w,
            noise_dbm,
            bandwidth: 20e6,
            s_d: 5.0 * 8e6,
            s_u: 5.0 * 8e6,
            local_iters: 5.0,
            samples: 5e6,
            cycles_per_sample: 20.0,
            f_max: 3e9,
            q: 90.0,
            q_tilde: 90.0,
            n_qol: 5.min(n_ue),
            lambda: 1.0,
            tau_prox: 1.0,
        }
    }

    /// Total CPU cycles of one round of local computation, `L * D_k * c_k`.
    pub fn round_cycles(&self) -> f64 {
        self.local_iters * self.samples * self.cycles_per_sample
    }

    /// Fraction of each coherence block left for data, `(tau_c - tau_t)/tau_c`.
    pub fn data_fraction(&self) -> f64 {
        (self.tau_c - self.tau_t as f64) / self.tau_c
    }

    pub fn validate(&self, n_ue: usize) -> Result<()> {
        if self.tau_t == 0 || self.tau_t as f64 >= self.tau_c {
            return Err(Error::Config(format!(
                "pilot length {} must be in [1, tau_c = {})",
                self.tau_t, self.tau_c
            )));
        }
        let positive = [
            ("rho_d", self.rho_d),
            ("rho_u", self.rho_u),
            ("rho_t", self.rho_t),
            ("bandwidth", self.bandwidth),
            ("s_d", self.s_d),
            ("s_u", self.s_u),
            ("local_iters", self.local_iters),
            ("samples", self.samples),
            ("cycles_per_sample", self.cycles_per_sample),
            ("f_max", self.f_max),
            ("q", self.q),
            ("tau_prox", self.tau_prox),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.q_tilde < 0.0 || self.lambda < 0.0 {
            return Err(Error::Config("q_tilde and lambda must be nonnegative".into()));
        }
        if self.n_qol > n_ue {
            return Err(Error::Config(format!(
                "n_qol = {} exceeds the UE count {n_ue}",
                self.n_qol
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = SystemParams::for_network(15);
        p.validate(15).unwrap();
        assert_eq!(p.tau_t, 15);
        // 1 W over -92 dBm is 10^12.2.
        assert!((p.rho_d.log10() - 12.2).abs() < 1e-12);
        assert!((p.rho_u / p.rho_d - 0.2).abs() < 1e-12);
        assert_eq!(p.round_cycles(), 5e8);
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = SystemParams::for_network(15);
        p.n_qol = 16;
        assert!(p.validate(15).is_err());
        let mut p = SystemParams::for_network(15);
        p.tau_t = 200;
        assert!(p.validate(15).is_err());
        let mut p = SystemParams::for_network(15);
        p.f_max = 0.0;
        assert!(p.validate(15).is_err());
    }
}
