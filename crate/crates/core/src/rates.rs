//! Achievable rates under conjugate beamforming and the FL round-time model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::network::NetworkRealization;
use crate::params::SystemParams;
use crate::{Error, Result};

/// `a_k` above this value counts as selected.
pub const SELECTION_THRESHOLD: f64 = 1e-3;

pub fn is_selected(a_k: f64) -> bool {
    a_k > SELECTION_THRESHOLD
}

/// Power amplitudes and CPU frequencies of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// `v_mk = eta_mk^(1/2)`, M x N.
    pub v: DMatrix<f64>,
    /// `u_k = zeta_k^(1/2)`.
    pub u: Vec<f64>,
    /// CPU frequencies (cycles/s).
    pub f: Vec<f64>,
}

impl PowerAllocation {
    /// Largest violation of the power and frequency limits (0 when feasible).
    pub fn violation(&self, net: &NetworkRealization, p: &SystemParams) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.v.nrows() {
            let load: f64 = (0..self.v.ncols())
                .map(|k| net.sigma2_dl[(m, k)] * self.v[(m, k)].powi(2))
                .sum();
            worst = worst.max(load - 1.0);
        }
        for &v in self.v.iter() {
            worst = worst.max(-v);
        }
        for &u in &self.u {
            worst = worst.max(-u).max(u - 1.0);
        }
        for &f in &self.f {
            worst = worst.max(-f).max((f - p.f_max) / p.f_max);
        }
        worst
    }
}

/// UE selection vector, relaxed to `[0, 1]` during optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub a: Vec<f64>,
}

impl Selection {
    pub fn new(a: Vec<f64>) -> Self {
        Self { a }
    }

    pub fn all(n: usize) -> Self {
        Self { a: vec![1.0; n] }
    }

    /// Binary selection of the listed UEs.
    pub fn from_indices(n: usize, chosen: &[usize]) -> Self {
        let mut a = vec![0.0; n];
        for &k in chosen {
            a[k] = 1.0;
        }
        Self { a }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.a.iter().sum()
    }

    pub fn selected(&self) -> Vec<usize> {
        (0..self.a.len()).filter(|&k| is_selected(self.a[k])).collect()
    }

    pub fn count_selected(&self) -> usize {
        self.a.iter().filter(|&&x| is_selected(x)).count()
    }

    pub fn is_binary(&self) -> bool {
        self.a.iter().all(|&x| x == 0.0 || x == 1.0)
    }
}

/// Per-step times of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTiming {
    pub t_dl: Vec<f64>,
    pub t_cp: Vec<f64>,
    pub t_ul: Vec<f64>,
    pub round_time: f64,
    /// One-hot vectors: zero except at the bottleneck UE of each step, where
    /// they hold the time that UE would need at full selection weight.
    pub onehot_dl: Vec<f64>,
    pub onehot_cp: Vec<f64>,
    pub onehot_ul: Vec<f64>,
    /// Bottleneck UEs of the three steps.
    pub argmax: [usize; 3],
}

impl RoundTiming {
    /// Elementwise sum of the three one-hot vectors.
    pub fn onehot_sum(&self) -> Vec<f64> {
        (0..self.onehot_dl.len())
            .map(|k| self.onehot_dl[k] + self.onehot_cp[k] + self.onehot_ul[k])
            .collect()
    }
}

fn rate_prefactor(p: &SystemParams) -> f64 {
    p.data_fraction() * p.bandwidth
}

/// Downlink SINR terms `(Upsilon_k, Pi_k)` of every UE, with
/// `SINR_k = Upsilon_k^2 / Pi_k`. `Pi_k` includes the unit noise term.
pub fn downlink_terms(
    v: &DMatrix<f64>,
    net: &NetworkRealization,
    p: &SystemParams,
) -> Vec<(f64, f64)> {
    let (m_ap, n_ue) = v.shape();
    let s2 = &net.sigma2_dl;
    let beta = &net.beta;
    // Per-AP radiated power (normalized).
    let ap_power: Vec<f64> = (0..m_ap)
        .map(|m| (0..n_ue).map(|l| v[(m, l)].powi(2) * s2[(m, l)]).sum())
        .collect();
    let sqrt_rho = p.rho_d.sqrt();
    (0..n_ue)
        .map(|k| {
            let coherent: f64 = (0..m_ap).map(|m| v[(m, k)] * s2[(m, k)]).sum();
            let mut pc = 0.0;
            for l in 0..n_ue {
                if l == k || net.pilot_gram[(l, k)] == 0.0 {
                    continue;
                }
                let leak: f64 = (0..m_ap)
                    .map(|m| v[(m, l)] * s2[(m, l)] * beta[(m, k)] / beta[(m, l)])
                    .sum();
                pc += leak * leak * net.pilot_gram[(l, k)];
            }
            let iui: f64 = (0..m_ap).map(|m| ap_power[m] * beta[(m, k)]).sum();
            (sqrt_rho * coherent, p.rho_d * (pc + iui) + 1.0)
        })
        .collect()
}

/// Uplink SINR terms `(Psi_k, Xi_k)` of every UE, divided through by the
/// receiver noise `sum_m sigma_mk^2` so that `Xi_k >= 1`.
pub fn uplink_terms(u: &[f64], net: &NetworkRealization, p: &SystemParams) -> Vec<(f64, f64)> {
    let (m_ap, n_ue) = net.beta.shape();
    let s2 = &net.sigma2_ul;
    (0..n_ue)
        .map(|k| {
            let gain: f64 = (0..m_ap).map(|m| s2[(m, k)]).sum();
            let mut interference = 0.0;
            for l in 0..n_ue {
                let ul2 = u[l] * u[l];
                if ul2 != 0.0 {
                    interference += ul2 * uplink_coupling(net, k, l);
                }
            }
            (
                (p.rho_u * gain).sqrt() * u[k],
                p.rho_u * interference / gain + 1.0,
            )
        })
        .collect()
}

/// Power-normalized interference that UE `l` causes at the uplink detector
/// of UE `k`, before division by the receiver noise: pilot contamination
/// plus multi-user leakage.
pub fn uplink_coupling(net: &NetworkRealization, k: usize, l: usize) -> f64 {
    let m_ap = net.beta.nrows();
    let s2 = &net.sigma2_ul;
    let beta = &net.beta;
    let mut c: f64 = (0..m_ap).map(|m| s2[(m, k)] * beta[(m, l)]).sum();
    if l != k && net.pilot_gram[(k, l)] != 0.0 {
        let leak: f64 = (0..m_ap).map(|m| s2[(m, k)] * beta[(m, l)] / beta[(m, k)]).sum();
        c += leak * leak * net.pilot_gram[(k, l)];
    }
    c
}

/// Downlink SINR of every UE.
pub fn downlink_sinr(v: &DMatrix<f64>, net: &NetworkRealization, p: &SystemParams) -> Vec<f64> {
    downlink_terms(v, net, p).into_iter().map(|(x, y)| x * x / y).collect()
}

/// Uplink SINR of every UE.
pub fn uplink_sinr(u: &[f64], net: &NetworkRealization, p: &SystemParams) -> Vec<f64> {
    uplink_terms(u, net, p).into_iter().map(|(x, y)| x * x / y).collect()
}

/// `C` in `R = C ln(1 + SINR)` (bit/s).
pub fn rate_scale(p: &SystemParams) -> f64 {
    rate_prefactor(p) / std::f64::consts::LN_2
}

/// Achievable downlink rate of every UE (bit/s).
pub fn downlink_rate(v: &DMatrix<f64>, net: &NetworkRealization, p: &SystemParams) -> Vec<f64> {
    let c = rate_prefactor(p);
    downlink_sinr(v, net, p)
        .into_iter()
        .map(|s| c * s.ln_1p() / std::f64::consts::LN_2)
        .collect()
}

/// Achievable uplink rate of every UE (bit/s).
pub fn uplink_rate(u: &[f64], net: &NetworkRealization, p: &SystemParams) -> Vec<f64> {
    let c = rate_prefactor(p);
    uplink_sinr(u, net, p)
        .into_iter()
        .map(|s| c * s.ln_1p() / std::f64::consts::LN_2)
        .collect()
}

fn argmax_lowest(values: &[f64], mask: &[bool]) -> usize {
    let mut best = usize::MAX;
    for (k, &v) in values.iter().enumerate() {
        if mask[k] && (best == usize::MAX || v > values[best]) {
            best = k;
        }
    }
    best
}

/// Step times, round time and one-hot vectors of a round.
pub fn step_times(
    sel: &Selection,
    alloc: &PowerAllocation,
    net: &NetworkRealization,
    p: &SystemParams,
) -> Result<RoundTiming> {
    let rd = downlink_rate(&alloc.v, net, p);
    let ru = uplink_rate(&alloc.u, net, p);
    timing_from_rates(sel, &rd, &ru, &alloc.f, p)
}

/// [`step_times`] for precomputed rates.
pub fn timing_from_rates(
    sel: &Selection,
    rate_dl: &[f64],
    rate_ul: &[f64],
    freq: &[f64],
    p: &SystemParams,
) -> Result<RoundTiming> {
    let n = sel.len();
    if rate_dl.len() != n || rate_ul.len() != n || freq.len() != n {
        return Err(Error::Dimension(format!(
            "selection of {n} UEs vs rates {}/{} and {} frequencies",
            rate_dl.len(),
            rate_ul.len(),
            freq.len()
        )));
    }
    let mask: Vec<bool> = sel.a.iter().map(|&a| is_selected(a)).collect();
    if !mask.iter().any(|&m| m) {
        return Err(Error::Domain("no UE is selected".into()));
    }
    let cycles = p.round_cycles();
    let mut full = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut t = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for k in (0..n).filter(|&k| mask[k]) {
        if !(rate_dl[k] > 0.0) {
            return Err(Error::InfeasibleTiming { ue: k, reason: "zero downlink rate" });
        }
        if !(rate_ul[k] > 0.0) {
            return Err(Error::InfeasibleTiming { ue: k, reason: "zero uplink rate" });
        }
        if !(freq[k] > 0.0) {
            return Err(Error::InfeasibleTiming { ue: k, reason: "zero CPU frequency" });
        }
        full[0][k] = p.s_d / rate_dl[k];
        full[1][k] = cycles / freq[k];
        full[2][k] = p.s_u / rate_ul[k];
        for s in 0..3 {
            t[s][k] = sel.a[k] * full[s][k];
        }
    }
    let mut argmax = [0usize; 3];
    let mut onehot = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut round_time = 0.0;
    for s in 0..3 {
        let j = argmax_lowest(&t[s], &mask);
        argmax[s] = j;
        onehot[s][j] = full[s][j];
        round_time += t[s][j];
    }
    let [t_dl, t_cp, t_ul] = t;
    let [onehot_dl, onehot_cp, onehot_ul] = onehot;
    Ok(RoundTiming {
        t_dl,
        t_cp,
        t_ul,
        round_time,
        onehot_dl,
        onehot_cp,
        onehot_ul,
        argmax,
    })
}

/// Number of communication rounds, `q / sum_k a_k`.
pub fn round_count(sel: &Selection, p: &SystemParams) -> Result<f64> {
    let s = sel.sum();
    if !(s > 0.0) {
        return Err(Error::Domain("round count needs at least one selected UE".into()));
    }
    Ok(p.q / s)
}

/// Total execution time: round count times the mean round time of the samples.
pub fn total_time(sel: &Selection, samples: &[RoundTiming], p: &SystemParams) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("total time needs at least one round sample".into()));
    }
    let mean = samples.iter().map(|t| t.round_time).sum::<f64>() / samples.len() as f64;
    Ok(round_count(sel, p)? * mean)
}

/// Round count when `k` of `n` UEs are sampled afresh every round:
/// `q/K + q_tilde (1 - K/N)`.
pub fn bl2_round_count(k: usize, n: usize, p: &SystemParams) -> Result<f64> {
    if k < p.n_qol.max(1) || k > n {
        return Err(Error::Domain(format!(
            "per-round sample size {k} outside [{}, {n}]",
            p.n_qol.max(1)
        )));
    }
    Ok(p.q / k as f64 + p.q_tilde * (1.0 - k as f64 / n as f64))
}
