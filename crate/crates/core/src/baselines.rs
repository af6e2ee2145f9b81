//! Random-selection reference schemes.
//!
//! BL1 draws one UE set for the whole process. BL2 lets every UE take part
//! but samples a fresh subset of fixed size `K` in every round, which
//! inflates the round count to `q/K + q_tilde (1 - K/N)`.

use rand::seq::index;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::evaluate::{evaluate_selection, mean_round_time};
use crate::par::ExecMode;
use crate::params::SystemParams;
use crate::rates::{bl2_round_count, Selection};
use crate::seed::{self, SimRng};
use crate::short_term::ScaOptions;
use crate::stream::RealizationStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "OPT")]
    Opt,
    #[serde(rename = "BL1")]
    Bl1,
    #[serde(rename = "BL2")]
    Bl2,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Opt, Scheme::Bl1, Scheme::Bl2];
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Opt => "OPT",
            Scheme::Bl1 => "BL1",
            Scheme::Bl2 => "BL2",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "OPT" => Ok(Scheme::Opt),
            "BL1" => Ok(Scheme::Bl1),
            "BL2" => Ok(Scheme::Bl2),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub scheme: Scheme,
    /// One entry for BL1, one per sampled round for BL2.
    pub selection_trace: Vec<Selection>,
    /// `N_hat` for BL1, `K` for BL2.
    pub group_size: usize,
    /// `G(a)` for BL1, `G_tilde(K)` for BL2.
    pub rounds: f64,
    pub round_times: Vec<f64>,
    pub total_time: f64,
}

/// Uniform integer in `[max(n_qol, 1), n]`.
pub fn draw_group_size(n: usize, n_qol: usize, rng: &mut SimRng) -> Result<usize> {
    let lo = n_qol.max(1);
    if lo > n {
        return Err(Error::Config(format!("n_qol = {n_qol} exceeds the UE count {n}")));
    }
    Ok(rng.random_range(lo..=n))
}

/// `k` of `n` UEs, uniformly without replacement.
pub fn draw_subset(n: usize, k: usize, rng: &mut SimRng) -> Selection {
    Selection::from_indices(n, &index::sample(rng, n, k).into_vec())
}

/// The BL1 selection for `seed`.
pub fn bl1_selection(n: usize, n_qol: usize, seed_value: u64) -> Result<Selection> {
    let mut rng = seed::sub_rng(seed_value, "bl1", 0);
    let k = draw_group_size(n, n_qol, &mut rng)?;
    Ok(draw_subset(n, k, &mut rng))
}

/// Per-round BL2 selections: `K` once, then a fresh `K`-subset per round.
pub fn bl2_selections(n: usize, n_qol: usize, seed_value: u64, rounds: usize) -> Result<(usize, Vec<Selection>)> {
    let k = draw_group_size(n, n_qol, &mut seed::sub_rng(seed_value, "bl2", 0))?;
    Ok((k, round_subsets(n, k, seed_value, rounds)))
}

fn round_subsets(n: usize, k: usize, seed_value: u64, rounds: usize) -> Vec<Selection> {
    (0..rounds)
        .map(|r| draw_subset(n, k, &mut seed::sub_rng(seed_value, "bl2-round", r as u64)))
        .collect()
}

pub fn run_bl1(
    stream: &RealizationStream,
    p: &SystemParams,
    seed_value: u64,
    samples: usize,
    sca: &ScaOptions,
    mode: ExecMode,
) -> Result<BaselineResult> {
    let n = stream.base().n_ue();
    p.validate(n)?;
    let sel = bl1_selection(n, p.n_qol, seed_value)?;
    let e = evaluate_selection(&sel, stream, p, samples, sca, mode)?;
    Ok(BaselineResult {
        scheme: Scheme::Bl1,
        group_size: sel.count_selected(),
        selection_trace: vec![sel],
        rounds: e.rounds,
        round_times: e.round_times,
        total_time: e.total_time,
    })
}

/// Round `r` of the sample uses state `r` of `stream` and the `r`-th subset.
pub fn run_bl2(
    stream: &RealizationStream,
    p: &SystemParams,
    seed_value: u64,
    samples: usize,
    sca: &ScaOptions,
    mode: ExecMode,
) -> Result<BaselineResult> {
    let n = stream.base().n_ue();
    p.validate(n)?;
    let (k, subsets) = bl2_selections(n, p.n_qol, seed_value, samples)?;
    let rounds = bl2_round_count(k, n, p)?;
    let round_times = mean_round_time(stream, p, samples, sca, mode, |r| subsets[r].clone())?;
    let mean = round_times.iter().sum::<f64>() / round_times.len() as f64;
    Ok(BaselineResult {
        scheme: Scheme::Bl2,
        selection_trace: subsets,
        group_size: k,
        rounds,
        total_time: rounds * mean,
        round_times,
    })
}
