use crate::par::{self, ExecMode};
use crate::params::SystemParams;
use crate::rates::{round_count, Selection};
use crate::short_term::{sca_solve, ScaOptions};
use crate::stream::RealizationStream;
use crate::Result;

/// Execution time of a fixed selection, estimated over sampled rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub total_time: f64,
    pub rounds: f64,
    pub mean_round_time: f64,
    /// Optimized round time on each sampled state.
    pub round_times: Vec<f64>,
}

/// Optimizes power and frequency for `sel` on states `0..samples` of
/// `stream` and returns `G(a)` times the mean round time.
///
/// Every scheme goes through this function (or through [`mean_round_time`]
/// when the selection changes per round), so differences between schemes
/// come from the selection alone.
pub fn evaluate_selection(
    sel: &Selection,
    stream: &RealizationStream,
    p: &SystemParams,
    samples: usize,
    sca: &ScaOptions,
    mode: ExecMode,
) -> Result<Evaluation> {
    let rounds = round_count(sel, p)?;
    let round_times = mean_round_time(stream, p, samples, sca, mode, |_| sel.clone())?;
    let mean = round_times.iter().sum::<f64>() / round_times.len() as f64;
    Ok(Evaluation {
        total_time: rounds * mean,
        rounds,
        mean_round_time: mean,
        round_times,
    })
}

/// Optimized round time on states `0..samples`, with the selection of round
/// `r` given by `select(r)`.
pub fn mean_round_time<F>(
    stream: &RealizationStream,
    p: &SystemParams,
    samples: usize,
    sca: &ScaOptions,
    mode: ExecMode,
    select: F,
) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Selection + Sync + Send,
{
    if samples == 0 {
        return Err(crate::Error::Config("at least one evaluation sample is needed".into()));
    }
    par::map_range(mode, samples, |r| {
        let net = stream.realization(r as u64)?;
        sca_solve(&select(r), &net, p, sca).map(|s| s.objective())
    })
    .into_iter()
    .collect()
}
