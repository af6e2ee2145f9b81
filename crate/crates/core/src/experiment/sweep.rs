use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_bl1, run_bl2, Scheme};
use crate::evaluate::evaluate_selection;
use crate::long_term::run_algorithm2;
use crate::network::{generate_placement, Case, PlacementConfig};
use crate::par::{self, ExecMode};
use crate::seed;
use crate::stream::RealizationStream;
use crate::Result;

use super::config::ExperimentConfig;

/// One scheme on one trial of one axis point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub case: Case,
    pub n_ap: usize,
    pub n_ue: usize,
    pub side_km: f64,
    pub n_qol: usize,
    pub trial: usize,
    pub seed: u64,
    /// Execution time (s); empty on failure.
    pub total_time: Option<f64>,
    /// Selected UEs (OPT, BL1) or per-round sample size (BL2).
    pub n_selected: Option<usize>,
    /// Iterations of the long-term method (OPT only).
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub wallclock_s: f64,
    /// `ok`, or the error that ended the trial.
    pub status: String,
    pub config_hash: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// One cell of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub scheme: Scheme,
    pub case: Case,
    pub n_ap: usize,
    pub side_km: f64,
    pub n_qol: usize,
    pub trial: usize,
}

impl Job {
    /// Seed of the network and of every draw made for this job. The QoL
    /// threshold and the scheme are left out, so all schemes and thresholds
    /// of a trial face the same network states.
    pub fn seed(&self, base: u64) -> u64 {
        let case = match self.case {
            Case::C1 => 1,
            Case::C2 => 2,
        };
        seed::derive(base, &[case, self.n_ap as u64, self.side_km.to_bits(), self.trial as u64])
    }
}

/// The full cross product, in output order.
pub fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &case in &cfg.cases {
        for &n_ap in &cfg.n_ap {
            for &side_km in &cfg.side_km {
                for &n_qol in &cfg.n_qol {
                    for trial in 0..cfg.trials {
                        for &scheme in &cfg.schemes {
                            out.push(Job { scheme, case, n_ap, side_km, n_qol, trial });
                        }
                    }
                }
            }
        }
    }
    out
}

struct Outcome {
    total_time: f64,
    n_selected: usize,
    iterations: Option<usize>,
    converged: Option<bool>,
}

/// The network states of `job`: training states for the long-term method
/// and an independent set for evaluating every scheme.
pub fn job_streams(cfg: &ExperimentConfig, job: &Job) -> Result<(RealizationStream, RealizationStream)> {
    let s = job.seed(cfg.seed);
    let pcfg = PlacementConfig::new(job.n_ap, cfg.n_ue, job.side_km, job.case);
    let placement = generate_placement(&pcfg, seed::derive(s, &[seed::label("placement")]))?;
    let stream = RealizationStream::new(placement, cfg.params(job.n_qol), s).with_radius(cfg.ue_radius_m);
    Ok((stream.substream("train"), stream.substream("eval")))
}

fn run_job(cfg: &ExperimentConfig, job: &Job, mode: ExecMode) -> Result<Outcome> {
    let (train, eval) = job_streams(cfg, job)?;
    let p = cfg.params(job.n_qol);
    let s = job.seed(cfg.seed);
    let sca = cfg.sca_options();
    match job.scheme {
        Scheme::Opt => {
            let r = run_algorithm2(&train, &p, s, &cfg.alg2_options())?;
            let e = evaluate_selection(&r.a_binary, &eval, &p, cfg.eval_samples, &sca, mode)?;
            Ok(Outcome {
                total_time: e.total_time,
                n_selected: r.a_binary.count_selected(),
                iterations: Some(r.iterations),
                converged: Some(r.converged),
            })
        }
        Scheme::Bl1 | Scheme::Bl2 => {
            let run = if job.scheme == Scheme::Bl1 { run_bl1 } else { run_bl2 };
            let r = run(&eval, &p, s, cfg.eval_samples, &sca, mode)?;
            Ok(Outcome {
                total_time: r.total_time,
                n_selected: r.group_size,
                iterations: None,
                converged: None,
            })
        }
    }
}

/// Runs one job and records the outcome, or the error, as a row.
pub fn run_row(cfg: &ExperimentConfig, job: &Job, mode: ExecMode) -> ResultRow {
    let start = Instant::now();
    let outcome = run_job(cfg, job, mode);
    let mut row = ResultRow {
        scheme: job.scheme,
        case: job.case,
        n_ap: job.n_ap,
        n_ue: cfg.n_ue,
        side_km: job.side_km,
        n_qol: job.n_qol,
        trial: job.trial,
        seed: job.seed(cfg.seed),
        total_time: None,
        n_selected: None,
        iterations: None,
        converged: None,
        wallclock_s: 0.0,
        status: "ok".into(),
        config_hash: cfg.config_hash(),
    };
    match outcome {
        Ok(o) if o.total_time.is_finite() => {
            row.total_time = Some(o.total_time);
            row.n_selected = Some(o.n_selected);
            row.iterations = o.iterations;
            row.converged = o.converged;
        }
        Ok(o) => row.status = format!("failed: non-finite execution time {}", o.total_time),
        Err(e) => row.status = format!("failed: {e}"),
    }
    row.wallclock_s = start.elapsed().as_secs_f64();
    row
}

/// Runs every job of the sweep. Jobs run concurrently in parallel mode; the
/// table comes back in job order whatever the completion order.
pub fn run_sweep(cfg: &ExperimentConfig, mode: ExecMode) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    Ok(par::map(mode, jobs(cfg), |job| run_row(cfg, &job, mode)))
}

/// Runs the sweep and hands every row to `sink` from the calling thread,
/// in job order, as soon as all earlier rows are done.
pub fn run_sweep_streaming<F>(cfg: &ExperimentConfig, mode: ExecMode, mut sink: F) -> Result<Vec<ResultRow>>
where
    F: FnMut(&ResultRow) -> Result<()>,
{
    cfg.validate()?;
    let all = jobs(cfg);
    let (tx, rx) = std::sync::mpsc::channel::<(usize, ResultRow)>();
    let mut rows: Vec<Option<ResultRow>> = vec![None; all.len()];
    let mut next = 0;
    std::thread::scope(|scope| -> Result<()> {
        let worker = scope.spawn(move || {
            par::map(mode, all.into_iter().enumerate().collect(), |(i, job)| {
                let _ = tx.send((i, run_row(cfg, &job, mode)));
            });
        });
        for (i, row) in rx {
            rows[i] = Some(row);
            while let Some(Some(r)) = rows.get(next) {
                sink(r)?;
                next += 1;
            }
        }
        worker.join().expect("sweep worker panicked");
        Ok(())
    })?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}
