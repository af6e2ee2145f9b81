use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::baselines::Scheme;
use crate::network::Case;
use crate::{Error, Result};

use super::sweep::ResultRow;

/// Mean, sample standard deviation and 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
}

impl Stats {
    /// `None` for an empty sample. The half-width uses the Student t
    /// quantile and is zero for a single value.
    pub fn of(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Some(Self { mean, std: 0.0, ci95: 0.0 });
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        Some(Self { mean, std, ci95: t * std / (n as f64).sqrt() })
    }
}

/// Aggregates of one (scheme, case, M, N, D, N_qol) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scheme: Scheme,
    pub case: Case,
    pub n_ap: usize,
    pub n_ue: usize,
    pub side_km: f64,
    pub n_qol: usize,
    /// Successful trials.
    pub trials: usize,
    pub failed: usize,
    pub time_mean: Option<f64>,
    pub time_std: Option<f64>,
    pub time_ci95: Option<f64>,
    pub selected_mean: Option<f64>,
    pub selected_std: Option<f64>,
    pub selected_ci95: Option<f64>,
}

impl Aggregate {
    pub fn time(&self) -> Option<Stats> {
        Some(Stats { mean: self.time_mean?, std: self.time_std?, ci95: self.time_ci95? })
    }

    pub fn selected(&self) -> Option<Stats> {
        Some(Stats { mean: self.selected_mean?, std: self.selected_std?, ci95: self.selected_ci95? })
    }
}

type Key = (Scheme, Case, usize, usize, u64, usize);

fn key(r: &ResultRow) -> Key {
    (r.scheme, r.case, r.n_ap, r.n_ue, r.side_km.to_bits(), r.n_qol)
}

/// Groups rows by cell; failed rows count towards `failed` only.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<Aggregate>> {
    if rows.is_empty() {
        return Err(Error::Config("nothing to summarize".into()));
    }
    let mut groups: BTreeMap<Key, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(key(r)).or_default().push(r);
    }
    Ok(groups
        .into_values()
        .map(|g| {
            let ok: Vec<&ResultRow> = g.iter().copied().filter(|r| r.is_ok()).collect();
            let times: Vec<f64> = ok.iter().filter_map(|r| r.total_time).collect();
            let sel: Vec<f64> = ok.iter().filter_map(|r| r.n_selected.map(|x| x as f64)).collect();
            let t = Stats::of(&times);
            let s = Stats::of(&sel);
            let r = g[0];
            Aggregate {
                scheme: r.scheme,
                case: r.case,
                n_ap: r.n_ap,
                n_ue: r.n_ue,
                side_km: r.side_km,
                n_qol: r.n_qol,
                trials: ok.len(),
                failed: g.len() - ok.len(),
                time_mean: t.map(|x| x.mean),
                time_std: t.map(|x| x.std),
                time_ci95: t.map(|x| x.ci95),
                selected_mean: s.map(|x| x.mean),
                selected_std: s.map(|x| x.std),
                selected_ci95: s.map(|x| x.ci95),
            }
        })
        .collect())
}

pub fn write_aggregates<W: Write>(aggs: &[Aggregate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for a in aggs {
        w.serialize(a)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregates<R: Read>(input: R) -> Result<Vec<Aggregate>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}
