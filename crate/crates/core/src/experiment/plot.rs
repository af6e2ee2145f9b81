//! Plot-data files for the standard figure layouts.
//!
//! Each curve goes to its own CSV file whose comment header names the
//! figure, the curve and the columns. A gnuplot stub that draws all curves
//! of a figure is written next to them. Cells of the figure grid that have
//! no successful trial are kept as `gap` rows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::baselines::Scheme;
use crate::network::Case;
use crate::{Error, Result};

use super::summary::{Aggregate, Stats};

pub const GAP: &str = "gap";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Execution time of every scheme against the AP count.
    Fig5,
    /// Execution time of the optimizer against the AP count.
    Fig6a,
    /// Selected UEs against the AP count.
    Fig6b,
    /// Execution time against the QoL threshold.
    Fig7a,
    /// Selected UEs against the QoL threshold.
    Fig7b,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    NAp,
    NQol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Time,
    Selected,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::Fig5,
        FigureId::Fig6a,
        FigureId::Fig6b,
        FigureId::Fig7a,
        FigureId::Fig7b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig5 => "fig5",
            FigureId::Fig6a => "fig6a",
            FigureId::Fig6b => "fig6b",
            FigureId::Fig7a => "fig7a",
            FigureId::Fig7b => "fig7b",
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            FigureId::Fig5 | FigureId::Fig6a | FigureId::Fig6b => Axis::NAp,
            FigureId::Fig7a | FigureId::Fig7b => Axis::NQol,
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            FigureId::Fig6b | FigureId::Fig7b => Metric::Selected,
            _ => Metric::Time,
        }
    }

    /// Schemes drawn; `None` means all.
    pub fn scheme(self) -> Option<Scheme> {
        match self {
            FigureId::Fig5 => None,
            _ => Some(Scheme::Opt),
        }
    }
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown figure {s:?}")))
    }
}

/// Identity of a curve: every aggregate key except the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CurveKey {
    pub scheme: Scheme,
    pub case: Case,
    pub n_ue: usize,
    side_bits: u64,
    /// AP count or QoL threshold, whichever is not on the x axis.
    pub fixed: usize,
}

impl CurveKey {
    pub fn side_km(&self) -> f64 {
        f64::from_bits(self.side_bits)
    }
}

/// One point of a parsed curve; `None` marks a gap.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub x: usize,
    pub stats: Option<Stats>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub key: CurveKey,
    pub points: Vec<PlotPoint>,
}

fn split(fig: FigureId, a: &Aggregate) -> (CurveKey, usize) {
    let (x, fixed) = match fig.axis() {
        Axis::NAp => (a.n_ap, a.n_qol),
        Axis::NQol => (a.n_qol, a.n_ap),
    };
    let key = CurveKey {
        scheme: a.scheme,
        case: a.case,
        n_ue: a.n_ue,
        side_bits: a.side_km.to_bits(),
        fixed,
    };
    (key, x)
}

fn labels(fig: FigureId) -> (&'static str, &'static str, &'static str, &'static str) {
    let (x, fixed) = match fig.axis() {
        Axis::NAp => ("n_ap", "n_qol"),
        Axis::NQol => ("n_qol", "n_ap"),
    };
    let y = match fig.metric() {
        Metric::Time => "total execution time (s)",
        Metric::Selected => "number of selected UEs",
    };
    let xl = match fig.axis() {
        Axis::NAp => "number of APs",
        Axis::NQol => "QoL threshold",
    };
    (x, fixed, y, xl)
}

/// Builds the curves of `fig` on the grid of x values seen in `aggs`.
pub fn curves(aggs: &[Aggregate], fig: FigureId) -> Result<Vec<Curve>> {
    let chosen: Vec<&Aggregate> = aggs
        .iter()
        .filter(|a| fig.scheme().is_none_or(|s| a.scheme == s))
        .collect();
    if chosen.is_empty() {
        return Err(Error::Config(format!(
            "no aggregates for {}; the sweep must include {}",
            fig.name(),
            fig.scheme().map_or("any scheme".to_string(), |s| s.to_string())
        )));
    }
    let mut grid = BTreeSet::new();
    let mut cells: BTreeMap<CurveKey, BTreeMap<usize, &Aggregate>> = BTreeMap::new();
    for a in chosen {
        let (k, x) = split(fig, a);
        grid.insert(x);
        cells.entry(k).or_default().insert(x, a);
    }
    Ok(cells
        .into_iter()
        .map(|(key, row)| Curve {
            key,
            points: grid
                .iter()
                .map(|&x| {
                    let a = row.get(&x);
                    PlotPoint {
                        x,
                        stats: a.and_then(|a| match fig.metric() {
                            Metric::Time => a.time(),
                            Metric::Selected => a.selected(),
                        }),
                        trials: a.map_or(0, |a| a.trials),
                    }
                })
                .collect(),
        })
        .collect())
}

fn file_name(fig: FigureId, key: &CurveKey) -> String {
    let (_, fixed, _, _) = labels(fig);
    format!(
        "{}_{}_{}_N{}_D{}_{}{}.csv",
        fig.name(),
        key.scheme,
        key.case,
        key.n_ue,
        key.side_km(),
        fixed,
        key.fixed
    )
}

/// Writes one CSV per curve and a gnuplot stub into `dir`; returns the
/// paths written, the stub last.
pub fn emit_plotdata(aggs: &[Aggregate], fig: FigureId, dir: &Path) -> Result<Vec<PathBuf>> {
    let cs = curves(aggs, fig)?;
    std::fs::create_dir_all(dir)?;
    let (x, fixed, y, xl) = labels(fig);
    let mut written = Vec::new();
    let mut plot = format!(
        "# gnuplot stub for {}\nset datafile separator ','\nset datafile missing '{GAP}'\n\
         set xlabel '{xl}'\nset ylabel '{y}'\nset key outside\nplot \\\n",
        fig.name()
    );
    for (i, c) in cs.iter().enumerate() {
        let name = file_name(fig, &c.key);
        let mut s = String::new();
        let _ = writeln!(s, "# figure {}", fig.name());
        let _ = writeln!(
            s,
            "# curve scheme={} case={} n_ue={} side_km={} {fixed}={}",
            c.key.scheme,
            c.key.case,
            c.key.n_ue,
            c.key.side_km(),
            c.key.fixed
        );
        let _ = writeln!(
            s,
            "# x = {x}; mean, std, ci95 = {y} over successful trials (ci95 is the 95% half-width); {GAP} = no successful trial"
        );
        let _ = writeln!(s, "x,mean,std,ci95,trials");
        for p in &c.points {
            match p.stats {
                Some(st) => {
                    let _ = writeln!(s, "{},{},{},{},{}", p.x, st.mean, st.std, st.ci95, p.trials);
                }
                None => {
                    let _ = writeln!(s, "{},{GAP},{GAP},{GAP},{}", p.x, p.trials);
                }
            }
        }
        let path = dir.join(&name);
        std::fs::write(&path, s)?;
        written.push(path);
        let sep = if i + 1 < cs.len() { ", \\" } else { "" };
        let _ = writeln!(
            plot,
            "  '{name}' using 1:2:4 with yerrorlines title '{} {} D={} {fixed}={}'{sep}",
            c.key.scheme,
            c.key.case,
            c.key.side_km(),
            c.key.fixed
        );
    }
    let stub = dir.join(format!("{}.gp", fig.name()));
    std::fs::write(&stub, plot)?;
    written.push(stub);
    Ok(written)
}

fn field<T: std::str::FromStr>(tok: &str, name: &str) -> Result<T> {
    tok.strip_prefix(name)
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad curve field {tok:?}, expected {name}=...")))
}

/// Parses one emitted curve file.
pub fn parse_curve(text: &str, fig: FigureId) -> Result<Curve> {
    let (_, fixed, _, _) = labels(fig);
    let mut key = None;
    let mut points = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# curve ") {
            let t: Vec<&str> = rest.split_whitespace().collect();
            if t.len() != 5 {
                return Err(Error::Parse(format!("bad curve header {line:?}")));
            }
            let side: f64 = field(t[3], "side_km")?;
            key = Some(CurveKey {
                scheme: field(t[0], "scheme")?,
                case: field(t[1], "case")?,
                n_ue: field(t[2], "n_ue")?,
                side_bits: side.to_bits(),
                fixed: field(t[4], fixed)?,
            });
            continue;
        }
        if line.starts_with('#') || line.starts_with("x,") || line.trim().is_empty() {
            continue;
        }
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != 5 {
            return Err(Error::Parse(format!("bad data row {line:?}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")));
        let stats = if c[1] == GAP {
            None
        } else {
            Some(Stats { mean: num(c[1])?, std: num(c[2])?, ci95: num(c[3])? })
        };
        points.push(PlotPoint {
            x: c[0].parse().map_err(|_| Error::Parse(format!("bad x {:?}", c[0])))?,
            stats,
            trials: c[4].parse().map_err(|_| Error::Parse(format!("bad count {:?}", c[4])))?,
        });
    }
    let key = key.ok_or_else(|| Error::Parse("missing curve header".into()))?;
    Ok(Curve { key, points })
}

/// Parses every curve of `fig` found in `dir`, sorted by key.
pub fn parse_plotdata(dir: &Path, fig: FigureId) -> Result<Vec<Curve>> {
    let prefix = format!("{}_", fig.name());
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with(&prefix) && name.ends_with(".csv") {
            out.push(parse_curve(&std::fs::read_to_string(&path)?, fig)?);
        }
    }
    out.sort_by_key(|c| c.key);
    Ok(out)
}
