//! Plain-text realization dump used for regression fixtures.
//!
//! ```text
//! realization v1
//! side <meters>
//! aps <M>
//! <x> <y>            (M lines)
//! ues <N>
//! <x> <y>            (N lines)
//! pilot <i_1> ... <i_N>
//! beta <M> <N>
//! <beta_m1> ... <beta_mN>   (M lines, linear scale)
//! ```
//!
//! Floats use the shortest round-trip representation, so parsing a dump
//! recovers the realization bit for bit.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::geometry::{Placement, Point};
use super::pilots::PilotAssignment;
use super::NetworkRealization;
use crate::params::SystemParams;
use crate::{Error, Result};

const HEADER: &str = "realization v1";

pub fn write_dump(net: &NetworkRealization) -> String {
    let pl = &net.placement;
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "side {}", pl.side);
    let _ = writeln!(s, "aps {}", pl.n_ap());
    for p in &pl.aps {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    let _ = writeln!(s, "ues {}", pl.n_ue());
    for p in &pl.ues {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    let pilots: Vec<String> = net.pilot.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(s, "pilot {}", pilots.join(" "));
    let _ = writeln!(s, "beta {} {}", net.n_ap(), net.n_ue());
    for m in 0..net.n_ap() {
        let row: Vec<String> = net.beta.row(m).iter().map(|b| b.to_string()).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        loop {
            match self.inner.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((i, l)) => return Ok((i + 1, l.trim())),
                None => return Err(Error::Parse("unexpected end of dump".into())),
            }
        }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (no, line) = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::Parse(format!("line {no}: expected `{key}`")));
        }
        Ok(parts.collect())
    }
}

fn num<T: std::str::FromStr>(tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad number {tok:?}")))
}

fn points(lines: &mut Lines<'_>, count: usize) -> Result<Vec<Point>> {
    (0..count)
        .map(|_| {
            let (no, l) = lines.next_line()?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() != 2 {
                return Err(Error::Parse(format!("line {no}: expected `x y`")));
            }
            Ok(Point::new(num(v[0])?, num(v[1])?))
        })
        .collect()
}

/// Parses a dump and recomputes the estimate variances with `params`.
pub fn parse_dump(text: &str, params: &SystemParams) -> Result<NetworkRealization> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, head) = lines.next_line()?;
    if head != HEADER {
        return Err(Error::Parse(format!("unknown header {head:?}")));
    }
    let side: f64 = num(lines.keyed("side")?.first().copied().unwrap_or(""))?;
    let n_ap: usize = num(lines.keyed("aps")?.first().copied().unwrap_or(""))?;
    let aps = points(&mut lines, n_ap)?;
    let n_ue: usize = num(lines.keyed("ues")?.first().copied().unwrap_or(""))?;
    let ues = points(&mut lines, n_ue)?;
    let pilot = lines
        .keyed("pilot")?
        .into_iter()
        .map(num)
        .collect::<Result<Vec<usize>>>()?;
    if pilot.len() != n_ue {
        return Err(Error::Parse(format!("{} pilots for {n_ue} UEs", pilot.len())));
    }
    let dims = lines.keyed("beta")?;
    if dims.len() != 2 || num::<usize>(dims[0])? != n_ap || num::<usize>(dims[1])? != n_ue {
        return Err(Error::Parse("beta shape does not match the placement".into()));
    }
    let mut beta = DMatrix::zeros(n_ap, n_ue);
    for m in 0..n_ap {
        let (no, l) = lines.next_line()?;
        let row: Vec<f64> = l.split_whitespace().map(num).collect::<Result<_>>()?;
        if row.len() != n_ue {
            return Err(Error::Parse(format!("line {no}: expected {n_ue} gains")));
        }
        for (k, b) in row.into_iter().enumerate() {
            beta[(m, k)] = b;
        }
    }
    NetworkRealization::from_parts(
        Placement { side, aps, ues },
        beta,
        PilotAssignment::from_indices(pilot),
        params,
    )
}
