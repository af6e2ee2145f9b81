use rand::seq::index;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// AP/UE placement model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    /// UEs cluster around hotspots; APs spread uniformly over the AP grid.
    C1,
    /// UEs and APs both cluster around hotspots.
    C2,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Case::C1 => f.write_str("C1"),
            Case::C2 => f.write_str("C2"),
        }
    }
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "C1" | "c1" => Ok(Case::C1),
            "C2" | "c2" => Ok(Case::C2),
            other => Err(Error::Parse(format!("unknown case {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementConfig {
    pub n_ap: usize,
    pub n_ue: usize,
    /// Side of the square area (km).
    pub side_km: f64,
    pub case: Case,
    /// Lines per axis of the UE grid.
    pub grid_lines: usize,
    /// Number of hotspots.
    pub hotspots: usize,
    /// Hotspots that host AP clusters (C2 only).
    pub ap_clusters: usize,
}

impl PlacementConfig {
    pub fn new(n_ap: usize, n_ue: usize, side_km: f64, case: Case) -> Self {
        Self {
            n_ap,
            n_ue,
            side_km,
            case,
            grid_lines: 15,
            hotspots: 20,
            ap_clusters: 3,
        }
    }

    pub fn side_m(&self) -> f64 {
        1000.0 * self.side_km
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ap == 0 || self.n_ue == 0 {
            return Err(Error::Config("need at least one AP and one UE".into()));
        }
        if !(self.side_km > 0.0 && self.side_km.is_finite()) {
            return Err(Error::Config(format!("side must be positive, got {}", self.side_km)));
        }
        if self.grid_lines == 0 || self.hotspots == 0 {
            return Err(Error::Config("grid and hotspot counts must be positive".into()));
        }
        if self.case == Case::C2 && (self.ap_clusters == 0 || self.ap_clusters > self.hotspots) {
            return Err(Error::Config(format!(
                "AP cluster count {} must be in [1, {}]",
                self.ap_clusters, self.hotspots
            )));
        }
        let cells = self.grid_lines * self.grid_lines;
        if self.n_ap > cells {
            return Err(Error::Config(format!(
                "grid of {cells} points cannot host {} distinct APs",
                self.n_ap
            )));
        }
        if self.n_ue > cells {
            return Err(Error::Config(format!(
                "grid of {cells} points cannot host {} distinct UEs",
                self.n_ue
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Side of the (wrapped) square, meters.
    pub side: f64,
    pub aps: Vec<Point>,
    pub ues: Vec<Point>,
}

impl Placement {
    pub fn n_ap(&self) -> usize {
        self.aps.len()
    }

    pub fn n_ue(&self) -> usize {
        self.ues.len()
    }
}

/// Euclidean distance on the torus of the given side.
pub fn wrap_distance(p: Point, q: Point, side: f64) -> f64 {
    let axis = |d: f64| {
        let d = d.abs() % side;
        d.min(side - d)
    };
    axis(p.x - q.x).hypot(axis(p.y - q.y))
}

fn wrap_coord(v: f64, side: f64) -> f64 {
    let w = v.rem_euclid(side);
    // rem_euclid can round up to `side` for tiny negative inputs.
    if w >= side {
        0.0
    } else {
        w
    }
}

fn grid(lines: usize, side: f64, offset: f64) -> Vec<Point> {
    let h = side / lines as f64;
    let mut pts = Vec::with_capacity(lines * lines);
    for i in 0..lines {
        for j in 0..lines {
            pts.push(Point::new((i as f64 + offset) * h, (j as f64 + offset) * h));
        }
    }
    pts
}

/// Index of the free grid point nearest to `target`; ties go to the lowest index.
fn nearest_free(grid: &[Point], taken: &[bool], target: Point, side: f64) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, g) in grid.iter().enumerate() {
        if taken[i] {
            continue;
        }
        let d = wrap_distance(*g, target, side);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}

/// Draws a placement.
///
/// Hotspots are uniform over the square. Each UE picks a hotspot uniformly
/// and occupies the free UE-grid point nearest to it. In C1 the APs take
/// `n_ap` distinct points of the interleaved AP grid uniformly at random; in
/// C2 `ap_clusters` hotspots are drawn without replacement and AP `m` takes
/// the free AP-grid point nearest to cluster `m mod ap_clusters`.
pub fn generate_placement(cfg: &PlacementConfig, seed: u64) -> Result<Placement> {
    cfg.validate()?;
    let side = cfg.side_m();
    let mut rng = seed::rng(seed);

    let hotspots: Vec<Point> = (0..cfg.hotspots)
        .map(|_| Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side)))
        .collect();

    let ue_grid = grid(cfg.grid_lines, side, 0.0);
    let mut taken = vec![false; ue_grid.len()];
    let mut ues = Vec::with_capacity(cfg.n_ue);
    for _ in 0..cfg.n_ue {
        let h = hotspots[rng.random_range(0..cfg.hotspots)];
        let i = nearest_free(&ue_grid, &taken, h, side).expect("grid capacity validated");
        taken[i] = true;
        ues.push(ue_grid[i]);
    }

    let ap_grid = grid(cfg.grid_lines, side, 0.5);
    let aps = match cfg.case {
        Case::C1 => index::sample(&mut rng, ap_grid.len(), cfg.n_ap)
            .into_iter()
            .map(|i| ap_grid[i])
            .collect(),
        Case::C2 => {
            let clusters: Vec<Point> = index::sample(&mut rng, cfg.hotspots, cfg.ap_clusters)
                .into_iter()
                .map(|i| hotspots[i])
                .collect();
            let mut taken = vec![false; ap_grid.len()];
            let mut aps = Vec::with_capacity(cfg.n_ap);
            for m in 0..cfg.n_ap {
                let c = clusters[m % clusters.len()];
                let i = nearest_free(&ap_grid, &taken, c, side).expect("grid capacity validated");
                taken[i] = true;
                aps.push(ap_grid[i]);
            }
            aps
        }
    };

    Ok(Placement { side, aps, ues })
}

/// Moves every UE to a uniform point of the disk of `radius` meters around
/// its position (wrapped). APs are unchanged.
pub fn perturb_ues(placement: &Placement, radius: f64, seed: u64) -> Placement {
    let mut rng = seed::rng(seed);
    let side = placement.side;
    let ues = placement
        .ues
        .iter()
        .map(|p| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            Point::new(
                wrap_coord(p.x + r * theta.cos(), side),
                wrap_coord(p.y + r * theta.sin(), side),
            )
        })
        .collect();
    Placement {
        side,
        aps: placement.aps.clone(),
        ues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force over the 3x3 periodic images.
    fn image_distance(p: Point, q: Point, side: f64) -> f64 {
        let mut best = f64::INFINITY;
        for dx in [-1.0, 0.0, 1.0] {
            for dy in [-1.0, 0.0, 1.0] {
                let d = (p.x - (q.x + dx * side)).hypot(p.y - (q.y + dy * side));
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn wrap_identifies_edges() {
        let s = 1000.0;
        assert_eq!(wrap_distance(Point::new(0.0, 0.0), Point::new(s, 0.0), s), 0.0);
        assert_eq!(wrap_distance(Point::new(0.0, 0.0), Point::new(s / 2.0, 0.0), s), s / 2.0);
    }

    proptest! {
        #[test]
        fn wrap_matches_image_enumeration(
            px in 0.0..1500.0f64, py in 0.0..1500.0f64,
            qx in 0.0..1500.0f64, qy in 0.0..1500.0f64,
        ) {
            let (p, q) = (Point::new(px, py), Point::new(qx, qy));
            let d = wrap_distance(p, q, 1500.0);
            prop_assert!((d - image_distance(p, q, 1500.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn placement_shape_and_bounds() {
        for case in [Case::C1, Case::C2] {
            let cfg = PlacementConfig::new(40, 15, 1.5, case);
            let pl = generate_placement(&cfg, 9).unwrap();
            assert_eq!(pl.n_ap(), 40);
            assert_eq!(pl.n_ue(), 15);
            for p in pl.aps.iter().chain(&pl.ues) {
                assert!((0.0..=1500.0).contains(&p.x) && (0.0..=1500.0).contains(&p.y));
            }
            // Distinct grid points.
            for (i, a) in pl.aps.iter().enumerate() {
                for b in &pl.aps[i + 1..] {
                    assert!(wrap_distance(*a, *b, pl.side) > 1.0);
                }
            }
        }
    }

    #[test]
    fn c2_aps_form_tight_clusters() {
        let cfg = PlacementConfig::new(40, 15, 1.5, Case::C2);
        let pl = generate_placement(&cfg, 21).unwrap();
        // Each AP is within a few grid cells of one of at most 3 cluster
        // centres, so the AP cloud is far more concentrated than in C1.
        let spread = |aps: &[Point]| {
            let mut total = 0.0;
            for a in aps {
                let mut nn = f64::INFINITY;
                for b in aps {
                    if a != b {
                        nn = nn.min(wrap_distance(*a, *b, pl.side));
                    }
                }
                total += nn;
            }
            total / aps.len() as f64
        };
        let h = 1500.0 / 15.0;
        assert!((spread(&pl.aps) - h).abs() < 1e-6, "C2 APs sit on adjacent grid points");
        let mut far = 0;
        let c1 = generate_placement(&PlacementConfig::new(40, 15, 1.5, Case::C1), 21).unwrap();
        for a in &c1.aps {
            let nn = c1
                .aps
                .iter()
                .filter(|b| *b != a)
                .map(|b| wrap_distance(*a, *b, c1.side))
                .fold(f64::INFINITY, f64::min);
            if nn > h * 1.01 {
                far += 1;
            }
        }
        assert!(far > 0, "uniform C1 APs have isolated members");
    }

    #[test]
    fn single_ap_single_ue() {
        let cfg = PlacementConfig::new(1, 1, 0.7, Case::C1);
        let pl = generate_placement(&cfg, 0).unwrap();
        let h = 700.0 / 15.0;
        let on_grid = |v: f64, off: f64| ((v / h - off).round() - (v / h - off)).abs() < 1e-9;
        assert!(on_grid(pl.ues[0].x, 0.0) && on_grid(pl.ues[0].y, 0.0));
        assert!(on_grid(pl.aps[0].x, 0.5) && on_grid(pl.aps[0].y, 0.5));
    }

    #[test]
    fn deterministic_in_seed() {
        let cfg = PlacementConfig::new(20, 15, 1.0, Case::C2);
        assert_eq!(generate_placement(&cfg, 5).unwrap(), generate_placement(&cfg, 5).unwrap());
        assert_ne!(generate_placement(&cfg, 5).unwrap(), generate_placement(&cfg, 6).unwrap());
    }

    #[test]
    fn too_many_aps_is_config_error() {
        let mut cfg = PlacementConfig::new(226, 15, 1.0, Case::C1);
        assert!(matches!(generate_placement(&cfg, 0), Err(Error::Config(_))));
        cfg.n_ap = 225;
        assert!(generate_placement(&cfg, 0).is_ok());
        let mut cfg = PlacementConfig::new(10, 5, 1.0, Case::C2);
        cfg.ap_clusters = 21;
        assert!(generate_placement(&cfg, 0).is_err());
    }

    #[test]
    fn perturbation_stays_in_disk() {
        let cfg = PlacementConfig::new(10, 15, 1.0, Case::C1);
        let pl = generate_placement(&cfg, 1).unwrap();
        assert_eq!(perturb_ues(&pl, 0.0, 3), pl);
        for s in 0..50 {
            let moved = perturb_ues(&pl, 5.0, s);
            assert_eq!(moved.aps, pl.aps);
            for (a, b) in moved.ues.iter().zip(&pl.ues) {
                assert!(wrap_distance(*a, *b, pl.side) <= 5.0 + 1e-9);
            }
        }
    }

    #[test]
    fn perturbation_is_uniform_on_disk() {
        // Mean radius of a uniform point in a disk of radius r is 2r/3.
        let pl = Placement {
            side: 1000.0,
            aps: vec![],
            ues: vec![Point::new(500.0, 500.0); 1000],
        };
        let mut sum = 0.0;
        let mut count = 0usize;
        for s in 0..100 {
            let moved = perturb_ues(&pl, 5.0, s);
            for u in &moved.ues {
                sum += wrap_distance(*u, Point::new(500.0, 500.0), 1000.0);
                count += 1;
            }
        }
        let mean = sum / count as f64;
        assert!((mean / (10.0 / 3.0) - 1.0).abs() < 0.02, "mean radius {mean}");
    }
}
