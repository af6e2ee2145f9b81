//! Flat `key = value` experiment configuration.
//!
//! Lists are comma separated, `#` starts a comment, and every key is
//! optional (missing keys keep their defaults). `to_text` writes every key,
//! so a snapshot next to the results is enough to replay them.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::Scheme;
use crate::conic::SolveOptions;
use crate::long_term::{Alg2Options, Schedules};
use crate::network::Case;
use crate::params::SystemParams;
use crate::seed;
use crate::short_term::ScaOptions;
use crate::stream::DEFAULT_RADIUS;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cases: Vec<Case>,
    pub n_ap: Vec<usize>,
    /// Area side (km).
    pub side_km: Vec<f64>,
    pub n_qol: Vec<usize>,
    pub n_ue: usize,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub output_dir: PathBuf,
    /// Rounds sampled to estimate the mean round time.
    pub eval_samples: usize,
    /// UE displacement radius between rounds (m).
    pub ue_radius_m: f64,
    pub sca_eps: f64,
    pub sca_max_outer: usize,
    pub solver_tol: f64,
    pub solver_max_iter: u32,
    pub alg2_max_iter: usize,
    pub alg2_tol: f64,
    pub alg2_patience: usize,
    pub phi_exp: f64,
    pub pi_c: f64,
    pub lambda: f64,
    pub tau_prox: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let sca = ScaOptions::default();
        let alg2 = Alg2Options::default();
        let p = SystemParams::for_network(15);
        Self {
            cases: vec![Case::C1, Case::C2],
            n_ap: vec![20],
            side_km: vec![1.5],
            n_qol: vec![5],
            n_ue: 15,
            trials: 20,
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
            output_dir: PathBuf::from("results"),
            eval_samples: 20,
            ue_radius_m: DEFAULT_RADIUS,
            sca_eps: sca.eps,
            sca_max_outer: sca.max_outer,
            solver_tol: sca.solver.tol,
            solver_max_iter: sca.solver.max_iter,
            alg2_max_iter: alg2.max_iter,
            alg2_tol: alg2.tol,
            alg2_patience: alg2.patience,
            phi_exp: alg2.schedules.phi_exp,
            pi_c: alg2.schedules.pi_c,
            lambda: p.lambda,
            tau_prox: p.tau_prox,
        }
    }
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value {value:?} for {key}")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(key, s))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "cases" => self.cases = list(key, v)?,
            "n_ap" => self.n_ap = list(key, v)?,
            "side_km" => self.side_km = list(key, v)?,
            "n_qol" => self.n_qol = list(key, v)?,
            "n_ue" => self.n_ue = scalar(key, v)?,
            "trials" => self.trials = scalar(key, v)?,
            "seed" => self.seed = scalar(key, v)?,
            "schemes" => self.schemes = list(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "eval_samples" => self.eval_samples = scalar(key, v)?,
            "ue_radius_m" => self.ue_radius_m = scalar(key, v)?,
            "sca_eps" => self.sca_eps = scalar(key, v)?,
            "sca_max_outer" => self.sca_max_outer = scalar(key, v)?,
            "solver_tol" => self.solver_tol = scalar(key, v)?,
            "solver_max_iter" => self.solver_max_iter = scalar(key, v)?,
            "alg2_max_iter" => self.alg2_max_iter = scalar(key, v)?,
            "alg2_tol" => self.alg2_tol = scalar(key, v)?,
            "alg2_patience" => self.alg2_patience = scalar(key, v)?,
            "phi_exp" => self.phi_exp = scalar(key, v)?,
            "pi_c" => self.pi_c = scalar(key, v)?,
            "lambda" => self.lambda = scalar(key, v)?,
            "tau_prox" => self.tau_prox = scalar(key, v)?,
            other => return Err(Error::Parse(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a configuration on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k, v)
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn replay_keys(&self) -> Vec<(&'static str, String)> {
        vec![
            ("cases", join(&self.cases)),
            ("n_ap", join(&self.n_ap)),
            ("side_km", join(&self.side_km)),
            ("n_qol", join(&self.n_qol)),
            ("n_ue", self.n_ue.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("schemes", join(&self.schemes)),
            ("eval_samples", self.eval_samples.to_string()),
            ("ue_radius_m", self.ue_radius_m.to_string()),
            ("sca_eps", self.sca_eps.to_string()),
            ("sca_max_outer", self.sca_max_outer.to_string()),
            ("solver_tol", self.solver_tol.to_string()),
            ("solver_max_iter", self.solver_max_iter.to_string()),
            ("alg2_max_iter", self.alg2_max_iter.to_string()),
            ("alg2_tol", self.alg2_tol.to_string()),
            ("alg2_patience", self.alg2_patience.to_string()),
            ("phi_exp", self.phi_exp.to_string()),
            ("pi_c", self.pi_c.to_string()),
            ("lambda", self.lambda.to_string()),
            ("tau_prox", self.tau_prox.to_string()),
        ]
    }

    /// Every key, one per line. `parse(to_text())` recovers the config.
    pub fn to_text(&self) -> String {
        let mut out = format!("# config_hash = {}\n", self.config_hash());
        for (k, v) in self.replay_keys() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str(&format!("output_dir = {}\n", self.output_dir.display()));
        out
    }

    /// Hash of every key that affects results (the output directory does not).
    pub fn config_hash(&self) -> String {
        let text: String = self
            .replay_keys()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        format!("{:016x}", seed::label(&text))
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("cases", self.cases.is_empty()),
            ("n_ap", self.n_ap.is_empty()),
            ("side_km", self.side_km.is_empty()),
            ("n_qol", self.n_qol.is_empty()),
            ("schemes", self.schemes.is_empty()),
        ];
        if let Some((k, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Config(format!("axis {k} is empty")));
        }
        if self.trials == 0 || self.eval_samples == 0 {
            return Err(Error::Config("trials and eval_samples must be at least 1".into()));
        }
        if self.n_ue == 0 || self.n_ap.contains(&0) {
            return Err(Error::Config("UE and AP counts must be positive".into()));
        }
        if let Some(q) = self.n_qol.iter().find(|&&q| q > self.n_ue) {
            return Err(Error::Config(format!("n_qol = {q} exceeds n_ue = {}", self.n_ue)));
        }
        if self.side_km.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::Config("side_km must be positive".into()));
        }
        self.params(self.n_qol[0]).validate(self.n_ue)
    }

    pub fn params(&self, n_qol: usize) -> SystemParams {
        SystemParams {
            n_qol,
            lambda: self.lambda,
            tau_prox: self.tau_prox,
            ..SystemParams::for_network(self.n_ue)
        }
    }

    pub fn sca_options(&self) -> ScaOptions {
        ScaOptions {
            eps: self.sca_eps,
            max_outer: self.sca_max_outer,
            solver: SolveOptions {
                tol: self.solver_tol,
                max_iter: self.solver_max_iter,
            },
            random_start: None,
        }
    }

    pub fn alg2_options(&self) -> Alg2Options {
        Alg2Options {
            max_iter: self.alg2_max_iter,
            tol: self.alg2_tol,
            patience: self.alg2_patience,
            schedules: Schedules {
                phi_exp: self.phi_exp,
                pi_c: self.pi_c,
            },
            sca: self.sca_options(),
            ..Alg2Options::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("cases", "C2").unwrap();
        cfg.set("n_ap", "10, 20,40").unwrap();
        cfg.set("side_km", "1,1.5").unwrap();
        cfg.set("solver_tol", "1e-6").unwrap();
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.n_ap, vec![10, 20, 40]);
        assert_eq!(back.config_hash(), cfg.config_hash());
    }

    #[test]
    fn comments_and_defaults() {
        let cfg = ExperimentConfig::parse("# sweep\n\ntrials = 3 # few\nschemes = opt, BL2\n").unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.schemes, vec![Scheme::Opt, Scheme::Bl2]);
        assert_eq!(cfg.n_ue, 15);
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.config_hash(), b.config_hash());
        b.trials = 2;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("trials").is_err());
        assert!(ExperimentConfig::parse("trials = 0").is_err());
        assert!(ExperimentConfig::parse("n_ap = ").is_err());
        assert!(ExperimentConfig::parse("n_qol = 16").is_err());
        assert!(ExperimentConfig::parse("cases = C3").is_err());
    }
}
