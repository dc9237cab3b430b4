//! Experiment configuration: a flat TOML table, validated into an
//! [`Experiment`] before any trial runs.

use std::path::Path;

use serde::Deserialize;

use crate::detection::Lambda1Solver;
use crate::error::{Error, Result};
use crate::signal::{geometric_length, make_steered_filter, FilterBank, NoiseModel};
use crate::spectral::FourierGrid;
use crate::theory::{gain_for_gamma, nu_star, snr_freq, SpikedReference};

/// Which experiment a configuration file is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    NullDist,
    Roc,
    PhaseSweep,
    Spectrum,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::NullDist => "null-dist",
            Mode::Roc => "roc",
            Mode::PhaseSweep => "phase-sweep",
            Mode::Spectrum => "spectrum",
        }
    }
}

fn default_rank() -> usize {
    1
}

fn default_beta() -> f64 {
    10.0 / 11.0
}

fn default_theta() -> Vec<f64> {
    vec![1.0, 0.5]
}

fn default_trials() -> usize {
    1000
}

fn default_workers() -> usize {
    1
}

fn default_solver() -> Lambda1Solver {
    Lambda1Solver::Screened
}

/// Raw key/value configuration. Unknown keys are rejected.
///
/// ```toml
/// m = 60
/// n = 2048
/// b = 240          # optional, defaults to floor(n^0.7); rounded down to even
/// gamma1 = 2.0     # or c_snr = ..., not both
/// theta = [1.0, 0.5]
/// trials = 200
/// epsilon = [0.1]
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub b: Option<usize>,
    /// Growth exponent of `M ~ N^alpha`; recorded, not used.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_rank")]
    pub k: usize,
    #[serde(default)]
    pub c_snr: Option<f64>,
    /// Target `γ₁` at `ν*`; the signal gain is solved for.
    #[serde(default)]
    pub gamma1: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Filter length; defaults to the smallest `L` with `β^L < 1e-12`.
    #[serde(default)]
    pub filter_len: Option<usize>,
    /// Shared noise MA coefficients `θ(0), θ(1), ...`.
    #[serde(default = "default_theta")]
    pub theta: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    /// `γ₁` grid of the phase sweep.
    #[serde(default)]
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "default_solver")]
    pub solver: Lambda1Solver,
    /// Frequency index at which the null eigenvalue distribution is pooled.
    #[serde(default)]
    pub nu0_index: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Reuse the H0 noise stream for the H1 trial of the same index.
    #[serde(default)]
    pub paired: bool,
}

impl ExperimentConfig {
    /// Minimal configuration with every optional key at its default.
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            b: None,
            alpha: None,
            k: default_rank(),
            c_snr: None,
            gamma1: None,
            beta: default_beta(),
            filter_len: None,
            theta: default_theta(),
            trials: default_trials(),
            seed: 0,
            epsilon: Vec::new(),
            gammas: Vec::new(),
            mode: None,
            solver: default_solver(),
            nu0_index: 0,
            workers: default_workers(),
            paired: false,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Smoothing span: `b` if given, otherwise `⌊N^0.7⌋`, rounded down to even.
    pub fn span(&self) -> usize {
        let raw = self.b.unwrap_or_else(|| (self.n as f64).powf(0.7).floor() as usize);
        raw - raw % 2
    }
}

/// A validated configuration with its derived model objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub span: usize,
    /// `M / (B + 1)`.
    pub c: f64,
    pub grid: FourierGrid,
    pub noise: NoiseModel<f64>,
    /// Signal filter with unit gain; scaled by [`Experiment::c_snr`] for H1.
    pub shape: FilterBank<f64>,
    pub c_snr: f64,
    pub nu_star_index: usize,
    /// `λ₁(Ξ(ν*)) - 1` at the configured gain.
    pub gamma1: f64,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let cfg = &config;
        let span = cfg.span();
        if cfg.m == 0 {
            return Err(Error::Config("m must be positive".into()));
        }
        if !(cfg.m < span + 1 && span < cfg.n) {
            return Err(Error::Config(format!(
                "need M < B+1 <= N, got M = {}, B = {span}, N = {}",
                cfg.m, cfg.n
            )));
        }
        if cfg.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if cfg.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if cfg.nu0_index >= cfg.n {
            return Err(Error::Config(format!("nu0_index {} is off the grid of size {}", cfg.nu0_index, cfg.n)));
        }
        if let Some(e) = cfg.epsilon.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("epsilon values must be positive, got {e}")));
        }
        if cfg.gammas.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::Config("gammas must be finite and nonnegative".into()));
        }
        if cfg.theta.is_empty() {
            return Err(Error::Config("theta must list at least one coefficient".into()));
        }
        let grid = FourierGrid::new(cfg.n).map_err(config_err)?;
        let noise = NoiseModel::shared(&cfg.theta).map_err(config_err)?;
        let len = cfg.filter_len.unwrap_or_else(|| geometric_length(cfg.beta));
        let shape = make_steered_filter(cfg.m, cfg.k, 1.0, cfg.beta, len).map_err(config_err)?;
        let c_snr = match (cfg.c_snr, cfg.gamma1) {
            (Some(_), Some(_)) => return Err(Error::Config("give either c_snr or gamma1, not both".into())),
            (Some(g), None) if g >= 0.0 && g.is_finite() => g,
            (Some(g), None) => return Err(Error::Config(format!("c_snr must be finite and >= 0, got {g}"))),
            (None, Some(target)) => gain_for_gamma(&shape, &noise, grid, target).map_err(config_err)?,
            (None, None) => 0.0,
        };
        let (nu_star_index, unit_gamma) = nu_star(&shape, &noise, grid)?;
        Ok(Self {
            span,
            c: SpikedReference::<f64>::aspect_ratio(cfg.m, span),
            grid,
            noise,
            shape,
            c_snr,
            nu_star_index,
            gamma1: unit_gamma * c_snr * c_snr,
            config,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::new(ExperimentConfig::from_path(path)?)
    }

    /// The H1 filter at the configured gain.
    pub fn filter(&self) -> FilterBank<f64> {
        self.shape.scaled(self.c_snr)
    }

    /// Filter placing `λ₁(Ξ(ν*)) - 1` at `gamma`.
    pub fn filter_for_gamma(&self, gamma: f64) -> Result<FilterBank<f64>> {
        Ok(self.shape.scaled(gain_for_gamma(&self.shape, &self.noise, self.grid, gamma)?))
    }

    pub fn snr_freq(&self) -> Result<f64> {
        snr_freq(&self.filter(), &self.noise, self.grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_table() {
        let cfg = ExperimentConfig::from_toml_str(
            "m = 20\nn = 256\nb = 79\ngamma1 = 2.0\ntheta = [1.0]\ntrials = 5\nepsilon = [0.1, 0.2]\nmode = \"roc\"\nsolver = \"dense\"\n",
        )
        .unwrap();
        assert_eq!((cfg.m, cfg.n, cfg.trials), (20, 256, 5));
        assert_eq!(cfg.span(), 78);
        assert_eq!(cfg.mode, Some(Mode::Roc));
        assert_eq!(cfg.solver, Lambda1Solver::Dense);
        assert_eq!(cfg.epsilon, vec![0.1, 0.2]);
        let exp = Experiment::new(cfg).unwrap();
        assert!((exp.c - 20.0 / 79.0).abs() < 1e-15);
        assert!((exp.gamma1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::from_toml_str("m = 10\nn = 1024\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::new(10, 1024));
        assert_eq!(cfg.span(), 126);
        assert_eq!(cfg.theta, vec![1.0, 0.5]);
        assert_eq!(cfg.solver, Lambda1Solver::Screened);
        let exp = Experiment::new(cfg).unwrap();
        assert_eq!(exp.c_snr, 0.0);
        assert_eq!(exp.gamma1, 0.0);
    }

    #[test]
    fn rejects_unknown_and_malformed_keys() {
        for text in ["m = 10\nn = 64\nbogus = 1\n", "m = 10\n", "m = -1\nn = 64\n", "m = 10\nn = 64\nmode = \"fit\"\n"] {
            let err = ExperimentConfig::from_toml_str(text).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text}: {err}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn rejects_invalid_geometry() {
        let cases: Vec<Box<dyn Fn(&mut ExperimentConfig)>> = vec![
            Box::new(|c| c.m = 0),
            Box::new(|c| c.m = 100),
            Box::new(|c| c.b = Some(64)),
            Box::new(|c| c.trials = 0),
            Box::new(|c| c.workers = 0),
            Box::new(|c| c.nu0_index = 64),
            Box::new(|c| c.epsilon = vec![0.0]),
            Box::new(|c| c.gammas = vec![-1.0]),
            Box::new(|c| c.theta = vec![]),
            Box::new(|c| c.theta = vec![1.0, -1.0]),
            Box::new(|c| c.beta = 1.5),
            Box::new(|c| c.c_snr = Some(-1.0)),
            Box::new(|c| {
                c.c_snr = Some(1.0);
                c.gamma1 = Some(1.0)
            }),
        ];
        for (i, edit) in cases.iter().enumerate() {
            let mut cfg = ExperimentConfig::new(10, 64);
            cfg.b = Some(20);
            edit(&mut cfg);
            let err = Experiment::new(cfg).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "case {i}: {err}");
        }
    }

    #[test]
    fn filter_for_gamma_hits_target() {
        let mut cfg = ExperimentConfig::new(8, 128);
        cfg.b = Some(32);
        let exp = Experiment::new(cfg).unwrap();
        for gamma in [0.0, 0.5, 3.0] {
            let f = exp.filter_for_gamma(gamma).unwrap();
            let got = snr_freq(&f, &exp.noise, exp.grid).unwrap();
            assert!((got - gamma).abs() < 1e-9 * (1.0 + gamma));
        }
    }
}
