//! Seeded Monte-Carlo experiments: null distribution, ROC curves, phase
//! sweeps and single-realization spectra.

use rayon::prelude::*;

use crate::detection::{coherence_spectrum, scan_block, scan_frame, Lambda1Solver, ScanResult};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::signal::{generate_noise, generate_signal, superpose, FilterBank, TimeSeriesBlock};
use crate::spectral::{coherence, fft_frame, smoothed_periodogram_at, DEFAULT_DEAD_CHANNEL_FLOOR};
use crate::stats::{ks_distance, median, quantile_sorted};
use crate::theory::{mp_cdf, phi};

use super::config::Experiment;

const NOISE_TAG: u64 = 0x6e_6f69_7365;
const SIGNAL_TAG: u64 = 0x7369_676e_616c;
/// Stream-id offset separating unpaired H1 trials from H0 trials.
pub const H1_STREAM_OFFSET: u64 = 1 << 40;

/// Quantile levels reported for the null statistic.
pub const NULL_QUANTILES: [f64; 11] = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 1.0];

/// Number of empirical-quantile thresholds on a ROC curve.
pub const ROC_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Experiment {
    /// Stream of trial `index` under `hypothesis`.
    pub fn trial_stream(&self, hypothesis: Hypothesis, index: u64) -> RngStream {
        let id = match hypothesis {
            Hypothesis::H1 if !self.config.paired => index + H1_STREAM_OFFSET,
            _ => index,
        };
        RngStream::new(self.config.seed, id)
    }

    /// One observation block; H1 adds `filter`'s output to the same noise
    /// draw that H0 would see on `stream`.
    pub fn observe(
        &self,
        hypothesis: Hypothesis,
        filter: &FilterBank<f64>,
        stream: RngStream,
    ) -> Result<TimeSeriesBlock<f64>> {
        let cfg = &self.config;
        let v = generate_noise(&self.noise, cfg.m, cfg.n, stream.substream(NOISE_TAG))?;
        match hypothesis {
            Hypothesis::H0 => Ok(v),
            Hypothesis::H1 => {
                let u = generate_signal(filter, cfg.n, stream.substream(SIGNAL_TAG))?;
                superpose(&u.signal, &v)
            }
        }
    }
}

/// Generates one block under `hypothesis` and reduces it to the scan statistic.
pub fn run_trial(exp: &Experiment, hypothesis: Hypothesis, stream: RngStream) -> Result<ScanResult<f64>> {
    let y = exp.observe(hypothesis, &exp.filter(), stream)?;
    scan_block(&y, exp.span, exp.config.solver, false)
}

/// Runs `f(0..count)` on a pool of `workers` threads; the output is in index
/// order whatever the scheduling.
pub fn par_trials<R, F>(workers: usize, count: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64) -> Result<R> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<R>> = pool.install(|| (0..count as u64).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}

/// Empirical operating point at threshold `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    /// Sorted H0 statistics.
    pub null: Vec<f64>,
    /// Sorted H1 statistics.
    pub alternative: Vec<f64>,
    pub c: f64,
    pub gamma1: f64,
}

// Fraction of `sorted` strictly above `t`.
fn exceedance(sorted: &[f64], t: f64) -> f64 {
    let above = sorted.len() - sorted.partition_point(|&x| x <= t);
    above as f64 / sorted.len() as f64
}

fn sorted_statistics(scans: &[ScanResult<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = scans.iter().map(|s| s.statistic).collect();
    v.sort_by(f64::total_cmp);
    v
}

impl RocCurve {
    /// Builds the curve from raw statistics, adding `extra` thresholds to the
    /// empirical quantile grid and the two degenerate ends.
    pub fn from_statistics(mut null: Vec<f64>, mut alternative: Vec<f64>, extra: &[f64], c: f64, gamma1: f64) -> Result<Self> {
        if null.is_empty() || alternative.is_empty() {
            return Err(Error::InvalidArgument("ROC curve needs trials under both hypotheses".into()));
        }
        if null.iter().chain(&alternative).any(|x| x.is_nan()) {
            return Err(Error::Numerical("NaN scan statistic".into()));
        }
        null.sort_by(f64::total_cmp);
        alternative.sort_by(f64::total_cmp);
        let mut pooled: Vec<f64> = null.iter().chain(&alternative).copied().collect();
        pooled.sort_by(f64::total_cmp);
        let mut thresholds = vec![f64::NEG_INFINITY, f64::INFINITY];
        thresholds.extend(
            (0..ROC_GRID_POINTS).map(|i| quantile_sorted(&pooled, i as f64 / (ROC_GRID_POINTS - 1) as f64)),
        );
        thresholds.extend_from_slice(extra);
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let trials = null.len().min(alternative.len());
        let points = thresholds
            .into_iter()
            .map(|t| RocPoint {
                threshold: t,
                pfa: exceedance(&null, t),
                pd: exceedance(&alternative, t),
                trials,
            })
            .collect();
        Ok(Self {
            points,
            null,
            alternative,
            c,
            gamma1,
        })
    }

    /// Detection rate at the empirical `(1 - pfa)` null quantile: the
    /// threshold is the smallest null statistic exceeded by at most
    /// `⌊pfa·T⌋` null trials.
    pub fn pd_at_pfa(&self, pfa: f64) -> f64 {
        let t = self.null.len();
        let allowed = ((pfa.clamp(0.0, 1.0) * t as f64) + 1e-9).floor() as usize;
        if allowed >= t {
            return exceedance(&self.alternative, f64::NEG_INFINITY);
        }
        exceedance(&self.alternative, self.null[t - 1 - allowed])
    }

    /// Empirical `(Pfa, Pd)` of `T_ε` for this curve's aspect ratio.
    pub fn rates_at_epsilon(&self, epsilon: f64) -> (f64, f64) {
        let t = (1.0 + self.c.sqrt()).powi(2) + epsilon;
        (exceedance(&self.null, t), exceedance(&self.alternative, t))
    }
}

/// Fewest trials per hypothesis accepted by [`roc_curve`].
pub const ROC_MIN_TRIALS: usize = 100;

/// `T` trials per hypothesis on disjoint (or paired) streams.
pub fn roc_curve(exp: &Experiment) -> Result<RocCurve> {
    let trials = exp.config.trials;
    if trials < ROC_MIN_TRIALS {
        return Err(Error::Config(format!("ROC curve needs at least {ROC_MIN_TRIALS} trials, got {trials}")));
    }
    let null = par_trials(exp.config.workers, trials, |i| {
        run_trial(exp, Hypothesis::H0, exp.trial_stream(Hypothesis::H0, i))
    })?;
    let alternative = par_trials(exp.config.workers, trials, |i| {
        run_trial(exp, Hypothesis::H1, exp.trial_stream(Hypothesis::H1, i))
    })?;
    let (_, edge) = crate::theory::mp_edges(exp.c)?;
    let extra: Vec<f64> = exp.config.epsilon.iter().map(|e| edge + e).collect();
    RocCurve::from_statistics(sorted_statistics(&null), sorted_statistics(&alternative), &extra, exp.c, exp.gamma1)
}

/// H0 summary: scan-statistic quantiles and the pooled spectrum of
/// `Ĉ(ν₀)` against Marchenko–Pastur.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSummary {
    /// `(level, value)` pairs over [`NULL_QUANTILES`].
    pub quantiles: Vec<(f64, f64)>,
    pub statistics: Vec<f64>,
    /// Eigenvalues of `Ĉ(ν₀)` pooled over trials, trial-major, each trial
    /// descending.
    pub esd: Vec<f64>,
    pub ks_distance: f64,
    pub median_largest: f64,
    pub median_smallest: f64,
    pub c: f64,
}

pub fn null_distribution(exp: &Experiment) -> Result<NullSummary> {
    let cfg = &exp.config;
    if cfg.trials == 0 {
        return Err(Error::Config("null distribution needs at least one trial".into()));
    }
    let per_trial = par_trials(cfg.workers, cfg.trials, |i| {
        let y = exp.observe(Hypothesis::H0, &exp.shape, exp.trial_stream(Hypothesis::H0, i))?;
        let frame = fft_frame(&y);
        let est = smoothed_periodogram_at(&frame, cfg.nu0_index, exp.span)?;
        let spectrum = coherence_spectrum(&coherence(&est, DEFAULT_DEAD_CHANNEL_FLOOR)?)?;
        let scan = scan_frame(&frame, exp.span, cfg.solver, false)?;
        Ok((scan.statistic, spectrum.values))
    })?;
    let statistics: Vec<f64> = per_trial.iter().map(|(s, _)| *s).collect();
    let mut sorted = statistics.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = NULL_QUANTILES.iter().map(|&p| (p, quantile_sorted(&sorted, p))).collect();
    let esd: Vec<f64> = per_trial.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let largest: Vec<f64> = per_trial.iter().map(|(_, v)| v[0]).collect();
    let smallest: Vec<f64> = per_trial.iter().map(|(_, v)| v[v.len() - 1]).collect();
    let c = exp.c;
    Ok(NullSummary {
        quantiles,
        ks_distance: ks_distance(&esd, |x| mp_cdf(x, c))?,
        median_largest: median(&largest)?,
        median_smallest: median(&smallest)?,
        statistics,
        esd,
        c,
    })
}

/// One row of a phase sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub gamma: f64,
    pub median_lambda1: f64,
    pub phi: f64,
    pub c: f64,
}

/// `λ₁(Ĉ(ν*))` of H1 trials for each target `γ₁`. Trial `i` reuses the same
/// stream for every `γ₁`, so rows differ only through the signal gain.
pub fn phase_sweep(exp: &Experiment, gammas: &[f64]) -> Result<Vec<PhaseRow>> {
    if exp.config.k != 1 {
        return Err(Error::Config(format!("phase sweep needs k = 1, got {}", exp.config.k)));
    }
    if gammas.is_empty() {
        return Err(Error::Config("phase sweep needs a nonempty gammas list".into()));
    }
    gammas
        .iter()
        .map(|&gamma| {
            let filter = exp.filter_for_gamma(gamma)?;
            let lambdas = par_trials(exp.config.workers, exp.config.trials, |i| {
                let y = exp.observe(Hypothesis::H1, &filter, exp.trial_stream(Hypothesis::H0, i))?;
                lambda1_at(&y, exp.nu_star_index, exp.span)
            })?;
            Ok(PhaseRow {
                gamma,
                median_lambda1: median(&lambdas)?,
                phi: phi(gamma, exp.c)?,
                c: exp.c,
            })
        })
        .collect()
}

/// `λ₁(Ĉ(ν_j))` of one block at a single grid index.
pub fn lambda1_at(y: &TimeSeriesBlock<f64>, nu_index: usize, span: usize) -> Result<f64> {
    let est = smoothed_periodogram_at(&fft_frame(y), nu_index, span)?;
    Ok(coherence_spectrum(&coherence(&est, DEFAULT_DEAD_CHANNEL_FLOOR)?)?.largest())
}

/// Per-frequency `λ₁` of a single H1 realization (trial 0).
pub fn spectrum(exp: &Experiment) -> Result<ScanResult<f64>> {
    let y = exp.observe(Hypothesis::H1, &exp.filter(), exp.trial_stream(Hypothesis::H1, 0))?;
    let solver = match exp.config.solver {
        Lambda1Solver::Screened => Lambda1Solver::Dense,
        s => s,
    };
    scan_block(&y, exp.span, solver, true)
}
