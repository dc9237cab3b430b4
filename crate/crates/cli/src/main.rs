//! `scm-detect`: Monte-Carlo experiments for the spectral-coherence
//! largest-eigenvalue detector.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scm_core::harness::{
    null_distribution, phase_sweep, roc_curve, spectrum, write_null, write_phase, write_roc, write_spectrum, Experiment,
    ExperimentConfig, Mode,
};
use scm_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "scm-detect", version, about = "Spectral coherence detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// H0 scan-statistic quantiles and pooled eigenvalues at one frequency.
    NullDist(Common),
    /// Empirical ROC curve from H0 and H1 trials.
    Roc(Common),
    /// Median top eigenvalue at the signal frequency against its limit.
    PhaseSweep(Common),
    /// Per-frequency top eigenvalue of one realization.
    Spectrum(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn experiment(&self, mode: Mode) -> Result<Experiment> {
        let mut cfg = ExperimentConfig::from_path(&self.config)?;
        if let Some(m) = cfg.mode {
            if m != mode {
                return Err(Error::Config(format!(
                    "config is for mode {}, not {}",
                    m.name(),
                    mode.name()
                )));
            }
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        Experiment::new(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::NullDist(args) => {
            let exp = args.experiment(Mode::NullDist)?;
            let summary = null_distribution(&exp)?;
            let (q, esd) = write_null(&args.out, &summary)?;
            println!(
                "c = {:.6}  KS = {:.6}  median lambda_1 = {:.6}  median lambda_M = {:.6}",
                summary.c, summary.ks_distance, summary.median_largest, summary.median_smallest
            );
            println!("wrote {} and {}", q.display(), esd.display());
        }
        Command::Roc(args) => {
            let exp = args.experiment(Mode::Roc)?;
            let curve = roc_curve(&exp)?;
            let path = write_roc(&args.out, &curve.points)?;
            println!("c = {:.6}  gamma_1 = {:.6}  pd at pfa 0.1 = {:.4}", curve.c, curve.gamma1, curve.pd_at_pfa(0.1));
            for eps in &exp.config.epsilon {
                let (pfa, pd) = curve.rates_at_epsilon(*eps);
                println!("epsilon = {eps}: pfa = {pfa:.4}  pd = {pd:.4}");
            }
            println!("wrote {}", path.display());
        }
        Command::PhaseSweep(args) => {
            let exp = args.experiment(Mode::PhaseSweep)?;
            let rows = phase_sweep(&exp, &exp.config.gammas)?;
            let path = write_phase(&args.out, &rows)?;
            for r in &rows {
                println!("gamma = {:<8} median lambda_1 = {:.6}  phi = {:.6}", r.gamma, r.median_lambda1, r.phi);
            }
            println!("wrote {}", path.display());
        }
        Command::Spectrum(args) => {
            let exp = args.experiment(Mode::Spectrum)?;
            let scan = spectrum(&exp)?;
            let path = write_spectrum(&args.out, &scan)?;
            println!("max lambda_1 = {:.6} at nu = {:.6}", scan.statistic, scan.argmax_nu);
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scm-detect: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
