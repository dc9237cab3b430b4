//! Largest-eigenvalue detection over the Fourier grid.
//!
//! The statistic is `max_ν λ₁(Ĉ(ν))`; the detector declares a signal when it
//! strictly exceeds `(1 + √c)² + ε`.

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::linalg::{backward_error, hermitian_eigen, hermitian_eigenvalues, CholeskyScreen, Lanczos};
use crate::scalar::{Cx, Real};
use crate::signal::TimeSeriesBlock;
use crate::spectral::{fft_frame, CoherenceMatrix, CoherenceScanner, FftFrame, DEFAULT_DEAD_CHANNEL_FLOOR};
use crate::theory::{mp_edges, phi};

/// Backward-error budget of [`hermitian_eigs`], relative to `‖A‖`.
pub fn backward_tolerance<T: Real>() -> T {
    T::lit(1e-8).max(T::lit(1e4) * T::epsilon())
}

/// Real spectrum of a Hermitian matrix, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum<T: Real> {
    pub nu: Option<T>,
    pub values: Vec<T>,
}

impl<T: Real> EigenSpectrum<T> {
    pub fn largest(&self) -> T {
        self.values[0]
    }

    pub fn smallest(&self) -> T {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Full eigen-decomposition with a backward-error check on every pair.
pub fn hermitian_eigs<T: Real>(a: &ArrayView2<'_, Cx<T>>) -> Result<EigenSpectrum<T>> {
    if a.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let (values, vectors) = hermitian_eigen(a)?;
    let err = backward_error(a, &values, &vectors.view());
    if !(err <= backward_tolerance::<T>()) {
        return Err(Error::Numerical(format!("eigen-solver backward error {err:e} exceeds budget")));
    }
    Ok(EigenSpectrum { nu: None, values })
}

pub fn coherence_spectrum<T: Real>(c: &CoherenceMatrix<T>) -> Result<EigenSpectrum<T>> {
    let values = coherence_eigenvalues(&c.matrix.view())?;
    Ok(EigenSpectrum {
        nu: Some(c.nu),
        values,
    })
}

// Eigenvalues of a unit-diagonal matrix, verified against the trace identity.
fn coherence_eigenvalues<T: Real>(c: &ArrayView2<'_, Cx<T>>) -> Result<Vec<T>> {
    let values = hermitian_eigenvalues(c)?;
    check_trace(&values)?;
    Ok(values)
}

fn check_trace<T: Real>(values: &[T]) -> Result<()> {
    let m = T::from_usize_lossy(values.len());
    let sum: T = values.iter().copied().sum();
    if !((sum - m).abs() <= backward_tolerance::<T>() * m) {
        return Err(Error::Numerical(format!(
            "coherence eigenvalues sum to {sum}, expected {m}"
        )));
    }
    Ok(())
}

/// How `λ₁` is obtained at each frequency of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lambda1Solver {
    /// Full spectrum from the dense Hermitian solver.
    #[default]
    Dense,
    /// Lanczos on the top eigenpair, warm-started from the previous
    /// frequency's Ritz vector.
    Krylov,
    /// Exact `λ₁` on a coarse subgrid, then a Cholesky certificate
    /// `λ₁ < current max` everywhere else with a dense solve wherever the
    /// certificate fails. Same statistic as `Dense` up to rounding at ties,
    /// no per-frequency trace.
    Screened,
}

/// Outcome of a frequency scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult<T: Real> {
    pub statistic: T,
    pub argmax_index: usize,
    pub argmax_nu: T,
    /// `λ₁(Ĉ(ν_j))` for every scanned frequency, when retained.
    pub trace: Option<Vec<T>>,
}

/// Reduces per-frequency `λ₁` values, ties going to the smallest frequency.
#[derive(Debug, Clone)]
struct MaxTracker<T: Real> {
    best: Option<(usize, T, T)>,
    trace: Option<Vec<T>>,
}

impl<T: Real> MaxTracker<T> {
    fn new(keep_trace: bool) -> Self {
        Self {
            best: None,
            trace: keep_trace.then(Vec::new),
        }
    }

    fn push(&mut self, index: usize, nu: T, lambda1: T) {
        let better = match self.best {
            None => true,
            Some((best_index, _, best)) => lambda1 > best || (lambda1 == best && index < best_index),
        };
        if better {
            self.best = Some((index, nu, lambda1));
        }
        if let Some(t) = self.trace.as_mut() {
            t.push(lambda1);
        }
    }

    fn finish(self) -> Result<ScanResult<T>> {
        let (argmax_index, argmax_nu, statistic) =
            self.best.ok_or_else(|| Error::InvalidArgument("scan over an empty frequency list".into()))?;
        Ok(ScanResult {
            statistic,
            argmax_index,
            argmax_nu,
            trace: self.trace,
        })
    }
}

/// `max_ν λ₁(Ĉ(ν))` over precomputed coherence matrices.
pub fn scan_statistic<T: Real>(scan: &[CoherenceMatrix<T>]) -> Result<ScanResult<T>> {
    let mut tracker = MaxTracker::new(true);
    for c in scan {
        tracker.push(c.nu_index, c.nu, coherence_eigenvalues(&c.matrix.view())?[0]);
    }
    tracker.finish()
}

/// Streams the coherence matrices of `y` and reduces them to the scan
/// statistic without materializing all `N` matrices.
pub fn scan_block<T: Real>(
    y: &TimeSeriesBlock<T>,
    span: usize,
    solver: Lambda1Solver,
    keep_trace: bool,
) -> Result<ScanResult<T>> {
    scan_frame(&fft_frame(y), span, solver, keep_trace)
}

pub fn scan_frame<T: Real>(
    frame: &FftFrame<T>,
    span: usize,
    solver: Lambda1Solver,
    keep_trace: bool,
) -> Result<ScanResult<T>> {
    if solver == Lambda1Solver::Screened && !keep_trace {
        return screened_scan(frame, span);
    }
    let grid = frame.grid();
    let mut scanner = CoherenceScanner::new(frame, span, T::lit(DEFAULT_DEAD_CHANNEL_FLOOR))?;
    let mut tracker = MaxTracker::new(keep_trace);
    let mut lanczos = Lanczos::new(frame.num_sensors());
    let mut warm: Option<Vec<Cx<T>>> = None;
    let budget = backward_tolerance::<T>();
    while let Some(step) = scanner.advance() {
        let (index, c) = step?;
        let lambda1 = match solver {
            Lambda1Solver::Dense | Lambda1Solver::Screened => coherence_eigenvalues(&c)?[0],
            Lambda1Solver::Krylov => {
                let top = lanczos.top(&c, warm.as_deref())?;
                if !(top.residual <= budget * top.value.abs()) {
                    return Err(Error::Numerical(format!(
                        "Lanczos residual {:e} exceeds budget at frequency index {index}",
                        top.residual
                    )));
                }
                warm = Some(top.vector);
                top.value
            }
        };
        tracker.push(index, grid.frequency(index), lambda1);
    }
    tracker.finish()
}

fn screened_scan<T: Real>(frame: &FftFrame<T>, span: usize) -> Result<ScanResult<T>> {
    let grid = frame.grid();
    let floor = T::lit(DEFAULT_DEAD_CHANNEL_FLOOR);
    let stride = (span / 4).max(1);
    let mut tracker = MaxTracker::new(false);
    let mut scanner = CoherenceScanner::new(frame, span, floor)?;
    while let Some(step) = scanner.advance() {
        let (index, c) = step?;
        if index % stride == 0 {
            tracker.push(index, grid.frequency(index), coherence_eigenvalues(&c)?[0]);
        }
    }
    let mut screen = CholeskyScreen::new(frame.num_sensors());
    let mut scanner = CoherenceScanner::new(frame, span, floor)?;
    while let Some(step) = scanner.advance() {
        let (index, c) = step?;
        if index % stride == 0 {
            continue;
        }
        let best = tracker.best.map(|(_, _, v)| v).unwrap_or(T::neg_infinity());
        if screen.reaches(&c, best) {
            tracker.push(index, grid.frequency(index), coherence_eigenvalues(&c)?[0]);
        }
    }
    tracker.finish()
}

/// Threshold offset `ε` and aspect ratio `c` of the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig<T: Real> {
    epsilon: T,
    c: T,
}

impl<T: Real> DetectorConfig<T> {
    pub fn new(epsilon: T, c: T) -> Result<Self> {
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        mp_edges(c)?;
        Ok(Self { epsilon, c })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn c(&self) -> T {
        self.c
    }

    /// `(1 + √c)² + ε`.
    pub fn threshold(&self) -> T {
        (T::one() + self.c.sqrt()).powi(2) + self.epsilon
    }
}

/// `true` iff the statistic lies in the open interval `((1+√c)² + ε, ∞)`.
pub fn decide<T: Real>(scan: &ScanResult<T>, cfg: &DetectorConfig<T>) -> bool {
    scan.statistic > cfg.threshold()
}

/// Admissible thresholds `(0, φ(γ₁) - (1+√c)²)` for a consistent test, or
/// `None` when `γ₁ ≤ √c`.
pub fn consistency_window<T: Real>(gamma1: T, c: T) -> Result<Option<(T, T)>> {
    let (_, upper_edge) = mp_edges(c)?;
    if !(gamma1 > c.sqrt()) {
        return Ok(None);
    }
    Ok(Some((T::zero(), phi(gamma1, c)? - upper_edge)))
}
