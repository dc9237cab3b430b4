//! Finite Fourier transforms, frequency-smoothed periodograms and the
//! spectral coherence matrix.
//!
//! Frequencies live on the Fourier grid `j/N`. The smoothing window
//! `ν + b/N, b = -B/2..B/2` wraps modulo `N`.

use ndarray::{Array2, ArrayView2};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use crate::signal::TimeSeriesBlock;

/// Default floor under which a diagonal entry of `Ŝ(ν)` marks a dead sensor.
pub const DEFAULT_DEAD_CHANNEL_FLOOR: f64 = 1e-12;

/// The `N` Fourier frequencies `0, 1/N, ..., (N-1)/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierGrid {
    len: usize,
}

impl FourierGrid {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidArgument("Fourier grid needs N >= 1".into()));
        }
        Ok(Self { len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frequency<T: Real>(&self, index: usize) -> T {
        T::from_usize_lossy(index % self.len) / T::from_usize_lossy(self.len)
    }

    /// Grid index of `nu` (taken modulo 1); errors when `nu` is off the grid.
    pub fn index_of<T: Real>(&self, nu: T) -> Result<usize> {
        let n = T::from_usize_lossy(self.len);
        let scaled = nu * n;
        let nearest = scaled.round();
        let tol = T::lit(1e-9) * n.max(T::one());
        if !scaled.is_finite() || (scaled - nearest).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "frequency {nu} is not on the {}-point Fourier grid",
                self.len
            )));
        }
        let k = nearest.to_i64().expect("finite frequency index");
        Ok(k.rem_euclid(self.len as i64) as usize)
    }

    /// Index of `index + offset` wrapped onto the grid.
    pub fn wrap(&self, index: usize, offset: isize) -> usize {
        (index as isize + offset).rem_euclid(self.len as isize) as usize
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.len
    }
}

/// Finite Fourier transforms `ξ_y(j/N)` at every grid frequency.
#[derive(Debug, Clone)]
pub struct FftFrame<T: Real> {
    // row j holds ξ(j/N) so that each frequency is a contiguous M-vector
    xi: Array2<Cx<T>>,
}

impl<T: Real> FftFrame<T> {
    pub fn grid(&self) -> FourierGrid {
        FourierGrid { len: self.xi.nrows() }
    }

    pub fn num_sensors(&self) -> usize {
        self.xi.ncols()
    }

    pub fn num_samples(&self) -> usize {
        self.xi.nrows()
    }

    /// `ξ(j/N)` as an `M`-vector.
    pub fn xi(&self, index: usize) -> &[Cx<T>] {
        self.xi.row(index).to_slice().expect("standard layout")
    }

    /// `M × N` view whose column `j` is `ξ(j/N)`.
    pub fn as_matrix(&self) -> ArrayView2<'_, Cx<T>> {
        self.xi.t()
    }

    /// `Σ_j ‖ξ(j/N)‖²`.
    pub fn energy(&self) -> T {
        self.xi.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `ξ(j/N) = N^{-1/2} Σ_{n=1}^N y_n e^{-i2πj(n-1)/N}` via one FFT per sensor.
pub fn fft_frame<T: Real>(y: &TimeSeriesBlock<T>) -> FftFrame<T> {
    let (m_dim, n_dim) = (y.num_sensors(), y.num_samples());
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(n_dim);
    let scale = T::one() / T::from_usize_lossy(n_dim).sqrt();
    let mut xi = Array2::zeros((n_dim, m_dim));
    let mut buf = vec![Cx::new(T::zero(), T::zero()); n_dim];
    for m in 0..m_dim {
        buf.copy_from_slice(y.row(m));
        fft.process(&mut buf);
        for (j, z) in buf.iter().enumerate() {
            xi[[j, m]] = *z * scale;
        }
    }
    FftFrame { xi }
}

/// Frequency-smoothed periodogram `Ŝ(ν)` with its span `B`.
#[derive(Debug, Clone)]
pub struct SpectralEstimate<T: Real> {
    pub nu_index: usize,
    pub nu: T,
    pub span: usize,
    pub matrix: Array2<Cx<T>>,
}

/// Spectral coherence matrix `Ĉ(ν) = D^{-1/2} Ŝ(ν) D^{-1/2}`, `D = diag Ŝ(ν)`.
#[derive(Debug, Clone)]
pub struct CoherenceMatrix<T: Real> {
    pub nu_index: usize,
    pub nu: T,
    pub matrix: Array2<Cx<T>>,
}

fn check_span(span: usize, n: usize) -> Result<()> {
    if !span.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("smoothing span B = {span} must be even")));
    }
    if span + 1 > n {
        return Err(Error::InvalidArgument(format!(
            "smoothing span B + 1 = {} exceeds N = {n}",
            span + 1
        )));
    }
    Ok(())
}

/// `Ŝ(ν) = (B+1)^{-1} Σ_{b=-B/2}^{B/2} ξ(ν + b/N) ξ(ν + b/N)^*`, symmetrized.
pub fn smoothed_periodogram<T: Real>(frame: &FftFrame<T>, nu: T, span: usize) -> Result<SpectralEstimate<T>> {
    let index = frame.grid().index_of(nu)?;
    smoothed_periodogram_at(frame, index, span)
}

pub fn smoothed_periodogram_at<T: Real>(
    frame: &FftFrame<T>,
    nu_index: usize,
    span: usize,
) -> Result<SpectralEstimate<T>> {
    let grid = frame.grid();
    check_span(span, grid.len())?;
    if nu_index >= grid.len() {
        return Err(Error::InvalidArgument(format!("frequency index {nu_index} off grid")));
    }
    let m_dim = frame.num_sensors();
    let mut acc = Array2::<Cx<T>>::zeros((m_dim, m_dim));
    let half = (span / 2) as isize;
    for b in -half..=half {
        let x = frame.xi(grid.wrap(nu_index, b));
        for i in 0..m_dim {
            for j in 0..m_dim {
                acc[[i, j]] = acc[[i, j]] + x[i] * x[j].conj();
            }
        }
    }
    let inv = T::one() / T::from_usize_lossy(span + 1);
    let two = T::lit(2.0);
    let matrix = Array2::from_shape_fn((m_dim, m_dim), |(i, j)| (acc[[i, j]] + acc[[j, i]].conj()) * inv / two);
    Ok(SpectralEstimate {
        nu_index,
        nu: grid.frequency(nu_index),
        span,
        matrix,
    })
}

/// Normalizes `Ŝ(ν)` into the coherence matrix; the diagonal is exactly 1.
pub fn coherence<T: Real>(est: &SpectralEstimate<T>, floor: T) -> Result<CoherenceMatrix<T>> {
    let m_dim = est.matrix.nrows();
    let mut inv_sqrt = Vec::with_capacity(m_dim);
    for m in 0..m_dim {
        let p = est.matrix[[m, m]].re;
        if !(p >= floor) {
            return Err(Error::DeadChannel {
                sensor: m,
                power: p.to_f64_lossy(),
                floor: floor.to_f64_lossy(),
            });
        }
        inv_sqrt.push(T::one() / p.sqrt());
    }
    let mut matrix = Array2::zeros((m_dim, m_dim));
    normalize_upper(&est.matrix.view(), &inv_sqrt, &mut matrix);
    Ok(CoherenceMatrix {
        nu_index: est.nu_index,
        nu: est.nu,
        matrix,
    })
}

// Fills `out` from the upper triangle of `s`, mirroring so the result is
// exactly Hermitian with unit diagonal.
fn normalize_upper<T: Real>(s: &ArrayView2<'_, Cx<T>>, inv_sqrt: &[T], out: &mut Array2<Cx<T>>) {
    let m_dim = inv_sqrt.len();
    for i in 0..m_dim {
        out[[i, i]] = Cx::new(T::one(), T::zero());
        for j in (i + 1)..m_dim {
            let c = s[[i, j]] * (inv_sqrt[i] * inv_sqrt[j]);
            out[[i, j]] = c;
            out[[j, i]] = c.conj();
        }
    }
}

/// `Σ(ν) = (B+1)^{-1/2} [ξ(ν - B/2N), ..., ξ(ν + B/2N)]`, an `M × (B+1)` matrix.
pub fn window_matrix<T: Real>(frame: &FftFrame<T>, nu_index: usize, span: usize) -> Result<Array2<Cx<T>>> {
    let grid = frame.grid();
    check_span(span, grid.len())?;
    let half = (span / 2) as isize;
    let scale = T::one() / T::from_usize_lossy(span + 1).sqrt();
    let mut out = Array2::zeros((frame.num_sensors(), span + 1));
    for (col, b) in (-half..=half).enumerate() {
        let x = frame.xi(grid.wrap(nu_index, b));
        for (m, z) in x.iter().enumerate() {
            out[[m, col]] = *z * scale;
        }
    }
    Ok(out)
}

/// Sliding-window generator of coherence matrices over a contiguous range of
/// grid frequencies.
///
/// The outer-product sum is refreshed from scratch every
/// [`CoherenceScanner::REFRESH_INTERVAL`] steps so the rounding drift of the
/// add/remove updates stays bounded on long scans.
pub struct CoherenceScanner<'a, T: Real> {
    frame: &'a FftFrame<T>,
    span: usize,
    floor: T,
    next: usize,
    end: usize,
    steps_since_refresh: usize,
    primed: bool,
    // upper triangle of Σ_b ξ ξ^*, row-major M × M
    sum: Vec<Cx<T>>,
    inv_sqrt: Vec<T>,
    current: Array2<Cx<T>>,
}

impl<'a, T: Real> CoherenceScanner<'a, T> {
    pub const REFRESH_INTERVAL: usize = 256;

    pub fn new(frame: &'a FftFrame<T>, span: usize, floor: T) -> Result<Self> {
        Self::over_range(frame, span, floor, 0..frame.num_samples())
    }

    pub fn over_range(
        frame: &'a FftFrame<T>,
        span: usize,
        floor: T,
        range: std::ops::Range<usize>,
    ) -> Result<Self> {
        check_span(span, frame.num_samples())?;
        if range.end > frame.num_samples() || range.start > range.end {
            return Err(Error::InvalidArgument(format!("invalid frequency range {range:?}")));
        }
        let m_dim = frame.num_sensors();
        Ok(Self {
            frame,
            span,
            floor,
            next: range.start,
            end: range.end,
            steps_since_refresh: 0,
            primed: false,
            sum: vec![Cx::new(T::zero(), T::zero()); m_dim * m_dim],
            inv_sqrt: vec![T::zero(); m_dim],
            current: Array2::zeros((m_dim, m_dim)),
        })
    }

    fn refresh(&mut self, index: usize) {
        let m_dim = self.frame.num_sensors();
        self.sum.iter_mut().for_each(|z| *z = Cx::new(T::zero(), T::zero()));
        let half = (self.span / 2) as isize;
        let grid = self.frame.grid();
        for b in -half..=half {
            rank_one_upper(&mut self.sum, self.frame.xi(grid.wrap(index, b)), m_dim, T::one());
        }
        self.steps_since_refresh = 0;
    }

    fn slide(&mut self, index: usize) {
        // window moves from index-1 to index
        let m_dim = self.frame.num_sensors();
        let half = (self.span / 2) as isize;
        let grid = self.frame.grid();
        rank_one_upper(&mut self.sum, self.frame.xi(grid.wrap(index, -half - 1)), m_dim, -T::one());
        rank_one_upper(&mut self.sum, self.frame.xi(grid.wrap(index, half)), m_dim, T::one());
        self.steps_since_refresh += 1;
    }

    /// Advances to the next frequency and returns its grid index together with
    /// a view of `Ĉ(ν)`, or `None` when the range is exhausted.
    pub fn advance(&mut self) -> Option<Result<(usize, ArrayView2<'_, Cx<T>>)>> {
        if self.next >= self.end {
            return None;
        }
        let index = self.next;
        if !self.primed || self.steps_since_refresh + 1 >= Self::REFRESH_INTERVAL {
            self.refresh(index);
            self.primed = true;
        } else {
            self.slide(index);
        }
        self.next += 1;
        let m_dim = self.frame.num_sensors();
        let inv_count = T::one() / T::from_usize_lossy(self.span + 1);
        for m in 0..m_dim {
            let p = self.sum[m * m_dim + m].re * inv_count;
            if !(p >= self.floor) {
                return Some(Err(Error::DeadChannel {
                    sensor: m,
                    power: p.to_f64_lossy(),
                    floor: self.floor.to_f64_lossy(),
                }));
            }
            // the 1/(B+1) factor cancels in the normalization
            self.inv_sqrt[m] = T::one() / self.sum[m * m_dim + m].re.sqrt();
        }
        let view = ArrayView2::from_shape((m_dim, m_dim), &self.sum).expect("square buffer");
        normalize_upper(&view, &self.inv_sqrt, &mut self.current);
        Some(Ok((index, self.current.view())))
    }
}

fn rank_one_upper<T: Real>(sum: &mut [Cx<T>], x: &[Cx<T>], m_dim: usize, sign: T) {
    for i in 0..m_dim {
        let xi = x[i] * sign;
        let row = &mut sum[i * m_dim + i..(i + 1) * m_dim];
        for (s, xj) in row.iter_mut().zip(&x[i..]) {
            *s = *s + xi * xj.conj();
        }
    }
}

/// Coherence matrices at every grid frequency, built with a sliding
/// accumulator over one shared transform.
pub fn full_scan<T: Real>(y: &TimeSeriesBlock<T>, span: usize) -> Result<Vec<CoherenceMatrix<T>>> {
    let frame = fft_frame(y);
    full_scan_frame(&frame, span, T::lit(DEFAULT_DEAD_CHANNEL_FLOOR))
}

pub fn full_scan_frame<T: Real>(frame: &FftFrame<T>, span: usize, floor: T) -> Result<Vec<CoherenceMatrix<T>>> {
    let grid = frame.grid();
    let mut scanner = CoherenceScanner::new(frame, span, floor)?;
    let mut out = Vec::with_capacity(grid.len());
    while let Some(step) = scanner.advance() {
        let (index, c) = step?;
        out.push(CoherenceMatrix {
            nu_index: index,
            nu: grid.frequency(index),
            matrix: c.to_owned(),
        });
    }
    Ok(out)
}
