//! Observation model: a low-rank filtered signal plus sensor-independent
//! colored noise.
//!
//! The useful signal is `u_n = Σ_k H_k ε_{n-k}` with `ε_n ~ CN(0, I_K)` and a
//! finite causal impulse response `{H_k}`. The noise on sensor `m` is the
//! moving average `v_{m,n} = Σ_q θ_m(q) z_{m,n-q}` driven by its own white
//! `CN(0, 1)` sequence. Both generators draw the pre-window innovations they
//! need, so every block is exactly stationary from its first sample.

use ndarray::{Array2, ArrayView2};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::{unit_phase, Cx, Real};

/// Number of taps at which the geometric response `β^k` falls below `1e-12`.
pub fn geometric_length(beta: f64) -> usize {
    if beta <= 0.0 {
        return 1;
    }
    ((1e-12f64).ln() / beta.ln()).ceil().max(1.0) as usize
}

/// Finite causal MIMO impulse response `H_0, ..., H_{L-1}`, each `M × K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank<T: Real> {
    taps: Vec<Array2<Cx<T>>>,
}

impl<T: Real> FilterBank<T> {
    pub fn new(taps: Vec<Array2<Cx<T>>>) -> Result<Self> {
        let first = taps
            .first()
            .ok_or_else(|| Error::InvalidArgument("filter needs at least one tap".into()))?;
        let shape = first.dim();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::InvalidArgument(format!("empty tap shape {shape:?}")));
        }
        for (k, tap) in taps.iter().enumerate() {
            if tap.dim() != shape {
                return Err(Error::ShapeMismatch {
                    expected: format!("{shape:?}"),
                    got: format!("tap {k} {:?}", tap.dim()),
                });
            }
            if tap.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("tap {k} has non-finite entries")));
            }
        }
        Ok(Self { taps })
    }

    pub fn zero(num_sensors: usize, rank: usize) -> Result<Self> {
        Self::new(vec![Array2::zeros((num_sensors, rank))])
    }

    pub fn taps(&self) -> &[Array2<Cx<T>>] {
        &self.taps
    }

    pub fn num_sensors(&self) -> usize {
        self.taps[0].nrows()
    }

    pub fn rank(&self) -> usize {
        self.taps[0].ncols()
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Σ_k ‖H_k‖_F²`, the stationary signal power `E‖u_n‖²`.
    pub fn total_power(&self) -> T {
        self.taps
            .iter()
            .flat_map(|t| t.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Returns a copy with every tap multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            taps: self.taps.iter().map(|t| t.mapv(|z| z * factor)).collect(),
        }
    }
}

/// Rank-one geometric filter `H_k = c_snr β^k / √M · (1, ..., 1)^T`.
pub fn make_paper_filter<T: Real>(
    num_sensors: usize,
    c_snr: T,
    beta: T,
    len: usize,
) -> Result<FilterBank<T>> {
    make_steered_filter(num_sensors, 1, c_snr, beta, len)
}

/// Rank-`K` generalisation of [`make_paper_filter`]: column `j` carries the
/// spatial signature `e^{i2π jm/M} / √M`, all columns share the geometric
/// decay. Column 0 is the all-ones signature, so `K = 1` reproduces the
/// rank-one filter exactly.
pub fn make_steered_filter<T: Real>(
    num_sensors: usize,
    rank: usize,
    c_snr: T,
    beta: T,
    len: usize,
) -> Result<FilterBank<T>> {
    if num_sensors == 0 || rank == 0 || len == 0 {
        return Err(Error::InvalidArgument(
            "sensors, rank and filter length must be positive".into(),
        ));
    }
    if rank > num_sensors {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} exceeds sensor count {num_sensors}"
        )));
    }
    if !(beta >= T::zero() && beta < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "beta must lie in [0, 1) for a stable filter, got {beta}"
        )));
    }
    if !(c_snr >= T::zero()) || !c_snr.is_finite() {
        return Err(Error::InvalidArgument(format!("c_snr must be finite and nonnegative, got {c_snr}")));
    }
    let m_f = T::from_usize_lossy(num_sensors);
    let norm = c_snr / m_f.sqrt();
    let signature = Array2::from_shape_fn((num_sensors, rank), |(m, j)| {
        if j == 0 {
            Cx::new(T::one(), T::zero())
        } else {
            unit_phase(-T::from_usize_lossy(j * m) / m_f)
        }
    });
    let mut taps = Vec::with_capacity(len);
    let mut gain = norm;
    for _ in 0..len {
        taps.push(signature.mapv(|z| z * gain));
        gain *= beta;
    }
    FilterBank::new(taps)
}

/// Per-sensor moving-average noise filters.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T: Real> {
    filters: NoiseFilters<T>,
}

#[derive(Debug, Clone, PartialEq)]
enum NoiseFilters<T: Real> {
    Shared(Vec<Cx<T>>),
    PerSensor(Vec<Vec<Cx<T>>>),
}

impl<T: Real> NoiseModel<T> {
    /// White `CN(0, 1)` noise on every sensor.
    pub fn white() -> Self {
        Self {
            filters: NoiseFilters::Shared(vec![Cx::new(T::one(), T::zero())]),
        }
    }

    /// One real-coefficient filter broadcast to any number of sensors.
    pub fn shared(theta: &[T]) -> Result<Self> {
        let coeffs: Vec<Cx<T>> = theta.iter().map(|&t| Cx::new(t, T::zero())).collect();
        check_density(&coeffs, 0)?;
        Ok(Self {
            filters: NoiseFilters::Shared(coeffs),
        })
    }

    /// MA(1) `v_n = z_n + θ₁ z_{n-1}` on every sensor.
    pub fn ma1(theta1: T) -> Result<Self> {
        Self::shared(&[T::one(), theta1])
    }

    pub fn per_sensor(filters: Vec<Vec<Cx<T>>>) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::InvalidArgument("no sensor filters given".into()));
        }
        for (m, f) in filters.iter().enumerate() {
            check_density(f, m)?;
        }
        Ok(Self {
            filters: NoiseFilters::PerSensor(filters),
        })
    }

    /// `Some(M)` when the model is tied to a sensor count.
    pub fn num_sensors(&self) -> Option<usize> {
        match &self.filters {
            NoiseFilters::Shared(_) => None,
            NoiseFilters::PerSensor(f) => Some(f.len()),
        }
    }

    /// Coefficients of sensor `m`.
    pub fn coefficients(&self, m: usize) -> &[Cx<T>] {
        match &self.filters {
            NoiseFilters::Shared(f) => f,
            NoiseFilters::PerSensor(f) => &f[m],
        }
    }

    pub fn check_sensors(&self, num_sensors: usize) -> Result<()> {
        match self.num_sensors() {
            Some(m) if m != num_sensors => Err(Error::ShapeMismatch {
                expected: format!("{num_sensors} sensor filters"),
                got: format!("{m}"),
            }),
            _ => Ok(()),
        }
    }

    /// Returns the same model with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let scale = |f: &Vec<Cx<T>>| f.iter().map(|&z| z * factor).collect::<Vec<_>>();
        let filters = match &self.filters {
            NoiseFilters::Shared(f) => NoiseFilters::Shared(scale(f)),
            NoiseFilters::PerSensor(fs) => NoiseFilters::PerSensor(fs.iter().map(scale).collect()),
        };
        let out = Self { filters };
        for m in 0..out.num_sensors().unwrap_or(1) {
            check_density(out.coefficients(m), m)?;
        }
        Ok(out)
    }

    /// Autocovariance `r_m(k) = Σ_q θ_m(q) conj(θ_m(q+k))` for `k ≥ 0`.
    pub fn autocovariance(&self, m: usize, lag: usize) -> Cx<T> {
        let theta = self.coefficients(m);
        theta
            .iter()
            .zip(theta.iter().skip(lag))
            .map(|(a, b)| *a * b.conj())
            .fold(Cx::new(T::zero(), T::zero()), |acc, z| acc + z)
    }
}

/// `|Σ_q θ(q) e^{-i2πνq}|²`.
pub(crate) fn ma_density<T: Real>(theta: &[Cx<T>], nu: T) -> T {
    theta
        .iter()
        .enumerate()
        .map(|(q, &c)| c * unit_phase(nu * T::from_usize_lossy(q)))
        .fold(Cx::new(T::zero(), T::zero()), |acc, z| acc + z)
        .norm_sqr()
}

fn check_density<T: Real>(theta: &[Cx<T>], sensor: usize) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::InvalidArgument(format!("sensor {sensor}: empty noise filter")));
    }
    if theta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("sensor {sensor}: non-finite noise coefficient")));
    }
    let grid = 1024 * theta.len();
    let scale: T = theta.iter().map(|z| z.norm()).sum::<T>().powi(2);
    let mut min = T::infinity();
    for j in 0..grid {
        let nu = T::from_usize_lossy(j) / T::from_usize_lossy(grid);
        min = min.min(ma_density(theta, nu));
    }
    if !(min > T::lit(1e-12) * scale) {
        return Err(Error::InvalidArgument(format!(
            "sensor {sensor}: noise spectral density vanishes (min {min:e}); densities must be bounded away from zero"
        )));
    }
    Ok(())
}

/// `M × N` window of a multichannel complex series; row `m` is sensor `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesBlock<T: Real> {
    data: Array2<Cx<T>>,
}

impl<T: Real> TimeSeriesBlock<T> {
    pub fn new(data: Array2<Cx<T>>) -> Result<Self> {
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("time series contains NaN or Inf".into()));
        }
        let data = if data.is_standard_layout() { data } else { data.as_standard_layout().to_owned() };
        Ok(Self { data })
    }

    pub fn zeros(num_sensors: usize, num_samples: usize) -> Self {
        Self {
            data: Array2::zeros((num_sensors, num_samples)),
        }
    }

    pub fn data(&self) -> ArrayView2<'_, Cx<T>> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<Cx<T>> {
        self.data
    }

    pub fn num_sensors(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn row(&self, m: usize) -> &[Cx<T>] {
        self.data.row(m).to_slice().expect("standard layout")
    }

    /// Multiplies row `m` by `scales[m]`.
    pub fn scale_rows(&self, scales: &[T]) -> Result<Self> {
        if scales.len() != self.num_sensors() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} scales", self.num_sensors()),
                got: format!("{}", scales.len()),
            });
        }
        let mut data = self.data.clone();
        for (mut row, &s) in data.rows_mut().into_iter().zip(scales) {
            row.mapv_inplace(|z| z * s);
        }
        Self::new(data)
    }

    /// Circular shift of every row by `shift` samples (`y'_n = y_{n-shift}`).
    pub fn circular_shift(&self, shift: usize) -> Self {
        let n = self.num_samples();
        let data = Array2::from_shape_fn(self.data.dim(), |(m, t)| {
            self.data[[m, (t + n - shift % n.max(1)) % n.max(1)]]
        });
        Self { data }
    }
}

/// Moving-average noise `v_{m,n} = Σ_q θ_m(q) z_{m,n-q}`.
pub fn generate_noise<T: Real>(
    model: &NoiseModel<T>,
    num_sensors: usize,
    num_samples: usize,
    rng: RngStream,
) -> Result<TimeSeriesBlock<T>> {
    model.check_sensors(num_sensors)?;
    if num_sensors == 0 || num_samples == 0 {
        return Err(Error::InvalidArgument("noise block must be non-empty".into()));
    }
    let mut gen = rng.generator();
    let mut data = Array2::zeros((num_sensors, num_samples));
    let mut innovations = Vec::new();
    for (m, mut row) in data.rows_mut().into_iter().enumerate() {
        let theta = model.coefficients(m);
        let pre = theta.len() - 1;
        innovations.resize(pre + num_samples, Cx::new(T::zero(), T::zero()));
        gen.fill(&mut innovations);
        for (n, out) in row.iter_mut().enumerate() {
            // innovations[pre + n] is z_n
            let mut acc = Cx::new(T::zero(), T::zero());
            for (q, &c) in theta.iter().enumerate() {
                acc = acc + c * innovations[pre + n - q];
            }
            *out = acc;
        }
    }
    TimeSeriesBlock::new(data)
}

/// Filtered signal together with the driving noise that produced it.
#[derive(Debug, Clone)]
pub struct SignalRealization<T: Real> {
    pub signal: TimeSeriesBlock<T>,
    /// `K × (L - 1 + N)` innovations; column `L - 1 + n` is `ε_n`.
    innovations: Array2<Cx<T>>,
    pre_window: usize,
}

impl<T: Real> SignalRealization<T> {
    /// Driving noise over the observation window, `K × N`.
    pub fn driving_window(&self) -> ArrayView2<'_, Cx<T>> {
        self.innovations.slice(ndarray::s![.., self.pre_window..])
    }

    pub fn driving_block(&self) -> TimeSeriesBlock<T> {
        TimeSeriesBlock {
            data: self.driving_window().to_owned(),
        }
    }
}

// Above this many taps the convolution runs through FFTs.
const DIRECT_CONVOLUTION_MAX_TAPS: usize = 32;

/// `u_n = Σ_k H_k ε_{n-k}` for `n = 1..N`.
pub fn generate_signal<T: Real>(
    filter: &FilterBank<T>,
    num_samples: usize,
    rng: RngStream,
) -> Result<SignalRealization<T>> {
    if num_samples == 0 {
        return Err(Error::InvalidArgument("signal block must be non-empty".into()));
    }
    let (k_dim, len) = (filter.rank(), filter.len());
    let pre = len - 1;
    let total = pre + num_samples;
    let mut gen = rng.generator();
    // time-major draws: ε_t is drawn as one K-vector
    let mut innovations = Array2::zeros((k_dim, total));
    for t in 0..total {
        for j in 0..k_dim {
            innovations[[j, t]] = gen.sample();
        }
    }
    let data = if len <= DIRECT_CONVOLUTION_MAX_TAPS {
        convolve_direct(filter, &innovations, num_samples)
    } else {
        convolve_fft(filter, &innovations, num_samples)
    };
    Ok(SignalRealization {
        signal: TimeSeriesBlock::new(data)?,
        innovations,
        pre_window: pre,
    })
}

fn convolve_direct<T: Real>(
    filter: &FilterBank<T>,
    innovations: &Array2<Cx<T>>,
    num_samples: usize,
) -> Array2<Cx<T>> {
    let pre = filter.len() - 1;
    let mut out = Array2::zeros((filter.num_sensors(), num_samples));
    for (k, tap) in filter.taps().iter().enumerate() {
        for j in 0..filter.rank() {
            let eps = innovations.row(j);
            for m in 0..filter.num_sensors() {
                let h = tap[[m, j]];
                if h.re == T::zero() && h.im == T::zero() {
                    continue;
                }
                for n in 0..num_samples {
                    out[[m, n]] = out[[m, n]] + h * eps[pre + n - k];
                }
            }
        }
    }
    out
}

fn convolve_fft<T: Real>(
    filter: &FilterBank<T>,
    innovations: &Array2<Cx<T>>,
    num_samples: usize,
) -> Array2<Cx<T>> {
    let len = filter.len();
    let pre = len - 1;
    let total = innovations.ncols();
    // linear convolution of `total` innovations with `len` taps, no wrap
    let size = (total + len - 1).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let zero = Cx::new(T::zero(), T::zero());
    let scale = T::one() / T::from_usize_lossy(size);
    let eps_hat: Vec<Vec<Cx<T>>> = innovations
        .rows()
        .into_iter()
        .map(|row| {
            let mut buf = vec![zero; size];
            buf[..total].iter_mut().zip(row.iter()).for_each(|(d, s)| *d = *s);
            forward.process(&mut buf);
            buf
        })
        .collect();
    let mut out = Array2::zeros((filter.num_sensors(), num_samples));
    let mut h_hat = vec![zero; size];
    let mut acc = vec![zero; size];
    for m in 0..filter.num_sensors() {
        acc.iter_mut().for_each(|z| *z = zero);
        for (j, eps) in eps_hat.iter().enumerate() {
            h_hat.iter_mut().for_each(|z| *z = zero);
            for (k, tap) in filter.taps().iter().enumerate() {
                h_hat[k] = tap[[m, j]];
            }
            forward.process(&mut h_hat);
            for ((a, e), h) in acc.iter_mut().zip(eps).zip(&h_hat) {
                *a = *a + *e * *h;
            }
        }
        inverse.process(&mut acc);
        for n in 0..num_samples {
            out[[m, n]] = acc[pre + n] * scale;
        }
    }
    out
}

/// `y_n = u_n + v_n`.
pub fn superpose<T: Real>(u: &TimeSeriesBlock<T>, v: &TimeSeriesBlock<T>) -> Result<TimeSeriesBlock<T>> {
    if u.data.dim() != v.data.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", u.data.dim()),
            got: format!("{:?}", v.data.dim()),
        });
    }
    TimeSeriesBlock::new(&u.data + &v.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const BETA: f64 = 10.0 / 11.0;

    fn autocov(row: &[Cx<f64>], lag: usize) -> Cx<f64> {
        let n = row.len() - lag;
        row[lag..].iter().zip(row).map(|(a, b)| *b * a.conj()).sum::<Cx<f64>>() / n as f64
    }

    #[test]
    fn rank_one_filter_memoryless() {
        let f = make_paper_filter(4, 1.0, 0.0, 1).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!((f.num_sensors(), f.rank()), (4, 1));
        for z in f.taps()[0].iter() {
            assert_eq!(*z, Cx::new(0.5, 0.0));
        }
    }

    #[test]
    fn rank_one_filter_geometric_taps() {
        let f = make_paper_filter(1, 2.0, 0.5, 3).unwrap();
        let taps: Vec<f64> = f.taps().iter().map(|t| t[[0, 0]].re).collect();
        assert_eq!(taps, vec![2.0, 1.0, 0.5]);
    }

    #[test]
    fn rank_one_filter_power_matches_partial_sum() {
        let len = geometric_length(BETA);
        assert!(BETA.powi(len as i32) < 1e-12);
        assert!(BETA.powi(len as i32 - 1) >= 1e-12);
        let f = make_paper_filter(16, 1.0, BETA, len).unwrap();
        let mut oracle = 0.0;
        let mut w = 1.0;
        for _ in 0..len {
            oracle += w;
            w *= BETA * BETA;
        }
        assert_relative_eq!(f.total_power(), oracle, max_relative = 1e-12);
        assert_relative_eq!(f.total_power(), 1.0 / (1.0 - BETA * BETA), max_relative = 1e-10);
        assert!((f.total_power() - 5.7619).abs() < 1e-4);
    }

    #[test]
    fn rank_one_filter_rejects_unstable_beta() {
        assert!(make_paper_filter(4, 1.0, 1.0, 4).is_err());
        assert!(make_paper_filter(4, 1.0, 1.5, 4).is_err());
        assert!(make_paper_filter(4, 1.0, -0.1, 4).is_err());
        assert!(make_paper_filter(4, -1.0, 0.5, 4).is_err());
    }

    #[test]
    fn steered_filter_columns_orthogonal() {
        let f = make_steered_filter::<f64>(8, 3, 1.0, 0.0, 1).unwrap();
        let h = &f.taps()[0];
        for a in 0..3 {
            for b in 0..3 {
                let ip: Cx<f64> = h.column(a).iter().zip(h.column(b)).map(|(x, y)| x.conj() * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - Cx::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        assert!(make_steered_filter::<f64>(2, 3, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn filter_bank_rejects_ragged_taps() {
        let taps = vec![Array2::<Cx<f64>>::zeros((2, 1)), Array2::zeros((3, 1))];
        assert!(matches!(FilterBank::new(taps), Err(Error::ShapeMismatch { .. })));
        assert!(FilterBank::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn white_noise_covariance_is_identity() {
        let (m, n) = (4, 20_000);
        let v = generate_noise(&NoiseModel::<f64>::white(), m, n, RngStream::new(1, 0)).unwrap();
        for i in 0..m {
            for j in 0..m {
                let c: Cx<f64> = v.row(i).iter().zip(v.row(j)).map(|(a, b)| a * b.conj()).sum::<Cx<f64>>() / n as f64;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((c - Cx::new(expect, 0.0)).norm() < 0.05, "cov[{i},{j}] = {c}");
            }
        }
    }

    #[test]
    fn ma1_lag_one_autocovariance() {
        let model = NoiseModel::ma1(0.5).unwrap();
        let v = generate_noise(&model, 1, 100_000, RngStream::new(2, 0)).unwrap();
        let r1 = autocov(v.row(0), 1);
        assert!((r1.re - 0.5).abs() < 0.02 && r1.im.abs() < 0.02, "r(1) = {r1}");
    }

    #[test]
    fn noise_is_reproducible() {
        let model = NoiseModel::ma1(0.5).unwrap();
        let a = generate_noise(&model, 3, 64, RngStream::new(9, 4)).unwrap();
        let b = generate_noise(&model, 3, 64, RngStream::new(9, 4)).unwrap();
        let c = generate_noise(&model, 3, 64, RngStream::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_model_sensor_mismatch() {
        let one = vec![Cx::new(1.0, 0.0)];
        let model = NoiseModel::<f64>::per_sensor(vec![one.clone(), one]).unwrap();
        assert!(matches!(
            generate_noise(&model, 3, 8, RngStream::new(0, 0)),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(generate_noise(&model, 2, 8, RngStream::new(0, 0)).is_ok());
    }

    #[test]
    fn noise_model_rejects_vanishing_density() {
        assert!(NoiseModel::<f64>::shared(&[1.0, -1.0]).is_err());
        assert!(NoiseModel::<f64>::shared(&[1.0, 1.0]).is_err());
        assert!(NoiseModel::<f64>::shared(&[]).is_err());
        assert!(NoiseModel::<f64>::shared(&[1.0, 0.99]).is_ok());
    }

    #[test]
    fn memoryless_signal_is_tap_times_innovation() {
        let f = make_steered_filter::<f64>(5, 2, 1.3, 0.0, 1).unwrap();
        let real = generate_signal(&f, 32, RngStream::new(3, 1)).unwrap();
        let eps = real.driving_window();
        let expect = f.taps()[0].dot(&eps);
        for (a, b) in real.signal.data().iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn fft_convolution_matches_direct() {
        let f = make_steered_filter::<f64>(3, 2, 1.0, 0.9, 64).unwrap();
        let real = generate_signal(&f, 50, RngStream::new(5, 5)).unwrap();
        let direct = convolve_direct(&f, &real.innovations, 50);
        for (a, b) in real.signal.data().iter().zip(direct.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_filter_gives_zero_block() {
        let f = make_paper_filter::<f64>(4, 0.0, BETA, geometric_length(BETA)).unwrap();
        let real = generate_signal(&f, 128, RngStream::new(0, 0)).unwrap();
        assert!(real.signal.data().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn geometric_signal_power() {
        let f = make_paper_filter::<f64>(16, 1.0, BETA, geometric_length(BETA)).unwrap();
        let n = 100_000;
        let u = generate_signal(&f, n, RngStream::new(11, 0)).unwrap().signal;
        let power = u.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((power / 5.7619 - 1.0).abs() < 0.03, "power {power}");
    }

    #[test]
    fn power_identity_error_shrinks() {
        let f = make_paper_filter::<f64>(2, 1.0, BETA, geometric_length(BETA)).unwrap();
        let target = f.total_power();
        let rms = |n: usize| {
            let sq: f64 = (0..12)
                .map(|t| {
                    let u = generate_signal(&f, n, RngStream::new(12, t)).unwrap().signal;
                    let p = u.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
                    (p / target - 1.0).powi(2)
                })
                .sum();
            (sq / 12.0).sqrt()
        };
        let (small, large) = (rms(10_000), rms(100_000));
        assert!(large < small, "rms error {small} -> {large}");
    }

    #[test]
    fn ma_noise_is_stationary() {
        let theta = [1.0, -0.4, 0.3];
        let model = NoiseModel::shared(&theta).unwrap();
        let n = 100_000;
        let v = generate_noise(&model, 1, n, RngStream::new(13, 0)).unwrap();
        let r: Vec<Cx<f64>> = (0..theta.len()).map(|k| model.autocovariance(0, k)).collect();
        let se = (r.iter().map(|z| z.norm_sqr()).sum::<f64>() * 2.0 / n as f64).sqrt();
        for (k, expect) in r.iter().enumerate() {
            let got = autocov(v.row(0), k);
            assert!((got - expect).norm() < 3.0 * se, "lag {k}: {got} vs {expect}");
        }
        // no start-up transient
        let p0 = v.row(0)[..200].iter().map(|z| z.norm_sqr()).sum::<f64>() / 200.0;
        assert!((p0 - r[0].re).abs() < 0.5, "early power {p0}");
    }

    #[test]
    fn noise_is_circular() {
        let n = 50_000;
        let v = generate_noise(&NoiseModel::<f64>::ma1(0.5).unwrap(), 2, n, RngStream::new(14, 0)).unwrap();
        for m in 0..2 {
            let pseudo: Cx<f64> = v.row(m).iter().map(|z| z * z).sum::<Cx<f64>>() / n as f64;
            assert!(pseudo.norm() < 5.0 * 1.25 / (n as f64).sqrt(), "pseudo-covariance {pseudo}");
        }
    }

    #[test]
    fn distinct_streams_uncorrelated() {
        let n = 50_000;
        let a = generate_noise(&NoiseModel::<f64>::white(), 1, n, RngStream::new(15, 0)).unwrap();
        let b = generate_noise(&NoiseModel::<f64>::white(), 1, n, RngStream::new(15, 1)).unwrap();
        let x: Cx<f64> = a.row(0).iter().zip(b.row(0)).map(|(p, q)| p * q.conj()).sum::<Cx<f64>>() / n as f64;
        assert!(x.norm() < 5.0 / (n as f64).sqrt(), "cross-correlation {x}");
    }

    #[test]
    fn superpose_contract() {
        let v = generate_noise(&NoiseModel::<f64>::white(), 4, 8, RngStream::new(0, 1)).unwrap();
        let zero = TimeSeriesBlock::zeros(4, 8);
        assert_eq!(superpose(&zero, &v).unwrap(), v);
        assert_eq!(superpose(&v, &zero).unwrap(), v);
        assert!(matches!(
            superpose(&TimeSeriesBlock::<f64>::zeros(4, 8), &TimeSeriesBlock::zeros(4, 9)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn block_rejects_non_finite() {
        let mut data = Array2::<Cx<f64>>::zeros((2, 2));
        data[[1, 0]] = Cx::new(f64::NAN, 0.0);
        assert!(TimeSeriesBlock::new(data).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let v = generate_noise(&NoiseModel::<f32>::ma1(0.5).unwrap(), 2, 16, RngStream::new(1, 1)).unwrap();
        let w = generate_noise(&NoiseModel::<f64>::ma1(0.5).unwrap(), 2, 16, RngStream::new(1, 1)).unwrap();
        for (a, b) in v.data().iter().zip(w.data().iter()) {
            assert!((a.re as f64 - b.re).abs() < 1e-5 && (a.im as f64 - b.im).abs() < 1e-5);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn generation_is_deterministic(seed in any::<u64>(), stream in any::<u64>(), m in 1usize..4, n in 1usize..40) {
            let model = NoiseModel::<f64>::ma1(0.3).unwrap();
            let a = generate_noise(&model, m, n, RngStream::new(seed, stream)).unwrap();
            let b = generate_noise(&model, m, n, RngStream::new(seed, stream)).unwrap();
            prop_assert_eq!(a, b);
            let f = make_paper_filter::<f64>(m, 1.0, 0.5, 40).unwrap();
            let u1 = generate_signal(&f, n, RngStream::new(seed, stream)).unwrap();
            let u2 = generate_signal(&f, n, RngStream::new(seed, stream)).unwrap();
            prop_assert_eq!(u1.signal, u2.signal);
        }

        #[test]
        fn circular_shift_round_trip(n in 1usize..20, s in 0usize..50) {
            let v = generate_noise(&NoiseModel::<f64>::white(), 2, n, RngStream::new(1, 2)).unwrap();
            let back = v.circular_shift(s).circular_shift(n - s % n);
            prop_assert_eq!(back, v);
        }
    }
}
