//! Deterministic reference quantities: transfer functions, noise densities,
//! the whitened signal spectrum `Ξ(ν)`, spike strengths, the Marchenko–Pastur
//! law and the spiked-model eigenvalue map `φ`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::scalar::{unit_phase, Cx, Real};
use crate::signal::{ma_density, FilterBank, NoiseModel};
use crate::spectral::FourierGrid;

/// `H(ν) = Σ_k H_k e^{-i2πνk}`, an `M × K` matrix.
pub fn transfer_function<T: Real>(filter: &FilterBank<T>, nu: T) -> Array2<Cx<T>> {
    let mut out = Array2::zeros((filter.num_sensors(), filter.rank()));
    for (k, tap) in filter.taps().iter().enumerate() {
        let phase = unit_phase(nu * T::from_usize_lossy(k));
        out.zip_mut_with(tap, |o, h| *o = *o + *h * phase);
    }
    out
}

/// `s_m(ν) = |Σ_q θ_m(q) e^{-i2πνq}|²` for `m = 0..M`.
pub fn noise_spectral_density<T: Real>(model: &NoiseModel<T>, num_sensors: usize, nu: T) -> Result<Vec<T>> {
    model.check_sensors(num_sensors)?;
    Ok((0..num_sensors).map(|m| ma_density(model.coefficients(m), nu)).collect())
}

/// True spectral quantities at one frequency.
#[derive(Debug, Clone)]
pub struct TrueSpectrum<T: Real> {
    pub nu: T,
    /// `H(ν)`, `M × K`.
    pub transfer: Array2<Cx<T>>,
    /// Diagonal of `S_v(ν)`.
    pub noise_density: Vec<T>,
    /// `Ξ(ν) = S_v^{-1/2} H H^* S_v^{-1/2} + I`.
    pub xi: Array2<Cx<T>>,
}

impl<T: Real> TrueSpectrum<T> {
    pub fn num_sensors(&self) -> usize {
        self.xi.nrows()
    }

    /// `Ξ(ν) - I`.
    pub fn whitened_signal(&self) -> Array2<Cx<T>> {
        let mut out = self.xi.clone();
        for m in 0..out.nrows() {
            out[[m, m]] = out[[m, m]] - Cx::new(T::one(), T::zero());
        }
        out
    }
}

fn whitened_transfer<T: Real>(transfer: &Array2<Cx<T>>, density: &[T], nu: T) -> Result<Array2<Cx<T>>> {
    let mut g = transfer.clone();
    for (m, mut row) in g.rows_mut().into_iter().enumerate() {
        let s = density[m];
        if !(s > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "noise density of sensor {m} vanishes at frequency {nu}"
            )));
        }
        let w = T::one() / s.sqrt();
        row.mapv_inplace(|z| z * w);
    }
    Ok(g)
}

pub fn xi_matrix<T: Real>(filter: &FilterBank<T>, model: &NoiseModel<T>, nu: T) -> Result<TrueSpectrum<T>> {
    let m_dim = filter.num_sensors();
    let transfer = transfer_function(filter, nu);
    let noise_density = noise_spectral_density(model, m_dim, nu)?;
    let g = whitened_transfer(&transfer, &noise_density, nu)?;
    let mut xi = Array2::zeros((m_dim, m_dim));
    for i in 0..m_dim {
        for j in i..m_dim {
            let mut acc = Cx::new(T::zero(), T::zero());
            for k in 0..g.ncols() {
                acc = acc + g[[i, k]] * g[[j, k]].conj();
            }
            if i == j {
                xi[[i, i]] = Cx::new(acc.re + T::one(), T::zero());
            } else {
                xi[[i, j]] = acc;
                xi[[j, i]] = acc.conj();
            }
        }
    }
    Ok(TrueSpectrum {
        nu,
        transfer,
        noise_density,
        xi,
    })
}

/// Top `K` eigenvalues of `Ξ(ν) - I`, clipped at zero, descending.
pub fn spike_gammas<T: Real>(spectrum: &TrueSpectrum<T>, rank: usize) -> Result<Vec<T>> {
    let mut values = hermitian_eigenvalues(&spectrum.whitened_signal().view())?;
    values.truncate(rank);
    for v in values.iter_mut() {
        *v = v.max(T::zero());
    }
    values.resize(rank, T::zero());
    Ok(values)
}

/// `λ₁(S_v^{-1/2} H H^* S_v^{-1/2})` computed through the `K × K` Gram matrix
/// `H^* S_v^{-1} H`, which has the same nonzero spectrum.
pub fn top_whitened_eigenvalue<T: Real>(filter: &FilterBank<T>, model: &NoiseModel<T>, nu: T) -> Result<T> {
    let transfer = transfer_function(filter, nu);
    let density = noise_spectral_density(model, filter.num_sensors(), nu)?;
    let g = whitened_transfer(&transfer, &density, nu)?;
    let k_dim = g.ncols();
    let gram = Array2::from_shape_fn((k_dim, k_dim), |(a, b)| {
        g.column(a)
            .iter()
            .zip(g.column(b).iter())
            .fold(Cx::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * *y)
    });
    Ok(hermitian_eigenvalues(&gram.view())?[0].max(T::zero()))
}

/// Grid frequency maximizing `λ₁(Ξ(ν) - I)` and the maximal value; ties go
/// to the smallest index.
pub fn nu_star<T: Real>(filter: &FilterBank<T>, model: &NoiseModel<T>, grid: FourierGrid) -> Result<(usize, T)> {
    let mut best = (0usize, -T::infinity());
    for j in grid.indices() {
        let value = top_whitened_eigenvalue(filter, model, grid.frequency(j))?;
        if value > best.1 {
            best = (j, value);
        }
    }
    Ok(best)
}

/// `SNR_freq = max_ν Σ_m ‖h_m(ν)‖² / s_m(ν)` over the grid.
pub fn snr_freq<T: Real>(filter: &FilterBank<T>, model: &NoiseModel<T>, grid: FourierGrid) -> Result<T> {
    let mut best = T::zero();
    for j in grid.indices() {
        let nu = grid.frequency(j);
        let transfer = transfer_function(filter, nu);
        let density = noise_spectral_density(model, filter.num_sensors(), nu)?;
        let mut total = T::zero();
        for (m, row) in transfer.rows().into_iter().enumerate() {
            if !(density[m] > T::zero()) {
                return Err(Error::InvalidArgument(format!("noise density of sensor {m} vanishes")));
            }
            total += row.iter().map(|z| z.norm_sqr()).sum::<T>() / density[m];
        }
        best = best.max(total);
    }
    Ok(best)
}

/// Signal gain that places `λ₁(Ξ(ν*)) - 1` at `target` for the shape of
/// `filter`, using the quadratic homogeneity of `γ₁` in the gain.
pub fn gain_for_gamma<T: Real>(
    filter: &FilterBank<T>,
    model: &NoiseModel<T>,
    grid: FourierGrid,
    target: T,
) -> Result<T> {
    if !(target >= T::zero()) || !target.is_finite() {
        return Err(Error::InvalidArgument(format!("target spike {target} must be finite and >= 0")));
    }
    let (_, gamma) = nu_star(filter, model, grid)?;
    if !(gamma > T::zero()) {
        return Err(Error::InvalidArgument("filter shape has no signal power".into()));
    }
    Ok((target / gamma).sqrt())
}

fn check_ratio<T: Real>(c: T) -> Result<()> {
    if !(c > T::zero() && c < T::one()) {
        return Err(Error::InvalidArgument(format!("aspect ratio c = {c} must lie in (0, 1)")));
    }
    Ok(())
}

/// Almost-sure limit of a sample eigenvalue driven by a spike of strength
/// `gamma`: `(γ+1)(γ+c)/γ` above `√c`, the upper bulk edge below.
pub fn phi<T: Real>(gamma: T, c: T) -> Result<T> {
    check_ratio(c)?;
    if !(gamma >= T::zero()) {
        return Err(Error::InvalidArgument(format!("spike strength {gamma} must be >= 0")));
    }
    let root = c.sqrt();
    Ok(if gamma > root {
        (gamma + T::one()) * (gamma + c) / gamma
    } else {
        (T::one() + root).powi(2)
    })
}

/// `((1 - √c)², (1 + √c)²)`.
pub fn mp_edges<T: Real>(c: T) -> Result<(T, T)> {
    check_ratio(c)?;
    let root = c.sqrt();
    Ok(((T::one() - root).powi(2), (T::one() + root).powi(2)))
}

/// Marchenko–Pastur density `√((u₊-x)(x-u₋)) / (2πcx)` on `[u₋, u₊]`.
pub fn mp_pdf<T: Real>(x: T, c: T) -> Result<T> {
    let (lo, hi) = mp_edges(c)?;
    if x <= lo || x >= hi {
        return Ok(T::zero());
    }
    Ok(((hi - x) * (x - lo)).sqrt() / (T::TAU() * c * x))
}

/// Absolute accuracy of [`mp_cdf`].
pub const MP_CDF_TOLERANCE: f64 = 1e-8;

/// Marchenko–Pastur distribution function, integrated adaptively after the
/// substitution `x = u₋ + (u₊-u₋)(1 - cos t)/2`, which removes the square-root
/// endpoint singularities.
pub fn mp_cdf<T: Real>(x: T, c: T) -> Result<T> {
    let (lo, hi) = mp_edges(c)?;
    if x.is_nan() {
        return Err(Error::InvalidArgument("mp_cdf of NaN".into()));
    }
    if x <= lo {
        return Ok(T::zero());
    }
    if x >= hi {
        return Ok(T::one());
    }
    let half_width = (hi - lo) * T::lit(0.5);
    let upper = (T::one() - (x - lo) / half_width).max(-T::one()).min(T::one()).acos();
    let integrand = |t: T| {
        let s = t.sin();
        let xt = lo + half_width * (T::one() - t.cos());
        half_width * half_width * s * s / (T::TAU() * c * xt)
    };
    let value = adaptive_simpson(&integrand, T::zero(), upper, T::lit(MP_CDF_TOLERANCE * 0.1), 48);
    Ok(value.max(T::zero()).min(T::one()))
}

fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T, depth: usize) -> T {
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) * T::lit(0.5);
    let fm = f(m);
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    simpson_step(f, (a, b), (fa, fm, fb), whole, tol, depth)
}

fn simpson_step<T: Real, F: Fn(T) -> T>(f: &F, (a, b): (T, T), (fa, fm, fb): (T, T, T), whole: T, tol: T, depth: usize) -> T {
    let m = (a + b) * T::lit(0.5);
    let flm = f((a + m) * T::lit(0.5));
    let frm = f((m + b) * T::lit(0.5));
    let left = (m - a) / T::lit(6.0) * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / T::lit(6.0) * (fm + T::lit(4.0) * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    let half = tol * T::lit(0.5);
    simpson_step(f, (a, m), (fa, flm, fm), left, half, depth - 1) + simpson_step(f, (m, b), (fm, frm, fb), right, half, depth - 1)
}

/// Spiked-model reference values for one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedReference<T: Real> {
    pub c: T,
    pub gammas: Vec<T>,
    pub bulk_edges: (T, T),
    pub spike_limits: Vec<T>,
}

impl<T: Real> SpikedReference<T> {
    pub fn new(c: T, mut gammas: Vec<T>) -> Result<Self> {
        let bulk_edges = mp_edges(c)?;
        if gammas.iter().any(|g| !(*g >= T::zero()) || !g.is_finite()) {
            return Err(Error::InvalidArgument("spike strengths must be finite and >= 0".into()));
        }
        gammas.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        let spike_limits = gammas.iter().map(|&g| phi(g, c)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            c,
            gammas,
            bulk_edges,
            spike_limits,
        })
    }

    /// `c = M / (B + 1)`.
    pub fn aspect_ratio(num_sensors: usize, span: usize) -> T {
        T::from_usize_lossy(num_sensors) / T::from_usize_lossy(span + 1)
    }

    /// Indices `k` whose spike clears the transition `γ_k > √c`.
    pub fn separated(&self) -> Vec<usize> {
        let root = self.c.sqrt();
        self.gammas
            .iter()
            .enumerate()
            .filter(|(_, g)| **g > root)
            .map(|(k, _)| k)
            .collect()
    }
}
