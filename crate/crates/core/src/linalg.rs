//! Hermitian eigenvalue solvers.
//!
//! The dense path reduces the matrix to a real symmetric tridiagonal form with
//! Householder reflectors and finishes with implicit-shift QL. The Krylov
//! path runs Lanczos with full reorthogonalization and only targets the
//! largest eigenvalue; it is what the frequency scan uses when asked for the
//! fast solver.
//!
//! Matrices are copied into split real/imaginary row-major buffers so that the
//! inner loops are plain `axpy`s over contiguous memory.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

const MAX_QL_ITERATIONS: usize = 64;

/// Maximum relative asymmetry accepted by the solvers.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Largest entry modulus, used as a cheap norm scale.
fn max_abs<T: Real>(a: &ArrayView2<'_, Cx<T>>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Checks `‖A - A^*‖ ≤ tol ‖A‖` entrywise.
pub fn check_hermitian<T: Real>(a: &ArrayView2<'_, Cx<T>>, tol: T) -> Result<()> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{rows}x{cols}"),
        });
    }
    let scale = max_abs(a);
    let mut worst = T::zero();
    for i in 0..rows {
        for j in i..cols {
            let d = (a[[i, j]] - a[[j, i]].conj()).norm();
            worst = worst.max(d);
        }
    }
    if !worst.is_finite() || !scale.is_finite() {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    if worst > tol * scale {
        return Err(Error::NotHermitian {
            asymmetry: (worst / scale.max(T::min_positive_value())).to_f64_lossy(),
        });
    }
    Ok(())
}

struct Split<T> {
    n: usize,
    re: Vec<T>,
    im: Vec<T>,
}

impl<T: Real> Split<T> {
    fn from_view(a: &ArrayView2<'_, Cx<T>>) -> Self {
        let n = a.nrows();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // average with the mirror entry so the buffer is exactly Hermitian
                let z = (a[[i, j]] + a[[j, i]].conj()) * T::lit(0.5);
                re.push(z.re);
                im.push(z.im);
            }
        }
        Self { n, re, im }
    }
}

/// Householder reflector `I - τ v v^*` with `v[0] = 1`, acting on indices
/// `offset..n`.
struct Reflector<T> {
    offset: usize,
    tau: Cx<T>,
    v_re: Vec<T>,
    v_im: Vec<T>,
}

/// Unitary reduction `A = Q T Q^*`; returns diagonal, off-diagonal and the
/// reflectors defining `Q`.
fn tridiagonalize<T: Real>(mut a: Split<T>, keep_reflectors: bool) -> (Vec<T>, Vec<T>, Vec<Reflector<T>>) {
    let n = a.n;
    let mut diag = vec![T::zero(); n];
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let mut reflectors = Vec::new();
    let half = T::lit(0.5);
    let mut x_re = vec![T::zero(); n];
    let mut x_im = vec![T::zero(); n];
    let mut v_re = vec![T::zero(); n];
    let mut v_im = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let p = k + 1;
        let r = n - p;
        // column k below the diagonal: A[p.., k] = conj(A[k, p..])
        let alpha = Cx::new(a.re[p * n + k], a.im[p * n + k]);
        let mut xnorm_sq = T::zero();
        for i in (p + 1)..n {
            xnorm_sq += a.re[i * n + k] * a.re[i * n + k] + a.im[i * n + k] * a.im[i * n + k];
        }
        if xnorm_sq == T::zero() && alpha.im == T::zero() {
            off[k] = alpha.re;
            continue;
        }
        let mut beta = (alpha.norm_sqr() + xnorm_sq).sqrt();
        if alpha.re >= T::zero() {
            beta = -beta;
        }
        let tau = Cx::new((beta - alpha.re) / beta, -alpha.im / beta);
        let scale = Cx::new(T::one(), T::zero()) / (alpha - beta);
        let (vr, vi) = (&mut v_re[..r], &mut v_im[..r]);
        vr[0] = T::one();
        vi[0] = T::zero();
        for i in 1..r {
            let z = Cx::new(a.re[(p + i) * n + k], a.im[(p + i) * n + k]) * scale;
            vr[i] = z.re;
            vi[i] = z.im;
        }
        off[k] = beta;

        // x = τ A_sub v, accumulated as Σ_j conj(row_j) v_j
        let (xr, xi) = (&mut x_re[..r], &mut x_im[..r]);
        xr.iter_mut().for_each(|z| *z = T::zero());
        xi.iter_mut().for_each(|z| *z = T::zero());
        for j in 0..r {
            let (cr, ci) = (vr[j], vi[j]);
            let base = (p + j) * n + p;
            let row_re = &a.re[base..base + r];
            let row_im = &a.im[base..base + r];
            for i in 0..r {
                xr[i] += row_re[i] * cr + row_im[i] * ci;
                xi[i] += row_re[i] * ci - row_im[i] * cr;
            }
        }
        for i in 0..r {
            let z = tau * Cx::new(xr[i], xi[i]);
            xr[i] = z.re;
            xi[i] = z.im;
        }
        // w = x - τ/2 (x^* v) v
        let mut xv = Cx::new(T::zero(), T::zero());
        for i in 0..r {
            xv = xv + Cx::new(xr[i], -xi[i]) * Cx::new(vr[i], vi[i]);
        }
        let coef = -(tau * xv) * half;
        for i in 0..r {
            let z = Cx::new(xr[i], xi[i]) + coef * Cx::new(vr[i], vi[i]);
            xr[i] = z.re;
            xi[i] = z.im;
        }
        // A_sub -= v w^* + w v^*
        for i in 0..r {
            let (vri, vii, wri, wii) = (vr[i], vi[i], xr[i], xi[i]);
            let base = (p + i) * n + p;
            let row_re = &mut a.re[base..base + r];
            let row_im = &mut a.im[base..base + r];
            for j in 0..r {
                row_re[j] -= vri * xr[j] + vii * xi[j] + wri * vr[j] + wii * vi[j];
                row_im[j] -= vii * xr[j] - vri * xi[j] + wii * vr[j] - wri * vi[j];
            }
        }
        if keep_reflectors {
            reflectors.push(Reflector {
                offset: p,
                tau,
                v_re: vr.to_vec(),
                v_im: vi.to_vec(),
            });
        }
    }
    for (i, d) in diag.iter_mut().enumerate() {
        *d = a.re[i * n + i];
    }
    (diag, off, reflectors)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. When `z_rows` is
/// given it holds the transposed eigenvector matrix (row `i` is eigenvector
/// `i`) and is rotated alongside.
fn tridiagonal_ql<T: Real>(diag: &mut [T], off: &[T], mut z_rows: Option<&mut [T]>) -> Result<()> {
    let n = diag.len();
    if n <= 1 {
        return Ok(());
    }
    let eps = T::epsilon();
    let mut e = vec![T::zero(); n];
    e[..n - 1].copy_from_slice(off);
    // absolute deflation floor: without it a block of rounding-level entries
    // (a rank-deficient input) shrinks toward underflow and never splits
    let norm = (0..n).fold(T::zero(), |acc, i| {
        let side = if i + 1 < n { e[i].abs() } else { T::zero() };
        acc.max(diag[i].abs() + side)
    });
    let floor = eps * norm;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= eps * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::Numerical("tridiagonal QL failed to converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = diag[m] - diag[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    diag[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z_rows.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Eigenvalues sorted in descending order.
pub fn hermitian_eigenvalues<T: Real>(a: &ArrayView2<'_, Cx<T>>) -> Result<Vec<T>> {
    check_hermitian(a, T::lit(HERMITIAN_TOLERANCE))?;
    let (mut diag, off, _) = tridiagonalize(Split::from_view(a), false);
    tridiagonal_ql(&mut diag, &off, None)?;
    sort_descending(&mut diag)?;
    Ok(diag)
}

fn sort_descending<T: Real>(values: &mut [T]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok(())
}

/// Full decomposition: eigenvalues descending and the matching unit
/// eigenvectors as the columns of the returned matrix.
pub fn hermitian_eigen<T: Real>(a: &ArrayView2<'_, Cx<T>>) -> Result<(Vec<T>, Array2<Cx<T>>)> {
    check_hermitian(a, T::lit(HERMITIAN_TOLERANCE))?;
    let n = a.nrows();
    let (mut diag, off, reflectors) = tridiagonalize(Split::from_view(a), true);
    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    tridiagonal_ql(&mut diag, &off, Some(&mut z))?;
    if diag.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("finite"));

    let mut vectors = Array2::<Cx<T>>::zeros((n, n));
    let mut col = vec![Cx::new(T::zero(), T::zero()); n];
    for (out_col, &src) in order.iter().enumerate() {
        for (k, c) in col.iter_mut().enumerate() {
            *c = Cx::new(z[src * n + k], T::zero());
        }
        // Q z = H_0 (H_1 (... H_{n-2} z))
        for h in reflectors.iter().rev() {
            let tail = &mut col[h.offset..];
            let mut dot = Cx::new(T::zero(), T::zero());
            for (i, t) in tail.iter().enumerate() {
                dot = dot + Cx::new(h.v_re[i], -h.v_im[i]) * *t;
            }
            let coef = h.tau * dot;
            for (i, t) in tail.iter_mut().enumerate() {
                *t = *t - coef * Cx::new(h.v_re[i], h.v_im[i]);
            }
        }
        for (k, c) in col.iter().enumerate() {
            vectors[[k, out_col]] = *c;
        }
    }
    let values = order.iter().map(|&i| diag[i]).collect();
    Ok((values, vectors))
}

/// `max_i ‖A v_i - λ_i v_i‖` over the eigenpairs, relative to the largest
/// entry of `A`.
pub fn backward_error<T: Real>(a: &ArrayView2<'_, Cx<T>>, values: &[T], vectors: &ArrayView2<'_, Cx<T>>) -> T {
    let n = a.nrows();
    let scale = max_abs(a).max(T::min_positive_value()) * T::from_usize_lossy(n).sqrt();
    let mut worst = T::zero();
    for (k, &lambda) in values.iter().enumerate() {
        let mut res = T::zero();
        for i in 0..n {
            let mut acc = Cx::new(T::zero(), T::zero());
            for j in 0..n {
                acc = acc + a[[i, j]] * vectors[[j, k]];
            }
            res += (acc - vectors[[i, k]] * lambda).norm_sqr();
        }
        worst = worst.max(res.sqrt());
    }
    worst / scale
}

/// Outcome of a Lanczos run for the top eigenpair.
#[derive(Debug, Clone)]
pub struct TopEigenpair<T: Real> {
    pub value: T,
    pub vector: Vec<Cx<T>>,
    pub iterations: usize,
    /// Residual bound `‖A x - θ x‖`.
    pub residual: T,
}

/// Reusable workspace for [`Lanczos::top`].
pub struct Lanczos<T: Real> {
    n: usize,
    basis_re: Vec<T>,
    basis_im: Vec<T>,
    alpha: Vec<T>,
    beta: Vec<T>,
    w_re: Vec<T>,
    w_im: Vec<T>,
    mat_re: Vec<T>,
    mat_im: Vec<T>,
    /// Stop once `‖A x - θ x‖ ≤ tol · |θ|`.
    pub tol: T,
}

impl<T: Real> Lanczos<T> {
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(n: usize) -> Self {
        Self {
            n,
            basis_re: Vec::new(),
            basis_im: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            w_re: vec![T::zero(); n],
            w_im: vec![T::zero(); n],
            mat_re: vec![T::zero(); n * n],
            mat_im: vec![T::zero(); n * n],
            tol: T::lit(Self::DEFAULT_TOL),
        }
    }

    /// Largest eigenpair of the Hermitian matrix `a`, started from `start`
    /// when given.
    pub fn top(&mut self, a: &ArrayView2<'_, Cx<T>>, start: Option<&[Cx<T>]>) -> Result<TopEigenpair<T>> {
        let n = self.n;
        if a.dim() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{:?}", a.dim()),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let z = a[[i, j]];
                self.mat_re[i * n + j] = z.re;
                self.mat_im[i * n + j] = z.im;
            }
        }
        self.basis_re.clear();
        self.basis_im.clear();
        self.alpha.clear();
        self.beta.clear();

        // start vector: warm start blended with a fixed generic direction so
        // the top eigenvector is never (numerically) missed
        let mut q_re = vec![T::zero(); n];
        let mut q_im = vec![T::zero(); n];
        for i in 0..n {
            let t = T::from_usize_lossy(i + 1);
            q_re[i] = T::one() + T::lit(0.5) * (t * T::lit(0.7548776662)).fract();
            q_im[i] = T::lit(0.5) * (t * T::lit(0.5698402910)).fract() - T::lit(0.25);
        }
        normalize(&mut q_re, &mut q_im);
        if let Some(s) = start {
            let norm: T = s.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if s.len() == n && norm > T::zero() && norm.is_finite() {
                for i in 0..n {
                    q_re[i] = T::lit(0.25) * q_re[i] + s[i].re / norm;
                    q_im[i] = T::lit(0.25) * q_im[i] + s[i].im / norm;
                }
                normalize(&mut q_re, &mut q_im);
            }
        }

        let mut theta = T::zero();
        let mut residual = T::infinity();
        let mut coeffs = Vec::new();
        let mut steps = 0;
        for step in 0..n {
            self.basis_re.extend_from_slice(&q_re);
            self.basis_im.extend_from_slice(&q_im);
            // w = A q, as Σ_j conj(row_j) q_j
            self.w_re.iter_mut().for_each(|z| *z = T::zero());
            self.w_im.iter_mut().for_each(|z| *z = T::zero());
            for j in 0..n {
                let (cr, ci) = (q_re[j], q_im[j]);
                let row_re = &self.mat_re[j * n..(j + 1) * n];
                let row_im = &self.mat_im[j * n..(j + 1) * n];
                for i in 0..n {
                    self.w_re[i] += row_re[i] * cr + row_im[i] * ci;
                    self.w_im[i] += row_re[i] * ci - row_im[i] * cr;
                }
            }
            // full reorthogonalization, applied twice
            let mut alpha = T::zero();
            for pass in 0..2 {
                for b in 0..=step {
                    let br = &self.basis_re[b * n..(b + 1) * n];
                    let bi = &self.basis_im[b * n..(b + 1) * n];
                    let (mut dr, mut di) = (T::zero(), T::zero());
                    for i in 0..n {
                        dr += br[i] * self.w_re[i] + bi[i] * self.w_im[i];
                        di += br[i] * self.w_im[i] - bi[i] * self.w_re[i];
                    }
                    if b == step && pass == 0 {
                        alpha = dr;
                    } else if b == step {
                        alpha += dr;
                    }
                    for i in 0..n {
                        self.w_re[i] -= dr * br[i] - di * bi[i];
                        self.w_im[i] -= dr * bi[i] + di * br[i];
                    }
                }
            }
            let beta: T = self
                .w_re
                .iter()
                .zip(&self.w_im)
                .map(|(r, i)| *r * *r + *i * *i)
                .sum::<T>()
                .sqrt();
            self.alpha.push(alpha);
            steps = step + 1;

            let (t, s) = tridiagonal_top(&self.alpha, &self.beta);
            theta = t;
            coeffs = s;
            residual = beta * coeffs.last().copied().unwrap_or(T::zero()).abs();
            let scale = theta.abs().max(T::min_positive_value());
            if residual <= self.tol * scale || beta <= T::epsilon() * scale {
                break;
            }
            self.beta.push(beta);
            for i in 0..n {
                q_re[i] = self.w_re[i] / beta;
                q_im[i] = self.w_im[i] / beta;
            }
        }
        if !theta.is_finite() {
            return Err(Error::Numerical("Lanczos produced a non-finite Ritz value".into()));
        }
        let mut vector = vec![Cx::new(T::zero(), T::zero()); n];
        for (b, &c) in coeffs.iter().enumerate() {
            for i in 0..n {
                vector[i] = vector[i] + Cx::new(self.basis_re[b * n + i], self.basis_im[b * n + i]) * c;
            }
        }
        Ok(TopEigenpair {
            value: theta,
            vector,
            iterations: steps,
            residual,
        })
    }
}

fn normalize<T: Real>(re: &mut [T], im: &mut [T]) {
    let norm: T = re.iter().zip(im.iter()).map(|(a, b)| *a * *a + *b * *b).sum::<T>().sqrt();
    re.iter_mut().for_each(|x| *x /= norm);
    im.iter_mut().for_each(|x| *x /= norm);
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, plus its unit eigenvector.
fn tridiagonal_top<T: Real>(alpha: &[T], beta: &[T]) -> (T, Vec<T>) {
    let k = alpha.len();
    if k == 1 {
        return (alpha[0], vec![T::one()]);
    }
    // Gershgorin bracket, then Sturm-count bisection
    let mut lo = T::infinity();
    let mut hi = -T::infinity();
    for i in 0..k {
        let left = if i > 0 { beta[i - 1].abs() } else { T::zero() };
        let right = if i + 1 < k { beta[i].abs() } else { T::zero() };
        lo = lo.min(alpha[i] - left - right);
        hi = hi.max(alpha[i] + left + right);
    }
    let count_below = |x: T| -> usize {
        let tiny = T::min_positive_value();
        let mut count = 0;
        let mut d = alpha[0] - x;
        if d < T::zero() {
            count += 1;
        }
        for i in 1..k {
            let denom = if d.abs() < tiny { tiny } else { d };
            d = alpha[i] - x - beta[i - 1] * beta[i - 1] / denom;
            if d < T::zero() {
                count += 1;
            }
        }
        count
    };
    let span = hi.abs().max(lo.abs()).max(T::min_positive_value());
    for _ in 0..200 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi || hi - lo <= T::lit(2.0) * T::epsilon() * span {
            break;
        }
        if count_below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = lo + (hi - lo) * T::lit(0.5);
    (theta, inverse_iteration(alpha, beta, theta))
}

// Two sweeps of inverse iteration with a partially pivoted tridiagonal LU.
fn inverse_iteration<T: Real>(alpha: &[T], beta: &[T], theta: T) -> Vec<T> {
    let k = alpha.len();
    let scale = alpha.iter().chain(beta.iter()).fold(T::zero(), |m, v| m.max(v.abs()));
    let shift = theta + T::epsilon() * scale.max(T::min_positive_value()) * T::lit(4.0);
    // rows stored as (main, upper1, upper2) after elimination
    let mut d = vec![T::zero(); k];
    let mut u1 = vec![T::zero(); k];
    let mut u2 = vec![T::zero(); k];
    let mut mult = vec![T::zero(); k];
    let mut swapped = vec![false; k];
    let tiny = T::epsilon() * scale.max(T::min_positive_value());

    let mut cur_d = alpha[0] - shift;
    let mut cur_u1 = if k > 1 { beta[0] } else { T::zero() };
    let mut cur_u2 = T::zero();
    for i in 0..k - 1 {
        let sub = beta[i];
        let next_d = alpha[i + 1] - shift;
        let next_u1 = if i + 2 < k { beta[i + 1] } else { T::zero() };
        if sub.abs() > cur_d.abs() {
            // swap rows i and i+1
            swapped[i] = true;
            let m = cur_d / sub;
            mult[i] = m;
            d[i] = sub;
            u1[i] = next_d;
            u2[i] = next_u1;
            let nd = cur_u1 - m * next_d;
            let nu1 = cur_u2 - m * next_u1;
            cur_d = nd;
            cur_u1 = nu1;
            cur_u2 = T::zero();
        } else {
            let piv = if cur_d.abs() < tiny { tiny } else { cur_d };
            let m = sub / piv;
            mult[i] = m;
            d[i] = piv;
            u1[i] = cur_u1;
            u2[i] = cur_u2;
            cur_d = next_d - m * cur_u1;
            cur_u1 = next_u1 - m * cur_u2;
            cur_u2 = T::zero();
        }
    }
    d[k - 1] = if cur_d.abs() < tiny { tiny } else { cur_d };

    let mut x = vec![T::one(); k];
    for _ in 0..3 {
        // forward elimination on the right-hand side
        for i in 0..k - 1 {
            if swapped[i] {
                x.swap(i, i + 1);
            }
            let xi = x[i];
            x[i + 1] -= mult[i] * xi;
        }
        // back substitution
        for i in (0..k).rev() {
            let mut acc = x[i];
            if i + 1 < k {
                acc -= u1[i] * x[i + 1];
            }
            if i + 2 < k {
                acc -= u2[i] * x[i + 2];
            }
            x[i] = acc / d[i];
        }
        let norm: T = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Certifies `λ₁(A) < x` by attempting a Cholesky factorization of `xI - A`.
///
/// Returns `true` when the factorization breaks down, i.e. when `λ₁(A) ≥ x`
/// up to rounding; callers fall back to an exact solve in that case. The
/// buffers are reused across calls.
pub struct CholeskyScreen<T: Real> {
    n: usize,
    re: Vec<T>,
    im: Vec<T>,
}

impl<T: Real> CholeskyScreen<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            re: vec![T::zero(); n * n],
            im: vec![T::zero(); n * n],
        }
    }

    pub fn reaches(&mut self, a: &ArrayView2<'_, Cx<T>>, x: T) -> bool {
        let n = self.n;
        debug_assert_eq!(a.dim(), (n, n));
        // upper triangle of xI - A, row-major
        for i in 0..n {
            for j in i..n {
                let z = a[[i, j]];
                self.re[i * n + j] = -z.re;
                self.im[i * n + j] = -z.im;
            }
            self.re[i * n + i] += x;
            self.im[i * n + i] = T::zero();
        }
        for k in 0..n {
            let pivot = self.re[k * n + k];
            if !(pivot > T::zero()) {
                return true;
            }
            let inv = T::one() / pivot.sqrt();
            // row k becomes u_k = A[k, k..] / sqrt(pivot)
            for j in k + 1..n {
                self.re[k * n + j] *= inv;
                self.im[k * n + j] *= inv;
            }
            let (head_re, tail_re) = self.re.split_at_mut((k + 1) * n);
            let (head_im, tail_im) = self.im.split_at_mut((k + 1) * n);
            let u_re = &head_re[k * n..];
            let u_im = &head_im[k * n..];
            // A[i, j] -= conj(u_i) u_j for k < i <= j
            for i in k + 1..n {
                let (ar, ai) = (u_re[i], -u_im[i]);
                let row = (i - k - 1) * n;
                let row_re = &mut tail_re[row + i..row + n];
                let row_im = &mut tail_im[row + i..row + n];
                let (ur, ui) = (&u_re[i..n], &u_im[i..n]);
                for j in 0..row_re.len() {
                    row_re[j] -= ar * ur[j] - ai * ui[j];
                    row_im[j] -= ar * ui[j] + ai * ur[j];
                }
            }
        }
        false
    }
}
