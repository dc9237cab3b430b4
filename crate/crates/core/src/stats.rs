//! Small order-statistics helpers used by the harness and the tests.

use crate::error::{Error, Result};

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("statistics of an empty sample".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("sample contains NaN".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Linear-interpolation quantile (the "type 7" rule) of an unsorted sample.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    let v = sorted(values)?;
    Ok(quantile_sorted(&v, p))
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> Result<f64> {
    quantile(values, 0.5)
}

/// Interquartile range `q(0.75) - q(0.25)`.
pub fn iqr(values: &[f64]) -> Result<f64> {
    let v = sorted(values)?;
    Ok(quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25))
}

/// Kolmogorov–Smirnov distance `sup_x |F_n(x) - F(x)|` between the empirical
/// distribution of `values` and a continuous `cdf`.
pub fn ks_distance<F>(values: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let v = sorted(values)?;
    let n = v.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x)?;
        worst = worst.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 4.0);
        assert_eq!(median(&v).unwrap(), 2.5);
        assert_eq!(quantile(&v, 1.0 / 3.0).unwrap(), 2.0);
        assert_eq!(iqr(&v).unwrap(), 1.5);
        assert_eq!(median(&[7.0]).unwrap(), 7.0);
        assert!(median(&[]).is_err());
        assert!(median(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn ks_against_uniform() {
        let v: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_distance(&v, |x| Ok(x.clamp(0.0, 1.0))).unwrap();
        assert!((d - 0.005).abs() < 1e-12);
        let d = ks_distance(&[0.9, 0.95], Ok).unwrap();
        assert!((d - 0.9).abs() < 1e-12);
    }
}
