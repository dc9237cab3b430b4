//! CSV persistence. Every float is written with 17 significant digits so a
//! rerun can be compared byte for byte.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::detection::ScanResult;
use crate::error::Result;

use super::experiments::{NullSummary, PhaseRow, RocPoint};

/// `x` with 17 significant digits in scientific notation.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn write_table<I>(dir: &Path, name: &str, header: &str, rows: I) -> Result<PathBuf>
where
    I: IntoIterator<Item = Vec<String>>,
{
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_roc(dir: &Path, points: &[RocPoint]) -> Result<PathBuf> {
    write_table(
        dir,
        "roc.csv",
        "threshold,pfa,pd,trials",
        points
            .iter()
            .map(|p| vec![format_f64(p.threshold), format_f64(p.pfa), format_f64(p.pd), p.trials.to_string()]),
    )
}

/// Writes `null.csv` and `null_esd.csv`.
pub fn write_null(dir: &Path, summary: &NullSummary) -> Result<(PathBuf, PathBuf)> {
    let quantiles = write_table(
        dir,
        "null.csv",
        "quantile,value",
        summary.quantiles.iter().map(|(p, v)| vec![format_f64(*p), format_f64(*v)]),
    )?;
    let esd = write_table(dir, "null_esd.csv", "eigenvalue", summary.esd.iter().map(|v| vec![format_f64(*v)]))?;
    Ok((quantiles, esd))
}

pub fn write_phase(dir: &Path, rows: &[PhaseRow]) -> Result<PathBuf> {
    write_table(
        dir,
        "phase.csv",
        "gamma,median_lambda1,phi,c",
        rows.iter().map(|r| {
            vec![
                format_f64(r.gamma),
                format_f64(r.median_lambda1),
                format_f64(r.phi),
                format_f64(r.c),
            ]
        }),
    )
}

/// `spectrum.csv`: one `(nu, lambda1)` row per grid frequency.
pub fn write_spectrum(dir: &Path, scan: &ScanResult<f64>) -> Result<PathBuf> {
    let trace = scan.trace.as_deref().unwrap_or(&[]);
    let n = trace.len();
    write_table(
        dir,
        "spectrum.csv",
        "nu,lambda1",
        trace
            .iter()
            .enumerate()
            .map(|(j, v)| vec![format_f64(j as f64 / n as f64), format_f64(*v)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(-2.5), "-2.5000000000000000e0");
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        for x in [std::f64::consts::PI, 1e-300, 123456.789, 2.0f64.sqrt()] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
