//! Times one frequency scan per solver for a few geometries.
//!
//! `cargo run --release -p scm-core --example scan_timing`

use std::time::Instant;

use scm_core::{generate_noise, scan_block, Lambda1Solver, NoiseModel, RngStream};

fn main() -> scm_core::Result<()> {
    let model = NoiseModel::<f64>::ma1(0.5)?;
    for &(m, n, b) in &[(39usize, 512usize, 78usize), (52, 2048, 208), (63, 1024, 126), (104, 2048, 208)] {
        let y = generate_noise(&model, m, n, RngStream::new(7, 1))?;
        let mut line = format!("M={m:4} N={n:5} B={b:4}");
        let mut reference = None;
        for solver in [Lambda1Solver::Dense, Lambda1Solver::Krylov, Lambda1Solver::Screened] {
            let t = Instant::now();
            let scan = scan_block(&y, b, solver, false)?;
            let elapsed = t.elapsed();
            let r = *reference.get_or_insert(scan.statistic);
            line += &format!("  {solver:?} {elapsed:>8.3?} (diff {:.1e})", (scan.statistic - r).abs());
        }
        println!("{line}");
    }
    Ok(())
}
