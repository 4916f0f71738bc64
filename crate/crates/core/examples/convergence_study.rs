//! Measures the observed order of the corrected rules on the C⁶ test
//! functions and compares it with the predicted one.
//!
//! ```text
//! cargo run --release --example convergence_study -- on_diag_x1 0.5 0,1,2
//! ```

use ctrule::convergence::{convergence_study, ConvergenceConfig};
use ctrule::kernels::{builtin_phi, KernelKind};

fn main() -> ctrule::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kernel: KernelKind = args.first().map(String::as_str).unwrap_or("on_diag_x1").parse()?;
    let alpha: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let ps: Vec<u32> = args
        .get(2)
        .map(|s| s.split(',').filter_map(|p| p.parse().ok()).collect())
        .unwrap_or_else(|| if kernel.is_off_diag() { vec![1, 2, 3] } else { vec![0, 1, 2] });

    let phi = builtin_phi(kernel);
    let cfg = ConvergenceConfig::default();
    for p in ps {
        let report = convergence_study(&phi, kernel, alpha, p, None, &cfg)?;
        println!("{kernel}  alpha = {alpha}  p = {p}  reference = {:.20}", report.reference);
        for (h, e) in &report.rows {
            println!("  h = 1/{:<4} error = {e:.3e}", (1.0 / h) as u32);
        }
        match &report.fit {
            Some(fit) => println!(
                "  slope {:.3} (expected {:.1}) over h in [{}, {}]{}",
                fit.slope,
                report.expected_order(),
                fit.h_range.0,
                fit.h_range.1,
                if fit.dropped_coarsest { ", coarsest point dropped" } else { "" }
            ),
            None => println!("  fewer than two points above the floor"),
        }
    }
    Ok(())
}
