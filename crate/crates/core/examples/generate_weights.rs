//! Generates limiting correction weights and prints them with the number of
//! digits the extrapolation check supports.
//!
//! ```text
//! cargo run --release --example generate_weights -- off_diag 1.5 3
//! ```

use std::time::Instant;

use ctrule::kernels::KernelKind;
use ctrule::weightgen::{solve_weights, WeightConfig};
use ctrule::xprec::XReal;

fn main() -> ctrule::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kernel: KernelKind = args.first().map(String::as_str).unwrap_or("on_diag_x1").parse()?;
    let alpha = args.get(1).map(String::as_str).unwrap_or("0.5");
    let p: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);

    let cfg = WeightConfig::default();
    let start = Instant::now();
    let table = solve_weights(kernel, p, &XReal::parse(alpha, cfg.precision)?, &cfg)?;
    println!("{kernel}, alpha = {alpha}, p = {p} ({:.1?})", start.elapsed());
    for w in &table.weights {
        println!("  w{}  {}", w.gamma, &w.value[..w.value.len().min(32)]);
    }
    println!("digits backed by the extrapolation check: {}", table.digits);
    Ok(())
}
