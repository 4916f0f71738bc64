//! Weights computed at a fixed mesh size approach the limiting weights as
//! `h` shrinks. With the regularizer `exp(-|x|^(2p+2))` the gap decays like
//! `h^(2p+2)` on the diagonal.
//!
//! ```text
//! cargo run --release --example finite_h_weights -- 0.5 1
//! ```

use ctrule::kernels::{Axis, KernelKind};
use ctrule::weightgen::{solve_weights, weights_at_h, WeightConfig};
use ctrule::xprec::{Precision, XReal};

fn main() -> ctrule::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha = args.first().map(String::as_str).unwrap_or("0.5");
    let p: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let kernel = KernelKind::OnDiag(Axis::X1);
    let prec = Precision::new(40);
    let a = XReal::parse(alpha, prec)?;

    let limit = solve_weights(kernel, p, &a, &WeightConfig { precision: prec, ..Default::default() })?.values_x(prec)?;
    let k = 2 * p + 2;
    let mut prev: Option<f64> = None;
    println!("max |w(h) - w|, k = {k}");
    for m in 3..=7 {
        let h = XReal::pow2(-m, prec);
        let w = weights_at_h(kernel, p, &a, &h, k)?;
        let gap = w.iter().zip(&limit).map(|(x, y)| (x - y).abs().to_f64()).fold(0.0, f64::max);
        let rate = prev.map(|g| format!("  rate {:.2}", (g / gap).log2())).unwrap_or_default();
        println!("  h = 2^-{m}  {gap:.3e}{rate}");
        prev = Some(gap);
    }
    Ok(())
}
