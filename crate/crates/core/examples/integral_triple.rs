//! The three integrals `I11`, `I22`, `I12` of one integrand at a common
//! `α`, corrected with each kernel's own weight table.
//!
//! ```text
//! cargo run --release --example integral_triple -- 1.5 2 1/64
//! ```

use ctrule::cli::parse_mesh;
use ctrule::kernels::{builtin_phi, Axis, KernelKind};
use ctrule::quadrature::{integral_triple, QuadratureConfig};
use ctrule::refint::reference_integral;
use ctrule::weightgen::{solve_weights, WeightConfig};
use ctrule::xprec::XReal;

fn main() -> ctrule::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(1.5);
    let p: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let m = args.get(2).and_then(|s| parse_mesh(s)).unwrap_or(6);
    let h = 0.5f64.powi(m as i32);

    let cfg = WeightConfig::default();
    let a = XReal::from_f64(alpha, cfg.precision);
    let kernels = [KernelKind::OnDiag(Axis::X1), KernelKind::OnDiag(Axis::X2), KernelKind::OffDiag];
    // The off-diagonal rule has no weights below p = 2.
    let tables = kernels
        .iter()
        .map(|&k| solve_weights(k, if k.is_off_diag() { p.max(2) } else { p }, &a, &cfg))
        .collect::<ctrule::Result<Vec<_>>>()?;

    let phi = builtin_phi(KernelKind::OffDiag);
    let vals = integral_triple(&phi, alpha, [&tables[0], &tables[1], &tables[2]], &QuadratureConfig::new(h))?;
    println!("phi = (1+x1)(1+x2) bump, alpha = {alpha}, p = {p}, h = 2^-{m}");
    for ((name, v), k) in ["I11", "I22", "I12"].iter().zip(vals).zip(kernels) {
        let r = reference_integral(&phi, k, alpha, 16)?.value.to_f64();
        println!("  {name} = {v:+.15e}   error {:.2e}", (v - r).abs());
    }
    Ok(())
}
