//! Applying a weight table to a user-supplied integrand. Anything smooth
//! with compact support works; here a shifted Gaussian-type bump.
//!
//! ```text
//! cargo run --release --example custom_integrand -- 0.5 2
//! ```

use ctrule::kernels::{Axis, Integrand, KernelKind};
use ctrule::quadrature::{corrected_quadrature, punctured_rule, QuadratureConfig};
use ctrule::refint::reference_integral;
use ctrule::weightgen::{solve_weights, WeightConfig};
use ctrule::xprec::XReal;

fn bump(x1: f64, x2: f64) -> f64 {
    let r2 = (x1 - 0.2) * (x1 - 0.2) + (x2 + 0.1) * (x2 + 0.1);
    if r2 >= 1.0 {
        0.0
    } else {
        (x1 * x1 + 1.0).ln() * (-1.0 / (1.0 - r2)).exp()
    }
}

fn bump_x(x1: &XReal, x2: &XReal) -> XReal {
    let (s1, s2) = (x1 - 0.2, x2 + 0.1);
    let r2 = &s1 * &s1 + &s2 * &s2;
    let one = XReal::one(x1.precision());
    if r2 >= one {
        XReal::zero(x1.precision())
    } else {
        (x1 * x1 + 1.0).ln() * (-(one.clone() / (one - r2))).exp()
    }
}

fn main() -> ctrule::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let p: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let kernel = KernelKind::OnDiag(Axis::X1);

    // The support reaches |x| < 1 + |(0.2, -0.1)|.
    let phi = Integrand::new("shifted-bump", 1.25, "C-infinity", bump).with_extended(bump_x);
    let cfg = WeightConfig::default();
    let table = solve_weights(kernel, p, &XReal::from_f64(alpha, cfg.precision), &cfg)?;
    let exact = reference_integral(&phi, kernel, alpha, 15)?.value.to_f64();
    println!("reference {exact:.15e}");
    println!("{:>8} {:>12} {:>12}", "h", "punctured", "corrected");
    for m in 3..=8 {
        let q = QuadratureConfig::new(0.5f64.powi(m));
        let plain = punctured_rule(&phi, kernel, alpha, &q)?.to_f64();
        let corr = corrected_quadrature(&phi, kernel, alpha, &table, &q)?.to_f64();
        println!("{:>8} {:>12.3e} {:>12.3e}", format!("2^-{m}"), (plain - exact).abs(), (corr - exact).abs());
    }
    Ok(())
}
