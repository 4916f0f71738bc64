//! Polar reference integrals. The regularizer moments have closed forms in
//! terms of the Gamma function, which makes them a direct check.
//!
//! ```text
//! cargo run --release --example reference_integral -- 0.5 30
//! ```

use ctrule::kernels::{moment_integral, Axis, Integrand, KernelKind};
use ctrule::refint::{reference_integral_with, RefConfig};
use ctrule::stencil::MultiIndex;
use ctrule::xprec::{Precision, XReal};

fn main() -> ctrule::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha = args.first().map(String::as_str).unwrap_or("0.5");
    let digits: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let prec = Precision::new(digits + 15);
    let a = XReal::parse(alpha, prec)?;
    let cfg = RefConfig::new(digits);

    for (kernel, xi) in [
        (KernelKind::OnDiag(Axis::X1), MultiIndex::new(0, 0)),
        (KernelKind::OnDiag(Axis::X1), MultiIndex::new(2, 1)),
        (KernelKind::OnDiag(Axis::X2), MultiIndex::new(1, 0)),
        (KernelKind::OffDiag, MultiIndex::new(1, 1)),
        (KernelKind::OffDiag, MultiIndex::new(3, 2)),
    ] {
        let k = kernel.default_regularizer();
        // The off-diagonal kernel already carries x1 x2.
        let (e1, e2) = if kernel.is_off_diag() { (2 * xi.a - 1, 2 * xi.b - 1) } else { (2 * xi.a, 2 * xi.b) };
        let phi = Integrand::regularizer(k, digits + 15)?.times_monomial(e1, e2);
        let r = reference_integral_with(&phi, kernel, &a, &cfg)?;
        let exact = moment_integral(kernel, xi, &a, k)?;
        println!(
            "{kernel:<10} xi={xi}  {}  agrees to {:.1} digits ({} panels)",
            r.value.to_sci_string(20),
            r.value.agreeing_digits(&exact),
            r.subdivisions
        );
    }
    Ok(())
}
