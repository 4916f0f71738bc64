//! The multiprecision toolkit on its own: Gamma, pairwise sums that barely depend on term order and
//! a pivoted LU solve of an ill-conditioned Hilbert system.
//!
//! ```text
//! cargo run --release --example extended_precision -- 60
//! ```

use ctrule::xprec::{deterministic_sum, gamma, lu_solve, Precision, XMatrix, XReal};

fn main() -> ctrule::Result<()> {
    let digits: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(60);
    let prec = Precision::new(digits);

    let half = XReal::parse("0.5", prec)?;
    let sqrt_pi = XReal::pi(prec).sqrt();
    println!("Gamma(1/2)  = {}", gamma(&half)?.to_sci_string(40));
    println!("sqrt(pi)    = {}", sqrt_pi.to_sci_string(40));
    println!("Gamma(-1.5) = {}", gamma(&XReal::parse("-1.5", prec)?)?.to_sci_string(40));

    let terms: Vec<XReal> = (1..=10_000).map(|n| XReal::one(prec) / XReal::from_i64(n * n, prec)).collect();
    let mut rev = terms.clone();
    rev.reverse();
    let (fwd, bwd) = (deterministic_sum(&terms, prec), deterministic_sum(&rev, prec));
    println!("sum 1/n^2, n <= 1e4: {}, reversed order agrees to {:.1} digits", fwd.to_sci_string(30), fwd.agreeing_digits(&bwd));

    let n = 12;
    let rows: Vec<Vec<XReal>> = (0..n)
        .map(|i| (0..n).map(|j| XReal::one(prec) / XReal::from_i64((i + j + 1) as i64, prec)).collect())
        .collect();
    let hilbert = XMatrix::from_rows(rows)?;
    let ones = vec![XReal::one(prec); n];
    let b = hilbert.mul_vec(&ones)?;
    let x = lu_solve(&hilbert, &b)?;
    let err = x.iter().map(|v| (v - 1.0).abs().to_f64()).fold(0.0, f64::max);
    println!("Hilbert {n}x{n} solve, max error {err:.2e}");
    Ok(())
}
