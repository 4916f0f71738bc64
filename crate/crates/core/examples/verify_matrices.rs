//! Certifies the coefficient matrices in exact integer arithmetic: nonzero
//! determinants, the block structure of the on-diagonal matrix, the
//! off-diagonal factorization and the determinant/product ratio at random
//! integer points.
//!
//! ```text
//! cargo run --release --example verify_matrices -- 8 10
//! ```

use ctrule::coeffmat::{block_structure, build_k, certify_nonsingular, det_factorization_check, off_diag_factorization};
use ctrule::kernels::{Axis, KernelKind};

fn main() -> ctrule::Result<()> {
    let args: Vec<u32> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let on_max = args.first().copied().unwrap_or(6);
    let off_max = args.get(1).copied().unwrap_or(8);
    let on = KernelKind::OnDiag(Axis::X1);

    println!("on-diagonal, p = 0..={on_max}");
    for (p, det) in certify_nonsingular(on, on_max)? {
        let digits = det.to_string().trim_start_matches('-').len();
        let mut line = format!("  p={p:<2} det K has {digits} digits");
        if p >= 1 {
            line += &format!(", block structure ok: {}", block_structure(&build_k(on, p)?)?.all_ok());
        }
        if p >= 2 {
            let r = det_factorization_check(on, p, 5, 7)?;
            line += &format!(", det E / product = {} (constant: {})", r.ratio, r.constant_ratio);
        }
        println!("{line}");
    }

    println!("off-diagonal, p = 2..={off_max}");
    for (p, det) in certify_nonsingular(KernelKind::OffDiag, off_max)? {
        let f = off_diag_factorization(&build_k(KernelKind::OffDiag, p)?)?;
        let r = det_factorization_check(KernelKind::OffDiag, p, 5, 7)?;
        println!(
            "  p={p:<2} det K = {det}, K = E H: {}, det T / product = {} (constant: {})",
            f.k_equals_eh, r.ratio, r.constant_ratio
        );
    }
    Ok(())
}
