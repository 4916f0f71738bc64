//! Property tests for the stencil, kernels, symmetry and table handling.

use ctrule::kernels::{kernel_eval, Axis, KernelKind};
use ctrule::stencil::{index_set, stencil_size, symmetry_group, MultiIndex};
use ctrule::xprec::{Precision, XReal};
use proptest::prelude::*;

fn kernel_strategy() -> impl Strategy<Value = KernelKind> {
    prop_oneof![
        Just(KernelKind::OnDiag(Axis::X1)),
        Just(KernelKind::OnDiag(Axis::X2)),
        Just(KernelKind::OffDiag),
    ]
}

proptest! {
    #[test]
    fn index_sets_are_sorted_and_sized(kernel in kernel_strategy(), p in 0u32..9) {
        prop_assume!(!kernel.is_off_diag() || p >= 2);
        let idx = index_set(kernel, p).unwrap();
        prop_assert_eq!(idx.len(), stencil_size(kernel, p).unwrap());
        let mut seen = std::collections::HashSet::new();
        for xi in &idx {
            prop_assert!(seen.insert(*xi));
        }
        if kernel.is_off_diag() {
            for w in idx.windows(2) {
                prop_assert!(w[0].norm1() <= w[1].norm1());
                if w[0].norm1() == w[1].norm1() {
                    prop_assert!(w[0].a > w[1].a);
                }
            }
        }
    }

    #[test]
    fn symmetry_groups_respect_kernel_signs(kernel in kernel_strategy(), a in 0u32..6, b in 0u32..6, alpha in 0.05f64..1.95) {
        let gamma = MultiIndex::new(a, b);
        prop_assume!(gamma.norm1() > 0);
        prop_assume!(!kernel.is_off_diag() || (a > 0 && b > 0));
        let group = symmetry_group(kernel, gamma).unwrap();
        let x0 = [a as f64 * 0.1, b as f64 * 0.1];
        let s0 = kernel_eval(kernel, alpha, x0).unwrap();
        for sp in &group {
            let x = [sp.point[0] as f64 * 0.1, sp.point[1] as f64 * 0.1];
            let s = kernel_eval(kernel, alpha, x).unwrap();
            prop_assert!((s - sp.sign as f64 * s0).abs() <= 1e-12 * s0.abs().max(1e-300));
        }
        let mut pts: Vec<[i64; 2]> = group.iter().map(|s| s.point).collect();
        pts.sort_unstable();
        pts.dedup();
        prop_assert_eq!(pts.len(), group.len());
    }

    #[test]
    fn kernels_swap_under_transpose(x1 in -3.0f64..3.0, x2 in -3.0f64..3.0, alpha in 0.05f64..1.95) {
        prop_assume!(x1 != 0.0 || x2 != 0.0);
        let a = kernel_eval(KernelKind::OnDiag(Axis::X1), alpha, [x1, x2]).unwrap();
        let b = kernel_eval(KernelKind::OnDiag(Axis::X2), alpha, [x2, x1]).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
        let o = kernel_eval(KernelKind::OffDiag, alpha, [x1, x2]).unwrap();
        let o2 = kernel_eval(KernelKind::OffDiag, alpha, [x2, x1]).unwrap();
        prop_assert_eq!(o, o2);
        prop_assert!(o.abs() <= 0.5 * (a + kernel_eval(KernelKind::OnDiag(Axis::X2), alpha, [x1, x2]).unwrap()) + 1e-12);
    }

    #[test]
    fn decimal_strings_round_trip(v in -1e12f64..1e12) {
        let prec = Precision::new(40);
        let x = XReal::from_f64(v, prec);
        let back = XReal::parse(&x.to_sci_string(40), prec).unwrap();
        prop_assert!(x.agreeing_digits(&back) >= 38.0);
    }

    #[test]
    fn kernel_names_parse_back(kernel in kernel_strategy()) {
        prop_assert_eq!(kernel.name().parse::<KernelKind>().unwrap(), kernel);
        prop_assert_eq!(kernel.to_string().parse::<KernelKind>().unwrap(), kernel);
    }
}

#[test]
fn invalid_inputs() {
    assert!(kernel_eval(KernelKind::OffDiag, 0.5, [0.0, 0.0]).is_err());
    assert!(kernel_eval(KernelKind::OffDiag, 2.0, [1.0, 0.0]).is_err());
    assert!(kernel_eval(KernelKind::OffDiag, 0.0, [1.0, 0.0]).is_err());
    assert!(index_set(KernelKind::OffDiag, 1).is_err());
    assert!(symmetry_group(KernelKind::OffDiag, MultiIndex::new(2, 0)).is_err());
    assert!("diagonal".parse::<KernelKind>().is_err());
}
