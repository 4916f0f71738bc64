//! Applying the punctured and corrected trapezoidal rules.
//!
//! `Q_h^p[φ] = T_h⁰[φ·s] + h^(2-α) Σ_γ ω_γ Σ_{β∈G_γ} sign(β) φ(βh)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{check_alpha, check_alpha_x, kernel_eval_x, kernel_value, Axis, Integrand, KernelKind};
use crate::stencil::Stencil;
use crate::weightgen::{weights_at_h, WeightTable};
use crate::xprec::{deterministic_sum, CompensatedSum, Precision, XReal};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Double,
    Extended(Precision),
}

#[derive(Clone, Debug)]
pub struct QuadratureConfig {
    pub h: f64,
    /// Half-width of the summed lattice box; `None` uses the integrand's
    /// support radius.
    pub truncation_radius: Option<f64>,
    pub arithmetic: Arithmetic,
    /// Sum rows on the calling thread only.
    pub serial: bool,
}

impl QuadratureConfig {
    pub fn new(h: f64) -> Self {
        QuadratureConfig { h, truncation_radius: None, arithmetic: Arithmetic::Double, serial: false }
    }

    pub fn extended(mut self, prec: Precision) -> Self {
        self.arithmetic = Arithmetic::Extended(prec);
        self
    }

    fn radius(&self, phi: &Integrand) -> Result<f64> {
        let r = self.truncation_radius.unwrap_or(phi.support_radius());
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidMesh(self.h.to_string()));
        }
        if self.h > r {
            return Err(Error::Invalid(format!("h = {} exceeds the truncation radius {r}", self.h)));
        }
        if r < phi.support_radius() {
            return Err(Error::TruncatedSupport { radius: r, support: phi.support_radius() });
        }
        Ok(r)
    }
}

/// Result of a rule application in either arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub enum QuadValue {
    Double(f64),
    Extended(XReal),
}

impl QuadValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            QuadValue::Double(v) => *v,
            QuadValue::Extended(x) => x.to_f64(),
        }
    }
}

fn box_half_width(radius: f64, h: f64) -> i64 {
    // tolerate radius/h landing a hair below an integer
    ((radius / h) * (1.0 + 4.0 * f64::EPSILON)).floor() as i64
}

/// `T_h⁰[φ·s]` in double precision, rows in order with compensated sums.
fn lattice_sum_f64(phi: &Integrand, kernel: KernelKind, alpha: f64, h: f64, radius: f64, serial: bool) -> f64 {
    let m = box_half_width(radius, h);
    let row = |i: i64| {
        let x1 = i as f64 * h;
        let mut acc = CompensatedSum::new();
        for j in -m..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let x2 = j as f64 * h;
            let f = phi.eval(x1, x2);
            if f != 0.0 {
                acc.add(f * kernel_value(kernel, alpha, x1, x2));
            }
        }
        acc
    };
    let rows: Vec<CompensatedSum> = if serial {
        (-m..=m).map(row).collect()
    } else {
        (-m..=m).into_par_iter().map(row).collect()
    };
    let mut total = CompensatedSum::new();
    for r in rows {
        total.add(r.value());
    }
    total.value() * h * h
}

fn lattice_sum_x(phi: &Integrand, kernel: KernelKind, alpha: &XReal, h: &XReal, radius: f64, serial: bool) -> Result<XReal> {
    let prec = alpha.precision();
    let m = box_half_width(radius, h.to_f64());
    let row = |i: i64| -> Result<XReal> {
        let x1 = h * XReal::from_i64(i, prec);
        let mut terms = Vec::with_capacity(2 * m as usize + 1);
        for j in -m..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let x2 = h * XReal::from_i64(j, prec);
            let f = phi.eval_x(&x1, &x2)?;
            if !f.is_zero() {
                terms.push(f * kernel_eval_x(kernel, alpha, &x1, &x2)?);
            }
        }
        Ok(deterministic_sum(&terms, prec))
    };
    let rows: Vec<Result<XReal>> = if serial {
        (-m..=m).map(row).collect()
    } else {
        (-m..=m).into_par_iter().map(row).collect()
    };
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(deterministic_sum(&rows, prec) * h * h)
}

/// `h^(2-α) Σ_γ ω_γ Σ_{β∈G_γ} sign(β) φ(βh)`.
fn correction_f64(phi: &Integrand, stencil: &Stencil, alpha: f64, weights: &[f64], h: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (group, w) in stencil.groups.iter().zip(weights) {
        let mut g = CompensatedSum::new();
        for sp in group {
            g.add(sp.sign as f64 * phi.eval(sp.point[0] as f64 * h, sp.point[1] as f64 * h));
        }
        acc.add(w * g.value());
    }
    acc.value() * h.powf(2.0 - alpha)
}

fn correction_x(phi: &Integrand, stencil: &Stencil, alpha: &XReal, weights: &[XReal], h: &XReal) -> Result<XReal> {
    let prec = alpha.precision();
    let mut acc = XReal::zero(prec);
    for (group, w) in stencil.groups.iter().zip(weights) {
        let mut g = XReal::zero(prec);
        for sp in group {
            let x1 = h * XReal::from_i64(sp.point[0], prec);
            let x2 = h * XReal::from_i64(sp.point[1], prec);
            let v = phi.eval_x(&x1, &x2)?;
            g += if sp.sign < 0 { -v } else { v };
        }
        acc += w * g;
    }
    let expo = XReal::from_i64(2, prec) - alpha;
    Ok(acc * h.powf(&expo))
}

fn check_table(table: &WeightTable, kernel: KernelKind, alpha: f64) -> Result<()> {
    if table.kernel != kernel {
        return Err(Error::TableMismatch(format!("table is for {}, rule applied with {kernel}", table.kernel)));
    }
    let ta = table.alpha_f64()?;
    if (ta - alpha).abs() > 1e-12 * alpha.abs().max(1.0) {
        return Err(Error::TableMismatch(format!("table has alpha = {}, rule applied with {alpha}", table.alpha)));
    }
    Ok(())
}

/// The plain punctured rule `T_h⁰[φ·s]`.
///
/// For the off-diagonal kernel this is already the rule of order `p = 1`.
pub fn punctured_rule(phi: &Integrand, kernel: KernelKind, alpha: f64, cfg: &QuadratureConfig) -> Result<QuadValue> {
    check_alpha(alpha)?;
    let radius = cfg.radius(phi)?;
    match cfg.arithmetic {
        Arithmetic::Double => Ok(QuadValue::Double(lattice_sum_f64(phi, kernel, alpha, cfg.h, radius, cfg.serial))),
        Arithmetic::Extended(prec) => {
            let ax = XReal::from_f64(alpha, prec);
            let hx = XReal::from_f64(cfg.h, prec);
            Ok(QuadValue::Extended(lattice_sum_x(phi, kernel, &ax, &hx, radius, cfg.serial)?))
        }
    }
}

/// `Q_h^p[φ]` with the limiting weights of `table`.
pub fn corrected_quadrature(
    phi: &Integrand,
    kernel: KernelKind,
    alpha: f64,
    table: &WeightTable,
    cfg: &QuadratureConfig,
) -> Result<QuadValue> {
    check_alpha(alpha)?;
    check_table(table, kernel, alpha)?;
    let stencil = Stencil::new(kernel, table.p)?;
    let radius = cfg.radius(phi)?;
    match cfg.arithmetic {
        Arithmetic::Double => {
            let weights = table.values_f64()?;
            let t = lattice_sum_f64(phi, kernel, alpha, cfg.h, radius, cfg.serial);
            Ok(QuadValue::Double(t + correction_f64(phi, &stencil, alpha, &weights, cfg.h)))
        }
        Arithmetic::Extended(prec) => {
            let weights = table.values_x(prec)?;
            let ax = table.alpha_x(prec)?;
            let hx = XReal::from_f64(cfg.h, prec);
            let t = lattice_sum_x(phi, kernel, &ax, &hx, radius, cfg.serial)?;
            Ok(QuadValue::Extended(t + correction_x(phi, &stencil, &ax, &weights, &hx)?))
        }
    }
}

/// `Q_h^p[φ]` in extended precision with caller-supplied weights, e.g.
/// the finite-`h` weights `ω(h)`.
pub fn corrected_quadrature_x(
    phi: &Integrand,
    kernel: KernelKind,
    alpha: &XReal,
    p: u32,
    weights: &[XReal],
    h: &XReal,
    radius: f64,
) -> Result<XReal> {
    check_alpha_x(alpha)?;
    let stencil = Stencil::new(kernel, p)?;
    if weights.len() != stencil.len() {
        return Err(Error::Dimension(format!("{} weights for a stencil of {}", weights.len(), stencil.len())));
    }
    if radius < phi.support_radius() {
        return Err(Error::TruncatedSupport { radius, support: phi.support_radius() });
    }
    let t = lattice_sum_x(phi, kernel, alpha, h, radius, false)?;
    Ok(t + correction_x(phi, &stencil, alpha, weights, h)?)
}

/// `Q_h^p[φ]` with the finite-`h` weights `ω(h)` of the regularizer
/// `exp(-|x|^k)` in place of the limiting table.
pub fn corrected_quadrature_hweights(
    phi: &Integrand,
    kernel: KernelKind,
    alpha: &XReal,
    p: u32,
    h: &XReal,
    k: u32,
) -> Result<XReal> {
    let weights = weights_at_h(kernel, p, alpha, h, k)?;
    corrected_quadrature_x(phi, kernel, alpha, p, &weights, h, phi.support_radius())
}

/// `(I11, I22, I12)` from the three rules at a common `α`.
///
/// `tables` are ordered as `on_diag_x1`, `on_diag_x2`, `off_diag`.
pub fn integral_triple(
    phi: &Integrand,
    alpha: f64,
    tables: [&WeightTable; 3],
    cfg: &QuadratureConfig,
) -> Result<[f64; 3]> {
    let kernels = [KernelKind::OnDiag(Axis::X1), KernelKind::OnDiag(Axis::X2), KernelKind::OffDiag];
    let mut out = [0.0; 3];
    for ((slot, kernel), table) in out.iter_mut().zip(kernels).zip(tables) {
        *slot = corrected_quadrature(phi, kernel, alpha, table, cfg)?.to_f64();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::builtin_phi;
    use crate::weightgen::{solve_weights, WeightConfig};

    fn table(kernel: KernelKind, p: u32, alpha: f64) -> WeightTable {
        let cfg = WeightConfig { precision: Precision::new(30), verify: false, ..Default::default() };
        solve_weights(kernel, p, &XReal::from_f64(alpha, cfg.precision), &cfg).unwrap()
    }

    #[test]
    fn zero_integrand() {
        let t = table(KernelKind::OffDiag, 2, 0.5);
        let v = corrected_quadrature(&Integrand::zero(), KernelKind::OffDiag, 0.5, &t, &QuadratureConfig::new(0.125)).unwrap();
        assert_eq!(v.to_f64(), 0.0);
    }

    #[test]
    fn mismatches_rejected() {
        let t = table(KernelKind::OffDiag, 2, 0.5);
        let phi = builtin_phi(KernelKind::OffDiag);
        let cfg = QuadratureConfig::new(0.125);
        assert!(matches!(
            corrected_quadrature(&phi, KernelKind::OffDiag, 1.5, &t, &cfg),
            Err(Error::TableMismatch(_))
        ));
        assert!(matches!(
            corrected_quadrature(&phi, KernelKind::OnDiag(Axis::X1), 0.5, &t, &cfg),
            Err(Error::TableMismatch(_))
        ));
        let tiny = QuadratureConfig { truncation_radius: Some(0.5), ..cfg };
        assert!(corrected_quadrature(&phi, KernelKind::OffDiag, 0.5, &t, &tiny).is_err());
    }

    #[test]
    fn double_and_extended_agree() {
        let kernel = KernelKind::OnDiag(Axis::X1);
        let t = table(kernel, 1, 0.5);
        let phi = builtin_phi(kernel);
        let cfg = QuadratureConfig::new(1.0 / 16.0);
        let d = corrected_quadrature(&phi, kernel, 0.5, &t, &cfg).unwrap().to_f64();
        let x = corrected_quadrature(&phi, kernel, 0.5, &t, &cfg.clone().extended(Precision::new(30))).unwrap();
        assert!(((d - x.to_f64()) / d).abs() < 1e-14);
    }

    #[test]
    fn serial_matches_parallel_bitwise() {
        let kernel = KernelKind::OffDiag;
        let t = table(kernel, 3, 1.5);
        let phi = builtin_phi(kernel);
        let mut cfg = QuadratureConfig::new(1.0 / 64.0);
        let a = corrected_quadrature(&phi, kernel, 1.5, &t, &cfg).unwrap();
        cfg.serial = true;
        let b = corrected_quadrature(&phi, kernel, 1.5, &t, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
