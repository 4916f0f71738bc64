//! Empirical convergence orders of the corrected rules.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kernels::{Integrand, KernelKind};
use crate::quadrature::{corrected_quadrature, punctured_rule, Arithmetic, QuadratureConfig};
use crate::refint::reference_integral;
use crate::weightgen::{solve_weights, WeightConfig, WeightTable};
use crate::xprec::XReal;

pub const CONVERGENCE_SCHEMA: &str = "ctrule.convergence/1";

/// Log-log least-squares fit of error against `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Smallest and largest `h` used.
    pub h_range: (f64, f64),
    pub points_used: usize,
    pub dropped_coarsest: bool,
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Residual spread below which a fit counts as exact, in natural-log units.
const MIN_SIGMA: f64 = 0.01;

/// Fits `log(error) = slope·log(h) + c` over rows with `error > floor`.
///
/// The coarsest row is dropped when it sits more than `3σ` off the fit of
/// the remaining rows, `σ` being their residual standard deviation, as long
/// as at least three rows remain.
pub fn fit_slope(rows: &[(f64, f64)], floor: f64) -> Option<SlopeFit> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(h, e)| *e > floor && e.is_finite() && *h > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    if pts.len() < 2 {
        return None;
    }
    let mut dropped = false;
    if pts.len() >= 4 {
        let rest = &pts[1..];
        let (s, c) = least_squares(rest);
        let dof = (rest.len() as f64 - 2.0).max(1.0);
        let sigma = (rest.iter().map(|p| (p.1 - s * p.0 - c).powi(2)).sum::<f64>() / dof).sqrt().max(MIN_SIGMA);
        let coarse = pts[0];
        if (coarse.1 - s * coarse.0 - c).abs() > 3.0 * sigma {
            pts.remove(0);
            dropped = true;
        }
    }
    let (slope, intercept) = least_squares(&pts);
    Some(SlopeFit {
        slope,
        intercept,
        h_range: (pts.last().unwrap().0.exp(), pts[0].0.exp()),
        points_used: pts.len(),
        dropped_coarsest: dropped,
    })
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub kernel: KernelKind,
    pub alpha: f64,
    pub p: u32,
    /// `(h, |Q_h^p - I_ref|)`, descending `h`.
    pub rows: Vec<(f64, f64)>,
    pub reference: XReal,
    pub fit: Option<SlopeFit>,
    pub floor_threshold: f64,
}

impl ConvergenceReport {
    pub fn fitted_slope(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.slope)
    }

    /// Expected order `2p + 4 - α` (on-diagonal) or `2p + 2 - α`.
    pub fn expected_order(&self) -> f64 {
        expected_order(self.kernel, self.p, self.alpha)
    }
}

pub fn expected_order(kernel: KernelKind, p: u32, alpha: f64) -> f64 {
    let base = if kernel.is_off_diag() { 2.0 } else { 4.0 };
    2.0 * p as f64 + base - alpha
}

#[derive(Clone, Debug)]
pub struct ConvergenceConfig {
    /// Mesh sizes `2^-m`.
    pub h_exps: Vec<u32>,
    pub floor_threshold: f64,
    pub arithmetic: Arithmetic,
    /// Digits requested from the reference integral.
    pub reference_digits: u32,
    pub weights: WeightConfig,
    pub serial: bool,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            h_exps: (3..=9).collect(),
            floor_threshold: 1e-12,
            arithmetic: Arithmetic::Double,
            reference_digits: 16,
            weights: WeightConfig::default(),
            serial: false,
        }
    }
}

/// Errors of `Q_h^p[φ]` against the polar reference over the configured
/// meshes. The off-diagonal rule at `p = 1` is the plain punctured rule.
pub fn convergence_study(
    phi: &Integrand,
    kernel: KernelKind,
    alpha: f64,
    p: u32,
    table: Option<&WeightTable>,
    cfg: &ConvergenceConfig,
) -> Result<ConvergenceReport> {
    let owned;
    let table = match table {
        Some(t) => Some(t),
        None if kernel.is_off_diag() && p < 2 => None,
        None => {
            let prec = cfg.weights.precision;
            owned = solve_weights(kernel, p, &XReal::parse(&alpha.to_string(), prec)?, &cfg.weights)?;
            Some(&owned)
        }
    };
    if let Some(t) = table {
        if t.p != p {
            return Err(Error::TableMismatch(format!("table has p = {}, study asks for p = {p}", t.p)));
        }
    } else if p != 1 {
        return Err(Error::InvalidOrder {
            kernel: kernel.to_string(),
            p,
            reason: "only the off-diagonal rule runs without weights, at p = 1",
        });
    }
    let reference = reference_integral(phi, kernel, alpha, cfg.reference_digits)?.value;
    let mut exps = cfg.h_exps.clone();
    exps.sort_unstable();
    exps.dedup();
    let mut rows = Vec::with_capacity(exps.len());
    for m in exps {
        let h = (0.5f64).powi(m as i32);
        let qcfg = QuadratureConfig { h, truncation_radius: None, arithmetic: cfg.arithmetic, serial: cfg.serial };
        let q = match table {
            Some(t) => corrected_quadrature(phi, kernel, alpha, t, &qcfg)?,
            None => punctured_rule(phi, kernel, alpha, &qcfg)?,
        };
        let err = match q {
            crate::quadrature::QuadValue::Double(v) => (v - reference.to_f64()).abs(),
            crate::quadrature::QuadValue::Extended(x) => (x - &reference).abs().to_f64(),
        };
        rows.push((h, err));
    }
    let fit = fit_slope(&rows, cfg.floor_threshold);
    Ok(ConvergenceReport { kernel, alpha, p, rows, reference, fit, floor_threshold: cfg.floor_threshold })
}

/// CSV with a schema comment line and the header `p,h,error,slope_fitted`.
pub fn reports_to_csv(reports: &[ConvergenceReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema={CONVERGENCE_SCHEMA}");
    out.push_str("p,h,error,slope_fitted\n");
    for r in reports {
        let slope = r.fitted_slope().map(|s| format!("{s:.6}")).unwrap_or_else(|| "nan".into());
        for (h, e) in &r.rows {
            let _ = writeln!(out, "{},{:e},{:e},{}", r.p, h, e, slope);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let rows: Vec<(f64, f64)> = (3..10).map(|m| {
            let h = 0.5f64.powi(m);
            (h, 3.0 * h.powf(5.5))
        }).collect();
        let fit = fit_slope(&rows, 1e-30).unwrap();
        assert!((fit.slope - 5.5).abs() < 1e-10);
        assert!(!fit.dropped_coarsest);
        assert_eq!(fit.points_used, 7);
    }

    #[test]
    fn floor_and_outlier_handling() {
        let mut rows: Vec<(f64, f64)> = (3..10).map(|m| {
            let h = 0.5f64.powi(m);
            (h, h.powf(4.0) * (1.0 + 0.001 * (m as f64).sin()))
        }).collect();
        rows[0].1 *= 50.0;
        rows.push((0.5f64.powi(10), 1e-13));
        let fit = fit_slope(&rows, 1e-12).unwrap();
        assert!(fit.dropped_coarsest);
        assert!((fit.slope - 4.0).abs() < 0.01);
        assert!(fit.h_range.0 > 0.5f64.powi(10));
        assert!(fit_slope(&[(0.1, 1e-20)], 1e-12).is_none());
    }

    #[test]
    fn orders() {
        use crate::kernels::Axis;
        assert_eq!(expected_order(KernelKind::OnDiag(Axis::X1), 0, 0.5), 3.5);
        assert_eq!(expected_order(KernelKind::OffDiag, 3, 1.5), 6.5);
    }
}
