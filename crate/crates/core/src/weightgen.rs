//! Generation of the limiting correction weights.
//!
//! The moment residual `c(h)` compares the exact moments of `g·s·x^(2ξ)`
//! with their punctured trapezoidal sums, Richardson extrapolation removes
//! its `h`-dependence and the weights solve `K ω̄ = lim c(h)`.
//!
//! For `g = exp(-|x|^k)` the residual expands as `c(h) = c̄ + Σ_j C_j h^(jk)`,
//! so the default elimination orders are `k` and `2k`.

use std::path::Path;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::coeffmat::build_k;
use crate::error::{Error, Result};
use crate::kernels::{check_alpha_x, check_regularizer, moment_integral, regularizer_g_x, truncation_radius, Axis, Integrand, KernelKind};
use crate::stencil::{index_set, MultiIndex};
use crate::xprec::{deterministic_sum, lu_solve, Precision, XReal};

pub const WEIGHTS_SCHEMA: &str = "ctrule.weights/1";

/// The scaled residuals `c(h)` of one stencil at one mesh size.
#[derive(Clone, Debug)]
pub struct MomentResidual {
    pub kernel: KernelKind,
    pub alpha: XReal,
    pub p: u32,
    pub h: XReal,
    pub values: Vec<XReal>,
}

/// Returns `m` for `h = 2^-m`.
pub fn mesh_exponent(h: &XReal) -> Result<u32> {
    let f = h.as_float();
    if f.is_sign_positive() && f.is_finite() && !f.is_zero() {
        if let Some(e) = f.get_exp() {
            let m = 1 - e;
            if m >= 0 && *f == Float::with_val(f.prec(), Float::i_exp(1, e - 1)) {
                return Ok(m as u32);
            }
        }
    }
    Err(Error::InvalidMesh(h.to_sci_string(10)))
}

/// `h² Σ_{β≠0, |βh|∞ ≤ radius} f(βh)` in extended precision.
///
/// Rows of the lattice are summed in parallel and combined in a fixed
/// order, so the result does not depend on scheduling.
pub fn punctured_trapz(f: &Integrand, h: &XReal, radius: &XReal) -> Result<XReal> {
    if h.is_sign_negative() || h.is_zero() {
        return Err(Error::InvalidMesh(h.to_sci_string(10)));
    }
    if radius.to_f64() < f.support_radius() {
        return Err(Error::TruncatedSupport { radius: radius.to_f64(), support: f.support_radius() });
    }
    let prec = h.precision();
    let m = (radius / h).to_f64().floor() as i64;
    let rows: Vec<Result<XReal>> = (-m..=m)
        .into_par_iter()
        .map(|i| {
            let x1 = h * XReal::from_i64(i, prec);
            let mut terms = Vec::with_capacity(2 * m as usize + 1);
            for j in -m..=m {
                if i == 0 && j == 0 {
                    continue;
                }
                let x2 = h * XReal::from_i64(j, prec);
                terms.push(f.eval_x(&x1, &x2)?);
            }
            Ok(deterministic_sum(&terms, prec))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(deterministic_sum(&rows, prec) * h * h)
}

/// Monomial exponents `(e1, e2)` of the lattice sums and the power of `h`
/// that scales each residual.
fn residual_layout(kernel: KernelKind, xi: MultiIndex, alpha: &XReal) -> ([u32; 2], XReal) {
    let norm = 2.0 * xi.norm1() as f64;
    let prec = alpha.precision();
    match kernel {
        KernelKind::OnDiag(Axis::X1) => ([2 + 2 * xi.a, 2 * xi.b], XReal::from_f64(norm + 2.0, prec) - alpha),
        KernelKind::OnDiag(Axis::X2) => ([2 * xi.a, 2 + 2 * xi.b], XReal::from_f64(norm + 2.0, prec) - alpha),
        KernelKind::OffDiag => ([2 * xi.a, 2 * xi.b], XReal::from_f64(norm, prec) - alpha),
    }
}

/// `S_i = Σ_{β≠0} g(βh) β1^e1 β2^e2 |β|^-(2+α)` for every exponent pair.
///
/// The lattice is folded onto the octant `β1 ≥ β2 ≥ 0`; exponents are even
/// so every sign flip contributes the same term.
fn lattice_moments(h: &XReal, alpha: &XReal, k: u32, exps: &[[u32; 2]], prec: Precision) -> Vec<XReal> {
    let bits = prec.bits();
    let radius = truncation_radius(k, prec.digits());
    let hf = h.to_f64();
    let n_max = ((radius / hf) * (radius / hf)).floor() as u64;
    let m = (n_max as f64).sqrt().floor() as u64;
    let emax = exps.iter().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
    let h2 = Float::with_val(bits, h.as_float().square_ref());
    let decay = Float::with_val(bits, -(Float::with_val(bits, alpha.as_float()) / 2u32 + 1u32));
    let powers = |b: u64| {
        let mut v = Vec::with_capacity(emax + 1);
        v.push(Float::with_val(bits, 1));
        for e in 1..=emax {
            let next = Float::with_val(bits, &v[e - 1] * b);
            v.push(next);
        }
        v
    };
    let rows: Vec<Vec<Float>> = (0..=m)
        .into_par_iter()
        .map(|b1| {
            let mut acc = vec![Float::new(bits); exps.len()];
            let p1 = powers(b1);
            for b2 in 0..=b1 {
                let n = b1 * b1 + b2 * b2;
                if n == 0 {
                    continue;
                }
                if n > n_max {
                    break;
                }
                let t = Float::with_val(bits, &h2 * n);
                let g = Float::with_val(bits, -t.pow(k / 2)).exp();
                let nf = Float::with_val(bits, n);
                let mut w = g * Float::with_val(bits, nf.pow(&decay));
                w *= (if b1 > 0 { 2u32 } else { 1 }) * (if b2 > 0 { 2u32 } else { 1 });
                let p2 = powers(b2);
                for (slot, e) in acc.iter_mut().zip(exps) {
                    let (e1, e2) = (e[0] as usize, e[1] as usize);
                    let mut mono = Float::with_val(bits, &p1[e1] * &p2[e2]);
                    if b1 != b2 {
                        mono += Float::with_val(bits, &p2[e1] * &p1[e2]);
                    }
                    *slot += Float::with_val(bits, &w * &mono);
                }
            }
            acc
        })
        .collect();
    (0..exps.len())
        .map(|i| {
            let mut s = Float::new(bits);
            for row in &rows {
                s += &row[i];
            }
            XReal::from_float(s)
        })
        .collect()
}

/// The residual vector `c(h)` for the regularizer `exp(-|x|^k)`.
///
/// Computes `c_i = (∫ g·s·x^(2ξ_i) - T_h⁰[g·s·x^(2ξ_i)]) / h^(scale_i)`
/// (with `x^(2ξ_i - (1,1))` off-diagonal) through the equivalent lattice
/// sums of the unscaled integrand.
pub fn c_vector(kernel: KernelKind, p: u32, alpha: &XReal, h: &XReal, k: u32) -> Result<MomentResidual> {
    check_alpha_x(alpha)?;
    check_regularizer(k)?;
    mesh_exponent(h)?;
    let prec = alpha.precision();
    let indices = index_set(kernel, p)?;
    let layout: Vec<([u32; 2], XReal)> = indices.iter().map(|&xi| residual_layout(kernel, xi, alpha)).collect();
    let exps: Vec<[u32; 2]> = layout.iter().map(|l| l.0).collect();
    let sums = lattice_moments(h, alpha, k, &exps, prec);
    let values = indices
        .iter()
        .zip(layout)
        .zip(sums)
        .map(|((&xi, (_, scale)), s)| {
            let m = moment_integral(kernel, xi, alpha, k)?;
            Ok(m / h.powf(&scale) - s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentResidual { kernel, alpha: alpha.clone(), p, h: h.clone(), values })
}

/// Successive Richardson tables for levels at `h, h/2, h/4, …`.
///
/// `stages[0]` is the input, `stages[j]` has eliminated the first `j`
/// orders and holds one entry fewer than `stages[j-1]`.
pub fn richardson_stages(levels: &[Vec<XReal>], orders: &[u32]) -> Result<Vec<Vec<Vec<XReal>>>> {
    if levels.len() < orders.len() + 1 {
        return Err(Error::Richardson(format!(
            "{} orders need at least {} levels, got {}",
            orders.len(),
            orders.len() + 1,
            levels.len()
        )));
    }
    let n = levels[0].len();
    if levels.iter().any(|l| l.len() != n) {
        return Err(Error::Richardson("levels have different lengths".into()));
    }
    let mut stages = vec![levels.to_vec()];
    for &q in orders {
        let prev = stages.last().expect("at least one stage");
        let prec = prev[0].first().map(XReal::precision).unwrap_or_default();
        let denom = XReal::pow2(q as i32, prec) - 1.0;
        let next = prev
            .windows(2)
            .map(|w| {
                w[1].iter()
                    .zip(&w[0])
                    .map(|(fine, coarse)| fine + (fine - coarse) / &denom)
                    .collect()
            })
            .collect();
        stages.push(next);
    }
    Ok(stages)
}

/// Eliminates the error terms `h^q`, `q ∈ orders`, and returns the
/// extrapolant at the finest level.
pub fn richardson(levels: &[Vec<XReal>], orders: &[u32]) -> Result<Vec<XReal>> {
    let stages = richardson_stages(levels, orders)?;
    Ok(stages.last().and_then(|s| s.last()).cloned().expect("non-empty stage"))
}

/// Knobs of the weight pipeline.
#[derive(Clone, Debug)]
pub struct WeightConfig {
    /// Coarsest mesh is `2^-h_base_exp`.
    pub h_base_exp: u32,
    /// Number of mesh levels fed to the extrapolation.
    pub levels: u32,
    /// Richardson orders; `None` means `[k, 2k]`.
    pub orders: Option<Vec<u32>>,
    /// Regularizer exponent; `None` means 6 on-diagonal and 8 off-diagonal.
    pub k: Option<u32>,
    pub precision: Precision,
    /// Repeat the extrapolation one level finer to estimate correct digits.
    pub verify: bool,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig { h_base_exp: 5, levels: 3, orders: None, k: None, precision: Precision::default(), verify: true }
    }
}

impl WeightConfig {
    pub fn regularizer(&self, kernel: KernelKind) -> u32 {
        self.k.unwrap_or_else(|| kernel.default_regularizer())
    }

    pub fn richardson_orders(&self, kernel: KernelKind) -> Vec<u32> {
        let k = self.regularizer(kernel);
        self.orders.clone().unwrap_or_else(|| {
            (1..self.levels).map(|j| j * k).collect()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub gamma: MultiIndex,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub h_base: String,
    pub levels: u32,
    pub richardson_stages: u32,
    pub richardson_orders: Vec<u32>,
    pub regularizer_k: u32,
    pub working_precision: u32,
    /// Condition number estimate of `K` (infinity norm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_estimate: Option<f64>,
}

/// Limiting correction weights of one rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub schema: String,
    pub kernel: KernelKind,
    pub alpha: String,
    pub p: u32,
    /// Significant digits backed by the extrapolation check.
    pub digits: u32,
    pub weights: Vec<WeightEntry>,
    pub provenance: Provenance,
}

impl WeightTable {
    pub fn alpha_f64(&self) -> Result<f64> {
        self.alpha.trim().parse::<f64>().map_err(|_| Error::Parse(self.alpha.clone()))
    }

    pub fn alpha_x(&self, prec: Precision) -> Result<XReal> {
        XReal::parse(&self.alpha, prec)
    }

    pub fn get(&self, gamma: MultiIndex) -> Option<&str> {
        self.weights.iter().find(|w| w.gamma == gamma).map(|w| w.value.as_str())
    }

    pub fn values_x(&self, prec: Precision) -> Result<Vec<XReal>> {
        self.weights.iter().map(|w| XReal::parse(&w.value, prec)).collect()
    }

    pub fn values_f64(&self) -> Result<Vec<f64>> {
        self.weights
            .iter()
            .map(|w| w.value.trim().parse::<f64>().map_err(|_| Error::Parse(w.value.clone())))
            .collect()
    }

    /// Checks the schema tag and that the entries follow the index set.
    pub fn validate(&self) -> Result<()> {
        if self.schema != WEIGHTS_SCHEMA {
            return Err(Error::TableMismatch(format!("unsupported schema {:?}", self.schema)));
        }
        let alpha = self.alpha_f64()?;
        crate::kernels::check_alpha(alpha)?;
        let expected = index_set(self.kernel, self.p)?;
        let got: Vec<MultiIndex> = self.weights.iter().map(|w| w.gamma).collect();
        if got != expected {
            return Err(Error::TableMismatch(format!(
                "{} p={} expects indices {:?}, table has {:?}",
                self.kernel, self.p, expected, got
            )));
        }
        self.values_f64()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: WeightTable = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        WeightTable::from_json(&std::fs::read_to_string(path)?)
    }
}

fn solve_k(kernel: KernelKind, p: u32, rhs: &[XReal], prec: Precision) -> Result<Vec<XReal>> {
    let k = build_k(kernel, p)?.to_xmatrix(prec);
    lu_solve(&k, rhs)
}

/// Full weight pipeline: residuals on `levels` meshes, Richardson
/// extrapolation and the solve `K ω̄ = c̄`.
///
/// With `verify` set, the extrapolation is repeated on the meshes shifted one
/// level finer and the claimed digits are the agreement of both solutions
/// minus one, capped at `working digits - 10`.
pub fn solve_weights(kernel: KernelKind, p: u32, alpha: &XReal, cfg: &WeightConfig) -> Result<WeightTable> {
    check_alpha_x(alpha)?;
    let prec = cfg.precision;
    let alpha = alpha.with_precision(prec);
    let k = cfg.regularizer(kernel);
    let orders = cfg.richardson_orders(kernel);
    let n_levels = cfg.levels as usize + usize::from(cfg.verify);
    let meshes: Vec<XReal> = (0..n_levels).map(|j| XReal::pow2(-((cfg.h_base_exp as usize + j) as i32), prec)).collect();
    let residuals = meshes
        .iter()
        .map(|h| c_vector(kernel, p, &alpha, h, k).map(|r| r.values))
        .collect::<Result<Vec<_>>>()?;
    let main = richardson(&residuals[..cfg.levels as usize], &orders)?;
    let omega = solve_k(kernel, p, &main, prec)?;
    let cap = prec.digits().saturating_sub(10);
    let digits = if cfg.verify {
        let check = richardson(&residuals[1..], &orders)?;
        let omega_check = solve_k(kernel, p, &check, prec)?;
        let agree = omega
            .iter()
            .zip(&omega_check)
            .map(|(a, b)| a.agreeing_digits(b))
            .fold(f64::INFINITY, f64::min);
        ((agree.floor() as i64 - 1).max(0) as u32).min(cap)
    } else {
        0
    };
    let indices = index_set(kernel, p)?;
    let condition_estimate = build_k(kernel, p)?.condition_estimate(Precision::new(30)).ok();
    Ok(WeightTable {
        schema: WEIGHTS_SCHEMA.to_string(),
        kernel,
        alpha: format_alpha(&alpha),
        p,
        digits,
        weights: indices
            .into_iter()
            .zip(&omega)
            .map(|(gamma, w)| WeightEntry { gamma, value: w.to_sci_string(prec.digits() as usize) })
            .collect(),
        provenance: Provenance {
            h_base: format!("2^-{}", cfg.h_base_exp),
            levels: cfg.levels,
            richardson_stages: orders.len() as u32,
            richardson_orders: orders,
            regularizer_k: k,
            working_precision: prec.digits(),
            condition_estimate,
        },
    })
}

/// Shortest decimal of `alpha` when it is a double, full precision otherwise.
fn format_alpha(alpha: &XReal) -> String {
    let f = alpha.to_f64();
    if XReal::from_f64(f, alpha.precision()) == *alpha {
        format!("{f}")
    } else {
        alpha.to_sci_string(alpha.precision().digits() as usize)
    }
}

/// Solves the finite-`h` system `K G(h) ω(h) = c(h)` with
/// `G(h) = diag(g(γ_j h))`.
pub fn weights_at_h(kernel: KernelKind, p: u32, alpha: &XReal, h: &XReal, k: u32) -> Result<Vec<XReal>> {
    let prec = alpha.precision();
    let c = c_vector(kernel, p, alpha, h, k)?;
    let y = solve_k(kernel, p, &c.values, prec)?;
    let indices = index_set(kernel, p)?;
    Ok(indices
        .iter()
        .zip(y)
        .map(|(gamma, yj)| {
            let x1 = h * XReal::from_i64(gamma.a as i64, prec);
            let x2 = h * XReal::from_i64(gamma.b as i64, prec);
            yj / regularizer_g_x(k, &x1, &x2)
        })
        .collect())
}
