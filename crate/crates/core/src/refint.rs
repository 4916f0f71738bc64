//! Reference values of `∫ φ·s dx` by polar-coordinate quadrature.
//!
//! In polar coordinates the integrand is `t(θ) φ(r cos θ, r sin θ) r^(1-α)`
//! with `t = cos²θ`, `sin²θ` or `cos θ sin θ`. The radial factor `r^(1-α)`
//! is absorbed into a Gauss–Jacobi rule on the panel touching the origin;
//! all other radial panels and all angular panels use Gauss–Legendre rules,
//! refined adaptively. The angular range is split at the corners of the
//! square support, where the ray length has a kink.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{check_alpha_x, Axis, Integrand, KernelKind};
use crate::xprec::{Precision, XReal};

/// Nodes and weights of a Gauss rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<XReal>,
    pub weights: Vec<XReal>,
}

/// Jacobi polynomial `P_n^(a,b)(x)` and `P_{n-1}^(a,b)(x)`.
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    if n == 0 {
        return (p0, 0.0);
    }
    for m in 2..=n {
        let m = m as f64;
        let c = 2.0 * m + a + b;
        let next = ((c - 1.0) * (c * (c - 2.0) * x + a * a - b * b) * p1
            - 2.0 * (m + a - 1.0) * (m + b - 1.0) * c * p0)
            / (2.0 * m * (m + a + b) * (c - 2.0));
        p0 = p1;
        p1 = next;
    }
    (p1, p0)
}

fn jacobi_pair_x(n: usize, a: &XReal, b: &XReal, x: &XReal) -> (XReal, XReal) {
    let prec = x.precision();
    let ab = a + b;
    let mut p0 = XReal::one(prec);
    let mut p1 = (a + 1.0) + (&ab + 2.0) * (x - 1.0) * 0.5;
    if n == 0 {
        return (p0, XReal::zero(prec));
    }
    let a2b2 = a * a - b * b;
    for m in 2..=n {
        let mf = m as f64;
        let c = &ab + 2.0 * mf;
        let lhs = (&c - 1.0) * ((&c * (&c - 2.0)) * x + &a2b2) * &p1;
        let rhs = (a + (mf - 1.0)) * (b + (mf - 1.0)) * &c * &p0 * 2.0;
        let denom = (&ab + mf) * (&c - 2.0) * (2.0 * mf);
        let next = (lhs - rhs) / denom;
        p0 = p1;
        p1 = next;
    }
    (p1, p0)
}

/// `P_n'` from `P_n`, `P_{n-1}`.
fn jacobi_derivative(n: f64, a: f64, b: f64, x: f64, pn: f64, pm: f64) -> f64 {
    let c = 2.0 * n + a + b;
    (n * ((a - b) - c * x) * pn + 2.0 * (n + a) * (n + b) * pm) / (c * (1.0 - x * x))
}

fn jacobi_derivative_x(n: usize, a: &XReal, b: &XReal, x: &XReal, pn: &XReal, pm: &XReal) -> XReal {
    let nf = n as f64;
    let c = a + b + 2.0 * nf;
    let one = XReal::one(x.precision());
    (((a - b) - &c * x) * pn * nf + (a + nf) * (b + nf) * pm * 2.0) / (c * (one - x * x))
}

/// Gauss–Jacobi rule for `∫_0^1 u^b f(u) du` (`b > -1`); `b = 0` gives
/// Gauss–Legendre.
pub fn gauss_jacobi(n: usize, b: &XReal) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::Invalid("a Gauss rule needs at least one node".into()));
    }
    let prec = b.precision();
    let bf = b.to_f64();
    if bf <= -1.0 {
        return Err(Error::Invalid(format!("Jacobi exponent {bf} must exceed -1")));
    }
    let a = XReal::zero(prec);
    let nf = n as f64;
    let mut roots = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (((4 * i - 1) as f64) * std::f64::consts::PI / (4.0 * nf + 2.0 * bf + 2.0)).cos();
        for _ in 0..100 {
            let (pn, pm) = jacobi_pair(n, 0.0, bf, x);
            let dx = pn / jacobi_derivative(nf, 0.0, bf, x, pn, pm);
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        roots.push(x);
    }
    if roots.windows(2).any(|w| w[1] >= w[0]) || roots.iter().any(|x| x.abs() >= 1.0) {
        return Err(Error::Invalid(format!("Gauss-Jacobi root search failed for n = {n}, b = {bf}")));
    }
    let eps = XReal::from_f64(10f64, prec).powi(-(prec.digits() as i32 + 2));
    // with a = 0 the Christoffel numbers are 2^(b+1) / ((1-x²) P_n'(x)²);
    // mapping to [0, 1] cancels the power of two
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for r in roots.into_iter().rev() {
        let mut x = XReal::from_f64(r, prec);
        let mut deriv = XReal::one(prec);
        for _ in 0..20 {
            let (pn, pm) = jacobi_pair_x(n, &a, b, &x);
            deriv = jacobi_derivative_x(n, &a, b, &x, &pn, &pm);
            let dx = pn / &deriv;
            x -= &dx;
            if dx.abs() < eps {
                let (pn, pm) = jacobi_pair_x(n, &a, b, &x);
                deriv = jacobi_derivative_x(n, &a, b, &x, &pn, &pm);
                break;
            }
        }
        let one = XReal::one(prec);
        let w = one.clone() / ((&one - &x * &x) * &deriv * &deriv);
        nodes.push((x + 1.0) * 0.5);
        weights.push(w);
    }
    Ok(GaussRule { nodes, weights })
}

fn cached_rule(n: usize, b: &XReal) -> Result<Arc<GaussRule>> {
    type Cache = Mutex<HashMap<(usize, String, u32), Arc<GaussRule>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, b.to_sci_string(b.precision().digits() as usize), b.precision().digits());
    if let Some(r) = cache.lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(gauss_jacobi(n, b)?);
    cache.lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

#[derive(Clone, Debug)]
pub struct ReferenceResult {
    pub value: XReal,
    pub estimated_error: XReal,
    pub subdivisions: usize,
}

#[derive(Clone, Debug)]
pub struct RefConfig {
    pub target_digits: u32,
    /// Nodes per panel.
    pub order: usize,
    /// Cap on the number of panels per direction and sector.
    pub max_subdivisions: usize,
}

impl RefConfig {
    pub fn new(target_digits: u32) -> Self {
        RefConfig { target_digits, order: 24, max_subdivisions: 4096 }
    }
}

struct Setup<'a> {
    phi: &'a Integrand,
    kernel: KernelKind,
    support: XReal,
    legendre: Arc<GaussRule>,
    jacobi: Arc<GaussRule>,
    beta: XReal,
    tol: XReal,
    max_sub: usize,
}

/// `∫_lo^hi r^β f(r) dr` on one panel; `lo = 0` uses the Jacobi rule.
fn radial_panel(s: &Setup, c: &XReal, sn: &XReal, lo: &XReal, hi: &XReal) -> Result<XReal> {
    let prec = c.precision();
    let mut acc = XReal::zero(prec);
    if lo.is_zero() {
        for (u, w) in s.jacobi.nodes.iter().zip(&s.jacobi.weights) {
            let r = hi * u;
            acc += w * s.phi.eval_x(&(&r * c), &(&r * sn))?;
        }
        Ok(acc * hi.powf(&(&s.beta + 1.0)))
    } else {
        let width = hi - lo;
        for (u, w) in s.legendre.nodes.iter().zip(&s.legendre.weights) {
            let r = lo + &width * u;
            acc += w * s.phi.eval_x(&(&r * c), &(&r * sn))? * r.powf(&s.beta);
        }
        Ok(acc * width)
    }
}

/// Adaptive radial integral along the ray at angle `(c, sn) = (cos θ, sin θ)`.
fn radial(s: &Setup, c: &XReal, sn: &XReal) -> Result<(XReal, XReal, usize)> {
    let prec = c.precision();
    let reach = c.abs().max(sn.abs());
    let r_max = &s.support / reach;
    let mut stack = vec![(XReal::zero(prec), r_max.clone())];
    let mut total = XReal::zero(prec);
    let mut err = XReal::zero(prec);
    let mut panels = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        let mid = (&lo + &hi) * 0.5;
        let whole = radial_panel(s, c, sn, &lo, &hi)?;
        let halves = radial_panel(s, c, sn, &lo, &mid)? + radial_panel(s, c, sn, &mid, &hi)?;
        let diff = (&whole - &halves).abs();
        let share = (&hi - &lo) / &r_max;
        panels += 1;
        if diff <= &s.tol * &share || panels > s.max_sub {
            if panels > s.max_sub {
                return Err(Error::NoConvergence {
                    subdivisions: panels,
                    estimate: (total + halves).to_sci_string(20),
                    error: diff.to_f64(),
                });
            }
            total += halves;
            err += diff;
        } else {
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
    }
    Ok((total, err, panels))
}

fn angular_weight(kernel: KernelKind, c: &XReal, sn: &XReal) -> XReal {
    match kernel {
        KernelKind::OnDiag(Axis::X1) => c * c,
        KernelKind::OnDiag(Axis::X2) => sn * sn,
        KernelKind::OffDiag => c * sn,
    }
}

fn angular_panel(s: &Setup, lo: &XReal, hi: &XReal) -> Result<(XReal, XReal, usize)> {
    let prec = lo.precision();
    let width = hi - lo;
    let mut acc = XReal::zero(prec);
    let mut err = XReal::zero(prec);
    let mut sub = 0;
    for (u, w) in s.legendre.nodes.iter().zip(&s.legendre.weights) {
        let theta = lo + &width * u;
        let (c, sn) = (theta.cos(), theta.sin());
        let t = angular_weight(s.kernel, &c, &sn);
        if t.is_zero() {
            continue;
        }
        let (v, e, n) = radial(s, &c, &sn)?;
        acc += w * &t * v;
        err += (w * &t).abs() * e;
        sub += n;
    }
    Ok((acc * &width, err * width, sub))
}

/// Adaptive angular integral over `[lo, hi]`.
fn angular(s: &Setup, lo: XReal, hi: XReal, span: &XReal) -> Result<(XReal, XReal, usize)> {
    let prec = lo.precision();
    let mut stack = vec![(lo, hi)];
    let mut total = XReal::zero(prec);
    let mut err = XReal::zero(prec);
    let mut panels = 0usize;
    let mut work = 0usize;
    while let Some((a, b)) = stack.pop() {
        let mid = (&a + &b) * 0.5;
        let (whole, _, n0) = angular_panel(s, &a, &b)?;
        let (left, el, n1) = angular_panel(s, &a, &mid)?;
        let (right, er, n2) = angular_panel(s, &mid, &b)?;
        work += n0 + n1 + n2;
        let halves = left + right;
        let diff = (&whole - &halves).abs();
        let share = (&b - &a) / span;
        panels += 1;
        if panels > s.max_sub {
            return Err(Error::NoConvergence {
                subdivisions: panels,
                estimate: (total + halves).to_sci_string(20),
                error: diff.to_f64(),
            });
        }
        if diff <= &s.tol * &share {
            total += halves;
            err += diff + el + er;
        } else {
            stack.push((mid.clone(), b));
            stack.push((a, mid));
        }
    }
    Ok((total, err, panels + work))
}

/// `∫ φ(x) s(x) dx` to about `target_digits` significant digits.
pub fn reference_integral(phi: &Integrand, kernel: KernelKind, alpha: f64, target_digits: u32) -> Result<ReferenceResult> {
    let prec = Precision::new(target_digits + 12);
    reference_integral_with(phi, kernel, &XReal::from_f64(alpha, prec), &RefConfig::new(target_digits))
}

/// As [`reference_integral`] with an extended-precision `α` and explicit
/// panel order. Works at `target_digits + 12` digits.
pub fn reference_integral_with(phi: &Integrand, kernel: KernelKind, alpha: &XReal, cfg: &RefConfig) -> Result<ReferenceResult> {
    check_alpha_x(alpha)?;
    let prec = Precision::new(cfg.target_digits + 12);
    let alpha = alpha.with_precision(prec);
    let beta = XReal::one(prec) - &alpha;
    let legendre = cached_rule(cfg.order, &XReal::zero(prec))?;
    let jacobi = cached_rule(cfg.order, &beta)?;
    let support = XReal::from_f64(phi.support_radius(), prec);

    // a rough magnitude sets the absolute tolerance
    let scale = {
        let probe = Setup {
            phi,
            kernel: KernelKind::OnDiag(Axis::X1),
            support: support.clone(),
            legendre: legendre.clone(),
            jacobi: jacobi.clone(),
            beta: beta.clone(),
            tol: XReal::from_f64(1e-6, prec),
            max_sub: cfg.max_subdivisions,
        };
        let mut m = XReal::zero(prec);
        for (c, sn) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (0.6, 0.8), (-0.8, -0.6)] {
            let (v, _, _) = radial(&probe, &XReal::from_f64(c, prec), &XReal::from_f64(sn, prec))?;
            m = m.max(v.abs());
        }
        if m.is_zero() { XReal::one(prec) } else { m }
    };
    let tol = scale * XReal::from_f64(10f64, prec).powi(-(cfg.target_digits as i32 + 2));
    let setup = Setup {
        phi,
        kernel,
        support,
        legendre,
        jacobi,
        beta,
        tol,
        max_sub: cfg.max_subdivisions,
    };
    let pi = XReal::pi(prec);
    // sector boundaries at the corners of the square support
    let cuts: Vec<XReal> = (0..=8).map(|j| &pi * ((j as f64 - 3.0) / 4.0)).collect();
    let span = &pi * 2.0;
    let pieces: Vec<Result<(XReal, XReal, usize)>> = (0..8)
        .into_par_iter()
        .map(|j| angular(&setup, cuts[j].clone(), cuts[j + 1].clone(), &span))
        .collect();
    let mut value = XReal::zero(prec);
    let mut err = XReal::zero(prec);
    let mut subdivisions = 0;
    for piece in pieces {
        let (v, e, n) = piece?;
        value += v;
        err += e;
        subdivisions += n;
    }
    Ok(ReferenceResult { value, estimated_error: err, subdivisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{builtin_phi, moment_integral};
    use crate::stencil::MultiIndex;

    #[test]
    fn jacobi_rules_integrate_monomials() {
        let prec = Precision::new(40);
        for b in [0.0, 0.5, -0.5, 0.9, -0.9] {
            let bx = XReal::from_f64(b, prec);
            let rule = gauss_jacobi(12, &bx).unwrap();
            for m in 0..24 {
                let mut s = XReal::zero(prec);
                for (u, w) in rule.nodes.iter().zip(&rule.weights) {
                    s += w * u.powi(m);
                }
                let exact = XReal::one(prec) / (&bx + (m as f64 + 1.0));
                assert!(s.agreeing_digits(&exact) > 36.0, "b = {b}, m = {m}");
            }
        }
    }

    #[test]
    fn radially_symmetric_off_diag_vanishes() {
        let g = Integrand::regularizer(6, 20).unwrap();
        let r = reference_integral(&g, KernelKind::OffDiag, 0.7, 15).unwrap();
        assert!(r.value.abs().to_f64() < 1e-25);
    }

    #[test]
    fn regularizer_matches_closed_form() {
        let g = Integrand::regularizer(6, 40).unwrap();
        let kernel = KernelKind::OnDiag(Axis::X1);
        let r = reference_integral(&g, kernel, 0.5, 25).unwrap();
        let exact = moment_integral(kernel, MultiIndex::new(0, 0), &XReal::from_f64(0.5, Precision::new(40)), 6).unwrap();
        assert!(r.value.agreeing_digits(&exact) > 25.0, "{} vs {}", r.value, exact);
        assert!(r.estimated_error.to_f64() >= 0.0);
    }

    #[test]
    fn builtin_stable_across_panel_orders() {
        let kernel = KernelKind::OnDiag(Axis::X1);
        let phi = builtin_phi(kernel);
        let alpha = XReal::from_f64(0.5, Precision::new(27));
        let a = reference_integral_with(&phi, kernel, &alpha, &RefConfig { order: 20, ..RefConfig::new(15) }).unwrap();
        let b = reference_integral_with(&phi, kernel, &alpha, &RefConfig { order: 28, ..RefConfig::new(15) }).unwrap();
        assert!(a.value.agreeing_digits(&b.value) > 13.0);
    }
}
