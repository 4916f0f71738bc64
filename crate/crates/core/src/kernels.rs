//! Singular kernels, the regularizer `g`, built-in test integrands and the
//! closed-form moment integrals used to generate correction weights.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::stencil::MultiIndex;
use crate::xprec::{gamma, Precision, XReal};

/// Coordinate axis of an on-diagonal kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X1,
    X2,
}

/// Which of the weakly singular kernels a rule integrates against.
///
/// `OnDiag(axis)` is `x_i^2 / |x|^(2+alpha)`, `OffDiag` is
/// `x_1 x_2 / |x|^(2+alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    OnDiag(Axis),
    OffDiag,
}

impl KernelKind {
    pub fn is_off_diag(self) -> bool {
        matches!(self, KernelKind::OffDiag)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::OnDiag(Axis::X1) => "on_diag_x1",
            KernelKind::OnDiag(Axis::X2) => "on_diag_x2",
            KernelKind::OffDiag => "off_diag",
        }
    }

    /// Default regularizer exponent: 6 on-diagonal, 8 off-diagonal.
    pub fn default_regularizer(self) -> u32 {
        if self.is_off_diag() {
            8
        } else {
            6
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "on_diag_x1" | "on_diag" => Ok(KernelKind::OnDiag(Axis::X1)),
            "on_diag_x2" => Ok(KernelKind::OnDiag(Axis::X2)),
            "off_diag" => Ok(KernelKind::OffDiag),
            _ => Err(Error::Invalid(format!("unknown kernel {s:?}"))),
        }
    }
}

impl Serialize for KernelKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for KernelKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha.to_string()))
    }
}

pub(crate) fn check_alpha_x(alpha: &XReal) -> Result<()> {
    let prec = alpha.precision();
    if *alpha > XReal::zero(prec) && *alpha < XReal::from_i64(2, prec) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha.to_sci_string(17)))
    }
}

pub(crate) fn check_regularizer(k: u32) -> Result<()> {
    if k >= 2 && k.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Error::InvalidRegularizer(k))
    }
}

/// Kernel value at `x != 0` in double precision.
pub fn kernel_eval(kernel: KernelKind, alpha: f64, x: [f64; 2]) -> Result<f64> {
    check_alpha(alpha)?;
    if x == [0.0, 0.0] {
        return Err(Error::Origin);
    }
    Ok(kernel_value(kernel, alpha, x[0], x[1]))
}

#[inline]
pub(crate) fn kernel_value(kernel: KernelKind, alpha: f64, x1: f64, x2: f64) -> f64 {
    let r2 = x1 * x1 + x2 * x2;
    let numer = match kernel {
        KernelKind::OnDiag(Axis::X1) => x1 * x1,
        KernelKind::OnDiag(Axis::X2) => x2 * x2,
        KernelKind::OffDiag => x1 * x2,
    };
    numer * r2.powf(-(1.0 + 0.5 * alpha))
}

/// Kernel value at `x != 0` in extended precision.
pub fn kernel_eval_x(kernel: KernelKind, alpha: &XReal, x1: &XReal, x2: &XReal) -> Result<XReal> {
    check_alpha_x(alpha)?;
    if x1.is_zero() && x2.is_zero() {
        return Err(Error::Origin);
    }
    let r2 = x1 * x1 + x2 * x2;
    let expo = -(alpha * 0.5 + 1.0);
    let numer = match kernel {
        KernelKind::OnDiag(Axis::X1) => x1 * x1,
        KernelKind::OnDiag(Axis::X2) => x2 * x2,
        KernelKind::OffDiag => x1 * x2,
    };
    Ok(numer * r2.powf(&expo))
}

/// The regularizer `g(x) = exp(-|x|^k)`.
pub fn regularizer_g(k: u32, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    (-r2.powi((k / 2) as i32)).exp()
}

pub fn regularizer_g_x(k: u32, x1: &XReal, x2: &XReal) -> XReal {
    let r2 = x1 * x1 + x2 * x2;
    (-r2.powi((k / 2) as i32)).exp()
}

/// Radius beyond which `exp(-r^k) < 10^-(digits + 5)`.
pub fn truncation_radius(k: u32, digits: u32) -> f64 {
    ((digits as f64 + 5.0) * std::f64::consts::LN_10).powf(1.0 / k as f64)
}

/// Closed form of `∫ g(x) s(x) x^(2ξ) dx` (on-diagonal) or
/// `∫ g(x) s12(x) x^(2ξ - e1 - e2) dx` (off-diagonal) for
/// `g = exp(-|x|^k)`.
pub fn moment_integral(kernel: KernelKind, xi: MultiIndex, alpha: &XReal, k: u32) -> Result<XReal> {
    check_alpha_x(alpha)?;
    check_regularizer(k)?;
    let prec = alpha.precision();
    let kx = XReal::from_i64(k as i64, prec);
    let norm = XReal::from_i64(xi.norm1() as i64, prec);
    let (a, b) = match kernel {
        KernelKind::OnDiag(Axis::X2) => (xi.b, xi.a),
        _ => (xi.a, xi.b),
    };
    let half = |n: u32, off: f64| XReal::from_f64(n as f64 + off, prec);
    let (first, radial_numer, last) = match kernel {
        KernelKind::OffDiag => {
            if a == 0 || b == 0 {
                return Err(Error::InvalidIndex { kernel: kernel.to_string(), a: xi.a, b: xi.b });
            }
            (half(a, 0.5), &norm * 2.0 - alpha, &norm + 1.0)
        }
        KernelKind::OnDiag(_) => (half(a, 1.5), &norm * 2.0 + 2.0 - alpha, &norm + 2.0),
    };
    let radial = &radial_numer / &kx;
    if radial <= XReal::zero(prec) {
        return Err(Error::MomentDomain(radial.to_sci_string(10)));
    }
    let value = gamma(&first)? * gamma(&half(b, 0.5))? * gamma(&radial)? * 2.0
        / (kx * gamma(&last)?);
    Ok(value)
}

/// The constant `C_{d,α}` of the fractional Laplacian.
pub fn frac_laplacian_constant(d: u32, alpha: &XReal) -> Result<XReal> {
    check_alpha_x(alpha)?;
    if d == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    let prec = alpha.precision();
    let two = XReal::from_i64(2, prec);
    let dx = XReal::from_i64(d as i64, prec);
    let numer = two.powf(alpha) * gamma(&((alpha + &dx) * 0.5))?;
    let denom = XReal::pi(prec).powf(&(dx * 0.5)) * gamma(&(-(alpha * 0.5)))?.abs();
    Ok(numer / denom)
}

type Eval = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type EvalX = Arc<dyn Fn(&XReal, &XReal) -> XReal + Send + Sync>;

/// A regular function `φ` to integrate against a kernel.
///
/// Zero outside the square `|x|∞ <= support_radius` (up to working epsilon
/// for the practically compact regularizer).
#[derive(Clone)]
pub struct Integrand {
    name: String,
    support_radius: f64,
    smoothness: String,
    eval: Eval,
    eval_x: Option<EvalX>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("support_radius", &self.support_radius)
            .field("smoothness", &self.smoothness)
            .field("extended", &self.eval_x.is_some())
            .finish()
    }
}

impl Integrand {
    pub fn new(
        name: impl Into<String>,
        support_radius: f64,
        smoothness: impl Into<String>,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(support_radius > 0.0, "support radius must be positive");
        Integrand {
            name: name.into(),
            support_radius,
            smoothness: smoothness.into(),
            eval: Arc::new(eval),
            eval_x: None,
        }
    }

    /// Attaches an extended-precision evaluation.
    pub fn with_extended(
        mut self,
        eval_x: impl Fn(&XReal, &XReal) -> XReal + Send + Sync + 'static,
    ) -> Self {
        self.eval_x = Some(Arc::new(eval_x));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn smoothness(&self) -> &str {
        &self.smoothness
    }

    pub fn has_extended(&self) -> bool {
        self.eval_x.is_some()
    }

    #[inline]
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        (self.eval)(x1, x2)
    }

    pub fn eval_x(&self, x1: &XReal, x2: &XReal) -> Result<XReal> {
        match &self.eval_x {
            Some(f) => Ok(f(x1, x2)),
            None => Err(Error::NoExtendedEval(self.name.clone())),
        }
    }

    pub fn zero() -> Self {
        Integrand::new("zero", 1.0, "C-infinity", |_, _| 0.0)
            .with_extended(|x1, _| XReal::zero(x1.precision()))
    }

    /// `exp(-|x|^k)` truncated where it drops below `10^-(digits + 5)`.
    pub fn regularizer(k: u32, digits: u32) -> Result<Self> {
        check_regularizer(k)?;
        Ok(Integrand::new(
            format!("g{k}"),
            truncation_radius(k, digits),
            "C-infinity, practically compact",
            move |x1, x2| regularizer_g(k, [x1, x2]),
        )
        .with_extended(move |x1, x2| regularizer_g_x(k, x1, x2)))
    }

    /// `φ(x) · x1^e1 · x2^e2`.
    pub fn times_monomial(&self, e1: u32, e2: u32) -> Self {
        let f = self.eval.clone();
        let fx = self.eval_x.clone();
        let mut out = Integrand::new(
            format!("{}*x^({e1},{e2})", self.name),
            self.support_radius,
            self.smoothness.clone(),
            move |x1, x2| f(x1, x2) * x1.powi(e1 as i32) * x2.powi(e2 as i32),
        );
        if let Some(fx) = fx {
            out = out.with_extended(move |x1, x2| {
                fx(x1, x2) * x1.powi(e1 as i32) * x2.powi(e2 as i32)
            });
        }
        out
    }

    /// `x ↦ φ(-x1, x2)`.
    pub fn reflect_x1(&self) -> Self {
        let f = self.eval.clone();
        let fx = self.eval_x.clone();
        let mut out = Integrand::new(
            format!("{}(-x1,x2)", self.name),
            self.support_radius,
            self.smoothness.clone(),
            move |x1, x2| f(-x1, x2),
        );
        if let Some(fx) = fx {
            out = out.with_extended(move |x1, x2| fx(&-x1, x2));
        }
        out
    }

    /// `x ↦ φ(x2, x1)`.
    pub fn swap_args(&self) -> Self {
        let f = self.eval.clone();
        let fx = self.eval_x.clone();
        let mut out = Integrand::new(
            format!("{}(x2,x1)", self.name),
            self.support_radius,
            self.smoothness.clone(),
            move |x1, x2| f(x2, x1),
        );
        if let Some(fx) = fx {
            out = out.with_extended(move |x1, x2| fx(x2, x1));
        }
        out
    }

    /// `a·φ + b·ψ`, supported on the larger of the two supports.
    pub fn linear_combination(a: f64, phi: &Integrand, b: f64, psi: &Integrand) -> Self {
        let (f, g) = (phi.eval.clone(), psi.eval.clone());
        let mut out = Integrand::new(
            format!("{a}*{}+{b}*{}", phi.name, psi.name),
            phi.support_radius.max(psi.support_radius),
            "combination",
            move |x1, x2| a * f(x1, x2) + b * g(x1, x2),
        );
        if let (Some(fx), Some(gx)) = (phi.eval_x.clone(), psi.eval_x.clone()) {
            out = out.with_extended(move |x1, x2| fx(x1, x2) * a + gx(x1, x2) * b);
        }
        out
    }
}

fn bump_f64(x1: f64, x2: f64) -> f64 {
    let u = (1.0 - x1 * x1).max(0.0) * (1.0 - x2 * x2).max(0.0);
    u.powi(7)
}

fn bump_x(x1: &XReal, x2: &XReal) -> XReal {
    let prec = x1.precision();
    let zero = XReal::zero(prec);
    let a = (XReal::one(prec) - x1 * x1).max(zero.clone());
    let b = (XReal::one(prec) - x2 * x2).max(zero);
    (a * b).powi(7)
}

/// The C⁶ test functions supported on `[-1, 1]²`:
/// `(1+x1+x1²)(1+x2+x2²)((1-x1²)₊(1-x2²)₊)^7` for on-diagonal kernels and
/// `(1+x1)(1+x2)((1-x1²)₊(1-x2²)₊)^7` for the off-diagonal kernel.
pub fn builtin_phi(kernel: KernelKind) -> Integrand {
    if kernel.is_off_diag() {
        Integrand::new("off-test", 1.0, "C6", |x1, x2| (1.0 + x1) * (1.0 + x2) * bump_f64(x1, x2))
            .with_extended(|x1, x2| (x1 + 1.0) * (x2 + 1.0) * bump_x(x1, x2))
    } else {
        Integrand::new("on-test", 1.0, "C6", |x1, x2| {
            (1.0 + x1 + x1 * x1) * (1.0 + x2 + x2 * x2) * bump_f64(x1, x2)
        })
        .with_extended(|x1, x2| {
            (x1 * x1 + x1 + 1.0) * (x2 * x2 + x2 + 1.0) * bump_x(x1, x2)
        })
    }
}

/// Looks up `builtin:on-test`, `builtin:off-test`, `builtin:g6`, `builtin:g8`
/// (the prefix is optional).
pub fn builtin(name: &str, prec: Precision) -> Result<Integrand> {
    let key = name.strip_prefix("builtin:").unwrap_or(name);
    match key {
        "on-test" => Ok(builtin_phi(KernelKind::OnDiag(Axis::X1))),
        "off-test" => Ok(builtin_phi(KernelKind::OffDiag)),
        "zero" => Ok(Integrand::zero()),
        _ => match key.strip_prefix('g').and_then(|k| k.parse::<u32>().ok()) {
            Some(k) => Integrand::regularizer(k, prec.digits()),
            None => Err(Error::UnknownIntegrand(name.to_string())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const X1: KernelKind = KernelKind::OnDiag(Axis::X1);
    const X2: KernelKind = KernelKind::OnDiag(Axis::X2);
    const OFF: KernelKind = KernelKind::OffDiag;

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_eval(X1, 0.5, [1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(kernel_eval(OFF, 0.7, [3.0, 0.0]).unwrap(), 0.0);
        let v = kernel_eval(X1, 1.5, [1.0, 1.0]).unwrap();
        assert!((v - 2f64.powf(-1.75)).abs() < 1e-15);
        assert!(matches!(kernel_eval(X1, 0.5, [0.0, 0.0]), Err(Error::Origin)));
        assert!(matches!(kernel_eval(X1, 2.0, [1.0, 0.0]), Err(Error::InvalidAlpha(_))));
    }

    #[test]
    fn kernel_parity() {
        for &(a, b) in &[(0.3, 0.7), (-1.2, 0.4), (2.0, -3.0)] {
            let off = kernel_eval(OFF, 0.9, [a, b]).unwrap();
            assert_eq!(off, -kernel_eval(OFF, 0.9, [-a, b]).unwrap());
            let on = kernel_eval(X1, 0.9, [a, b]).unwrap();
            for (sa, sb) in [(1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                assert_eq!(on, kernel_eval(X1, 0.9, [sa * a, sb * b]).unwrap());
            }
        }
    }

    #[test]
    fn regularizer_values() {
        assert_eq!(regularizer_g(6, [0.0, 0.0]), 1.0);
        assert!((regularizer_g(6, [1.0, 0.0]) - (-1f64).exp()).abs() < 1e-16);
        let v = regularizer_g(8, [1.5, 0.0]);
        assert!((v / (-(1.5f64.powi(8))).exp() - 1.0).abs() < 1e-14);
        // decay below 10^-d past the truncation radius
        let r = truncation_radius(6, 50);
        assert!((2.2..2.3).contains(&r));
        let p = Precision::new(60);
        let g = regularizer_g_x(6, &XReal::from_f64(r, p), &XReal::zero(p));
        assert!(g < XReal::parse("1e-50", p).unwrap());
    }

    #[test]
    fn moment_closed_forms() {
        let p = Precision::default();
        let alpha = XReal::from_f64(0.5, p);
        // 2Γ(1.5)Γ(0.5)Γ(0.25)/(6Γ(2)) = π Γ(1/4) / 6
        let m = moment_integral(X1, MultiIndex::new(0, 0), &alpha, 6).unwrap();
        let expected = XReal::pi(p) * gamma(&XReal::from_f64(0.25, p)).unwrap() / 6.0;
        assert!(m.agreeing_digits(&expected) > 47.0);

        let alpha = XReal::from_f64(1.5, p);
        let m = moment_integral(OFF, MultiIndex::new(1, 1), &alpha, 8).unwrap();
        let g15 = gamma(&XReal::from_f64(1.5, p)).unwrap();
        let expected = &g15 * &g15 * gamma(&XReal::from_f64(0.3125, p)).unwrap() * 2.0
            / (XReal::from_i64(8, p) * gamma(&XReal::from_i64(3, p)).unwrap());
        assert!(m.agreeing_digits(&expected) > 47.0);

        let swapped = moment_integral(X1, MultiIndex::new(2, 1), &alpha, 6).unwrap();
        let axis2 = moment_integral(X2, MultiIndex::new(1, 2), &alpha, 6).unwrap();
        assert_eq!(swapped, axis2);
        let off_a = moment_integral(OFF, MultiIndex::new(3, 1), &alpha, 8).unwrap();
        let off_b = moment_integral(OFF, MultiIndex::new(1, 3), &alpha, 8).unwrap();
        assert!(off_a.agreeing_digits(&off_b) > 48.0);
        assert!(moment_integral(OFF, MultiIndex::new(2, 0), &alpha, 8).is_err());
        assert!(moment_integral(X1, MultiIndex::new(0, 0), &alpha, 5).is_err());
    }

    #[test]
    fn laplacian_constant() {
        let p = Precision::default();
        let c = frac_laplacian_constant(2, &XReal::one(p)).unwrap();
        let expected = XReal::one(p) / (XReal::pi(p) * 2.0);
        assert!(c.agreeing_digits(&expected) > 47.0);
        for i in 1..20 {
            let a = XReal::from_f64(i as f64 / 10.0, p);
            let c = frac_laplacian_constant(2, &a).unwrap();
            assert!(c.is_finite() && c > XReal::zero(p));
        }
    }

    #[test]
    fn builtin_functions() {
        let on = builtin_phi(X1);
        assert_eq!(on.eval(0.0, 0.0), 1.0);
        for y in [-1.0, -0.3, 0.0, 0.8] {
            assert_eq!(on.eval(1.0, y), 0.0);
        }
        let off = builtin_phi(OFF);
        let expected = 1.5 * 1.5 * (0.75f64 * 0.75).powi(7);
        assert!((off.eval(0.5, 0.5) - expected).abs() < 1e-16);
        assert_eq!(on.support_radius(), 1.0);
        assert_eq!(on.smoothness(), "C6");
        let p = Precision::default();
        let vx = off.eval_x(&XReal::from_f64(0.5, p), &XReal::from_f64(0.5, p)).unwrap();
        assert!((vx.to_f64() - expected).abs() < 1e-16);
        assert!(builtin("builtin:g6", p).is_ok());
        assert!(builtin("builtin:nope", p).is_err());
    }

    #[test]
    fn kernel_names_roundtrip() {
        for k in [X1, X2, OFF] {
            assert_eq!(k.name().parse::<KernelKind>().unwrap(), k);
            assert_eq!(k.name().replace('_', "-").parse::<KernelKind>().unwrap(), k);
        }
        assert!("diag".parse::<KernelKind>().is_err());
    }
}
