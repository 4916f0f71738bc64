//! Extended-precision reals, special functions and dense linear algebra.
//!
//! [`XReal`] wraps an MPFR float whose precision is derived from a decimal
//! digit count ([`Precision`]). Every routine that needs more than double
//! precision (moment integrals, lattice sums, the weight systems) goes
//! through this module.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Default number of significant decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;

const GUARD_BITS: u32 = 16;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision expressed in significant decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub fn new(digits: u32) -> Self {
        assert!(digits >= 1, "precision needs at least one digit");
        Precision { digits }
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Mantissa bits used for this many digits, including guard bits.
    pub fn bits(self) -> u32 {
        (self.digits as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
    }

    /// A precision with `extra` more decimal digits.
    pub fn widened(self, extra: u32) -> Self {
        Precision::new(self.digits + extra)
    }

    fn from_bits(bits: u32) -> Self {
        let digits = ((bits.saturating_sub(GUARD_BITS)) as f64 / LOG2_10).floor() as u32;
        Precision::new(digits.max(1))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::new(DEFAULT_DIGITS)
    }
}

/// Arbitrary-precision real number.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct XReal(Float);

impl XReal {
    pub fn zero(prec: Precision) -> Self {
        XReal(Float::new(prec.bits()))
    }

    pub fn one(prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), 1))
    }

    pub fn from_f64(v: f64, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), v))
    }

    pub fn from_i64(v: i64, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), v))
    }

    pub fn from_u128(v: u128, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), v))
    }

    pub fn from_integer(v: &Integer, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), v))
    }

    pub fn from_rational(v: &Rational, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), v))
    }

    /// Parses a decimal string such as `"0.5"`, `"-4.58e-3"`.
    pub fn parse(s: &str, prec: Precision) -> Result<Self> {
        let trimmed = s.trim();
        let parsed = Float::parse(trimmed).map_err(|_| Error::Parse(s.to_string()))?;
        let v = Float::with_val(prec.bits(), parsed);
        if !v.is_finite() {
            return Err(Error::Parse(s.to_string()));
        }
        Ok(XReal(v))
    }

    pub fn pi(prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), Constant::Pi))
    }

    /// `2^e` exactly.
    pub fn pow2(e: i32, prec: Precision) -> Self {
        let mut f = Float::with_val(prec.bits(), 1);
        f <<= e;
        XReal(f)
    }

    pub fn precision(&self) -> Precision {
        Precision::from_bits(self.0.prec())
    }

    pub(crate) fn bits(&self) -> u32 {
        self.0.prec()
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn from_float(f: Float) -> Self {
        XReal(f)
    }

    /// Re-rounds to another precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        XReal(Float::with_val(self.bits(), self.0.abs_ref()))
    }

    pub fn sqrt(&self) -> Self {
        XReal(Float::with_val(self.bits(), self.0.sqrt_ref()))
    }

    pub fn exp(&self) -> Self {
        XReal(Float::with_val(self.bits(), self.0.exp_ref()))
    }

    pub fn ln(&self) -> Self {
        XReal(Float::with_val(self.bits(), self.0.ln_ref()))
    }

    pub fn sin(&self) -> Self {
        XReal(Float::with_val(self.bits(), self.0.sin_ref()))
    }

    pub fn cos(&self) -> Self {
        XReal(Float::with_val(self.bits(), self.0.cos_ref()))
    }

    pub fn powi(&self, n: i32) -> Self {
        XReal(Float::with_val(self.bits(), (&self.0).pow(n)))
    }

    pub fn powf(&self, e: &XReal) -> Self {
        let bits = self.bits().max(e.bits());
        XReal(Float::with_val(bits, (&self.0).pow(&e.0)))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Scientific notation with exactly `digits` significant digits,
    /// rounded to nearest, e.g. `-4.5827886329681250944e-3`.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.0.is_nan() {
            return "NaN".into();
        }
        if self.0.is_infinite() {
            return if self.0.is_sign_negative() { "-inf".into() } else { "inf".into() };
        }
        if self.0.is_zero() {
            let mut s = String::from("0.");
            s.push_str(&"0".repeat(digits - 1));
            if digits == 1 {
                s.pop();
            }
            s.push_str("e0");
            return s;
        }
        let (neg, mantissa, exp) = self.0.to_sign_string_exp(10, Some(digits));
        let exp = exp.expect("finite nonzero value has an exponent") - 1;
        let mut out = String::with_capacity(digits + 8);
        if neg {
            out.push('-');
        }
        out.push_str(&mantissa[..1]);
        if mantissa.len() > 1 {
            out.push('.');
            out.push_str(&mantissa[1..]);
        }
        out.push('e');
        out.push_str(&exp.to_string());
        out
    }

    /// Number of leading decimal digits on which `self` and `other` agree,
    /// measured as `-log10(|self - other| / |self|)`.
    pub fn agreeing_digits(&self, other: &XReal) -> f64 {
        let diff = (self - other).abs();
        if diff.is_zero() {
            return self.precision().digits() as f64;
        }
        let scale = self.abs().max(other.abs());
        if scale.is_zero() {
            return 0.0;
        }
        -(diff / scale).to_f64().log10()
    }
}

impl fmt::Display for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(self.precision().digits() as usize);
        f.write_str(&self.to_sci_string(digits))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident, $op:tt) => {
        impl<'a> $trait<&'a XReal> for &'a XReal {
            type Output = XReal;
            fn $method(self, rhs: &'a XReal) -> XReal {
                let bits = self.0.prec().max(rhs.0.prec());
                XReal(Float::with_val(bits, &self.0 $op &rhs.0))
            }
        }
        impl<'a> $trait<&'a XReal> for XReal {
            type Output = XReal;
            fn $method(self, rhs: &'a XReal) -> XReal {
                (&self).$method(rhs)
            }
        }
        impl $trait<XReal> for XReal {
            type Output = XReal;
            fn $method(self, rhs: XReal) -> XReal {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<XReal> for &'a XReal {
            type Output = XReal;
            fn $method(self, rhs: XReal) -> XReal {
                self.$method(&rhs)
            }
        }
        impl $trait<f64> for &XReal {
            type Output = XReal;
            fn $method(self, rhs: f64) -> XReal {
                XReal(Float::with_val(self.0.prec(), &self.0 $op rhs))
            }
        }
        impl $trait<f64> for XReal {
            type Output = XReal;
            fn $method(self, rhs: f64) -> XReal {
                (&self).$method(rhs)
            }
        }
        impl<'a> $assign_trait<&'a XReal> for XReal {
            fn $assign_method(&mut self, rhs: &'a XReal) {
                *self = (&*self).$method(rhs);
            }
        }
        impl $assign_trait<XReal> for XReal {
            fn $assign_method(&mut self, rhs: XReal) {
                *self = (&*self).$method(&rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, +);
binop!(Sub, sub, SubAssign, sub_assign, -);
binop!(Mul, mul, MulAssign, mul_assign, *);
binop!(Div, div, DivAssign, div_assign, /);

impl Neg for XReal {
    type Output = XReal;
    fn neg(self) -> XReal {
        XReal(-self.0)
    }
}

impl Neg for &XReal {
    type Output = XReal;
    fn neg(self) -> XReal {
        XReal(Float::with_val(self.0.prec(), -&self.0))
    }
}

// ---------------------------------------------------------------------------
// Gamma function (Spouge approximation)

struct SpougeTable {
    a: u32,
    bits: u32,
    coeffs: Vec<Float>,
}

fn spouge_table(bits: u32) -> Arc<SpougeTable> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<SpougeTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&bits) {
        return t.clone();
    }
    // relative error < a^{-1/2} (2 pi)^{-(a + 1/2)}
    let a = ((bits as f64 + 8.0) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI).ln())
        .ceil() as u32
        + 1;
    // the alternating series cancels roughly a*log2(e) + bits bits
    let work = 2 * bits + (a as f64 * std::f64::consts::LOG2_E) as u32 + 32;
    let af = Float::with_val(work, a);
    let mut coeffs = Vec::with_capacity(a as usize);
    let two_pi = Float::with_val(work, Constant::Pi) * 2u32;
    coeffs.push(two_pi.sqrt());
    let mut factorial = Float::with_val(work, 1); // (k-1)!
    for k in 1..a {
        if k > 1 {
            factorial *= k - 1;
        }
        let base = Float::with_val(work, &af - k);
        let pow = Float::with_val(work, (&base).pow(Float::with_val(work, k) - 0.5f64));
        let e = Float::with_val(work, base.exp_ref());
        let mut c = Float::with_val(work, &pow * &e) / &factorial;
        if k % 2 == 0 {
            c = -c;
        }
        coeffs.push(c);
    }
    let table = Arc::new(SpougeTable { a, bits: work, coeffs });
    cache.lock().unwrap().insert(bits, table.clone());
    table
}

fn spouge(x: &Float, out_bits: u32) -> Float {
    let t = spouge_table(out_bits);
    let work = t.bits;
    // Gamma(x) = Gamma(z + 1), z = x - 1
    let z = Float::with_val(work, x - 1u32);
    let mut series = t.coeffs[0].clone();
    for k in 1..t.a {
        let denom = Float::with_val(work, &z + k);
        series += Float::with_val(work, &t.coeffs[k as usize] / &denom);
    }
    let za = Float::with_val(work, &z + t.a);
    let power = Float::with_val(work, (&za).pow(Float::with_val(work, &z + 0.5f64)));
    let decay = Float::with_val(work, (-za).exp());
    Float::with_val(out_bits, power * decay * series)
}

/// Gamma function at the precision of `x`.
///
/// Uses Spouge's formula for `x >= 1/2` and the reflection formula below.
pub fn gamma(x: &XReal) -> Result<XReal> {
    let bits = x.bits();
    if x.0.is_integer() && !x.0.is_sign_positive() || x.0.is_zero() {
        return Err(Error::GammaPole(x.to_sci_string(10)));
    }
    if !x.is_finite() {
        return Err(Error::Parse(x.to_sci_string(10)));
    }
    if x.0 >= 0.5f64 {
        return Ok(XReal(spouge(&x.0, bits)));
    }
    // Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
    let work = bits + 32;
    let pi = Float::with_val(work, Constant::Pi);
    let s = Float::with_val(work, &pi * &x.0).sin();
    let reflected = spouge(&Float::with_val(work, 1 - &x.0), work);
    Ok(XReal(Float::with_val(bits, pi / (s * reflected))))
}

// ---------------------------------------------------------------------------
// Summation

const SUM_BLOCK: usize = 64;

/// Sums `terms` with a fixed pairwise reduction tree.
///
/// The tree depends only on the length of the input, so the result is the
/// same however the halves are scheduled across threads.
pub fn deterministic_sum(terms: &[XReal], prec: Precision) -> XReal {
    let bits = terms.iter().map(XReal::bits).max().unwrap_or(0).max(prec.bits());
    XReal(pairwise(terms, bits))
}

fn pairwise(terms: &[XReal], bits: u32) -> Float {
    if terms.len() <= SUM_BLOCK {
        let mut acc = Float::new(bits);
        for t in terms {
            acc += &t.0;
        }
        return acc;
    }
    let mid = terms.len() / 2;
    let (lo, hi) = if terms.len() > 4096 {
        rayon::join(|| pairwise(&terms[..mid], bits), || pairwise(&terms[mid..], bits))
    } else {
        (pairwise(&terms[..mid], bits), pairwise(&terms[mid..], bits))
    };
    lo + hi
}

/// Neumaier-compensated accumulator for doubles.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// ---------------------------------------------------------------------------
// Dense matrices

/// Dense row-major matrix of [`XReal`].
#[derive(Clone, Debug, PartialEq)]
pub struct XMatrix {
    rows: usize,
    cols: usize,
    data: Vec<XReal>,
}

impl XMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: Precision) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        XMatrix { rows, cols, data: vec![XReal::zero(prec); rows * cols] }
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        let mut m = XMatrix::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = XReal::one(prec);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<XReal>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged or empty row list".into()));
        }
        Ok(XMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_f64_rows(rows: &[&[f64]], prec: Precision) -> Result<Self> {
        XMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&v| XReal::from_f64(v, prec)).collect()).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[XReal] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[XReal]) -> Result<Vec<XReal>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = XReal::zero(self.data[0].precision());
                for (a, x) in self.row(i).iter().zip(v) {
                    acc += a * x;
                }
                acc
            })
            .collect())
    }

    fn max_abs(&self) -> XReal {
        self.data
            .iter()
            .map(XReal::abs)
            .fold(XReal::zero(self.data[0].precision()), XReal::max)
    }
}

impl std::ops::Index<(usize, usize)> for XMatrix {
    type Output = XReal;
    fn index(&self, (i, j): (usize, usize)) -> &XReal {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for XMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut XReal {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, `P A = L U` packed in place.
struct Lu {
    lu: XMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

fn factor(a: &XMatrix, threshold: Option<&XReal>) -> Result<Option<Lu>> {
    if a.rows != a.cols {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", a.rows, a.cols)));
    }
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for k in 0..n {
        let mut best = k;
        let mut best_abs = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > best_abs {
                best = i;
                best_abs = v;
            }
        }
        match threshold {
            Some(t) if &best_abs < t => {
                return Err(Error::SingularMatrix { pivot: best_abs.to_f64(), threshold: t.to_f64() })
            }
            None if best_abs.is_zero() => return Ok(None),
            _ => {}
        }
        if best != k {
            for j in 0..n {
                lu.data.swap(k * n + j, best * n + j);
            }
            perm.swap(k, best);
            swaps += 1;
        }
        let pivot = lu[(k, k)].clone();
        for i in k + 1..n {
            let factor = &lu[(i, k)] / &pivot;
            for j in k + 1..n {
                let upd = &factor * &lu[(k, j)];
                lu[(i, j)] -= upd;
            }
            lu[(i, k)] = factor;
        }
    }
    Ok(Some(Lu { lu, perm, swaps }))
}

/// Solves `A x = b` by LU factorization with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when a pivot falls below
/// `10^-(d-5) * max|A|`, `d` being the working digits of `A`.
pub fn lu_solve(a: &XMatrix, b: &[XReal]) -> Result<Vec<XReal>> {
    if b.len() != a.rows {
        return Err(Error::Dimension(format!("rhs of length {} for {} rows", b.len(), a.rows)));
    }
    let prec = a.data[0].precision();
    let digits = prec.digits() as i32;
    let threshold = a.max_abs() * XReal::from_f64(10f64, prec).powi(-(digits - 5).max(1));
    let Lu { lu, perm, .. } = factor(a, Some(&threshold))?.expect("threshold given");
    let n = a.rows;
    let mut y: Vec<XReal> = perm.iter().map(|&p| b[p].with_precision(prec)).collect();
    for i in 0..n {
        for j in 0..i {
            let upd = &lu[(i, j)] * &y[j];
            y[i] -= upd;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let upd = &lu[(i, j)] * &y[j];
            y[i] -= upd;
        }
        y[i] = &y[i] / &lu[(i, i)];
    }
    Ok(y)
}

/// Determinant via LU factorization. A singular matrix yields zero.
pub fn det(a: &XMatrix) -> Result<XReal> {
    let prec = a.data[0].precision();
    let Some(Lu { lu, swaps, .. }) = factor(a, None)? else {
        return Ok(XReal::zero(prec));
    };
    let mut d = XReal::one(prec);
    for i in 0..a.rows {
        d *= &lu[(i, i)];
    }
    if swaps % 2 == 1 {
        d = -d;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p50() -> Precision {
        Precision::default()
    }

    #[test]
    fn gamma_small_values() {
        let p = p50();
        let one = gamma(&XReal::one(p)).unwrap();
        assert!((one - 1.0).abs().to_f64() < 1e-48);
        let half = gamma(&XReal::from_f64(0.5, p)).unwrap();
        let sqrt_pi = XReal::pi(p).sqrt();
        assert!(half.agreeing_digits(&sqrt_pi) > 48.0);
        assert!(half.to_sci_string(21).starts_with("1.77245385090551602730"));
    }

    #[test]
    fn gamma_reflection_and_poles() {
        let p = p50();
        assert!(matches!(gamma(&XReal::zero(p)), Err(Error::GammaPole(_))));
        assert!(matches!(gamma(&XReal::from_i64(-3, p)), Err(Error::GammaPole(_))));
        // Gamma(-1/2) = -2 sqrt(pi)
        let g = gamma(&XReal::from_f64(-0.5, p)).unwrap();
        let expected = -(XReal::pi(p).sqrt() * 2.0);
        assert!(g.agreeing_digits(&expected) > 47.0);
    }

    #[test]
    fn gamma_recurrence() {
        let p = p50();
        for &x in &[0.3, 1.7, 2.25, 7.5, 9.9] {
            let xr = XReal::from_f64(x, p);
            let lhs = gamma(&(&xr + 1.0)).unwrap();
            let rhs = gamma(&xr).unwrap() * &xr;
            assert!(lhs.agreeing_digits(&rhs) > 47.0, "x = {x}");
        }
    }

    #[test]
    fn sci_formatting() {
        let p = p50();
        let x = XReal::parse("-4.5827886329681250944e-3", p).unwrap();
        assert_eq!(x.to_sci_string(20), "-4.5827886329681250944e-3");
        assert_eq!(XReal::from_f64(1.0, p).to_sci_string(3), "1.00e0");
        assert_eq!(XReal::from_f64(0.126, p).to_sci_string(2), "1.3e-1");
        assert_eq!(XReal::zero(p).to_sci_string(3), "0.00e0");
        assert!(XReal::parse("abc", p).is_err());
    }

    #[test]
    fn lu_identity_and_upper() {
        let p = p50();
        let id = XMatrix::identity(3, p);
        let b: Vec<XReal> = [1.0, 2.0, 3.0].iter().map(|&v| XReal::from_f64(v, p)).collect();
        assert_eq!(lu_solve(&id, &b).unwrap(), b);

        let a = XMatrix::from_f64_rows(&[&[1., 2., 2.], &[0., 2., 0.], &[0., 0., 2.]], p).unwrap();
        let b: Vec<XReal> = [1.0, 0.0, 0.0].iter().map(|&v| XReal::from_f64(v, p)).collect();
        let x = lu_solve(&a, &b).unwrap();
        assert_eq!(x.iter().map(XReal::to_f64).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
        assert_eq!(det(&a).unwrap().to_f64(), 4.0);
        assert_eq!(det(&XMatrix::identity(4, p)).unwrap().to_f64(), 1.0);
    }

    #[test]
    fn singular_detection() {
        let p = p50();
        let a = XMatrix::from_f64_rows(&[&[1., 2.], &[2., 4.]], p).unwrap();
        let b = vec![XReal::one(p), XReal::one(p)];
        assert!(matches!(lu_solve(&a, &b), Err(Error::SingularMatrix { .. })));
        assert!(det(&a).unwrap().abs().to_f64() < 1e-45);
        let z = XMatrix::zeros(2, 2, p);
        assert!(det(&z).unwrap().is_zero());
        let rect = XMatrix::zeros(2, 3, p);
        assert!(matches!(det(&rect), Err(Error::Dimension(_))));
    }

    #[test]
    fn sums() {
        let p = p50();
        assert!(deterministic_sum(&[], p).is_zero());
        let terms = vec![
            XReal::one(p),
            XReal::from_i64(-1, p),
            XReal::parse("1e-30", p).unwrap(),
        ];
        let s = deterministic_sum(&terms, p);
        assert!(s.agreeing_digits(&XReal::parse("1e-30", p).unwrap()) > 45.0);
    }

    #[test]
    fn compensated_double_sum() {
        let mut s = CompensatedSum::new();
        for v in [1.0, 1e100, 1.0, -1e100] {
            s.add(v);
        }
        assert_eq!(s.value(), 2.0);
    }
}
