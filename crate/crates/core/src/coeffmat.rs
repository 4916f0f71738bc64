//! Exact coefficient matrices `K` and certificates of their structure.
//!
//! Everything here is integer or rational arithmetic; no rounding happens
//! anywhere in this module.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::stencil::{MultiIndex, Stencil};
use crate::xprec::{lu_solve, Precision, XMatrix, XReal};

pub type IntMatrix = Vec<Vec<Integer>>;

/// The moment-matching matrix of a stencil.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix {
    pub stencil: Stencil,
    pub entries: IntMatrix,
}

impl CoeffMatrix {
    pub fn kernel(&self) -> KernelKind {
        self.stencil.kernel
    }

    pub fn p(&self) -> u32 {
        self.stencil.p
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn to_xmatrix(&self, prec: Precision) -> XMatrix {
        XMatrix::from_rows(
            self.entries
                .iter()
                .map(|row| row.iter().map(|v| XReal::from_integer(v, prec)).collect())
                .collect(),
        )
        .expect("K is square and non-empty")
    }

    /// Exact determinant.
    pub fn det(&self) -> Integer {
        bareiss_det(&self.entries)
    }

    /// Infinity-norm condition number, computed from an explicit inverse.
    pub fn condition_estimate(&self, prec: Precision) -> Result<f64> {
        let a = self.to_xmatrix(prec);
        let n = a.rows();
        let norm = |rows: &dyn Fn(usize) -> Vec<XReal>| {
            (0..n)
                .map(|i| rows(i).iter().map(|v| v.abs().to_f64()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let mut inv_cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![XReal::zero(prec); n];
            e[j] = XReal::one(prec);
            inv_cols.push(lu_solve(&a, &e)?);
        }
        let a_norm = norm(&|i| a.row(i).to_vec());
        let inv_norm = norm(&|i| inv_cols.iter().map(|c| c[i].clone()).collect());
        Ok(a_norm * inv_norm)
    }
}

/// `β^e` with `0^0 = 1`.
fn monomial(beta: [i64; 2], e: [u32; 2]) -> Integer {
    Integer::from(beta[0]).pow(e[0]) * Integer::from(beta[1]).pow(e[1])
}

/// Builds `K` exactly under the stencil ordering.
///
/// On-diagonal `K[i][j] = Σ_{β∈G_j} β^(2ξ_i)`; off-diagonal
/// `K[i][j] = Σ_{β∈G_j} sgn(β1 β2) β^(2ξ_i - (1,1))`.
pub fn build_k(kernel: KernelKind, p: u32) -> Result<CoeffMatrix> {
    let stencil = Stencil::new(kernel, p)?;
    let exps: Vec<[u32; 2]> = stencil
        .indices
        .iter()
        .map(|xi| {
            if kernel.is_off_diag() {
                [2 * xi.a - 1, 2 * xi.b - 1]
            } else {
                [2 * xi.a, 2 * xi.b]
            }
        })
        .collect();
    let entries = exps
        .iter()
        .map(|&e| {
            stencil
                .groups
                .iter()
                .map(|g| {
                    g.iter().fold(Integer::new(), |acc, sp| {
                        acc + monomial(sp.point, e) * i32::from(sp.sign)
                    })
                })
                .collect()
        })
        .collect();
    Ok(CoeffMatrix { stencil, entries })
}

/// Fraction-free Gaussian elimination.
pub fn bareiss_det(m: &[Vec<Integer>]) -> Integer {
    let n = m.len();
    if n == 0 {
        return Integer::from(1);
    }
    let mut a: IntMatrix = m.to_vec();
    let mut sign = 1;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&a[i][j] * &a[k][k]) - Integer::from(&a[i][k] * &a[k][j]);
                a[i][j] = v.div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

fn sub_block(m: &IntMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> IntMatrix {
    rows.map(|i| m[i][cols.clone()].to_vec()).collect()
}

fn is_zero_block(m: &IntMatrix) -> bool {
    m.iter().all(|r| r.iter().all(|v| *v == 0))
}

/// Block decomposition of an on-diagonal `K` at size `2p + 1`.
#[derive(Clone, Debug)]
pub struct BlockReport {
    pub a: IntMatrix,
    pub b: IntMatrix,
    pub c: IntMatrix,
    pub d: IntMatrix,
    /// `K[0][0] = 1` and the rest of column 0 vanishes.
    pub first_column_ok: bool,
    pub c_is_zero: bool,
    /// `A(r, s) = 2 s^(2r)` on both diagonal blocks and zero off them.
    pub a1_a4_vandermonde: bool,
    /// `det K = det A · det D`.
    pub det_product_ok: bool,
    /// `D` equals `4E` with `E` evaluated at `x_i = i²`.
    pub d_equals_4e: bool,
}

impl BlockReport {
    pub fn all_ok(&self) -> bool {
        self.first_column_ok && self.c_is_zero && self.a1_a4_vandermonde && self.det_product_ok && self.d_equals_4e
    }
}

pub fn block_structure(k: &CoeffMatrix) -> Result<BlockReport> {
    let p = k.p() as usize;
    if k.kernel().is_off_diag() {
        return Err(Error::Invalid("block structure applies to on-diagonal matrices".into()));
    }
    if p < 1 {
        return Err(Error::InvalidOrder {
            kernel: k.kernel().to_string(),
            p: k.p(),
            reason: "block structure needs p >= 1",
        });
    }
    let m = &k.entries;
    let n = m.len();
    let s = 2 * p + 1;
    let a = sub_block(m, 0..s, 0..s);
    let b = sub_block(m, 0..s, s..n);
    let c = sub_block(m, s..n, 0..s);
    let d = sub_block(m, s..n, s..n);

    let first_column_ok = m[0][0] == 1 && (1..n).all(|i| m[i][0] == 0);
    let mut vandermonde = true;
    for r in 1..=p {
        for col in 1..=p {
            let want = Integer::from(col).pow(2 * r as u32) * 2u32;
            vandermonde &= a[r][col] == want && a[p + r][p + col] == want;
            vandermonde &= a[r][p + col] == 0 && a[p + r][col] == 0;
            vandermonde &= a[r][0] == 0 && a[p + r][0] == 0;
        }
    }
    let det_product_ok = k.det() == bareiss_det(&a) * bareiss_det(&d);
    let c3: Vec<MultiIndex> = k.stencil.indices[s..].to_vec();
    let xs: Vec<Integer> = (1..p as u64).map(|i| Integer::from(i * i)).collect();
    let e = on_diag_e(&c3, &xs);
    let d_equals_4e = e
        .iter()
        .zip(&d)
        .all(|(er, dr)| er.iter().zip(dr).all(|(ev, dv)| Integer::from(ev * 4u32) == *dv));
    Ok(BlockReport {
        c_is_zero: is_zero_block(&c),
        a,
        b,
        c,
        d,
        first_column_ok,
        a1_a4_vandermonde: vandermonde,
        det_product_ok,
        d_equals_4e,
    })
}

/// `E[i][j] = x_{ξj1}^{ξi1} x_{ξj2}^{ξi2}` over the interior indices, `xs[m-1]` standing for `x_m`.
fn on_diag_e(c3: &[MultiIndex], xs: &[Integer]) -> IntMatrix {
    c3.iter()
        .map(|xi| {
            c3.iter()
                .map(|xj| {
                    xs[xj.a as usize - 1].clone().pow(xi.a)
                        * xs[xj.b as usize - 1].clone().pow(xi.b)
                })
                .collect()
        })
        .collect()
}

/// `T[i][j] = x_{ξj1}^{ξi1} x_{ξj2}^{ξi2} + x_{ξj1}^{ξi2} x_{ξj2}^{ξi1}`.
fn off_diag_t(idx: &[MultiIndex], xs: &[Integer]) -> IntMatrix {
    let x = |m: u32| &xs[m as usize - 1];
    idx.iter()
        .map(|xi| {
            idx.iter()
                .map(|xj| {
                    x(xj.a).clone().pow(xi.a) * x(xj.b).clone().pow(xi.b)
                        + x(xj.a).clone().pow(xi.b) * x(xj.b).clone().pow(xi.a)
                })
                .collect()
        })
        .collect()
}

/// Diagonal-times-matrix factorization `K = E H` of an off-diagonal `K`.
#[derive(Clone, Debug)]
pub struct FactorReport {
    pub e: IntMatrix,
    pub h: Vec<Rational>,
    pub k_equals_eh: bool,
    /// `det K = det E · Π H_jj`.
    pub det_product_ok: bool,
}

pub fn off_diag_factorization(k: &CoeffMatrix) -> Result<FactorReport> {
    if !k.kernel().is_off_diag() {
        return Err(Error::Invalid("the E·H factorization applies to the off-diagonal matrix".into()));
    }
    let idx = &k.stencil.indices;
    let h: Vec<Rational> = idx
        .iter()
        .map(|g| {
            let num = if g.a == g.b { 2 } else { 4 };
            Rational::from((num, g.a * g.b))
        })
        .collect();
    let e: IntMatrix = idx
        .iter()
        .map(|xi| {
            idx.iter()
                .map(|g| {
                    let (a, b) = (Integer::from(g.a), Integer::from(g.b));
                    a.clone().pow(2 * xi.a) * b.clone().pow(2 * xi.b)
                        + b.pow(2 * xi.a) * a.pow(2 * xi.b)
                })
                .collect()
        })
        .collect();
    let k_equals_eh = k.entries.iter().zip(&e).all(|(kr, er)| {
        kr.iter().zip(er).zip(&h).all(|((kv, ev), hv)| *kv == Rational::from(ev) * hv)
    });
    let det_h = h.iter().fold(Rational::from(1), |acc, v| acc * v);
    let det_product_ok = k.det() == Rational::from(bareiss_det(&e)) * det_h;
    Ok(FactorReport { e, h, k_equals_eh, det_product_ok })
}

/// The product `H(x)` predicted for `det E` (on-diagonal) or `det T`
/// (off-diagonal), `xs[j-1]` standing for `x_j`.
pub fn predicted_product(kernel: KernelKind, p: u32, xs: &[Integer]) -> Integer {
    let x = |j: u32| &xs[j as usize - 1];
    let mut h = Integer::from(1);
    if kernel.is_off_diag() {
        let half = p / 2;
        let expo = |j: u32| if j <= half { p + 1 - j } else { p - j };
        for j in 1..p {
            h *= x(j).clone().pow(expo(j));
            for i in 1..j {
                h *= Integer::from(x(j) - x(i)).pow(expo(j));
            }
        }
    } else {
        for j in 1..p {
            h *= x(j).clone().pow(2 * (p - j));
            for i in 1..j {
                h *= Integer::from(x(j) - x(i)).pow(2 * (p - j));
            }
        }
    }
    h
}

/// Outcome of the determinant/product comparison at random points.
#[derive(Clone, Debug)]
pub struct RatioReport {
    pub kernel: KernelKind,
    pub p: u32,
    pub samples: Vec<Vec<Integer>>,
    pub ratios: Vec<Rational>,
    pub constant_ratio: bool,
    pub ratio: Rational,
}

/// Evaluates `det E` (or `det T`) at `trials` random tuples of distinct
/// positive integers and checks that `det / H(x)` is one nonzero constant.
pub fn det_factorization_check(kernel: KernelKind, p: u32, trials: usize, seed: u64) -> Result<RatioReport> {
    if p < 2 {
        return Err(Error::InvalidOrder {
            kernel: kernel.to_string(),
            p,
            reason: "the determinant product needs p >= 2",
        });
    }
    if trials < 2 {
        return Err(Error::Invalid("at least two trials are needed to compare ratios".into()));
    }
    let stencil = Stencil::new(kernel, p)?;
    let idx: Vec<MultiIndex> = if kernel.is_off_diag() {
        stencil.indices
    } else {
        stencil.indices[(2 * p + 1) as usize..].to_vec()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(trials);
    let mut ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        let xs = distinct_positive(&mut rng, (p - 1) as usize, 60);
        let m = if kernel.is_off_diag() { off_diag_t(&idx, &xs) } else { on_diag_e(&idx, &xs) };
        let det = bareiss_det(&m);
        let h = predicted_product(kernel, p, &xs);
        ratios.push(Rational::from((det, h)));
        samples.push(xs);
    }
    let ratio = ratios[0].clone();
    let constant_ratio = ratio != 0 && ratios.iter().all(|r| *r == ratio);
    Ok(RatioReport { kernel, p, samples, ratios, constant_ratio, ratio })
}

fn distinct_positive(rng: &mut ChaCha8Rng, n: usize, max: u64) -> Vec<Integer> {
    let mut out: Vec<u64> = Vec::with_capacity(n);
    while out.len() < n {
        let v = rng.gen_range(1..=max.max(n as u64));
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out.into_iter().map(Integer::from).collect()
}

/// Exact determinant of `K` for every valid order up to `p_max`.
pub fn certify_nonsingular(kernel: KernelKind, p_max: u32) -> Result<Vec<(u32, Integer)>> {
    let p_min = if kernel.is_off_diag() { 2 } else { 0 };
    (p_min..=p_max).map(|p| Ok((p, build_k(kernel, p)?.det()))).collect()
}
