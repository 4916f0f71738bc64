//! Index sets, symmetry groups and correction layers of the two stencils.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelKind;

/// A pair of non-negative integers: a stencil index, a moment exponent or a
/// group representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct MultiIndex {
    pub a: u32,
    pub b: u32,
}

impl MultiIndex {
    pub const fn new(a: u32, b: u32) -> Self {
        MultiIndex { a, b }
    }

    pub fn norm1(self) -> u32 {
        self.a + self.b
    }

    pub fn swap(self) -> Self {
        MultiIndex { a: self.b, b: self.a }
    }
}

impl From<[u32; 2]> for MultiIndex {
    fn from([a, b]: [u32; 2]) -> Self {
        MultiIndex { a, b }
    }
}

impl From<MultiIndex> for [u32; 2] {
    fn from(m: MultiIndex) -> Self {
        [m.a, m.b]
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// A lattice point of a symmetry group together with the sign its weight
/// carries there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPoint {
    pub point: [i64; 2],
    pub sign: i8,
}

/// The ordered index set of a rule together with its symmetry groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stencil {
    pub kernel: KernelKind,
    pub p: u32,
    pub indices: Vec<MultiIndex>,
    pub groups: Vec<Vec<SignedPoint>>,
}

impl Stencil {
    pub fn new(kernel: KernelKind, p: u32) -> Result<Self> {
        let indices = index_set(kernel, p)?;
        let groups = indices
            .iter()
            .map(|&g| symmetry_group(kernel, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Stencil { kernel, p, indices, groups })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn check_order(kernel: KernelKind, p: u32) -> Result<()> {
    if kernel.is_off_diag() && p < 2 {
        return Err(Error::InvalidOrder {
            kernel: kernel.to_string(),
            p,
            reason: "the off-diagonal rule has no correction weights below p = 2",
        });
    }
    Ok(())
}

/// Number of indices `N_p` of the rule.
pub fn stencil_size(kernel: KernelKind, p: u32) -> Result<usize> {
    check_order(kernel, p)?;
    let p = p as usize;
    Ok(if kernel.is_off_diag() { p * p / 4 } else { (p + 1) * (p + 2) / 2 })
}

/// Ordered index set of the rule of order `p`.
///
/// On-diagonal: `(0,0..=p)`, then `(1..=p, 0)`, then the interior indices by
/// anti-diagonals `(q-1,1), (q-2,2), ..., (1,q-1)` for `q = 2..=p`.
/// Off-diagonal: ascending 1-norm `q = 2..=p`, and `(q-m, m)` for
/// `m = 1..=q/2` within a norm.
pub fn index_set(kernel: KernelKind, p: u32) -> Result<Vec<MultiIndex>> {
    check_order(kernel, p)?;
    let mut out = Vec::with_capacity(stencil_size(kernel, p)?);
    if kernel.is_off_diag() {
        for q in 2..=p {
            for m in 1..=q / 2 {
                out.push(MultiIndex::new(q - m, m));
            }
        }
    } else {
        out.extend((0..=p).map(|r| MultiIndex::new(0, r)));
        out.extend((1..=p).map(|s| MultiIndex::new(s, 0)));
        for q in 2..=p {
            for m in 1..q {
                out.push(MultiIndex::new(q - m, m));
            }
        }
    }
    Ok(out)
}

/// Lattice points sharing the weight of index `gamma`, with their signs.
pub fn symmetry_group(kernel: KernelKind, gamma: MultiIndex) -> Result<Vec<SignedPoint>> {
    let (a, b) = (gamma.a as i64, gamma.b as i64);
    let mut pts: Vec<[i64; 2]> = Vec::with_capacity(8);
    let mut push = |p: [i64; 2]| {
        if !pts.contains(&p) {
            pts.push(p);
        }
    };
    let flips = [(1, 1), (-1, 1), (1, -1), (-1, -1)];
    if kernel.is_off_diag() {
        if a == 0 || b == 0 {
            return Err(Error::InvalidIndex { kernel: kernel.to_string(), a: gamma.a, b: gamma.b });
        }
        for (sa, sb) in flips {
            push([sa * a, sb * b]);
        }
        for (sa, sb) in flips {
            push([sa * b, sb * a]);
        }
        Ok(pts
            .into_iter()
            .map(|point| SignedPoint { point, sign: (point[0] * point[1]).signum() as i8 })
            .collect())
    } else {
        for (sa, sb) in flips {
            push([sa * a, sb * b]);
        }
        Ok(pts.into_iter().map(|point| SignedPoint { point, sign: 1 }).collect())
    }
}

/// Number of correction layers: `p + 1` on-diagonal, `p - 1` off-diagonal.
pub fn layer_count(kernel: KernelKind, p: u32) -> Result<u32> {
    check_order(kernel, p)?;
    Ok(if kernel.is_off_diag() { p - 1 } else { p + 1 })
}
