//! Hankel moment matrices of a photon distribution and the Hadamard
//! factorization of the partially transposed blocks.
//!
//! Block `M_i` of the beam-split state factors entrywise as `A_i o B_i`, with
//! `A_i[r][c] = p_{i+r+c}` carrying the statistics and `B_i` fixed by the
//! balanced beam splitter:
//!
//! ```text
//! B_i[r][c] = 2^-(i+r+c) (i+r+c)! / sqrt(r! c! (i+r)! (i+c)!)
//! ```
//!
//! `B_i` is positive definite, so by the Schur product theorem a PSD `A_0`
//! (whose principal submatrices are the `A_i`) makes every block PSD.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exact::{exact_inverse, factorial, leading_minors};
use crate::fock::{real_symmetric_eigenvalues, RMatrix};
use crate::math::{self, ln_factorial, sqrt_binomial};
use crate::states::PhotonDistribution;

/// Largest `n` with `n!` representable in a `u64`.
pub const MAX_EXACT_FACTORIAL: usize = 20;

/// Default Hankel order for a cutoff: `min(n_max / 2, 20)`.
pub fn default_order(n_max: usize) -> usize {
    (n_max / 2).min(20)
}

/// `A_i[r][c] = p_{i+r+c}`, zero past the cutoff.
pub fn hankel_a(d: &PhotonDistribution, i: usize, order: usize) -> Result<RMatrix> {
    let n_max = d.cutoff().n_max();
    if order + i > n_max {
        return Err(Error::CutoffExceeded { n: order + i, n_max });
    }
    Ok(RMatrix::from_fn(order, order, |r, c| d.p(i + r + c)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PsdVerdict {
    Psd,
    NotPsd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SylvesterReport {
    /// From the smallest eigenvalue; the minors are diagnostics only.
    pub verdict: PsdVerdict,
    pub min_eigenvalue: f64,
    /// Leading principal minors, orders `1..=n`.
    pub minors: Vec<f64>,
    /// Order of the first minor below `-tol`.
    pub first_failing_minor: Option<usize>,
    pub tol: f64,
}

/// PSD test of a real symmetric matrix with leading-minor diagnostics.
pub fn sylvester_psd_test(m: &RMatrix, tol: f64) -> SylvesterReport {
    let n = m.nrows();
    let min_eigenvalue = real_symmetric_eigenvalues(m).first().copied().unwrap_or(0.0);
    let minors: Vec<f64> = (1..=n)
        .map(|k| m.view((0, 0), (k, k)).into_owned().determinant())
        .collect();
    let first_failing_minor = minors.iter().position(|&x| x < -tol).map(|k| k + 1);
    let verdict = if min_eigenvalue >= -tol {
        PsdVerdict::Psd
    } else {
        PsdVerdict::NotPsd
    };
    SylvesterReport {
        verdict,
        min_eigenvalue,
        minors,
        first_failing_minor,
        tol,
    }
}

/// Default absolute tolerance for Hankel PSD tests.
pub const HANKEL_TOL: f64 = 1e-12;

/// PSD test of `A_0`. A PSD verdict means the balanced beam-split state is
/// PPT at this truncation; `NotPsd` on its own proves nothing.
pub fn hankel_ppt_test(d: &PhotonDistribution, order: usize) -> Result<SylvesterReport> {
    let n_max = d.cutoff().n_max();
    if 2 * order > n_max {
        return Err(Error::CutoffExceeded { n: 2 * order, n_max });
    }
    Ok(sylvester_psd_test(&hankel_a(d, 0, order)?, HANKEL_TOL))
}

/// `C_j[r][c] = (j+r+c)!` in exact integers.
pub fn exact_factorial_matrix(j: usize, order: usize) -> Result<Vec<Vec<u64>>> {
    if order > 0 && j + 2 * (order - 1) > MAX_EXACT_FACTORIAL {
        let max_admissible = if j > MAX_EXACT_FACTORIAL {
            0
        } else {
            (MAX_EXACT_FACTORIAL - j) / 2 + 1
        };
        return Err(Error::Overflow { max_admissible });
    }
    let fact = |n: usize| (1..=n as u64).product::<u64>();
    Ok((0..order)
        .map(|r| (0..order).map(|c| fact(j + r + c)).collect())
        .collect())
}

/// `C_j` as arbitrary-precision integers, for any size.
pub fn factorial_matrix_big(j: usize, order: usize) -> Vec<Vec<BigInt>> {
    (0..order)
        .map(|r| (0..order).map(|c| factorial((j + r + c) as u32)).collect())
        .collect()
}

/// The six-way factorization `B_j = C o D o E o E^T o F o F^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct HadamardFactors {
    pub j: usize,
    pub order: usize,
    /// Floating `C_j`; exact whenever `exact_c` is present.
    pub c: RMatrix,
    /// `None` once `(j + 2K - 2)! > 20!`.
    pub exact_c: Option<Vec<Vec<u64>>>,
    pub d: RMatrix,
    pub e: RMatrix,
    pub f: RMatrix,
}

impl HadamardFactors {
    pub fn c_overflowed(&self) -> bool {
        self.exact_c.is_none()
    }

    pub fn product(&self) -> RMatrix {
        let et = self.e.transpose();
        let ft = self.f.transpose();
        RMatrix::from_fn(self.order, self.order, |r, c| {
            self.c[(r, c)] * self.d[(r, c)] * self.e[(r, c)] * et[(r, c)] * self.f[(r, c)] * ft[(r, c)]
        })
    }
}

pub fn hadamard_factors(j: usize, order: usize) -> HadamardFactors {
    let exact_c = exact_factorial_matrix(j, order).ok();
    let c = match &exact_c {
        Some(ints) => RMatrix::from_fn(order, order, |r, s| ints[r][s] as f64),
        None => RMatrix::from_fn(order, order, |r, s| math::exp(ln_factorial(j + r + s))),
    };
    let d = RMatrix::from_fn(order, order, |r, s| libm::ldexp(1.0, -((j + r + s) as i32)));
    let e = RMatrix::from_fn(order, order, |r, _| math::exp(-0.5 * ln_factorial(r)));
    let f = RMatrix::from_fn(order, order, |r, _| math::exp(-0.5 * ln_factorial(j + r)));
    HadamardFactors {
        j,
        order,
        c,
        exact_c,
        d,
        e,
        f,
    }
}

/// `B_j` from its Hadamard factors.
pub fn reconstruct_b(j: usize, order: usize) -> RMatrix {
    hadamard_factors(j, order).product()
}

/// Beam-splitter weight `2^-n sqrt(C(n, k) C(n, k'))`.
pub fn splitter_weight(n: usize, k: usize, k2: usize) -> f64 {
    libm::ldexp(sqrt_binomial(n, k) * sqrt_binomial(n, k2), -(n as i32))
}

/// `B_j[r][c] = w(j+r+c; j+r, r)` evaluated from binomials directly.
pub fn b_direct(j: usize, order: usize) -> RMatrix {
    RMatrix::from_fn(order, order, |r, c| splitter_weight(j + r + c, j + r, r))
}

/// Smallest eigenvalue of `B_j`, accurate to full relative precision.
///
/// `B_j = W C_j W` with `W` diagonal, so `B_j^-1 = W^-1 C_j^-1 W^-1` is
/// assembled from the exact integer inverse of `C_j` and the result is
/// `1 / lambda_max(B_j^-1)`. Direct eigensolves of `B_j` lose it to roundoff
/// once it drops below `1e-16`.
pub fn b_min_eigenvalue(j: usize, order: usize) -> f64 {
    if order == 0 {
        return 0.0;
    }
    let inv = exact_inverse(&factorial_matrix_big(j, order)).expect("factorial Hankel matrices are nonsingular");
    // ln w_r = -(j/2 + r) ln 2 - (ln r! + ln (j+r)!) / 2
    let ln_w = |r: usize| {
        -((j as f64) / 2.0 + r as f64) * core::f64::consts::LN_2 - 0.5 * (ln_factorial(r) + ln_factorial(j + r))
    };
    let b_inv = RMatrix::from_fn(order, order, |r, c| {
        inv.entry_f64(r, c) * math::exp(-(ln_w(r) + ln_w(c)))
    });
    let top = real_symmetric_eigenvalues(&b_inv)
        .last()
        .copied()
        .unwrap_or(f64::INFINITY);
    1.0 / top
}

/// Exact leading principal minors of `C_j`.
pub fn factorial_minors(j: usize, order: usize) -> Vec<BigInt> {
    leading_minors(&factorial_matrix_big(j, order))
}

/// `A_i o B_i`: the leading `order x order` corner of block `M_i`.
pub fn reconstruct_block_from_hankel(d: &PhotonDistribution, i: usize, order: usize) -> Result<RMatrix> {
    let a = hankel_a(d, i, order)?;
    Ok(a.component_mul(&reconstruct_b(i, order)))
}

/// `A_i`, `B_i` and the factors of `B_i` for a range of block indices.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelFamily {
    pub order: usize,
    pub a: BTreeMap<usize, RMatrix>,
    pub b: BTreeMap<usize, RMatrix>,
    pub factors: BTreeMap<usize, HadamardFactors>,
}

impl HankelFamily {
    pub fn build(d: &PhotonDistribution, indices: impl IntoIterator<Item = usize>, order: usize) -> Result<Self> {
        let mut family = HankelFamily {
            order,
            a: BTreeMap::new(),
            b: BTreeMap::new(),
            factors: BTreeMap::new(),
        };
        for i in indices {
            family.a.insert(i, hankel_a(d, i, order)?);
            let factors = hadamard_factors(i, order);
            family.b.insert(i, factors.product());
            family.factors.insert(i, factors);
        }
        Ok(family)
    }

    pub fn block(&self, i: usize) -> Option<RMatrix> {
        Some(self.a.get(&i)?.component_mul(self.b.get(&i)?))
    }
}
