//! Exact integer linear algebra: fraction-free elimination for determinants,
//! leading principal minors and scaled inverses.
//!
//! Integer matrices are dense `Vec<Vec<_>>` in row-major order.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

fn is_square<T>(m: &[Vec<T>]) -> bool {
    m.iter().all(|row| row.len() == m.len())
}

fn to_i128(m: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    m.iter().map(|row| row.iter().map(|x| x.to_i128()).collect()).collect()
}

/// Bareiss without pivoting; stops at the first zero pivot.
/// Returns the minors found so far, or `None` on overflow.
fn bareiss_i128(mut a: Vec<Vec<i128>>) -> Option<Vec<i128>> {
    let n = a.len();
    let mut minors = Vec::with_capacity(n);
    let mut prev = 1i128;
    for k in 0..n {
        let pivot = a[k][k];
        minors.push(pivot);
        if pivot == 0 {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = pivot.checked_mul(a[i][j])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = num / prev;
            }
        }
        prev = pivot;
    }
    Some(minors)
}

fn bareiss_big(mut a: IntMatrix) -> Vec<BigInt> {
    let n = a.len();
    let mut minors = Vec::with_capacity(n);
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = a[k][k].clone();
        minors.push(pivot.clone());
        if pivot.is_zero() {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &pivot * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = pivot;
    }
    minors
}

fn leading(m: &[Vec<BigInt>], k: usize) -> IntMatrix {
    m[..k].iter().map(|row| row[..k].to_vec()).collect()
}

/// Leading principal minors of orders `1..=n`.
///
/// # Panics
/// If `m` is not square.
pub fn leading_minors(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    assert!(is_square(m), "matrix must be square");
    let mut minors: Vec<BigInt> = match to_i128(m).and_then(bareiss_i128) {
        Some(v) => v.into_iter().map(BigInt::from).collect(),
        None => bareiss_big(m.to_vec()),
    };
    // A zero pivot ends the unpivoted sweep; finish order by order.
    for k in minors.len() + 1..=m.len() {
        minors.push(determinant(&leading(m, k)));
    }
    minors
}

/// Determinant by fraction-free elimination with row pivoting.
///
/// # Panics
/// If `m` is not square.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    assert!(is_square(m), "matrix must be square");
    let n = m.len();
    let mut a = m.to_vec();
    let mut prev = BigInt::one();
    let mut negate = false;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        let pivot = a[k][k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &pivot * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = pivot;
    }
    if n == 0 {
        return BigInt::one();
    }
    if negate {
        -prev
    } else {
        prev
    }
}

/// `inverse = scaled / denominator` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactInverse {
    pub denominator: BigInt,
    pub scaled: IntMatrix,
}

impl ExactInverse {
    /// Entry `(r, c)` of the inverse, rounded to the nearest double.
    pub fn entry_f64(&self, r: usize, c: usize) -> f64 {
        ratio_to_f64(&self.scaled[r][c], &self.denominator)
    }
}

/// Fraction-free Gauss-Jordan on `[A | I]`. Returns `None` if `A` is singular.
///
/// # Panics
/// If `m` is not square.
pub fn exact_inverse(m: &[Vec<BigInt>]) -> Option<ExactInverse> {
    assert!(is_square(m), "matrix must be square");
    let n = m.len();
    let mut a: IntMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[i][k].is_zero())?;
        a.swap(p, k);
        let pivot = a[k][k].clone();
        for i in 0..n {
            if i == k {
                continue;
            }
            let factor = a[i][k].clone();
            for j in 0..2 * n {
                if j == k {
                    continue;
                }
                let num = &pivot * &a[i][j] - &factor * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = pivot;
    }
    let scaled = a.into_iter().map(|row| row[n..].to_vec()).collect();
    Some(ExactInverse {
        denominator: prev,
        scaled,
    })
}

/// `num / den` correctly scaled into a double, even when both exceed `f64::MAX`.
///
/// # Panics
/// If `den` is zero.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    let negative = num.is_negative() != den.is_negative();
    let (n, d) = (num.abs(), den.abs());
    // Shift so the integer quotient carries at least 64 significant bits.
    let shift = 64 + d.bits() as i64 - n.bits() as i64;
    let q = if shift >= 0 {
        (n << shift as usize) / d
    } else {
        n / (d << (-shift) as usize)
    };
    let value = libm::ldexp(q.to_f64().unwrap_or(f64::INFINITY), -shift as i32);
    if negative {
        -value
    } else {
        value
    }
}

pub fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}
