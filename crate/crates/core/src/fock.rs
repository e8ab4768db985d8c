//! Truncated two-mode Fock space.
//!
//! Every vector and matrix here lives on `span{|a,b> : a, b <= n_max}` with the
//! row-major pairing `(a, b) -> a * (n_max + 1) + b`, mode A first. States are
//! stored as dense hermitian matrices; truncation deficits are carried along as
//! `tail_mass` rather than silently dropped.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest photon number kept per mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockCutoff {
    n_max: usize,
}

impl FockCutoff {
    pub const MIN: usize = 2;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < Self::MIN {
            return Err(Error::InvalidCutoff(n_max));
        }
        Ok(FockCutoff { n_max })
    }

    pub fn n_max(self) -> usize {
        self.n_max
    }

    /// Single-mode dimension `n_max + 1`.
    pub fn mode_dim(self) -> usize {
        self.n_max + 1
    }

    /// Two-mode dimension `(n_max + 1)^2`.
    pub fn dim(self) -> usize {
        self.mode_dim() * self.mode_dim()
    }

    pub fn index(self, a: usize, b: usize) -> usize {
        debug_assert!(a <= self.n_max && b <= self.n_max);
        a * self.mode_dim() + b
    }

    pub fn pair(self, i: usize) -> (usize, usize) {
        (i / self.mode_dim(), i % self.mode_dim())
    }
}

/// Numerical tolerances shared by the whole pipeline. All absolute, on
/// matrices pre-scaled to unit trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub norm: f64,
    /// Relative residual norm below which a vector counts as linearly dependent.
    pub dependence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-10,
            trace: 1e-10,
            norm: 1e-10,
            dependence: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleModeVector {
    coeffs: Vec<Complex64>,
    cutoff: FockCutoff,
}

impl SingleModeVector {
    pub fn new(coeffs: Vec<Complex64>, cutoff: FockCutoff) -> Result<Self> {
        if coeffs.len() != cutoff.mode_dim() {
            return Err(Error::DimensionMismatch {
                expected: cutoff.mode_dim(),
                found: coeffs.len(),
            });
        }
        Ok(SingleModeVector { coeffs, cutoff })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// `|self> (x) |other>`.
    pub fn tensor(&self, other: &SingleModeVector) -> Result<TwoModeVector> {
        if self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff.mode_dim(),
                found: other.cutoff.mode_dim(),
            });
        }
        let mut coeffs = Vec::with_capacity(self.cutoff.dim());
        for a in &self.coeffs {
            for b in &other.coeffs {
                coeffs.push(a * b);
            }
        }
        Ok(TwoModeVector {
            coeffs,
            cutoff: self.cutoff,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeVector {
    coeffs: Vec<Complex64>,
    cutoff: FockCutoff,
}

impl TwoModeVector {
    pub fn new(coeffs: Vec<Complex64>, cutoff: FockCutoff) -> Result<Self> {
        if coeffs.len() != cutoff.dim() {
            return Err(Error::DimensionMismatch {
                expected: cutoff.dim(),
                found: coeffs.len(),
            });
        }
        Ok(TwoModeVector { coeffs, cutoff })
    }

    pub fn zeros(cutoff: FockCutoff) -> Self {
        TwoModeVector {
            coeffs: vec![ZERO; cutoff.dim()],
            cutoff,
        }
    }

    /// The number state `|a, b>`.
    pub fn basis(cutoff: FockCutoff, a: usize, b: usize) -> Result<Self> {
        let n_max = cutoff.n_max();
        if a > n_max || b > n_max {
            return Err(Error::CutoffExceeded { n: a.max(b), n_max });
        }
        let mut v = Self::zeros(cutoff);
        v.coeffs[cutoff.index(a, b)] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn amplitude(&self, a: usize, b: usize) -> Complex64 {
        self.coeffs[self.cutoff.index(a, b)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &TwoModeVector) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: Complex64, other: &TwoModeVector) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += factor * o;
        }
    }

    pub fn normalized(&self) -> Result<TwoModeVector> {
        let n = crate::math::sqrt(self.norm_sqr());
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        let mut out = self.clone();
        out.scale(Complex64::new(1.0 / n, 0.0));
        Ok(out)
    }

    /// Apply the mode swap `|a, b> -> |b, a>`.
    pub fn swapped(&self) -> TwoModeVector {
        let c = self.cutoff;
        let mut out = Self::zeros(c);
        for a in 0..c.mode_dim() {
            for b in 0..c.mode_dim() {
                out.coeffs[c.index(b, a)] = self.coeffs[c.index(a, b)];
            }
        }
        out
    }

    /// `weight * |self><self|` accumulated into `m`, touching only nonzero amplitudes.
    pub(crate) fn accumulate_projector(&self, weight: f64, m: &mut CMatrix) {
        let support: Vec<(usize, Complex64)> = self
            .coeffs
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, c)| *c != ZERO)
            .collect();
        for &(i, ci) in &support {
            for &(j, cj) in &support {
                m[(i, j)] += ci * cj.conj() * weight;
            }
        }
    }
}

/// A (possibly unnormalized) hermitian operator on the truncated two-mode space.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    matrix: CMatrix,
    cutoff: FockCutoff,
    tail_mass: f64,
}

impl TwoModeState {
    /// Validates shape and hermiticity; `tail_mass` is stored as given.
    pub fn new(matrix: CMatrix, cutoff: FockCutoff, tail_mass: f64, tol: &Tolerances) -> Result<Self> {
        check_square(&matrix, cutoff.dim())?;
        check_hermitian(&matrix, tol.herm)?;
        if !(0.0..=1.0).contains(&tail_mass) {
            return Err(Error::invalid("tail_mass must lie in [0, 1]"));
        }
        Ok(TwoModeState {
            matrix,
            cutoff,
            tail_mass,
        })
    }

    /// A truncated operator whose missing probability `1 - trace` (clamped at 0)
    /// is recorded as `tail_mass`.
    pub fn unnormalized(matrix: CMatrix, cutoff: FockCutoff, tol: &Tolerances) -> Result<Self> {
        check_square(&matrix, cutoff.dim())?;
        let deficit = 1.0 - matrix.trace().re;
        Self::new(matrix, cutoff, deficit.clamp(0.0, 1.0), tol)
    }

    pub fn pure(v: &TwoModeVector) -> TwoModeState {
        let c = v.cutoff();
        let mut m = CMatrix::zeros(c.dim(), c.dim());
        v.accumulate_projector(1.0, &mut m);
        TwoModeState {
            matrix: m,
            cutoff: c,
            tail_mass: 0.0,
        }
    }

    pub(crate) fn from_parts(matrix: CMatrix, cutoff: FockCutoff, tail_mass: f64) -> Self {
        debug_assert_eq!(matrix.nrows(), cutoff.dim());
        TwoModeState {
            matrix,
            cutoff,
            tail_mass,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn entry(&self, ab: (usize, usize), cd: (usize, usize)) -> Complex64 {
        let c = self.cutoff;
        self.matrix[(c.index(ab.0, ab.1), c.index(cd.0, cd.1))]
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix)
    }

    /// `max |(Pi rho Pi) - rho|` with `Pi` the mode swap; zero for swap-invariant states.
    pub fn swap_residual(&self) -> f64 {
        let c = self.cutoff;
        let d = c.mode_dim();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                for x in 0..d {
                    for y in 0..d {
                        let lhs = self.matrix[(c.index(b, a), c.index(y, x))];
                        let rhs = self.matrix[(c.index(a, b), c.index(x, y))];
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &TwoModeState) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

pub(crate) fn check_square<T>(m: &DMatrix<T>, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let deviation = hermiticity_residual(m);
    if deviation > tol || deviation.is_nan() {
        return Err(Error::NonHermitian {
            deviation,
            tolerance: tol,
        });
    }
    Ok(())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn real_part_symmetrized(m: &CMatrix) -> RMatrix {
    let n = m.nrows();
    RMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re))
}

fn symmetrized(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

fn sort_ascending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Full spectrum of a hermitian matrix, ascending.
///
/// Purely real input takes the real symmetric path, which is several times
/// faster and gives bit-identical results across calls.
pub fn hermitian_eigenvalues(m: &CMatrix, tol_herm: f64) -> Result<Vec<f64>> {
    check_hermitian(m, tol_herm)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let values: Vec<f64> = if is_real(m) {
        real_part_symmetrized(m)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    } else {
        symmetrized(m).symmetric_eigenvalues().iter().copied().collect()
    };
    Ok(sort_ascending(values))
}

pub fn real_symmetric_eigenvalues(m: &RMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let n = m.nrows();
    let sym = RMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    sort_ascending(sym.symmetric_eigenvalues().iter().copied().collect())
}

/// Largest eigenvalue and a unit eigenvector of a small hermitian matrix.
pub(crate) fn top_eigenpair(m: &CMatrix) -> (f64, Vec<Complex64>) {
    let eig = symmetrized(m).symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let v = eig.eigenvectors.column(best).iter().copied().collect();
    (eig.eigenvalues[best], v)
}

/// `true` iff `m + shift * I` admits a Cholesky factorization, i.e. the
/// smallest eigenvalue of `m` exceeds `-shift` (up to rounding).
pub fn is_positive_definite_shifted(m: &CMatrix, shift: f64) -> bool {
    let n = m.nrows();
    if n == 0 {
        return true;
    }
    if is_real(m) {
        let mut r = real_part_symmetrized(m);
        for i in 0..n {
            r[(i, i)] += shift;
        }
        Cholesky::new(r).is_some()
    } else {
        let mut c = symmetrized(m);
        for i in 0..n {
            c[(i, i)] += Complex64::new(shift, 0.0);
        }
        Cholesky::new(c).is_some()
    }
}

#[derive(Clone, Debug)]
pub struct Orthonormalized {
    pub vectors: Vec<TwoModeVector>,
    pub rank: usize,
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Inputs whose
/// residual norm, relative to their own norm, falls below `dep_tol` are dropped.
pub fn orthonormalize(vs: &[TwoModeVector], dep_tol: f64) -> Result<Orthonormalized> {
    let first = vs.first().ok_or(Error::EmptyInput)?;
    let cutoff = first.cutoff();
    let mut basis: Vec<TwoModeVector> = Vec::new();
    for v in vs {
        if v.cutoff() != cutoff {
            return Err(Error::DimensionMismatch {
                expected: cutoff.dim(),
                found: v.cutoff().dim(),
            });
        }
        let original = crate::math::sqrt(v.norm_sqr());
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let overlap = q.inner(&w);
                w.axpy(-overlap, q);
            }
        }
        let residual = crate::math::sqrt(w.norm_sqr());
        if residual / original < dep_tol {
            continue;
        }
        w.scale(Complex64::new(1.0 / residual, 0.0));
        basis.push(w);
    }
    let rank = basis.len();
    Ok(Orthonormalized { vectors: basis, rank })
}

/// `sum_k |q_k><q_k|` for an orthonormal family.
pub fn projector(vs: &[TwoModeVector], cutoff: FockCutoff) -> CMatrix {
    let mut p = CMatrix::zeros(cutoff.dim(), cutoff.dim());
    for v in vs {
        v.accumulate_projector(1.0, &mut p);
    }
    p
}

/// Rescale to unit trace; `tail_mass` is carried over unchanged.
pub fn trace_and_renormalize(s: &TwoModeState) -> Result<TwoModeState> {
    let t = s.trace();
    if !(t > 0.0) {
        return Err(Error::ZeroTrace(t));
    }
    let matrix = s.matrix.map(|z| z / t);
    Ok(TwoModeState {
        matrix,
        cutoff: s.cutoff,
        tail_mass: s.tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    #[test]
    fn cutoff_rejects_below_two() {
        assert!(matches!(FockCutoff::new(1), Err(Error::InvalidCutoff(1))));
        let k = cut(2);
        assert_eq!(k.dim(), 9);
        assert_eq!(k.index(1, 2), 5);
        assert_eq!(k.pair(5), (1, 2));
    }

    #[test]
    fn eigenvalues_of_offdiagonal_half() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)]);
        let e = hermitian_eigenvalues(&m, 1e-10).unwrap();
        assert!((e[0] + 0.5).abs() < 1e-15 && (e[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_identity() {
        let e = hermitian_eigenvalues(&CMatrix::identity(3, 3), 1e-10).unwrap();
        assert_eq!(e, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[1, i], [-i, 1]] has spectrum {0, 2}.
        let i = Complex64::new(0.0, 1.0);
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), i, -i, c(1.0)]);
        let e = hermitian_eigenvalues(&m, 1e-10).unwrap();
        assert!(e[0].abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            hermitian_eigenvalues(&m, 1e-10),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn eigenvalues_are_deterministic() {
        let n = 30;
        let m = CMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j {
                0.1 * a
            } else if i > j {
                -0.1 * a
            } else {
                0.0
            };
            Complex64::new(libm::sin(a * 1.3 + b * 0.7), im)
        });
        let e1 = hermitian_eigenvalues(&m, 1e-10).unwrap();
        let e2 = hermitian_eigenvalues(&m, 1e-10).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn orthonormalize_drops_duplicates() {
        let k = cut(2);
        let v = TwoModeVector::basis(k, 0, 0).unwrap();
        let out = orthonormalize(&[v.clone(), v], 1e-12).unwrap();
        assert_eq!(out.rank, 1);
    }

    #[test]
    fn orthonormalize_drops_below_dependence_tolerance() {
        let k = cut(2);
        let v = TwoModeVector::basis(k, 0, 0).unwrap();
        let mut w = v.clone();
        w.axpy(c(1e-20), &TwoModeVector::basis(k, 1, 1).unwrap());
        assert_eq!(orthonormalize(&[v, w], 1e-12).unwrap().rank, 1);
    }

    #[test]
    fn orthonormalize_rejects_empty() {
        assert!(matches!(orthonormalize(&[], 1e-12), Err(Error::EmptyInput)));
    }

    #[test]
    fn renormalize_doubled_projector() {
        let k = cut(2);
        let v = TwoModeVector::basis(k, 0, 0).unwrap();
        let p = TwoModeState::pure(&v);
        let doubled = TwoModeState::new(p.matrix().map(|z| z * 2.0), k, 0.0, &Tolerances::default()).unwrap();
        let r = trace_and_renormalize(&doubled).unwrap();
        assert_eq!(r.matrix(), p.matrix());
    }

    #[test]
    fn renormalize_truncated_thermal_keeps_tail() {
        // Geometric weights 2^-(n+1) on |n, 0> up to n = 20; missing mass is 2^-21.
        let k = cut(20);
        let mut m = CMatrix::zeros(k.dim(), k.dim());
        for n in 0..=20 {
            let i = k.index(n, 0);
            m[(i, i)] = c(libm::ldexp(1.0, -(n as i32) - 1));
        }
        let s = TwoModeState::unnormalized(m, k, &Tolerances::default()).unwrap();
        assert_eq!(s.tail_mass(), libm::ldexp(1.0, -21));
        let r = trace_and_renormalize(&s).unwrap();
        assert!((r.trace() - 1.0).abs() < 1e-15);
        assert_eq!(r.tail_mass(), libm::ldexp(1.0, -21));
    }

    #[test]
    fn renormalize_zero_matrix_fails() {
        let k = cut(2);
        let z = TwoModeState::new(CMatrix::zeros(9, 9), k, 0.0, &Tolerances::default()).unwrap();
        assert!(matches!(trace_and_renormalize(&z), Err(Error::ZeroTrace(_))));
    }

    #[test]
    fn shifted_cholesky_matches_spectrum() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)]);
        assert!(!is_positive_definite_shifted(&m, 0.49));
        assert!(is_positive_definite_shifted(&m, 0.51));
    }
}
