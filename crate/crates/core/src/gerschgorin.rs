//! Gerschgorin discs, diagonal-scaling positivity certificates and the
//! first-order perturbation audit of the squeezed admixture.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{real_symmetric_eigenvalues, CMatrix, FockCutoff, RMatrix, TwoModeState};
use crate::math;
use crate::partial_transpose::{partial_transpose_b, BlockIndex};
use crate::states::{
    beam_split_diagonal_state, beam_split_number_state, build_mixture, MixtureSpec, PhotonDistribution,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc {
    pub center: f64,
    pub radius: f64,
}

impl Disc {
    pub fn left_edge(&self) -> f64 {
        self.center - self.radius
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        (x - self.center).abs() <= self.radius + slack
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GerschgorinReport {
    pub discs: Vec<Disc>,
    pub scaled: Option<Vec<Disc>>,
    /// Smallest `center - radius`, over the scaled discs when a scaling was given.
    pub min_disc_edge: f64,
}

impl GerschgorinReport {
    /// Whether `x` lies in the union of the unscaled discs, and of the scaled ones if present.
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        let inside = |discs: &[Disc]| discs.iter().any(|d| d.contains(x, slack));
        inside(&self.discs) && self.scaled.as_deref().is_none_or(inside)
    }
}

fn discs_of(m: &CMatrix, d: Option<&[f64]>) -> Vec<Disc> {
    let n = m.nrows();
    (0..n)
        .map(|i| {
            let weighted: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| d.map_or(1.0, |d| d[j]) * m[(i, j)].norm())
                .sum();
            Disc {
                center: m[(i, i)].re,
                radius: weighted / d.map_or(1.0, |d| d[i]),
            }
        })
        .collect()
}

fn min_edge(discs: &[Disc]) -> f64 {
    discs.iter().map(Disc::left_edge).fold(f64::INFINITY, f64::min)
}

/// Discs of `m`, and of `D^-1 M D` when a positive diagonal `D` is supplied.
pub fn gerschgorin_discs(m: &CMatrix, scaling: Option<&[f64]>) -> Result<GerschgorinReport> {
    let discs = discs_of(m, None);
    let scaled = match scaling {
        Some(d) => {
            if d.len() != m.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: m.nrows(),
                    found: d.len(),
                });
            }
            if let Some(index) = d.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidScaling { index });
            }
            Some(discs_of(m, Some(d)))
        }
        None => None,
    };
    let min_disc_edge = min_edge(scaled.as_deref().unwrap_or(&discs));
    Ok(GerschgorinReport {
        discs,
        scaled,
        min_disc_edge,
    })
}

/// Rounds of the certificate search before giving up.
pub const CERTIFICATE_ROUNDS: usize = 100;

/// Look for a positive diagonal `D` putting every disc of `D^-1 M D` in `[0, inf)`.
///
/// Such a `D` exists iff the spectral radius of `Diag^-1 |Off|` is at most one
/// (see [`scaling_obstruction`]). The search starts from the diagonal itself
/// and runs a damped power iteration `d <- (J d + d) / 2` towards the Perron
/// vector of `J = Diag^-1 |Off|`. `None` is not a negativity verdict.
pub fn scaled_positivity_search(m: &CMatrix) -> Option<Vec<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let off = |i: usize, j: usize| if i == j { 0.0 } else { m[(i, j)].norm() };
    let row_off: Vec<f64> = (0..n).map(|i| (0..n).map(|j| off(i, j)).sum()).collect();
    if (0..n).any(|i| diag[i] < 0.0 || (diag[i] == 0.0 && row_off[i] > 0.0)) {
        return None;
    }
    let scale = diag.iter().copied().fold(0.0, f64::max);
    let floor = f64::MIN_POSITIVE.max(f64::EPSILON * scale);
    let works = |d: &[f64]| {
        (0..n).all(|i| {
            let s: f64 = (0..n).map(|j| off(i, j) * d[j]).sum();
            diag[i] * d[i] >= s
        })
    };
    let ones = vec![1.0; n];
    if works(&ones) {
        return Some(ones);
    }
    let mut d: Vec<f64> = diag.iter().map(|&x| x + floor).collect();
    for _ in 0..CERTIFICATE_ROUNDS {
        if works(&d) {
            let top = d.iter().copied().fold(0.0, f64::max);
            return Some(d.iter().map(|x| x / top).collect());
        }
        let jd: Vec<f64> = (0..n)
            .map(|i| {
                if diag[i] == 0.0 {
                    d[i]
                } else {
                    (0..n).map(|j| off(i, j) * d[j]).sum::<f64>() / diag[i]
                }
            })
            .collect();
        let top = jd.iter().zip(&d).map(|(a, b)| 0.5 * (a + b)).fold(0.0, f64::max);
        if !(top > 0.0) {
            return None;
        }
        d = jd
            .iter()
            .zip(&d)
            .map(|(a, b)| (0.5 * (a + b) / top).max(floor))
            .collect();
    }
    None
}

/// Spectral radius of `Diag^-1 |Off|`; a scaling certificate exists iff it is `<= 1`.
///
/// Rows and columns that vanish entirely are dropped. Infinite when a row has a
/// nonpositive diagonal but nonzero off-diagonal entries.
pub fn scaling_obstruction(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let live: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| m[(i, j)].norm() > 0.0)).collect();
    if live.iter().any(|&i| !(m[(i, i)].re > 0.0)) {
        return f64::INFINITY;
    }
    // Diag^-1 |Off| is similar to the symmetric Diag^-1/2 |Off| Diag^-1/2.
    let k = live.len();
    let s = RMatrix::from_fn(k, k, |r, c| {
        if r == c {
            0.0
        } else {
            let (i, j) = (live[r], live[c]);
            m[(i, j)].norm() / math::sqrt(m[(i, i)].re * m[(j, j)].re)
        }
    });
    real_symmetric_eigenvalues(&s)
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloorTerms {
    pub p2_quarter: f64,
    pub p1_half: f64,
    /// `sqrt(1 - |omega|^2)` evaluated at the bound itself.
    pub vacuum_weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaBound {
    pub bound: f64,
    pub floor_terms: FloorTerms,
    /// Decades between the bound and the leading decade of the floor term.
    pub safety_exponent: i32,
}

/// Order-of-magnitude rule `10^(floor(log10(min(p_2/4, p_1/2))) - 1)`.
///
/// A heuristic reading of "|omega| << p_2/4 < p_1/2"; eigenvalue checks
/// remain the authoritative PPT verdict.
pub fn omega_upper_bound(d: &PhotonDistribution, lambda: f64) -> Result<OmegaBound> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid(format!(
            "mixing weight must lie in (0, 1), got {lambda}"
        )));
    }
    let (p1, p2) = (d.p(1), d.p(2));
    if !(p1 > 0.0 && p2 > 0.0) {
        return Err(Error::invalid("bound needs p_1 > 0 and p_2 > 0"));
    }
    let safety_exponent = 1;
    let floor = (p2 / 4.0).min(p1 / 2.0);
    let exponent = math::floor(math::log10(floor)) as i32 - safety_exponent;
    let bound = libm::pow(10.0, exponent as f64);
    Ok(OmegaBound {
        bound,
        floor_terms: FloorTerms {
            p2_quarter: p2 / 4.0,
            p1_half: p1 / 2.0,
            vacuum_weight: math::sqrt(1.0 - bound * bound),
        },
        safety_exponent,
    })
}

/// One row of the partial transpose touched by the first-order perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedRow {
    pub row: (usize, usize),
    pub block: BlockIndex,
    /// Diagonal entry of the exact partial transpose.
    pub center: f64,
    /// Deleted row sum inside the block, perturbation excluded.
    pub unperturbed_radius: f64,
    /// Row sum of the first-order perturbation with its angle factors.
    pub exact_perturbation: f64,
    /// The same with every angle factor replaced by one.
    pub overestimate: f64,
}

impl PerturbedRow {
    pub fn exact_left_edge(&self) -> f64 {
        self.center - self.unperturbed_radius - self.exact_perturbation
    }

    pub fn overestimate_left_edge(&self) -> f64 {
        self.center - self.unperturbed_radius - self.overestimate
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockCertificate {
    pub block: BlockIndex,
    /// Positive diagonal scaling if the search found one.
    pub scaling: Option<Vec<f64>>,
    /// Spectral radius of `Diag^-1 |Off|`; above one no scaling can exist.
    pub obstruction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationAudit {
    pub rows: Vec<PerturbedRow>,
    /// `max |entry|` of the exact partial transpose minus the first-order model.
    pub remainder_norm: f64,
    pub certificates: Vec<BlockCertificate>,
}

impl PerturbationAudit {
    pub fn certified(&self) -> bool {
        self.certificates.iter().all(|c| c.scaling.is_some())
    }
}

/// Blocks whose leading row carries the perturbation.
pub const PERTURBED_BLOCKS: [i32; 5] = [0, 1, -1, 2, -2];

/// First-order partial transpose of the mixture:
/// `lambda rho^T_B + (1 - lambda) sqrt(1 - |w|^2) (|00><00| + (w/sqrt2)|phi_20><00| + h.c.)^T_B`,
/// where `phi_20 = U(theta)|2,0>`. Accepts `w = 0`.
pub fn first_order_model(
    distribution: &PhotonDistribution,
    lambda: f64,
    omega: Complex64,
    theta: f64,
    cutoff: FockCutoff,
) -> Result<TwoModeState> {
    let rho = beam_split_diagonal_state(distribution, FRAC_PI_4, cutoff)?;
    let mut m = rho.into_matrix().map(|z| z * lambda);
    let weight = (1.0 - lambda) * math::sqrt(1.0 - omega.norm_sqr());
    let vac = cutoff.index(0, 0);
    m[(vac, vac)] += Complex64::new(weight, 0.0);
    let coupling = omega * (weight / SQRT_2);
    let phi = beam_split_number_state(2, theta, cutoff)?;
    for (i, amp) in phi.coeffs().iter().enumerate() {
        if amp.norm() > 0.0 {
            m[(i, vac)] += coupling * amp;
            m[(vac, i)] += (coupling * amp).conj();
        }
    }
    Ok(partial_transpose_b(&TwoModeState::from_parts(m, cutoff, 0.0)))
}

/// Perturbation matrix `P` alone: the first-order model minus its `omega = 0` value
/// and minus the `sqrt(1 - |w|^2)` rescaling of the vacuum weight.
fn perturbation_only(lambda: f64, omega: Complex64, theta: f64, cutoff: FockCutoff) -> Result<CMatrix> {
    let phi = beam_split_number_state(2, theta, cutoff)?;
    let coupling = omega * ((1.0 - lambda) * math::sqrt(1.0 - omega.norm_sqr()) / SQRT_2);
    let vac = cutoff.index(0, 0);
    let mut m = CMatrix::zeros(cutoff.dim(), cutoff.dim());
    for (i, amp) in phi.coeffs().iter().enumerate() {
        if amp.norm() > 0.0 {
            m[(i, vac)] += coupling * amp;
            m[(vac, i)] += (coupling * amp).conj();
        }
    }
    Ok(partial_transpose_b(&TwoModeState::from_parts(m, cutoff, 0.0)).into_matrix())
}

fn block_matrix(m: &CMatrix, basis: &[(usize, usize)], cutoff: FockCutoff) -> CMatrix {
    let idx: Vec<usize> = basis.iter().map(|&(a, b)| cutoff.index(a, b)).collect();
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Principal submatrix on rows that are not identically zero.
fn live_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let live: Vec<usize> = (0..n).filter(|&i| m[(i, i)].re > 0.0).collect();
    CMatrix::from_fn(live.len(), live.len(), |i, j| m[(live[i], live[j])])
}

/// Disc bookkeeping for the small-`omega` argument: per perturbed row, the
/// centre, the unperturbed radius, the exact perturbation and the angle-free
/// overestimate (`2|w|` on the vacuum row, `|w|` elsewhere, times `1 - lambda`),
/// plus the size of the neglected `O(|w|^2)` remainder and a scaling
/// certificate attempt for each perturbed block.
pub fn perturbation_audit(spec: &MixtureSpec) -> Result<PerturbationAudit> {
    let cutoff = spec.cutoff;
    let omega = spec.omega.value();
    let theta = spec.theta2.radians();
    let exact = partial_transpose_b(&build_mixture(spec)?);
    let model = first_order_model(&spec.distribution, spec.lambda, omega, theta, cutoff)?;
    let remainder_norm = exact.max_abs_diff(&model);
    let p = perturbation_only(spec.lambda, omega, theta, cutoff)?;
    let unperturbed = model.matrix() - &p;

    let scale = (1.0 - spec.lambda) * omega.norm();
    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    for delta in PERTURBED_BLOCKS.map(BlockIndex) {
        let basis = delta.basis(cutoff);
        let Some(&row) = basis.first() else { continue };
        let i = cutoff.index(row.0, row.1);
        let unperturbed_radius: f64 = basis
            .iter()
            .map(|&(a, b)| cutoff.index(a, b))
            .filter(|&j| j != i)
            .map(|j| unperturbed[(i, j)].norm())
            .sum();
        let exact_perturbation: f64 = (0..cutoff.dim()).map(|j| p[(i, j)].norm()).sum();
        let overestimate = if delta.0 == 0 { 2.0 * scale } else { scale };
        rows.push(PerturbedRow {
            row,
            block: delta,
            center: exact.matrix()[(i, i)].re,
            unperturbed_radius,
            exact_perturbation,
            overestimate,
        });
        let block = live_part(&block_matrix(exact.matrix(), &basis, cutoff));
        certificates.push(BlockCertificate {
            block: delta,
            scaling: scaled_positivity_search(&block),
            obstruction: scaling_obstruction(&block),
        });
    }
    Ok(PerturbationAudit {
        rows,
        remainder_norm,
        certificates,
    })
}
