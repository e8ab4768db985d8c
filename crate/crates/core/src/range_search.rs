//! Product vectors in the range of the mixture.
//!
//! The range of `rho'` is spanned by the `U(pi/4)|n,0>` with `p_n > 0` and by
//! `|Omega>`. A separable state has a range spanned by product vectors, so a
//! subspace containing no product vector certifies entanglement. Numerically we
//! can only look for one: [`product_vector_search`] maximizes
//! `<v1 v2|P|v1 v2>` over unit `v1`, `v2` by alternating exact eigen-steps,
//! and a best value clearly below one is evidence, not proof.
//!
//! [`symbolic_contradiction_check`] evaluates the exact obstruction instead:
//! writing `m_0|Omega> + sum_k m_k|psi_k> = |v1>|v2>` with `alpha_0 = beta_0 = 1`
//! forces `alpha_1 beta_j = alpha_j beta_1` for odd `j`, while the `(1, j)` and
//! `(j, 1)` components differ by `m_0 (Omega_{1j} - Omega_{j1})`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{orthonormalize, projector, top_eigenpair, CMatrix, FockCutoff, SingleModeVector, TwoModeVector};
use crate::math;
use crate::states::{beam_split_number_state, build_omega_state, MixtureSpec};

/// Weights `p_n` at or below this are left out of the span.
pub const RANK_TOL: f64 = 1e-14;
/// Relative residual below which a spanning vector counts as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RangeSubspace {
    pub basis: Vec<TwoModeVector>,
    pub projector: CMatrix,
    pub cutoff: FockCutoff,
    /// Whether `|Omega>` was offered to the span, and whether it survived.
    pub omega_offered: bool,
    pub omega_independent: bool,
}

impl RangeSubspace {
    /// Span of an arbitrary family, orthonormalized.
    pub fn from_vectors(vs: &[TwoModeVector]) -> Result<Self> {
        let cutoff = vs.first().ok_or(Error::EmptyInput)?.cutoff();
        let on = orthonormalize(vs, DEPENDENCE_TOL)?;
        Ok(RangeSubspace {
            projector: projector(&on.vectors, cutoff),
            basis: on.vectors,
            cutoff,
            omega_offered: false,
            omega_independent: false,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `max |P^2 - P|`.
    pub fn idempotency_residual(&self) -> f64 {
        let p2 = &self.projector * &self.projector;
        (p2 - &self.projector).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn build_range_subspace(spec: &MixtureSpec) -> Result<RangeSubspace> {
    let cutoff = spec.cutoff;
    let mut vs = Vec::new();
    if spec.lambda > 0.0 {
        for (n, &p) in spec.distribution.probs().iter().enumerate() {
            if p > RANK_TOL {
                vs.push(beam_split_number_state(n, FRAC_PI_4, cutoff)?);
            }
        }
    }
    let kept = vs.len();
    let omega_offered = spec.lambda < 1.0;
    if omega_offered {
        vs.push(build_omega_state(spec.omega, spec.theta2, cutoff)?);
    }
    let mut sub = RangeSubspace::from_vectors(&vs)?;
    sub.omega_offered = omega_offered;
    sub.omega_independent = omega_offered && sub.rank() == kept + 1;
    Ok(sub)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub conv_tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 200,
            max_iter: 500,
            conv_tol: 1e-12,
            seed: 0x5eed_0b5e,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub overlap: f64,
    pub v1: Vec<Complex64>,
    pub v2: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
    /// Overlap after every full iteration.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RangeSearchResult {
    pub best_overlap: f64,
    pub best_v1: SingleModeVector,
    pub best_v2: SingleModeVector,
    pub restarts: usize,
    pub iterations_per_restart: Vec<usize>,
    /// Convergence flag of the restart that produced `best_overlap`.
    pub converged: bool,
}

/// One seed per restart, drawn up front so the result does not depend on
/// the order in which restarts run.
pub fn restart_seeds(seed: u64, restarts: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..restarts).map(|_| rng.next_u64()).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        if norm > 1e-3 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// `sum_k w_k w_k^dagger` with `w_k` the basis vectors contracted against
/// `conj(v)` on one side.
fn contracted(sub: &RangeSubspace, v: &[Complex64], fix_first: bool) -> CMatrix {
    let d = sub.cutoff.mode_dim();
    let mut q = CMatrix::zeros(d, d);
    let mut w = alloc::vec![Complex64::new(0.0, 0.0); d];
    for basis in &sub.basis {
        let c = basis.coeffs();
        for (x, slot) in w.iter_mut().enumerate() {
            *slot = (0..d)
                .map(|y| {
                    let idx = if fix_first { y * d + x } else { x * d + y };
                    v[y].conj() * c[idx]
                })
                .sum();
        }
        for i in 0..d {
            for j in 0..d {
                q[(i, j)] += w[i] * w[j].conj();
            }
        }
    }
    q
}

/// Alternating maximization from one seeded start.
pub fn run_restart(sub: &RangeSubspace, seed: u64, max_iter: usize, conv_tol: f64) -> RestartOutcome {
    let d = sub.cutoff.mode_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v1 = random_unit(&mut rng, d);
    let mut v2 = alloc::vec![Complex64::new(0.0, 0.0); d];
    let mut trace = Vec::new();
    let mut last = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let (_, best2) = top_eigenpair(&contracted(sub, &v1, true));
        v2 = best2;
        let (f, best1) = top_eigenpair(&contracted(sub, &v2, false));
        v1 = best1;
        trace.push(f);
        if (f - last).abs() < conv_tol {
            converged = true;
            break;
        }
        last = f;
    }
    RestartOutcome {
        overlap: trace.last().copied().unwrap_or(0.0),
        v1,
        v2,
        iterations,
        converged,
        trace,
    }
}

/// Best of a set of restart outcomes; ties go to the earliest restart.
pub fn combine_restarts(cutoff: FockCutoff, outcomes: &[RestartOutcome]) -> Result<RangeSearchResult> {
    let best = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (i, o)| match acc {
            Some((_, f)) if f >= o.overlap => acc,
            _ => Some((i, o.overlap)),
        })
        .ok_or(Error::EmptyInput)?
        .0;
    let b = &outcomes[best];
    Ok(RangeSearchResult {
        best_overlap: b.overlap,
        best_v1: SingleModeVector::new(b.v1.clone(), cutoff)?,
        best_v2: SingleModeVector::new(b.v2.clone(), cutoff)?,
        restarts: outcomes.len(),
        iterations_per_restart: outcomes.iter().map(|o| o.iterations).collect(),
        converged: b.converged,
    })
}

/// Multi-start search for the product vector closest to the subspace.
pub fn product_vector_search(sub: &RangeSubspace, config: &SearchConfig) -> Result<RangeSearchResult> {
    if config.restarts == 0 {
        return Err(Error::invalid("at least one restart is required"));
    }
    let outcomes: Vec<RestartOutcome> = restart_seeds(config.seed, config.restarts)
        .into_iter()
        .map(|s| run_restart(sub, s, config.max_iter, config.conv_tol))
        .collect();
    combine_restarts(sub.cutoff, &outcomes)
}

/// `m_0 (Omega_{1j} - Omega_{j1})` for one odd `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairDifference {
    pub j: usize,
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContradictionReport {
    pub order: usize,
    /// `1 / Omega_00`, fixed by `alpha_0 = beta_0 = 1`.
    pub m0: Complex64,
    /// Odd `j` from 3 to `order - 1`.
    pub differences: Vec<PairDifference>,
    /// The `j = 3` entry: `alpha_1 beta_3 - alpha_3 beta_1` as forced by the
    /// `(1,3)` and `(3,1)` components.
    pub difference: Complex64,
    /// `(sqrt6 / 2) w^2 cos(t) sin(t) (sin^2 t - cos^2 t)`.
    pub exact_closed_form: Complex64,
    /// The same with the coefficient written as `3/8`.
    pub three_eighths_closed_form: Complex64,
}

impl ContradictionReport {
    pub fn magnitude(&self) -> f64 {
        self.difference.norm()
    }
}

fn angle_factor(theta: f64) -> f64 {
    let (s, c) = (math::sin(theta), math::cos(theta));
    c * s * (s * s - c * c)
}

/// Contradiction read off the amplitudes of a given `|Omega>`.
pub fn contradiction_from_state(
    omega_state: &TwoModeVector,
    omega: Complex64,
    theta: f64,
    order: usize,
) -> Result<ContradictionReport> {
    if (theta - FRAC_PI_4).abs() < 1e-15 {
        return Err(Error::DegenerateAngle);
    }
    if order < 4 {
        return Err(Error::invalid("contradiction check needs order >= 4"));
    }
    let n_max = omega_state.cutoff().n_max();
    if order > n_max {
        return Err(Error::CutoffExceeded { n: order, n_max });
    }
    let vac = omega_state.amplitude(0, 0);
    if vac.norm() == 0.0 {
        return Err(Error::invalid("|Omega> has no vacuum component"));
    }
    let m0 = Complex64::new(1.0, 0.0) / vac;
    let differences: Vec<PairDifference> = (3..order)
        .step_by(2)
        .map(|j| PairDifference {
            j,
            value: m0 * (omega_state.amplitude(1, j) - omega_state.amplitude(j, 1)),
        })
        .collect();
    let w2 = omega * omega;
    let f = angle_factor(theta);
    Ok(ContradictionReport {
        order,
        m0,
        difference: differences[0].value,
        differences,
        exact_closed_form: w2 * (math::sqrt(6.0) / 2.0 * f),
        three_eighths_closed_form: w2 * (0.375 * f),
    })
}

pub fn symbolic_contradiction_check(spec: &MixtureSpec, order: usize) -> Result<ContradictionReport> {
    let omega_state = build_omega_state(spec.omega, spec.theta2, spec.cutoff)?;
    contradiction_from_state(&omega_state, spec.omega.value(), spec.theta2.radians(), order)
}

/// `sum_k c_k U(theta)|2k, 0>` without normalization, for any angle.
pub fn raw_omega_state(omega: Complex64, theta: f64, cutoff: FockCutoff) -> Result<TwoModeVector> {
    let mut out = TwoModeVector::zeros(cutoff);
    let mut c = Complex64::new(1.0, 0.0);
    let mut k = 0usize;
    while 2 * k <= cutoff.n_max() {
        out.axpy(c, &beam_split_number_state(2 * k, theta, cutoff)?);
        let ratio = math::sqrt(((2 * k + 1) * (2 * k + 2)) as f64) / (2 * (k + 1)) as f64;
        c *= omega * ratio;
        k += 1;
    }
    Ok(out)
}
