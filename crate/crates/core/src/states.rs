//! Photon-number distributions and the two-mode states built from them.
//!
//! The beam splitter only ever acts on inputs of the form `|n> (x) |0>`, so its
//! action is evaluated from the closed binomial expansion
//! `U(theta)|n,0> = sum_l sqrt(C(n,l)) cos^l(theta) sin^(n-l)(theta) |l, n-l>`
//! and never as a matrix exponential on the full space.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;
use core::f64::consts::FRAC_PI_8;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{CMatrix, FockCutoff, SingleModeVector, Tolerances, TwoModeState, TwoModeVector};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistributionVariant {
    PlainThermal,
    PhotonAdded,
    ShiftedThermal,
    Custom,
}

/// Diagonal single-mode photon statistics `p_0 .. p_{n_max}`, renormalized
/// after truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    variant: DistributionVariant,
    nbar: Option<f64>,
    tail_mass: f64,
    cutoff: FockCutoff,
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar > 0.0) || !nbar.is_finite() {
        return Err(Error::invalid(format!(
            "mean photon number must be positive, got {nbar}"
        )));
    }
    Ok(())
}

impl PhotonDistribution {
    fn finish(
        mut probs: Vec<f64>,
        variant: DistributionVariant,
        nbar: Option<f64>,
        tail_mass: f64,
        cutoff: FockCutoff,
    ) -> Self {
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        PhotonDistribution {
            probs,
            variant,
            nbar,
            tail_mass,
            cutoff,
        }
    }

    /// `p_n = nbar^n / (nbar + 1)^(n+1)`.
    pub fn thermal(nbar: f64, cutoff: FockCutoff) -> Result<Self> {
        check_nbar(nbar)?;
        let x = nbar / (nbar + 1.0);
        let probs: Vec<f64> = (0..=cutoff.n_max()).map(|n| math::powi(x, n) / (nbar + 1.0)).collect();
        let tail = math::powi(x, cutoff.n_max() + 1);
        Ok(Self::finish(
            probs,
            DistributionVariant::PlainThermal,
            Some(nbar),
            tail,
            cutoff,
        ))
    }

    /// Thermal weights displaced up by one photon: `p_0 = 0`,
    /// `p_{n+1} = (1/(nbar+1)) (nbar/(nbar+1))^n`.
    pub fn shifted_thermal(nbar: f64, cutoff: FockCutoff) -> Result<Self> {
        check_nbar(nbar)?;
        let x = nbar / (nbar + 1.0);
        let probs: Vec<f64> = (0..=cutoff.n_max())
            .map(|m| {
                if m == 0 {
                    0.0
                } else {
                    math::powi(x, m - 1) / (nbar + 1.0)
                }
            })
            .collect();
        let tail = math::powi(x, cutoff.n_max());
        Ok(Self::finish(
            probs,
            DistributionVariant::ShiftedThermal,
            Some(nbar),
            tail,
            cutoff,
        ))
    }

    /// First-order heralded photon addition `a^dagger rho_T a`, normalized:
    /// `p'_0 = 0`, `p'_{n+1} = (n + 1) p_n / (nbar + 1)`.
    pub fn photon_added_thermal(nbar: f64, cutoff: FockCutoff) -> Result<Self> {
        check_nbar(nbar)?;
        let x = nbar / (nbar + 1.0);
        let probs: Vec<f64> = (0..=cutoff.n_max())
            .map(|m| {
                if m == 0 {
                    0.0
                } else {
                    let thermal = math::powi(x, m - 1) / (nbar + 1.0);
                    m as f64 * thermal / (nbar + 1.0)
                }
            })
            .collect();
        // sum_{m > N} m x^(m-1) (1-x)^2 = x^N (N + 1 - N x)
        let n = cutoff.n_max() as f64;
        let tail = math::powi(x, cutoff.n_max()) * (n + 1.0 - n * x);
        Ok(Self::finish(
            probs,
            DistributionVariant::PhotonAdded,
            Some(nbar),
            tail,
            cutoff,
        ))
    }

    /// Arbitrary nonnegative weights, zero-padded to the cutoff and renormalized.
    pub fn custom(weights: &[f64], cutoff: FockCutoff) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if weights.len() > cutoff.mode_dim() {
            return Err(Error::CutoffExceeded {
                n: weights.len() - 1,
                n_max: cutoff.n_max(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroTrace(total));
        }
        let mut probs = vec![0.0; cutoff.mode_dim()];
        probs[..weights.len()].copy_from_slice(weights);
        Ok(Self::finish(probs, DistributionVariant::Custom, None, 0.0, cutoff))
    }

    pub fn of_variant(variant: DistributionVariant, nbar: f64, cutoff: FockCutoff) -> Result<Self> {
        match variant {
            DistributionVariant::PlainThermal => Self::thermal(nbar, cutoff),
            DistributionVariant::ShiftedThermal => Self::shifted_thermal(nbar, cutoff),
            DistributionVariant::PhotonAdded => Self::photon_added_thermal(nbar, cutoff),
            DistributionVariant::Custom => Err(Error::invalid("custom distributions need explicit weights")),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p_n`, zero beyond the cutoff.
    pub fn p(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn variant(&self) -> DistributionVariant {
        self.variant
    }

    pub fn nbar(&self) -> Option<f64> {
        self.nbar
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    /// Same weights, re-truncated at a different cutoff.
    pub fn rebuild_at(&self, cutoff: FockCutoff) -> Result<Self> {
        match (self.variant, self.nbar) {
            (DistributionVariant::Custom, _) | (_, None) => {
                let keep = cutoff.mode_dim().min(self.probs.len());
                Self::custom(&self.probs[..keep], cutoff)
            }
            (v, Some(nbar)) => Self::of_variant(v, nbar, cutoff),
        }
    }
}

/// Squeezing parameter `omega = (xi/|xi|) tanh(|xi|/2)`, strictly inside the unit disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingParameter {
    omega: Complex64,
}

impl SqueezingParameter {
    pub fn new(omega: Complex64) -> Result<Self> {
        let m = omega.norm();
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::invalid(format!("|omega| must lie in (0, 1), got {m}")));
        }
        Ok(SqueezingParameter { omega })
    }

    pub fn real(omega: f64) -> Result<Self> {
        Self::new(Complex64::new(omega, 0.0))
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(magnitude, phase))
    }

    pub fn value(self) -> Complex64 {
        self.omega
    }

    pub fn magnitude(self) -> f64 {
        self.omega.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterAngle {
    theta: f64,
}

impl BeamSplitterAngle {
    /// Default for the second splitter, halfway between the excluded endpoints.
    pub const DEFAULT_BS2: f64 = FRAC_PI_8;

    /// The 50:50 splitter, `theta = pi/4`.
    pub fn balanced() -> Self {
        BeamSplitterAngle { theta: FRAC_PI_4 }
    }

    /// An unbalanced splitter, `0 < theta < pi/4` strictly.
    pub fn unbalanced(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_4) {
            return Err(Error::invalid(format!(
                "second beam splitter needs 0 < theta < pi/4, got {theta}"
            )));
        }
        Ok(BeamSplitterAngle { theta })
    }

    pub fn radians(self) -> f64 {
        self.theta
    }

    pub fn is_balanced(self) -> bool {
        (self.theta - FRAC_PI_4).abs() < 1e-15
    }
}

impl Default for BeamSplitterAngle {
    fn default() -> Self {
        BeamSplitterAngle {
            theta: Self::DEFAULT_BS2,
        }
    }
}

/// Parameters of `rho' = lambda rho + (1 - lambda) |Omega><Omega|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSpec {
    pub lambda: f64,
    pub distribution: PhotonDistribution,
    pub omega: SqueezingParameter,
    pub theta2: BeamSplitterAngle,
    pub cutoff: FockCutoff,
}

impl MixtureSpec {
    pub fn new(
        lambda: f64,
        distribution: PhotonDistribution,
        omega: SqueezingParameter,
        theta2: BeamSplitterAngle,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        if theta2.is_balanced() {
            return Err(Error::invalid("second beam splitter must not be 50:50"));
        }
        let cutoff = distribution.cutoff();
        Ok(MixtureSpec {
            lambda,
            distribution,
            omega,
            theta2,
            cutoff,
        })
    }

    /// `lambda = 1/2`, shifted thermal with `nbar = 1`, real `omega = 1e-3`, `theta = pi/8`.
    pub fn worked_example(n_max: usize) -> Result<Self> {
        let cutoff = FockCutoff::new(n_max)?;
        Self::new(
            0.5,
            PhotonDistribution::shifted_thermal(1.0, cutoff)?,
            SqueezingParameter::real(1e-3)?,
            BeamSplitterAngle::default(),
        )
    }

    /// The same mixture re-truncated at another cutoff.
    pub fn at_cutoff(&self, n_max: usize) -> Result<Self> {
        let cutoff = FockCutoff::new(n_max)?;
        let distribution = self.distribution.rebuild_at(cutoff)?;
        Self::new(self.lambda, distribution, self.omega, self.theta2)
    }

    pub fn with_omega(&self, omega: SqueezingParameter) -> Self {
        MixtureSpec { omega, ..self.clone() }
    }
}

/// `U(theta)|n, 0>`.
pub fn beam_split_number_state(n: usize, theta: f64, cutoff: FockCutoff) -> Result<TwoModeVector> {
    if n > cutoff.n_max() {
        return Err(Error::CutoffExceeded {
            n,
            n_max: cutoff.n_max(),
        });
    }
    let (c, s) = (math::cos(theta), math::sin(theta));
    let mut v = TwoModeVector::zeros(cutoff);
    let coeffs = v.coeffs_mut();
    for l in 0..=n {
        let amp = math::sqrt_binomial(n, l) * math::powi(c, l) * math::powi(s, n - l);
        coeffs[cutoff.index(l, n - l)] = Complex64::new(amp, 0.0);
    }
    Ok(v)
}

/// `sum_n p_n U|n,0><n,0|U^dagger`.
pub fn beam_split_diagonal_state(d: &PhotonDistribution, theta: f64, cutoff: FockCutoff) -> Result<TwoModeState> {
    if d.cutoff() != cutoff {
        return Err(Error::DimensionMismatch {
            expected: cutoff.mode_dim(),
            found: d.cutoff().mode_dim(),
        });
    }
    let mut m = CMatrix::zeros(cutoff.dim(), cutoff.dim());
    for (n, &p) in d.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        beam_split_number_state(n, theta, cutoff)?.accumulate_projector(p, &mut m);
    }
    Ok(TwoModeState::from_parts(m, cutoff, d.tail_mass()))
}

/// Squeezed vacuum amplitudes on `|2k>`:
/// `(1-|w|^2)^(1/4) sqrt((2k)!)/(2^k k!) w^k`, by the ratio recursion.
/// Not renormalized after truncation.
pub fn squeezed_vacuum_coefficients(omega: SqueezingParameter, cutoff: FockCutoff) -> SingleModeVector {
    let w = omega.value();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); cutoff.mode_dim()];
    let mut ck = Complex64::new(math::powf(1.0 - w.norm_sqr(), 0.25), 0.0);
    let mut k = 0usize;
    while 2 * k <= cutoff.n_max() {
        coeffs[2 * k] = ck;
        let kf = k as f64;
        ck *= w * (math::sqrt((2.0 * kf + 1.0) * (2.0 * kf + 2.0)) / (2.0 * (kf + 1.0)));
        k += 1;
    }
    SingleModeVector::new(coeffs, cutoff).expect("length matches cutoff")
}

/// `|Omega> = U(theta2)|0_sq>`, renormalized after truncation.
pub fn build_omega_state(
    omega: SqueezingParameter,
    theta2: BeamSplitterAngle,
    cutoff: FockCutoff,
) -> Result<TwoModeVector> {
    let theta = theta2.radians();
    if !(theta > 0.0 && theta < FRAC_PI_4) || theta2.is_balanced() {
        return Err(Error::invalid(format!(
            "second beam splitter needs 0 < theta < pi/4, got {theta}"
        )));
    }
    let sq = squeezed_vacuum_coefficients(omega, cutoff);
    let mut out = TwoModeVector::zeros(cutoff);
    for (n, ck) in sq.coeffs().iter().enumerate() {
        if *ck == Complex64::new(0.0, 0.0) {
            continue;
        }
        out.axpy(*ck, &beam_split_number_state(n, theta, cutoff)?);
    }
    out.normalized()
}

/// Probability of the squeezed vacuum lost to truncation.
pub fn squeezed_tail_mass(omega: SqueezingParameter, cutoff: FockCutoff) -> f64 {
    (1.0 - squeezed_vacuum_coefficients(omega, cutoff).norm_sqr()).max(0.0)
}

/// `rho' = lambda rho + (1 - lambda)|Omega><Omega|` with `rho` the 50:50 output.
pub fn build_mixture(spec: &MixtureSpec) -> Result<TwoModeState> {
    let cutoff = spec.cutoff;
    let lambda = spec.lambda;
    let rho = beam_split_diagonal_state(&spec.distribution, FRAC_PI_4, cutoff)?;
    let omega = build_omega_state(spec.omega, spec.theta2, cutoff)?;
    let mut m = rho.into_matrix().map(|z| z * lambda);
    omega.accumulate_projector(1.0 - lambda, &mut m);
    let tail = lambda * spec.distribution.tail_mass() + (1.0 - lambda) * squeezed_tail_mass(spec.omega, cutoff);
    Ok(TwoModeState::from_parts(m, cutoff, tail))
}

/// `(T (x) T) rho (T (x) T)^dagger`, renormalized, where
/// `T|n> = (nbar+1)^(1/2) ((nbar+1)/(2 nbar))^(n/2) |n>`.
pub fn apply_local_filter(state: &TwoModeState, nbar: f64, tol: &Tolerances) -> Result<TwoModeState> {
    check_nbar(nbar)?;
    let cutoff = state.cutoff();
    let ln_base = 0.5 * math::ln(nbar + 1.0);
    let ln_ratio = 0.5 * math::ln((nbar + 1.0) / (2.0 * nbar));
    let ln_t = |n: usize| ln_base + n as f64 * ln_ratio;

    // Matrix entries pick up t_a t_b t_c t_d; the worst case is four copies of max ln t_n.
    let limit = math::ln(f64::MAX);
    let worst = (0..=cutoff.n_max()).map(ln_t).fold(f64::NEG_INFINITY, f64::max);
    if 4.0 * worst > limit {
        let mut max_admissible = 0usize;
        while 4.0 * ln_t(max_admissible + 1).max(ln_t(0)) <= limit {
            max_admissible += 1;
        }
        return Err(Error::Overflow { max_admissible });
    }

    let weights: Vec<f64> = (0..cutoff.dim())
        .map(|i| {
            let (a, b) = cutoff.pair(i);
            math::exp(ln_t(a) + ln_t(b))
        })
        .collect();
    let m = state.matrix();
    let filtered = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (weights[i] * weights[j]));
    let trace = filtered.trace().re;
    if !(trace > 0.0) {
        return Err(Error::ZeroTrace(trace));
    }
    TwoModeState::new(filtered.map(|z| z / trace), cutoff, state.tail_mass(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn thermal_weights_nbar_one() {
        let d = PhotonDistribution::thermal(1.0, cut(40)).unwrap();
        let scale = 1.0 - d.tail_mass();
        assert!(close(d.p(0) * scale, 0.5, 1e-15));
        assert!(close(d.p(1) * scale, 0.25, 1e-15));
        assert!(close(d.p(2) * scale, 0.125, 1e-15));
        assert!(close(d.probs().iter().sum::<f64>(), 1.0, 1e-15));
    }

    #[test]
    fn thermal_tail_mass_is_geometric() {
        let d = PhotonDistribution::thermal(1.0, cut(20)).unwrap();
        assert_eq!(d.tail_mass(), libm::ldexp(1.0, -21));
    }

    #[test]
    fn thermal_small_nbar_is_nearly_vacuum() {
        assert!(PhotonDistribution::thermal(0.0, cut(4)).is_err());
        assert!(PhotonDistribution::thermal(-1.0, cut(4)).is_err());
        let d = PhotonDistribution::thermal(1e-6, cut(10)).unwrap();
        assert!(close(d.p(0), 1.0 - 1e-6, 1e-11));
    }

    #[test]
    fn shifted_thermal_weights() {
        let d = PhotonDistribution::shifted_thermal(1.0, cut(40)).unwrap();
        assert_eq!(d.p(0), 0.0);
        let scale = 1.0 - d.tail_mass();
        for n in 1..10 {
            assert!(close(d.p(n) * scale, libm::ldexp(1.0, -(n as i32)), 1e-16));
        }
        let d2 = PhotonDistribution::shifted_thermal(2.0, cut(40)).unwrap();
        let scale2 = 1.0 - d2.tail_mass();
        assert!(close(d2.p(1) * scale2, 1.0 / 3.0, 1e-15));
        assert!(close(d2.p(2) * scale2, 2.0 / 9.0, 1e-15));
    }

    #[test]
    fn shifted_thermal_untruncated_sum_is_one() {
        // sum_{n>=1} 2^-n = 1: the kept mass plus the recorded tail.
        let d = PhotonDistribution::shifted_thermal(1.0, cut(30)).unwrap();
        let kept: f64 = (1..=30).map(|n| libm::ldexp(1.0, -n)).sum();
        assert!(close(kept + d.tail_mass(), 1.0, 1e-15));
    }

    #[test]
    fn photon_added_weights() {
        let d = PhotonDistribution::photon_added_thermal(1.0, cut(60)).unwrap();
        assert_eq!(d.p(0), 0.0);
        let scale = 1.0 - d.tail_mass();
        assert!(close(d.p(1) * scale, 0.25, 1e-15));
        assert!(close(d.p(2) * scale, 0.25, 1e-15));
        assert!(close(d.p(3) * scale, 3.0 / 16.0, 1e-15));
        // Untruncated series sum_{n} (n+1) x^n (1-x)^2 = 1 at x = 1/2.
        let raw: f64 = (1..=60).map(|m| m as f64 * libm::ldexp(1.0, -m - 1)).sum();
        assert!(close(raw, 1.0, 1e-10));
        assert!(close(raw + d.tail_mass(), 1.0, 1e-15));
    }

    #[test]
    fn number_state_n1_balanced() {
        let k = cut(4);
        let v = beam_split_number_state(1, FRAC_PI_4, k).unwrap();
        assert!(close(v.amplitude(0, 1).re, FRAC_1_SQRT_2, 1e-15));
        assert!(close(v.amplitude(1, 0).re, FRAC_1_SQRT_2, 1e-15));
        assert!(close(v.norm_sqr(), 1.0, 1e-15));
    }

    #[test]
    fn number_state_n2_balanced() {
        let k = cut(4);
        let v = beam_split_number_state(2, FRAC_PI_4, k).unwrap();
        assert!(close(v.amplitude(0, 2).re, 0.5, 1e-15));
        assert!(close(v.amplitude(1, 1).re, FRAC_1_SQRT_2, 1e-15));
        assert!(close(v.amplitude(2, 0).re, 0.5, 1e-15));
    }

    #[test]
    fn number_state_n2_general_angle() {
        let k = cut(4);
        let t = 0.3;
        let v = beam_split_number_state(2, t, k).unwrap();
        let (c, s) = (libm::cos(t), libm::sin(t));
        assert!(close(v.amplitude(0, 2).re, s * s, 1e-15));
        assert!(close(v.amplitude(1, 1).re, 2f64.sqrt() * s * c, 1e-15));
        assert!(close(v.amplitude(2, 0).re, c * c, 1e-15));
    }

    #[test]
    fn vacuum_is_invariant_and_cutoff_enforced() {
        let k = cut(3);
        let v = beam_split_number_state(0, 0.7, k).unwrap();
        assert_eq!(v, TwoModeVector::basis(k, 0, 0).unwrap());
        assert!(matches!(
            beam_split_number_state(4, 0.7, k),
            Err(Error::CutoffExceeded { n: 4, n_max: 3 })
        ));
    }

    #[test]
    fn diagonal_state_of_vacuum() {
        let k = cut(3);
        let d = PhotonDistribution::custom(&[1.0], k).unwrap();
        let s = beam_split_diagonal_state(&d, FRAC_PI_4, k).unwrap();
        assert_eq!(s, TwoModeState::pure(&TwoModeVector::basis(k, 0, 0).unwrap()));
    }

    #[test]
    fn squeezed_coefficients_leading_terms() {
        let w = SqueezingParameter::real(0.3).unwrap();
        let sq = squeezed_vacuum_coefficients(w, cut(10));
        let c0 = libm::pow(1.0 - 0.09, 0.25);
        assert!(close(sq.coeffs()[0].re, c0, 1e-15));
        assert!(close(sq.coeffs()[2].re, c0 * 0.3 / 2f64.sqrt(), 1e-15));
        assert!(sq.coeffs().iter().skip(1).step_by(2).all(|c| c.norm() == 0.0));
    }

    #[test]
    fn squeezed_coefficients_match_gamma_form() {
        // sqrt(Gamma(k+1/2) / (k! sqrt(pi))) computed independently via lgamma.
        let w = SqueezingParameter::real(0.5).unwrap();
        let sq = squeezed_vacuum_coefficients(w, cut(40));
        let c0 = libm::pow(0.75, 0.25);
        for k in 0..=20usize {
            let lg =
                libm::lgamma(k as f64 + 0.5) - libm::lgamma(k as f64 + 1.0) - 0.5 * libm::log(core::f64::consts::PI);
            let expect = c0 * libm::exp(0.5 * lg) * libm::pow(0.5, k as f64);
            assert!(close(sq.coeffs()[2 * k].re, expect, 1e-13 * expect.max(1e-300)));
        }
    }

    #[test]
    fn squeezed_vacuum_normalization() {
        let w = SqueezingParameter::real(0.5).unwrap();
        let sq = squeezed_vacuum_coefficients(w, cut(60));
        assert!(close(sq.norm_sqr(), 1.0, 1e-10));
    }

    #[test]
    fn squeezing_parameter_range() {
        assert!(SqueezingParameter::real(0.0).is_err());
        assert!(SqueezingParameter::real(1.0).is_err());
        assert!(SqueezingParameter::from_polar(0.999, 2.0).is_ok());
    }

    #[test]
    fn omega_state_small_squeezing() {
        let k = cut(20);
        let w = SqueezingParameter::real(1e-4).unwrap();
        let o = build_omega_state(w, BeamSplitterAngle::default(), k).unwrap();
        assert!(close(o.amplitude(0, 0).norm_sqr(), 1.0, 1e-8));
    }

    #[test]
    fn omega_state_one_one_amplitude() {
        let k = cut(30);
        let t = FRAC_PI_8;
        let w = 0.01;
        let o = build_omega_state(SqueezingParameter::real(w).unwrap(), BeamSplitterAngle::default(), k).unwrap();
        let expect = libm::pow(1.0 - w * w, 0.25) * (w / 2f64.sqrt()) * 2f64.sqrt() * libm::sin(t) * libm::cos(t);
        assert!(close(o.amplitude(1, 1).re, expect, 1e-14));
    }

    #[test]
    fn omega_state_normalized_and_even() {
        let k = cut(60);
        let o = build_omega_state(SqueezingParameter::real(0.1).unwrap(), BeamSplitterAngle::default(), k).unwrap();
        assert!(close(o.norm_sqr(), 1.0, 1e-10));
        for a in 0..=60 {
            for b in 0..=60 {
                if (a + b) % 2 == 1 {
                    assert_eq!(o.amplitude(a, b), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn omega_state_rejects_balanced_angle() {
        let w = SqueezingParameter::real(0.1).unwrap();
        assert!(build_omega_state(w, BeamSplitterAngle::balanced(), cut(4)).is_err());
        assert!(BeamSplitterAngle::unbalanced(0.0).is_err());
        assert!(BeamSplitterAngle::unbalanced(FRAC_PI_4).is_err());
    }

    #[test]
    fn mixture_endpoints() {
        let k = cut(8);
        let d = PhotonDistribution::shifted_thermal(1.0, k).unwrap();
        let w = SqueezingParameter::real(0.2).unwrap();
        let t = BeamSplitterAngle::default();
        let rho = beam_split_diagonal_state(&d, FRAC_PI_4, k).unwrap();
        let only_rho = build_mixture(&MixtureSpec::new(1.0, d.clone(), w, t).unwrap()).unwrap();
        assert!(only_rho.max_abs_diff(&rho) < 1e-15);
        let only_omega = build_mixture(&MixtureSpec::new(0.0, d, w, t).unwrap()).unwrap();
        let pure = TwoModeState::pure(&build_omega_state(w, t, k).unwrap());
        assert!(only_omega.max_abs_diff(&pure) < 1e-15);
    }

    #[test]
    fn mixture_rejects_bad_lambda() {
        let k = cut(4);
        let d = PhotonDistribution::shifted_thermal(1.0, k).unwrap();
        let w = SqueezingParameter::real(0.2).unwrap();
        assert!(MixtureSpec::new(1.5, d, w, BeamSplitterAngle::default()).is_err());
    }

    #[test]
    fn worked_example_is_unit_trace_hermitian() {
        let s = build_mixture(&MixtureSpec::worked_example(12).unwrap()).unwrap();
        assert!(close(s.trace(), 1.0, 1e-12));
        assert!(s.hermiticity_residual() < 1e-15);
    }

    #[test]
    fn local_filter_at_nbar_one_is_identity() {
        let k = cut(10);
        let d = PhotonDistribution::shifted_thermal(1.0, k).unwrap();
        let rho = beam_split_diagonal_state(&d, FRAC_PI_4, k).unwrap();
        let out = apply_local_filter(&rho, 1.0, &Tolerances::default()).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn local_filter_maps_nbar_two_to_canonical_form() {
        let k = cut(40);
        let tol = Tolerances::default();
        let d2 = PhotonDistribution::shifted_thermal(2.0, k).unwrap();
        let rho2 = beam_split_diagonal_state(&d2, FRAC_PI_4, k).unwrap();
        let filtered = apply_local_filter(&rho2, 2.0, &tol).unwrap();
        let d1 = PhotonDistribution::shifted_thermal(1.0, k).unwrap();
        let canonical = beam_split_diagonal_state(&d1, FRAC_PI_4, k).unwrap();
        assert!(filtered.max_abs_diff(&canonical) <= 1e-8);
    }

    #[test]
    fn local_filter_overflow_reports_limit() {
        // ln t_n ~ 10.015 n at nbar = 1e-9, so 4 ln t_n passes ln(f64::MAX) after n = 17.
        let k = cut(20);
        let d = PhotonDistribution::custom(&[1.0], k).unwrap();
        let rho = beam_split_diagonal_state(&d, FRAC_PI_4, k).unwrap();
        match apply_local_filter(&rho, 1e-9, &Tolerances::default()) {
            Err(Error::Overflow { max_admissible }) => assert_eq!(max_admissible, 17),
            other => panic!("expected overflow, got {other:?}"),
        }
    }
}
