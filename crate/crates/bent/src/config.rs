//! Run configuration, read from TOML.
//!
//! ```toml
//! [state]
//! variant = "shifted_thermal"
//! nbar = 1.0
//! lambda = 0.5
//! theta2 = 0.39269908169872414
//! omega = { magnitude = 1e-3, phase = 0.0 }
//!
//! [numerics]
//! n_max = 40
//!
//! [range_search]
//! restarts = 200
//! seed = 1
//!
//! [outputs]
//! dump_matrices = false
//! ```

use std::path::{Path, PathBuf};

use bent_core::fock::FockCutoff;
use bent_core::states::{BeamSplitterAngle, DistributionVariant, MixtureSpec, PhotonDistribution, SqueezingParameter};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    PlainThermal,
    PhotonAdded,
    ShiftedThermal,
    Custom,
}

impl From<Variant> for DistributionVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::PlainThermal => DistributionVariant::PlainThermal,
            Variant::PhotonAdded => DistributionVariant::PhotonAdded,
            Variant::ShiftedThermal => DistributionVariant::ShiftedThermal,
            Variant::Custom => DistributionVariant::Custom,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaConfig {
    pub magnitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub variant: Variant,
    /// Ignored for `custom`.
    #[serde(default = "default_nbar")]
    pub nbar: f64,
    /// Photon-number weights for `custom`; renormalized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub lambda: f64,
    pub omega: OmegaConfig,
    #[serde(default = "default_theta2")]
    pub theta2: f64,
}

fn default_nbar() -> f64 {
    1.0
}

fn default_theta2() -> f64 {
    BeamSplitterAngle::DEFAULT_BS2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub herm: f64,
    /// Off-block entries above this count as coupling between blocks.
    pub leak: f64,
    /// PSD threshold relative to the largest diagonal entry of the partial transpose.
    pub psd_relative: f64,
    /// Entanglement evidence needs `best_overlap < 1 - overlap_margin`.
    pub overlap_margin: f64,
    /// ... and a contradiction magnitude above this.
    pub contradiction_floor: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            herm: 1e-10,
            leak: 1e-12,
            psd_relative: 1e-10,
            overlap_margin: 1e-4,
            contradiction_floor: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub n_max: usize,
    /// Hankel order; defaults to `min(n_max / 2, 20)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hankel_order: Option<usize>,
    #[serde(default = "default_contradiction_order")]
    pub contradiction_order: usize,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

fn default_contradiction_order() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RangeSearchConfig {
    /// Cutoff for the range search, independent of `numerics.n_max`.
    pub n_max: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub conv_tol: f64,
}

impl Default for RangeSearchConfig {
    fn default() -> Self {
        let s = bent_core::range_search::SearchConfig::default();
        RangeSearchConfig {
            n_max: 10,
            restarts: s.restarts,
            seed: s.seed,
            max_iter: s.max_iter,
            conv_tol: s.conv_tol,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    pub dump_matrices: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub state: StateConfig,
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub range_search: RangeSearchConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The worked example: shifted thermal `nbar = 1`, `lambda = 1/2`,
    /// `omega = 1e-3`, `theta2 = pi/8`, `n_max = 40`.
    pub fn worked_example() -> Self {
        Config {
            state: StateConfig {
                variant: Variant::ShiftedThermal,
                nbar: 1.0,
                weights: None,
                lambda: 0.5,
                omega: OmegaConfig {
                    magnitude: 1e-3,
                    phase: 0.0,
                },
                theta2: BeamSplitterAngle::DEFAULT_BS2,
            },
            numerics: NumericsConfig {
                n_max: 40,
                hankel_order: None,
                contradiction_order: default_contradiction_order(),
                tolerances: ToleranceConfig::default(),
            },
            range_search: RangeSearchConfig::default(),
            outputs: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let t = &self.numerics.tolerances;
        for (name, v) in [
            ("herm", t.herm),
            ("leak", t.leak),
            ("psd_relative", t.psd_relative),
            ("overlap_margin", t.overlap_margin),
            ("contradiction_floor", t.contradiction_floor),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!(
                    "numerics.tolerances.{name} must be a finite nonnegative number"
                ));
            }
        }
        if self.range_search.restarts == 0 {
            return bad("range_search.restarts must be at least 1".into());
        }
        if self.range_search.max_iter == 0 {
            return bad("range_search.max_iter must be at least 1".into());
        }
        if self.state.variant == Variant::Custom && self.state.weights.is_none() {
            return bad("state.weights is required for the custom variant".into());
        }
        if self.numerics.contradiction_order > self.numerics.n_max {
            return bad("numerics.contradiction_order exceeds numerics.n_max".into());
        }
        if let Some(k) = self.numerics.hankel_order {
            if 2 * k > self.numerics.n_max {
                return bad("numerics.hankel_order must be at most n_max / 2".into());
            }
        }
        // Out-of-range state parameters are configuration mistakes, not pipeline failures.
        let as_config = |e: CliError| match e {
            CliError::Core(e) => CliError::Config(e.to_string()),
            other => other,
        };
        self.mixture_spec().map_err(as_config)?;
        self.mixture_spec_at(self.range_search.n_max).map_err(as_config)?;
        Ok(())
    }

    fn distribution(&self, n_max: usize) -> Result<PhotonDistribution, CliError> {
        let cutoff = FockCutoff::new(n_max)?;
        let d = match (&self.state.variant, &self.state.weights) {
            (Variant::Custom, Some(w)) => PhotonDistribution::custom(w, cutoff)?,
            (Variant::Custom, None) => return Err(CliError::Config("state.weights missing".into())),
            (v, _) => PhotonDistribution::of_variant((*v).into(), self.state.nbar, cutoff)?,
        };
        Ok(d)
    }

    pub fn mixture_spec_at(&self, n_max: usize) -> Result<MixtureSpec, CliError> {
        let omega = SqueezingParameter::from_polar(self.state.omega.magnitude, self.state.omega.phase)?;
        let theta2 = BeamSplitterAngle::unbalanced(self.state.theta2)?;
        Ok(MixtureSpec::new(
            self.state.lambda,
            self.distribution(n_max)?,
            omega,
            theta2,
        )?)
    }

    pub fn mixture_spec(&self) -> Result<MixtureSpec, CliError> {
        self.mixture_spec_at(self.numerics.n_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [state]
        variant = "shifted_thermal"
        nbar = 1.0
        lambda = 0.5
        omega = { magnitude = 1e-3 }

        [numerics]
        n_max = 40
    "#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = Config::from_toml(MINIMAL).unwrap();
        assert_eq!(c, Config::worked_example());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = Config::worked_example();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(Config::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for (from, to) in [
            ("lambda = 0.5", "lambda = 1.5"),
            ("magnitude = 1e-3", "magnitude = 1.0"),
            ("n_max = 40", "n_max = 1"),
            ("variant = \"shifted_thermal\"", "variant = \"coherent\""),
            ("nbar = 1.0", "nbar = -1.0"),
            ("n_max = 40", "n_max = 40\nunknown = 3"),
        ] {
            let text = MINIMAL.replace(from, to);
            assert!(matches!(Config::from_toml(&text), Err(CliError::Config(_))), "{to}");
        }
        let balanced = format!("{MINIMAL}\n").replace("lambda = 0.5", "lambda = 0.5\ntheta2 = 0.7853981633974483");
        assert!(Config::from_toml(&balanced).is_err());
    }

    #[test]
    fn custom_variant_needs_weights() {
        let text = MINIMAL.replace("variant = \"shifted_thermal\"", "variant = \"custom\"");
        assert!(Config::from_toml(&text).is_err());
        let text = text.replace("nbar = 1.0", "weights = [0.0, 0.5, 0.25, 0.25]");
        let c = Config::from_toml(&text).unwrap();
        let spec = c.mixture_spec().unwrap();
        assert!((spec.distribution.p(1) - 0.5).abs() < 1e-15);
    }
}
