//! The JSON certification report.
//!
//! Everything outside `meta.timing` is a deterministic function of the
//! configuration.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::verdict::Verdict;

/// `[re, im]`.
pub type ComplexPair = [f64; 2];

pub fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

/// JSON has no infinities; unbounded values become `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub input: Config,
    pub state_stats: StateStats,
    pub ppt: PptSection,
    pub gerschgorin: GerschgorinSection,
    pub range: RangeSection,
    pub verdict: Verdict,
    pub verdict_note: String,
    pub meta: Meta,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateStats {
    pub n_max: usize,
    pub dim: usize,
    pub trace: f64,
    pub tail_mass: f64,
    pub hermiticity_residual: f64,
    /// `max |rho - S rho S|` for the mode swap `S`.
    pub swap_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorSummary {
    pub deltas: Vec<i32>,
    pub dim: usize,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockMin {
    pub delta: i32,
    pub min_eigenvalue: f64,
}

/// PSD of the Hankel moment matrix implies PPT of the unmixed beam-split state;
/// the converse is not claimed.
#[derive(Clone, Debug, Serialize)]
pub struct HankelSection {
    pub order: usize,
    pub psd: bool,
    pub min_eigenvalue: f64,
    pub first_failing_minor: Option<usize>,
    pub minors: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PptSection {
    /// `"PPT"` or `"NPT"`, from the sector eigenvalues.
    pub verdict: &'static str,
    pub min_eigenvalue: f64,
    pub psd_tol: f64,
    /// Largest partial-transpose entry linking different `a - b` blocks.
    pub off_block_residual: f64,
    /// Blocks merged along every coupling above the leak tolerance; authoritative.
    pub sectors: Vec<SectorSummary>,
    /// Smallest eigenvalue of each diagonal `a - b` block; exact only without leakage.
    pub block_min_eigenvalues: Vec<BlockMin>,
    pub hankel: HankelSection,
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaBoundOut {
    pub bound: f64,
    pub p2_quarter: f64,
    pub p1_half: f64,
    pub vacuum_weight: f64,
    pub safety_exponent: i32,
    /// Whether the configured `|omega|` is at or below the bound.
    pub omega_within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub row: [usize; 2],
    pub delta: i32,
    pub center: f64,
    pub unperturbed_radius: f64,
    pub exact_perturbation: f64,
    pub overestimate: f64,
    pub exact_left_edge: f64,
    pub overestimate_left_edge: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateOut {
    pub delta: i32,
    pub found: bool,
    /// Spectral radius of `Diag^-1 |Off|`; no scaling exists above one.
    pub obstruction: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GerschgorinSection {
    /// Order-of-magnitude rule; a heuristic, never a verdict.
    pub omega_bound: Option<OmegaBoundOut>,
    pub omega_bound_error: Option<String>,
    pub rows: Vec<AuditRow>,
    pub remainder_norm: f64,
    pub certificates: Vec<CertificateOut>,
    pub certificate_found: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContradictionOut {
    pub order: usize,
    pub magnitude: f64,
    pub difference: ComplexPair,
    pub odd_pairs: Vec<(usize, ComplexPair)>,
    pub exact_closed_form: ComplexPair,
    pub three_eighths_closed_form: ComplexPair,
}

#[derive(Clone, Debug, Serialize)]
pub struct RangeSection {
    pub n_max: usize,
    pub rank: usize,
    pub omega_independent: bool,
    pub best_overlap: f64,
    pub restarts: usize,
    pub converged: bool,
    pub max_iterations: usize,
    pub total_iterations: usize,
    pub best_v1: Vec<ComplexPair>,
    pub best_v2: Vec<ComplexPair>,
    pub contradiction: Option<ContradictionOut>,
    pub contradiction_error: Option<String>,
    pub note: &'static str,
}

pub const RANGE_NOTE: &str = "a best overlap below one means no product vector was found in the range; \
this is numerical evidence of entanglement, not a proof";

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub timing: Timing,
}

/// Wall-clock data; excluded from reproducibility comparisons.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub total_ms: f64,
    pub stages_ms: BTreeMap<&'static str, f64>,
}

impl CertificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with `meta.timing` removed, for byte comparisons between runs.
    pub fn to_json_without_timing(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(meta) = v.get_mut("meta").and_then(|m| m.as_object_mut()) {
            meta.remove("timing");
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}
