//! The full certification pipeline.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use bent_core::gerschgorin::{omega_upper_bound, perturbation_audit};
use bent_core::hankel::{default_order, hankel_ppt_test, PsdVerdict};
use bent_core::partial_transpose::{
    block_decompose, coupled_sectors, min_block_eigenvalues, partial_transpose_b, ppt_summary, sector_min_eigenvalues,
    PptVerdict,
};
use bent_core::range_search::{
    build_range_subspace, combine_restarts, restart_seeds, run_restart, symbolic_contradiction_check, RestartOutcome,
};
use bent_core::states::build_mixture;
use rayon::prelude::*;

use crate::config::Config;
use crate::dump;
use crate::error::CliError;
use crate::report::*;
use crate::verdict::{decide, Evidence, Verdict};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "BENT_THREADS";

/// Thread pool sized by [`THREADS_ENV`], or rayon's default when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(e.to_string()))
}

struct Stopwatch {
    last: Instant,
    timing: Timing,
    start: Instant,
}

impl Stopwatch {
    fn new() -> Self {
        let started_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        let now = Instant::now();
        Stopwatch {
            last: now,
            start: now,
            timing: Timing {
                started_unix_ms,
                ..Timing::default()
            },
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.timing
            .stages_ms
            .insert(stage, (now - self.last).as_secs_f64() * 1e3);
        self.last = now;
    }

    fn finish(mut self) -> Timing {
        self.timing.total_ms = self.start.elapsed().as_secs_f64() * 1e3;
        self.timing
    }
}

/// Runs every stage and assembles the report. Matrix dumps go to `dump_dir`
/// when given, or next to the report when `outputs.dump_matrices` is set.
pub fn run_certify(config: &Config, dump_dir: Option<&Path>) -> Result<CertificationReport, CliError> {
    config.validate()?;
    let pool = thread_pool()?;
    let mut clock = Stopwatch::new();
    let tol = &config.numerics.tolerances;
    let spec = config.mixture_spec()?;

    let rho = build_mixture(&spec)?;
    let state_stats = StateStats {
        n_max: spec.cutoff.n_max(),
        dim: spec.cutoff.dim(),
        trace: rho.trace(),
        tail_mass: rho.tail_mass(),
        hermiticity_residual: rho.hermiticity_residual(),
        swap_residual: rho.swap_residual(),
    };
    clock.lap("build_mixture");

    let pt = partial_transpose_b(&rho);
    clock.lap("partial_transpose");

    let dump_target = dump_dir.map(Path::to_path_buf).or_else(|| {
        config.outputs.dump_matrices.then(|| {
            config
                .outputs
                .report_path
                .as_deref()
                .and_then(Path::parent)
                .map(Path::to_path_buf)
                .unwrap_or_else(|| ".".into())
        })
    });
    if let Some(dir) = dump_target {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        dump::write_file(&dir.join("rho.bent"), rho.matrix())?;
        dump::write_file(&dir.join("rho_pt.bent"), pt.matrix())?;
        clock.lap("dump");
    }

    let sectors = coupled_sectors(&pt, tol.leak);
    let sector_minima = sector_min_eigenvalues(&sectors, tol.herm)?;
    let summary = ppt_summary(
        sector_minima.iter().copied(),
        sectors.largest_diagonal(),
        tol.psd_relative,
    );
    clock.lap("sector_eigenvalues");

    // Diagonal blocks only: the coupling between blocks is reported, not an error.
    let blocks = block_decompose(&pt, f64::INFINITY)?;
    let block_minima = min_block_eigenvalues(&blocks, tol.herm)?;
    clock.lap("block_eigenvalues");

    let order = config
        .numerics
        .hankel_order
        .unwrap_or_else(|| default_order(spec.cutoff.n_max()));
    let hankel = hankel_ppt_test(&spec.distribution, order)?;
    clock.lap("hankel");

    let audit = perturbation_audit(&spec)?;
    let (omega_bound, omega_bound_error) = match omega_upper_bound(&spec.distribution, spec.lambda) {
        Ok(b) => (
            Some(OmegaBoundOut {
                bound: b.bound,
                p2_quarter: b.floor_terms.p2_quarter,
                p1_half: b.floor_terms.p1_half,
                vacuum_weight: b.floor_terms.vacuum_weight,
                safety_exponent: b.safety_exponent,
                omega_within_bound: spec.omega.magnitude() <= b.bound,
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    clock.lap("gerschgorin");

    let range_spec = config.mixture_spec_at(config.range_search.n_max)?;
    let sub = build_range_subspace(&range_spec)?;
    let rs = &config.range_search;
    let seeds = restart_seeds(rs.seed, rs.restarts);
    let outcomes: Vec<RestartOutcome> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| run_restart(&sub, s, rs.max_iter, rs.conv_tol))
            .collect()
    });
    let search = combine_restarts(sub.cutoff, &outcomes)?;
    clock.lap("range_search");

    let contradiction = symbolic_contradiction_check(&spec, config.numerics.contradiction_order);
    clock.lap("contradiction");

    let evidence = Evidence {
        ppt: Some(summary.verdict == PptVerdict::Ppt),
        best_overlap: Some(search.best_overlap),
        search_converged: search.converged,
        contradiction: contradiction.as_ref().ok().map(|c| c.magnitude()),
        overlap_margin: tol.overlap_margin,
        contradiction_floor: tol.contradiction_floor,
    };
    let verdict = decide(&evidence);

    let ppt = PptSection {
        verdict: match summary.verdict {
            PptVerdict::Ppt => "PPT",
            PptVerdict::Npt => "NPT",
        },
        min_eigenvalue: summary.min_eigenvalue,
        psd_tol: summary.psd_tol,
        off_block_residual: blocks.off_block_residual,
        sectors: sectors
            .sectors
            .iter()
            .zip(&sector_minima)
            .map(|(s, &m)| SectorSummary {
                deltas: s.deltas.iter().map(|d| d.delta()).collect(),
                dim: s.basis.len(),
                min_eigenvalue: m,
            })
            .collect(),
        block_min_eigenvalues: block_minima
            .iter()
            .map(|(d, &m)| BlockMin {
                delta: d.delta(),
                min_eigenvalue: m,
            })
            .collect(),
        hankel: HankelSection {
            order,
            psd: hankel.verdict == PsdVerdict::Psd,
            min_eigenvalue: hankel.min_eigenvalue,
            first_failing_minor: hankel.first_failing_minor,
            minors: hankel.minors,
        },
    };

    let gerschgorin = GerschgorinSection {
        omega_bound,
        omega_bound_error,
        rows: audit
            .rows
            .iter()
            .map(|r| AuditRow {
                row: [r.row.0, r.row.1],
                delta: r.block.delta(),
                center: r.center,
                unperturbed_radius: r.unperturbed_radius,
                exact_perturbation: r.exact_perturbation,
                overestimate: r.overestimate,
                exact_left_edge: r.exact_left_edge(),
                overestimate_left_edge: r.overestimate_left_edge(),
            })
            .collect(),
        remainder_norm: audit.remainder_norm,
        certificates: audit
            .certificates
            .iter()
            .map(|c| CertificateOut {
                delta: c.block.delta(),
                found: c.scaling.is_some(),
                obstruction: finite(c.obstruction),
            })
            .collect(),
        certificate_found: audit.certified(),
    };

    let (contradiction_out, contradiction_error) = match contradiction {
        Ok(c) => (
            Some(ContradictionOut {
                order: c.order,
                magnitude: c.magnitude(),
                difference: pair(c.difference),
                odd_pairs: c.differences.iter().map(|d| (d.j, pair(d.value))).collect(),
                exact_closed_form: pair(c.exact_closed_form),
                three_eighths_closed_form: pair(c.three_eighths_closed_form),
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };

    let range = RangeSection {
        n_max: sub.cutoff.n_max(),
        rank: sub.rank(),
        omega_independent: sub.omega_independent,
        best_overlap: search.best_overlap,
        restarts: search.restarts,
        converged: search.converged,
        max_iterations: search.iterations_per_restart.iter().copied().max().unwrap_or(0),
        total_iterations: search.iterations_per_restart.iter().sum(),
        best_v1: search.best_v1.coeffs().iter().copied().map(pair).collect(),
        best_v2: search.best_v2.coeffs().iter().copied().map(pair).collect(),
        contradiction: contradiction_out,
        contradiction_error,
        note: RANGE_NOTE,
    };

    Ok(CertificationReport {
        input: config.clone(),
        state_stats,
        ppt,
        gerschgorin,
        range,
        verdict,
        verdict_note: verdict_note(verdict).into(),
        meta: Meta {
            version: env!("CARGO_PKG_VERSION"),
            timing: clock.finish(),
        },
    })
}

fn verdict_note(v: Verdict) -> &'static str {
    match v {
        Verdict::PptAndEntangledEvidence => {
            "PPT; no product vector found in the range, consistent with entanglement; not a proof"
        }
        Verdict::Npt => "partial transpose has a negative eigenvalue, so the state is entangled",
        Verdict::PptNoEntanglementEvidence => {
            "PPT; the range search found a product vector within the overlap margin, so no entanglement evidence"
        }
        Verdict::Inconclusive => "a stage did not produce the evidence the verdict needs",
    }
}
