//! Parameter grids and the empirical PPT boundary in `|omega|`.
//!
//! A grid file lists values for any subset of the swept parameters; the
//! others keep their configured values:
//!
//! ```toml
//! omega = [1e-4, 1e-3, 1e-2]
//! lambda = [0.25, 0.5]
//! ```

use std::io::Write;
use std::path::Path;

use bent_core::partial_transpose::{coupled_sectors, partial_transpose_b, sectors_are_ppt};
use bent_core::states::build_mixture;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{run_certify, thread_pool};
use crate::config::Config;
use crate::error::CliError;
use crate::report::CertificationReport;
use crate::verdict::Verdict;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// `|omega|`; the configured phase is kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<Vec<usize>>,
}

/// Parameter values of one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub omega: f64,
    pub lambda: f64,
    pub nbar: f64,
    pub theta2: f64,
    pub n_max: usize,
}

impl GridPoint {
    fn of(c: &Config) -> Self {
        GridPoint {
            omega: c.state.omega.magnitude,
            lambda: c.state.lambda,
            nbar: c.state.nbar,
            theta2: c.state.theta2,
            n_max: c.numerics.n_max,
        }
    }

    fn apply(&self, base: &Config) -> Config {
        let mut c = base.clone();
        c.state.omega.magnitude = self.omega;
        c.state.lambda = self.lambda;
        c.state.nbar = self.nbar;
        c.state.theta2 = self.theta2;
        c.numerics.n_max = self.n_max;
        c
    }
}

impl Grid {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Cartesian product in the order omega, lambda, nbar, theta2, n_max, with
    /// the last parameter varying fastest.
    pub fn points(&self, base: &Config) -> Result<Vec<GridPoint>, CliError> {
        let axes = [&self.omega, &self.lambda, &self.nbar, &self.theta2];
        if axes.iter().all(|a| a.is_none()) && self.n_max.is_none() {
            return Err(CliError::Config("grid: no parameters to sweep".into()));
        }
        if axes.iter().any(|a| a.as_ref().is_some_and(Vec::is_empty)) || self.n_max.as_ref().is_some_and(Vec::is_empty)
        {
            return Err(CliError::Config("grid: empty value list".into()));
        }
        let here = GridPoint::of(base);
        let or = |v: &Option<Vec<f64>>, d: f64| v.clone().unwrap_or_else(|| vec![d]);
        let mut out = Vec::new();
        for &omega in &or(&self.omega, here.omega) {
            for &lambda in &or(&self.lambda, here.lambda) {
                for &nbar in &or(&self.nbar, here.nbar) {
                    for &theta2 in &or(&self.theta2, here.theta2) {
                        for &n_max in self.n_max.as_deref().unwrap_or(&[here.n_max]) {
                            out.push(GridPoint {
                                omega,
                                lambda,
                                nbar,
                                theta2,
                                n_max,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub omega: f64,
    pub lambda: f64,
    pub nbar: f64,
    pub theta2: f64,
    pub n_max: usize,
    pub min_pt_eigenvalue: f64,
    pub verdict: Verdict,
}

pub struct SweepResult {
    pub points: Vec<GridPoint>,
    pub reports: Vec<CertificationReport>,
}

impl SweepResult {
    pub fn summary(&self) -> Vec<SummaryRow> {
        self.points
            .iter()
            .zip(&self.reports)
            .map(|(p, r)| SummaryRow {
                omega: p.omega,
                lambda: p.lambda,
                nbar: p.nbar,
                theta2: p.theta2,
                n_max: p.n_max,
                min_pt_eigenvalue: r.ppt.min_eigenvalue,
                verdict: r.verdict,
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.summary() {
            out.serialize(row).map_err(|e| CliError::Config(format!("csv: {e}")))?;
        }
        out.flush().map_err(|e| CliError::Config(format!("csv: {e}")))
    }
}

/// Certifies every grid point. Points run concurrently; results keep grid order.
pub fn run_sweep(base: &Config, grid: &Grid) -> Result<SweepResult, CliError> {
    let points = grid.points(base)?;
    let configs: Vec<Config> = points.iter().map(|p| p.apply(base)).collect();
    for c in &configs {
        c.validate()?;
    }
    let pool = thread_pool()?;
    let reports = pool.install(|| {
        configs
            .par_iter()
            .map(|c| run_certify(c, None))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(SweepResult { points, reports })
}

pub const BISECT_LOW: f64 = 1e-6;
pub const BISECT_HIGH: f64 = 0.99;
/// Stop once `hi / lo - 1` drops below this: three significant figures.
pub const BISECT_REL_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BisectionStatus {
    /// PPT at the low end, NPT at the high end.
    Bracketed,
    /// PPT over the whole bracket.
    PptThroughout,
    /// NPT already at the low end.
    NptThroughout,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bisection {
    pub status: BisectionStatus,
    /// Largest `|omega|` seen PPT.
    pub ppt_below: f64,
    /// Smallest `|omega|` seen NPT.
    pub npt_above: f64,
    /// Geometric midpoint of the final bracket.
    pub boundary: Option<f64>,
    pub steps: usize,
}

/// PPT check at one `|omega|`, by Cholesky on the coupled sectors.
pub fn is_ppt_at(base: &Config, omega: f64) -> Result<bool, CliError> {
    let mut c = base.clone();
    c.state.omega.magnitude = omega;
    let spec = c.mixture_spec()?;
    let pt = partial_transpose_b(&build_mixture(&spec)?);
    let tol = &c.numerics.tolerances;
    let sectors = coupled_sectors(&pt, tol.leak);
    Ok(sectors_are_ppt(&sectors, tol.psd_relative * sectors.largest_diagonal()))
}

/// Geometric bisection of the PPT/NPT boundary in `|omega|`, assuming one crossing.
pub fn bisect_omega(base: &Config) -> Result<Bisection, CliError> {
    let (mut lo, mut hi) = (BISECT_LOW, BISECT_HIGH);
    if !is_ppt_at(base, lo)? {
        return Ok(Bisection {
            status: BisectionStatus::NptThroughout,
            ppt_below: 0.0,
            npt_above: lo,
            boundary: None,
            steps: 1,
        });
    }
    if is_ppt_at(base, hi)? {
        return Ok(Bisection {
            status: BisectionStatus::PptThroughout,
            ppt_below: hi,
            npt_above: f64::INFINITY,
            boundary: None,
            steps: 2,
        });
    }
    let mut steps = 2;
    while hi / lo - 1.0 >= BISECT_REL_TOL {
        let mid = (lo * hi).sqrt();
        if is_ppt_at(base, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(Bisection {
        status: BisectionStatus::Bracketed,
        ppt_below: lo,
        npt_above: hi,
        boundary: Some((lo * hi).sqrt()),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_is_a_config_error() {
        let base = Config::worked_example();
        assert!(matches!(
            Grid::from_toml("").unwrap().points(&base),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            Grid::from_toml("omega = []").unwrap().points(&base),
            Err(CliError::Config(_))
        ));
        assert!(Grid::from_toml("kappa = [1.0]").is_err());
    }

    #[test]
    fn points_follow_grid_order() {
        let base = Config::worked_example();
        let grid = Grid::from_toml("omega = [1e-4, 1e-3]\nn_max = [8, 10, 12]").unwrap();
        let pts = grid.points(&base).unwrap();
        assert_eq!(pts.len(), 6);
        let seen: Vec<(f64, usize)> = pts.iter().map(|p| (p.omega, p.n_max)).collect();
        assert_eq!(
            seen,
            [(1e-4, 8), (1e-4, 10), (1e-4, 12), (1e-3, 8), (1e-3, 10), (1e-3, 12)]
        );
        assert!(pts.iter().all(|p| p.lambda == 0.5 && p.nbar == 1.0));
    }

    #[test]
    fn lambda_one_row_is_npt() {
        let mut base = Config::worked_example();
        base.numerics.n_max = 32;
        base.range_search.n_max = 6;
        base.range_search.restarts = 4;
        let grid = Grid::from_toml("lambda = [0.0, 0.25, 0.5, 0.75, 1.0]").unwrap();
        let sweep = run_sweep(&base, &grid).unwrap();
        let rows = sweep.summary();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[4].verdict, Verdict::Npt);
        assert!(rows[4].min_pt_eigenvalue < -1e-3);
        assert_ne!(rows[2].verdict, Verdict::Npt);
        let mut csv = Vec::new();
        sweep.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("omega,lambda,nbar,theta2,n_max,min_pt_eigenvalue,verdict\n"));
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().last().unwrap().ends_with(",NPT"));
    }
}
