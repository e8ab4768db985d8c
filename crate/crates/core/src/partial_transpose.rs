//! Partial transpose on mode B and its block structure.
//!
//! For states built from `U(pi/4)|n,0>` the only nonzero entries of the partial
//! transpose are `<a,b|.|c,d>` with `a - b = c - d`, so ordering the basis by
//! `delta = a - b` makes it block diagonal. Each block `M_delta` uses the basis
//! `|delta + k, k>` (delta >= 0) or `|k, |delta| + k>` (delta < 0), k ascending.
//!
//! Mixing in `|Omega><Omega|` breaks this: its partial transpose couples blocks
//! whose `delta` share a parity. [`coupled_sectors`] merges blocks along any
//! coupling that survives the leak tolerance, which always yields an exact
//! direct-sum decomposition.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::fock::{hermitian_eigenvalues, is_positive_definite_shifted, CMatrix, FockCutoff, TwoModeState};

/// `delta = a - b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockIndex(pub i32);

impl BlockIndex {
    pub fn of(a: usize, b: usize) -> Self {
        BlockIndex(a as i32 - b as i32)
    }

    pub fn delta(self) -> i32 {
        self.0
    }

    /// Ordered basis `(a, b)` of the block at this cutoff.
    pub fn basis(self, cutoff: FockCutoff) -> Vec<(usize, usize)> {
        let n_max = cutoff.n_max() as i32;
        let d = self.0;
        if d.abs() > n_max {
            return Vec::new();
        }
        let shift = d.unsigned_abs() as usize;
        (0..=(n_max - d.abs()) as usize)
            .map(|k| if d >= 0 { (shift + k, k) } else { (k, shift + k) })
            .collect()
    }

    pub fn all(cutoff: FockCutoff) -> impl Iterator<Item = BlockIndex> {
        let n = cutoff.n_max() as i32;
        (-n..=n).map(BlockIndex)
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtBlock {
    pub basis: Vec<(usize, usize)>,
    pub matrix: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtBlockDecomposition {
    pub blocks: BTreeMap<BlockIndex, PtBlock>,
    pub cutoff: FockCutoff,
    /// Largest `|entry|` of the input with `a - b != c - d`.
    pub off_block_residual: f64,
}

impl PtBlockDecomposition {
    pub fn total_dim(&self) -> usize {
        self.blocks.values().map(|b| b.basis.len()).sum()
    }

    pub fn largest_diagonal(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|b| (0..b.matrix.nrows()).map(move |i| b.matrix[(i, i)].re))
            .fold(0.0, f64::max)
    }
}

/// Defaults for the block machinery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockTolerances {
    /// Off-block entries above this make [`block_decompose`] report leakage.
    pub leak: f64,
    /// PSD threshold, relative to the largest block diagonal entry.
    pub psd_relative: f64,
    pub herm: f64,
}

impl Default for BlockTolerances {
    fn default() -> Self {
        BlockTolerances {
            leak: 1e-12,
            psd_relative: 1e-10,
            herm: 1e-10,
        }
    }
}

/// `<a,b|out|c,d> = <a,d|in|c,b>`.
pub fn partial_transpose_b(state: &TwoModeState) -> TwoModeState {
    let c = state.cutoff();
    let d = c.mode_dim();
    let m = state.matrix();
    let out = CMatrix::from_fn(c.dim(), c.dim(), |row, col| {
        let (a, b) = (row / d, row % d);
        let (cc, dd) = (col / d, col % d);
        m[(a * d + dd, cc * d + b)]
    });
    TwoModeState::from_parts(out, c, state.tail_mass())
}

fn off_block_residual(pt: &TwoModeState) -> f64 {
    let c = pt.cutoff();
    let m = pt.matrix();
    let mut worst = 0.0f64;
    for i in 0..c.dim() {
        let di = BlockIndex::of(c.pair(i).0, c.pair(i).1);
        for j in 0..c.dim() {
            let (x, y) = c.pair(j);
            if BlockIndex::of(x, y) != di {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

fn extract(pt: &TwoModeState, basis: &[(usize, usize)]) -> CMatrix {
    let c = pt.cutoff();
    let idx: Vec<usize> = basis.iter().map(|&(a, b)| c.index(a, b)).collect();
    let m = pt.matrix();
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

fn decompose_unchecked(pt: &TwoModeState) -> PtBlockDecomposition {
    let cutoff = pt.cutoff();
    let blocks = BlockIndex::all(cutoff)
        .map(|delta| {
            let basis = delta.basis(cutoff);
            let matrix = extract(pt, &basis);
            (delta, PtBlock { basis, matrix })
        })
        .collect();
    PtBlockDecomposition {
        blocks,
        cutoff,
        off_block_residual: off_block_residual(pt),
    }
}

/// Split a partially transposed state into its `delta` blocks. On leakage the
/// error still carries the full decomposition for inspection.
pub fn block_decompose(pt_state: &TwoModeState, leak_tol: f64) -> Result<PtBlockDecomposition> {
    let dec = decompose_unchecked(pt_state);
    if dec.off_block_residual > leak_tol {
        return Err(Error::BlockLeakage {
            residual: dec.off_block_residual,
            tolerance: leak_tol,
            decomposition: alloc::boxed::Box::new(dec),
        });
    }
    Ok(dec)
}

/// Smallest eigenvalue of every block.
pub fn min_block_eigenvalues(dec: &PtBlockDecomposition, herm_tol: f64) -> Result<BTreeMap<BlockIndex, f64>> {
    let mut out = BTreeMap::new();
    for (delta, block) in &dec.blocks {
        let e = hermitian_eigenvalues(&block.matrix, herm_tol)?;
        out.insert(*delta, e.first().copied().unwrap_or(0.0));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PptVerdict {
    Ppt,
    Npt,
}

/// Global PPT verdict from per-block minima.
#[derive(Clone, Debug, PartialEq)]
pub struct PptSummary {
    pub verdict: PptVerdict,
    pub min_eigenvalue: f64,
    pub psd_tol: f64,
}

pub fn ppt_summary<I: IntoIterator<Item = f64>>(minima: I, largest_diagonal: f64, psd_relative: f64) -> PptSummary {
    let min_eigenvalue = minima.into_iter().fold(f64::INFINITY, f64::min);
    let psd_tol = psd_relative * largest_diagonal;
    let verdict = if min_eigenvalue >= -psd_tol {
        PptVerdict::Ppt
    } else {
        PptVerdict::Npt
    };
    PptSummary {
        verdict,
        min_eigenvalue,
        psd_tol,
    }
}

/// A union of `delta` blocks closed under every coupling above the leak tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub deltas: Vec<BlockIndex>,
    pub basis: Vec<(usize, usize)>,
    pub matrix: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorDecomposition {
    pub sectors: Vec<Sector>,
    pub cutoff: FockCutoff,
    /// Largest `|entry|` left outside every sector; at most `leak_tol`.
    pub residual: f64,
}

impl SectorDecomposition {
    pub fn largest_diagonal(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| (0..s.matrix.nrows()).map(move |i| s.matrix[(i, i)].re))
            .fold(0.0, f64::max)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merge `delta` blocks connected by any entry larger than `leak_tol`.
///
/// For the beam-split family this returns one sector per `delta`; for the
/// squeezed mixture it returns the even and odd `delta` sectors.
pub fn coupled_sectors(pt: &TwoModeState, leak_tol: f64) -> SectorDecomposition {
    let c = pt.cutoff();
    let n = c.n_max() as i32;
    let slot = |d: BlockIndex| (d.0 + n) as usize;
    let mut parent: Vec<usize> = (0..(2 * n + 1) as usize).collect();
    let m = pt.matrix();
    for i in 0..c.dim() {
        let (a, b) = c.pair(i);
        let di = slot(BlockIndex::of(a, b));
        for j in 0..c.dim() {
            if m[(i, j)].norm() > leak_tol {
                let (x, y) = c.pair(j);
                let dj = slot(BlockIndex::of(x, y));
                let (ri, rj) = (find(&mut parent, di), find(&mut parent, dj));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<BlockIndex>> = BTreeMap::new();
    for d in BlockIndex::all(c) {
        let root = find(&mut parent, slot(d));
        groups.entry(root).or_default().push(d);
    }
    let mut membership = alloc::vec![0usize; c.dim()];
    let sectors: Vec<Sector> = groups
        .into_values()
        .enumerate()
        .map(|(sid, deltas)| {
            let basis: Vec<(usize, usize)> = deltas.iter().flat_map(|d| d.basis(c)).collect();
            for &(a, b) in &basis {
                membership[c.index(a, b)] = sid;
            }
            let matrix = extract(pt, &basis);
            Sector { deltas, basis, matrix }
        })
        .collect();
    let mut residual = 0.0f64;
    for i in 0..c.dim() {
        for j in 0..c.dim() {
            if membership[i] != membership[j] {
                residual = residual.max(m[(i, j)].norm());
            }
        }
    }
    SectorDecomposition {
        sectors,
        cutoff: c,
        residual,
    }
}

pub fn sector_min_eigenvalues(dec: &SectorDecomposition, herm_tol: f64) -> Result<Vec<f64>> {
    dec.sectors
        .iter()
        .map(|s| hermitian_eigenvalues(&s.matrix, herm_tol).map(|e| e.first().copied().unwrap_or(0.0)))
        .collect()
}

/// Cholesky-only PPT test: `true` iff every sector has smallest eigenvalue
/// above `-psd_tol`. Cheaper than a full eigensolve; used for bisection.
pub fn sectors_are_ppt(dec: &SectorDecomposition, psd_tol: f64) -> bool {
    dec.sectors
        .iter()
        .all(|s| is_positive_definite_shifted(&s.matrix, psd_tol))
}
