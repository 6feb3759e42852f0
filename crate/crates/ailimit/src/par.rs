//! Parallel grid sweeps. Every cell is computed independently and results are
//! collected by index, so output never depends on the thread count.

use rayon::prelude::*;

use ailimit_core::continuation::{continue_branch, AiParams};
use ailimit_core::regions::{rn_label, MaskKind};
use ailimit_core::scan::{classify_cell, AlphaRGrid, ScanMap};
use ailimit_core::{Branch, ContinuationConfig, Direction, ParamGrid, RegionMask, ScanCell, ScanConfig, SymbolSequence};

use crate::error::{AppError, Result};

/// Runs `f` on a pool with `threads` workers; `None` means hardware parallelism.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(AppError::bad("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| AppError::bad(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn compute_rn(grid: &ParamGrid, n_max: u16, dir: Direction, seeds: usize) -> Result<RegionMask> {
    if n_max == 0 {
        return Err(AppError::bad("n_max must be at least 1"));
    }
    let labels: Vec<u16> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (r, c) = grid.point(idx);
            rn_label(r, c, n_max, dir, seeds)
        })
        .collect();
    Ok(RegionMask::new(*grid, labels, dir, MaskKind::Numerical { n_max })?)
}

pub fn attractor_scan(grid: &AlphaRGrid, map: &ScanMap, cfg: &ScanConfig) -> Result<Vec<ScanCell>> {
    cfg.validate()?;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (alpha, r) = grid.point(idx);
            classify_cell(alpha, r, map, cfg)
        })
        .collect())
}

/// Continues each word with `cfg_for(period)`; results keep the input order.
pub fn continue_many(
    words: &[SymbolSequence],
    p: &AiParams,
    cfg_for: impl Fn(usize) -> ContinuationConfig + Sync,
) -> Vec<ailimit_core::Result<Branch>> {
    words.par_iter().map(|w| continue_branch(w, p, &cfg_for(w.period()))).collect()
}
