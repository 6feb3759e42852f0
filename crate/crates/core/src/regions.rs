//! Contraction regions in the `(r, c)` plane.
//!
//! `R_n` is where some `n`-fold composition of branch maps contracts `B`, estimated
//! as the sup over all `2ⁿ` words and a set of seeds of the chained derivative.
//! `R_A` is where the branch images alone map `B` into itself, in closed form.

use alloc::vec::Vec;

use crate::ai_limit::{beta_for, branch_step, verify_maps_into, Direction};
use crate::cubic::cubic_c_roots;
use crate::math::{abs, hypot, sqrt};
use crate::symbols::Symbol;
use crate::{Error, Result};

pub const DEFAULT_NUM_SEEDS: usize = 100;

/// Seeds are pulled this far inside `B`, relative to `β`.
const SEED_INSET: f64 = 1e-9;

/// Regular lattice of `nr × nc` points including the endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub nr: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub nc: usize,
}

impl ParamGrid {
    pub fn new(r_min: f64, r_max: f64, nr: usize, c_min: f64, c_max: f64, nc: usize) -> Result<Self> {
        if !(r_min < r_max && c_min < c_max) || !(r_min.is_finite() && r_max.is_finite()) {
            return Err(Error::InvalidParameter("grid bounds must be finite and increasing"));
        }
        if !(c_min.is_finite() && c_max.is_finite()) {
            return Err(Error::InvalidParameter("grid bounds must be finite and increasing"));
        }
        if nr < 2 || nc < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 points per axis"));
        }
        Ok(Self { r_min, r_max, nr, c_min, c_max, nc })
    }

    pub fn len(&self) -> usize {
        self.nr * self.nc
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn r_at(&self, i: usize) -> f64 {
        lerp(self.r_min, self.r_max, i, self.nr)
    }

    #[inline]
    pub fn c_at(&self, j: usize) -> f64 {
        lerp(self.c_min, self.c_max, j, self.nc)
    }

    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / (self.nr - 1) as f64
    }

    pub fn dc(&self) -> f64 {
        (self.c_max - self.c_min) / (self.nc - 1) as f64
    }

    /// Flat index; `r` is the slow axis.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nc + j
    }

    #[inline]
    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.r_at(idx / self.nc), self.c_at(idx % self.nc))
    }
}

#[inline]
fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64 / (n - 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    /// Labels are the smallest contracting `n`, capped at `n_max`.
    Numerical { n_max: u16 },
    /// Labels are 0/1.
    Analytic,
}

/// Per-cell labels over a [`ParamGrid`]; 0 means "not a member".
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub grid: ParamGrid,
    pub labels: Vec<u16>,
    pub direction: Direction,
    pub kind: MaskKind,
}

impl RegionMask {
    pub fn new(grid: ParamGrid, labels: Vec<u16>, direction: Direction, kind: MaskKind) -> Result<Self> {
        if labels.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, labels, direction, kind })
    }

    #[inline]
    pub fn is_member(&self, idx: usize) -> bool {
        self.labels[idx] > 0
    }

    pub fn count(&self) -> usize {
        self.labels.iter().filter(|&&l| l > 0).count()
    }

    /// The mask of `R_n`: cells whose smallest contracting iterate is `≤ n`.
    pub fn restrict_to(&self, n: u16) -> RegionMask {
        let labels = self.labels.iter().map(|&l| if l <= n { l } else { 0 }).collect();
        let kind = match self.kind {
            MaskKind::Numerical { n_max } => MaskKind::Numerical { n_max: n_max.min(n) },
            k => k,
        };
        RegionMask { grid: self.grid, labels, direction: self.direction, kind }
    }
}

fn seeds(beta: f64, num_seeds: usize) -> impl Iterator<Item = f64> {
    let b = beta * (1.0 - SEED_INSET);
    let m = num_seeds.max(2);
    // integer numerator keeps the set exactly symmetric about 0
    (0..m).map(move |k| b * ((2 * k) as f64 - (m - 1) as f64) / (m - 1) as f64)
}

/// Sup over all words of length `n` and seeds in `B` of the chained derivative
/// `|d/dξ h_{s_n} ∘ … ∘ h_{s_1}(ξ)|`.
///
/// `+∞` when `B` is undefined, when the branch images do not map `B` into
/// itself, or when a branch is undefined at some node of the word tree.
pub fn derivative_norm_estimate(r: f64, c: f64, n: usize, dir: Direction, num_seeds: usize) -> f64 {
    let Some(beta) = certified_beta(r, c, dir) else {
        return f64::INFINITY;
    };
    let mut worst = 0.0f64;
    for x in seeds(beta, num_seeds) {
        worst = worst.max(tree_max(x, 1.0, n, r, c, dir, f64::INFINITY));
        if worst == f64::INFINITY {
            break;
        }
    }
    worst
}

/// Whether every length-`n` word contracts at every seed, i.e.
/// `derivative_norm_estimate < 1`, stopping at the first witness otherwise.
pub fn contracts(r: f64, c: f64, n: usize, dir: Direction, num_seeds: usize) -> bool {
    let Some(beta) = certified_beta(r, c, dir) else {
        return false;
    };
    seeds(beta, num_seeds).all(|x| tree_max(x, 1.0, n, r, c, dir, 1.0) < 1.0)
}

fn certified_beta(r: f64, c: f64, dir: Direction) -> Option<f64> {
    let b = beta_for(r, c, dir).ok()?;
    verify_maps_into(r, c, b, dir).then_some(b.beta())
}

/// Depth-first walk of the word tree below `(x, d)`; the product of slopes
/// along a path is shared by all words with that prefix. Returns as soon as
/// the running max reaches `cutoff`.
fn tree_max(x: f64, d: f64, depth: usize, r: f64, c: f64, dir: Direction, cutoff: f64) -> f64 {
    if depth == 0 {
        let m = abs(d);
        return if m.is_nan() { f64::INFINITY } else { m };
    }
    let mut worst = 0.0f64;
    for s in [Symbol::Plus, Symbol::Minus] {
        let m = match branch_step(x, s, r, c, dir) {
            Some((y, slope)) => tree_max(y, d * slope, depth - 1, r, c, dir, cutoff),
            None => f64::INFINITY,
        };
        worst = worst.max(m);
        if worst >= cutoff {
            break;
        }
    }
    worst
}

/// Smallest `n ≤ n_max` with a contracting `n`-fold composition, or 0.
pub fn rn_label(r: f64, c: f64, n_max: u16, dir: Direction, num_seeds: usize) -> u16 {
    if certified_beta(r, c, dir).is_none() {
        return 0;
    }
    (1..=n_max).find(|&n| contracts(r, c, n as usize, dir, num_seeds)).unwrap_or(0)
}

/// Numerical `R_n` mask over `grid`, labelled by the smallest contracting `n`.
pub fn compute_rn(grid: &ParamGrid, n_max: u16, dir: Direction, num_seeds: usize) -> Result<RegionMask> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1"));
    }
    let labels = (0..grid.len())
        .map(|idx| {
            let (r, c) = grid.point(idx);
            rn_label(r, c, n_max, dir, num_seeds)
        })
        .collect();
    RegionMask::new(*grid, labels, dir, MaskKind::Numerical { n_max })
}

const SQRT15: f64 = 3.872_983_346_207_417;
const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Closed-form forward `R_A`.
///
/// ```text
/// |r| ≤ 2/√15:         c < C₂(r)
/// 2/√15 < |r| ≤ 2/√3:  c < 1 + |r|(|r| − √(r² + 4))
/// |r| > 2/√3:          c < −r²/4
/// ```
pub fn analytic_ra_forward(r: f64, c: f64) -> bool {
    let ar = abs(r);
    if ar <= 2.0 / SQRT15 {
        match cubic_c_roots(r).c2 {
            Some(c2) => c < c2,
            None => false,
        }
    } else if ar <= 2.0 / SQRT3 {
        c < 1.0 + ar * (ar - sqrt(r * r + 4.0))
    } else {
        c < -r * r / 4.0
    }
}

/// Closed-form backward `R_A`: `c > C₃(r)`, the largest root of the cubic.
pub fn analytic_ra_backward(r: f64, c: f64) -> bool {
    c > cubic_c_roots(r).c3
}

pub fn analytic_ra(r: f64, c: f64, dir: Direction) -> bool {
    match dir {
        Direction::Forward => analytic_ra_forward(r, c),
        Direction::Backward => analytic_ra_backward(r, c),
    }
}

pub fn analytic_mask(grid: &ParamGrid, dir: Direction) -> RegionMask {
    let labels = (0..grid.len())
        .map(|idx| {
            let (r, c) = grid.point(idx);
            analytic_ra(r, c, dir) as u16
        })
        .collect();
    RegionMask { grid: *grid, labels, direction: dir, kind: MaskKind::Analytic }
}

/// Discrete Hausdorff distance between the member cells of two masks, in the
/// Euclidean `(r, c)` metric over lattice points.
pub fn hausdorff_distance(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    if a.count() == 0 || b.count() == 0 {
        return Err(Error::EmptySet);
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// `max_{x ∈ A} min_{y ∈ B} |x − y|`.
///
/// Points of `A` inside `B` contribute 0. For a lattice point outside `B`, the
/// nearest member of `B` always has an in-grid neighbor outside `B` (stepping
/// toward the point would otherwise get closer), so only those boundary
/// cells are searched.
fn directed(a: &RegionMask, b: &RegionMask) -> f64 {
    let g = &a.grid;
    let boundary: Vec<(f64, f64)> = (0..g.len())
        .filter(|&idx| b.is_member(idx) && has_outside_neighbor(b, idx))
        .map(|idx| g.point(idx))
        .collect();
    let mut worst = 0.0f64;
    for idx in (0..g.len()).filter(|&idx| a.is_member(idx) && !b.is_member(idx)) {
        let (r, c) = g.point(idx);
        let mut best = f64::INFINITY;
        for &(br, bc) in &boundary {
            best = best.min(hypot(r - br, c - bc));
            // cannot raise the running max any more
            if best <= worst {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst
}

fn has_outside_neighbor(m: &RegionMask, idx: usize) -> bool {
    let g = &m.grid;
    let (i, j) = (idx / g.nc, idx % g.nc);
    (i > 0 && !m.is_member(g.index(i - 1, j)))
        || (i + 1 < g.nr && !m.is_member(g.index(i + 1, j)))
        || (j > 0 && !m.is_member(g.index(i, j - 1)))
        || (j + 1 < g.nc && !m.is_member(g.index(i, j + 1)))
}
