//! Attractor classification over the `(α, r)` plane, maximal Lyapunov
//! exponents, close returns and symbol extraction from orbits.

use alloc::vec::Vec;

use crate::map::{map_forward, MapParams, State3};
use crate::math::{ln, sqrt};
use crate::symbols::{Symbol, SymbolSequence};
use crate::{Error, Result};

/// `x₋ = (1 + σ − δ − √((1 + σ − δ)² − 4α)) / 2`, the smaller fixed point of
/// the normalized map.
pub fn fixed_point_x_minus(alpha: f64, sigma: f64, delta: f64) -> Result<f64> {
    let b = 1.0 + sigma - delta;
    let disc = b * b - 4.0 * alpha;
    if !(disc >= 0.0) {
        return Err(Error::NoFixedPoint { discriminant: disc });
    }
    Ok(0.5 * (b - sqrt(disc)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `(x₋ + dx, x₋, x₋)`
    FixedPointOffset { dx: f64 },
    Explicit(State3),
}

/// Quadratic coefficients shared by every cell of a scan; `α` and
/// `σ = r√(−α)` vary per cell and `τ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
}

impl ScanMap {
    /// `(a, b, c, δ) = (1, 0, 0, 0.05)`: a small perturbation of Hénon.
    pub const STRONGLY_CONTRACTING: ScanMap = ScanMap { a: 1.0, b: 0.0, c: 0.0, delta: 0.05 };

    pub fn params(&self, alpha: f64, r: f64) -> MapParams {
        MapParams::new(alpha, r * sqrt(-alpha), 0.0, self.a, self.b, self.c, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub transient: usize,
    pub kappa_max: f64,
    pub return_tol: f64,
    pub period_max: usize,
    pub ic: InitialCondition,
    pub lyap_steps: usize,
    pub lyap_discard: usize,
    pub chaos_threshold: f64,
}

impl ScanConfig {
    pub fn new(kappa_max: f64) -> Self {
        Self {
            transient: 5000,
            kappa_max,
            return_tol: 1e-4,
            period_max: 90,
            ic: InitialCondition::FixedPointOffset { dx: 1e-3 },
            lyap_steps: 20_000,
            lyap_discard: 1000,
            chaos_threshold: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.transient == 0 || self.period_max == 0 || self.lyap_steps == 0 {
            return Err(Error::InvalidParameter("scan step counts must be positive"));
        }
        if !(self.kappa_max > 0.0 && self.return_tol > 0.0 && self.chaos_threshold > 0.0) {
            return Err(Error::InvalidParameter("scan tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanClass {
    Diverged,
    Periodic(u32),
    Regular,
    Chaotic,
}

impl ScanClass {
    pub fn name(&self) -> &'static str {
        match self {
            ScanClass::Diverged => "diverged",
            ScanClass::Periodic(_) => "periodic",
            ScanClass::Regular => "regular",
            ScanClass::Chaotic => "chaotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCell {
    pub class: ScanClass,
    pub period: Option<u32>,
    pub lyapunov: Option<f64>,
}

impl ScanCell {
    fn of(class: ScanClass) -> Self {
        let period = match class {
            ScanClass::Periodic(p) => Some(p),
            _ => None,
        };
        Self { class, period, lyapunov: None }
    }
}

pub fn initial_state(ic: InitialCondition, p: &MapParams) -> Result<State3> {
    match ic {
        InitialCondition::Explicit(s) => Ok(s),
        InitialCondition::FixedPointOffset { dx } => {
            let xm = fixed_point_x_minus(p.alpha, p.sigma, p.delta)?;
            Ok(State3::new(xm + dx, xm, xm))
        }
    }
}

#[inline]
fn escaped(s: &State3, kappa: f64) -> bool {
    // also catches NaN
    !(s.x.abs() <= kappa)
}

/// Classify the attractor reached from the configured initial condition.
///
/// After the transient, the smallest `p ≤ period_max` with
/// `‖s_{T+p} − s_T‖ < return_tol` in the 3-vector norm makes the cell
/// periodic; otherwise the maximal Lyapunov exponent decides between
/// regular and chaotic. Any `|x| > κ_max` along the way means divergence.
pub fn classify_cell(alpha: f64, r: f64, map: &ScanMap, cfg: &ScanConfig) -> ScanCell {
    let p = map.params(alpha, r);
    let Ok(mut s) = initial_state(cfg.ic, &p) else {
        return ScanCell::of(ScanClass::Diverged);
    };
    for _ in 0..cfg.transient {
        s = map_forward(s, &p);
        if escaped(&s, cfg.kappa_max) {
            return ScanCell::of(ScanClass::Diverged);
        }
    }
    let base = s;
    for period in 1..=cfg.period_max {
        s = map_forward(s, &p);
        if escaped(&s, cfg.kappa_max) {
            return ScanCell::of(ScanClass::Diverged);
        }
        if s.dist(&base) < cfg.return_tol {
            return ScanCell::of(ScanClass::Periodic(period as u32));
        }
    }
    match max_lyapunov(base, &p, cfg) {
        Ok(l) => {
            let class = if l > cfg.chaos_threshold { ScanClass::Chaotic } else { ScanClass::Regular };
            ScanCell { class, period: None, lyapunov: Some(l) }
        }
        Err(_) => ScanCell::of(ScanClass::Diverged),
    }
}

/// Tangent-vector estimate of the largest Lyapunov exponent, natural log per
/// iterate. The vector is renormalized every step; the first `lyap_discard`
/// steps only align it.
pub fn max_lyapunov(ic: State3, p: &MapParams, cfg: &ScanConfig) -> Result<f64> {
    let mut s = ic;
    let mut v = [1.0, 0.0, 0.0];
    let mut sum = 0.0;
    for k in 0..cfg.lyap_discard + cfg.lyap_steps {
        // rows [τ + 2ax + by, −σ + bx + 2cy, δ], [1, 0, 0], [0, 1, 0]
        let j0 = p.tau + 2.0 * p.a * s.x + p.b * s.y;
        let j1 = -p.sigma + p.b * s.x + 2.0 * p.c * s.y;
        let w = [j0 * v[0] + j1 * v[1] + p.delta * v[2], v[0], v[1]];
        let norm = sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
        s = map_forward(s, p);
        if escaped(&s, cfg.kappa_max) || !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Diverged);
        }
        v = [w[0] / norm, w[1] / norm, w[2] / norm];
        if k >= cfg.lyap_discard {
            sum += ln(norm);
        }
    }
    Ok(sum / cfg.lyap_steps as f64)
}

/// Times `p ≤ max_steps` at which the orbit comes back within `threshold` of
/// its start, one `(p, distance)` per return event. An event is a run of
/// consecutive close times; its first time is reported.
pub fn close_returns(ic: State3, p: &MapParams, threshold: f64, max_steps: usize) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let mut s = ic;
    let mut inside = false;
    for step in 1..=max_steps {
        s = map_forward(s, p);
        if !s.is_finite() {
            return Err(Error::Diverged);
        }
        let d = s.dist(&ic);
        let close = d < threshold;
        if close && !inside {
            out.push((step, d));
        }
        inside = close;
    }
    Ok(out)
}

/// `x_0, …, x_{n−1}` along the orbit of `ic`.
pub fn orbit_x(ic: State3, p: &MapParams, n: usize) -> Result<Vec<f64>> {
    let mut s = ic;
    let mut xs = Vec::with_capacity(n);
    for _ in 0..n {
        if !s.is_finite() {
            return Err(Error::Diverged);
        }
        xs.push(s.x);
        s = map_forward(s, p);
    }
    Ok(xs)
}

/// Symbols `s_t = sign(ε x_t)`.
pub fn symbols_from_orbit(orbit: &[f64], epsilon: f64) -> Result<SymbolSequence> {
    let syms = orbit
        .iter()
        .enumerate()
        .map(|(t, &x)| Symbol::from_sign(epsilon * x).ok_or(Error::AmbiguousSymbol { index: t }))
        .collect::<Result<Vec<_>>>()?;
    SymbolSequence::new(syms)
}

/// Lattice over `α × r`, `r` the slow axis. A single point per axis is allowed
/// when its bounds coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRGrid {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub n_alpha: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
}

impl AlphaRGrid {
    pub fn new(alpha_min: f64, alpha_max: f64, n_alpha: usize, r_min: f64, r_max: f64, n_r: usize) -> Result<Self> {
        let axis_ok = |lo: f64, hi: f64, n: usize| {
            lo.is_finite() && hi.is_finite() && n >= 1 && ((n == 1 && lo == hi) || (n >= 2 && lo < hi))
        };
        if !axis_ok(alpha_min, alpha_max, n_alpha) || !axis_ok(r_min, r_max, n_r) {
            return Err(Error::InvalidParameter("scan grid axes must be increasing, or one point with equal bounds"));
        }
        // σ = r√(−α) needs α ≤ 0
        if alpha_max > 0.0 {
            return Err(Error::InvalidParameter("alpha must not be positive"));
        }
        Ok(Self { alpha_min, alpha_max, n_alpha, r_min, r_max, n_r })
    }

    /// One `r` value, `n` values of `α`.
    pub fn alpha_line(alpha_min: f64, alpha_max: f64, n: usize, r: f64) -> Result<Self> {
        Self::new(alpha_min, alpha_max, n, r, r, 1)
    }

    pub fn len(&self) -> usize {
        self.n_alpha * self.n_r
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn alpha_at(&self, i: usize) -> f64 {
        axis(self.alpha_min, self.alpha_max, i, self.n_alpha)
    }

    pub fn r_at(&self, j: usize) -> f64 {
        axis(self.r_min, self.r_max, j, self.n_r)
    }

    /// `(α, r)` at flat index `j · n_alpha + i`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.alpha_at(idx % self.n_alpha), self.r_at(idx / self.n_alpha))
    }

    pub fn d_alpha(&self) -> f64 {
        if self.n_alpha < 2 {
            0.0
        } else {
            (self.alpha_max - self.alpha_min) / (self.n_alpha - 1) as f64
        }
    }
}

fn axis(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n == 1 {
        lo
    } else if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64 / (n - 1) as f64)
    }
}

/// Sequential scan; see the `ailimit` crate for the parallel driver.
pub fn attractor_scan(grid: &AlphaRGrid, map: &ScanMap, cfg: &ScanConfig) -> Vec<ScanCell> {
    (0..grid.len())
        .map(|idx| {
            let (alpha, r) = grid.point(idx);
            classify_cell(alpha, r, map, cfg)
        })
        .collect()
}

/// Landmarks read off a scan along a line of increasing `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineLandmarks {
    /// Smallest `α` from which every cell up to the end is bounded.
    pub bounded_onset: Option<f64>,
    /// Smallest `α` from which every cell up to the end is periodic with a
    /// power-of-two period.
    pub cascade_entry: Option<f64>,
}

pub fn line_landmarks(alphas: &[f64], cells: &[ScanCell]) -> LineLandmarks {
    let tail_start = |pred: &dyn Fn(&ScanCell) -> bool| -> Option<f64> {
        let mut start = None;
        for (a, cell) in alphas.iter().zip(cells).rev() {
            if !pred(cell) {
                break;
            }
            start = Some(*a);
        }
        start
    };
    LineLandmarks {
        bounded_onset: tail_start(&|c| c.class != ScanClass::Diverged),
        cascade_entry: tail_start(&|c| matches!(c.class, ScanClass::Periodic(p) if p.is_power_of_two())),
    }
}

/// `(min α, max α)` over cells classified `Periodic(p)`.
pub fn period_window(alphas: &[f64], cells: &[ScanCell], p: u32) -> Option<(f64, f64)> {
    alphas
        .iter()
        .zip(cells)
        .filter(|(_, c)| c.class == ScanClass::Periodic(p))
        .fold(None, |acc, (&a, _)| match acc {
            None => Some((a, a)),
            Some((lo, hi)) => Some((lo.min(a), hi.max(a))),
        })
}
