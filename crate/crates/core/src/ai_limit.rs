//! The AI-limit correspondence `(1−c)ξ_t² + cξ_{t−1}² = rξ_{t−1} + 1` in reduced
//! mode: its forward branches `f_±`, backward branches `g_±`, invariant
//! intervals `B = [−β, β]` and periodic AI states.

use alloc::vec::Vec;

use crate::map::{conic_center, xi_max};
use crate::math::{abs, ceil, ln, sqrt};
use crate::symbols::{Symbol, SymbolSequence};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        }
    }
}

/// The symmetric interval `[−β, β]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalB {
    beta: f64,
}

impl IntervalB {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 {
            Ok(Self { beta })
        } else {
            Err(Error::InvalidParameter("beta must be finite and positive"))
        }
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[inline]
fn forward_radicand(xi: f64, r: f64, c: f64) -> f64 {
    (-c * xi * xi + r * xi + 1.0) / (1.0 - c)
}

#[inline]
fn backward_radicand(xi: f64, r: f64, c: f64) -> f64 {
    r * r + 4.0 * c - 4.0 * (1.0 - c) * c * xi * xi
}

/// `f_s(ξ) = s √((−cξ² + rξ + 1)/a)` with `a = 1 − c`.
pub fn ai_forward(xi: f64, s: Symbol, r: f64, c: f64) -> Result<f64> {
    if c == 1.0 {
        return Err(Error::NoForwardMap);
    }
    let rad = forward_radicand(xi, r, c);
    if rad < 0.0 || rad.is_nan() {
        return Err(Error::BranchUndefined { xi, radicand: rad });
    }
    Ok(s.sign() * sqrt(rad))
}

/// `g_s(ξ) = (r + s √(r² + 4c − 4acξ²)) / 2c`
pub fn ai_backward(xi: f64, s: Symbol, r: f64, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::NoBackwardBranching);
    }
    let rad = backward_radicand(xi, r, c);
    if rad < 0.0 || rad.is_nan() {
        return Err(Error::BranchUndefined { xi, radicand: rad });
    }
    Ok((r + s.sign() * sqrt(rad)) / (2.0 * c))
}

/// `f_s'(ξ) = s(r − 2cξ) / (2√(a(−cξ² + rξ + 1)))`
pub fn ai_forward_derivative(xi: f64, s: Symbol, r: f64, c: f64) -> Result<f64> {
    if c == 1.0 {
        return Err(Error::NoForwardMap);
    }
    let a = 1.0 - c;
    let rad = forward_radicand(xi, r, c);
    if rad < 0.0 || rad.is_nan() {
        return Err(Error::BranchUndefined { xi, radicand: rad });
    }
    if rad == 0.0 {
        return Err(Error::InfiniteSlope { xi });
    }
    // a·√(rad) equals √(a·(−cξ² + rξ + 1)) for a > 0
    Ok(s.sign() * (r - 2.0 * c * xi) / (2.0 * a * sqrt(rad)))
}

/// `g_s'(ξ) = −2 s a ξ / √(r² + 4c − 4acξ²)`, by implicit differentiation.
pub fn ai_backward_derivative(xi: f64, s: Symbol, r: f64, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::NoBackwardBranching);
    }
    let rad = backward_radicand(xi, r, c);
    if rad < 0.0 || rad.is_nan() {
        return Err(Error::BranchUndefined { xi, radicand: rad });
    }
    if rad == 0.0 {
        return Err(Error::InfiniteSlope { xi });
    }
    Ok(-2.0 * s.sign() * (1.0 - c) * xi / sqrt(rad))
}

/// Branch value and slope together, shared by the derivative-tree sweeps.
/// Returns `None` where the branch is undefined or vertical.
#[inline]
pub(crate) fn branch_step(xi: f64, s: Symbol, r: f64, c: f64, dir: Direction) -> Option<(f64, f64)> {
    match dir {
        Direction::Forward => {
            let a = 1.0 - c;
            if a == 0.0 {
                return None;
            }
            let h = (-c * xi * xi + r * xi + 1.0) / a;
            if !(h > 0.0) {
                return None;
            }
            let root = sqrt(h);
            let sg = s.sign();
            Some((sg * root, sg * (r - 2.0 * c * xi) / (2.0 * a * root)))
        }
        Direction::Backward => {
            if c == 0.0 {
                return None;
            }
            let rad = backward_radicand(xi, r, c);
            if !(rad > 0.0) {
                return None;
            }
            let root = sqrt(rad);
            let sg = s.sign();
            Some(((r + sg * root) / (2.0 * c), -2.0 * sg * (1.0 - c) * xi / root))
        }
    }
}

/// The interval `B = [−β, β]` used for `(r, c)` in the given direction.
///
/// Forward: `β = ξ_max` for the hyperbolic (`c < 0`), parabolic (`c = 0`) and
/// outlying-ellipse cases, and the top of the bounding rectangle
/// `√((r² + 4c)/(4ac))` when `[−ξ_max, ξ_max]` contains the ellipse center.
/// Backward: `β = (|r| + √(r² + 4c))/2c` for the ellipse, `ξ_max` for `c ≥ 1`.
pub fn beta_for(r: f64, c: f64, dir: Direction) -> Result<IntervalB> {
    let undefined = Err(Error::NoInterval { r, c });
    if !(r.is_finite() && c.is_finite()) {
        return undefined;
    }
    let beta = match dir {
        Direction::Forward => {
            if c <= 0.0 {
                xi_max(r)
            } else if c < 1.0 {
                let xm = xi_max(r);
                let center = conic_center(r, c)?;
                if abs(center) < xm {
                    sqrt((r * r + 4.0 * c) / (4.0 * (1.0 - c) * c))
                } else {
                    xm
                }
            } else {
                return undefined;
            }
        }
        Direction::Backward => {
            if c <= 0.0 {
                return undefined;
            } else if c < 1.0 {
                (abs(r) + sqrt(r * r + 4.0 * c)) / (2.0 * c)
            } else {
                xi_max(r)
            }
        }
    };
    IntervalB::new(beta)
}

const CONTAIN_RTOL: f64 = 1e-12;

/// Certify `h_±(B) ⊂ B` with disjoint branch images, where `h` is the forward or
/// backward branch pair.
///
/// Images are computed exactly from the monotone pieces of the radicand on
/// `[−β, β]` (endpoints plus interior extremum), not by sampling. Disjointness
/// is equivalent to a strictly positive radicand on `B`; for the forward pair
/// this is the same as `0 ∉ f_±(B)` because `f_− = −f_+`.
pub fn verify_maps_into(r: f64, c: f64, b: IntervalB, dir: Direction) -> bool {
    branch_images(r, c, b, dir).is_some_and(|[plus, minus]| {
        let lim = b.beta() * (1.0 + CONTAIN_RTOL);
        plus.0 >= -lim && plus.1 <= lim && minus.0 >= -lim && minus.1 <= lim
    })
}

/// Closed images `[lo, hi]` of `B` under the `+` and `−` branches, or `None` if
/// the radicand is not strictly positive on `B`.
pub fn branch_images(r: f64, c: f64, b: IntervalB, dir: Direction) -> Option<[(f64, f64); 2]> {
    let beta = b.beta();
    match dir {
        Direction::Forward => {
            if c >= 1.0 {
                return None;
            }
            // numerator −cξ² + rξ + 1, over a > 0
            let h = |x: f64| forward_radicand(x, r, c);
            let (mut lo, mut hi) = (h(-beta).min(h(beta)), h(-beta).max(h(beta)));
            if c != 0.0 {
                let vertex = r / (2.0 * c);
                if abs(vertex) < beta {
                    let hv = h(vertex);
                    lo = lo.min(hv);
                    hi = hi.max(hv);
                }
            }
            if !(lo > 0.0) {
                return None;
            }
            let (a, z) = (sqrt(lo), sqrt(hi));
            Some([(a, z), (-z, -a)])
        }
        Direction::Backward => {
            if c <= 0.0 {
                return None;
            }
            // radicand is even in ξ and monotone in |ξ|
            let k0 = backward_radicand(0.0, r, c);
            let kb = backward_radicand(beta, r, c);
            let (lo, hi) = (k0.min(kb), k0.max(kb));
            if !(lo > 0.0) {
                return None;
            }
            let (s_lo, s_hi) = (sqrt(lo), sqrt(hi));
            let two_c = 2.0 * c;
            Some([((r + s_lo) / two_c, (r + s_hi) / two_c), ((r - s_hi) / two_c, (r - s_lo) / two_c)])
        }
    }
}

/// A periodic AI state. `xi[t]` reads forward in time for both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct AIState {
    pub xi: Vec<f64>,
    pub symbols: SymbolSequence,
    pub r: f64,
    pub c: f64,
    pub direction: Direction,
    /// Max |curve residual| over all indices, wrap-around included.
    pub residual: f64,
}

/// Residual `aξ_t² + cξ_{t−1}² − rξ_{t−1} − 1` at every index of a periodic state.
pub fn curve_residuals(xi: &[f64], r: f64, c: f64) -> Vec<f64> {
    let n = xi.len();
    let a = 1.0 - c;
    (0..n)
        .map(|t| {
            let prev = xi[(t + n - 1) % n];
            a * xi[t] * xi[t] + c * prev * prev - r * prev - 1.0
        })
        .collect()
}

pub const DEFAULT_AI_TOL: f64 = 1e-12;

/// `10 · period · ⌈log₂(1/tol)⌉`, at least 10000.
pub fn default_max_iter(period: usize, tol: f64) -> usize {
    let bits = ceil(ln(1.0 / tol) / ln(2.0)).max(1.0) as usize;
    (10 * period * bits).max(10_000)
}

/// AI state for `seq`, seeded at `β/2` with the sign of the first symbol consumed.
pub fn ai_state_from_symbols(
    seq: &SymbolSequence,
    r: f64,
    c: f64,
    dir: Direction,
    tol: f64,
    max_iter: usize,
) -> Result<AIState> {
    let b = beta_for(r, c, dir)?;
    let first = match dir {
        Direction::Forward => seq.symbols()[0],
        Direction::Backward => seq.symbols()[seq.period() - 1],
    };
    ai_state_with_seed(seq, r, c, dir, tol, max_iter, first.sign() * 0.5 * b.beta())
}

/// Same as [`ai_state_from_symbols`] with an explicit seed value.
///
/// Forward: the seed plays `ξ_{−1}`, then `ξ_t = f_{s_t}(ξ_{t−1})` cyclically.
/// Backward: the seed plays `ξ_n`, then `ξ_{t−1} = g_{s_{t−1}}(ξ_t)`, so symbols
/// are consumed in reversed time order. Iteration stops once two successive
/// period blocks agree to `tol` in the sup norm; the block is then polished
/// until it stops changing.
pub fn ai_state_with_seed(
    seq: &SymbolSequence,
    r: f64,
    c: f64,
    dir: Direction,
    tol: f64,
    max_iter: usize,
    seed: f64,
) -> Result<AIState> {
    let n = seq.period();
    let syms = seq.symbols();
    let mut block = alloc::vec![0.0; n];
    let mut prev_block = alloc::vec![f64::NAN; n];
    let mut carry = seed;
    let mut steps = 0usize;

    let sweep = |block: &mut [f64], carry: &mut f64| -> Result<()> {
        match dir {
            Direction::Forward => {
                for t in 0..n {
                    *carry = ai_forward(*carry, syms[t], r, c)?;
                    block[t] = *carry;
                }
            }
            Direction::Backward => {
                for t in (0..n).rev() {
                    *carry = ai_backward(*carry, syms[t], r, c)?;
                    block[t] = *carry;
                }
            }
        }
        Ok(())
    };

    let mut converged = false;
    while steps < max_iter {
        sweep(&mut block, &mut carry)?;
        steps += n;
        let diff = sup_diff(&block, &prev_block);
        if diff < tol {
            converged = true;
            break;
        }
        prev_block.copy_from_slice(&block);
    }
    if !converged {
        return Err(Error::ConvergenceFailure { max_iter });
    }
    // polish: contraction keeps shrinking the change down to round-off
    let mut last = sup_diff(&block, &prev_block);
    for _ in 0..64 {
        prev_block.copy_from_slice(&block);
        sweep(&mut block, &mut carry)?;
        let diff = sup_diff(&block, &prev_block);
        if diff == 0.0 || diff >= last {
            break;
        }
        last = diff;
    }

    for (t, (&x, &s)) in block.iter().zip(syms).enumerate() {
        if Symbol::from_sign(x) != Some(s) {
            return Err(Error::SymbolMismatch { index: t });
        }
    }
    let residual = curve_residuals(&block, r, c).into_iter().fold(0.0f64, |m, v| m.max(abs(v)));
    Ok(AIState { xi: block, symbols: seq.clone(), r, c, direction: dir, residual })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| {
        let d = abs(x - y);
        if d.is_nan() {
            f64::INFINITY
        } else {
            m.max(d)
        }
    })
}
