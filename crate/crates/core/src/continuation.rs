//! Pseudo-arclength continuation of periodic AI states in `ε`.
//!
//! A period-`n` orbit of the rescaled difference equation is a zero of
//! `G(ξ, ε) ∈ ℝⁿ`,
//!
//! ```text
//! G_t = aξ_t² + bξ_tξ_{t−1} + cξ_{t−1}² − rξ_{t−1} − 1 − ε(ξ_{t+1} − δξ_{t−2})
//! ```
//!
//! with indices taken mod `n`. At `ε = 0` the zeros are exactly the AI states.
//! Each step predicts along the unit tangent `v` and corrects on the
//! hyperplane `v·(z − z_k) = ℓ` with Broyden updates of a QR-factored
//! Jacobian.

use alloc::vec;
use alloc::vec::Vec;

use crate::ai_limit::{ai_state_from_symbols, default_max_iter, Direction, DEFAULT_AI_TOL};
use crate::linalg::{dot, norm2, norm_inf, Matrix, QrFactors};
use crate::map::{rescaled_residual, RescaledParams};
use crate::math::sqrt;
use crate::symbols::{Symbol, SymbolSequence};
use crate::{Error, Result};

/// Map coefficients of the rescaled equation; `ε` is the continuation parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
    pub delta: f64,
}

impl AiParams {
    /// Reduced mode, `b = 0` and `a = 1 − c`.
    pub fn reduced(r: f64, c: f64, delta: f64) -> Self {
        Self { a: 1.0 - c, b: 0.0, c, r, delta }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicState {
    pub xi: Vec<f64>,
    pub epsilon: f64,
}

impl PeriodicState {
    pub fn period(&self) -> usize {
        self.xi.len()
    }

    fn to_vec(&self) -> Vec<f64> {
        let mut z = self.xi.clone();
        z.push(self.epsilon);
        z
    }

    fn from_vec(mut z: Vec<f64>) -> Self {
        let epsilon = z.pop().unwrap_or(0.0);
        Self { xi: z, epsilon }
    }

    /// `α = −ε⁻²`
    pub fn alpha(&self) -> f64 {
        -1.0 / (self.epsilon * self.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub xi_dot: Vec<f64>,
    pub eps_dot: f64,
}

impl Tangent {
    fn to_vec(&self) -> Vec<f64> {
        let mut v = self.xi_dot.clone();
        v.push(self.eps_dot);
        v
    }

    fn from_vec(mut v: Vec<f64>) -> Self {
        let eps_dot = v.pop().unwrap_or(0.0);
        Self { xi_dot: v, eps_dot }
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub state: PeriodicState,
    pub tangent: Tangent,
    /// `‖G‖∞` at the accepted state.
    pub residual_norm: f64,
    /// Arclength step that produced this point; 0 for the start.
    pub step_len: f64,
    pub corrector_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// `ε` decreased between consecutive accepted points.
    EpsilonTurnaround,
    /// Jump-triggered halving drove `ℓ` below `ell_min`.
    StepUnderflow,
    /// Failure-triggered halving drove `ℓ` below `ell_min`.
    CorrectorFailure,
    /// Reached `eps_max` without turning around.
    EpsilonLimit,
    /// Hit `max_steps`.
    StepLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::EpsilonTurnaround => "epsilon_turnaround",
            Termination::StepUnderflow => "step_underflow",
            Termination::CorrectorFailure => "corrector_failure",
            Termination::EpsilonLimit => "epsilon_limit",
            Termination::StepLimit => "step_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
    pub symbols: SymbolSequence,
    pub params: AiParams,
    pub max_epsilon: f64,
    /// Halvings caused by a rejected jump.
    pub jump_halvings: usize,
    /// Halvings caused by a failed corrector. Not part of the basic scheme.
    pub failure_halvings: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationConfig {
    pub ell0: f64,
    pub ell_min: f64,
    pub jump_threshold: f64,
    pub corrector_tol: f64,
    pub max_corrector_iters: usize,
    pub initial_eps_dot: f64,
    /// Sup-norm radius around the predictor the corrector may not leave.
    pub trust_radius: f64,
    /// After this many clean steps in a row, `ℓ` doubles back toward `ell0`.
    pub regrow_after: usize,
    pub eps_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            ell0: 1e-2,
            ell_min: 1e-15,
            jump_threshold: 0.1,
            corrector_tol: 1e-12,
            max_corrector_iters: 150,
            initial_eps_dot: 0.005,
            trust_radius: 10.0,
            regrow_after: 3,
            eps_max: None,
            max_steps: 100_000,
        }
    }
}

impl ContinuationConfig {
    /// Defaults with `ℓ0 = 10⁻²` below period 10 and `10⁻¹` from there on.
    pub fn for_period(n: usize) -> Self {
        Self { ell0: if n < 10 { 1e-2 } else { 1e-1 }, ..Self::default() }
    }
}

#[inline]
fn wrap(t: isize, n: usize) -> usize {
    t.rem_euclid(n as isize) as usize
}

pub fn residual_g(state: &PeriodicState, p: &AiParams) -> Vec<f64> {
    let n = state.period();
    let xi = &state.xi;
    let q = RescaledParams::new(state.epsilon, p.r);
    (0..n as isize)
        .map(|t| {
            rescaled_residual(
                xi[wrap(t + 1, n)],
                xi[wrap(t, n)],
                xi[wrap(t - 1, n)],
                xi[wrap(t - 2, n)],
                q,
                p.a,
                p.b,
                p.c,
                p.delta,
            )
        })
        .collect()
}

/// `∂G/∂ξ` and `∂G/∂ε`. For `n ≤ 3` several bands land on the same entry and
/// are summed.
pub fn jacobian_g(state: &PeriodicState, p: &AiParams) -> (Matrix, Vec<f64>) {
    let n = state.period();
    let mut j = Matrix::zeros(n);
    let deps = fill_jacobian(state, p, |t, k, v| j[(t, k)] += v);
    (j, deps)
}

fn fill_jacobian(state: &PeriodicState, p: &AiParams, mut put: impl FnMut(usize, usize, f64)) -> Vec<f64> {
    let n = state.period();
    let (xi, eps) = (&state.xi, state.epsilon);
    let mut deps = vec![0.0; n];
    for t in 0..n as isize {
        let (tp1, t0, tm1, tm2) = (wrap(t + 1, n), wrap(t, n), wrap(t - 1, n), wrap(t - 2, n));
        let row = t0;
        put(row, tp1, -eps);
        put(row, t0, 2.0 * p.a * xi[t0] + p.b * xi[tm1]);
        put(row, tm1, p.b * xi[t0] + 2.0 * p.c * xi[tm1] - p.r);
        put(row, tm2, eps * p.delta);
        deps[row] = -(xi[tp1] - p.delta * xi[tm2]);
    }
    deps
}

/// `[∂G/∂ξ  ∂G/∂ε; vᵀ]`, the `(n+1)`-square bordered matrix.
fn bordered(state: &PeriodicState, p: &AiParams, last_row: &[f64]) -> Matrix {
    let n = state.period();
    let mut m = Matrix::zeros(n + 1);
    let deps = fill_jacobian(state, p, |t, k, v| m[(t, k)] += v);
    for (t, d) in deps.into_iter().enumerate() {
        m[(t, n)] = d;
    }
    m.row_mut(n).copy_from_slice(last_row);
    m
}

/// First tangent: `ε̇ = initial_eps_dot` and `∂G/∂ξ · ξ̇ = −∂G/∂ε · ε̇`, then
/// scaled to unit length.
pub fn initial_tangent(state: &PeriodicState, p: &AiParams, cfg: &ContinuationConfig) -> Result<Tangent> {
    let t = initial_tangent_raw(state, p, cfg)?;
    normalized(t.to_vec()).map(Tangent::from_vec).ok_or(Error::TangentFailure)
}

/// The unnormalized first tangent.
pub fn initial_tangent_raw(state: &PeriodicState, p: &AiParams, cfg: &ContinuationConfig) -> Result<Tangent> {
    let (j, deps) = jacobian_g(state, p);
    let rhs: Vec<f64> = deps.iter().map(|d| -d * cfg.initial_eps_dot).collect();
    let xi_dot = QrFactors::factor(j).solve(&rhs).map_err(|_| Error::TangentFailure)?;
    Ok(Tangent { xi_dot, eps_dot: cfg.initial_eps_dot })
}

/// Unit tangent at `state`: solve the bordered system with last row `prev`
/// and right-hand side `eₙ₊₁`, then normalize. The last row makes the inner
/// product with `prev` positive before scaling, so orientation is kept.
pub fn next_tangent(state: &PeriodicState, prev: &Tangent, p: &AiParams) -> Result<Tangent> {
    let raw = next_tangent_raw(state, prev, p)?;
    normalized(raw).map(Tangent::from_vec).ok_or(Error::TangentFailure)
}

fn next_tangent_raw(state: &PeriodicState, prev: &Tangent, p: &AiParams) -> Result<Vec<f64>> {
    let n = state.period();
    let m = bordered(state, p, &prev.to_vec());
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    QrFactors::factor(m).solve(&rhs).map_err(|_| Error::TangentFailure)
}

fn normalized(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let s = norm2(&v);
    if !(s > 0.0 && s.is_finite()) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= s);
    Some(v)
}

/// `(G(z), v·(z − z_prev) − ℓ)`
fn augmented(z: &[f64], prev: &[f64], v: &[f64], ell: f64, p: &AiParams) -> Vec<f64> {
    let state = PeriodicState { xi: z[..z.len() - 1].to_vec(), epsilon: z[z.len() - 1] };
    let mut f = residual_g(&state, p);
    let dz: Vec<f64> = z.iter().zip(prev).map(|(a, b)| a - b).collect();
    f.push(dot(v, &dz) - ell);
    f
}

/// Solve `{G = 0, v·(z − z_prev) = ℓ}` from `predicted`, where `v` and `z_prev`
/// come from `prev`.
///
/// The Jacobian is the analytic bordered matrix at the predictor, then
/// Broyden-updated: after a step `Δz` the secant condition gives
/// `J ← J + F(z_new) Δzᵀ / ‖Δz‖²`, folded into the QR factors in `O(n²)`.
pub fn corrector(
    predicted: &PeriodicState,
    prev: &BranchPoint,
    ell: f64,
    p: &AiParams,
    cfg: &ContinuationConfig,
) -> Result<BranchPoint> {
    let n = predicted.period();
    let z_prev = prev.state.to_vec();
    let v = prev.tangent.to_vec();
    let z_pred = predicted.to_vec();
    let mut z = z_pred.clone();
    let mut f = augmented(&z, &z_prev, &v, ell, p);

    let done = |f: &[f64]| norm_inf(&f[..n]) < cfg.corrector_tol && f[n].abs() < cfg.corrector_tol;
    let accept = |z: Vec<f64>, f: &[f64], iters: usize| BranchPoint {
        state: PeriodicState::from_vec(z),
        tangent: prev.tangent.clone(),
        residual_norm: norm_inf(&f[..n]),
        step_len: ell,
        corrector_iters: iters,
    };
    if done(&f) {
        return Ok(accept(z, &f, 0));
    }

    let mut qr = QrFactors::factor(bordered(predicted, p, &v));
    for iter in 1..=cfg.max_corrector_iters {
        let neg: Vec<f64> = f.iter().map(|x| -x).collect();
        let dz = qr.solve(&neg).map_err(|_| Error::CorrectorFailure { iters: iter })?;
        z.iter_mut().zip(&dz).for_each(|(a, d)| *a += d);
        let dist = z.iter().zip(&z_pred).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !(dist <= cfg.trust_radius) {
            return Err(Error::CorrectorDiverged);
        }
        let f_new = augmented(&z, &z_prev, &v, ell, p);
        if f_new.iter().any(|x| !x.is_finite()) {
            return Err(Error::CorrectorDiverged);
        }
        if done(&f_new) {
            return Ok(accept(z, &f_new, iter));
        }
        let dz2 = dot(&dz, &dz);
        if !(dz2 > 0.0) {
            return Err(Error::CorrectorFailure { iters: iter });
        }
        let u: Vec<f64> = f_new.iter().map(|x| x / dz2).collect();
        qr.rank_one_update(&u, &dz);
        f = f_new;
    }
    Err(Error::CorrectorFailure { iters: cfg.max_corrector_iters })
}

/// Newton polish at fixed `ε`, used to bring the starting state under tolerance.
fn polish_fixed_eps(state: &mut PeriodicState, p: &AiParams, tol: f64) -> Result<f64> {
    let mut res = norm_inf(&residual_g(state, p));
    for _ in 0..20 {
        if res < tol {
            break;
        }
        let (j, _) = jacobian_g(state, p);
        let g = residual_g(state, p);
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let dx = QrFactors::factor(j).solve(&neg)?;
        state.xi.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        res = norm_inf(&residual_g(state, p));
    }
    Ok(res)
}

/// Starting point from the AI state of `seq`; forward branch maps when they
/// are defined, backward ones otherwise.
pub fn start_point(seq: &SymbolSequence, p: &AiParams, cfg: &ContinuationConfig) -> Result<BranchPoint> {
    let max_iter = default_max_iter(seq.period(), DEFAULT_AI_TOL);
    let ai = ai_state_from_symbols(seq, p.r, p.c, Direction::Forward, DEFAULT_AI_TOL, max_iter)
        .or_else(|_| ai_state_from_symbols(seq, p.r, p.c, Direction::Backward, DEFAULT_AI_TOL, max_iter))?;
    let mut state = PeriodicState { xi: ai.xi, epsilon: 0.0 };
    let residual_norm = polish_fixed_eps(&mut state, p, cfg.corrector_tol)?;
    let tangent = initial_tangent(&state, p, cfg)?;
    Ok(BranchPoint { state, tangent, residual_norm, step_len: 0.0, corrector_iters: 0 })
}

/// Follow the branch of `seq` from `ε = 0` until `ε` turns around, the step
/// underflows, the corrector gives up, or a configured limit is hit.
pub fn continue_branch(seq: &SymbolSequence, p: &AiParams, cfg: &ContinuationConfig) -> Result<Branch> {
    let start = start_point(seq, p, cfg)?;
    let mut points = vec![start];
    let mut ell = cfg.ell0;
    let (mut jump_halvings, mut failure_halvings, mut clean) = (0, 0, 0);

    let termination = loop {
        if points.len() > cfg.max_steps {
            break Termination::StepLimit;
        }
        let prev = points.last().expect("branch has a start point");
        let pred_z: Vec<f64> =
            prev.state.to_vec().iter().zip(prev.tangent.to_vec()).map(|(z, t)| z + ell * t).collect();
        let predicted = PeriodicState::from_vec(pred_z);

        let accepted = corrector(&predicted, prev, ell, p, cfg)
            .and_then(|pt| next_tangent(&pt.state, &prev.tangent, p).map(|t| BranchPoint { tangent: t, ..pt }));
        let mut pt = match accepted {
            Ok(pt) => pt,
            Err(_) => {
                ell *= 0.5;
                failure_halvings += 1;
                clean = 0;
                if ell < cfg.ell_min {
                    break Termination::CorrectorFailure;
                }
                continue;
            }
        };
        let jump = pt
            .state
            .xi
            .iter()
            .zip(&prev.state.xi)
            .map(|(a, b)| (a - b).abs())
            .fold((pt.state.epsilon - prev.state.epsilon).abs(), f64::max);
        if jump > cfg.jump_threshold {
            ell *= 0.5;
            jump_halvings += 1;
            clean = 0;
            if ell < cfg.ell_min {
                break Termination::StepUnderflow;
            }
            continue;
        }
        pt.step_len = ell;
        let (eps_prev, eps) = (prev.state.epsilon, pt.state.epsilon);
        points.push(pt);
        if eps < eps_prev {
            break Termination::EpsilonTurnaround;
        }
        if cfg.eps_max.is_some_and(|m| eps >= m) {
            break Termination::EpsilonLimit;
        }
        clean += 1;
        if clean >= cfg.regrow_after && ell < cfg.ell0 {
            ell = (2.0 * ell).min(cfg.ell0);
            clean = 0;
        }
    };

    let max_epsilon = points.iter().map(|pt| pt.state.epsilon).fold(0.0, f64::max);
    Ok(Branch { points, termination, symbols: seq.clone(), params: *p, max_epsilon, jump_halvings, failure_halvings })
}

/// Local maxima of `ε` along the branch as `(ε, α = −ε⁻²)`. Each maximum is
/// refined by the vertex of the parabola through it and its neighbours,
/// parameterized by cumulative arclength.
pub fn detect_turning_points(branch: &Branch) -> Vec<(f64, f64)> {
    let pts = &branch.points;
    let mut s = vec![0.0; pts.len()];
    for k in 1..pts.len() {
        let a = pts[k].state.to_vec();
        let b = pts[k - 1].state.to_vec();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        s[k] = s[k - 1] + norm2(&d);
    }
    let eps: Vec<f64> = pts.iter().map(|pt| pt.state.epsilon).collect();
    turning_points_of(&s, &eps)
}

/// Vertex refinement of interior local maxima of the samples `(s_k, e_k)`.
pub fn turning_points_of(s: &[f64], e: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for k in 1..e.len().saturating_sub(1) {
        if !(e[k] >= e[k - 1] && e[k] > e[k + 1]) {
            continue;
        }
        let top = parabola_vertex((s[k - 1], e[k - 1]), (s[k], e[k]), (s[k + 1], e[k + 1])).unwrap_or(e[k]);
        let top = top.max(e[k]);
        out.push((top, -1.0 / (top * top)));
    }
    out
}

/// Extreme value of the parabola through three points with distinct abscissae.
fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> Option<f64> {
    // Newton form y = y0 + d1 (x − x0) + d2 (x − x0)(x − x1)
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let d2 = (d12 - d01) / (x2 - x0);
    if !(d2 < 0.0) || !d2.is_finite() {
        return None;
    }
    // y' = d01 + d2 (2x − x0 − x1) = 0
    let xv = 0.5 * (x0 + x1 - d01 / d2);
    Some(y0 + d01 * (xv - x0) + d2 * (xv - x0) * (xv - x1))
}

/// The `ε` at which the branch ends its excursion: the first turning point if
/// there is one, otherwise the largest `ε` reached.
pub fn terminal_epsilon(branch: &Branch) -> f64 {
    detect_turning_points(branch).first().map_or(branch.max_epsilon, |tp| tp.0)
}

/// Roots in `α`, ascending, of the fixed-point doubling curve
///
/// ```text
/// (3r² − 4)² α² + 2((5δ² + 6δ + 9) r² − 4δ² + 8δ + 12) α + (δ + 1)²(δ − 3)² = 0
/// ```
pub fn doubling_curve_alpha(r: f64, delta: f64) -> Result<(f64, f64)> {
    let [qa, qb, qc] = doubling_curve_coeffs(r, delta);
    if qa == 0.0 {
        return Err(Error::InvalidParameter("doubling curve is degenerate at 3r² = 4"));
    }
    let mut disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        // a double root (r = 0) can round to a tiny negative value
        if disc < -1e-12 * qb * qb {
            return Err(Error::NoRealDoubling { discriminant: disc });
        }
        disc = 0.0;
    }
    let q = -0.5 * (qb + qb.signum() * sqrt(disc));
    let (x1, x2) = if q == 0.0 { (-qb / (2.0 * qa), -qb / (2.0 * qa)) } else { (q / qa, qc / q) };
    Ok((x1.min(x2), x1.max(x2)))
}

pub fn doubling_curve_coeffs(r: f64, delta: f64) -> [f64; 3] {
    let (r2, d) = (r * r, delta);
    let lead = 3.0 * r2 - 4.0;
    [
        lead * lead,
        2.0 * ((5.0 * d * d + 6.0 * d + 9.0) * r2 - 4.0 * d * d + 8.0 * d + 12.0),
        (d + 1.0) * (d + 1.0) * (d - 3.0) * (d - 3.0),
    ]
}

/// `s s` with the first symbol flipped.
pub fn double_sequence(seq: &SymbolSequence) -> SymbolSequence {
    let mut out: Vec<Symbol> = seq.symbols().iter().chain(seq.symbols()).copied().collect();
    out[0] = out[0].flipped();
    SymbolSequence::new(out).expect("doubling a nonempty word")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::fixed_points_ai;
    use proptest::prelude::*;

    const SC: AiParams = AiParams { a: 1.0, b: 0.0, c: 0.0, r: -0.18, delta: 0.05 };

    fn seq(s: &str) -> SymbolSequence {
        s.parse().unwrap()
    }

    /// Roots of `ξ² − (r + ε(1 − δ))ξ − 1 = 0`, the period-1 case with `a + c = 1`.
    fn period_one(r: f64, eps: f64, delta: f64) -> (f64, f64) {
        let b = r + eps * (1.0 - delta);
        let root = (b * b + 4.0).sqrt();
        ((b - root) / 2.0, (b + root) / 2.0)
    }

    #[test]
    fn fixed_point_residual_vanishes() {
        let (_, plus) = fixed_points_ai(-0.18);
        let st = PeriodicState { xi: vec![plus], epsilon: 0.0 };
        assert!(norm_inf(&residual_g(&st, &SC)) < 1e-15);
    }

    #[test]
    fn ai_state_residual_is_small() {
        let p = AiParams::reduced(-0.18, 0.0, 0.05);
        let start = start_point(&seq("--++-+"), &p, &ContinuationConfig::default()).unwrap();
        assert!(start.residual_norm <= 1e-12);
    }

    #[test]
    fn residual_components_match_direct_formula() {
        let p = AiParams { a: 0.7, b: 0.1, c: 0.2, r: 0.3, delta: -0.4 };
        let xi = vec![0.3, -1.1, 0.8, 0.5, -0.2];
        let st = PeriodicState { xi: xi.clone(), epsilon: 0.37 };
        let g = residual_g(&st, &p);
        for t in 0..5 {
            let (x1, x0, xm1, xm2) = (xi[(t + 1) % 5], xi[t], xi[(t + 4) % 5], xi[(t + 3) % 5]);
            let direct = p.a * x0 * x0 + p.b * x0 * xm1 + p.c * xm1 * xm1 - p.r * xm1 - 1.0
                - 0.37 * (x1 - p.delta * xm2);
            assert!((g[t] - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn jacobian_bands_and_collisions() {
        let p = AiParams { a: 0.7, b: 0.1, c: 0.2, r: 0.3, delta: -0.4 };
        let st = PeriodicState { xi: vec![0.3, -1.1, 0.8, 0.5, -0.2], epsilon: 0.0 };
        let (j, _) = jacobian_g(&st, &p);
        for t in 0..5 {
            assert_eq!(j[(t, (t + 1) % 5)], 0.0);
            assert_eq!(j[(t, (t + 3) % 5)], 0.0);
        }
        let x = 0.9;
        let st = PeriodicState { xi: vec![x], epsilon: 0.3 };
        let (j, _) = jacobian_g(&st, &p);
        let sum = -0.3 + (2.0 * p.a * x + p.b * x) + (p.b * x + 2.0 * p.c * x - p.r) + 0.3 * p.delta;
        assert!((j[(0, 0)] - sum).abs() < 1e-15);
    }

    #[test]
    fn first_tangent_by_hand() {
        let p = AiParams::reduced(0.0, 0.0, 0.05);
        let st = PeriodicState { xi: vec![1.0], epsilon: 0.0 };
        let cfg = ContinuationConfig::default();
        let raw = initial_tangent_raw(&st, &p, &cfg).unwrap();
        assert!((raw.xi_dot[0] - 0.005 * (1.0 - 0.05) / 2.0).abs() < 1e-15);
        let t = initial_tangent(&st, &p, &cfg).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-15);
        assert!(t.eps_dot > 0.0);
    }

    #[test]
    fn zero_eps_derivative_gives_flat_tangent() {
        // δ = 1 and a constant state: ∂G/∂ε = −(ξ − ξ) = 0
        let p = AiParams::reduced(0.0, 0.0, 1.0);
        let st = PeriodicState { xi: vec![1.0, 1.0], epsilon: 0.0 };
        let raw = initial_tangent_raw(&st, &p, &ContinuationConfig::default()).unwrap();
        assert!(raw.xi_dot.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tangent_on_a_straight_line_is_constant() {
        // G = ξ² − 1 − ε(1 − δ)ξ with δ = 1 does not depend on ε
        let p = AiParams::reduced(0.0, 0.0, 1.0);
        let t0 = Tangent { xi_dot: vec![0.0], eps_dot: 1.0 };
        for eps in [0.0, 0.4, 1.3] {
            let t = next_tangent(&PeriodicState { xi: vec![1.0], epsilon: eps }, &t0, &p).unwrap();
            assert!((t.xi_dot[0]).abs() < 1e-15 && (t.eps_dot - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bordered_system_is_solved() {
        let st = PeriodicState { xi: vec![-1.1, 0.9, 0.8, -0.7], epsilon: 0.3 };
        let prev = Tangent { xi_dot: vec![0.1, -0.2, 0.05, 0.3], eps_dot: 0.9 };
        let raw = next_tangent_raw(&st, &prev, &SC).unwrap();
        let m = bordered(&st, &SC, &prev.to_vec());
        let back = m.mul_vec(&raw);
        for (k, v) in back.iter().enumerate() {
            let want = if k == 4 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10);
        }
        let t = next_tangent(&st, &prev, &SC).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-14);
        assert!(dot(&t.to_vec(), &prev.to_vec()) > 0.0);
    }

    #[test]
    fn corrector_accepts_an_exact_predictor() {
        let p = SC;
        let cfg = ContinuationConfig::default();
        let start = start_point(&seq("-"), &p, &cfg).unwrap();
        // put the predictor on the branch and on the hyperplane
        let eps = 0.2;
        let (xm, _) = period_one(p.r, eps, p.delta);
        let z = [xm, eps];
        let ell = dot(&start.tangent.to_vec(), &[z[0] - start.state.xi[0], z[1]]);
        let pred = PeriodicState { xi: vec![xm], epsilon: eps };
        let pt = corrector(&pred, &start, ell, &p, &cfg).unwrap();
        assert!(pt.corrector_iters <= 1);
    }

    #[test]
    fn corrector_lands_on_the_hyperplane() {
        let p = SC;
        let cfg = ContinuationConfig::default();
        let start = start_point(&seq("-+"), &p, &cfg).unwrap();
        let ell = 0.05;
        let v = start.tangent.to_vec();
        let z0 = start.state.to_vec();
        let pred = PeriodicState::from_vec(z0.iter().zip(&v).map(|(z, t)| z + ell * t).collect());
        let pt = corrector(&pred, &start, ell, &p, &cfg).unwrap();
        let dz: Vec<f64> = pt.state.to_vec().iter().zip(&z0).map(|(a, b)| a - b).collect();
        assert!((dot(&v, &dz) - ell).abs() < 1e-10);
        assert!(pt.residual_norm < 1e-12);
    }

    #[test]
    fn fixed_point_branch_follows_the_quadratic() {
        let cfg = ContinuationConfig { eps_max: Some(1.5), ..ContinuationConfig::for_period(1) };
        let br = continue_branch(&seq("-"), &SC, &cfg).unwrap();
        assert_eq!(br.termination, Termination::EpsilonLimit);
        assert!(detect_turning_points(&br).is_empty());
        for pt in &br.points {
            let (xm, _) = period_one(SC.r, pt.state.epsilon, SC.delta);
            assert!((pt.state.xi[0] - xm).abs() < 1e-10, "{} {}", pt.state.epsilon, pt.state.xi[0]);
            assert!(pt.residual_norm <= 1e-12);
        }
        assert_eq!(br.points[0].state.epsilon, 0.0);
    }

    #[test]
    fn period_two_turns_near_the_doubling() {
        let br = continue_branch(&seq("-+"), &SC, &ContinuationConfig::for_period(2)).unwrap();
        assert_eq!(br.termination, Termination::EpsilonTurnaround);
        let tps = detect_turning_points(&br);
        assert_eq!(tps.len(), 1);
        // the doubling curve gives the exact collision
        let (_, alpha) = doubling_curve_alpha(SC.r, SC.delta).unwrap();
        let eps_pd = 1.0 / (-alpha).sqrt();
        assert!((tps[0].0 - eps_pd).abs() < 5e-3, "{} vs {eps_pd}", tps[0].0);
    }

    #[test]
    fn accepted_points_are_close_and_converged() {
        let br = continue_branch(&seq("--+"), &SC, &ContinuationConfig::for_period(3)).unwrap();
        for w in br.points.windows(2) {
            let jump = w[1]
                .state
                .to_vec()
                .iter()
                .zip(w[0].state.to_vec())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(jump <= 0.1);
        }
        for pt in &br.points {
            assert!(pt.residual_norm <= 1e-12);
            assert!(norm_inf(&residual_g(&pt.state, &SC)) <= 1e-12);
        }
    }

    #[test]
    fn parabola_vertex_is_recovered() {
        // e(s) = 1.2 − 0.3 (s − 0.77)²
        let f = |s: f64| 1.2 - 0.3 * (s - 0.77) * (s - 0.77);
        let s: Vec<f64> = (0..12).map(|k| 0.1 * k as f64).collect();
        let e: Vec<f64> = s.iter().map(|&x| f(x)).collect();
        let tps = turning_points_of(&s, &e);
        assert_eq!(tps.len(), 1);
        assert!((tps[0].0 - 1.2).abs() < 1e-12);
        assert!((tps[0].1 + 1.0 / 1.44).abs() < 1e-12);
        let mono: Vec<f64> = s.iter().map(|x| 2.0 * x).collect();
        assert!(turning_points_of(&s, &mono).is_empty());
    }

    #[test]
    fn doubling_curve_examples() {
        let (lo, hi) = doubling_curve_alpha(-0.18, 0.05).unwrap();
        assert!((hi - -0.579_494_815_477_836).abs() < 1e-12, "{hi}");
        assert!(lo < hi);
        let (a, b) = doubling_curve_alpha(0.0, 0.0).unwrap();
        assert_eq!((a, b), (-0.75, -0.75));
        assert_eq!(doubling_curve_coeffs(0.0, 0.0), [16.0, 24.0, 9.0]);
        // r = 0 is always a double root, (δ+1)(δ−3)/4; rounding must not lose it
        let (a, b) = doubling_curve_alpha(0.0, 0.05).unwrap();
        assert!((a - -0.774_375).abs() < 1e-6 && (b - -0.774_375).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn doubling_sequences() {
        let mut s = seq("-");
        let rows = [
            "+-",
            "--+-",
            "+-+---+-",
            "--+---+-+-+---+-",
            "+-+---+-+-+---+---+---+-+-+---+-",
        ];
        for want in rows {
            s = double_sequence(&s);
            assert_eq!(s.to_text(), want);
        }
    }

    proptest! {
        #[test]
        fn jacobian_matches_finite_differences(
            xi in prop::collection::vec(-1.5..1.5f64, 1..7),
            eps in 0.0..1.5f64,
            r in -1.0..1.0f64,
            c in -0.5..0.9f64,
            delta in -1.0..1.0f64,
        ) {
            let p = AiParams::reduced(r, c, delta);
            let st = PeriodicState { xi: xi.clone(), epsilon: eps };
            let (j, deps) = jacobian_g(&st, &p);
            let n = xi.len();
            for k in 0..=n {
                let mut up = st.clone();
                let mut dn = st.clone();
                let base = if k < n { xi[k] } else { eps };
                let h = 1e-6 * (1.0 + base.abs());
                if k < n { up.xi[k] += h; dn.xi[k] -= h; } else { up.epsilon += h; dn.epsilon -= h; }
                let (gu, gd) = (residual_g(&up, &p), residual_g(&dn, &p));
                for t in 0..n {
                    let fd = (gu[t] - gd[t]) / (2.0 * h);
                    let an = if k < n { j[(t, k)] } else { deps[t] };
                    prop_assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "t={} k={} fd={} an={}", t, k, fd, an);
                }
            }
        }
    }
}
