//! The quadratic diffeomorphism, its third-order difference equation, the
//! rescaled two-parameter form and the conic classification of the AI curve.

use crate::math::{abs, sqrt};
use crate::{Error, Result};

/// Default absolute tolerance used to detect measure-zero degeneracies.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// The seven map parameters. `delta` is the Jacobian determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParams {
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
}

impl MapParams {
    pub const fn new(alpha: f64, sigma: f64, tau: f64, a: f64, b: f64, c: f64, delta: f64) -> Self {
        Self { alpha, sigma, tau, a, b, c, delta }
    }

    /// Normalized convention: `tau = 0` and `b = 1 - a - c`.
    pub fn normalized(alpha: f64, sigma: f64, a: f64, c: f64, delta: f64) -> Self {
        Self::new(alpha, sigma, 0.0, a, 1.0 - a - c, c, delta)
    }

    /// Reduced mode: normalized with `b = 0`, hence `a = 1 - c`.
    pub fn reduced(alpha: f64, sigma: f64, c: f64, delta: f64) -> Self {
        Self::new(alpha, sigma, 0.0, 1.0 - c, 0.0, c, delta)
    }

    /// Reduced-mode parameters from the rescaled pair, `alpha = -ε⁻²`, `sigma = r ε⁻¹`.
    pub fn from_rescaled(q: RescaledParams, c: f64, delta: f64) -> Result<Self> {
        let (alpha, sigma) = q.alpha_sigma()?;
        Ok(Self::reduced(alpha, sigma, c, delta))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        abs(self.tau) <= tol && abs(self.a + self.b + self.c - 1.0) <= tol
    }

    pub fn is_reduced(&self, tol: f64) -> bool {
        self.is_normalized(tol) && abs(self.b) <= tol
    }

    /// The rescaled pair for `alpha < 0`.
    pub fn rescaled(&self) -> Option<RescaledParams> {
        if self.alpha < 0.0 {
            let epsilon = 1.0 / sqrt(-self.alpha);
            Some(RescaledParams { epsilon, r: self.sigma * epsilon })
        } else {
            None
        }
    }

    /// `Q(x, y) = ax² + bxy + cy²`
    #[inline]
    pub fn quad(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }
}

/// The rescaled pair `(ε, r)` with `α = -ε⁻²` and `σ = r ε⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledParams {
    pub epsilon: f64,
    pub r: f64,
}

impl RescaledParams {
    pub const fn new(epsilon: f64, r: f64) -> Self {
        Self { epsilon, r }
    }

    pub fn alpha_sigma(&self) -> Result<(f64, f64)> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive"));
        }
        Ok((-1.0 / (self.epsilon * self.epsilon), self.r / self.epsilon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dist(&self, other: &State3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        sqrt(dx * dx + dy * dy + dz * dz)
    }
}

/// One step of the map. Non-finite output is the divergence signal; see
/// [`map_forward_checked`] for the checked variant.
#[inline]
pub fn map_forward(s: State3, p: &MapParams) -> State3 {
    let x = p.delta * s.z + p.alpha + p.tau * s.x - p.sigma * s.y + p.quad(s.x, s.y);
    State3 { x, y: s.x, z: s.y }
}

pub fn map_forward_checked(s: State3, p: &MapParams) -> Result<State3> {
    let next = map_forward(s, p);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Diverged)
    }
}

/// Inverse of [`map_forward`]; requires `delta != 0`.
pub fn map_inverse(s: State3, p: &MapParams) -> Result<State3> {
    if p.delta == 0.0 {
        return Err(Error::NotInvertible);
    }
    let (x, y) = (s.y, s.z);
    let z = (s.x - p.alpha - p.tau * x + p.sigma * y - p.quad(x, y)) / p.delta;
    Ok(State3 { x, y, z })
}

/// `x_{t+1} = δ x_{t-2} + α − σ x_{t-1} + Q(x_t, x_{t-1})`, valid when `tau = 0`.
#[inline]
pub fn difference_step(x_t: f64, x_tm1: f64, x_tm2: f64, p: &MapParams) -> f64 {
    p.delta * x_tm2 + p.alpha - p.sigma * x_tm1 + p.quad(x_t, x_tm1)
}

/// Residual of the rescaled difference equation
/// `Q(ξ_t, ξ_{t−1}) − rξ_{t−1} − 1 − ε(ξ_{t+1} − δξ_{t−2})`.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn rescaled_residual(
    xi_tp1: f64,
    xi_t: f64,
    xi_tm1: f64,
    xi_tm2: f64,
    q: RescaledParams,
    a: f64,
    b: f64,
    c: f64,
    delta: f64,
) -> f64 {
    a * xi_t * xi_t + b * xi_t * xi_tm1 + c * xi_tm1 * xi_tm1
        - q.r * xi_tm1
        - 1.0
        - q.epsilon * (xi_tp1 - delta * xi_tm2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConicClass {
    Ellipse,
    Parabola,
    Hyperbola,
    DegenerateVerticalLines,
    DegenerateIntersectingLines,
    DegenerateHorizontalLines,
    /// Listed for completeness; unreachable in reduced mode since `a(r² + 4c) = 0`
    /// has no solution with `0 < c < 1`.
    DegeneratePoint,
}

impl ConicClass {
    pub fn name(&self) -> &'static str {
        match self {
            ConicClass::Ellipse => "Ellipse",
            ConicClass::Parabola => "Parabola",
            ConicClass::Hyperbola => "Hyperbola",
            ConicClass::DegenerateVerticalLines => "DegenerateVerticalLines",
            ConicClass::DegenerateIntersectingLines => "DegenerateIntersectingLines",
            ConicClass::DegenerateHorizontalLines => "DegenerateHorizontalLines",
            ConicClass::DegeneratePoint => "DegeneratePoint",
        }
    }
}

impl core::fmt::Display for ConicClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classify the reduced AI curve `(1−c)ξ_t² + cξ_{t−1}² = rξ_{t−1} + 1`.
pub fn classify_conic(r: f64, c: f64) -> ConicClass {
    classify_conic_with_tol(r, c, DEGENERACY_TOL)
}

pub fn classify_conic_with_tol(r: f64, c: f64, tol: f64) -> ConicClass {
    if abs(c) <= tol && abs(r) <= tol {
        ConicClass::DegenerateHorizontalLines
    } else if abs(c - 1.0) <= tol {
        ConicClass::DegenerateVerticalLines
    } else if abs(c + 0.25 * r * r) <= tol {
        ConicClass::DegenerateIntersectingLines
    } else if abs(c) <= tol {
        ConicClass::Parabola
    } else if c > 0.0 && c < 1.0 {
        ConicClass::Ellipse
    } else {
        ConicClass::Hyperbola
    }
}

/// Discriminant `b² − 4ac` of the reduced curve, `4c(c − 1)`.
pub fn reduced_discriminant(c: f64) -> f64 {
    4.0 * c * (c - 1.0)
}

/// Fixed points `(ξ₋, ξ₊)` of the AI maps, the roots of `ξ² = rξ + 1`.
pub fn fixed_points_ai(r: f64) -> (f64, f64) {
    let root = sqrt(r * r + 4.0);
    // product of the roots is -1; avoids cancellation in the smaller one
    if r >= 0.0 {
        let plus = 0.5 * (r + root);
        (-1.0 / plus, plus)
    } else {
        let minus = 0.5 * (r - root);
        (minus, -1.0 / minus)
    }
}

/// `max(|ξ₊|, |ξ₋|) = (|r| + √(r² + 4)) / 2`
pub fn xi_max(r: f64) -> f64 {
    0.5 * (abs(r) + sqrt(r * r + 4.0))
}

/// Center `r / 2c` of the reduced conic.
pub fn conic_center(r: f64, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::UndefinedCenter);
    }
    Ok(r / (2.0 * c))
}
