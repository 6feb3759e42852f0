//! Real roots of cubic polynomials (trigonometric / Cardano), and the cubic
//! whose roots bound the elliptic contraction regions.

use crate::math::{abs, acos, cbrt, cos, sqrt};

const TWO_PI_3: f64 = 2.094_395_102_393_195_5;

/// Real roots of `a x³ + b x² + c x + d` (with `a != 0`) in ascending order.
/// The count of valid entries is returned alongside.
pub fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> ([f64; 3], usize) {
    let (p, q, shift) = depressed(a, b, c, d);
    let disc = 4.0 * p * p * p + 27.0 * q * q;
    if p < 0.0 && disc <= 0.0 {
        let mut roots = trig_roots(p, q, shift);
        for x in roots.iter_mut() {
            *x = polish(a, b, c, d, *x);
        }
        roots.sort_by(f64::total_cmp);
        (roots, 3)
    } else {
        let x = polish(a, b, c, d, cardano_root(p, q, shift));
        ([x, f64::NAN, f64::NAN], 1)
    }
}

fn depressed(a: f64, b: f64, c: f64, d: f64) -> (f64, f64, f64) {
    let (b, c, d) = (b / a, c / a, d / a);
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    (p, q, -b / 3.0)
}

fn trig_roots(p: f64, q: f64, shift: f64) -> [f64; 3] {
    if p == 0.0 {
        return [shift; 3];
    }
    let m = 2.0 * sqrt(-p / 3.0);
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = acos(arg) / 3.0;
    [
        m * cos(theta) + shift,
        m * cos(theta - TWO_PI_3) + shift,
        m * cos(theta - 2.0 * TWO_PI_3) + shift,
    ]
}

fn cardano_root(p: f64, q: f64, shift: f64) -> f64 {
    let s = sqrt((q * q / 4.0 + p * p * p / 27.0).max(0.0));
    let u = cbrt(-q / 2.0 + s);
    let v = cbrt(-q / 2.0 - s);
    u + v + shift
}

/// One Newton step, kept only if it reduces |P|.
fn polish(a: f64, b: f64, c: f64, d: f64, x: f64) -> f64 {
    let f = ((a * x + b) * x + c) * x + d;
    let df = (3.0 * a * x + 2.0 * b) * x + c;
    if df == 0.0 || !df.is_finite() {
        return x;
    }
    let y = x - f / df;
    let fy = ((a * y + b) * y + c) * y + d;
    if abs(fy) < abs(f) {
        y
    } else {
        x
    }
}

/// Roots of `P(c) = 64c³ + 32(r²−2)c² + (r²−4)(5r²−4)c − 4r⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Largest real root; the only one when `|r| > 2√2/5`.
    pub c3: f64,
}

pub fn ellipse_poly_coeffs(r: f64) -> [f64; 4] {
    let r2 = r * r;
    [64.0, 32.0 * (r2 - 2.0), (r2 - 4.0) * (5.0 * r2 - 4.0), -4.0 * r2 * r2]
}

pub fn ellipse_poly(r: f64, c: f64) -> f64 {
    let [a, b, cc, d] = ellipse_poly_coeffs(r);
    ((a * c + b) * c + cc) * c + d
}

/// `2⁸ r² (r²+4)⁴ (8 − 25r²)`
pub fn ellipse_poly_discriminant(r: f64) -> f64 {
    let r2 = r * r;
    let s = r2 + 4.0;
    256.0 * r2 * s * s * s * s * (8.0 - 25.0 * r2)
}

pub fn cubic_c_roots(r: f64) -> CubicRoots {
    let [a, b, c, d] = ellipse_poly_coeffs(r);
    if 8.0 - 25.0 * r * r >= 0.0 {
        let (p, q, shift) = depressed(a, b, c, d);
        let mut roots = if p < 0.0 { trig_roots(p, q, shift) } else { [shift; 3] };
        for x in roots.iter_mut() {
            *x = polish(a, b, c, d, *x);
        }
        roots.sort_by(f64::total_cmp);
        CubicRoots { c1: Some(roots[0]), c2: Some(roots[1]), c3: roots[2] }
    } else {
        let (roots, n) = real_cubic_roots(a, b, c, d);
        CubicRoots { c1: None, c2: None, c3: roots[n - 1] }
    }
}
