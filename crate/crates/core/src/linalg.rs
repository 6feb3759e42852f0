//! Dense square matrices and a Givens QR factorization with rank-one updates.
//!
//! `Qᵀ` is stored explicitly, row-major, so both factorization and updates only
//! ever combine pairs of rows of `R` and `Qᵀ`. Rotations are skipped when the
//! entry to annihilate is already zero, which keeps banded systems cheap.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::math::{abs, hypot};
use crate::{Error, Result};

/// Pivots smaller than this fraction of the largest are treated as zero.
pub const SINGULAR_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParameter("matrix data length must be n²"));
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.n;
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self += u vᵀ`
    pub fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0.0 {
                for (m, &vj) in self.row_mut(i).iter_mut().zip(v) {
                    *m += ui * vj;
                }
            }
        }
    }

    /// Apply the rotation `[c s; −s c]` to rows `i` and `k`, from column `from` on.
    fn rotate_rows(&mut self, i: usize, k: usize, c: f64, s: f64, from: usize) {
        debug_assert!(i < k);
        let n = self.n;
        let (head, tail) = self.data.split_at_mut(k * n);
        let ri = &mut head[i * n + from..(i + 1) * n];
        let rk = &mut tail[from..n];
        for (a, b) in ri.iter_mut().zip(rk.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = c * x + s * y;
            *b = -s * x + c * y;
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |h, &x| hypot(h, x))
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, &x| if x.is_nan() { f64::INFINITY } else { m.max(abs(x)) })
}

/// Rotation `(c, s)` with `c·a + s·b = ρ` and `−s·a + c·b = 0`.
#[inline]
fn givens(a: f64, b: f64) -> (f64, f64) {
    let rho = hypot(a, b);
    (a / rho, b / rho)
}

/// `A = Q R` with `Q` orthogonal and `R` upper triangular.
#[derive(Debug, Clone)]
pub struct QrFactors {
    qt: Matrix,
    r: Matrix,
}

impl QrFactors {
    pub fn factor(a: Matrix) -> Self {
        let n = a.dim();
        let mut r = a;
        let mut qt = Matrix::identity(n);
        for j in 0..n {
            for i in j + 1..n {
                let b = r[(i, j)];
                if b == 0.0 {
                    continue;
                }
                let (c, s) = givens(r[(j, j)], b);
                r.rotate_rows(j, i, c, s, j);
                r[(i, j)] = 0.0;
                qt.rotate_rows(j, i, c, s, 0);
            }
        }
        Self { qt, r }
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn qt(&self) -> &Matrix {
        &self.qt
    }

    pub fn is_singular(&self) -> bool {
        let n = self.dim();
        let max = (0..n).map(|i| abs(self.r[(i, i)])).fold(0.0, f64::max);
        !(max > 0.0) || (0..n).any(|i| !(abs(self.r[(i, i)]) > SINGULAR_RTOL * max))
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if self.is_singular() {
            return Err(Error::Singular);
        }
        let n = self.dim();
        let mut x = self.qt.mul_vec(b);
        for i in (0..n).rev() {
            let row = self.r.row(i);
            let s = dot(&row[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    /// Refactor in place for `A + u vᵀ`, in `O(n²)`.
    pub fn rank_one_update(&mut self, u: &[f64], v: &[f64]) {
        let n = self.dim();
        if n == 0 {
            return;
        }
        let mut w = self.qt.mul_vec(u);
        // fold w onto e₀ from the bottom; R becomes upper Hessenberg
        for k in (0..n - 1).rev() {
            if w[k + 1] == 0.0 {
                continue;
            }
            let (c, s) = givens(w[k], w[k + 1]);
            w[k] = c * w[k] + s * w[k + 1];
            w[k + 1] = 0.0;
            self.r.rotate_rows(k, k + 1, c, s, k.saturating_sub(1));
            self.qt.rotate_rows(k, k + 1, c, s, 0);
        }
        for (rj, &vj) in self.r.row_mut(0).iter_mut().zip(v) {
            *rj += w[0] * vj;
        }
        // restore triangular form
        for k in 0..n - 1 {
            let b = self.r[(k + 1, k)];
            if b == 0.0 {
                continue;
            }
            let (c, s) = givens(self.r[(k, k)], b);
            self.r.rotate_rows(k, k + 1, c, s, k);
            self.r[(k + 1, k)] = 0.0;
            self.qt.rotate_rows(k, k + 1, c, s, 0);
        }
    }

    /// `Q R`, for checks.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                // (QR)_ij = Σ_k Q_ik R_kj = Σ_k Qᵀ_ki R_kj
                out[(i, j)] = (0..=j).map(|k| self.qt[(k, i)] * self.r[(k, j)]).sum();
            }
        }
        out
    }
}
