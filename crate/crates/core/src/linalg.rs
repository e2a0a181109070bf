//! Banded solves used by the implicit PDE steps.
//!
//! Rows are stored as `(lower, diag, upper)`. For an open (non-periodic)
//! system `lower[0]` and `upper[n-1]` are ignored; for a periodic system they
//! are the corner entries `A[0][n-1]` and `A[n-1][0]`.

use crate::{Error, Result};

/// A tridiagonal (optionally cyclic) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.diag.fill(1.0);
        m
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = A x` treating the matrix as open (corner entries ignored).
    pub fn mul_open(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        debug_assert!(x.len() == n && out.len() == n);
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            out[i] = s;
        }
    }

    /// `out = A x` with periodic wrap-around in the corners.
    pub fn mul_cyclic(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        debug_assert!(x.len() == n && out.len() == n);
        for i in 0..n {
            let im = if i == 0 { n - 1 } else { i - 1 };
            let ip = if i + 1 == n { 0 } else { i + 1 };
            out[i] = self.lower[i] * x[im] + self.diag[i] * x[i] + self.upper[i] * x[ip];
        }
    }

    /// Dense copy, `cyclic` controlling whether the corners are included.
    pub fn to_dense(&self, cyclic: bool) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] += self.diag[i];
            if i > 0 {
                a[i][i - 1] += self.lower[i];
            } else if cyclic {
                a[0][n - 1] += self.lower[0];
            }
            if i + 1 < n {
                a[i][i + 1] += self.upper[i];
            } else if cyclic {
                a[n - 1][0] += self.upper[n - 1];
            }
        }
        a
    }
}

/// Thomas algorithm for an open tridiagonal system; `rhs` is overwritten with
/// the solution. `scratch` must have the same length.
pub fn solve_tridiagonal(m: &Tridiagonal, rhs: &mut [f64], scratch: &mut [f64]) -> Result<()> {
    let n = m.len();
    if rhs.len() != n || scratch.len() < n {
        return Err(Error::Usage(format!(
            "tridiagonal solve of size {n} with rhs {} / scratch {}",
            rhs.len(),
            scratch.len()
        )));
    }
    if n == 0 {
        return Ok(());
    }
    let pivot = m.diag[0];
    check_pivot(pivot, 0, m)?;
    scratch[0] = m.upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        let pivot = m.diag[i] - m.lower[i] * scratch[i - 1];
        check_pivot(pivot, i, m)?;
        scratch[i] = if i + 1 < n { m.upper[i] / pivot } else { 0.0 };
        rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    Ok(())
}

fn check_pivot(pivot: f64, row: usize, m: &Tridiagonal) -> Result<()> {
    if pivot.abs() < 1e-300 || !pivot.is_finite() {
        return Err(Error::Numerical(format!(
            "singular tridiagonal pivot {pivot:e} at row {row} of {} (diag={:e}, lower={:e}, upper={:e})",
            m.len(),
            m.diag[row],
            m.lower[row],
            m.upper[row]
        )));
    }
    Ok(())
}

/// Reusable workspace for [`solve_cyclic`].
#[derive(Debug, Clone, Default)]
pub struct CyclicScratch {
    reduced: Tridiagonal,
    correction: Vec<f64>,
    thomas: Vec<f64>,
}

impl Default for Tridiagonal {
    fn default() -> Self {
        Tridiagonal::zeros(0)
    }
}

/// Solves a cyclic tridiagonal system by Sherman–Morrison around the Thomas
/// algorithm; `rhs` is overwritten with the solution.
pub fn solve_cyclic(m: &Tridiagonal, rhs: &mut [f64], ws: &mut CyclicScratch) -> Result<()> {
    let n = m.len();
    if n < 3 {
        return Err(Error::Usage(format!("cyclic solve needs n >= 3, got {n}")));
    }
    if rhs.len() != n {
        return Err(Error::Usage(format!("cyclic solve of size {n} with rhs {}", rhs.len())));
    }
    let alpha = m.upper[n - 1]; // A[n-1][0]
    let beta = m.lower[0]; // A[0][n-1]
                           // A = T + u vᵀ with u = (γ, 0, .., α), v = (1, 0, .., β/γ)
    let gamma = -m.diag[0];

    ws.reduced.lower.clear();
    ws.reduced.lower.extend_from_slice(&m.lower);
    ws.reduced.upper.clear();
    ws.reduced.upper.extend_from_slice(&m.upper);
    ws.reduced.diag.clear();
    ws.reduced.diag.extend_from_slice(&m.diag);
    ws.reduced.diag[0] -= gamma;
    ws.reduced.diag[n - 1] -= alpha * beta / gamma;
    ws.thomas.resize(n, 0.0);

    solve_tridiagonal(&ws.reduced, rhs, &mut ws.thomas)?;

    ws.correction.clear();
    ws.correction.resize(n, 0.0);
    ws.correction[0] = gamma;
    ws.correction[n - 1] = alpha;
    solve_tridiagonal(&ws.reduced, &mut ws.correction, &mut ws.thomas)?;

    let vy = rhs[0] + beta / gamma * rhs[n - 1];
    let vz = ws.correction[0] + beta / gamma * ws.correction[n - 1];
    let denom = 1.0 + vz;
    if denom.abs() < 1e-300 {
        return Err(Error::Numerical(format!("Sherman-Morrison denominator vanished for cyclic system of size {n}")));
    }
    let factor = vy / denom;
    for (r, z) in rhs.iter_mut().zip(&ws.correction) {
        *r -= factor * z;
    }
    Ok(())
}
