//! Small linear-algebra helpers: tridiagonal direct solve for 1D implicit
//! steps and a Gauss–Seidel iteration for the 2D M-matrix systems.

use crate::{Error, Result};

/// Thomas algorithm. `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(Error::Solve("zero pivot in tridiagonal solve".into()));
    }
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Solve(format!("degenerate pivot at row {i}")));
        }
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let correction = c[i] * x[i + 1];
        x[i] -= correction;
    }
    Ok(x)
}

/// Sparse row storage for the monotone implicit systems: positive diagonal,
/// non-positive off-diagonal entries.
#[derive(Debug, Clone)]
pub struct SparseRows {
    pub diag: Vec<f64>,
    pub off: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn new(n: usize) -> Self {
        SparseRows { diag: vec![0.0; n], off: vec![Vec::new(); n] }
    }

    pub fn add_off(&mut self, row: usize, col: usize, value: f64) {
        self.off[row].push((col, value));
    }

    pub fn residual_vector(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        (0..self.diag.len())
            .map(|i| {
                let mut ax = self.diag[i] * x[i];
                for &(j, v) in &self.off[i] {
                    ax += v * x[j];
                }
                ax - rhs[i]
            })
            .collect()
    }

    pub fn residual_norm(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let mut norm: f64 = 0.0;
        for i in 0..self.diag.len() {
            let mut ax = self.diag[i] * x[i];
            for &(j, v) in &self.off[i] {
                ax += v * x[j];
            }
            norm = norm.max((ax - rhs[i]).abs());
        }
        norm
    }

    /// Gauss–Seidel sweeps until the max-norm residual drops below
    /// `tol * max(1, |rhs|_inf)`. Converges for the M-matrix systems
    /// assembled by the transport module.
    pub fn solve_gauss_seidel(&self, rhs: &[f64], x0: &[f64], tol: f64, max_sweeps: usize) -> Result<Vec<f64>> {
        let n = self.diag.len();
        let mut x = x0.to_vec();
        let scale = rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for _ in 0..max_sweeps {
            for i in 0..n {
                let mut s = rhs[i];
                for &(j, v) in &self.off[i] {
                    s -= v * x[j];
                }
                x[i] = s / self.diag[i];
            }
            if self.residual_norm(&x, rhs) <= tol * scale {
                return Ok(x);
            }
        }
        Err(Error::Solve(format!(
            "Gauss-Seidel stalled: residual {:.3e} after {} sweeps",
            self.residual_norm(&x, rhs),
            max_sweeps
        )))
    }
}
