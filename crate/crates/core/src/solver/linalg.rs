//! Jacobi-preconditioned conjugate gradients for the lagged diffusion systems.

use crate::error::{Error, Result};

/// Symmetric sparse matrix stored as its diagonal plus one entry per
/// off-diagonal pair `(i, j, a_ij)`, `a_ij = a_ji`.
#[derive(Debug, Clone, Default)]
pub(crate) struct SymmetricSystem {
    pub diag: Vec<f64>,
    pub off: Vec<(usize, usize, f64)>,
}

impl SymmetricSystem {
    pub fn new(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: Vec::new(),
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, &d), &xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = d * xi;
        }
        for &(i, j, a) in &self.off {
            y[i] += a * x[j];
            y[j] += a * x[i];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` starting from the supplied `x`. Converged when
/// `||r||_2 <= tol ||b||_2`.
pub(crate) fn conjugate_gradient(
    sys: &SymmetricSystem,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
) -> Result<CgOutcome> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, residual: 0.0 });
    }
    if sys.diag.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Solver {
            reason: "non-positive diagonal in SPD system".into(),
            residual: f64::NAN,
        });
    }
    let inv_diag: Vec<f64> = sys.diag.iter().map(|d| 1.0 / d).collect();
    let mut ax = vec![0.0; n];
    sys.apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 10 * n + 100;
    for it in 0..max_iter {
        let res = dot(&r, &r).sqrt();
        if res <= tol * b_norm {
            return Ok(CgOutcome { iterations: it, residual: res / b_norm });
        }
        sys.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver {
                reason: "conjugate gradient breakdown (p^T A p <= 0)".into(),
                residual: res / b_norm,
            });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt() / b_norm;
    Err(Error::Solver {
        reason: format!("conjugate gradient did not converge in {max_iter} iterations"),
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_against_thomas() {
        let n = 50;
        let mut sys = SymmetricSystem::new(n);
        for i in 0..n {
            sys.diag[i] = 3.0 + 0.5 * (i as f64 * 0.1).sin();
            if i + 1 < n {
                sys.off.push((i, i + 1, -1.0));
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let mut x = vec![0.0; n];
        conjugate_gradient(&sys, &b, &mut x, 1e-13).unwrap();

        // Thomas algorithm oracle
        let (mut c, mut d) = (vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let a = if i > 0 { -1.0 } else { 0.0 };
            let denom = sys.diag[i] - if i > 0 { a * c[i - 1] } else { 0.0 };
            c[i] = -1.0 / denom;
            d[i] = (b[i] - if i > 0 { a * d[i - 1] } else { 0.0 }) / denom;
        }
        let mut y = vec![0.0; n];
        y[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        for i in 0..n {
            assert!((x[i] - y[i]).abs() < 1e-11, "{i}");
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let sys = SymmetricSystem { diag: vec![1.0; 3], off: vec![] };
        let mut x = vec![1.0; 3];
        let out = conjugate_gradient(&sys, &[0.0; 3], &mut x, 1e-10).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn indefinite_breaks_down() {
        let sys = SymmetricSystem { diag: vec![1.0, 1.0], off: vec![(0, 1, 3.0)] };
        let mut x = vec![0.0; 2];
        assert!(conjugate_gradient(&sys, &[1.0, -1.0], &mut x, 1e-12).is_err());
    }
}
