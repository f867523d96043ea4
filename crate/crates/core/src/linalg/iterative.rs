//! ILU(0)-preconditioned BiCGSTAB.

use super::CsrMatrix;
use crate::{Error, Result};

/// Incomplete LU with the sparsity pattern of the input matrix.
#[derive(Debug)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let mut lu = a.clone();
        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            let (cols, _) = lu.row(i);
            match cols.binary_search(&i) {
                Ok(p) => *d = lu.indptr()[i] + p,
                Err(_) => return Err(Error::Singular { pivot: i }),
            }
        }
        let indptr = lu.indptr().to_vec();
        let indices = lu.indices().to_vec();
        let vals = lu.data_mut();
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in indptr[i]..indptr[i + 1] {
                pos[indices[p]] = p;
            }
            for p in indptr[i]..diag[i] {
                let k = indices[p];
                let pivot = vals[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::Singular { pivot: k });
                }
                vals[p] /= pivot;
                let lik = vals[p];
                for q in diag[k] + 1..indptr[k + 1] {
                    let j = indices[q];
                    if pos[j] != usize::MAX {
                        vals[pos[j]] -= lik * vals[q];
                    }
                }
            }
            for p in indptr[i]..indptr[i + 1] {
                pos[indices[p]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 {
                return Err(Error::Singular { pivot: i });
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let (ptr, idx, v) = (self.lu.indptr(), self.lu.indices(), self.lu.data());
        let mut z = r.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for p in ptr[i]..self.diag[i] {
                s -= v[p] * z[idx[p]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..ptr[i + 1] {
                s -= v[p] * z[idx[p]];
            }
            z[i] = s / v[self.diag[i]];
        }
        z
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Right-preconditioned BiCGSTAB from a zero initial guess.
///
/// Returns [`Error::Breakdown`] when `ρ` or `ω` vanish and
/// [`Error::NotConverged`] when `maxit` is exhausted.
pub fn solve_bicgstab(a: &CsrMatrix, b: &[f64], tol: f64, maxit: usize) -> Result<(Vec<f64>, IterationReport)> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, IterationReport { iterations: 0, relative_residual: 0.0 }));
    }
    let m = Ilu0::new(a)?;
    let mut r = b.to_vec();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut res = 1.0;
    for it in 1..=maxit {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 || rho_new.abs() < 1e-30 * bnorm * norm(&r) {
            return Err(Error::Breakdown { iteration: it, rho: rho_new });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat = m.apply(&p);
        a.matvec_into(&phat, &mut v);
        alpha = rho_new / dot(&r0, &v);
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        let snorm = norm(&s) / bnorm;
        if snorm <= tol {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok((x, IterationReport { iterations: it, relative_residual: snorm }));
        }
        let shat = m.apply(&s);
        a.matvec_into(&shat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm(&r) / bnorm;
        if res <= tol {
            return Ok((x, IterationReport { iterations: it, relative_residual: res }));
        }
        if omega == 0.0 {
            return Err(Error::Breakdown { iteration: it, rho: rho_new });
        }
        rho = rho_new;
    }
    Err(Error::NotConverged { iterations: maxit, residual: res })
}
