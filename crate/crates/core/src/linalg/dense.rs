use super::CsrMatrix;
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::from_vec(nrows, ncols, rows.concat())
    }

    pub fn from_vec(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::InvalidArgument(format!("{} values for a {nrows}x{ncols} matrix", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry".into()));
        }
        Ok(DenseMatrix { nrows, ncols, data })
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_csr(a: &CsrMatrix) -> Self {
        let mut m = Self::zeros(a.nrows(), a.ncols());
        for i in 0..a.nrows() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut c = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            let ci = &mut c.data[i * other.ncols..(i + 1) * other.ncols];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                for (cij, &bkj) in ci.iter_mut().zip(other.row(k)) {
                    *cij += aik * bkj;
                }
            }
        }
        c
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Lower Cholesky factor `L` with `self = L Lᵀ`.
    pub fn cholesky(&self) -> Result<DenseMatrix> {
        let n = self.nrows;
        if n != self.ncols {
            return Err(Error::InvalidArgument("Cholesky requires a square matrix".into()));
        }
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let lj = &l.data[j * n..j * n + j];
            let d = self[(j, j)] - lj.iter().map(|v| v * v).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { index: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
                l[(i, j)] = (self[(i, j)] - s) / djj;
            }
        }
        Ok(l)
    }

    /// Solves `L X = B` in place for lower-triangular `self`.
    pub fn solve_lower(&self, b: &mut DenseMatrix) {
        let n = self.nrows;
        assert_eq!(b.nrows, n);
        let m = b.ncols;
        for i in 0..n {
            for k in 0..i {
                let lik = self[(i, k)];
                if lik == 0.0 {
                    continue;
                }
                let (head, tail) = b.data.split_at_mut(i * m);
                for (x, y) in tail[..m].iter_mut().zip(&head[k * m..(k + 1) * m]) {
                    *x -= lik * y;
                }
            }
            let d = self[(i, i)];
            b.data[i * m..(i + 1) * m].iter_mut().for_each(|x| *x /= d);
        }
    }

    /// Solves `Lᵀ X = B` in place for lower-triangular `self`.
    pub fn solve_lower_transpose(&self, b: &mut DenseMatrix) {
        let n = self.nrows;
        assert_eq!(b.nrows, n);
        let m = b.ncols;
        for i in (0..n).rev() {
            for k in i + 1..n {
                let lki = self[(k, i)];
                if lki == 0.0 {
                    continue;
                }
                let (head, tail) = b.data.split_at_mut(k * m);
                for (x, y) in head[i * m..(i + 1) * m].iter_mut().zip(&tail[..m]) {
                    *x -= lki * y;
                }
            }
            let d = self[(i, i)];
            b.data[i * m..(i + 1) * m].iter_mut().for_each(|x| *x /= d);
        }
    }

    /// Dense LU with partial pivoting; intended for tiny systems.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.nrows;
        if n != self.ncols || b.len() != n {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        let mut a = self.clone();
        let mut x = b.to_vec();
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs())).unwrap();
            if a[(p, k)].abs() <= 1e-14 * scale {
                return Err(Error::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
                x.swap(p, k);
            }
            for i in k + 1..n {
                let f = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    a[(i, j)] -= f * a[(k, j)];
                }
                x[i] -= f * x[k];
            }
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / a[(i, i)];
        }
        Ok(x)
    }

    pub fn determinant(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        if self.nrows == 2 {
            return self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)];
        }
        let n = self.nrows;
        let mut a = self.clone();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs())).unwrap();
            if a[(p, k)] == 0.0 {
                return 0.0;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
                det = -det;
            }
            det *= a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    a[(i, j)] -= f * a[(k, j)];
                }
            }
        }
        det
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// Eigenpairs of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in ascending order; column `i` of the matrix holds the
/// eigenvector of eigenvalue `i`.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.nrows();
    if !a.is_symmetric(1e-12 * a.frobenius().max(1.0)) {
        return Err(Error::InvalidArgument("eigensolver requires a symmetric matrix".into()));
    }
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let total = a.frobenius().powi(2);
    for _sweep in 0..100 {
        let off: f64 = (0..n).map(|i| (0..i).map(|j| m[(i, j)].powi(2)).sum::<f64>()).sum();
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let (app, aqq) = (m[(p, p)], m[(q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let vals = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    Ok((vals, vecs))
}

/// Smallest eigenpair of `S x = λ M x` with `S` symmetric and `M` symmetric positive definite.
///
/// The eigenvector is normalized to `xᵀ M x = 1`.
pub fn smallest_generalized_eig(s: &DenseMatrix, m: &DenseMatrix) -> Result<(f64, Vec<f64>)> {
    let n = s.nrows();
    if s.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty eigenproblem".into()));
    }
    let l = m.cholesky()?;
    // C = L⁻¹ S L⁻ᵀ
    let mut x = s.clone();
    l.solve_lower(&mut x);
    let mut c = x.transpose();
    l.solve_lower(&mut c);
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    let (vals, vecs) = symmetric_eigen(&c)?;
    let mut y = DenseMatrix::zeros(n, 1);
    for k in 0..n {
        y[(k, 0)] = vecs[(k, 0)];
    }
    l.solve_lower_transpose(&mut y);
    Ok((vals[0], y.data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DenseMatrix::from_vec(n, n, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let mut a = b.transpose().matmul(&b);
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        a
    }

    fn residual(s: &DenseMatrix, m: &DenseMatrix, lambda: f64, x: &[f64]) -> f64 {
        let sx = s.matvec(x);
        let mx = m.matvec(x);
        sx.iter().zip(&mx).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn identical_pencil_gives_one() {
        let m = random_spd(12, 1);
        let (lambda, _) = smallest_generalized_eig(&m, &m).unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pencil() {
        let s = DenseMatrix::diag(&[4.0, 9.0]);
        let (lambda, x) = smallest_generalized_eig(&s, &DenseMatrix::identity(2)).unwrap();
        assert!((lambda - 4.0).abs() < 1e-14);
        assert!((x[0].abs() - 1.0).abs() < 1e-14 && x[1].abs() < 1e-14);
    }

    #[test]
    fn saturated_infsup_pencil() {
        // S = Aᵀ M⁻¹ A with A = M
        let m = random_spd(10, 2);
        let (lambda, _) = smallest_generalized_eig(&m, &m).unwrap();
        assert!((lambda.sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generalized_residual_is_small() {
        let s = random_spd(40, 3);
        let m = random_spd(40, 4);
        let (lambda, x) = smallest_generalized_eig(&s, &m).unwrap();
        assert!(residual(&s, &m, lambda, &x) <= 1e-8 * s.frobenius());
    }

    #[test]
    fn jacobi_recovers_full_spectrum() {
        let a = random_spd(25, 5);
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for (i, &lambda) in vals.iter().enumerate() {
            let x: Vec<f64> = (0..25).map(|k| vecs[(k, i)]).collect();
            assert!(residual(&a, &DenseMatrix::identity(25), lambda, &x) < 1e-10 * a.frobenius());
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(a.cholesky(), Err(Error::NotPositiveDefinite { index: 1 })));
    }

    #[test]
    fn small_dense_solve_and_determinant() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(a.solve(&[2.0, 2.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(a.determinant(), -2.0);
        assert!((random_spd(5, 8).determinant() > 0.0));
    }
}
