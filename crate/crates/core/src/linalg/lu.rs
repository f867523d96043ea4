//! Left-looking sparse LU with threshold partial pivoting on an RCM-ordered matrix.

use super::ordering::reverse_cuthill_mckee;
use super::CsrMatrix;
use crate::{Error, Result};

/// A pivot is accepted on the diagonal when it is at least this fraction of the column maximum.
pub const DIAGONAL_PIVOT_THRESHOLD: f64 = 0.1;

const UNSET: usize = usize::MAX;

/// Compressed column storage used for the factors.
#[derive(Debug, Default)]
struct Csc {
    colptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
}

#[derive(Debug)]
pub struct SparseLu {
    n: usize,
    /// `perm[new] = old` fill-reducing symmetric permutation.
    perm: Vec<usize>,
    /// Row (in permuted numbering) -> pivot step.
    pinv: Vec<usize>,
    /// Unit lower factor, diagonal stored first in each column.
    l: Csc,
    /// Upper factor, diagonal stored last in each column.
    u: Csc,
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument("LU requires a square matrix".into()));
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        // column access of the permuted matrix = rows of its transpose
        let b = a.permute_symmetric(&perm).transpose();
        let anorm = a.max_abs();

        let mut l = Csc { colptr: Vec::with_capacity(n + 1), ..Default::default() };
        let mut u = Csc { colptr: Vec::with_capacity(n + 1), ..Default::default() };
        let mut pinv = vec![UNSET; n];
        let mut x = vec![0.0; n];
        let mut marked = vec![false; n];
        let mut reach: Vec<usize> = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for k in 0..n {
            l.colptr.push(l.rows.len());
            u.colptr.push(u.rows.len());
            let (bcols, bvals) = b.row(k);

            // symbolic: rows reachable from the pattern of column k through L
            reach.clear();
            for &start in bcols {
                if marked[start] {
                    continue;
                }
                marked[start] = true;
                stack.push((start, col_start(&l, &pinv, start)));
                while let Some(&mut (j, ref mut p)) = stack.last_mut() {
                    let end = col_end(&l, &pinv, j);
                    let mut pushed = None;
                    while *p < end {
                        let i = l.rows[*p];
                        *p += 1;
                        if !marked[i] {
                            pushed = Some(i);
                            break;
                        }
                    }
                    match pushed {
                        Some(i) => {
                            marked[i] = true;
                            stack.push((i, col_start(&l, &pinv, i)));
                        }
                        None => {
                            reach.push(j);
                            stack.pop();
                        }
                    }
                }
            }
            // numeric: x = L \ b_k in topological order (reverse postorder)
            for (&i, &v) in bcols.iter().zip(bvals) {
                x[i] = v;
            }
            for &j in reach.iter().rev() {
                let jj = pinv[j];
                if jj == UNSET {
                    continue;
                }
                let xj = x[j];
                for p in l.colptr[jj] + 1..col_end_index(&l, jj) {
                    x[l.rows[p]] -= l.vals[p] * xj;
                }
            }
            // pivot
            let (mut ipiv, mut amax) = (UNSET, -1.0f64);
            for &i in reach.iter().rev() {
                if pinv[i] == UNSET {
                    if x[i].abs() > amax {
                        amax = x[i].abs();
                        ipiv = i;
                    }
                } else {
                    u.rows.push(pinv[i]);
                    u.vals.push(x[i]);
                }
            }
            if ipiv == UNSET || amax <= 1e-14 * anorm {
                return Err(Error::Singular { pivot: k });
            }
            if pinv[k] == UNSET && marked[k] && x[k].abs() >= DIAGONAL_PIVOT_THRESHOLD * amax {
                ipiv = k;
            }
            let pivot = x[ipiv];
            u.rows.push(k);
            u.vals.push(pivot);
            pinv[ipiv] = k;
            l.rows.push(ipiv);
            l.vals.push(1.0);
            for &i in reach.iter().rev() {
                if pinv[i] == UNSET {
                    l.rows.push(i);
                    l.vals.push(x[i] / pivot);
                }
                x[i] = 0.0;
                marked[i] = false;
            }
        }
        l.colptr.push(l.rows.len());
        u.colptr.push(u.rows.len());
        for r in l.rows.iter_mut() {
            *r = pinv[*r];
        }
        Ok(SparseLu { n, perm, pinv, l, u })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            y[self.pinv[new]] = b[old];
        }
        for j in 0..self.n {
            let yj = y[j];
            for p in self.l.colptr[j] + 1..self.l.colptr[j + 1] {
                y[self.l.rows[p]] -= self.l.vals[p] * yj;
            }
        }
        for j in (0..self.n).rev() {
            let last = self.u.colptr[j + 1] - 1;
            y[j] /= self.u.vals[last];
            let yj = y[j];
            for p in self.u.colptr[j]..last {
                y[self.u.rows[p]] -= self.u.vals[p] * yj;
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Stored entries in both factors.
    pub fn fill(&self) -> usize {
        self.l.rows.len() + self.u.rows.len()
    }
}

fn col_start(l: &Csc, pinv: &[usize], row: usize) -> usize {
    match pinv[row] {
        UNSET => 0,
        c => l.colptr[c],
    }
}

fn col_end(l: &Csc, pinv: &[usize], row: usize) -> usize {
    match pinv[row] {
        UNSET => 0,
        c => col_end_index(l, c),
    }
}

/// End of column `c`; the column currently being built has no entry in `colptr` yet.
fn col_end_index(l: &Csc, c: usize) -> usize {
    l.colptr.get(c + 1).copied().unwrap_or(l.rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x);
        let r = ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        r / (a.norm_inf() * xn + bn)
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let x = SparseLu::factor(&a).unwrap().solve(&[3.0, 4.0]);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn needs_pivoting() {
        // zero diagonal forces row exchanges
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 2.0), (2, 1, 3.0), (2, 2, 1e-3)]);
        let b = [1.0, 2.0, 3.0];
        let x = SparseLu::factor(&a).unwrap().solve(&b);
        assert!(residual(&a, &x, &b) < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]);
        assert!(matches!(SparseLu::factor(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn random_nonsymmetric_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 300;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, rng.gen_range(-1.0..1.0)));
            for _ in 0..4 {
                t.push((i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0)));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = SparseLu::factor(&a).unwrap().solve(&b);
        assert!(residual(&a, &x, &b) < 1e-10);
    }
}
