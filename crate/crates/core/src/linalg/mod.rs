//! Sparse and small dense linear algebra.

mod csr;
mod dense;
mod iterative;
mod lu;
pub mod mmio;
mod ordering;

pub use csr::CsrMatrix;
pub use dense::{smallest_generalized_eig, symmetric_eigen, DenseMatrix};
pub use iterative::{solve_bicgstab, Ilu0, IterationReport};
pub use lu::{SparseLu, DIAGONAL_PIVOT_THRESHOLD};
pub use ordering::{bandwidth, reverse_cuthill_mckee};

use serde::Serialize;

use crate::{Error, Result};

pub const DEFAULT_DIRECT_CAP: usize = 200_000;
pub const DEFAULT_ITERATIVE_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 5_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    #[default]
    Direct,
    Bicgstab,
}

pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    solve_direct_capped(a, b, DEFAULT_DIRECT_CAP)
}

pub fn solve_direct_capped(a: &CsrMatrix, b: &[f64], cap: usize) -> Result<Vec<f64>> {
    if a.nrows() > cap {
        return Err(Error::TooLarge { what: "direct solve", dim: a.nrows(), cap });
    }
    if b.len() != a.nrows() {
        return Err(Error::InvalidArgument("right-hand side length mismatch".into()));
    }
    Ok(SparseLu::factor(a)?.solve(b))
}

/// Solves with the chosen method; BiCGSTAB failures fall back to the direct solver.
pub fn solve(a: &CsrMatrix, b: &[f64], choice: SolverChoice) -> Result<Vec<f64>> {
    match choice {
        SolverChoice::Direct => solve_direct(a, b),
        SolverChoice::Bicgstab => match solve_bicgstab(a, b, DEFAULT_ITERATIVE_TOL, DEFAULT_MAX_ITERATIONS) {
            Ok((x, _)) => Ok(x),
            Err(Error::Breakdown { .. } | Error::NotConverged { .. } | Error::Singular { .. }) => solve_direct(a, b),
            Err(e) => Err(e),
        },
    }
}

/// `‖Ax − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let denom = a.norm_inf() * inf(x) + inf(b);
    if denom == 0.0 {
        0.0
    } else {
        inf(&r) / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let b = [1.5, -2.0, 0.0];
        assert_eq!(solve_direct(&CsrMatrix::identity(3), &b).unwrap(), b.to_vec());
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let n = 50;
        let b = DenseMatrix::from_vec(n, n, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let mut a = b.transpose().matmul(&b);
        let mut trip = Vec::new();
        for i in 0..n {
            a[(i, i)] += 1.0;
            for j in 0..n {
                trip.push((i, j, a[(i, j)]));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &trip);
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solve_direct(&a, &rhs).unwrap();
        assert!(relative_residual(&a, &x, &rhs) <= 1e-10);
    }

    #[test]
    fn cap_is_enforced() {
        let a = CsrMatrix::identity(10);
        assert!(matches!(solve_direct_capped(&a, &[0.0; 10], 5), Err(Error::TooLarge { .. })));
    }
}
