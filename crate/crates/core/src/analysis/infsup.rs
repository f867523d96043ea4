use std::sync::Arc;

use serde::Serialize;

use crate::assembly::{assemble, assemble_poisson_nitsche, forms, ProblemSpec};
use crate::fespace::FeSpace;
use crate::linalg::{smallest_generalized_eig, CsrMatrix, DenseMatrix};
use crate::{Error, Result};

/// Largest dof count handled by the dense eigensolve.
pub const DENSE_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfSupForm {
    /// The Poisson form measured in `‖·‖_{1,h}`.
    PoissonNitsche,
    /// The convection–diffusion form measured in `‖·‖_{1,h,β}`.
    ConvDiff,
}

#[derive(Clone, Debug)]
pub struct InfSupResult {
    pub c_s: f64,
    /// Minimizing trial function, normalized to unit norm.
    pub vector: Vec<f64>,
    pub dofs: usize,
}

/// Gram matrix of `‖·‖²_{1,h}`.
pub fn one_h_gram(space: &FeSpace) -> CsrMatrix {
    forms::stiffness(space).add_scaled(1.0, &forms::boundary_mass(space, |_, h| 1.0 / h))
}

/// Gram matrix of `‖·‖²_{1,h,β} = ε‖·‖²_{1,h} + ½‖|β·n|^{1/2}·‖²_∂Ω`.
pub fn one_h_beta_gram(space: &FeSpace, eps: f64, beta: [f64; 2]) -> CsrMatrix {
    one_h_gram(space)
        .scaled(eps)
        .add_scaled(0.5, &forms::boundary_mass(space, |b, _| (beta[0] * b.normal[0] + beta[1] * b.normal[1]).abs()))
}

/// `min_v sup_w a(v, w) / (‖v‖ ‖w‖)` for the form matrix `a` (rows = test) and Gram matrix `m`.
///
/// Computed as `sqrt(λ_min(AᵀM⁻¹A, M))`.
pub fn infsup_from_matrices(a: &DenseMatrix, m: &DenseMatrix) -> Result<(f64, Vec<f64>)> {
    let l = m.cholesky()?;
    let mut x = a.clone();
    l.solve_lower(&mut x);
    let s = x.transpose().matmul(&x);
    let (lambda, v) = smallest_generalized_eig(&s, m)?;
    Ok((lambda.max(0.0).sqrt(), v))
}

pub fn infsup_constant(form: InfSupForm, space: &Arc<FeSpace>, p: &ProblemSpec) -> Result<InfSupResult> {
    let n = space.ndofs();
    if n > DENSE_CAP {
        return Err(Error::TooLarge { what: "dense inf-sup eigensolve", dim: n, cap: DENSE_CAP });
    }
    let (a, m) = match form {
        InfSupForm::PoissonNitsche => (assemble_poisson_nitsche(space, p)?.matrix, one_h_gram(space)),
        InfSupForm::ConvDiff => (assemble(space, p)?.matrix, one_h_beta_gram(space, p.eps, p.beta)),
    };
    let (c_s, vector) = infsup_from_matrices(&DenseMatrix::from_csr(&a), &DenseMatrix::from_csr(&m))?;
    Ok(InfSupResult { c_s, vector, dofs: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::BcMode;
    use crate::mesh::build_structured;

    fn space(n: usize) -> Arc<FeSpace> {
        FeSpace::new(Arc::new(build_structured(n).unwrap()), 1).unwrap()
    }

    #[test]
    fn self_adjoint_saturation() {
        let s = space(4);
        let m = DenseMatrix::from_csr(&one_h_gram(&s));
        let (c, _) = infsup_from_matrices(&m, &m).unwrap();
        assert!((c - 1.0).abs() < 1e-10);
    }

    #[test]
    fn penalty_free_form_is_stable_on_small_meshes() {
        let p = ProblemSpec::poisson(|_| 0.0, |_| 0.0);
        let c: Vec<f64> = [4, 6].iter().map(|&n| infsup_constant(InfSupForm::PoissonNitsche, &space(n), &p).unwrap().c_s).collect();
        assert!(c.iter().all(|&x| x > 0.05), "{c:?}");
    }

    #[test]
    fn symmetric_variant_runs() {
        let p = ProblemSpec::poisson(|_| 0.0, |_| 0.0).with_bc(BcMode::NitscheSym);
        let r = infsup_constant(InfSupForm::PoissonNitsche, &space(4), &p).unwrap();
        assert!(r.c_s >= 0.0 && r.c_s.is_finite());
    }

    #[test]
    fn convection_diffusion_form() {
        let p = ProblemSpec::convection_diffusion(0.1, [0.5, 1.0], 0.0, |_| 0.0, |_| 0.0);
        let r = infsup_constant(InfSupForm::ConvDiff, &space(5), &p).unwrap();
        assert!(r.c_s > 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let p = ProblemSpec::poisson(|_| 0.0, |_| 0.0);
        assert!(matches!(infsup_constant(InfSupForm::PoissonNitsche, &space(64), &p), Err(Error::TooLarge { .. })));
    }
}
