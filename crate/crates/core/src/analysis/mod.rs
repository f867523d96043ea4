//! Verification layer: discrete norms, convergence tables, the boundary patch
//! function φ_r, inf-sup estimates, boundary-corrected interpolants and the
//! continuity probe.

pub mod continuity;
pub mod convergence;
pub mod fields;
pub mod infsup;
pub mod interpolants;
pub mod norms;
pub mod phi_r;

use std::sync::Arc;

pub use continuity::{continuity_ratio, continuity_ratio_exact, continuity_sup_exact};
pub use convergence::{convergence_study, rates, ConvergenceRow, ConvergenceTable};
pub use fields::{Field, Quadratic, SineSolution};
pub use infsup::{infsup_constant, InfSupForm, InfSupResult, DENSE_CAP};
pub use interpolants::{build_pi_cip, build_pi_partial, l2_projection, PiCip, PiPartial};
pub use norms::{error_norm, norm, NormKind, NormParams};
pub use phi_r::{build_phi_r, mean_normal_gradient, PhiR};

use crate::assembly::{assemble, ProblemSpec};
use crate::fespace::{FeFunction, FeSpace};
use crate::linalg::{solve, SolverChoice};
use crate::Result;

/// Assembles and solves the discrete problem described by `p`.
pub fn solve_problem(space: &Arc<FeSpace>, p: &ProblemSpec, solver: SolverChoice) -> Result<FeFunction> {
    let sys = assemble(space, p)?;
    let x = solve(&sys.matrix, &sys.rhs, solver)?;
    FeFunction::new(space.clone(), x)
}
