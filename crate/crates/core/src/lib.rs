//! Continuous Galerkin finite elements on triangulations of the unit square with
//! Dirichlet conditions imposed weakly by the non-symmetric Nitsche method.
//!
//! The non-symmetric variant needs no boundary penalty: the two boundary terms of
//! the bilinear form cancel when the trial and test functions coincide, and
//! control of the boundary trace is recovered through an inf-sup argument built
//! on boundary patches. This crate provides
//!
//! - [`mesh`]: structured and jittered unit-square meshes, boundary patches;
//! - [`fespace`]: P1/P2 Lagrange spaces, quadrature, finite element functions;
//! - [`assembly`]: the Poisson Nitsche form, convection–diffusion with SD or CIP
//!   stabilization, and strongly imposed conditions for comparison;
//! - [`linalg`]: CSR storage, sparse LU, ILU(0)/BiCGSTAB, dense symmetric eigensolves;
//! - [`analysis`]: norms, convergence tables, the patch function φ_r, inf-sup
//!   estimates, and the two boundary-corrected interpolants;
//! - [`experiments`]: drivers that write CSV/VTK/JSON outputs (used by the
//!   `nitsche-fem` binary).


#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
pub mod analysis;
pub mod assembly;
pub mod error;
pub mod experiments;
pub mod fespace;
pub mod linalg;
pub mod mesh;

pub use error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];
