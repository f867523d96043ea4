use serde::{Deserialize, Serialize};

use super::fields::Field;
use crate::assembly::ProblemSpec;
use crate::fespace::{quadrature_for, FeFunction, FeSpace, QuadraturePurpose, Sample};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `‖v‖`.
    L2,
    /// `‖∇v‖`.
    H1Semi,
    /// `(‖∇v‖² + Σ_K h_K⁻¹‖v‖²_{∂Ω∩∂K})^{1/2}`.
    OneH,
    /// `(Σ_K h_K⁻¹‖v‖²_{∂Ω∩∂K})^{1/2}`.
    HalfHBoundary,
    /// `(ε‖v‖²_{1,h} + ½‖|β·n|^{1/2} v‖²_∂Ω)^{1/2}`.
    OneHBeta,
    /// `(‖δ^{1/2} β·∇v‖² + ½‖|β·n|^{1/2} v‖²_∂Ω + ε‖∇v‖²)^{1/2}`.
    TripleHDelta,
    /// `‖v‖_{1,h} + ‖h^{1/2} ∇v·n‖_∂Ω` (a sum, not a root of squares).
    StarPoisson,
    /// Diagnostic norm of the SD analysis; elements with `δ_K = 0` are left out of the `δ⁻¹` term.
    TripleStar,
}

impl NormKind {
    pub const ALL: [NormKind; 8] = [
        NormKind::L2,
        NormKind::H1Semi,
        NormKind::OneH,
        NormKind::HalfHBoundary,
        NormKind::OneHBeta,
        NormKind::TripleHDelta,
        NormKind::StarPoisson,
        NormKind::TripleStar,
    ];
}

/// Coefficients some norms need. `delta` defaults to zero on every element.
#[derive(Clone, Debug, Default)]
pub struct NormParams {
    pub eps: Option<f64>,
    pub beta: Option<[f64; 2]>,
    pub delta: Option<Vec<f64>>,
}

impl NormParams {
    pub fn from_problem(p: &ProblemSpec, space: &FeSpace) -> Self {
        NormParams { eps: Some(p.eps), beta: Some(p.beta), delta: Some(p.sd_delta(space)) }
    }
}

/// Squared integrals from which every [`NormKind`] is assembled.
#[derive(Clone, Copy, Debug, Default)]
pub struct NormParts {
    pub l2: f64,
    pub grad: f64,
    /// `Σ_K h_K⁻¹‖v‖²_{∂Ω∩∂K}`.
    pub boundary_h: f64,
    /// `‖|β·n|^{1/2} v‖²_∂Ω`.
    pub boundary_beta: f64,
    /// `Σ_K h_K‖∇v·n‖²_{∂Ω∩∂K}`.
    pub boundary_flux_h: f64,
    /// `‖δ^{1/2} β·∇v‖²`.
    pub streamline: f64,
    /// `Σ_{δ_K>0} δ_K⁻¹‖v‖²_K`.
    pub delta_inv_l2: f64,
    /// `Σ_K δ_K ε²‖Δv‖²_K`.
    pub delta_laplacian: f64,
}

impl NormParts {
    pub fn combine(&self, kind: NormKind, p: &NormParams) -> Result<f64> {
        let need = |what: &str| Error::InvalidArgument(format!("norm {kind:?} requires {what}"));
        let eps = || p.eps.ok_or_else(|| need("the diffusion coefficient"));
        let beta = || p.beta.ok_or_else(|| need("the velocity"));
        Ok(match kind {
            NormKind::L2 => self.l2.sqrt(),
            NormKind::H1Semi => self.grad.sqrt(),
            NormKind::OneH => (self.grad + self.boundary_h).sqrt(),
            NormKind::HalfHBoundary => self.boundary_h.sqrt(),
            NormKind::OneHBeta => {
                beta()?;
                (eps()? * (self.grad + self.boundary_h) + 0.5 * self.boundary_beta).sqrt()
            }
            NormKind::TripleHDelta => {
                beta()?;
                (self.streamline + 0.5 * self.boundary_beta + eps()? * self.grad).sqrt()
            }
            NormKind::StarPoisson => (self.grad + self.boundary_h).sqrt() + self.boundary_flux_h.sqrt(),
            NormKind::TripleStar => {
                beta()?;
                let e = eps()?;
                let tri = self.streamline + 0.5 * self.boundary_beta + e * self.grad;
                (self.delta_inv_l2 + e * self.boundary_flux_h + self.delta_laplacian + e * self.boundary_h + tri).sqrt()
            }
        })
    }
}

/// Integrates all [`NormParts`] of the function sampled by `sample(k, bary, x)`.
pub fn norm_parts(space: &FeSpace, params: &NormParams, sample: impl Fn(usize, [f64; 3], Point) -> Sample) -> NormParts {
    let area = quadrature_for(QuadraturePurpose::Area, space.order()).expect("valid order");
    let edge = quadrature_for(QuadraturePurpose::Edge, space.order()).expect("valid order");
    let beta = params.beta.unwrap_or([0.0, 0.0]);
    let eps = params.eps.unwrap_or(0.0);
    let mut out = NormParts::default();
    for k in 0..space.num_elements() {
        let geom = space.geometry(k);
        let delta = params.delta.as_ref().map_or(0.0, |d| d[k]);
        for (bary, w) in area.points.iter().zip(&area.weights) {
            let x = geom.point(*bary);
            let s = sample(k, *bary, x);
            let w = 2.0 * geom.area * w;
            let bg = beta[0] * s.grad[0] + beta[1] * s.grad[1];
            out.l2 += w * s.value * s.value;
            out.grad += w * (s.grad[0] * s.grad[0] + s.grad[1] * s.grad[1]);
            out.streamline += w * delta * bg * bg;
            if delta > 0.0 {
                out.delta_inv_l2 += w * s.value * s.value / delta;
                out.delta_laplacian += w * delta * eps * eps * s.lap * s.lap;
            }
        }
    }
    for b in space.mesh().boundary_edges() {
        let geom = space.geometry(b.triangle);
        let bn = (beta[0] * b.normal[0] + beta[1] * b.normal[1]).abs();
        for (i, w) in edge.weights.iter().enumerate() {
            let bary = FeSpace::edge_point(b.local, edge.edge_param(i));
            let s = sample(b.triangle, bary, geom.point(bary));
            let w = w * b.length;
            let v2 = s.value * s.value;
            let dn = s.grad[0] * b.normal[0] + s.grad[1] * b.normal[1];
            out.boundary_h += w * v2 / geom.h;
            out.boundary_beta += w * bn * v2;
            out.boundary_flux_h += w * geom.h * dn * dn;
        }
    }
    out
}

pub fn norm(f: &FeFunction, kind: NormKind, params: &NormParams) -> Result<f64> {
    norm_parts(f.space(), params, |k, bary, _| f.eval(k, bary)).combine(kind, params)
}

/// Norm of `u − u_h` with `u` evaluated analytically at the quadrature points.
pub fn error_norm(u: &dyn Field, uh: &FeFunction, kind: NormKind, params: &NormParams) -> Result<f64> {
    error_parts(u, uh, params).combine(kind, params)
}

pub fn error_parts(u: &dyn Field, uh: &FeFunction, params: &NormParams) -> NormParts {
    norm_parts(uh.space(), params, |k, bary, x| {
        Sample { value: u.value(x), grad: u.gradient(x), lap: u.laplacian(x) } - uh.eval(k, bary)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fields::SineSolution;
    use crate::fespace::nodal_interpolate;
    use crate::mesh::{build_structured, jitter};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn params() -> NormParams {
        NormParams { eps: Some(0.1), beta: Some([0.5, 1.0]), delta: None }
    }

    #[test]
    fn zero_function_has_zero_norms() {
        let s = FeSpace::new(Arc::new(build_structured(4).unwrap()), 2).unwrap();
        let z = FeFunction::zeros(s);
        for kind in NormKind::ALL {
            assert_eq!(norm(&z, kind, &params()).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_one_h_norm_is_boundary_sum() {
        let m = Arc::new(jitter(&build_structured(7).unwrap(), 0.2, 5).unwrap());
        let s = FeSpace::new(m.clone(), 1).unwrap();
        let one = nodal_interpolate(&s, |_| 1.0);
        let expect: f64 = m.boundary_edges().iter().map(|b| b.length / m.diameter(b.triangle)).sum();
        let got = norm(&one, NormKind::OneH, &NormParams::default()).unwrap();
        assert!((got * got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn sine_norms_converge_to_analytic_values() {
        let s = FeSpace::new(Arc::new(build_structured(40).unwrap()), 2).unwrap();
        let u = nodal_interpolate(&s, |x| SineSolution.value(x));
        let l2 = norm(&u, NormKind::L2, &NormParams::default()).unwrap();
        let h1 = norm(&u, NormKind::H1Semi, &NormParams::default()).unwrap();
        assert!((l2 * l2 - 0.25).abs() < 1e-5);
        assert!((h1 * h1 - 1.25 * PI * PI).abs() < 1e-3);
    }

    #[test]
    fn missing_coefficients_are_reported() {
        let s = FeSpace::new(Arc::new(build_structured(3).unwrap()), 1).unwrap();
        let z = FeFunction::zeros(s);
        assert!(norm(&z, NormKind::OneHBeta, &NormParams::default()).is_err());
        assert!(norm(&z, NormKind::TripleStar, &NormParams { eps: Some(1.0), ..Default::default() }).is_err());
    }

    #[test]
    fn error_of_exact_interpolant_vanishes_for_polynomials() {
        use crate::analysis::fields::Quadratic;
        let s = FeSpace::new(Arc::new(jitter(&build_structured(5).unwrap(), 0.2, 2).unwrap()), 2).unwrap();
        let q = Quadratic([1.0, -2.0, 0.5, 3.0, 1.0, -1.0]);
        let uh = nodal_interpolate(&s, |x| q.value(x));
        for kind in [NormKind::L2, NormKind::H1Semi, NormKind::StarPoisson] {
            assert!(error_norm(&q, &uh, kind, &NormParams::default()).unwrap() < 1e-12);
        }
    }
}
