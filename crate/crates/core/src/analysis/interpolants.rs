use std::collections::HashSet;
use std::sync::Arc;

use super::fields::Field;
use super::phi_r::{build_phi_r, corner_vertices, integral_normal_gradient, mean_normal_gradient, PhiR};
use crate::assembly::forms;
use crate::fespace::{nodal_interpolate, quadrature_for, FeFunction, FeSpace, QuadraturePurpose};
use crate::linalg::{solve_direct, DenseMatrix};
use crate::mesh::{BoundaryPatch, Mesh};
use crate::{Error, Result};

/// Below this `|det 𝒜|` (relative to the product of the row scales) a patch is degenerate.
pub const DEGENERATE_DET: f64 = 1e-12;

/// `meas(F)⁻¹ ∫_F ∇u·n` for an analytic field.
pub fn exact_mean_normal_gradient(u: &dyn Field, mesh: &Mesh, patch: &BoundaryPatch) -> f64 {
    exact_integral_normal_gradient(u, mesh, patch) / patch.measure
}

pub fn exact_integral_normal_gradient(u: &dyn Field, mesh: &Mesh, patch: &BoundaryPatch) -> f64 {
    let rule = quadrature_for(QuadraturePurpose::Edge, 2).expect("valid order");
    let mut total = 0.0;
    for &e in &patch.edges {
        let b = &mesh.boundary_edges()[e];
        let (p, q) = (mesh.vertices()[b.v[0]], mesh.vertices()[b.v[1]]);
        for (i, w) in rule.weights.iter().enumerate() {
            let s = rule.edge_param(i);
            let x = [(1.0 - s) * p[0] + s * q[0], (1.0 - s) * p[1] + s * q[1]];
            let g = u.gradient(x);
            total += w * b.length * (g[0] * b.normal[0] + g[1] * b.normal[1]);
        }
    }
    total
}

/// Nodal interpolant corrected by `φ_r` so that mean normal gradients match `u` on every face.
#[derive(Clone, Debug)]
pub struct PiPartial {
    pub function: FeFunction,
    pub phi: PhiR,
    /// `|∫_{F_j} ∇(π_∂u − u)·n|` per patch.
    pub residuals: Vec<f64>,
}

pub fn build_pi_partial(u: &dyn Field, space: &Arc<FeSpace>, patches: &[BoundaryPatch]) -> Result<PiPartial> {
    let mesh = space.mesh();
    let ih = nodal_interpolate(space, |x| u.value(x));
    let r: Vec<f64> = patches
        .iter()
        .map(|p| exact_mean_normal_gradient(u, mesh, p) - mean_normal_gradient(&ih, p))
        .collect();
    let phi = build_phi_r(space, patches, &r)?;
    let function = ih.axpy(1.0, &phi.function);
    let residuals = patches
        .iter()
        .map(|p| (integral_normal_gradient(&function, p) - exact_integral_normal_gradient(u, mesh, p)).abs())
        .collect();
    Ok(PiPartial { function, phi, residuals })
}

/// `π_h u`: the L2 projection onto the space, from a full mass-matrix solve.
pub fn l2_projection(u: &dyn Field, space: &Arc<FeSpace>) -> Result<FeFunction> {
    let m = forms::mass(space);
    let b = forms::load(space, &|x| u.value(x));
    FeFunction::new(space.clone(), solve_direct(&m, &b)?)
}

/// Per-patch data of the CIP interpolant.
#[derive(Clone, Debug)]
pub struct CipPatch {
    /// Interior vertices carrying `w_I = 1`.
    pub interior_nodes: Vec<usize>,
    /// Open-face vertices carrying `w_F = 1`.
    pub face_nodes: Vec<usize>,
    /// Triangles of the extended patch.
    pub triangles: Vec<usize>,
    pub measure: f64,
    /// `[[∫w_I, ∫w_F], [∫_F ∇w_I·n, ∫_F ∇w_F·n]]`.
    pub system: [[f64; 2]; 2],
    pub coefficients: [f64; 2],
}

impl CipPatch {
    pub fn determinant(&self) -> f64 {
        let a = &self.system;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    /// First row positive, second row `(−, +)`.
    pub fn sign_pattern_holds(&self) -> bool {
        let a = &self.system;
        a[0][0] > 0.0 && a[0][1] > 0.0 && a[1][0] < 0.0 && a[1][1] > 0.0
    }
}

#[derive(Clone, Debug)]
pub struct PiCip {
    pub function: FeFunction,
    pub projection: FeFunction,
    pub patches: Vec<CipPatch>,
    /// `|∫_Ω φ_i| / meas(P_i)` per patch.
    pub mean_residuals: Vec<f64>,
    /// `|∫_{F_i} ∇(π_CIP u − u)·n|` per patch.
    pub gradient_residuals: Vec<f64>,
}

/// Extended patches: boundary patch elements plus every element containing a
/// vertex joined by edges to two vertices of the closed face.
pub fn cip_patches(space: &FeSpace, patches: &[BoundaryPatch]) -> Result<Vec<CipPatch>> {
    let mesh = space.mesh();
    let nv = mesh.vertices().len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for e in mesh.edges() {
        adj[e.v[0]].push(e.v[1]);
        adj[e.v[1]].push(e.v[0]);
    }
    let corners = corner_vertices(mesh);
    let mut out = Vec::with_capacity(patches.len());
    for patch in patches {
        let closed: HashSet<usize> = patch.path.iter().copied().collect();
        let open: HashSet<usize> = patch.interior_vertices.iter().copied().collect();
        let mut tris: HashSet<usize> = patch.triangles.iter().copied().collect();
        for v in 0..nv {
            if adj[v].iter().filter(|w| closed.contains(w)).count() >= 2 {
                tris.extend(mesh.vertex_triangles(v));
            }
        }
        // interior vertices whose star lies in the extended patch and whose boundary
        // neighbours are all in the open face, so w_I has no normal gradient elsewhere
        let mut interior_nodes: Vec<usize> = (0..nv)
            .filter(|&v| !mesh.is_boundary_vertex(v))
            .filter(|&v| mesh.vertex_triangles(v).iter().all(|k| tris.contains(k)))
            .filter(|&v| {
                let bn: Vec<usize> = adj[v].iter().copied().filter(|&w| mesh.is_boundary_vertex(w)).collect();
                !bn.is_empty() && bn.iter().all(|w| open.contains(w))
            })
            .collect();
        interior_nodes.sort_unstable();
        let face_nodes: Vec<usize> = patch.interior_vertices.iter().copied().filter(|v| !corners.contains(v)).collect();
        let mut triangles: Vec<usize> = tris.into_iter().collect();
        triangles.sort_unstable();
        let measure = triangles.iter().map(|&k| mesh.area(k)).sum();
        if interior_nodes.is_empty() || face_nodes.is_empty() {
            return Err(Error::DegeneratePatch { patch: patch.id, value: 0.0 });
        }
        out.push(CipPatch { interior_nodes, face_nodes, triangles, measure, system: [[0.0; 2]; 2], coefficients: [0.0; 2] });
    }
    Ok(out)
}

fn indicator(space: &Arc<FeSpace>, nodes: &[usize]) -> FeFunction {
    let mut f = FeFunction::zeros(space.clone());
    for &v in nodes {
        f.coeffs_mut()[v] = 1.0;
    }
    f
}

/// `π_CIP u = π_h u + Σ_i (a_i w_I + b_i w_F)` with zero mean per patch and
/// matching normal-gradient integral on every face. P1 only.
pub fn build_pi_cip(u: &dyn Field, space: &Arc<FeSpace>, patches: &[BoundaryPatch]) -> Result<PiCip> {
    if space.order() != 1 {
        return Err(Error::InvalidArgument("the CIP interpolant is constructed for P1 only".into()));
    }
    let mesh = space.mesh();
    let projection = l2_projection(u, space)?;
    let mass = forms::mass(space);
    let ones = vec![1.0; space.ndofs()];
    let integral = |f: &FeFunction| mass.bilinear(&ones, f.coeffs());
    let mut cp = cip_patches(space, patches)?;
    let mut coeffs = projection.coeffs().to_vec();
    let mut corrections = Vec::with_capacity(cp.len());
    for (c, patch) in cp.iter_mut().zip(patches) {
        let wi = indicator(space, &c.interior_nodes);
        let wf = indicator(space, &c.face_nodes);
        c.system = [
            [integral(&wi), integral(&wf)],
            [integral_normal_gradient(&wi, patch), integral_normal_gradient(&wf, patch)],
        ];
        let scale = (c.system[0][0].abs() + c.system[0][1].abs()) * (c.system[1][0].abs() + c.system[1][1].abs());
        if c.determinant().abs() <= DEGENERATE_DET * scale {
            return Err(Error::DegeneratePatch { patch: patch.id, value: c.determinant() });
        }
        let rhs = exact_integral_normal_gradient(u, mesh, patch) - integral_normal_gradient(&projection, patch);
        let a = DenseMatrix::from_rows(&[c.system[0].to_vec(), c.system[1].to_vec()])?;
        let ab = a.solve(&[0.0, rhs])?;
        c.coefficients = [ab[0], ab[1]];
        let phi = wi.coeffs().iter().zip(wf.coeffs()).map(|(x, y)| ab[0] * x + ab[1] * y).collect::<Vec<f64>>();
        for (t, p) in coeffs.iter_mut().zip(&phi) {
            *t += p;
        }
        corrections.push(FeFunction::new(space.clone(), phi)?);
    }
    let function = FeFunction::new(space.clone(), coeffs)?;
    let mean_residuals = corrections.iter().zip(&cp).map(|(f, c)| integral(f).abs() / c.measure).collect();
    let gradient_residuals = patches
        .iter()
        .map(|p| (integral_normal_gradient(&function, p) - exact_integral_normal_gradient(u, mesh, p)).abs())
        .collect();
    Ok(PiCip { function, projection, patches: cp, mean_residuals, gradient_residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fields::{Quadratic, SineSolution};
    use crate::analysis::norms::{error_norm, NormKind, NormParams};
    use crate::mesh::{build_patches, build_structured, MeshFamily};

    fn setup(n: usize, order: usize) -> (Arc<FeSpace>, Vec<BoundaryPatch>) {
        let m = MeshFamily::jittered(1).build(n).unwrap();
        let p = build_patches(&m, 5).unwrap();
        (FeSpace::new(Arc::new(m), order).unwrap(), p)
    }

    fn l2(u: &dyn Field, f: &FeFunction) -> f64 {
        error_norm(u, f, NormKind::L2, &NormParams::default()).unwrap()
    }

    #[test]
    fn linear_fields_need_no_correction() {
        let (s, p) = setup(10, 1);
        let q = Quadratic::linear(1.0, 2.0, -3.0);
        let pi = build_pi_partial(&q, &s, &p).unwrap();
        assert!(pi.phi.r.iter().all(|r| r.abs() < 1e-12));
        assert!(l2(&q, &pi.function) < 1e-13);
    }

    #[test]
    fn partial_interpolant_orthogonality_and_rate() {
        for order in [1, 2] {
            let (s1, p1) = setup(40, order);
            let (s2, p2) = setup(80, order);
            let a = build_pi_partial(&SineSolution, &s1, &p1).unwrap();
            let b = build_pi_partial(&SineSolution, &s2, &p2).unwrap();
            assert!(a.residuals.iter().chain(&b.residuals).all(|&r| r <= 1e-9));
            let rate = (l2(&SineSolution, &a.function) / l2(&SineSolution, &b.function)).ln() / (s1.mesh().h() / s2.mesh().h()).ln();
            assert!((rate - (order as f64 + 1.0)).abs() <= 0.2, "order {order}: rate {rate}");
        }
    }

    #[test]
    fn cip_interpolant_of_constant_is_exact() {
        let (s, p) = setup(10, 1);
        let c = Quadratic::linear(2.5, 0.0, 0.0);
        let pi = build_pi_cip(&c, &s, &p).unwrap();
        assert!(pi.patches.iter().all(|q| q.coefficients[0].abs() < 1e-12 && q.coefficients[1].abs() < 1e-12));
        assert!(l2(&c, &pi.function) < 1e-12);
    }

    #[test]
    fn cip_constraints_sign_pattern_and_rate() {
        let (s1, p1) = setup(40, 1);
        let (s2, p2) = setup(80, 1);
        let a = build_pi_cip(&SineSolution, &s1, &p1).unwrap();
        let b = build_pi_cip(&SineSolution, &s2, &p2).unwrap();
        for pi in [&a, &b] {
            assert!(pi.mean_residuals.iter().all(|&r| r <= 1e-9));
            assert!(pi.gradient_residuals.iter().all(|&r| r <= 1e-9));
            assert!(pi.patches.iter().all(|q| q.sign_pattern_holds() && q.determinant() > 0.0));
        }
        let rate = (l2(&SineSolution, &a.function) / l2(&SineSolution, &b.function)).ln() / (s1.mesh().h() / s2.mesh().h()).ln();
        assert!((rate - 2.0).abs() <= 0.2, "rate {rate}");
    }

    #[test]
    fn interpolation_error_ratio_between_refinements() {
        let e: Vec<f64> = [40, 80]
            .iter()
            .map(|&n| {
                let s = FeSpace::new(Arc::new(build_structured(n).unwrap()), 1).unwrap();
                l2(&SineSolution, &nodal_interpolate(&s, |x| SineSolution.value(x)))
            })
            .collect();
        assert!((e[0] / e[1] - 4.0).abs() <= 0.4);
    }
}
