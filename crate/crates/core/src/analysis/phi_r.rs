use std::collections::HashSet;
use std::sync::Arc;

use super::norms::{norm, NormKind, NormParams};
use crate::fespace::{p2_dof_of_local_edge, quadrature_for, FeFunction, FeSpace, QuadraturePurpose};
use crate::mesh::{BoundaryPatch, Mesh};
use crate::{Error, Result};

/// Below this `Ξ_j h` a patch is reported as degenerate.
pub const DEGENERATE_XI: f64 = 1e-12;

/// A P1 function whose mean normal gradient on each face `F_j` is `r_j`.
#[derive(Clone, Debug)]
pub struct PhiR {
    pub function: FeFunction,
    pub r: Vec<f64>,
    /// `Ξ_j = meas(F_j)⁻¹ ∫_{F_j} ∇φ̃_j·n`.
    pub xi: Vec<f64>,
    /// `min_j Ξ_j h`, the observed lower bound of the normalization.
    pub c_xi: f64,
}

/// Vertices of triangles with all three vertices on the boundary.
pub fn corner_vertices(mesh: &Mesh) -> HashSet<usize> {
    mesh.corner_elements().iter().flat_map(|&k| mesh.triangles()[k].v).collect()
}

/// `meas(F_j)⁻¹ ∫_{F_j} ∇f·n`, evaluated on the elements owning the face edges.
pub fn mean_normal_gradient(f: &FeFunction, patch: &BoundaryPatch) -> f64 {
    integral_normal_gradient(f, patch) / patch.measure
}

pub fn integral_normal_gradient(f: &FeFunction, patch: &BoundaryPatch) -> f64 {
    let mesh = f.space().mesh();
    let rule = quadrature_for(QuadraturePurpose::Edge, f.space().order()).expect("valid order");
    let mut total = 0.0;
    for &e in &patch.edges {
        let b = &mesh.boundary_edges()[e];
        for (i, w) in rule.weights.iter().enumerate() {
            let s = f.eval(b.triangle, FeSpace::edge_point(b.local, rule.edge_param(i)));
            total += w * b.length * (s.grad[0] * b.normal[0] + s.grad[1] * b.normal[1]);
        }
    }
    total
}

/// `φ̃_j`: one at the nodes of the open face `F̊_j`, zero at corner-element nodes and elsewhere.
///
/// For P2 the face nodes include the midpoints of the face edges.
pub fn patch_bump(space: &Arc<FeSpace>, patch: &BoundaryPatch, corners: &HashSet<usize>) -> FeFunction {
    let mesh = space.mesh();
    let mut f = FeFunction::zeros(space.clone());
    for &v in &patch.interior_vertices {
        if !corners.contains(&v) {
            f.coeffs_mut()[v] = 1.0;
        }
    }
    if space.order() == 2 {
        let corner_elems: HashSet<usize> = mesh.corner_elements().iter().copied().collect();
        for &e in &patch.edges {
            let b = &mesh.boundary_edges()[e];
            if !corner_elems.contains(&b.triangle) {
                f.coeffs_mut()[space.element_dofs(b.triangle)[p2_dof_of_local_edge(b.local)]] = 1.0;
            }
        }
    }
    f
}

/// `φ_r = Σ_j r_j Ξ_j⁻¹ φ̃_j` in `space`.
pub fn build_phi_r(space: &Arc<FeSpace>, patches: &[BoundaryPatch], r: &[f64]) -> Result<PhiR> {
    if r.len() != patches.len() {
        return Err(Error::InvalidArgument(format!("{} targets for {} patches", r.len(), patches.len())));
    }
    if let Some(x) = r.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite target {x}")));
    }
    let h = space.mesh().h();
    let corners = corner_vertices(space.mesh());
    let mut coeffs = vec![0.0; space.ndofs()];
    let mut xi = Vec::with_capacity(patches.len());
    for (j, patch) in patches.iter().enumerate() {
        let bump = patch_bump(space, patch, &corners);
        let x = mean_normal_gradient(&bump, patch);
        if !(x * h > DEGENERATE_XI) {
            return Err(Error::DegeneratePatch { patch: j, value: x * h });
        }
        for (c, b) in coeffs.iter_mut().zip(bump.coeffs()) {
            *c += r[j] / x * b;
        }
        xi.push(x);
    }
    let c_xi = xi.iter().map(|x| x * h).fold(f64::INFINITY, f64::min);
    Ok(PhiR { function: FeFunction::new(space.clone(), coeffs)?, r: r.to_vec(), xi, c_xi })
}

impl PhiR {
    /// Largest `|mean normal gradient − r_j|` over all patches.
    pub fn constraint_residual(&self, patches: &[BoundaryPatch]) -> f64 {
        patches
            .iter()
            .zip(&self.r)
            .map(|(p, r)| (mean_normal_gradient(&self.function, p) - r).abs())
            .fold(0.0, f64::max)
    }

    /// `‖φ_r‖_{1,h} / (Σ_j h r_j² meas(F_j))^{1/2}` with the global `h`.
    pub fn stability_ratio(&self, patches: &[BoundaryPatch]) -> Result<f64> {
        let h = self.function.space().mesh().h();
        let denom: f64 = patches.iter().zip(&self.r).map(|(p, r)| h * r * r * p.measure).sum::<f64>().sqrt();
        if denom == 0.0 {
            return Err(Error::InvalidArgument("stability ratio undefined for r = 0".into()));
        }
        Ok(norm(&self.function, NormKind::OneH, &NormParams::default())? / denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_patches, build_structured, jitter};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, jit: bool) -> (Arc<FeSpace>, Vec<BoundaryPatch>) {
        let mut m = build_structured(n).unwrap();
        if jit {
            m = jitter(&m, 0.2, 3).unwrap();
        }
        let patches = build_patches(&m, 5).unwrap();
        (FeSpace::new(Arc::new(m), 1).unwrap(), patches)
    }

    #[test]
    fn zero_targets_give_zero_function() {
        let (s, p) = setup(10, false);
        let phi = build_phi_r(&s, &p, &vec![0.0; p.len()]).unwrap();
        assert!(phi.function.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn unit_target_on_one_patch_only() {
        let (s, p) = setup(20, true);
        for j in [0, 3, p.len() - 1] {
            let mut r = vec![0.0; p.len()];
            r[j] = 1.0;
            let phi = build_phi_r(&s, &p, &r).unwrap();
            for (i, patch) in p.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((mean_normal_gradient(&phi.function, patch) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn random_targets_support_and_corners() {
        let (s, p) = setup(15, true);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = build_phi_r(&s, &p, &r).unwrap();
        assert!(phi.constraint_residual(&p) < 1e-10);
        let corners = corner_vertices(s.mesh());
        let in_patches: HashSet<usize> = p.iter().flat_map(|q| q.triangles.iter().flat_map(|&k| s.mesh().triangles()[k].v)).collect();
        for (v, &c) in phi.function.coeffs().iter().enumerate() {
            if c != 0.0 {
                assert!(in_patches.contains(&v) && !corners.contains(&v));
            }
        }
        assert!(phi.xi.iter().all(|&x| x > 0.0));
        assert!(phi.c_xi > 0.5);
    }

    #[test]
    fn p2_bump_satisfies_constraint() {
        let m = jitter(&build_structured(10).unwrap(), 0.2, 5).unwrap();
        let p = build_patches(&m, 5).unwrap();
        let s = FeSpace::new(Arc::new(m), 2).unwrap();
        let r: Vec<f64> = (0..p.len()).map(|j| (j as f64).sin()).collect();
        let phi = build_phi_r(&s, &p, &r).unwrap();
        assert!(phi.constraint_residual(&p) < 1e-10);
        assert!(build_phi_r(&s, &p, &r[1..]).is_err());
    }
}
