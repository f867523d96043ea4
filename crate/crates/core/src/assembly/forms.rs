//! Component matrices and load vectors. Row index = test function, column = trial.

use crate::fespace::{quadrature_for, FeSpace, QuadraturePurpose, ShapeValues};
use crate::linalg::CsrMatrix;
use crate::mesh::BoundaryEdge;
use crate::Point;

type Local = [[f64; 6]; 6];

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Generic element loop; `kernel(k, shape, x, weight, local)` accumulates one quadrature point.
pub fn volume_matrix(space: &FeSpace, mut kernel: impl FnMut(usize, &ShapeValues, Point, f64, &mut Local)) -> CsrMatrix {
    let rule = quadrature_for(QuadraturePurpose::Area, space.order()).expect("order validated by FeSpace");
    let nd = space.dofs_per_element();
    let mut trip = Vec::with_capacity(space.num_elements() * nd * nd);
    for k in 0..space.num_elements() {
        let geom = space.geometry(k);
        let mut local = [[0.0; 6]; 6];
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let s = space.shape(k, *bary);
            kernel(k, &s, geom.point(*bary), 2.0 * geom.area * w, &mut local);
        }
        push_local(&mut trip, space.element_dofs(k), &local);
    }
    CsrMatrix::from_triplets(space.ndofs(), space.ndofs(), &trip)
}

pub fn volume_vector(space: &FeSpace, mut kernel: impl FnMut(usize, &ShapeValues, Point, f64, &mut [f64; 6])) -> Vec<f64> {
    let rule = quadrature_for(QuadraturePurpose::Area, space.order()).expect("order validated by FeSpace");
    let mut out = vec![0.0; space.ndofs()];
    for k in 0..space.num_elements() {
        let geom = space.geometry(k);
        let mut local = [0.0; 6];
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let s = space.shape(k, *bary);
            kernel(k, &s, geom.point(*bary), 2.0 * geom.area * w, &mut local);
        }
        for (i, &d) in space.element_dofs(k).iter().enumerate() {
            out[d] += local[i];
        }
    }
    out
}

/// Boundary-edge loop over the owning elements' local bases.
pub fn boundary_matrix(
    space: &FeSpace,
    mut kernel: impl FnMut(&BoundaryEdge, &ShapeValues, Point, f64, &mut Local),
) -> CsrMatrix {
    let rule = quadrature_for(QuadraturePurpose::Edge, space.order()).expect("order validated by FeSpace");
    let nd = space.dofs_per_element();
    let mesh = space.mesh();
    let mut trip = Vec::with_capacity(mesh.boundary_edges().len() * nd * nd);
    for b in mesh.boundary_edges() {
        let geom = space.geometry(b.triangle);
        let mut local = [[0.0; 6]; 6];
        for (i, w) in rule.weights.iter().enumerate() {
            let bary = FeSpace::edge_point(b.local, rule.edge_param(i));
            let s = space.shape(b.triangle, bary);
            kernel(b, &s, geom.point(bary), w * b.length, &mut local);
        }
        push_local(&mut trip, space.element_dofs(b.triangle), &local);
    }
    CsrMatrix::from_triplets(space.ndofs(), space.ndofs(), &trip)
}

pub fn boundary_vector(space: &FeSpace, mut kernel: impl FnMut(&BoundaryEdge, &ShapeValues, Point, f64, &mut [f64; 6])) -> Vec<f64> {
    let rule = quadrature_for(QuadraturePurpose::Edge, space.order()).expect("order validated by FeSpace");
    let mut out = vec![0.0; space.ndofs()];
    for b in space.mesh().boundary_edges() {
        let geom = space.geometry(b.triangle);
        let mut local = [0.0; 6];
        for (i, w) in rule.weights.iter().enumerate() {
            let bary = FeSpace::edge_point(b.local, rule.edge_param(i));
            let s = space.shape(b.triangle, bary);
            kernel(b, &s, geom.point(bary), w * b.length, &mut local);
        }
        for (i, &d) in space.element_dofs(b.triangle).iter().enumerate() {
            out[d] += local[i];
        }
    }
    out
}

fn push_local(trip: &mut Vec<(usize, usize, f64)>, dofs: &[usize], local: &Local) {
    for (i, &di) in dofs.iter().enumerate() {
        for (j, &dj) in dofs.iter().enumerate() {
            trip.push((di, dj, local[i][j]));
        }
    }
}

/// `(∇u, ∇v)`.
pub fn stiffness(space: &FeSpace) -> CsrMatrix {
    volume_matrix(space, |_, s, _, w, a| {
        for i in 0..s.n {
            for j in 0..s.n {
                a[i][j] += w * dot(s.grad[i], s.grad[j]);
            }
        }
    })
}

/// `(u, v)`.
pub fn mass(space: &FeSpace) -> CsrMatrix {
    volume_matrix(space, |_, s, _, w, a| {
        for i in 0..s.n {
            for j in 0..s.n {
                a[i][j] += w * s.val[i] * s.val[j];
            }
        }
    })
}

/// `(β·∇u, v)`.
pub fn convection(space: &FeSpace, beta: [f64; 2]) -> CsrMatrix {
    volume_matrix(space, |_, s, _, w, a| {
        for i in 0..s.n {
            for j in 0..s.n {
                a[i][j] += w * dot(beta, s.grad[j]) * s.val[i];
            }
        }
    })
}

/// `⟨∇u·n, v⟩_∂Ω`.
pub fn flux(space: &FeSpace) -> CsrMatrix {
    boundary_matrix(space, |b, s, _, w, a| {
        for i in 0..s.n {
            for j in 0..s.n {
                a[i][j] += w * dot(s.grad[j], b.normal) * s.val[i];
            }
        }
    })
}

/// `⟨u, ∇v·n⟩_∂Ω`, the transpose of [`flux`].
pub fn adjoint_flux(space: &FeSpace) -> CsrMatrix {
    boundary_matrix(space, |b, s, _, w, a| {
        for i in 0..s.n {
            for j in 0..s.n {
                a[i][j] += w * s.val[j] * dot(s.grad[i], b.normal);
            }
        }
    })
}

/// `Σ ⟨ω_b u, v⟩` over boundary edges with one weight per edge (`h_K` passed to `weight`).
pub fn boundary_mass(space: &FeSpace, weight: impl Fn(&BoundaryEdge, f64) -> f64) -> CsrMatrix {
    boundary_matrix(space, |b, s, _, w, a| {
        let wb = weight(b, space.geometry(b.triangle).h);
        if wb == 0.0 {
            return;
        }
        for i in 0..s.n {
            for j in 0..s.n {
                a[i][j] += w * wb * s.val[i] * s.val[j];
            }
        }
    })
}

/// `Σ_K δ_K [(β·∇u, β·∇v)_K − (εΔu, β·∇v)_K]`.
pub fn streamline_diffusion(space: &FeSpace, beta: [f64; 2], eps: f64, delta: &[f64]) -> CsrMatrix {
    volume_matrix(space, |k, s, _, w, a| {
        let d = delta[k];
        if d == 0.0 {
            return;
        }
        for i in 0..s.n {
            let bi = dot(beta, s.grad[i]);
            for j in 0..s.n {
                a[i][j] += w * d * (dot(beta, s.grad[j]) - eps * s.lap[j]) * bi;
            }
        }
    })
}

/// `γ Σ_F ∫_F h_F² |β·n_F| [∇u·n_F][∇v·n_F]` over interior edges.
///
/// `n_F` points left of the direction from the lower to the higher vertex index
/// (or right, when `flip`); the jump is first triangle minus second.
pub fn cip(space: &FeSpace, beta: [f64; 2], gamma: f64, flip: bool) -> CsrMatrix {
    let rule = quadrature_for(QuadraturePurpose::Edge, space.order()).expect("order validated by FeSpace");
    let mesh = space.mesh();
    let nd = space.dofs_per_element();
    let mut trip = Vec::new();
    for e in mesh.edges().iter().filter(|e| e.interior) {
        let (x0, x1) = (mesh.vertices()[e.v[0]], mesh.vertices()[e.v[1]]);
        let t = [x1[0] - x0[0], x1[1] - x0[1]];
        let hf = t[0].hypot(t[1]);
        let sign = if flip { -1.0 } else { 1.0 };
        let n = [sign * -t[1] / hf, sign * t[0] / hf];
        let weight = gamma * hf * hf * dot(beta, n).abs();
        if weight == 0.0 {
            continue;
        }
        let local_of = |k: usize, v: usize| mesh.triangles()[k].v.iter().position(|&x| x == v).expect("edge vertex in triangle");
        let [ka, kb] = e.triangles;
        let dofs: Vec<usize> = space.element_dofs(ka).iter().chain(space.element_dofs(kb)).copied().collect();
        let mut local = vec![0.0; 4 * nd * nd];
        for (q, w) in rule.weights.iter().enumerate() {
            let s = rule.edge_param(q);
            let mut c = vec![0.0; 2 * nd];
            for (side, k) in [ka, kb].into_iter().enumerate() {
                let mut bary = [0.0; 3];
                bary[local_of(k, e.v[0])] = 1.0 - s;
                bary[local_of(k, e.v[1])] = s;
                let sh = space.shape(k, bary);
                let sgn = if side == 0 { 1.0 } else { -1.0 };
                for i in 0..nd {
                    c[side * nd + i] = sgn * dot(sh.grad[i], n);
                }
            }
            for i in 0..2 * nd {
                for j in 0..2 * nd {
                    local[i * 2 * nd + j] += w * hf * weight * c[i] * c[j];
                }
            }
        }
        for i in 0..2 * nd {
            for j in 0..2 * nd {
                trip.push((dofs[i], dofs[j], local[i * 2 * nd + j]));
            }
        }
    }
    CsrMatrix::from_triplets(space.ndofs(), space.ndofs(), &trip)
}

/// `(f, v)`.
pub fn load(space: &FeSpace, f: &dyn Fn(Point) -> f64) -> Vec<f64> {
    volume_vector(space, |_, s, x, w, b| {
        let fx = f(x);
        for i in 0..s.n {
            b[i] += w * fx * s.val[i];
        }
    })
}

/// `Σ_K δ_K (f, β·∇v)_K`.
pub fn streamline_load(space: &FeSpace, f: &dyn Fn(Point) -> f64, beta: [f64; 2], delta: &[f64]) -> Vec<f64> {
    volume_vector(space, |k, s, x, w, b| {
        if delta[k] == 0.0 {
            return;
        }
        let fx = f(x);
        for i in 0..s.n {
            b[i] += w * delta[k] * fx * dot(beta, s.grad[i]);
        }
    })
}

/// `⟨g, ∇v·n⟩_∂Ω`.
pub fn boundary_normal_load(space: &FeSpace, g: &dyn Fn(Point) -> f64) -> Vec<f64> {
    boundary_vector(space, |bd, s, x, w, b| {
        let gx = g(x);
        for i in 0..s.n {
            b[i] += w * gx * dot(s.grad[i], bd.normal);
        }
    })
}

/// `Σ ⟨ω_b g, v⟩` over boundary edges.
pub fn boundary_weighted_load(space: &FeSpace, g: &dyn Fn(Point) -> f64, weight: impl Fn(&BoundaryEdge, f64) -> f64) -> Vec<f64> {
    boundary_vector(space, |bd, s, x, w, b| {
        let wb = weight(bd, space.geometry(bd.triangle).h);
        if wb == 0.0 {
            return;
        }
        let gx = g(x);
        for i in 0..s.n {
            b[i] += w * wb * gx * s.val[i];
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured, jitter, Mesh};
    use std::sync::Arc;

    #[test]
    fn unit_triangle_stiffness() {
        let m = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], &[(0, 1, 0), (1, 2, 1), (2, 0, 2)]).unwrap();
        let s = FeSpace::new(Arc::new(m), 1).unwrap();
        let a = stiffness(&s);
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.get(i, j) - expect[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mass_integrates_constants() {
        for order in [1, 2] {
            let s = FeSpace::new(Arc::new(jitter(&build_structured(6).unwrap(), 0.2, 3).unwrap()), order).unwrap();
            let one = vec![1.0; s.ndofs()];
            assert!((mass(&s).bilinear(&one, &one) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn flux_pair_is_antisymmetric() {
        for order in [1, 2] {
            let s = FeSpace::new(Arc::new(jitter(&build_structured(5).unwrap(), 0.2, 1).unwrap()), order).unwrap();
            let b = flux(&s).scaled(-1.0);
            let b_adj = adjoint_flux(&s);
            let sum = b.add_scaled(1.0, &b_adj.transpose());
            assert!(sum.max_abs() < 1e-14, "{}", sum.max_abs());
        }
    }

    #[test]
    fn convection_of_constant_field_matches_divergence_theorem() {
        // (β·∇u, 1) = ⟨β·n u, 1⟩ for u = x
        let s = FeSpace::new(Arc::new(build_structured(4).unwrap()), 2).unwrap();
        let beta = [0.5, 1.0];
        let u: Vec<f64> = s.dof_coords().iter().map(|p| p[0]).collect();
        let one = vec![1.0; s.ndofs()];
        assert!((convection(&s, beta).bilinear(&one, &u) - 0.5).abs() < 1e-13);
    }
}
