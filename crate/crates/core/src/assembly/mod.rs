//! Bilinear and linear forms: the Nitsche Poisson form, convection–diffusion with
//! optional SD or CIP stabilization, and strongly imposed conditions.

pub mod forms;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::fespace::FeSpace;
use crate::linalg::CsrMatrix;
use crate::{Error, Point, Result};

/// A scalar field such as a source or boundary datum.
pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMode {
    /// `−⟨∇u·n, v⟩ + ⟨u, ∇v·n⟩`.
    #[default]
    NitscheNonsym,
    /// `−⟨∇u·n, v⟩ − ⟨u, ∇v·n⟩`.
    NitscheSym,
    Strong,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
#[serde(tag = "kind", content = "gamma", rename_all = "snake_case")]
pub enum Stabilization {
    #[default]
    None,
    Sd(f64),
    Cip(f64),
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub eps: f64,
    pub beta: [f64; 2],
    pub sigma: f64,
    pub f: ScalarFn,
    pub g: ScalarFn,
    pub bc_mode: BcMode,
    /// Boundary penalty; zero gives the penalty-free method.
    pub gamma: f64,
    pub stabilization: Stabilization,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("eps", &self.eps)
            .field("beta", &self.beta)
            .field("sigma", &self.sigma)
            .field("bc_mode", &self.bc_mode)
            .field("gamma", &self.gamma)
            .field("stabilization", &self.stabilization)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// `−Δu = f`, `u = g` on ∂Ω, penalty-free non-symmetric Nitsche.
    pub fn poisson(f: impl Fn(Point) -> f64 + Send + Sync + 'static, g: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ProblemSpec {
            eps: 1.0,
            beta: [0.0, 0.0],
            sigma: 0.0,
            f: Arc::new(f),
            g: Arc::new(g),
            bc_mode: BcMode::NitscheNonsym,
            gamma: 0.0,
            stabilization: Stabilization::None,
        }
    }

    /// `σu + β·∇u − εΔu = f`, `u = g` on ∂Ω.
    pub fn convection_diffusion(
        eps: f64,
        beta: [f64; 2],
        sigma: f64,
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ProblemSpec { eps, beta, sigma, ..Self::poisson(f, g) }
    }

    pub fn with_bc(mut self, bc: BcMode) -> Self {
        self.bc_mode = bc;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_stabilization(mut self, s: Stabilization) -> Self {
        self.stabilization = s;
        self
    }

    pub fn beta_norm(&self) -> f64 {
        self.beta[0].hypot(self.beta[1])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("diffusion must be positive, got {}", self.eps));
        }
        if !(self.sigma >= 0.0) || !self.beta.iter().all(|b| b.is_finite()) {
            return bad("reaction must be non-negative and velocity finite".into());
        }
        if !(self.gamma >= 0.0) {
            return bad(format!("penalty must be non-negative, got {}", self.gamma));
        }
        match self.stabilization {
            Stabilization::Sd(g) | Stabilization::Cip(g) if !(g >= 0.0) => bad(format!("stabilization parameter must be non-negative, got {g}")),
            Stabilization::Sd(_) if self.sigma != 0.0 => bad("SD stabilization is only defined for zero reaction".into()),
            _ => Ok(()),
        }
    }

    /// Per-element SD parameter: `γ_SD h_K / |β|` where `|β| h_K / ε > 1`, else 0.
    pub fn sd_delta(&self, space: &FeSpace) -> Vec<f64> {
        let gamma_sd = match self.stabilization {
            Stabilization::Sd(g) => g,
            _ => return vec![0.0; space.num_elements()],
        };
        let bn = self.beta_norm();
        (0..space.num_elements())
            .map(|k| {
                let h = space.geometry(k).h;
                if bn > 0.0 && bn * h / self.eps > 1.0 {
                    gamma_sd * h / bn
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub space: Arc<FeSpace>,
    pub problem: ProblemSpec,
}

/// Boundary part of `scale · a_h` (flux, adjoint flux, penalty) and its data terms.
fn nitsche_boundary(space: &FeSpace, p: &ProblemSpec, scale: f64) -> (CsrMatrix, Vec<f64>) {
    let adj_sign = match p.bc_mode {
        BcMode::NitscheSym => -1.0,
        _ => 1.0,
    };
    let mut a = forms::flux(space).scaled(-scale).add_scaled(adj_sign * scale, &forms::adjoint_flux(space));
    let mut rhs = forms::boundary_normal_load(space, p.g.as_ref());
    rhs.iter_mut().for_each(|v| *v *= adj_sign * scale);
    if p.gamma > 0.0 {
        let gamma = p.gamma;
        a = a.add_scaled(scale, &forms::boundary_mass(space, |_, h| gamma / h));
        let pen = forms::boundary_weighted_load(space, p.g.as_ref(), |_, h| gamma / h);
        rhs.iter_mut().zip(pen).for_each(|(r, v)| *r += scale * v);
    }
    (a, rhs)
}

fn require_nitsche(p: &ProblemSpec) -> Result<()> {
    p.validate()?;
    if p.bc_mode == BcMode::Strong {
        return Err(Error::InvalidArgument("strong conditions are assembled by assemble_strong".into()));
    }
    Ok(())
}

/// `a_h(u,v) = (∇u,∇v) − ⟨∇u·n,v⟩ ± ⟨u,∇v·n⟩ + γ h_K⁻¹⟨u,v⟩` with the matching data terms.
///
/// Only `f`, `g`, `γ` and the boundary mode are read; diffusion is taken as 1.
pub fn assemble_poisson_nitsche(space: &Arc<FeSpace>, p: &ProblemSpec) -> Result<AssembledSystem> {
    require_nitsche(p)?;
    let (b, rb) = nitsche_boundary(space, p, 1.0);
    let matrix = forms::stiffness(space).add_scaled(1.0, &b);
    let mut rhs = forms::load(space, p.f.as_ref());
    rhs.iter_mut().zip(rb).for_each(|(r, v)| *r += v);
    Ok(AssembledSystem { matrix, rhs, space: space.clone(), problem: p.clone() })
}

/// Volume part shared by the weak and strong convection–diffusion paths.
fn convdiff_volume(space: &FeSpace, p: &ProblemSpec) -> CsrMatrix {
    let mut a = forms::stiffness(space).scaled(p.eps);
    if p.beta != [0.0, 0.0] {
        a = a.add_scaled(1.0, &forms::convection(space, p.beta));
    }
    if p.sigma != 0.0 {
        a = a.add_scaled(p.sigma, &forms::mass(space));
    }
    a
}

fn inflow_weight(beta: [f64; 2]) -> impl Fn(&crate::mesh::BoundaryEdge, f64) -> f64 {
    move |b, _| {
        let bn = beta[0] * b.normal[0] + beta[1] * b.normal[1];
        if bn < 0.0 {
            -bn
        } else {
            0.0
        }
    }
}

fn convdiff_core(space: &Arc<FeSpace>, p: &ProblemSpec) -> Result<AssembledSystem> {
    require_nitsche(p)?;
    let (b, rb) = nitsche_boundary(space, p, p.eps);
    let mut matrix = convdiff_volume(space, p).add_scaled(1.0, &b);
    let mut rhs = forms::load(space, p.f.as_ref());
    rhs.iter_mut().zip(rb).for_each(|(r, v)| *r += v);
    if p.beta != [0.0, 0.0] {
        // −⟨β·n u, v⟩ on the inflow part, i.e. +⟨|β·n| u, v⟩
        matrix = matrix.add_scaled(1.0, &forms::boundary_mass(space, inflow_weight(p.beta)));
        let gin = forms::boundary_weighted_load(space, p.g.as_ref(), inflow_weight(p.beta));
        rhs.iter_mut().zip(gin).for_each(|(r, v)| *r += v);
    }
    Ok(AssembledSystem { matrix, rhs, space: space.clone(), problem: p.clone() })
}

/// `(σu + β·∇u, v) − ⟨(β·n)u, v⟩_{∂Ω⁻} + ε a_h(u, v)`.
pub fn assemble_convdiff(space: &Arc<FeSpace>, p: &ProblemSpec) -> Result<AssembledSystem> {
    if p.stabilization != Stabilization::None {
        return Err(Error::InvalidArgument("use assemble_sd or assemble_cip for stabilized forms".into()));
    }
    convdiff_core(space, p)
}

/// Convection–diffusion plus `Σ_K δ_K[(β·∇u, β·∇v) − (εΔu, β·∇v)]`; the load gains `(f, δβ·∇v)`.
pub fn assemble_sd(space: &Arc<FeSpace>, p: &ProblemSpec) -> Result<AssembledSystem> {
    if !matches!(p.stabilization, Stabilization::Sd(_)) {
        return Err(Error::InvalidArgument("assemble_sd requires SD stabilization".into()));
    }
    let mut sys = convdiff_core(space, p)?;
    add_sd(&mut sys, space, p);
    Ok(sys)
}

fn add_sd(sys: &mut AssembledSystem, space: &FeSpace, p: &ProblemSpec) {
    let delta = p.sd_delta(space);
    if delta.iter().all(|&d| d == 0.0) {
        return;
    }
    sys.matrix = sys.matrix.add_scaled(1.0, &forms::streamline_diffusion(space, p.beta, p.eps, &delta));
    let extra = forms::streamline_load(space, p.f.as_ref(), p.beta, &delta);
    sys.rhs.iter_mut().zip(extra).for_each(|(r, v)| *r += v);
}

/// Convection–diffusion plus the interior-edge gradient-jump penalty.
pub fn assemble_cip(space: &Arc<FeSpace>, p: &ProblemSpec) -> Result<AssembledSystem> {
    let Stabilization::Cip(gamma_cip) = p.stabilization else {
        return Err(Error::InvalidArgument("assemble_cip requires CIP stabilization".into()));
    };
    let mut sys = convdiff_core(space, p)?;
    if gamma_cip > 0.0 {
        sys.matrix = sys.matrix.add_scaled(1.0, &forms::cip(space, p.beta, gamma_cip, false));
    }
    Ok(sys)
}

/// Volume form with boundary dofs fixed to `g` by symmetric elimination.
pub fn assemble_strong(space: &Arc<FeSpace>, p: &ProblemSpec) -> Result<AssembledSystem> {
    p.validate()?;
    if p.bc_mode != BcMode::Strong {
        return Err(Error::InvalidArgument("assemble_strong requires the strong boundary mode".into()));
    }
    let mut sys = AssembledSystem {
        matrix: convdiff_volume(space, p),
        rhs: forms::load(space, p.f.as_ref()),
        space: space.clone(),
        problem: p.clone(),
    };
    match p.stabilization {
        Stabilization::Sd(_) => add_sd(&mut sys, space, p),
        Stabilization::Cip(g) if g > 0.0 => sys.matrix = sys.matrix.add_scaled(1.0, &forms::cip(space, p.beta, g, false)),
        _ => {}
    }
    eliminate_boundary(&mut sys);
    Ok(sys)
}

fn eliminate_boundary(sys: &mut AssembledSystem) {
    let space = &sys.space;
    let n = space.ndofs();
    let mut fixed = vec![None; n];
    for &(d, _) in space.boundary_dofs() {
        fixed[d] = Some((sys.problem.g)(space.dof_coords()[d]));
    }
    let a = &sys.matrix;
    let mut trip = Vec::with_capacity(a.nnz());
    for i in 0..n {
        if let Some(gi) = fixed[i] {
            trip.push((i, i, 1.0));
            sys.rhs[i] = gi;
            continue;
        }
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            match fixed[j] {
                Some(gj) => sys.rhs[i] -= v * gj,
                None => trip.push((i, j, v)),
            }
        }
    }
    sys.matrix = CsrMatrix::from_triplets(n, n, &trip);
}

/// Dispatches on boundary mode and stabilization.
pub fn assemble(space: &Arc<FeSpace>, p: &ProblemSpec) -> Result<AssembledSystem> {
    match (p.bc_mode, p.stabilization) {
        (BcMode::Strong, _) => assemble_strong(space, p),
        (_, Stabilization::None) => assemble_convdiff(space, p),
        (_, Stabilization::Sd(_)) => assemble_sd(space, p),
        (_, Stabilization::Cip(_)) => assemble_cip(space, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_direct;
    use crate::mesh::{build_structured, jitter, SIDE_BOTTOM, SIDE_LEFT};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize, order: usize) -> Arc<FeSpace> {
        FeSpace::new(Arc::new(jitter(&build_structured(n).unwrap(), 0.2, 11).unwrap()), order).unwrap()
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn nonsymmetric_form_on_diagonal_is_dirichlet_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for order in [1, 2] {
            let s = space(6, order);
            let a = assemble_poisson_nitsche(&s, &ProblemSpec::poisson(|_| 0.0, |_| 0.0)).unwrap().matrix;
            let k = forms::stiffness(&s);
            for _ in 0..10 {
                let v = random_vec(s.ndofs(), &mut rng);
                let (x, y) = (a.bilinear(&v, &v), k.bilinear(&v, &v));
                assert!((x - y).abs() <= 1e-12 * y.max(1.0));
            }
        }
    }

    #[test]
    fn penalty_difference_is_the_penalty_matrix() {
        let s = space(5, 2);
        let p0 = ProblemSpec::poisson(|_| 1.0, |x| x[0]);
        let a0 = assemble_poisson_nitsche(&s, &p0).unwrap();
        let a10 = assemble_poisson_nitsche(&s, &p0.clone().with_gamma(10.0)).unwrap();
        let pen = forms::boundary_mass(&s, |_, h| 10.0 / h);
        assert!(a10.matrix.add_scaled(-1.0, &a0.matrix).add_scaled(-1.0, &pen).max_abs() < 1e-12);
    }

    #[test]
    fn symmetric_mode_flips_the_adjoint_term() {
        let s = space(4, 1);
        let p = ProblemSpec::poisson(|_| 0.0, |_| 0.0).with_bc(BcMode::NitscheSym);
        let a = assemble_poisson_nitsche(&s, &p).unwrap().matrix;
        assert!(a.add_scaled(-1.0, &a.transpose()).max_abs() < 1e-13);
    }

    #[test]
    fn zero_velocity_convdiff_equals_poisson() {
        let s = space(5, 2);
        let p = ProblemSpec::poisson(|x| x[1], |x| x[0] * x[1]).with_gamma(3.0);
        let a = assemble_convdiff(&s, &p).unwrap();
        let b = assemble_poisson_nitsche(&s, &p).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn inflow_sides_for_reference_velocity() {
        let s = space(4, 1);
        let w = inflow_weight([0.5, 1.0]);
        for b in s.mesh().boundary_edges() {
            let inflow = w(b, 0.0) > 0.0;
            assert_eq!(inflow, b.segment == SIDE_BOTTOM || b.segment == SIDE_LEFT);
        }
    }

    #[test]
    fn sd_reduces_to_convdiff_when_diffusion_dominates() {
        let s = space(4, 2);
        let p = ProblemSpec::convection_diffusion(1.0, [0.5, 1.0], 0.0, |_| 1.0, |_| 0.0);
        let a = assemble_convdiff(&s, &p).unwrap();
        let b = assemble_sd(&s, &p.clone().with_stabilization(Stabilization::Sd(0.2))).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn sd_delta_follows_local_peclet() {
        let s = FeSpace::new(Arc::new(build_structured(80).unwrap()), 1).unwrap();
        let p = ProblemSpec::convection_diffusion(1e-5, [0.5, 1.0], 0.0, |_| 1.0, |_| 0.0).with_stabilization(Stabilization::Sd(0.2));
        let d = p.sd_delta(&s);
        let h = s.geometry(0).h;
        assert!((d[0] - 0.2 * h / 1.25f64.sqrt()).abs() < 1e-16);
        assert!(p.clone().with_stabilization(Stabilization::Sd(0.2)).validate().is_ok());
        let mut bad = p.clone();
        bad.sigma = 1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sd_laplacian_term_vanishes_for_p1() {
        let s = space(5, 1);
        let delta = vec![0.3; s.num_elements()];
        let with_eps = forms::streamline_diffusion(&s, [0.5, 1.0], 1.0, &delta);
        let without = forms::streamline_diffusion(&s, [0.5, 1.0], 0.0, &delta);
        assert_eq!(with_eps, without);
    }

    #[test]
    fn cip_is_orientation_invariant_and_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for order in [1, 2] {
            let s = space(5, order);
            let j = forms::cip(&s, [0.5, 1.0], 0.005, false);
            let jf = forms::cip(&s, [0.5, 1.0], 0.005, true);
            assert!(j.add_scaled(-1.0, &jf).max_abs() < 1e-15);
            for _ in 0..10 {
                let v = random_vec(s.ndofs(), &mut rng);
                assert!(j.bilinear(&v, &v) >= 0.0);
            }
            let affine: Vec<f64> = s.dof_coords().iter().map(|p| 1.0 + 2.0 * p[0] - p[1]).collect();
            assert!(j.bilinear(&affine, &affine).abs() < 1e-14);
        }
    }

    #[test]
    fn cip_ignores_edges_parallel_to_velocity() {
        // structured horizontal and vertical edges only see one velocity component
        let s = FeSpace::new(Arc::new(build_structured(4).unwrap()), 1).unwrap();
        let j = forms::cip(&s, [1.0, 0.0], 1.0, false);
        let mesh = s.mesh();
        for e in mesh.edges().iter().filter(|e| e.interior) {
            let (a, b) = (mesh.vertices()[e.v[0]], mesh.vertices()[e.v[1]]);
            if a[1] == b[1] {
                // a horizontal edge has n_F ⟂ β; only this edge couples its two opposite vertices
                let opp: Vec<usize> = e.triangles.iter().map(|&k| *mesh.triangles()[k].v.iter().find(|&&v| v != e.v[0] && v != e.v[1]).unwrap()).collect();
                assert_eq!(j.get(opp[0], opp[1]), 0.0);
            }
        }
    }

    #[test]
    fn positivity_of_convection_diffusion_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for order in [1, 2] {
            let s = space(6, order);
            for eps in [1.0, 1e-3] {
                let p = ProblemSpec::convection_diffusion(eps, [0.5, 1.0], 0.0, |_| 0.0, |_| 0.0);
                let a = assemble_convdiff(&s, &p).unwrap().matrix;
                let k = forms::stiffness(&s);
                let bm = forms::boundary_mass(&s, |b, _| 0.5 * (0.5 * b.normal[0] + b.normal[1]).abs());
                for _ in 0..10 {
                    let v = random_vec(s.ndofs(), &mut rng);
                    let lower = bm.bilinear(&v, &v) + eps * k.bilinear(&v, &v);
                    assert!(a.bilinear(&v, &v) >= lower - 1e-10 * lower);
                }
            }
        }
    }

    #[test]
    fn strong_elimination_keeps_symmetry_and_data() {
        let s = space(6, 2);
        let p = ProblemSpec::poisson(|_| 0.0, |x| 1.0 + x[0] + 2.0 * x[1]).with_bc(BcMode::Strong);
        let sys = assemble_strong(&s, &p).unwrap();
        assert!(sys.matrix.add_scaled(-1.0, &sys.matrix.transpose()).max_abs() < 1e-13);
        let u = solve_direct(&sys.matrix, &sys.rhs).unwrap();
        for (d, x) in s.dof_coords().iter().enumerate() {
            assert!((u[d] - (1.0 + x[0] + 2.0 * x[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn polynomial_exactness_for_all_modes() {
        // u = 1 + x − 2y + xy (P2 exact); −Δu = 0
        let exact = |x: Point| 1.0 + x[0] - 2.0 * x[1] + x[0] * x[1];
        let s = space(5, 2);
        for bc in [BcMode::NitscheNonsym, BcMode::NitscheSym, BcMode::Strong] {
            for gamma in [0.0, 10.0] {
                let p = ProblemSpec::poisson(|_| 0.0, exact).with_bc(bc).with_gamma(gamma);
                let sys = assemble(&s, &p).unwrap();
                let u = solve_direct(&sys.matrix, &sys.rhs).unwrap();
                for (d, x) in s.dof_coords().iter().enumerate() {
                    assert!((u[d] - exact(*x)).abs() < 1e-9, "{bc:?} γ={gamma}");
                }
            }
        }
    }

    #[test]
    fn sparsity_follows_element_connectivity() {
        let s = space(4, 2);
        let a = assemble_poisson_nitsche(&s, &ProblemSpec::poisson(|_| 0.0, |_| 0.0)).unwrap().matrix;
        let mut neighbors = vec![std::collections::BTreeSet::new(); s.ndofs()];
        for k in 0..s.num_elements() {
            for &i in s.element_dofs(k) {
                neighbors[i].extend(s.element_dofs(k).iter().copied());
            }
        }
        for (i, nb) in neighbors.iter().enumerate() {
            assert!(a.row(i).0.iter().all(|j| nb.contains(j)));
        }
    }
}
