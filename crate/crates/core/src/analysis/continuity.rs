use super::fields::Field;
use super::norms::{error_norm, norm, NormKind, NormParams};
use crate::assembly::{assemble_poisson_nitsche, forms, BcMode, ProblemSpec};
use super::infsup::one_h_gram;
use crate::fespace::{FeFunction, FeSpace};
use crate::linalg::solve_direct;
use crate::{Error, Result};

/// Probes with `‖v‖_{1,h}` at or below this are rejected.
pub const ZERO_PROBE: f64 = 1e-14;

fn probe_norms(probes: &[FeFunction], space: &std::sync::Arc<FeSpace>) -> Result<Vec<f64>> {
    probes
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if !std::sync::Arc::ptr_eq(v.space(), space) && v.coeffs().len() != space.ndofs() {
                return Err(Error::InvalidArgument(format!("probe {i} lives in a different space")));
            }
            let n = norm(v, NormKind::OneH, &NormParams::default())?;
            if !(n > ZERO_PROBE) {
                return Err(Error::InvalidArgument(format!("probe {i} has zero ‖·‖_1,h norm")));
            }
            Ok(n)
        })
        .collect()
}

/// `max_v |a_h(u_err, v)| / (‖u_err‖_* ‖v‖_{1,h})` for a discrete `u_err`.
///
/// Returns zero when `u_err` vanishes.
pub fn continuity_ratio(u_err: &FeFunction, probes: &[FeFunction], p: &ProblemSpec) -> Result<f64> {
    let space = u_err.space();
    let norms = probe_norms(probes, space)?;
    let star = norm(u_err, NormKind::StarPoisson, &NormParams::default())?;
    if star == 0.0 {
        return Ok(0.0);
    }
    let au = assemble_poisson_nitsche(space, p)?.matrix.matvec(u_err.coeffs());
    Ok(max_ratio(&au, probes, &norms) / star)
}

/// `a_h(u, φ_i)` for every basis function, with `u` evaluated analytically.
pub fn exact_form_vector(u: &dyn Field, space: &FeSpace, p: &ProblemSpec) -> Result<Vec<f64>> {
    let adj = match p.bc_mode {
        BcMode::NitscheNonsym => 1.0,
        BcMode::NitscheSym => -1.0,
        BcMode::Strong => return Err(Error::InvalidArgument("the probe measures the Nitsche form".into())),
    };
    let mut out = forms::volume_vector(space, |_, s, x, w, local| {
        let g = u.gradient(x);
        for i in 0..s.n {
            local[i] += w * (g[0] * s.grad[i][0] + g[1] * s.grad[i][1]);
        }
    });
    let gamma = p.gamma;
    let bnd = forms::boundary_vector(space, |b, s, x, w, local| {
        let h = space.geometry(b.triangle).h;
        let (val, g) = (u.value(x), u.gradient(x));
        let dn = g[0] * b.normal[0] + g[1] * b.normal[1];
        for i in 0..s.n {
            let vn = s.grad[i][0] * b.normal[0] + s.grad[i][1] * b.normal[1];
            local[i] += w * (-dn * s.val[i] + adj * val * vn + gamma / h * val * s.val[i]);
        }
    });
    out.iter_mut().zip(bnd).for_each(|(o, b)| *o += b);
    Ok(out)
}

/// As [`continuity_ratio`] with `u_err = u − w_h` and `a_h(u, ·)` integrated from the analytic field.
///
/// For `w_h` the discrete solution the ratio vanishes up to quadrature error
/// (Galerkin orthogonality); pass an interpolant of `u` to probe the bound.
pub fn continuity_ratio_exact(u: &dyn Field, uh: &FeFunction, probes: &[FeFunction], p: &ProblemSpec) -> Result<f64> {
    let space = uh.space();
    let norms = probe_norms(probes, space)?;
    let star = error_norm(u, uh, NormKind::StarPoisson, &NormParams::default())?;
    if star == 0.0 {
        return Ok(0.0);
    }
    let mut r = exact_form_vector(u, space, p)?;
    let auh = assemble_poisson_nitsche(space, p)?.matrix.matvec(uh.coeffs());
    r.iter_mut().zip(auh).for_each(|(a, b)| *a -= b);
    Ok(max_ratio(&r, probes, &norms) / star)
}

/// The supremum over the whole space in place of random probes:
/// `sup_v |a_h(u − w_h, v)| / ‖v‖_{1,h} = (rᵀ G⁻¹ r)^{1/2}` with `G` the `‖·‖_{1,h}` Gram matrix,
/// divided by `‖u − w_h‖_*`.
pub fn continuity_sup_exact(u: &dyn Field, wh: &FeFunction, p: &ProblemSpec) -> Result<f64> {
    let space = wh.space();
    let star = error_norm(u, wh, NormKind::StarPoisson, &NormParams::default())?;
    if star == 0.0 {
        return Ok(0.0);
    }
    let mut r = exact_form_vector(u, space, p)?;
    let aw = assemble_poisson_nitsche(space, p)?.matrix.matvec(wh.coeffs());
    r.iter_mut().zip(aw).for_each(|(a, b)| *a -= b);
    let z = solve_direct(&one_h_gram(space), &r)?;
    Ok(r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt() / star)
}

fn max_ratio(form_row: &[f64], probes: &[FeFunction], norms: &[f64]) -> f64 {
    probes
        .iter()
        .zip(norms)
        .map(|(v, n)| form_row.iter().zip(v.coeffs()).map(|(a, b)| a * b).sum::<f64>().abs() / n)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fields::SineSolution;
    use crate::analysis::solve_problem;
    use crate::linalg::SolverChoice;
    use crate::mesh::{build_structured, MeshFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn space(n: usize) -> Arc<FeSpace> {
        FeSpace::new(Arc::new(build_structured(n).unwrap()), 1).unwrap()
    }

    fn random(s: &Arc<FeSpace>, rng: &mut ChaCha8Rng) -> FeFunction {
        FeFunction::new(s.clone(), (0..s.ndofs()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn self_pairing_is_bounded_by_one() {
        let s = space(8);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = ProblemSpec::poisson(|_| 0.0, |_| 0.0);
        for _ in 0..5 {
            let v = random(&s, &mut rng);
            let r = continuity_ratio(&v, std::slice::from_ref(&v), &p).unwrap();
            let g = norm(&v, NormKind::H1Semi, &NormParams::default()).unwrap();
            let expect = g * g / (norm(&v, NormKind::StarPoisson, &NormParams::default()).unwrap() * norm(&v, NormKind::OneH, &NormParams::default()).unwrap());
            assert!((r - expect).abs() < 1e-10 * expect);
            assert!(r <= 1.0);
        }
    }

    #[test]
    fn orthogonal_pairs_give_zero() {
        let s = space(6);
        let p = ProblemSpec::poisson(|_| 0.0, |_| 0.0);
        let mut u = FeFunction::zeros(s.clone());
        let mut v = FeFunction::zeros(s.clone());
        // disjoint supports
        u.coeffs_mut()[0] = 1.0;
        v.coeffs_mut()[s.ndofs() - 1] = 1.0;
        assert_eq!(continuity_ratio(&u, &[v], &p).unwrap(), 0.0);
    }

    #[test]
    fn zero_probe_is_rejected() {
        let s = space(4);
        let p = ProblemSpec::poisson(|_| 0.0, |_| 0.0);
        let u = FeFunction::new(s.clone(), vec![1.0; s.ndofs()]).unwrap();
        assert!(continuity_ratio(&u, &[FeFunction::zeros(s.clone())], &p).is_err());
    }

    #[test]
    fn exact_vector_matches_matrix_on_discrete_functions() {
        // for u in the space the analytic and matrix forms coincide
        let s = space(5);
        let p = ProblemSpec::poisson(|_| 0.0, |_| 0.0).with_gamma(3.0);
        let q = crate::analysis::fields::Quadratic::linear(0.3, 1.0, -2.0);
        let uh = crate::fespace::nodal_interpolate(&s, |x| q.value(x));
        let a = exact_form_vector(&q, &s, &p).unwrap();
        let b = assemble_poisson_nitsche(&s, &p).unwrap().matrix.matvec(uh.coeffs());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_solution_error_is_orthogonal() {
        let p = ProblemSpec::poisson(SineSolution::source, |_| 0.0);
        let s = FeSpace::new(Arc::new(MeshFamily::jittered(1).build(10).unwrap()), 1).unwrap();
        let uh = solve_problem(&s, &p, SolverChoice::Direct).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probes: Vec<FeFunction> = (0..10).map(|_| random(&s, &mut rng)).collect();
        assert!(continuity_ratio_exact(&SineSolution, &uh, &probes, &p).unwrap() < 1e-8);
    }

    #[test]
    fn interpolation_error_ratio_is_bounded_across_refinement() {
        let p = ProblemSpec::poisson(SineSolution::source, |_| 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut sups = Vec::new();
        for n in [10, 20, 40] {
            let s = FeSpace::new(Arc::new(MeshFamily::jittered(1).build(n).unwrap()), 1).unwrap();
            let ih = crate::fespace::nodal_interpolate(&s, |x| SineSolution.value(x));
            let probes: Vec<FeFunction> = (0..20).map(|_| random(&s, &mut rng)).collect();
            let sampled = continuity_ratio_exact(&SineSolution, &ih, &probes, &p).unwrap();
            let sup = continuity_sup_exact(&SineSolution, &ih, &p).unwrap();
            assert!(sampled <= sup * (1.0 + 1e-9) && sup <= 1.0 + 1e-9, "{sampled} {sup}");
            sups.push(sup);
        }
        let lo = sups.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sups.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 2.0, "{sups:?}");
    }
}
