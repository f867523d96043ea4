use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{to_json, write_manifest, write_with, Outcome, RunConfig, Timings};
use crate::analysis::fields::{Field, Quadratic};
use crate::analysis::norms::{norm_parts, NormParams};
use crate::analysis::{build_phi_r, build_pi_cip, build_pi_partial, solve_problem, SineSolution};
use crate::assembly::{assemble, assemble_poisson_nitsche, forms, BcMode, ProblemSpec, Stabilization};
use crate::fespace::{nodal_interpolate, FeFunction, FeSpace, QuadratureRule};
use crate::linalg::SolverChoice;
use crate::mesh::{build_patches_unchecked, patch_bounds, validate_patches, BoundaryPatch};
use crate::{Error, Result};

/// Number of random vectors per quadratic-form check.
pub const RANDOM_VECTORS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn bound(name: &str, measured: f64, tolerance: f64) -> Self {
        let status = if measured <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        Check { name: name.into(), status, measured: Some(measured), tolerance: Some(tolerance), detail: String::new() }
    }

    fn flag(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Check { name: name.into(), status, measured: None, tolerance: None, detail: detail.into() }
    }

    fn note(name: &str, status: CheckStatus, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status, measured: None, tolerance: None, detail: detail.into() }
    }

    fn failed(name: &str, e: &Error) -> Self {
        Check::flag(name, false, e.to_string())
    }

    fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
            CheckStatus::Info => "INFO",
        };
        write!(f, "[{tag}] {}", self.name)?;
        if let (Some(m), Some(t)) = (self.measured, self.tolerance) {
            write!(f, ": {m:.2E} (tol {t:.1E})")?;
        }
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `|a_h(v,v) − ‖∇v‖²| / ‖v‖²_{1,h}` for the penalty-free form.
pub fn energy_identity_defect(space: &Arc<FeSpace>, v: &[f64]) -> Result<f64> {
    let a = assemble_poisson_nitsche(space, &ProblemSpec::poisson(|_| 0.0, |_| 0.0))?.matrix;
    let f = FeFunction::new(space.clone(), v.to_vec())?;
    let parts = norm_parts(space, &NormParams::default(), |k, bary, _| f.eval(k, bary));
    Ok((a.bilinear(v, v) - parts.grad).abs() / (parts.grad + parts.boundary_h))
}

/// `max(0, ½‖|β·n|^{1/2}v‖² + ε‖∇v‖² − vᵀAv) / (½‖|β·n|^{1/2}v‖² + ε‖∇v‖²)`.
pub fn convdiff_positivity_violation(space: &Arc<FeSpace>, eps: f64, beta: [f64; 2], v: &[f64]) -> Result<f64> {
    let p = ProblemSpec::convection_diffusion(eps, beta, 0.0, |_| 0.0, |_| 0.0);
    let a = assemble(space, &p)?.matrix;
    let f = FeFunction::new(space.clone(), v.to_vec())?;
    let params = NormParams { eps: Some(eps), beta: Some(beta), delta: None };
    let parts = norm_parts(space, &params, |k, bary, _| f.eval(k, bary));
    let lower = 0.5 * parts.boundary_beta + eps * parts.grad;
    Ok((lower - a.bilinear(v, v)).max(0.0) / lower)
}

/// Largest nodal error when the discrete problem is solved with data of a
/// global polynomial of the space's degree.
pub fn polynomial_reproduction_error(space: &Arc<FeSpace>, bc: BcMode, gamma: f64) -> Result<f64> {
    let q = if space.order() == 2 {
        Quadratic([1.0, 1.0, -2.0, 0.5, 1.0, -0.25])
    } else {
        Quadratic::linear(1.0, 1.0, -2.0)
    };
    let lap = q.laplacian([0.0, 0.0]);
    let p = ProblemSpec::poisson(move |_| -lap, move |x| q.value(x)).with_bc(bc).with_gamma(gamma);
    let u = solve_problem(space, &p, SolverChoice::Direct)?;
    Ok(max_nodal_error(&u, &q))
}

fn max_nodal_error(u: &FeFunction, q: &dyn Field) -> f64 {
    u.space().dof_coords().iter().zip(u.coeffs()).map(|(x, c)| (c - q.value(*x)).abs()).fold(0.0, f64::max)
}

/// Largest error of the area and edge rules on monomials up to their degree.
pub fn quadrature_defect() -> f64 {
    let fact = |n: u32| (1..=n as u64).product::<u64>() as f64;
    let area = QuadratureRule::triangle_degree6();
    let mut worst = 0.0f64;
    for a in 0..=area.degree as u32 {
        for b in 0..=(area.degree as u32 - a) {
            let exact = fact(a) * fact(b) / fact(a + b + 2);
            let q: f64 = area.points.iter().zip(&area.weights).map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32)).sum();
            worst = worst.max((q - exact).abs());
        }
    }
    let edge = QuadratureRule::edge_gauss4();
    for a in 0..=edge.degree as i32 {
        let q: f64 = (0..edge.weights.len()).map(|i| edge.weights[i] * edge.edge_param(i).powi(a)).sum();
        worst = worst.max((q - 1.0 / (a as f64 + 1.0)).abs());
    }
    worst
}

fn guard(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, &e))
}

/// Runs the invariant suite on the mesh of `cfg` (default structured `n = 20`).
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = cfg.resolved_n();
    let mesh = Arc::new(cfg.family().build(n)?);
    let patches = build_patches_unchecked(&mesh, cfg.edges_per_patch)?;
    let p1 = FeSpace::new(mesh.clone(), 1)?;
    let p2 = FeSpace::new(mesh.clone(), 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();

    out.push(match validate_patches(&mesh, &patches) {
        Ok(()) => Check::flag("patch conditions", true, format!("({} patches)", patches.len())),
        Err(msgs) => Check::flag("patch conditions", false, msgs.join("; ")),
    });
    let b = patch_bounds(&mesh, &patches);
    out.push(Check::note("patch measure bounds", CheckStatus::Info, format!("c1 = {:.3}, c2 = {:.3}", b.c1, b.c2)));
    out.push(Check::bound("quadrature exactness", quadrature_defect(), 1e-14));

    for space in [&p1, &p2] {
        let k = space.order();
        out.push(guard(&format!("phi_r constraint P{k}"), || phi_r_check(space, &patches, &mut rng)));
        let name = format!("pi_partial normal-gradient orthogonality P{k}");
        out.push(guard(&name, || {
            let pi = build_pi_partial(&SineSolution, space, &patches)?;
            Ok(Check::bound(&name, pi.residuals.iter().cloned().fold(0.0, f64::max), 1e-9))
        }));
    }
    match build_pi_cip(&SineSolution, &p1, &patches) {
        Ok(pi) => {
            out.push(Check::bound("pi_cip zero mean", pi.mean_residuals.iter().cloned().fold(0.0, f64::max), 1e-9));
            out.push(Check::bound("pi_cip normal-gradient orthogonality", pi.gradient_residuals.iter().cloned().fold(0.0, f64::max), 1e-9));
            let ok = pi.patches.iter().all(|q| q.sign_pattern_holds());
            let dets = pi.patches.iter().map(|q| q.determinant()).fold(f64::INFINITY, f64::min);
            out.push(Check::flag("pi_cip system sign pattern", ok, format!("(min det {dets:.2E})")));
        }
        Err(e) => out.push(Check::failed("pi_cip construction", &e)),
    }

    for space in [&p1, &p2] {
        let k = space.order();
        let name = format!("energy identity P{k}");
        out.push(guard(&name, || {
            let mut worst = 0.0f64;
            for _ in 0..RANDOM_VECTORS {
                worst = worst.max(energy_identity_defect(space, &random_vec(space.ndofs(), &mut rng))?);
            }
            Ok(Check::bound(&name, worst, 1e-12))
        }));
    }
    out.push(guard("antisymmetric boundary pair", || {
        let b = forms::flux(&p2).scaled(-1.0).add_scaled(1.0, &forms::adjoint_flux(&p2));
        let scale = forms::flux(&p2).max_abs();
        Ok(Check::bound("antisymmetric boundary pair", b.add_scaled(1.0, &b.transpose()).max_abs() / scale, 1e-14))
    }));
    let beta = if cfg.beta == [0.0, 0.0] { [0.5, 1.0] } else { cfg.beta };
    for eps in [1.0, 1e-3] {
        let name = format!("convection-diffusion positivity eps={eps:e}");
        out.push(guard(&name, || {
            let mut worst = 0.0f64;
            for _ in 0..RANDOM_VECTORS {
                worst = worst.max(convdiff_positivity_violation(&p1, eps, beta, &random_vec(p1.ndofs(), &mut rng))?);
            }
            Ok(Check::bound(&name, worst, 1e-10))
        }));
    }
    for space in [&p1, &p2] {
        for bc in [BcMode::NitscheNonsym, BcMode::NitscheSym, BcMode::Strong] {
            for gamma in [0.0, 10.0] {
                let name = format!("polynomial reproduction P{} {bc:?} gamma={gamma}", space.order());
                out.push(guard(&name, || Ok(Check::bound(&name, polynomial_reproduction_error(space, bc, gamma)?, 1e-9))));
            }
        }
    }

    out.push(Check::note(
        "SD parameter",
        CheckStatus::Info,
        format!("gamma_SD = {} (0.2 and 0.5 are both accepted)", cfg.gamma_sd),
    ));
    if cfg.gamma_sd == 0.0 {
        out.push(Check::note("SD switch rule", CheckStatus::Skipped, "skipped (gamma_SD = 0)"));
        out.push(Check::note("SD residual consistency", CheckStatus::Skipped, "skipped (gamma_SD = 0)"));
    } else {
        out.push(guard("SD switch rule", || sd_switch_check(&p1, cfg.gamma_sd, beta)));
        out.push(guard("SD residual consistency", || stabilized_consistency(&p2, Stabilization::Sd(cfg.gamma_sd), beta)));
    }
    if cfg.gamma_cip == 0.0 {
        out.push(Check::note("CIP jump form", CheckStatus::Skipped, "skipped (gamma_CIP = 0)"));
        out.push(Check::note("CIP consistency", CheckStatus::Skipped, "skipped (gamma_CIP = 0)"));
    } else {
        out.push(guard("CIP jump form", || cip_form_check(&p1, cfg.gamma_cip, beta, &mut rng)));
        out.push(guard("CIP consistency", || stabilized_consistency(&p1, Stabilization::Cip(cfg.gamma_cip), beta)));
    }
    Ok(out)
}

fn phi_r_check(space: &Arc<FeSpace>, patches: &[BoundaryPatch], rng: &mut ChaCha8Rng) -> Result<Check> {
    let r = random_vec(patches.len(), rng);
    let phi = build_phi_r(space, patches, &r)?;
    let name = format!("phi_r constraint P{}", space.order());
    Ok(Check::bound(&name, phi.constraint_residual(patches), 1e-10).with_detail(format!("(C_xi probe {:.3})", phi.c_xi)))
}

fn sd_switch_check(space: &Arc<FeSpace>, gamma_sd: f64, beta: [f64; 2]) -> Result<Check> {
    let bn = beta[0].hypot(beta[1]);
    let mut worst = 0.0f64;
    for eps in [1e-5, 1.0] {
        let p = ProblemSpec::convection_diffusion(eps, beta, 0.0, |_| 0.0, |_| 0.0).with_stabilization(Stabilization::Sd(gamma_sd));
        for (k, d) in p.sd_delta(space).iter().enumerate() {
            let h = space.geometry(k).h;
            let expect = if bn * h / eps > 1.0 { gamma_sd * h / bn } else { 0.0 };
            worst = worst.max((d - expect).abs());
        }
    }
    Ok(Check::bound("SD switch rule", worst, 1e-15))
}

/// A polynomial solution of `β·∇u − εΔu = f` must be reproduced by the stabilized method.
fn stabilized_consistency(space: &Arc<FeSpace>, stab: Stabilization, beta: [f64; 2]) -> Result<Check> {
    let q = if space.order() == 2 { Quadratic([0.5, 1.0, -1.0, 0.5, 0.25, 1.0]) } else { Quadratic::linear(0.5, 1.0, -1.0) };
    let eps = 1e-3;
    let p = ProblemSpec::convection_diffusion(
        eps,
        beta,
        0.0,
        move |x| {
            let g = q.gradient(x);
            beta[0] * g[0] + beta[1] * g[1] - eps * q.laplacian(x)
        },
        move |x| q.value(x),
    )
    .with_stabilization(stab);
    let u = solve_problem(space, &p, SolverChoice::Direct)?;
    let name = match stab {
        Stabilization::Sd(_) => "SD residual consistency",
        _ => "CIP consistency",
    };
    Ok(Check::bound(name, max_nodal_error(&u, &q), 1e-9))
}

fn cip_form_check(space: &Arc<FeSpace>, gamma: f64, beta: [f64; 2], rng: &mut ChaCha8Rng) -> Result<Check> {
    let j = forms::cip(space, beta, gamma, false);
    let jf = forms::cip(space, beta, gamma, true);
    let mut worst = 0.0f64;
    let mut negative = false;
    for _ in 0..RANDOM_VECTORS {
        let v = random_vec(space.ndofs(), rng);
        let (a, b) = (j.bilinear(&v, &v), jf.bilinear(&v, &v));
        negative |= a < -1e-14 * a.abs().max(1.0);
        worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
    }
    let affine = nodal_interpolate(space, |x| 1.0 + 2.0 * x[0] - x[1]);
    let affine_val = j.bilinear(affine.coeffs(), affine.coeffs()).abs();
    let ok = !negative && worst < 1e-12 && affine_val < 1e-12;
    Ok(Check::flag(
        "CIP jump form",
        ok,
        format!("(orientation defect {worst:.2E}, affine value {affine_val:.2E}, nonnegative {})", !negative),
    ))
}

pub fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let mut timings = Timings::new();
    let checks = timings.time("checks", || run_checks(cfg))?;
    let mut text = Vec::new();
    for c in &checks {
        writeln!(text, "{c}")?;
    }
    let failures = checks.iter().filter(|c| c.status == CheckStatus::Fail).count();
    writeln!(text, "{} checks, {failures} failed", checks.len())?;
    out.write_all(&text)?;
    let path = cfg.out.join("verify.txt");
    write_with(&path, |w| {
        w.extend_from_slice(&text);
        Ok(())
    })?;
    let mut files = vec![path];
    let mesh = cfg.family().build(cfg.resolved_n())?;
    write_manifest(
        cfg,
        json!([{"n": cfg.resolved_n(), "stats": to_json(&mesh.stats())}]),
        &timings,
        json!({"checks": to_json(&checks), "failures": failures}),
        &mut files,
    )?;
    Ok(Outcome { files, passed: failures == 0 })
}

#[cfg(test)]
mod tests {
    use super::super::Command;
    use super::*;

    #[test]
    fn quadrature_is_exact() {
        assert!(quadrature_defect() < 1e-14);
    }

    #[test]
    fn default_suite_passes() {
        let mut cfg = RunConfig::new(Command::Verify);
        cfg.n = Some(10);
        let checks = run_checks(&cfg).unwrap();
        let failed: Vec<String> = checks.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| c.to_string()).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }

    #[test]
    fn short_patches_fail_and_sd_can_be_skipped() {
        let mut cfg = RunConfig::new(Command::Verify);
        cfg.n = Some(10);
        cfg.edges_per_patch = 3;
        cfg.gamma_sd = 0.0;
        let checks = run_checks(&cfg).unwrap();
        assert_eq!(checks[0].status, CheckStatus::Fail);
        assert!(checks.iter().any(|c| c.name == "SD switch rule" && c.status == CheckStatus::Skipped));
    }
}
