use std::io::Write;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::{eps_tag, to_json, write_manifest, write_with, Outcome, RunConfig, StabKind, Timings};
use crate::analysis::convergence::bc_name;
use crate::analysis::solve_problem;
use crate::assembly::{BcMode, ProblemSpec, Stabilization};
use crate::fespace::{quadrature_for, write_vtk, FeFunction, FeSpace, QuadraturePurpose};
use crate::linalg::SolverChoice;
use crate::mesh::Mesh;
use crate::Result;

/// `σu + β·∇u − εΔu = 1`, `u = 0` on ∂Ω.
pub fn outflow_problem(eps: f64, beta: [f64; 2], sigma: f64, bc: BcMode, stab: Stabilization) -> ProblemSpec {
    ProblemSpec::convection_diffusion(eps, beta, sigma, |_| 1.0, |_| 0.0).with_bc(bc).with_stabilization(stab)
}

/// Barycentric coordinates of `x` in triangle `k`.
fn barycentric(mesh: &Mesh, k: usize, x: [f64; 2]) -> [f64; 3] {
    let [a, b, c] = mesh.coords(k);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Mean absolute jump of the normal gradient over interior edges:
/// `Σ_F ∫_F |[∇u_h·n_F]| / Σ_F |F|`.
///
/// Zero for globally affine fields; spurious oscillations show up as large jumps
/// between neighbouring elements.
pub fn gradient_jump_metric(u: &FeFunction) -> f64 {
    let mesh = u.space().mesh();
    let rule = quadrature_for(QuadraturePurpose::Edge, u.space().order()).expect("valid order");
    let (mut total, mut length) = (0.0, 0.0);
    for e in mesh.edges().iter().filter(|e| e.interior) {
        let (p, q) = (mesh.vertices()[e.v[0]], mesh.vertices()[e.v[1]]);
        let l = (q[0] - p[0]).hypot(q[1] - p[1]);
        let n = [(q[1] - p[1]) / l, -(q[0] - p[0]) / l];
        for (i, w) in rule.weights.iter().enumerate() {
            let s = rule.edge_param(i);
            let x = [(1.0 - s) * p[0] + s * q[0], (1.0 - s) * p[1] + s * q[1]];
            let g0 = u.eval(e.triangles[0], barycentric(mesh, e.triangles[0], x)).grad;
            let g1 = u.eval(e.triangles[1], barycentric(mesh, e.triangles[1], x)).grad;
            total += w * l * ((g0[0] - g1[0]) * n[0] + (g0[1] - g1[1]) * n[1]).abs();
        }
        length += l;
    }
    if length == 0.0 {
        0.0
    } else {
        total / length
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutflowReport {
    pub order: usize,
    pub n: usize,
    pub eps: f64,
    pub bc_mode: BcMode,
    pub stabilization: Stabilization,
    pub max: f64,
    pub min: f64,
    pub oscillation: f64,
    /// Fraction of elements where the SD parameter is switched on.
    pub sd_active_fraction: f64,
}

/// Solves the outflow problem on the structured or jittered mesh of `cfg` and measures it.
pub fn outflow_run(cfg: &RunConfig, order: usize, bc: BcMode, stab: Stabilization, solver: SolverChoice) -> Result<(FeFunction, OutflowReport)> {
    let n = cfg.resolved_n();
    let mesh = Arc::new(cfg.family().build(n)?);
    let space = FeSpace::new(mesh, order)?;
    let p = outflow_problem(cfg.eps, cfg.beta, cfg.sigma, bc, stab);
    let u = solve_problem(&space, &p, solver)?;
    let delta = p.sd_delta(&space);
    let report = OutflowReport {
        order,
        n,
        eps: cfg.eps,
        bc_mode: bc,
        stabilization: stab,
        max: u.coeffs().iter().cloned().fold(f64::MIN, f64::max),
        min: u.coeffs().iter().cloned().fold(f64::MAX, f64::min),
        oscillation: gradient_jump_metric(&u),
        sd_active_fraction: delta.iter().filter(|&&d| d > 0.0).count() as f64 / delta.len() as f64,
    };
    Ok((u, report))
}

pub fn cmd_outflow(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let mut timings = Timings::new();
    let stab = cfg.stabilization();
    let (u, report) = timings.time("solve", || outflow_run(cfg, cfg.order, cfg.bc, stab, cfg.solver))?;
    let stab_tag = match cfg.stab {
        StabKind::None => "none",
        StabKind::Sd => "sd",
        StabKind::Cip => "cip",
    };
    let name = format!("outflow_p{}_{}_{}_eps{}", cfg.order, bc_name(cfg.bc), stab_tag, eps_tag(cfg.eps));
    let path = cfg.out.join(format!("{name}.vtk"));
    timings.time("vtk", || write_with(&path, |w| write_vtk(&u, &name, w)))?;
    writeln!(
        out,
        "{name}: max {:.4} min {:.4} oscillation {:.3E}",
        report.max, report.min, report.oscillation
    )?;
    let mut results = to_json(&report);
    if let Stabilization::Sd(g) = stab {
        results["sd_note"] = json!(format!(
            "gamma_SD = {g}; stability requires gamma_SD < 1/C_I^2 for the inverse-inequality constant C_I"
        ));
    }
    let mut files = vec![path];
    write_manifest(cfg, json!([{"n": report.n, "stats": to_json(&u.space().mesh().stats())}]), &timings, results, &mut files)?;
    Ok(Outcome { files, passed: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::nodal_interpolate;
    use crate::mesh::build_structured;

    #[test]
    fn affine_fields_have_no_jumps() {
        for order in [1, 2] {
            let s = FeSpace::new(Arc::new(build_structured(6).unwrap()), order).unwrap();
            let u = nodal_interpolate(&s, |x| 2.0 * x[0] - 0.5 * x[1] + 1.0);
            assert!(gradient_jump_metric(&u) < 1e-12);
        }
    }

    #[test]
    fn kink_is_measured() {
        // |x - 1/2| on a mesh with a vertical line at x = 1/2: jump 2 on that line only
        let s = FeSpace::new(Arc::new(build_structured(4).unwrap()), 1).unwrap();
        let u = nodal_interpolate(&s, |x| (x[0] - 0.5).abs());
        let m = s.mesh();
        let interior: f64 = m.edges().iter().filter(|e| e.interior).map(|e| {
            let (p, q) = (m.vertices()[e.v[0]], m.vertices()[e.v[1]]);
            (q[0] - p[0]).hypot(q[1] - p[1])
        }).sum();
        assert!((gradient_jump_metric(&u) - 2.0 / interior).abs() < 1e-12);
    }

    #[test]
    fn diffusive_regime_is_smooth() {
        let mut cfg = RunConfig::new(super::super::Command::Outflow);
        cfg.n = Some(10);
        cfg.eps = 0.1;
        let (_, r) = outflow_run(&cfg, 1, BcMode::NitscheNonsym, Stabilization::None, SolverChoice::Direct).unwrap();
        assert!(r.max < 1.0 && r.min > -0.05);
    }
}
