//! Boundary-orthogonal interpolants: residuals of their constraints and
//! L2 convergence rates for a smooth function.

use std::sync::Arc;

use nitsche_fem::analysis::{build_pi_cip, build_pi_partial, error_norm, NormKind, NormParams, SineSolution};
use nitsche_fem::fespace::FeSpace;
use nitsche_fem::mesh::{build_patches, MeshFamily, DEFAULT_EDGES_PER_PATCH};

fn main() -> nitsche_fem::Result<()> {
    let mut prev: Option<[f64; 3]> = None;
    for n in [10, 20, 40, 80] {
        let mesh = Arc::new(MeshFamily::jittered(1).build(n)?);
        let patches = build_patches(&mesh, DEFAULT_EDGES_PER_PATCH)?;
        let p1 = FeSpace::new(mesh.clone(), 1)?;
        let p2 = FeSpace::new(mesh.clone(), 2)?;
        let a = build_pi_partial(&SineSolution, &p1, &patches)?;
        let b = build_pi_partial(&SineSolution, &p2, &patches)?;
        let c = build_pi_cip(&SineSolution, &p1, &patches)?;
        let l2 = |f| error_norm(&SineSolution, f, NormKind::L2, &NormParams::default());
        let errs = [l2(&a.function)?, l2(&b.function)?, l2(&c.function)?];
        let rates = prev.map(|p| [0, 1, 2].map(|i| (p[i] / errs[i]).log2()));
        let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
        println!(
            "n {n:>3}: partial P1 {:.2E} P2 {:.2E} cip {:.2E} rates {:?}; residuals {:.1E} {:.1E} {:.1E}",
            errs[0],
            errs[1],
            errs[2],
            rates.map(|r| r.map(|x| (x * 100.0).round() / 100.0)),
            max(&a.residuals),
            max(&b.residuals),
            max(&c.mean_residuals).max(max(&c.gradient_residuals))
        );
        prev = Some(errs);
    }
    Ok(())
}
