//! Builds the boundary patches of a jittered mesh and a function with
//! prescribed mean normal gradient on each of them.

use std::sync::Arc;

use nitsche_fem::analysis::build_phi_r;
use nitsche_fem::fespace::FeSpace;
use nitsche_fem::mesh::{build_patches, patch_bounds, MeshFamily, DEFAULT_EDGES_PER_PATCH};

fn main() -> nitsche_fem::Result<()> {
    for n in [10, 20, 40, 80] {
        let mesh = Arc::new(MeshFamily::jittered(1).build(n)?);
        let patches = build_patches(&mesh, DEFAULT_EDGES_PER_PATCH)?;
        let bounds = patch_bounds(&mesh, &patches);
        let r: Vec<f64> = (0..patches.len()).map(|j| (j as f64).sin()).collect();
        for order in [1, 2] {
            let space = FeSpace::new(mesh.clone(), order)?;
            let phi = build_phi_r(&space, &patches, &r)?;
            println!(
                "n {n:>3} P{order}: {} patches, c1 {:.2} c2 {:.2}, residual {:.1E}, C_xi {:.3}, stability ratio {:.3}",
                patches.len(),
                bounds.c1,
                bounds.c2,
                phi.constraint_residual(&patches),
                phi.c_xi,
                phi.stability_ratio(&patches)?
            );
        }
    }
    Ok(())
}
