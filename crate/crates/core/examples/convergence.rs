//! Manufactured-solution convergence of the penalty-free Nitsche method
//! against strong boundary conditions, P1 and P2 on jittered meshes.

use nitsche_fem::analysis::{convergence_study, SineSolution};
use nitsche_fem::assembly::BcMode;
use nitsche_fem::experiments::{manufactured_problem, write_side_by_side};
use nitsche_fem::linalg::SolverChoice;
use nitsche_fem::mesh::MeshFamily;

fn main() -> nitsche_fem::Result<()> {
    let family = MeshFamily::jittered(1);
    for order in [1, 2] {
        let tables = [BcMode::NitscheNonsym, BcMode::Strong]
            .into_iter()
            .map(|bc| convergence_study(&manufactured_problem(bc, 0.0), &SineSolution, order, &family, 4, SolverChoice::Direct))
            .collect::<nitsche_fem::Result<Vec<_>>>()?;
        write_side_by_side(&tables, &mut std::io::stdout())?;
        println!();
    }
    Ok(())
}
