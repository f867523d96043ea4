//! L2 and H1 errors for a range of boundary penalties on one mesh.

use nitsche_fem::assembly::BcMode;
use nitsche_fem::experiments::{penalty_sweep, PENALTY_VALUES};
use nitsche_fem::linalg::SolverChoice;
use nitsche_fem::mesh::MeshFamily;

fn main() -> nitsche_fem::Result<()> {
    for (order, n) in [(1, 80), (2, 40)] {
        let s = penalty_sweep(order, &MeshFamily::jittered(1), n, &PENALTY_VALUES, BcMode::NitscheNonsym, SolverChoice::Direct)?;
        s.write_csv(&mut std::io::stdout())?;
        println!("# l2 max/min {:.3}, h1 constant to 2 digits: {}\n", s.l2_ratio.unwrap_or(1.0), s.h1_constant_2sig);
    }
    Ok(())
}
