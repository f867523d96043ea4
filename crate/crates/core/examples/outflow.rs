//! Convection-dominated problem with outflow layers: strong against weak
//! boundary conditions, and the effect of SD and CIP stabilization.

use nitsche_fem::assembly::{BcMode, Stabilization};
use nitsche_fem::experiments::{outflow_run, Command, RunConfig};
use nitsche_fem::linalg::SolverChoice;

fn main() -> nitsche_fem::Result<()> {
    let mut cfg = RunConfig::new(Command::Outflow);
    cfg.n = Some(40);
    let runs = [
        (1, BcMode::Strong, Stabilization::None),
        (1, BcMode::NitscheNonsym, Stabilization::None),
        (2, BcMode::NitscheNonsym, Stabilization::None),
        (2, BcMode::NitscheNonsym, Stabilization::Sd(0.2)),
        (2, BcMode::NitscheNonsym, Stabilization::Cip(0.005)),
    ];
    for eps in [1e-1, 1e-3, 1e-5] {
        cfg.eps = eps;
        for (order, bc, stab) in runs {
            let (_, r) = outflow_run(&cfg, order, bc, stab, SolverChoice::Direct)?;
            println!(
                "eps {eps:e} P{order} {bc:?} {stab:?}: max {:.3} min {:.3} oscillation {:.3E}",
                r.max, r.min, r.oscillation
            );
        }
    }
    Ok(())
}
