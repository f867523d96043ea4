//! Runs the invariant suite on a jittered mesh and prints one line per check.

use nitsche_fem::experiments::{run_checks, CheckStatus, Command, RunConfig};
use nitsche_fem::mesh::MeshKind;

fn main() -> nitsche_fem::Result<()> {
    let mut cfg = RunConfig::new(Command::Verify);
    cfg.mesh = MeshKind::Jittered;
    let checks = run_checks(&cfg)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| c.status == CheckStatus::Fail).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(())
}
