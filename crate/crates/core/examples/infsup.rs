//! Discrete inf-sup constants of the penalty-free form and of its symmetric
//! counterpart on a sequence of structured meshes.

use nitsche_fem::experiments::{infsup_rows, write_infsup_csv, Command, RunConfig};

fn main() -> nitsche_fem::Result<()> {
    let mut cfg = RunConfig::new(Command::Infsup);
    cfg.ns = vec![6, 8, 12, 16];
    cfg.with_sym = true;
    let rows = infsup_rows(&cfg)?;
    write_infsup_csv(&rows, true, &mut std::io::stdout())
}
