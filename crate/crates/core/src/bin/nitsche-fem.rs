use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nitsche_fem::analysis::InfSupForm;
use nitsche_fem::assembly::BcMode;
use nitsche_fem::experiments::{exit, exit_code, run, Command, RunConfig, StabKind};
use nitsche_fem::linalg::SolverChoice;
use nitsche_fem::mesh::MeshKind;

#[derive(Parser)]
#[command(name = "nitsche-fem", version, about = "Experiments for penalty-free non-symmetric Nitsche boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Convergence tables for the manufactured Poisson problem, Nitsche against strong conditions.
    Convergence,
    /// Errors on one mesh for a list of boundary penalties.
    PenaltySweep,
    /// Convection-dominated problem with outflow layers; writes VTK and an overshoot report.
    Outflow,
    /// Discrete inf-sup constants from dense eigensolves.
    Infsup,
    /// Invariant suite; exit code 1 when a check fails.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshArg {
    Structured,
    Jittered,
}

#[derive(Clone, Copy, ValueEnum)]
enum StabArg {
    None,
    Sd,
    Cip,
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Nitsche,
    NitscheSym,
    Strong,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Direct,
    Bicgstab,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Poisson,
    Convdiff,
}

#[derive(clap::Args)]
struct Opts {
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Cells per side.
    #[arg(long, global = true, conflicts_with = "levels")]
    n: Option<usize>,
    /// Refinement levels n = 10, 20, 40, ...
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Mesh sizes for infsup, comma separated (may be empty).
    #[arg(long, global = true, value_delimiter = ',', num_args = 0..)]
    ns: Option<Vec<usize>>,
    #[arg(long, global = true, value_enum)]
    mesh: Option<MeshArg>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Jitter radius as a fraction of the smallest element size.
    #[arg(long, global = true)]
    jitter: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Penalty values for penalty-sweep, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps: Option<f64>,
    /// Velocity as FX,FY.
    #[arg(long, global = true, value_parser = parse_beta, allow_hyphen_values = true)]
    beta: Option<[f64; 2]>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true, value_enum)]
    stab: Option<StabArg>,
    #[arg(long = "gamma-sd", global = true)]
    gamma_sd: Option<f64>,
    #[arg(long = "gamma-cip", global = true)]
    gamma_cip: Option<f64>,
    #[arg(long, global = true, value_enum)]
    bc: Option<BcArg>,
    #[arg(long, global = true, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long = "edges-per-patch", global = true)]
    edges_per_patch: Option<usize>,
    /// Form measured by infsup.
    #[arg(long, global = true, value_enum)]
    form: Option<FormArg>,
    /// Adds the symmetric variant to the infsup table.
    #[arg(long = "with-sym", global = true)]
    with_sym: bool,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

fn parse_beta(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected FX,FY, got {s:?}"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([x, y])
}

fn config(cmd: Cmd, o: Opts) -> RunConfig {
    let command = match cmd {
        Cmd::Convergence => Command::Convergence,
        Cmd::PenaltySweep => Command::PenaltySweep,
        Cmd::Outflow => Command::Outflow,
        Cmd::Infsup => Command::Infsup,
        Cmd::Verify => Command::Verify,
    };
    let mut c = RunConfig::new(command);
    c.order = o.order.unwrap_or(c.order);
    c.n = o.n.or(c.n);
    c.levels = o.levels.unwrap_or(c.levels);
    if let Some(ns) = o.ns {
        c.ns = ns;
    }
    if let Some(m) = o.mesh {
        c.mesh = match m {
            MeshArg::Structured => MeshKind::Structured,
            MeshArg::Jittered => MeshKind::Jittered,
        };
    }
    c.seed = o.seed.unwrap_or(c.seed);
    c.jitter = o.jitter.unwrap_or(c.jitter);
    c.gamma = o.gamma.unwrap_or(c.gamma);
    if let Some(g) = o.gammas {
        c.gammas = g;
    }
    c.eps = o.eps.unwrap_or(c.eps);
    c.beta = o.beta.unwrap_or(c.beta);
    c.sigma = o.sigma.unwrap_or(c.sigma);
    if let Some(s) = o.stab {
        c.stab = match s {
            StabArg::None => StabKind::None,
            StabArg::Sd => StabKind::Sd,
            StabArg::Cip => StabKind::Cip,
        };
    }
    c.gamma_sd = o.gamma_sd.unwrap_or(c.gamma_sd);
    c.gamma_cip = o.gamma_cip.unwrap_or(c.gamma_cip);
    if let Some(b) = o.bc {
        c.bc = match b {
            BcArg::Nitsche => BcMode::NitscheNonsym,
            BcArg::NitscheSym => BcMode::NitscheSym,
            BcArg::Strong => BcMode::Strong,
        };
    }
    if let Some(s) = o.solver {
        c.solver = match s {
            SolverArg::Direct => SolverChoice::Direct,
            SolverArg::Bicgstab => SolverChoice::Bicgstab,
        };
    }
    c.edges_per_patch = o.edges_per_patch.unwrap_or(c.edges_per_patch);
    if let Some(f) = o.form {
        c.form = match f {
            FormArg::Poisson => InfSupForm::PoissonNitsche,
            FormArg::Convdiff => InfSupForm::ConvDiff,
        };
    }
    c.with_sym = o.with_sym;
    c.out = o.out;
    c
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(exit::CONFIG as u8);
        }
    };
    let cfg = config(cli.command, cli.opts);
    let mut stdout = std::io::stdout().lock();
    match run(&cfg, &mut stdout) {
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
