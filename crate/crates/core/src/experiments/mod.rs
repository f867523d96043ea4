//! Experiment drivers behind the `nitsche-fem` binary. Each command writes its
//! tables and fields into the output directory together with a JSON manifest.

mod convergence;
mod infsup;
mod outflow;
mod verify;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

pub use convergence::{cmd_convergence, cmd_penalty_sweep, manufactured_problem, penalty_sweep, write_side_by_side, PenaltyRow, PenaltySweep};
pub use infsup::{cmd_infsup, infsup_rows, write_infsup_csv, InfSupRow};
pub use outflow::{cmd_outflow, gradient_jump_metric, outflow_problem, outflow_run, OutflowReport};
pub use verify::{cmd_verify, convdiff_positivity_violation, energy_identity_defect, polynomial_reproduction_error, quadrature_defect, run_checks, Check, CheckStatus};

use crate::analysis::InfSupForm;
use crate::assembly::{BcMode, Stabilization};
use crate::linalg::SolverChoice;
use crate::mesh::{MeshFamily, MeshKind, DEFAULT_EDGES_PER_PATCH, DEFAULT_JITTER};
use crate::{Error, Result};

pub const DEFAULT_GAMMA_SD: f64 = 0.2;
pub const DEFAULT_GAMMA_CIP: f64 = 0.005;
pub const PENALTY_VALUES: [f64; 5] = [0.0, 10.0, 20.0, 40.0, 80.0];
pub const INFSUP_SIZES: [usize; 3] = [8, 12, 16];
/// Largest number of refinement levels accepted by `convergence`.
pub const MAX_LEVELS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Convergence,
    PenaltySweep,
    Outflow,
    Infsup,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Convergence => "convergence",
            Command::PenaltySweep => "penalty-sweep",
            Command::Outflow => "outflow",
            Command::Infsup => "infsup",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StabKind {
    #[default]
    None,
    Sd,
    Cip,
}

/// Fully resolved parameters of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub order: usize,
    /// Cells per side; `None` means the command default.
    pub n: Option<usize>,
    pub levels: usize,
    /// Mesh sizes for `infsup`.
    pub ns: Vec<usize>,
    pub mesh: MeshKind,
    pub seed: u64,
    pub jitter: f64,
    pub gamma: f64,
    /// Penalty values for `penalty-sweep`.
    pub gammas: Vec<f64>,
    pub eps: f64,
    pub beta: [f64; 2],
    pub sigma: f64,
    pub stab: StabKind,
    pub gamma_sd: f64,
    pub gamma_cip: f64,
    pub bc: BcMode,
    pub solver: SolverChoice,
    pub edges_per_patch: usize,
    pub form: InfSupForm,
    /// Adds a symmetric-Nitsche column to the inf-sup table.
    pub with_sym: bool,
    pub out: PathBuf,
}

impl RunConfig {
    /// Defaults of each command: the unstructured-mesh tables use the jittered
    /// family, the outflow and verification runs the structured mesh.
    pub fn new(command: Command) -> Self {
        let jittered = matches!(command, Command::Convergence | Command::PenaltySweep);
        RunConfig {
            command,
            order: 1,
            n: None,
            levels: 4,
            ns: INFSUP_SIZES.to_vec(),
            mesh: if jittered { MeshKind::Jittered } else { MeshKind::Structured },
            seed: 1,
            jitter: DEFAULT_JITTER,
            gamma: 0.0,
            gammas: PENALTY_VALUES.to_vec(),
            eps: if command == Command::Outflow { 1e-5 } else { 1.0 },
            beta: if command == Command::Outflow { [0.5, 1.0] } else { [0.0, 0.0] },
            sigma: 0.0,
            stab: StabKind::None,
            gamma_sd: DEFAULT_GAMMA_SD,
            gamma_cip: DEFAULT_GAMMA_CIP,
            bc: BcMode::NitscheNonsym,
            solver: SolverChoice::Direct,
            edges_per_patch: DEFAULT_EDGES_PER_PATCH,
            form: InfSupForm::PoissonNitsche,
            with_sym: false,
            out: PathBuf::from("out"),
        }
    }

    pub fn family(&self) -> MeshFamily {
        match self.mesh {
            MeshKind::Structured => MeshFamily::structured(),
            MeshKind::Jittered => MeshFamily { kind: MeshKind::Jittered, jitter: self.jitter, seed: self.seed },
        }
    }

    pub fn stabilization(&self) -> Stabilization {
        match self.stab {
            StabKind::None => Stabilization::None,
            StabKind::Sd => Stabilization::Sd(self.gamma_sd),
            StabKind::Cip => Stabilization::Cip(self.gamma_cip),
        }
    }

    /// Mesh size used by single-mesh commands.
    pub fn resolved_n(&self) -> usize {
        self.n.unwrap_or(match self.command {
            Command::PenaltySweep if self.order == 2 => 40,
            Command::PenaltySweep | Command::Outflow => 80,
            _ => 20,
        })
    }

    /// Rejects inconsistent parameter combinations before any mesh is built.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(1..=2).contains(&self.order) {
            return bad(format!("--order must be 1 or 2, got {}", self.order));
        }
        if let Some(n) = self.n {
            if n < 5 {
                return bad(format!("--n must be at least 5 so every side carries a patch, got {n}"));
            }
        }
        if self.command == Command::Convergence && !(1..=MAX_LEVELS).contains(&self.levels) {
            return bad(format!("--levels must be in 1..={MAX_LEVELS}, got {}", self.levels));
        }
        if !(0.0..=0.25).contains(&self.jitter) {
            return bad(format!("--jitter must be in [0, 0.25], got {}", self.jitter));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("--eps must be positive, got {}", self.eps));
        }
        if !self.beta.iter().all(|b| b.is_finite()) || !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("--beta must be finite and --sigma non-negative".into());
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("--gamma must be non-negative, got {}", self.gamma));
        }
        if !(self.gamma_sd >= 0.0 && self.gamma_cip >= 0.0) {
            return bad("--gamma-sd and --gamma-cip must be non-negative".into());
        }
        if self.stab == StabKind::Sd && self.sigma != 0.0 {
            return bad("SD stabilization requires --sigma 0".into());
        }
        match self.command {
            Command::Convergence | Command::PenaltySweep if self.stab != StabKind::None => {
                return bad(format!("--stab applies to outflow runs only, got {:?}", self.stab));
            }
            Command::PenaltySweep if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g >= 0.0)) => {
                return bad("--gammas must be a non-empty list of non-negative values".into());
            }
            Command::Infsup => {
                if self.ns.iter().any(|&n| n < 5) {
                    return bad("--ns entries must be at least 5".into());
                }
                if let Some(&n) = self.ns.iter().find(|&&n| dofs_of(self.order, n) > crate::analysis::DENSE_CAP) {
                    let largest = (5..).take_while(|&m| dofs_of(self.order, m) <= crate::analysis::DENSE_CAP).last().unwrap_or(5);
                    return bad(format!(
                        "n={n} gives {} unknowns, above the dense eigensolve cap of {}; use n <= {largest} for P{}",
                        dofs_of(self.order, n),
                        crate::analysis::DENSE_CAP,
                        self.order
                    ));
                }
            }
            Command::Verify if self.edges_per_patch == 0 => return bad("--edges-per-patch must be positive".into()),
            Command::Verify => {}
            _ if self.edges_per_patch < 5 => {
                return bad(format!("--edges-per-patch must be at least 5, got {}", self.edges_per_patch));
            }
            _ => {}
        }
        Ok(())
    }
}

fn dofs_of(order: usize, n: usize) -> usize {
    (order * n + 1) * (order * n + 1)
}

/// Exit status of a command.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::InvalidMesh(_) | Error::Parse { .. } | Error::TooLarge { .. } | Error::Io(_) => exit::CONFIG,
        Error::Singular { .. } | Error::NotPositiveDefinite { .. } | Error::Breakdown { .. } | Error::NotConverged { .. } => {
            exit::SOLVER
        }
        Error::DegeneratePatch { .. } => exit::CHECK_FAILED,
    }
}

/// What a command produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// False when a verification check failed.
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            exit::OK
        } else {
            exit::CHECK_FAILED
        }
    }
}

/// Validates `cfg` and dispatches to the command.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    match cfg.command {
        Command::Convergence => cmd_convergence(cfg, out),
        Command::PenaltySweep => cmd_penalty_sweep(cfg, out),
        Command::Outflow => cmd_outflow(cfg, out),
        Command::Infsup => cmd_infsup(cfg, out),
        Command::Verify => cmd_verify(cfg, out),
    }
}

/// Phase timer recorded in the manifest.
pub(crate) struct Timings {
    start: Instant,
    phases: Vec<(String, f64)>,
}

impl Timings {
    pub(crate) fn new() -> Self {
        Timings { start: Instant::now(), phases: Vec::new() }
    }

    pub(crate) fn time<T>(&mut self, name: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let r = f();
        self.phases.push((name.into(), t.elapsed().as_secs_f64()));
        r
    }

    fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        for (k, v) in &self.phases {
            m.insert(k.clone(), json!(v));
        }
        m.insert("total".into(), json!(self.start.elapsed().as_secs_f64()));
        Value::Object(m)
    }
}

/// Writes `<out>/<command>_manifest.json`: config echo, mesh statistics, timings and results.
pub(crate) fn write_manifest(
    cfg: &RunConfig,
    meshes: Value,
    timings: &Timings,
    results: Value,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let path = cfg.out.join(format!("{}_manifest.json", cfg.command.name().replace('-', "_")));
    let names: Vec<String> = files.iter().map(|p| file_name(p)).collect();
    let doc = json!({
        "command": cfg.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "meshes": meshes,
        "timings_s": timings.to_json(),
        "results": results,
        "files": names,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write_atomic(&path, text.as_bytes())?;
    files.push(path);
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Writes through a temporary file in the same directory and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(bytes)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Renders into a buffer first so that files are written in one piece.
pub(crate) fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, &buf)
}

pub(crate) fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// `1e-5` → `1e-5`, `0.1` → `1e-1`, for file names.
pub(crate) fn eps_tag(eps: f64) -> String {
    format!("{eps:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for c in [Command::Convergence, Command::PenaltySweep, Command::Outflow, Command::Infsup, Command::Verify] {
            RunConfig::new(c).validate().unwrap();
        }
    }

    #[test]
    fn resolved_sizes_follow_the_tables() {
        let mut c = RunConfig::new(Command::PenaltySweep);
        assert_eq!(c.resolved_n(), 80);
        c.order = 2;
        assert_eq!(c.resolved_n(), 40);
        assert_eq!(RunConfig::new(Command::Outflow).resolved_n(), 80);
    }

    #[test]
    fn invalid_combinations_are_config_errors() {
        let mut c = RunConfig::new(Command::Outflow);
        c.stab = StabKind::Sd;
        c.sigma = 1.0;
        assert_eq!(exit_code(&c.validate().unwrap_err()), exit::CONFIG);

        let mut c = RunConfig::new(Command::Convergence);
        c.levels = 0;
        assert!(c.validate().is_err());
        c.levels = 2;
        c.stab = StabKind::Cip;
        assert!(c.validate().is_err());

        let mut c = RunConfig::new(Command::Infsup);
        c.ns = vec![64];
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("n <= 43"), "{msg}");

        let mut c = RunConfig::new(Command::Verify);
        c.edges_per_patch = 3;
        c.validate().unwrap();
        c.command = Command::Outflow;
        assert!(c.validate().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Singular { pivot: 0 }), exit::SOLVER);
        assert_eq!(exit_code(&Error::InvalidArgument(String::new())), exit::CONFIG);
        assert_eq!(exit_code(&Error::DegeneratePatch { patch: 0, value: 0.0 }), exit::CHECK_FAILED);
    }

    #[test]
    fn eps_tags() {
        assert_eq!(eps_tag(1e-5), "1e-5");
        assert_eq!(eps_tag(0.1), "1e-1");
    }
}
