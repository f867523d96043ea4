use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use super::fields::Field;
use super::norms::{error_parts, NormParams};
use super::solve_problem;
use crate::assembly::{BcMode, ProblemSpec, Stabilization};
use crate::fespace::FeSpace;
use crate::linalg::SolverChoice;
use crate::mesh::MeshFamily;
use crate::{Error, Result};

/// Errors below this are treated as exact reproduction.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub l2_err: f64,
    pub l2_rate: Option<f64>,
    pub h1_err: f64,
    pub h1_rate: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableMeta {
    pub order: usize,
    pub bc_mode: BcMode,
    pub gamma: f64,
    pub stabilization: Stabilization,
    pub mesh: MeshFamily,
    /// All errors below [`EXACT_TOL`]; rates are then omitted.
    pub exact: bool,
    /// Set when a level failed; holds the failure message.
    pub partial: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub meta: TableMeta,
    pub rows: Vec<ConvergenceRow>,
}

/// `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`, absent for the first entry.
pub fn rates(h: &[f64], e: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; h.len().min(e.len())];
    for i in 1..out.len() {
        out[i] = Some((e[i - 1] / e[i]).ln() / (h[i - 1] / h[i]).ln());
    }
    out
}

/// Cells per side of level `i`: `10·2^i`.
pub fn level_sizes(levels: usize) -> Vec<usize> {
    (0..levels).map(|i| 10 << i).collect()
}

impl ConvergenceTable {
    pub fn new(meta: TableMeta, mut rows: Vec<ConvergenceRow>) -> Self {
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let l2: Vec<f64> = rows.iter().map(|r| r.l2_err).collect();
        let h1: Vec<f64> = rows.iter().map(|r| r.h1_err).collect();
        let exact = !rows.is_empty() && rows.iter().all(|r| r.l2_err <= EXACT_TOL && r.h1_err <= EXACT_TOL);
        for (r, (a, b)) in rows.iter_mut().zip(rates(&h, &l2).into_iter().zip(rates(&h, &h1))) {
            r.l2_rate = if exact { None } else { a };
            r.h1_rate = if exact { None } else { b };
        }
        ConvergenceTable { meta: TableMeta { exact, ..meta }, rows }
    }

    pub fn last(&self) -> Option<&ConvergenceRow> {
        self.rows.last()
    }

    /// `# key=value` metadata lines, then `n,h,dofs,l2_err,l2_rate,h1_err,h1_rate`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = &self.meta;
        writeln!(w, "# order={}", m.order)?;
        writeln!(w, "# bc_mode={}", bc_name(m.bc_mode))?;
        writeln!(w, "# gamma={}", m.gamma)?;
        writeln!(w, "# stabilization={}", stab_name(m.stabilization))?;
        writeln!(w, "# mesh={}", serde_json::to_value(m.mesh.kind).map_err(|e| Error::InvalidArgument(e.to_string()))?.as_str().unwrap_or(""))?;
        writeln!(w, "# jitter={}", m.mesh.jitter)?;
        writeln!(w, "# seed={}", m.mesh.seed)?;
        writeln!(w, "# exact={}", m.exact)?;
        if let Some(p) = &m.partial {
            writeln!(w, "# partial={}", p.replace('\n', " "))?;
        }
        writeln!(w, "n,h,dofs,l2_err,l2_rate,h1_err,h1_rate")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.n,
                sci(r.h),
                r.dofs,
                sci(r.l2_err),
                rate(r.l2_rate),
                sci(r.h1_err),
                rate(r.h1_rate)
            )?;
        }
        Ok(())
    }
}

/// Three significant digits in scientific notation, e.g. `3.30E-4`.
pub fn sci(x: f64) -> String {
    format!("{x:.2E}")
}

pub fn rate(r: Option<f64>) -> String {
    r.map(|r| format!("{r:.2}")).unwrap_or_default()
}

pub fn bc_name(b: BcMode) -> &'static str {
    match b {
        BcMode::NitscheNonsym => "nitsche",
        BcMode::NitscheSym => "nitsche-sym",
        BcMode::Strong => "strong",
    }
}

pub fn stab_name(s: Stabilization) -> String {
    match s {
        Stabilization::None => "none".into(),
        Stabilization::Sd(g) => format!("sd({g})"),
        Stabilization::Cip(g) => format!("cip({g})"),
    }
}

/// One level: solve on `n` cells per side and measure L2 and H1-seminorm errors.
pub fn convergence_row(
    p: &ProblemSpec,
    u: &dyn Field,
    order: usize,
    family: &MeshFamily,
    n: usize,
    solver: SolverChoice,
) -> Result<ConvergenceRow> {
    let mesh = Arc::new(family.build(n)?);
    let space = FeSpace::new(mesh.clone(), order)?;
    let uh = solve_problem(&space, p, solver)?;
    let parts = error_parts(u, &uh, &NormParams::default());
    Ok(ConvergenceRow {
        n,
        h: mesh.h(),
        dofs: space.ndofs(),
        l2_err: parts.l2.sqrt(),
        l2_rate: None,
        h1_err: parts.grad.sqrt(),
        h1_rate: None,
    })
}

/// Solves on `n = 10·2^i`, `i < levels`, and tabulates errors and rates.
///
/// A failing level ends the study; the rows computed so far are returned with
/// `meta.partial` set. A failure on the first level is returned as an error.
pub fn convergence_study(
    p: &ProblemSpec,
    u: &dyn Field,
    order: usize,
    family: &MeshFamily,
    levels: usize,
    solver: SolverChoice,
) -> Result<ConvergenceTable> {
    convergence_study_on(p, u, order, family, &level_sizes(levels), solver)
}

pub fn convergence_study_on(
    p: &ProblemSpec,
    u: &dyn Field,
    order: usize,
    family: &MeshFamily,
    sizes: &[usize],
    solver: SolverChoice,
) -> Result<ConvergenceTable> {
    let mut rows = Vec::new();
    let mut partial = None;
    for &n in sizes {
        match convergence_row(p, u, order, family, n, solver) {
            Ok(r) => rows.push(r),
            Err(e) if rows.is_empty() => return Err(e),
            Err(e) => {
                partial = Some(format!("level n={n}: {e}"));
                break;
            }
        }
    }
    let meta = TableMeta {
        order,
        bc_mode: p.bc_mode,
        gamma: p.gamma,
        stabilization: p.stabilization,
        mesh: *family,
        exact: false,
        partial,
    };
    Ok(ConvergenceTable::new(meta, rows))
}
