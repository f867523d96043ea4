use std::io::Write;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::{to_json, write_manifest, write_with, Outcome, RunConfig, Timings};
use crate::analysis::convergence::{bc_name, convergence_row, rate, sci};
use crate::analysis::{convergence_study, ConvergenceTable, SineSolution};
use crate::assembly::{BcMode, ProblemSpec};
use crate::mesh::MeshFamily;
use crate::{Error, Result};

/// `−Δu = 5π² sin(πx) sin(2πy)`, `u = 0` on ∂Ω, with exact solution [`SineSolution`].
pub fn manufactured_problem(bc: BcMode, gamma: f64) -> ProblemSpec {
    ProblemSpec::poisson(SineSolution::source, |_| 0.0).with_bc(bc).with_gamma(gamma)
}

/// Runs the requested boundary treatment and the strong comparison, and writes
/// one CSV per method plus a side-by-side table.
pub fn cmd_convergence(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let mut timings = Timings::new();
    let family = cfg.family();
    let mut modes = vec![cfg.bc];
    if cfg.bc != BcMode::Strong {
        modes.push(BcMode::Strong);
    }
    let mut tables = Vec::new();
    for &bc in &modes {
        let p = manufactured_problem(bc, cfg.gamma);
        let t = timings.time(bc_name(bc), || convergence_study(&p, &SineSolution, cfg.order, &family, cfg.levels, cfg.solver))?;
        tables.push(t);
    }
    let mut files = Vec::new();
    for t in &tables {
        let path = cfg.out.join(format!("convergence_p{}_{}.csv", cfg.order, bc_name(t.meta.bc_mode)));
        write_with(&path, |w| t.write_csv(w))?;
        files.push(path);
    }
    let path = cfg.out.join(format!("convergence_p{}.csv", cfg.order));
    write_with(&path, |w| write_side_by_side(&tables, w))?;
    files.push(path);
    write_side_by_side(&tables, out)?;
    for t in &tables {
        if let Some(p) = &t.meta.partial {
            writeln!(out, "warning: {} table is partial ({p})", bc_name(t.meta.bc_mode))?;
        }
    }
    let meshes: Vec<_> = tables[0]
        .rows
        .iter()
        .map(|r| family.build(r.n).map(|m| json!({"n": r.n, "stats": to_json(&m.stats())})))
        .collect::<Result<_>>()?;
    write_manifest(cfg, json!(meshes), &timings, json!({"tables": to_json(&tables)}), &mut files)?;
    Ok(Outcome { files, passed: true })
}

/// `# key=value` header, then `n,h,dofs` and L2/H1 errors and rates per method.
pub fn write_side_by_side<W: Write + ?Sized>(tables: &[ConvergenceTable], w: &mut W) -> Result<()> {
    let first = tables.first().ok_or_else(|| Error::InvalidArgument("no tables".into()))?;
    writeln!(w, "# order={}", first.meta.order)?;
    writeln!(w, "# gamma={}", first.meta.gamma)?;
    writeln!(w, "# mesh={}", to_json(&first.meta.mesh.kind).as_str().unwrap_or(""))?;
    writeln!(w, "# seed={}", first.meta.mesh.seed)?;
    let mut header = String::from("n,h,dofs");
    for t in tables {
        let b = bc_name(t.meta.bc_mode).replace('-', "_");
        header.push_str(&format!(",{b}_l2,{b}_l2_rate,{b}_h1,{b}_h1_rate"));
    }
    writeln!(w, "{header}")?;
    let rows = tables.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    for i in 0..rows {
        let r = &first.rows[i];
        let mut line = format!("{},{},{}", r.n, sci(r.h), r.dofs);
        for t in tables {
            let r = &t.rows[i];
            line.push_str(&format!(",{},{},{},{}", sci(r.l2_err), rate(r.l2_rate), sci(r.h1_err), rate(r.h1_rate)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct PenaltyRow {
    pub gamma: f64,
    pub l2_err: f64,
    pub h1_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PenaltySweep {
    pub order: usize,
    pub n: usize,
    pub rows: Vec<PenaltyRow>,
    /// `max/min` of the L2 errors; absent for a single penalty value.
    pub l2_ratio: Option<f64>,
    /// All H1 errors agree to two significant digits.
    pub h1_constant_2sig: bool,
}

impl PenaltySweep {
    pub fn new(order: usize, n: usize, rows: Vec<PenaltyRow>) -> Self {
        let l2: Vec<f64> = rows.iter().map(|r| r.l2_err).collect();
        let l2_ratio = (rows.len() > 1).then(|| {
            let max = l2.iter().cloned().fold(f64::MIN, f64::max);
            let min = l2.iter().cloned().fold(f64::MAX, f64::min);
            max / min
        });
        let two_sig: Vec<String> = rows.iter().map(|r| format!("{:.1E}", r.h1_err)).collect();
        let h1_constant_2sig = two_sig.windows(2).all(|w| w[0] == w[1]);
        PenaltySweep { order, n, rows, l2_ratio, h1_constant_2sig }
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# order={}", self.order)?;
        writeln!(w, "# n={}", self.n)?;
        writeln!(w, "gamma,l2_err,h1_err")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.gamma, sci(r.l2_err), sci(r.h1_err))?;
        }
        Ok(())
    }
}

/// Errors on one mesh for every penalty value.
pub fn penalty_sweep(order: usize, family: &MeshFamily, n: usize, gammas: &[f64], bc: BcMode, solver: crate::linalg::SolverChoice) -> Result<PenaltySweep> {
    let rows = gammas
        .iter()
        .map(|&gamma| {
            let r = convergence_row(&manufactured_problem(bc, gamma), &SineSolution, order, family, n, solver)?;
            Ok(PenaltyRow { gamma, l2_err: r.l2_err, h1_err: r.h1_err })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PenaltySweep::new(order, n, rows))
}

pub fn cmd_penalty_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let mut timings = Timings::new();
    let n = cfg.resolved_n();
    let family = cfg.family();
    let sweep = timings.time("sweep", || penalty_sweep(cfg.order, &family, n, &cfg.gammas, cfg.bc, cfg.solver))?;
    let path = cfg.out.join(format!("penalty_sweep_p{}_n{n}.csv", cfg.order));
    write_with(&path, |w| sweep.write_csv(w))?;
    sweep.write_csv(out)?;
    if let Some(r) = sweep.l2_ratio {
        writeln!(out, "# l2 max/min = {r:.3}, h1 constant to 2 digits: {}", sweep.h1_constant_2sig)?;
    }
    let mut files = vec![path];
    let mesh = Arc::new(family.build(n)?);
    write_manifest(cfg, json!([{"n": n, "stats": to_json(&mesh.stats())}]), &timings, to_json(&sweep), &mut files)?;
    Ok(Outcome { files, passed: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_summary() {
        let rows = vec![
            PenaltyRow { gamma: 0.0, l2_err: 3.3e-4, h1_err: 8.21e-2 },
            PenaltyRow { gamma: 10.0, l2_err: 2.9e-4, h1_err: 8.24e-2 },
        ];
        let s = PenaltySweep::new(1, 80, rows);
        assert!((s.l2_ratio.unwrap() - 3.3 / 2.9).abs() < 1e-12);
        assert!(s.h1_constant_2sig);
        let one = PenaltySweep::new(1, 80, vec![PenaltyRow { gamma: 0.0, l2_err: 1.0, h1_err: 1.0 }]);
        assert!(one.l2_ratio.is_none());
    }
}
