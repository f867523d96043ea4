use std::io::Write;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::{to_json, write_manifest, write_with, Outcome, RunConfig, Timings};
use crate::analysis::convergence::sci;
use crate::analysis::{infsup_constant, InfSupForm};
use crate::assembly::{BcMode, ProblemSpec};
use crate::fespace::FeSpace;
use crate::Result;

#[derive(Clone, Debug, Serialize)]
pub struct InfSupRow {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub c_s: f64,
    /// The symmetric variant on the same mesh, when requested.
    pub c_s_sym: Option<f64>,
}

fn problem(cfg: &RunConfig, bc: BcMode) -> ProblemSpec {
    let base = match cfg.form {
        InfSupForm::PoissonNitsche => ProblemSpec::poisson(|_| 0.0, |_| 0.0),
        InfSupForm::ConvDiff => ProblemSpec::convection_diffusion(cfg.eps, cfg.beta, cfg.sigma, |_| 0.0, |_| 0.0)
            .with_stabilization(cfg.stabilization()),
    };
    base.with_bc(bc).with_gamma(cfg.gamma)
}

pub fn infsup_rows(cfg: &RunConfig) -> Result<Vec<InfSupRow>> {
    let family = cfg.family();
    cfg.ns
        .iter()
        .map(|&n| {
            let space = FeSpace::new(Arc::new(family.build(n)?), cfg.order)?;
            let c_s = infsup_constant(cfg.form, &space, &problem(cfg, cfg.bc))?.c_s;
            let c_s_sym = if cfg.with_sym {
                Some(infsup_constant(cfg.form, &space, &problem(cfg, BcMode::NitscheSym))?.c_s)
            } else {
                None
            };
            Ok(InfSupRow { n, h: space.mesh().h(), dofs: space.ndofs(), c_s, c_s_sym })
        })
        .collect()
}

pub fn write_infsup_csv<W: Write + ?Sized>(rows: &[InfSupRow], with_sym: bool, w: &mut W) -> Result<()> {
    writeln!(w, "{}", if with_sym { "n,h,dofs,c_s,c_s_sym" } else { "n,h,dofs,c_s" })?;
    for r in rows {
        write!(w, "{},{},{},{}", r.n, sci(r.h), r.dofs, sci(r.c_s))?;
        if with_sym {
            write!(w, ",{}", r.c_s_sym.map(sci).unwrap_or_default())?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn cmd_infsup(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let mut timings = Timings::new();
    let rows = timings.time("eigensolves", || infsup_rows(cfg))?;
    let form = match cfg.form {
        InfSupForm::PoissonNitsche => "poisson",
        InfSupForm::ConvDiff => "convdiff",
    };
    let path = cfg.out.join(format!("infsup_{form}_p{}.csv", cfg.order));
    write_with(&path, |w| write_infsup_csv(&rows, cfg.with_sym, w))?;
    write_infsup_csv(&rows, cfg.with_sym, out)?;
    let c: Vec<f64> = rows.iter().map(|r| r.c_s).collect();
    let min = c.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = c.iter().cloned().fold(0.0, f64::max);
    let ratio = (!c.is_empty()).then(|| min / max);
    let meshes: Vec<_> = cfg
        .ns
        .iter()
        .map(|&n| cfg.family().build(n).map(|m| json!({"n": n, "stats": to_json(&m.stats())})))
        .collect::<Result<_>>()?;
    let mut files = vec![path];
    write_manifest(cfg, json!(meshes), &timings, json!({"rows": to_json(&rows), "min_over_max": ratio}), &mut files)?;
    Ok(Outcome { files, passed: true })
}

#[cfg(test)]
mod tests {
    use super::super::Command;
    use super::*;

    #[test]
    fn empty_list_gives_header_only() {
        let mut cfg = RunConfig::new(Command::Infsup);
        cfg.ns.clear();
        let rows = infsup_rows(&cfg).unwrap();
        let mut buf = Vec::new();
        write_infsup_csv(&rows, false, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,h,dofs,c_s\n");
    }

    #[test]
    fn symmetric_column() {
        let mut cfg = RunConfig::new(Command::Infsup);
        cfg.ns = vec![5];
        cfg.with_sym = true;
        let rows = infsup_rows(&cfg).unwrap();
        assert!(rows[0].c_s > 0.0 && rows[0].c_s_sym.is_some());
    }
}
