//! File writers for run artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::lagrangian::FlowMap;
use crate::littlewood_paley::EstimateRow;
use crate::measures::write_measure;
use crate::numfmt::sci17;
use crate::solver::diagnostics::{write_csv, DiagnosticsRow};
use crate::solver::SolverState;
use crate::spectral::snapshot::write_snapshot;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    let mut w = create(path)?;
    write_csv(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

/// Writes `theta`, `omega` and the atoms of one state under `dir`, tagged by step.
pub fn write_state(dir: &Path, tag: &str, state: &SolverState) -> Result<Vec<PathBuf>> {
    let theta = dir.join(format!("theta_{tag}.bmlf"));
    let omega = dir.join(format!("omega_{tag}.bmlf"));
    let atoms = dir.join(format!("atoms_{tag}.csv"));
    let mut w = create(&theta)?;
    write_snapshot(&mut w, &state.theta_field(), state.t)?;
    w.flush()?;
    let mut w = create(&omega)?;
    write_snapshot(&mut w, &state.omega_field(), state.t)?;
    w.flush()?;
    let mut w = create(&atoms)?;
    write_measure(&mut w, &state.atoms)?;
    w.flush()?;
    Ok(vec![theta, omega, atoms])
}

pub const FLOW_COLUMNS: &str = "y1,y2,X1,X2,g11,g12,g21,g22,detg";

pub fn write_flow_map(path: &Path, fm: &FlowMap) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{FLOW_COLUMNS}")?;
    for (i, (y, x)) in fm.seeds().iter().zip(fm.positions()).enumerate() {
        let g = fm.grads()[i];
        let cells = [y[0], y[1], x[0], x[1], g[0][0], g[0][1], g[1][0], g[1][1], fm.determinant(i)];
        writeln!(w, "{}", cells.map(sci17).join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub const VERIFY_COLUMNS: &str = "id,variant,lhs,rhs,ratio,grid_n";

/// One verification row; `variant` names the inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub id: usize,
    pub variant: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub grid_n: usize,
}

impl From<&EstimateRow> for VerifyRow {
    fn from(r: &EstimateRow) -> Self {
        VerifyRow {
            id: r.id,
            variant: format!("product{}", r.variant),
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: r.ratio,
            grid_n: r.grid_n,
        }
    }
}

pub fn write_verify_csv(path: &Path, rows: &[VerifyRow]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{VERIFY_COLUMNS}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.id,
            r.variant,
            sci17(r.lhs),
            sci17(r.rhs),
            sci17(r.ratio),
            r.grid_n
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Margin table of a manifest: `suite,kind,key,value` where `kind` is
/// `margin` (judged, nonnegative passes) or `measured`.
pub fn write_margins_csv(path: &Path, manifest: &super::manifest::Manifest) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "suite,kind,key,value")?;
    for s in &manifest.suites {
        for (kind, map) in [("margin", &s.margins), ("measured", &s.measured)] {
            for (k, v) in map {
                writeln!(w, "{},{kind},{k},{}", s.name, sci17(*v))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
