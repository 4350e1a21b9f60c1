use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::equilibrium::{knot_equilibrium_table, KnotEquilibrium};
use crate::error::{Error, Result};
use crate::solver::{Diagnostics, LimitSolution, Material};

pub const ARC_CSV_HEADER: &str = "s,UE_T,UE_N,UE_B,UI_1,UI_2,UI_3,R_1,R_2,R_3,Theta";
pub const POLYLINE_HEADER: &str = "# arc s x y z u1 u2 u3";

/// One row of a per-arc CSV, in header order.
pub type ArcRow = [f64; 11];

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub h: f64,
    pub elements: usize,
    pub dofs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Energies {
    pub extensional: f64,
    pub inextensional: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub material: Material,
    pub young: f64,
    pub mesh: MeshSummary,
    pub energies: Energies,
    pub diagnostics: Diagnostics,
    pub knots: Vec<KnotEquilibrium>,
}

pub fn summary(sol: &LimitSolution) -> Result<Summary> {
    let mesh = sol.mesh();
    Ok(Summary {
        material: sol.material,
        young: sol.material.young(),
        mesh: MeshSummary {
            h: mesh.target_h(),
            elements: mesh.elements().len(),
            dofs: mesh.n_dofs(),
        },
        energies: Energies {
            extensional: sol.diagnostics.extensional.energy,
            inextensional: sol.diagnostics.inextensional.energy,
        },
        diagnostics: sol.diagnostics.clone(),
        knots: knot_equilibrium_table(sol)?,
    })
}

/// Field values at the displacement nodes of `arc`.
pub fn arc_rows(sol: &LimitSolution, arc: usize) -> Result<Vec<ArcRow>> {
    let geo = sol.skeleton().arc(arc)?;
    let mut rows = vec![];
    for ((s, ue), (_, ui)) in sol
        .u_e
        .arc_node_values(arc)
        .into_iter()
        .zip(sol.pair.v.arc_node_values(arc))
    {
        let f = geo.frame_at(s)?;
        let r = sol.pair.a.value(arc, s);
        rows.push([
            s,
            ue.dot(&f.t),
            ue.dot(&f.n),
            ue.dot(&f.b),
            ui[0],
            ui[1],
            ui[2],
            r[0],
            r[1],
            r[2],
            r.dot(&f.t),
        ]);
    }
    Ok(rows)
}

pub fn write_arc_csv(rows: &[ArcRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{ARC_CSV_HEADER}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_arc_csv(path: &Path) -> Result<Vec<ArcRow>> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != ARC_CSV_HEADER {
        return Err(Error::Parse(format!("{}: unexpected header", path.display())));
    }
    let mut rows = vec![];
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse()).collect();
        let vals = vals.map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), n + 2)))?;
        let row: ArcRow = vals
            .try_into()
            .map_err(|_| Error::Parse(format!("{}:{}: expected 11 columns", path.display(), n + 2)))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Polyline samples: arc, s, position and total limit displacement.
pub fn write_polyline(sol: &LimitSolution, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{POLYLINE_HEADER}")?;
    for arc in 0..sol.skeleton().arcs.len() {
        for (s, _) in sol.u_e.arc_node_values(arc) {
            let x = sol.skeleton().arcs[arc].position(s)?;
            let u = sol.displacement(arc, s);
            writeln!(
                out,
                "{arc} {s:e} {:e} {:e} {:e} {:e} {:e} {:e}",
                x[0], x[1], x[2], u[0], u[1], u[2]
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportOptions {
    pub polyline: bool,
}

impl Default for ExportOptions {
    fn default() -> Self {
        Self { polyline: true }
    }
}

/// Write `arc_<i>.csv`, `summary.json` and optionally `polyline.txt` into
/// `dir`; returns the written paths.
pub fn export_solution(sol: &LimitSolution, dir: &Path, opts: ExportOptions) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = vec![];
    for arc in 0..sol.skeleton().arcs.len() {
        let path = dir.join(format!("arc_{arc}.csv"));
        let mut w = BufWriter::new(File::create(&path)?);
        write_arc_csv(&arc_rows(sol, arc)?, &mut w)?;
        w.flush()?;
        written.push(path);
    }
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary(sol)?)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    written.push(path);
    if opts.polyline {
        let path = dir.join("polyline.txt");
        let mut w = BufWriter::new(File::create(&path)?);
        write_polyline(sol, &mut w)?;
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
