//! Command-line front end: `validate`, `solve`, `decompose` and `report`.
//!
//! Exit codes: 0 on success, 1 when a check or a solve fails, 2 on unreadable
//! or malformed input.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decomposition::{
    estimate_report, estimate_row, EstimateOptions, EstimateReport, FieldFamily, TubeField,
};
use crate::error::{Error, Result};
use crate::geometry::{Skeleton, SkeletonSpec};
use crate::loads::{LoadCase, OrthogonalityMode};
use crate::postprocess::{export_solution, stress_grid, ExportOptions};
use crate::solver::{solve, Material, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "ROD_NUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rodstruct", version, about = "Limit models of thin curved rod structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the geometric hypotheses of a skeleton.
    Validate(ValidateArgs),
    /// Solve the extensional and inextensional limit problems and export the fields.
    Solve(SolveArgs),
    /// Elementary decomposition of tube fields and the table of estimate ratios.
    Decompose(DecomposeArgs),
    /// Print a plain-text digest of the JSON files in an output directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub skeleton: PathBuf,
    /// Directory for `validation.json`; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub skeleton: PathBuf,
    #[arg(long)]
    pub loads: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Solver settings as JSON; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target element length.
    #[arg(long)]
    pub h: Option<f64>,
    /// Overrides the `mode` of the load file.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Skip `polyline.txt`.
    #[arg(long)]
    pub no_polyline: bool,
    /// Rings and angles of the cross-section stress lattice.
    #[arg(long, num_args = 2, value_names = ["RINGS", "ANGLES"], default_values_t = [3, 8])]
    pub stress_grid: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Check,
    Project,
}

impl From<ModeArg> for OrthogonalityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Check => Self::Check,
            ModeArg::Project => Self::Project,
        }
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub skeleton: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Directory holding `arc_<i>.json` / `arc_<i>.csv` tube fields.
    #[arg(long, conflicts_with = "family")]
    pub fields: Option<PathBuf>,
    /// Synthetic family swept over `--delta`.
    #[arg(long, value_enum, required_unless_present = "fields")]
    pub family: Option<FamilyArg>,
    /// Comma-separated thicknesses.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05])]
    pub delta: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub radial: usize,
    #[arg(long, default_value_t = 8)]
    pub angular: usize,
    /// Also save the sampled synthetic fields under `<out>/fields_<k>/`.
    #[arg(long)]
    pub write_fields: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Extension,
    Bending,
    Torsion,
    Cartesian,
    Rigid,
}

impl FamilyArg {
    /// Small-amplitude representative of each family.
    pub fn family(self) -> FieldFamily {
        match self {
            Self::Extension => FieldFamily::Extension {
                strain: 1e-3,
                poisson: 0.3,
            },
            Self::Bending => FieldFamily::Bending {
                curvature: 1e-3,
                poisson: 0.3,
            },
            Self::Torsion => FieldFamily::Torsion {
                twist: 1e-3,
                warping: 0.0,
            },
            Self::Cartesian => FieldFamily::Cartesian {
                grad: [[1e-3, 2e-4, 0.0], [-3e-4, 0.0, 1e-4], [0.0, 2e-4, -1e-4]],
                bending: 1e-3,
                poisson: 0.3,
            },
            Self::Rigid => FieldFamily::Rigid {
                a: [1e-3, 0.0, 0.0],
                b: [0.0, 0.0, 1e-3],
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output directory of a previous `solve` or `decompose`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Exit code for an error: malformed or unreadable input is 2, anything else 1.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::Json(_) | Error::Io(_) | Error::InvalidInput(_) => EXIT_INPUT,
        _ => EXIT_FAILED,
    }
}

/// Cap the global rayon pool from [`THREADS_ENV`].
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV}={v} is not a positive integer")))?;
    // a pool may already exist when embedded; keep it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Run a parsed command and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    let out = match cli.command {
        Command::Validate(a) => cmd_validate(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Decompose(a) => cmd_decompose(&a),
        Command::Report(a) => cmd_report(&a),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Pretty JSON with a trailing newline; field order follows the types, so
/// identical inputs give identical bytes.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn read_skeleton(path: &Path) -> Result<SkeletonSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    SkeletonSpec::from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn build_skeleton(path: &Path) -> Result<Arc<Skeleton>> {
    Ok(Arc::new(read_skeleton(path)?.build()?))
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<i32> {
    let spec = read_skeleton(&a.skeleton)?;
    let report = match spec.build() {
        Ok(sk) => serde_json::to_value(sk.validate())?,
        // construction failures are reported like a failed check
        Err(e) if exit_code(&e) == EXIT_FAILED => serde_json::json!({
            "checks": [{ "name": "construction", "passed": false, "detail": e.to_string() }],
            "usable": false,
        }),
        Err(e) => return Err(e),
    };
    let failed: Vec<String> = report["checks"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|c| c["passed"] == false)
        .map(|c| format!("{}: {}", c["name"].as_str().unwrap_or("?"), c["detail"].as_str().unwrap_or("")))
        .collect();
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_json(&dir.join("validation.json"), &report)?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    for f in &failed {
        eprintln!("failed check {f}");
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_FAILED })
}

fn solver_config(a: &SolveArgs) -> Result<SolverConfig> {
    let mut config = match &a.config {
        Some(p) => SolverConfig::load(p)?,
        None => SolverConfig::default(),
    };
    if let Some(h) = a.h {
        config.h = h;
    }
    config.validate()?;
    Ok(config)
}

pub fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let skeleton = build_skeleton(&a.skeleton)?;
    let mut loads = LoadCase::load(&a.loads)?;
    if let Some(m) = a.mode {
        loads = loads.with_mode(m.into());
    }
    let config = solver_config(a)?;
    let material = Material::new(a.lambda, a.mu)?;
    let sol = solve(skeleton, &material, &loads, &config)?;
    export_solution(
        &sol,
        &a.out,
        ExportOptions {
            polyline: !a.no_polyline,
        },
    )?;
    let (rings, angles) = (a.stress_grid[0], a.stress_grid[1]);
    let mut w = std::io::BufWriter::new(std::fs::File::create(a.out.join("stress.csv"))?);
    use std::io::Write;
    writeln!(w, "arc,s,Y2,Y3,s11,s12,s13,s22,s23,s33")?;
    for p in stress_grid(&sol, rings, angles)? {
        let q = p.sigma;
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            p.arc, p.s, p.y2, p.y3, q[0][0], q[0][1], q[0][2], q[1][1], q[1][2], q[2][2]
        )?;
    }
    w.flush()?;
    let failures = sol.diagnostics.failures(&config);
    for f in &failures {
        eprintln!("tolerance not met: {f}");
    }
    println!(
        "solved {} elements; energies extensional {:.6e}, inextensional {:.6e}; written to {}",
        sol.mesh().elements().len(),
        sol.diagnostics.extensional.energy,
        sol.diagnostics.inextensional.energy,
        a.out.display()
    );
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_FAILED })
}

fn load_fields(skeleton: &Skeleton, dir: &Path) -> Result<Vec<TubeField>> {
    (0..skeleton.arcs.len())
        .map(|i| {
            TubeField::load(dir, &format!("arc_{i}")).map_err(|e| match e {
                Error::Io(io) => Error::Parse(format!("{}: arc_{i}: {io}", dir.display())),
                other => other,
            })
        })
        .collect()
}

pub fn cmd_decompose(a: &DecomposeArgs) -> Result<i32> {
    let skeleton = build_skeleton(&a.skeleton)?;
    std::fs::create_dir_all(&a.out)?;
    let report = match (&a.fields, a.family) {
        (Some(dir), _) => {
            let fields = load_fields(&skeleton, dir)?;
            EstimateReport::new(None, vec![estimate_row(&skeleton, &fields)?])
        }
        (None, Some(f)) => {
            let family = f.family();
            if a.write_fields {
                for (k, &delta) in a.delta.iter().enumerate() {
                    let dir = a.out.join(format!("fields_{k}"));
                    for geo in &skeleton.arcs {
                        family
                            .sample(geo, delta, a.radial, a.angular)?
                            .save(&dir, &format!("arc_{}", geo.id()))?;
                    }
                }
            }
            let opts = EstimateOptions {
                n_radial: a.radial,
                n_angular: a.angular,
            };
            estimate_report(&skeleton, family, &a.delta, opts)?
        }
        (None, None) => return Err(Error::InvalidInput("give --fields or --family".into())),
    };
    write_json(&a.out.join("estimates.json"), &report)?;
    for r in &report.rows {
        println!(
            "delta {:.4}  rod {:.3e} {:.3e}  structure {:.3e} {:.3e}",
            r.delta, r.rod_gradient_ratio, r.rod_l2_ratio, r.structure_gradient_ratio, r.structure_l2_ratio
        );
    }
    for c in &report.growing {
        eprintln!("ratio grows as the thickness decreases: {c}");
    }
    Ok(EXIT_OK)
}

fn number(v: &serde_json::Value) -> String {
    v.as_f64().map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into())
}

pub fn cmd_report(a: &ReportArgs) -> Result<i32> {
    let read = |name: &str| -> Result<Option<serde_json::Value>> {
        let p = a.out.join(name);
        if !p.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&p)?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
    };
    let summary = read("summary.json")?;
    let estimates = read("estimates.json")?;
    if summary.is_none() && estimates.is_none() {
        return Err(Error::Parse(format!(
            "{}: no summary.json or estimates.json",
            a.out.display()
        )));
    }
    let mut text = String::new();
    if let Some(s) = &summary {
        text += &format!(
            "{:<22}{}\n{:<22}{}\n{:<22}{}\n{:<22}{}\n",
            "young_modulus",
            number(&s["young"]),
            "elements",
            s["mesh"]["elements"],
            "energy_extensional",
            number(&s["energies"]["extensional"]),
            "energy_inextensional",
            number(&s["energies"]["inextensional"]),
        );
        for (part, keys) in [
            ("extensional", &["galerkin_residual", "orthogonality_defect"][..]),
            ("inextensional", &["saddle_residual", "collocation_residual", "knot_rigidity_defect"][..]),
        ] {
            for k in keys {
                text += &format!("{:<22}{}\n", k, number(&s["diagnostics"][part][k]));
            }
        }
        for k in s["knots"].as_array().into_iter().flatten() {
            text += &format!("{:<22}{}\n", format!("knot_{}_residual", k["knot"]), number(&k["relative"]));
        }
    }
    if let Some(e) = &estimates {
        text += "delta       rod_grad    rod_l2      struct_grad struct_l2   splitting\n";
        for r in e["rows"].as_array().into_iter().flatten() {
            text += &format!(
                "{:<12.4}{:<12}{:<12}{:<12}{:<12}{}\n",
                r["delta"].as_f64().unwrap_or(f64::NAN),
                short(&r["rod_gradient_ratio"]),
                short(&r["rod_l2_ratio"]),
                short(&r["structure_gradient_ratio"]),
                short(&r["structure_l2_ratio"]),
                short(&r["splitting_ratio"]),
            );
        }
        for g in e["growing"].as_array().into_iter().flatten() {
            text += &format!("growing: {}\n", g.as_str().unwrap_or("?"));
        }
    }
    print!("{text}");
    std::fs::write(a.out.join("report.txt"), &text)?;
    Ok(EXIT_OK)
}

fn short(v: &serde_json::Value) -> String {
    v.as_f64().map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
}
