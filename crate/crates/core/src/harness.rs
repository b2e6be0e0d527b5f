//! Convergence studies and tabular output.

use std::path::Path;
use std::time::Instant;

use serde::Deserialize;

use crate::assembly::Method;
use crate::error::{Error, Result};
use crate::estimator::{adaptive_loop, compute_estimators, AdaptiveOptions};
use crate::mesh::Mesh;
use crate::problems::{compute_dg_error, ProblemSpec};
use crate::solver::{pdas_solve, recover_multiplier, DEFAULT_MAXITER};
use crate::space::DofMap;

pub const CSV_HEADER: [&str; 17] = [
    "run", "level", "h", "ndofs", "error", "eoc", "eta1sq", "eta2sq", "eta3sq", "eta4sq", "eta5sq", "eta6sq",
    "eta7sq", "eta_total", "eff_index", "pdas_iters", "wall_ms",
];

/// One solve of a study.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run: String,
    /// Refinement level (uniform) or iteration (adaptive).
    pub level: usize,
    /// Cell width of uniform meshes.
    pub h: Option<f64>,
    pub ndofs: usize,
    pub error: Option<f64>,
    pub eoc: Option<f64>,
    pub eta_sq: [f64; 7],
    pub eta_total: f64,
    pub eff_index: Option<f64>,
    pub pdas_iters: usize,
    pub wall_ms: f64,
}

/// Records of a study together with the meshes they were computed on.
#[derive(Clone, Debug, Default)]
pub struct Study {
    pub records: Vec<RunRecord>,
    pub meshes: Vec<Mesh>,
}

/// log₂ of successive error ratios; `None` where undefined.
pub fn eoc(errors: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for k in 1..errors.len() {
        if let (Some(a), Some(b)) = (errors[k - 1], errors[k]) {
            if a > 0.0 && b > 0.0 {
                out[k] = Some((a / b).log2());
            }
        }
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn run_label(spec: &ProblemSpec, method: Method, strategy: &str) -> String {
    format!("{}-{}-{}", spec.name, method, strategy)
}

/// Solves on the unit square meshes with cell width `2⁻ᵏ`, `k = 1..=levels`.
/// Errors are recorded when the problem has an exact solution.
pub fn run_convergence_study(
    spec: &ProblemSpec,
    method: Method,
    penalty: Option<f64>,
    levels: usize,
    quad_degree: usize,
) -> Result<Study> {
    if levels == 0 {
        return Err(Error::InvalidParameter("at least one level is needed".into()));
    }
    let penalty = penalty.unwrap_or_else(|| method.default_penalty(&spec.material));
    let run = run_label(spec, method, "uniform");
    let mut study = Study::default();
    let mut mesh = spec.initial_mesh(1)?;
    for level in 1..=levels {
        mesh = mesh.uniform_refine();
        let start = Instant::now();
        let sys = spec.discretize(&mesh, method, penalty, quad_degree)?;
        let sol = pdas_solve(&mesh, &sys, None, DEFAULT_MAXITER)?;
        let lambda = recover_multiplier(&sys, &sol.u)?;
        let mut report = compute_estimators(&mesh, spec, &sol.u, &lambda, &sol.partition, quad_degree)?;
        let error = match spec.exact {
            Some(_) => {
                let e = compute_dg_error(&mesh, &sol.u, spec, quad_degree)?;
                log::info!(
                    "level {level}: error {:.4e}, with strain averages {:.4e}",
                    e.norm(),
                    e.full_norm()
                );
                report.set_error(e.norm());
                Some(e.norm())
            }
            None => None,
        };
        study.records.push(RunRecord {
            run: run.clone(),
            level,
            h: Some(0.5f64.powi(level as i32)),
            ndofs: DofMap::new(&mesh).n_dofs(),
            error,
            eoc: None,
            eta_sq: report.totals,
            eta_total: report.total(),
            eff_index: report.efficiency,
            pdas_iters: sol.iterations,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        study.meshes.push(mesh.clone());
    }
    let errors: Vec<Option<f64>> = study.records.iter().map(|r| r.error).collect();
    for (r, e) in study.records.iter_mut().zip(eoc(&errors)) {
        r.eoc = e;
    }
    Ok(study)
}

/// Adaptive study; one record per solve.
pub fn run_adaptive(spec: &ProblemSpec, opts: &AdaptiveOptions) -> Result<Study> {
    let run = run_label(spec, opts.method, "adaptive");
    let steps = adaptive_loop(spec, opts)?;
    let mut study = Study::default();
    for s in steps {
        study.records.push(RunRecord {
            run: run.clone(),
            level: s.iteration,
            h: None,
            ndofs: s.n_dofs(),
            error: s.error.map(|e| e.norm()),
            eoc: None,
            eta_sq: s.report.totals,
            eta_total: s.report.total(),
            eff_index: s.report.efficiency,
            pdas_iters: s.solution.iterations,
            wall_ms: s.elapsed.as_secs_f64() * 1e3,
        });
        study.meshes.push(s.mesh);
    }
    Ok(study)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.display().to_string(),
            source,
        },
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

/// Writes the records as CSV to any writer.
pub fn write_results<W: std::io::Write>(records: &[RunRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let mut row = vec![
            r.run.clone(),
            r.level.to_string(),
            fmt_opt(r.h),
            r.ndofs.to_string(),
            fmt_opt(r.error),
            fmt_opt(r.eoc),
        ];
        row.extend(r.eta_sq.iter().map(|&v| fmt(v)));
        row.extend([
            fmt(r.eta_total),
            fmt_opt(r.eff_index),
            r.pdas_iters.to_string(),
            format!("{:.3}", r.wall_ms),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_results(records: &[RunRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_results(records, file).map_err(|e| csv_err(path, e))
}

/// Writes `level_NNN.mesh` files into `dir`, creating it if needed.
pub fn emit_meshes(study: &Study, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    for (r, m) in study.records.iter().zip(&study.meshes) {
        m.write_text(&dir.join(format!("level_{:03}.mesh", r.level)))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct Row {
    run: String,
    level: usize,
    h: Option<f64>,
    ndofs: usize,
    error: Option<f64>,
    eoc: Option<f64>,
    eta1sq: f64,
    eta2sq: f64,
    eta3sq: f64,
    eta4sq: f64,
    eta5sq: f64,
    eta6sq: f64,
    eta7sq: f64,
    eta_total: f64,
    eff_index: Option<f64>,
    pdas_iters: usize,
    wall_ms: f64,
}

/// Reads records back from CSV text.
pub fn parse_results(text: &str) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    rdr.deserialize::<Row>()
        .map(|row| {
            let r = row.map_err(|e| Error::Parse(e.to_string()))?;
            Ok(RunRecord {
                run: r.run,
                level: r.level,
                h: r.h,
                ndofs: r.ndofs,
                error: r.error,
                eoc: r.eoc,
                eta_sq: [r.eta1sq, r.eta2sq, r.eta3sq, r.eta4sq, r.eta5sq, r.eta6sq, r.eta7sq],
                eta_total: r.eta_total,
                eff_index: r.eff_index,
                pdas_iters: r.pdas_iters,
                wall_ms: r.wall_ms,
            })
        })
        .collect()
}
