//! Solve, estimate, mark, refine.

use std::time::{Duration, Instant};

use super::{compute_estimators, doerfler_mark, EstimatorReport};
use crate::assembly::Method;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::problems::{compute_dg_error, DgError, ProblemSpec};
use crate::solver::{pdas_solve, recover_multiplier, MultiplierField, Solution, DEFAULT_MAXITER};
use crate::space::DofMap;

#[derive(Clone, Debug)]
pub struct AdaptiveOptions {
    pub method: Method,
    /// Defaults to the method's standard penalty for the material.
    pub penalty: Option<f64>,
    pub theta: f64,
    pub max_dofs: usize,
    /// Stop after this many solves even if the budget is not reached.
    pub max_iterations: Option<usize>,
    /// Cells per side of the initial mesh; the problem default when `None`.
    pub initial_n: Option<usize>,
    pub quad_degree: usize,
    pub pdas_maxiter: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            method: Method::Sipg,
            penalty: None,
            theta: 0.4,
            max_dofs: 200_000,
            max_iterations: None,
            initial_n: None,
            quad_degree: 8,
            pdas_maxiter: DEFAULT_MAXITER,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveStep {
    pub iteration: usize,
    pub mesh: Mesh,
    pub solution: Solution,
    pub multiplier: MultiplierField,
    pub report: EstimatorReport,
    /// Present when the problem has an exact solution.
    pub error: Option<DgError>,
    pub elapsed: Duration,
}

impl AdaptiveStep {
    pub fn n_dofs(&self) -> usize {
        DofMap::new(&self.mesh).n_dofs()
    }
}

/// Runs the adaptive loop. Every solve is recorded; the loop stops once the
/// refined mesh would exceed `max_dofs` or after `max_iterations` solves.
pub fn adaptive_loop(spec: &ProblemSpec, opts: &AdaptiveOptions) -> Result<Vec<AdaptiveStep>> {
    let penalty = opts.penalty.unwrap_or_else(|| opts.method.default_penalty(&spec.material));
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("marking fraction {} not in (0, 1]", opts.theta)));
    }
    let mut mesh = spec.initial_mesh(opts.initial_n.unwrap_or(spec.default_initial_n))?;
    let mut steps = Vec::new();
    loop {
        let start = Instant::now();
        let sys = spec.discretize(&mesh, opts.method, penalty, opts.quad_degree)?;
        let solution = pdas_solve(&mesh, &sys, None, opts.pdas_maxiter)?;
        let multiplier = recover_multiplier(&sys, &solution.u)?;
        let mut report =
            compute_estimators(&mesh, spec, &solution.u, &multiplier, &solution.partition, opts.quad_degree)?;
        let error = match spec.exact {
            Some(_) => {
                let e = compute_dg_error(&mesh, &solution.u, spec, opts.quad_degree)?;
                report.set_error(e.norm());
                Some(e)
            }
            None => None,
        };
        let iteration = steps.len();
        log::info!(
            "adaptive iteration {iteration}: {} dofs, estimator {:.4e}",
            DofMap::new(&mesh).n_dofs(),
            report.total()
        );
        let marked = doerfler_mark(&report.triangle_indicators(&mesh), opts.theta)?;
        let next = mesh.bisect(&marked);
        steps.push(AdaptiveStep {
            iteration,
            mesh,
            solution,
            multiplier,
            report,
            error,
            elapsed: start.elapsed(),
        });
        let done = opts.max_iterations.is_some_and(|m| steps.len() >= m)
            || marked.is_empty()
            || DofMap::new(&next).n_dofs() > opts.max_dofs;
        if done {
            break;
        }
        mesh = next;
    }
    Ok(steps)
}
