//! Shared fixtures for the benchmarks.

use signorini_dg::problems::{model_problem_1, model_problem_2};
use signorini_dg::solver::{pdas_solve, ComplementaritySystem, Solution, DEFAULT_MAXITER};
use signorini_dg::{Mesh, Method, ProblemSpec};

pub struct Fixture {
    pub spec: ProblemSpec,
    pub mesh: Mesh,
    pub method: Method,
    pub penalty: f64,
}

impl Fixture {
    /// First model problem on an `n x n` mesh with SIPG.
    pub fn foundation(n: usize) -> Self {
        let spec = model_problem_1();
        let mesh = spec.initial_mesh(n).expect("valid mesh");
        Self { spec, mesh, method: Method::Sipg, penalty: 70.0 }
    }

    /// Wedge problem on an `n x n` mesh with NIPG at the default penalty.
    pub fn wedge(n: usize) -> Self {
        let spec = model_problem_2();
        let mesh = spec.initial_mesh(n).expect("valid mesh");
        let penalty = Method::Nipg.default_penalty(&spec.material);
        Self { spec, mesh, method: Method::Nipg, penalty }
    }

    pub fn system(&self) -> ComplementaritySystem {
        self.spec.discretize(&self.mesh, self.method, self.penalty, 8).expect("discretization")
    }

    pub fn solve(&self, sys: &ComplementaritySystem) -> Solution {
        pdas_solve(&self.mesh, sys, None, DEFAULT_MAXITER).expect("solve")
    }
}
