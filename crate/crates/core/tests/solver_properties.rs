mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{enumerate_active_sets, max_abs, max_abs_diff};
use signorini_dg::problems::{model_problem_1, model_problem_2};
use signorini_dg::solver::{galerkin_residual_check, pdas_dense, pdas_solve, project_to_vq, recover_multiplier};
use signorini_dg::{DiscreteField, Mesh, Method, ProblemSpec};

fn random_field(mesh: &Mesh, rng: &mut ChaCha8Rng) -> DiscreteField {
    let c = (0..12 * mesh.n_triangles()).map(|_| rng.random_range(-1.0..1.0)).collect();
    DiscreteField::from_coeffs(mesh, c).unwrap()
}

fn problem(second: bool) -> ProblemSpec {
    if second {
        model_problem_2()
    } else {
        model_problem_1()
    }
}

fn method(nipg: bool) -> Method {
    if nipg {
        Method::Nipg
    } else {
        Method::Sipg
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solution_satisfies_galerkin_and_complementarity(
        seed in any::<u64>(),
        second in any::<bool>(),
        nipg in any::<bool>(),
        n in 2usize..7,
        marks in prop::collection::vec(any::<prop::sample::Index>(), 0..4),
    ) {
        let spec = problem(second);
        let m = method(nipg);
        let mesh = spec.initial_mesh(n).unwrap();
        let marked: Vec<usize> = marks.iter().map(|i| i.index(mesh.n_triangles())).collect();
        let mesh = mesh.bisect(&marked);
        let sys = spec.discretize(&mesh, m, m.default_penalty(&spec.material), 8).unwrap();
        let sol = pdas_solve(&mesh, &sys, None, 50).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields: Vec<DiscreteField> = (0..20).map(|_| random_field(&mesh, &mut rng)).collect();
        prop_assert!(galerkin_residual_check(&sys, &sol.u, &fields) <= 1e-9);

        // projected fields really lie in V_Q
        let mut w = fields[0].coeffs().to_vec();
        project_to_vq(&sys.constraints, &mut w);
        prop_assert!(max_abs(&sys.constraints.apply(&w)) < 1e-13);

        let cons = &sys.constraints;
        let bu = cons.apply(sol.u.coeffs());
        let gscale = 1.0 + max_abs(&cons.gaps);
        let lscale = 1.0 + max_abs(&sol.multipliers);
        prop_assert!(cons.is_admissible(sol.u.coeffs(), 1e-10 * gscale));
        for i in 0..cons.len() {
            prop_assert!(sol.multipliers[i] >= -1e-10 * lscale);
            prop_assert!((sol.multipliers[i] * (bu[i] - cons.gaps[i])).abs() <= 1e-10 * lscale * gscale);
            if !sol.partition.is_contact(i) {
                prop_assert_eq!(sol.multipliers[i], 0.0);
            }
        }

        let lam = recover_multiplier(&sys, &sol.u).unwrap();
        for i in 0..cons.len() {
            prop_assert!((lam.normal_part[i] - sol.multipliers[i]).abs() <= 1e-8 * lscale);
            prop_assert_eq!(lam.tangential_part[i], 0.0);
            if !sol.partition.is_contact(i) {
                prop_assert!(lam.normal_part[i].abs() <= 1e-8 * lscale);
            }
        }
    }

    /// Random small contact problems with a coercive, possibly nonsymmetric matrix.
    #[test]
    fn dense_active_set_matches_enumeration(seed in any::<u64>(), n in 2usize..9, m in 1usize..6, sym in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let skew = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mut a = &r * r.transpose() + DMatrix::identity(n, n) * 0.5;
        if !sym {
            a += &skew - skew.transpose();
        }
        let b = DMatrix::from_fn(m.min(n), n, |_, _| rng.random_range(-1.0..1.0));
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g: Vec<f64> = (0..b.nrows()).map(|_| rng.random_range(-0.5..0.5)).collect();

        let out = pdas_dense(&a, &f, &b, &g, 1e3 * a.diagonal().max(), 100);
        let oracle = enumerate_active_sets(&a, &f, &b, &g, 1e-10).unwrap();
        prop_assert_eq!(oracle.n_feasible, 1);
        // the active set method may cycle on adversarial data; when it
        // returns, it must return the unique solution
        if let Ok(out) = out {
            prop_assert!(max_abs_diff(&out.u, &oracle.u) <= 1e-9 * (1.0 + max_abs(&oracle.u)));
            prop_assert!(max_abs_diff(&out.lambda, &oracle.lambda) <= 1e-9 * (1.0 + max_abs(&oracle.lambda)));
        }
    }
}

#[test]
fn sparse_and_dense_active_set_agree() {
    for spec in [model_problem_1(), model_problem_2()] {
        for m in [Method::Sipg, Method::Nipg] {
            let mesh = spec.initial_mesh(4).unwrap();
            let sys = spec.discretize(&mesh, m, m.default_penalty(&spec.material), 8).unwrap();
            let sparse = pdas_solve(&mesh, &sys, None, 50).unwrap();
            let cons = &sys.constraints;
            let b = DMatrix::from_fn(cons.len(), cons.n_dofs(), |i, j| cons.row_vector(i)[j]);
            let dense = pdas_dense(&sys.operator.matrix.to_dense(), &sys.load, &b, &cons.gaps, sys.scaling, 50).unwrap();
            assert!(max_abs_diff(sparse.u.coeffs(), &dense.u) <= 1e-10 * max_abs(&dense.u));
            assert_eq!(sparse.partition.contact.len(), dense.active.iter().filter(|&&a| a).count());
        }
    }
}

#[test]
fn warm_start_gives_the_same_solution() {
    let spec = model_problem_2();
    let m = Method::Nipg;
    let coarse = spec.initial_mesh(4).unwrap();
    let sys = spec.discretize(&coarse, m, m.default_penalty(&spec.material), 8).unwrap();
    let cold = pdas_solve(&coarse, &sys, None, 50).unwrap();
    let warm = pdas_solve(&coarse, &sys, Some(&cold.u), 50).unwrap();
    assert_eq!(warm.iterations, 1);
    assert!(max_abs_diff(cold.u.coeffs(), warm.u.coeffs()) <= 1e-12 * max_abs(cold.u.coeffs()));
}
