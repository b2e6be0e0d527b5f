#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Solution of `A U + BᵀΛ = F, BU ≤ G, Λ ≥ 0, Λ·(BU - G) = 0` found by
/// trying every active set with a dense KKT solve.
pub struct Enumerated {
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    pub active: Vec<bool>,
    /// Number of active sets that satisfy all conditions.
    pub n_feasible: usize,
}

pub fn enumerate_active_sets(a: &DMatrix<f64>, f: &[f64], b: &DMatrix<f64>, g: &[f64], tol: f64) -> Option<Enumerated> {
    let (n, m) = (a.nrows(), b.nrows());
    assert!(m <= 12, "too many constraints to enumerate");
    let mut found: Option<Enumerated> = None;
    let mut count = 0;
    for mask in 0u32..1 << m {
        let set: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = set.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(a);
        let mut rhs = DVector::zeros(n + k);
        rhs.rows_mut(0, n).copy_from_slice(f);
        for (r, &i) in set.iter().enumerate() {
            for j in 0..n {
                kkt[(n + r, j)] = b[(i, j)];
                kkt[(j, n + r)] = b[(i, j)];
            }
            rhs[n + r] = g[i];
        }
        let Some(x) = kkt.lu().solve(&rhs) else { continue };
        let u: Vec<f64> = x.rows(0, n).iter().copied().collect();
        let mut lambda = vec![0.0; m];
        for (r, &i) in set.iter().enumerate() {
            lambda[i] = x[n + r];
        }
        let bu = b * DVector::from_column_slice(&u);
        let scale = g.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let lscale = lambda.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let ok = (0..m).all(|i| bu[i] <= g[i] + tol * scale && lambda[i] >= -tol * lscale);
        if ok {
            count += 1;
            if found.is_none() {
                found = Some(Enumerated {
                    u,
                    lambda,
                    active: (0..m).map(|i| mask & (1 << i) != 0).collect(),
                    n_feasible: 0,
                });
            }
        }
    }
    found.map(|mut e| {
        e.n_feasible = count;
        e
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
