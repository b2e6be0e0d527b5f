//! Primal-dual active set solver for the discrete contact problem and
//! recovery of the contact multiplier.
//!
//! The operator is factored once. With `Z = A⁻¹Bᵀ` and `y = A⁻¹F`, every
//! active set `S` reduces to the small dense system
//! `(B_S Z_S) Λ_S = B_S y - G_S`, followed by `U = y - Z_S Λ_S`.

use nalgebra::{DMatrix, DVector};

use crate::assembly::{ConstraintSystem, SparseOperator};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::mesh::Mesh;
use crate::space::{DiscreteField, LOCAL_DOFS};

pub const DEFAULT_MAXITER: usize = 50;

/// Operator, load, constraints and the active-set scaling `c`.
#[derive(Clone, Debug)]
pub struct ComplementaritySystem {
    pub operator: SparseOperator,
    pub load: Vec<f64>,
    pub constraints: ConstraintSystem,
    pub scaling: f64,
}

impl ComplementaritySystem {
    /// Uses `c = 1e3 · max diag(A)`.
    pub fn new(operator: SparseOperator, load: Vec<f64>, constraints: ConstraintSystem) -> Self {
        let scaling = 1e3 * operator.matrix.max_diagonal();
        Self {
            operator,
            load,
            constraints,
            scaling,
        }
    }

    /// `F - A U`.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let au = self.operator.matrix.mul_vec(u);
        self.load.iter().zip(&au).map(|(f, a)| f - a).collect()
    }
}

/// Contact edges split into the discrete contact set and its complement.
/// Entries are indices into the constraint list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActiveSetPartition {
    pub contact: Vec<usize>,
    pub free: Vec<usize>,
}

impl ActiveSetPartition {
    pub fn from_flags(active: &[bool]) -> Self {
        let mut p = Self::default();
        for (i, &a) in active.iter().enumerate() {
            if a {
                p.contact.push(i);
            } else {
                p.free.push(i);
            }
        }
        p
    }

    pub fn is_contact(&self, i: usize) -> bool {
        self.contact.binary_search(&i).is_ok()
    }
}

/// Raw output of the active set iteration.
#[derive(Clone, Debug)]
pub struct PdasOutcome {
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    pub active: Vec<bool>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: DiscreteField,
    /// Λ per contact edge, in constraint order.
    pub multipliers: Vec<f64>,
    pub partition: ActiveSetPartition,
    pub iterations: usize,
}

fn active_list(active: &[bool]) -> Vec<usize> {
    active.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i).collect()
}

/// Active set loop given `y = A⁻¹F`, the columns `z_i = A⁻¹B_iᵀ`, and the
/// constraint rows through `brow(i, x) = B_i x`.
fn pdas_iterate(
    y: &[f64],
    z: &[Vec<f64>],
    brow: &dyn Fn(usize, &[f64]) -> f64,
    gaps: &[f64],
    c: f64,
    u0: &[f64],
    maxiter: usize,
) -> Result<PdasOutcome> {
    let m = gaps.len();
    let by: Vec<f64> = (0..m).map(|i| brow(i, y)).collect();
    let mut lambda = vec![0.0; m];
    let mut active: Vec<bool> = (0..m).map(|i| c * (brow(i, u0) - gaps[i]) > 0.0).collect();
    let mut previous: Vec<bool> = Vec::new();
    for iter in 1..=maxiter {
        let set = active_list(&active);
        let k = set.len();
        let mut u = y.to_vec();
        lambda.iter_mut().for_each(|l| *l = 0.0);
        if k > 0 {
            let s = DMatrix::from_fn(k, k, |r, q| brow(set[r], &z[set[q]]));
            let rhs = DVector::from_fn(k, |r, _| by[set[r]] - gaps[set[r]]);
            let sol = s
                .lu()
                .solve(&rhs)
                .filter(|v| v.iter().all(|x| x.is_finite()))
                .ok_or_else(|| Error::SingularSaddle { active: set.clone() })?;
            for (r, &i) in set.iter().enumerate() {
                lambda[i] = sol[r];
                for (uj, zj) in u.iter_mut().zip(&z[i]) {
                    *uj -= sol[r] * zj;
                }
            }
        }
        let next: Vec<bool> = (0..m).map(|i| lambda[i] + c * (brow(i, &u) - gaps[i]) > 0.0).collect();
        log::debug!(
            "pdas iteration {iter}: active {k}/{m}, next {}",
            next.iter().filter(|&&a| a).count()
        );
        if next == active {
            return Ok(PdasOutcome {
                u,
                lambda,
                active,
                iterations: iter,
            });
        }
        previous = std::mem::replace(&mut active, next);
    }
    Err(Error::ActiveSetCycle {
        iterations: maxiter,
        previous: active_list(&previous),
        last: active_list(&active),
    })
}

/// Active set solve of `min ½UᵀAU - FᵀU` style complementarity problems
/// with small dense data: `A U + BᵀΛ = F`, `B U ≤ G`, `Λ ≥ 0`.
pub fn pdas_dense(
    a: &DMatrix<f64>,
    f: &[f64],
    b: &DMatrix<f64>,
    g: &[f64],
    c: f64,
    maxiter: usize,
) -> Result<PdasOutcome> {
    let lu = a.clone().lu();
    let solve = |r: DVector<f64>| lu.solve(&r).ok_or(Error::SingularMatrix(0));
    let y: Vec<f64> = solve(DVector::from_column_slice(f))?.iter().copied().collect();
    let z: Vec<Vec<f64>> = (0..b.nrows())
        .map(|i| solve(b.row(i).transpose()).map(|v| v.iter().copied().collect()))
        .collect::<Result<_>>()?;
    let brow = |i: usize, x: &[f64]| b.row(i).iter().zip(x).map(|(p, q)| p * q).sum();
    pdas_iterate(&y, &z, &brow, g, c, &y, maxiter)
}

/// Solves the discrete contact problem. The iteration starts from `u0`
/// (the unconstrained solution when `None`) with zero multipliers.
pub fn pdas_solve(
    mesh: &Mesh,
    sys: &ComplementaritySystem,
    u0: Option<&DiscreteField>,
    maxiter: usize,
) -> Result<Solution> {
    if let Some(u0) = u0 {
        u0.check(mesh)?;
    }
    let lu = sys.operator.matrix.factor()?;
    let y = lu.solve(&sys.load);
    let cons = &sys.constraints;
    let cols: Vec<Vec<f64>> = (0..cons.len()).map(|i| cons.row_vector(i)).collect();
    let z = lu.solve_many(&cols);
    let brow = |i: usize, x: &[f64]| cons.row_dot(i, x);
    let start = u0.map_or(y.as_slice(), |u| u.coeffs());
    let out = pdas_iterate(&y, &z, &brow, &cons.gaps, sys.scaling, start, maxiter)?;
    log::info!(
        "pdas converged in {} iterations, {} of {} contact edges active",
        out.iterations,
        out.active.iter().filter(|&&a| a).count(),
        cons.len()
    );
    Ok(Solution {
        u: DiscreteField::from_coeffs(mesh, out.u)?,
        multipliers: out.lambda,
        partition: ActiveSetPartition::from_flags(&out.active),
        iterations: out.iterations,
    })
}

/// Piecewise constant multiplier on the contact edges in the contact frame:
/// `λ_h|_e = λ¹ n_c + λ² τ_c` with `τ_c` the normal rotated by +90°.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierField {
    pub normal: [f64; 2],
    pub edges: Vec<usize>,
    pub normal_part: Vec<f64>,
    pub tangential_part: Vec<f64>,
}

impl MultiplierField {
    pub fn tangent(&self) -> [f64; 2] {
        [-self.normal[1], self.normal[0]]
    }

    pub fn vector(&self, i: usize) -> [f64; 2] {
        let (n, t) = (self.normal, self.tangent());
        let (a, b) = (self.normal_part[i], self.tangential_part[i]);
        [a * n[0] + b * t[0], a * n[1] + b * t[1]]
    }

    pub fn zeros(cons: &ConstraintSystem) -> Self {
        Self {
            normal: cons.normal,
            edges: cons.edges.clone(),
            normal_part: vec![0.0; cons.len()],
            tangential_part: vec![0.0; cons.len()],
        }
    }
}

/// Coefficients of the field equal to the constant vector `v` on the
/// triangle owning contact edge `i` and zero elsewhere.
fn constant_on_owner(cons: &ConstraintSystem, i: usize, v: [f64; 2]) -> (usize, [f64; LOCAL_DOFS]) {
    let mut c = [0.0; LOCAL_DOFS];
    for node in 0..6 {
        c[2 * node] = v[0];
        c[2 * node + 1] = v[1];
    }
    (cons.row_offset(i), c)
}

/// Multiplier from the residual `L(v) - A_h(u, v)` tested with constant
/// fields on each contact triangle. Fails if the residual on a contact
/// triangle is not a multiple of the constraint row, which would mean `u`
/// does not solve the discrete problem.
pub fn recover_multiplier(sys: &ComplementaritySystem, u: &DiscreteField) -> Result<MultiplierField> {
    let cons = &sys.constraints;
    let r = sys.residual(u.coeffs());
    let scale = norm2(&sys.load).max(norm2(&sys.operator.matrix.mul_vec(u.coeffs()))).max(f64::MIN_POSITIVE);
    let tol = 1e-8 * scale;
    let mut field = MultiplierField::zeros(cons);
    let tangent = field.tangent();
    for i in 0..cons.len() {
        let h = cons.lengths[i];
        let (off, vn) = constant_on_owner(cons, i, cons.normal);
        let (_, vt) = constant_on_owner(cons, i, tangent);
        let local = &r[off..off + LOCAL_DOFS];
        let lam = dot(local, &vn) / h;
        let tang = dot(local, &vt);
        if tang.abs() > tol {
            return Err(Error::MultiplierMismatch {
                edge: cons.edges[i],
                detail: format!("tangential residual {tang:.3e}"),
            });
        }
        let mismatch = local
            .iter()
            .zip(&cons.rows[i])
            .map(|(a, b)| (a - lam * b).abs())
            .fold(0.0, f64::max);
        if mismatch > tol {
            return Err(Error::MultiplierMismatch {
                edge: cons.edges[i],
                detail: format!("residual differs from λ B_e by {mismatch:.3e}"),
            });
        }
        field.normal_part[i] = lam;
    }
    Ok(field)
}

/// Removes the contact-edge mean of the normal trace on every contact edge:
/// `v -= (B_e v / h_e) n_c` on the owning triangle.
pub fn project_to_vq(cons: &ConstraintSystem, v: &mut [f64]) {
    for i in 0..cons.len() {
        let mean = cons.row_dot(i, v) / cons.lengths[i];
        let (off, c) = constant_on_owner(cons, i, cons.normal);
        for k in 0..LOCAL_DOFS {
            v[off + k] -= mean * c[k];
        }
    }
}

/// Largest normalized Galerkin residual `|L(v) - A_h(u, v)| / (‖F‖ ‖v‖)`
/// over the given fields after projecting them onto V_Q.
pub fn galerkin_residual_check(sys: &ComplementaritySystem, u: &DiscreteField, fields: &[DiscreteField]) -> f64 {
    let r = sys.residual(u.coeffs());
    let fnorm = norm2(&sys.load).max(f64::MIN_POSITIVE);
    fields
        .iter()
        .map(|v| {
            let mut w = v.coeffs().to_vec();
            project_to_vq(&sys.constraints, &mut w);
            let n = norm2(&w);
            if n == 0.0 {
                0.0
            } else {
                dot(&r, &w).abs() / (fnorm * n)
            }
        })
        .fold(0.0, f64::max)
}
