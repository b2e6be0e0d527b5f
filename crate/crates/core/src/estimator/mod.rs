//! Residual a posteriori estimation, marking and the adaptive loop.

mod adaptive;
mod enrich;
pub mod half_norm;
mod marking;

pub use adaptive::{adaptive_loop, AdaptiveOptions, AdaptiveStep};
pub use enrich::{dirichlet_nodes, enrich, global_node, ConformingField};
pub use half_norm::{h_half_norm_edge, Piece};
pub use marking::doerfler_mark;

use rayon::prelude::*;

use crate::error::Result;
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::problems::ProblemSpec;
use crate::solver::{ActiveSetPartition, MultiplierField};
use crate::space::{edge_traces, DiscreteField, EdgeRule, ElementGeometry, TriangleRule};

/// Squared estimator contributions. Edge quantities are indexed by edge and
/// are zero on edges where they do not apply; the complementarity and
/// penetration terms are indexed like the contact constraints.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimatorReport {
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub eta3: Vec<f64>,
    pub eta4: Vec<f64>,
    pub eta5: Vec<f64>,
    pub contact_edges: Vec<usize>,
    pub eta6: Vec<f64>,
    pub eta7: Vec<f64>,
    pub totals: [f64; 7],
    /// η_h / error, once an error is known.
    pub efficiency: Option<f64>,
}

impl EstimatorReport {
    pub fn total_sq(&self) -> f64 {
        self.totals.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.total_sq().max(0.0).sqrt()
    }

    pub fn set_error(&mut self, error: f64) {
        self.efficiency = Some(self.total() / error);
    }

    /// Per-triangle indicators for marking. Interior edge terms are split
    /// evenly between the two neighbours, boundary terms go to the owner.
    pub fn triangle_indicators(&self, mesh: &Mesh) -> Vec<f64> {
        let mut out = self.eta1.clone();
        for (e, edge) in mesh.edges().iter().enumerate() {
            let v = self.eta2[e] + self.eta3[e] + self.eta4[e] + self.eta5[e];
            match edge.right {
                Some(r) => {
                    out[edge.left] += 0.5 * v;
                    out[r] += 0.5 * v;
                }
                None => out[edge.left] += v,
            }
        }
        for (i, &e) in self.contact_edges.iter().enumerate() {
            out[mesh.edges()[e].left] += self.eta6[i].max(0.0) + self.eta7[i];
        }
        out
    }
}

fn norm_sq(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Quadratic through `(t0, v0)`, `((t0 + t1)/2, vm)`, `(t1, v1)`, in
/// monomial form in `t`, plus its coefficients in `ξ = t - t0`.
fn quadratic_through(t0: f64, t1: f64, v: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let h = t1 - t0;
    let c = 2.0 * (v[2] - 2.0 * v[1] + v[0]) / (h * h);
    let b = (v[2] - v[0]) / h - c * h;
    ([v[0] - b * t0 + c * t0 * t0, b - 2.0 * c * t0, c], [v[0], b, c])
}

/// Roots of `a0 + a1 ξ + a2 ξ²` strictly inside `(0, h)`, ascending.
fn interior_roots(local: [f64; 3], h: f64) -> Vec<f64> {
    let [a0, a1, a2] = local;
    let scale = a0.abs().max(a1.abs() * h).max(a2.abs() * h * h);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    if a2.abs() * h * h <= 1e-14 * scale {
        if a1 != 0.0 {
            roots.push(-a0 / a1);
        }
    } else {
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc >= 0.0 {
            let q = -0.5 * (a1 + a1.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(q / a2);
                roots.push(a0 / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    let tol = 1e-12 * h;
    roots.retain(|&r| r > tol && r < h - tol);
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
    roots
}

/// Penetration function `w = E_h u·n_c - gap` on a contact edge, split at
/// gap kinks and at its sign changes. Pieces are in arc length from the
/// first edge vertex.
fn penetration_pieces(mesh: &Mesh, spec: &ProblemSpec, eh: &ConformingField, e: usize) -> Vec<Piece> {
    let edge = &mesh.edges()[e];
    let [pa, pb] = mesh.edge_points(e);
    let n = spec.contact_normal();
    let len = edge.length;
    let ua = eh.vertex_value(edge.vertices[0]);
    let ub = eh.vertex_value(edge.vertices[1]);
    let um = eh.midpoint_value(e);
    let point = |s: f64| -> Point { [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])] };
    let w = |s: f64| {
        let (fa, fb, fm) = ((1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s));
        let u = [fa * ua[0] + fb * ub[0] + fm * um[0], fa * ua[1] + fb * ub[1] + fm * um[1]];
        u[0] * n[0] + u[1] * n[1] - (spec.gap)(point(s))
    };

    let mut breaks = vec![0.0, 1.0];
    for k in &spec.gap_kinks {
        let d = [k[0] - pa[0], k[1] - pa[1]];
        let s = (d[0] * (pb[0] - pa[0]) + d[1] * (pb[1] - pa[1])) / (len * len);
        let off = (d[0] * edge.normal[0] + d[1] * edge.normal[1]).abs();
        if off <= 1e-12 && s > 1e-12 && s < 1.0 - 1e-12 {
            breaks.push(s);
        }
    }
    breaks.sort_by(f64::total_cmp);

    let mut pieces = Vec::new();
    for win in breaks.windows(2) {
        let (s0, s1) = (win[0], win[1]);
        let (t0, t1) = (s0 * len, s1 * len);
        let (global, local) = quadratic_through(t0, t1, [w(s0), w(0.5 * (s0 + s1)), w(s1)]);
        let mut cuts = vec![t0];
        cuts.extend(interior_roots(local, t1 - t0).into_iter().map(|r| t0 + r));
        cuts.push(t1);
        for c in cuts.windows(2) {
            pieces.push(Piece::new(c[0], c[1], global.to_vec()));
        }
    }
    pieces
}

fn positive_part(pieces: &[Piece]) -> Vec<Piece> {
    pieces
        .iter()
        .map(|p| {
            if p.eval(0.5 * (p.start + p.end)) > 0.0 {
                p.clone()
            } else {
                Piece::new(p.start, p.end, vec![0.0])
            }
        })
        .collect()
}

/// `∫ min(w, 0)` over the pieces, exact for quadratics.
fn negative_integral(pieces: &[Piece]) -> f64 {
    let rule = EdgeRule::gauss(2);
    pieces
        .iter()
        .filter(|p| p.eval(0.5 * (p.start + p.end)) < 0.0)
        .map(|p| {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(&s, &w)| w * p.len() * p.eval(p.start + s * p.len()))
                .sum::<f64>()
        })
        .sum()
}

/// Evaluates all seven estimator contributions for the discrete solution
/// `u` with multiplier `lambda` and the contact partition of the solve.
/// Data integrals use rules exact to `degree`.
pub fn compute_estimators(
    mesh: &Mesh,
    spec: &ProblemSpec,
    u: &DiscreteField,
    lambda: &MultiplierField,
    partition: &ActiveSetPartition,
    degree: usize,
) -> Result<EstimatorReport> {
    u.check(mesh)?;
    let mat = &spec.material;
    let trule = TriangleRule::new(degree);
    let erule = EdgeRule::for_degree(degree);

    let eta1: Vec<f64> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let geom = ElementGeometry::new(mesh, t);
            let div = u.stress_divergence(&geom, t, mat);
            let h = mesh.diameter(t);
            let integral: f64 = trule
                .points
                .iter()
                .zip(&trule.weights)
                .map(|(l, w)| {
                    let f = (spec.force)(geom.map(*l));
                    2.0 * geom.area * w * norm_sq([f[0] + div[0], f[1] + div[1]])
                })
                .sum();
            h * h * integral
        })
        .collect();

    let constraint_of: std::collections::HashMap<usize, usize> =
        lambda.edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

    let edge_terms: Vec<[f64; 4]> = (0..mesh.n_edges())
        .into_par_iter()
        .map(|e| {
            let edge = &mesh.edges()[e];
            let tr = edge_traces(mesh, u, mat, e, &erule);
            let h = edge.length;
            let mut out = [0.0; 4];
            for q in 0..tr.points.len() {
                let (x, w) = (tr.points[q], tr.weights[q]);
                let sn = tr.traction_jump(q);
                match edge.tag {
                    BoundaryTag::Interior => {
                        out[0] += w * h * norm_sq(sn);
                        out[3] += w / h * norm_sq(tr.vector_jump(q));
                    }
                    BoundaryTag::Neumann => {
                        out[1] += w * h * norm_sq(sub((spec.traction)(x, edge.normal), sn));
                    }
                    BoundaryTag::Contact => {
                        let l = constraint_of.get(&e).map_or([0.0; 2], |&i| lambda.vector(i));
                        out[2] += w * h * norm_sq([l[0] + sn[0], l[1] + sn[1]]);
                    }
                    BoundaryTag::Dirichlet => {
                        out[3] += w / h * norm_sq(sub(tr.vector_jump(q), (spec.dirichlet)(x)));
                    }
                }
            }
            out
        })
        .collect();

    let eh = enrich(mesh, u)?;
    let contact: Vec<(f64, f64)> = lambda
        .edges
        .par_iter()
        .enumerate()
        .map(|(i, &e)| {
            let pieces = penetration_pieces(mesh, spec, &eh, e);
            let eta6 = if partition.is_contact(i) {
                -lambda.normal_part[i] * negative_integral(&pieces)
            } else {
                0.0
            };
            (eta6, h_half_norm_edge(&positive_part(&pieces)))
        })
        .collect();

    let mut report = EstimatorReport {
        eta2: edge_terms.iter().map(|v| v[0]).collect(),
        eta3: edge_terms.iter().map(|v| v[1]).collect(),
        eta4: edge_terms.iter().map(|v| v[2]).collect(),
        eta5: edge_terms.iter().map(|v| v[3]).collect(),
        eta1,
        contact_edges: lambda.edges.clone(),
        eta6: contact.iter().map(|c| c.0).collect(),
        eta7: contact.iter().map(|c| c.1).collect(),
        totals: [0.0; 7],
        efficiency: None,
    };
    let parts = [
        &report.eta1,
        &report.eta2,
        &report.eta3,
        &report.eta4,
        &report.eta5,
        &report.eta6,
        &report.eta7,
    ];
    for (total, part) in report.totals.iter_mut().zip(parts) {
        *total = part.iter().sum();
    }
    Ok(report)
}
