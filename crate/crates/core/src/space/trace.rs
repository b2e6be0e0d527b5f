//! Values of fields and basis functions on the two sides of an edge.

use super::{edge_barycentric, DiscreteField, EdgeRule, ElementGeometry};
use crate::elasticity::{strain, stress, Material, Tensor2};
use crate::mesh::{Mesh, Point};

/// Traces of a discrete field at the quadrature points of one edge.
///
/// Index 0 is the left triangle, index 1 the right one (absent on the
/// boundary). The normal points out of the left triangle.
#[derive(Clone, Debug)]
pub struct TraceValues {
    pub edge: usize,
    pub normal: [f64; 2],
    pub length: f64,
    pub boundary: bool,
    /// Physical points and weights (weights sum to the edge length).
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub values: Vec<[[f64; 2]; 2]>,
    pub strains: Vec<[Tensor2; 2]>,
    pub stresses: Vec<[Tensor2; 2]>,
}

impl TraceValues {
    /// ⟦v⟧ = v_L ⊗ n_L + v_R ⊗ n_R, or v ⊗ n on the boundary.
    pub fn jump(&self, q: usize) -> Tensor2 {
        let [l, r] = self.values[q];
        if self.boundary {
            Tensor2::outer(l, self.normal)
        } else {
            Tensor2::outer([l[0] - r[0], l[1] - r[1]], self.normal)
        }
    }

    /// Vector jump v_L - v_R, or the trace itself on the boundary.
    pub fn vector_jump(&self, q: usize) -> [f64; 2] {
        let [l, r] = self.values[q];
        if self.boundary {
            l
        } else {
            [l[0] - r[0], l[1] - r[1]]
        }
    }

    fn average(&self, pair: [Tensor2; 2]) -> Tensor2 {
        if self.boundary {
            pair[0]
        } else {
            (pair[0] + pair[1]) * 0.5
        }
    }

    pub fn stress_average(&self, q: usize) -> Tensor2 {
        self.average(self.stresses[q])
    }

    pub fn strain_average(&self, q: usize) -> Tensor2 {
        self.average(self.strains[q])
    }

    /// Normal stress jump (σ_L - σ_R) n_L; the one-sided traction on the boundary.
    pub fn traction_jump(&self, q: usize) -> [f64; 2] {
        let [l, r] = self.stresses[q];
        if self.boundary {
            l.mul_vec(self.normal)
        } else {
            (l - r).mul_vec(self.normal)
        }
    }
}

/// Evaluates `u` on edge `e` using the given rule.
pub fn edge_traces(mesh: &Mesh, u: &DiscreteField, mat: &Material, e: usize, rule: &EdgeRule) -> TraceValues {
    let edge = &mesh.edges()[e];
    let [a, b] = mesh.edge_points(e);
    let sides: Vec<usize> = std::iter::once(edge.left).chain(edge.right).collect();
    let geoms: Vec<ElementGeometry> = sides.iter().map(|&t| ElementGeometry::new(mesh, t)).collect();
    let n = rule.len();
    let mut out = TraceValues {
        edge: e,
        normal: edge.normal,
        length: edge.length,
        boundary: edge.right.is_none(),
        points: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        strains: Vec::with_capacity(n),
        stresses: Vec::with_capacity(n),
    };
    for (&s, &w) in rule.points.iter().zip(&rule.weights) {
        out.points.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        out.weights.push(w * edge.length);
        let mut vals = [[0.0; 2]; 2];
        let mut eps = [Tensor2::ZERO; 2];
        let mut sig = [Tensor2::ZERO; 2];
        for (k, (&t, geom)) in sides.iter().zip(&geoms).enumerate() {
            let l = edge_barycentric(mesh, t, e, s);
            vals[k] = u.value(t, l);
            eps[k] = strain(u.gradient(geom, t, l));
            sig[k] = stress(eps[k], mat);
        }
        out.values.push(vals);
        out.strains.push(eps);
        out.stresses.push(sig);
    }
    out
}
