//! Nodal averaging onto continuous quadratic fields.

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::space::basis::NODES;
use crate::space::DiscreteField;

/// Continuous quadratic field stored by global node: the mesh vertices
/// first, then one midpoint per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformingField {
    mesh_id: u64,
    n_vertices: usize,
    values: Vec<[f64; 2]>,
}

/// Global node of local node `k` in triangle `t`.
pub fn global_node(mesh: &Mesh, t: usize, k: usize) -> usize {
    if k < 3 {
        mesh.triangles()[t].vertices[k]
    } else {
        mesh.n_vertices() + mesh.triangle_edges(t)[k - 3]
    }
}

/// Marks the nodes lying on the closure of the Dirichlet boundary.
pub fn dirichlet_nodes(mesh: &Mesh) -> Vec<bool> {
    let mut fixed = vec![false; mesh.n_vertices() + mesh.n_edges()];
    for e in mesh.edges_with_tag(BoundaryTag::Dirichlet) {
        let [a, b] = mesh.edges()[e].vertices;
        fixed[a] = true;
        fixed[b] = true;
        fixed[mesh.n_vertices() + e] = true;
    }
    fixed
}

impl ConformingField {
    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn vertex_value(&self, v: usize) -> [f64; 2] {
        self.values[v]
    }

    pub fn midpoint_value(&self, e: usize) -> [f64; 2] {
        self.values[self.n_vertices + e]
    }

    /// The same field in the discontinuous space.
    pub fn to_discrete(&self, mesh: &Mesh) -> Result<DiscreteField> {
        if mesh.id() != self.mesh_id {
            return Err(Error::MeshMismatch);
        }
        let mut c = vec![0.0; 12 * mesh.n_triangles()];
        for t in 0..mesh.n_triangles() {
            for k in 0..NODES.len() {
                let v = self.values[global_node(mesh, t, k)];
                c[12 * t + 2 * k] = v[0];
                c[12 * t + 2 * k + 1] = v[1];
            }
        }
        DiscreteField::from_coeffs(mesh, c)
    }
}

/// Averages the one-sided nodal values of `u` over the triangles sharing
/// each node; nodes on the Dirichlet boundary get zero.
pub fn enrich(mesh: &Mesh, u: &DiscreteField) -> Result<ConformingField> {
    u.check(mesh)?;
    let n = mesh.n_vertices() + mesh.n_edges();
    let mut sum = vec![[0.0; 2]; n];
    let mut count = vec![0u32; n];
    for t in 0..mesh.n_triangles() {
        let c = u.local(t);
        for k in 0..NODES.len() {
            let g = global_node(mesh, t, k);
            sum[g][0] += c[2 * k];
            sum[g][1] += c[2 * k + 1];
            count[g] += 1;
        }
    }
    let fixed = dirichlet_nodes(mesh);
    let values = sum
        .iter()
        .zip(&count)
        .zip(&fixed)
        .map(|((s, &k), &d)| {
            if d || k == 0 {
                [0.0; 2]
            } else {
                [s[0] / k as f64, s[1] / k as f64]
            }
        })
        .collect();
    Ok(ConformingField {
        mesh_id: mesh.id(),
        n_vertices: mesh.n_vertices(),
        values,
    })
}
