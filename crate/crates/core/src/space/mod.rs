//! Discontinuous vector-valued quadratic finite elements.
//!
//! Every triangle owns 12 degrees of freedom: six scalar Lagrange nodes
//! times two displacement components. The numbering is interleaved, node
//! major and component minor: `12 t + 2 node + component`.

pub mod basis;
pub mod quadrature;
mod trace;

pub use quadrature::{EdgeRule, TriangleRule};
pub use trace::{edge_traces, TraceValues};

use crate::elasticity::{strain, Tensor2};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

pub const LOCAL_DOFS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofMap {
    n_triangles: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        Self {
            n_triangles: mesh.n_triangles(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        LOCAL_DOFS * self.n_triangles
    }

    #[inline]
    pub fn dof(&self, triangle: usize, node: usize, component: usize) -> usize {
        LOCAL_DOFS * triangle + 2 * node + component
    }

    pub fn triangle_dofs(&self, triangle: usize) -> std::ops::Range<usize> {
        LOCAL_DOFS * triangle..LOCAL_DOFS * (triangle + 1)
    }
}

/// Affine geometry of one triangle.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub points: [Point; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_l: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(mesh: &Mesh, t: usize) -> Self {
        let points = mesh.triangle_points(t);
        let area = mesh.area(t);
        let mut grad_l = [[0.0; 2]; 3];
        for (i, g) in grad_l.iter_mut().enumerate() {
            let a = points[(i + 1) % 3];
            let b = points[(i + 2) % 3];
            *g = [-(b[1] - a[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
        }
        Self { points, area, grad_l }
    }

    pub fn map(&self, l: [f64; 3]) -> Point {
        let p = &self.points;
        [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ]
    }

    pub fn basis_gradients(&self, l: [f64; 3]) -> [[f64; 2]; 6] {
        basis::gradients(l, &self.grad_l)
    }

    /// Strains of the 12 vector basis functions at `l`.
    pub fn basis_strains(&self, l: [f64; 3]) -> [Tensor2; LOCAL_DOFS] {
        let g = self.basis_gradients(l);
        let mut out = [Tensor2::ZERO; LOCAL_DOFS];
        for node in 0..6 {
            for comp in 0..2 {
                let mut grad = [[0.0; 2]; 2];
                grad[comp] = g[node];
                out[2 * node + comp] = strain(Tensor2(grad));
            }
        }
        out
    }
}

/// Barycentric coordinates in triangle `t` of the point `(1 - s) a + s b` on
/// edge `e = (a, b)`.
pub fn edge_barycentric(mesh: &Mesh, t: usize, e: usize, s: f64) -> [f64; 3] {
    let [a, b] = mesh.edges()[e].vertices;
    let tri = mesh.triangles()[t].vertices;
    let mut l = [0.0; 3];
    for k in 0..3 {
        if tri[k] == a {
            l[k] = 1.0 - s;
        } else if tri[k] == b {
            l[k] = s;
        }
    }
    l
}

/// Coefficient vector of a field in the discontinuous space of one mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    mesh_id: u64,
    coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            mesh_id: mesh.id(),
            coeffs: vec![0.0; DofMap::new(mesh).n_dofs()],
        }
    }

    pub fn from_coeffs(mesh: &Mesh, coeffs: Vec<f64>) -> Result<Self> {
        let expected = DofMap::new(mesh).n_dofs();
        if coeffs.len() != expected {
            return Err(Error::FieldSize {
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self {
            mesh_id: mesh.id(),
            coeffs,
        })
    }

    /// Nodal interpolant of `f`, evaluated separately on every triangle.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(Point) -> [f64; 2]) -> Self {
        let mut field = Self::zeros(mesh);
        for t in 0..mesh.n_triangles() {
            let geom = ElementGeometry::new(mesh, t);
            for (node, &l) in basis::NODES.iter().enumerate() {
                let v = f(geom.map(l));
                field.coeffs[LOCAL_DOFS * t + 2 * node] = v[0];
                field.coeffs[LOCAL_DOFS * t + 2 * node + 1] = v[1];
            }
        }
        field
    }

    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_id != mesh.id() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn local(&self, t: usize) -> &[f64] {
        &self.coeffs[LOCAL_DOFS * t..LOCAL_DOFS * (t + 1)]
    }

    pub fn value(&self, t: usize, l: [f64; 3]) -> [f64; 2] {
        let phi = basis::values(l);
        let c = self.local(t);
        let mut v = [0.0; 2];
        for node in 0..6 {
            v[0] += phi[node] * c[2 * node];
            v[1] += phi[node] * c[2 * node + 1];
        }
        v
    }

    /// Displacement gradient, `grad[i][j] = ∂_j u_i`.
    pub fn gradient(&self, geom: &ElementGeometry, t: usize, l: [f64; 3]) -> Tensor2 {
        let g = geom.basis_gradients(l);
        let c = self.local(t);
        let mut out = [[0.0; 2]; 2];
        for node in 0..6 {
            for comp in 0..2 {
                out[comp][0] += c[2 * node + comp] * g[node][0];
                out[comp][1] += c[2 * node + comp] * g[node][1];
            }
        }
        Tensor2(out)
    }

    /// Divergence of the stress, constant on each triangle for quadratic fields.
    pub fn stress_divergence(&self, geom: &ElementGeometry, t: usize, mat: &crate::elasticity::Material) -> [f64; 2] {
        let hess = basis::hessians(&geom.grad_l);
        let c = self.local(t);
        // H[i][j][k] = ∂_j ∂_k u_i
        let mut h = [[[0.0; 2]; 2]; 2];
        for node in 0..6 {
            for comp in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        h[comp][j][k] += c[2 * node + comp] * hess[node][j][k];
                    }
                }
            }
        }
        // div σ_i = μ Δu_i + (μ + λ) ∂_i div u
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let lap = h[i][0][0] + h[i][1][1];
            let grad_div = h[0][0][i] + h[1][1][i];
            *o = mat.mu * lap + (mat.mu + mat.lambda) * grad_div;
        }
        out
    }
}
