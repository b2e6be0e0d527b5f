//! Interior penalty operators, load vectors and contact constraints.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elasticity::{stress, Material, Tensor2};
use crate::error::{Error, Result};
use crate::linalg::{Block, BlockSparseMatrix, BLOCK};
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::space::{basis, edge_barycentric, DiscreteField, DofMap, EdgeRule, ElementGeometry, TriangleRule, LOCAL_DOFS};

const EDGE_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sipg,
    Nipg,
}

impl Method {
    /// Sign in front of the symmetrization term.
    pub fn symmetry(self) -> f64 {
        match self {
            Method::Sipg => -1.0,
            Method::Nipg => 1.0,
        }
    }

    /// 70 for SIPG, 70ν for NIPG with ν the Poisson ratio.
    pub fn default_penalty(self, mat: &Material) -> f64 {
        match self {
            Method::Sipg => 70.0,
            Method::Nipg => 70.0 * mat.poisson_ratio(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sipg => "sipg",
            Method::Nipg => "nipg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sipg" => Some(Method::Sipg),
            "nipg" => Some(Method::Nipg),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct SparseOperator {
    pub matrix: BlockSparseMatrix,
    pub method: Method,
    pub penalty: f64,
}

impl SparseOperator {
    pub fn apply(&self, u: &DiscreteField) -> Vec<f64> {
        self.matrix.mul_vec(u.coeffs())
    }

    /// A_h(u, v).
    pub fn form(&self, u: &DiscreteField, v: &DiscreteField) -> f64 {
        self.matrix.bilinear(v.coeffs(), u.coeffs())
    }

    /// Coordinate text export, one `row col value` line per nonzero.
    pub fn write_coordinate(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        for (r, c, v) in self.matrix.triplets() {
            writeln!(s, "{r} {c} {v:.17e}").unwrap();
        }
        std::fs::write(path, s).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadVector {
    pub values: Vec<f64>,
}

impl LoadVector {
    pub fn pair(&self, v: &DiscreteField) -> f64 {
        crate::linalg::dot(&self.values, v.coeffs())
    }
}

/// Block pattern: each triangle couples to itself and its face neighbours.
fn pattern(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut p = vec![Vec::with_capacity(3); mesh.n_triangles()];
    for e in mesh.edges() {
        if let Some(r) = e.right {
            p[e.left].push(r);
            p[r].push(e.left);
        }
    }
    p
}

fn local_stiffness(mesh: &Mesh, mat: &Material, t: usize, rule: &TriangleRule) -> Block {
    let geom = ElementGeometry::new(mesh, t);
    let mut k = [0.0; BLOCK * BLOCK];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let eps = geom.basis_strains(*l);
        let sig: Vec<Tensor2> = eps.iter().map(|e| stress(*e, mat)).collect();
        let w = w * 2.0 * geom.area;
        for a in 0..LOCAL_DOFS {
            for b in 0..LOCAL_DOFS {
                k[a * BLOCK + b] += w * sig[b].ddot(&eps[a]);
            }
        }
    }
    k
}

/// Basis data of one side of an edge at the quadrature points.
struct SideData {
    triangle: usize,
    /// values[q][a]
    values: Vec<[[f64; 2]; LOCAL_DOFS]>,
    tractions: Vec<[[f64; 2]; LOCAL_DOFS]>,
    strains: Vec<[Tensor2; LOCAL_DOFS]>,
}

fn side_data(mesh: &Mesh, mat: &Material, t: usize, e: usize, rule: &EdgeRule) -> SideData {
    let geom = ElementGeometry::new(mesh, t);
    let n = mesh.edges()[e].normal;
    let mut out = SideData {
        triangle: t,
        values: Vec::with_capacity(rule.len()),
        tractions: Vec::with_capacity(rule.len()),
        strains: Vec::with_capacity(rule.len()),
    };
    for &s in &rule.points {
        let l = edge_barycentric(mesh, t, e, s);
        let phi = basis::values(l);
        let eps = geom.basis_strains(l);
        let mut vals = [[0.0; 2]; LOCAL_DOFS];
        let mut trac = [[0.0; 2]; LOCAL_DOFS];
        for a in 0..LOCAL_DOFS {
            vals[a][a % 2] = phi[a / 2];
            trac[a] = stress(eps[a], mat).mul_vec(n);
        }
        out.values.push(vals);
        out.tractions.push(trac);
        out.strains.push(eps);
    }
    out
}

fn edge_sides(mesh: &Mesh, mat: &Material, e: usize, rule: &EdgeRule) -> Vec<SideData> {
    let edge = &mesh.edges()[e];
    std::iter::once(edge.left)
        .chain(edge.right)
        .map(|t| side_data(mesh, mat, t, e, rule))
        .collect()
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Local edge blocks `[(row side, col side, block)]` of
/// `sym ∫⟦u⟧:{σ(v)} - ∫⟦v⟧:{σ(u)} + η/h ∫⟦u⟧:⟦v⟧` with rows as test functions.
fn edge_operator(mesh: &Mesh, mat: &Material, method: Method, penalty: f64, e: usize, rule: &EdgeRule) -> Vec<(usize, usize, Block)> {
    let edge = &mesh.edges()[e];
    let sides = edge_sides(mesh, mat, e, rule);
    let boundary = sides.len() == 1;
    let avg = if boundary { 1.0 } else { 0.5 };
    let sym = method.symmetry();
    let pen = penalty / edge.length;
    let mut out = Vec::with_capacity(sides.len() * sides.len());
    for (ki, si) in sides.iter().enumerate() {
        let sgn_i = if ki == 0 { 1.0 } else { -1.0 };
        for (kj, sj) in sides.iter().enumerate() {
            let sgn_j = if kj == 0 { 1.0 } else { -1.0 };
            let mut m = [0.0; BLOCK * BLOCK];
            for (q, &w) in rule.weights.iter().enumerate() {
                let w = w * edge.length;
                for a in 0..LOCAL_DOFS {
                    let ja = si.values[q][a];
                    let ta = si.tractions[q][a];
                    for b in 0..LOCAL_DOFS {
                        let jb = sj.values[q][b];
                        let tb = sj.tractions[q][b];
                        let v = sym * sgn_j * avg * dot2(jb, ta) - sgn_i * avg * dot2(ja, tb)
                            + pen * sgn_i * sgn_j * dot2(ja, jb);
                        m[a * BLOCK + b] += w * v;
                    }
                }
            }
            out.push((si.triangle, sj.triangle, m));
        }
    }
    out
}

fn penalized_edges(mesh: &Mesh) -> Vec<usize> {
    (0..mesh.n_edges()).filter(|&e| mesh.edges()[e].tag.is_penalized()).collect()
}

fn assemble_blocks<F>(mesh: &Mesh, volume: &[Block], edges: &[usize], edge_fn: F) -> BlockSparseMatrix
where
    F: Fn(usize) -> Vec<(usize, usize, Block)> + Sync,
{
    let mut a = BlockSparseMatrix::from_pattern(&pattern(mesh));
    for (t, k) in volume.iter().enumerate() {
        a.add_block(t, t, k);
    }
    for chunk in edges.chunks(EDGE_CHUNK) {
        let local: Vec<_> = chunk.par_iter().map(|&e| edge_fn(e)).collect();
        for blocks in local {
            for (i, j, b) in blocks {
                a.add_block(i, j, &b);
            }
        }
    }
    a
}

/// Stiffness operator of the SIPG or NIPG method. Interior and Dirichlet
/// edges carry the consistency, symmetrization and penalty terms.
pub fn assemble_operator(mesh: &Mesh, mat: &Material, method: Method, penalty: f64) -> Result<SparseOperator> {
    if !(penalty > 0.0 && penalty.is_finite()) {
        return Err(Error::NonPositivePenalty(penalty));
    }
    let trule = TriangleRule::new(2);
    let erule = EdgeRule::gauss(5);
    let volume: Vec<Block> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| local_stiffness(mesh, mat, t, &trule))
        .collect();
    let matrix = assemble_blocks(mesh, &volume, &penalized_edges(mesh), |e| {
        edge_operator(mesh, mat, method, penalty, e, &erule)
    });
    Ok(SparseOperator {
        matrix,
        method,
        penalty,
    })
}

/// Gram matrix of the broken energy plus jump norm. With `with_averages`
/// the term `Σ h_e ‖{ε(v)}‖²` over interior and Dirichlet edges is added.
pub fn assemble_dg_norm(mesh: &Mesh, mat: &Material, with_averages: bool) -> BlockSparseMatrix {
    let trule = TriangleRule::new(2);
    let erule = EdgeRule::gauss(5);
    let volume: Vec<Block> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| local_stiffness(mesh, mat, t, &trule))
        .collect();
    assemble_blocks(mesh, &volume, &penalized_edges(mesh), |e| {
        let edge = &mesh.edges()[e];
        let sides = edge_sides(mesh, mat, e, &erule);
        let avg = if sides.len() == 1 { 1.0 } else { 0.5 };
        let mut out = Vec::new();
        for (ki, si) in sides.iter().enumerate() {
            let sgn_i = if ki == 0 { 1.0 } else { -1.0 };
            for (kj, sj) in sides.iter().enumerate() {
                let sgn_j = if kj == 0 { 1.0 } else { -1.0 };
                let mut m = [0.0; BLOCK * BLOCK];
                for (q, &w) in erule.weights.iter().enumerate() {
                    let w = w * edge.length;
                    for a in 0..LOCAL_DOFS {
                        for b in 0..LOCAL_DOFS {
                            let mut v = sgn_i * sgn_j * dot2(si.values[q][a], sj.values[q][b]) / edge.length;
                            if with_averages {
                                v += edge.length * avg * avg * si.strains[q][a].ddot(&sj.strains[q][b]);
                            }
                            m[a * BLOCK + b] += w * v;
                        }
                    }
                }
                out.push((si.triangle, sj.triangle, m));
            }
        }
        out
    })
}

/// Load vector of `∫ f·v + ∫_{Γ_N} g·v`. `g` receives the point and the
/// outward normal. Integrals use rules exact to `degree`.
pub fn assemble_load(
    mesh: &Mesh,
    f: &(dyn Fn(Point) -> [f64; 2] + Sync),
    g: &(dyn Fn(Point, [f64; 2]) -> [f64; 2] + Sync),
    degree: usize,
) -> LoadVector {
    let trule = TriangleRule::new(degree);
    let erule = EdgeRule::for_degree(degree);
    let mut values = vec![0.0; DofMap::new(mesh).n_dofs()];
    values.par_chunks_mut(LOCAL_DOFS).enumerate().for_each(|(t, out)| {
        let geom = ElementGeometry::new(mesh, t);
        for (l, w) in trule.points.iter().zip(&trule.weights) {
            let fx = f(geom.map(*l));
            let phi = basis::values(*l);
            let w = w * 2.0 * geom.area;
            for node in 0..6 {
                out[2 * node] += w * fx[0] * phi[node];
                out[2 * node + 1] += w * fx[1] * phi[node];
            }
        }
    });
    for e in mesh.edges_with_tag(BoundaryTag::Neumann) {
        let edge = &mesh.edges()[e];
        let [a, b] = mesh.edge_points(e);
        let t = edge.left;
        for (&s, &w) in erule.points.iter().zip(&erule.weights) {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let gx = g(x, edge.normal);
            let phi = basis::values(edge_barycentric(mesh, t, e, s));
            let w = w * edge.length;
            for node in 0..6 {
                values[LOCAL_DOFS * t + 2 * node] += w * gx[0] * phi[node];
                values[LOCAL_DOFS * t + 2 * node + 1] += w * gx[1] * phi[node];
            }
        }
    }
    LoadVector { values }
}

/// Right-hand side contribution of nonzero Dirichlet data,
/// `sym ∫ u_D·σ(v)n + η/h ∫ u_D·v` over Dirichlet edges.
pub fn assemble_dirichlet_lift(
    mesh: &Mesh,
    mat: &Material,
    method: Method,
    penalty: f64,
    u_d: &(dyn Fn(Point) -> [f64; 2] + Sync),
    degree: usize,
) -> Vec<f64> {
    let erule = EdgeRule::for_degree(degree.max(5));
    let sym = method.symmetry();
    let mut values = vec![0.0; DofMap::new(mesh).n_dofs()];
    for e in mesh.edges_with_tag(BoundaryTag::Dirichlet) {
        let edge = &mesh.edges()[e];
        let [a, b] = mesh.edge_points(e);
        let side = side_data(mesh, mat, edge.left, e, &erule);
        for (q, (&s, &w)) in erule.points.iter().zip(&erule.weights).enumerate() {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let ud = u_d(x);
            let w = w * edge.length;
            for k in 0..LOCAL_DOFS {
                let v = sym * dot2(ud, side.tractions[q][k]) + penalty / edge.length * dot2(ud, side.values[q][k]);
                values[LOCAL_DOFS * edge.left + k] += w * v;
            }
        }
    }
    values
}

/// Integral contact constraints `B_e(v) = ∫_e v·n_c ds ≤ G_e`.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub normal: [f64; 2],
    pub edges: Vec<usize>,
    /// Triangle owning each contact edge.
    pub triangles: Vec<usize>,
    pub lengths: Vec<f64>,
    pub rows: Vec<[f64; LOCAL_DOFS]>,
    pub gaps: Vec<f64>,
    n_dofs: usize,
}

impl ConstraintSystem {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn row_offset(&self, i: usize) -> usize {
        LOCAL_DOFS * self.triangles[i]
    }

    pub fn row_dot(&self, i: usize, u: &[f64]) -> f64 {
        let off = self.row_offset(i);
        self.rows[i].iter().zip(&u[off..off + LOCAL_DOFS]).map(|(a, b)| a * b).sum()
    }

    /// B U.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.row_dot(i, u)).collect()
    }

    /// Bᵀ Λ.
    pub fn apply_transpose(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs];
        for (i, &l) in lambda.iter().enumerate() {
            let off = self.row_offset(i);
            for (k, r) in self.rows[i].iter().enumerate() {
                out[off + k] += l * r;
            }
        }
        out
    }

    /// Dense column `B_iᵀ`.
    pub fn row_vector(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs];
        let off = self.row_offset(i);
        out[off..off + LOCAL_DOFS].copy_from_slice(&self.rows[i]);
        out
    }

    /// `B U ≤ G + tol` componentwise.
    pub fn is_admissible(&self, u: &[f64], tol: f64) -> bool {
        self.apply(u).iter().zip(&self.gaps).all(|(b, g)| b <= &(g + tol))
    }
}

/// Builds the constraint rows of every contact edge. The gap integral is
/// split at `kinks` (points where the gap is not smooth) that lie on an edge.
pub fn assemble_constraints(
    mesh: &Mesh,
    normal: [f64; 2],
    gap: &dyn Fn(Point) -> f64,
    kinks: &[Point],
) -> Result<ConstraintSystem> {
    mesh.check_single_contact_edge()?;
    let rule = EdgeRule::gauss(5);
    let mut sys = ConstraintSystem {
        normal,
        edges: Vec::new(),
        triangles: Vec::new(),
        lengths: Vec::new(),
        rows: Vec::new(),
        gaps: Vec::new(),
        n_dofs: DofMap::new(mesh).n_dofs(),
    };
    for e in mesh.edges_with_tag(BoundaryTag::Contact) {
        let edge = &mesh.edges()[e];
        if edge.right.is_some() {
            return Err(Error::InteriorContactEdge(e));
        }
        let t = edge.left;
        let mut row = [0.0; LOCAL_DOFS];
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let phi = basis::values(edge_barycentric(mesh, t, e, s));
            for node in 0..6 {
                row[2 * node] += w * edge.length * phi[node] * normal[0];
                row[2 * node + 1] += w * edge.length * phi[node] * normal[1];
            }
        }
        let [a, b] = mesh.edge_points(e);
        let mut g = 0.0;
        for (s0, s1) in split_at_points(a, b, kinks) {
            for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                let r = s0 + s * (s1 - s0);
                g += w * (s1 - s0) * edge.length * gap([a[0] + r * (b[0] - a[0]), a[1] + r * (b[1] - a[1])]);
            }
        }
        sys.edges.push(e);
        sys.triangles.push(t);
        sys.lengths.push(edge.length);
        sys.rows.push(row);
        sys.gaps.push(g);
    }
    Ok(sys)
}

/// Parameter intervals of segment `ab` between the given points that lie on it.
pub(crate) fn split_at_points(a: Point, b: Point, points: &[Point]) -> Vec<(f64, f64)> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let mut cuts: Vec<f64> = points
        .iter()
        .filter_map(|p| {
            let s = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2;
            let q = [a[0] + s * d[0], a[1] + s * d[1]];
            let off = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            (s > 1e-12 && s < 1.0 - 1e-12 && off < 1e-12 * len2.sqrt().max(1.0)).then_some(s)
        })
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut prev = 0.0;
    for c in cuts {
        out.push((prev, c));
        prev = c;
    }
    out.push((prev, 1.0));
    out
}
