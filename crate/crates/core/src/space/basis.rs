//! Scalar quadratic Lagrange basis on a triangle.
//!
//! Local nodes: 0, 1, 2 are the vertices; 3 + i is the midpoint of local
//! edge i, the edge opposite vertex i.

/// Vertex pairs spanned by the midpoint nodes 3, 4, 5.
pub const MIDPOINT_EDGES: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// Barycentric coordinates of the six nodes.
pub const NODES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [0.5, 0.5, 0.0],
];

pub fn values(l: [f64; 3]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for i in 0..3 {
        out[i] = l[i] * (2.0 * l[i] - 1.0);
    }
    for (k, &(i, j)) in MIDPOINT_EDGES.iter().enumerate() {
        out[3 + k] = 4.0 * l[i] * l[j];
    }
    out
}

/// Gradients given the (constant) gradients of the barycentric coordinates.
pub fn gradients(l: [f64; 3], grad_l: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        out[i] = [s * grad_l[i][0], s * grad_l[i][1]];
    }
    for (k, &(i, j)) in MIDPOINT_EDGES.iter().enumerate() {
        out[3 + k] = [
            4.0 * (l[i] * grad_l[j][0] + l[j] * grad_l[i][0]),
            4.0 * (l[i] * grad_l[j][1] + l[j] * grad_l[i][1]),
        ];
    }
    out
}

/// Hessians; constant on each triangle.
pub fn hessians(grad_l: &[[f64; 2]; 3]) -> [[[f64; 2]; 2]; 6] {
    let outer = |a: [f64; 2], b: [f64; 2]| [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
    let mut out = [[[0.0; 2]; 2]; 6];
    for i in 0..3 {
        let g = outer(grad_l[i], grad_l[i]);
        for r in 0..2 {
            for c in 0..2 {
                out[i][r][c] = 4.0 * g[r][c];
            }
        }
    }
    for (k, &(i, j)) in MIDPOINT_EDGES.iter().enumerate() {
        let a = outer(grad_l[i], grad_l[j]);
        let b = outer(grad_l[j], grad_l[i]);
        for r in 0..2 {
            for c in 0..2 {
                out[3 + k][r][c] = 4.0 * (a[r][c] + b[r][c]);
            }
        }
    }
    out
}

/// Barycentric gradients on the reference triangle (0,0), (1,0), (0,1).
pub const REFERENCE_GRAD_L: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// Values and reference-coordinate gradients at a barycentric point.
pub fn eval_basis(l: [f64; 3]) -> ([f64; 6], [[f64; 2]; 6]) {
    (values(l), gradients(l, &REFERENCE_GRAD_L))
}
