//! Block-sparse matrices with 12x12 dense blocks and a direct block LU solver.
//!
//! Block rows correspond to triangles. The sparsity pattern must be
//! structurally symmetric, which holds for every operator assembled here.
//! The factorization orders block rows by minimum degree on the block graph
//! and pivots only inside diagonal blocks.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const BLOCK: usize = 12;
const BB: usize = BLOCK * BLOCK;

pub type Block = [f64; BB];

#[derive(Clone, Debug)]
pub struct BlockSparseMatrix {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    blocks: Vec<Block>,
}

impl BlockSparseMatrix {
    /// Zero matrix with the given block pattern. Diagonal blocks are always
    /// present; duplicate entries are merged.
    pub fn from_pattern(pattern: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(pattern.len() + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for (i, row) in pattern.iter().enumerate() {
            let mut r: Vec<usize> = row.iter().copied().chain(std::iter::once(i)).collect();
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let blocks = vec![[0.0; BB]; cols.len()];
        Self { row_ptr, cols, blocks }
    }

    pub fn n_block_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn dim(&self) -> usize {
        BLOCK * self.n_block_rows()
    }

    pub fn n_blocks(&self) -> usize {
        self.cols.len()
    }

    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.row_cols(i).binary_search(&j).ok().map(|k| start + k)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&Block> {
        self.index(i, j).map(|k| &self.blocks[k])
    }

    /// Panics if `(i, j)` is outside the pattern.
    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut Block {
        let k = self
            .index(i, j)
            .unwrap_or_else(|| panic!("block ({i}, {j}) not in pattern"));
        &mut self.blocks[k]
    }

    pub fn add_block(&mut self, i: usize, j: usize, b: &Block) {
        let dst = self.block_mut(i, j);
        for (d, s) in dst.iter_mut().zip(b) {
            *d += s;
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.block(r / BLOCK, c / BLOCK)
            .map_or(0.0, |b| b[(r % BLOCK) * BLOCK + c % BLOCK])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let mut y = vec![0.0; self.dim()];
        y.par_chunks_mut(BLOCK).enumerate().for_each(|(i, yi)| {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let xj = &x[BLOCK * self.cols[k]..BLOCK * (self.cols[k] + 1)];
                gemv_add(yi, &self.blocks[k], xj, 1.0);
            }
        });
        y
    }

    /// `v · A u`.
    pub fn bilinear(&self, v: &[f64], u: &[f64]) -> f64 {
        dot(v, &self.mul_vec(u))
    }

    pub fn max_diagonal(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for i in 0..self.n_block_rows() {
            let b = self.block(i, i).expect("diagonal block");
            for r in 0..BLOCK {
                m = m.max(b[r * BLOCK + r]);
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max |A_ij - A_ji|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n_block_rows() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let t = self.block(j, i).expect("structurally symmetric pattern");
                let b = &self.blocks[k];
                for r in 0..BLOCK {
                    for c in 0..BLOCK {
                        m = m.max((b[r * BLOCK + c] - t[c * BLOCK + r]).abs());
                    }
                }
            }
        }
        m
    }

    /// Nonzero entries as (row, col, value).
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n_block_rows() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                for r in 0..BLOCK {
                    for c in 0..BLOCK {
                        let v = self.blocks[k][r * BLOCK + c];
                        if v != 0.0 {
                            out.push((BLOCK * i + r, BLOCK * j + c, v));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn factor(&self) -> Result<BlockLu> {
        BlockLu::new(self)
    }
}

/// Sparse block LU factors `P A Pᵀ = L U` with block permutation `P`.
///
/// `L` holds the Schur-updated lower blocks (diagonal blocks factored densely),
/// `U` has identity diagonal blocks.
#[derive(Clone, Debug)]
pub struct BlockLu {
    /// perm[k] = original block row eliminated at step k.
    perm: Vec<usize>,
    /// Sorted later pivots coupled to pivot k.
    structure: Vec<Vec<usize>>,
    diag: Vec<DenseLu>,
    /// lower[k][m] = L[structure[k][m]][k]
    lower: Vec<Vec<Block>>,
    /// upper[k][m] = U[k][structure[k][m]]
    upper: Vec<Vec<Block>>,
}

impl BlockLu {
    pub fn new(a: &BlockSparseMatrix) -> Result<Self> {
        let n = a.n_block_rows();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| a.row_cols(i).iter().copied().filter(|&j| j != i).collect())
            .collect();
        let (perm, structure) = minimum_degree(&adj);
        let mut diag_blocks: Vec<Block> = perm.iter().map(|&p| *a.block(p, p).unwrap()).collect();
        let mut lower: Vec<Vec<Block>> = structure.iter().map(|s| vec![[0.0; BB]; s.len()]).collect();
        let mut upper: Vec<Vec<Block>> = structure.iter().map(|s| vec![[0.0; BB]; s.len()]).collect();
        for k in 0..n {
            let p = perm[k];
            for (m, &q) in structure[k].iter().enumerate() {
                let orig = perm[q];
                if let Some(b) = a.block(orig, p) {
                    lower[k][m] = *b;
                }
                if let Some(b) = a.block(p, orig) {
                    upper[k][m] = *b;
                }
            }
        }

        let mut diag = Vec::with_capacity(n);
        for k in 0..n {
            let lu = DenseLu::new(diag_blocks[k]).ok_or(Error::SingularMatrix(perm[k]))?;
            // U[k][j] = D_k^{-1} A[k][j]
            for b in upper[k].iter_mut() {
                lu.solve_block(b);
            }
            let (done_lower, rest_lower) = lower.split_at_mut(k + 1);
            let (done_upper, rest_upper) = upper.split_at_mut(k + 1);
            let lk = &done_lower[k];
            let uk = &done_upper[k];
            let sk = &structure[k];
            for (ia, &ra) in sk.iter().enumerate() {
                for (ib, &rb) in sk.iter().enumerate() {
                    // A[ra][rb] -= L[ra][k] U[k][rb]
                    let target: &mut Block = match ra.cmp(&rb) {
                        std::cmp::Ordering::Equal => &mut diag_blocks[ra],
                        std::cmp::Ordering::Less => {
                            let m = structure[ra].binary_search(&rb).expect("fill pattern");
                            &mut rest_upper[ra - k - 1][m]
                        }
                        std::cmp::Ordering::Greater => {
                            let m = structure[rb].binary_search(&ra).expect("fill pattern");
                            &mut rest_lower[rb - k - 1][m]
                        }
                    };
                    gemm_sub(target, &lk[ia], &uk[ib]);
                }
            }
            diag.push(lu);
        }
        Ok(Self {
            perm,
            structure,
            diag,
            lower,
            upper,
        })
    }

    pub fn dim(&self) -> usize {
        BLOCK * self.perm.len()
    }

    /// Number of stored off-diagonal blocks in L and U together.
    pub fn fill(&self) -> usize {
        2 * self.structure.iter().map(Vec::len).sum::<usize>()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.dim());
        let n = self.perm.len();
        let mut y: Vec<[f64; BLOCK]> = self
            .perm
            .iter()
            .map(|&p| rhs[BLOCK * p..BLOCK * (p + 1)].try_into().unwrap())
            .collect();
        for k in 0..n {
            self.diag[k].solve_vec(&mut y[k]);
            let yk = y[k];
            for (m, &q) in self.structure[k].iter().enumerate() {
                gemv_add(&mut y[q], &self.lower[k][m], &yk, -1.0);
            }
        }
        for k in (0..n).rev() {
            let mut acc = y[k];
            for (m, &q) in self.structure[k].iter().enumerate() {
                gemv_add(&mut acc, &self.upper[k][m], &y[q], -1.0);
            }
            y[k] = acc;
        }
        let mut x = vec![0.0; self.dim()];
        for (k, &p) in self.perm.iter().enumerate() {
            x[BLOCK * p..BLOCK * (p + 1)].copy_from_slice(&y[k]);
        }
        x
    }

    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rhs.par_iter().map(|r| self.solve(r)).collect()
    }
}

/// Minimum-degree elimination on an undirected graph. Returns the order and,
/// for every step, the sorted positions of its neighbours at elimination.
fn minimum_degree(adj: &[Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = adj.len();
    let mut graph: Vec<BTreeSet<usize>> = adj.iter().map(|a| a.iter().copied().collect()).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (graph[i].len(), i)).collect();
    let mut order = Vec::with_capacity(n);
    let mut nbrs_at = Vec::with_capacity(n);
    while let Some((_, p)) = queue.pop_first() {
        let nbrs: Vec<usize> = std::mem::take(&mut graph[p]).into_iter().collect();
        for &a in &nbrs {
            queue.remove(&(graph[a].len(), a));
            graph[a].remove(&p);
        }
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                graph[a].insert(b);
                graph[b].insert(a);
            }
        }
        for &a in &nbrs {
            queue.insert((graph[a].len(), a));
        }
        order.push(p);
        nbrs_at.push(nbrs);
    }
    let mut pos = vec![0; n];
    for (k, &p) in order.iter().enumerate() {
        pos[p] = k;
    }
    let structure = nbrs_at
        .into_iter()
        .map(|nb| {
            let mut s: Vec<usize> = nb.into_iter().map(|q| pos[q]).collect();
            s.sort_unstable();
            s
        })
        .collect();
    (order, structure)
}

/// Dense LU with partial pivoting of one 12x12 block.
#[derive(Clone, Debug)]
struct DenseLu {
    lu: Block,
    piv: [usize; BLOCK],
}

impl DenseLu {
    fn new(mut a: Block) -> Option<Self> {
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let mut piv = [0; BLOCK];
        for k in 0..BLOCK {
            let mut p = k;
            for r in k + 1..BLOCK {
                if a[r * BLOCK + k].abs() > a[p * BLOCK + k].abs() {
                    p = r;
                }
            }
            if a[p * BLOCK + k].abs() <= 1e-13 * scale {
                return None;
            }
            piv[k] = p;
            if p != k {
                for c in 0..BLOCK {
                    a.swap(k * BLOCK + c, p * BLOCK + c);
                }
            }
            let d = a[k * BLOCK + k];
            for r in k + 1..BLOCK {
                let f = a[r * BLOCK + k] / d;
                a[r * BLOCK + k] = f;
                for c in k + 1..BLOCK {
                    a[r * BLOCK + c] -= f * a[k * BLOCK + c];
                }
            }
        }
        Some(Self { lu: a, piv })
    }

    fn solve_vec(&self, x: &mut [f64; BLOCK]) {
        let a = &self.lu;
        for k in 0..BLOCK {
            x.swap(k, self.piv[k]);
        }
        for r in 1..BLOCK {
            let mut s = x[r];
            for c in 0..r {
                s -= a[r * BLOCK + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..BLOCK).rev() {
            let mut s = x[r];
            for c in r + 1..BLOCK {
                s -= a[r * BLOCK + c] * x[c];
            }
            x[r] = s / a[r * BLOCK + r];
        }
    }

    /// b <- D^{-1} b, column by column.
    fn solve_block(&self, b: &mut Block) {
        for c in 0..BLOCK {
            let mut col = [0.0; BLOCK];
            for r in 0..BLOCK {
                col[r] = b[r * BLOCK + c];
            }
            self.solve_vec(&mut col);
            for r in 0..BLOCK {
                b[r * BLOCK + c] = col[r];
            }
        }
    }
}

/// c -= a b
fn gemm_sub(c: &mut Block, a: &Block, b: &Block) {
    for r in 0..BLOCK {
        for k in 0..BLOCK {
            let f = a[r * BLOCK + k];
            if f == 0.0 {
                continue;
            }
            let (crow, brow) = (&mut c[r * BLOCK..(r + 1) * BLOCK], &b[k * BLOCK..(k + 1) * BLOCK]);
            for (cv, bv) in crow.iter_mut().zip(brow) {
                *cv -= f * bv;
            }
        }
    }
}

/// y += s A x
fn gemv_add(y: &mut [f64], a: &Block, x: &[f64], s: f64) {
    for r in 0..BLOCK {
        let row = &a[r * BLOCK..(r + 1) * BLOCK];
        let v: f64 = row.iter().zip(x).map(|(p, q)| p * q).sum();
        y[r] += s * v;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
