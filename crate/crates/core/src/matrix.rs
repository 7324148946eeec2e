//! Dense row-major square matrices and the multiply kernel behind the
//! evolution engine.
//!
//! With the `parallel` feature (on by default) blocks of output rows are
//! computed on the rayon pool. Each entry is still reduced sequentially in a
//! fixed order, so the parallel and sequential kernels are bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A dense `n × n` matrix of `f64`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from a flat row-major buffer. Returns `None` when the
    /// buffer length is not `order²`.
    pub fn from_vec(order: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == order * order).then_some(Self { order, data })
    }

    /// Builds a matrix from nested rows. Returns `None` for ragged or
    /// non-square input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return None;
        }
        Some(Self {
            order,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.order + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.order.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    /// Largest entry, or `0.0` for an empty matrix.
    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    pub fn map_in_place(&mut self, f: impl Fn(f64) -> f64) {
        self.data.iter_mut().for_each(|x| *x = f(*x));
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|x| *x *= factor);
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    /// Replaces the matrix with `(M + Mᵀ) / 2`, leaving it exactly symmetric.
    pub fn symmetrize(&mut self) {
        let n = self.order;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, avg);
                self.set(j, i, avg);
            }
        }
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        let n = self.order;
        (0..n).all(|i| ((i + 1)..n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(indices.len());
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    /// `self · rhs` using the default kernel for this build.
    pub fn matmul(&self, rhs: &Self) -> Self {
        #[cfg(feature = "parallel")]
        {
            matmul_parallel(self, rhs)
        }
        #[cfg(not(feature = "parallel"))]
        {
            matmul_sequential(self, rhs)
        }
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.order, "vector length mismatch");
        (0..self.order)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

// Register-tiled kernel. `rhs` is packed once into column panels of width
// `NR` (k-major), then each `MR × NR` output tile is accumulated in registers
// over k = 0..n. Every kernel sums out[i][j] in that same order starting from
// zero, so the sequential and parallel products are bit-identical.
const MR: usize = 4;
const NR: usize = 8;
const ROW_BLOCK: usize = 16;

/// `rhs` columns regrouped as `ceil(n / NR)` panels of `n × NR`, zero padded.
fn pack_rhs(rhs: &SquareMatrix) -> Vec<f64> {
    let n = rhs.order;
    let panels = n.div_ceil(NR);
    let mut packed = vec![0.0; panels * n * NR];
    for (p, panel) in packed.chunks_mut(n * NR).enumerate() {
        let j0 = p * NR;
        let width = NR.min(n - j0);
        for k in 0..n {
            panel[k * NR..k * NR + width].copy_from_slice(&rhs.data[k * n + j0..k * n + j0 + width]);
        }
    }
    packed
}

#[inline(always)]
fn tile_full(lhs: &SquareMatrix, i0: usize, panel: &[f64]) -> [[f64; NR]; MR] {
    let n = lhs.order;
    let rows: [&[f64]; MR] = std::array::from_fn(|r| lhs.row(i0 + r));
    let mut acc = [[0.0; NR]; MR];
    for k in 0..n {
        let b: &[f64; NR] = panel[k * NR..(k + 1) * NR].try_into().unwrap();
        for r in 0..MR {
            let a = rows[r][k];
            for c in 0..NR {
                acc[r][c] += a * b[c];
            }
        }
    }
    acc
}

fn product_block(lhs: &SquareMatrix, packed: &[f64], first_row: usize, out: &mut [f64]) {
    let n = lhs.order;
    let rows = out.len() / n;
    for (p, panel) in packed.chunks(n * NR).enumerate() {
        let j0 = p * NR;
        let width = NR.min(n - j0);
        let mut r = 0;
        while r + MR <= rows {
            let acc = tile_full(lhs, first_row + r, panel);
            for (dr, acc_row) in acc.iter().enumerate() {
                let o = (r + dr) * n + j0;
                out[o..o + width].copy_from_slice(&acc_row[..width]);
            }
            r += MR;
        }
        for r in r..rows {
            let lhs_row = lhs.row(first_row + r);
            let mut acc = [0.0; NR];
            for (k, &a) in lhs_row.iter().enumerate() {
                for c in 0..NR {
                    acc[c] += a * panel[k * NR + c];
                }
            }
            out[r * n + j0..r * n + j0 + width].copy_from_slice(&acc[..width]);
        }
    }
}

/// Single-threaded product.
pub fn matmul_sequential(lhs: &SquareMatrix, rhs: &SquareMatrix) -> SquareMatrix {
    assert_eq!(lhs.order, rhs.order, "matrix order mismatch");
    let n = lhs.order;
    let mut out = SquareMatrix::zeros(n);
    if n == 0 {
        return out;
    }
    let packed = pack_rhs(rhs);
    for (b, block) in out.data.chunks_mut(ROW_BLOCK * n).enumerate() {
        product_block(lhs, &packed, b * ROW_BLOCK, block);
    }
    out
}

/// Product with row blocks spread over the rayon pool. Bit-identical to
/// [`matmul_sequential`].
#[cfg(feature = "parallel")]
pub fn matmul_parallel(lhs: &SquareMatrix, rhs: &SquareMatrix) -> SquareMatrix {
    assert_eq!(lhs.order, rhs.order, "matrix order mismatch");
    let n = lhs.order;
    let mut out = SquareMatrix::zeros(n);
    if n == 0 {
        return out;
    }
    let packed = pack_rhs(rhs);
    out.data
        .par_chunks_mut(ROW_BLOCK * n)
        .enumerate()
        .for_each(|(b, block)| product_block(lhs, &packed, b * ROW_BLOCK, block));
    out
}
