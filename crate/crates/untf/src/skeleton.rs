//! Polynomial families over GF(q) and the block-binary skeleton matrices
//! they induce, plus the composition rule for composite dimensions.
//!
//! A skeleton is stored column-sparsely: each column records, per row-block,
//! the in-block position of its single 1. Every matrix composed here has
//! exactly one 1 per block per column, so the density of the represented
//! 0/1 matrix is always `1/n` for block size `n`.

use crate::error::{Error, Result};
use crate::gf::{FieldElement, FieldSpec};

/// A polynomial of degree at most r over GF(q) with zero constant term.
///
/// `coeffs[i]` is the coefficient of x^{i+1}; the degree bound r is the
/// length of `coeffs` (a family parameter, not the exact degree).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    coeffs: Vec<FieldElement>,
    field: FieldSpec,
}

impl SparsePolynomial {
    pub fn new(coeffs: Vec<FieldElement>, field: FieldSpec) -> Self {
        SparsePolynomial { coeffs, field }
    }

    /// Degree bound r of the family this polynomial belongs to.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// Horner evaluation: c_1 x + c_2 x^2 + ... + c_r x^r.
    pub fn eval(&self, x: FieldElement) -> FieldElement {
        let f = &self.field;
        let mut acc = FieldElement::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = f.add(f.mul(acc, x), c);
        }
        f.mul(acc, x)
    }
}

/// All q^r polynomials of degree at most r over GF(q) with zero constant
/// term, in lexicographic order of coefficient indices (c_1 most
/// significant). Includes the zero polynomial.
pub fn enumerate_polynomials(field: &FieldSpec, r: usize) -> Result<Vec<SparsePolynomial>> {
    let q = field.order();
    // The evaluation-tuple condition r < k <= q forces r <= q - 1.
    let max = (q - 1) as usize;
    if r < 1 || r > max {
        return Err(Error::InvalidDegree { r, max, q });
    }
    let count = q.pow(r as u32);
    let mut out = Vec::with_capacity(count as usize);
    for n in 0..count {
        let mut coeffs = vec![FieldElement::ZERO; r];
        let mut rem = n;
        for i in (0..r).rev() {
            coeffs[i] = field.element(rem % q)?;
            rem /= q;
        }
        out.push(SparsePolynomial::new(coeffs, field.clone()));
    }
    Ok(out)
}

/// Binary matrix with k row-blocks of size n; each column holds exactly one
/// 1 per block, recorded as a 0-based in-block position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockBinaryMatrix {
    k: usize,
    n: usize,
    columns: Vec<Vec<u32>>,
}

impl BlockBinaryMatrix {
    pub fn new(k: usize, n: usize, columns: Vec<Vec<u32>>) -> Result<Self> {
        for col in &columns {
            if col.len() != k {
                return Err(Error::ShapeMismatch(format!(
                    "column has {} block positions, expected {k}",
                    col.len()
                )));
            }
            if col.iter().any(|&p| p as usize >= n) {
                return Err(Error::InvalidParams(format!("block position out of range 0..{n}")));
            }
        }
        Ok(BlockBinaryMatrix { k, n, columns })
    }

    /// Number of row-blocks.
    pub fn block_count(&self) -> usize {
        self.k
    }

    /// Block size n (the represented matrix has k*n rows).
    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.k * self.n
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    /// In-block 1-positions of column j, one per block.
    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    /// Column-concatenation of two matrices with identical (k, n).
    pub fn hconcat(&self, other: &BlockBinaryMatrix) -> Result<BlockBinaryMatrix> {
        if self.k != other.k || self.n != other.n {
            return Err(Error::ShapeMismatch(format!(
                "cannot concatenate ({}, {}) with ({}, {})",
                self.k, self.n, other.k, other.n
            )));
        }
        let mut columns = self.columns.clone();
        columns.extend(other.columns.iter().cloned());
        Ok(BlockBinaryMatrix { k: self.k, n: self.n, columns })
    }

    /// Keep only the first k row-blocks.
    pub fn truncate_blocks(&self, k: usize) -> Result<BlockBinaryMatrix> {
        if k < 1 || k > self.k {
            return Err(Error::InvalidParams(format!(
                "cannot keep {k} blocks of a matrix with {} blocks",
                self.k
            )));
        }
        let columns = self.columns.iter().map(|c| c[..k].to_vec()).collect();
        Ok(BlockBinaryMatrix { k, n: self.n, columns })
    }

    /// Dense 0/1 expansion, row-major.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut out = vec![vec![0u8; self.ncols()]; self.rows()];
        for (j, col) in self.columns.iter().enumerate() {
            for (block, &pos) in col.iter().enumerate() {
                out[block * self.n + pos as usize][j] = 1;
            }
        }
        out
    }

    /// Maximum pairwise column intersection, 0 when fewer than two columns.
    pub fn max_pairwise_intersection(&self) -> usize {
        let mut best = 0;
        for i in 0..self.columns.len() {
            for j in i + 1..self.columns.len() {
                let c = column_intersection(&self.columns[i], &self.columns[j])
                    .expect("columns of one matrix share a shape");
                best = best.max(c);
            }
        }
        best
    }
}

/// Number of blocks in which two columns place their 1 at the same position.
pub fn column_intersection(u: &[u32], w: &[u32]) -> Result<usize> {
    if u.len() != w.len() {
        return Err(Error::ShapeMismatch(format!(
            "columns have {} and {} blocks",
            u.len(),
            w.len()
        )));
    }
    Ok(u.iter().zip(w).filter(|(a, b)| a == b).count())
}

/// Build the skeleton V^P: k blocks of size q, one column per shift f_j.
///
/// Column j places its 1 in block i at the position of P(f_{i+1}) + f_{j+1}
/// in the canonical element order.
pub fn build_skeleton(poly: &SparsePolynomial, k: usize) -> Result<BlockBinaryMatrix> {
    let field = poly.field();
    let q = field.order() as usize;
    let r = poly.degree_bound();
    if !(r < k && k <= q) {
        return Err(Error::InvalidParams(format!(
            "need degree bound r < k <= q, got r={r}, k={k}, q={q}"
        )));
    }
    let points: Vec<FieldElement> = field.elements().take(k).collect();
    let values: Vec<FieldElement> = points.iter().map(|&x| poly.eval(x)).collect();
    let mut columns = Vec::with_capacity(q);
    for shift in field.elements() {
        let col = values.iter().map(|&v| field.add(v, shift).index() as u32).collect();
        columns.push(col);
    }
    BlockBinaryMatrix::new(k, q, columns)
}

/// Composition rule: combine columns pairwise into blocks of size n_a * n_b.
///
/// Only the first k blocks of each input are used. The column for the pair
/// (u from `a`, w from `b`) places its 1 in block i at u_i * n_b + w_i;
/// u's column index varies slowest in the output ordering.
pub fn compose(a: &BlockBinaryMatrix, b: &BlockBinaryMatrix, k: usize) -> Result<BlockBinaryMatrix> {
    if k < 1 || k > a.block_count() || k > b.block_count() {
        return Err(Error::InvalidParams(format!(
            "k={k} must satisfy 1 <= k <= min({}, {})",
            a.block_count(),
            b.block_count()
        )));
    }
    let n = a.block_size() * b.block_size();
    let nb = b.block_size() as u32;
    let mut columns = Vec::with_capacity(a.ncols() * b.ncols());
    for u in a.columns() {
        for w in b.columns() {
            let col = (0..k).map(|i| u[i] * nb + w[i]).collect();
            columns.push(col);
        }
    }
    BlockBinaryMatrix::new(k, n, columns)
}

/// Left fold of [`compose`]; a single input is truncated to k blocks.
pub fn compose_chain(mats: &[BlockBinaryMatrix], k: usize) -> Result<BlockBinaryMatrix> {
    let (first, rest) = mats.split_first().ok_or(Error::EmptyList)?;
    let mut acc = first.truncate_blocks(k)?;
    for m in rest {
        acc = compose(&acc, m, k)?;
    }
    Ok(acc)
}
