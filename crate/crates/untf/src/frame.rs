//! Embedding unitaries into skeletons and assembling the full structured
//! frame: a union of m^r orthonormal bases in dimension d = mk, stored
//! column-sparsely with k entries per column. Also provides the dense
//! Gaussian comparison matrices.

use crate::error::{Error, Result};
use crate::gf::make_field;
use crate::skeleton::{build_skeleton, compose_chain, enumerate_polynomials, BlockBinaryMatrix};
use crate::unitary::UnitaryMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Dense complex matrix used for Gaussian baselines and Gram computations.
pub type DenseMatrix = DMatrix<Complex64>;

/// One frame column: (row, value) pairs sorted by row.
pub type SparseColumn = Vec<(u32, Complex64)>;

/// Cap on dense materialization (entries).
pub const DENSE_ENTRY_CAP: u64 = 1 << 24;

/// A maximal prime-power factor p^e of the frame dimension parameter m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePower {
    pub p: u64,
    pub e: u32,
    pub q: u64,
}

/// Construction metadata carried with every structured frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub m: u64,
    pub k: usize,
    pub r: usize,
    /// Number of orthonormal bases, m^r.
    pub q_bases: u64,
    /// Maximal prime-power factorization of m.
    pub factors: Vec<PrimePower>,
    pub unitary: String,
    /// Largest entry modulus over all embedded unitaries.
    pub alpha: f64,
}

/// A union of Q orthonormal bases in dimension d = mk, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredFrame {
    d: usize,
    nnz_per_col: usize,
    columns: Vec<SparseColumn>,
    meta: FrameMeta,
}

impl StructuredFrame {
    pub fn from_parts(d: usize, nnz_per_col: usize, columns: Vec<SparseColumn>, meta: FrameMeta) -> Result<Self> {
        for col in &columns {
            if col.len() != nnz_per_col {
                return Err(Error::ShapeMismatch(format!(
                    "column holds {} entries, expected {nnz_per_col}",
                    col.len()
                )));
            }
            if col.iter().any(|&(row, _)| row as usize >= d) {
                return Err(Error::ShapeMismatch(format!("row index out of range 0..{d}")));
            }
        }
        Ok(StructuredFrame { d, nnz_per_col, columns, meta })
    }

    /// Ambient dimension d = mk.
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    /// Stored entries per column (k).
    pub fn nnz_per_col(&self) -> usize {
        self.nnz_per_col
    }

    /// Number of bases Q = m^r.
    pub fn basis_count(&self) -> usize {
        self.meta.q_bases as usize
    }

    pub fn meta(&self) -> &FrameMeta {
        &self.meta
    }

    pub fn column(&self, j: usize) -> &SparseColumn {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseColumn] {
        &self.columns
    }

    /// Inner product <col_i, col_j> over the merged supports.
    pub fn column_dot(&self, i: usize, j: usize) -> Complex64 {
        sparse_dot(&self.columns[i], &self.columns[j])
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.columns[j].iter().map(|(_, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Exact densification (columns of the frame become matrix columns).
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let entries = self.d as u128 * self.ncols() as u128;
        if entries > DENSE_ENTRY_CAP as u128 {
            return Err(Error::DenseTooLarge { entries, cap: DENSE_ENTRY_CAP });
        }
        let mut mat = DMatrix::from_element(self.d, self.ncols(), Complex64::new(0.0, 0.0));
        for (j, col) in self.columns.iter().enumerate() {
            for &(row, v) in col {
                mat[(row as usize, j)] = v;
            }
        }
        Ok(mat)
    }
}

/// <u, w> = sum over shared rows of conj(u) * w.
pub fn sparse_dot(u: &SparseColumn, w: &SparseColumn) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let (mut a, mut b) = (0, 0);
    while a < u.len() && b < w.len() {
        match u[a].0.cmp(&w[b].0) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                acc += u[a].1.conj() * w[b].1;
                a += 1;
                b += 1;
            }
        }
    }
    acc
}

/// Replace every 1 in each skeleton column with a row of U: the block-i
/// entry of skeleton column j becomes row i of U, producing k frame columns
/// per skeleton column (U's column index varies fastest).
pub fn embed(v: &BlockBinaryMatrix, u: &UnitaryMatrix) -> Result<Vec<SparseColumn>> {
    let k = v.block_count();
    if u.order() != k {
        return Err(Error::ShapeMismatch(format!(
            "skeleton has {k} blocks but the unitary has order {}",
            u.order()
        )));
    }
    if !u.is_unitary(1e-10) {
        return Err(Error::NotUnitary { tol: 1e-10, dev: f64::NAN });
    }
    let n = v.block_size();
    let mut out = Vec::with_capacity(v.ncols() * k);
    for j in 0..v.ncols() {
        let positions = v.column(j);
        for l in 0..k {
            let col: SparseColumn = (0..k)
                .map(|i| ((i * n + positions[i] as usize) as u32, u.entry(i, l)))
                .collect();
            out.push(col);
        }
    }
    Ok(out)
}

/// Maximal prime-power factorization of m, ascending by prime.
pub fn prime_power_factors(m: u64) -> Result<Vec<PrimePower>> {
    if m < 2 {
        return Err(Error::InvalidParams(format!("m must be >= 2, got {m}")));
    }
    let mut rest = m;
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            let mut e = 0u32;
            let mut q = 1u64;
            while rest % p == 0 {
                rest /= p;
                e += 1;
                q *= p;
            }
            out.push(PrimePower { p, e, q });
        }
        p += 1;
    }
    if rest > 1 {
        out.push(PrimePower { p: rest, e: 1, q: rest });
    }
    Ok(out)
}

/// Build the structured frame for (m, k, r) with one shared unitary.
pub fn build_frame(m: u64, k: usize, r: usize, u: &UnitaryMatrix) -> Result<StructuredFrame> {
    build_frame_with(m, k, r, |_| u.clone())
}

/// Per-basis unitary hook: `pick(basis_index)` supplies the unitary for each
/// of the m^r bases (indexed in lexicographic polynomial-tuple order).
pub fn build_frame_with(
    m: u64,
    k: usize,
    r: usize,
    mut pick: impl FnMut(usize) -> UnitaryMatrix,
) -> Result<StructuredFrame> {
    let factors = prime_power_factors(m)?;
    let k_max = factors.iter().map(|f| f.q).min().expect("m >= 2 has at least one factor");
    if r < 1 {
        return Err(Error::InvalidParams("r must be >= 1".into()));
    }
    if !(r < k && k as u64 <= k_max) {
        return Err(Error::InvalidParams(format!(
            "need r < k <= {k_max} (smallest maximal prime-power factor of m={m}), got r={r}, k={k}"
        )));
    }

    // One skeleton per polynomial per factor, then one basis per tuple.
    let mut skeletons: Vec<Vec<BlockBinaryMatrix>> = Vec::with_capacity(factors.len());
    for f in &factors {
        let field = make_field(f.p, f.e)?;
        let polys = enumerate_polynomials(&field, r)?;
        let vs: Result<Vec<BlockBinaryMatrix>> = polys.iter().map(|p| build_skeleton(p, k)).collect();
        skeletons.push(vs?);
    }

    let d = (m as usize) * k;
    let q_bases = m.pow(r as u32);
    let mut columns = Vec::with_capacity(d * q_bases as usize);
    let mut alpha = 0.0f64;
    let mut unitary = String::new();

    // Lexicographic tuple order: the first factor's polynomial index varies
    // slowest.
    let mut tuple = vec![0usize; factors.len()];
    for basis_index in 0..q_bases as usize {
        let chain: Vec<BlockBinaryMatrix> =
            tuple.iter().enumerate().map(|(t, &i)| skeletons[t][i].clone()).collect();
        let v = compose_chain(&chain, k)?;
        let u = pick(basis_index);
        if u.order() != k {
            return Err(Error::ShapeMismatch(format!(
                "unitary for basis {basis_index} has order {}, expected {k}",
                u.order()
            )));
        }
        if basis_index == 0 {
            unitary = u.kind().to_string();
        }
        alpha = alpha.max(u.max_abs_entry());
        columns.extend(embed(&v, &u)?);

        for t in (0..tuple.len()).rev() {
            tuple[t] += 1;
            if tuple[t] < skeletons[t].len() {
                break;
            }
            tuple[t] = 0;
        }
    }

    let meta = FrameMeta { m, k, r, q_bases, factors, unitary, alpha };
    StructuredFrame::from_parts(d, k, columns, meta)
}

/// Dense d x cols matrix with i.i.d. standard normal entries (drawn column
/// by column) and unit-norm columns; identical output for identical seeds.
pub fn gaussian_frame(d: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mat = DMatrix::from_element(d, cols, Complex64::new(0.0, 0.0));
    for j in 0..cols {
        let mut norm_sq = 0.0f64;
        for i in 0..d {
            let x: f64 = StandardNormal.sample(&mut rng);
            mat[(i, j)] = Complex64::new(x, 0.0);
            norm_sq += x * x;
        }
        let norm = norm_sq.sqrt();
        for i in 0..d {
            mat[(i, j)] /= norm;
        }
    }
    mat
}
