//! Frame-property measurement (coherence, frame bounds, density, MUB check)
//! and the recovery-guarantee calculators.
//!
//! Coherence is an exhaustive pair scan over the Gram matrix; no sampling.
//! The scan is parallelized over the left column index with a max-reduction,
//! so the result is independent of scheduling.

use crate::error::{Error, Result};
use crate::frame::{DenseMatrix, StructuredFrame};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Exact nonzero ratio of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Density {
    pub nonzeros: u64,
    pub total: u64,
}

impl Density {
    pub fn value(&self) -> f64 {
        self.nonzeros as f64 / self.total as f64
    }

    /// Equality as reduced fractions.
    pub fn equals_ratio(&self, num: u64, den: u64) -> bool {
        self.nonzeros as u128 * den as u128 == num as u128 * self.total as u128
    }
}

/// Measured properties of one frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameReport {
    pub coherence: f64,
    pub frame_bounds: (f64, f64),
    pub density: Density,
    pub q_bases: Option<u64>,
    pub is_mub: bool,
    /// min(r * alpha^2, 1) when construction metadata is available.
    pub coherence_bound: Option<f64>,
}

/// Default tolerance for the mutually-unbiased check on |<b, b'>|^2.
pub const MUB_TOL: f64 = 1e-12;
/// Tolerance for per-basis orthonormality inside the MUB check.
const BASIS_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

/// Maximum |<phi_i, phi_j>| / (|phi_i| |phi_j|) over all distinct column pairs.
pub fn coherence(frame: &StructuredFrame) -> Result<f64> {
    let m = frame.ncols();
    if m < 2 {
        return Err(Error::TooFewColumns(m));
    }
    let norms: Vec<f64> = (0..m).map(|j| frame.column_norm(j)).collect();
    let best = (0..m - 1)
        .into_par_iter()
        .map(|i| {
            let mut local = 0.0f64;
            for j in i + 1..m {
                let g = frame.column_dot(i, j).norm() / (norms[i] * norms[j]);
                local = local.max(g);
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Coherence of a dense matrix by the same exhaustive scan.
pub fn coherence_dense(mat: &DenseMatrix) -> Result<f64> {
    let m = mat.ncols();
    if m < 2 {
        return Err(Error::TooFewColumns(m));
    }
    let norms: Vec<f64> = (0..m).map(|j| mat.column(j).norm()).collect();
    let best = (0..m - 1)
        .into_par_iter()
        .map(|i| {
            let ci = mat.column(i);
            let mut local = 0.0f64;
            for j in i + 1..m {
                let g = ci.dotc(&mat.column(j)).norm() / (norms[i] * norms[j]);
                local = local.max(g);
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

// ---------------------------------------------------------------------------
// Frame bounds (eigenvalues of Phi Phi*)
// ---------------------------------------------------------------------------

/// (A, B) = smallest and largest eigenvalue of Phi Phi*.
pub fn frame_bounds(frame: &StructuredFrame) -> Result<(f64, f64)> {
    let (lo, hi, _) = frame_operator_eigenvalues(frame)?;
    Ok((lo, hi))
}

/// All eigenvalues of the frame operator, ascending, plus the extremes.
pub fn frame_operator_eigenvalues(frame: &StructuredFrame) -> Result<(f64, f64, Vec<f64>)> {
    let d = frame.dim();
    let mut gram = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for col in frame.columns() {
        for &(i, vi) in col {
            for &(j, vj) in col {
                gram[(i as usize, j as usize)] += vi * vj.conj();
            }
        }
    }
    eigen_range(gram)
}

pub fn frame_bounds_dense(mat: &DenseMatrix) -> Result<(f64, f64)> {
    let gram = mat * mat.adjoint();
    let (lo, hi, _) = eigen_range(gram)?;
    Ok((lo, hi))
}

fn eigen_range(gram: DMatrix<Complex64>) -> Result<(f64, f64, Vec<f64>)> {
    let eig = SymmetricEigen::try_new(gram, 1e-13, 10_000)
        .ok_or_else(|| Error::NumericalFailure("eigensolve did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues of a Hermitian matrix are finite"));
    let lo = *vals.first().expect("matrix is nonempty");
    let hi = *vals.last().expect("matrix is nonempty");
    Ok((lo, hi, vals))
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

/// Structural density of a structured frame: stored entries over d * M.
pub fn density(frame: &StructuredFrame) -> Density {
    Density {
        nonzeros: (frame.nnz_per_col() * frame.ncols()) as u64,
        total: (frame.dim() * frame.ncols()) as u64,
    }
}

/// Exact count of entries with nonzero value.
pub fn density_dense(mat: &DenseMatrix) -> Density {
    let nonzeros = mat.iter().filter(|z| z.re != 0.0 || z.im != 0.0).count() as u64;
    Density { nonzeros, total: (mat.nrows() * mat.ncols()) as u64 }
}

// ---------------------------------------------------------------------------
// Mutually unbiased bases
// ---------------------------------------------------------------------------

/// True when the frame's contiguous d-column groups are orthonormal bases
/// and every cross-basis pair satisfies ||<b, b'>|^2 - 1/d| <= tol.
pub fn is_mub(frame: &StructuredFrame, tol: f64) -> bool {
    let d = frame.dim();
    let m = frame.ncols();
    if m % d != 0 {
        return false;
    }
    let q = m / d;
    let dot = |i: usize, j: usize| frame.column_dot(i, j);
    is_mub_impl(d, q, dot, tol)
}

/// Dense-matrix variant partitioned into contiguous d-column groups.
pub fn is_mub_dense(mat: &DenseMatrix, tol: f64) -> bool {
    let d = mat.nrows();
    let m = mat.ncols();
    if m % d != 0 {
        return false;
    }
    let q = m / d;
    let dot = |i: usize, j: usize| mat.column(i).dotc(&mat.column(j));
    is_mub_impl(d, q, dot, tol)
}

fn is_mub_impl(d: usize, q: usize, dot: impl Fn(usize, usize) -> Complex64, tol: f64) -> bool {
    let inv_d = 1.0 / d as f64;
    for b in 0..q {
        for i in 0..d {
            for j in i..d {
                let g = dot(b * d + i, b * d + j);
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - Complex64::new(want, 0.0)).norm() > BASIS_TOL {
                    return false;
                }
            }
        }
    }
    for b1 in 0..q {
        for b2 in b1 + 1..q {
            for i in 0..d {
                for j in 0..d {
                    let g = dot(b1 * d + i, b2 * d + j).norm_sqr();
                    if (g - inv_d).abs() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Recovery-guarantee calculators
// ---------------------------------------------------------------------------

/// Sparsity levels admitted by the general and union-of-bases bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuaranteeReport {
    pub mu: f64,
    pub q_bases: u64,
    pub s_general: u64,
    pub s_union: u64,
}

/// Largest integer strictly below `bound`, with a guard against float fuzz
/// at integer boundaries.
fn largest_int_strictly_below(bound: f64) -> u64 {
    let rounded = bound.round();
    let v = if (bound - rounded).abs() < 1e-9 { rounded - 1.0 } else { bound.floor() };
    if v < 0.0 {
        0
    } else {
        v as u64
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) || !mu.is_finite() {
        return Err(Error::DomainError(format!("coherence must lie in (0, 1], got {mu}")));
    }
    Ok(())
}

/// Largest s with s < (1 + 1/mu) / 2.
pub fn guarantee_general(mu: f64) -> Result<u64> {
    check_mu(mu)?;
    Ok(largest_int_strictly_below(0.5 * (1.0 + 1.0 / mu)))
}

/// Largest s with s < [sqrt(2) - 1 + 1/(2(Q-1))] / mu, for a union of Q bases.
pub fn guarantee_union(mu: f64, q_bases: u64) -> Result<u64> {
    check_mu(mu)?;
    if q_bases < 2 {
        return Err(Error::DomainError(format!("union bound needs Q >= 2, got {q_bases}")));
    }
    let bound = (2.0f64.sqrt() - 1.0 + 0.5 / (q_bases as f64 - 1.0)) / mu;
    Ok(largest_int_strictly_below(bound))
}

pub fn guarantees(mu: f64, q_bases: u64) -> Result<GuaranteeReport> {
    Ok(GuaranteeReport {
        mu,
        q_bases,
        s_general: guarantee_general(mu)?,
        s_union: guarantee_union(mu, q_bases)?,
    })
}

/// Mixed-support recovery condition for a union of Q bases:
/// sum_{i>=2} mu*s_i / (1 + mu*s_i) < 1 / (2 (1 + mu*s_1)),
/// with s_list sorted ascending.
pub fn check_mixed_support(mu: f64, s_list: &[u64]) -> Result<bool> {
    check_mu(mu)?;
    if s_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::NotSorted);
    }
    let Some((&s1, rest)) = s_list.split_first() else {
        return Ok(true);
    };
    let left: f64 = rest
        .iter()
        .map(|&s| {
            let t = mu * s as f64;
            t / (1.0 + t)
        })
        .sum();
    let right = 1.0 / (2.0 * (1.0 + mu * s1 as f64));
    Ok(left < right)
}

/// Two-basis concatenation condition: 2 mu^2 s1 s2 + mu s2 < 1, s1 <= s2.
pub fn check_two_basis(mu: f64, s1: u64, s2: u64) -> Result<bool> {
    check_mu(mu)?;
    if s1 > s2 {
        return Err(Error::BadOrder { s1, s2 });
    }
    let (s1, s2) = (s1 as f64, s2 as f64);
    Ok(2.0 * mu * mu * s1 * s2 + mu * s2 < 1.0)
}

// ---------------------------------------------------------------------------
// Whole-frame report
// ---------------------------------------------------------------------------

/// Measure everything the report carries for a structured frame.
pub fn report(frame: &StructuredFrame) -> Result<FrameReport> {
    let meta = frame.meta();
    let bound = (meta.r as f64 * meta.alpha * meta.alpha).min(1.0);
    Ok(FrameReport {
        coherence: coherence(frame)?,
        frame_bounds: frame_bounds(frame)?,
        density: density(frame),
        q_bases: Some(meta.q_bases),
        is_mub: is_mub(frame, MUB_TOL),
        coherence_bound: Some(bound),
    })
}

/// Report for a dense matrix without construction metadata.
pub fn report_dense(mat: &DenseMatrix) -> Result<FrameReport> {
    let q = if mat.ncols() % mat.nrows() == 0 { Some((mat.ncols() / mat.nrows()) as u64) } else { None };
    Ok(FrameReport {
        coherence: coherence_dense(mat)?,
        frame_bounds: frame_bounds_dense(mat)?,
        density: density_dense(mat),
        q_bases: q,
        is_mub: is_mub_dense(mat, MUB_TOL),
        coherence_bound: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_frame, gaussian_frame};
    use crate::unitary::{dct, dft};

    #[test]
    fn single_basis_coherence_is_zero() {
        let frame = build_frame(3, 3, 1, &dft(3)).unwrap();
        let d = frame.dim();
        let one_basis = StructuredFrame::from_parts(
            d,
            frame.nnz_per_col(),
            frame.columns()[..d].to_vec(),
            frame.meta().clone(),
        )
        .unwrap();
        assert!(coherence(&one_basis).unwrap() < 1e-12);
    }

    // Brute force over all 351 distinct pairs of the 9x27 frame.
    #[test]
    fn gf3_frame_coherence_is_one_third() {
        let frame = build_frame(3, 3, 1, &dft(3)).unwrap();
        let mu = coherence(&frame).unwrap();
        assert!((mu - 1.0 / 3.0).abs() < 1e-12, "mu = {mu}");

        let dense = frame.to_dense().unwrap();
        let mut brute = 0.0f64;
        let mut pairs = 0;
        for i in 0..27 {
            for j in i + 1..27 {
                brute = brute.max(dense.column(i).dotc(&dense.column(j)).norm());
                pairs += 1;
            }
        }
        assert_eq!(pairs, 351);
        assert!((mu - brute).abs() < 1e-14);
    }

    #[test]
    fn mub_frame_coherence_is_one_fifth() {
        let frame = build_frame(5, 5, 1, &dft(5)).unwrap();
        let mu = coherence(&frame).unwrap();
        assert!((mu - 0.2).abs() < 1e-12);
        assert!(is_mub(&frame, MUB_TOL));
    }

    #[test]
    fn dct_frame_is_not_mub() {
        let frame = build_frame(5, 5, 1, &dct(5)).unwrap();
        assert!(!is_mub(&frame, MUB_TOL));
    }

    #[test]
    fn composite_frame_coherence_bounded() {
        let frame = build_frame(6, 2, 1, &dft(2)).unwrap();
        let mu = coherence(&frame).unwrap();
        assert!(mu <= 0.5 + 1e-12, "mu = {mu}");
        // Brute-force over the densified matrix agrees.
        let dense = frame.to_dense().unwrap();
        assert!((mu - coherence_dense(&dense).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn frame_bounds_of_unions_equal_basis_count() {
        let frame = build_frame(5, 5, 1, &dft(5)).unwrap();
        let (a, b) = frame_bounds(&frame).unwrap();
        assert!((a - 5.0).abs() < 1e-9 && (b - 5.0).abs() < 1e-9, "({a}, {b})");

        let single = StructuredFrame::from_parts(
            25,
            5,
            frame.columns()[..25].to_vec(),
            frame.meta().clone(),
        )
        .unwrap();
        let (a, b) = frame_bounds(&single).unwrap();
        assert!((a - 1.0).abs() < 1e-9 && (b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_frames_are_not_tight() {
        let g = gaussian_frame(25, 125, 7);
        let (a, b) = frame_bounds_dense(&g).unwrap();
        assert!(b - a > 1e-3, "Gaussian bounds ({a}, {b}) should be strictly separated");
        assert!(!is_mub_dense(&g, MUB_TOL));
        assert!(density_dense(&g).equals_ratio(1, 1));
    }

    #[test]
    fn density_is_exact() {
        let frame = build_frame(5, 3, 2, &dft(3)).unwrap();
        assert!(density(&frame).equals_ratio(1, 5));
        let frame = build_frame(6, 2, 1, &dft(2)).unwrap();
        assert!(density(&frame).equals_ratio(1, 6));
    }

    #[test]
    fn guarantee_values_from_the_inequalities() {
        assert_eq!(guarantee_general(0.2).unwrap(), 2);
        assert_eq!(guarantee_general(1.0).unwrap(), 0);
        assert_eq!(guarantee_general(1.0 / 3.0).unwrap(), 1);
        assert_eq!(guarantee_union(0.2, 2).unwrap(), 4);
        assert_eq!(guarantee_union(0.2, 5).unwrap(), 2);
        assert!(guarantee_general(0.0).is_err());
        assert!(guarantee_general(1.5).is_err());
        assert!(guarantee_union(0.2, 1).is_err());
    }

    #[test]
    fn union_bound_is_less_restrictive_for_two_bases() {
        for k in 2..=50u64 {
            let mu = 1.0 / k as f64;
            assert!(
                guarantee_union(mu, 2).unwrap() >= guarantee_general(mu).unwrap(),
                "k = {k}"
            );
        }
    }

    #[test]
    fn mixed_support_condition() {
        assert!(check_mixed_support(0.3, &[0, 0]).unwrap());
        assert!(check_mixed_support(0.2, &[1, 2]).unwrap());
        assert!(!check_mixed_support(0.5, &[2, 2, 2]).unwrap());
        assert!(check_mixed_support(0.2, &[]).unwrap());
        assert!(matches!(check_mixed_support(0.2, &[2, 1]), Err(Error::NotSorted)));
    }

    #[test]
    fn two_basis_condition() {
        assert!(check_two_basis(0.7, 0, 0).unwrap());
        assert!(check_two_basis(0.2, 1, 2).unwrap());
        assert!(!check_two_basis(0.5, 1, 2).unwrap());
        assert!(matches!(check_two_basis(0.2, 2, 1), Err(Error::BadOrder { .. })));
    }

    #[test]
    fn report_respects_the_coherence_bound() {
        for (m, k, r) in [(5u64, 3usize, 2usize), (6, 2, 1), (12, 3, 1)] {
            let frame = build_frame(m, k, r, &dft(k)).unwrap();
            let rep = report(&frame).unwrap();
            let bound = rep.coherence_bound.unwrap();
            assert!(rep.coherence <= bound + 1e-12, "(m,k,r)=({m},{k},{r})");
            assert!(rep.coherence <= r as f64 / k as f64 + 1e-12);
        }
    }
}
