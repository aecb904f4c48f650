//! Generators for the k x k unitaries embedded into skeletons: DCT, DFT,
//! normalized Sylvester Hadamard, and identity. The largest entry modulus
//! alpha of the embedded unitary drives the coherence bound min(r*alpha^2, 1).

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which generator produced a unitary (file stands for a user-supplied one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitaryKind {
    Dct,
    Dft,
    Hadamard,
    File,
}

impl std::fmt::Display for UnitaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            UnitaryKind::Dct => "dct",
            UnitaryKind::Dft => "dft",
            UnitaryKind::Hadamard => "hadamard",
            UnitaryKind::File => "file",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for UnitaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dct" => Ok(UnitaryKind::Dct),
            "dft" => Ok(UnitaryKind::Dft),
            "hadamard" => Ok(UnitaryKind::Hadamard),
            "file" => Ok(UnitaryKind::File),
            other => Err(Error::Parse(format!(
                "unknown unitary kind '{other}' (expected dct|dft|hadamard|file)"
            ))),
        }
    }
}

/// A validated k x k unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    mat: DMatrix<Complex64>,
    kind: UnitaryKind,
}

/// Max |(U U* - I)_{ij}| <= tol.
pub fn is_unitary(mat: &DMatrix<Complex64>, tol: f64) -> bool {
    unitary_deviation(mat) <= tol
}

fn unitary_deviation(mat: &DMatrix<Complex64>) -> f64 {
    if !mat.is_square() {
        return f64::INFINITY;
    }
    let k = mat.nrows();
    let gram = mat * mat.adjoint();
    let mut dev = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let expected = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            dev = dev.max((gram[(i, j)] - expected).norm());
        }
    }
    dev
}

/// Orthonormal DCT-II matrix: row 0 scaled by sqrt(1/k), the rest
/// sqrt(2/k) * cos((pi/k)(j + 0.5) i).
pub fn dct(k: usize) -> UnitaryMatrix {
    assert!(k >= 1, "dct order must be >= 1");
    let mat = DMatrix::from_fn(k, k, |i, j| {
        let scale = if i == 0 { (1.0 / k as f64).sqrt() } else { (2.0 / k as f64).sqrt() };
        let angle = PI / k as f64 * (j as f64 + 0.5) * i as f64;
        Complex64::new(scale * angle.cos(), 0.0)
    });
    UnitaryMatrix { mat, kind: UnitaryKind::Dct }
}

/// DFT matrix with entries (1/sqrt(k)) * exp(-2 pi i * mn / k).
pub fn dft(k: usize) -> UnitaryMatrix {
    assert!(k >= 1, "dft order must be >= 1");
    let scale = 1.0 / (k as f64).sqrt();
    let mat = DMatrix::from_fn(k, k, |i, j| {
        let angle = -2.0 * PI * (i * j % k) as f64 / k as f64;
        Complex64::new(scale * angle.cos(), scale * angle.sin())
    });
    UnitaryMatrix { mat, kind: UnitaryKind::Dft }
}

/// Sylvester Hadamard matrix of order k scaled by 1/sqrt(k); k must be a
/// power of two. For other orders the DFT provides unimodular entries.
pub fn hadamard(k: usize) -> Result<UnitaryMatrix> {
    if k == 0 || !k.is_power_of_two() {
        return Err(Error::UnsupportedOrder(k));
    }
    let scale = 1.0 / (k as f64).sqrt();
    // Sign of entry (i, j) in the Sylvester construction is (-1)^(popcount(i & j)).
    let mat = DMatrix::from_fn(k, k, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * scale, 0.0)
    });
    Ok(UnitaryMatrix { mat, kind: UnitaryKind::Hadamard })
}

pub fn identity(k: usize) -> UnitaryMatrix {
    UnitaryMatrix { mat: DMatrix::identity(k, k), kind: UnitaryKind::File }
}

impl UnitaryMatrix {
    /// Validate an arbitrary square matrix as unitary within tol.
    pub fn from_matrix(mat: DMatrix<Complex64>, tol: f64) -> Result<UnitaryMatrix> {
        let dev = unitary_deviation(&mat);
        if dev > tol {
            return Err(Error::NotUnitary { tol, dev });
        }
        Ok(UnitaryMatrix { mat, kind: UnitaryKind::File })
    }

    pub fn order(&self) -> usize {
        self.mat.nrows()
    }

    pub fn kind(&self) -> UnitaryKind {
        self.kind
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// alpha: maximum entry modulus.
    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        is_unitary(&self.mat, tol)
    }
}

/// Generate a unitary of the given kind; `File` is not generable here.
pub fn generate(kind: UnitaryKind, k: usize) -> Result<UnitaryMatrix> {
    match kind {
        UnitaryKind::Dct => Ok(dct(k)),
        UnitaryKind::Dft => Ok(dft(k)),
        UnitaryKind::Hadamard => hadamard(k),
        UnitaryKind::File => Err(Error::InvalidParams(
            "unitary kind 'file' requires --unitary-file".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn dct_small_orders() {
        let u = dct(1);
        assert!((u.entry(0, 0).re - 1.0).abs() < TOL);

        // Direct evaluation of the two-case formula at k = 2.
        let u = dct(2);
        let h = 0.5f64.sqrt();
        assert!((u.entry(0, 0).re - h).abs() < TOL);
        assert!((u.entry(0, 1).re - h).abs() < TOL);
        assert!((u.entry(1, 0).re - h).abs() < TOL);
        assert!((u.entry(1, 1).re + h).abs() < TOL);
        assert!((u.max_abs_entry().powi(2) - 0.5).abs() < TOL);
    }

    #[test]
    fn dct_alpha_bound() {
        for k in 1..=64 {
            let u = dct(k);
            assert!(u.max_abs_entry() <= (2.0 / k as f64).sqrt() + TOL, "k={k}");
        }
    }

    #[test]
    fn dft_entries_are_unimodular_over_sqrt_k() {
        let u = dft(2);
        let h = 0.5f64.sqrt();
        for (i, j, want) in [(0, 0, h), (0, 1, h), (1, 0, h), (1, 1, -h)] {
            assert!((u.entry(i, j).re - want).abs() < TOL);
            assert!(u.entry(i, j).im.abs() < TOL);
        }
        for k in [3usize, 5, 8, 17] {
            let u = dft(k);
            let want = 1.0 / (k as f64).sqrt();
            for z in u.matrix().iter() {
                assert!((z.norm() - want).abs() < TOL);
            }
            assert!((u.max_abs_entry().powi(2) - 1.0 / k as f64).abs() < TOL);
        }
    }

    #[test]
    fn hadamard_orders() {
        let h2 = hadamard(2).unwrap();
        let d2 = dft(2);
        for i in 0..2 {
            for j in 0..2 {
                assert!((h2.entry(i, j) - d2.entry(i, j)).norm() < TOL);
            }
        }
        let h4 = hadamard(4).unwrap();
        for z in h4.matrix().iter() {
            assert!((z.re.abs() - 0.5).abs() < TOL);
        }
        // Kronecker square of the order-2 Hadamard.
        let expect = [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((h4.entry(i, j).re - 0.5 * expect[i][j]).abs() < TOL);
            }
        }
        assert!(matches!(hadamard(12), Err(Error::UnsupportedOrder(12))));
        assert!(hadamard(1).is_ok());
    }

    #[test]
    fn generators_are_unitary_up_to_64() {
        for k in 1..=64usize {
            assert!(dct(k).is_unitary(TOL), "dct({k})");
            assert!(dft(k).is_unitary(TOL), "dft({k})");
            if k.is_power_of_two() {
                assert!(hadamard(k).unwrap().is_unitary(TOL), "hadamard({k})");
            }
        }
    }

    #[test]
    fn max_abs_entry_examples() {
        assert!((dft(5).max_abs_entry() - 1.0 / 5.0f64.sqrt()).abs() < TOL);
        assert!(dct(8).max_abs_entry() <= 0.5 + TOL);
        assert!((identity(3).max_abs_entry() - 1.0).abs() < TOL);
    }

    #[test]
    fn non_unitary_is_rejected() {
        let half = Complex64::new(0.5, 0.0);
        let rank_one = DMatrix::from_element(2, 2, half);
        assert!(!is_unitary(&rank_one, 1e-12));
        assert!(UnitaryMatrix::from_matrix(rank_one, 1e-12).is_err());
        assert!(is_unitary(identity(4).matrix(), 1e-12));
        assert!(dft(7).is_unitary(1e-12));
    }
}
