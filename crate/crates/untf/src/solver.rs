//! Orthogonal matching pursuit, sparse test-signal generation, and the
//! SNR/success metrics used by the recovery benchmark.
//!
//! Trials are embarrassingly parallel: every trial owns a generator seeded
//! from (master seed, sparsity, trial index), so results are identical
//! regardless of scheduling or thread count.

use crate::error::{Error, Result};
use crate::frame::DenseMatrix;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// SNR value reported when the reconstruction error is zero.
pub const SNR_CAP_DB: f64 = 300.0;

/// Relative singular-value threshold below which an OMP support submatrix is
/// treated as rank-deficient.
const SINGULAR_RATIO_TOL: f64 = 1e-10;

/// An s-sparse real-valued signal of a given length.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    length: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(length: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        let distinct = entries.windows(2).all(|w| w[0].0 < w[1].0);
        if !distinct || entries.iter().any(|&(i, _)| i >= length) {
            return Err(Error::InvalidSparsity { s: entries.len(), len: length });
        }
        let (support, values) = entries.into_iter().unzip();
        Ok(SparseSignal { length, support, values })
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// Sorted nonzero indices.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn to_dense(&self) -> DVector<Complex64> {
        let mut x = DVector::from_element(self.length, Complex64::new(0.0, 0.0));
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = Complex64::new(v, 0.0);
        }
        x
    }
}

/// Support drawn uniformly without replacement; nonzeros i.i.d. standard
/// normal (real-valued even for complex frames).
pub fn random_sparse_signal(length: usize, s: usize, rng: &mut impl Rng) -> Result<SparseSignal> {
    if s < 1 || s > length {
        return Err(Error::InvalidSparsity { s, len: length });
    }
    // Partial Fisher-Yates over the index range.
    let mut indices: Vec<usize> = (0..length).collect();
    for i in 0..s {
        let j = rng.gen_range(i..length);
        indices.swap(i, j);
    }
    let entries = indices[..s]
        .iter()
        .map(|&i| (i, StandardNormal.sample(rng)))
        .collect();
    SparseSignal::new(length, entries)
}

/// Result of one OMP run scored against the true signal.
#[derive(Debug, Clone)]
pub struct RecoveryOutcome {
    pub estimate: DVector<Complex64>,
    pub snr_db: f64,
    /// snr_db strictly above the threshold (or at the cap).
    pub exact: bool,
    pub iterations: usize,
}

/// Greedy solution state returned by [`omp`].
#[derive(Debug, Clone)]
pub struct OmpSolution {
    /// Dense coefficient vector supported on the selected set.
    pub coefficients: DVector<Complex64>,
    /// Selected column indices in selection order.
    pub support: Vec<usize>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Run exactly s OMP iterations: pick the column with the largest
/// |<residual, phi_j>| (ties broken by lowest index), least-squares project
/// onto the accumulated support, update the residual.
///
/// Columns of `a` are expected unit-norm (the selection rule uses raw inner
/// products, as stated).
pub fn omp(a: &DenseMatrix, y: &DVector<Complex64>, s: usize) -> Result<OmpSolution> {
    let (d, m) = (a.nrows(), a.ncols());
    if s < 1 || s > d {
        return Err(Error::InvalidSparsity { s, len: d });
    }
    if y.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "measurement length {} does not match {d} rows",
            y.len()
        )));
    }

    let mut residual = y.clone();
    let mut support: Vec<usize> = Vec::with_capacity(s);
    let mut selected = vec![false; m];
    let mut coeffs = DVector::from_element(m, Complex64::new(0.0, 0.0));

    for _ in 0..s {
        let mut best = usize::MAX;
        let mut best_corr = -1.0f64;
        for j in 0..m {
            if selected[j] {
                continue;
            }
            let corr = a.column(j).dotc(&residual).norm();
            if corr > best_corr {
                best_corr = corr;
                best = j;
            }
        }
        support.push(best);
        selected[best] = true;

        // Least squares on the accumulated support via SVD; the singular
        // spectrum doubles as the rank-deficiency check.
        let sub = a.select_columns(support.iter());
        let svd = sub.svd(true, true);
        let (smax, smin) = {
            let vals = &svd.singular_values;
            let mut hi = 0.0f64;
            let mut lo = f64::INFINITY;
            for &v in vals.iter() {
                hi = hi.max(v);
                lo = lo.min(v);
            }
            (hi, lo)
        };
        if smax == 0.0 || smin / smax < SINGULAR_RATIO_TOL {
            return Err(Error::SingularSupport { ratio: if smax == 0.0 { 0.0 } else { smin / smax } });
        }
        let sol = svd
            .solve(y, 0.0)
            .map_err(|e| Error::NumericalFailure(format!("least-squares solve failed: {e}")))?;

        coeffs.fill(Complex64::new(0.0, 0.0));
        for (t, &j) in support.iter().enumerate() {
            coeffs[j] = sol[t];
        }
        residual = y - &sub * sol;
    }

    Ok(OmpSolution {
        coefficients: coeffs,
        support,
        residual_norm: residual.norm(),
        iterations: s,
    })
}

/// SNR = 10 log10(|x| / |x_hat - x|), capped at [`SNR_CAP_DB`].
pub fn snr_db(x: &DVector<Complex64>, x_hat: &DVector<Complex64>) -> Result<f64> {
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let err = (x_hat - x).norm();
    if err == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (nx / err).log10()).min(SNR_CAP_DB))
}

/// Form y = A x, solve with OMP at the true sparsity, and score the result.
pub fn recover(
    a: &DenseMatrix,
    x: &SparseSignal,
    threshold_db: f64,
) -> Result<RecoveryOutcome> {
    let x_dense = x.to_dense();
    let y = a * &x_dense;
    let sol = omp(a, &y, x.sparsity())?;
    let snr = snr_db(&x_dense, &sol.coefficients)?;
    Ok(RecoveryOutcome {
        estimate: sol.coefficients,
        snr_db: snr,
        exact: snr > threshold_db || snr >= SNR_CAP_DB,
        iterations: sol.iterations,
    })
}

/// Per-sparsity-level aggregate over seeded trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStats {
    pub trials: u32,
    pub successes: u32,
    pub mean_snr_db: f64,
}

impl LevelStats {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Generator for trial i at sparsity s under a master seed.
pub fn trial_rng(master_seed: u64, s: usize, trial: usize) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&(s as u64).to_le_bytes());
    seed[16..24].copy_from_slice(&(trial as u64).to_le_bytes());
    seed[24..32].copy_from_slice(b"untftrig");
    ChaCha8Rng::from_seed(seed)
}

/// Run seeded trials at one sparsity level and aggregate.
pub fn run_level(
    a: &DenseMatrix,
    s: usize,
    trials: u32,
    master_seed: u64,
    threshold_db: f64,
) -> Result<LevelStats> {
    if trials < 1 {
        return Err(Error::InvalidParams("trials must be >= 1".into()));
    }
    let outcomes: Result<Vec<(bool, f64)>> = (0..trials as usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, s, i);
            let x = random_sparse_signal(a.ncols(), s, &mut rng)?;
            let out = recover(a, &x, threshold_db)?;
            Ok((out.snr_db > threshold_db, out.snr_db))
        })
        .collect();
    let outcomes = outcomes?;
    let successes = outcomes.iter().filter(|(ok, _)| *ok).count() as u32;
    let mean = outcomes.iter().map(|(_, snr)| snr).sum::<f64>() / trials as f64;
    Ok(LevelStats { trials, successes, mean_snr_db: mean })
}

/// Fraction of seeded trials whose SNR exceeds the threshold.
pub fn success_rate(
    a: &DenseMatrix,
    s: usize,
    trials: u32,
    master_seed: u64,
    threshold_db: f64,
) -> Result<f64> {
    Ok(run_level(a, s, trials, master_seed, threshold_db)?.rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{coherence, guarantee_general};
    use crate::frame::{build_frame, gaussian_frame};
    use crate::unitary::dft;

    #[test]
    fn single_atom_is_recovered_exactly() {
        let a = gaussian_frame(8, 20, 3);
        for i in [0usize, 7, 19] {
            let y = DVector::from_iterator(8, (0..8).map(|r| a[(r, i)]));
            let sol = omp(&a, &y, 1).unwrap();
            assert_eq!(sol.support, vec![i]);
            let mut err = 0.0f64;
            for j in 0..20 {
                let want = if j == i { 1.0 } else { 0.0 };
                err = err.max((sol.coefficients[j] - Complex64::new(want, 0.0)).norm());
            }
            assert!(err < 1e-12, "max coefficient error {err}");
        }
    }

    #[test]
    fn sparsity_bounds_are_checked() {
        let a = gaussian_frame(6, 10, 1);
        let y = DVector::from_element(6, Complex64::new(1.0, 0.0));
        assert!(matches!(omp(&a, &y, 0), Err(Error::InvalidSparsity { .. })));
        assert!(matches!(omp(&a, &y, 7), Err(Error::InvalidSparsity { .. })));
    }

    #[test]
    fn duplicate_column_support_is_singular() {
        // Two identical columns force a rank-deficient 2-column support.
        let mut a = gaussian_frame(6, 2, 5);
        for i in 0..6 {
            a[(i, 1)] = a[(i, 0)];
        }
        let y = DVector::from_iterator(6, (0..6).map(|r| a[(r, 0)]));
        match omp(&a, &y, 2) {
            Err(Error::SingularSupport { .. }) => {}
            other => panic!("expected SingularSupport, got {other:?}"),
        }
    }

    #[test]
    fn residual_is_monotone_and_orthogonal_to_support() {
        let a = gaussian_frame(12, 30, 11);
        for trial in 0..20 {
            let mut rng = trial_rng(11, 4, trial);
            let x = random_sparse_signal(30, 4, &mut rng).unwrap();
            let y = &a * x.to_dense();

            let mut prev = y.norm();
            for s in 1..=4 {
                let sol = omp(&a, &y, s).unwrap();
                assert!(sol.residual_norm <= prev + 1e-10, "residual grew at s={s}");
                prev = sol.residual_norm;

                let sub = a.select_columns(sol.support.iter());
                let resid = &y - &sub * DVector::from_iterator(
                    sol.support.len(),
                    sol.support.iter().map(|&j| sol.coefficients[j]),
                );
                for &j in &sol.support {
                    assert!(a.column(j).dotc(&resid).norm() < 1e-10);
                }
            }
        }
    }

    // Oracle: exhaustive search over all supports of the given size.
    fn oracle_zero_residual(a: &DenseMatrix, y: &DVector<Complex64>, s: usize, tol: f64) -> bool {
        let m = a.ncols();
        let mut supports: Vec<Vec<usize>> = Vec::new();
        match s {
            1 => supports.extend((0..m).map(|i| vec![i])),
            2 => {
                for i in 0..m {
                    for j in i + 1..m {
                        supports.push(vec![i, j]);
                    }
                }
            }
            3 => {
                for i in 0..m {
                    for j in i + 1..m {
                        for l in j + 1..m {
                            supports.push(vec![i, j, l]);
                        }
                    }
                }
            }
            _ => panic!("oracle supports s <= 3"),
        }
        supports.iter().any(|sup| {
            let sub = a.select_columns(sup.iter());
            let svd = sub.svd(true, true);
            match svd.solve(y, 1e-12) {
                Ok(c) => (y - sub * c).norm() < tol,
                Err(_) => false,
            }
        })
    }

    #[test]
    fn omp_matches_exhaustive_oracle_when_residual_is_zero() {
        let mut agree = 0;
        let mut total = 0;
        for inst in 0..25u64 {
            let a = gaussian_frame(12, 20, 100 + inst);
            for s in 1..=3usize {
                let mut rng = trial_rng(200 + inst, s, 0);
                let x = random_sparse_signal(20, s, &mut rng).unwrap();
                let y = &a * x.to_dense();
                let oracle = oracle_zero_residual(&a, &y, s, 1e-8);
                assert!(oracle, "the planted support always has zero residual");
                let sol = omp(&a, &y, s).unwrap();
                total += 1;
                if sol.residual_norm < 1e-8 {
                    agree += 1;
                }
                if s == 1 {
                    assert!(sol.residual_norm < 1e-8, "s=1 must always agree");
                }
            }
        }
        // OMP is not globally optimal, but random 12x20 instances at s <= 3
        // are overwhelmingly recoverable.
        assert!(agree * 10 >= total * 9, "agreement {agree}/{total}");
    }

    #[test]
    fn signal_generation_is_reproducible_and_in_range() {
        let mut rng = trial_rng(9, 5, 0);
        let a = random_sparse_signal(50, 5, &mut rng).unwrap();
        let mut rng = trial_rng(9, 5, 0);
        let b = random_sparse_signal(50, 5, &mut rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sparsity(), 5);
        assert!(a.support().windows(2).all(|w| w[0] < w[1]));

        let mut rng = trial_rng(9, 50, 1);
        let full = random_sparse_signal(50, 50, &mut rng).unwrap();
        assert_eq!(full.support(), (0..50).collect::<Vec<_>>());

        assert!(random_sparse_signal(50, 0, &mut rng).is_err());
        assert!(random_sparse_signal(50, 51, &mut rng).is_err());
    }

    #[test]
    fn support_sampling_is_uniform() {
        let length = 100;
        let s = 5;
        let draws = 10_000;
        let mut counts = vec![0usize; length];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..draws {
            let x = random_sparse_signal(length, s, &mut rng).unwrap();
            for &i in x.support() {
                counts[i] += 1;
            }
        }
        let expected = s as f64 / length as f64;
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / draws as f64;
            assert!((freq - expected).abs() < 0.01, "index {i}: {freq}");
        }
    }

    #[test]
    fn snr_formula_and_cap() {
        let x = DVector::from_element(1, Complex64::new(1.0, 0.0));
        assert_eq!(snr_db(&x, &x).unwrap(), SNR_CAP_DB);

        let mut xh = DVector::from_element(2, Complex64::new(0.0, 0.0));
        let mut x2 = DVector::from_element(2, Complex64::new(0.0, 0.0));
        x2[0] = Complex64::new(1.0, 0.0);
        xh[0] = Complex64::new(1.0, 0.0);
        xh[1] = Complex64::new(1e-10, 0.0);
        let snr = snr_db(&x2, &xh).unwrap();
        assert!((snr - 100.0).abs() < 1e-9, "snr = {snr}");

        xh[1] = Complex64::new(1.0, 0.0);
        assert!(snr_db(&x2, &xh).unwrap().abs() < 1e-12);

        let zero = DVector::from_element(2, Complex64::new(0.0, 0.0));
        assert!(matches!(snr_db(&zero, &xh), Err(Error::ZeroSignal)));
    }

    #[test]
    fn snr_is_invariant_under_joint_rotation() {
        let u = dft(4);
        let x = DVector::from_iterator(
            4,
            [1.0, -0.5, 0.25, 2.0].iter().map(|&v| Complex64::new(v, 0.0)),
        );
        let xh = DVector::from_iterator(
            4,
            [1.1, -0.4, 0.2, 1.9].iter().map(|&v| Complex64::new(v, 0.0)),
        );
        let before = snr_db(&x, &xh).unwrap();
        let after = snr_db(&(u.matrix() * &x), &(u.matrix() * &xh)).unwrap();
        assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn guaranteed_regime_always_succeeds() {
        let frame = build_frame(5, 5, 1, &dft(5)).unwrap();
        let mu = coherence(&frame).unwrap();
        let s_max = guarantee_general(mu).unwrap() as usize;
        assert_eq!(s_max, 2);
        let dense = frame.to_dense().unwrap();
        for s in 1..=s_max {
            let rate = success_rate(&dense, s, 100, 17, 100.0).unwrap();
            assert_eq!(rate, 1.0, "s = {s}");
        }
    }

    #[test]
    fn success_rate_is_deterministic() {
        let a = gaussian_frame(10, 40, 2);
        let r1 = success_rate(&a, 3, 50, 77, 100.0).unwrap();
        let r2 = success_rate(&a, 3, 50, 77, 100.0).unwrap();
        assert_eq!(r1, r2);
        let s1_rate = success_rate(&a, 1, 50, 77, 100.0).unwrap();
        assert_eq!(s1_rate, 1.0);
    }
}
