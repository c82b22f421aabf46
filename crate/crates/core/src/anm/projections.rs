//! Orthogonal projections used by the splitting solver.
//!
//! All projections are with respect to the real Frobenius inner product
//! `Re tr(Aᴴ B)`.

use nalgebra::DMatrix;

use crate::error::{dimension, Result};
use crate::linalg::{hermitian_eigen, hermitian_part};
use crate::model::C64;

/// Nearest Hermitian Toeplitz matrix: symmetrise, then replace every
/// diagonal by its mean.
pub fn project_toeplitz_hermitian(a: &DMatrix<C64>) -> DMatrix<C64> {
    let h = hermitian_part(a);
    let lags = toeplitz_lags(&h);
    toeplitz_from_lags(&lags)
}

/// Mean of each upper diagonal `k = 0..n` of a square matrix.
pub(crate) fn toeplitz_lags(h: &DMatrix<C64>) -> Vec<C64> {
    let n = h.nrows();
    (0..n)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n - k {
                acc += h[(i, i + k)];
            }
            acc / (n - k) as f64
        })
        .collect()
}

/// Hermitian Toeplitz matrix with first row `lags` (`lags[0]` taken real).
pub fn toeplitz_from_lags(lags: &[C64]) -> DMatrix<C64> {
    let n = lags.len();
    DMatrix::from_fn(n, n, |i, j| {
        if j > i {
            lags[j - i]
        } else if i > j {
            lags[i - j].conj()
        } else {
            C64::new(lags[0].re, 0.0)
        }
    })
}

/// Nearest two-level Hermitian Toeplitz matrix for an `outer x outer` grid of
/// `inner x inner` blocks: entry `((p, q), (p', q'))` depends only on the lag
/// pair `(p' - p, q' - q)`. With row-major element order the outer level is
/// the RIS row index and the inner level the column index.
pub fn project_block_toeplitz(a: &DMatrix<C64>, outer: usize, inner: usize) -> Result<DMatrix<C64>> {
    let n = outer * inner;
    if a.nrows() != n || a.ncols() != n {
        return Err(dimension(format!(
            "block Toeplitz projection expects {n}x{n}, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let h = hermitian_part(a);
    // lag (dp, dq) with dp in 0..outer, dq in -(inner-1)..inner, stored at
    // [dp][dq + inner - 1]
    let width = 2 * inner - 1;
    let mut sums = vec![C64::new(0.0, 0.0); outer * width];
    let mut counts = vec![0usize; outer * width];
    for p in 0..outer {
        for pp in p..outer {
            let dp = pp - p;
            for q in 0..inner {
                for qq in 0..inner {
                    let dq = qq as isize - q as isize;
                    if dp == 0 && dq < 0 {
                        continue;
                    }
                    let slot = dp * width + (dq + inner as isize - 1) as usize;
                    sums[slot] += h[(p * inner + q, pp * inner + qq)];
                    counts[slot] += 1;
                }
            }
        }
    }
    let lag = |dp: usize, dq: isize| {
        let slot = dp * width + (dq + inner as isize - 1) as usize;
        sums[slot] / counts[slot] as f64
    };
    Ok(DMatrix::from_fn(n, n, |r, c| {
        let (p, q) = (r / inner, r % inner);
        let (pp, qq) = (c / inner, c % inner);
        let dq = qq as isize - q as isize;
        if pp > p || (pp == p && dq > 0) {
            lag(pp - p, dq)
        } else if pp == p && dq == 0 {
            C64::new(lag(0, 0).re, 0.0)
        } else {
            lag(p - pp, -dq).conj()
        }
    }))
}

/// Nearest positive semidefinite matrix: clip negative eigenvalues.
pub fn project_psd(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let h = hermitian_part(a);
    let (values, vectors) = hermitian_eigen(&h)?;
    let n = h.nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out.gerc(C64::new(lambda, 0.0), &v, &v, C64::new(1.0, 0.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, vals: &[f64]) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |i, j| c(vals[(i * n + j) * 2 % vals.len()], vals[((i * n + j) * 2 + 1) % vals.len()]))
    }

    fn dist(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).norm()
    }

    #[test]
    fn toeplitz_fixed_point() {
        let t = toeplitz_from_lags(&[c(2.0, 0.0), c(0.5, -0.25), c(0.1, 0.3)]);
        assert!(dist(&project_toeplitz_hermitian(&t), &t) < 1e-15);
    }

    #[test]
    fn toeplitz_hand_case() {
        // [[1,0],[2,3]] -> Hermitian part [[1,1],[1,3]] -> [[2,1],[1,2]]
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let p = project_toeplitz_hermitian(&a);
        let expect = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(dist(&p, &expect) < 1e-15);
    }

    #[test]
    fn block_toeplitz_hand_case() {
        // outer = inner = 2, real symmetric input; the lag classes are
        // (0,0): diag, (0,1): (0,1),(2,3); (1,0): (0,2),(1,3);
        // (1,1): (0,3); (1,-1): (1,2)
        let vals = [
            1.0, 2.0, 3.0, 4.0, //
            2.0, 5.0, 6.0, 7.0, //
            3.0, 6.0, 8.0, 9.0, //
            4.0, 7.0, 9.0, 10.0,
        ];
        let a = DMatrix::from_row_slice(4, 4, &vals).map(|x| c(x, 0.0));
        let p = project_block_toeplitz(&a, 2, 2).unwrap();
        let d = (1.0 + 5.0 + 8.0 + 10.0) / 4.0;
        let l01 = (2.0 + 9.0) / 2.0;
        let l10 = (3.0 + 7.0) / 2.0;
        let expect = [
            d, l01, l10, 4.0, //
            l01, d, 6.0, l10, //
            l10, 6.0, d, l01, //
            4.0, l10, l01, d,
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(p[(i, j)].re, expect[i * 4 + j], epsilon = 1e-14);
                assert!(p[(i, j)].im.abs() < 1e-14);
            }
        }
        assert!(project_block_toeplitz(&a, 3, 2).is_err());
    }

    #[test]
    fn block_toeplitz_fixed_point_on_kronecker_atoms() {
        use crate::model::{steering_vector, RisGeometry};
        let g = RisGeometry::new(3, 4, 0.4, 0.35).unwrap();
        let mut t = DMatrix::<C64>::zeros(12, 12);
        for (w, el, az) in [(1.0, 50.0, 10.0), (2.5, 75.0, -20.0)] {
            let a = steering_vector(&g, el, az).unwrap();
            t += &a * a.adjoint() * c(w, 0.0);
        }
        let p = project_block_toeplitz(&t, 3, 4).unwrap();
        assert!(dist(&p, &t) < 1e-12);
    }

    #[test]
    fn psd_cases() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let p = project_psd(&d).unwrap();
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(dist(&p, &expect) < 1e-14);

        let b = random_matrix(4, &[0.3, -1.2, 0.7, 2.0, -0.4, 0.1, 0.9, -0.6, 1.1]);
        let psd = &b * b.adjoint();
        assert!(dist(&project_psd(&psd).unwrap(), &psd) < 1e-10);
    }

    #[test]
    fn psd_projection_is_nearest() {
        // Any PSD matrix is at least as far as the projection.
        let a = hermitian_part(&random_matrix(4, &[0.3, -1.2, 0.7, 2.0, -0.4, 0.1, 0.9, -0.6, 1.1, -2.2, 0.05]));
        let p = project_psd(&a).unwrap();
        let best = dist(&a, &p);
        let (vals, vecs) = hermitian_eigen(&a).unwrap();
        // exhaustive rebuild: the candidate that keeps each subset of
        // non-negative eigen-directions, plus perturbed PSD candidates
        for mask in 0u32..16 {
            let mut cand = DMatrix::<C64>::zeros(4, 4);
            for k in 0..4 {
                if mask & (1 << k) != 0 {
                    let v = vecs.column(k);
                    cand += &v * v.adjoint() * c(vals[k].max(0.0), 0.0);
                }
            }
            assert!(dist(&a, &cand) >= best - 1e-12);
        }
        let e = random_matrix(4, &[0.01, 0.02, -0.03, 0.015]);
        let bumped = project_psd(&(&p + &e * e.adjoint())).unwrap();
        assert!(dist(&a, &bumped) >= best - 1e-12);
        // distance equals the norm of the clipped eigenvalues
        let clipped: f64 = vals.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum::<f64>().sqrt();
        assert_relative_eq!(best, clipped, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn projections_idempotent_and_self_adjoint(vals in proptest::collection::vec(-3.0f64..3.0, 72), other in proptest::collection::vec(-3.0f64..3.0, 72)) {
            let a = random_matrix(6, &vals);
            let b = random_matrix(6, &other);
            let inner = |x: &DMatrix<C64>, y: &DMatrix<C64>| x.iter().zip(y.iter()).map(|(p, q)| (p.conj() * q).re).sum::<f64>();

            let t = project_toeplitz_hermitian(&a);
            prop_assert!(dist(&project_toeplitz_hermitian(&t), &t) < 1e-12);
            let tb = project_toeplitz_hermitian(&b);
            prop_assert!((inner(&t, &b) - inner(&a, &tb)).abs() < 1e-9);

            let blk = project_block_toeplitz(&a, 2, 3).unwrap();
            prop_assert!(dist(&project_block_toeplitz(&blk, 2, 3).unwrap(), &blk) < 1e-12);
            let blkb = project_block_toeplitz(&b, 2, 3).unwrap();
            prop_assert!((inner(&blk, &b) - inner(&a, &blkb)).abs() < 1e-9);

            let p = project_psd(&a).unwrap();
            prop_assert!(dist(&project_psd(&p).unwrap(), &p) < 1e-9);
            prop_assert!(crate::linalg::min_eigenvalue(&p).unwrap() > -1e-10);
        }
    }
}
