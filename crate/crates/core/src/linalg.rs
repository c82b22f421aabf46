//! Small dense linear-algebra helpers shared across modules.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::C64;

const EIG_EPS: f64 = 1e-14;
const EIG_MAX_ITER: usize = 10_000;

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part(a: &DMatrix<C64>) -> DMatrix<C64> {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> Result<(DVector<f64>, DMatrix<C64>)> {
    let eig = a
        .clone()
        .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_fn(n, |k, _| eig.eigenvalues[order[k]]);
    let vectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok((values, vectors))
}

pub fn min_eigenvalue(a: &DMatrix<C64>) -> Result<f64> {
    Ok(hermitian_eigen(&hermitian_part(a))?.0.min())
}

/// Roots of the monic polynomial `z^K + c[0] z^{K-1} + … + c[K-1]` as the
/// eigenvalues of its companion matrix, refined by two Newton steps.
pub fn monic_roots(c: &[C64]) -> Result<Vec<C64>> {
    let k = c.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite polynomial coefficient".into()));
    }
    let mut roots = if k == 1 {
        vec![-c[0]]
    } else {
        let mut companion = DMatrix::<C64>::zeros(k, k);
        for j in 0..k {
            companion[(0, j)] = -c[j];
        }
        for i in 1..k {
            companion[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        let schur = nalgebra::linalg::Schur::try_new(companion, EIG_EPS, EIG_MAX_ITER)
            .ok_or_else(|| Error::Numerical("companion eigensolver did not converge".into()))?;
        schur
            .eigenvalues()
            .ok_or_else(|| Error::Numerical("companion matrix not triangularised".into()))?
            .iter()
            .copied()
            .collect()
    };
    for z in roots.iter_mut() {
        for _ in 0..2 {
            // Horner for p and p'
            let (mut p, mut dp) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
            for &ci in c {
                dp = dp * *z + p;
                p = p * *z + ci;
            }
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.norm().is_finite() {
                    *z -= step;
                }
            }
        }
    }
    Ok(roots)
}

/// Maximum-weight perfect matching on a square score matrix by exhaustive
/// search. Returns `perm` with row `i` matched to column `perm[i]`. Ties go
/// to the lexicographically smallest permutation.
pub fn max_weight_assignment(score: &DMatrix<f64>) -> Vec<usize> {
    let k = score.nrows();
    assert_eq!(k, score.ncols(), "assignment needs a square score matrix");
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..k).permutations(k) {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| score[(i, j)]).sum();
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, perm));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn roots_of_known_polynomial() {
        // (z - 1)(z - i)(z + 2) = z^3 + (1 - i) z^2 + (-2 - i) z + 2i
        let c = [C64::new(1.0, -1.0), C64::new(-2.0, -1.0), C64::new(0.0, 2.0)];
        let mut r = monic_roots(&c).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let expect = [C64::new(-2.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)];
        for (a, b) in r.iter().zip(expect) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn assignment_prefers_heavy_diagonal_and_breaks_ties_lexicographically() {
        let s = DMatrix::from_row_slice(3, 3, &[0.0, 5.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(max_weight_assignment(&s), vec![1, 0, 2]);
        let tie = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(max_weight_assignment(&tie), vec![0, 1]);
    }

    #[test]
    fn eigen_is_sorted() {
        let a = DMatrix::from_row_slice(2, 2, &[C64::new(3.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(3.0, 0.0)]);
        let (v, _) = hermitian_eigen(&a).unwrap();
        assert_relative_eq!(v[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(v[1], 4.0, epsilon = 1e-12);
    }
}
