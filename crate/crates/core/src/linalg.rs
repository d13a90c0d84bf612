//! Small dense least-squares helpers on top of `nalgebra` (computed in `f64`).

use nalgebra::{DMatrix, DVector};

use crate::scalar::{lit, to64, Real};

/// Result of a linear least-squares solve.
#[derive(Clone, Debug)]
pub struct LstsqFit<T> {
    pub coeffs: Vec<T>,
    /// Root-mean-square residual over the rows.
    pub rms: T,
    /// Largest absolute row residual.
    pub max_abs: T,
    /// Numerical rank of the design matrix.
    pub rank: usize,
    /// Right singular vectors spanning the numerical null space.
    pub null_space: Vec<Vec<T>>,
}

fn to_matrix<T: Real>(rows: &[Vec<T>]) -> DMatrix<f64> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(m, n, |i, j| to64(rows[i][j]))
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(rows: &[Vec<T>]) -> Vec<T> {
    if rows.is_empty() {
        return Vec::new();
    }
    let a = to_matrix(rows);
    let mut s: Vec<f64> = a.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|p, q| q.partial_cmp(p).unwrap_or(std::cmp::Ordering::Equal));
    s.into_iter().map(lit).collect()
}

/// Right singular vectors ordered by descending singular value.
pub fn right_singular_vectors<T: Real>(rows: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let a = to_matrix(rows);
    let n = a.ncols();
    // pad to at least n rows so that V is complete
    let a = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(&a);
        p
    } else {
        a
    };
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let s = order.iter().map(|&i| lit(svd.singular_values[i])).collect();
    let v = order
        .iter()
        .map(|&i| vt.row(i).iter().map(|&x| lit(x)).collect())
        .collect();
    (s, v)
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
///
/// Singular values below `rel_tol * σ_max` are treated as zero; the
/// corresponding right singular vectors are reported as the null space.
pub fn lstsq<T: Real>(rows: &[Vec<T>], rhs: &[T], rel_tol: f64) -> LstsqFit<T> {
    assert_eq!(rows.len(), rhs.len(), "row count mismatch");
    let n = rows.first().map_or(0, |r| r.len());
    let a = to_matrix(rows);
    let b = DVector::from_iterator(rhs.len(), rhs.iter().map(|&v| to64(v)));
    let (s, v) = right_singular_vectors(rows);
    let smax = s.first().map_or(0.0, |&x| to64(x));
    let cut = smax * rel_tol;
    let rank = s.iter().filter(|&&x| to64(x) > cut).count();
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, cut.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(n));
    let r = &a * &x - &b;
    let m = rhs.len().max(1) as f64;
    let rms = (r.norm_squared() / m).sqrt();
    let max_abs = r.amax();
    LstsqFit {
        coeffs: x.iter().map(|&c| lit(c)).collect(),
        rms: lit(rms),
        max_abs: lit(max_abs),
        rank,
        null_space: v.into_iter().skip(rank).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_overdetermined_line_fit() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let rhs: Vec<f64> = (0..10).map(|i| 2.0 + 3.0 * i as f64).collect();
        let fit = lstsq(&rows, &rhs, 1e-12);
        assert!((fit.coeffs[0] - 2.0).abs() < 1e-12);
        assert!((fit.coeffs[1] - 3.0).abs() < 1e-12);
        assert!(fit.rms < 1e-12);
        assert_eq!(fit.rank, 2);
    }

    #[test]
    fn rank_deficient_reports_null_space() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let fit = lstsq(&rows, &[2.0, 4.0, 6.0], 1e-12);
        assert_eq!(fit.rank, 1);
        assert_eq!(fit.null_space.len(), 1);
        // minimum-norm solution
        assert!((fit.coeffs[0] - 1.0).abs() < 1e-12);
        assert!((fit.coeffs[1] - 1.0).abs() < 1e-12);
        let nv = &fit.null_space[0];
        assert!((nv[0] + nv[1]).abs() < 1e-12);
    }

    #[test]
    fn singular_values_sorted() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 2.0]];
        let s = singular_values(&rows);
        assert_eq!(s.len(), 3);
        assert!((s[0] - 3.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12 && (s[2] - 1.0).abs() < 1e-12);
    }
}
