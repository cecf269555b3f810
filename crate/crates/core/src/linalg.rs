//! Small dense linear algebra helpers on top of nalgebra: rank-revealing
//! kernels, complex realification and least squares.

use nalgebra::{DMatrix, DVector};

use crate::moebius::C64;

/// Null space of a real matrix from its singular value decomposition.
#[derive(Debug, Clone)]
pub struct Kernel {
    /// Orthonormal basis of the null space.
    pub basis: Vec<DVector<f64>>,
    /// All `n` singular values (one per column), descending.
    pub singular_values: Vec<f64>,
    pub dimension: usize,
    /// Smallest kept singular value over the largest discarded one.
    pub gap_ratio: f64,
}

/// Kernel with singular values below `rel_tol * sigma_max` counted as zero.
pub fn kernel(a: &DMatrix<f64>, rel_tol: f64) -> Kernel {
    let (m, n) = a.shape();
    // Pad with zero rows so the decomposition yields all n right singular
    // vectors.
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.rows_mut(0, m).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * sigma_max;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let basis = order[rank..].iter().map(|&i| vt.row(i).transpose()).collect();
    let floor = sigma_max * 1e-300_f64.max(f64::EPSILON * 1e-4);
    let gap_ratio = match (rank.checked_sub(1).map(|r| sv[r]), sv.get(rank)) {
        (Some(kept), Some(&dropped)) => kept / dropped.max(floor),
        (Some(kept), None) => kept / threshold.max(floor),
        (None, _) => f64::INFINITY,
    };
    Kernel {
        dimension: n - rank,
        basis,
        singular_values: sv,
        gap_ratio,
    }
}

/// Real form `[[Re A, -Im A], [Im A, Re A]]` acting on `[Re x; Im x]`.
pub fn realify(a: &DMatrix<C64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut r = DMatrix::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let z = a[(i, j)];
            r[(i, j)] = z.re;
            r[(i, j + n)] = -z.im;
            r[(i + m, j)] = z.im;
            r[(i + m, j + n)] = z.re;
        }
    }
    r
}

/// Complex vectors from realified kernel vectors, reduced to an orthonormal
/// complex basis by Gram-Schmidt.
pub fn complex_basis(real: &[DVector<f64>], n: usize, target_dim: usize) -> Vec<DVector<C64>> {
    let mut out: Vec<DVector<C64>> = Vec::new();
    for v in real {
        let mut z = DVector::from_fn(n, |i, _| C64::new(v[i], v[i + n]));
        for b in &out {
            let proj = b.dotc(&z);
            z -= b * proj;
        }
        let norm = z.norm();
        if norm > 1e-6 {
            out.push(z / C64::new(norm, 0.0));
        }
        if out.len() == target_dim {
            break;
        }
    }
    out
}

/// Minimum-norm least squares solution of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(b, rel_tol * smax.max(f64::MIN_POSITIVE))
        .expect("both factors were computed")
}

/// Largest principal angle (in radians) between two subspaces given by
/// orthonormal bases of equal dimension.
pub fn subspace_angle(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    if a.len() != b.len() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.is_empty() {
        return 0.0;
    }
    let ma = DMatrix::from_columns(a);
    let mb = DMatrix::from_columns(b);
    let m = ma.transpose() * mb;
    let s = m.svd(false, false).singular_values;
    s.min().clamp(-1.0, 1.0).acos()
}

/// Orthonormalizes a set of vectors (real Gram-Schmidt).
pub fn orthonormalize(vs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for b in &out {
            w -= b * b.dot(&w);
        }
        let n = w.norm();
        if n > 1e-10 {
            out.push(w / n);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_rank_one() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let k = kernel(&a, 1e-8);
        assert_eq!(k.dimension, 2);
        for v in &k.basis {
            assert!((a.clone() * v).norm() < 1e-12);
        }
        assert!(k.gap_ratio > 1e10);
    }

    #[test]
    fn complex_kernel_via_realification() {
        // One complex equation in C^2: kernel of complex dimension 1.
        let a = DMatrix::from_row_slice(1, 2, &[C64::new(1.0, 1.0), C64::new(0.0, 2.0)]);
        let k = kernel(&realify(&a), 1e-8);
        assert_eq!(k.dimension, 2);
        let basis = complex_basis(&k.basis, 2, 1);
        assert_eq!(basis.len(), 1);
        assert!((a * &basis[0]).norm() < 1e-12);
    }

    #[test]
    fn least_squares_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = lstsq(&a, &b, 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
