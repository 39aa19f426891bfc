//! Fixed-size dense linear algebra for 3×3 and 4×4 symmetric matrices.

use crate::scalar::{Ring, Scalar};

pub type Mat<T, const N: usize> = [[T; N]; N];

pub fn det3<T: Ring>(m: &Mat<T, 3>) -> T {
    let c = |i: usize, j: usize| m[i][j].clone();
    c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
        + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0))
}

/// Cofactor expansion along the first row.
pub fn det4<T: Ring>(m: &Mat<T, 4>) -> T {
    let mut acc = T::int(0);
    for j in 0..4 {
        let mut minor: [[T; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| T::int(0)));
        for r in 1..4 {
            let mut cc = 0;
            for c in 0..4 {
                if c != j {
                    minor[r - 1][cc] = m[r][c].clone();
                    cc += 1;
                }
            }
        }
        let term = m[0][j].clone() * det3(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

pub fn identity<T: Scalar, const N: usize>() -> Mat<T, N> {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { T::one() } else { T::zero() }))
}

pub fn matmul<T: Scalar, const N: usize>(a: &Mat<T, N>, b: &Mat<T, N>) -> Mat<T, N> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..N).fold(T::zero(), |s, k| s + a[i][k] * b[k][j]))
    })
}

pub fn transpose<T: Scalar, const N: usize>(a: &Mat<T, N>) -> Mat<T, N> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn matvec<T: Scalar, const N: usize>(a: &Mat<T, N>, x: &[T; N]) -> [T; N] {
    std::array::from_fn(|i| (0..N).fold(T::zero(), |s, k| s + a[i][k] * x[k]))
}

pub fn max_abs_diff<T: Scalar, const N: usize>(a: &Mat<T, N>, b: &Mat<T, N>) -> T {
    let mut m = T::zero();
    for i in 0..N {
        for j in 0..N {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-300` in magnitude.
pub fn inverse<T: Scalar, const N: usize>(a: &Mat<T, N>) -> Option<Mat<T, N>> {
    let mut m = *a;
    let mut inv = identity::<T, N>();
    for col in 0..N {
        let piv = (col..N).max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())?;
        if !(m[piv][col].abs() > T::min_positive_value()) {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col];
        for j in 0..N {
            m[col][j] = m[col][j] / p;
            inv[col][j] = inv[col][j] / p;
        }
        for r in 0..N {
            if r != col {
                let f = m[r][col];
                if f != T::zero() {
                    for j in 0..N {
                        m[r][j] = m[r][j] - f * m[col][j];
                        inv[r][j] = inv[r][j] - f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Lower Cholesky factor; `None` unless the matrix is numerically positive definite.
pub fn cholesky<T: Scalar, const N: usize>(a: &Mat<T, N>) -> Option<Mat<T, N>> {
    let mut l = [[T::zero(); N]; N];
    for i in 0..N {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Symmetric eigendecomposition.
#[derive(Clone, Debug)]
pub struct SymEigen<T, const N: usize> {
    /// Eigenvalues in ascending order.
    pub values: [T; N],
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Mat<T, N>,
}

/// Cyclic Jacobi rotations; converges quadratically for these tiny sizes.
pub fn sym_eigen<T: Scalar, const N: usize>(a: &Mat<T, N>) -> SymEigen<T, N> {
    let mut m = *a;
    let mut v = identity::<T, N>();
    let two = T::int(2);
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..N {
            diag = diag + m[i][i] * m[i][i];
            for j in (i + 1)..N {
                off = off + m[i][j] * m[i][j];
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if m[p][q] == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (two * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..N {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..N {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..N {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    SymEigen {
        values: std::array::from_fn(|k| m[order[k]][order[k]]),
        vectors: std::array::from_fn(|i| std::array::from_fn(|k| v[i][order[k]])),
    }
}

impl<T: Scalar, const N: usize> SymEigen<T, N> {
    /// V·diag(f(λ))·Vᵀ.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Mat<T, N> {
        let d: [T; N] = std::array::from_fn(|k| f(self.values[k]));
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..N).fold(T::zero(), |s, k| s + self.vectors[i][k] * d[k] * self.vectors[j][k])
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn det4_matches_eigen_product() {
        let a = [
            [4.0, 1.0, 0.5, 0.2],
            [1.0, 3.0, 0.3, 0.1],
            [0.5, 0.3, 2.0, 0.4],
            [0.2, 0.1, 0.4, 1.5],
        ];
        let e = sym_eigen(&a);
        let prod: f64 = e.values.iter().product();
        assert!((det4(&a) - prod).abs() < 1e-12);
        let back = e.reconstruct_with(|x| x);
        assert!(max_abs_diff(&a, &back) < 1e-13);
    }

    #[test]
    fn exact_det3() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let m = [
            [q(8, 3), q(4, 3), q(4, 3)],
            [q(4, 3), q(8, 3), q(4, 3)],
            [q(4, 3), q(4, 3), q(8, 3)],
        ];
        assert_eq!(det3(&m), q(256, 27));
    }

    #[test]
    fn inverse_and_cholesky() {
        let a = [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let inv = inverse(&a).unwrap();
        assert!(max_abs_diff(&matmul(&a, &inv), &identity()) < 1e-14);
        let l = cholesky(&a).unwrap();
        assert!(max_abs_diff(&matmul(&l, &transpose(&l)), &a) < 1e-14);
        assert!(cholesky(&[[1.0, 2.0], [2.0, 1.0]]).is_none());
        assert!(inverse(&[[1.0, 2.0], [2.0, 4.0]]).is_none());
    }

    #[test]
    fn eigen_sorted_and_orthonormal() {
        let mut a = [[0.0f64; 4]; 4];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = if i == j { 1.0 } else { -1.0 / 3.0 };
            }
        }
        let e = sym_eigen(&a);
        assert!(e.values[0].abs() < 1e-14);
        for k in 1..4 {
            assert!((e.values[k] - 4.0 / 3.0).abs() < 1e-14);
        }
        let vtv = matmul(&transpose(&e.vectors), &e.vectors);
        assert!(max_abs_diff(&vtv, &identity()) < 1e-14);
    }
}
