//! Dense and tridiagonal eigen-solvers plus a few matrix helpers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Eigenvalues of a real symmetric tridiagonal matrix together with a chosen
/// subset of rows of its orthogonal eigenvector matrix.
///
/// Tracking only a few rows keeps the cost at O(n^2), which is what the
/// spectral weights `|<0|v_j>|^2` of a Jacobi matrix need.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `rows[r][j]` is component `tracked[r]` of eigenvector `j`.
    pub rows: Vec<Vec<f64>>,
    pub tracked: Vec<usize>,
}

impl TridiagEigen {
    /// Implicit QL with Wilkinson-type shifts on `diag` / `off`
    /// (`off[i]` couples `i` and `i + 1`).
    pub fn new(diag: &[f64], off: &[f64], tracked: &[usize]) -> Result<Self> {
        let n = diag.len();
        assert!(n == 0 || off.len() + 1 == n, "off-diagonal must have n-1 entries");
        let mut d = diag.to_vec();
        let mut e = vec![0.0; n];
        e[..n.saturating_sub(1)].copy_from_slice(off);
        let mut z: Vec<Vec<f64>> = tracked
            .iter()
            .map(|&r| {
                let mut row = vec![0.0; n];
                row[r] = 1.0;
                row
            })
            .collect();

        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenFailure);
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut i = m;
                let mut underflow = false;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for row in z.iter_mut() {
                        let f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&j| d[j]).collect();
        let rows = z
            .iter()
            .map(|row| order.iter().map(|&j| row[j]).collect())
            .collect();
        Ok(Self {
            values,
            rows,
            tracked: tracked.to_vec(),
        })
    }

    /// Full decomposition; `rows[i][j] = V[i][j]`.
    pub fn full(diag: &[f64], off: &[f64]) -> Result<Self> {
        let all: Vec<usize> = (0..diag.len()).collect();
        Self::new(diag, off, &all)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Entries below this fraction of the largest one are zeroed before a dense
/// eigensolve, moving eigenvalues by at most `dim * NEGLIGIBLE * max|m|`.
/// nalgebra's shifted QR returns NaN or -inf on matrices whose entries span
/// hundreds of decades (outer products of coherent vectors).
const NEGLIGIBLE: f64 = 1e-40;

/// Eigen-decomposition of a Hermitian complex matrix, ascending eigenvalues.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(DVector<f64>, DMatrix<C64>)> {
    let scale = m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()));
    let cut = NEGLIGIBLE * scale;
    let m = m.map(|z| if z.norm() < cut { ZERO } else { z });
    let eig = nalgebra::SymmetricEigen::try_new(m, 1e-15, 10_000).ok_or(Error::EigenFailure)?;
    finite(sort_eigen(eig.eigenvalues, eig.eigenvectors))
}

/// Eigen-decomposition of a real symmetric matrix, ascending eigenvalues.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let scale = m.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
    let cut = NEGLIGIBLE * scale;
    let m = m.map(|x| if x.abs() < cut { 0.0 } else { x });
    let eig = nalgebra::SymmetricEigen::try_new(m, 1e-15, 10_000).ok_or(Error::EigenFailure)?;
    finite(sort_eigen(eig.eigenvalues, eig.eigenvectors))
}

fn finite<T>(r: (DVector<f64>, T)) -> Result<(DVector<f64>, T)> {
    if r.0.iter().all(|v| v.is_finite()) {
        Ok(r)
    } else {
        Err(Error::EigenFailure)
    }
}

fn sort_eigen<T: nalgebra::Scalar + Copy>(
    values: DVector<f64>,
    vectors: DMatrix<T>,
) -> (DVector<f64>, DMatrix<T>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let vals = DVector::from_fn(n, |i, _| values[order[i]]);
    let vecs = DMatrix::from_fn(vectors.nrows(), n, |r, c| vectors[(r, order[c])]);
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<DVector<f64>> {
    hermitian_eigen(m).map(|(v, _)| v)
}

/// `exp(-i t H)` for Hermitian `H` via its spectral decomposition.
pub fn unitary_from_hermitian(h: &DMatrix<C64>, t: f64) -> Result<DMatrix<C64>> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let n = vals.len();
    let phases = DVector::from_fn(n, |j, _| C64::from_polar(1.0, -t * vals[j]));
    let scaled = DMatrix::from_fn(n, n, |r, c| vecs[(r, c)] * phases[c]);
    Ok(scaled * vecs.adjoint())
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |M - M^dagger|`.
pub fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U^dagger U - 1|`.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &DMatrix::identity(u.nrows(), u.ncols()))
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln cosh x`, accurate near zero and free of overflow for large `|x|`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    if a < 0.5 {
        let s = (0.5 * a).sinh();
        (2.0 * s * s).ln_1p()
    } else {
        a + (-2.0 * a).exp().ln_1p() - core::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn ql_matches_dense_eigen() {
        let diag = [0.3, -1.2, 2.0, 0.0, 0.7, 1.1];
        let off = [1.0, 0.5, 0.0, 2.5, -0.4];
        let full = TridiagEigen::full(&diag, &off).unwrap();
        let (vals, _) = symmetric_eigen(&dense(&diag, &off)).unwrap();
        for (a, b) in full.values.iter().zip(vals.iter()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
        // V diag V^T reproduces the matrix
        let n = diag.len();
        let v = DMatrix::from_fn(n, n, |i, j| full.rows[i][j]);
        let rebuilt = &v * DMatrix::from_diagonal(&DVector::from_vec(full.values.clone())) * v.transpose();
        assert!((rebuilt - dense(&diag, &off)).abs().max() < 1e-13);
    }

    #[test]
    fn tracked_rows_match_full() {
        let n = 40;
        let diag = vec![0.0; n];
        let off: Vec<f64> = (1..n).map(|k| ((k as f64) * (1.0 + 0.1 * k as f64)).sqrt()).collect();
        let full = TridiagEigen::full(&diag, &off).unwrap();
        let part = TridiagEigen::new(&diag, &off, &[0, n - 1]).unwrap();
        for j in 0..n {
            assert!((full.rows[0][j] - part.rows[0][j]).abs() < 1e-12);
            assert!((full.rows[n - 1][j] - part.rows[1][j]).abs() < 1e-12);
        }
        let w: f64 = part.rows[0].iter().map(|x| x * x).sum();
        assert!((w - 1.0).abs() < 1e-13);
    }

    #[test]
    fn ln_cosh_branches_agree() {
        for &x in &[0.0, 1e-8, 0.1, 0.49, 0.5, 0.51, 2.0, 30.0, -3.0] {
            let direct = if x.abs() < 1e-3 {
                x * x / 2.0 - x * x * x * x / 12.0
            } else {
                libm::log(libm::cosh(x))
            };
            assert!((ln_cosh(x) - direct).abs() <= 1e-13 * direct.abs().max(1e-300) + 1e-300, "{x}");
        }
        assert!((ln_cosh(800.0) - (800.0 - core::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn spectral_unitary_is_unitary() {
        let h = DMatrix::from_fn(5, 5, |i, j| {
            let v = C64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.3);
            if i == j { C64::new(v.re, 0.0) } else if i < j { v } else { C64::new((j + 2 * i) as f64 * 0.1, (j as f64 - i as f64) * 0.3).conj() }
        });
        assert!(hermiticity_residual(&h) < 1e-15);
        let u = unitary_from_hermitian(&h, 1.7).unwrap();
        assert!(unitarity_residual(&u) < 1e-13);
    }
}
