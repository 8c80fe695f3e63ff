use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_JACOBI_SWEEPS: usize = 100;

fn psd_tolerance<T: Scalar>(scale: T) -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * scale.max(T::one())
}

/// Lower-triangular factor `L` with `L Lᵀ = a` for a symmetric positive
/// semi-definite matrix.
///
/// Pivots within `1e-12 · max|a|` of zero are treated as exact zeros and their
/// column is cleared, so rank-deficient covariances (including the zero matrix)
/// factor cleanly. A pivot below that band is reported as non-PSD.
pub fn cholesky_psd<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.require_square()?;
    let scale = a.max_abs();
    let tol = psd_tolerance(scale);
    if !a.is_symmetric(tol.max(T::lit(1e-9) * scale)) {
        return Err(Error::invalid("covariance is not symmetric"));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot = pivot - l[(j, k)] * l[(j, k)];
        }
        if pivot < -tol {
            return Err(Error::NotPositiveSemiDefinite { row: j, pivot: pivot.to_f64_lossy() });
        }
        if pivot <= tol {
            continue;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    let n = a.require_square()?;
    let mut m = a.clone();
    let frob: T = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| a[(r, c)] * a[(r, c)]).sum();
    let slack = T::epsilon() * T::from_usize_lossy(n.max(1));
    let target = slack * slack * frob.max(T::min_positive_value());
    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: T = (0..n)
            .flat_map(|r| ((r + 1)..n).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)] * m[(r, c)])
            .sum();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence { sweeps: MAX_JACOBI_SWEEPS });
    }
    let mut eig: Vec<T> = (0..n).map(|k| m[(k, k)]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(eig)
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.require_square()?;
    let mut m = a.clone();
    let mut inv = Matrix::identity(n);
    let tol = T::epsilon() * T::from_usize_lossy(n.max(1)) * a.max_abs();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| m[(x, col)].abs().partial_cmp(&m[(y, col)].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if m[(pivot_row, col)].abs() <= tol {
            return Err(Error::Singular);
        }
        if pivot_row != col {
            for k in 0..n {
                let tmp = m[(col, k)];
                m[(col, k)] = m[(pivot_row, k)];
                m[(pivot_row, k)] = tmp;
                let tmp = inv[(col, k)];
                inv[(col, k)] = inv[(pivot_row, k)];
                inv[(pivot_row, k)] = tmp;
            }
        }
        let p = m[(col, col)];
        for k in 0..n {
            m[(col, k)] = m[(col, k)] / p;
            inv[(col, k)] = inv[(col, k)] / p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[(r, col)];
            if f == T::zero() {
                continue;
            }
            for k in 0..n {
                m[(r, k)] = m[(r, k)] - f * m[(col, k)];
                inv[(r, k)] = inv[(r, k)] - f * inv[(col, k)];
            }
        }
    }
    Ok(inv)
}

/// Spectral norm `‖a‖₂ = sqrt(λ_max(aᵀa))` of a general matrix.
pub fn spectral_norm<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let gram = a.transpose().matmul(a)?;
    let eig = symmetric_eigenvalues(&gram)?;
    Ok(eig.last().copied().unwrap_or_else(T::zero).max(T::zero()).sqrt())
}

/// Householder QR of a square matrix; `R` has a non-negative diagonal.
pub fn householder_qr<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let n = a.require_square()?;
    let mut r = a.clone();
    let mut q = Matrix::<T>::identity(n);
    for k in 0..n.saturating_sub(1) {
        let norm: T = (k..n).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (0..n).map(|i| if i < k { T::zero() } else { r[(i, k)] }).collect();
        v[k] = v[k] - alpha;
        let vnorm_sq: T = v.iter().map(|&x| x * x).sum();
        if vnorm_sq == T::zero() {
            continue;
        }
        let two_over = T::two() / vnorm_sq;
        for c in 0..n {
            let s: T = (k..n).map(|i| v[i] * r[(i, c)]).sum();
            for i in k..n {
                r[(i, c)] = r[(i, c)] - two_over * v[i] * s;
            }
        }
        for row in 0..n {
            let s: T = (k..n).map(|i| q[(row, i)] * v[i]).sum();
            for i in k..n {
                q[(row, i)] = q[(row, i)] - two_over * s * v[i];
            }
        }
    }
    // sign correction so that diag(R) >= 0
    for k in 0..n {
        if r[(k, k)] < T::zero() {
            for c in 0..n {
                r[(k, c)] = -r[(k, c)];
            }
            for row in 0..n {
                q[(row, k)] = -q[(row, k)];
            }
        }
    }
    Ok((q, r))
}

/// Determinant via LU with partial pivoting.
pub fn determinant<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let n = a.require_square()?;
    let mut m = a.clone();
    let mut det = T::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| m[(x, col)].abs().partial_cmp(&m[(y, col)].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if m[(pivot_row, col)] == T::zero() {
            return Ok(T::zero());
        }
        if pivot_row != col {
            for k in 0..n {
                let tmp = m[(col, k)];
                m[(col, k)] = m[(pivot_row, k)];
                m[(pivot_row, k)] = tmp;
            }
            det = -det;
        }
        let p = m[(col, col)];
        det = det * p;
        for r in (col + 1)..n {
            let f = m[(r, col)] / p;
            for k in col..n {
                m[(r, k)] = m[(r, k)] - f * m[(col, k)];
            }
        }
    }
    Ok(det)
}
