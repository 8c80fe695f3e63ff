use super::linalg::{cholesky_psd, householder_qr};
use super::matrix::Matrix;
use super::rng::RngStream;
use super::vector::Vector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn standard_normal_vector<T: Scalar>(stream: &mut RngStream, dim: usize) -> Vector<T> {
    Vector::from_fn(dim, |_| T::sample_standard_normal(stream))
}

/// Gaussian sampler with a cached covariance factor.
#[derive(Debug, Clone)]
pub struct GaussianSampler<T> {
    mean: Vector<T>,
    factor: Matrix<T>,
}

impl<T: Scalar> GaussianSampler<T> {
    pub fn new(mean: Vector<T>, covariance: &Matrix<T>) -> Result<Self> {
        if covariance.rows() != mean.len() || covariance.cols() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), found: covariance.rows() });
        }
        let factor = cholesky_psd(covariance)?;
        Ok(Self { mean, factor })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn factor(&self) -> &Matrix<T> {
        &self.factor
    }

    /// `mean + L z` with `z` standard normal.
    pub fn sample(&self, stream: &mut RngStream) -> Vector<T> {
        let z = standard_normal_vector(stream, self.dim());
        let mut x = self.factor.mul_vec(&z).expect("factor is dim x dim");
        x.axpy(T::one(), &self.mean).expect("mean has sampler dimension");
        x
    }
}

pub fn sample_gaussian_vector<T: Scalar>(
    stream: &mut RngStream,
    mean: &Vector<T>,
    covariance: &Matrix<T>,
) -> Result<Vector<T>> {
    Ok(GaussianSampler::new(mean.clone(), covariance)?.sample(stream))
}

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn sample_orthogonal_matrix<T: Scalar>(stream: &mut RngStream, dim: usize) -> Result<Matrix<T>> {
    if dim == 0 {
        return Err(Error::invalid("orthogonal matrix dimension must be at least 1"));
    }
    let g = Matrix::from_fn(dim, dim, |_, _| T::sample_standard_normal(stream));
    let (q, _) = householder_qr(&g)?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{determinant, Purpose};

    fn stream(client: usize) -> RngStream {
        RngStream::for_client(1729, client, Purpose::Custom(0))
    }

    #[test]
    fn zero_covariance_returns_mean() {
        let mean = Vector::<f64>::zeros(2);
        for c in 0..4 {
            let x = sample_gaussian_vector(&mut stream(c), &mean, &Matrix::zeros(2, 2)).unwrap();
            assert_eq!(x.as_slice(), &[0.0, 0.0]);
        }
    }

    #[test]
    fn sample_mean_matches() {
        // std error of a coordinate mean over 1e5 unit-variance draws is ~0.00316,
        // the ±0.02 band is more than 6 standard errors wide.
        let mean = Vector::from(vec![5.0, 5.0]);
        let sampler = GaussianSampler::new(mean, &Matrix::identity(2)).unwrap();
        let mut s = stream(0);
        let n = 100_000;
        let mut acc = Vector::<f64>::zeros(2);
        for _ in 0..n {
            acc.axpy(1.0 / n as f64, &sampler.sample(&mut s)).unwrap();
        }
        assert!((acc[0] - 5.0).abs() < 0.02 && (acc[1] - 5.0).abs() < 0.02, "{acc:?}");
    }

    #[test]
    fn deterministic_given_stream() {
        let mean = Vector::from(vec![1.0, -1.0]);
        let cov = Matrix::from_rows(vec![vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let a = sample_gaussian_vector(&mut stream(9), &mean, &cov).unwrap();
        let b = sample_gaussian_vector(&mut stream(9), &mean, &cov).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn rejects_bad_covariance() {
        let mean = Vector::<f64>::zeros(2);
        assert!(matches!(
            sample_gaussian_vector(&mut stream(0), &mean, &Matrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let indefinite = Matrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            sample_gaussian_vector(&mut stream(0), &mean, &indefinite),
            Err(Error::NotPositiveSemiDefinite { .. })
        ));
    }

    #[test]
    fn orthogonal_matrices() {
        assert!(sample_orthogonal_matrix::<f64>(&mut stream(0), 0).is_err());
        let p1 = sample_orthogonal_matrix::<f64>(&mut stream(0), 1).unwrap();
        assert_eq!(p1[(0, 0)].abs(), 1.0);
        for d in [2, 5, 10] {
            let p = sample_orthogonal_matrix::<f64>(&mut stream(d), d).unwrap();
            let ptp = p.transpose().matmul(&p).unwrap();
            assert!(ptp.try_sub(&Matrix::identity(d)).unwrap().max_abs() <= 1e-10);
            assert!((determinant(&p).unwrap().abs() - 1.0).abs() <= 1e-8);
        }
        let a = sample_orthogonal_matrix::<f64>(&mut stream(1), 2).unwrap();
        let b = sample_orthogonal_matrix::<f64>(&mut stream(2), 2).unwrap();
        assert_ne!(a, b);
    }
}
