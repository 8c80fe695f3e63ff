use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_BINARY_LAMBDA: f64 = 0.5;

/// Non-decreasing criterion `φ` on `[0, 1]` with `φ(0) = 0` and `φ(x) ≤ x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion<T> {
    /// `φ(x) = λ · 1{x ≥ λ}`
    Binary { lambda: T },
    /// `φ(x) = x`
    Continuous,
}

impl<T: Scalar> Criterion<T> {
    pub fn binary(lambda: T) -> Result<Self> {
        if !(lambda > T::zero() && lambda <= T::one()) {
            return Err(Error::invalid(format!("binary lambda must lie in (0, 1], got {lambda}")));
        }
        Ok(Criterion::Binary { lambda })
    }

    pub fn phi(&self, x: T) -> T {
        match *self {
            Criterion::Binary { lambda } => {
                if x >= lambda {
                    lambda
                } else {
                    T::zero()
                }
            }
            Criterion::Continuous => x.max(T::zero()),
        }
    }

    pub fn psi(&self, x: T) -> T {
        x * self.phi(x)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Criterion::Binary { .. } => "bin",
            Criterion::Continuous => "cont",
        }
    }
}

impl<T: Scalar> fmt::Display for Criterion<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Binary { lambda } => write!(f, "binary(lambda={lambda})"),
            Criterion::Continuous => write!(f, "continuous"),
        }
    }
}
