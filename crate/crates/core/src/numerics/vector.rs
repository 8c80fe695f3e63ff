use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fixed-length dense vector of model coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T> {
    entries: Vec<T>,
}

impl<T: Scalar> Vector<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { entries: vec![T::zero(); dim] }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> T) -> Self {
        Self { entries: (0..dim).map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<T> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.entries.iter()
    }

    pub(crate) fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        self.check_len(other)?;
        Ok(self.entries.iter().zip(&other.entries).map(|(&a, &b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> T {
        self.entries.iter().map(|&a| a * a).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::from_fn(self.len(), |k| self.entries[k] + other.entries[k]))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::from_fn(self.len(), |k| self.entries[k] - other.entries[k]))
    }

    /// `‖self − other‖²`
    pub fn dist_sq(&self, other: &Self) -> Result<T> {
        self.check_len(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum())
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { entries: self.entries.iter().map(|&a| a * factor).collect() }
    }

    /// `self += factor * x`
    pub fn axpy(&mut self, factor: T, x: &Self) -> Result<()> {
        self.check_len(x)?;
        for (a, &b) in self.entries.iter_mut().zip(&x.entries) {
            *a = *a + factor * b;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|a| a.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Vector<U> {
        Vector { entries: self.entries.iter().map(|a| U::lit(a.to_f64_lossy())).collect() }
    }

    /// Uniform average of equally sized vectors.
    pub fn mean_of(items: &[Self]) -> Result<Self> {
        let first = items.first().ok_or_else(|| Error::invalid("mean of an empty set of vectors"))?;
        let mut acc = Self::zeros(first.len());
        let w = T::one() / T::from_usize_lossy(items.len());
        for v in items {
            acc.axpy(w, v)?;
        }
        Ok(acc)
    }
}

impl<T> From<Vec<T>> for Vector<T> {
    fn from(entries: Vec<T>) -> Self {
        Self { entries }
    }
}

impl<T> std::ops::Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, k: usize) -> &T {
        &self.entries[k]
    }
}

impl<T> std::ops::IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, k: usize) -> &mut T {
        &mut self.entries[k]
    }
}

impl<T: fmt::Debug> fmt::Debug for Vector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.entries).finish()
    }
}
