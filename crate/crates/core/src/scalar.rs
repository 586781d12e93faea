//! Scalar backends: exact cyclotomic numbers and complex floats.

use crate::cyclo::CycNumber;
use crate::linalg::{self, LinalgError, Nullspace, RowBasis, Tolerance};
use num_complex::Complex64;
use std::fmt::Debug;

pub trait Scalar: Clone + Send + Sync + Debug + PartialEq + 'static {
    const EXACT: bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn conj(&self) -> Self;
    fn from_cyc(c: &CycNumber) -> Self;
    fn to_c64(&self) -> Complex64;

    /// `self += a * b`
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        if !a.is_zero() && !b.is_zero() {
            *self = self.add(&a.mul(b));
        }
    }

    fn nullspace(rows: &[Vec<Self>], ncols: usize, tol: Tolerance) -> Result<Nullspace<Self>, LinalgError>;
    fn row_basis(vectors: &[Vec<Self>], len: usize, tol: Tolerance) -> Result<RowBasis<Self>, LinalgError>;
    /// Nullspace with singular values judged against at least `scale`.
    fn nullspace_scaled(rows: &[Vec<Self>], ncols: usize, tol: Tolerance, _scale: f64) -> Result<Nullspace<Self>, LinalgError> {
        Self::nullspace(rows, ncols, tol)
    }
}

impl Scalar for CycNumber {
    const EXACT: bool = true;
    fn zero_like(&self) -> Self {
        CycNumber::zero(self.order())
    }
    fn one_like(&self) -> Self {
        CycNumber::one(self.order())
    }
    fn is_zero(&self) -> bool {
        CycNumber::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        CycNumber::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        CycNumber::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        CycNumber::mul(self, o)
    }
    fn neg(&self) -> Self {
        CycNumber::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        CycNumber::inv(self).ok()
    }
    fn conj(&self) -> Self {
        CycNumber::conj(self)
    }
    fn from_cyc(c: &CycNumber) -> Self {
        c.clone()
    }
    fn to_c64(&self) -> Complex64 {
        CycNumber::to_c64(self)
    }
    fn nullspace(rows: &[Vec<Self>], ncols: usize, _tol: Tolerance) -> Result<Nullspace<Self>, LinalgError> {
        Ok(linalg::exact_nullspace(rows, ncols))
    }
    fn row_basis(vectors: &[Vec<Self>], len: usize, _tol: Tolerance) -> Result<RowBasis<Self>, LinalgError> {
        Ok(linalg::exact_row_basis(vectors, len))
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_cyc(c: &CycNumber) -> Self {
        c.to_c64()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn nullspace(rows: &[Vec<Self>], ncols: usize, tol: Tolerance) -> Result<Nullspace<Self>, LinalgError> {
        linalg::float_nullspace(rows, ncols, tol)
    }
    fn nullspace_scaled(rows: &[Vec<Self>], ncols: usize, tol: Tolerance, scale: f64) -> Result<Nullspace<Self>, LinalgError> {
        linalg::float_nullspace_scaled(rows, ncols, tol, scale)
    }
    fn row_basis(vectors: &[Vec<Self>], len: usize, tol: Tolerance) -> Result<RowBasis<Self>, LinalgError> {
        linalg::float_row_basis(vectors, len, tol)
    }
}

/// Dot product `Σ a_k b_k` (no conjugation).
pub fn dot<S: Scalar>(a: &[S], b: &[S], zero: &S) -> S {
    let mut acc = zero.clone();
    for (x, y) in a.iter().zip(b) {
        acc.add_mul_assign(x, y);
    }
    acc
}
