//! Scalar abstraction so expressions and symmetric-function algebra evaluate
//! uniformly over plain reals, truncated jets, and first-order differentials.

use crate::error::{Error, Result};

/// Arithmetic carrier for generic evaluation. Constants are produced by the
/// evaluation context (a jet constant needs to know its variable count), so
/// there is no `from_f64` here.
pub trait Scalar: Clone {
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self>;
    /// A constant with the same shape (jet dimension, slot count) as `self`.
    fn const_like(&self, v: f64) -> Self;
    /// Multiplication by a plain constant.
    fn scale(&self, c: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    /// Power with a literal constant exponent. Integer exponents keep `powi`
    /// semantics (negative bases allowed); fractional exponents need a
    /// positive base.
    fn powc(&self, c: f64) -> Result<Self>;
    fn value(&self) -> f64;
}

pub(crate) fn is_integer(c: f64) -> bool {
    c.fract() == 0.0 && c.abs() < 1e9
}

impl Scalar for f64 {
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            return Err(Error::singular("division by zero"));
        }
        Ok(self / rhs)
    }
    fn const_like(&self, v: f64) -> Self {
        v
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self> {
        if *self <= 0.0 {
            return Err(Error::singular(format!("log of non-positive value {self}")));
        }
        Ok(f64::ln(*self))
    }
    fn sqrt(&self) -> Result<Self> {
        if *self <= 0.0 {
            return Err(Error::singular(format!("sqrt of non-positive value {self}")));
        }
        Ok(f64::sqrt(*self))
    }
    fn powc(&self, c: f64) -> Result<Self> {
        if is_integer(c) {
            if *self == 0.0 && c < 0.0 {
                return Err(Error::singular("zero raised to negative power"));
            }
            Ok(self.powi(c as i32))
        } else {
            if *self <= 0.0 {
                return Err(Error::singular(format!(
                    "fractional power of non-positive base {self}"
                )));
            }
            Ok(self.powf(c))
        }
    }
    fn value(&self) -> f64 {
        *self
    }
}
