//! First-order differential scalars with a fixed set of derivative slots.
//!
//! Used for the shape-operator family calculus: each slot carries the
//! covariant derivative of a quantity along one frame direction (or one
//! normal-slot perturbation), and ordinary arithmetic propagates all slots by
//! the chain rule.

use crate::error::{Error, Result};
use crate::scalar::{is_integer, Scalar};

pub const MAX_SLOTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DScalar {
    pub v: f64,
    pub d: [f64; MAX_SLOTS],
    pub ns: usize,
}

impl DScalar {
    pub fn constant(ns: usize, v: f64) -> Self {
        debug_assert!(ns <= MAX_SLOTS);
        DScalar {
            v,
            d: [0.0; MAX_SLOTS],
            ns,
        }
    }

    pub fn with_derivs(v: f64, d: &[f64]) -> Self {
        debug_assert!(d.len() <= MAX_SLOTS);
        let mut out = DScalar::constant(d.len(), v);
        out.d[..d.len()].copy_from_slice(d);
        out
    }

    #[inline]
    pub fn slot(&self, k: usize) -> f64 {
        self.d[k]
    }

    fn lift(&self, f0: f64, f1: f64) -> Self {
        let mut out = DScalar::constant(self.ns, f0);
        for k in 0..self.ns {
            out.d[k] = f1 * self.d[k];
        }
        out
    }
}

impl Scalar for DScalar {
    fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.ns, rhs.ns);
        let mut out = *self;
        out.v += rhs.v;
        for k in 0..self.ns {
            out.d[k] += rhs.d[k];
        }
        out
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }
    fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.ns, rhs.ns);
        let mut out = DScalar::constant(self.ns, self.v * rhs.v);
        for k in 0..self.ns {
            out.d[k] = self.v * rhs.d[k] + self.d[k] * rhs.v;
        }
        out
    }
    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.v == 0.0 {
            return Err(Error::singular("division by zero differential"));
        }
        let iv = 1.0 / rhs.v;
        Ok(self.mul(&rhs.lift(iv, -iv * iv)))
    }
    fn const_like(&self, v: f64) -> Self {
        DScalar::constant(self.ns, v)
    }
    fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.v *= c;
        for k in 0..self.ns {
            out.d[k] *= c;
        }
        out
    }
    fn sin(&self) -> Self {
        self.lift(self.v.sin(), self.v.cos())
    }
    fn cos(&self) -> Self {
        self.lift(self.v.cos(), -self.v.sin())
    }
    fn exp(&self) -> Self {
        let e = self.v.exp();
        self.lift(e, e)
    }
    fn ln(&self) -> Result<Self> {
        if self.v <= 0.0 {
            return Err(Error::singular("log of non-positive differential"));
        }
        Ok(self.lift(self.v.ln(), 1.0 / self.v))
    }
    fn sqrt(&self) -> Result<Self> {
        if self.v <= 0.0 {
            return Err(Error::singular("sqrt of non-positive differential"));
        }
        let s = self.v.sqrt();
        Ok(self.lift(s, 0.5 / s))
    }
    fn powc(&self, c: f64) -> Result<Self> {
        if is_integer(c) {
            let n = c as i64;
            if self.v == 0.0 && n < 0 {
                return Err(Error::singular("zero raised to negative power"));
            }
            let f0 = if n >= 0 {
                self.v.powi(n as i32)
            } else {
                1.0 / self.v.powi((-n) as i32)
            };
            let f1 = if c == 0.0 {
                0.0
            } else if self.v == 0.0 {
                if n == 1 {
                    1.0
                } else {
                    0.0
                }
            } else {
                c * f0 / self.v
            };
            Ok(self.lift(f0, f1))
        } else {
            if self.v <= 0.0 {
                return Err(Error::singular("fractional power of non-positive base"));
            }
            let f0 = self.v.powf(c);
            Ok(self.lift(f0, c * f0 / self.v))
        }
    }
    fn value(&self) -> f64 {
        self.v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = DScalar::with_derivs(2.0, &[1.0, 0.0]);
        let y = DScalar::with_derivs(3.0, &[0.0, 1.0]);
        let p = x.mul(&y);
        assert_eq!(p.v, 6.0);
        assert_eq!(p.slot(0), 3.0);
        assert_eq!(p.slot(1), 2.0);
        let q = x.div(&y).unwrap();
        assert!((q.slot(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((q.slot(1) + 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn chain_rule_through_functions() {
        let x = DScalar::with_derivs(0.3, &[1.0]);
        let f = x.sin().exp();
        let expect = (0.3f64).sin().exp() * (0.3f64).cos();
        assert!((f.slot(0) - expect).abs() < 1e-15);
    }
}
