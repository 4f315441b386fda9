//! Small square matrices over a generic scalar.
//!
//! Leaf dimensions never exceed 6, so everything is dense and direct.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SqMat<T> {
    pub n: usize,
    a: Vec<T>,
}

impl<T: Scalar> SqMat<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(f(i, j));
            }
        }
        SqMat { n, a }
    }

    pub fn filled(n: usize, v: T) -> Self {
        SqMat {
            n,
            a: vec![v; n * n],
        }
    }

    pub fn identity(n: usize, proto: &T) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                proto.const_like(1.0)
            } else {
                proto.const_like(0.0)
            }
        })
    }

    pub fn zeros(n: usize, proto: &T) -> Self {
        Self::filled(n, proto.const_like(0.0))
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * self.n + j] = v;
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.at(i, j).add(o.at(i, j)))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.at(i, j).sub(o.at(i, j)))
    }

    pub fn scale_by(&self, s: &T) -> Self {
        Self::from_fn(self.n, |i, j| self.at(i, j).mul(s))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_fn(self.n, |i, j| self.at(i, j).scale(c))
    }

    pub fn matmul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.n, o.n);
        Self::from_fn(self.n, |i, j| {
            let mut acc = self.at(i, 0).mul(o.at(0, j));
            for k in 1..self.n {
                acc = acc.add(&self.at(i, k).mul(o.at(k, j)));
            }
            acc
        })
    }

    pub fn trace(&self) -> T {
        let mut acc = self.at(0, 0).clone();
        for i in 1..self.n {
            acc = acc.add(self.at(i, i));
        }
        acc
    }

    /// Matrix power by repeated multiplication; `k = 0` gives the identity.
    pub fn pow(&self, k: usize) -> Self {
        let mut r = Self::identity(self.n, self.at(0, 0));
        for _ in 0..k {
            r = r.matmul(self);
        }
        r
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let mut acc = self.at(i, 0).mul(&x[0]);
                for k in 1..self.n {
                    acc = acc.add(&self.at(i, k).mul(&x[k]));
                }
                acc
            })
            .collect()
    }

    pub fn values(&self) -> SqMat<f64> {
        SqMat::from_fn(self.n, |i, j| self.at(i, j).value())
    }
}

impl SqMat<f64> {
    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        m
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self.at(i, j) + self.at(j, i)))
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum()
    }
}
