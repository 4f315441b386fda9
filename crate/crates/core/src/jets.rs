//! Truncated multivariate Taylor arithmetic of total order 3.
//!
//! Every smooth field in the engine is evaluated through this arithmetic, so
//! first and second derivatives of composed quantities (frames, shape
//! operators, curvature) come out exact to machine precision. Storage is raw
//! partial derivatives, not Taylor coefficients: `grad[i] = ∂_i f`,
//! `hess(i,j) = ∂_i∂_j f`, `third(i,j,k) = ∂_i∂_j∂_k f`.

use crate::error::{Error, Result};
use crate::scalar::{is_integer, Scalar};

/// Maximum number of chart variables.
pub const MAX_DIM: usize = 4;

const N_THIRD: usize = 20;

/// Lookup from an (i,j,k) triple (any order) into the symmetric-reduced
/// third-derivative storage.
static T3_INDEX: [[[u8; MAX_DIM]; MAX_DIM]; MAX_DIM] = build_t3_index();

const fn build_t3_index() -> [[[u8; MAX_DIM]; MAX_DIM]; MAX_DIM] {
    let mut table = [[[0u8; MAX_DIM]; MAX_DIM]; MAX_DIM];
    let mut counter = 0u8;
    let mut i = 0;
    while i < MAX_DIM {
        let mut j = i;
        while j < MAX_DIM {
            let mut k = j;
            while k < MAX_DIM {
                // assign to all 6 permutations
                table[i][j][k] = counter;
                table[i][k][j] = counter;
                table[j][i][k] = counter;
                table[j][k][i] = counter;
                table[k][i][j] = counter;
                table[k][j][i] = counter;
                counter += 1;
                k += 1;
            }
            j += 1;
        }
        i += 1;
    }
    table
}

/// Order-3 jet in `dim` variables (1 ≤ dim ≤ 4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub dim: usize,
    pub v: f64,
    grad: [f64; MAX_DIM],
    hess: [f64; MAX_DIM * MAX_DIM],
    third: [f64; N_THIRD],
}

impl Jet3 {
    pub fn constant(dim: usize, v: f64) -> Self {
        debug_assert!(dim >= 1 && dim <= MAX_DIM);
        Jet3 {
            dim,
            v,
            grad: [0.0; MAX_DIM],
            hess: [0.0; MAX_DIM * MAX_DIM],
            third: [0.0; N_THIRD],
        }
    }

    /// Coordinate jet for chart axis `index` at `point`.
    pub fn seed_variable(index: usize, point: &[f64]) -> Result<Self> {
        let dim = point.len();
        if dim < 1 || dim > MAX_DIM {
            return Err(Error::input(format!("jet dimension {dim} out of range 1..=4")));
        }
        if index >= dim {
            return Err(Error::input(format!(
                "variable index {index} out of range for dimension {dim}"
            )));
        }
        let mut j = Jet3::constant(dim, point[index]);
        j.grad[index] = 1.0;
        Ok(j)
    }

    #[inline]
    pub fn grad(&self, i: usize) -> f64 {
        self.grad[i]
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * MAX_DIM + j]
    }

    #[inline]
    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[T3_INDEX[i][j][k] as usize]
    }

    #[inline]
    fn set_hess(&mut self, i: usize, j: usize, v: f64) {
        self.hess[i * MAX_DIM + j] = v;
        self.hess[j * MAX_DIM + i] = v;
    }

    pub fn gradient(&self) -> Vec<f64> {
        self.grad[..self.dim].to_vec()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.grad.iter().all(|x| x.is_finite())
            && self.hess.iter().all(|x| x.is_finite())
            && self.third.iter().all(|x| x.is_finite())
    }

    /// Formal partial derivative ∂_i as a jet. The result's third-order slots
    /// are zeroed: it is only valid through order 2.
    pub fn deriv(&self, i: usize) -> Jet3 {
        debug_assert!(i < self.dim);
        let mut out = Jet3::constant(self.dim, self.grad[i]);
        for a in 0..self.dim {
            out.grad[a] = self.hess(i, a);
            for b in a..self.dim {
                out.set_hess(a, b, self.third(i, a, b));
            }
        }
        out
    }

    pub fn add(&self, o: &Jet3) -> Jet3 {
        debug_assert_eq!(self.dim, o.dim);
        let mut r = *self;
        r.v += o.v;
        for i in 0..MAX_DIM {
            r.grad[i] += o.grad[i];
        }
        for i in 0..MAX_DIM * MAX_DIM {
            r.hess[i] += o.hess[i];
        }
        for i in 0..N_THIRD {
            r.third[i] += o.third[i];
        }
        r
    }

    pub fn sub(&self, o: &Jet3) -> Jet3 {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Jet3 {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Jet3 {
        let mut r = *self;
        r.v *= c;
        for i in 0..MAX_DIM {
            r.grad[i] *= c;
        }
        for i in 0..MAX_DIM * MAX_DIM {
            r.hess[i] *= c;
        }
        for i in 0..N_THIRD {
            r.third[i] *= c;
        }
        r
    }

    pub fn add_scalar(&self, c: f64) -> Jet3 {
        let mut r = *self;
        r.v += c;
        r
    }

    pub fn mul(&self, o: &Jet3) -> Jet3 {
        debug_assert_eq!(self.dim, o.dim);
        let d = self.dim;
        let mut r = Jet3::constant(d, self.v * o.v);
        for i in 0..d {
            r.grad[i] = self.v * o.grad[i] + self.grad[i] * o.v;
        }
        for i in 0..d {
            for j in i..d {
                let h = self.v * o.hess(i, j)
                    + self.grad[i] * o.grad[j]
                    + self.grad[j] * o.grad[i]
                    + self.hess(i, j) * o.v;
                r.set_hess(i, j, h);
            }
        }
        for i in 0..d {
            for j in i..d {
                for k in j..d {
                    let t = self.v * o.third(i, j, k)
                        + self.grad[i] * o.hess(j, k)
                        + self.grad[j] * o.hess(i, k)
                        + self.grad[k] * o.hess(i, j)
                        + self.hess(i, j) * o.grad[k]
                        + self.hess(i, k) * o.grad[j]
                        + self.hess(j, k) * o.grad[i]
                        + self.third(i, j, k) * o.v;
                    r.third[T3_INDEX[i][j][k] as usize] = t;
                }
            }
        }
        r
    }

    /// Faà di Bruno composition through order 3 given the outer function's
    /// raw derivatives `(f, f', f'', f''')` at `self.v`.
    pub fn compose(&self, f: [f64; 4]) -> Jet3 {
        let d = self.dim;
        let mut r = Jet3::constant(d, f[0]);
        for i in 0..d {
            r.grad[i] = f[1] * self.grad[i];
        }
        for i in 0..d {
            for j in i..d {
                let h = f[2] * self.grad[i] * self.grad[j] + f[1] * self.hess(i, j);
                r.set_hess(i, j, h);
            }
        }
        for i in 0..d {
            for j in i..d {
                for k in j..d {
                    let t = f[3] * self.grad[i] * self.grad[j] * self.grad[k]
                        + f[2]
                            * (self.grad[i] * self.hess(j, k)
                                + self.grad[j] * self.hess(i, k)
                                + self.grad[k] * self.hess(i, j))
                        + f[1] * self.third(i, j, k);
                    r.third[T3_INDEX[i][j][k] as usize] = t;
                }
            }
        }
        r
    }

    pub fn recip(&self) -> Result<Jet3> {
        let u = self.v;
        if u == 0.0 {
            return Err(Error::singular("division by jet with zero value"));
        }
        let iu = 1.0 / u;
        Ok(self.compose([iu, -iu * iu, 2.0 * iu * iu * iu, -6.0 * iu * iu * iu * iu]))
    }

    pub fn div(&self, o: &Jet3) -> Result<Jet3> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.v.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.v.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.v.exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Result<Jet3> {
        let u = self.v;
        if u <= 0.0 {
            return Err(Error::singular(format!("log of non-positive jet value {u}")));
        }
        let iu = 1.0 / u;
        Ok(self.compose([u.ln(), iu, -iu * iu, 2.0 * iu * iu * iu]))
    }

    pub fn sqrt(&self) -> Result<Jet3> {
        let u = self.v;
        if u <= 0.0 {
            return Err(Error::singular(format!("sqrt of non-positive jet value {u}")));
        }
        let s = u.sqrt();
        Ok(self.compose([
            s,
            0.5 / s,
            -0.25 / (s * u),
            0.375 / (s * u * u),
        ]))
    }

    pub fn powc(&self, c: f64) -> Result<Jet3> {
        let u = self.v;
        if is_integer(c) {
            let n = c as i64;
            // Derivative factors c(c-1)..., computed so that a zero factor
            // short-circuits before any negative power of a zero base.
            let mut f = [0.0f64; 4];
            let mut coeff = 1.0;
            for (k, slot) in f.iter_mut().enumerate() {
                if coeff == 0.0 {
                    break;
                }
                let e = n - k as i64;
                if u == 0.0 && e < 0 {
                    return Err(Error::singular("zero raised to negative power"));
                }
                *slot = coeff * powi(u, e);
                coeff *= c - k as f64;
            }
            Ok(self.compose(f))
        } else {
            if u <= 0.0 {
                return Err(Error::singular(format!(
                    "fractional power of non-positive jet base {u}"
                )));
            }
            let f0 = u.powf(c);
            let f1 = c * u.powf(c - 1.0);
            let f2 = c * (c - 1.0) * u.powf(c - 2.0);
            let f3 = c * (c - 1.0) * (c - 2.0) * u.powf(c - 3.0);
            Ok(self.compose([f0, f1, f2, f3]))
        }
    }
}

fn powi(u: f64, e: i64) -> f64 {
    if e >= 0 {
        u.powi(e.min(i32::MAX as i64) as i32)
    } else {
        1.0 / u.powi((-e) as i32)
    }
}

/// Binary operation selector for [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
}

/// Validated binary arithmetic entry point.
pub fn arith(op: ArithOp, a: &Jet3, b: &Jet3) -> Result<Jet3> {
    if a.dim != b.dim {
        return Err(Error::input(format!(
            "jet dimension mismatch: {} vs {}",
            a.dim, b.dim
        )));
    }
    match op {
        ArithOp::Add => Ok(a.add(b)),
        ArithOp::Sub => Ok(a.sub(b)),
        ArithOp::Mul => Ok(a.mul(b)),
        ArithOp::Div => a.div(b),
        ArithOp::Neg => Ok(a.neg()),
    }
}

impl Scalar for Jet3 {
    fn add(&self, rhs: &Self) -> Self {
        Jet3::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Jet3::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Jet3::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        Jet3::neg(self)
    }
    fn div(&self, rhs: &Self) -> crate::error::Result<Self> {
        Jet3::div(self, rhs)
    }
    fn const_like(&self, v: f64) -> Self {
        Jet3::constant(self.dim, v)
    }
    fn scale(&self, c: f64) -> Self {
        Jet3::scale(self, c)
    }
    fn sin(&self) -> Self {
        Jet3::sin(self)
    }
    fn cos(&self) -> Self {
        Jet3::cos(self)
    }
    fn exp(&self) -> Self {
        Jet3::exp(self)
    }
    fn ln(&self) -> crate::error::Result<Self> {
        Jet3::ln(self)
    }
    fn sqrt(&self) -> crate::error::Result<Self> {
        Jet3::sqrt(self)
    }
    fn powc(&self, c: f64) -> crate::error::Result<Self> {
        Jet3::powc(self, c)
    }
    fn value(&self) -> f64 {
        self.v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn seed_variable_basics() {
        let x = Jet3::seed_variable(0, &[0.5, 1.0]).unwrap();
        assert_eq!(x.v, 0.5);
        assert_eq!(x.grad(0), 1.0);
        assert_eq!(x.grad(1), 0.0);
        let y = Jet3::seed_variable(1, &[0.5, 1.0]).unwrap();
        assert_eq!(y.v, 1.0);
        assert_eq!(y.grad(1), 1.0);
        assert!(Jet3::seed_variable(2, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn square_of_variable() {
        let x = Jet3::seed_variable(0, &[3.0]).unwrap();
        let r = x.mul(&x);
        assert_eq!(r.v, 9.0);
        assert_eq!(r.grad(0), 6.0);
        assert_eq!(r.hess(0, 0), 2.0);
        assert_eq!(r.third(0, 0, 0), 0.0);
    }

    #[test]
    fn reciprocal_raw_derivatives() {
        // Raw derivatives of 1/x at x=2: -1/4, 2/8, -6/16.
        let x = Jet3::seed_variable(0, &[2.0]).unwrap();
        let one = Jet3::constant(1, 1.0);
        let r = one.div(&x).unwrap();
        assert_close(r.v, 0.5, 1e-15);
        assert_close(r.grad(0), -0.25, 1e-15);
        assert_close(r.hess(0, 0), 0.25, 1e-15);
        assert_close(r.third(0, 0, 0), -0.375, 1e-15);
    }

    #[test]
    fn add_sub_inverse() {
        let a = Jet3::seed_variable(0, &[1.3, 0.2]).unwrap().sin();
        let b = Jet3::seed_variable(1, &[1.3, 0.2]).unwrap().exp();
        let r = a.add(&b).sub(&b);
        assert_close(r.v, a.v, 1e-15);
        assert_close(r.grad(0), a.grad(0), 1e-15);
        assert_close(r.hess(0, 0), a.hess(0, 0), 1e-15);
    }

    #[test]
    fn sin_exp_log_derivatives() {
        let x = Jet3::seed_variable(0, &[0.0]).unwrap();
        let s = x.sin();
        assert_eq!(s.v, 0.0);
        assert_eq!(s.grad(0), 1.0);
        assert_eq!(s.hess(0, 0), 0.0);
        assert_eq!(s.third(0, 0, 0), -1.0);
        let e = x.exp();
        assert_eq!(e.v, 1.0);
        assert_eq!(e.grad(0), 1.0);
        assert_eq!(e.hess(0, 0), 1.0);
        assert_eq!(e.third(0, 0, 0), 1.0);
        let bad = Jet3::constant(1, -1.0);
        assert!(bad.ln().is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = Jet3::constant(1, 1.0);
        let b = Jet3::constant(2, 1.0);
        assert!(arith(ArithOp::Add, &a, &b).is_err());
    }

    #[test]
    fn integer_power_at_zero() {
        let x = Jet3::seed_variable(0, &[0.0]).unwrap();
        let r = x.powc(2.0).unwrap();
        assert_eq!(r.v, 0.0);
        assert_eq!(r.grad(0), 0.0);
        assert_eq!(r.hess(0, 0), 2.0);
        assert!(x.powc(-1.0).is_err());
    }

    #[test]
    fn composed_function_matches_finite_differences() {
        // f(x, y) = sin(x*y) * exp(x) + 1/(2 + cos(y))
        fn f(x: f64, y: f64) -> f64 {
            (x * y).sin() * x.exp() + 1.0 / (2.0 + y.cos())
        }
        fn jet_f(p: &[f64]) -> Jet3 {
            let x = Jet3::seed_variable(0, p).unwrap();
            let y = Jet3::seed_variable(1, p).unwrap();
            let two = Jet3::constant(2, 2.0);
            let one = Jet3::constant(2, 1.0);
            x.mul(&y)
                .sin()
                .mul(&x.exp())
                .add(&one.div(&two.add(&y.cos())).unwrap())
        }
        let p = [0.7, -0.4];
        let j = jet_f(&p);
        let h = 1e-4;
        let gx = (f(p[0] + h, p[1]) - f(p[0] - h, p[1])) / (2.0 * h);
        let gy = (f(p[0], p[1] + h) - f(p[0], p[1] - h)) / (2.0 * h);
        assert_close(j.grad(0), gx, 1e-8);
        assert_close(j.grad(1), gy, 1e-8);
        let hxx = (f(p[0] + h, p[1]) - 2.0 * f(p[0], p[1]) + f(p[0] - h, p[1])) / (h * h);
        let hxy = (f(p[0] + h, p[1] + h) - f(p[0] + h, p[1] - h) - f(p[0] - h, p[1] + h)
            + f(p[0] - h, p[1] - h))
            / (4.0 * h * h);
        assert_close(j.hess(0, 0), hxx, 1e-6);
        assert_close(j.hess(0, 1), hxy, 1e-6);
        // storage symmetry
        assert_eq!(j.hess(0, 1), j.hess(1, 0));
        assert_eq!(j.third(0, 0, 1), j.third(1, 0, 0));
    }

    #[test]
    fn deriv_extraction_shifts_orders() {
        // d/dx of sin(x) is cos(x), compare value/grad/hess of extracted jet.
        let p = [0.9];
        let s = Jet3::seed_variable(0, &p).unwrap().sin();
        let d = s.deriv(0);
        assert_close(d.v, p[0].cos(), 1e-15);
        assert_close(d.grad(0), -p[0].sin(), 1e-15);
        assert_close(d.hess(0, 0), -p[0].cos(), 1e-15);
    }
}
