//! Scalars that carry exact partial derivatives through algebraic formulas.
//!
//! Field components and their symbolic derivatives are evaluated first; the
//! resulting numbers seed a [`Dual`] so that products, sums and matrix inverses
//! built from them propagate derivatives by the product rule. Nesting
//! `Dual<Dual<f64>>` gives second derivatives.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::tensor::M4;

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    /// Number of derivative levels carried.
    const ORDER: usize;

    fn constant(c: f64) -> Self;

    /// The plain number at the bottom of the nesting.
    fn value(&self) -> f64;

    fn scale(self, c: f64) -> Self;

    fn recip(self) -> Self;

    /// Inverse of a 4×4 matrix; `None` when the value part is singular.
    fn inv4(m: &M4<Self>) -> Option<M4<Self>>;

    /// Seeds a scalar from a derivative oracle: `f(multi)` must return the
    /// partial derivative for the coordinate multi-index `multi`.
    fn from_derivs(f: &dyn Fn(&[usize]) -> f64) -> Self;

    fn zero() -> Self {
        Self::constant(0.0)
    }
}

impl Scalar for f64 {
    const ORDER: usize = 0;

    fn constant(c: f64) -> Self {
        c
    }

    fn value(&self) -> f64 {
        *self
    }

    fn scale(self, c: f64) -> Self {
        self * c
    }

    fn recip(self) -> Self {
        1.0 / self
    }

    fn inv4(m: &M4<f64>) -> Option<M4<f64>> {
        crate::tensor::invert(m)
    }

    fn from_derivs(f: &dyn Fn(&[usize]) -> f64) -> Self {
        f(&[])
    }
}

/// First-order dual number over the four chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub v: S,
    pub d: [S; 4],
}

impl<S: Scalar> Dual<S> {
    pub fn new(v: S, d: [S; 4]) -> Self {
        Self { v, d }
    }

    pub fn constant_of(v: S) -> Self {
        Self { v, d: [S::zero(); 4] }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual {
            v: self.v + o.v,
            d: std::array::from_fn(|k| self.d[k] + o.d[k]),
        }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual {
            v: self.v - o.v,
            d: std::array::from_fn(|k| self.d[k] - o.d[k]),
        }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual {
            v: self.v * o.v,
            d: std::array::from_fn(|k| self.d[k] * o.v + self.v * o.d[k]),
        }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            v: -self.v,
            d: self.d.map(|x| -x),
        }
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Scalar> SubAssign for Dual<S> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    const ORDER: usize = S::ORDER + 1;

    fn constant(c: f64) -> Self {
        Dual::constant_of(S::constant(c))
    }

    fn value(&self) -> f64 {
        self.v.value()
    }

    fn scale(self, c: f64) -> Self {
        Dual {
            v: self.v.scale(c),
            d: self.d.map(|x| x.scale(c)),
        }
    }

    fn recip(self) -> Self {
        let r = self.v.recip();
        let r2 = r * r;
        Dual {
            v: r,
            d: self.d.map(|x| -(x * r2)),
        }
    }

    fn inv4(m: &M4<Self>) -> Option<M4<Self>> {
        let values: M4<S> = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].v));
        let inv = S::inv4(&values)?;
        // d(A^-1) = -A^-1 (dA) A^-1
        let grads: [M4<S>; 4] = std::array::from_fn(|k| {
            let dm: M4<S> = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].d[k]));
            let t = crate::tensor::matmul(&inv, &crate::tensor::matmul(&dm, &inv));
            std::array::from_fn(|i| std::array::from_fn(|j| -t[i][j]))
        });
        Some(std::array::from_fn(|i| {
            std::array::from_fn(|j| Dual {
                v: inv[i][j],
                d: std::array::from_fn(|k| grads[k][i][j]),
            })
        }))
    }

    fn from_derivs(f: &dyn Fn(&[usize]) -> f64) -> Self {
        let v = S::from_derivs(f);
        let d = std::array::from_fn(|k| {
            S::from_derivs(&|m: &[usize]| {
                let mut multi = Vec::with_capacity(m.len() + 1);
                multi.push(k);
                multi.extend_from_slice(m);
                f(&multi)
            })
        });
        Dual { v, d }
    }
}

/// Strips one derivative level from every entry.
pub fn values<S: Scalar, const N: usize>(a: &[Dual<S>; N]) -> [S; N] {
    std::array::from_fn(|i| a[i].v)
}
