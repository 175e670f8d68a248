use std::sync::{Arc, OnceLock};

use super::expr::{EvalError, Expr, ParamEnv, Point4};

/// Highest derivative order cached by [`DiffExpr`].
pub const MAX_ORDER: usize = 3;

/// An expression together with lazily built symbolic partial derivatives.
///
/// Derivatives for a multi-index are built once from its sorted form, so
/// mixed partials agree exactly regardless of the order they are requested in.
#[derive(Clone, Debug)]
pub struct DiffExpr(Arc<Inner>);

#[derive(Debug)]
struct Inner {
    base: Expr,
    orders: [OnceLock<Vec<Expr>>; MAX_ORDER],
}

fn flat(multi: &[usize]) -> usize {
    multi.iter().fold(0, |acc, &k| acc * 4 + k)
}

fn unflat(mut idx: usize, order: usize) -> Vec<usize> {
    let mut m = vec![0; order];
    for slot in m.iter_mut().rev() {
        *slot = idx % 4;
        idx /= 4;
    }
    m
}

impl DiffExpr {
    pub fn new(base: Expr) -> Self {
        DiffExpr(Arc::new(Inner {
            base,
            orders: Default::default(),
        }))
    }

    pub fn expr(&self) -> &Expr {
        &self.0.base
    }

    fn order(&self, k: usize) -> &[Expr] {
        debug_assert!((1..=MAX_ORDER).contains(&k));
        self.0.orders[k - 1].get_or_init(|| {
            let mut out: Vec<Expr> = Vec::with_capacity(4usize.pow(k as u32));
            for idx in 0..4usize.pow(k as u32) {
                let m = unflat(idx, k);
                let mut sorted = m.clone();
                sorted.sort_unstable();
                if sorted != m {
                    out.push(out[flat(&sorted)].clone());
                    continue;
                }
                let (last, head) = sorted.split_last().unwrap();
                let lower = if head.is_empty() {
                    self.expr()
                } else {
                    &self.order(head.len())[flat(head)]
                };
                out.push(lower.differentiate(*last));
            }
            out
        })
    }

    /// Symbolic partial derivative for the multi-index `multi` (empty = the expression).
    pub fn derivative(&self, multi: &[usize]) -> &Expr {
        if multi.is_empty() {
            self.expr()
        } else {
            &self.order(multi.len())[flat(multi)]
        }
    }

    /// Evaluates the value and all partial derivatives up to `order` at `x`.
    pub fn eval_derivs(
        &self,
        x: &Point4,
        p: &ParamEnv,
        order: usize,
    ) -> Result<PointDerivs, EvalError> {
        assert!(order <= MAX_ORDER, "derivative order {order} not supported");
        let mut values = Vec::with_capacity(offset(order + 1));
        values.push(self.expr().eval(x, p)?);
        for k in 1..=order {
            // Only sorted multi-indices are evaluated; the rest are copies.
            let start = values.len();
            let exprs = self.order(k);
            for (idx, e) in exprs.iter().enumerate() {
                let m = unflat(idx, k);
                let mut sorted = m.clone();
                sorted.sort_unstable();
                if sorted == m {
                    values.push(e.eval(x, p)?);
                } else {
                    values.push(values[start + flat(&sorted)]);
                }
            }
        }
        Ok(PointDerivs { order, values })
    }
}

fn offset(order: usize) -> usize {
    (0..order).map(|k| 4usize.pow(k as u32)).sum()
}

/// Value and partial derivatives of one scalar field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointDerivs {
    order: usize,
    values: Vec<f64>,
}

impl PointDerivs {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut values = vec![0.0; offset(order + 1)];
        values[0] = v;
        Self { order, values }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.values[0]
    }

    /// Derivative for a multi-index; zero beyond the evaluated order.
    pub fn get(&self, multi: &[usize]) -> f64 {
        if multi.len() > self.order {
            return 0.0;
        }
        self.values[offset(multi.len()) + flat(multi)]
    }
}
