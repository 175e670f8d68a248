//! Gauss-Legendre tensor-product quadrature on coordinate boxes.

use rayon::prelude::*;

use crate::error::Result;
use crate::exprdsl::Point4;

/// Closed coordinate box [lo, hi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Box4 {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl Box4 {
    pub fn new(lo: [f64; 4], hi: [f64; 4]) -> Self {
        Self { lo, hi }
    }

    pub fn volume(&self) -> f64 {
        (0..4).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn contains_closed(&self, x: &Point4) -> bool {
        (0..4).all(|k| x[k] >= self.lo[k] && x[k] <= self.hi[k])
    }

    /// True when `inner` lies inside `self` (boundaries may touch).
    pub fn encloses(&self, inner: &Box4) -> bool {
        (0..4).all(|k| inner.lo[k] >= self.lo[k] && inner.hi[k] <= self.hi[k])
    }
}

/// Nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product rule of order `n` per axis over `b`. Point values are
/// computed in parallel and summed in a fixed order.
pub fn integrate<F>(b: &Box4, n: usize, f: F) -> Result<f64>
where
    F: Fn(&Point4) -> Result<f64> + Sync,
{
    let (nodes, weights) = gauss_legendre(n);
    let half: [f64; 4] = std::array::from_fn(|k| 0.5 * (b.hi[k] - b.lo[k]));
    let mid: [f64; 4] = std::array::from_fn(|k| 0.5 * (b.hi[k] + b.lo[k]));
    let total = n.pow(4);
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut x = [0.0; 4];
            let mut w = 1.0;
            for k in (0..4).rev() {
                let a = rest % n;
                rest /= n;
                x[k] = mid[k] + half[k] * nodes[a];
                w *= weights[a] * half[k];
            }
            f(&x).map(|v| v * w)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.iter().sum())
}

/// Rule of order `n` over the 3-face of `b` where coordinate `axis` is fixed
/// at `value`.
pub fn integrate_face<F>(b: &Box4, axis: usize, value: f64, n: usize, f: F) -> Result<f64>
where
    F: Fn(&Point4) -> Result<f64> + Sync,
{
    let (nodes, weights) = gauss_legendre(n);
    let free: Vec<usize> = (0..4).filter(|&k| k != axis).collect();
    let values: Vec<f64> = (0..n.pow(3))
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut x = [0.0; 4];
            x[axis] = value;
            let mut w = 1.0;
            for &k in free.iter().rev() {
                let a = rest % n;
                rest /= n;
                let h = 0.5 * (b.hi[k] - b.lo[k]);
                x[k] = 0.5 * (b.hi[k] + b.lo[k]) + h * nodes[a];
                w *= weights[a] * h;
            }
            f(&x).map(|v| v * w)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.iter().sum())
}
