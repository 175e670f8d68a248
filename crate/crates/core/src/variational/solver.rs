//! Damped Gauss-Newton fit of free parameters in a tetrad family so that
//! residual B vanishes at a set of collocation points.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprdsl::Point4;
use crate::geometry::TetradField;

use super::action::residual_b;
use super::section::Section;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol_rms: f64,
    pub tol_step: f64,
    /// Initial Levenberg damping.
    pub lambda: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol_rms: 1e-10,
            tol_step: 1e-12,
            lambda: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutcome {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    /// Residual rms before the first step and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub rms: f64,
    /// Norm of each column of the last Jacobian; (near) zero for parameters
    /// the residual ignores, which the solver leaves at their start value.
    pub column_norms: Vec<f64>,
}

struct Problem<'a> {
    family: &'a TetradField,
    names: Vec<String>,
    points: &'a [Point4],
}

impl Problem<'_> {
    fn residual(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut env = self.family.params.clone();
        for (n, v) in self.names.iter().zip(theta) {
            env.set(n, *v);
        }
        let section = Section::induced(self.family.with_params(env));
        let blocks: Vec<Result<_>> = self.points.par_iter().map(|x| residual_b(&section, x)).collect();
        let mut out = Vec::with_capacity(16 * self.points.len());
        for b in blocks {
            out.extend(b?.iter().flatten().copied());
        }
        Ok(out)
    }

    /// Central differences, columns in parallel.
    fn jacobian(&self, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
        (0..theta.len())
            .into_par_iter()
            .map(|k| {
                let h = 1e-6 * (1.0 + theta[k].abs());
                let mut tp = theta.to_vec();
                let mut tm = theta.to_vec();
                tp[k] += h;
                tm[k] -= h;
                let rp = self.residual(&tp)?;
                let rm = self.residual(&tm)?;
                Ok(rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
            })
            .collect()
    }
}

fn rms(r: &[f64]) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
}

/// Solves the small dense system `a x = b` by Gaussian elimination.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Fits `unknowns` (name, start value) in `family`. Returns the outcome when
/// the residual rms drops below `tol_rms`; otherwise `NonConvergence` with the
/// best point found, including the case where the step stalls at a nonzero
/// residual.
pub fn solve_ansatz(
    family: &TetradField,
    unknowns: &[(String, f64)],
    collocation: &[Point4],
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    if unknowns.is_empty() || collocation.is_empty() {
        return Err(Error::Invalid("solver needs unknowns and collocation points".into()));
    }
    let prob = Problem {
        family,
        names: unknowns.iter().map(|(n, _)| n.clone()).collect(),
        points: collocation,
    };
    let mut theta: Vec<f64> = unknowns.iter().map(|(_, v)| *v).collect();
    let mut r = prob.residual(&theta)?;
    let mut cur = rms(&r);
    let mut trace = vec![cur];
    let mut lambda = opts.lambda;
    let mut iterations = 0;
    let n = theta.len();
    let mut col_norms = vec![0.0; n];

    while cur >= opts.tol_rms && iterations < opts.max_iter {
        iterations += 1;
        let jac = prob.jacobian(&theta)?;
        col_norms = jac.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        let jtj: Vec<Vec<f64>> = (0..n)
            .map(|a| (0..n).map(|b| jac[a].iter().zip(&jac[b]).map(|(x, y)| x * y).sum()).collect())
            .collect();
        let jtr: Vec<f64> = (0..n).map(|a| jac[a].iter().zip(&r).map(|(x, y)| x * y).sum()).collect();
        let scale = (0..n).map(|a| jtj[a][a]).fold(0.0f64, f64::max).max(1e-300);
        // directions the residual does not see (up to difference noise) are frozen
        let frozen: Vec<bool> = (0..n).map(|a| jtj[a][a] <= 1e-14 * scale).collect();

        let mut accepted = false;
        let mut last_step = 0.0;
        for _ in 0..30 {
            let mut m = jtj.clone();
            let mut rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            for a in 0..n {
                if frozen[a] {
                    for b in 0..n {
                        m[a][b] = 0.0;
                        m[b][a] = 0.0;
                    }
                    m[a][a] = 1.0;
                    rhs[a] = 0.0;
                } else {
                    m[a][a] += lambda * jtj[a][a];
                }
            }
            let Some(step) = solve_dense(m, rhs) else {
                lambda *= 10.0;
                continue;
            };
            last_step = step.iter().map(|v| v * v).sum::<f64>().sqrt();
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(a, b)| a + b).collect();
            match prob.residual(&trial) {
                Ok(rt) if rms(&rt) < cur => {
                    theta = trial;
                    r = rt;
                    cur = rms(&r);
                    lambda = (lambda / 10.0).max(1e-15);
                    accepted = true;
                    break;
                }
                _ => lambda *= 10.0,
            }
            if last_step < opts.tol_step {
                break;
            }
        }
        if accepted {
            trace.push(cur);
        }
        if !accepted || last_step < opts.tol_step {
            break;
        }
    }

    if cur < opts.tol_rms {
        Ok(SolveOutcome {
            names: prob.names,
            params: theta,
            trace,
            iterations,
            rms: cur,
            column_norms: col_norms,
        })
    } else {
        Err(Error::NonConvergence {
            iterations,
            best_rms: cur,
            best: theta,
        })
    }
}
