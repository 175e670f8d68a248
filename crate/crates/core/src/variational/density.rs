//! Pointwise kernels: the density of the pulled-back 4-form, the two residual
//! sets and the bracket contraction identities.
//!
//! Both epsilon symbols are pure permutation symbols with
//! eps^{0123} = eps_{0123} = +1.

use crate::scalar::Scalar;
use crate::tensor::{lower_second, zeros4, M4, PAIRS, PERMUTATIONS, T3, T4};

/// F[j][i][l][s] = d_j omega_i^{ls} + omega_j^l_h omega_i^{hs}.
pub fn field_strength<S: Scalar>(omega: &T3<S>, domega: &T4<S>) -> T4<S> {
    let mixed = lower_second(omega);
    let mut f = zeros4::<S>();
    for j in 0..4 {
        for i in 0..4 {
            for l in 0..4 {
                for s in 0..4 {
                    let mut acc = domega[i][l][s][j];
                    for h in 0..4 {
                        acc += mixed[j][l][h] * omega[i][h][s];
                    }
                    f[j][i][l][s] = acc;
                }
            }
        }
    }
    f
}

/// T[j][n][p] = d_j e^n_p + omega_j^n_r e^r_p.
pub fn frame_derivative<S: Scalar>(e: &M4<S>, de: &T3<S>, omega: &T3<S>) -> T3<S> {
    let mixed = lower_second(omega);
    std::array::from_fn(|j| {
        std::array::from_fn(|n| {
            std::array::from_fn(|p| {
                let mut acc = de[n][p][j];
                for r in 0..4 {
                    acc += mixed[j][n][r] * e[r][p];
                }
                acc
            })
        })
    })
}

/// L = 1/4 eps^{qpij} eps_{mnls} e^m_q e^n_p F[j][i][l][s].
pub fn theta_density<S: Scalar>(e: &M4<S>, f: &T4<S>) -> S {
    let mut acc = S::zero();
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (b, s2) in PERMUTATIONS.iter() {
            let [m, n, l, s] = *b;
            acc += (e[m][q] * e[n][p] * f[j][i][l][s]).scale(s1 * s2);
        }
    }
    acc.scale(0.25)
}

/// Density together with the sum of the absolute values of its terms.
pub fn theta_density_with_scale(e: &M4, f: &T4) -> (f64, f64) {
    let mut acc = 0.0;
    let mut abs = 0.0;
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (b, s2) in PERMUTATIONS.iter() {
            let [m, n, l, s] = *b;
            let t = e[m][q] * e[n][p] * f[j][i][l][s];
            acc += s1 * s2 * t;
            abs += t.abs();
        }
    }
    (0.25 * acc, 0.25 * abs)
}

/// Residual of the kinematic equations, `[i][pair]` over the six pairs l < s.
pub fn residual_a_kernel<S: Scalar>(e: &M4<S>, t: &T3<S>) -> [[S; 6]; 4] {
    let mut full = [[[S::zero(); 4]; 4]; 4]; // [i][l][s]
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (b, s2) in PERMUTATIONS.iter() {
            let [m, n, l, s] = *b;
            full[i][l][s] += (e[m][q] * t[j][n][p]).scale(s1 * s2);
        }
    }
    std::array::from_fn(|i| std::array::from_fn(|k| full[i][PAIRS[k].0][PAIRS[k].1]))
}

/// Residual of the dynamical equations, `[p][n]`.
pub fn residual_b_kernel<S: Scalar>(e: &M4<S>, f: &T4<S>) -> M4<S> {
    let mut out = [[S::zero(); 4]; 4];
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (b, s2) in PERMUTATIONS.iter() {
            let [m, n, l, s] = *b;
            out[p][n] += (e[m][q] * f[j][i][l][s]).scale(0.5 * s1 * s2);
        }
    }
    out
}

/// Residual-B magnitude scale: the sum of the absolute values of all terms.
pub fn residual_b_scale(e: &M4, f: &T4) -> f64 {
    let mut abs = 0.0;
    for (a, _) in PERMUTATIONS.iter() {
        let [q, _p, i, j] = *a;
        for (b, _) in PERMUTATIONS.iter() {
            let [m, _n, l, s] = *b;
            abs += 0.5 * (e[m][q] * f[j][i][l][s]).abs();
        }
    }
    abs
}

/// 1/4 eps^{qpij} eps_{mnls} e^m_q R_ji^{ls}, the curvature form of residual B.
pub fn curvature_pattern(e: &M4, r: &T4) -> M4 {
    let mut out = [[0.0; 4]; 4];
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (b, s2) in PERMUTATIONS.iter() {
            let [m, n, l, s] = *b;
            out[p][n] += 0.25 * s1 * s2 * e[m][q] * r[j][i][l][s];
        }
    }
    out
}

/// Coefficient of ds in X _| dTheta along a section, in residual form:
/// resB[p][n] X^n_p - sum_{i, l<s} resA[i][ls] X_i^{ls}.
pub fn contraction_from_residuals(res_a: &[[f64; 6]; 4], res_b: &M4, xe: &M4, xw: &[[f64; 6]; 4]) -> f64 {
    let mut acc = 0.0;
    for p in 0..4 {
        for n in 0..4 {
            acc += res_b[p][n] * xe[n][p];
        }
    }
    for i in 0..4 {
        for k in 0..6 {
            acc -= res_a[i][k] * xw[i][k];
        }
    }
    acc
}

/// The same contraction written out as the two displayed blocks with full
/// index loops (X_i^{ls} expanded to all ordered pairs).
pub fn contraction_direct(e: &M4, f: &T4, t: &T3, xe: &M4, xw: &[[f64; 6]; 4]) -> f64 {
    let mut xfull = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        for (k, &(l, s)) in PAIRS.iter().enumerate() {
            xfull[i][l][s] = xw[i][k];
            xfull[i][s][l] = -xw[i][k];
        }
    }
    let mut acc = 0.0;
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (b, s2) in PERMUTATIONS.iter() {
            let [m, n, l, s] = *b;
            let sg = s1 * s2;
            acc += 0.5 * sg * e[m][q] * f[j][i][l][s] * xe[n][p];
            acc -= 0.5 * sg * e[m][q] * t[j][n][p] * xfull[i][l][s];
        }
    }
    acc
}
