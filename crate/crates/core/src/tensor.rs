//! Dense index arrays and the fixed symbols used throughout.
//!
//! Index conventions (all indices run over 0..4):
//!
//! | array                | meaning              |
//! |----------------------|----------------------|
//! | `e[mu][i]`           | e^mu_i               |
//! | `de[mu][i][j]`       | d_j e^mu_i           |
//! | `einv[i][mu]`        | e^i_mu               |
//! | `g[i][j]`, `dg[i][j][k]` | g_ij, d_k g_ij   |
//! | `jet[mu][i][j]`      | E^mu_ij              |
//! | `omega[i][mu][nu]`   | omega_i^{mu nu}      |
//! | `domega[i][mu][nu][j]` | d_j omega_i^{mu nu} |
//! | `gamma[k][i][j]`     | Gamma^k_ij           |
//! | `riemann[j][i][l][s]` | R_ji^{l s}          |
//!
//! Greek indices are raised and lowered with `ETA`; Latin indices with the
//! metric induced by the tetrad at hand. A derivative index always comes last.

use crate::scalar::Scalar;

pub type M4<S = f64> = [[S; 4]; 4];
pub type T3<S = f64> = [[[S; 4]; 4]; 4];
pub type T4<S = f64> = [[[[S; 4]; 4]; 4]; 4];

/// Diagonal of the Minkowski metric, signature (-, +, +, +).
pub const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// The six ordered pairs (mu < nu) indexing antisymmetric pairs.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// All 24 permutations of (0,1,2,3) with their signs; the permutation symbol
/// with epsilon_{0123} = +1.
pub const PERMUTATIONS: [([usize; 4], f64); 24] = permutations();

const fn permutations() -> [([usize; 4], f64); 24] {
    let mut out = [([0usize; 4], 0.0f64); 24];
    let mut n = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                let mut d = 0;
                while d < 4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        let p = [a, b, c, d];
                        let mut inversions = 0;
                        let mut i = 0;
                        while i < 4 {
                            let mut j = i + 1;
                            while j < 4 {
                                if p[i] > p[j] {
                                    inversions += 1;
                                }
                                j += 1;
                            }
                            i += 1;
                        }
                        out[n] = (p, if inversions % 2 == 0 { 1.0 } else { -1.0 });
                        n += 1;
                    }
                    d += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
}

/// Permutation symbol value for an arbitrary index quadruple.
pub fn levi_civita(idx: [usize; 4]) -> f64 {
    PERMUTATIONS
        .iter()
        .find(|(p, _)| *p == idx)
        .map_or(0.0, |(_, s)| *s)
}

pub fn zeros3<S: Scalar>() -> T3<S> {
    [[[S::zero(); 4]; 4]; 4]
}

pub fn zeros4<S: Scalar>() -> T4<S> {
    [[[[S::zero(); 4]; 4]; 4]; 4]
}

pub fn identity<S: Scalar>() -> M4<S> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { S::constant(1.0) } else { S::zero() })
    })
}

pub fn matmul<S: Scalar>(a: &M4<S>, b: &M4<S>) -> M4<S> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = S::zero();
            for k in 0..4 {
                s += a[i][k] * b[k][j];
            }
            s
        })
    })
}

pub fn transpose<S: Scalar>(a: &M4<S>) -> M4<S> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

/// Determinant by cofactor expansion (works for any scalar).
pub fn det4<S: Scalar>(m: &M4<S>) -> S {
    let det3 = |r: [usize; 3], c: [usize; 3]| -> S {
        m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
            - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
            + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
    };
    let rows = [1, 2, 3];
    let mut total = S::zero();
    for j in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != j).collect();
        let minor = det3(rows, [cols[0], cols[1], cols[2]]);
        let term = m[0][j] * minor;
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(m: &M4) -> Option<M4> {
    let mut a = *m;
    let mut inv = identity::<f64>();
    for col in 0..4 {
        let pivot = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for k in 0..4 {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for row in 0..4 {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for k in 0..4 {
                        a[row][k] -= f * a[col][k];
                        inv[row][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// omega_i^mu_nu from omega_i^{mu nu}: lowers the second Lorentz index.
pub fn lower_second<S: Scalar>(omega: &T3<S>) -> T3<S> {
    std::array::from_fn(|i| {
        std::array::from_fn(|mu| std::array::from_fn(|nu| omega[i][mu][nu].scale(ETA[nu])))
    })
}

pub fn max_abs3(a: &T3) -> f64 {
    a.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_abs4(a: &T4) -> f64 {
    a.iter()
        .flatten()
        .flatten()
        .flatten()
        .fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_abs_m(a: &M4) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_diff3(a: &T3, b: &T3) -> f64 {
    let mut m = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                m = m.max((a[i][j][k] - b[i][j][k]).abs());
            }
        }
    }
    m
}

pub fn max_diff_m(a: &M4, b: &M4) -> f64 {
    let mut m = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}
