//! Metric-route Einstein tensor, used as an independent check of residual B.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprdsl::{DiffExpr, Expr, Point4};
use crate::geometry::{tetrad_at, TetradField};
use crate::tensor::{self, M4, T3, ETA};

use super::action::residual_b;
use super::section::Section;

/// Convention constant relating residual B to det(e) G^p_l e^l_nu. Fixed once
/// by [`calibrate_constant`] over random frames; with pure permutation symbols
/// on both sides it comes out as exactly +1.
pub const EINSTEIN_CONSTANT: f64 = 1.0;

/// g_ij(x) as symbolic fields with cached derivatives.
#[derive(Clone, Debug)]
pub struct MetricField {
    tetrad: TetradField,
    g: Arc<[[DiffExpr; 4]; 4]>,
}

impl MetricField {
    pub fn new(f: &TetradField) -> Self {
        let e = f.exprs();
        let mut comps: Vec<Vec<DiffExpr>> = vec![Vec::with_capacity(4); 4];
        for i in 0..4 {
            for j in 0..4 {
                let c = if j < i {
                    comps[j][i].clone()
                } else {
                    let terms = (0..4).filter(|&m| !e[m][i].is_zero() && !e[m][j].is_zero()).map(|m| {
                        Expr::scale(ETA[m], e[m][i].clone() * e[m][j].clone())
                    });
                    DiffExpr::new(Expr::sum(terms))
                };
                comps[i].push(c);
            }
        }
        let mut it = comps.into_iter().map(|row| {
            let mut r = row.into_iter();
            std::array::from_fn::<DiffExpr, 4, _>(|_| r.next().unwrap())
        });
        let g = std::array::from_fn(|_| it.next().unwrap());
        Self {
            tetrad: f.clone(),
            g: Arc::new(g),
        }
    }

    /// Mixed Einstein tensor `[p][l]` = G^p_l from Christoffel symbols of g.
    pub fn einstein_mixed(&self, x: &Point4) -> Result<M4> {
        if !self.tetrad.domain.contains(x) {
            return Err(Error::OutOfDomain { point: *x });
        }
        let p = &self.tetrad.params;
        let mut g = [[0.0; 4]; 4];
        let mut dg = [[[0.0; 4]; 4]; 4]; // [i][j][k]
        let mut ddg = [[[[0.0; 4]; 4]; 4]; 4]; // [i][j][k][m]
        for i in 0..4 {
            for j in 0..4 {
                let d = self.g[i][j].eval_derivs(x, p, 2)?;
                g[i][j] = d.value();
                for k in 0..4 {
                    dg[i][j][k] = d.get(&[k]);
                    for m in 0..4 {
                        ddg[i][j][k][m] = d.get(&[k, m]);
                    }
                }
            }
        }
        let gi = tensor::invert(&g).ok_or(Error::SingularMatrix)?;
        // d_m g^{ab}
        let mut dgi = [[[0.0; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for m in 0..4 {
                    let mut s = 0.0;
                    for i in 0..4 {
                        for j in 0..4 {
                            s -= gi[a][i] * dg[i][j][m] * gi[j][b];
                        }
                    }
                    dgi[a][b][m] = s;
                }
            }
        }
        let lower = |l: usize, i: usize, j: usize| dg[l][j][i] + dg[l][i][j] - dg[i][j][l];
        let mut gam: T3 = [[[0.0; 4]; 4]; 4];
        let mut dgam = [[[[0.0; 4]; 4]; 4]; 4]; // [k][i][j][m]
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let mut s = 0.0;
                    for l in 0..4 {
                        s += gi[k][l] * lower(l, i, j);
                    }
                    gam[k][i][j] = 0.5 * s;
                    for m in 0..4 {
                        let mut d = 0.0;
                        for l in 0..4 {
                            d += dgi[k][l][m] * lower(l, i, j)
                                + gi[k][l] * (ddg[l][j][i][m] + ddg[l][i][j][m] - ddg[i][j][l][m]);
                        }
                        dgam[k][i][j][m] = 0.5 * d;
                    }
                }
            }
        }
        // Ric_bd = R^a_bad, R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
        let mut ric = [[0.0; 4]; 4];
        for b in 0..4 {
            for d in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    s += dgam[a][d][b][a] - dgam[a][a][b][d];
                    for e in 0..4 {
                        s += gam[a][a][e] * gam[e][d][b] - gam[a][d][e] * gam[e][a][b];
                    }
                }
                ric[b][d] = s;
            }
        }
        let mut scalar = 0.0;
        for b in 0..4 {
            for d in 0..4 {
                scalar += gi[b][d] * ric[b][d];
            }
        }
        let mut mixed = [[0.0; 4]; 4];
        for pp in 0..4 {
            for l in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += gi[pp][k] * (ric[k][l] - 0.5 * g[k][l] * scalar);
                }
                mixed[pp][l] = s;
            }
        }
        Ok(mixed)
    }

    /// det(e) G^p_l e^l_nu, `[p][nu]`, without the convention constant.
    pub fn pattern(&self, x: &Point4) -> Result<M4> {
        let v = tetrad_at(&self.tetrad, x)?;
        let gm = self.einstein_mixed(x)?;
        Ok(std::array::from_fn(|p| {
            std::array::from_fn(|nu| v.det * (0..4).map(|l| gm[p][l] * v.einv[l][nu]).sum::<f64>())
        }))
    }
}

/// EINSTEIN_CONSTANT * det(e) G^p_l e^l_nu from the metric route.
pub fn einstein_oracle(f: &TetradField, x: &Point4) -> Result<M4> {
    let p = MetricField::new(f).pattern(x)?;
    Ok(p.map(|row| row.map(|v| EINSTEIN_CONSTANT * v)))
}

/// Least-squares constant c minimizing |resB - c * pattern| over the samples.
pub fn calibrate_constant(samples: &[(TetradField, Point4)]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (f, x) in samples {
        let rb = residual_b(&Section::induced(f.clone()), x)?;
        let pat = MetricField::new(f).pattern(x)?;
        for a in 0..4 {
            for b in 0..4 {
                num += rb[a][b] * pat[a][b];
                den += pat[a][b] * pat[a][b];
            }
        }
    }
    if den == 0.0 {
        return Err(Error::Invalid("calibration samples carry no curvature".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::{parse_with, ParamEnv, ParseContext};
    use crate::geometry::Domain;

    #[test]
    fn flat_and_vacuum_give_zero() {
        let z = einstein_oracle(&TetradField::identity(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(tensor::max_abs_m(&z), 0.0);
        let c = ParseContext::with_coords(["t", "r", "theta", "phi"]);
        let f = TetradField::diagonal(
            [
                parse_with("sqrt(1 - 2*M/r)", &c).unwrap(),
                parse_with("1/sqrt(1 - 2*M/r)", &c).unwrap(),
                parse_with("r", &c).unwrap(),
                parse_with("r*sin(theta)", &c).unwrap(),
            ],
            ParamEnv::new().with("M", 1.0),
            Domain::unbounded(),
        );
        let z = einstein_oracle(&f, &[0.0, 4.0, 1.0, 0.0]).unwrap();
        assert!(tensor::max_abs_m(&z) < 1e-12);
    }

    #[test]
    fn dust_universe_agrees_with_residual() {
        let c = ParseContext::with_coords(["t", "x", "y", "z"]);
        let a = parse_with("exp(2*ln(t)/3)", &c).unwrap();
        let f = TetradField::diagonal([Expr::one(), a.clone(), a.clone(), a], ParamEnv::new(), Domain::unbounded());
        let x = [1.5, 0.1, 0.2, 0.3];
        let o = einstein_oracle(&f, &x).unwrap();
        let rb = residual_b(&Section::induced(f.clone()), &x).unwrap();
        // G^t_t = -3 H^2 = -4/(3 t^2) for a = t^(2/3)
        let det = 1.5f64.powf(2.0);
        assert!((o[0][0] - det * (-4.0 / (3.0 * 1.5 * 1.5))).abs() < 1e-12);
        assert!(tensor::max_diff_m(&o, &rb) < 1e-10 * tensor::max_abs_m(&o));
    }
}
