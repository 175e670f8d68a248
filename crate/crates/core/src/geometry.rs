//! Pointwise frame geometry: tetrad values, induced metric, antisymmetrized
//! jets, anholonomy, spin connection (from the jet and from the Levi-Civita
//! connection), covariant exterior differential and curvature.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprdsl::{DiffExpr, Expr, ParamEnv, Point4, PointDerivs};
use crate::scalar::{Dual, Scalar};
use crate::tensor::{self, lower_second, zeros3, zeros4, M4, T3, T4, ETA};

/// Below this |det e| a tetrad is rejected.
pub const SINGULAR_DET: f64 = 1e-10;

/// Per-coordinate open intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub intervals: [(f64, f64); 4],
}

impl Domain {
    pub fn unbounded() -> Self {
        Self {
            intervals: [(f64::NEG_INFINITY, f64::INFINITY); 4],
        }
    }

    pub fn new(intervals: [(f64, f64); 4]) -> Self {
        Self { intervals }
    }

    pub fn contains(&self, x: &Point4) -> bool {
        x.iter()
            .zip(&self.intervals)
            .all(|(v, (a, b))| v.is_finite() && *v > *a && *v < *b)
    }
}

impl Default for Domain {
    fn default() -> Self {
        Self::unbounded()
    }
}

/// A frame e^mu_i(x) given by sixteen expressions.
#[derive(Clone, Debug)]
pub struct TetradField {
    comps: Arc<[[DiffExpr; 4]; 4]>,
    pub params: ParamEnv,
    pub domain: Domain,
}

impl TetradField {
    pub fn new(e: [[Expr; 4]; 4], params: ParamEnv, domain: Domain) -> Self {
        Self {
            comps: Arc::new(e.map(|row| row.map(DiffExpr::new))),
            params,
            domain,
        }
    }

    pub fn diagonal(d: [Expr; 4], params: ParamEnv, domain: Domain) -> Self {
        let mut e: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
        for (k, v) in d.into_iter().enumerate() {
            e[k][k] = v;
        }
        Self::new(e, params, domain)
    }

    /// e^mu_i = delta^mu_i.
    pub fn identity() -> Self {
        Self::diagonal(
            std::array::from_fn(|_| Expr::one()),
            ParamEnv::new(),
            Domain::unbounded(),
        )
    }

    pub fn component(&self, mu: usize, i: usize) -> &DiffExpr {
        &self.comps[mu][i]
    }

    pub fn exprs(&self) -> [[Expr; 4]; 4] {
        std::array::from_fn(|mu| std::array::from_fn(|i| self.comps[mu][i].expr().clone()))
    }

    pub fn with_params(&self, params: ParamEnv) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }

    /// Values and derivatives of every component up to `order`.
    pub fn derivs_at(&self, x: &Point4, order: usize) -> Result<[[PointDerivs; 4]; 4]> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { point: *x });
        }
        let mut out: Vec<PointDerivs> = Vec::with_capacity(16);
        for mu in 0..4 {
            for i in 0..4 {
                out.push(self.comps[mu][i].eval_derivs(x, &self.params, order)?);
            }
        }
        let mut it = out.into_iter();
        Ok(std::array::from_fn(|_| std::array::from_fn(|_| it.next().unwrap())))
    }

    /// e and de = d_j e^mu_i seeded as scalars carrying `S::ORDER` further
    /// derivative levels.
    pub fn seeds<S: Scalar>(&self, x: &Point4) -> Result<(M4<S>, T3<S>)> {
        let d = self.derivs_at(x, S::ORDER + 1)?;
        Ok(seed_pair(&d))
    }
}

pub(crate) fn seed_pair<S: Scalar>(d: &[[PointDerivs; 4]; 4]) -> (M4<S>, T3<S>) {
    let e = std::array::from_fn(|mu| {
        std::array::from_fn(|i| S::from_derivs(&|m: &[usize]| d[mu][i].get(m)))
    });
    let de = std::array::from_fn(|mu| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                S::from_derivs(&|m: &[usize]| {
                    let mut multi = Vec::with_capacity(m.len() + 1);
                    multi.push(j);
                    multi.extend_from_slice(m);
                    d[mu][i].get(&multi)
                })
            })
        })
    });
    (e, de)
}

/// Values and first derivatives of a tetrad at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TetradValue {
    pub e: M4,
    /// `de[mu][i][j]` = d_j e^mu_i.
    pub de: T3,
    /// `einv[i][mu]` = e^i_mu.
    pub einv: M4,
    pub det: f64,
}

impl TetradValue {
    pub fn from_parts(e: M4, de: T3, point: &Point4) -> Result<Self> {
        let det = tensor::det4(&e);
        if !det.is_finite() || det.abs() < SINGULAR_DET {
            return Err(Error::SingularTetrad { det, point: *point });
        }
        let einv = tensor::invert(&e).ok_or(Error::SingularTetrad { det, point: *point })?;
        Ok(Self { e, de, einv, det })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricValue {
    pub g: M4,
    pub ginv: M4,
    /// `dg[i][j][k]` = d_k g_ij.
    pub dg: T3,
}

impl MetricValue {
    /// Numbers of negative and positive eigenvalues.
    pub fn signature(&self) -> (usize, usize) {
        let ev = symmetric_eigenvalues(&self.g);
        let neg = ev.iter().filter(|v| **v < 0.0).count();
        let pos = ev.iter().filter(|v| **v > 0.0).count();
        (neg, pos)
    }
}

/// E^mu_ij = 1/2 (d_j e^mu_i - d_i e^mu_j), stored antisymmetric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntisymJet {
    pub comps: T3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinConnectionValue {
    /// `omega[i][mu][nu]` = omega_i^{mu nu}.
    pub omega: T3,
    /// `domega[i][mu][nu][j]` = d_j omega_i^{mu nu}.
    pub domega: Option<T4>,
}

impl SpinConnectionValue {
    /// max |omega_i^{mu nu} + omega_i^{nu mu}|.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    m = m.max((self.omega[i][a][b] + self.omega[i][b][a]).abs());
                }
            }
        }
        m
    }

    /// max_i |omega_i^mu_mu|.
    pub fn trace_defect(&self) -> f64 {
        (0..4)
            .map(|i| (0..4).map(|mu| self.omega[i][mu][mu] * ETA[mu]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChristoffelValue {
    /// `gamma[k][i][j]` = Gamma^k_ij.
    pub gamma: T3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureValue {
    /// `r[j][i][l][s]` = R_ji^{l s}.
    pub r: T4,
}

impl CurvatureValue {
    /// Mixed Ricci contraction R_ji^{l s} e^i_l, free (j; s).
    pub fn ricci_contraction(&self, einv: &M4) -> M4 {
        std::array::from_fn(|j| {
            std::array::from_fn(|s| {
                let mut acc = 0.0;
                for i in 0..4 {
                    for l in 0..4 {
                        acc += self.r[j][i][l][s] * einv[i][l];
                    }
                }
                acc
            })
        })
    }
}

// ---------------------------------------------------------------------------
// Generic kernels

/// Inverse tetrad, metric and inverse metric of a frame.
pub struct Frame<S> {
    pub einv: M4<S>,
    pub g: M4<S>,
    pub ginv: M4<S>,
}

pub fn frame<S: Scalar>(e: &M4<S>) -> Option<Frame<S>> {
    let einv = S::inv4(e)?;
    let g = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = S::zero();
            for mu in 0..4 {
                s += (e[mu][i] * e[mu][j]).scale(ETA[mu]);
            }
            s
        })
    });
    // g^ij = eta^{mu nu} e^i_mu e^j_nu
    let ginv = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = S::zero();
            for mu in 0..4 {
                s += (einv[i][mu] * einv[j][mu]).scale(ETA[mu]);
            }
            s
        })
    });
    Some(Frame { einv, g, ginv })
}

pub fn antisym<S: Scalar>(de: &T3<S>) -> T3<S> {
    std::array::from_fn(|mu| {
        std::array::from_fn(|i| std::array::from_fn(|j| (de[mu][i][j] - de[mu][j][i]).scale(0.5)))
    })
}

/// Sigma^p_ji = e^p_l E^l_ij, stored `[p][j][i]`.
pub fn sigma_kernel<S: Scalar>(einv: &M4<S>, jet: &T3<S>) -> T3<S> {
    std::array::from_fn(|p| {
        std::array::from_fn(|j| {
            std::array::from_fn(|i| {
                let mut s = S::zero();
                for l in 0..4 {
                    s += einv[p][l] * jet[l][i][j];
                }
                s
            })
        })
    })
}

/// omega_i^{mu nu} from the frame and its antisymmetrized jet:
/// omega_i^mu_nu = e^mu_p (Sigma^p_ji - Sigma_j^p_i + Sigma_ij^p) e^j_nu.
pub fn spin_kernel<S: Scalar>(e: &M4<S>, fr: &Frame<S>, jet: &T3<S>) -> T3<S> {
    let sig = sigma_kernel(&fr.einv, jet);
    // low[q][j][i] = Sigma_qji
    let low: T3<S> = std::array::from_fn(|q| {
        std::array::from_fn(|j| {
            std::array::from_fn(|i| {
                let mut s = S::zero();
                for p in 0..4 {
                    s += fr.g[q][p] * sig[p][j][i];
                }
                s
            })
        })
    });
    // a[p][j][i] = Sigma^p_ji - g^{pr} Sigma_jri + Sigma_ijr g^{rp}
    let a: T3<S> = std::array::from_fn(|p| {
        std::array::from_fn(|j| {
            std::array::from_fn(|i| {
                let mut s = sig[p][j][i];
                for r in 0..4 {
                    s += fr.ginv[p][r] * (low[i][j][r] - low[j][r][i]);
                }
                s
            })
        })
    });
    let mut mixed = zeros3::<S>();
    for i in 0..4 {
        for mu in 0..4 {
            for nu in 0..4 {
                let mut s = S::zero();
                for p in 0..4 {
                    for j in 0..4 {
                        s += e[mu][p] * a[p][j][i] * fr.einv[j][nu];
                    }
                }
                mixed[i][mu][nu] = s;
            }
        }
    }
    // raise nu with eta
    std::array::from_fn(|i| {
        std::array::from_fn(|mu| std::array::from_fn(|nu| mixed[i][mu][nu].scale(ETA[nu])))
    })
}

/// Induced spin connection of a frame given e and d_j e^mu_i.
pub fn induced_spin<S: Scalar>(e: &M4<S>, de: &T3<S>) -> Option<T3<S>> {
    let fr = frame(e)?;
    Some(spin_kernel(e, &fr, &antisym(de)))
}

/// 2 E^mu_ij = omega_i^mu_nu e^nu_j - omega_j^mu_nu e^nu_i.
pub fn jet_from_spin_kernel<S: Scalar>(e: &M4<S>, omega: &T3<S>) -> T3<S> {
    let mixed = lower_second(omega);
    std::array::from_fn(|mu| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut s = S::zero();
                for nu in 0..4 {
                    s += mixed[i][mu][nu] * e[nu][j] - mixed[j][mu][nu] * e[nu][i];
                }
                s.scale(0.5)
            })
        })
    })
}

/// R_ji^{l s} = d_j w_i^{ls} - d_i w_j^{ls} + w_j^l_h w_i^{hs} - w_i^l_h w_j^{hs}.
pub fn curvature_kernel<S: Scalar>(omega: &T3<S>, domega: &T4<S>) -> T4<S> {
    let mixed = lower_second(omega);
    let mut r = zeros4::<S>();
    for j in 0..4 {
        for i in 0..4 {
            for l in 0..4 {
                for s in 0..4 {
                    let mut acc = domega[i][l][s][j] - domega[j][l][s][i];
                    for h in 0..4 {
                        acc += mixed[j][l][h] * omega[i][h][s] - mixed[i][l][h] * omega[j][h][s];
                    }
                    r[j][i][l][s] = acc;
                }
            }
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Pointwise operations

pub fn tetrad_at(f: &TetradField, x: &Point4) -> Result<TetradValue> {
    let (e, de) = f.seeds::<f64>(x)?;
    TetradValue::from_parts(e, de, x)
}

pub fn metric_from_tetrad(v: &TetradValue) -> MetricValue {
    let mut g = [[0.0; 4]; 4];
    let mut dg = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for mu in 0..4 {
                g[i][j] += ETA[mu] * v.e[mu][i] * v.e[mu][j];
                for k in 0..4 {
                    dg[i][j][k] +=
                        ETA[mu] * (v.de[mu][i][k] * v.e[mu][j] + v.e[mu][i] * v.de[mu][j][k]);
                }
            }
        }
    }
    let ginv = tensor::invert(&g).expect("metric of a nonsingular tetrad is invertible");
    MetricValue { g, ginv, dg }
}

pub fn antisym_jet(v: &TetradValue) -> AntisymJet {
    AntisymJet {
        comps: antisym(&v.de),
    }
}

/// Anholonomy coefficients Sigma^p_ji, stored `[p][j][i]`.
pub fn sigma(v: &TetradValue, jet: &AntisymJet) -> T3 {
    sigma_kernel(&v.einv, &jet.comps)
}

pub fn spin_from_tetrad(v: &TetradValue, m: &MetricValue) -> SpinConnectionValue {
    let fr = Frame {
        einv: v.einv,
        g: m.g,
        ginv: m.ginv,
    };
    SpinConnectionValue {
        omega: spin_kernel(&v.e, &fr, &antisym(&v.de)),
        domega: None,
    }
}

pub fn christoffel(m: &MetricValue) -> ChristoffelValue {
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for l in 0..4 {
                    s += m.ginv[k][l] * (m.dg[l][j][i] + m.dg[l][i][j] - m.dg[i][j][l]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }
    ChristoffelValue { gamma }
}

/// omega_i^mu_nu = e^mu_k (Gamma^k_ij e^j_nu + d_i e^k_nu), with the inverse
/// frame derivative d_i e^k_nu = -e^k_a (d_i e^a_m) e^m_nu.
pub fn spin_from_christoffel(v: &TetradValue, c: &ChristoffelValue) -> SpinConnectionValue {
    let mut deinv = [[[0.0; 4]; 4]; 4]; // [k][nu][i]
    for k in 0..4 {
        for nu in 0..4 {
            for i in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    for m in 0..4 {
                        s -= v.einv[k][a] * v.de[a][m][i] * v.einv[m][nu];
                    }
                }
                deinv[k][nu][i] = s;
            }
        }
    }
    let mut omega = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        for mu in 0..4 {
            for nu in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    let mut inner = deinv[k][nu][i];
                    for j in 0..4 {
                        inner += c.gamma[k][i][j] * v.einv[j][nu];
                    }
                    s += v.e[mu][k] * inner;
                }
                omega[i][mu][nu] = s * ETA[nu];
            }
        }
    }
    SpinConnectionValue {
        omega,
        domega: None,
    }
}

pub fn jet_from_spin(v: &TetradValue, w: &SpinConnectionValue) -> AntisymJet {
    AntisymJet {
        comps: jet_from_spin_kernel(&v.e, &w.omega),
    }
}

/// Components `[mu][j][i]` of D e^mu: nabla_j e^mu_i - nabla_i e^mu_j.
pub fn covariant_ext_diff(
    v: &TetradValue,
    w: &SpinConnectionValue,
    c: &ChristoffelValue,
) -> T3 {
    let mixed = lower_second(&w.omega);
    let nabla = |mu: usize, j: usize, i: usize| -> f64 {
        let mut s = v.de[mu][i][j];
        for nu in 0..4 {
            s += mixed[j][mu][nu] * v.e[nu][i];
        }
        for k in 0..4 {
            s -= c.gamma[k][j][i] * v.e[mu][k];
        }
        s
    };
    std::array::from_fn(|mu| {
        std::array::from_fn(|j| std::array::from_fn(|i| nabla(mu, j, i) - nabla(mu, i, j)))
    })
}

pub fn curvature(w: &SpinConnectionValue) -> Result<CurvatureValue> {
    let domega = w.domega.as_ref().ok_or(Error::MissingDerivatives)?;
    Ok(CurvatureValue {
        r: curvature_kernel(&w.omega, domega),
    })
}

/// Induced spin connection of a symbolic tetrad at `x`, with its exact first
/// derivatives.
pub fn induced_spin_field(f: &TetradField, x: &Point4) -> Result<SpinConnectionValue> {
    let (e, de) = f.seeds::<Dual<f64>>(x)?;
    let ev: M4 = std::array::from_fn(|mu| std::array::from_fn(|i| e[mu][i].v));
    let det = tensor::det4(&ev);
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularTetrad { det, point: *x });
    }
    let w = induced_spin(&e, &de).ok_or(Error::SingularTetrad { det, point: *x })?;
    Ok(split_dual3(&w))
}

pub(crate) fn split_dual3(w: &T3<Dual<f64>>) -> SpinConnectionValue {
    let omega = std::array::from_fn(|i| std::array::from_fn(|a| std::array::from_fn(|b| w[i][a][b].v)));
    let domega = std::array::from_fn(|i| {
        std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|j| w[i][a][b].d[j])))
    });
    SpinConnectionValue {
        omega,
        domega: Some(domega),
    }
}

/// Eigenvalues of a symmetric 4×4 matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(m: &M4) -> [f64; 4] {
    let mut a = *m;
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    [a[0][0], a[1][1], a[2][2], a[3][3]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::{parse_with, ParseContext};
    use crate::tensor::{max_abs3, max_diff3};

    fn sph() -> ParseContext {
        ParseContext::with_coords(["t", "r", "theta", "phi"])
    }

    fn schwarzschild() -> TetradField {
        let c = sph();
        TetradField::diagonal(
            [
                parse_with("sqrt(1 - 2*M/r)", &c).unwrap(),
                parse_with("1/sqrt(1 - 2*M/r)", &c).unwrap(),
                parse_with("r", &c).unwrap(),
                parse_with("r*sin(theta)", &c).unwrap(),
            ],
            ParamEnv::new().with("M", 1.0),
            Domain::new([
                (f64::NEG_INFINITY, f64::INFINITY),
                (2.0, f64::INFINITY),
                (0.0, std::f64::consts::PI),
                (f64::NEG_INFINITY, f64::INFINITY),
            ]),
        )
    }

    const X0: Point4 = [0.0, 4.0, std::f64::consts::FRAC_PI_2, 0.0];

    #[test]
    fn identity_tetrad() {
        let v = tetrad_at(&TetradField::identity(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(v.det, 1.0);
        assert_eq!(max_abs3(&v.de), 0.0);
        let m = metric_from_tetrad(&v);
        for i in 0..4 {
            assert_eq!(m.g[i][i], ETA[i]);
        }
        let w = spin_from_tetrad(&v, &m);
        assert_eq!(max_abs3(&w.omega), 0.0);
        assert_eq!(m.signature(), (1, 3));
    }

    #[test]
    fn schwarzschild_det_and_metric() {
        let v = tetrad_at(&schwarzschild(), &X0).unwrap();
        assert!((v.det - 16.0).abs() < 1e-12);
        let m = metric_from_tetrad(&v);
        let f = 0.5;
        let expected = [-f, 1.0 / f, 16.0, 16.0];
        for i in 0..4 {
            assert!((m.g[i][i] - expected[i]).abs() < 1e-12);
        }
        assert_eq!(m.signature(), (1, 3));
        assert!(crate::tensor::max_diff_m(&crate::tensor::matmul(&m.g, &m.ginv), &crate::tensor::identity()) < 1e-12);
    }

    #[test]
    fn singular_tetrad_rejected() {
        let c = sph();
        let f = TetradField::diagonal(
            [
                parse_with("r", &c).unwrap(),
                Expr::one(),
                Expr::one(),
                Expr::one(),
            ],
            ParamEnv::new(),
            Domain::unbounded(),
        );
        assert!(matches!(
            tetrad_at(&f, &[0.0, 0.0, 1.0, 0.0]),
            Err(Error::SingularTetrad { .. })
        ));
    }

    #[test]
    fn linear_field_jet_and_sigma() {
        // e^0_0 = x1, others identity
        let mut e = TetradField::identity().exprs();
        e[0][0] = Expr::coord(1);
        let f = TetradField::new(e, ParamEnv::new(), Domain::unbounded());
        let v = tetrad_at(&f, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let jet = antisym_jet(&v);
        assert_eq!(jet.comps[0][0][1], 0.5);
        assert_eq!(jet.comps[0][1][0], -0.5);
        let s = sigma(&v, &jet);
        // Sigma^0_10 = e^0_l E^l_01 with e^0_0 = 1 at x1 = 1
        assert_eq!(s[0][1][0], 0.5);
    }

    #[test]
    fn constant_tetrad_has_zero_jet() {
        let c = sph();
        let f = TetradField::diagonal(
            [
                parse_with("2", &c).unwrap(),
                parse_with("3", &c).unwrap(),
                Expr::one(),
                Expr::one(),
            ],
            ParamEnv::new(),
            Domain::unbounded(),
        );
        let v = tetrad_at(&f, &X0).unwrap();
        assert_eq!(max_abs3(&antisym_jet(&v).comps), 0.0);
        assert_eq!(max_abs3(&sigma(&v, &antisym_jet(&v))), 0.0);
    }

    #[test]
    fn schwarzschild_spin_coefficients() {
        let v = tetrad_at(&schwarzschild(), &X0).unwrap();
        let m = metric_from_tetrad(&v);
        let w = spin_from_tetrad(&v, &m);
        let via_gamma = spin_from_christoffel(&v, &christoffel(&m));
        assert!(max_diff3(&w.omega, &via_gamma.omega) < 1e-12);
        assert!((w.omega[0][0][1] - 0.0625).abs() < 1e-12, "{}", w.omega[0][0][1]);
        // sign fixed by the Christoffel route: omega_phi^3_1 = e^3_phi Gamma^phi_phi r e^r_1
        assert!((w.omega[3][3][1] - 0.5f64.sqrt()).abs() < 1e-12, "{}", w.omega[3][3][1]);
        assert!(w.antisymmetry_defect() < 1e-15);
        assert!(w.trace_defect() < 1e-12);
    }

    #[test]
    fn schwarzschild_christoffel() {
        let v = tetrad_at(&schwarzschild(), &X0).unwrap();
        let c = christoffel(&metric_from_tetrad(&v));
        assert!((c.gamma[1][0][0] - 0.03125).abs() < 1e-12);
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert!((c.gamma[k][i][j] - c.gamma[k][j][i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn torsion_free_and_broken_compatibility() {
        let v = tetrad_at(&schwarzschild(), &X0).unwrap();
        let m = metric_from_tetrad(&v);
        let c = christoffel(&m);
        let w = spin_from_tetrad(&v, &m);
        assert!(max_abs3(&covariant_ext_diff(&v, &w, &c)) < 1e-12);
        let mut doubled = w;
        doubled.omega = doubled.omega.map(|a| a.map(|b| b.map(|x| 2.0 * x)));
        assert!(max_abs3(&covariant_ext_diff(&v, &doubled, &c)) > 1e-3);
        let zero = SpinConnectionValue { omega: [[[0.0; 4]; 4]; 4], domega: None };
        let ident = tetrad_at(&TetradField::identity(), &X0).unwrap();
        let flat = christoffel(&metric_from_tetrad(&ident));
        assert_eq!(max_abs3(&covariant_ext_diff(&ident, &zero, &flat)), 0.0);
    }

    #[test]
    fn jet_round_trip() {
        let v = tetrad_at(&schwarzschild(), &X0).unwrap();
        let w = spin_from_tetrad(&v, &metric_from_tetrad(&v));
        let back = jet_from_spin(&v, &w);
        assert!(max_diff3(&back.comps, &antisym_jet(&v).comps) < 1e-12);
        let zero = SpinConnectionValue { omega: [[[0.0; 4]; 4]; 4], domega: None };
        assert_eq!(max_abs3(&jet_from_spin(&v, &zero).comps), 0.0);
    }

    #[test]
    fn curvature_cases() {
        let zero = SpinConnectionValue { omega: [[[0.0; 4]; 4]; 4], domega: Some(zeros4()) };
        assert_eq!(crate::tensor::max_abs4(&curvature(&zero).unwrap().r), 0.0);
        let missing = SpinConnectionValue { omega: [[[0.0; 4]; 4]; 4], domega: None };
        assert_eq!(curvature(&missing), Err(Error::MissingDerivatives));

        // constant omega: only the commutator survives
        let mut omega = [[[0.0; 4]; 4]; 4];
        omega[0][0][1] = 0.3;
        omega[0][1][0] = -0.3;
        omega[1][1][2] = 0.7;
        omega[1][2][1] = -0.7;
        let w = SpinConnectionValue { omega, domega: Some(zeros4()) };
        let r = curvature(&w).unwrap().r;
        let mixed = lower_second(&omega);
        let mut expected = 0.0;
        for h in 0..4 {
            expected += mixed[0][0][h] * omega[1][h][2] - mixed[1][0][h] * omega[0][h][2];
        }
        assert!((r[0][1][0][2] - expected).abs() < 1e-15);
        assert!(expected.abs() > 0.1);

        // Schwarzschild is Ricci flat
        let f = schwarzschild();
        let w = induced_spin_field(&f, &X0).unwrap();
        let r = curvature(&w).unwrap();
        let v = tetrad_at(&f, &X0).unwrap();
        assert!(crate::tensor::max_abs_m(&r.ricci_contraction(&v.einv)) < 1e-12);
        assert!(crate::tensor::max_abs4(&r.r) > 1e-3);
    }
}
