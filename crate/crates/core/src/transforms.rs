//! Local Lorentz and coordinate transformation laws, contact forms, and
//! J-prolongations of bundle morphisms and vector fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprdsl::{DiffExpr, Expr, ParamEnv, Point4, PointDerivs};
use crate::geometry::{jet_from_spin_kernel, AntisymJet, Domain, SpinConnectionValue, TetradField, TetradValue};
use crate::scalar::Scalar;
use crate::tensor::{self, M4, T3, ETA};
use crate::variational::Section;

/// Tolerance for the Lorentz condition and coordinate-change inverses.
pub const VALIDITY_TOL: f64 = 1e-9;

fn diff_grid(e: [[Expr; 4]; 4]) -> Arc<[[DiffExpr; 4]; 4]> {
    Arc::new(e.map(|row| row.map(DiffExpr::new)))
}

fn grid_exprs(g: &[[DiffExpr; 4]; 4]) -> [[Expr; 4]; 4] {
    std::array::from_fn(|a| std::array::from_fn(|b| g[a][b].expr().clone()))
}

fn zero_grid() -> [[Expr; 4]; 4] {
    std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()))
}

fn identity_grid() -> [[Expr; 4]; 4] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| if a == b { Expr::one() } else { Expr::zero() })
    })
}

fn subst_grid(g: &[[Expr; 4]; 4], subs: &[Expr; 4]) -> [[Expr; 4]; 4] {
    std::array::from_fn(|a| std::array::from_fn(|b| g[a][b].substitute(subs)))
}

fn eval_grid(g: &[[DiffExpr; 4]; 4], x: &Point4, p: &ParamEnv, order: usize) -> Result<[[PointDerivs; 4]; 4]> {
    let mut out = Vec::with_capacity(16);
    for row in g.iter() {
        for c in row {
            out.push(c.eval_derivs(x, p, order)?);
        }
    }
    let mut it = out.into_iter();
    Ok(std::array::from_fn(|_| std::array::from_fn(|_| it.next().unwrap())))
}

// ---------------------------------------------------------------------------
// Lorentz fields

/// A field of Lorentz matrices Lambda^mu_nu(x).
#[derive(Clone, Debug)]
pub struct LorentzField {
    comps: Arc<[[DiffExpr; 4]; 4]>,
    pub params: ParamEnv,
}

/// Lambda and d_h Lambda^mu_nu (stored `[mu][nu][h]`) at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzValue {
    pub l: M4,
    pub dl: T3,
}

impl LorentzValue {
    pub fn constant(l: M4) -> Self {
        Self { l, dl: [[[0.0; 4]; 4]; 4] }
    }

    /// Lambda_s^n = Lambda^a_b eta_as eta^bn, stored `[s][n]`; equals the inverse
    /// matrix `(Lambda^-1)^n_s` for a Lorentz matrix.
    pub fn lower_inverse(&self) -> M4 {
        std::array::from_fn(|s| std::array::from_fn(|n| ETA[s] * self.l[s][n] * ETA[n]))
    }

    pub fn deviation(&self) -> f64 {
        lorentz_deviation(&self.l)
    }
}

/// max |Lambda^T eta Lambda - eta|.
pub fn lorentz_deviation(l: &M4) -> f64 {
    let mut m = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for mu in 0..4 {
                s += l[mu][a] * ETA[mu] * l[mu][b];
            }
            let target = if a == b { ETA[a] } else { 0.0 };
            m = m.max((s - target).abs());
        }
    }
    m
}

impl LorentzField {
    /// Wraps sixteen expressions; validity is checked at evaluation.
    pub fn new(l: [[Expr; 4]; 4], params: ParamEnv) -> Self {
        Self {
            comps: diff_grid(l),
            params,
        }
    }

    pub fn identity() -> Self {
        Self::new(identity_grid(), ParamEnv::new())
    }

    pub fn constant(l: &M4) -> Result<Self> {
        let dev = lorentz_deviation(l);
        if dev > VALIDITY_TOL {
            return Err(Error::InvalidLorentz { deviation: dev, point: [0.0; 4] });
        }
        Ok(Self::new(l.map(|row| row.map(Expr::constant)), ParamEnv::new()))
    }

    /// Boost along spatial axis `axis` (1..=3) with rapidity `phi(x)`.
    pub fn boost(axis: usize, phi: Expr, params: ParamEnv) -> Self {
        assert!((1..4).contains(&axis), "boost axis must be spatial");
        let ep = Expr::exp(phi.clone());
        let em = Expr::exp(-phi);
        let cosh = Expr::scale(0.5, ep.clone() + em.clone());
        let sinh = Expr::scale(0.5, ep - em);
        let mut l = identity_grid();
        l[0][0] = cosh.clone();
        l[axis][axis] = cosh;
        l[0][axis] = sinh.clone();
        l[axis][0] = sinh;
        Self::new(l, params)
    }

    /// Rotation in the spatial plane (a, b) by `angle(x)`.
    pub fn rotation(a: usize, b: usize, angle: Expr, params: ParamEnv) -> Self {
        assert!(a != b && (1..4).contains(&a) && (1..4).contains(&b));
        let c = Expr::cos(angle.clone());
        let s = Expr::sin(angle);
        let mut l = identity_grid();
        l[a][a] = c.clone();
        l[b][b] = c;
        l[a][b] = -s.clone();
        l[b][a] = s;
        Self::new(l, params)
    }

    /// Pointwise product `self * other`.
    pub fn compose(&self, other: &LorentzField) -> Self {
        let a = self.exprs();
        let b = other.exprs();
        let l = std::array::from_fn(|mu| {
            std::array::from_fn(|nu| Expr::sum((0..4).map(|k| a[mu][k].clone() * b[k][nu].clone())))
        });
        Self::new(l, self.params.merged(&other.params))
    }

    pub fn exprs(&self) -> [[Expr; 4]; 4] {
        grid_exprs(&self.comps)
    }

    pub fn component(&self, mu: usize, nu: usize) -> &DiffExpr {
        &self.comps[mu][nu]
    }

    /// Value and first derivatives, rejecting matrices off the Lorentz group.
    pub fn at(&self, x: &Point4) -> Result<LorentzValue> {
        let d = eval_grid(&self.comps, x, &self.params, 1)?;
        let l: M4 = std::array::from_fn(|a| std::array::from_fn(|b| d[a][b].value()));
        let dl = std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|h| d[a][b].get(&[h]))));
        let dev = lorentz_deviation(&l);
        if !(dev <= VALIDITY_TOL) {
            return Err(Error::InvalidLorentz { deviation: dev, point: *x });
        }
        Ok(LorentzValue { l, dl })
    }
}

// ---------------------------------------------------------------------------
// Coordinate changes

/// A chart change xbar = forward(x) with user-supplied inverse x = inverse(xbar).
#[derive(Clone, Debug)]
pub struct CoordChange {
    forward: Arc<[DiffExpr; 4]>,
    inverse: Arc<[DiffExpr; 4]>,
    pub params: ParamEnv,
}

/// Jacobian data at a point of the new chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordValue {
    /// Old coordinates x(xbar).
    pub x: Point4,
    /// `jacinv[i][a]` = dx^i / dxbar^a.
    pub jacinv: M4,
    /// `second[i][a][b]` = d^2 x^i / dxbar^a dxbar^b.
    pub second: T3,
}

impl CoordValue {
    pub fn identity(x: Point4) -> Self {
        Self {
            x,
            jacinv: tensor::identity(),
            second: [[[0.0; 4]; 4]; 4],
        }
    }

    pub fn det_jacinv(&self) -> f64 {
        tensor::det4(&self.jacinv)
    }
}

impl CoordChange {
    pub fn new(forward: [Expr; 4], inverse: [Expr; 4], params: ParamEnv) -> Self {
        Self {
            forward: Arc::new(forward.map(DiffExpr::new)),
            inverse: Arc::new(inverse.map(DiffExpr::new)),
            params,
        }
    }

    pub fn identity() -> Self {
        let id: [Expr; 4] = std::array::from_fn(Expr::coord);
        Self::new(id.clone(), id, ParamEnv::new())
    }

    /// xbar = A x + b; the inverse is formed numerically.
    pub fn affine(a: &M4, b: &[f64; 4]) -> Result<Self> {
        let ainv = tensor::invert(a).ok_or(Error::SingularMatrix)?;
        let lin = |m: &M4, shift: &[f64; 4], sign: f64| -> [Expr; 4] {
            std::array::from_fn(|i| {
                Expr::sum(
                    (0..4)
                        .map(|j| Expr::scale(m[i][j], Expr::coord(j)))
                        .chain(std::iter::once(Expr::constant(sign * shift[i]))),
                )
            })
        };
        let binv: [f64; 4] = std::array::from_fn(|i| (0..4).map(|j| ainv[i][j] * b[j]).sum());
        Ok(Self::new(lin(a, b, 1.0), lin(&ainv, &binv, -1.0), ParamEnv::new()))
    }

    /// xbar^k = factor * x^k, other coordinates unchanged.
    pub fn scaling(k: usize, factor: f64) -> Self {
        let mut a = tensor::identity::<f64>();
        a[k][k] = factor;
        Self::affine(&a, &[0.0; 4]).expect("nonzero scaling factor")
    }

    pub fn forward_exprs(&self) -> [Expr; 4] {
        std::array::from_fn(|i| self.forward[i].expr().clone())
    }

    pub fn inverse_exprs(&self) -> [Expr; 4] {
        std::array::from_fn(|i| self.inverse[i].expr().clone())
    }

    pub fn to_bar(&self, x: &Point4) -> Result<Point4> {
        let mut out = [0.0; 4];
        for (a, f) in self.forward.iter().enumerate() {
            out[a] = f.expr().eval(x, &self.params)?;
        }
        Ok(out)
    }

    pub fn from_bar(&self, xbar: &Point4) -> Result<Point4> {
        let mut out = [0.0; 4];
        for (i, f) in self.inverse.iter().enumerate() {
            out[i] = f.expr().eval(xbar, &self.params)?;
        }
        Ok(out)
    }

    /// `jac[a][i]` = dxbar^a / dx^i at old point x.
    pub fn jac(&self, x: &Point4) -> Result<M4> {
        let mut j = [[0.0; 4]; 4];
        for a in 0..4 {
            let d = self.forward[a].eval_derivs(x, &self.params, 1)?;
            for i in 0..4 {
                j[a][i] = d.get(&[i]);
            }
        }
        Ok(j)
    }

    /// Inverse-map Jacobian data at `xbar`, without validation.
    pub fn at_bar_unchecked(&self, xbar: &Point4) -> Result<CoordValue> {
        let mut x = [0.0; 4];
        let mut jacinv = [[0.0; 4]; 4];
        let mut second = [[[0.0; 4]; 4]; 4];
        for i in 0..4 {
            let d = self.inverse[i].eval_derivs(xbar, &self.params, 2)?;
            x[i] = d.value();
            for a in 0..4 {
                jacinv[i][a] = d.get(&[a]);
                for b in 0..4 {
                    second[i][a][b] = d.get(&[a, b]);
                }
            }
        }
        Ok(CoordValue { x, jacinv, second })
    }

    /// Inverse-map Jacobian data at `xbar`, checking that the supplied inverse
    /// really inverts the forward map there.
    pub fn at_bar(&self, xbar: &Point4) -> Result<CoordValue> {
        let v = self.at_bar_unchecked(xbar)?;
        let dev = self.deviation_with(xbar, &v)?;
        if !(dev <= VALIDITY_TOL) {
            return Err(Error::InvalidCoordChange { deviation: dev, point: *xbar });
        }
        Ok(v)
    }

    /// Largest of |forward(inverse(xbar)) - xbar| / (1 + |xbar|) and
    /// |jac * jacinv - I|.
    pub fn verify(&self, xbar: &Point4) -> Result<f64> {
        let v = self.at_bar_unchecked(xbar)?;
        self.deviation_with(xbar, &v)
    }

    fn deviation_with(&self, xbar: &Point4, v: &CoordValue) -> Result<f64> {
        let back = self.to_bar(&v.x)?;
        let mut dev = 0.0f64;
        for a in 0..4 {
            dev = dev.max((back[a] - xbar[a]).abs() / (1.0 + xbar[a].abs()));
        }
        let prod = tensor::matmul(&self.jac(&v.x)?, &v.jacinv);
        Ok(dev.max(tensor::max_diff_m(&prod, &tensor::identity())))
    }

    /// The change `self` applied after `inner`.
    pub fn compose(&self, inner: &CoordChange) -> Self {
        let fwd = self.forward_exprs().map(|e| e.substitute(&inner.forward_exprs()));
        let inv = inner.inverse_exprs().map(|e| e.substitute(&self.inverse_exprs()));
        Self::new(fwd, inv, self.params.merged(&inner.params))
    }
}

// ---------------------------------------------------------------------------
// Group action and transformation laws

/// Lambda X J^-1.
pub fn gauge_action(l: &M4, j: &M4, x: &M4) -> Result<M4> {
    let jinv = tensor::invert(j).ok_or(Error::SingularMatrix)?;
    Ok(tensor::matmul(&tensor::matmul(l, x), &jinv))
}

/// ebar^mu_j(xbar) = Lambda^mu_s(x) e^s_i(x) dx^i/dxbar^j with x = x(xbar).
///
/// The result lives on the new chart; its domain is left unbounded and
/// evaluation outside the original domain surfaces as evaluation errors.
pub fn transform_tetrad(f: &TetradField, l: &LorentzField, c: &CoordChange) -> TetradField {
    let inv = c.inverse_exprs();
    let e = subst_grid(&f.exprs(), &inv);
    let lam = subst_grid(&l.exprs(), &inv);
    let jinv: [[Expr; 4]; 4] =
        std::array::from_fn(|i| std::array::from_fn(|a| c.inverse[i].derivative(&[a]).clone()));
    let out = std::array::from_fn(|mu| {
        std::array::from_fn(|j| {
            Expr::sum((0..4).flat_map(|s| {
                let lam = &lam;
                let e = &e;
                let jinv = &jinv;
                (0..4).map(move |i| {
                    if lam[mu][s].is_zero() || e[s][i].is_zero() || jinv[i][j].is_zero() {
                        Expr::zero()
                    } else {
                        lam[mu][s].clone() * e[s][i].clone() * jinv[i][j].clone()
                    }
                })
            }))
        })
    });
    let params = f.params.merged(&l.params).merged(&c.params);
    TetradField::new(out, params, Domain::unbounded())
}

/// Lambda(x(xbar)) as a field on the new chart.
pub fn pull_lorentz(l: &LorentzField, c: &CoordChange) -> LorentzField {
    LorentzField::new(subst_grid(&l.exprs(), &c.inverse_exprs()), l.params.merged(&c.params))
}

/// Transformed tetrad value and full first jet `[mu][j][k]` = d_kbar ebar^mu_j,
/// including the second-derivative term of the chart change.
pub fn transform_jet(v: &TetradValue, l: &LorentzValue, c: &CoordValue) -> (M4, T3) {
    let j = &c.jacinv;
    let ebar = std::array::from_fn(|mu| {
        std::array::from_fn(|a| {
            let mut s = 0.0;
            for sg in 0..4 {
                for i in 0..4 {
                    s += l.l[mu][sg] * v.e[sg][i] * j[i][a];
                }
            }
            s
        })
    });
    let mut jet = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        for a in 0..4 {
            for k in 0..4 {
                let mut s = 0.0;
                for sg in 0..4 {
                    for i in 0..4 {
                        let mut inner = l.l[mu][sg] * v.e[sg][i] * c.second[i][k][a];
                        for h in 0..4 {
                            inner += (l.dl[mu][sg][h] * v.e[sg][i] + l.l[mu][sg] * v.de[sg][i][h])
                                * j[h][k]
                                * j[i][a];
                        }
                        s += inner;
                    }
                }
                jet[mu][a][k] = s;
            }
        }
    }
    (ebar, jet)
}

/// Transformation law of the antisymmetrized jet.
pub fn transform_e(jet: &AntisymJet, v: &TetradValue, l: &LorentzValue, c: &CoordValue) -> AntisymJet {
    let j = &c.jacinv;
    let mut out = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for sg in 0..4 {
                    for i in 0..4 {
                        for h in 0..4 {
                            s += jet.comps[sg][i][h] * l.l[mu][sg] * j[h][b] * j[i][a];
                            s += 0.5
                                * v.e[sg][i]
                                * l.dl[mu][sg][h]
                                * (j[h][b] * j[i][a] - j[h][a] * j[i][b]);
                        }
                    }
                }
                out[mu][a][b] = s;
            }
        }
    }
    AntisymJet { comps: out }
}

/// omegabar_i^{mn} = L^m_s L^n_g J^j_i omega_j^{sg} - L_s^h dbar_i L^m_h eta^{sn}.
///
/// `dl_bar[m][h][i]` is the derivative of Lambda^m_h along the new coordinate
/// xbar^i and `jinv[j][i]` = dx^j/dxbar^i. With `inhomogeneous = false` the
/// derivative term is dropped (used only to show that it matters).
pub fn transform_spin_kernel<S: Scalar>(
    omega: &T3<S>,
    l: &M4<S>,
    dl_bar: &T3<S>,
    jinv: &M4<S>,
    inhomogeneous: bool,
) -> T3<S> {
    // rotate the Lorentz pair first: rot[j][m][n] = L^m_s L^n_g omega_j^{sg}
    let mut rot = tensor::zeros3::<S>();
    for jj in 0..4 {
        let mut half = [[S::zero(); 4]; 4]; // [m][g]
        for m in 0..4 {
            for g in 0..4 {
                for s in 0..4 {
                    half[m][g] += l[m][s] * omega[jj][s][g];
                }
            }
        }
        for m in 0..4 {
            for n in 0..4 {
                for g in 0..4 {
                    rot[jj][m][n] += half[m][g] * l[n][g];
                }
            }
        }
    }
    std::array::from_fn(|i| {
        std::array::from_fn(|m| {
            std::array::from_fn(|n| {
                let mut s = S::zero();
                for jj in 0..4 {
                    s += jinv[jj][i] * rot[jj][m][n];
                }
                if inhomogeneous {
                    // L_n^h = eta_nn L^n_h eta^hh; times eta^{nn}
                    for h in 0..4 {
                        s -= (l[n][h] * dl_bar[m][h][i]).scale(ETA[h]);
                    }
                }
                s
            })
        })
    })
}

pub fn transform_spin(w: &SpinConnectionValue, l: &LorentzValue, c: &CoordValue) -> SpinConnectionValue {
    let dl_bar = std::array::from_fn(|m| {
        std::array::from_fn(|h| {
            std::array::from_fn(|i| (0..4).map(|k| l.dl[m][h][k] * c.jacinv[k][i]).sum())
        })
    });
    SpinConnectionValue {
        omega: transform_spin_kernel(&w.omega, &l.l, &dl_bar, &c.jacinv, true),
        domega: None,
    }
}

// ---------------------------------------------------------------------------
// Contact forms

/// Coefficients `c[mu][a][b]` of gamma*(theta^mu) = sum_{a<b} c^mu_ab dx^a ^ dx^b,
/// stored antisymmetric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactValue {
    pub c: T3,
}

impl ContactValue {
    pub fn max_abs(&self) -> f64 {
        tensor::max_abs3(&self.c)
    }
}

/// Contact coefficients of a section with frame `e`, frame derivatives `de`
/// and jet coordinate `jet`: (d_a e^mu_b - d_b e^mu_a) + 2 E^mu_ab.
pub fn contact_from_parts(de: &T3, jet: &T3) -> ContactValue {
    ContactValue {
        c: std::array::from_fn(|mu| {
            std::array::from_fn(|a| {
                std::array::from_fn(|b| de[mu][b][a] - de[mu][a][b] + 2.0 * jet[mu][a][b])
            })
        }),
    }
}

/// Pullback of the contact 2-forms by a section; the section's jet coordinate
/// is recovered from its spin connection.
pub fn contact_pullback(gamma: &Section, x: &Point4) -> Result<ContactValue> {
    let s = gamma.jet::<f64>(x)?;
    let jet = jet_from_spin_kernel(&s.e, &s.omega);
    Ok(contact_from_parts(&s.de, &jet))
}

/// Contact coefficients re-expressed on the new chart and rotated by Lambda:
/// Lambda^mu_nu c^nu_ij J^i_a J^j_b. Equals the contact of the transformed section.
pub fn transform_contact(c: &ContactValue, l: &M4, jinv: &M4) -> ContactValue {
    let mut out = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for nu in 0..4 {
                    for i in 0..4 {
                        for j in 0..4 {
                            s += l[mu][nu] * c.c[nu][i][j] * jinv[i][a] * jinv[j][b];
                        }
                    }
                }
                out[mu][a][b] = s;
            }
        }
    }
    ContactValue { c: out }
}

// ---------------------------------------------------------------------------
// Bundle morphisms

/// y = chi(x), ehat^n_i = Gamma^n_m(x) dx^r/dy^i e^m_r + f^n_i(x).
#[derive(Clone, Debug)]
pub struct BundleMorphism {
    gamma: Arc<[[DiffExpr; 4]; 4]>,
    f: Arc<[[DiffExpr; 4]; 4]>,
    pub chi: CoordChange,
    pub params: ParamEnv,
}

impl BundleMorphism {
    pub fn new(gamma: [[Expr; 4]; 4], f: [[Expr; 4]; 4], chi: CoordChange, params: ParamEnv) -> Self {
        let params = params.merged(&chi.params);
        Self {
            gamma: diff_grid(gamma),
            f: diff_grid(f),
            chi,
            params,
        }
    }

    pub fn identity() -> Self {
        Self::new(identity_grid(), zero_grid(), CoordChange::identity(), ParamEnv::new())
    }

    pub fn gamma_exprs(&self) -> [[Expr; 4]; 4] {
        grid_exprs(&self.gamma)
    }

    pub fn f_exprs(&self) -> [[Expr; 4]; 4] {
        grid_exprs(&self.f)
    }

    /// `self` applied after `inner`.
    pub fn compose(&self, inner: &BundleMorphism) -> Self {
        let y = inner.chi.forward_exprs();
        let z = self.chi.compose(&inner.chi);
        let g1 = subst_grid(&self.gamma_exprs(), &y);
        let g2 = inner.gamma_exprs();
        let f1 = subst_grid(&self.f_exprs(), &y);
        let f2 = inner.f_exprs();
        // dy^s/dz^i along the composite, as a function of x
        let zf = z.forward_exprs();
        let dy_dz: [[Expr; 4]; 4] = std::array::from_fn(|s| {
            std::array::from_fn(|i| self.chi.inverse[s].derivative(&[i]).substitute(&zf))
        });
        let gamma = std::array::from_fn(|n| {
            std::array::from_fn(|m| Expr::sum((0..4).map(|k| g1[n][k].clone() * g2[k][m].clone())))
        });
        let f = std::array::from_fn(|n| {
            std::array::from_fn(|i| {
                let mut terms = vec![f1[n][i].clone()];
                for m in 0..4 {
                    for s in 0..4 {
                        if g1[n][m].is_zero() || dy_dz[s][i].is_zero() || f2[m][s].is_zero() {
                            continue;
                        }
                        terms.push(g1[n][m].clone() * dy_dz[s][i].clone() * f2[m][s].clone());
                    }
                }
                Expr::sum(terms)
            })
        });
        Self::new(gamma, f, z, self.params.merged(&inner.params))
    }

    /// Image of a tetrad field, as a field on the target chart y.
    pub fn transform_field(&self, field: &TetradField) -> TetradField {
        let xs = self.chi.inverse_exprs();
        let e = subst_grid(&field.exprs(), &xs);
        let g = subst_grid(&self.gamma_exprs(), &xs);
        let f = subst_grid(&self.f_exprs(), &xs);
        let dx_dy: [[Expr; 4]; 4] =
            std::array::from_fn(|r| std::array::from_fn(|i| self.chi.inverse[r].derivative(&[i]).clone()));
        let out = std::array::from_fn(|n| {
            std::array::from_fn(|i| {
                let mut terms = vec![f[n][i].clone()];
                for m in 0..4 {
                    for r in 0..4 {
                        if g[n][m].is_zero() || dx_dy[r][i].is_zero() || e[m][r].is_zero() {
                            continue;
                        }
                        terms.push(g[n][m].clone() * dx_dy[r][i].clone() * e[m][r].clone());
                    }
                }
                Expr::sum(terms)
            })
        });
        TetradField::new(out, field.params.merged(&self.params), Domain::unbounded())
    }
}

/// J-prolongation of a morphism acting on a point (x, e, E) of J(E).
pub fn prolong_morphism(phi: &BundleMorphism, x: &Point4, e: &M4, jet: &T3) -> Result<(Point4, M4, T3)> {
    let y = phi.chi.to_bar(x)?;
    let cv = phi.chi.at_bar(&y)?;
    let j = &cv.jacinv; // dx^r/dy^i
    let g = eval_grid(&phi.gamma, x, &phi.params, 1)?;
    let f = eval_grid(&phi.f, x, &phi.params, 1)?;
    let mut ehat = [[0.0; 4]; 4];
    let mut jhat = [[[0.0; 4]; 4]; 4];
    for n in 0..4 {
        for i in 0..4 {
            let mut s = f[n][i].value();
            for m in 0..4 {
                for r in 0..4 {
                    s += g[n][m].value() * j[r][i] * e[m][r];
                }
            }
            ehat[n][i] = s;
        }
    }
    for n in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for m in 0..4 {
                    for k in 0..4 {
                        for q in 0..4 {
                            s += g[n][m].value() * jet[m][k][q] * j[k][a] * j[q][b];
                        }
                    }
                }
                let mut br = 0.0;
                for k in 0..4 {
                    for m in 0..4 {
                        for r in 0..4 {
                            br += g[n][m].get(&[k]) * (j[k][b] * j[r][a] - j[k][a] * j[r][b]) * e[m][r];
                        }
                    }
                    br += f[n][a].get(&[k]) * j[k][b] - f[n][b].get(&[k]) * j[k][a];
                }
                jhat[n][a][b] = s + 0.5 * br;
            }
        }
    }
    Ok((y, ehat, jhat))
}

// ---------------------------------------------------------------------------
// Vector fields

/// X = eps^i d_i + (-d_q eps^k e^mu_k + D^mu_nu e^nu_q + G^mu_q) d/de^mu_q.
#[derive(Clone, Debug)]
pub struct JVectorField {
    eps: Arc<[DiffExpr; 4]>,
    d: Arc<[[DiffExpr; 4]; 4]>,
    g: Arc<[[DiffExpr; 4]; 4]>,
    pub params: ParamEnv,
}

/// Coefficients of a vector field and their first derivatives, as scalars.
#[derive(Clone, Copy, Debug)]
pub struct VectorJet<S> {
    pub eps: [S; 4],
    /// `deps[k][q]` = d_q eps^k.
    pub deps: M4<S>,
    pub d: M4<S>,
    /// `dd[mu][nu][j]` = d_j D^mu_nu.
    pub dd: T3<S>,
    pub g: M4<S>,
    /// `dg[mu][q][j]` = d_j G^mu_q.
    pub dg: T3<S>,
}

/// Components of J(X) at a point of J(E).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProlongedVector {
    pub eps: [f64; 4],
    /// Coefficient of d/de^mu_q, stored `[mu][q]`.
    pub base: M4,
    /// h^mu_ij, stored antisymmetric.
    pub h: T3,
}

impl JVectorField {
    pub fn new(eps: [Expr; 4], d: [[Expr; 4]; 4], g: [[Expr; 4]; 4], params: ParamEnv) -> Self {
        Self {
            eps: Arc::new(eps.map(DiffExpr::new)),
            d: diff_grid(d),
            g: diff_grid(g),
            params,
        }
    }

    pub fn zero() -> Self {
        Self::new(std::array::from_fn(|_| Expr::zero()), zero_grid(), zero_grid(), ParamEnv::new())
    }

    /// Translation along coordinate k.
    pub fn translation(k: usize) -> Self {
        let eps = std::array::from_fn(|i| if i == k { Expr::one() } else { Expr::zero() });
        Self::new(eps, zero_grid(), zero_grid(), ParamEnv::new())
    }

    pub fn eps_exprs(&self) -> [Expr; 4] {
        std::array::from_fn(|i| self.eps[i].expr().clone())
    }

    pub fn d_exprs(&self) -> [[Expr; 4]; 4] {
        grid_exprs(&self.d)
    }

    pub fn g_exprs(&self) -> [[Expr; 4]; 4] {
        grid_exprs(&self.g)
    }

    /// a*self + b*other.
    pub fn combine(&self, a: f64, other: &JVectorField, b: f64) -> Self {
        let mix = |x: &Expr, y: &Expr| Expr::scale(a, x.clone()) + Expr::scale(b, y.clone());
        let (e1, e2) = (self.eps_exprs(), other.eps_exprs());
        let (d1, d2) = (self.d_exprs(), other.d_exprs());
        let (g1, g2) = (self.g_exprs(), other.g_exprs());
        Self::new(
            std::array::from_fn(|i| mix(&e1[i], &e2[i])),
            std::array::from_fn(|m| std::array::from_fn(|n| mix(&d1[m][n], &d2[m][n]))),
            std::array::from_fn(|m| std::array::from_fn(|n| mix(&g1[m][n], &g2[m][n]))),
            self.params.merged(&other.params),
        )
    }

    /// Coefficients seeded as scalars carrying `S::ORDER` derivative levels.
    pub fn jet<S: Scalar>(&self, x: &Point4) -> Result<VectorJet<S>> {
        let order = S::ORDER + 1;
        let p = &self.params;
        let eps_d: Vec<PointDerivs> =
            self.eps.iter().map(|c| c.eval_derivs(x, p, order)).collect::<std::result::Result<_, _>>()?;
        let d_d = eval_grid(&self.d, x, p, order)?;
        let g_d = eval_grid(&self.g, x, p, order)?;
        let seed = |pd: &PointDerivs, pre: Option<usize>| -> S {
            S::from_derivs(&|m: &[usize]| match pre {
                None => pd.get(m),
                Some(j) => {
                    let mut multi = Vec::with_capacity(m.len() + 1);
                    multi.push(j);
                    multi.extend_from_slice(m);
                    pd.get(&multi)
                }
            })
        };
        Ok(VectorJet {
            eps: std::array::from_fn(|k| seed(&eps_d[k], None)),
            deps: std::array::from_fn(|k| std::array::from_fn(|q| seed(&eps_d[k], Some(q)))),
            d: std::array::from_fn(|m| std::array::from_fn(|n| seed(&d_d[m][n], None))),
            dd: std::array::from_fn(|m| {
                std::array::from_fn(|n| std::array::from_fn(|j| seed(&d_d[m][n], Some(j))))
            }),
            g: std::array::from_fn(|m| std::array::from_fn(|q| seed(&g_d[m][q], None))),
            dg: std::array::from_fn(|m| {
                std::array::from_fn(|q| std::array::from_fn(|j| seed(&g_d[m][q], Some(j))))
            }),
        })
    }
}

/// Base coefficient and h^mu_ij of J(X) for frame `e` and jet coordinate `jet`.
pub fn prolong_kernel<S: Scalar>(v: &VectorJet<S>, e: &M4<S>, jet: &T3<S>) -> (M4<S>, T3<S>) {
    let base = std::array::from_fn(|mu| {
        std::array::from_fn(|q| {
            let mut s = v.g[mu][q];
            for k in 0..4 {
                s += v.d[mu][k] * e[k][q] - v.deps[k][q] * e[mu][k];
            }
            s
        })
    });
    let h = std::array::from_fn(|mu| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut s = v.dg[mu][i][j] - v.dg[mu][j][i];
                for nu in 0..4 {
                    s += v.dd[mu][nu][j] * e[nu][i] - v.dd[mu][nu][i] * e[nu][j];
                }
                let mut s = s.scale(0.5);
                for nu in 0..4 {
                    s += v.d[mu][nu] * jet[nu][i][j];
                }
                for k in 0..4 {
                    s += jet[mu][k][i] * v.deps[k][j] - jet[mu][k][j] * v.deps[k][i];
                }
                s
            })
        })
    });
    (base, h)
}

pub fn prolong_vector(x_field: &JVectorField, x: &Point4, e: &M4, jet: &AntisymJet) -> Result<ProlongedVector> {
    let v = x_field.jet::<f64>(x)?;
    let (base, h) = prolong_kernel(&v, e, &jet.comps);
    Ok(ProlongedVector { eps: v.eps, base, h })
}

/// Tetrad displaced by one explicit Euler step of the flow of X:
/// e + xi (Ze - eps^k d_k e), as a symbolic field.
pub fn euler_flow_tetrad(field: &TetradField, x_field: &JVectorField, xi: f64) -> TetradField {
    let e = field.exprs();
    let eps = x_field.eps_exprs();
    let d = x_field.d_exprs();
    let g = x_field.g_exprs();
    let out = std::array::from_fn(|mu| {
        std::array::from_fn(|q| {
            let mut terms = vec![g[mu][q].clone()];
            for k in 0..4 {
                let deps = x_field.eps[k].derivative(&[q]);
                if !deps.is_zero() && !e[mu][k].is_zero() {
                    terms.push(-(deps.clone() * e[mu][k].clone()));
                }
                if !d[mu][k].is_zero() && !e[k][q].is_zero() {
                    terms.push(d[mu][k].clone() * e[k][q].clone());
                }
                if !eps[k].is_zero() {
                    let de = field.component(mu, q).derivative(&[k]);
                    if !de.is_zero() {
                        terms.push(-(eps[k].clone() * de.clone()));
                    }
                }
            }
            let delta = Expr::sum(terms);
            if delta.is_zero() {
                e[mu][q].clone()
            } else {
                e[mu][q].clone() + Expr::scale(xi, delta)
            }
        })
    });
    TetradField::new(out, field.params.merged(&x_field.params), field.domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::{parse_with, ParseContext};
    use crate::geometry::{antisym_jet, induced_spin_field, metric_from_tetrad, spin_from_tetrad, tetrad_at};
    use crate::tensor::{max_diff3, max_diff_m};

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
            Domain::unbounded(),
        )
    }

    fn x_expr(s: &str) -> Expr {
        crate::exprdsl::parse(s).unwrap()
    }

    fn wavy_lorentz() -> LorentzField {
        let b = LorentzField::boost(1, x_expr("0.1*x0 + 0.05*x1"), ParamEnv::new());
        let r = LorentzField::rotation(2, 3, x_expr("0.2*x2 - 0.1*x1"), ParamEnv::new());
        b.compose(&r)
    }

    fn mild_change() -> CoordChange {
        // xbar = (x0 + 0.1 x1^2, 1.2 x1, x2 + 0.05 x1, x3 - 0.1 x0)
        CoordChange::new(
            [x_expr("x0 + 0.1*x1^2"), x_expr("1.2*x1"), x_expr("x2 + 0.05*x1"), x_expr("x3 - 0.1*x0")],
            [
                x_expr("x0 - 0.1*(x1/1.2)^2"),
                x_expr("x1/1.2"),
                x_expr("x2 - 0.05*x1/1.2"),
                x_expr("x3 + 0.1*(x0 - 0.1*(x1/1.2)^2)"),
            ],
            ParamEnv::new(),
        )
    }

    #[test]
    fn gauge_action_laws() {
        let id = tensor::identity::<f64>();
        let x: M4 = std::array::from_fn(|i| std::array::from_fn(|j| (i * 4 + j) as f64 * 0.1 + if i == j { 1.0 } else { 0.0 }));
        assert_eq!(gauge_action(&id, &id, &x).unwrap(), x);
        let l = wavy_lorentz().at(&[0.3, 0.2, 0.1, 0.0]).unwrap().l;
        assert!(max_diff_m(&gauge_action(&l, &id, &id).unwrap(), &l) < 1e-15);
        let l2 = wavy_lorentz().at(&[-0.3, 1.2, 0.5, 0.0]).unwrap().l;
        let j1 = mild_change().jac(&[0.1, 0.4, 0.2, 0.3]).unwrap();
        let j2 = mild_change().jac(&[0.5, -0.4, 0.2, 0.3]).unwrap();
        let lhs = gauge_action(&tensor::matmul(&l, &l2), &tensor::matmul(&j1, &j2), &x).unwrap();
        let rhs = gauge_action(&l, &j1, &gauge_action(&l2, &j2, &x).unwrap()).unwrap();
        assert!(max_diff_m(&lhs, &rhs) < 1e-12);
        assert_eq!(gauge_action(&id, &[[0.0; 4]; 4], &x), Err(Error::SingularMatrix));
    }

    #[test]
    fn lorentz_constructors_are_valid() {
        let l = wavy_lorentz();
        for k in 0..20 {
            let x = [0.1 * k as f64, -0.2 * k as f64, 0.3, 0.05 * k as f64];
            let v = l.at(&x).unwrap();
            assert!(v.deviation() < 1e-12);
            let inv = tensor::invert(&v.l).unwrap();
            assert!(max_diff_m(&v.lower_inverse(), &tensor::transpose(&inv)) < 1e-12);
        }
        let bad = LorentzField::new(
            std::array::from_fn(|a| std::array::from_fn(|b| if a == b { Expr::constant(1.1) } else { Expr::zero() })),
            ParamEnv::new(),
        );
        assert!(matches!(bad.at(&[0.0; 4]), Err(Error::InvalidLorentz { .. })));
    }

    #[test]
    fn coord_change_verification() {
        let c = mild_change();
        for xb in [[0.1, 3.0, 1.0, 0.2], [-1.0, 5.0, 2.0, 0.7]] {
            assert!(c.verify(&xb).unwrap() < 1e-12);
        }
        let wrong = CoordChange::new(
            std::array::from_fn(Expr::coord),
            [x_expr("2*x0"), x_expr("x1"), x_expr("x2"), x_expr("x3")],
            ParamEnv::new(),
        );
        assert!(matches!(wrong.at_bar(&[1.0, 0.0, 0.0, 0.0]), Err(Error::InvalidCoordChange { .. })));
    }

    #[test]
    fn identity_transform_is_identity() {
        let f = schwarzschild();
        let t = transform_tetrad(&f, &LorentzField::identity(), &CoordChange::identity());
        let x = [0.0, 4.0, 1.0, 0.5];
        let a = tetrad_at(&f, &x).unwrap();
        let b = tetrad_at(&t, &x).unwrap();
        assert_eq!(a.e, b.e);
        assert!(max_diff3(&a.de, &b.de) < 1e-15);
    }

    #[test]
    fn boost_of_minkowski_keeps_eta() {
        let l = LorentzField::boost(2, Expr::constant(0.7), ParamEnv::new());
        let t = transform_tetrad(&TetradField::identity(), &l, &CoordChange::identity());
        let v = tetrad_at(&t, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(max_diff_m(&v.e, &l.at(&[0.0; 4]).unwrap().l) < 1e-15);
        let m = metric_from_tetrad(&v);
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { ETA[i] } else { 0.0 };
                assert!((m.g[i][j] - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_rescaling_of_metric() {
        let f = schwarzschild();
        let c = CoordChange::scaling(1, 2.0);
        let t = transform_tetrad(&f, &LorentzField::identity(), &c);
        let r = 4.0;
        let gb = metric_from_tetrad(&tetrad_at(&t, &[0.0, 2.0 * r, 1.0, 0.0]).unwrap());
        let g = metric_from_tetrad(&tetrad_at(&f, &[0.0, r, 1.0, 0.0]).unwrap());
        assert!((gb.g[1][1] - 0.25 * g.g[1][1]).abs() < 1e-12);
        assert!((gb.g[2][2] - g.g[2][2]).abs() < 1e-12);
    }

    #[test]
    fn jet_transform_commutes_with_field_transform() {
        let f = schwarzschild();
        let l = wavy_lorentz();
        let c = mild_change();
        let xb = [0.2, 4.5, 1.1, 0.3];
        let cv = c.at_bar(&xb).unwrap();
        let v = tetrad_at(&f, &cv.x).unwrap();
        let lv = l.at(&cv.x).unwrap();
        let (ebar, jet) = transform_jet(&v, &lv, &cv);
        let direct = tetrad_at(&transform_tetrad(&f, &l, &c), &xb).unwrap();
        assert!(max_diff_m(&ebar, &direct.e) < 1e-12);
        assert!(max_diff3(&jet, &direct.de) < 1e-10);
        // quotient compatibility
        let ebar_jet = transform_e(&antisym_jet(&v), &v, &lv, &cv);
        let anti = crate::geometry::antisym(&jet);
        assert!(max_diff3(&ebar_jet.comps, &anti) < 1e-12);
        // linear change, constant Lambda: no second-derivative contribution
        let lin = CoordChange::affine(&[[1.0, 0.2, 0.0, 0.0], [0.0, 1.5, 0.0, 0.0], [0.0, 0.0, 1.0, 0.1], [0.0, 0.0, 0.0, 1.0]], &[0.1, 0.0, 0.0, 0.0]).unwrap();
        let lv0 = LorentzValue::constant(LorentzField::rotation(1, 2, Expr::constant(0.4), ParamEnv::new()).at(&[0.0; 4]).unwrap().l);
        let cv0 = lin.at_bar(&xb).unwrap();
        assert_eq!(tensor::max_abs3(&cv0.second), 0.0);
        let v0 = tetrad_at(&f, &cv0.x).unwrap();
        let (_, jet0) = transform_jet(&v0, &lv0, &cv0);
        let mut expected = [[[0.0; 4]; 4]; 4];
        for mu in 0..4 {
            for a in 0..4 {
                for k in 0..4 {
                    for s in 0..4 {
                        for i in 0..4 {
                            for h in 0..4 {
                                expected[mu][a][k] += lv0.l[mu][s] * v0.de[s][i][h] * cv0.jacinv[h][k] * cv0.jacinv[i][a];
                            }
                        }
                    }
                }
            }
        }
        assert!(max_diff3(&jet0, &expected) < 1e-13);
    }

    #[test]
    fn spin_naturality() {
        let f = schwarzschild();
        let l = wavy_lorentz();
        let c = mild_change();
        let t = transform_tetrad(&f, &l, &c);
        for xb in [[0.2, 4.5, 1.1, 0.3], [-0.4, 6.0, 2.0, 1.0]] {
            let cv = c.at_bar(&xb).unwrap();
            let v = tetrad_at(&f, &cv.x).unwrap();
            let w = spin_from_tetrad(&v, &metric_from_tetrad(&v));
            let wb = transform_spin(&w, &l.at(&cv.x).unwrap(), &cv);
            let vb = tetrad_at(&t, &xb).unwrap();
            let direct = spin_from_tetrad(&vb, &metric_from_tetrad(&vb));
            assert!(max_diff3(&wb.omega, &direct.omega) < 1e-10, "{}", max_diff3(&wb.omega, &direct.omega));
            assert!(wb.antisymmetry_defect() < 1e-12);
        }
        // omega = 0, constant Lambda gives 0
        let zero = SpinConnectionValue { omega: [[[0.0; 4]; 4]; 4], domega: None };
        let lv = LorentzValue::constant(LorentzField::boost(1, Expr::constant(0.3), ParamEnv::new()).at(&[0.0; 4]).unwrap().l);
        let out = transform_spin(&zero, &lv, &CoordValue::identity([0.0; 4]));
        assert_eq!(tensor::max_abs3(&out.omega), 0.0);
        let _ = induced_spin_field(&f, &[0.0, 4.0, 1.0, 0.0]).unwrap();
    }

    #[test]
    fn contact_equivariance() {
        let l = wavy_lorentz();
        let c = mild_change();
        let x = [0.1, 4.0, 1.2, 0.3];
        let xb = c.to_bar(&x).unwrap();
        let cv = c.at_bar(&xb).unwrap();
        let f = schwarzschild();
        let v = tetrad_at(&f, &x).unwrap();
        // a jet coordinate that is not the holonomic one
        let mut jet = antisym_jet(&v).comps;
        jet[2][0][3] += 0.3;
        jet[2][3][0] -= 0.3;
        jet[0][1][2] += 0.1;
        jet[0][2][1] -= 0.1;
        let cval = contact_from_parts(&v.de, &jet);
        assert!(cval.max_abs() > 0.1);
        let lv = l.at(&x).unwrap();
        let (_, jetbar_full) = transform_jet(&v, &lv, &cv);
        let ebar = transform_e(&AntisymJet { comps: jet }, &v, &lv, &cv);
        let cbar = contact_from_parts(&jetbar_full, &ebar.comps);
        let expected = transform_contact(&cval, &lv.l, &cv.jacinv);
        assert!(max_diff3(&cbar.c, &expected.c) < 1e-10);
    }

    #[test]
    fn morphism_identity_and_translation() {
        let x = [0.1, 4.0, 1.2, 0.3];
        let v = tetrad_at(&schwarzschild(), &x).unwrap();
        let jet = antisym_jet(&v).comps;
        let (y, e, j) = prolong_morphism(&BundleMorphism::identity(), &x, &v.e, &jet).unwrap();
        assert_eq!(y, x);
        assert!(max_diff_m(&e, &v.e) < 1e-15);
        assert!(max_diff3(&j, &jet) < 1e-15);
        let mut f = zero_grid();
        f[1][2] = Expr::constant(0.7);
        let shift = BundleMorphism::new(identity_grid(), f, CoordChange::identity(), ParamEnv::new());
        let (_, e2, j2) = prolong_morphism(&shift, &x, &v.e, &jet).unwrap();
        assert_eq!(e2[1][2], v.e[1][2] + 0.7);
        assert!(max_diff3(&j2, &jet) < 1e-15);
    }

    fn wavy_morphism(k: f64) -> BundleMorphism {
        let l = wavy_lorentz().exprs();
        let gamma = std::array::from_fn(|a| std::array::from_fn(|b| Expr::scale(1.0 + 0.1 * k * (a == b) as u8 as f64, l[a][b].clone())));
        let mut f = zero_grid();
        f[0][1] = x_expr("0.1*sin(x1)");
        f[2][3] = Expr::scale(k, x_expr("0.05*x0*x2"));
        BundleMorphism::new(gamma, f, mild_change(), ParamEnv::new())
    }

    #[test]
    fn morphism_preserves_holonomy_and_composes() {
        let phi = wavy_morphism(1.0);
        let f = schwarzschild();
        let x = [0.1, 4.0, 1.2, 0.3];
        let v = tetrad_at(&f, &x).unwrap();
        let (y, e, j) = prolong_morphism(&phi, &x, &v.e, &antisym_jet(&v).comps).unwrap();
        let image = tetrad_at(&phi.transform_field(&f), &y).unwrap();
        assert!(max_diff_m(&e, &image.e) < 1e-12);
        assert!(max_diff3(&j, &antisym_jet(&image).comps) < 1e-10);

        let psi = wavy_morphism(2.0);
        let both = psi.compose(&phi);
        let (_, e1, j1) = prolong_morphism(&phi, &x, &v.e, &antisym_jet(&v).comps).unwrap();
        let (z, e12, j12) = prolong_morphism(&psi, &y, &e1, &j1).unwrap();
        let (z2, ec, jc) = prolong_morphism(&both, &x, &v.e, &antisym_jet(&v).comps).unwrap();
        assert!(z.iter().zip(&z2).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(max_diff_m(&e12, &ec) < 1e-10);
        assert!(max_diff3(&j12, &jc) < 1e-10);
    }

    #[test]
    fn prolonged_vector_cases() {
        let x = [0.1, 4.0, 1.2, 0.3];
        let v = tetrad_at(&schwarzschild(), &x).unwrap();
        let zero_jet = AntisymJet { comps: [[[0.0; 4]; 4]; 4] };
        let p = prolong_vector(&JVectorField::translation(0), &x, &v.e, &zero_jet).unwrap();
        assert_eq!(tensor::max_abs3(&p.h), 0.0);
        assert_eq!(p.eps, [1.0, 0.0, 0.0, 0.0]);

        let mut d = zero_grid();
        d[0][1] = Expr::constant(0.4);
        d[1][0] = Expr::constant(0.4);
        let xd = JVectorField::new(std::array::from_fn(|_| Expr::zero()), d, zero_grid(), ParamEnv::new());
        let jet = antisym_jet(&v);
        let p = prolong_vector(&xd, &x, &v.e, &jet).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((p.h[0][i][j] - 0.4 * jet.comps[1][i][j]).abs() < 1e-15);
                assert!((p.h[1][i][j] - 0.4 * jet.comps[0][i][j]).abs() < 1e-15);
                assert!((p.h[0][i][j] + p.h[0][j][i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn euler_flow_matches_prolongation() {
        let f = schwarzschild();
        let mut d = zero_grid();
        d[0][1] = x_expr("0.3*x2");
        d[1][0] = x_expr("0.3*x2");
        let mut g = zero_grid();
        g[2][1] = x_expr("0.2*cos(x0)");
        let xv = JVectorField::new(
            [x_expr("1 + 0.1*x1"), x_expr("0.05*x0"), x_expr("0"), x_expr("0.2*x2")],
            d,
            g,
            ParamEnv::new(),
        );
        let x = [0.1, 4.0, 1.2, 0.3];
        let v = tetrad_at(&f, &x).unwrap();
        let jet = antisym_jet(&v);
        let p = prolong_vector(&xv, &x, &v.e, &jet).unwrap();
        // d_k E along the section
        let dd = f.derivs_at(&x, 2).unwrap();
        let xi = 1e-3;
        let flowed = tetrad_at(&euler_flow_tetrad(&f, &xv, xi), &x).unwrap();
        let fj = antisym_jet(&flowed).comps;
        let mut worst = 0.0f64;
        for mu in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let mut adv = 0.0;
                    for k in 0..4 {
                        let dk_e = 0.5 * (dd[mu][i].get(&[j, k]) - dd[mu][j].get(&[i, k]));
                        adv += p.eps[k] * dk_e;
                    }
                    let predicted = jet.comps[mu][i][j] + xi * (p.h[mu][i][j] - adv);
                    worst = worst.max((fj[mu][i][j] - predicted).abs() / xi);
                }
            }
        }
        assert!(worst < 1e-6, "slope mismatch {worst}");
    }
}
