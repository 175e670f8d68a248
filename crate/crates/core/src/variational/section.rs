//! Sections x -> (e^mu_i(x), omega_i^{mu nu}(x)) and vertical deformations.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprdsl::{DiffExpr, Expr, ParamEnv, Point4, PointDerivs};
use crate::geometry::{induced_spin, jet_from_spin_kernel, TetradField, SINGULAR_DET};
use crate::scalar::{Dual, Scalar};
use crate::tensor::{self, M4, PAIRS, T3, T4};
use crate::transforms::{prolong_kernel, JVectorField};

use super::quadrature::Box4;

/// Spin components over the six ordered pairs, `[i][pair]`.
pub type SpinExprs = [[Expr; 6]; 4];

type SpinGrid = Arc<[[DiffExpr; 6]; 4]>;

fn spin_grid(w: SpinExprs) -> SpinGrid {
    Arc::new(w.map(|row| row.map(DiffExpr::new)))
}

#[derive(Clone, Debug)]
pub enum SpinSource {
    /// scale * (connection induced by `from`); `from` is kept fixed when the
    /// section's frame is deformed.
    Induced { from: TetradField, scale: f64 },
    Explicit(SpinGrid),
    /// One Euler step of a prolonged vector field applied to `base`.
    Flowed {
        base: Arc<Section>,
        field: JVectorField,
        xi: f64,
    },
}

#[derive(Clone, Debug)]
pub struct Section {
    pub tetrad: TetradField,
    pub spin: SpinSource,
    extra: Option<SpinGrid>,
}

/// Frame, connection and their first derivatives at a point.
#[derive(Clone, Copy, Debug)]
pub struct SectionJet<S> {
    pub e: M4<S>,
    pub de: T3<S>,
    pub omega: T3<S>,
    pub domega: T4<S>,
}

fn seed<S: Scalar>(pd: &PointDerivs, pre: Option<usize>) -> S {
    S::from_derivs(&|m: &[usize]| match pre {
        None => pd.get(m),
        Some(j) => {
            let mut multi = Vec::with_capacity(m.len() + 1);
            multi.push(j);
            multi.extend_from_slice(m);
            pd.get(&multi)
        }
    })
}

fn explicit_seeds<S: Scalar>(grid: &[[DiffExpr; 6]; 4], x: &Point4, p: &ParamEnv) -> Result<(T3<S>, T4<S>)> {
    let mut omega = tensor::zeros3::<S>();
    let mut domega = tensor::zeros4::<S>();
    for i in 0..4 {
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            let pd = grid[i][k].eval_derivs(x, p, S::ORDER + 1)?;
            let v: S = seed(&pd, None);
            omega[i][a][b] = v;
            omega[i][b][a] = -v;
            for j in 0..4 {
                let d: S = seed(&pd, Some(j));
                domega[i][a][b][j] = d;
                domega[i][b][a][j] = -d;
            }
        }
    }
    Ok((omega, domega))
}

impl Section {
    /// The holonomic section with the connection induced by its own frame.
    pub fn induced(tetrad: TetradField) -> Self {
        Self::induced_scaled(tetrad, 1.0)
    }

    /// Frame with `scale` times its induced connection (non-critical for scale != 1).
    pub fn induced_scaled(tetrad: TetradField, scale: f64) -> Self {
        Self {
            spin: SpinSource::Induced {
                from: tetrad.clone(),
                scale,
            },
            tetrad,
            extra: None,
        }
    }

    pub fn explicit(tetrad: TetradField, spin: SpinExprs) -> Self {
        Self {
            tetrad,
            spin: SpinSource::Explicit(spin_grid(spin)),
            extra: None,
        }
    }

    /// Base section moved by one Euler step of J(X) with parameter `xi`:
    /// e + xi (Ze - eps^k d_k e), omega + xi (Z omega - eps^k d_k omega).
    pub fn flowed(base: &Section, field: &JVectorField, xi: f64) -> Self {
        Self {
            tetrad: crate::transforms::euler_flow_tetrad(&base.tetrad, field, xi),
            spin: SpinSource::Flowed {
                base: Arc::new(base.clone()),
                field: field.clone(),
                xi,
            },
            extra: None,
        }
    }

    pub fn is_induced(&self) -> bool {
        matches!(&self.spin, SpinSource::Induced { scale, .. } if *scale == 1.0) && self.extra.is_none()
    }

    pub fn params(&self) -> &ParamEnv {
        &self.tetrad.params
    }

    /// gamma_xi: e + xi X^mu_i, omega + xi X_i^{mu nu}.
    pub fn deformed(&self, x: &DeformationField, xi: f64) -> Section {
        let e = self.tetrad.exprs();
        let e = std::array::from_fn(|mu| {
            std::array::from_fn(|i| {
                if x.xe[mu][i].is_zero() {
                    e[mu][i].clone()
                } else {
                    e[mu][i].clone() + Expr::scale(xi, x.xe[mu][i].clone())
                }
            })
        });
        let tetrad = TetradField::new(e, self.tetrad.params.clone(), self.tetrad.domain);
        let old = self.extra.as_ref().map(|g| g.clone());
        let extra: SpinExprs = std::array::from_fn(|i| {
            std::array::from_fn(|k| {
                let base = old.as_ref().map_or(Expr::zero(), |g| g[i][k].expr().clone());
                if x.xw[i][k].is_zero() {
                    base
                } else {
                    base + Expr::scale(xi, x.xw[i][k].clone())
                }
            })
        });
        Section {
            tetrad,
            spin: self.spin.clone(),
            extra: Some(spin_grid(extra)),
        }
    }

    /// Frame, connection and first derivatives, each carrying `S::ORDER`
    /// further derivative levels.
    pub fn jet<S: Scalar>(&self, x: &Point4) -> Result<SectionJet<S>> {
        let (e, de) = self.tetrad.seeds::<S>(x)?;
        let ev: M4 = std::array::from_fn(|m| std::array::from_fn(|i| e[m][i].value()));
        let det = tensor::det4(&ev);
        if !det.is_finite() || det.abs() < SINGULAR_DET {
            return Err(Error::SingularTetrad { det, point: *x });
        }
        let (mut omega, mut domega) = match &self.spin {
            SpinSource::Induced { from, scale } => {
                let (fe, fde) = from.seeds::<Dual<S>>(x)?;
                let fv: M4 = std::array::from_fn(|m| std::array::from_fn(|i| fe[m][i].value()));
                let fdet = tensor::det4(&fv);
                let w = induced_spin(&fe, &fde).ok_or(Error::SingularTetrad { det: fdet, point: *x })?;
                let omega: T3<S> = std::array::from_fn(|i| {
                    std::array::from_fn(|a| std::array::from_fn(|b| w[i][a][b].v.scale(*scale)))
                });
                let domega: T4<S> = std::array::from_fn(|i| {
                    std::array::from_fn(|a| {
                        std::array::from_fn(|b| std::array::from_fn(|j| w[i][a][b].d[j].scale(*scale)))
                    })
                });
                (omega, domega)
            }
            SpinSource::Explicit(grid) => explicit_seeds::<S>(grid, x, &self.tetrad.params)?,
            SpinSource::Flowed { base, field, xi } => {
                if S::ORDER != 0 {
                    return Err(Error::Invalid(
                        "flowed sections support first derivatives of the connection only".into(),
                    ));
                }
                let (w, dw) = flowed_spin(base, field, *xi, x)?;
                (
                    w.map(|a| a.map(|b| b.map(S::constant))),
                    dw.map(|a| a.map(|b| b.map(|c| c.map(S::constant)))),
                )
            }
        };
        if let Some(extra) = &self.extra {
            let (w, dw) = explicit_seeds::<S>(extra, x, &self.tetrad.params)?;
            for i in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        omega[i][a][b] += w[i][a][b];
                        for j in 0..4 {
                            domega[i][a][b][j] += dw[i][a][b][j];
                        }
                    }
                }
            }
        }
        Ok(SectionJet { e, de, omega, domega })
    }
}

/// Z omega: the omega-component of J(X) at the section point, i.e. the
/// derivative of the map (e, E) -> omega along (Ze, h).
pub fn spin_generator<S: Scalar>(field_jet: &crate::transforms::VectorJet<S>, e: &M4<S>, omega: &T3<S>) -> (M4<S>, T3<S>) {
    let jet = jet_from_spin_kernel(e, omega);
    let (ze, h) = prolong_kernel(field_jet, e, &jet);
    let lift = |v: S, dv: S| Dual::new(v, [dv, S::zero(), S::zero(), S::zero()]);
    let e2: M4<Dual<S>> = std::array::from_fn(|m| std::array::from_fn(|i| lift(e[m][i], ze[m][i])));
    let jet2: T3<Dual<S>> = std::array::from_fn(|m| {
        std::array::from_fn(|i| std::array::from_fn(|j| lift(jet[m][i][j], h[m][i][j])))
    });
    let fr = crate::geometry::frame(&e2).expect("nonsingular frame");
    let w = crate::geometry::spin_kernel(&e2, &fr, &jet2);
    let zw = std::array::from_fn(|i| std::array::from_fn(|a| std::array::from_fn(|b| w[i][a][b].d[0])));
    (ze, zw)
}

fn flowed_spin(base: &Section, field: &JVectorField, xi: f64, x: &Point4) -> Result<(T3, T4)> {
    let b = base.jet::<Dual<f64>>(x)?;
    let vj = field.jet::<Dual<f64>>(x)?;
    let (_, zw) = spin_generator(&vj, &b.e, &b.omega);
    let mut out = tensor::zeros3::<Dual<f64>>();
    for i in 0..4 {
        for a in 0..4 {
            for c in 0..4 {
                let mut adv = Dual::<f64>::zero();
                for k in 0..4 {
                    adv += vj.eps[k] * b.domega[i][a][c][k];
                }
                out[i][a][c] = b.omega[i][a][c] + (zw[i][a][c] - adv).scale(xi);
            }
        }
    }
    Ok(crate::geometry::split_dual3(&out).into_parts())
}

/// A vertical field X^mu_i d/de^mu_i + 1/2 X_i^{mu nu} d/d omega_i^{mu nu}.
#[derive(Clone, Debug)]
pub struct DeformationField {
    /// `xe[mu][i]` = X^mu_i.
    pub xe: [[Expr; 4]; 4],
    /// `xw[i][pair]` = X_i^{mu nu} for mu < nu.
    pub xw: SpinExprs,
    pub support: Box4,
}

/// Polynomial bump prod_k (1 - u_k^2)^3 on a box, u_k mapping each side to [-1, 1].
/// Zero on and outside the boundary once clipped by the caller's support check.
pub fn bump(support: &Box4) -> Expr {
    let mut acc = Expr::one();
    for k in 0..4 {
        let (a, b) = (support.lo[k], support.hi[k]);
        let u = Expr::scale(2.0 / (b - a), Expr::coord(k)) - Expr::constant((a + b) / (b - a));
        let factor = Expr::pow(Expr::one() - Expr::pow(u, 2), 3);
        acc = acc * factor;
    }
    acc
}

impl DeformationField {
    pub fn zero(support: Box4) -> Self {
        Self {
            xe: std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())),
            xw: std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())),
            support,
        }
    }

    /// Components multiplied by the support bump.
    pub fn bumped(xe: [[Expr; 4]; 4], xw: SpinExprs, support: Box4) -> Self {
        let b = bump(&support);
        let wrap = |e: Expr| if e.is_zero() { e } else { e * b.clone() };
        Self {
            xe: xe.map(|row| row.map(wrap)),
            xw: xw.map(|row| row.map(wrap)),
            support,
        }
    }

    /// Components used as given; `support` is only a declaration.
    pub fn raw(xe: [[Expr; 4]; 4], xw: SpinExprs, support: Box4) -> Self {
        Self { xe, xw, support }
    }

    pub fn values(&self, x: &Point4, p: &ParamEnv) -> Result<(M4, [[f64; 6]; 4])> {
        let mut xe = [[0.0; 4]; 4];
        let mut xw = [[0.0; 6]; 4];
        if !self.support.contains_closed(x) {
            return Ok((xe, xw));
        }
        for m in 0..4 {
            for i in 0..4 {
                xe[m][i] = self.xe[m][i].eval(x, p)?;
            }
        }
        for i in 0..4 {
            for k in 0..6 {
                xw[i][k] = self.xw[i][k].eval(x, p)?;
            }
        }
        Ok((xe, xw))
    }
}

impl crate::geometry::SpinConnectionValue {
    pub(crate) fn into_parts(self) -> (T3, T4) {
        (self.omega, self.domega.expect("derivatives present"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::{parse_with, ParseContext};
    use crate::geometry::{induced_spin_field, Domain};

    fn schwarzschild() -> TetradField {
        let c = ParseContext::with_coords(["t", "r", "theta", "phi"]);
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

    #[test]
    fn induced_section_matches_geometry() {
        let f = schwarzschild();
        let s = Section::induced(f.clone());
        let x = [0.0, 4.0, 1.0, 0.3];
        let j = s.jet::<f64>(&x).unwrap();
        let w = induced_spin_field(&f, &x).unwrap();
        assert!(tensor::max_diff3(&j.omega, &w.omega) < 1e-15);
        assert!(tensor::max_abs4(&j.domega) > 0.0);
        assert!(s.is_induced());
    }

    #[test]
    fn explicit_section_is_antisymmetric() {
        let f = TetradField::identity();
        let spin: SpinExprs = std::array::from_fn(|i| {
            std::array::from_fn(|k| Expr::scale((i * 6 + k) as f64 * 0.01, Expr::coord(1)))
        });
        let s = Section::explicit(f, spin);
        let j = s.jet::<f64>(&[0.0, 2.0, 0.0, 0.0]).unwrap();
        // pair (0,2) is index 1: coefficient 0.07 at i = 1
        assert!((j.omega[1][0][2] - 0.07 * 2.0).abs() < 1e-15);
        for i in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    assert_eq!(j.omega[i][a][b], -j.omega[i][b][a]);
                    assert_eq!(j.domega[i][a][b][1], -j.domega[i][b][a][1]);
                }
            }
        }
    }

    #[test]
    fn bump_vanishes_on_boundary() {
        let b = Box4::new([0.0, 3.0, 1.0, 0.0], [1.0, 5.0, 2.0, 1.0]);
        let e = bump(&b);
        let p = ParamEnv::new();
        assert!((e.eval(&[0.5, 4.0, 1.5, 0.5], &p).unwrap() - 1.0).abs() < 1e-15);
        assert!(e.eval(&[0.0, 4.0, 1.5, 0.5], &p).unwrap().abs() < 1e-15);
        assert!(e.eval(&[0.5, 5.0, 1.5, 0.5], &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn deformation_moves_frame_but_not_induced_connection() {
        let f = schwarzschild();
        let s = Section::induced(f);
        let support = Box4::new([0.0, 3.0, 1.0, 0.0], [1.0, 5.0, 2.0, 1.0]);
        let mut xe: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
        xe[2][2] = Expr::one();
        let d = DeformationField::bumped(xe, std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())), support);
        let moved = s.deformed(&d, 0.1);
        let x = [0.5, 4.0, 1.5, 0.5];
        let a = s.jet::<f64>(&x).unwrap();
        let b = moved.jet::<f64>(&x).unwrap();
        assert!((b.e[2][2] - a.e[2][2] - 0.1).abs() < 1e-14);
        assert!(tensor::max_diff3(&a.omega, &b.omega) < 1e-15);
        assert!(!moved.is_induced());
    }
}
