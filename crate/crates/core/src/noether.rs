//! Conserved currents gamma*(Z _| Theta - alpha) for prolonged vector fields,
//! and the criticality defect of sections dragged along such fields.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprdsl::{DiffExpr, Expr, Point4};
use crate::scalar::{Dual, Scalar};
use crate::tensor::{self, PERMUTATIONS};
use crate::transforms::JVectorField;
use crate::variational::{residual_report, spin_generator, Section};

/// Residual-B rms below which a section counts as critical.
pub const CRITICAL_TOL: f64 = 1e-8;

/// A prolonged vector field Z = J(X) together with the density components of
/// an optional 3-form alpha (`alpha[m]` multiplies ds_m).
#[derive(Clone, Debug)]
pub struct NoetherField {
    pub field: JVectorField,
    alpha: Option<[DiffExpr; 4]>,
}

impl NoetherField {
    pub fn new(field: JVectorField) -> Self {
        Self { field, alpha: None }
    }

    pub fn with_alpha(field: JVectorField, alpha: [Expr; 4]) -> Self {
        Self {
            field,
            alpha: Some(alpha.map(DiffExpr::new)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurrentValue {
    /// Coefficients of the pulled-back 3-form in the basis ds_m.
    pub j: [f64; 4],
    /// d_m J^m.
    pub div: f64,
}

fn current_kernel<S: Scalar>(gamma: &Section, z: &NoetherField, x: &Point4) -> Result<[S; 4]> {
    let s = gamma.jet::<S>(x)?;
    let v = z.field.jet::<S>(x)?;
    let (_, zw) = spin_generator(&v, &s.e, &s.omega);
    let mixed = tensor::lower_second(&s.omega);
    // bracket[j][i][l][s]: the pieces that multiply delta^m_j, and the two
    // pieces proportional to eps^m
    let mut out = [S::zero(); 4];
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (b, s2) in PERMUTATIONS.iter() {
            let [mu, nu, l, sg] = *b;
            let pref = (s.e[mu][q] * s.e[nu][p]).scale(0.25 * s1 * s2);
            let mut along = zw[i][l][sg];
            for k in 0..4 {
                along -= v.eps[k] * s.domega[i][l][sg][k];
            }
            out[j] += pref * along;
            let mut ww = S::zero();
            for h in 0..4 {
                ww += mixed[j][l][h] * s.omega[i][h][sg];
            }
            let shared = pref * (s.domega[i][l][sg][j] + ww);
            for m in 0..4 {
                out[m] += shared * v.eps[m];
            }
        }
    }
    if let Some(alpha) = &z.alpha {
        for m in 0..4 {
            let pd = alpha[m].eval_derivs(x, &z.field.params, S::ORDER)?;
            out[m] -= S::from_derivs(&|multi: &[usize]| pd.get(multi));
        }
    }
    Ok(out)
}

/// Current and its divergence at `x`; derivatives are exact (symbolic field
/// derivatives propagated through dual numbers).
pub fn current(gamma: &Section, z: &NoetherField, x: &Point4) -> Result<CurrentValue> {
    let jd = current_kernel::<Dual<f64>>(gamma, z, x)?;
    Ok(CurrentValue {
        j: jd.map(|c| c.v),
        div: (0..4).map(|m| jd[m].d[m]).sum(),
    })
}

/// Residual-B rms over `grid` of gamma moved by one Euler step of J(X).
/// Fails with `NotCritical` unless gamma itself is critical on the grid.
pub fn symmetry_defect(gamma: &Section, x_field: &JVectorField, xi: f64, grid: &[Point4]) -> Result<f64> {
    let base = residual_report(gamma, grid)?;
    if base.norm_b.rms > CRITICAL_TOL {
        return Err(Error::NotCritical { rms: base.norm_b.rms });
    }
    if xi == 0.0 {
        return Ok(base.norm_b.rms);
    }
    let moved = Section::flowed(gamma, x_field, xi);
    Ok(residual_report(&moved, grid)?.norm_b.rms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::{parse_with, ParamEnv, ParseContext};
    use crate::geometry::{Domain, TetradField};

    fn ctx() -> ParseContext {
        ParseContext::with_coords(["t", "r", "theta", "phi"])
    }

    fn schwarzschild() -> Section {
        let c = ctx();
        Section::induced(TetradField::diagonal(
            [
                parse_with("sqrt(1 - 2*M/r)", &c).unwrap(),
                parse_with("1/sqrt(1 - 2*M/r)", &c).unwrap(),
                parse_with("r", &c).unwrap(),
                parse_with("r*sin(theta)", &c).unwrap(),
            ],
            ParamEnv::new().with("M", 1.0),
            Domain::unbounded(),
        ))
    }

    fn grid() -> Vec<Point4> {
        let mut g = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                g.push([0.3 * a as f64, 3.5 + 1.5 * b as f64, 0.8 + 0.3 * a as f64, 0.4 * b as f64]);
            }
        }
        g
    }

    #[test]
    fn zero_field_and_flat_space_give_zero_current() {
        let s = schwarzschild();
        let c = current(&s, &NoetherField::new(JVectorField::zero()), &[0.0, 4.0, 1.0, 0.5]).unwrap();
        assert_eq!(c.j, [0.0; 4]);
        assert_eq!(c.div, 0.0);
        let flat = Section::induced(TetradField::identity());
        let c = current(&flat, &NoetherField::new(JVectorField::translation(0)), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(c.j, [0.0; 4]);
    }

    /// A diffeomorphism generator combined with an r-dependent rotation of
    /// the frame in the (1,2) plane.
    fn general_symmetry() -> JVectorField {
        let c = ctx();
        let mut d: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
        d[1][2] = parse_with("r/7", &c).unwrap();
        d[2][1] = parse_with("-r/7", &c).unwrap();
        JVectorField::new(
            [
                parse_with("1 + r/10", &c).unwrap(),
                parse_with("sin(theta)/5", &c).unwrap(),
                parse_with("t*r/20", &c).unwrap(),
                parse_with("cos(t)", &c).unwrap(),
            ],
            d,
            std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())),
            ParamEnv::new(),
        )
    }

    #[test]
    fn currents_are_conserved_on_shell() {
        let s = schwarzschild();
        for (f, nontrivial) in [(JVectorField::translation(0), false), (general_symmetry(), true)] {
            let z = NoetherField::new(f);
            let mut jmax = 0.0f64;
            for x in grid() {
                let c = current(&s, &z, &x).unwrap();
                let m = c.j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                jmax = jmax.max(m);
                assert!(c.div.abs() <= 1e-7 * (1.0 + m), "{c:?}");
            }
            assert_eq!(jmax > 1e-3, nontrivial, "{jmax}");
        }
    }

    #[test]
    fn current_is_not_conserved_off_shell() {
        let c = ctx();
        let s = Section::induced_scaled(
            TetradField::diagonal(
                [
                    parse_with("sqrt(1 - 2*M/r)", &c).unwrap(),
                    parse_with("1/sqrt(1 - 2*M/r)", &c).unwrap(),
                    parse_with("r", &c).unwrap(),
                    parse_with("r*sin(theta)", &c).unwrap(),
                ],
                ParamEnv::new().with("M", 1.0),
                Domain::unbounded(),
            ),
            1.1,
        );
        let z = NoetherField::new(general_symmetry());
        let worst = grid().iter().map(|x| current(&s, &z, x).unwrap().div.abs()).fold(0.0, f64::max);
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn defect_is_second_order_for_symmetries_and_first_order_otherwise() {
        let s = schwarzschild();
        let g = grid();
        let sym = general_symmetry();
        let d2 = symmetry_defect(&s, &sym, 1e-2, &g).unwrap();
        let d3 = symmetry_defect(&s, &sym, 1e-3, &g).unwrap();
        let r = d2 / d3;
        assert!(r > 50.0 && r < 200.0, "{d2} {d3}");
        let c = ctx();
        let noise = JVectorField::new(
            std::array::from_fn(|_| Expr::zero()),
            std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())),
            std::array::from_fn(|m| {
                std::array::from_fn(|q| parse_with(&format!("{}*r/10", 0.3 + 0.1 * (m * 4 + q) as f64), &c).unwrap())
            }),
            ParamEnv::new(),
        );
        let d2 = symmetry_defect(&s, &noise, 1e-2, &g).unwrap();
        let d3 = symmetry_defect(&s, &noise, 1e-3, &g).unwrap();
        let r = d2 / d3;
        assert!(r > 5.0 && r < 20.0, "{d2} {d3}");
    }

    #[test]
    fn current_is_linear_in_the_field() {
        let s = schwarzschild();
        let c = ctx();
        let a = JVectorField::new(
            [parse_with("1 + r/10", &c).unwrap(), Expr::zero(), Expr::zero(), parse_with("sin(t)", &c).unwrap()],
            std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())),
            std::array::from_fn(|m| std::array::from_fn(|q| if m == q { Expr::constant(0.1) } else { Expr::zero() })),
            ParamEnv::new(),
        );
        let b = JVectorField::translation(3);
        let x = [0.2, 4.5, 1.1, 0.3];
        let ca = current(&s, &NoetherField::new(a.clone()), &x).unwrap();
        let cb = current(&s, &NoetherField::new(b.clone()), &x).unwrap();
        let cab = current(&s, &NoetherField::new(a.combine(2.0, &b, -0.5)), &x).unwrap();
        for m in 0..4 {
            let want = 2.0 * ca.j[m] - 0.5 * cb.j[m];
            assert!((cab.j[m] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn alpha_is_subtracted() {
        let s = schwarzschild();
        let c = ctx();
        let z = NoetherField::with_alpha(
            JVectorField::zero(),
            [parse_with("r", &c).unwrap(), Expr::zero(), Expr::zero(), Expr::zero()],
        );
        let out = current(&s, &z, &[0.0, 4.0, 1.0, 0.0]).unwrap();
        assert_eq!(out.j[0], -4.0);
        assert_eq!(out.div, 0.0);
    }

    #[test]
    fn defect_requires_critical_section() {
        let c = ctx();
        let s = Section::induced_scaled(
            TetradField::diagonal(
                [Expr::one(), Expr::one(), parse_with("r", &c).unwrap(), parse_with("r*sin(theta)", &c).unwrap()],
                ParamEnv::new(),
                Domain::unbounded(),
            ),
            1.1,
        );
        let err = symmetry_defect(&s, &JVectorField::translation(0), 1e-3, &grid()).unwrap_err();
        assert!(matches!(err, Error::NotCritical { .. }));
        let d0 = symmetry_defect(&schwarzschild(), &JVectorField::translation(0), 0.0, &grid()).unwrap();
        assert!(d0 <= 1e-8);
    }
}
