//! The pulled-back density, the action and its first variation, and the
//! field-equation residuals along a section.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprdsl::Point4;
use crate::geometry::SpinConnectionValue;
use crate::tensor::{self, M4, PERMUTATIONS};

use super::density::{
    contraction_from_residuals, curvature_pattern, field_strength, frame_derivative, residual_a_kernel,
    residual_b_kernel, residual_b_scale, theta_density_with_scale,
};
use super::quadrature::{integrate, integrate_face, Box4};
use super::section::{DeformationField, Section};

/// Coefficient of ds in gamma*(Theta), with the sum of absolute term values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaDensity {
    pub value: f64,
    pub scale: f64,
}

pub fn theta_pullback(gamma: &Section, x: &Point4) -> Result<ThetaDensity> {
    let j = gamma.jet::<f64>(x)?;
    let f = field_strength(&j.omega, &j.domega);
    let (value, scale) = theta_density_with_scale(&j.e, &f);
    Ok(ThetaDensity { value, scale })
}

pub fn residual_a(gamma: &Section, x: &Point4) -> Result<[[f64; 6]; 4]> {
    let j = gamma.jet::<f64>(x)?;
    Ok(residual_a_kernel(&j.e, &frame_derivative(&j.e, &j.de, &j.omega)))
}

pub fn residual_b(gamma: &Section, x: &Point4) -> Result<M4> {
    let j = gamma.jet::<f64>(x)?;
    Ok(residual_b_kernel(&j.e, &field_strength(&j.omega, &j.domega)))
}

/// Residual B together with the sum of absolute values of its terms.
pub fn residual_b_with_scale(gamma: &Section, x: &Point4) -> Result<(M4, f64)> {
    let j = gamma.jet::<f64>(x)?;
    let f = field_strength(&j.omega, &j.domega);
    Ok((residual_b_kernel(&j.e, &f), residual_b_scale(&j.e, &f)))
}

/// 1/4 eps eps e R for the connection of the section.
pub fn curvature_form(gamma: &Section, x: &Point4) -> Result<M4> {
    let j = gamma.jet::<f64>(x)?;
    let w = SpinConnectionValue {
        omega: j.omega,
        domega: Some(j.domega),
    };
    let r = crate::geometry::curvature(&w)?;
    Ok(curvature_pattern(&j.e, &r.r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Norms {
    pub max_abs: f64,
    pub rms: f64,
}

impl Norms {
    pub fn of<'a, I: IntoIterator<Item = &'a f64>>(values: I) -> Self {
        let mut max_abs = 0.0f64;
        let mut sq = 0.0;
        let mut n = 0usize;
        for v in values {
            max_abs = max_abs.max(v.abs());
            sq += v * v;
            n += 1;
        }
        Self {
            max_abs,
            rms: if n == 0 { 0.0 } else { (sq / n as f64).sqrt() },
        }
    }
}

/// Both residual sets over a grid.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub grid: Vec<Point4>,
    pub res_a: Vec<[[f64; 6]; 4]>,
    pub res_b: Vec<M4>,
    pub norm_a: Norms,
    pub norm_b: Norms,
}

pub fn residual_report(gamma: &Section, grid: &[Point4]) -> Result<ResidualReport> {
    let rows: Vec<([[f64; 6]; 4], M4)> = grid
        .par_iter()
        .map(|x| {
            let j = gamma.jet::<f64>(x)?;
            let a = residual_a_kernel(&j.e, &frame_derivative(&j.e, &j.de, &j.omega));
            let b = residual_b_kernel(&j.e, &field_strength(&j.omega, &j.domega));
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let (res_a, res_b): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let norm_a = Norms::of(res_a.iter().flatten().flatten());
    let norm_b = Norms::of(res_b.iter().flatten().flatten());
    Ok(ResidualReport {
        grid: grid.to_vec(),
        res_a,
        res_b,
        norm_a,
        norm_b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionValue {
    pub value: f64,
    /// |Q_{n+2} - Q_n|.
    pub error: f64,
    /// Integral of the absolute term sum; the natural size of `value`.
    pub scale: f64,
}

fn action_raw(gamma: &Section, b: &Box4, n: usize) -> Result<(f64, f64)> {
    let v = integrate(b, n, |x| Ok(theta_pullback(gamma, x)?.value))?;
    let s = integrate(b, n, |x| Ok(theta_pullback(gamma, x)?.scale))?;
    Ok((v, s))
}

pub fn action_value(gamma: &Section, b: &Box4, n: usize) -> Result<ActionValue> {
    let (value, scale) = action_raw(gamma, b, n)?;
    let finer = integrate(b, n + 2, |x| Ok(theta_pullback(gamma, x)?.value))?;
    Ok(ActionValue {
        value,
        error: (finer - value).abs(),
        scale,
    })
}

/// Coefficient of ds in gamma*(X _| dTheta).
pub fn dtheta_contraction(gamma: &Section, x_field: &DeformationField, x: &Point4) -> Result<f64> {
    let (xe, xw) = x_field.values(x, gamma.params())?;
    if tensor::max_abs_m(&xe) == 0.0 && xw.iter().flatten().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let j = gamma.jet::<f64>(x)?;
    let ra = residual_a_kernel(&j.e, &frame_derivative(&j.e, &j.de, &j.omega));
    let rb = residual_b_kernel(&j.e, &field_strength(&j.omega, &j.domega));
    Ok(contraction_from_residuals(&ra, &rb, &xe, &xw))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstVariation {
    pub value: f64,
    /// Integral of |resB.Xe| + |resA.Xw|; used to judge smallness.
    pub scale: f64,
}

/// Interior part of the first variation, the integral of the contraction.
pub fn first_variation(gamma: &Section, x_field: &DeformationField, b: &Box4, n: usize) -> Result<FirstVariation> {
    if !b.encloses(&x_field.support) {
        return Err(Error::UnsupportedDeformation);
    }
    let value = integrate(b, n, |x| dtheta_contraction(gamma, x_field, x))?;
    let scale = integrate(b, n, |x| {
        let (xe, xw) = x_field.values(x, gamma.params())?;
        let j = gamma.jet::<f64>(x)?;
        let ra = residual_a_kernel(&j.e, &frame_derivative(&j.e, &j.de, &j.omega));
        let f = field_strength(&j.omega, &j.domega);
        let rb_scale = residual_b_scale(&j.e, &f);
        let mut s = 0.0;
        for p in 0..4 {
            for nu in 0..4 {
                s += rb_scale * xe[nu][p].abs();
            }
        }
        for i in 0..4 {
            for k in 0..6 {
                s += ra[i][k].abs() * xw[i][k].abs();
            }
        }
        Ok(s)
    })?;
    Ok(FirstVariation { value, scale })
}

/// B^j = 1/4 eps^{qpij} eps_{mnls} e^m_q e^n_p X_i^{ls}; the boundary flux density.
pub fn boundary_current(gamma: &Section, x_field: &DeformationField, x: &Point4) -> Result<[f64; 4]> {
    let (_, xw) = x_field.values(x, gamma.params())?;
    let mut full = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        for (k, &(l, s)) in tensor::PAIRS.iter().enumerate() {
            full[i][l][s] = xw[i][k];
            full[i][s][l] = -xw[i][k];
        }
    }
    let e = gamma.jet::<f64>(x)?.e;
    let mut out = [0.0; 4];
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (bb, s2) in PERMUTATIONS.iter() {
            let [m, nn, l, s] = *bb;
            out[j] += 0.25 * s1 * s2 * e[m][q] * e[nn][p] * full[i][l][s];
        }
    }
    Ok(out)
}

/// Integral over the boundary of the box of gamma*(X _| Theta).
pub fn boundary_term(gamma: &Section, x_field: &DeformationField, b: &Box4, n: usize) -> Result<f64> {
    let mut total = 0.0;
    for m in 0..4 {
        let upper = integrate_face(b, m, b.hi[m], n, |x| Ok(boundary_current(gamma, x_field, x)?[m]))?;
        let lower = integrate_face(b, m, b.lo[m], n, |x| Ok(boundary_current(gamma, x_field, x)?[m]))?;
        total += upper - lower;
    }
    Ok(total)
}

/// Central difference of the action along gamma_xi.
pub fn action_derivative_fd(gamma: &Section, x_field: &DeformationField, b: &Box4, n: usize, h: f64) -> Result<f64> {
    let plus = action_raw(&gamma.deformed(x_field, h), b, n)?.0;
    let minus = action_raw(&gamma.deformed(x_field, -h), b, n)?.0;
    Ok((plus - minus) / (2.0 * h))
}
