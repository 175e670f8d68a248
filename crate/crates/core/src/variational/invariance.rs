//! Checkers for the invariance of the 4-form under gauge and coordinate
//! changes, and for the bracket identities used to simplify its differential.

use crate::error::Result;
use crate::exprdsl::Point4;
use crate::scalar::{Dual, Scalar};
use crate::tensor::{self, levi_civita, M4, PERMUTATIONS, T3};
use crate::transforms::{pull_lorentz, transform_spin_kernel, CoordChange, LorentzField};

use super::density::{field_strength, theta_density_with_scale};
use super::section::Section;

/// Relative tolerance for the density transformation law.
pub const DENSITY_LAW_TOL: f64 = 1e-8;
/// Relative tolerance for the bracket identities.
pub const BRACKET_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityLawOutcome {
    /// Density of the transformed section at xbar.
    pub lhs: f64,
    /// Density at x(xbar) times det(dx/dxbar).
    pub rhs: f64,
    pub scale: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// Compares the density of the transformed section with the density law of a
/// 4-form. With `drop_inhomogeneous` the d Lambda term of the connection law is
/// omitted.
pub fn density_law_check(
    gamma: &Section,
    l: &LorentzField,
    c: &CoordChange,
    xbar: &Point4,
    drop_inhomogeneous: bool,
) -> Result<DensityLawOutcome> {
    let cv = c.at_bar(xbar)?;
    let x = cv.x;
    let lv = l.at(&x)?;
    let j = gamma.jet::<f64>(&x)?;
    let (dens, scale_x) = theta_density_with_scale(&j.e, &field_strength(&j.omega, &j.domega));

    let lbar = pull_lorentz(l, c);
    let mut lam = [[<Dual<f64> as Scalar>::zero(); 4]; 4];
    let mut dlam = [[[<Dual<f64> as Scalar>::zero(); 4]; 4]; 4];
    for m in 0..4 {
        for h in 0..4 {
            let d = lbar.component(m, h).eval_derivs(xbar, &lbar.params, 2)?;
            lam[m][h] = Dual::new(d.value(), std::array::from_fn(|a| d.get(&[a])));
            for i in 0..4 {
                dlam[m][h][i] = Dual::new(d.get(&[i]), std::array::from_fn(|a| d.get(&[i, a])));
            }
        }
    }
    let jinv: M4<Dual<f64>> = std::array::from_fn(|i| {
        std::array::from_fn(|a| Dual::new(cv.jacinv[i][a], std::array::from_fn(|b| cv.second[i][a][b])))
    });
    let omega: T3<Dual<f64>> = std::array::from_fn(|i| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                Dual::new(
                    j.omega[i][a][b],
                    std::array::from_fn(|k| (0..4).map(|h| j.domega[i][a][b][h] * cv.jacinv[h][k]).sum()),
                )
            })
        })
    });
    let wbar = transform_spin_kernel(&omega, &lam, &dlam, &jinv, !drop_inhomogeneous);
    let wv: T3 = std::array::from_fn(|i| std::array::from_fn(|a| std::array::from_fn(|b| wbar[i][a][b].v)));
    let dwv = std::array::from_fn(|i| {
        std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|k| wbar[i][a][b].d[k])))
    });
    let ebar: M4 = std::array::from_fn(|mu| {
        std::array::from_fn(|a| {
            let mut s = 0.0;
            for sg in 0..4 {
                for i in 0..4 {
                    s += lv.l[mu][sg] * j.e[sg][i] * cv.jacinv[i][a];
                }
            }
            s
        })
    });
    let (lhs, scale_bar) = theta_density_with_scale(&ebar, &field_strength(&wv, &dwv));
    let det = cv.det_jacinv();
    let rhs = dens * det;
    let scale = scale_bar.max(scale_x * det.abs());
    let diff = (lhs - rhs).abs();
    let deviation = if scale > 0.0 { diff / scale } else { diff };
    Ok(DensityLawOutcome {
        lhs,
        rhs,
        scale,
        deviation,
        pass: deviation <= DENSITY_LAW_TOL,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketOutcome {
    /// Relative defect of the contracted identity with frames.
    pub dev_framed: f64,
    /// Relative defect of the frame-free identity.
    pub dev_frame_free: f64,
    /// Relative defect of both sides against the closed form.
    pub dev_closed: f64,
    pub pass: bool,
}

/// Bracket identities for a connection value `omega` (`[j][l][s]` =
/// omega_j^{ls}), symbols `domega` (`[i][l][s]`) and a frame `e`.
pub fn bracket_identity_check(e: &M4, omega: &T3, domega: &T3) -> BracketOutcome {
    let mixed = tensor::lower_second(omega); // omega_j^l_h
    // contracted form
    let (mut lb, mut rb, mut sl, mut sr) = (0.0, 0.0, 0.0, 0.0);
    for (a, s1) in PERMUTATIONS.iter() {
        let [q, p, i, j] = *a;
        for (b, s2) in PERMUTATIONS.iter() {
            let [m, n, l, s] = *b;
            let mut t = 0.0;
            for h in 0..4 {
                t += mixed[j][l][h] * domega[i][h][s];
            }
            let term = s1 * s2 * e[m][q] * e[n][p] * t;
            lb += term;
            sl += term.abs();
            // right-hand side: second symbol slot is rho, frame carries nu
            let rho = n;
            let mut u = 0.0;
            for nu in 0..4 {
                u += e[nu][p] * mixed[j][rho][nu];
            }
            let term = -s1 * s2 * e[m][q] * u * domega[i][l][s];
            rb += term;
            sr += term.abs();
        }
    }
    let dev_framed = (lb - rb).abs() / sl.max(sr).max(f64::MIN_POSITIVE);

    // frame-free form and closed form, for every (j, i, alpha, beta)
    let mut worst_free: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..4 {
        for i in 0..4 {
            for al in 0..4 {
                for be in 0..4 {
                    let (mut lhs, mut rhs) = (0.0, 0.0);
                    for (b, s2) in PERMUTATIONS.iter() {
                        let [m, n, l, s] = *b;
                        let up = levi_civita([m, n, al, be]);
                        if up != 0.0 {
                            let mut t = 0.0;
                            for h in 0..4 {
                                t += mixed[j][l][h] * domega[i][h][s];
                            }
                            lhs += up * s2 * t;
                            scale = scale.max((up * s2 * t).abs());
                        }
                        // eps^{m nu al be} eps_{m rho l s}: here n plays rho
                        for nu in 0..4 {
                            let up = levi_civita([m, nu, al, be]);
                            if up == 0.0 {
                                continue;
                            }
                            let t = -up * s2 * mixed[j][n][nu] * domega[i][l][s];
                            rhs += t;
                            scale = scale.max(t.abs());
                        }
                    }
                    let mut closed = 0.0;
                    for h in 0..4 {
                        closed += 2.0 * (mixed[j][al][h] * domega[i][h][be] - mixed[j][be][h] * domega[i][h][al]);
                    }
                    worst_free = worst_free.max((lhs - rhs).abs());
                    worst_closed = worst_closed.max((lhs - closed).abs()).max((rhs - closed).abs());
                }
            }
        }
    }
    let scale = scale.max(f64::MIN_POSITIVE);
    let dev_frame_free = worst_free / scale;
    let dev_closed = worst_closed / scale;
    BracketOutcome {
        dev_framed,
        dev_frame_free,
        dev_closed,
        pass: dev_framed <= BRACKET_TOL && dev_frame_free <= BRACKET_TOL && dev_closed <= BRACKET_TOL,
    }
}
