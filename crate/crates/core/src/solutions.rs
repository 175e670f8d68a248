//! Frames of a few well-known spacetimes, with charts and domains.

use crate::exprdsl::{parse_with, Expr, ParamEnv, ParseContext};
use crate::geometry::{Domain, TetradField};

fn diag(coords: [&str; 4], comps: [&str; 4], params: ParamEnv, domain: Domain) -> TetradField {
    let c = ParseContext::with_coords(coords);
    let d = comps.map(|s| parse_with(s, &c).expect("built-in expression"));
    TetradField::diagonal(d, params, domain)
}

/// Spherical coordinates (t, r, theta, phi).
pub const SPHERICAL: [&str; 4] = ["t", "r", "theta", "phi"];

pub fn minkowski() -> TetradField {
    TetradField::identity()
}

/// Exterior region 3M < r < 8M, away from the polar axis.
pub fn schwarzschild(mass: f64) -> TetradField {
    diag(
        SPHERICAL,
        ["sqrt(1 - 2*M/r)", "1/sqrt(1 - 2*M/r)", "r", "r*sin(theta)"],
        ParamEnv::new().with("M", mass),
        Domain::new([
            (f64::NEG_INFINITY, f64::INFINITY),
            (3.0 * mass, 8.0 * mass),
            (0.3, std::f64::consts::PI - 0.3),
            (f64::NEG_INFINITY, f64::INFINITY),
        ]),
    )
}

/// The family f = c0 + c1/r with -f dt^2 + dr^2/f + r^2 dOmega^2; `c0`
/// and `c1` are left as parameters.
pub fn schwarzschild_family(params: ParamEnv) -> TetradField {
    diag(
        SPHERICAL,
        ["sqrt(c0 + c1/r)", "1/sqrt(c0 + c1/r)", "r", "r*sin(theta)"],
        params,
        Domain::new([
            (f64::NEG_INFINITY, f64::INFINITY),
            (0.0, f64::INFINITY),
            (0.0, std::f64::consts::PI),
            (f64::NEG_INFINITY, f64::INFINITY),
        ]),
    )
}

/// Spatially flat dust universe, a(t) = t^(2/3), Cartesian space.
pub fn flrw_dust() -> TetradField {
    let a = "exp(2*ln(t)/3)";
    diag(
        ["t", "x", "y", "z"],
        ["1", a, a, a],
        ParamEnv::new(),
        Domain::new([(0.0, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)]),
    )
}

/// Uniformly accelerated frame of flat space, -(g x)^2 dt^2 + dx^2 + ...
pub fn rindler(accel: f64) -> TetradField {
    diag(
        ["t", "x", "y", "z"],
        ["g*x", "1", "1", "1"],
        ParamEnv::new().with("g", accel),
        Domain::new([(f64::NEG_INFINITY, f64::INFINITY), (0.0, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)]),
    )
}

/// Schwarzschild with a small anisotropic perturbation of the angular legs:
/// a non-vacuum frame that is close to a critical one.
pub fn perturbed_schwarzschild(eps: f64) -> TetradField {
    diag(
        SPHERICAL,
        ["sqrt(1 - 2*M/r)", "1/sqrt(1 - 2*M/r)", "r*(1 + k*cos(theta))", "r*sin(theta)"],
        ParamEnv::new().with("M", 1.0).with("k", eps),
        schwarzschild(1.0).domain,
    )
}

/// Coordinate expression in the spherical chart; panics on malformed input.
pub fn spherical_expr(text: &str) -> Expr {
    parse_with(text, &ParseContext::with_coords(SPHERICAL)).expect("valid expression")
}
