//! Seeded generators for the fuzzing corpus: smooth frames, Lorentz fields,
//! coordinate changes and expression trees. Every generator draws only from
//! the supplied RNG, so a (seed, trial) pair reproduces its sample exactly.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exprdsl::{Expr, Func, ParamEnv, Point4};
use crate::geometry::{Domain, TetradField};
use crate::tensor::{self, M4, PAIRS, T3};
use crate::transforms::{CoordChange, LorentzField};

pub type TrialRng = ChaCha8Rng;

/// Independent stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

/// Cube on which random fields are sampled.
pub const SAMPLE_HALF_WIDTH: f64 = 0.5;

pub fn random_point<R: Rng>(rng: &mut R, half_width: f64) -> Point4 {
    std::array::from_fn(|_| rng.gen_range(-half_width..half_width))
}

fn linear<R: Rng>(rng: &mut R, scale: f64) -> Expr {
    let mut terms: Vec<Expr> = (0..4).map(|k| Expr::scale(rng.gen_range(-scale..scale), Expr::coord(k))).collect();
    terms.push(Expr::constant(rng.gen_range(-1.0..1.0)));
    Expr::sum(terms)
}

fn smooth_bump<R: Rng>(rng: &mut R) -> Expr {
    let u = linear(rng, 1.2);
    match rng.gen_range(0..4) {
        0 => Expr::sin(u),
        1 => Expr::cos(u),
        2 => Expr::exp(Expr::scale(0.4, u)),
        _ => u.clone() * u,
    }
}

/// A frame close to the identity with smooth, fully populated components.
/// Its determinant stays within a factor of about two of one on the sample cube.
pub fn random_tetrad<R: Rng>(rng: &mut R) -> TetradField {
    let e = std::array::from_fn(|mu| {
        std::array::from_fn(|i| {
            let amp = if mu == i { 0.2 } else { 0.08 };
            let bump = Expr::scale(amp, smooth_bump(rng));
            if mu == i {
                Expr::one() + bump
            } else {
                bump
            }
        })
    });
    TetradField::new(e, ParamEnv::new(), Domain::unbounded())
}

/// Boost times rotation with rapidity and angle linear in x.
pub fn random_lorentz<R: Rng>(rng: &mut R) -> LorentzField {
    let axis = rng.gen_range(1..4);
    let boost = LorentzField::boost(axis, Expr::scale(0.5, linear(rng, 0.6)), ParamEnv::new());
    let (a, b) = [(1, 2), (1, 3), (2, 3)][rng.gen_range(0..3)];
    let rot = LorentzField::rotation(a, b, linear(rng, 0.8), ParamEnv::new());
    if rng.gen_bool(0.5) {
        boost.compose(&rot)
    } else {
        rot.compose(&boost)
    }
}

/// xbar = A y(x) + b with a near-identity A and a triangular nonlinear
/// y(x) whose inverse is exact:
/// y = (x0, x1 + c x0^2, x2 + d sin(x1), x3 + f x0 x2).
pub fn random_coord_change<R: Rng>(rng: &mut R) -> Result<CoordChange> {
    let mut a: M4 = tensor::identity();
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v += rng.gen_range(-0.25..0.25);
        }
    }
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
    let (c, d, f) = (rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
    let affine = CoordChange::affine(&a, &shift)?;
    let x = Expr::coord;
    let y = [
        x(0),
        x(1) + Expr::scale(c, Expr::pow(x(0), 2)),
        x(2) + Expr::scale(d, Expr::sin(x(1))),
        x(3) + Expr::scale(f, x(0) * x(2)),
    ];
    let x1 = x(1) - Expr::scale(c, Expr::pow(x(0), 2));
    let x2 = x(2) - Expr::scale(d, Expr::sin(x1.clone()));
    let yinv = [x(0), x1, x2.clone(), x(3) - Expr::scale(f, x(0) * x2)];
    let tri = CoordChange::new(y, yinv, ParamEnv::new());
    Ok(affine.compose(&tri))
}

/// Connection value with independent random entries in every antisymmetric pair.
pub fn random_antisym<R: Rng>(rng: &mut R, scale: f64) -> T3 {
    let mut w = [[[0.0; 4]; 4]; 4];
    for row in w.iter_mut() {
        for &(a, b) in PAIRS.iter() {
            let v = rng.gen_range(-scale..scale);
            row[a][b] = v;
            row[b][a] = -v;
        }
    }
    w
}

pub fn random_frame_value<R: Rng>(rng: &mut R) -> M4 {
    let mut e: M4 = tensor::identity();
    for row in e.iter_mut() {
        for v in row.iter_mut() {
            *v += rng.gen_range(-0.4..0.4);
        }
    }
    e
}

/// Adds a random symmetric part (with nonzero trace) to every omega_j.
pub fn symmetric_mutation<R: Rng>(rng: &mut R, w: &mut T3) {
    for row in w.iter_mut() {
        for a in 0..4 {
            for b in a..4 {
                let v = rng.gen_range(0.2..0.6);
                row[a][b] += v;
                if a != b {
                    row[b][a] += v;
                }
            }
        }
    }
}

/// Random expression tree that evaluates finitely on [-1, 1]^4: divisions,
/// logarithms and roots only see arguments bounded away from their
/// singularities. Built from raw nodes so printing and re-parsing reproduces
/// the tree exactly.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.6) {
            Expr::coord(rng.gen_range(0..4))
        } else {
            Expr::constant((rng.gen_range(0.0..3.0f64) * 100.0).round() / 100.0)
        };
    }
    let sub = |rng: &mut R| random_expr(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => Expr::raw_add(sub(rng), sub(rng)),
        1 => Expr::raw_sub(sub(rng), sub(rng)),
        2 | 3 => Expr::raw_mul(sub(rng), sub(rng)),
        4 => {
            // a / (1.5 + b^2)
            let b = sub(rng);
            Expr::raw_div(sub(rng), Expr::raw_add(Expr::constant(1.5), Expr::raw_pow(b, 2)))
        }
        5 => Expr::raw_neg(sub(rng)),
        6 => Expr::raw_pow(sub(rng), rng.gen_range(2..4)),
        7 => Expr::raw_call(if rng.gen_bool(0.5) { Func::Sin } else { Func::Cos }, sub(rng)),
        8 => Expr::raw_call(Func::Exp, Expr::raw_call(Func::Sin, sub(rng))),
        9 => Expr::raw_call(
            Func::Sqrt,
            Expr::raw_add(Expr::constant(1.0), Expr::raw_pow(sub(rng), 2)),
        ),
        _ => Expr::raw_call(
            Func::Ln,
            Expr::raw_add(Expr::constant(2.0), Expr::raw_call(Func::Cos, sub(rng))),
        ),
    }
}
