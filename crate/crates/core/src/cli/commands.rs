//! The four batch commands. Each returns a [`Report`]; printing and exit
//! codes are left to the caller.

use rayon::prelude::*;
use serde_json::json;

use crate::error::Error;
use crate::exprdsl::Point4;
use crate::geometry::{
    antisym_jet, christoffel, covariant_ext_diff, jet_from_spin, metric_from_tetrad, spin_from_christoffel,
    spin_from_tetrad, tetrad_at, TetradField,
};
use crate::noether::{current, NoetherField, CRITICAL_TOL};
use crate::random::{
    random_antisym, random_coord_change, random_frame_value, random_lorentz, random_point, random_tetrad,
    symmetric_mutation, trial_rng, SAMPLE_HALF_WIDTH,
};
use crate::solutions::schwarzschild;
use crate::tensor::{max_abs3, max_abs_m, max_diff3, max_diff_m};
use crate::transforms::{contact_pullback, CoordChange, JVectorField, LorentzField};
use crate::variational::{
    einstein_oracle, density_law_check, bracket_identity_check, residual_a, residual_b, residual_report, solve_ansatz,
    Section, SolveOptions, DENSITY_LAW_TOL, BRACKET_TOL,
};

use super::report::{CheckRecord, Report};
use super::spec::{Expectation, SpecFile};

pub const ROUTE_TOL: f64 = 1e-9;
pub const CONTACT_TOL: f64 = 1e-12;
pub const VACUUM_TOL: f64 = 1e-8;
pub const EINSTEIN_TOL: f64 = 1e-7;
pub const DIVERGENCE_TOL: f64 = 1e-7;

/// Uniform grid over the spec's domain. Axes with a count of one use the
/// interval midpoint; otherwise endpoints are inset by 1e-3 of the interval.
/// Axes without a declared interval use (0, 1).
pub fn grid(spec: &SpecFile, counts: &[usize; 4]) -> Vec<Point4> {
    let axes: Vec<Vec<f64>> = (0..4)
        .map(|k| {
            let (a, b) = spec.domain[k].unwrap_or((0.0, 1.0));
            let n = counts[k].max(1);
            if n == 1 {
                return vec![0.5 * (a + b)];
            }
            let inset = 1e-3 * (b - a);
            let (lo, hi) = (a + inset, b - inset);
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(axes.iter().map(Vec::len).product());
    for &t in &axes[0] {
        for &r in &axes[1] {
            for &u in &axes[2] {
                for &v in &axes[3] {
                    out.push([t, r, u, v]);
                }
            }
        }
    }
    out
}

/// Worst value of a per-point measure over the grid, evaluated in parallel
/// and reduced in grid order.
fn worst<F>(points: &[Point4], f: F) -> Result<f64, (Point4, Error)>
where
    F: Fn(&Point4) -> crate::Result<f64> + Sync,
{
    let vals: Vec<_> = points.par_iter().map(|x| f(x).map_err(|e| (*x, e))).collect();
    let mut m = 0.0f64;
    for v in vals {
        let v = v?;
        m = if v.is_nan() { f64::NAN } else { m.max(v) };
    }
    Ok(m)
}

fn record(
    name: &str,
    result: Result<f64, (Point4, Error)>,
    tol: f64,
    n: usize,
    expect: Expectation,
) -> CheckRecord {
    match result {
        Ok(d) => CheckRecord::new(name, d, tol, n, expect),
        Err((x, e)) => CheckRecord::failed(name, format!("at {x:?}: {e}")),
    }
}

fn spec_check(spec: &SpecFile, name: &str, result: Result<f64, (Point4, Error)>, tol: f64, n: usize) -> CheckRecord {
    record(name, result, tol, n, spec.expectation(name))
}

fn two_route(f: &TetradField, x: &Point4) -> crate::Result<(f64, f64, f64)> {
    let v = tetrad_at(f, x)?;
    let m = metric_from_tetrad(&v);
    let w8 = spin_from_tetrad(&v, &m);
    let ch = christoffel(&m);
    let w9 = spin_from_christoffel(&v, &ch);
    let scale = 1.0 + max_abs3(&w8.omega);
    let route = max_diff3(&w8.omega, &w9.omega) / scale;
    let jet = antisym_jet(&v);
    let back = jet_from_spin(&v, &w8);
    let trip = max_diff3(&jet.comps, &back.comps) / (1.0 + max_abs3(&jet.comps));
    let de = covariant_ext_diff(&v, &w8, &ch);
    let torsion = max_abs3(&de) / (1.0 + max_abs3(&v.de));
    Ok((route, trip, torsion))
}

fn einstein_deviation(section: &Section, x: &Point4) -> crate::Result<f64> {
    let rb = residual_b(section, x)?;
    let or = einstein_oracle(&section.tetrad, x)?;
    Ok(max_diff_m(&rb, &or) / (1.0 + max_abs_m(&or)))
}

/// Geometry cross-checks, holonomy, field-equation residuals, the Einstein
/// comparison and, if the spec declares a Lorentz field or chart change,
/// the density transformation law.
pub fn verify(spec: &SpecFile, input: &[u8], counts: [usize; 4]) -> Report {
    let mut rep = Report::new("verify", input);
    rep.grid = Some(counts.to_vec());
    let pts = grid(spec, &counts);
    let n = pts.len();
    let f = spec.tetrad_field();
    let section = spec.section();

    let routes: Vec<_> = pts.par_iter().map(|x| two_route(&f, x).map_err(|e| (*x, e))).collect();
    let pick = |k: usize| -> Result<f64, (Point4, Error)> {
        let mut m = 0.0f64;
        for r in &routes {
            let r = r.clone()?;
            m = m.max([r.0, r.1, r.2][k]);
        }
        Ok(m)
    };
    rep.checks.push(spec_check(spec, "spin_two_route", pick(0), ROUTE_TOL, n));
    rep.checks.push(spec_check(spec, "jet_round_trip", pick(1), ROUTE_TOL, n));
    rep.checks.push(spec_check(spec, "torsion_free", pick(2), ROUTE_TOL, n));
    rep.checks.push(spec_check(
        spec,
        "holonomy",
        worst(&pts, |x| Ok(contact_pullback(&section, x)?.max_abs())),
        CONTACT_TOL,
        n,
    ));
    rep.checks.push(spec_check(
        spec,
        "residual_a",
        worst(&pts, |x| Ok(residual_a(&section, x)?.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))),
        VACUUM_TOL,
        n,
    ));
    rep.checks.push(spec_check(
        spec,
        "vacuum",
        worst(&pts, |x| Ok(max_abs_m(&residual_b(&section, x)?))),
        VACUUM_TOL,
        n,
    ));
    if spec.spin.is_empty() {
        rep.checks.push(spec_check(
            spec,
            "einstein",
            worst(&pts, |x| einstein_deviation(&section, x)),
            EINSTEIN_TOL,
            n,
        ));
    }
    if spec.lorentz_field().is_some() || spec.coordchange.is_some() {
        let l = spec.lorentz_field().unwrap_or_else(LorentzField::identity);
        let c = spec.coord_change().unwrap_or_else(CoordChange::identity);
        rep.checks.push(spec_check(
            spec,
            "density_transform",
            worst(&pts, |x| {
                let xbar = c.to_bar(x)?;
                Ok(density_law_check(&section, &l, &c, &xbar, false)?.deviation)
            }),
            DENSITY_LAW_TOL,
            n,
        ));
    }
    rep
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FuzzCheck {
    DensityLaw,
    Bracket,
    RoundTrip,
    Contact,
}

impl FuzzCheck {
    pub fn name(self) -> &'static str {
        match self {
            FuzzCheck::DensityLaw => "density_law",
            FuzzCheck::Bracket => "bracket",
            FuzzCheck::RoundTrip => "roundtrip",
            FuzzCheck::Contact => "contact",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            FuzzCheck::DensityLaw => DENSITY_LAW_TOL,
            FuzzCheck::Bracket => BRACKET_TOL,
            FuzzCheck::RoundTrip => ROUTE_TOL,
            FuzzCheck::Contact => CONTACT_TOL,
        }
    }
}

/// Deviation of one seeded trial. With `mutate` the harness is broken on
/// purpose, so the trial should exceed tolerance.
pub fn fuzz_trial(check: FuzzCheck, seed: u64, trial: u64, mutate: bool) -> crate::Result<f64> {
    use rand::Rng;
    let mut rng = trial_rng(seed, trial);
    match check {
        FuzzCheck::Bracket => {
            let e = random_frame_value(&mut rng);
            let mut w = random_antisym(&mut rng, 1.0);
            let dw = random_antisym(&mut rng, 1.0);
            if mutate {
                symmetric_mutation(&mut rng, &mut w);
            }
            let o = bracket_identity_check(&e, &w, &dw);
            Ok(o.dev_framed.max(o.dev_frame_free).max(o.dev_closed))
        }
        FuzzCheck::DensityLaw => {
            let base = Section::induced(schwarzschild(1.0));
            // odd trials use a rescaled connection whose density is nonzero
            let s = if trial % 2 == 0 {
                base
            } else {
                Section::induced_scaled(base.tetrad.clone(), 1.1)
            };
            let l = random_lorentz(&mut rng);
            let c = random_coord_change(&mut rng)?;
            let x = [
                rng.gen_range(0.0..1.0),
                rng.gen_range(3.5..7.5),
                rng.gen_range(0.6..2.4),
                rng.gen_range(0.0..1.0),
            ];
            let xbar = c.to_bar(&x)?;
            Ok(density_law_check(&s, &l, &c, &xbar, mutate)?.deviation)
        }
        FuzzCheck::RoundTrip => {
            let f = random_tetrad(&mut rng);
            let x = random_point(&mut rng, SAMPLE_HALF_WIDTH);
            let v = tetrad_at(&f, &x)?;
            let m = metric_from_tetrad(&v);
            let w8 = spin_from_tetrad(&v, &m);
            let w9 = spin_from_christoffel(&v, &christoffel(&m));
            let mut w = w8;
            if mutate {
                w.omega = w.omega.map(|a| a.map(|b| b.map(|c| -c)));
            }
            let jet = antisym_jet(&v);
            let back = jet_from_spin(&v, &w);
            let route = max_diff3(&w8.omega, &w9.omega) / (1.0 + max_abs3(&w8.omega));
            let trip = max_diff3(&jet.comps, &back.comps) / (1.0 + max_abs3(&jet.comps));
            Ok(route.max(trip))
        }
        FuzzCheck::Contact => {
            let f = random_tetrad(&mut rng);
            let x = random_point(&mut rng, SAMPLE_HALF_WIDTH);
            let s = if mutate {
                Section::induced_scaled(f, 1.1)
            } else {
                Section::induced(f)
            };
            Ok(contact_pullback(&s, &x)?.max_abs())
        }
    }
}

pub fn fuzz(check: FuzzCheck, trials: u64, seed: u64, mutate: bool) -> Report {
    let key = format!("fuzz {} trials={trials} seed={seed} mutate={mutate}", check.name());
    let mut rep = Report::new("fuzz", key.as_bytes());
    rep.seed = Some(seed);
    let tol = check.tolerance();
    let results: Vec<crate::Result<f64>> =
        (0..trials).into_par_iter().map(|t| fuzz_trial(check, seed, t, mutate)).collect();
    let mut worst_dev = 0.0f64;
    let mut worst_trial = 0;
    let mut failed = 0usize;
    let mut first_error = None;
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(d) if d.is_finite() => {
                if d > tol {
                    failed += 1;
                }
                if d > worst_dev {
                    worst_dev = d;
                    worst_trial = t;
                }
            }
            Ok(_) => {
                failed += 1;
                worst_dev = f64::INFINITY;
                worst_trial = t;
            }
            Err(e) => {
                failed += 1;
                first_error.get_or_insert(format!("trial {t}: {e}"));
            }
        }
    }
    // a mutated run breaks the harness on purpose and is reported as failing
    let mut rec = CheckRecord::new(check.name(), worst_dev, tol, trials as usize, Expectation::Pass);
    if first_error.is_some() {
        rec.status = super::report::Status::Fail;
    }
    let mut detail = format!("worst trial {worst_trial}, {failed} of {trials} trials over tolerance");
    if let Some(e) = first_error {
        detail.push_str(&format!("; first error: {e}"));
    }
    rep.checks.push(rec.with_detail(detail));
    rep.extra.push(json!({
        "record": "fuzz", "check": check.name(), "trials": trials, "seed": seed,
        "mutate": mutate, "failed_trials": failed, "worst_trial": worst_trial,
    }));
    rep
}

pub fn solve(spec: &SpecFile, input: &[u8], counts: [usize; 4], max_iter: usize) -> Report {
    let mut rep = Report::new("solve", input);
    rep.grid = Some(counts.to_vec());
    if spec.unknowns.is_empty() {
        rep.checks.push(CheckRecord::failed("solve", "spec declares no [unknowns]".into()));
        return rep;
    }
    let pts = grid(spec, &counts);
    let opts = SolveOptions {
        max_iter,
        ..SolveOptions::default()
    };
    let names: Vec<&str> = spec.unknowns.iter().map(|(n, _)| n.as_str()).collect();
    match solve_ansatz(&spec.tetrad_field(), &spec.unknowns, &pts, &opts) {
        Ok(out) => {
            for (k, r) in out.trace.iter().enumerate() {
                rep.extra.push(json!({"record": "iteration", "iteration": k, "rms": r}));
            }
            for (n, v) in names.iter().zip(&out.params) {
                rep.extra.push(json!({"record": "parameter", "name": n, "value": v}));
            }
            rep.checks.push(
                CheckRecord::new("solve", out.rms, opts.tol_rms, pts.len(), Expectation::Pass)
                    .with_detail(format!("converged in {} iterations", out.iterations)),
            );
        }
        Err(Error::NonConvergence { iterations, best_rms, best }) => {
            for (n, v) in names.iter().zip(&best) {
                rep.extra.push(json!({"record": "parameter", "name": n, "value": v, "best_effort": true}));
            }
            rep.checks.push(
                CheckRecord::new("solve", best_rms, opts.tol_rms, pts.len(), Expectation::Pass)
                    .with_detail(format!("no convergence after {iterations} iterations")),
            );
        }
        Err(e) => rep.checks.push(CheckRecord::failed("solve", e.to_string())),
    }
    rep
}

/// Which prolonged field to use for the current.
#[derive(Clone, Debug)]
pub enum NoetherSource {
    Translate(usize),
    FromSpec,
}

pub fn noether(spec: &SpecFile, input: &[u8], counts: [usize; 4], source: NoetherSource) -> Report {
    let mut rep = Report::new("noether", input);
    rep.grid = Some(counts.to_vec());
    let pts = grid(spec, &counts);
    let section = spec.section();
    let field = match source {
        NoetherSource::Translate(k) => JVectorField::translation(k),
        NoetherSource::FromSpec => match spec.vector_field() {
            Some(f) => f,
            None => {
                rep.checks.push(CheckRecord::failed("current_divergence", "spec has no [vectorfield]".into()));
                return rep;
            }
        },
    };
    match residual_report(&section, &pts) {
        Ok(r) if r.norm_b.rms <= CRITICAL_TOL => {
            rep.checks.push(CheckRecord::new("critical", r.norm_b.rms, CRITICAL_TOL, pts.len(), Expectation::Pass));
        }
        Ok(r) => {
            let e = Error::NotCritical { rms: r.norm_b.rms };
            rep.checks.push(CheckRecord::new("critical", r.norm_b.rms, CRITICAL_TOL, pts.len(), Expectation::Pass).with_detail(e.to_string()));
            return rep;
        }
        Err(e) => {
            rep.checks.push(CheckRecord::failed("critical", e.to_string()));
            return rep;
        }
    }
    let z = NoetherField::new(field);
    let vals: Vec<_> = pts.par_iter().map(|x| current(&section, &z, x).map_err(|e| (*x, e))).collect();
    let mut dev = 0.0f64;
    let mut jmax = 0.0f64;
    let mut failure = None;
    for v in vals {
        match v {
            Ok(c) => {
                let m = c.j.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                jmax = jmax.max(m);
                dev = dev.max(c.div.abs() / (1.0 + m));
            }
            Err(err) => {
                failure.get_or_insert(err);
            }
        }
    }
    rep.checks.push(match failure {
        Some((x, e)) => CheckRecord::failed("current_divergence", format!("at {x:?}: {e}")),
        None => CheckRecord::new("current_divergence", dev, DIVERGENCE_TOL, pts.len(), Expectation::Pass)
            .with_detail(format!("max |J| = {jmax:e}")),
    });
    rep
}
