//! Local Lorentz rotations and chart changes acting on a frame: the induced
//! connection transforms covariantly and holonomy is preserved.

use framegr::exprdsl::{Expr, ParamEnv};
use framegr::geometry::{induced_spin_field, metric_from_tetrad, tetrad_at};
use framegr::random::{random_coord_change, trial_rng};
use framegr::solutions::schwarzschild;
use framegr::tensor::{max_diff3, max_diff_m};
use framegr::transforms::{contact_pullback, transform_spin, transform_tetrad, CoordChange, LorentzField};
use framegr::variational::Section;

fn main() -> framegr::Result<()> {
    let f = schwarzschild(1.0);
    // a boost whose rapidity varies across the chart
    let boost = LorentzField::boost(1, Expr::scale(0.1, Expr::coord(1)), ParamEnv::new());
    let chart = random_coord_change(&mut trial_rng(1, 0))?;
    let x = [0.3, 5.0, 1.1, 0.4];
    let xbar = chart.to_bar(&x)?;
    println!("x = {x:?}\nxbar = {xbar:.6?}");
    println!("chart inverse defect {:.3e}", chart.verify(&xbar)?);

    let g = transform_tetrad(&f, &boost, &chart);
    let direct = induced_spin_field(&g, &xbar)?;
    let moved = transform_spin(&induced_spin_field(&f, &x)?, &boost.at(&x)?, &chart.at_bar(&xbar)?);
    println!("connection covariance {:.3e}", max_diff3(&direct.omega, &moved.omega));

    // a pure gauge change leaves the metric alone
    let gauged = transform_tetrad(&f, &boost, &CoordChange::identity());
    let gm = metric_from_tetrad(&tetrad_at(&gauged, &x)?);
    let fm = metric_from_tetrad(&tetrad_at(&f, &x)?);
    println!("metric change         {:.3e}", max_diff_m(&gm.g, &fm.g));

    let contact = contact_pullback(&Section::induced(g), &xbar)?;
    println!("contact pullback      {:.3e}", contact.max_abs());
    let forced = contact_pullback(&Section::induced_scaled(f, 1.1), &x)?;
    println!("non-holonomic section {:.3e}", forced.max_abs());
    Ok(())
}
