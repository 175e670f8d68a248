//! Spin connection of the Schwarzschild frame by the metric route and the
//! anholonomy route, plus the curvature and torsion checks built on it.

use framegr::geometry::{
    antisym_jet, christoffel, covariant_ext_diff, curvature, induced_spin_field, jet_from_spin,
    metric_from_tetrad, spin_from_christoffel, spin_from_tetrad, tetrad_at,
};
use framegr::solutions::schwarzschild;
use framegr::tensor::{max_abs3, max_diff3, PAIRS};

fn main() -> framegr::Result<()> {
    let f = schwarzschild(1.0);
    let x = [0.0, 4.0, std::f64::consts::FRAC_PI_2, 0.0];
    let v = tetrad_at(&f, &x)?;
    let m = metric_from_tetrad(&v);
    println!("signature {:?}", m.signature());

    let via_christoffel = spin_from_christoffel(&v, &christoffel(&m));
    let via_anholonomy = spin_from_tetrad(&v, &m);
    println!("route difference      {:.3e}", max_diff3(&via_christoffel.omega, &via_anholonomy.omega));

    println!("nonzero omega_i^(mu nu):");
    for i in 0..4 {
        for &(a, b) in &PAIRS {
            let w = via_anholonomy.omega[i][a][b];
            if w.abs() > 1e-14 {
                println!("  omega_{i}^({a}{b}) = {w:+.12}");
            }
        }
    }

    let back = jet_from_spin(&v, &via_anholonomy);
    println!("jet round trip        {:.3e}", max_diff3(&antisym_jet(&v).comps, &back.comps));
    let torsion = covariant_ext_diff(&v, &via_anholonomy, &christoffel(&m));
    println!("torsion               {:.3e}", max_abs3(&torsion));

    let r = curvature(&induced_spin_field(&f, &x)?)?;
    let ricci = r.ricci_contraction(&v.einv);
    let worst = ricci.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    println!("R_tr^(01)             {:+.12}", r.r[0][1][0][1]);
    println!("max Ricci contraction {worst:.3e}");
    Ok(())
}
