//! Conserved currents of prolonged vector fields on Schwarzschild and the
//! criticality defect of sections dragged along symmetries and
//! non-symmetries.

use framegr::exprdsl::{Expr, ParamEnv};
use framegr::noether::{current, symmetry_defect, NoetherField};
use framegr::solutions::{schwarzschild, spherical_expr};
use framegr::transforms::JVectorField;
use framegr::variational::Section;

fn zero4() -> [[Expr; 4]; 4] {
    std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()))
}

fn main() -> framegr::Result<()> {
    let s = Section::induced(schwarzschild(1.0));
    // a chart flow combined with a local rotation in the (1,2) plane
    let mut d = zero4();
    d[1][2] = spherical_expr("r/7");
    d[2][1] = spherical_expr("-r/7");
    let eps = ["1 + r/10", "sin(theta)/5", "t*r/20", "cos(t)"].map(spherical_expr);
    let symmetry = JVectorField::new(eps, d, zero4(), ParamEnv::new());
    let mut g = zero4();
    g[0][0] = spherical_expr("r/10");
    g[2][3] = spherical_expr("r/20");
    let vertical = JVectorField::new(std::array::from_fn(|_| Expr::zero()), zero4(), g, ParamEnv::new());

    println!("{:>6} {:>6} {:>24} {:>10}", "r", "theta", "J", "div J");
    let z = NoetherField::new(symmetry.clone());
    for (r, th) in [(3.5, 0.8), (5.0, 1.5), (7.0, 2.2)] {
        let c = current(&s, &z, &[0.4, r, th, 0.2])?;
        println!("{r:>6} {th:>6} {:>24} {:>10.2e}", format!("{:+.3?}", c.j), c.div);
    }
    let t = current(&s, &NoetherField::new(JVectorField::translation(0)), &[0.4, 5.0, 1.5, 0.2])?;
    println!("time translation J = {:?} (the density vanishes on shell)", t.j);

    let grid: Vec<_> = [3.5, 5.0, 7.0].iter().flat_map(|&r| [[0.2, r, 1.0, 0.3], [0.7, r, 2.0, 0.6]]).collect();
    for (name, f) in [("symmetry", &symmetry), ("non-symmetry", &vertical)] {
        let a = symmetry_defect(&s, f, 1e-2, &grid)?;
        let b = symmetry_defect(&s, f, 1e-3, &grid)?;
        println!("{name:<13} defect(1e-2) {a:.3e}  defect(1e-3) {b:.3e}  order {:.2}", (a / b).log10());
    }
    Ok(())
}
