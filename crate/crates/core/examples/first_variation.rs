//! Action over a box and its first variation along a compactly supported
//! deformation, checked against a difference quotient of the action.

use framegr::exprdsl::Expr;
use framegr::solutions::{perturbed_schwarzschild, schwarzschild, spherical_expr};
use framegr::variational::{
    action_derivative_fd, action_value, first_variation, Box4, DeformationField, Section, SpinExprs,
};

fn main() -> framegr::Result<()> {
    let b = Box4::new([0.0, 4.0, 1.0, 0.0], [1.0, 6.0, 2.0, 1.0]);
    let mut xe: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
    let mut xw: SpinExprs = std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero()));
    xe[0][0] = spherical_expr("0.3 + r/10");
    xe[1][3] = spherical_expr("t*r/5");
    xw[2][3] = spherical_expr("0.2*r");
    let deformation = DeformationField::bumped(xe, xw, b);

    for (name, s) in [
        ("schwarzschild", Section::induced(schwarzschild(1.0))),
        ("perturbed", Section::induced(perturbed_schwarzschild(0.05))),
    ] {
        let a = action_value(&s, &b, 6)?;
        let fv = first_variation(&s, &deformation, &b, 6)?;
        let fd = action_derivative_fd(&s, &deformation, &b, 6, 1e-4)?;
        println!("{name}");
        println!("  action           {:+.6e} (quadrature error {:.1e})", a.value, a.error);
        println!("  first variation  {:+.9e} (scale {:.3e})", fv.value, fv.scale);
        println!("  difference       {fd:+.9e}");
    }
    Ok(())
}
