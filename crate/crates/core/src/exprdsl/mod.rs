//! Expression language for fields on a four-dimensional chart: parsing,
//! evaluation and exact symbolic differentiation.

mod deriv;
mod expr;
mod parse;

pub use deriv::{DiffExpr, PointDerivs, MAX_ORDER};
pub use expr::{EvalError, Expr, Func, Node, ParamEnv, Point4, Printer};
pub use parse::{parse, parse_with, ParseContext, ParseError};

/// Central finite difference of `e` along coordinate `i`.
pub fn central_diff(
    e: &Expr,
    i: usize,
    x: &Point4,
    p: &ParamEnv,
    h: f64,
) -> Result<f64, EvalError> {
    let mut xp = *x;
    let mut xm = *x;
    xp[i] += h;
    xm[i] -= h;
    Ok((e.eval(&xp, p)? - e.eval(&xm, p)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sph() -> ParseContext {
        ParseContext::with_coords(["t", "r", "theta", "phi"])
    }

    #[test]
    fn eval_arithmetic() {
        let e = parse_with("1 - 2*M/r", &sph()).unwrap();
        let p = ParamEnv::new().with("M", 1.0);
        assert_eq!(e.eval(&[0.0, 4.0, 0.0, 0.0], &p).unwrap(), 0.5);
    }

    #[test]
    fn eval_domain_and_unbound() {
        let e = parse("sqrt(x0)").unwrap();
        assert!(matches!(
            e.eval(&[-1.0, 0.0, 0.0, 0.0], &ParamEnv::new()),
            Err(EvalError::Domain { .. })
        ));
        let e = parse("1/x0").unwrap();
        assert!(matches!(
            e.eval(&[0.0; 4], &ParamEnv::new()),
            Err(EvalError::Domain { .. })
        ));
        let e = parse("ln(x0 - 1)").unwrap();
        match e.eval(&[0.5, 0.0, 0.0, 0.0], &ParamEnv::new()) {
            Err(EvalError::Domain { expr, .. }) => assert_eq!(expr, "ln(x0 - 1)"),
            other => panic!("unexpected {other:?}"),
        }
        let e = parse("M*x0").unwrap();
        assert_eq!(
            e.eval(&[1.0; 4], &ParamEnv::new()),
            Err(EvalError::UnboundParam("M".into()))
        );
    }

    #[test]
    fn derivative_of_square() {
        let d = parse("x1*x1").unwrap().differentiate(1);
        assert_eq!(d.eval(&[0.0, 3.0, 0.0, 0.0], &ParamEnv::new()).unwrap(), 6.0);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        for i in 0..4 {
            assert!(Expr::constant(3.5).differentiate(i).is_zero());
        }
    }

    #[test]
    fn derivative_of_lapse_matches_closed_form_and_fd() {
        let e = parse_with("sqrt(1-2*M/r)", &sph()).unwrap();
        let closed = parse_with("M/(r^2 * sqrt(1-2*M/r))", &sph()).unwrap();
        let p = ParamEnv::new().with("M", 1.0);
        let x = [0.0, 4.0, 0.0, 0.0];
        let d = e.differentiate(1).eval(&x, &p).unwrap();
        let fd = central_diff(&e, 1, &x, &p, 1e-5).unwrap();
        assert!((d - closed.eval(&x, &p).unwrap()).abs() < 1e-15);
        assert!((d - fd).abs() < 1e-9, "{d} vs {fd}");
    }

    #[test]
    fn derivative_of_r_sin_theta() {
        let e = parse_with("r*sin(theta)", &sph()).unwrap();
        let d = e.differentiate(2);
        let expected = parse_with("r*cos(theta)", &sph()).unwrap();
        let p = ParamEnv::new();
        for x in [[0.0, 2.0, 0.3, 0.0], [1.0, 5.0, 2.0, 1.0]] {
            assert_eq!(d.eval(&x, &p).unwrap(), expected.eval(&x, &p).unwrap());
        }
    }

    #[test]
    fn substitution_composes() {
        let e = parse("x0*x1 + sin(x2)").unwrap();
        let subs = [
            parse("2*x0").unwrap(),
            parse("x1 + 1").unwrap(),
            parse("x3").unwrap(),
            parse("x2").unwrap(),
        ];
        let c = e.substitute(&subs);
        let x: Point4 = [0.5, 1.5, 0.25, 0.75];
        let direct = 2.0 * x[0] * (x[1] + 1.0) + x[3].sin();
        assert!((c.eval(&x, &ParamEnv::new()).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn params_are_collected_and_bound() {
        let e = parse("M*x0 + a/x1 + M").unwrap();
        assert_eq!(e.params(), vec!["M".to_string(), "a".to_string()]);
        let b = e.bind_params(&ParamEnv::new().with("M", 2.0));
        assert_eq!(b.params(), vec!["a".to_string()]);
    }
}
