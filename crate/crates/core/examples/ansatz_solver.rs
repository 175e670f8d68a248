//! Fit the static spherically symmetric family f = c0 + c1/r to the vacuum
//! equations by damped Gauss-Newton on collocation points.

use framegr::exprdsl::{parse_with, ParamEnv, ParseContext};
use framegr::geometry::{Domain, TetradField};
use framegr::variational::{solve_ansatz, SolveOptions};
use framegr::Error;

fn main() -> framegr::Result<()> {
    let ctx = ParseContext::with_coords(["t", "r", "theta", "phi"]);
    let p = |s: &str| parse_with(s, &ctx).expect("valid expression");
    let family = TetradField::diagonal(
        [p("sqrt(c0 + c1/r)"), p("1/sqrt(c0 + c1/r)"), p("r"), p("r*sin(theta)")],
        ParamEnv::new(),
        Domain::unbounded(),
    );
    let pts: Vec<_> = (0..20).map(|k| [0.5, 3.0 + 5.0 * k as f64 / 19.0, 1.3, 0.5]).collect();
    let start = [("c0".to_string(), 0.9), ("c1".to_string(), -1.5)];

    match solve_ansatz(&family, &start, &pts, &SolveOptions::default()) {
        Ok(out) => {
            for (k, rms) in out.trace.iter().enumerate() {
                println!("iteration {k:>2}  rms {rms:.3e}");
            }
            for (n, (v, c)) in out.names.iter().zip(out.params.iter().zip(&out.column_norms)) {
                println!("{n} = {v:+.12}   |dres/d{n}| = {c:.3e}");
            }
            println!("rms {:.3e} after {} iterations", out.rms, out.iterations);
        }
        Err(Error::NonConvergence { iterations, best_rms, best }) => {
            println!("no convergence after {iterations} iterations: best {best:?}, rms {best_rms:.3e}");
        }
        Err(e) => return Err(e),
    }
    // with c0 pinned at the wrong value there is no solution at all
    let pinned = family.with_params(ParamEnv::new().with("c0", 2.0));
    let r = solve_ansatz(&pinned, &start[1..], &pts, &SolveOptions::default());
    println!("c0 = 2: {}", r.map(|o| format!("{:?}", o.params)).unwrap_or_else(|e| e.to_string()));
    Ok(())
}
