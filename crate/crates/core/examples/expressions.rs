//! Parse a field expression, differentiate it exactly and compare with a
//! finite difference.

use framegr::exprdsl::{central_diff, parse_with, DiffExpr, ParamEnv, ParseContext};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = ParseContext::with_coords(["t", "r", "theta", "phi"]);
    let coords = ctx.coords.clone();
    let lapse = parse_with("sqrt(1 - 2*M/r)", &ctx)?;
    let params = ParamEnv::new().with("M", 1.0);
    let x = [0.0, 4.0, 1.2, 0.3];

    println!("f        = {}", lapse.display_with(&coords));
    let df = lapse.differentiate(1);
    println!("df/dr    = {}", df.display_with(&coords));
    println!("value    = {:.15}", lapse.eval(&x, &params)?);
    println!("exact    = {:.15}", df.eval(&x, &params)?);
    println!("central  = {:.15}", central_diff(&lapse, 1, &x, &params, 1e-5)?);

    // cached partials up to third order
    let cached = DiffExpr::new(lapse);
    let pd = cached.eval_derivs(&x, &params, 3)?;
    println!("d3f/dr3  = {:.15}", pd.get(&[1, 1, 1]));

    // evaluation errors name the offending subexpression
    let bad = parse_with("ln(r - 5)", &ctx)?;
    if let Err(e) = bad.eval(&x, &params) {
        println!("error    : {e}");
    }
    Ok(())
}
