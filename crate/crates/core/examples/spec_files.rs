//! Describe a field in the text spec format and run the batch checks on it,
//! as the command-line tool does.

use framegr::cli::{verify, SpecFile};

const SPEC: &str = "\
# Rindler frame for an observer with unit acceleration.
[coords]
t x y z

[params]
g = 1

[tetrad]
e 0 t = 1 + g*x
e 1 x = 1
e 2 y = 1
e 3 z = 1

[domain]
t in (-1, 1)
x in (0, 2)
y in (-1, 1)
z in (-1, 1)
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SpecFile::parse(SPEC)?;
    print!("normalized:\n{}", spec.normalized());
    let report = verify(&spec, SPEC.as_bytes(), [3, 3, 3, 3]);
    for c in &report.checks {
        println!("{:<18} {:>10.3e} (tol {:.0e}) {:?}", c.check, c.max_deviation, c.tolerance, c.status);
    }
    println!("{}", report.summary());

    match SpecFile::parse("[coords]\nt x y z\n[tetrad]\ne 0 t = sqrt(\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
