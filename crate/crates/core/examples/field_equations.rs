//! Field-equation residuals for vacuum, matter-filled and perturbed frames,
//! and the comparison with the Einstein tensor from the metric.

use framegr::solutions::{flrw_dust, perturbed_schwarzschild, rindler, schwarzschild};
use framegr::tensor::{max_abs_m, max_diff_m};
use framegr::variational::{einstein_oracle, residual_a, residual_b, Section};

fn main() -> framegr::Result<()> {
    let cases = [
        ("schwarzschild", schwarzschild(1.0), [0.5, 4.5, 1.2, 0.3]),
        ("rindler", rindler(0.7), [0.2, 0.8, 0.1, -0.4]),
        ("flrw dust", flrw_dust(), [1.5, 0.2, 0.3, 0.4]),
        ("perturbed", perturbed_schwarzschild(0.05), [0.5, 4.5, 1.2, 0.3]),
    ];
    println!("{:<14} {:>12} {:>12} {:>14}", "frame", "|res_A|", "|res_B|", "res_B - G");
    for (name, f, x) in cases {
        let s = Section::induced(f.clone());
        let ra = residual_a(&s, &x)?.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let rb = residual_b(&s, &x)?;
        let g = einstein_oracle(&f, &x)?;
        println!("{name:<14} {ra:>12.3e} {:>12.3e} {:>14.3e}", max_abs_m(&rb), max_diff_m(&rb, &g));
    }
    Ok(())
}
