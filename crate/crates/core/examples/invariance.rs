//! Seeded trials of the density transformation law and the bracket
//! identities, with the deliberately broken variants alongside.

use framegr::cli::{fuzz, FuzzCheck};

fn main() {
    for check in [FuzzCheck::DensityLaw, FuzzCheck::Bracket, FuzzCheck::RoundTrip, FuzzCheck::Contact] {
        for mutate in [false, true] {
            let r = fuzz(check, 100, 7, mutate);
            let c = &r.checks[0];
            println!(
                "{:<12} mutate={mutate:<5} worst {:.3e} tol {:.0e} -> {}",
                check.name(),
                c.max_deviation,
                c.tolerance,
                if r.ok() { "pass" } else { "fail" }
            );
        }
    }
}
