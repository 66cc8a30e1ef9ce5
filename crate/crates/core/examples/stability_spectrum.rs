// Linear stability and leaf Hessian signatures at relative equilibria.

use curved2body::equilibria::Family;
use curved2body::stability::{analyze, hessian_on_leaf};

pub fn run_example() -> curved2body::Result<()> {
    let (q, mu) = (1.0, 0.5);
    for family in [Family::Attracting, Family::AttractingRepelling] {
        for kappa in [0.4, 0.0, -0.4] {
            let re = family.member(kappa, q, mu)?;
            let rep = analyze(&re)?;
            // at κ = 0 the Casimir is degenerate and the leaf has no Hessian signature
            let sig = hessian_on_leaf(&re).map_or_else(|e| format!("({e})"), |s| s.signs);
            let eigs: Vec<String> = rep.eigenvalues.iter().map(|e| format!("{:+.4}{:+.4}i", e.re, e.im)).collect();
            println!("{family:?} kappa = {kappa:>4}: {:?} {:<19} signature {sig} [{}]", re.branch, rep.classification.to_string(), eigs.join(", "));
        }
    }
    Ok(())
}

fn main() -> curved2body::Result<()> {
    run_example()
}
