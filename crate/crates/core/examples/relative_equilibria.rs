// Relative equilibria at one separation, across curvatures and potentials.

use curved2body::equilibria::{classify_re, critical_angles};
use curved2body::reduced_system::{Interaction, ModelParams, PotentialFamily};

pub fn run_example() -> curved2body::Result<()> {
    let q = 1.2;
    for potential in [PotentialFamily::attracting(), PotentialFamily::repelling(), PotentialFamily::curvature()] {
        for kappa in [0.5, 0.0, -0.5] {
            let params = ModelParams::normalized(kappa, 0.75, potential.clone())?;
            let found = classify_re(&params, q)?;
            print!("{:<14} kappa = {kappa:>4}:", potential.name());
            if found.is_empty() {
                print!(" none");
            }
            for re in &found.equilibria {
                print!(" {:?} (m3 = {:.6}, residual {:.0e})", re.branch, re.state.m3, re.residual());
            }
            println!();
        }
    }

    // equal masses at the right angle: a whole family of equilibria
    let params = ModelParams::normalized(1.0, 1.0, PotentialFamily::attracting())?;
    let found = classify_re(&params, std::f64::consts::FRAC_PI_2)?;
    let family = found.right_angled.expect("equal masses at the right angle");
    for theta in [0.2, 0.5, 0.7] {
        let re = family.member(theta)?;
        println!("right-angled member theta = {theta}: m2 = {:.6}, m3 = {:.6}", re.state.m2, re.state.m3);
    }

    let ca = critical_angles(0.75, 1.0, Interaction::Attracting)?;
    println!("kappa = 1, mu = 0.75: q* = {:?}, q-dagger = {:?}", ca.q_star, ca.q_dagger);
    Ok(())
}

fn main() -> curved2body::Result<()> {
    run_example()
}
