// Integrate the reduced equations and place both bodies back on the sphere.

use curved2body::reduced_system::{integrate, reconstruct, ModelParams, PotentialFamily, ReducedState};
use curved2body::symmetry::GroupElement;

pub fn run_example() -> curved2body::Result<()> {
    let params = ModelParams::normalized(0.3, 0.5, PotentialFamily::attracting())?;
    let s0 = ReducedState::new(1.0, 0.05, 0.1, -0.1, 0.55);

    let traj = integrate(&params, &s0, 20.0, 1e-11)?;
    println!("{} steps, energy drift {:.2e}, Casimir drift {:.2e}", traj.steps, traj.energy_drift(), traj.casimir_drift());
    assert!(traj.drift_within_contract());

    let last = traj.last().expect("nonempty");
    println!("final state: q = {:.6}, p = {:.6}, m = ({:.6}, {:.6}, {:.6})", last.q, last.p, last.m1, last.m2, last.m3);

    let rec = reconstruct(&params, &traj, &GroupElement::identity())?;
    let (x1, x2) = (rec.x1.last().unwrap(), rec.x2.last().unwrap());
    println!("X1 = ({:.6}, {:.6}, {:.6}), X2 = ({:.6}, {:.6}, {:.6})", x1.x, x1.y, x1.z, x2.x, x2.y, x2.z);
    println!("worst |d(X1, X2) - q| = {:.2e}", rec.distance_error);
    Ok(())
}

fn main() -> curved2body::Result<()> {
    run_example()
}
