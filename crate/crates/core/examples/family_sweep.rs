// Follow a family of relative equilibria through κ = 0.

use curved2body::continuation_scan::{detect_transitions, family_sweep};
use curved2body::equilibria::Family;

pub fn run_example() -> curved2body::Result<()> {
    let table = family_sweep(Family::AttractingRepelling, 1.0, 0.5, (-0.5, 0.5), 11)?;
    for row in &table.rows {
        let lead = row.eigenvalues.iter().map(|e| e.re.abs()).fold(0.0, f64::max);
        println!("kappa = {:+.2}  {:?}  C = {:+.6}  max |Re| = {lead:.4}  {}", row.kappa, row.branch, row.casimir, row.classification);
    }
    println!("largest step between rows: {:.4}", table.max_jump());
    for t in detect_transitions(&table) {
        println!("{:?} at kappa = {:.8}", t.kind, t.parameter);
    }
    Ok(())
}

fn main() -> curved2body::Result<()> {
    run_example()
}
