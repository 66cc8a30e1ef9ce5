// Stability regions in the (κ, q) plane and transitions along a q-sweep.

use curved2body::continuation_scan::{detect_q_transitions, q_sweep, region_raster, CellLabel};
use curved2body::equilibria::ABranch;
use curved2body::reduced_system::{ModelParams, PotentialFamily};

pub fn run_example() -> curved2body::Result<()> {
    let raster = region_raster(&PotentialFamily::curvature(), 0.5, (-1.0, 1.0), (0.1, 3.0), (24, 48))?;
    for label in [CellLabel::Stable, CellLabel::Unstable, CellLabel::Boundary, CellLabel::NoRE, CellLabel::Failed] {
        println!("{:<9} {}", label.as_str(), raster.count(label));
    }
    // one character per cell, q increasing to the right
    for (i, k) in raster.kappas.iter().enumerate().rev().step_by(3) {
        let line: String = (0..raster.qs.len())
            .map(|j| match raster.label(i, j) {
                CellLabel::Stable => 'o',
                CellLabel::Unstable => 'x',
                CellLabel::Boundary => '|',
                CellLabel::NoRE => ' ',
                CellLabel::Failed => '?',
            })
            .collect();
        println!("{k:+.2} {line}");
    }

    let params = ModelParams::normalized(1.0, 0.75, PotentialFamily::attracting())?;
    let sweep = q_sweep(&params, ABranch::Plus, (0.1, 1.5), 60)?;
    for t in detect_q_transitions(&sweep) {
        println!("{:?} at q = {:.8}", t.kind, t.parameter);
    }
    Ok(())
}

fn main() -> curved2body::Result<()> {
    run_example()
}
