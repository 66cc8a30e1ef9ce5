use curved2body::continuation_scan::{detect_q_transitions, family_sweep, label_cell, q_sweep, region_raster, TransitionKind};
use curved2body::equilibria::{critical_angles, ABranch, Family};
use curved2body::export;
use curved2body::reduced_system::{Interaction, ModelParams, PotentialFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn raster_cells_match_standalone_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for pot in [PotentialFamily::attracting(), PotentialFamily::repelling(), PotentialFamily::curvature()] {
        let raster = region_raster(&pot, 0.6, (-1.0, 1.0), (0.1, 3.5), (40, 40)).unwrap();
        for _ in 0..100 {
            let (i, j) = (rng.random_range(0..40), rng.random_range(0..40));
            let alone = label_cell(&pot, 0.6, raster.kappas[i], raster.qs[j]);
            assert_eq!(raster.label(i, j), alone, "{} at ({}, {})", pot.name(), raster.kappas[i], raster.qs[j]);
        }
    }
}

#[test]
fn q_sweep_transitions_match_the_transcendental_roots() {
    for mu in [0.25, 0.5, 0.75] {
        let rep = ModelParams::normalized(1.0, mu, PotentialFamily::repelling()).unwrap();
        let sweep = q_sweep(&rep, ABranch::Plus, (0.05, 1.55), 60).unwrap();
        let qd = critical_angles(mu, 1.0, Interaction::Repelling).unwrap().q_dagger.unwrap();
        let loss: Vec<f64> = detect_q_transitions(&sweep)
            .into_iter()
            .filter(|t| t.kind == TransitionKind::StabilityLoss)
            .map(|t| t.parameter)
            .collect();
        assert_eq!(loss.len(), 1, "mu = {mu}: {loss:?}");
        assert!((loss[0] - qd).abs() < 1e-6, "mu = {mu}: {} vs {qd}", loss[0]);

        let attr = ModelParams::normalized(-1.0, mu, PotentialFamily::attracting()).unwrap();
        let sweep = q_sweep(&attr, ABranch::Minus, (0.05, 4.0), 60).unwrap();
        let qs = critical_angles(mu, -1.0, Interaction::Attracting).unwrap().q_star.unwrap();
        let t = detect_q_transitions(&sweep);
        let found = t.iter().find(|t| t.kind == TransitionKind::StabilityLoss).expect("q_star crossing");
        assert!((found.parameter - qs).abs() < 1e-6, "mu = {mu}: {} vs {qs}", found.parameter);
    }
}

#[test]
fn family_tables_are_reproducible() {
    let a = family_sweep(Family::Attracting, 1.3, 0.4, (-0.6, 0.6), 25).unwrap();
    let b = family_sweep(Family::Attracting, 1.3, 0.4, (-0.6, 0.6), 25).unwrap();
    assert_eq!(export::family_table_csv(&a), export::family_table_csv(&b));
}

#[test]
fn attracting_family_is_stable_near_the_plane() {
    // instability in the attracting family needs κ < 0 and q beyond q*
    let t = family_sweep(Family::Attracting, 0.8, 0.5, (-0.2, 0.2), 21).unwrap();
    assert!(t.rows.iter().all(|r| r.classification.to_string() == "Elliptic"));
    for r in &t.rows {
        if r.kappa != 0.0 {
            assert_eq!(r.casimir.signum(), r.kappa.signum(), "kappa = {}", r.kappa);
        }
    }
}
