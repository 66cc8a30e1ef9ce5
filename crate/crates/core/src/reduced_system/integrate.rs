use nalgebra::Vector5;
use serde::{Deserialize, Serialize};

use super::ode::{solve, Output};
use super::{casimir, eom_rhs, hamiltonian, ModelParams, ReducedState};
use crate::error::{Error, Result};

/// Integration stops once q is this close to an end of I_κ.
pub const DOMAIN_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub tol: f64,
    /// Report on a uniform grid of this many intervals instead of at every step.
    pub samples: Option<usize>,
}

impl IntegrateOptions {
    pub fn new(t_end: f64, tol: f64) -> Self {
        IntegrateOptions { t_end, tol, samples: None }
    }

    pub fn sampled(mut self, n: usize) -> Self {
        self.samples = Some(n);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: ReducedState,
    pub h: f64,
    pub c: f64,
}

/// Sampled solution with energy and Casimir at every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    pub energies: Vec<f64>,
    pub casimirs: Vec<f64>,
    pub tol: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = TrajectorySample> + '_ {
        (0..self.len()).map(move |i| TrajectorySample { t: self.times[i], state: self.states[i], h: self.energies[i], c: self.casimirs[i] })
    }

    /// max |H(t) − H(0)|.
    pub fn energy_drift(&self) -> f64 {
        drift(&self.energies)
    }

    /// max |C(t) − C(0)|.
    pub fn casimir_drift(&self) -> f64 {
        drift(&self.casimirs)
    }

    /// Drift bound: both drifts below 100·tol, relative to the invariant's scale when it exceeds 1.
    pub fn drift_within_contract(&self) -> bool {
        let bound = |v: &[f64]| 100.0 * self.tol * v.first().map_or(1.0, |x| x.abs().max(1.0));
        self.energy_drift() <= bound(&self.energies) && self.casimir_drift() <= bound(&self.casimirs)
    }

    pub fn last(&self) -> Option<&ReducedState> {
        self.states.last()
    }
}

fn drift(v: &[f64]) -> f64 {
    match v.first() {
        Some(&v0) => v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max),
        None => 0.0,
    }
}

/// Integrates from s0 over [0, t_end], reporting every accepted step.
pub fn integrate(params: &ModelParams, s0: &ReducedState, t_end: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(params, s0, &IntegrateOptions::new(t_end, tol))
}

pub fn integrate_with(params: &ModelParams, s0: &ReducedState, opts: &IntegrateOptions) -> Result<Trajectory> {
    if !(1e-13..=1e-5).contains(&opts.tol) {
        return Err(Error::InvalidParameter(format!("tol must lie in [1e-13, 1e-5], got {}", opts.tol)));
    }
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", opts.t_end)));
    }
    params.kappa.check(s0.q)?;
    let rhs = |_t: f64, y: &Vector5<f64>| eom_rhs(params, &ReducedState::from_vector(y));
    let curvature = params.kappa;
    let guard = |t: f64, y: &Vector5<f64>| {
        if !curvature.contains(y[0]) || curvature.boundary_distance(y[0]) < DOMAIN_MARGIN {
            Err(Error::LeftDomain { q: y[0], t })
        } else {
            Ok(())
        }
    };
    let grid: Vec<f64>;
    let output = match opts.samples {
        Some(n) if n > 0 => {
            grid = (0..=n).map(|i| opts.t_end * i as f64 / n as f64).collect();
            Output::At(&grid)
        }
        _ => Output::Steps,
    };
    let sol = solve(&rhs, 0.0, s0.to_vector(), opts.t_end, opts.tol, opts.tol, output, &guard)?;
    let states: Vec<ReducedState> = sol.states.iter().map(ReducedState::from_vector).collect();
    let energies = states.iter().map(|s| hamiltonian(params, s)).collect::<Result<Vec<_>>>()?;
    let casimirs = states.iter().map(|s| casimir(params.k(), &s.m())).collect();
    Ok(Trajectory { times: sol.times, states, energies, casimirs, tol: opts.tol, steps: sol.steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced_system::{flat_observables, PotentialFamily};

    fn kepler(q: f64, mu: f64) -> (ModelParams, ReducedState) {
        let p = ModelParams::normalized(0.0, mu, PotentialFamily::attracting()).unwrap();
        let m3 = (mu * q / (1.0 + mu)).sqrt();
        (p, ReducedState::new(q, 0.0, 0.0, 0.0, m3))
    }

    #[test]
    fn circular_kepler_orbit_is_stationary() {
        let (p, s) = kepler(1.0, 1.0);
        let tr = integrate(&p, &s, 10.0, 1e-12).unwrap();
        for st in &tr.states {
            assert!((st.to_vector() - s.to_vector()).amax() < 1e-8);
        }
        assert!(tr.drift_within_contract());
    }

    #[test]
    fn perturbed_kepler_stays_bounded_and_conserves_l() {
        let (p, mut s) = kepler(2.5, 0.5);
        s.p += 1e-3;
        let omega = ((0.5 + 1.0) / (0.5 * 2.5f64.powi(3))).sqrt();
        let period = 2.0 * std::f64::consts::PI / omega;
        let tr = integrate_with(&p, &s, &IntegrateOptions::new(50.0 * period, 1e-11).sampled(2000)).unwrap();
        let qs: Vec<f64> = tr.states.iter().map(|s| s.q).collect();
        let (lo, hi) = qs.iter().fold((f64::MAX, f64::MIN), |(a, b), &q| (a.min(q), b.max(q)));
        assert!(hi - lo < 0.05 && hi - lo > 1e-4);
        // no secular drift: first and last ten periods cover the same range
        let n = qs.len() / 5;
        let range = |w: &[f64]| w.iter().fold((f64::MAX, f64::MIN), |(a, b), &q| (a.min(q), b.max(q)));
        let (a0, b0) = range(&qs[..n]);
        let (a1, b1) = range(&qs[qs.len() - n..]);
        assert!((a0 - a1).abs() < 1e-6 && (b0 - b1).abs() < 1e-6);
        let l0 = flat_observables(&tr.states[0], &p).unwrap().l;
        for st in &tr.states {
            assert!((flat_observables(st, &p).unwrap().l - l0).abs() < 1e-9);
        }
        assert!(tr.drift_within_contract());
    }

    #[test]
    fn uniform_samples_are_exact_times() {
        let (p, s) = kepler(1.0, 0.5);
        let tr = integrate_with(&p, &s, &IntegrateOptions::new(3.0, 1e-10).sampled(6)).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn collision_is_reported_as_leaving_the_domain() {
        let p = ModelParams::normalized(0.0, 1.0, PotentialFamily::attracting()).unwrap();
        let s = ReducedState::new(1.0, 0.0, 0.0, 0.0, 0.0);
        match integrate(&p, &s, 10.0, 1e-10) {
            Err(Error::LeftDomain { q, .. }) => assert!(q < 1e-3),
            other => panic!("expected LeftDomain, got {other:?}"),
        }
    }

    #[test]
    fn rejects_tolerance_outside_contract() {
        let (p, s) = kepler(1.0, 1.0);
        assert!(integrate(&p, &s, 1.0, 1e-3).is_err());
    }
}
