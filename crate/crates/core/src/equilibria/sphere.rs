use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{classify_re, RelEquilibrium, RIGHT_ANGLE_TOL};
use crate::error::{Error, Result};
use crate::reduced_system::{body_velocities, Interaction, ModelParams};

/// Angles on the unit sphere after rescaling by √κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereData {
    /// Angle between the rotation axis and particle 1.
    pub theta1: f64,
    pub theta2: f64,
    /// Physical rotation rate.
    pub omega: f64,
    /// ½μ₁ sin 2θ₁.
    pub zeta: f64,
    /// θ₁ for attracting RE, π − θ₁ for repelling ones.
    pub alpha: f64,
}

/// Axis angles from the body angular velocity Ω = (√κω₁, √κω₂, ω₃).
pub fn sphere_angles(re: &RelEquilibrium) -> Result<SphereData> {
    let k = re.params.k();
    if k <= 0.0 {
        return Err(Error::NegativeCurvature { kappa: k });
    }
    if !re.branch.is_sphere() {
        return Err(Error::WrongBranch(format!("{} is not a sphere relative equilibrium", re.branch)));
    }
    let rk = k.sqrt();
    let v = body_velocities(&re.params, &re.state)?;
    let axis = Vector3::new(rk * v[1], rk * v[2], v[3]);
    let n = axis.norm();
    if n == 0.0 {
        return Err(Error::WrongBranch("zero angular velocity".into()));
    }
    let axis = axis / n;
    let qh = rk * re.state.q;
    let p1 = Vector3::new(0.0, 0.0, -1.0);
    let p2 = Vector3::new(0.0, qh.sin(), -qh.cos());
    let angle = |p: &Vector3<f64>| axis.dot(p).abs().min(1.0).acos();
    let (theta1, theta2) = (angle(&p1), angle(&p2));
    let zeta = 0.5 * re.params.mu1 * (2.0 * theta1).sin();
    let dv = re.params.potential.derivative(k, re.state.q)?;
    let omega = (rk * dv.abs() / zeta).sqrt();
    let alpha = match re.params.potential.interaction(k, re.state.q)? {
        Interaction::Repelling => PI - theta1,
        _ => theta1,
    };
    Ok(SphereData { theta1, theta2, omega, zeta, alpha })
}

/// Solves μ₁ sin 2θ₁ = μ₂ sin 2θ₂ with θ₁ + θ₂ = q√κ (attracting) or
/// π − q√κ (repelling) by bisection.
pub fn kinematic_angles(params: &ModelParams, q: f64) -> Result<(f64, f64)> {
    let k = params.k();
    if k <= 0.0 {
        return Err(Error::NegativeCurvature { kappa: k });
    }
    params.kappa.check(q)?;
    let qh = q * k.sqrt();
    if (qh - FRAC_PI_2).abs() < RIGHT_ANGLE_TOL {
        return Err(Error::WrongBranch("axis angles are not determined at the right angle".into()));
    }
    let sum = match params.potential.interaction(k, q)? {
        Interaction::Attracting => qh,
        Interaction::Repelling => PI - qh,
        Interaction::None => return Err(Error::WrongBranch("no force, no sphere RE".into())),
    };
    let f = |t1: f64| params.mu1 * (2.0 * t1).sin() - params.mu2 * (2.0 * (sum - t1)).sin();
    let (mut lo, mut hi) = ((sum - FRAC_PI_2).max(0.0), sum.min(FRAC_PI_2));
    let flo = f(lo);
    if flo * f(hi) > 0.0 {
        return Err(Error::NoRoot(format!("no axis angle bracket for q = {q}")));
    }
    while hi - lo > 1e-15 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t1 = 0.5 * (lo + hi);
    Ok((t1, sum - t1))
}

/// The RE of the antipodally reflected problem at separation π/√κ − q.
pub fn antipodal_dual(re: &RelEquilibrium) -> Result<RelEquilibrium> {
    let k = re.params.k();
    if k <= 0.0 {
        return Err(Error::NegativeCurvature { kappa: k });
    }
    let branch = re.branch.dual().ok_or_else(|| Error::WrongBranch(format!("{} has no antipodal dual", re.branch)))?;
    let params = ModelParams { potential: re.params.potential.reflected(k)?, ..re.params.clone() };
    let q = PI / k.sqrt() - re.state.q;
    let found = classify_re(&params, q)?;
    if let Some(fam) = &found.right_angled {
        let theta = sphere_angles(re)?.theta1;
        return fam.member(theta);
    }
    found
        .find(branch)
        .cloned()
        .ok_or_else(|| Error::WrongBranch(format!("dual problem has no {branch} at q = {q}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::REBranch;
    use crate::reduced_system::{reconstruct, integrate_with, IntegrateOptions, PotentialFamily};
    use crate::symmetry::GroupElement;
    use approx::assert_relative_eq;

    fn repelling(k: f64, mu: f64) -> ModelParams {
        ModelParams::normalized(k, mu, PotentialFamily::repelling()).unwrap()
    }

    #[test]
    fn smaller_mass_closer_to_axis_in_acute_repelling() {
        let re = classify_re(&repelling(1.0, 0.75), PI / 3.0).unwrap().equilibria[0].clone();
        assert_eq!(re.branch, REBranch::AcuteRepelling);
        let sd = re.sphere_data.unwrap();
        assert!(sd.theta1 < sd.theta2);
        assert_relative_eq!(sd.theta1 + sd.theta2, 2.0 * PI / 3.0, epsilon = 1e-10);
        assert!((0.75 * (2.0 * sd.theta1).sin() - (2.0 * sd.theta2).sin()).abs() < 1e-12);
        let (t1, t2) = kinematic_angles(&re.params, re.state.q).unwrap();
        assert_relative_eq!(t1, sd.theta1, epsilon = 1e-10);
        assert_relative_eq!(t2, sd.theta2, epsilon = 1e-10);
    }

    #[test]
    fn equal_masses_subtend_equal_angles() {
        for &q in &[0.7, 2.2] {
            let re = classify_re(&repelling(1.0, 1.0), q).unwrap().equilibria[0].clone();
            let sd = re.sphere_data.unwrap();
            assert_relative_eq!(sd.theta1, sd.theta2, epsilon = 1e-10);
        }
    }

    #[test]
    fn attracting_angles_add_to_separation() {
        let k = 0.4;
        let p = ModelParams::normalized(k, 0.6, PotentialFamily::attracting()).unwrap();
        for &q in &[1.0, 3.5] {
            let re = classify_re(&p, q).unwrap().equilibria[0].clone();
            let sd = re.sphere_data.unwrap();
            assert_relative_eq!(sd.theta1 + sd.theta2, q * k.sqrt(), epsilon = 1e-10);
            assert_eq!(sd.alpha, sd.theta1);
            let (t1, _) = kinematic_angles(&p, q).unwrap();
            assert_relative_eq!(t1, sd.theta1, epsilon = 1e-10);
        }
    }

    #[test]
    fn omega_matches_the_reconstructed_rotation() {
        let k = 0.5;
        let p = repelling(k, 0.75);
        let re = classify_re(&p, 1.3).unwrap().equilibria[0].clone();
        let sd = re.sphere_data.unwrap();
        let v = body_velocities(&p, &re.state).unwrap();
        let rate = (k * (v[1] * v[1] + v[2] * v[2]) + v[3] * v[3]).sqrt();
        assert_relative_eq!(sd.omega, rate, max_relative = 1e-8);
        // one full turn returns the particles to their start
        let period = 2.0 * PI / sd.omega;
        let tr = integrate_with(&p, &re.state, &IntegrateOptions::new(period, 1e-12).sampled(4)).unwrap();
        let rec = reconstruct(&p, &tr, &GroupElement::identity()).unwrap();
        let (a, b) = (rec.x2[0].to_vector(), rec.x2.last().unwrap().to_vector());
        assert!((a - b).norm() < 1e-8);
        assert!((rec.x2[2].to_vector() - a).norm() > 0.1);
    }

    #[test]
    fn duality_swaps_acute_and_obtuse() {
        let re = classify_re(&repelling(1.0, 0.75), PI / 3.0).unwrap().equilibria[0].clone();
        let dual = antipodal_dual(&re).unwrap();
        assert_eq!(dual.branch, REBranch::ObtuseAttracting);
        assert_relative_eq!(dual.state.q, 2.0 * PI / 3.0, epsilon = 1e-14);
        let (a, b) = (re.sphere_data.unwrap(), dual.sphere_data.unwrap());
        assert_relative_eq!(a.theta1, b.theta1, epsilon = 1e-9);
        assert_relative_eq!(a.theta2, b.theta2, epsilon = 1e-9);
        assert_relative_eq!(a.omega, b.omega, max_relative = 1e-9);
        let back = antipodal_dual(&dual).unwrap();
        assert_eq!(back.branch, re.branch);
        assert!((back.state.q - re.state.q).abs() < 1e-12);
        assert!((back.state.to_vector() - re.state.to_vector()).amax() < 1e-9);
    }

    #[test]
    fn right_angled_dual_keeps_theta() {
        let p = repelling(1.0, 1.0);
        let fam = classify_re(&p, FRAC_PI_2).unwrap().right_angled.unwrap();
        let re = fam.member(0.3).unwrap();
        let dual = antipodal_dual(&re).unwrap();
        assert_eq!(dual.branch, REBranch::RightAngledAttracting);
        assert_relative_eq!(dual.sphere_data.unwrap().theta1, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn rejects_non_sphere_input() {
        let p = ModelParams::normalized(-0.3, 0.5, PotentialFamily::attracting()).unwrap();
        let re = classify_re(&p, 1.0).unwrap().equilibria[0].clone();
        assert!(matches!(sphere_angles(&re), Err(Error::NegativeCurvature { .. })));
        assert!(matches!(antipodal_dual(&re), Err(Error::NegativeCurvature { .. })));
    }
}
