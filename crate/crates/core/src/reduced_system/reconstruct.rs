use nalgebra::{Matrix4, SVector};
use serde::{Deserialize, Serialize};

use super::ode::{solve, Output};
use super::{body_velocities, eom_rhs, ModelParams, ReducedState, Trajectory};
use crate::curvature_kernel::{geodesic_distance, point_pair, EmbeddedPoint};
use crate::error::{Error, Result};
use crate::symmetry::{act_unchecked, homogeneous, validate, AlgebraElement, GroupElement};

/// Full-space paths X₁(t) = g(t)·x₁ and X₂(t) = g(t)·x₂(q(t)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub times: Vec<f64>,
    pub x1: Vec<EmbeddedPoint>,
    pub x2: Vec<EmbeddedPoint>,
    /// Largest |d(X₁, X₂) − q| over the samples.
    pub distance_error: f64,
    #[serde(skip)]
    pub groups: Vec<GroupElement>,
}

fn pack(s: &ReducedState, g: &Matrix4<f64>) -> SVector<f64, 17> {
    let mut y = SVector::<f64, 17>::zeros();
    y.fixed_rows_mut::<5>(0).copy_from(&s.to_vector());
    for r in 0..3 {
        for c in 0..4 {
            y[5 + 4 * r + c] = g[(r, c)];
        }
    }
    y
}

fn unpack(y: &SVector<f64, 17>) -> (ReducedState, Matrix4<f64>) {
    let s = ReducedState::from_vector(&y.fixed_rows::<5>(0).into_owned());
    let mut g = Matrix4::identity();
    for r in 0..3 {
        for c in 0..4 {
            g[(r, c)] = y[5 + 4 * r + c];
        }
    }
    (s, g)
}

const RECONSTRUCT_TOL: f64 = 1e-12;

/// Integrates the reduced state together with ġ = g·homogeneous(ω) and
/// places both particles at the trajectory's sample times.
pub fn reconstruct(params: &ModelParams, traj: &Trajectory, g0: &GroupElement) -> Result<Reconstruction> {
    let k = params.k();
    validate(k, g0, 1e-10)?;
    if traj.is_empty() {
        return Ok(Reconstruction { times: vec![], x1: vec![], x2: vec![], distance_error: 0.0, groups: vec![] });
    }
    let t0 = traj.times[0];
    let t_end = *traj.times.last().unwrap();
    let rhs = |_t: f64, y: &SVector<f64, 17>| -> Result<SVector<f64, 17>> {
        let (s, g) = unpack(y);
        let f = eom_rhs(params, &s)?;
        let v = body_velocities(params, &s)?;
        let gd = g * homogeneous(k, &AlgebraElement::new(v[1], v[2], v[3]));
        Ok(pack(&ReducedState::from_vector(&f), &gd))
    };
    let y0 = pack(&traj.states[0], &g0.h);
    let states = if t_end > t0 {
        // g must stay on the group to the surface tolerance, which is tighter
        // than what the reduced trajectory alone needs
        let tol = traj.tol.min(RECONSTRUCT_TOL);
        let sol = solve(&rhs, t0, y0, t_end, tol, tol, Output::At(&traj.times), &|_, _| Ok(()))?;
        sol.states
    } else {
        vec![y0]
    };
    let mut out = Reconstruction { times: traj.times.clone(), x1: vec![], x2: vec![], distance_error: 0.0, groups: vec![] };
    for (y, s) in states.iter().zip(&traj.states) {
        let (_, g) = unpack(y);
        let g = GroupElement { h: g };
        let (a, b) = point_pair(k, s.q)?;
        let (xa, xb) = (act_unchecked(&g, &a), act_unchecked(&g, &b));
        let d = geodesic_distance(k, &xa, &xb)?;
        out.distance_error = out.distance_error.max((d - s.q).abs());
        out.x1.push(xa);
        out.x2.push(xb);
        out.groups.push(g);
    }
    if out.x1.len() != traj.len() {
        return Err(Error::StepFailure { t: t_end, h: 0.0 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature_kernel::{cos_kappa, sin_kappa};
    use crate::reduced_system::{integrate_with, IntegrateOptions, PotentialFamily};
    use crate::symmetry::exp_group;
    use nalgebra::Vector3;

    fn attracting_re(k: f64, mu: f64, q: f64) -> (ModelParams, ReducedState) {
        let params = ModelParams::normalized(k, mu, PotentialFamily::attracting()).unwrap();
        let (s, c) = (sin_kappa(k, q), cos_kappa(k, q));
        let dv = params.potential.derivative(k, q).unwrap();
        let d = (4.0 * mu * c * c + (mu - 1.0).powi(2)).sqrt();
        let m3 = (2.0 * mu * c * s.powi(3) * dv / (2.0 * mu * c * c + 1.0 - mu + d)).sqrt();
        let m2 = ((mu + 1.0) * c * m3 * m3 - mu * s.powi(3) * dv) / (s * m3);
        (params, ReducedState::new(q, 0.0, 0.0, m2, m3))
    }

    #[test]
    fn relative_equilibrium_follows_one_parameter_subgroup() {
        let (params, s) = attracting_re(0.2, 0.5, 1.1);
        let tr = integrate_with(&params, &s, &IntegrateOptions::new(8.0, 1e-12).sampled(16)).unwrap();
        let g0 = exp_group(0.2, &AlgebraElement::new(0.1, -0.3, 0.7), 1.0);
        let rec = reconstruct(&params, &tr, &g0).unwrap();
        assert!(rec.distance_error < 1e-9);
        let v = body_velocities(&params, &s).unwrap();
        let xi = AlgebraElement::new(v[1], v[2], v[3]);
        for (t, g) in rec.times.iter().zip(&rec.groups) {
            let expected = g0.compose(&exp_group(0.2, &xi, *t));
            assert!((g.h - expected.h).amax() < 1e-8, "t = {t}");
        }
        for p in rec.x1.iter().chain(&rec.x2) {
            p.check_on_surface(0.2).unwrap();
        }
    }

    #[test]
    fn kepler_circles_share_the_centre_of_mass() {
        let (mu, q) = (0.5, 1.0);
        let params = ModelParams::normalized(0.0, mu, PotentialFamily::attracting()).unwrap();
        let s = ReducedState::new(q, 0.0, 0.0, 0.0, (mu * q / (1.0 + mu)).sqrt());
        let tr = integrate_with(&params, &s, &IntegrateOptions::new(10.0, 1e-12).sampled(40)).unwrap();
        let rec = reconstruct(&params, &tr, &GroupElement::identity()).unwrap();
        let com = |a: &EmbeddedPoint, b: &EmbeddedPoint| (a.to_vector() * mu + b.to_vector()) / (1.0 + mu);
        let c0 = com(&rec.x1[0], &rec.x2[0]);
        let r1 = (rec.x1[0].to_vector() - c0).xy().norm();
        let r2 = (rec.x2[0].to_vector() - c0).xy().norm();
        for (a, b) in rec.x1.iter().zip(&rec.x2) {
            assert!((com(a, b) - c0).xy().norm() < 1e-9);
            assert!(((a.to_vector() - c0).xy().norm() - r1).abs() < 1e-9);
            assert!(((b.to_vector() - c0).xy().norm() - r2).abs() < 1e-9);
        }
        assert!((mu * r1 - r2).abs() < 1e-9);
        assert!(rec.distance_error < 1e-9);
    }

    #[test]
    fn force_free_flat_motion_is_parallel_lines() {
        // m1 = p = 0 and m2 = 2·m3/q in the plane: both particles translate.
        let params = ModelParams::normalized(0.0, 1.0, PotentialFamily::curvature()).unwrap();
        let q = 1.3;
        let s = ReducedState::new(q, 0.0, 0.0, 2.0 * 0.4 / q, 0.4);
        let tr = integrate_with(&params, &s, &IntegrateOptions::new(5.0, 1e-12).sampled(10)).unwrap();
        let rec = reconstruct(&params, &tr, &GroupElement::identity()).unwrap();
        let dir1 = rec.x1.last().unwrap().to_vector() - rec.x1[0].to_vector();
        let dir2 = rec.x2.last().unwrap().to_vector() - rec.x2[0].to_vector();
        assert!(dir1.xy().norm() > 0.1);
        let cross = |u: &Vector3<f64>, v: &Vector3<f64>| u[0] * v[1] - u[1] * v[0];
        assert!(cross(&dir1, &dir2).abs() < 1e-8);
        for (a, b) in rec.x1.iter().zip(&rec.x2) {
            assert!(cross(&(a.to_vector() - rec.x1[0].to_vector()), &dir1).abs() < 1e-8);
            assert!(cross(&(b.to_vector() - rec.x2[0].to_vector()), &dir2).abs() < 1e-8);
        }
    }
}
