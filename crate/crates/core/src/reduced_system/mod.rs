//! The reduced Lie–Poisson system on (q, p, m₁, m₂, m₃).
//!
//! Coordinates are always ordered (q, p, m₁, m₂, m₃) in 5-vectors and
//! 5×5 matrices.

mod dop853_tableau;
mod integrate;
pub(crate) mod ode;
mod potential;
mod reconstruct;

pub use integrate::{integrate, integrate_with, IntegrateOptions, Trajectory, TrajectorySample};
pub use potential::{CustomPotential, Interaction, PotentialFamily, PotentialKind, ScalarFn};
pub use reconstruct::{reconstruct, Reconstruction};

use nalgebra::{Matrix3, Matrix4, Matrix5, Vector2, Vector3, Vector4, Vector5};
use serde::{Deserialize, Serialize};

use crate::curvature_kernel::{cos_kappa, sin_kappa, Curvature, TOL_SINGULAR};
use crate::error::{Error, Result};

/// A point of the reduced space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub q: f64,
    pub p: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl ReducedState {
    pub fn new(q: f64, p: f64, m1: f64, m2: f64, m3: f64) -> Self {
        ReducedState { q, p, m1, m2, m3 }
    }

    pub fn to_vector(&self) -> Vector5<f64> {
        Vector5::new(self.q, self.p, self.m1, self.m2, self.m3)
    }

    pub fn from_vector(v: &Vector5<f64>) -> Self {
        ReducedState::new(v[0], v[1], v[2], v[3], v[4])
    }

    pub fn m(&self) -> Vector3<f64> {
        Vector3::new(self.m1, self.m2, self.m3)
    }

    /// u = (p, m₁, m₂, m₃).
    pub fn u(&self) -> Vector4<f64> {
        Vector4::new(self.p, self.m1, self.m2, self.m3)
    }
}

/// Curvature, masses and potential.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub kappa: Curvature,
    pub mu1: f64,
    pub mu2: f64,
    pub potential: PotentialFamily,
}

impl ModelParams {
    pub fn new(kappa: f64, mu1: f64, mu2: f64, potential: PotentialFamily) -> Result<Self> {
        if !(mu1 > 0.0 && mu2 > 0.0 && mu1.is_finite() && mu2.is_finite()) {
            return Err(Error::InvalidParameter(format!("masses must be positive, got ({mu1}, {mu2})")));
        }
        if !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be finite, got {kappa}")));
        }
        Ok(ModelParams { kappa: Curvature::new(kappa), mu1, mu2, potential })
    }

    /// μ₂ = 1, μ₁ = μ.
    pub fn normalized(kappa: f64, mu: f64, potential: PotentialFamily) -> Result<Self> {
        ModelParams::new(kappa, mu, 1.0, potential)
    }

    pub fn k(&self) -> f64 {
        self.kappa.kappa
    }

    /// μ = μ₁/μ₂.
    pub fn mu(&self) -> f64 {
        self.mu1 / self.mu2
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        ModelParams { kappa: Curvature::new(kappa), ..self.clone() }
    }
}

/// (S, C) = (sin_κ q, cos_κ q) after checking q ∈ I_κ and S ≠ 0.
pub(crate) fn trig(kappa: f64, q: f64) -> Result<(f64, f64)> {
    Curvature::new(kappa).check(q)?;
    let s = sin_kappa(kappa, q);
    if s.abs() < TOL_SINGULAR {
        return Err(Error::SingularArgument { what: "sin_kappa(q) vanishes", value: q });
    }
    Ok((s, cos_kappa(kappa, q)))
}

/// Mass matrix in the velocities (q̇, ω₁, ω₂, ω₃).
pub fn mass_matrix(params: &ModelParams, q: f64) -> Result<Matrix4<f64>> {
    let (s, c) = trig(params.k(), q)?;
    let (m1, m2) = (params.mu1, params.mu2);
    #[rustfmt::skip]
    let m = Matrix4::new(
        m2, m2, 0.0, 0.0,
        m2, m1 + m2, 0.0, 0.0,
        0.0, 0.0, m1 + m2 * c * c, m2 * c * s,
        0.0, 0.0, m2 * c * s, m2 * s * s,
    );
    Ok(m)
}

/// Closed-form inverse of the mass matrix.
pub fn inverse_mass_matrix(params: &ModelParams, q: f64) -> Result<Matrix4<f64>> {
    let (s, c) = trig(params.k(), q)?;
    let (m1, m2) = (params.mu1, params.mu2);
    let d1 = m1 * m2;
    let d2 = m1 * m2 * s * s;
    #[rustfmt::skip]
    let m = Matrix4::new(
        (m1 + m2) / d1, -m2 / d1, 0.0, 0.0,
        -m2 / d1, m2 / d1, 0.0, 0.0,
        0.0, 0.0, m2 * s * s / d2, -m2 * c * s / d2,
        0.0, 0.0, -m2 * c * s / d2, (m1 + m2 * c * c) / d2,
    );
    Ok(m)
}

/// H = ½uᵀM⁻¹u + V_κ(q).
pub fn hamiltonian(params: &ModelParams, s: &ReducedState) -> Result<f64> {
    let minv = inverse_mass_matrix(params, s.q)?;
    let u = s.u();
    Ok(0.5 * u.dot(&(minv * u)) + params.potential.value(params.k(), s.q)?)
}

/// ∇H in (q, p, m₁, m₂, m₃).
pub fn gradient(params: &ModelParams, st: &ReducedState) -> Result<Vector5<f64>> {
    let k = params.k();
    let (s, c) = trig(k, st.q)?;
    let (mu1, mu2) = (params.mu1, params.mu2);
    let b = (mu1 + mu2) / (mu1 * mu2);
    let dv = params.potential.derivative(k, st.q)?;
    let (p, m1, m2, m3) = (st.p, st.m1, st.m2, st.m3);
    let hq = m2 * m3 / (mu1 * s * s) - b * c * m3 * m3 / (s * s * s) + dv;
    let hp = b * p - m1 / mu1;
    let hm1 = (m1 - p) / mu1;
    let hm2 = (m2 - c / s * m3) / mu1;
    let hm3 = -c / (mu1 * s) * m2 + (mu1 + mu2 * c * c) / (mu1 * mu2 * s * s) * m3;
    Ok(Vector5::new(hq, hp, hm1, hm2, hm3))
}

/// ∇²H in (q, p, m₁, m₂, m₃).
pub fn hessian(params: &ModelParams, st: &ReducedState) -> Result<Matrix5<f64>> {
    let k = params.k();
    let (s, c) = trig(k, st.q)?;
    let (mu1, mu2) = (params.mu1, params.mu2);
    let b = (mu1 + mu2) / (mu1 * mu2);
    let d2v = params.potential.second_derivative(k, st.q)?;
    let (m2, m3) = (st.m2, st.m3);
    let (s2, s3) = (s * s, s * s * s);
    let hqq = -2.0 * c * m2 * m3 / (mu1 * s3) + b * m3 * m3 * (k * s2 + 3.0 * c * c) / (s2 * s2) + d2v;
    let hq_m2 = m3 / (mu1 * s2);
    let hq_m3 = m2 / (mu1 * s2) - 2.0 * b * c * m3 / s3;
    let mut h = Matrix5::zeros();
    h[(0, 0)] = hqq;
    h[(0, 3)] = hq_m2;
    h[(0, 4)] = hq_m3;
    h[(1, 1)] = b;
    h[(1, 2)] = -1.0 / mu1;
    h[(2, 2)] = 1.0 / mu1;
    h[(3, 3)] = 1.0 / mu1;
    h[(3, 4)] = -c / (mu1 * s);
    h[(4, 4)] = (mu1 + mu2 * c * c) / (mu1 * mu2 * s2);
    for i in 0..5 {
        for j in 0..i {
            h[(i, j)] = h[(j, i)];
        }
    }
    Ok(h)
}

/// C = m₁² + m₂² + κm₃².
pub fn casimir(kappa: f64, m: &Vector3<f64>) -> f64 {
    m[0] * m[0] + m[1] * m[1] + kappa * m[2] * m[2]
}

pub fn casimir_gradient(kappa: f64, s: &ReducedState) -> Vector5<f64> {
    Vector5::new(0.0, 0.0, 2.0 * s.m1, 2.0 * s.m2, 2.0 * kappa * s.m3)
}

pub fn casimir_hessian(kappa: f64) -> Matrix5<f64> {
    Matrix5::from_diagonal(&Vector5::new(0.0, 0.0, 2.0, 2.0, 2.0 * kappa))
}

fn cross_matrix(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a[2], a[1], a[2], 0.0, -a[0], -a[1], a[0], 0.0)
}

/// K_κ m.
pub fn weighted_momentum(kappa: f64, s: &ReducedState) -> Vector3<f64> {
    Vector3::new(s.m1, s.m2, kappa * s.m3)
}

/// Poisson tensor B with {f, g} = ∇fᵀ B ∇g.
pub fn poisson_tensor(kappa: f64, s: &ReducedState) -> Matrix5<f64> {
    let mut b = Matrix5::zeros();
    b[(0, 1)] = 1.0;
    b[(1, 0)] = -1.0;
    let block = cross_matrix(&weighted_momentum(kappa, s));
    b.fixed_view_mut::<3, 3>(2, 2).copy_from(&block);
    b
}

/// {f, g} from gradients.
pub fn bracket(kappa: f64, s: &ReducedState, df: &Vector5<f64>, dg: &Vector5<f64>) -> f64 {
    df.dot(&(poisson_tensor(kappa, s) * dg))
}

/// (H_p, −H_q, (K_κm) × H_m).
pub fn eom_rhs(params: &ModelParams, s: &ReducedState) -> Result<Vector5<f64>> {
    let g = gradient(params, s)?;
    let hm = Vector3::new(g[2], g[3], g[4]);
    let mdot = weighted_momentum(params.k(), s).cross(&hm);
    Ok(Vector5::new(g[1], -g[0], mdot[0], mdot[1], mdot[2]))
}

/// Exact Jacobian of `eom_rhs`.
pub fn jacobian_analytic(params: &ModelParams, s: &ReducedState) -> Result<Matrix5<f64>> {
    let k = params.k();
    let g = gradient(params, s)?;
    let mut j = poisson_tensor(k, s) * hessian(params, s)?;
    let hm = Vector3::new(g[2], g[3], g[4]);
    let weights = [1.0, 1.0, k];
    for (c, w) in weights.iter().enumerate() {
        let mut e = Vector3::zeros();
        e[c] = *w;
        let col = e.cross(&hm);
        for r in 0..3 {
            j[(2 + r, 2 + c)] += col[r];
        }
    }
    Ok(j)
}

/// Body velocities (q̇, ω₁, ω₂, ω₃) = M⁻¹u.
pub fn body_velocities(params: &ModelParams, s: &ReducedState) -> Result<Vector4<f64>> {
    Ok(inverse_mass_matrix(params, s.q)? * s.u())
}

/// Observables available only in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatObservables {
    /// Angular momentum about the centre of mass.
    pub l: f64,
    /// ‖p‖² of the total linear momentum.
    pub p_total_sq: f64,
}

pub fn flat_observables(s: &ReducedState, params: &ModelParams) -> Result<FlatObservables> {
    if params.k() != 0.0 {
        return Err(Error::NonzeroCurvature { kappa: params.k() });
    }
    Ok(FlatObservables {
        l: s.m3 - params.mu2 * s.q * s.m2 / (params.mu1 + params.mu2),
        p_total_sq: s.m1 * s.m1 + s.m2 * s.m2,
    })
}

fn cross2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Reduced coordinates of a planar configuration with positions xⱼ and momenta pⱼ.
pub fn flat_reduce(x1: &Vector2<f64>, x2: &Vector2<f64>, p1: &Vector2<f64>, p2: &Vector2<f64>) -> Result<ReducedState> {
    let r = x2 - x1;
    let q = r.norm();
    if q <= 0.0 {
        return Err(Error::OutOfInterval { kappa: 0.0, q });
    }
    let pt = p1 + p2;
    Ok(ReducedState::new(q, r.dot(p2) / q, r.dot(&pt) / q, cross2(&r, &pt) / q, cross2(&r, p2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_state(q: f64) -> ReducedState {
        ReducedState::new(q, 0.31, -0.72, 0.45, 1.13)
    }

    #[test]
    fn mass_matrix_and_inverse() {
        let p = ModelParams::normalized(0.2, 0.5, PotentialFamily::attracting()).unwrap();
        let m = mass_matrix(&p, 1.1).unwrap();
        let mi = inverse_mass_matrix(&p, 1.1).unwrap();
        assert!((m * mi - Matrix4::identity()).amax() < 1e-12);
        let flat = ModelParams::normalized(0.0, 0.5, PotentialFamily::attracting()).unwrap();
        let m0 = mass_matrix(&flat, 2.0).unwrap();
        assert_eq!(m0[(2, 2)], 1.5);
        assert_eq!(m0[(2, 3)], 2.0);
        assert_eq!(m0[(3, 3)], 4.0);
        let hyp = ModelParams::normalized(-0.3, 1.0, PotentialFamily::attracting()).unwrap();
        let eig = mass_matrix(&hyp, 2.0).unwrap().symmetric_eigenvalues();
        assert!(eig.min() > 0.0);
        assert!(matches!(mass_matrix(&p, -1.0), Err(Error::OutOfInterval { .. })));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for &(k, mu, q) in &[(0.7, 0.5, 1.3), (-0.6, 0.8, 2.2), (0.0, 1.0, 0.9)] {
            for pot in [PotentialFamily::attracting(), PotentialFamily::curvature()] {
                let p = ModelParams::new(k, mu, 1.3, pot).unwrap();
                let s = sample_state(q);
                let g = gradient(&p, &s).unwrap();
                for i in 0..5 {
                    let h = 1e-6;
                    let mut a = s.to_vector();
                    let mut b = s.to_vector();
                    a[i] += h;
                    b[i] -= h;
                    let fd = (hamiltonian(&p, &ReducedState::from_vector(&a)).unwrap()
                        - hamiltonian(&p, &ReducedState::from_vector(&b)).unwrap())
                        / (2.0 * h);
                    assert_relative_eq!(g[i], fd, epsilon = 1e-7, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let p = ModelParams::new(0.4, 0.6, 1.0, PotentialFamily::repelling()).unwrap();
        let s = sample_state(1.7);
        let h = hessian(&p, &s).unwrap();
        for i in 0..5 {
            let d = 1e-6;
            let mut a = s.to_vector();
            let mut b = s.to_vector();
            a[i] += d;
            b[i] -= d;
            let col = (gradient(&p, &ReducedState::from_vector(&a)).unwrap() - gradient(&p, &ReducedState::from_vector(&b)).unwrap()) / (2.0 * d);
            assert!((col - h.column(i)).amax() < 1e-7);
        }
    }

    #[test]
    fn hamiltonian_basics() {
        let p = ModelParams::normalized(0.3, 0.7, PotentialFamily::attracting()).unwrap();
        let zero = ReducedState::new(1.2, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(hamiltonian(&p, &zero).unwrap(), p.potential.value(0.3, 1.2).unwrap());
        let s = sample_state(1.2);
        let r = ReducedState::new(s.q, -s.p, -s.m1, -s.m2, -s.m3);
        assert_relative_eq!(hamiltonian(&p, &s).unwrap(), hamiltonian(&p, &r).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn equations_of_motion_are_the_bracket() {
        let p = ModelParams::normalized(-0.6, 0.4, PotentialFamily::attracting()).unwrap();
        let s = sample_state(1.5);
        let f = eom_rhs(&p, &s).unwrap();
        let via_tensor = poisson_tensor(-0.6, &s) * gradient(&p, &s).unwrap();
        assert!((f - via_tensor).amax() < 1e-12);
        let b = poisson_tensor(-0.6, &s);
        assert!((b + b.transpose()).amax() == 0.0);
        assert!((b * casimir_gradient(-0.6, &s)).amax() < 1e-14);
        assert_eq!(b[(0, 1)], 1.0);
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let p = ModelParams::normalized(0.35, 0.5, PotentialFamily::curvature()).unwrap();
        let s = sample_state(1.1);
        let j = jacobian_analytic(&p, &s).unwrap();
        for i in 0..5 {
            let d = 1e-6;
            let mut a = s.to_vector();
            let mut b = s.to_vector();
            a[i] += d;
            b[i] -= d;
            let col = (eom_rhs(&p, &ReducedState::from_vector(&a)).unwrap() - eom_rhs(&p, &ReducedState::from_vector(&b)).unwrap()) / (2.0 * d);
            assert!((col - j.column(i)).amax() < 1e-7);
        }
    }

    #[test]
    fn time_reversal_pattern() {
        let p = ModelParams::normalized(0.2, 0.9, PotentialFamily::attracting()).unwrap();
        let s = sample_state(1.4);
        let r = ReducedState::new(s.q, -s.p, -s.m1, -s.m2, -s.m3);
        let f = eom_rhs(&p, &s).unwrap();
        let fr = eom_rhs(&p, &r).unwrap();
        let pattern = Vector5::new(-1.0, 1.0, 1.0, 1.0, 1.0);
        assert!((fr - f.component_mul(&pattern)).amax() < 1e-14);
    }

    #[test]
    fn flat_force_free_momentum_equation() {
        let p = ModelParams::normalized(0.0, 0.5, PotentialFamily::curvature()).unwrap();
        let s = sample_state(1.4);
        let kinetic_only = ModelParams::normalized(0.0, 0.5, PotentialFamily::RepellingCot { g: 0.0 }).unwrap();
        assert_eq!(eom_rhs(&p, &s).unwrap()[1], eom_rhs(&kinetic_only, &s).unwrap()[1]);
    }

    #[test]
    fn flat_relations_agree_with_body_velocities() {
        // Build a planar configuration at g = identity from (q, ω) and check
        // that the planar relations return the reduced momenta u = M v.
        let (mu1, mu2) = (0.6, 1.0);
        let p = ModelParams::new(0.0, mu1, mu2, PotentialFamily::attracting()).unwrap();
        let (q, qd, w1, w2, w3) = (1.7, 0.3, -0.4, 0.9, 0.25);
        let u = mass_matrix(&p, q).unwrap() * Vector4::new(qd, w1, w2, w3);
        let p1 = Vector2::new(-w2, w1) * mu1;
        let p2 = Vector2::new(-q * w3 - w2, w1 + qd) * mu2;
        let s = flat_reduce(&Vector2::zeros(), &Vector2::new(0.0, q), &p1, &p2).unwrap();
        assert_relative_eq!(s.q, q);
        assert!((s.u() - u).amax() < 1e-14);
        let c = casimir(0.0, &s.m());
        assert_relative_eq!(c, (p1 + p2).norm_squared(), epsilon = 1e-14);
        let fo = flat_observables(&s, &p).unwrap();
        assert_relative_eq!(fo.p_total_sq, c, epsilon = 1e-14);
        assert!(flat_observables(&s, &p.with_kappa(0.1)).is_err());
    }

    #[test]
    fn casimir_examples() {
        assert_eq!(casimir(0.0, &Vector3::new(0.0, 0.0, 1.0)), 0.0);
        let s = sample_state(1.0);
        let dc = casimir_gradient(0.8, &s);
        for i in 2..5 {
            let mut e = Vector5::zeros();
            e[i] = 1.0;
            assert!(bracket(0.8, &s, &dc, &e).abs() < 1e-15);
        }
    }
}
