//! Relative equilibria: closed-form seeds, Newton polishing, labels.

mod critical;
mod family;
mod sphere;

pub use critical::{critical_angles, CriticalAngles};
pub use family::{select, ABranch, Family};
pub use sphere::{antipodal_dual, kinematic_angles, sphere_angles, SphereData};

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::{Matrix5x4, Vector4};
use serde::{Deserialize, Serialize};

use crate::curvature_kernel::{cot_kappa, TOL_SINGULAR};
use crate::error::{Error, Result};
use crate::reduced_system::{casimir, eom_rhs, jacobian_analytic, trig, Interaction, ModelParams, ReducedState};

/// |q√κ − π/2| below this selects the right-angled family.
pub const RIGHT_ANGLE_TOL: f64 = 1e-9;
/// Target residual of `refine_re`.
pub const REFINE_TOL: f64 = 1e-12;
/// Residual every returned equilibrium is certified against.
pub const CERTIFY_TOL: f64 = 1e-10;
const REFINE_MAX_ITER: usize = 50;
/// Masses count as equal when |μ − 1| is below this.
const EQUAL_MASS_TOL: f64 = 1e-12;
const ZERO_FORCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum REBranch {
    Hyperbolic,
    Elliptic,
    AcuteAttracting,
    ObtuseAttracting,
    AcuteRepelling,
    ObtuseRepelling,
    RightAngledAttracting,
    RightAngledRepelling,
    Keplerian,
    PerpendicularFlat,
    ZeroForce,
    IsoscelesAcute,
    IsoscelesObtuse,
}

impl fmt::Display for REBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl REBranch {
    /// Label after the antipodal map: acute ↔ obtuse, attracting ↔ repelling.
    pub fn dual(self) -> Option<REBranch> {
        use REBranch::*;
        Some(match self {
            AcuteAttracting => ObtuseRepelling,
            ObtuseAttracting => AcuteRepelling,
            AcuteRepelling => ObtuseAttracting,
            ObtuseRepelling => AcuteAttracting,
            RightAngledAttracting => RightAngledRepelling,
            RightAngledRepelling => RightAngledAttracting,
            IsoscelesAcute => IsoscelesObtuse,
            IsoscelesObtuse => IsoscelesAcute,
            _ => return None,
        })
    }

    pub fn is_sphere(self) -> bool {
        use REBranch::*;
        matches!(
            self,
            AcuteAttracting
                | ObtuseAttracting
                | AcuteRepelling
                | ObtuseRepelling
                | RightAngledAttracting
                | RightAngledRepelling
                | IsoscelesAcute
                | IsoscelesObtuse
        )
    }
}

/// A certified relative equilibrium.
#[derive(Debug, Clone)]
pub struct RelEquilibrium {
    pub state: ReducedState,
    pub branch: REBranch,
    pub params: ModelParams,
    pub sphere_data: Option<SphereData>,
}

/// Serializable summary of a relative equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RERecord {
    pub kappa: f64,
    pub mu: f64,
    pub q: f64,
    pub branch: REBranch,
    pub state: ReducedState,
    pub residual: f64,
    pub casimir: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_data: Option<SphereData>,
}

impl RelEquilibrium {
    pub fn residual(&self) -> f64 {
        eom_rhs(&self.params, &self.state).map_or(f64::INFINITY, |r| r.norm())
    }

    pub fn casimir(&self) -> f64 {
        casimir(self.params.k(), &self.state.m())
    }

    pub fn record(&self) -> RERecord {
        RERecord {
            kappa: self.params.k(),
            mu: self.params.mu(),
            q: self.state.q,
            branch: self.branch,
            state: self.state,
            residual: self.residual(),
            casimir: self.casimir(),
            sphere_data: self.sphere_data,
        }
    }
}

/// Equal masses at q√κ = π/2: RE for every m₃, parametrized here by the
/// smaller axis angle θ ∈ (0, π/4].
#[derive(Debug, Clone)]
pub struct RightAngledFamily {
    pub params: ModelParams,
    pub q: f64,
    pub branch: REBranch,
}

impl RightAngledFamily {
    /// m₃ of the member whose first particle subtends θ with the axis.
    pub fn m3_of_theta(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!("theta must lie in (0, pi/2), got {theta}")));
        }
        let k = self.params.k();
        let dv = self.params.potential.derivative(k, self.q)?;
        Ok((self.params.mu2 * dv.abs() / (k.powf(1.5) * theta.tan())).sqrt())
    }

    pub fn member(&self, theta: f64) -> Result<RelEquilibrium> {
        self.member_m3(self.m3_of_theta(theta)?)
    }

    pub fn member_m3(&self, m3: f64) -> Result<RelEquilibrium> {
        let m2 = m2_of_m3(&self.params, self.q, m3)?;
        let state = refine_re(&self.params, &ReducedState::new(self.q, 0.0, 0.0, m2, m3))?;
        finish(&self.params, state, self.branch)
    }
}

/// Output of `classify_re`.
#[derive(Debug, Clone)]
pub struct ReClassification {
    pub equilibria: Vec<RelEquilibrium>,
    pub right_angled: Option<RightAngledFamily>,
}

impl ReClassification {
    pub fn labels(&self) -> Vec<REBranch> {
        let mut out: Vec<REBranch> = self.equilibria.iter().map(|r| r.branch).collect();
        if let Some(f) = &self.right_angled {
            out.push(f.branch);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.equilibria.is_empty() && self.right_angled.is_none()
    }

    pub fn find(&self, branch: REBranch) -> Option<&RelEquilibrium> {
        self.equilibria.iter().find(|r| r.branch == branch)
    }
}

fn n_plus(mu: f64, c: f64) -> f64 {
    let d = (4.0 * mu * c * c + (mu - 1.0).powi(2)).sqrt();
    2.0 * mu * c * c + 1.0 - mu + d
}

fn nonzero_cos(q: f64, c: f64) -> Result<()> {
    if c.abs() < TOL_SINGULAR {
        Err(Error::SingularArgument { what: "cos_kappa(q) vanishes in A", value: q })
    } else {
        Ok(())
    }
}

/// A₋ in the rationalized form 2μμ₂CS³V′/N₊, regular at κ = 0.
pub fn a_minus(params: &ModelParams, q: f64) -> Result<f64> {
    let k = params.k();
    let (s, c) = trig(k, q)?;
    nonzero_cos(q, c)?;
    let mu = params.mu();
    let dv = params.potential.derivative(k, q)?;
    Ok(2.0 * mu * params.mu2 * c * s.powi(3) * dv / n_plus(mu, c))
}

/// A₊ = −μ₂S(V′/κ)N₊/(2μC); finite at κ = 0 only when V′/κ is.
pub fn a_plus(params: &ModelParams, q: f64) -> Result<f64> {
    let k = params.k();
    let (s, c) = trig(k, q)?;
    nonzero_cos(q, c)?;
    let mu = params.mu();
    let dv_k = params
        .potential
        .derivative_over_kappa(k, q)
        .ok_or(Error::SingularArgument { what: "A+ diverges at kappa = 0 for this potential", value: k })??;
    Ok(-params.mu2 * s * dv_k * n_plus(mu, c) / (2.0 * mu * c))
}

/// (A₊, A₋), the two roots of the biquadratic in m₃.
pub fn a_plus_minus(params: &ModelParams, q: f64) -> Result<(f64, f64)> {
    Ok((a_plus(params, q)?, a_minus(params, q)?))
}

/// m₂ from ∂H/∂q = 0 at p = m₁ = 0.
pub fn m2_of_m3(params: &ModelParams, q: f64, m3: f64) -> Result<f64> {
    let k = params.k();
    let (s, c) = trig(k, q)?;
    if m3.abs() < TOL_SINGULAR {
        return Err(Error::SingularArgument { what: "m3 = 0 leaves m2 undefined", value: m3 });
    }
    let dv = params.potential.derivative(k, q)?;
    let (mu1, mu2) = (params.mu1, params.mu2);
    Ok(((mu1 + mu2) * c * m3 * m3 - mu1 * mu2 * s.powi(3) * dv) / (mu2 * s * m3))
}

fn residual_norm(params: &ModelParams, s: &ReducedState) -> Result<f64> {
    Ok(eom_rhs(params, s)?.norm())
}

/// Gauss–Newton on eom_rhs = 0 over (p, m₁, m₂, m₃) at fixed q.
///
/// Five equations, four unknowns, rank at most four: steps use the SVD
/// pseudo-inverse and are halved until the residual drops.
pub fn refine_re(params: &ModelParams, initial: &ReducedState) -> Result<ReducedState> {
    if initial.m3.abs() < TOL_SINGULAR {
        return Err(Error::SingularArgument { what: "m3 = 0 leaves m2 undefined", value: initial.m3 });
    }
    let mut s = *initial;
    let mut r = residual_norm(params, &s)?;
    for it in 0..REFINE_MAX_ITER {
        let tol = REFINE_TOL * s.u().norm().max(1.0);
        if r < tol {
            return Ok(s);
        }
        let f = eom_rhs(params, &s)?;
        let j = jacobian_analytic(params, &s)?;
        let ju: Matrix5x4<f64> = j.fixed_columns::<4>(1).into_owned();
        let svd = ju.svd(true, true);
        let eps = 1e-13 * svd.singular_values.max();
        let du: Vector4<f64> = svd.solve(&(-f), eps).map_err(|_| Error::NoConvergence { iterations: it, residual: r })?;
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-3 {
            let u = s.u() + du * lambda;
            let trial = ReducedState::new(s.q, u[0], u[1], u[2], u[3]);
            if let Ok(rt) = residual_norm(params, &trial) {
                if rt < r {
                    s = trial;
                    r = rt;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            // Rounding floor reached before the target.
            if r < CERTIFY_TOL * s.u().norm().max(1.0) {
                return Ok(s);
            }
            return Err(Error::NoConvergence { iterations: it, residual: r });
        }
    }
    if r < REFINE_TOL * s.u().norm().max(1.0) {
        Ok(s)
    } else {
        Err(Error::NoConvergence { iterations: REFINE_MAX_ITER, residual: r })
    }
}

fn finish(params: &ModelParams, state: ReducedState, branch: REBranch) -> Result<RelEquilibrium> {
    let mut re = RelEquilibrium { state, branch, params: params.clone(), sphere_data: None };
    let r = re.residual();
    if !(r < CERTIFY_TOL * state.u().norm().max(1.0)) {
        return Err(Error::NoConvergence { iterations: 0, residual: r });
    }
    if params.k() > 0.0 {
        re.sphere_data = Some(sphere_angles(&re)?);
    }
    Ok(re)
}

fn equilibrium_from_a(params: &ModelParams, q: f64, a: f64, branch: REBranch) -> Result<Option<RelEquilibrium>> {
    if !(a > 0.0) {
        return Ok(None);
    }
    let m3 = a.sqrt();
    let m2 = m2_of_m3(params, q, m3)?;
    let state = refine_re(params, &ReducedState::new(q, 0.0, 0.0, m2, m3))?;
    finish(params, state, branch).map(Some)
}

fn equal_masses(params: &ModelParams) -> bool {
    (params.mu() - 1.0).abs() < EQUAL_MASS_TOL
}

/// All relative equilibria at separation q, with m₃ > 0.
pub fn classify_re(params: &ModelParams, q: f64) -> Result<ReClassification> {
    let k = params.k();
    params.kappa.check(q)?;
    let interaction = params.potential.interaction(k, q)?;
    let mut out = ReClassification { equilibria: vec![], right_angled: None };
    let mut push = |a: f64, b: REBranch| -> Result<()> {
        if let Some(re) = equilibrium_from_a(params, q, a, b)? {
            out.equilibria.push(re);
        }
        Ok(())
    };
    use REBranch::*;
    if k < 0.0 {
        if interaction == Interaction::Attracting {
            push(a_plus(params, q)?, Hyperbolic)?;
            push(a_minus(params, q)?, Elliptic)?;
        }
        return Ok(out);
    }
    if k == 0.0 {
        match interaction {
            Interaction::Attracting => push(a_minus(params, q)?, Keplerian)?,
            Interaction::None => {
                let m3 = match a_plus(params, q) {
                    Ok(a) if a > 0.0 => a.sqrt(),
                    _ => 1.0,
                };
                out.equilibria.push(zero_force_re(params, q, 0.0, m3)?);
            }
            Interaction::Repelling => {}
        }
        return Ok(out);
    }
    let qh = q * k.sqrt();
    if (qh - FRAC_PI_2).abs() < RIGHT_ANGLE_TOL {
        if interaction == Interaction::None {
            return Ok(out);
        }
        if !equal_masses(params) {
            return Err(Error::RightAngleUnequalMasses { mu: params.mu() });
        }
        let branch = if interaction == Interaction::Attracting { RightAngledAttracting } else { RightAngledRepelling };
        out.right_angled = Some(RightAngledFamily { params: params.clone(), q, branch });
        return Ok(out);
    }
    let acute = qh < FRAC_PI_2;
    let iso = equal_masses(params);
    let label = |attracting: bool| match (iso, acute, attracting) {
        (true, true, _) => IsoscelesAcute,
        (true, false, _) => IsoscelesObtuse,
        (false, true, true) => AcuteAttracting,
        (false, false, true) => ObtuseAttracting,
        (false, true, false) => AcuteRepelling,
        (false, false, false) => ObtuseRepelling,
    };
    match (interaction, acute) {
        (Interaction::Attracting, true) => push(a_minus(params, q)?, label(true))?,
        (Interaction::Attracting, false) => push(a_plus(params, q)?, label(true))?,
        (Interaction::Repelling, true) => push(a_plus(params, q)?, label(false))?,
        (Interaction::Repelling, false) => push(a_minus(params, q)?, label(false))?,
        (Interaction::None, _) => {}
    }
    Ok(out)
}

/// Force-free RE with caller-chosen m₁, m₃: p = μ₂m₁/(μ₁+μ₂), m₂ = (1+μ)cot_κ(q₀)m₃.
pub fn zero_force_re(params: &ModelParams, q0: f64, m1: f64, m3: f64) -> Result<RelEquilibrium> {
    let k = params.k();
    params.kappa.check(q0)?;
    let force = params.potential.derivative(k, q0)?;
    if force.abs() > ZERO_FORCE_TOL {
        return Err(Error::ForceNotZero { force });
    }
    let (mu1, mu2) = (params.mu1, params.mu2);
    let p = mu2 * m1 / (mu1 + mu2);
    let m2 = (mu1 + mu2) / mu2 * cot_kappa(k, q0)? * m3;
    let branch = if k == 0.0 && m1 == 0.0 { REBranch::PerpendicularFlat } else { REBranch::ZeroForce };
    let re = RelEquilibrium { state: ReducedState::new(q0, p, m1, m2, m3), branch, params: params.clone(), sphere_data: None };
    let r = re.residual();
    if !(r < CERTIFY_TOL * re.state.u().norm().max(1.0)) {
        return Err(Error::NoConvergence { iterations: 0, residual: r });
    }
    Ok(re)
}
