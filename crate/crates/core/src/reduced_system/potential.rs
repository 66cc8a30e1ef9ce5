use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curvature_kernel::{cos_kappa, cot_kappa, sin_kappa, TOL_SINGULAR};
use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Built-in potential kinds, used for naming and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    AttractingCot,
    RepellingCot,
    CurvatureCot,
    Custom,
}

/// Sign of the interaction force at a separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interaction {
    Attracting,
    Repelling,
    None,
}

/// A user-supplied potential V(κ, q) with its q-derivatives.
#[derive(Clone)]
pub struct CustomPotential {
    pub name: String,
    pub v: ScalarFn,
    pub dv: ScalarFn,
    pub d2v: Option<ScalarFn>,
    /// V'(κ, q)/κ, when it has a finite limit at κ = 0.
    pub dv_over_kappa: Option<ScalarFn>,
}

impl CustomPotential {
    pub fn new(name: impl Into<String>, v: ScalarFn, dv: ScalarFn) -> Self {
        CustomPotential { name: name.into(), v, dv, d2v: None, dv_over_kappa: None }
    }

    pub fn with_second_derivative(mut self, d2v: ScalarFn) -> Self {
        self.d2v = Some(d2v);
        self
    }

    pub fn with_dv_over_kappa(mut self, f: ScalarFn) -> Self {
        self.dv_over_kappa = Some(f);
        self
    }
}

/// The interaction potential V_κ(q) with coupling G.
#[derive(Clone)]
pub enum PotentialFamily {
    /// −G cot_κ(q): attracting for every κ.
    AttractingCot { g: f64 },
    /// G cot_κ(q): repelling for every κ.
    RepellingCot { g: f64 },
    /// G κ cot_κ(q): repelling on the sphere, force-free in the plane.
    CurvatureCot { g: f64 },
    Custom(CustomPotential),
}

impl fmt::Debug for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialFamily::AttractingCot { g } => write!(f, "AttractingCot {{ g: {g} }}"),
            PotentialFamily::RepellingCot { g } => write!(f, "RepellingCot {{ g: {g} }}"),
            PotentialFamily::CurvatureCot { g } => write!(f, "CurvatureCot {{ g: {g} }}"),
            PotentialFamily::Custom(c) => write!(f, "Custom({:?})", c.name),
        }
    }
}

fn sin_checked(kappa: f64, q: f64) -> Result<f64> {
    let s = sin_kappa(kappa, q);
    if s.abs() < TOL_SINGULAR {
        Err(Error::SingularArgument { what: "sin_kappa(q) vanishes in the potential", value: q })
    } else {
        Ok(s)
    }
}

impl PotentialFamily {
    pub fn attracting() -> Self {
        PotentialFamily::AttractingCot { g: 1.0 }
    }

    pub fn repelling() -> Self {
        PotentialFamily::RepellingCot { g: 1.0 }
    }

    pub fn curvature() -> Self {
        PotentialFamily::CurvatureCot { g: 1.0 }
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            PotentialFamily::AttractingCot { .. } => PotentialKind::AttractingCot,
            PotentialFamily::RepellingCot { .. } => PotentialKind::RepellingCot,
            PotentialFamily::CurvatureCot { .. } => PotentialKind::CurvatureCot,
            PotentialFamily::Custom(_) => PotentialKind::Custom,
        }
    }

    /// Coupling G; custom potentials report 1.
    pub fn coupling(&self) -> f64 {
        match self {
            PotentialFamily::AttractingCot { g } | PotentialFamily::RepellingCot { g } | PotentialFamily::CurvatureCot { g } => *g,
            PotentialFamily::Custom(_) => 1.0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            PotentialFamily::AttractingCot { .. } => "attracting-cot".into(),
            PotentialFamily::RepellingCot { .. } => "repelling-cot".into(),
            PotentialFamily::CurvatureCot { .. } => "curvature-cot".into(),
            PotentialFamily::Custom(c) => c.name.clone(),
        }
    }

    pub fn value(&self, kappa: f64, q: f64) -> Result<f64> {
        Ok(match self {
            PotentialFamily::AttractingCot { g } => -g * cot_kappa(kappa, q)?,
            PotentialFamily::RepellingCot { g } => g * cot_kappa(kappa, q)?,
            PotentialFamily::CurvatureCot { g } => g * kappa * cot_kappa(kappa, q)?,
            PotentialFamily::Custom(c) => (c.v)(kappa, q),
        })
    }

    /// V'_κ(q). Positive means attracting.
    pub fn derivative(&self, kappa: f64, q: f64) -> Result<f64> {
        Ok(match self {
            PotentialFamily::AttractingCot { g } => g / sin_checked(kappa, q)?.powi(2),
            PotentialFamily::RepellingCot { g } => -g / sin_checked(kappa, q)?.powi(2),
            PotentialFamily::CurvatureCot { g } => -g * kappa / sin_checked(kappa, q)?.powi(2),
            PotentialFamily::Custom(c) => (c.dv)(kappa, q),
        })
    }

    pub fn second_derivative(&self, kappa: f64, q: f64) -> Result<f64> {
        let cot_term = |g: f64| -> Result<f64> {
            let s = sin_checked(kappa, q)?;
            Ok(2.0 * g * cos_kappa(kappa, q) / (s * s * s))
        };
        match self {
            PotentialFamily::AttractingCot { g } => cot_term(-g),
            PotentialFamily::RepellingCot { g } => cot_term(*g),
            PotentialFamily::CurvatureCot { g } => cot_term(g * kappa),
            PotentialFamily::Custom(c) => Ok(match &c.d2v {
                Some(d2) => d2(kappa, q),
                None => {
                    let h = 1e-5 * q.abs().max(1e-3);
                    ((c.dv)(kappa, q + h) - (c.dv)(kappa, q - h)) / (2.0 * h)
                }
            }),
        }
    }

    /// V'_κ(q)/κ where it stays finite as κ → 0, `None` otherwise.
    pub fn derivative_over_kappa(&self, kappa: f64, q: f64) -> Option<Result<f64>> {
        match self {
            PotentialFamily::CurvatureCot { g } => Some(sin_checked(kappa, q).map(|s| -g / (s * s))),
            PotentialFamily::Custom(CustomPotential { dv_over_kappa: Some(f), .. }) => Some(Ok(f(kappa, q))),
            _ if kappa != 0.0 => Some(self.derivative(kappa, q).map(|d| d / kappa)),
            _ => None,
        }
    }

    pub fn interaction(&self, kappa: f64, q: f64) -> Result<Interaction> {
        let d = self.derivative(kappa, q)?;
        Ok(if d > 0.0 {
            Interaction::Attracting
        } else if d < 0.0 {
            Interaction::Repelling
        } else {
            Interaction::None
        })
    }

    /// The potential of the antipodal dual problem, q ↦ V(π/√κ − q).
    pub fn reflected(&self, kappa: f64) -> Result<PotentialFamily> {
        if kappa <= 0.0 {
            return Err(Error::NegativeCurvature { kappa });
        }
        Ok(match self {
            PotentialFamily::AttractingCot { g } => PotentialFamily::RepellingCot { g: *g },
            PotentialFamily::RepellingCot { g } => PotentialFamily::AttractingCot { g: *g },
            PotentialFamily::CurvatureCot { g } => PotentialFamily::AttractingCot { g: g * kappa },
            PotentialFamily::Custom(c) => {
                let span = std::f64::consts::PI / kappa.sqrt();
                let (v, dv) = (c.v.clone(), c.dv.clone());
                let mut out = CustomPotential::new(
                    format!("{}-reflected", c.name),
                    Arc::new(move |k, q| v(k, span - q)),
                    Arc::new(move |k, q| -dv(k, span - q)),
                );
                if let Some(d2) = c.d2v.clone() {
                    out = out.with_second_derivative(Arc::new(move |k, q| d2(k, span - q)));
                }
                PotentialFamily::Custom(out)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn force_signs() {
        let q = 1.2;
        for &k in &[-1.0, 0.0, 0.5] {
            assert_eq!(PotentialFamily::attracting().interaction(k, q).unwrap(), Interaction::Attracting);
            assert_eq!(PotentialFamily::repelling().interaction(k, q).unwrap(), Interaction::Repelling);
        }
        let c = PotentialFamily::curvature();
        assert_eq!(c.interaction(0.5, q).unwrap(), Interaction::Repelling);
        assert_eq!(c.interaction(0.0, q).unwrap(), Interaction::None);
        assert_eq!(c.interaction(-0.5, q).unwrap(), Interaction::Attracting);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for pot in [PotentialFamily::attracting(), PotentialFamily::repelling(), PotentialFamily::CurvatureCot { g: 1.7 }] {
            for &(k, q) in &[(-0.6, 1.4), (0.0, 0.8), (0.9, 2.1)] {
                let fd = (pot.value(k, q + h).unwrap() - pot.value(k, q - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(pot.derivative(k, q).unwrap(), fd, epsilon = 1e-8, max_relative = 1e-8);
                let fd2 = (pot.derivative(k, q + h).unwrap() - pot.derivative(k, q - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(pot.second_derivative(k, q).unwrap(), fd2, epsilon = 1e-7, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn curvature_cot_over_kappa_is_regular() {
        let p = PotentialFamily::curvature();
        assert_relative_eq!(p.derivative_over_kappa(0.0, 1.1).unwrap().unwrap(), -1.0 / 1.21, epsilon = 1e-15);
        assert!(PotentialFamily::attracting().derivative_over_kappa(0.0, 1.1).is_none());
    }

    #[test]
    fn reflection_is_the_antipodal_potential() {
        let k = 0.8f64;
        let span = std::f64::consts::PI / k.sqrt();
        let custom = PotentialFamily::Custom(CustomPotential::new(
            "cubic",
            Arc::new(|_, q| q * q * q),
            Arc::new(|_, q| 3.0 * q * q),
        ));
        for pot in [PotentialFamily::attracting(), PotentialFamily::repelling(), PotentialFamily::curvature(), custom] {
            let dual = pot.reflected(k).unwrap();
            for &q in &[0.4, 1.3, 2.9] {
                assert_relative_eq!(dual.value(k, q).unwrap(), pot.value(k, span - q).unwrap(), epsilon = 1e-12);
                assert_relative_eq!(dual.derivative(k, q).unwrap(), -pot.derivative(k, span - q).unwrap(), epsilon = 1e-12);
            }
        }
        assert!(PotentialFamily::attracting().reflected(-1.0).is_err());
    }
}
