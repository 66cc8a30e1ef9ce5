use serde::{Deserialize, Serialize};

use super::{classify_re, REBranch, RelEquilibrium};
use crate::error::{Error, Result};
use crate::reduced_system::{Interaction, ModelParams, PotentialFamily};

/// Which root of the biquadratic in m₃ an equilibrium sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ABranch {
    Plus,
    Minus,
}

impl RelEquilibrium {
    /// The A± root this equilibrium was built from, if any.
    pub fn a_branch(&self) -> Option<ABranch> {
        use REBranch::*;
        let attracting = || {
            self.params.potential.interaction(self.params.k(), self.state.q).ok() == Some(Interaction::Attracting)
        };
        Some(match self.branch {
            Hyperbolic | PerpendicularFlat | ObtuseAttracting | AcuteRepelling => ABranch::Plus,
            Elliptic | Keplerian | AcuteAttracting | ObtuseRepelling => ABranch::Minus,
            IsoscelesAcute => {
                if attracting() {
                    ABranch::Minus
                } else {
                    ABranch::Plus
                }
            }
            IsoscelesObtuse => {
                if attracting() {
                    ABranch::Plus
                } else {
                    ABranch::Minus
                }
            }
            RightAngledAttracting | RightAngledRepelling | ZeroForce => return None,
        })
    }
}

/// The two κ-families that pass smoothly through the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// V = −cot_κ q along A₋: elliptic, Keplerian, acute attracting.
    Attracting,
    /// V = κ cot_κ q along A₊: hyperbolic, perpendicular, acute repelling.
    AttractingRepelling,
}

impl Family {
    pub fn potential(self) -> PotentialFamily {
        match self {
            Family::Attracting => PotentialFamily::attracting(),
            Family::AttractingRepelling => PotentialFamily::curvature(),
        }
    }

    pub fn a_branch(self) -> ABranch {
        match self {
            Family::Attracting => ABranch::Minus,
            Family::AttractingRepelling => ABranch::Plus,
        }
    }

    pub fn params(self, kappa: f64, mu: f64) -> Result<ModelParams> {
        ModelParams::normalized(kappa, mu, self.potential())
    }

    /// The family member at (κ, q, μ).
    pub fn member(self, kappa: f64, q: f64, mu: f64) -> Result<RelEquilibrium> {
        select(&self.params(kappa, mu)?, q, self.a_branch())
    }
}

/// The equilibrium at q built from the requested A-root.
pub fn select(params: &ModelParams, q: f64, which: ABranch) -> Result<RelEquilibrium> {
    classify_re(params, q)?
        .equilibria
        .into_iter()
        .find(|re| re.a_branch() == Some(which))
        .ok_or_else(|| Error::WrongBranch(format!("no A{which:?} equilibrium at kappa = {}, q = {q}", params.k())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_pass_through_the_plane() {
        let labels: Vec<REBranch> =
            [-0.2, 0.0, 0.2].iter().map(|&k| Family::Attracting.member(k, 2.5, 0.5).unwrap().branch).collect();
        assert_eq!(labels, vec![REBranch::Elliptic, REBranch::Keplerian, REBranch::AcuteAttracting]);
        let labels: Vec<REBranch> = [-0.2, 0.0, 0.2]
            .iter()
            .map(|&k| Family::AttractingRepelling.member(k, 1.1, 0.5).unwrap().branch)
            .collect();
        assert_eq!(labels, vec![REBranch::Hyperbolic, REBranch::PerpendicularFlat, REBranch::AcuteRepelling]);
    }

    #[test]
    fn missing_branch_is_reported() {
        // past the right angle the attracting family has only the A₊ root
        assert!(matches!(Family::Attracting.member(1.0, 2.0, 0.5), Err(Error::WrongBranch(_))));
    }
}
