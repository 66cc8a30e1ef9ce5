use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduced_system::Interaction;

/// Separations where the sphere or hyperbolic families change stability.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CriticalAngles {
    pub q_star: Option<f64>,
    pub q_dagger: Option<f64>,
    pub alpha_star: Option<f64>,
    pub alpha_dagger: Option<f64>,
}

// Unit-curvature trigonometry, s = ±1.
fn sin_s(s: f64, x: f64) -> f64 {
    if s > 0.0 {
        x.sin()
    } else {
        x.sinh()
    }
}

fn cos_s(s: f64, x: f64) -> f64 {
    if s > 0.0 {
        x.cos()
    } else {
        x.cosh()
    }
}

fn asin_s(s: f64, x: f64) -> f64 {
    if s > 0.0 {
        x.clamp(-1.0, 1.0).asin()
    } else {
        x.asinh()
    }
}

/// cos_s 2a − 2 sin_s²a √(1 − s μ² sin_s² 2a).
fn transition(s: f64, mu: f64, a: f64) -> f64 {
    let s2 = sin_s(s, 2.0 * a);
    let root = (1.0 - s * mu * mu * s2 * s2).max(0.0).sqrt();
    let sa = sin_s(s, a);
    cos_s(s, 2.0 * a) - 2.0 * sa * sa * root
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > 1e-15 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root in (π/2, π) on the unit sphere: (α̂†, q̂†).
fn dagger_unit(mu: f64) -> Result<(f64, f64)> {
    let a = bisect(|a| transition(1.0, mu, a), FRAC_PI_2, PI)?;
    Ok((a, a - FRAC_PI_2 - 0.5 * asin_s(1.0, mu * (2.0 * a).sin())))
}

/// Root in (0, ∞) on the unit hyperbolic plane: (α̂*, q̂*).
fn star_unit(mu: f64) -> Result<(f64, f64)> {
    let f = |a: f64| transition(-1.0, mu, a);
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(Error::NoRoot("no sign change for alpha* below 64".into()));
        }
    }
    let a = bisect(f, 0.0, hi)?;
    Ok((a, a + 0.5 * asin_s(-1.0, mu * (2.0 * a).sinh())))
}

/// Critical separations for mass ratio μ ∈ (0, 1].
///
/// Repelling with κ > 0 gives q†; attracting with κ < 0 gives q*; attracting
/// with κ > 0 gives the antipodal image π/√κ − q†.
pub fn critical_angles(mu: f64, kappa: f64, family: Interaction) -> Result<CriticalAngles> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidParameter(format!("mu must lie in (0, 1], got {mu}")));
    }
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::NoRoot(format!("no critical angle at kappa = {kappa}")));
    }
    let r = kappa.abs().sqrt();
    let mut out = CriticalAngles::default();
    match (family, kappa > 0.0) {
        (Interaction::Repelling, true) => {
            let (a, q) = dagger_unit(mu)?;
            out.alpha_dagger = Some(a / r);
            out.q_dagger = Some(q / r);
        }
        (Interaction::Attracting, true) => {
            let (a, q) = dagger_unit(mu)?;
            out.alpha_star = Some((PI - a) / r);
            out.q_star = Some((PI - q) / r);
        }
        (Interaction::Attracting, false) => {
            let (a, q) = star_unit(mu)?;
            out.alpha_star = Some(a / r);
            out.q_star = Some(q / r);
        }
        (Interaction::Repelling, false) => {
            return Err(Error::NoRoot("repelling potentials have no RE for kappa < 0".into()));
        }
        (Interaction::None, _) => {
            return Err(Error::InvalidParameter("critical angles need an attracting or repelling family".into()));
        }
    }
    Ok(out)
}
