use serde::{Deserialize, Serialize};

use super::{characteristic_polynomial, jacobian_at, spectrum, Eigenvalue, Tolerances};
use crate::equilibria::Family;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSample {
    pub kappa: f64,
    pub eigenvalues: Vec<Eigenvalue>,
    /// det(xI − J), index = power of x.
    pub charpoly: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub name: String,
    pub fitted: f64,
    pub printed: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub family: Family,
    pub q0: f64,
    pub mu: f64,
    pub samples: Vec<AsymptoticSample>,
    pub checks: Vec<CoefficientCheck>,
}

impl AsymptoticReport {
    pub fn check(&self, name: &str) -> Option<&CoefficientCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Least-squares slope through the origin.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let den: f64 = xs.iter().map(|x| x * x).sum();
    num / den
}

fn check(name: &str, fitted: f64, printed: f64, scale: f64) -> CoefficientCheck {
    CoefficientCheck { name: name.into(), fitted, printed, rel_error: (fitted - printed).abs() / scale }
}

/// Fits the leading small-κ behaviour of the family's spectrum and compares
/// it with the closed-form expansions.
///
/// Attracting: the two imaginary pairs ω₀ + cⱼκ and the κ-coefficient of the
/// x³ term of the characteristic polynomial. Attracting-repelling: the b and
/// c coefficients of x(x⁴ + bx² + c) and the two pair magnitudes over √|κ|.
pub fn asymptotic_check(family: Family, q0: f64, mu: f64, kappa_samples: &[f64]) -> Result<AsymptoticReport> {
    let mut samples = Vec::new();
    for &k in kappa_samples.iter().filter(|k| **k != 0.0) {
        let re = family.member(k, q0, mu)?;
        let j = jacobian_at(&re)?;
        let rep = spectrum(&j, &Tolerances::default());
        samples.push(AsymptoticSample { kappa: k, eigenvalues: rep.eigenvalues, charpoly: characteristic_polynomial(&j) });
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter("asymptotic fit needs a nonzero kappa sample".into()));
    }
    let ks: Vec<f64> = samples.iter().map(|s| s.kappa).collect();
    let m1 = mu + 1.0;
    let mut checks = Vec::new();
    match family {
        Family::Attracting => {
            let w0 = (m1 / (mu * q0.powi(3))).sqrt();
            let mut sums = Vec::new();
            let mut diffs = Vec::new();
            for s in &samples {
                let mut w: Vec<f64> = s.eigenvalues.iter().filter(|e| e.im > 0.0).map(|e| e.im).collect();
                if w.len() != 2 {
                    return Err(Error::WrongBranch(format!("expected two imaginary pairs at kappa = {}", s.kappa)));
                }
                w.sort_by(f64::total_cmp);
                sums.push(w[0] + w[1] - 2.0 * w0);
                diffs.push(w[1] - w[0]);
            }
            let abs_k: Vec<f64> = ks.iter().map(|k| k.abs()).collect();
            let (s, d) = (slope(&ks, &sums), slope(&abs_k, &diffs));
            let c2 = (q0 / (m1.powi(3) * mu)).sqrt() * (1.0 + mu * mu);
            checks.push(check("first_pair_slope", 0.5 * (s - d), 0.0, c2));
            checks.push(check("second_pair_slope", 0.5 * (s + d), c2, c2));
            let quartic: Vec<f64> = samples.iter().map(|s| s.charpoly[3] - 2.0 * w0 * w0).collect();
            let printed = 2.0 * (mu * mu + 1.0) / (m1 * mu * q0);
            checks.push(check("charpoly_kappa_coefficient", slope(&ks, &quartic), printed, printed));
        }
        Family::AttractingRepelling => {
            let b: Vec<f64> = samples.iter().map(|s| s.charpoly[3]).collect();
            let printed_b = 2.0 * m1 / (mu * q0.powi(3));
            checks.push(check("b_kappa_coefficient", slope(&ks, &b), printed_b, printed_b));
            let k2: Vec<f64> = ks.iter().map(|k| k * k).collect();
            let c: Vec<f64> = samples.iter().map(|s| s.charpoly[1]).collect();
            let printed_c = -3.0 * m1 * m1 / (mu * mu * q0.powi(6));
            checks.push(check("c_kappa2_coefficient", slope(&k2, &c), printed_c, printed_c.abs()));
            let roots: Vec<f64> = ks.iter().map(|k| k.abs().sqrt()).collect();
            let mut small = Vec::new();
            let mut large = Vec::new();
            for s in &samples {
                let mut mods: Vec<f64> = s.eigenvalues.iter().map(|e| e.norm()).collect();
                mods.sort_by(f64::total_cmp);
                small.push(0.5 * (mods[1] + mods[2]));
                large.push(0.5 * (mods[3] + mods[4]));
            }
            let b0 = (2.0 * m1 / (mu * q0.powi(3))).sqrt();
            checks.push(check("b0_pair", slope(&roots, &small), b0, b0));
            checks.push(check("b0_sqrt3_pair", slope(&roots, &large), b0 * 3f64.sqrt(), b0 * 3f64.sqrt()));
        }
    }
    Ok(AsymptoticReport { family, q0, mu, samples, checks })
}
