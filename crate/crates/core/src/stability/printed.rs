//! Closed-form expansion coefficients of the linearization at κ = 0,
//! L(q₀, μ, κ) = L₀ + κL₁ + O(κ²), with μ₂ = G = 1.

use nalgebra::Matrix5;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrintedFamily {
    /// Keplerian branch of V = −cot_κ q.
    Attracting,
    /// Perpendicular branch of V = κ cot_κ q.
    AttractingRepelling,
}

pub fn printed_l0(family: PrintedFamily, q0: f64, mu: f64) -> Matrix5<f64> {
    let m1 = mu + 1.0;
    let mut l = Matrix5::zeros();
    l[(0, 1)] = m1 / mu;
    l[(0, 2)] = -1.0 / mu;
    match family {
        PrintedFamily::Attracting => {
            let a = m1.sqrt() / (q0.powf(1.5) * mu.sqrt());
            l[(1, 0)] = -1.0 / q0.powi(3);
            l[(1, 3)] = -1.0 / (q0.powf(1.5) * (mu * m1).sqrt());
            l[(1, 4)] = 2.0 * m1.sqrt() / (q0.powf(2.5) * mu.sqrt());
            l[(2, 3)] = a;
            l[(3, 2)] = -a;
            l[(4, 2)] = -1.0 / (q0.sqrt() * (mu * m1).sqrt());
        }
        PrintedFamily::AttractingRepelling => {
            let d = mu.powf(1.5);
            l[(1, 0)] = -m1 * m1 / (mu * mu * q0.powi(5));
            l[(1, 3)] = -m1.sqrt() / (d * q0.powf(2.5));
            l[(1, 4)] = m1.powf(1.5) / (d * q0.powf(3.5));
            l[(2, 0)] = -m1.powi(3) / (mu * mu * q0.powi(5));
            l[(2, 3)] = -m1.powf(1.5) / (d * q0.powf(2.5));
            l[(2, 4)] = m1.powf(2.5) / (d * q0.powf(3.5));
            l[(4, 1)] = (m1 / (mu * q0)).powf(1.5);
            l[(4, 2)] = -m1.sqrt() / (mu * q0).powf(1.5);
        }
    }
    l
}

/// First-order coefficient for the attracting family.
pub fn printed_l1(q0: f64, mu: f64) -> Matrix5<f64> {
    let m1 = mu + 1.0;
    let smq = (mu * q0).sqrt();
    let mut l = Matrix5::zeros();
    l[(1, 0)] = -mu * (mu + 2.0) / (q0 * m1 * m1);
    l[(1, 3)] = -smq * (mu + 2.0) / (2.0 * m1.powf(2.5));
    l[(1, 4)] = m1.sqrt() / (3.0 * smq);
    l[(2, 0)] = 1.0 / (q0 * m1);
    l[(2, 3)] = smq * (mu - 2.0) / (2.0 * m1.powf(1.5));
    l[(2, 4)] = 1.0 / (mu * m1 * q0).sqrt();
    l[(3, 1)] = -(q0 / (mu * m1)).sqrt();
    l[(3, 2)] = -(q0 / mu).sqrt() * (mu * mu - 2.0 * mu - 2.0) / (2.0 * m1.powf(1.5));
    l[(4, 1)] = -q0.powf(1.5) / (m1.powf(1.5) * mu.sqrt());
    l[(4, 2)] = q0.powf(1.5) * (mu * mu + 2.0 * mu + 4.0) / (6.0 * mu.sqrt() * m1.powf(2.5));
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::Family;
    use crate::stability::jacobian_at;
    use nalgebra::Vector5;

    #[test]
    fn attracting_l0_entries_and_kernel() {
        let (q0, mu) = (2.5, 0.5);
        let l = printed_l0(PrintedFamily::Attracting, q0, mu);
        assert_eq!(l[(1, 0)], -1.0 / q0.powi(3));
        let v = Vector5::new(2.0 * (q0 * (mu + 1.0)).sqrt(), 0.0, 0.0, 0.0, mu.sqrt());
        assert!((l * v).amax() < 1e-15);
    }

    #[test]
    fn repelling_l0_is_nilpotent_of_rank_two() {
        let l = printed_l0(PrintedFamily::AttractingRepelling, 1.1, 0.5);
        assert!((l * l).amax() < 1e-13 * l.amax() * l.amax());
        let sv = l.singular_values();
        assert_eq!(sv.iter().filter(|&&s| s > 1e-10 * sv.max()).count(), 2);
    }

    #[test]
    fn numeric_jacobians_match_l0() {
        for (q0, mu) in [(2.5, 0.5), (1.0, 1.0), (1.7, 0.3)] {
            let re = Family::Attracting.member(0.0, q0, mu).unwrap();
            let d = jacobian_at(&re).unwrap() - printed_l0(PrintedFamily::Attracting, q0, mu);
            assert!(d.amax() < 1e-7, "attracting {q0} {mu}: {}", d.amax());
            let re = Family::AttractingRepelling.member(0.0, q0, mu).unwrap();
            let d = jacobian_at(&re).unwrap() - printed_l0(PrintedFamily::AttractingRepelling, q0, mu);
            assert!(d.amax() < 1e-7, "attracting-repelling {q0} {mu}: {}", d.amax());
        }
    }

    #[test]
    fn first_order_term_for_the_attracting_family() {
        let (q0, mu) = (2.5, 0.5);
        let base = printed_l0(PrintedFamily::Attracting, q0, mu);
        let l1 = printed_l1(q0, mu);
        let err = |k: f64| {
            let re = Family::Attracting.member(k, q0, mu).unwrap();
            (jacobian_at(&re).unwrap() - base - l1 * k).amax()
        };
        let (e3, e4) = (err(1e-3), err(1e-4));
        assert!(e3 < 1e-4, "{e3}");
        // quadratic remainder: a tenth of κ gives about a hundredth of the error
        assert!(e4 < e3 / 30.0, "{e3} {e4}");
    }
}
