//! Linear stability of relative equilibria.

mod asymptotics;
mod printed;

pub use asymptotics::{asymptotic_check, AsymptoticReport, AsymptoticSample, CoefficientCheck};
pub use printed::{printed_l0, printed_l1, PrintedFamily};

use nalgebra::{Complex, Matrix4, Matrix5, SMatrix, Vector5};
use serde::{Deserialize, Serialize};

use crate::equilibria::{RelEquilibrium, CERTIFY_TOL};
use crate::error::{Error, Result};
use crate::reduced_system::{casimir_gradient, casimir_hessian, eom_rhs, gradient, poisson_tensor, ModelParams, ReducedState};

/// Relative thresholds, scaled by the Frobenius norm of the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// |Re λ| below re_rel·‖J‖ counts as zero real part.
    pub re_rel: f64,
    /// |λ| below zero_rel·‖J‖ counts as a zero eigenvalue.
    pub zero_rel: f64,
    /// ‖J²‖ below nilpotent_rel·‖J‖² marks the linearization nilpotent. The
    /// eigenvalues of a perturbed nilpotent matrix scale like the square root
    /// of the perturbation, so they cannot decide this on their own.
    #[serde(default = "default_nilpotent_rel")]
    pub nilpotent_rel: f64,
}

fn default_nilpotent_rel() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { re_rel: 1e-6, zero_rel: 1e-7, nilpotent_rel: default_nilpotent_rel() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    Elliptic,
    LinearlyUnstable,
    DegenerateNilpotent,
    Mixed,
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl From<Complex<f64>> for Eigenvalue {
    fn from(c: Complex<f64>) -> Self {
        Eigenvalue { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    #[serde(skip, default = "Matrix5::zeros")]
    pub jacobian: Matrix5<f64>,
    /// Sorted by imaginary part, then real part.
    pub eigenvalues: Vec<Eigenvalue>,
    pub zero_count: usize,
    pub classification: StabilityClass,
    pub tolerances: Tolerances,
    /// Absolute thresholds actually used: (re, zero).
    pub thresholds: (f64, f64),
}

impl SpectrumReport {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Positive imaginary parts of the eigenvalues classed imaginary, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let (re_tol, zero_tol) = self.thresholds;
        let mut w: Vec<f64> = self
            .eigenvalues
            .iter()
            .filter(|e| e.re.abs() < re_tol && e.im > zero_tol)
            .map(|e| e.im)
            .collect();
        w.sort_by(f64::total_cmp);
        w
    }
}

/// Richardson-extrapolated central difference of f, three levels (error O(h⁶)).
pub(crate) fn richardson_jacobian(
    f: impl Fn(&Vector5<f64>) -> Result<Vector5<f64>>,
    x: &Vector5<f64>,
    steps: &Vector5<f64>,
) -> Result<Matrix5<f64>> {
    let mut j = Matrix5::zeros();
    for i in 0..5 {
        let diff = |h: f64| -> Result<Vector5<f64>> {
            let mut a = *x;
            let mut b = *x;
            a[i] += h;
            b[i] -= h;
            Ok((f(&a)? - f(&b)?) / (2.0 * h))
        };
        let h = steps[i];
        let (d1, d2, d4) = (diff(h)?, diff(h / 2.0)?, diff(h / 4.0)?);
        let r1 = (d2 * 4.0 - d1) / 3.0;
        let r2 = (d4 * 4.0 - d2) / 3.0;
        j.set_column(i, &((r2 * 16.0 - r1) / 15.0));
    }
    Ok(j)
}

fn fd_steps(params: &ModelParams, s: &ReducedState) -> Vector5<f64> {
    let x = s.to_vector();
    let floor = 0.1 * x.norm().max(1e-2);
    let mut h = x.map(|v| 4e-3 * v.abs().max(floor));
    h[0] = h[0].min(0.2 * params.kappa.boundary_distance(s.q));
    h
}

/// Numeric Jacobian of the reduced vector field at any state.
pub fn jacobian_fd(params: &ModelParams, s: &ReducedState) -> Result<Matrix5<f64>> {
    let f = |x: &Vector5<f64>| eom_rhs(params, &ReducedState::from_vector(x));
    richardson_jacobian(f, &s.to_vector(), &fd_steps(params, s))
}

/// Numeric Jacobian at a certified equilibrium.
pub fn jacobian_at(re: &RelEquilibrium) -> Result<Matrix5<f64>> {
    let r = re.residual();
    if !(r < CERTIFY_TOL * re.state.u().norm().max(1.0)) {
        return Err(Error::NoConvergence { iterations: 0, residual: r });
    }
    jacobian_fd(&re.params, &re.state)
}

fn eigen_order(a: &Eigenvalue, b: &Eigenvalue) -> std::cmp::Ordering {
    a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re))
}

/// Eigenvalues and the stability verdict of a linearization.
pub fn spectrum(j: &Matrix5<f64>, tol: &Tolerances) -> SpectrumReport {
    let norm = j.norm();
    let (re_tol, zero_tol) = (tol.re_rel * norm, tol.zero_rel * norm);
    let mut eigenvalues: Vec<Eigenvalue> = j.complex_eigenvalues().iter().map(|c| Eigenvalue::from(*c)).collect();
    eigenvalues.sort_by(eigen_order);
    let zero = |e: &Eigenvalue| e.norm() < zero_tol || norm == 0.0;
    let zero_count = eigenvalues.iter().filter(|e| zero(e)).count();
    let unstable = eigenvalues.iter().any(|e| e.re > re_tol);
    let imaginary = |e: &Eigenvalue| e.re.abs() < re_tol && e.im.abs() > zero_tol;
    let nilpotent = (j * j).norm() <= tol.nilpotent_rel * norm * norm;
    let classification = if nilpotent || zero_count == eigenvalues.len() {
        StabilityClass::DegenerateNilpotent
    } else if unstable {
        StabilityClass::LinearlyUnstable
    } else if eigenvalues.iter().all(|e| zero(e) || imaginary(e)) {
        StabilityClass::Elliptic
    } else {
        StabilityClass::Mixed
    };
    SpectrumReport { jacobian: *j, eigenvalues, zero_count, classification, tolerances: *tol, thresholds: (re_tol, zero_tol) }
}

/// Jacobian, eigenvalues and verdict for an equilibrium with default tolerances.
pub fn analyze(re: &RelEquilibrium) -> Result<SpectrumReport> {
    Ok(spectrum(&jacobian_at(re)?, &Tolerances::default()))
}

/// Coefficients of det(xI − J), index = power of x (Faddeev–LeVerrier).
pub fn characteristic_polynomial(j: &Matrix5<f64>) -> [f64; 6] {
    let n = 5;
    let mut c = [0.0; 6];
    c[n] = 1.0;
    let mut m = Matrix5::zeros();
    for k in 1..=n {
        m = j * m + Matrix5::identity() * c[n - k + 1];
        c[n - k] = -(j * m).trace() / k as f64;
    }
    c
}

/// Sign pattern of the Hessian restricted to the symplectic leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafSignature {
    /// "+" entries first, e.g. "++--".
    pub signs: String,
    /// Descending.
    pub eigenvalues_on_leaf: [f64; 4],
}

impl LeafSignature {
    pub fn positive(&self) -> usize {
        self.signs.chars().filter(|&c| c == '+').count()
    }
}

/// Signature of ∇²(H − λC) on the leaf through the equilibrium, where λ is
/// the multiplier making the equilibrium critical for H − λC.
pub fn hessian_on_leaf(re: &RelEquilibrium) -> Result<LeafSignature> {
    let params = &re.params;
    let k = params.k();
    let s = &re.state;
    let b = poisson_tensor(k, s);
    let svd = b.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let mut idx: Vec<usize> = (0..5).filter(|&i| svd.singular_values[i] > 1e-10 * smax).collect();
    if idx.len() != 4 {
        return Err(Error::RankDeficientLeaf { rank: idx.len() });
    }
    idx.sort_by(|&a, &c| svd.singular_values[c].total_cmp(&svd.singular_values[a]));
    let basis = SMatrix::<f64, 5, 4>::from_fn(|r, c| u[(r, idx[c])]);

    let grad = |x: &Vector5<f64>| gradient(params, &ReducedState::from_vector(x));
    let h = richardson_jacobian(grad, &s.to_vector(), &fd_steps(params, s))?;
    let h = (h + h.transpose()) * 0.5;
    let dh = gradient(params, s)?;
    let dc = casimir_gradient(k, s);
    let lambda = dh.dot(&dc) / dc.norm_squared();
    let reduced: Matrix4<f64> = basis.transpose() * (h - casimir_hessian(k) * lambda) * basis;
    let eig = reduced.symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let signs = ev.iter().map(|&v| if v > 0.0 { '+' } else { '-' }).collect();
    Ok(LeafSignature { signs, eigenvalues_on_leaf: [ev[0], ev[1], ev[2], ev[3]] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{classify_re, Family, REBranch};
    use crate::reduced_system::{casimir_gradient, hessian, jacobian_analytic, PotentialFamily};
    use std::f64::consts::PI;

    #[test]
    fn numeric_jacobian_matches_analytic() {
        let params = ModelParams::normalized(-0.4, 0.7, PotentialFamily::attracting()).unwrap();
        let s = ReducedState::new(1.3, 0.2, -0.1, 0.4, 0.8);
        let d = jacobian_fd(&params, &s).unwrap() - jacobian_analytic(&params, &s).unwrap();
        assert!(d.amax() < 1e-9, "{}", d.amax());
    }

    #[test]
    fn kepler_spectrum_has_double_pairs() {
        for (q0, mu) in [(1.0f64, 1.0f64), (2.5, 0.5)] {
            let re = Family::Attracting.member(0.0, q0, mu).unwrap();
            let rep = analyze(&re).unwrap();
            let w0 = ((mu + 1.0) / (mu * q0.powi(3))).sqrt();
            let w = rep.frequencies();
            assert_eq!(w.len(), 2);
            for wi in w {
                assert!((wi - w0).abs() < 1e-6 * w0);
            }
            assert_eq!(rep.zero_count, 1);
            assert_eq!(rep.classification, StabilityClass::Elliptic);
        }
    }

    #[test]
    fn casimir_is_a_left_null_vector() {
        let re = Family::AttractingRepelling.member(0.0, 1.1, 0.5).unwrap();
        let j = jacobian_at(&re).unwrap();
        let dc = casimir_gradient(0.0, &re.state);
        assert!((j.transpose() * dc).amax() < 1e-8);
        let re = Family::Attracting.member(0.15, 2.5, 0.5).unwrap();
        let j = jacobian_at(&re).unwrap();
        assert!((j.transpose() * casimir_gradient(0.15, &re.state)).amax() < 1e-8);
    }

    #[test]
    fn nilpotent_at_the_flat_perpendicular_equilibrium() {
        let re = Family::AttractingRepelling.member(0.0, 1.1, 0.5).unwrap();
        let rep = analyze(&re).unwrap();
        assert!(rep.eigenvalues.iter().all(|e| e.norm() < 1e-6));
        assert_eq!(rep.classification, StabilityClass::DegenerateNilpotent);
    }

    #[test]
    fn spectrum_classes() {
        let mut j = Matrix5::zeros();
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -4.0;
        assert_eq!(spectrum(&j, &Tolerances::default()).classification, StabilityClass::Elliptic);
        j[(1, 0)] = 4.0;
        assert_eq!(spectrum(&j, &Tolerances::default()).classification, StabilityClass::LinearlyUnstable);
        assert_eq!(spectrum(&Matrix5::zeros(), &Tolerances::default()).classification, StabilityClass::DegenerateNilpotent);
        let sum: f64 = spectrum(&j, &Tolerances::default()).eigenvalues.iter().map(|e| e.re).sum();
        assert!((sum - j.trace()).abs() < 1e-12);
    }

    #[test]
    fn perturbed_nilpotent_is_still_nilpotent() {
        // a Jordan block plus 1e-10 noise has eigenvalues near ±1e-5·‖J‖
        let mut j = Matrix5::zeros();
        j[(0, 1)] = 1e5;
        j[(1, 0)] = 1e-5;
        j[(2, 3)] = 3e4;
        let rep = spectrum(&j, &Tolerances::default());
        assert!(rep.max_real_part() > rep.thresholds.0);
        assert_eq!(rep.classification, StabilityClass::DegenerateNilpotent);
    }

    #[test]
    fn charpoly_of_a_diagonal_matrix() {
        let j = Matrix5::from_diagonal(&Vector5::new(1.0, 2.0, 3.0, 4.0, 5.0));
        let c = characteristic_polynomial(&j);
        assert_eq!(c, [-120.0, 274.0, -225.0, 85.0, -15.0, 1.0]);
    }

    #[test]
    fn leaf_hessian_matches_analytic() {
        let re = Family::AttractingRepelling.member(0.3, 1.1, 0.5).unwrap();
        let grad = |x: &Vector5<f64>| gradient(&re.params, &ReducedState::from_vector(x));
        let fd = richardson_jacobian(grad, &re.state.to_vector(), &fd_steps(&re.params, &re.state)).unwrap();
        assert!((fd - hessian(&re.params, &re.state).unwrap()).amax() < 1e-9);
    }

    #[test]
    fn unit_sphere_signatures() {
        let rep = |mu: f64| ModelParams::normalized(1.0, mu, PotentialFamily::repelling()).unwrap();
        let sig = |re: &RelEquilibrium| hessian_on_leaf(re).unwrap().signs;
        let iso = classify_re(&rep(1.0), 1.0).unwrap().equilibria[0].clone();
        assert_eq!(iso.branch, REBranch::IsoscelesAcute);
        assert_eq!(sig(&iso), "+++-");
        let iso = classify_re(&rep(1.0), 2.2).unwrap().equilibria[0].clone();
        assert_eq!(sig(&iso), "++--");
        let obtuse = classify_re(&rep(0.75), 2.0 * PI / 3.0).unwrap().equilibria[0].clone();
        assert_eq!(sig(&obtuse), "++--");
        let fam = classify_re(&rep(1.0), PI / 2.0).unwrap().right_angled.unwrap();
        assert_eq!(sig(&fam.member(0.3).unwrap()), "++--");
    }

    #[test]
    fn flat_kepler_leaf_is_rank_deficient() {
        let re = Family::Attracting.member(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(hessian_on_leaf(&re), Err(Error::RankDeficientLeaf { .. })));
    }
}
