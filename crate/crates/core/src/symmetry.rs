//! The isometry groups G_κ of S_κ (SO(3), SE(2), SO(2,1) up to scale),
//! their Lie algebras, and the affine action in 4×4 homogeneous form.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::curvature_kernel::{EmbeddedPoint, MetricTensor};
use crate::error::{Error, Result};

/// Angular-velocity coordinates ω in the basis ξ₁, ξ₂, ξ₃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
}

impl AlgebraElement {
    pub fn new(omega1: f64, omega2: f64, omega3: f64) -> Self {
        AlgebraElement { omega1, omega2, omega3 }
    }

    pub fn from_vector(w: &Vector3<f64>) -> Self {
        AlgebraElement::new(w[0], w[1], w[2])
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.omega1, self.omega2, self.omega3)
    }

    /// ξ = Σ ωᵢ ξᵢ.
    pub fn matrix(&self, kappa: f64) -> Matrix3<f64> {
        basis_matrix(kappa, 1) * self.omega1 + basis_matrix(kappa, 2) * self.omega2 + basis_matrix(kappa, 3) * self.omega3
    }

    /// Max entry of ξᵀK + Kξ.
    pub fn algebra_residual(&self, kappa: f64) -> f64 {
        let k = MetricTensor::new(kappa).matrix();
        let xi = self.matrix(kappa);
        (xi.transpose() * k + k * xi).amax()
    }
}

/// The basis element ξᵢ of so(K_κ), i ∈ {1, 2, 3}.
pub fn basis_matrix(kappa: f64, i: usize) -> Matrix3<f64> {
    match i {
        1 => Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -kappa, 0.0, 1.0, 0.0),
        2 => Matrix3::new(0.0, 0.0, kappa, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0),
        3 => Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        _ => panic!("basis index must be 1, 2 or 3, got {i}"),
    }
}

pub fn commutator(a: &Matrix3<f64>, b: &Matrix3<f64>) -> Matrix3<f64> {
    a * b - b * a
}

/// Translation part of the infinitesimal action: τ(ω) = (−ω₂, ω₁, 0).
pub fn tau(v: &AlgebraElement) -> Vector3<f64> {
    Vector3::new(-v.omega2, v.omega1, 0.0)
}

/// [ξ, τ(ξ); 0, 0].
pub fn homogeneous(kappa: f64, v: &AlgebraElement) -> Matrix4<f64> {
    let mut h = Matrix4::zeros();
    h.fixed_view_mut::<3, 3>(0, 0).copy_from(&v.matrix(kappa));
    h.fixed_view_mut::<3, 1>(0, 3).copy_from(&tau(v));
    h
}

/// Infinitesimal generator ξ·x = ξx + τ(ξ).
pub fn infinitesimal_action(kappa: f64, v: &AlgebraElement, x: &EmbeddedPoint) -> Vector3<f64> {
    v.matrix(kappa) * x.to_vector() + tau(v)
}

/// An isometry of S_κ in homogeneous form [g, T; 0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub h: Matrix4<f64>,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { h: Matrix4::identity() }
    }

    /// Builds [g, T; 0, 1] from its blocks.
    pub fn from_parts(g: &Matrix3<f64>, t: &Vector3<f64>) -> Self {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(g);
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(t);
        GroupElement { h }
    }

    pub fn linear(&self) -> Matrix3<f64> {
        self.h.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.h.fixed_view::<3, 1>(0, 3).into_owned()
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement { h: self.h * other.h }
    }

    pub fn inverse(&self) -> GroupElement {
        let g = self.linear();
        let gi = g.try_inverse().expect("group elements are invertible");
        GroupElement::from_parts(&gi, &(-gi * self.translation()))
    }

    /// Max entry of gᵀKg − K together with the bottom-row defect.
    pub fn group_residual(&self, kappa: f64) -> f64 {
        let k = MetricTensor::new(kappa).matrix();
        let g = self.linear();
        let bottom = (self.h.row(3) - Vector4::new(0.0, 0.0, 0.0, 1.0).transpose()).amax();
        (g.transpose() * k * g - k).amax().max(bottom)
    }

    /// For κ ≠ 0 the translation is forced to (I − g)e₃/κ.
    pub fn expected_translation(&self, kappa: f64) -> Option<Vector3<f64>> {
        (kappa != 0.0).then(|| (Matrix3::identity() - self.linear()) * Vector3::z() / kappa)
    }
}

/// exp(t·homogeneous(v)).
pub fn exp_group(kappa: f64, v: &AlgebraElement, t: f64) -> GroupElement {
    GroupElement { h: (homogeneous(kappa, v) * t).exp() }
}

/// g·x = gx + T.
pub fn act(kappa: f64, g: &GroupElement, x: &EmbeddedPoint) -> Result<EmbeddedPoint> {
    x.check_on_surface(kappa)?;
    Ok(act_unchecked(g, x))
}

pub(crate) fn act_unchecked(g: &GroupElement, x: &EmbeddedPoint) -> EmbeddedPoint {
    EmbeddedPoint::from_vector(&(g.linear() * x.to_vector() + g.translation()))
}

/// Checks that g preserves K_κ and has the homogeneous bottom row.
pub fn validate(kappa: f64, g: &GroupElement, tol: f64) -> Result<()> {
    let r = g.group_residual(kappa);
    if r <= tol {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("group element violates gᵀKg = K by {r:e}")))
    }
}
