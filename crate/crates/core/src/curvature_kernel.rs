//! κ-trigonometry and the model surface S_κ: x² + y² + κz² − 2z = 0.
//!
//! All three curvature regimes share one code path. Near κx² = 0 the
//! functions are evaluated from their Taylor series so that nothing
//! divides by κ.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Points are on S_κ when |f_κ| is below this, relative to the point's size.
pub const TOL_SURFACE: f64 = 1e-10;
/// Denominators of tan_κ / cot_κ below this are treated as zero.
pub const TOL_SINGULAR: f64 = 1e-12;
/// Series evaluation is used when |κ|x² is below this.
pub const SERIES_SWITCH: f64 = 1e-4;
const SERIES_TERMS: usize = 10;

/// Gaussian curvature together with its admissible separation interval I_κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub kappa: f64,
}

impl Curvature {
    pub fn new(kappa: f64) -> Self {
        Curvature { kappa }
    }

    /// Upper end of I_κ: π/√κ on the sphere, `None` (infinite) otherwise.
    pub fn max_separation(&self) -> Option<f64> {
        (self.kappa > 0.0).then(|| PI / self.kappa.sqrt())
    }

    /// The right-angle separation π/(2√κ) when κ > 0.
    pub fn right_angle(&self) -> Option<f64> {
        (self.kappa > 0.0).then(|| 0.5 * PI / self.kappa.sqrt())
    }

    pub fn contains(&self, q: f64) -> bool {
        q.is_finite() && q > 0.0 && self.max_separation().is_none_or(|m| q < m)
    }

    /// Fails with `OutOfInterval` unless q ∈ I_κ.
    pub fn check(&self, q: f64) -> Result<()> {
        if self.contains(q) {
            Ok(())
        } else {
            Err(Error::OutOfInterval { kappa: self.kappa, q })
        }
    }

    /// Distance from q to the nearest end of I_κ.
    pub fn boundary_distance(&self, q: f64) -> f64 {
        match self.max_separation() {
            Some(m) => q.min(m - q),
            None => q,
        }
    }

    pub fn sin(&self, x: f64) -> f64 {
        sin_kappa(self.kappa, x)
    }

    pub fn cos(&self, x: f64) -> f64 {
        cos_kappa(self.kappa, x)
    }

    pub fn cot(&self, x: f64) -> Result<f64> {
        cot_kappa(self.kappa, x)
    }
}

/// A point of ℝ³ in the chart where S_κ passes through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EmbeddedPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        EmbeddedPoint { x, y, z }
    }

    pub fn origin() -> Self {
        EmbeddedPoint::new(0.0, 0.0, 0.0)
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        EmbeddedPoint::new(v[0], v[1], v[2])
    }

    /// f_κ evaluated at the point.
    pub fn surface_residual(&self, kappa: f64) -> f64 {
        surface_function(kappa, self)
    }

    pub fn check_on_surface(&self, kappa: f64) -> Result<()> {
        let scale = 1.0 + self.x * self.x + self.y * self.y + kappa.abs() * self.z * self.z;
        let residual = self.surface_residual(kappa);
        if residual.abs() <= TOL_SURFACE * scale {
            Ok(())
        } else {
            Err(Error::NotOnSurface { residual })
        }
    }
}

impl From<Vector3<f64>> for EmbeddedPoint {
    fn from(v: Vector3<f64>) -> Self {
        EmbeddedPoint::from_vector(&v)
    }
}

/// K_κ = diag(1, 1, κ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTensor {
    pub kappa: f64,
}

impl MetricTensor {
    pub fn new(kappa: f64) -> Self {
        MetricTensor { kappa }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, self.kappa))
    }

    pub fn inner(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        u[0] * v[0] + u[1] * v[1] + self.kappa * u[2] * v[2]
    }

    pub fn norm_sq(&self, v: &Vector3<f64>) -> f64 {
        self.inner(v, v)
    }

    pub fn is_degenerate(&self) -> bool {
        self.kappa == 0.0
    }
}

/// Σ_{n<N} uⁿ / ((2n+a)!/a!) evaluated by Horner, with u = −κx².
fn even_series(u: f64, offset: u32) -> f64 {
    let mut acc = 1.0;
    for n in (1..SERIES_TERMS as u32).rev() {
        let k = 2 * n + offset;
        acc = 1.0 + u * acc / ((k - 1) as f64 * k as f64);
    }
    acc
}

fn use_series(kappa: f64, x: f64) -> bool {
    (kappa * x * x).abs() < SERIES_SWITCH
}

pub fn sin_kappa(kappa: f64, x: f64) -> f64 {
    if use_series(kappa, x) {
        return x * even_series(-kappa * x * x, 1);
    }
    if kappa > 0.0 {
        let s = kappa.sqrt();
        (s * x).sin() / s
    } else {
        let s = (-kappa).sqrt();
        (s * x).sinh() / s
    }
}

pub fn cos_kappa(kappa: f64, x: f64) -> f64 {
    if use_series(kappa, x) {
        return even_series(-kappa * x * x, 0);
    }
    if kappa > 0.0 {
        (kappa.sqrt() * x).cos()
    } else {
        ((-kappa).sqrt() * x).cosh()
    }
}

/// (1 − cos_κ x)/κ, with limit x²/2 at κ = 0.
pub fn versin_kappa(kappa: f64, x: f64) -> f64 {
    if use_series(kappa, x) {
        return 0.5 * x * x * even_series(-kappa * x * x, 2);
    }
    if kappa > 0.0 {
        let h = (0.5 * kappa.sqrt() * x).sin();
        2.0 * h * h / kappa
    } else {
        let h = (0.5 * (-kappa).sqrt() * x).sinh();
        2.0 * h * h / -kappa
    }
}

pub fn tan_kappa(kappa: f64, x: f64) -> Result<f64> {
    let c = cos_kappa(kappa, x);
    if c.abs() < TOL_SINGULAR {
        return Err(Error::SingularArgument { what: "cos_kappa vanishes in tan_kappa", value: x });
    }
    Ok(sin_kappa(kappa, x) / c)
}

pub fn cot_kappa(kappa: f64, x: f64) -> Result<f64> {
    let s = sin_kappa(kappa, x);
    if s.abs() < TOL_SINGULAR {
        return Err(Error::SingularArgument { what: "sin_kappa vanishes in cot_kappa", value: x });
    }
    Ok(cos_kappa(kappa, x) / s)
}

/// Principal inverse of sin_κ.
pub fn arcsin_kappa(kappa: f64, y: f64) -> Result<f64> {
    if kappa == 0.0 {
        return Ok(y);
    }
    if kappa > 0.0 {
        let s = kappa.sqrt();
        let z = s * y;
        if z.abs() > 1.0 + 1e-12 {
            return Err(Error::SingularArgument { what: "arcsin_kappa argument beyond 1/sqrt(kappa)", value: y });
        }
        Ok(z.clamp(-1.0, 1.0).asin() / s)
    } else {
        let s = (-kappa).sqrt();
        Ok((s * y).asinh() / s)
    }
}

/// f_κ(x, y, z) = x² + y² + κz² − 2z.
pub fn surface_function(kappa: f64, p: &EmbeddedPoint) -> f64 {
    p.x * p.x + p.y * p.y + kappa * p.z * p.z - 2.0 * p.z
}

/// Reference configuration: x₁ at the origin, x₂ at arclength q along the y-meridian.
pub fn point_pair(kappa: f64, q: f64) -> Result<(EmbeddedPoint, EmbeddedPoint)> {
    Curvature::new(kappa).check(q)?;
    Ok((EmbeddedPoint::origin(), meridian_point(kappa, q)))
}

fn meridian_point(kappa: f64, t: f64) -> EmbeddedPoint {
    EmbeddedPoint::new(0.0, sin_kappa(kappa, t), versin_kappa(kappa, t))
}

/// Unit-speed geodesic from the origin along the y-meridian.
pub fn geodesic_gamma(kappa: f64, t: f64) -> Result<EmbeddedPoint> {
    let max = Curvature::new(kappa).max_separation().unwrap_or(f64::INFINITY);
    if !(t >= 0.0 && t <= max) {
        return Err(Error::OutOfInterval { kappa, q: t });
    }
    Ok(meridian_point(kappa, t))
}

/// dγ/dt = (0, cos_κ t, sin_κ t).
pub fn geodesic_velocity(kappa: f64, t: f64) -> Vector3<f64> {
    Vector3::new(0.0, cos_kappa(kappa, t), sin_kappa(kappa, t))
}

/// Intrinsic distance on S_κ, computed on the rescaled unit sphere or
/// hyperboloid for κ ≠ 0 and on the (x, y) projection for κ = 0.
pub fn geodesic_distance(kappa: f64, a: &EmbeddedPoint, b: &EmbeddedPoint) -> Result<f64> {
    a.check_on_surface(kappa)?;
    b.check_on_surface(kappa)?;
    if kappa == 0.0 {
        return Ok((a.x - b.x).hypot(a.y - b.y));
    }
    let s = kappa.abs().sqrt();
    if kappa > 0.0 {
        let pa = Vector3::new(s * a.x, s * a.y, kappa * a.z - 1.0);
        let pb = Vector3::new(s * b.x, s * b.y, kappa * b.z - 1.0);
        Ok(pa.cross(&pb).norm().atan2(pa.dot(&pb)) / s)
    } else {
        let (dx, dy) = (s * (a.x - b.x), s * (a.y - b.y));
        let dw = kappa * (a.z - b.z);
        let chord_sq = (dx * dx + dy * dy - dw * dw).max(0.0);
        Ok(2.0 * (0.5 * chord_sq.sqrt()).asinh() / s)
    }
}

/// Reflection through the sphere centre (0, 0, 1/κ).
pub fn antipode(kappa: f64, p: &EmbeddedPoint) -> Result<EmbeddedPoint> {
    if kappa <= 0.0 {
        return Err(Error::NegativeCurvature { kappa });
    }
    p.check_on_surface(kappa)?;
    Ok(EmbeddedPoint::new(-p.x, -p.y, 2.0 / kappa - p.z))
}

/// Sends the second particle to its antipode; separation q becomes π/√κ − q.
pub fn antipodal_map(kappa: f64, cfg: (EmbeddedPoint, EmbeddedPoint)) -> Result<(EmbeddedPoint, EmbeddedPoint)> {
    if kappa <= 0.0 {
        return Err(Error::NegativeCurvature { kappa });
    }
    cfg.0.check_on_surface(kappa)?;
    Ok((cfg.0, antipode(kappa, &cfg.1)?))
}
