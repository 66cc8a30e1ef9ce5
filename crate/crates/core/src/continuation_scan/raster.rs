use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::with_pool;
use crate::equilibria::{critical_angles, select, ABranch};
use crate::error::{Error, Result};
use crate::reduced_system::{Interaction, ModelParams, PotentialFamily};
use crate::stability::{analyze, StabilityClass};

/// Cells closer than this to a degenerate locus are labelled Boundary.
pub const BOUNDARY_TOL: f64 = 1e-6;
pub const MAX_CELLS: usize = 512 * 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellLabel {
    NoRE,
    Stable,
    Unstable,
    Boundary,
    Failed,
}

impl CellLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CellLabel::NoRE => "NoRE",
            CellLabel::Stable => "Stable",
            CellLabel::Unstable => "Unstable",
            CellLabel::Boundary => "Boundary",
            CellLabel::Failed => "Failed",
        }
    }
}

/// A polyline in the (κ, q) plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRaster {
    pub potential: String,
    pub mu: f64,
    pub kappas: Vec<f64>,
    pub qs: Vec<f64>,
    /// Row-major in κ: `labels[i * qs.len() + j]` is cell (κᵢ, qⱼ).
    pub labels: Vec<CellLabel>,
    pub curves: Vec<Curve>,
}

impl RegionRaster {
    pub fn label(&self, i: usize, j: usize) -> CellLabel {
        self.labels[i * self.qs.len() + j]
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, CellLabel)> + '_ {
        let nq = self.qs.len();
        self.labels.iter().enumerate().map(move |(n, &l)| (self.kappas[n / nq], self.qs[n % nq], l))
    }

    pub fn count(&self, label: CellLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

fn branch_for(potential: &PotentialFamily, kappa: f64, q: f64) -> ABranch {
    match potential {
        PotentialFamily::AttractingCot { .. } => ABranch::Minus,
        PotentialFamily::RepellingCot { .. } | PotentialFamily::CurvatureCot { .. } => ABranch::Plus,
        PotentialFamily::Custom(_) => match potential.interaction(kappa, q) {
            Ok(Interaction::Attracting) => ABranch::Minus,
            _ => ABranch::Plus,
        },
    }
}

/// Stability label of one (κ, q) cell.
pub fn label_cell(potential: &PotentialFamily, mu: f64, kappa: f64, q: f64) -> CellLabel {
    if kappa > 0.0 {
        let r = kappa.sqrt();
        if (q - FRAC_PI_2 / r).abs() < BOUNDARY_TOL || (q - PI / r).abs() < BOUNDARY_TOL {
            return CellLabel::Boundary;
        }
        if q > PI / r {
            return CellLabel::NoRE;
        }
    }
    let Ok(params) = ModelParams::normalized(kappa, mu, potential.clone()) else {
        return CellLabel::Failed;
    };
    let re = match select(&params, q, branch_for(potential, kappa, q)) {
        Ok(re) => re,
        Err(Error::WrongBranch(_) | Error::NoRoot(_) | Error::OutOfInterval { .. }) => return CellLabel::NoRE,
        Err(_) => return CellLabel::Failed,
    };
    match analyze(&re).map(|r| r.classification) {
        Ok(StabilityClass::Elliptic) => CellLabel::Stable,
        Ok(StabilityClass::LinearlyUnstable | StabilityClass::DegenerateNilpotent) => CellLabel::Unstable,
        Ok(StabilityClass::Mixed) => CellLabel::Boundary,
        Err(_) => CellLabel::Failed,
    }
}

fn linspace((a, b): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn overlay_curves(potential: &PotentialFamily, mu: f64, kappas: &[f64], (qa, qb): (f64, f64)) -> Vec<Curve> {
    let names = ["q_star", "q_dagger", "right_angle", "antipodal"];
    let mut curves: Vec<Curve> = names.iter().map(|n| Curve { name: n.to_string(), points: Vec::new() }).collect();
    let inside = |q: f64| q >= qa && q <= qb;
    for &k in kappas {
        if k > 0.0 {
            for (c, q) in [(2, FRAC_PI_2 / k.sqrt()), (3, PI / k.sqrt())] {
                if inside(q) {
                    curves[c].points.push([k, q]);
                }
            }
        }
        let probe = if k > 0.0 { (0.25 * PI / k.sqrt()).min(qb) } else { qb };
        let Ok(inter) = potential.interaction(k, probe) else { continue };
        if let Ok(ca) = critical_angles(mu, k, inter) {
            for (c, q) in [(0, ca.q_star), (1, ca.q_dagger)] {
                if let Some(q) = q.filter(|&q| inside(q)) {
                    curves[c].points.push([k, q]);
                }
            }
        }
    }
    curves
}

/// Labels every cell of an (nκ × nq) grid spanning the closed ranges.
pub fn region_raster(
    potential: &PotentialFamily,
    mu: f64,
    kappa_range: (f64, f64),
    q_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<RegionRaster> {
    let (nk, nq) = resolution;
    if nk == 0 || nq == 0 || nk * nq > MAX_CELLS {
        return Err(Error::InvalidParameter(format!("raster resolution {nk}x{nq} must be nonempty and at most 512x512")));
    }
    if !(kappa_range.0 <= kappa_range.1 && q_range.0 <= q_range.1 && q_range.0 > 0.0) {
        return Err(Error::InvalidParameter("raster ranges must be ordered with q > 0".into()));
    }
    let kappas = linspace(kappa_range, nk);
    let qs = linspace(q_range, nq);
    let labels = with_pool(|| {
        (0..nk * nq).into_par_iter().map(|n| label_cell(potential, mu, kappas[n / nq], qs[n % nq])).collect()
    });
    let curves = overlay_curves(potential, mu, &kappas, q_range);
    Ok(RegionRaster { potential: potential.name(), mu, kappas, qs, labels, curves })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repelling_has_nothing_in_the_hyperbolic_half() {
        let r = region_raster(&PotentialFamily::repelling(), 0.5, (-1.0, -0.05), (0.1, 3.0), (8, 8)).unwrap();
        assert_eq!(r.count(CellLabel::NoRE), 64);
    }

    #[test]
    fn attracting_instability_only_beyond_q_star() {
        let r = region_raster(&PotentialFamily::attracting(), 0.5, (-1.0, 0.3), (0.1, 2.8), (14, 16)).unwrap();
        for (k, q, l) in r.cells() {
            if l == CellLabel::Unstable {
                assert!(k < 0.0);
                let qs = critical_angles(0.5, k, Interaction::Attracting).unwrap().q_star.unwrap();
                assert!(q > qs, "{k} {q}");
            }
        }
        assert!(r.count(CellLabel::Unstable) > 0);
        assert!(r.curves[0].points.len() > 0);
    }

    #[test]
    fn curvature_potential_unstable_in_the_plane_and_below() {
        let r = region_raster(&PotentialFamily::curvature(), 0.5, (-1.0, 0.0), (0.1, 2.0), (6, 6)).unwrap();
        assert_eq!(r.count(CellLabel::Unstable), 36);
        // κ = 1: unstable below q†, stable between q† and the right angle
        let qd = critical_angles(0.5, 1.0, Interaction::Repelling).unwrap().q_dagger.unwrap();
        let p = PotentialFamily::curvature();
        assert_eq!(label_cell(&p, 0.5, 1.0, qd - 0.05), CellLabel::Unstable);
        assert_eq!(label_cell(&p, 0.5, 1.0, qd + 0.05), CellLabel::Stable);
    }

    #[test]
    fn degenerate_loci_are_boundary() {
        let p = PotentialFamily::attracting();
        assert_eq!(label_cell(&p, 0.5, 1.0, FRAC_PI_2 + 5e-7), CellLabel::Boundary);
        assert_eq!(label_cell(&p, 0.5, 1.0, PI), CellLabel::Boundary);
        assert_eq!(label_cell(&p, 0.5, 1.0, 3.5), CellLabel::NoRE);
    }

    #[test]
    fn oversized_raster_is_rejected() {
        assert!(region_raster(&PotentialFamily::attracting(), 0.5, (-1.0, 1.0), (0.1, 1.0), (513, 512)).is_err());
    }
}
