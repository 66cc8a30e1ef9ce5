//! Sweeps of relative-equilibrium families in κ and q, transition
//! detection, and (κ, q) stability rasters.

mod raster;

pub use raster::{label_cell, region_raster, CellLabel, Curve, RegionRaster};

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{select, ABranch, Family, REBranch, RelEquilibrium};
use crate::error::{Error, Result};
use crate::reduced_system::{ModelParams, ReducedState};
use crate::stability::{analyze, Eigenvalue, StabilityClass};

/// Environment variable capping the worker threads of parallel sweeps.
pub const THREADS_ENV: &str = "CURVED2BODY_THREADS";
/// Transitions are located to this parameter accuracy.
pub const TRANSITION_TOL: f64 = 1e-8;

/// Runs `f` on a pool honouring the thread cap.
pub(crate) fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    match threads.map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build()) {
        Some(Ok(pool)) => pool.install(f),
        _ => f(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub kappa: f64,
    pub branch: REBranch,
    pub state: ReducedState,
    pub eigenvalues: Vec<Eigenvalue>,
    pub classification: StabilityClass,
    pub casimir: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTable {
    pub family: Family,
    pub q: f64,
    pub mu: f64,
    pub rows: Vec<FamilyRow>,
}

impl FamilyTable {
    /// Largest state change between neighbouring rows.
    pub fn max_jump(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| (w[1].state.to_vector() - w[0].state.to_vector()).norm())
            .fold(0.0, f64::max)
    }

    pub fn row_at(&self, kappa: f64) -> Option<&FamilyRow> {
        self.rows.iter().find(|r| r.kappa == kappa)
    }
}

/// κ samples: n evenly spaced points, plus κ = 0 when the range straddles it.
pub fn kappa_grid(range: (f64, f64), n: usize) -> Vec<f64> {
    let (a, b) = range;
    let mut ks: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    if a < 0.0 && b > 0.0 {
        // snap near-zero samples so κ = 0 appears once and exactly
        let tiny = 1e-12 * (b - a);
        ks.retain(|k| k.abs() > tiny);
        ks.push(0.0);
    }
    ks.sort_by(f64::total_cmp);
    ks
}

fn family_row(family: Family, q: f64, mu: f64, kappa: f64) -> Result<FamilyRow> {
    let lost = |e: Error| Error::BranchLost { kappa, reason: e.to_string() };
    let re = family.member(kappa, q, mu).map_err(lost)?;
    let rep = analyze(&re).map_err(lost)?;
    Ok(FamilyRow {
        kappa,
        branch: re.branch,
        state: re.state,
        eigenvalues: rep.eigenvalues,
        classification: rep.classification,
        casimir: re.casimir(),
    })
}

/// Follows a family across κ at fixed (q, μ).
pub fn family_sweep(family: Family, q: f64, mu: f64, kappa_range: (f64, f64), n: usize) -> Result<FamilyTable> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 samples, got {n}")));
    }
    let (a, b) = kappa_range;
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("empty kappa range [{a}, {b}]")));
    }
    let limit = (FRAC_PI_2 / q).powi(2);
    if !(q > 0.0) || b >= limit {
        return Err(Error::InvalidParameter(format!("kappa range must stay below (pi/2q)^2 = {limit}")));
    }
    let ks = kappa_grid(kappa_range, n);
    let rows: Vec<Result<FamilyRow>> = with_pool(|| ks.par_iter().map(|&k| family_row(family, q, mu, k)).collect());
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FamilyTable { family, q, mu, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    /// A pair of eigenvalues leaves the imaginary axis.
    StabilityLoss,
    /// Equal-mass junction with the right-angled family at q√κ = π/2.
    Pitchfork,
    /// Local minimum of the angular momentum √|C| along the family.
    SaddleNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub parameter: f64,
    pub kind: TransitionKind,
}

fn stable_unstable_pair(a: StabilityClass, b: StabilityClass) -> bool {
    use StabilityClass::*;
    matches!((a, b), (Elliptic, LinearlyUnstable) | (LinearlyUnstable, Elliptic))
}

/// Bisection on a boolean predicate; `lo` and `hi` have different values.
fn bisect_flag(f: impl Fn(f64) -> Option<bool>, mut lo: f64, mut hi: f64) -> f64 {
    let Some(flo) = f(lo) else { return 0.5 * (lo + hi) };
    while hi - lo > TRANSITION_TOL * 0.5 {
        let mid = 0.5 * (lo + hi);
        match f(mid) {
            Some(v) if v == flo => lo = mid,
            Some(_) => hi = mid,
            None => break,
        }
    }
    0.5 * (lo + hi)
}

fn unstable(re: Result<RelEquilibrium>) -> Option<bool> {
    let rep = analyze(&re.ok()?).ok()?;
    Some(rep.classification == StabilityClass::LinearlyUnstable)
}

/// Stability changes along a κ-sweep, each refined by bisection.
pub fn detect_transitions(table: &FamilyTable) -> Vec<Transition> {
    let mut out = Vec::new();
    for w in table.rows.windows(2) {
        if stable_unstable_pair(w[0].classification, w[1].classification) {
            let f = |k: f64| unstable(table.family.member(k, table.q, table.mu));
            out.push(Transition { parameter: bisect_flag(f, w[0].kappa, w[1].kappa), kind: TransitionKind::StabilityLoss });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QRow {
    pub q: f64,
    pub branch: Option<REBranch>,
    pub state: Option<ReducedState>,
    pub classification: Option<StabilityClass>,
    pub casimir: Option<f64>,
}

/// One A-branch followed across q at fixed κ and μ.
#[derive(Debug, Clone)]
pub struct QSweep {
    pub params: ModelParams,
    pub which: ABranch,
    pub q_range: (f64, f64),
    pub rows: Vec<QRow>,
}

fn q_row(params: &ModelParams, which: ABranch, q: f64) -> QRow {
    match select(params, q, which) {
        Ok(re) => {
            let class = analyze(&re).ok().map(|r| r.classification);
            QRow { q, branch: Some(re.branch), state: Some(re.state), classification: class, casimir: Some(re.casimir()) }
        }
        Err(_) => QRow { q, branch: None, state: None, classification: None, casimir: None },
    }
}

/// Samples the branch at n evenly spaced interior points of q_range.
pub fn q_sweep(params: &ModelParams, which: ABranch, q_range: (f64, f64), n: usize) -> Result<QSweep> {
    let (a, b) = q_range;
    if !(a < b) || n < 3 {
        return Err(Error::InvalidParameter(format!("bad q sweep [{a}, {b}] with {n} samples")));
    }
    let qs: Vec<f64> = (1..=n).map(|i| a + (b - a) * i as f64 / (n + 1) as f64).collect();
    let rows = with_pool(|| qs.par_iter().map(|&q| q_row(params, which, q)).collect());
    Ok(QSweep { params: params.clone(), which, q_range, rows })
}

fn abs_casimir(params: &ModelParams, which: ABranch, q: f64) -> Option<f64> {
    select(params, q, which).ok().map(|re| re.casimir().abs().sqrt())
}

/// Stability losses, equal-mass pitchforks and angular-momentum minima along a q-sweep.
pub fn detect_q_transitions(sweep: &QSweep) -> Vec<Transition> {
    let params = &sweep.params;
    let which = sweep.which;
    let mut out = Vec::new();
    for w in sweep.rows.windows(2) {
        if let (Some(a), Some(b)) = (w[0].classification, w[1].classification) {
            if stable_unstable_pair(a, b) {
                let f = |q: f64| unstable(select(params, q, which));
                out.push(Transition { parameter: bisect_flag(f, w[0].q, w[1].q), kind: TransitionKind::StabilityLoss });
            }
        }
    }
    for w in sweep.rows.windows(3) {
        let c: Vec<Option<f64>> = w.iter().map(|r| r.casimir.map(|c| c.abs().sqrt())).collect();
        if let [Some(a), Some(b), Some(c)] = c[..] {
            if b < a && b < c {
                if let Some(q) = momentum_minimum(params, which, w[0].q, w[2].q) {
                    out.push(Transition { parameter: q, kind: TransitionKind::SaddleNode });
                }
            }
        }
    }
    let k = params.k();
    if k > 0.0 && (params.mu() - 1.0).abs() < 1e-12 {
        let qr = FRAC_PI_2 / k.sqrt();
        let (a, b) = sweep.q_range;
        if qr > a && qr <= b + 1e-9 {
            out.push(Transition { parameter: qr, kind: TransitionKind::Pitchfork });
        }
    }
    out.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    out
}

/// Zero of d√|C|/dq inside [lo, hi], by bisection on a central difference.
fn momentum_minimum(params: &ModelParams, which: ABranch, mut lo: f64, mut hi: f64) -> Option<f64> {
    let slope = |q: f64| {
        let h = 1e-6 * q.max(1.0);
        Some(abs_casimir(params, which, q + h)? - abs_casimir(params, which, q - h)?)
    };
    if slope(lo)? >= 0.0 || slope(hi)? <= 0.0 {
        return None;
    }
    while hi - lo > TRANSITION_TOL * 0.1 {
        let mid = 0.5 * (lo + hi);
        if slope(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
