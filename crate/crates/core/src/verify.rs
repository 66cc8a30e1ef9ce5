//! The invariant suite behind `curved2body verify`.
//!
//! Each check is deterministic (fixed seeds) and runs in well under a minute.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix5, Vector5};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::continuation_scan::{detect_q_transitions, family_sweep, q_sweep, TransitionKind};
use crate::curvature_kernel::{cos_kappa, cot_kappa, sin_kappa, versin_kappa, SERIES_SWITCH};
use crate::equilibria::{antipodal_dual, classify_re, critical_angles, sphere_angles, ABranch, Family, REBranch};
use crate::error::Result;
use crate::reduced_system::{
    bracket, casimir_gradient, eom_rhs, gradient, inverse_mass_matrix, mass_matrix, poisson_tensor, reconstruct,
    integrate_with, body_velocities, IntegrateOptions, Interaction, ModelParams, PotentialFamily, ReducedState,
};
use crate::stability::{analyze, asymptotic_check, jacobian_at, printed_l0, PrintedFamily, StabilityClass};
use crate::symmetry::{exp_group, AlgebraElement, GroupElement};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "kappa-trig identities"),
    (2, "structural consistency"),
    (3, "relative equilibrium certification"),
    (4, "flat Kepler spectrum"),
    (5, "nilpotent flat linearization"),
    (6, "eigenvalue splitting asymptotics"),
    (7, "antipodal duality"),
    (8, "critical angles, dual method"),
    (9, "leaf Hessian signatures"),
    (10, "family sweeps and Casimir signs"),
    (11, "dynamics and reconstruction"),
];

type Outcome = Result<(bool, String)>;

pub fn run_criterion(id: u8) -> Option<CriterionResult> {
    let (_, name) = *CRITERIA.iter().find(|(i, _)| *i == id)?;
    let outcome = match id {
        1 => trig_identities(),
        2 => structural_consistency(),
        3 => re_certification(),
        4 => flat_kepler_spectrum(),
        5 => flat_nilpotency(),
        6 => splitting_asymptotics(),
        7 => antipodal_duality(),
        8 => critical_angles_dual_method(),
        9 => leaf_signatures(),
        10 => family_sweeps(),
        _ => dynamics_and_reconstruction(),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Some(CriterionResult { id, name, passed, detail })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|(id, _)| run_criterion(*id)).collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Tracks the worst ratio residual/bound.
#[derive(Default)]
struct Worst {
    ratio: f64,
    at: String,
}

impl Worst {
    fn push(&mut self, residual: f64, bound: f64, at: impl FnOnce() -> String) {
        let r = if residual.is_nan() { f64::INFINITY } else { residual / bound };
        if r > self.ratio {
            self.ratio = r;
            self.at = at();
        }
    }

    fn ok(&self) -> bool {
        self.ratio <= 1.0
    }
}

fn trig_identities() -> Outcome {
    let mut ks = linspace(-1.0, 1.0, 99);
    ks.push(1e-5);
    let xs = linspace(-3.0, 3.0, 100);
    let (mut exact, mut fd, mut cont) = (Worst::default(), Worst::default(), Worst::default());
    let mut points = 0;
    for &k in &ks {
        for (j, &x) in xs.iter().enumerate() {
            points += 1;
            let (s, c) = (sin_kappa(k, x), cos_kappa(k, x));
            let at = || format!("kappa = {k}, x = {x}");
            exact.push((c * c + k * s * s - 1.0).abs(), 1e-12 * (c * c + k.abs() * s * s), at);
            let y = 0.5 * xs[(j + 37) % xs.len()];
            let (sy, cy) = (sin_kappa(k, y), cos_kappa(k, y));
            let r = sin_kappa(k, x + y) - (s * cy + c * sy);
            exact.push(r.abs(), 1e-12 * ((s * cy).abs() + (c * sy).abs()).max(1e-300), at);
            let r = cos_kappa(k, x + y) - (c * cy - k * s * sy);
            exact.push(r.abs(), 1e-12 * ((c * cy).abs() + (k * s * sy).abs()), at);
            let r = versin_kappa(k, x) * k - (1.0 - c);
            exact.push(r.abs(), 1e-12 * c.abs().max(1.0), at);

            let h = 1e-5;
            let d = |f: &dyn Fn(f64) -> f64| (f(x + h) - f(x - h)) / (2.0 * h);
            fd.push((d(&|t| sin_kappa(k, t)) - c).abs(), 1e-7 * c.abs().max(1.0), at);
            fd.push((d(&|t| cos_kappa(k, t)) + k * s).abs(), 1e-7 * c.abs().max(1.0), at);
            fd.push((d(&|t| versin_kappa(k, t)) - s).abs(), 1e-7 * c.abs().max(1.0), at);
            if s.abs() > 0.1 {
                let dc = d(&|t| cot_kappa(k, t).unwrap_or(f64::NAN));
                fd.push((dc + 1.0 / (s * s)).abs(), 1e-7 / (s * s), at);
            }
        }
        if k != 0.0 {
            let xs = (SERIES_SWITCH / k.abs()).sqrt();
            let (a, b) = (xs * (1.0 - 1e-9), xs * (1.0 + 1e-9));
            let fs: [(&dyn Fn(f64) -> f64, f64); 3] = [
                (&|t| sin_kappa(k, t), cos_kappa(k, xs)),
                (&|t| cos_kappa(k, t), -k * sin_kappa(k, xs)),
                (&|t| versin_kappa(k, t), sin_kappa(k, xs)),
            ];
            for (f, df) in fs {
                let jump = f(b) - f(a) - df * (b - a);
                cont.push(jump.abs(), 1e-12 * f(xs).abs().max(1.0), || format!("switch at kappa = {k}"));
            }
        }
    }
    let ok = exact.ok() && fd.ok() && cont.ok();
    Ok((
        ok,
        format!(
            "{points} points; worst/bound: identities {:.2e} ({}), derivatives {:.2e} ({}), series switch {:.2e} ({})",
            exact.ratio, exact.at, fd.ratio, fd.at, cont.ratio, cont.at
        ),
    ))
}

fn random_state(rng: &mut ChaCha8Rng, k: f64) -> ReducedState {
    let q = if k > 0.0 { rng.random_range(0.2..PI / k.sqrt() - 0.2) } else { rng.random_range(0.2..3.0) };
    let mut u = || rng.random_range(-1.0..1.0);
    ReducedState::new(q, u(), u(), u(), u())
}

/// Σ_l B_il ∂_l B_jk + cyclic, with ∂B from exact central differences (B is affine).
fn jacobi_residual(k: f64, s: &ReducedState) -> f64 {
    let b = poisson_tensor(k, s);
    let x = s.to_vector();
    let db: Vec<Matrix5<f64>> = (0..5)
        .map(|l| {
            let e = Vector5::from_fn(|i, _| if i == l { 1.0 } else { 0.0 });
            let plus = poisson_tensor(k, &ReducedState::from_vector(&(x + e)));
            let minus = poisson_tensor(k, &ReducedState::from_vector(&(x - e)));
            (plus - minus) * 0.5
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            for kk in 0..5 {
                let mut r = 0.0;
                for (l, d) in db.iter().enumerate() {
                    r += b[(i, l)] * d[(j, kk)] + b[(j, l)] * d[(kk, i)] + b[(kk, l)] * d[(i, j)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

fn structural_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let potentials = [PotentialFamily::attracting(), PotentialFamily::curvature(), PotentialFamily::repelling()];
    let (mut mm, mut rhs, mut hc, mut jac) = (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    let mut n = 0;
    for k in [-1.0f64, -0.2, 0.0, 0.2, 1.0] {
        for i in 0..48 {
            let mu = rng.random_range(0.3..1.5);
            let params = ModelParams::normalized(k, mu, potentials[i % 3].clone())?;
            let s = random_state(&mut rng, k);
            let at = || format!("kappa = {k}, q = {:.4}", s.q);
            let m = mass_matrix(&params, s.q)?;
            let minv = inverse_mass_matrix(&params, s.q)?;
            mm.push((m * minv - nalgebra::Matrix4::identity()).amax(), 1e-12, at);
            let b = poisson_tensor(k, &s);
            let g = gradient(&params, &s)?;
            let scale = (b.norm() * g.norm()).max(1.0);
            rhs.push((eom_rhs(&params, &s)? - b * g).amax(), 1e-10 * scale, at);
            let gc = casimir_gradient(k, &s);
            hc.push(bracket(k, &s, &g, &gc).abs(), 1e-11 * (scale * gc.norm()).max(1.0), at);
            jac.push(jacobi_residual(k, &s), 1e-12 * (b.norm() * b.norm()).max(1.0), at);
            n += 1;
        }
    }
    let ok = mm.ok() && rhs.ok() && hc.ok() && jac.ok();
    Ok((
        ok,
        format!(
            "{n} states; worst/bound: M*Minv {:.2e}, rhs {:.2e}, {{H,C}} {:.2e} ({}), Jacobi {:.2e}",
            mm.ratio, rhs.ratio, hc.ratio, hc.at, jac.ratio
        ),
    ))
}

fn re_certification() -> Outcome {
    let potentials = [PotentialFamily::attracting(), PotentialFamily::curvature(), PotentialFamily::repelling()];
    let mut worst = Worst::default();
    let (mut count, mut repelling_found, mut above_absolute) = (0, 0, 0);
    for k in [-1.0f64, -0.2, 0.0, 0.2, 1.0] {
        let qs: Vec<f64> = if k > 0.0 {
            (0..20).map(|j| PI / k.sqrt() * (j as f64 + 0.5) / 20.0).collect()
        } else {
            linspace(0.2, 4.0, 20)
        };
        for &q in &qs {
            for mu in [0.25, 0.5, 0.75, 1.0] {
                for pot in &potentials {
                    let params = ModelParams::normalized(k, mu, pot.clone())?;
                    let found = classify_re(&params, q)?;
                    if k <= 0.0 && matches!(pot, PotentialFamily::RepellingCot { .. }) {
                        repelling_found += found.equilibria.len() + found.right_angled.iter().count();
                        continue;
                    }
                    let mut res = found.equilibria.clone();
                    if let Some(fam) = &found.right_angled {
                        for theta in [0.2, 0.5, FRAC_PI_2 / 2.0 + 0.1] {
                            res.push(fam.member(theta)?);
                        }
                    }
                    for re in &res {
                        count += 1;
                        // O(1) momenta get the absolute bound; near the antipode |u| ~ 1e2
                        // and one ulp of the state already moves eom_rhs by ~1e-10
                        let bound = 1e-10 * re.state.u().norm().max(1.0);
                        if re.residual() >= 1e-10 {
                            above_absolute += 1;
                        }
                        worst.push(re.residual(), bound, || format!("{} at kappa = {k}, q = {q:.4}, mu = {mu}", re.branch));
                    }
                }
            }
        }
    }
    Ok((
        worst.ok() && repelling_found == 0 && count > 0,
        format!(
            "{count} equilibria, worst residual/bound = {:.2e} ({}); {above_absolute} above 1e-10 absolute; repelling equilibria with kappa <= 0: {repelling_found}",
            worst.ratio, worst.at
        ),
    ))
}

fn flat_kepler_spectrum() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (q0, mu) in [(1.0, 1.0), (2.5, 0.5)] {
        let re = Family::Attracting.member(0.0, q0, mu)?;
        let rep = analyze(&re)?;
        let w = ((mu + 1.0) / (mu * q0.powi(3))).sqrt();
        let mut freqs: Vec<f64> = rep.eigenvalues.iter().filter(|e| e.im > 0.5 * w).map(|e| e.im).collect();
        freqs.sort_by(f64::total_cmp);
        let zero = rep.eigenvalues.iter().filter(|e| e.norm() < 1e-6 * w).count();
        let rel = freqs.iter().map(|f| (f - w).abs() / w).fold(0.0, f64::max);
        let re_max = rep.eigenvalues.iter().map(|e| e.re.abs()).fold(0.0, f64::max);
        let pass = freqs.len() == 2 && zero == 1 && rel < 1e-6 && re_max < 1e-6 * w;
        ok &= pass;
        detail.push(format!("(q0, mu) = ({q0}, {mu}): pairs {freqs:?} vs {w:.12}, rel {rel:.1e}"));
    }
    Ok((ok, detail.join("; ")))
}

fn flat_nilpotency() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (q0, mu) in [(1.1, 0.5), (1.0, 1.0), (2.0, 0.25)] {
        let re = Family::AttractingRepelling.member(0.0, q0, mu)?;
        let j = jacobian_at(&re)?;
        let ratio = (j * j).norm() / (j.norm() * j.norm());
        let sv = j.singular_values();
        let rank = sv.iter().filter(|&&s| s > 1e-7 * sv.max()).count();
        let l0 = printed_l0(PrintedFamily::AttractingRepelling, q0, mu);
        // exact zero in exact arithmetic; allow a few ulps of rounding
        let l0_sq = (l0 * l0).amax() / (l0.amax() * l0.amax());
        let pass = ratio < 1e-6 && rank == 2 && l0_sq < 64.0 * f64::EPSILON;
        ok &= pass;
        detail.push(format!("({q0}, {mu}): |J^2|/|J|^2 = {ratio:.1e}, rank {rank}, printed L0^2 {l0_sq:.1e}"));
    }
    Ok((ok, detail.join("; ")))
}

const SPLIT_KAPPAS: [f64; 4] = [1e-3, -1e-3, 1e-4, -1e-4];

fn splitting_asymptotics() -> Outcome {
    let ar = asymptotic_check(Family::AttractingRepelling, 1.1, 0.5, &SPLIT_KAPPAS)?;
    let at = asymptotic_check(Family::Attracting, 2.5, 0.5, &SPLIT_KAPPAS)?;
    let eq = asymptotic_check(Family::Attracting, 2.5, 1.0, &SPLIT_KAPPAS)?;
    let picks = [
        ("repelling family", ar.check("b0_pair")),
        ("repelling family", ar.check("b0_sqrt3_pair")),
        ("attracting mu = 0.5", at.check("charpoly_kappa_coefficient")),
        ("attracting mu = 1", eq.check("first_pair_slope")),
        ("attracting mu = 1", eq.check("second_pair_slope")),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, c) in picks {
        let c = c.expect("check is always produced for this family");
        let pass = c.rel_error < 1e-2;
        ok &= pass;
        detail.push(format!(
            "{label} {}: fitted {:.6} vs {:.6} ({}{:.2e})",
            c.name,
            c.fitted,
            c.printed,
            if pass { "" } else { "FAIL " },
            c.rel_error
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn antipodal_duality() -> Outcome {
    let mut worst = Worst::default();
    let (mut pairs, mut mismatches) = (0, Vec::new());
    for mu in [0.75, 1.0] {
        let attr = ModelParams::normalized(1.0, mu, PotentialFamily::attracting())?;
        let rep = ModelParams::normalized(1.0, mu, PotentialFamily::repelling())?;
        for j in 0..20 {
            let q = PI * (j as f64 + 0.5) / 20.0;
            let a_set = classify_re(&attr, PI - q)?;
            let r_set = classify_re(&rep, q)?;
            if a_set.equilibria.len() != r_set.equilibria.len() {
                mismatches.push(format!("count at mu = {mu}, q = {q:.4}"));
                continue;
            }
            for a in &a_set.equilibria {
                let d = antipodal_dual(a)?;
                let Some(r) = r_set.find(d.branch) else {
                    mismatches.push(format!("{} missing at mu = {mu}, q = {q:.4}", d.branch));
                    continue;
                };
                let diff = (d.state.to_vector() - r.state.to_vector()).amax();
                worst.push(diff, 1e-10 * r.state.to_vector().amax().max(1.0), || format!("{} at q = {q:.4}", r.branch));
                if analyze(a)?.classification != analyze(r)?.classification {
                    mismatches.push(format!("verdict {} vs {} at mu = {mu}, q = {q:.4}", a.branch, r.branch));
                }
                pairs += 1;
            }
        }
    }
    Ok((
        worst.ok() && mismatches.is_empty(),
        format!("{pairs} dual pairs, worst/bound {:.2e} ({}); mismatches: {mismatches:?}", worst.ratio, worst.at),
    ))
}

/// q† for equal masses sits at the right angle, where the isosceles family
/// passes from the acute (A₊) to the obtuse (A₋) root.
fn isosceles_stability_change(params: &ModelParams) -> Option<f64> {
    let unstable = |q: f64| -> Option<bool> {
        let re = classify_re(params, q).ok()?.equilibria.into_iter().next()?;
        Some(analyze(&re).ok()?.classification == StabilityClass::LinearlyUnstable)
    };
    let (mut lo, mut hi) = (FRAC_PI_2 - 0.3, FRAC_PI_2 + 0.3);
    let ulo = unstable(lo)?;
    if unstable(hi)? == ulo {
        return None;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        match unstable(mid) {
            Some(u) if u == ulo => lo = mid,
            Some(_) => hi = mid,
            // exactly at the right angle only the right-angled family exists
            None => return Some(mid),
        }
    }
    Some(0.5 * (lo + hi))
}

fn single_loss(params: &ModelParams, which: ABranch, range: (f64, f64)) -> Result<Option<f64>> {
    let t = detect_q_transitions(&q_sweep(params, which, range, 60)?);
    let losses: Vec<f64> = t.iter().filter(|t| t.kind == TransitionKind::StabilityLoss).map(|t| t.parameter).collect();
    Ok(if losses.len() == 1 { Some(losses[0]) } else { None })
}

fn critical_angles_dual_method() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for mu in [0.25, 0.5, 0.75, 1.0] {
        let rep = ModelParams::normalized(1.0, mu, PotentialFamily::repelling())?;
        let spectral = if mu == 1.0 {
            isosceles_stability_change(&rep)
        } else {
            single_loss(&rep, ABranch::Plus, (0.0, FRAC_PI_2))?
        };
        let root = critical_angles(mu, 1.0, Interaction::Repelling)?.q_dagger;
        let d_err = match (spectral, root) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        };
        let attr = ModelParams::normalized(-1.0, mu, PotentialFamily::attracting())?;
        let spectral = single_loss(&attr, ABranch::Minus, (0.05, 4.0))?;
        let root = critical_angles(mu, -1.0, Interaction::Attracting)?.q_star;
        let s_err = match (spectral, root) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        };
        ok &= d_err < 1e-6 && s_err < 1e-6;
        detail.push(format!("mu = {mu}: |q_dagger diff| {d_err:.1e}, |q_star diff| {s_err:.1e}"));
    }
    Ok((ok, detail.join("; ")))
}

fn leaf_signatures() -> Outcome {
    use crate::stability::hessian_on_leaf;
    let rep = |mu: f64| ModelParams::normalized(1.0, mu, PotentialFamily::repelling());
    let mut cases = Vec::new();
    for mu in [0.25, 0.5, 0.75] {
        let qd = critical_angles(mu, 1.0, Interaction::Repelling)?.q_dagger.unwrap_or(f64::NAN);
        let p = rep(mu)?;
        let pick = |q: f64| -> Result<_> { Ok(classify_re(&p, q)?.equilibria[0].clone()) };
        cases.push((format!("acute below q_dagger, mu = {mu}"), pick(0.5 * qd)?, "+++-"));
        cases.push((format!("acute above q_dagger, mu = {mu}"), pick(0.5 * (qd + FRAC_PI_2))?, "++--"));
        cases.push((format!("obtuse, mu = {mu}"), pick(2.0 * PI / 3.0)?, "++--"));
    }
    let p = rep(1.0)?;
    for q in [0.6, 1.2] {
        cases.push((format!("isosceles acute q = {q}"), classify_re(&p, q)?.equilibria[0].clone(), "+++-"));
    }
    for q in [2.0, 2.6] {
        cases.push((format!("isosceles obtuse q = {q}"), classify_re(&p, q)?.equilibria[0].clone(), "++--"));
    }
    let fam = classify_re(&p, FRAC_PI_2)?.right_angled.expect("equal masses at the right angle");
    cases.push(("right-angled theta = 0.3".into(), fam.member(0.3)?, "++--"));
    let mut bad = Vec::new();
    for (label, re, expected) in &cases {
        let got = hessian_on_leaf(re)?.signs;
        if got != *expected {
            bad.push(format!("{label}: {got} (expected {expected})"));
        }
    }
    Ok((bad.is_empty(), format!("{} cases; mismatches: {bad:?}", cases.len())))
}

fn family_sweeps() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let t = family_sweep(Family::Attracting, 2.5, 0.5, (-0.2, 0.2), 41)?;
    for r in &t.rows {
        let label = if r.kappa < 0.0 {
            REBranch::Elliptic
        } else if r.kappa == 0.0 {
            REBranch::Keplerian
        } else {
            REBranch::AcuteAttracting
        };
        let sign_ok = if r.kappa == 0.0 { r.casimir.abs() < 1e-12 } else { r.casimir.signum() == r.kappa.signum() };
        if r.branch != label || r.classification != StabilityClass::Elliptic || !sign_ok {
            ok = false;
            notes.push(format!("attracting kappa = {}: {} {} C = {:.3e}", r.kappa, r.branch, r.classification, r.casimir));
        }
    }
    let t = family_sweep(Family::AttractingRepelling, 1.1, 0.5, (-0.2, 0.2), 41)?;
    for r in &t.rows {
        let (label, class) = if r.kappa < 0.0 {
            (REBranch::Hyperbolic, StabilityClass::LinearlyUnstable)
        } else if r.kappa == 0.0 {
            (REBranch::PerpendicularFlat, StabilityClass::DegenerateNilpotent)
        } else {
            (REBranch::AcuteRepelling, StabilityClass::LinearlyUnstable)
        };
        if r.branch != label || r.classification != class || !(r.casimir > 0.0) {
            ok = false;
            notes.push(format!("repelling kappa = {}: {} {} C = {:.3e}", r.kappa, r.branch, r.classification, r.casimir));
        }
    }
    Ok((ok, format!("2 sweeps of {} rows; problems: {notes:?}", t.rows.len())))
}

fn dynamics_and_reconstruction() -> Outcome {
    let mut drift = Worst::default();
    let mut dist = Worst::default();
    // elliptic equilibria only: unstable ones leave at the rate set by rounding
    let mut res = Vec::new();
    for (k, q, mu) in [(0.2, 1.1, 0.5), (-0.2, 1.5, 0.75), (0.0, 2.0, 1.0)] {
        res.push(Family::Attracting.member(k, q, mu)?);
    }
    let sphere = ModelParams::normalized(1.0, 0.75, PotentialFamily::repelling())?;
    res.push(classify_re(&sphere, 2.0 * PI / 3.0)?.equilibria[0].clone());
    for re in res {
        let k = re.params.k();
        let v = body_velocities(&re.params, &re.state)?;
        let rate = if k > 0.0 { sphere_angles(&re)?.omega } else { v.fixed_rows::<3>(1).norm() };
        let t_end = 10.0 * 2.0 * PI / rate;
        let traj = integrate_with(&re.params, &re.state, &IntegrateOptions::new(t_end, 1e-12).sampled(200))?;
        let s0 = re.state.to_vector();
        let worst = traj.states.iter().map(|s| (s.to_vector() - s0).amax()).fold(0.0, f64::max);
        drift.push(worst, 1e-8 * s0.amax().max(1.0), || format!("{} kappa = {k}", re.branch));
        let rec = reconstruct(&re.params, &traj, &GroupElement::identity())?;
        dist.push(rec.distance_error, 1e-7, || format!("{} kappa = {k}", re.branch));
    }
    // no force in the plane: both particles move on parallel lines
    let params = ModelParams::normalized(0.0, 0.5, PotentialFamily::curvature())?;
    let q = 1.3;
    let s = ReducedState::new(q, 0.0, 0.0, 1.5 * 0.4 / q, 0.4);
    let traj = integrate_with(&params, &s, &IntegrateOptions::new(5.0, 1e-12).sampled(20))?;
    let g0 = exp_group(0.0, &AlgebraElement::new(0.3, -0.2, 0.7), 1.0);
    let rec = reconstruct(&params, &traj, &g0)?;
    let cross = |u: &nalgebra::Vector3<f64>, v: &nalgebra::Vector3<f64>| u[0] * v[1] - u[1] * v[0];
    let d1 = rec.x1.last().map(|p| p.to_vector() - rec.x1[0].to_vector()).unwrap_or_default();
    let d2 = rec.x2.last().map(|p| p.to_vector() - rec.x2[0].to_vector()).unwrap_or_default();
    let mut col = cross(&d1, &d2).abs() / (d1.norm() * d2.norm()).max(1e-300);
    for (a, b) in rec.x1.iter().zip(&rec.x2) {
        col = col.max(cross(&(a.to_vector() - rec.x1[0].to_vector()), &d1).abs() / d1.norm());
        col = col.max(cross(&(b.to_vector() - rec.x2[0].to_vector()), &d2).abs() / d2.norm());
    }
    let moving = d1.norm() > 0.1 && d2.norm() > 0.1;
    let ok = drift.ok() && dist.ok() && col < 1e-8 && moving;
    Ok((
        ok,
        format!(
            "state drift/bound {:.2e} ({}); distance error/bound {:.2e}; collinearity {col:.1e}",
            drift.ratio, drift.at, dist.ratio
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion_is_none() {
        assert!(run_criterion(0).is_none());
        assert!(run_criterion(12).is_none());
    }

    #[test]
    fn jacobi_identity_holds_for_the_bracket() {
        let s = ReducedState::new(1.0, 0.3, -0.2, 0.7, 1.1);
        assert!(jacobi_residual(0.4, &s) < 1e-14);
    }
}
