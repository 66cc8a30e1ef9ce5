//! Adaptive DOP853 with dense output, generic over the state dimension.

use nalgebra::SVector;

use super::dop853_tableau::{A, B, C, D, E3, E5};
use crate::error::{Error, Result};

const STAGES: usize = 12;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

pub(crate) type Rhs<'a, const N: usize> = dyn Fn(f64, &SVector<f64, N>) -> Result<SVector<f64, N>> + 'a;

/// Dense solution values at the requested times.
pub(crate) struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<SVector<f64, N>>,
    pub steps: usize,
}

/// Where to report the solution.
pub(crate) enum Output<'a> {
    /// Every accepted step, starting with t0.
    Steps,
    /// Exactly these times (increasing, inside [t0, t_end]).
    At(&'a [f64]),
}

fn rms<const N: usize>(v: &SVector<f64, N>) -> f64 {
    (v.norm_squared() / N as f64).sqrt()
}

struct Interpolant<const N: usize> {
    t_old: f64,
    h: f64,
    y_old: SVector<f64, N>,
    f: [SVector<f64, N>; 7],
}

impl<const N: usize> Interpolant<N> {
    fn eval(&self, t: f64) -> SVector<f64, N> {
        let x = (t - self.t_old) / self.h;
        let mut acc = SVector::<f64, N>::zeros();
        for (i, fi) in self.f.iter().rev().enumerate() {
            acc += fi;
            acc *= if i % 2 == 0 { x } else { 1.0 - x };
        }
        acc + self.y_old
    }
}

fn initial_step<const N: usize>(
    rhs: &Rhs<N>,
    t0: f64,
    y0: &SVector<f64, N>,
    f0: &SVector<f64, N>,
    rtol: f64,
    atol: f64,
) -> f64 {
    let scale = y0.map(|v| atol + v.abs() * rtol);
    let d0 = rms(&y0.component_div(&scale));
    let d1 = rms(&f0.component_div(&scale));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let d2 = match rhs(t0 + h0, &(y0 + f0 * h0)) {
        Ok(f1) => rms(&(f1 - f0).component_div(&scale)) / h0,
        Err(_) => return h0 * 1e-3,
    };
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrates y' = rhs(t, y) from t0 to t_end (forward in time).
///
/// `guard` runs after each accepted step; an error from it aborts the run.
/// A right-hand side that errors inside a trial step shrinks the step; if
/// that drives the step below the floor the run ends with `LeftDomain`,
/// reporting the first state component as the guarded coordinate.
pub(crate) fn solve<const N: usize>(
    rhs: &Rhs<N>,
    t0: f64,
    y0: SVector<f64, N>,
    t_end: f64,
    rtol: f64,
    atol: f64,
    output: Output,
    guard: &dyn Fn(f64, &SVector<f64, N>) -> Result<()>,
) -> Result<Solution<N>> {
    let mut sol = Solution { times: Vec::new(), states: Vec::new(), steps: 0 };
    let mut next_out = 0usize;
    let wanted: &[f64] = match output {
        Output::Steps => {
            sol.times.push(t0);
            sol.states.push(y0);
            &[]
        }
        Output::At(ts) => ts,
    };
    let emit_at = |sol: &mut Solution<N>, next_out: &mut usize, t: f64, y: &SVector<f64, N>| {
        while *next_out < wanted.len() && wanted[*next_out] <= t {
            sol.times.push(wanted[*next_out]);
            sol.states.push(*y);
            *next_out += 1;
        }
    };
    if matches!(output, Output::At(_)) {
        emit_at(&mut sol, &mut next_out, t0, &y0);
    }

    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y)?;
    let mut h_abs = initial_step(rhs, t0, &y0, &f, rtol, atol).min(t_end - t0);
    let mut k = [SVector::<f64, N>::zeros(); 16];

    while t < t_end {
        let min_step = 10.0 * f64::EPSILON * t.abs().max(1e-12);
        let mut rejected = false;
        let mut domain_error: Option<Error> = None;
        let (t_new, y_new, f_new, h) = loop {
            if h_abs < min_step {
                return Err(match domain_error {
                    Some(_) => Error::LeftDomain { q: y[0], t },
                    None => Error::StepFailure { t, h: h_abs },
                });
            }
            let t_new = (t + h_abs).min(t_end);
            let h = t_new - t;
            match trial_step(rhs, t, &y, &f, h, &mut k) {
                Err(e) => {
                    domain_error = Some(e);
                    h_abs *= 0.5;
                    rejected = true;
                    continue;
                }
                Ok((y_new, f_new)) => {
                    let scale = y.zip_map(&y_new, |a, b| atol + a.abs().max(b.abs()) * rtol);
                    let err = error_norm(&k, h, &scale);
                    if err < 1.0 {
                        let mut factor = if err == 0.0 { MAX_FACTOR } else { MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT)) };
                        if rejected {
                            factor = factor.min(1.0);
                        }
                        h_abs *= factor;
                        break (t_new, y_new, f_new, h);
                    }
                    h_abs *= MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
                    rejected = true;
                }
            }
        };
        sol.steps += 1;
        if next_out < wanted.len() && wanted[next_out] <= t_new {
            let dense = interpolant(rhs, t, &y, &y_new, &f_new, h, &mut k)?;
            while next_out < wanted.len() && wanted[next_out] <= t_new {
                let ts = wanted[next_out];
                sol.times.push(ts);
                sol.states.push(if ts == t_new { y_new } else { dense.eval(ts) });
                next_out += 1;
            }
        }
        t = t_new;
        y = y_new;
        f = f_new;
        if matches!(output, Output::Steps) {
            sol.times.push(t);
            sol.states.push(y);
        }
        guard(t, &y)?;
    }
    Ok(sol)
}

fn trial_step<const N: usize>(
    rhs: &Rhs<N>,
    t: f64,
    y: &SVector<f64, N>,
    f: &SVector<f64, N>,
    h: f64,
    k: &mut [SVector<f64, N>; 16],
) -> Result<(SVector<f64, N>, SVector<f64, N>)> {
    k[0] = *f;
    for s in 1..STAGES {
        let mut dy = SVector::<f64, N>::zeros();
        for (j, kj) in k.iter().enumerate().take(s) {
            if A[s][j] != 0.0 {
                dy += kj * A[s][j];
            }
        }
        k[s] = rhs(t + C[s] * h, &(y + dy * h))?;
    }
    let mut incr = SVector::<f64, N>::zeros();
    for (j, kj) in k.iter().enumerate().take(STAGES) {
        incr += kj * B[j];
    }
    let y_new = y + incr * h;
    let f_new = rhs(t + h, &y_new)?;
    k[STAGES] = f_new;
    Ok((y_new, f_new))
}

fn error_norm<const N: usize>(k: &[SVector<f64, N>; 16], h: f64, scale: &SVector<f64, N>) -> f64 {
    let mut e5 = SVector::<f64, N>::zeros();
    let mut e3 = SVector::<f64, N>::zeros();
    for j in 0..=STAGES {
        e5 += k[j] * E5[j];
        e3 += k[j] * E3[j];
    }
    let e5 = e5.component_div(scale).norm_squared();
    let e3 = e3.component_div(scale).norm_squared();
    if e5 == 0.0 && e3 == 0.0 {
        return 0.0;
    }
    h.abs() * e5 / ((e5 + 0.01 * e3) * N as f64).sqrt()
}

fn interpolant<const N: usize>(
    rhs: &Rhs<N>,
    t_old: f64,
    y_old: &SVector<f64, N>,
    y: &SVector<f64, N>,
    f_new: &SVector<f64, N>,
    h: f64,
    k: &mut [SVector<f64, N>; 16],
) -> Result<Interpolant<N>> {
    for s in STAGES + 1..16 {
        let mut dy = SVector::<f64, N>::zeros();
        for (j, kj) in k.iter().enumerate().take(s) {
            if A[s][j] != 0.0 {
                dy += kj * A[s][j];
            }
        }
        k[s] = rhs(t_old + C[s] * h, &(y_old + dy * h))?;
    }
    let delta = y - y_old;
    let mut f = [SVector::<f64, N>::zeros(); 7];
    f[0] = delta;
    f[1] = k[0] * h - delta;
    f[2] = delta * 2.0 - (f_new + k[0]) * h;
    for (i, row) in D.iter().enumerate() {
        let mut acc = SVector::<f64, N>::zeros();
        for (j, kj) in k.iter().enumerate() {
            if row[j] != 0.0 {
                acc += kj * row[j];
            }
        }
        f[3 + i] = acc * h;
    }
    Ok(Interpolant { t_old, h, y_old: *y_old, f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    fn oscillator(_t: f64, y: &Vector2<f64>) -> Result<Vector2<f64>> {
        Ok(Vector2::new(y[1], -y[0]))
    }

    #[test]
    fn harmonic_oscillator_to_high_accuracy() {
        let sol = solve(&oscillator, 0.0, Vector2::new(1.0, 0.0), 20.0, 1e-12, 1e-12, Output::Steps, &|_, _| Ok(())).unwrap();
        let y = sol.states.last().unwrap();
        assert!((y[0] - 20f64.cos()).abs() < 1e-10);
        assert!((y[1] + 20f64.sin()).abs() < 1e-10);
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dense_output_between_steps() {
        let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let sol = solve(&oscillator, 0.0, Vector2::new(1.0, 0.0), 10.0, 1e-11, 1e-11, Output::At(&ts), &|_, _| Ok(())).unwrap();
        assert_eq!(sol.times, ts);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn failing_rhs_surfaces_its_error() {
        // y' = 1 but only defined for y < 1: the solver cannot pass y = 1.
        let rhs = |_t: f64, y: &Vector2<f64>| {
            if y[0] >= 1.0 {
                Err(Error::OutOfInterval { kappa: 0.0, q: y[0] })
            } else {
                Ok(Vector2::new(1.0, 0.0))
            }
        };
        let r = solve(&rhs, 0.0, Vector2::new(0.0, 0.0), 2.0, 1e-9, 1e-9, Output::Steps, &|_, _| Ok(()));
        assert!(matches!(r, Err(Error::LeftDomain { .. })));
    }
}
