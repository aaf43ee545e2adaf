//! Dormand-Prince 5(4) with PI step-size control for matrix-valued states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{c, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    /// Steps below h_min_rel * max(1, |t|) raise a stiffness error.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            h_max: None,
            h_min_rel: 1e-13,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &ComplexMatrix, h: f64, terms: &[(f64, &ComplexMatrix)]) -> ComplexMatrix {
    let mut out = y.clone();
    for (a, k) in terms {
        if *a != 0.0 {
            out.zip_apply(k, |o, kv| *o += kv * c(h * a));
        }
    }
    out
}

fn error_norm(err: &ComplexMatrix, y0: &ComplexMatrix, y1: &ComplexMatrix, opts: &IntegratorOptions) -> f64 {
    let n = err.len() as f64;
    let mut acc = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
        acc += (e.norm() / sc).powi(2);
    }
    (acc / n).sqrt()
}

/// Integrates dy/dt = rhs(t, y) from t0 and calls `observe(i, t_out[i], &mut y)`
/// at each requested time. The observer may modify the state.
pub fn integrate<F, O>(
    mut rhs: F,
    t0: f64,
    y0: ComplexMatrix,
    t_out: &[f64],
    opts: &IntegratorOptions,
    mut observe: O,
) -> Result<(ComplexMatrix, StepStats)>
where
    F: FnMut(f64, &ComplexMatrix) -> ComplexMatrix,
    O: FnMut(usize, f64, &mut ComplexMatrix) -> Result<()>,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::Numerical("integrator tolerances must be positive".into()));
    }
    if t_out.iter().any(|t| !t.is_finite() || *t < t0) || t_out.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Numerical("output times must be increasing and not before t0".into()));
    }
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.rhs_evals += 1;
    let span = t_out.last().map_or(0.0, |&e| e - t0);
    let mut h = opts.h_init.unwrap_or_else(|| {
        let d0 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let d1 = k1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let guess = if d1 > 1e-300 { 0.01 * d0.max(1e-5) / d1 } else { 1e-3 };
        guess.min(span.max(1e-12))
    });
    let h_max = opts.h_max.unwrap_or(f64::INFINITY);
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;

    for (i, &target) in t_out.iter().enumerate() {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Stiffness { step: h, time: t });
            }
            h = h.min(h_max);
            let remaining = target - t;
            let clamped = h >= remaining;
            let step = if clamped { remaining } else { h };
            if step < opts.h_min_rel * t.abs().max(1.0) && !clamped {
                return Err(Error::Stiffness { step, time: t });
            }
            let k2 = rhs(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(
                t + C5 * step,
                &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                t + step,
                &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = rhs(t + step, &y_new);
            stats.rhs_evals += 6;
            let zero = ComplexMatrix::zeros(y.nrows(), y.ncols());
            let err = axpy(&zero, step, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
            let en = error_norm(&err, &y, &y_new, opts);
            if !en.is_finite() {
                return Err(Error::Numerical(format!("non-finite state at t = {t}")));
            }
            if en <= 1.0 {
                stats.accepted += 1;
                t = if clamped { target } else { t + step };
                y = y_new;
                k1 = k7;
                let en = en.max(1e-10);
                let mut fac = 0.9 * en.powf(-0.7 / 5.0) * err_old.powf(0.4 / 5.0);
                fac = fac.clamp(0.2, 10.0);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                // a step shortened to hit an output time says nothing about h
                if !clamped || step >= h {
                    h = step * fac;
                }
                err_old = en;
                last_rejected = false;
            } else {
                stats.rejected += 1;
                h = step * (0.9 * en.powf(-0.2)).max(0.2);
                last_rejected = true;
            }
        }
        let before = y.clone();
        observe(i, t, &mut y)?;
        if y != before {
            k1 = rhs(t, &y);
            stats.rhs_evals += 1;
        }
    }
    Ok((y, stats))
}
