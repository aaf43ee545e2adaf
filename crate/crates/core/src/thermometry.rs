//! Apparent temperature of a battery and its closed forms.
//!
//! The inverse temperature `beta` is the canonical representation: an
//! infinite apparent temperature is the regular value `beta = 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::battery::{BatteryInstance, BatteryKind};
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, ONE, ZERO};
use crate::tol::NUM_FLOOR;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApparentTemperature {
    pub beta: f64,
    pub nu0: f64,
}

impl ApparentTemperature {
    pub fn from_beta(beta: f64, nu0: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::UndefinedTemperature(format!(
                "inverse apparent temperature {beta} is not finite"
            )));
        }
        Ok(Self { beta, nu0 })
    }

    /// From a temperature; +-infinity map to beta = 0, zero is rejected.
    pub fn from_temperature(t: f64, nu0: f64) -> Result<Self> {
        if t == 0.0 || t.is_nan() {
            return Err(Error::DegenerateTemperature);
        }
        Self::from_beta(1.0 / t, nu0)
    }

    /// Apparent temperature; `f64::INFINITY` when beta = 0.
    pub fn temperature(&self) -> f64 {
        if self.beta == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.beta
        }
    }
}

impl fmt::Display for ApparentTemperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "beta_app = {} (T_app = {})", self.beta, self.temperature())
    }
}

/// beta = ln(down / up) / nu0 where down = <A A^dagger> and up = <A^dagger A>.
pub fn beta_from_weights(down: f64, up: f64, nu0: f64) -> Result<ApparentTemperature> {
    if !(down > NUM_FLOOR) || !(up > NUM_FLOOR) {
        return Err(Error::UndefinedTemperature(format!(
            "ladder weights <AA+> = {down:.3e}, <A+A> = {up:.3e} must both be positive"
        )));
    }
    ApparentTemperature::from_beta((down.ln() - up.ln()) / nu0, nu0)
}

/// General definition from the battery's collective ladder operator.
pub fn apparent_temperature(battery: &BatteryInstance) -> Result<ApparentTemperature> {
    beta_from_weights(battery.n_minus(), battery.n_plus(), battery.nu0())
}

/// Coherence-resolved form: populations rho_n, coherence sums c_n and degeneracies l_n.
pub fn apparent_temperature_coherence_form(
    populations: &[f64],
    coherence_sums: &[f64],
    degeneracies: &[usize],
    nu0: f64,
) -> Result<ApparentTemperature> {
    let n = populations.len();
    if n < 2 || coherence_sums.len() != n || degeneracies.len() != n {
        return Err(Error::Shape(format!(
            "need matching populations, coherence sums and degeneracies of length >= 2 (got {}, {}, {})",
            n,
            coherence_sums.len(),
            degeneracies.len()
        )));
    }
    let l = |k: usize| degeneracies[k] as f64;
    let down: f64 = (1..n).map(|k| l(k) * (populations[k - 1] + coherence_sums[k - 1])).sum();
    let up: f64 = (1..n).map(|k| l(k - 1) * (populations[k] + coherence_sums[k])).sum();
    beta_from_weights(down, up, nu0)
}

/// Correlation-resolved form: local weights n_plus, n_minus and correlation c.
pub fn apparent_temperature_correlation_form(
    n_plus: f64,
    n_minus: f64,
    c: f64,
    nu0: f64,
) -> Result<ApparentTemperature> {
    beta_from_weights(n_minus + c, n_plus + c, nu0)
}

/// Uniform-amplitude, non-degenerate ladder: only the end populations matter.
pub fn apparent_temperature_nondegenerate_ladder(
    rho_0: f64,
    rho_top: f64,
    nu0: f64,
) -> Result<ApparentTemperature> {
    if !(0.0..=1.0).contains(&rho_0) || !(0.0..=1.0).contains(&rho_top) || rho_0 + rho_top > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "end populations rho_0 = {rho_0}, rho_N = {rho_top} are not a valid pair"
        )));
    }
    beta_from_weights(1.0 - rho_top, 1.0 - rho_0, nu0)
}

/// Squeezed thermal oscillator.
pub fn apparent_temperature_squeezed(t_r: f64, r: f64, nu0: f64) -> Result<ApparentTemperature> {
    if !(t_r > 0.0) || !(r >= 0.0) {
        return Err(Error::Domain(format!("need T_R > 0 and r >= 0, got T_R = {t_r}, r = {r}")));
    }
    if r == 0.0 {
        return ApparentTemperature::from_temperature(t_r, nu0);
    }
    let th2 = r.tanh().powi(2);
    let x = nu0 / t_r;
    // ln((th2 + e^x) / (th2 e^x + 1)) with the common e^x factored out.
    let num = (th2 * (-x).exp()).ln_1p();
    let den = (th2 + (-x).exp()).ln();
    ApparentTemperature::from_beta((num - den) / nu0, nu0)
}

/// Populations, coherence sums and degeneracies of a degenerate-ladder battery.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceData {
    pub populations: Vec<f64>,
    pub coherence_sums: Vec<f64>,
    pub degeneracies: Vec<usize>,
}

impl CoherenceData {
    /// rho^- = sum l_n rho_{n-1}, with n running over 1..=N.
    pub fn rho_minus(&self) -> f64 {
        (1..self.populations.len())
            .map(|n| self.degeneracies[n] as f64 * self.populations[n - 1])
            .sum()
    }

    /// rho^+ = sum l_{n-1} rho_n.
    pub fn rho_plus(&self) -> f64 {
        (1..self.populations.len())
            .map(|n| self.degeneracies[n - 1] as f64 * self.populations[n])
            .sum()
    }

    /// C^- = sum l_n c_{n-1}.
    pub fn coherence_minus(&self) -> f64 {
        (1..self.populations.len())
            .map(|n| self.degeneracies[n] as f64 * self.coherence_sums[n - 1])
            .sum()
    }

    /// C^+ = sum l_{n-1} c_n.
    pub fn coherence_plus(&self) -> f64 {
        (1..self.populations.len())
            .map(|n| self.degeneracies[n - 1] as f64 * self.coherence_sums[n])
            .sum()
    }
}

pub fn coherence_data(battery: &BatteryInstance) -> Result<CoherenceData> {
    let degeneracies = match &battery.spec().kind {
        BatteryKind::DegenerateLadder { degeneracies } => degeneracies.clone(),
        BatteryKind::Ladder { levels, amplitudes: None } => vec![1; *levels],
        _ => {
            return Err(Error::UnsupportedBattery(
                "coherence decomposition needs a uniform-amplitude ladder".into(),
            ))
        }
    };
    let rho = battery.state().matrix();
    let mut populations = Vec::with_capacity(degeneracies.len());
    let mut coherence_sums = Vec::with_capacity(degeneracies.len());
    let mut offset = 0;
    for &l in &degeneracies {
        let mut p = 0.0;
        let mut cs = 0.0;
        for k in 0..l {
            for kp in 0..l {
                let z = rho[(offset + k, offset + kp)].re;
                if k == kp {
                    p += z;
                } else {
                    cs += z;
                }
            }
        }
        populations.push(p);
        coherence_sums.push(cs);
        offset += l;
    }
    Ok(CoherenceData {
        populations,
        coherence_sums,
        degeneracies,
    })
}

/// Local weights and inter-site correlation of a spin-ensemble battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationData {
    pub n_plus: f64,
    pub n_minus: f64,
    pub c: f64,
}

pub fn correlation_data(battery: &BatteryInstance) -> Result<CorrelationData> {
    let count = match battery.spec().kind {
        BatteryKind::SpinEnsemble { count } => count,
        _ => {
            return Err(Error::UnsupportedBattery(
                "correlation decomposition needs a spin ensemble".into(),
            ))
        }
    };
    let sm = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    let up = sm.adjoint() * &sm;
    let down = &sm * sm.adjoint();
    let rho = battery.state();
    let mut n_plus = 0.0;
    let mut n_minus = 0.0;
    for i in 0..count {
        n_plus += rho.expect(&crate::battery::site_operator(&up, i, count)).re;
        n_minus += rho.expect(&crate::battery::site_operator(&down, i, count)).re;
    }
    Ok(CorrelationData {
        n_plus,
        n_minus,
        c: battery.n_plus() - n_plus,
    })
}

/// Local weights and correlation of N oscillators sharing n_e collective excitations.
pub fn collective_oscillator_data(count: usize, n_e: usize) -> Result<CorrelationData> {
    if count == 0 || n_e == 0 {
        return Err(Error::Domain("need at least one oscillator and one excitation".into()));
    }
    let (n, e) = (count as f64, n_e as f64);
    Ok(CorrelationData {
        n_plus: e,
        n_minus: e + n,
        c: e * (n - 1.0),
    })
}

/// Result of the maximal apparent temperature at fixed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxApparentTemperature {
    /// E_R <= nu0: the maximum is positive (or infinite, beta = 0, at E_R = nu0).
    Bounded(ApparentTemperature),
    /// E_R > nu0: the maximum is negative; carries the negative-branch value.
    Inverted(ApparentTemperature),
}

impl MaxApparentTemperature {
    pub fn value(&self) -> ApparentTemperature {
        match self {
            Self::Bounded(t) | Self::Inverted(t) => *t,
        }
    }
}

/// Smallest beta attainable by an `levels`-level uniform ladder at mean energy `e_r`.
///
/// For e = E_R/nu0 < 1 the optimum keeps all excitation in level 1, giving
/// e^{beta nu0} = 1/e. Above e = 1 the optimum fills the top level: with
/// T = levels - 1, e^{beta nu0} = (T - e)/(T - 1) while e <= T - 1 (ground
/// level empty, remainder in level 1) and (T - e)/e beyond (ground and top only).
pub fn max_apparent_temperature(e_r: f64, nu0: f64, levels: usize) -> Result<MaxApparentTemperature> {
    if levels < 3 {
        return Err(Error::Domain(format!("need at least 3 levels, got {levels}")));
    }
    let top = (levels - 1) as f64;
    let e = e_r / nu0;
    if !(e > 0.0) || e > top {
        return Err(Error::Domain(format!(
            "E_R = {e_r} outside (0, {}]",
            top * nu0
        )));
    }
    if e <= 1.0 {
        return Ok(MaxApparentTemperature::Bounded(ApparentTemperature::from_beta(
            -e.ln() / nu0,
            nu0,
        )?));
    }
    let q = if e <= top - 1.0 {
        (top - e) / (top - 1.0)
    } else {
        (top - e) / e
    };
    if !(q > 0.0) {
        return Err(Error::UndefinedTemperature(
            "a fully inverted battery has apparent temperature 0-".into(),
        ));
    }
    Ok(MaxApparentTemperature::Inverted(ApparentTemperature::from_beta(
        q.ln() / nu0,
        nu0,
    )?))
}

/// Mean energy of an `levels`-level ladder in a thermal state at `t`.
pub fn thermal_ladder_energy(t: f64, nu0: f64, levels: usize) -> f64 {
    let x = nu0 / t;
    let n = levels as f64;
    nu0 * (1.0 / x.exp_m1() - n / (n * x).exp_m1())
}
