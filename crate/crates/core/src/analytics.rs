//! Closed-form machine quantities: second-order heat flows, regimes,
//! thresholds and efficiency bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::MachineConfig;
use crate::operator::DensityMatrix;
use crate::thermometry::ApparentTemperature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Refrigeration,
    EnergyExtraction,
    Idle,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Refrigeration => "refrigeration",
            Regime::EnergyExtraction => "energy_extraction",
            Regime::Idle => "idle",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies by the sign of q_c, then of e_r_dot, outside a dead band.
pub fn classify(q_c: f64, e_r_dot: f64, idle_tol: f64) -> Regime {
    if q_c > idle_tol {
        Regime::Refrigeration
    } else if e_r_dot > idle_tol {
        Regime::EnergyExtraction
    } else {
        Regime::Idle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatFlowReport {
    pub q_c: f64,
    pub q_h: f64,
    pub e_r_dot: f64,
    pub e_s_dot: f64,
    pub eta: f64,
    pub regime: Regime,
    pub error_order: f64,
}

/// Second-order heat flows for a battery state (steady medium, t >> tau_es).
pub fn cold_heat_flow(cfg: &MachineConfig, battery_state: &DensityMatrix) -> Result<HeatFlowReport> {
    if battery_state.dim() != cfg.battery.dim() {
        return Err(Error::Shape(format!(
            "battery has dimension {}, state {}",
            cfg.battery.dim(),
            battery_state.dim()
        )));
    }
    let a = cfg.battery.lowering_operator();
    let n_plus = battery_state.expect(&(a.adjoint() * &a)).re;
    let n_minus = battery_state.expect(&(&a * a.adjoint())).re;
    heat_flow_from_weights(cfg, n_plus, n_minus)
}

/// Same as [`cold_heat_flow`] from the ladder weights <A^dagger A> and <A A^dagger>.
pub fn heat_flow_from_weights(cfg: &MachineConfig, n_plus: f64, n_minus: f64) -> Result<HeatFlowReport> {
    cfg.validate()?;
    let (w, n) = (cfg.omega0, cfg.nu0);
    let (t_c, t_h) = (cfg.t_cold(), cfg.t_hot());
    let gc_up = cfg.bath_c.g(w);
    let gc_down = cfg.bath_c.g(-w);
    let denominator = if cfg.medium.is_oscillator() {
        gc_up - gc_down
    } else {
        gc_up + gc_down
    };
    if !(denominator > 0.0) {
        return Err(Error::BathModel(format!(
            "prefactor denominator {denominator:.3e} is not positive"
        )));
    }
    let theta2 = (cfg.g * cfg.alpha * w / n).powi(2);
    let prefactor = w * theta2 * gc_up * cfg.bath_h.g(w + n) / denominator;
    let bracket = (-w / t_c).exp() * n_plus - (-(w + n) / t_h).exp() * n_minus;
    let q_c = prefactor * bracket;
    let q_h = -(w + n) / w * q_c;
    let e_r_dot = -(n / w) * q_c;
    let error_order = cfg.error_order();
    let regime = classify(q_c, e_r_dot, error_order);
    let eta = match regime {
        Regime::Refrigeration => w / n,
        Regime::EnergyExtraction => n / (w + n),
        Regime::Idle => 0.0,
    };
    Ok(HeatFlowReport {
        q_c,
        q_h,
        e_r_dot,
        e_s_dot: 0.0,
        eta,
        regime,
        error_order,
    })
}

fn check_temperatures(t_c: f64, t_h: f64) -> Result<()> {
    if !(t_c > 0.0 && t_h > t_c && t_h.is_finite()) {
        return Err(Error::Domain(format!("need T_H > T_C > 0, got T_C = {t_c}, T_H = {t_h}")));
    }
    Ok(())
}

/// Largest omega0 that still refrigerates; negative when no omega0 > 0 does.
pub fn refrigeration_threshold(t_c: f64, t_h: f64, nu0: f64, beta_app: f64) -> f64 {
    nu0 * t_c / (t_h - t_c) * (1.0 - t_h * beta_app)
}

pub fn max_achievable_efficiency_refrigeration(t_c: f64, t_h: f64, beta_app: f64) -> f64 {
    t_c / (t_h - t_c) * (1.0 - t_h * beta_app)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyWithBenefit {
    pub eta_ac: f64,
    /// True when the coherence or correlation term does not lower eta_ac.
    pub benefit: bool,
}

fn log_ratio(num: f64, den: f64) -> Result<f64> {
    if !(num > 0.0) || !(den > 0.0) {
        return Err(Error::Domain(format!(
            "log argument ({num}) / ({den}) is not positive"
        )));
    }
    Ok(num.ln() - den.ln())
}

/// Efficiency bound split into a population part (beta0) and a coherence part.
#[allow(clippy::too_many_arguments)]
pub fn max_achievable_efficiency_coherence(
    t_c: f64,
    t_h: f64,
    nu0: f64,
    beta0: f64,
    c_plus: f64,
    c_minus: f64,
    rho_plus: f64,
    rho_minus: f64,
) -> Result<EfficiencyWithBenefit> {
    check_temperatures(t_c, t_h)?;
    let l = log_ratio(1.0 + c_minus / rho_minus, 1.0 + c_plus / rho_plus)?;
    Ok(EfficiencyWithBenefit {
        eta_ac: t_c / (t_h - t_c) * (1.0 - t_h * beta0 - t_h / nu0 * l),
        benefit: c_plus >= c_minus * (-nu0 * beta0).exp(),
    })
}

/// Efficiency bound split into an uncorrelated part (beta0) and a correlation part.
pub fn max_achievable_efficiency_correlation(
    t_c: f64,
    t_h: f64,
    nu0: f64,
    beta0: f64,
    c: f64,
    n_plus: f64,
    n_minus: f64,
) -> Result<EfficiencyWithBenefit> {
    check_temperatures(t_c, t_h)?;
    let l = log_ratio(1.0 + c / n_minus, 1.0 + c / n_plus)?;
    Ok(EfficiencyWithBenefit {
        eta_ac: t_c / (t_h - t_c) * (1.0 - t_h * beta0 - t_h / nu0 * l),
        benefit: c * (nu0 * beta0).exp_m1() >= 0.0,
    })
}

/// Closed form for N spins in the Dicke state |N, n_e>.
pub fn dicke_max_efficiency(count: usize, n_e: usize, t_c: f64, t_h: f64, nu0: f64) -> Result<f64> {
    check_temperatures(t_c, t_h)?;
    if n_e == 0 || n_e >= count {
        return Err(Error::UndefinedTemperature(format!(
            "Dicke state |{count}, {n_e}> has no population-only apparent temperature"
        )));
    }
    let e = n_e as f64;
    let gnd = (count - n_e) as f64;
    let beta0 = (gnd / e).ln() / nu0;
    Ok(t_c / (t_h - t_c) * (1.0 - t_h * beta0 - t_h / nu0 * ((1.0 + e) / (1.0 + gnd)).ln()))
}

/// N oscillators sharing n_e collective excitations.
pub fn collective_oscillator_max_efficiency(count: usize, n_e: usize, t_c: f64, t_h: f64, nu0: f64) -> Result<f64> {
    let d = crate::thermometry::collective_oscillator_data(count, n_e)?;
    let beta0 = (d.n_minus / d.n_plus).ln() / nu0;
    Ok(max_achievable_efficiency_correlation(t_c, t_h, nu0, beta0, d.c, d.n_plus, d.n_minus)?.eta_ac)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub condition_met: bool,
    pub eta_e: f64,
    pub eta_e_bound: f64,
}

/// Charging condition, actual efficiency nu0/(omega0+nu0) and its upper bound.
///
/// Batteries with 0 < T_app <= T_C (beta >= 1/T_C) are rejected; negative
/// apparent temperatures are accepted.
pub fn extraction_condition_and_efficiency(
    t_c: f64,
    t_h: f64,
    omega0: f64,
    nu0: f64,
    beta_app: f64,
) -> Result<ExtractionReport> {
    check_temperatures(t_c, t_h)?;
    if beta_app * t_c >= 1.0 {
        return Err(Error::TrivialExtraction {
            temperature: 1.0 / beta_app,
            t_cold: t_c,
        });
    }
    Ok(ExtractionReport {
        condition_met: omega0 >= refrigeration_threshold(t_c, t_h, nu0, beta_app),
        eta_e: nu0 / (omega0 + nu0),
        eta_e_bound: (1.0 - t_c / t_h) / (1.0 - t_c * beta_app),
    })
}

/// Apparent temperature at which the battery stops exchanging energy.
pub fn steady_state_apparent_temperature(omega0: f64, nu0: f64, t_c: f64, t_h: f64) -> Result<ApparentTemperature> {
    let beta = ((omega0 + nu0) / t_h - omega0 / t_c) / nu0;
    if !beta.is_finite() || !(nu0 > 0.0) {
        return Err(Error::DegenerateSteadyState(format!(
            "omega0 = {omega0}, nu0 = {nu0}, T_C = {t_c}, T_H = {t_h}"
        )));
    }
    ApparentTemperature::from_beta(beta, nu0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondLawBound {
    pub bound: f64,
    /// Bound with the entropy-flow rate S_dot - Sigma_dot, when Sigma_dot is given.
    pub flow_bound: Option<f64>,
}

pub fn second_law_bound(
    t_c: f64,
    t_h: f64,
    entropy_rate: f64,
    e_r_dot: f64,
    production_rate: Option<f64>,
) -> Result<SecondLawBound> {
    check_temperatures(t_c, t_h)?;
    if !(e_r_dot < 0.0) {
        return Err(Error::Regime(format!(
            "second-law bound needs a discharging battery, got e_r_dot = {e_r_dot:.3e}"
        )));
    }
    let f = |s: f64| t_c / (t_h - t_c) * (1.0 + t_h * s / (-e_r_dot));
    Ok(SecondLawBound {
        bound: f(entropy_rate),
        flow_bound: production_rate.map(|p| f(entropy_rate - p)),
    })
}

/// Bisection for a sign change of `f` on [lo, hi].
pub fn bisect_root(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}] ({f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::BatterySpec;
    use crate::machine::{flat_band_machine, Medium};
    use approx::assert_abs_diff_eq;

    fn config(omega0: f64, medium: Medium) -> MachineConfig {
        flat_band_machine(omega0, 1.0, 0.01, medium, BatterySpec::ladder(2, 1.0).unwrap(), 1.0, 2.0, 0.4, 0.05).unwrap()
    }

    #[test]
    fn flow_identities_are_exact_in_the_closed_form() {
        let cfg = config(0.7, Medium::TwoLevel);
        let state = cfg.battery.thermal_state(-3.0).unwrap();
        let r = cold_heat_flow(&cfg, &state).unwrap();
        assert_abs_diff_eq!(r.q_c / 0.7 + r.q_h / 1.7, 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(r.q_c / 0.7 + r.e_r_dot / 1.0, 0.0, epsilon = 1e-18);
        assert_eq!(r.regime, Regime::Refrigeration);
        assert_eq!(r.eta, 0.7);
    }

    #[test]
    fn zero_power_at_threshold_temperature() {
        // beta that puts omega0 exactly at threshold
        let (t_c, t_h, w) = (1.0, 2.0, 0.7);
        let beta = (1.0 - w * (t_h - t_c) / t_c) / t_h;
        let cfg = config(w, Medium::TwoLevel);
        let state = cfg.battery.thermal_state(1.0 / beta).unwrap();
        let r = cold_heat_flow(&cfg, &state).unwrap();
        assert!(r.q_c.abs() < 1e-18);
        assert_eq!(r.regime, Regime::Idle);
    }

    #[test]
    fn oscillator_denominator_differs_from_two_level() {
        let state = DensityMatrix::from_populations(&[0.3, 0.7]).unwrap();
        let tls = cold_heat_flow(&config(0.7, Medium::TwoLevel), &state).unwrap();
        let ho = cold_heat_flow(&config(0.7, Medium::TruncatedOscillator { cutoff: 8 }), &state).unwrap();
        let x = (-0.7f64).exp();
        assert_abs_diff_eq!(ho.q_c / tls.q_c, (1.0 + x) / (1.0 - x), epsilon = 1e-12);
    }

    #[test]
    fn classical_battery_sign() {
        let cfg = config(0.7, Medium::TwoLevel);
        let r = heat_flow_from_weights(&cfg, 1.0, 1.0).unwrap();
        let expected = (-0.7f64).exp() - (-1.7f64 / 2.0).exp();
        assert_eq!(r.q_c > 0.0, expected > 0.0);
        assert_eq!(r.q_c > 0.0, 0.7 / 1.0 < 1.7 / 2.0);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(refrigeration_threshold(1.0, 2.0, 1.0, 0.0), 1.0);
        assert_eq!(refrigeration_threshold(1.0, 2.0, 1.0, 0.5), 0.0);
        assert_eq!(refrigeration_threshold(1.0, 2.0, 1.0, 0.25), 0.5);
        assert_eq!(max_achievable_efficiency_refrigeration(1.0, 3.0, 0.0), 0.5);
        assert_eq!(max_achievable_efficiency_refrigeration(1.0, 3.0, 1.0 / 3.0), 0.0);
    }

    #[test]
    fn dicke_examples() {
        assert_abs_diff_eq!(dicke_max_efficiency(2, 1, 1.0, 2.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dicke_max_efficiency(6, 3, 1.0, 3.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        let expected = 1.0 - 2.0 * 3f64.ln() - 2.0 * 0.5f64.ln();
        assert_abs_diff_eq!(dicke_max_efficiency(4, 1, 1.0, 2.0, 1.0).unwrap(), expected, epsilon = 1e-14);
        assert!(matches!(dicke_max_efficiency(4, 0, 1.0, 2.0, 1.0), Err(Error::UndefinedTemperature(_))));
        assert!(matches!(dicke_max_efficiency(4, 4, 1.0, 2.0, 1.0), Err(Error::UndefinedTemperature(_))));
    }

    #[test]
    fn inverted_dicke_has_no_benefit() {
        let (count, n_e) = (4.0, 3.0);
        let n_g = count - n_e;
        let beta0 = (n_g / n_e as f64).ln();
        let r = max_achievable_efficiency_correlation(1.0, 2.0, 1.0, beta0, n_e * n_g, n_e, n_g).unwrap();
        assert!(!r.benefit);
    }

    #[test]
    fn coherence_form_reduces_without_coherence() {
        let r = max_achievable_efficiency_coherence(1.0, 2.0, 1.0, 0.3, 0.0, 0.0, 0.4, 0.5).unwrap();
        assert_eq!(r.eta_ac, max_achievable_efficiency_refrigeration(1.0, 2.0, 0.3));
        assert!(r.benefit);
        assert!(matches!(
            max_achievable_efficiency_coherence(1.0, 2.0, 1.0, 0.3, 0.0, -0.6, 0.4, 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn extraction_examples() {
        let r = extraction_condition_and_efficiency(1.0, 2.0, 2.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(r.eta_e_bound, 0.5, epsilon = 1e-15);
        assert!(r.condition_met);
        let r = extraction_condition_and_efficiency(1.0, 2.0, 0.5, 1.0, 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(r.eta_e_bound, 0.75, epsilon = 1e-15);
        assert!(matches!(
            extraction_condition_and_efficiency(1.0, 2.0, 0.5, 1.0, 2.0),
            Err(Error::TrivialExtraction { .. })
        ));
    }

    #[test]
    fn threshold_is_where_both_conditions_meet() {
        let beta = 0.2;
        let w = refrigeration_threshold(1.0, 2.0, 1.0, beta);
        let r = extraction_condition_and_efficiency(1.0, 2.0, w, 1.0, beta).unwrap();
        assert!(r.condition_met);
        assert_abs_diff_eq!(max_achievable_efficiency_refrigeration(1.0, 2.0, beta), w / 1.0, epsilon = 1e-15);
    }

    #[test]
    fn steady_state_examples() {
        assert_eq!(steady_state_apparent_temperature(1.0, 1.0, 1.0, 2.0).unwrap().beta, 0.0);
        assert_eq!(steady_state_apparent_temperature(2.0, 1.0, 1.0, 2.0).unwrap().beta, -0.5);
        let small = steady_state_apparent_temperature(1e-9, 1.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(small.temperature(), 2.0, epsilon = 1e-8);
    }

    #[test]
    fn second_law_examples() {
        assert_eq!(second_law_bound(1.0, 3.0, 0.0, -1.0, None).unwrap().bound, 0.5);
        let (t_r, e_dot) = (4.0, -0.2);
        let b = second_law_bound(1.0, 2.0, e_dot / t_r, e_dot, Some(0.0)).unwrap();
        assert_abs_diff_eq!(b.bound, max_achievable_efficiency_refrigeration(1.0, 2.0, 1.0 / t_r), epsilon = 1e-15);
        assert_eq!(b.flow_bound, Some(b.bound));
        assert!(matches!(second_law_bound(1.0, 2.0, 0.0, 0.1, None), Err(Error::Regime(_))));
    }

    #[test]
    fn bisection_finds_root() {
        let r = bisect_root(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-11);
    }
}
