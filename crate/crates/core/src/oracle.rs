//! Reference generator: Born-Markov (Redfield) dissipators built from the
//! exact eigenoperators of H_SR, with no expansion in g.
//!
//! This is not an exact system-bath simulation. It sits at the same
//! Born-Markov order as the perturbative master equation, so differences
//! between the two isolate the expansion in g/nu0.

use serde::{Deserialize, Serialize};

use crate::analytics::{classify, cold_heat_flow, HeatFlowReport, Regime};
use crate::bath::BathSide;
use crate::dynamics::{medium_thermal_state, quasi_steady_medium_population};
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorOptions};
use crate::machine::MachineConfig;
use crate::operator::{
    c, eigenoperators_in, partial_trace_first, partial_trace_second, spectral_decompose, tensor,
    trace_product_re, ComplexMatrix, DensityMatrix, SpectralDecomposition, I,
};
use crate::par::{map_collect, try_map_collect, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecularMode {
    /// All frequency pairs kept.
    Redfield,
    /// Pairs kept only within clusters of nearby Bohr frequencies.
    Partial,
    /// Each Bohr frequency on its own (global Lindblad form).
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleOptions {
    pub mode: SecularMode,
    /// Cluster window in units of g.
    pub window_factor: f64,
    pub dim_cap: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            mode: SecularMode::Partial,
            window_factor: 10.0,
            dim_cap: 64,
        }
    }
}

/// Jump operators of one cluster: L = sum A(Omega), L_j = sum Gamma_j(Omega) A(Omega).
#[derive(Debug, Clone)]
struct Channel {
    frequencies: Vec<f64>,
    l_adj: ComplexMatrix,
    l_c: ComplexMatrix,
    l_h: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct GlobalGenerator {
    pub dimension: usize,
    pub exact_eigenbasis: SpectralDecomposition,
    pub mode: SecularMode,
    /// Exact Bohr frequencies and eigenoperators of A_S (x) 1.
    pub eigenoperators: Vec<(f64, ComplexMatrix)>,
    channels: Vec<Channel>,
    h_sr: ComplexMatrix,
    h_s: ComplexMatrix,
    ds: usize,
    dr: usize,
    error_order: f64,
}

/// Groups sorted frequencies into runs whose neighbours lie within `window`.
fn cluster(freqs: &[f64], window: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, f) in freqs.iter().enumerate() {
        match out.last_mut() {
            Some(group) if f - freqs[*group.last().expect("non-empty")] <= window => group.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

pub fn build_global_generator(cfg: &MachineConfig) -> Result<GlobalGenerator> {
    build_global_generator_with(cfg, &OracleOptions::default())
}

pub fn build_global_generator_with(cfg: &MachineConfig, opts: &OracleOptions) -> Result<GlobalGenerator> {
    cfg.validate()?;
    let j = cfg.joint();
    let dim = j.dim();
    if dim > opts.dim_cap {
        return Err(Error::OracleSize { dim, cap: opts.dim_cap });
    }
    let spec = spectral_decompose(&j.h_sr, None)?;
    let set = eigenoperators_in(&j.a_s, &spec, 1e-9 * cfg.nu0.max(cfg.omega0))?;
    let entries: Vec<(f64, ComplexMatrix)> = set.entries().to_vec();
    let freqs: Vec<f64> = entries.iter().map(|(f, _)| *f).collect();
    let groups = match opts.mode {
        SecularMode::Redfield => vec![(0..freqs.len()).collect()],
        SecularMode::Full => (0..freqs.len()).map(|i| vec![i]).collect(),
        SecularMode::Partial => cluster(&freqs, opts.window_factor * cfg.g),
    };
    let zero = ComplexMatrix::zeros(dim, dim);
    let channels = groups
        .into_iter()
        .map(|group| {
            let mut l = zero.clone();
            let mut l_c = zero.clone();
            let mut l_h = zero.clone();
            for &i in &group {
                let (f, op) = &entries[i];
                l += op;
                l_c += op * cfg.bath_c.gamma(*f);
                l_h += op * cfg.bath_h.gamma(*f);
            }
            Channel {
                frequencies: group.iter().map(|&i| freqs[i]).collect(),
                l_adj: l.adjoint(),
                l_c,
                l_h,
            }
        })
        .collect();
    Ok(GlobalGenerator {
        dimension: dim,
        exact_eigenbasis: spec,
        mode: opts.mode,
        eigenoperators: entries,
        channels,
        h_sr: j.h_sr.matrix().clone(),
        h_s: j.h_s.clone(),
        ds: j.ds,
        dr: j.dr,
        error_order: cfg.error_order(),
    })
}

impl GlobalGenerator {
    /// Bohr frequencies grouped into the channels used by the generator.
    pub fn clusters(&self) -> Vec<Vec<f64>> {
        self.channels.iter().map(|c| c.frequencies.clone()).collect()
    }

    /// Dissipator of one bath, or both.
    pub fn dissipator(&self, rho: &ComplexMatrix, side: Option<BathSide>) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dimension, self.dimension);
        for ch in &self.channels {
            let lg = match side {
                Some(BathSide::Cold) => ch.l_c.clone(),
                Some(BathSide::Hot) => ch.l_h.clone(),
                None => &ch.l_c + &ch.l_h,
            };
            out += &lg * rho * &ch.l_adj - &ch.l_adj * &lg * rho;
        }
        let adj = out.adjoint();
        out + adj
    }

    /// Schroedinger-picture generator -i[H, rho] + D(rho).
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let comm = &self.h_sr * rho - rho * &self.h_sr;
        comm * (-I) + self.dissipator(rho, None)
    }

    /// Matrix of the generator on column-stacked density matrices.
    pub fn superoperator(&self, exec: Execution) -> ComplexMatrix {
        let n = self.dimension;
        let cols: Vec<usize> = (0..n * n).collect();
        let columns = map_collect(&cols, exec, |&k| {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(k % n, k / n)] = c(1.0);
            self.apply(&e)
        });
        let mut out = ComplexMatrix::zeros(n * n, n * n);
        for (k, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                out[(i, k)] = *v;
            }
        }
        out
    }

    /// Evolves rho for a time t and returns the final state.
    pub fn evolve(&self, rho: &DensityMatrix, t: f64, opts: &IntegratorOptions) -> Result<DensityMatrix> {
        let (y, _) = integrate(|_, y| self.apply(y), 0.0, rho.matrix().clone(), &[t], opts, |_, _, _| Ok(()))?;
        let y = (&y + y.adjoint()) * c(0.5);
        let tr = y.trace().re;
        Ok(DensityMatrix::from_trusted(y * c(1.0 / tr)))
    }

    pub fn battery_state(&self, rho: &DensityMatrix) -> DensityMatrix {
        let r = partial_trace_first(rho.matrix(), self.ds, self.dr);
        DensityMatrix::from_trusted((&r + r.adjoint()) * c(0.5))
    }

    pub fn medium_state(&self, rho: &DensityMatrix) -> DensityMatrix {
        let s = partial_trace_second(rho.matrix(), self.ds, self.dr);
        DensityMatrix::from_trusted((&s + s.adjoint()) * c(0.5))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.ds, self.dr)
    }
}

/// Heat flows Tr[D_j(rho) H_SR] from the exact generator.
pub fn oracle_heat_flows(gen: &GlobalGenerator, rho_sr: &DensityMatrix) -> HeatFlowReport {
    let rho = rho_sr.matrix();
    let d_c = gen.dissipator(rho, Some(BathSide::Cold));
    let d_h = gen.dissipator(rho, Some(BathSide::Hot));
    let q_c = trace_product_re(&d_c, &gen.h_sr);
    let q_h = trace_product_re(&d_h, &gen.h_sr);
    let e_s_dot = trace_product_re(&(d_c + d_h), &gen.h_s);
    let e_r_dot = q_c + q_h - e_s_dot;
    let regime = classify(q_c, e_r_dot, gen.error_order);
    let eta = match regime {
        Regime::Refrigeration => q_c / (-e_r_dot),
        Regime::EnergyExtraction => e_r_dot / q_h,
        Regime::Idle => 0.0,
    };
    HeatFlowReport {
        q_c,
        q_h,
        e_r_dot,
        e_s_dot,
        eta,
        regime,
        error_order: gen.error_order,
    }
}

/// Oracle and closed-form quantities on the same relaxed state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub g: f64,
    pub oracle: HeatFlowReport,
    pub formula: HeatFlowReport,
    pub medium_population_oracle: f64,
    pub medium_population_formula: f64,
}

impl OracleComparison {
    pub fn dq_c(&self) -> f64 {
        (self.oracle.q_c - self.formula.q_c).abs()
    }

    pub fn dq_h(&self) -> f64 {
        (self.oracle.q_h - self.formula.q_h).abs()
    }

    pub fn de_r(&self) -> f64 {
        (self.oracle.e_r_dot - self.formula.e_r_dot).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxOptions {
    /// Relaxation time in units of tau_es.
    pub tau_es_multiple: f64,
    pub integrator: IntegratorOptions,
    pub oracle: OracleOptions,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            tau_es_multiple: 40.0,
            integrator: IntegratorOptions::with_tolerances(1e-11, 1e-13),
            oracle: OracleOptions::default(),
        }
    }
}

/// Relaxes rho_S^th(T_C) (x) rho_R under the oracle generator for a few tens
/// of tau_es, then evaluates oracle and closed-form flows on the result.
pub fn compare_with_formulas(cfg: &MachineConfig, battery: &DensityMatrix, opts: &RelaxOptions) -> Result<OracleComparison> {
    let gen = build_global_generator_with(cfg, &opts.oracle)?;
    let medium = medium_thermal_state(cfg)?;
    let rho0 = DensityMatrix::from_trusted(tensor(medium.matrix(), battery.matrix()));
    let rho = gen.evolve(&rho0, opts.tau_es_multiple * cfg.tau_es(), &opts.integrator)?;
    let rho_r = gen.battery_state(&rho);
    let rho_s = gen.medium_state(&rho);
    let l = cfg.medium.lowering();
    Ok(OracleComparison {
        g: cfg.g,
        oracle: oracle_heat_flows(&gen, &rho),
        formula: cold_heat_flow(cfg, &rho_r)?,
        medium_population_oracle: rho_s.expect(&(l.adjoint() * &l)).re,
        medium_population_formula: quasi_steady_medium_population(cfg, &rho_r)?,
    })
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Oracle comparison at each coupling in `gs`.
pub fn g_sweep(
    cfg: &MachineConfig,
    battery: &DensityMatrix,
    gs: &[f64],
    opts: &RelaxOptions,
    exec: Execution,
) -> Result<Vec<OracleComparison>> {
    try_map_collect(gs, exec, |&g| compare_with_formulas(&cfg.with_g(g), battery, opts))
}
