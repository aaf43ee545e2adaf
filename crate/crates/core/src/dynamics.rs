//! Second-order master equation for the medium and battery, integrated in the
//! interaction picture with respect to H_SR.

use serde::{Deserialize, Serialize};

use crate::analytics::{classify, HeatFlowReport, Regime};
use crate::bath::BathSide;
use crate::battery::BatterySpec;
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorOptions, StepStats};
use crate::machine::{JointSystem, MachineConfig, Medium};
use crate::operator::{
    c, eigenoperators, eigh, identity, norm, partial_trace_first, partial_trace_second, tensor,
    thermal_state, trace_product, trace_product_re, ComplexMatrix, DensityMatrix, C64, I,
};
use crate::tol::NUM_FLOOR;

#[derive(Debug, Clone)]
pub struct SecularTerm {
    pub frequency: f64,
    pub rate_c: C64,
    pub rate_h: C64,
    pub op: ComplexMatrix,
}

impl SecularTerm {
    /// Gamma(Omega) summed over both baths.
    pub fn rate(&self) -> C64 {
        self.rate_c + self.rate_h
    }
}

/// Operators entering the time-dependent correction map.
#[derive(Debug, Clone)]
pub struct LambdaTerms {
    /// (omega, C(omega)) for omega = +-omega0.
    pub c_ops: Vec<(f64, ComplexMatrix)>,
    /// (omega, A_S(omega)) on the joint space.
    pub a_ops: Vec<(f64, ComplexMatrix)>,
    /// (omega, dGamma_C/domega, dGamma_H/domega).
    pub d_gamma: Vec<(f64, C64, C64)>,
}

/// One contribution rate * (X rho Y^dagger - Y^dagger X rho) + h.c.; growing
/// terms carry an extra factor exp(i phase t) t.
#[derive(Debug, Clone)]
struct Term {
    x: ComplexMatrix,
    y_adj: ComplexMatrix,
    y_adj_x: ComplexMatrix,
    rate_c: C64,
    rate_h: C64,
    phase: Option<f64>,
    lambda: bool,
}

impl Term {
    fn new(x: ComplexMatrix, y: &ComplexMatrix, rate_c: C64, rate_h: C64, phase: Option<f64>, lambda: bool) -> Self {
        let y_adj = y.adjoint();
        let y_adj_x = &y_adj * &x;
        Self {
            x,
            y_adj,
            y_adj_x,
            rate_c,
            rate_h,
            phase,
            lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    All,
    Secular,
    /// Both correction-map terms.
    Lambda,
    /// Only the terms growing linearly in t.
    Growing,
    /// Everything except the terms growing in t.
    Stationary,
}

#[derive(Debug, Clone)]
pub struct DissipatorSet {
    pub secular_terms: Vec<SecularTerm>,
    pub lambda_terms: LambdaTerms,
    terms: Vec<Term>,
    dim: usize,
}

impl DissipatorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest violation of A(-Omega) = A(Omega)^dagger and C(-omega) = C(omega)^dagger.
    pub fn pairing_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in &self.secular_terms {
            let partner = self
                .secular_terms
                .iter()
                .find(|u| (u.frequency + t.frequency).abs() < 1e-12 * (1.0 + t.frequency.abs()));
            worst = worst.max(match partner {
                Some(u) => norm(&(&u.op - t.op.adjoint())),
                None => f64::INFINITY,
            });
        }
        let cs = &self.lambda_terms.c_ops;
        for (w, op) in cs {
            if let Some((_, partner)) = cs.iter().find(|(v, _)| (v + w).abs() < 1e-12) {
                worst = worst.max(norm(&(partner - op.adjoint())));
            }
        }
        worst
    }

    /// L(t) rho for one bath (or both when `side` is None).
    pub fn generator(&self, t: f64, rho: &ComplexMatrix, side: Option<BathSide>, part: Part) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for term in &self.terms {
            let keep = match part {
                Part::All => true,
                Part::Secular => !term.lambda,
                Part::Lambda => term.lambda,
                Part::Growing => term.phase.is_some(),
                Part::Stationary => term.phase.is_none(),
            };
            if !keep {
                continue;
            }
            let mut rate = match side {
                None => term.rate_c + term.rate_h,
                Some(BathSide::Cold) => term.rate_c,
                Some(BathSide::Hot) => term.rate_h,
            };
            if let Some(phase) = term.phase {
                rate *= (I * (phase * t)).exp() * t;
            }
            if rate == C64::new(0.0, 0.0) {
                continue;
            }
            let gain = &term.x * rho * &term.y_adj;
            let loss = &term.y_adj_x * rho;
            out += (gain - loss) * rate;
        }
        let adj = out.adjoint();
        out + adj
    }
}

fn single_frequency_check(battery: &BatterySpec) -> Result<()> {
    let set = eigenoperators(&battery.coupling_observable(), &battery.hamiltonian(), None)?;
    let nu0 = battery.nu0;
    for f in set.frequencies() {
        if (f.abs() - nu0).abs() > 1e-9 * nu0 {
            return Err(Error::UnsupportedBattery(format!(
                "coupling observable has a transition at {f}, expected only +-{nu0}"
            )));
        }
    }
    Ok(())
}

/// Second-order eigenoperators, rates and correction-map data for a machine.
pub fn build_dissipators(cfg: &MachineConfig) -> Result<DissipatorSet> {
    cfg.validate()?;
    single_frequency_check(&cfg.battery)?;
    let j = cfg.joint();
    Ok(assemble(cfg, &j))
}

fn assemble(cfg: &MachineConfig, j: &JointSystem) -> DissipatorSet {
    let (w0, n0) = (cfg.omega0, cfg.nu0);
    let (ds, dr) = (j.ds, j.dr);
    let d = j.dim();
    let id = identity(d);
    let a_r = tensor(&identity(ds), &j.a_r_lowering);
    let a_rd = a_r.adjoint();
    let a_s = tensor(&j.a_s_lowering, &identity(dr));
    let a_sd = a_s.adjoint();
    let theta = cfg.g * cfg.alpha / n0;

    let odd = &a_r - &a_rd;
    let even = (&a_r * &a_r + &a_rd * &a_rd) * c(0.5) - (&a_rd * &a_r + &a_r * &a_rd);
    let dressed = |w: f64, s_op: &ComplexMatrix| {
        let tw = theta * w;
        s_op * (&id - &odd * c(tw) + &even * c(tw * tw))
    };

    let bc = &cfg.bath_c;
    let bh = &cfg.bath_h;
    let mut secular_terms = vec![
        (w0, dressed(w0, &a_s)),
        (-w0, dressed(-w0, &a_sd)),
        (w0 + n0, &a_s * &a_r * c(theta * w0)),
        (w0 - n0, &a_s * &a_rd * c(-theta * w0)),
        (-w0 + n0, &a_sd * &a_r * c(-theta * w0)),
        (-w0 - n0, &a_sd * &a_rd * c(theta * w0)),
    ]
    .into_iter()
    .map(|(f, op)| SecularTerm {
        frequency: f,
        rate_c: bc.gamma(f),
        rate_h: bh.gamma(f),
        op,
    })
    .collect::<Vec<_>>();
    secular_terms.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));

    let hs2 = &j.h_s * &j.h_s;
    let comm_r = (&a_rd * &a_r - &a_r * &a_rd) * c(1.0 / n0);
    let g2 = (cfg.g * cfg.alpha).powi(2);
    let c_of = |s_op: &ComplexMatrix| (&hs2 * s_op - s_op * &hs2) * &comm_r * (I * g2);
    let a_ops = vec![(w0, a_s.clone()), (-w0, a_sd.clone())];
    let c_ops: Vec<(f64, ComplexMatrix)> = a_ops.iter().map(|(w, op)| (*w, c_of(op))).collect();
    let d_gamma = a_ops
        .iter()
        .map(|(w, _)| (*w, bc.gamma_prime(*w), bh.gamma_prime(*w)))
        .collect::<Vec<_>>();

    let mut terms: Vec<Term> = secular_terms
        .iter()
        .filter(|s| s.rate() != C64::new(0.0, 0.0))
        .map(|s| Term::new(s.op.clone(), &s.op, s.rate_c, s.rate_h, None, false))
        .collect();
    if cfg.g != 0.0 {
        for ((w, cw), (_, aw)) in c_ops.iter().zip(&a_ops) {
            // -i dGamma [A^dag C rho - C rho A^dag] = i dGamma [C rho A^dag - A^dag C rho]
            terms.push(Term::new(cw.clone(), aw, I * bc.gamma_prime(*w), I * bh.gamma_prime(*w), None, true));
        }
        for (w, cw) in &c_ops {
            let aw = &a_ops.iter().find(|(v, _)| v == w).expect("paired").1;
            for (wp, awp) in &a_ops {
                let cwp = &c_ops.iter().find(|(v, _)| v == wp).expect("paired").1;
                let (gc, gh) = (bc.gamma(*w), bh.gamma(*w));
                terms.push(Term::new(cw.clone(), awp, gc, gh, Some(wp - w), true));
                terms.push(Term::new(aw.clone(), cwp, gc, gh, Some(wp - w), true));
            }
        }
    }
    terms.retain(|t| t.rate_c != C64::new(0.0, 0.0) || t.rate_h != C64::new(0.0, 0.0));
    DissipatorSet {
        secular_terms,
        lambda_terms: LambdaTerms { c_ops, a_ops, d_gamma },
        terms,
        dim: d,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveOptions {
    pub integrator: IntegratorOptions,
    /// Which generator terms to integrate.
    pub terms: Part,
    /// Restart the interaction-picture clock every this many time units.
    pub rebase_interval: Option<f64>,
    /// Reports before transient_multiple * tau_es are flagged as transient.
    pub transient_multiple: f64,
    /// Reports after validity_multiple * tau_R are flagged.
    pub validity_multiple: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions::default(),
            terms: Part::All,
            rebase_interval: None,
            transient_multiple: 5.0,
            validity_multiple: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub battery_states: Vec<DensityMatrix>,
    pub reports: Vec<HeatFlowReport>,
    /// S(rho_R).
    pub entropies: Vec<f64>,
    /// <H_R> in the Schroedinger picture.
    pub battery_energy: Vec<f64>,
    pub medium_energy: Vec<f64>,
    pub joint_energy: Vec<f64>,
    /// <A_S^dagger(omega0) A_S(omega0)>: rho_ee or <a^dagger a>.
    pub medium_population: Vec<f64>,
    /// Apparent inverse temperature of rho_R (NaN when undefined).
    pub beta_app: Vec<f64>,
    /// dS(rho_SR)/dt - q_c/T_C - q_h/T_H.
    pub entropy_production: Vec<f64>,
    /// Contribution of the t-linear correction terms to q_c and q_h.
    pub lambda_q_c: Vec<f64>,
    pub lambda_q_h: Vec<f64>,
    pub transient: Vec<bool>,
    pub beyond_validity: Vec<bool>,
    pub max_trace_error: f64,
    pub psd_clips: usize,
    pub stats: StepStats,
    /// Final interaction-picture state and its local clock.
    pub final_state: DensityMatrix,
    pub final_clock: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// dS(rho_R)/dt by central differences (one-sided at the ends).
    pub fn entropy_rate(&self) -> Vec<f64> {
        finite_difference(&self.times, &self.entropies)
    }

    /// dE_R/dt of the Schroedinger-picture battery energy.
    pub fn battery_energy_rate(&self) -> Vec<f64> {
        finite_difference(&self.times, &self.battery_energy)
    }
}

pub fn finite_difference(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                0.0
            } else if i == 0 {
                (y[1] - y[0]) / (t[1] - t[0])
            } else if i == n - 1 {
                (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2])
            } else {
                (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1])
            }
        })
        .collect()
}

/// Evolves rho_S^th(T_C) (x) rho_R with default options.
pub fn evolve(cfg: &MachineConfig, initial_battery: &DensityMatrix, t_end: f64, output_step: f64) -> Result<Trajectory> {
    let medium = medium_thermal_state(cfg)?;
    evolve_from(cfg, &medium, initial_battery, t_end, output_step, &EvolveOptions::default())
}

pub fn medium_thermal_state(cfg: &MachineConfig) -> Result<DensityMatrix> {
    let h = crate::operator::HermitianOperator::new(cfg.medium.hamiltonian(cfg.omega0))?;
    thermal_state(&h, cfg.t_cold())
}

/// Propagator exp(-i H t) from a precomputed eigendecomposition.
struct Propagator {
    energies: Vec<f64>,
    vectors: ComplexMatrix,
}

impl Propagator {
    fn new(h: &ComplexMatrix) -> Result<Self> {
        let (energies, vectors) = eigh(h)?;
        Ok(Self { energies, vectors })
    }

    fn at(&self, t: f64) -> ComplexMatrix {
        let phases = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|e| (-I * (e * t)).exp()),
        ));
        &self.vectors * phases * self.vectors.adjoint()
    }
}

struct Sampler<'a> {
    cfg: &'a MachineConfig,
    set: &'a DissipatorSet,
    j: &'a JointSystem,
    prop: &'a Propagator,
    part: Part,
    a_r: ComplexMatrix,
    h_r_local: ComplexMatrix,
    medium_number: ComplexMatrix,
    tau_es: f64,
    tau_r: f64,
    opts: &'a EvolveOptions,
    traj: Trajectory,
}

impl Sampler<'_> {
    fn record(&mut self, t_global: f64, clock: f64, rho: &mut ComplexMatrix) -> Result<()> {
        let tol = &self.cfg.tolerances;
        let herm = (&*rho + rho.adjoint()) * c(0.5);
        let (values, vectors) = eigh(&herm)?;
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -tol.psd_dyn {
            return Err(Error::Positivity {
                min_eigenvalue: min,
                time: t_global,
            });
        }
        let clipped = min < 0.0;
        let values: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
        if clipped {
            self.traj.psd_clips += 1;
            let total: f64 = values.iter().sum();
            let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                values.len(),
                values.iter().map(|v| c(v / total)),
            ));
            *rho = &vectors * diag * vectors.adjoint();
        } else {
            *rho = herm;
        }
        let trace = rho.trace();
        self.traj.max_trace_error = self.traj.max_trace_error.max((trace - c(1.0)).norm());

        let h_sr = self.j.h_sr.matrix();
        let l_c = self.set.generator(clock, rho, Some(BathSide::Cold), self.part);
        let l_h = self.set.generator(clock, rho, Some(BathSide::Hot), self.part);
        let q_c = trace_product_re(&l_c, h_sr);
        let q_h = trace_product_re(&l_h, h_sr);
        let l_all = &l_c + &l_h;
        let e_s_dot = trace_product_re(&l_all, &self.j.h_s);
        let e_r_dot = q_c + q_h - e_s_dot;
        let (lq_c, lq_h) = if matches!(self.part, Part::Secular | Part::Stationary) {
            (0.0, 0.0)
        } else {
            let lc = self.set.generator(clock, rho, Some(BathSide::Cold), Part::Growing);
            let lh = self.set.generator(clock, rho, Some(BathSide::Hot), Part::Growing);
            (trace_product_re(&lc, h_sr), trace_product_re(&lh, h_sr))
        };

        let norm_total: f64 = values.iter().sum();
        let mut log_rho = ComplexMatrix::zeros(rho.nrows(), rho.ncols());
        for (k, p) in values.iter().enumerate() {
            let p = p / norm_total;
            if p > NUM_FLOOR {
                let v = vectors.column(k);
                log_rho += &v * v.adjoint() * c(p.ln());
            }
        }
        let s_dot = -trace_product_re(&l_all, &log_rho);
        let sigma = s_dot - q_c / self.cfg.t_cold() - q_h / self.cfg.t_hot();

        let u = self.prop.at(clock);
        let schroedinger = &u * &*rho * u.adjoint();
        let (ds, dr) = (self.j.ds, self.j.dr);
        let rho_r = partial_trace_first(&schroedinger, ds, dr);
        let rho_r = (&rho_r + rho_r.adjoint()) * c(0.5 / rho_r.trace().re);
        let e_r = trace_product_re(&rho_r, &self.h_r_local);
        let n_plus = trace_product(&rho_r, &(self.a_r.adjoint() * &self.a_r)).re;
        let n_minus = trace_product(&rho_r, &(&self.a_r * self.a_r.adjoint())).re;
        let beta = if n_plus > NUM_FLOOR && n_minus > NUM_FLOOR {
            (n_minus.ln() - n_plus.ln()) / self.cfg.nu0
        } else {
            f64::NAN
        };
        let rho_s = partial_trace_second(rho, ds, dr);
        let battery = DensityMatrix::from_trusted(rho_r);
        let entropy = battery.von_neumann_entropy()?;

        let error_order = self.cfg.error_order();
        let regime = classify(q_c, e_r_dot, error_order);
        let eta = match regime {
            Regime::Refrigeration => q_c / (-e_r_dot),
            Regime::EnergyExtraction => e_r_dot / q_h,
            Regime::Idle => 0.0,
        };
        let tr = &mut self.traj;
        tr.times.push(t_global);
        tr.battery_states.push(battery);
        tr.reports.push(HeatFlowReport {
            q_c,
            q_h,
            e_r_dot,
            e_s_dot,
            eta,
            regime,
            error_order,
        });
        tr.entropies.push(entropy);
        tr.battery_energy.push(e_r);
        tr.medium_energy.push(trace_product_re(rho, &self.j.h_s));
        tr.joint_energy.push(trace_product_re(rho, h_sr));
        tr.medium_population.push(trace_product_re(&rho_s, &self.medium_number));
        tr.beta_app.push(beta);
        tr.entropy_production.push(sigma);
        tr.lambda_q_c.push(lq_c);
        tr.lambda_q_h.push(lq_h);
        tr.transient.push(t_global < self.opts.transient_multiple * self.tau_es);
        tr.beyond_validity.push(t_global > self.opts.validity_multiple * self.tau_r);
        Ok(())
    }
}

/// Evolves rho_S (x) rho_R from t = 0, sampling every `output_step` up to `t_end`.
pub fn evolve_from(
    cfg: &MachineConfig,
    medium: &DensityMatrix,
    battery: &DensityMatrix,
    t_end: f64,
    output_step: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(output_step > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!(
            "need output_step > 0 and t_end >= 0, got {output_step} and {t_end}"
        )));
    }
    if medium.dim() != cfg.medium.dim() || battery.dim() != cfg.battery.dim() {
        return Err(Error::Shape("initial states do not match the machine dimensions".into()));
    }
    let set = build_dissipators(cfg)?;
    let j = cfg.joint();
    let prop = Propagator::new(j.h_sr.matrix())?;
    let rho0 = tensor(medium.matrix(), battery.matrix());

    let n_out = (t_end / output_step + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=n_out).map(|k| k as f64 * output_step).collect();
    let part = opts.terms;
    let l = cfg.medium.lowering();
    let placeholder = DensityMatrix::from_trusted(rho0.clone());
    let mut sampler = Sampler {
        cfg,
        set: &set,
        j: &j,
        prop: &prop,
        part,
        a_r: cfg.battery.lowering_operator(),
        h_r_local: cfg.battery.hamiltonian().into_matrix(),
        medium_number: l.adjoint() * l,
        tau_es: cfg.tau_es(),
        tau_r: if cfg.g > 0.0 { cfg.tau_r() } else { f64::INFINITY },
        opts,
        traj: Trajectory {
            times: Vec::new(),
            battery_states: Vec::new(),
            reports: Vec::new(),
            entropies: Vec::new(),
            battery_energy: Vec::new(),
            medium_energy: Vec::new(),
            joint_energy: Vec::new(),
            medium_population: Vec::new(),
            beta_app: Vec::new(),
            entropy_production: Vec::new(),
            lambda_q_c: Vec::new(),
            lambda_q_h: Vec::new(),
            transient: Vec::new(),
            beyond_validity: Vec::new(),
            max_trace_error: 0.0,
            psd_clips: 0,
            stats: StepStats::default(),
            final_state: placeholder,
            final_clock: 0.0,
        },
    };

    let segment = match opts.rebase_interval {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(Error::Domain(format!("rebase interval must be positive, got {s}"))),
        None => f64::INFINITY,
    };
    let mut rho = rho0;
    let mut start = 0.0;
    let mut next = 0usize;
    let mut clock;
    loop {
        let stop = (start + segment).min(t_end);
        let mut local: Vec<f64> = Vec::new();
        let mut global_index = Vec::new();
        while next < times.len() && times[next] <= stop + 1e-12 * stop.max(1.0) {
            local.push((times[next] - start).max(0.0));
            global_index.push(next);
            next += 1;
        }
        let seg_len = stop - start;
        let ends_on_sample = local.last().is_some_and(|t| (t - seg_len).abs() <= 1e-12 * seg_len.max(1.0));
        if !ends_on_sample {
            local.push(seg_len);
        }
        let set_ref = &set;
        let (y, stats) = integrate(
            |s, y| set_ref.generator(s, y, None, part),
            0.0,
            rho,
            &local,
            &opts.integrator,
            |i, s, y| {
                if i < global_index.len() {
                    sampler.record(times[global_index[i]], s, y)?;
                }
                Ok(())
            },
        )?;
        let tr = &mut sampler.traj.stats;
        tr.accepted += stats.accepted;
        tr.rejected += stats.rejected;
        tr.rhs_evals += stats.rhs_evals;
        rho = y;
        clock = seg_len;
        if stop >= t_end {
            break;
        }
        let u = prop.at(seg_len);
        rho = &u * rho * u.adjoint();
        start = stop;
    }
    let mut traj = sampler.traj;
    traj.final_state = DensityMatrix::from_trusted((&rho + rho.adjoint()) * c(0.5));
    traj.final_clock = clock;
    Ok(traj)
}

/// Rates of the medium population equation for a fixed battery state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MediumRates {
    /// d rho_ee/dt = -R_+ rho_ee + R_- rho_gg.
    TwoLevel { r_plus: f64, r_minus: f64 },
    /// d<a^dagger a>/dt = -lambda <a^dagger a> + r.
    Oscillator { lambda: f64, r: f64 },
}

fn ladder_weights(cfg: &MachineConfig, battery_state: &DensityMatrix) -> Result<(f64, f64)> {
    if battery_state.dim() != cfg.battery.dim() {
        return Err(Error::Shape("battery state does not match the battery".into()));
    }
    let a = cfg.battery.lowering_operator();
    Ok((
        battery_state.expect(&(a.adjoint() * &a)).re,
        battery_state.expect(&(&a * a.adjoint())).re,
    ))
}

/// Second-order medium rates. The battery-dependent cold-bath term enters
/// through the dressed medium frequency omega0 + g^2 alpha^2 omega0^2 (n+ - n-)/nu0
/// and so only slows the downward rate.
pub fn medium_rates(cfg: &MachineConfig, battery_state: &DensityMatrix) -> Result<MediumRates> {
    cfg.validate()?;
    let (n_plus, n_minus) = ladder_weights(cfg, battery_state)?;
    let (w, n, t_c) = (cfg.omega0, cfg.nu0, cfg.t_cold());
    let k = (cfg.g * cfg.alpha * w).powi(2);
    let (gc_up, gc_down) = (cfg.bath_c.g(w), cfg.bath_c.g(-w));
    let (gh_up, gh_down) = (cfg.bath_h.g(w + n), cfg.bath_h.g(-(w + n)));
    let shift = k * (n_plus - n_minus) / (n * t_c);
    Ok(match cfg.medium {
        Medium::TwoLevel => MediumRates::TwoLevel {
            r_plus: gc_up * (1.0 + shift) + k * gh_up * n_plus / (n * n),
            r_minus: gc_down + k * gh_down * n_minus / (n * n),
        },
        Medium::TruncatedOscillator { .. } => {
            let nb = 1.0 / (w / t_c).exp_m1();
            let n2 = 2.0 * nb * nb + nb;
            let n2_plus_n = 2.0 * nb * nb + 2.0 * nb;
            MediumRates::Oscillator {
                lambda: gc_up - gc_down + k / (n * n) * (gh_up * n_plus - gh_down * n_minus),
                r: gc_down + k * gh_down * n_minus / (n * n) - (gc_up * n2 + gc_down * n2_plus_n) * shift,
            }
        }
    })
}

/// Two-level rates with the cold-bath correction applied to both R_+ and R_-
/// and the doubled sum over +-nu0. Kept for comparison with [`medium_rates`].
pub fn printed_two_level_rates(cfg: &MachineConfig, battery_state: &DensityMatrix) -> Result<(f64, f64)> {
    cfg.validate()?;
    let (n_plus, n_minus) = ladder_weights(cfg, battery_state)?;
    let (w, n, t_c) = (cfg.omega0, cfg.nu0, cfg.t_cold());
    let k = (cfg.g * cfg.alpha * w).powi(2);
    let factor = 1.0 + k * (n_plus - n_minus) / (n * t_c);
    Ok((
        cfg.bath_c.g(w) * factor + k * cfg.bath_h.g(w + n) * n_plus / (n * n),
        cfg.bath_c.g(-w) * factor + k * cfg.bath_h.g(-(w + n)) * n_minus / (n * n),
    ))
}

/// Quasi-steady <A_S^dagger A_S> of the medium for a fixed battery state:
/// r / lambda for an oscillator, R_- / R for a two-level medium.
pub fn quasi_steady_medium_population(cfg: &MachineConfig, battery_state: &DensityMatrix) -> Result<f64> {
    match medium_rates(cfg, battery_state)? {
        MediumRates::TwoLevel { r_plus, r_minus } => {
            let r = r_plus + r_minus;
            if !(r > 0.0) {
                return Err(Error::Validity(format!("total rate R = {r:.3e} is not positive")));
            }
            Ok(r_minus / r)
        }
        MediumRates::Oscillator { lambda, r } => {
            if !(lambda > 0.0) {
                return Err(Error::Validity(format!("relaxation rate {lambda:.3e} is not positive")));
            }
            Ok(r / lambda)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DischargeCurve {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Apparent inverse temperature; NaN where undefined.
    pub beta: Vec<f64>,
}

impl DischargeCurve {
    pub fn temperatures(&self) -> Vec<f64> {
        self.beta.iter().map(|b| 1.0 / b).collect()
    }
}

/// Battery energy and apparent temperature over a long run (200 samples).
///
/// The t-linear correction terms expand the dispersive phase to first order
/// and stop being small once g^2 omega0^2 t / nu0 ~ 1, so runs on the tau_R
/// scale integrate the stationary part of the generator only.
pub fn battery_discharge_curve(cfg: &MachineConfig, initial_battery: &DensityMatrix, t_end: f64) -> Result<DischargeCurve> {
    let opts = EvolveOptions {
        terms: Part::Stationary,
        ..EvolveOptions::default()
    };
    let medium = medium_thermal_state(cfg)?;
    let traj = evolve_from(cfg, &medium, initial_battery, t_end, t_end / 200.0, &opts)?;
    Ok(DischargeCurve {
        times: traj.times,
        energy: traj.battery_energy,
        beta: traj.beta_app,
    })
}
