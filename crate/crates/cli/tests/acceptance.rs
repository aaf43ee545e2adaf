//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use autotherm::analytics::{
    bisect_root, cold_heat_flow, dicke_max_efficiency, max_achievable_efficiency_coherence,
    max_achievable_efficiency_refrigeration, refrigeration_threshold, second_law_bound, Regime,
};
use autotherm::battery::{build_dicke_state, build_squeezed_thermal_with, BatteryInstance, BatterySpec};
use autotherm::dynamics::{evolve, evolve_from, medium_thermal_state, EvolveOptions, Part, Trajectory};
use autotherm::machine::{flat_band_machine, MachineConfig, Medium};
use autotherm::operator::{c, diag_real, ComplexMatrix};
use autotherm::oracle::{compare_with_formulas, g_sweep, loglog_slope, RelaxOptions};
use autotherm::par::{try_map_collect, Execution};
use autotherm::thermometry::{
    apparent_temperature, apparent_temperature_coherence_form, apparent_temperature_correlation_form,
    apparent_temperature_nondegenerate_ladder, apparent_temperature_squeezed, coherence_data, correlation_data,
    max_apparent_temperature, thermal_ladder_energy,
};
use autotherm::tol::Tolerances;
use autotherm::{DensityMatrix, Error, C64};
use autotherm_cli::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const T_C: f64 = 1.0;
const T_H: f64 = 2.0;
const NU0: f64 = 1.0;
const BAND_WIDTH: f64 = 0.5;
const BAND_HEIGHT: f64 = 0.05;

const SLOPE_MIN: f64 = 2.7;
/// Multiple of error_order accepted as "within the order-g^3 band".
const BAND_K: f64 = 10.0;
const FLOW_GS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
const ORACLE_GS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
const THRESHOLD_TOL: f64 = 1e-6;
const THRESHOLD_BISECT_TOL: f64 = 1e-10;
const ORACLE_THRESHOLD_G: f64 = 0.02;
const ORACLE_BISECT_TOL: f64 = 1e-4;
const THERMAL_BETA_TOL: f64 = 1e-9;
const CLOSED_FORM_TOL: f64 = 1e-9;
const SQUEEZED_TOL: f64 = 1e-5;
const SQUEEZED_CUTOFF: usize = 60;
const SQUEEZED_SAMPLES: usize = 10;
const MAX_RATIO_TARGET: f64 = 1.5;
const MAX_RATIO_TOL: f64 = 0.01;
const SPOHN_FLOOR: f64 = -1e-9;
const RANDOM_BATTERIES: usize = 50;
const EFFICIENCY_G: f64 = 0.01;
const SEED: u64 = 0x5eed_a11c;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn machine(omega0: f64, g: f64, medium: Medium, battery: BatterySpec) -> MachineConfig {
    flat_band_machine(omega0, NU0, g, medium, battery, T_C, T_H, BAND_WIDTH, BAND_HEIGHT).unwrap()
}

fn tls_machine(omega0: f64, g: f64, battery: BatterySpec) -> MachineConfig {
    machine(omega0, g, Medium::TwoLevel, battery)
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    DensityMatrix::from_unnormalized(&g * g.adjoint()).unwrap()
}

/// beta from the lowering part of the coupling observable, read off a diagonal Hamiltonian.
fn brute_beta(spec: &BatterySpec, state: &DensityMatrix) -> f64 {
    let h = spec.hamiltonian().matrix().clone();
    let x = spec.coupling_observable().matrix().clone();
    let d = h.nrows();
    let mut a = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                assert!(h[(i, j)].norm() < 1e-14, "battery Hamiltonian is not diagonal");
            }
            if ((h[(j, j)] - h[(i, i)]).re - spec.nu0).abs() < 1e-9 {
                a[(i, j)] = x[(i, j)];
            }
        }
    }
    let up = state.expect(&(a.adjoint() * &a)).re;
    let down = state.expect(&(&a * a.adjoint())).re;
    (down / up).ln() / spec.nu0
}

fn after_transient<'a>(traj: &'a Trajectory, cfg: &MachineConfig, multiple: f64) -> impl Iterator<Item = usize> + 'a {
    let t0 = multiple * cfg.tau_es();
    (0..traj.len()).filter(move |&k| traj.times[k] > t0)
}

/// Largest |E_S_dot| / error_order after 5 tau_es.
fn steady_medium_ratio(traj: &Trajectory, cfg: &MachineConfig) -> f64 {
    after_transient(traj, cfg, 5.0)
        .map(|k| traj.reports[k].e_s_dot.abs() / cfg.error_order())
        .fold(0.0, f64::max)
}

#[derive(Default)]
struct Ledger {
    /// max |E_S_dot| / error_order per trajectory suite.
    medium: Vec<(&'static str, f64)>,
}

fn criterion_1(ledger: &mut Ledger) -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    for (label, t_r) in [("refrigerating", -2.0), ("extracting", 0.7)] {
        let spec = BatterySpec::ladder(2, NU0).unwrap();
        let battery = spec.thermal_state(t_r).unwrap();
        let runs = try_map_collect(&FLOW_GS, Execution::Parallel, |&g| {
            let cfg = tls_machine(1.0, g, spec.clone());
            evolve(&cfg, &battery, 20.0 * cfg.tau_es(), 5.0).map(|t| (cfg, t))
        })
        .unwrap();
        let mut hot = Vec::new();
        let mut battery_side = Vec::new();
        for (cfg, traj) in &runs {
            let (w, n) = (cfg.omega0, cfg.nu0);
            let late: Vec<usize> = after_transient(traj, cfg, 15.0).collect();
            hot.push(late.iter().map(|&k| (traj.reports[k].q_c / w + traj.reports[k].q_h / (w + n)).abs()).fold(0.0, f64::max));
            battery_side.push(late.iter().map(|&k| (traj.reports[k].q_c / w + traj.reports[k].e_r_dot / n).abs()).fold(0.0, f64::max));
            worst = worst.max(steady_medium_ratio(traj, cfg));
        }
        let s1 = loglog_slope(&FLOW_GS, &hot);
        let s2 = loglog_slope(&FLOW_GS, &battery_side);
        pass &= s1 >= SLOPE_MIN && s2 >= SLOPE_MIN;
        details.push(format!("{label}: slopes {s1:.2}, {s2:.2}"));
    }
    ledger.medium.push(("flow identity", worst));
    outcome(pass, format!("{} (min {SLOPE_MIN})", details.join("; ")))
}

fn phaseonium(coherence: f64) -> DensityMatrix {
    let mut m = diag_real(&[0.4, 0.4, 0.2]);
    m[(0, 1)] = c(coherence);
    m[(1, 0)] = c(coherence);
    DensityMatrix::new(m).unwrap()
}

fn criterion_2() -> Outcome {
    let systems: Vec<(&str, MachineConfig, DensityMatrix)> = {
        let tls = BatterySpec::ladder(2, NU0).unwrap();
        let three = BatterySpec::ladder(3, NU0).unwrap();
        let lambda = BatterySpec::degenerate_ladder(vec![2, 1], NU0).unwrap();
        let ho = flat_band_machine(
            1.0,
            NU0,
            0.01,
            Medium::TruncatedOscillator { cutoff: 6 },
            tls.clone(),
            0.25,
            0.5,
            BAND_WIDTH,
            BAND_HEIGHT,
        )
        .unwrap();
        vec![
            ("TLS x TLS", tls_machine(1.0, 0.01, tls.clone()), tls.thermal_state(-2.0).unwrap()),
            ("TLS x 3-level", tls_machine(0.7, 0.01, three.clone()), three.thermal_state(-1.5).unwrap()),
            ("TLS x Lambda", tls_machine(0.7, 0.01, lambda), phaseonium(-0.3)),
            ("HO(6) x TLS", ho, tls.thermal_state(-2.0).unwrap()),
        ]
    };
    let mut pass = true;
    let mut details = Vec::new();
    for (label, cfg, battery) in &systems {
        assert!(cfg.medium.dim() * cfg.battery.dim() <= 24);
        let cmps = g_sweep(cfg, battery, &ORACLE_GS, &RelaxOptions::default(), Execution::Parallel).unwrap();
        let dq: Vec<f64> = cmps.iter().map(|c| c.dq_c()).collect();
        let slope = loglog_slope(&ORACLE_GS, &dq);
        pass &= slope >= SLOPE_MIN;
        details.push(format!("{label} {slope:.2}"));
    }
    outcome(pass, format!("|dq_c| slopes: {} (min {SLOPE_MIN})", details.join(", ")))
}

fn criterion_3(ledger: &mut Ledger) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let omega0 = 0.7;
    let specs = [
        BatterySpec::ladder(2, NU0).unwrap(),
        BatterySpec::ladder(3, NU0).unwrap(),
        BatterySpec::degenerate_ladder(vec![2, 1], NU0).unwrap(),
        BatterySpec::degenerate_ladder(vec![1, 2], NU0).unwrap(),
        BatterySpec::spin_ensemble(2, NU0).unwrap(),
    ];
    let cases: Vec<(BatterySpec, DensityMatrix)> = (0..RANDOM_BATTERIES)
        .map(|k| {
            let spec = specs[k % specs.len()].clone();
            let state = random_state(&mut rng, spec.dim());
            (spec, state)
        })
        .collect();
    let opts = EvolveOptions {
        terms: Part::Stationary,
        ..EvolveOptions::default()
    };
    let runs = try_map_collect(&cases, Execution::Parallel, |(spec, state)| {
        let cfg = tls_machine(omega0, EFFICIENCY_G, spec.clone());
        let t_end = 10.0 * cfg.tau_es();
        evolve_from(&cfg, &medium_thermal_state(&cfg)?, state, t_end, 5.0, &opts).map(|t| (cfg, t))
    })
    .unwrap();
    let target = omega0 / NU0;
    let (mut points, mut worst_flow, mut worst_eta) = (0usize, 0.0f64, 0.0f64);
    let mut medium = 0.0f64;
    for (cfg, traj) in &runs {
        medium = medium.max(steady_medium_ratio(traj, cfg));
        for k in after_transient(traj, cfg, 5.0) {
            let r = &traj.reports[k];
            if r.regime != Regime::Refrigeration {
                continue;
            }
            points += 1;
            worst_flow = worst_flow.max((r.q_c - target * (-r.e_r_dot)).abs() / cfg.error_order());
            worst_eta = worst_eta.max((r.eta - target).abs());
        }
    }
    ledger.medium.push(("random batteries", medium));
    let refrigerating = runs
        .iter()
        .filter(|(cfg, t)| after_transient(t, cfg, 5.0).any(|k| t.reports[k].regime == Regime::Refrigeration))
        .count();
    outcome(
        points > 0 && worst_flow <= BAND_K,
        format!(
            "{refrigerating}/{RANDOM_BATTERIES} batteries refrigerate, {points} points; max |q_c - (omega0/nu0)(-E_R_dot)| = {worst_flow:.2} error_order (max {BAND_K}), max |eta - omega0/nu0| = {worst_eta:.1e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let spec = BatterySpec::ladder(2, NU0).unwrap();
    let mut worst = 0.0f64;
    for t_r in [10.0, 5.0, -2.0, -0.5] {
        let b = spec.thermal_state(t_r).unwrap();
        let target = refrigeration_threshold(T_C, T_H, NU0, 1.0 / t_r);
        let root = bisect_root(
            |w| Ok(cold_heat_flow(&tls_machine(w, 0.01, spec.clone()), &b)?.q_c),
            0.3,
            6.0,
            THRESHOLD_BISECT_TOL,
        )
        .unwrap();
        worst = worst.max((root - target).abs() / NU0);
    }
    let t_r = 10.0;
    let b = spec.thermal_state(t_r).unwrap();
    let target = refrigeration_threshold(T_C, T_H, NU0, 1.0 / t_r);
    let opts = RelaxOptions::default();
    let oracle_root = bisect_root(
        |w| Ok(compare_with_formulas(&tls_machine(w, ORACLE_THRESHOLD_G, spec.clone()), &b, &opts)?.oracle.q_c),
        target - 0.1,
        target + 0.1,
        ORACLE_BISECT_TOL,
    )
    .unwrap();
    let oracle_dev = (oracle_root - target).abs();
    outcome(
        worst < THRESHOLD_TOL && oracle_dev < ORACLE_THRESHOLD_G,
        format!(
            "formulas {worst:.1e} nu0 (max {THRESHOLD_TOL:.0e}); oracle at g = {ORACLE_THRESHOLD_G}: {oracle_root:.5} vs {target:.5} (max g)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let specs = [
        ("ladder(5)", BatterySpec::ladder(5, NU0).unwrap()),
        ("HO(40)", BatterySpec::oscillator(40, NU0).unwrap()),
        ("Dicke N=4", BatterySpec::spin_ensemble(4, NU0).unwrap()),
    ];
    let temps: Vec<f64> = (0..=40).map(|k| 10f64.powf(-1.0 + 2.0 * k as f64 / 40.0)).collect();
    let mut worst = 0.0f64;
    for (_, spec) in &specs {
        for &t in &temps {
            let inst = BatteryInstance::new(spec.clone(), spec.thermal_state(t).unwrap()).unwrap();
            let beta = apparent_temperature(&inst).unwrap().beta;
            worst = worst.max((beta - 1.0 / t).abs());
        }
    }
    outcome(
        worst < THERMAL_BETA_TOL,
        format!("{} batteries x {} temperatures, max |beta - 1/T| = {worst:.1e} (max {THERMAL_BETA_TOL:.0e})", specs.len(), temps.len()),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let (mut coh, mut corr, mut ladder, mut squeezed) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for degeneracies in [vec![2, 1], vec![1, 2], vec![1, 2, 1], vec![2, 2, 2], vec![3, 1, 2], vec![1, 3, 3, 1]] {
        let spec = BatterySpec::degenerate_ladder(degeneracies, NU0).unwrap();
        for _ in 0..10 {
            let state = random_state(&mut rng, spec.dim());
            let d = coherence_data(&BatteryInstance::new(spec.clone(), state.clone()).unwrap()).unwrap();
            let beta = apparent_temperature_coherence_form(&d.populations, &d.coherence_sums, &d.degeneracies, NU0)
                .unwrap()
                .beta;
            coh = coh.max((beta - brute_beta(&spec, &state)).abs());
        }
    }
    for count in 2..=4 {
        let spec = BatterySpec::spin_ensemble(count, NU0).unwrap();
        let mut states: Vec<DensityMatrix> = (0..10).map(|_| random_state(&mut rng, spec.dim())).collect();
        states.extend((1..count).map(|n_e| build_dicke_state(count, n_e).unwrap()));
        for state in states {
            let d = correlation_data(&BatteryInstance::new(spec.clone(), state.clone()).unwrap()).unwrap();
            let beta = apparent_temperature_correlation_form(d.n_plus, d.n_minus, d.c, NU0).unwrap().beta;
            corr = corr.max((beta - brute_beta(&spec, &state)).abs());
        }
    }
    for levels in 3..=8 {
        let spec = BatterySpec::ladder(levels, NU0).unwrap();
        for _ in 0..10 {
            let state = random_state(&mut rng, levels);
            let beta = apparent_temperature_nondegenerate_ladder(state.population(0), state.population(levels - 1), NU0)
                .unwrap()
                .beta;
            ladder = ladder.max((beta - brute_beta(&spec, &state)).abs());
        }
    }
    let (mut accepted, mut truncated) = (0, 0);
    while accepted < SQUEEZED_SAMPLES && accepted + truncated < 10 * SQUEEZED_SAMPLES {
        let t_r = rng.gen_range(0.2..1.0);
        let r = rng.gen_range(0.0..1.0);
        let inst = match build_squeezed_thermal_with(SQUEEZED_CUTOFF, NU0, t_r, r, &Tolerances::default()) {
            Ok(inst) => inst,
            Err(Error::Truncation { .. }) => {
                truncated += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let beta = apparent_temperature_squeezed(t_r, r, NU0).unwrap().beta;
        squeezed = squeezed.max((beta - brute_beta(inst.spec(), inst.state())).abs());
        accepted += 1;
    }
    outcome(
        coh < CLOSED_FORM_TOL
            && corr < CLOSED_FORM_TOL
            && ladder < CLOSED_FORM_TOL
            && accepted == SQUEEZED_SAMPLES
            && squeezed < SQUEEZED_TOL,
        format!(
            "max |dbeta|: coherence {coh:.1e}, correlation {corr:.1e}, ladder {ladder:.1e} (max {CLOSED_FORM_TOL:.0e}); squeezed N_cut={SQUEEZED_CUTOFF} {squeezed:.1e} (max {SQUEEZED_TOL:.0e}) over {accepted} states, {truncated} draws rejected by the truncation check"
        ),
    )
}

fn coherence_eta(degeneracies: [usize; 2], populations: [f64; 3], block: usize, coherence: f64) -> (f64, bool) {
    let spec = BatterySpec::degenerate_ladder(degeneracies.to_vec(), NU0).unwrap();
    let mut m = diag_real(&populations);
    m[(block, block + 1)] = c(coherence);
    m[(block + 1, block)] = c(coherence);
    let inst = BatteryInstance::new(spec, DensityMatrix::new(m).unwrap()).unwrap();
    let d = coherence_data(&inst).unwrap();
    let beta0 = (d.rho_minus() / d.rho_plus()).ln() / NU0;
    let e = max_achievable_efficiency_coherence(
        T_C,
        T_H,
        NU0,
        beta0,
        d.coherence_plus(),
        d.coherence_minus(),
        d.rho_plus(),
        d.rho_minus(),
    )
    .unwrap();
    (e.eta_ac, e.benefit)
}

fn criterion_7() -> Outcome {
    let temps: Vec<f64> = (0..=4000).map(|k| 10f64.powf(-1.0 + 4.0 * k as f64 / 4000.0)).collect();
    let sup = temps
        .iter()
        .map(|&t| max_apparent_temperature(thermal_ladder_energy(t, NU0, 3), NU0, 3).unwrap().value().temperature() / t)
        .fold(f64::NEG_INFINITY, f64::max);
    let a = (sup - MAX_RATIO_TARGET).abs() <= MAX_RATIO_TOL;

    let grid: Vec<f64> = (-7..=7).filter(|&k| k != 0).map(|k| 0.05 * k as f64).collect();
    let mut b = true;
    let (lambda0, _) = coherence_eta([2, 1], [0.4, 0.4, 0.2], 0, 0.0);
    let (v0, _) = coherence_eta([1, 2], [0.2, 0.4, 0.4], 1, 0.0);
    for &cc in &grid {
        let (eta, flag) = coherence_eta([2, 1], [0.4, 0.4, 0.2], 0, cc);
        b &= (eta > lambda0) == (cc < 0.0) && flag == (cc < 0.0);
        let (eta, flag) = coherence_eta([1, 2], [0.2, 0.4, 0.4], 1, cc);
        b &= (eta > v0) == (cc > 0.0) && flag == (cc > 0.0);
    }

    let mut c_ok = true;
    let mut cases = 0;
    for count in 2..=6usize {
        for n_e in 1..count {
            let n_g = count - n_e;
            let eta = dicke_max_efficiency(count, n_e, T_C, T_H, NU0).unwrap();
            let beta0 = (n_g as f64 / n_e as f64).ln() / NU0;
            let uncorrelated = max_achievable_efficiency_refrigeration(T_C, T_H, beta0);
            c_ok &= (eta >= uncorrelated) == (n_g >= n_e);
            let spec = BatterySpec::spin_ensemble(count, NU0).unwrap();
            let beta = brute_beta(&spec, &build_dicke_state(count, n_e).unwrap());
            c_ok &= (max_achievable_efficiency_refrigeration(T_C, T_H, beta) - eta).abs() < 1e-9;
            cases += 1;
        }
    }
    outcome(
        a && b && c_ok,
        format!(
            "(a) sup T_max/T_R = {sup:.4} (1.5 +- {MAX_RATIO_TOL}) {}; (b) {} coherence signs {}; (c) {cases} Dicke states {}",
            ok(a),
            2 * grid.len(),
            ok(b),
            ok(c_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn criterion_8(ledger: &mut Ledger) -> Outcome {
    let omega0 = 0.7;
    let cases: Vec<(BatterySpec, f64, f64)> = [
        (BatterySpec::ladder(2, NU0).unwrap(), -2.0),
        (BatterySpec::ladder(2, NU0).unwrap(), -0.8),
        (BatterySpec::ladder(3, NU0).unwrap(), -1.5),
        (BatterySpec::ladder(4, NU0).unwrap(), 20.0),
        (BatterySpec::spin_ensemble(2, NU0).unwrap(), -3.0),
    ]
    .into_iter()
    .flat_map(|(spec, t_r)| FLOW_GS[..3].iter().map(move |&g| (spec.clone(), t_r, g)))
    .collect();
    let runs = try_map_collect(&cases, Execution::Parallel, |(spec, t_r, g)| {
        let cfg = tls_machine(omega0, *g, spec.clone());
        let b = spec.thermal_state(*t_r).unwrap();
        evolve(&cfg, &b, 10.0 * cfg.tau_es(), 2.0).map(|t| (cfg, t))
    })
    .unwrap();
    let target = omega0 / NU0;
    let (mut points, mut worst_slack, mut spohn) = (0usize, f64::INFINITY, f64::INFINITY);
    let mut medium = 0.0f64;
    for (cfg, traj) in &runs {
        medium = medium.max(steady_medium_ratio(traj, cfg));
        let s_dot = traj.entropy_rate();
        spohn = spohn.min(traj.entropy_production.iter().cloned().fold(f64::INFINITY, f64::min));
        for k in after_transient(traj, cfg, 5.0) {
            let r = &traj.reports[k];
            if r.regime != Regime::Refrigeration || !(r.e_r_dot < 0.0) {
                continue;
            }
            points += 1;
            let bound = second_law_bound(T_C, T_H, s_dot[k], r.e_r_dot, None).unwrap().bound;
            worst_slack = worst_slack.min((bound - target) * (-r.e_r_dot) / cfg.error_order());
        }
    }
    ledger.medium.push(("second law", medium));
    outcome(
        points > 0 && worst_slack >= -BAND_K && spohn >= SPOHN_FLOOR,
        format!(
            "{points} refrigeration points; min (bound - omega0/nu0)(-E_R_dot) = {worst_slack:.2} error_order (min -{BAND_K}); min Spohn rate {spohn:.1e} (min {SPOHN_FLOOR:.0e})"
        ),
    )
}

fn criterion_9(ledger: &Ledger) -> Outcome {
    let worst = ledger.medium.iter().map(|m| m.1).fold(0.0, f64::max);
    let parts: Vec<String> = ledger.medium.iter().map(|(n, v)| format!("{n} {v:.2}")).collect();
    outcome(
        !ledger.medium.is_empty() && worst < BAND_K,
        format!("max |E_S_dot| after 5 tau_es in error_order units: {} (max {BAND_K})", parts.join(", ")),
    )
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn cli_run(scenario: &Path, out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_autotherm"))
        .args(["run", scenario.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"])
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut scenarios: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    scenarios.sort();
    let (mut identical, mut round_trip) = (true, true);
    for s in &scenarios {
        let stem = s.file_stem().unwrap().to_string_lossy().into_owned();
        let (a, b, c) = (root.path().join(format!("{stem}-a")), root.path().join(format!("{stem}-b")), root.path().join(format!("{stem}-c")));
        if !(cli_run(s, &a) && cli_run(s, &b) && cli_run(&a.join("scenario.toml"), &c)) {
            return outcome(false, format!("{stem}: CLI run failed"));
        }
        identical &= dir_contents(&a) == dir_contents(&b);
        round_trip &= dir_contents(&a) == dir_contents(&c);
        let text = std::fs::read_to_string(s).unwrap();
        let once = Scenario::from_toml(&text).unwrap().to_toml().unwrap();
        round_trip &= Scenario::from_toml(&once).unwrap().to_toml().unwrap() == once;
    }
    outcome(
        identical && round_trip,
        format!("{} scenarios: reruns byte-identical {}, round-trip idempotent {}", scenarios.len(), ok(identical), ok(round_trip)),
    )
}

fn main() {
    let mut ledger = Ledger::default();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{status}] {id:>2} {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
    };
    report(1, "flow-ratio identity", &mut || criterion_1(&mut ledger));
    report(2, "oracle equivalence", &mut criterion_2);
    report(3, "efficiency constancy", &mut || criterion_3(&mut ledger));
    report(4, "refrigeration threshold", &mut criterion_4);
    report(5, "thermal apparent temperature", &mut criterion_5);
    report(6, "closed forms vs definition", &mut criterion_6);
    report(7, "quantitative anchors", &mut criterion_7);
    report(8, "second-law dominance", &mut || criterion_8(&mut ledger));
    report(9, "medium energetic steady state", &mut || criterion_9(&ledger));
    report(10, "CLI determinism and schema", &mut criterion_10);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
