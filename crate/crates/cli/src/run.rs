//! Executes a scenario and writes its CSV tables.

use std::path::{Path, PathBuf};

use autotherm::analytics::{
    cold_heat_flow, max_achievable_efficiency_refrigeration, refrigeration_threshold, HeatFlowReport,
};
use autotherm::battery::BatteryInstance;
use autotherm::dynamics::evolve;
use autotherm::oracle::{g_sweep, loglog_slope, RelaxOptions};
use autotherm::par::{try_map_collect, Execution};
use autotherm::thermometry::apparent_temperature;
use autotherm::Error;

use crate::error::CliError;
use crate::output::{num, Table};
use crate::scenario::{set_path, Run, Scenario};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Also compare against the exact oracle at g, g/2 and g/4.
    pub oracle: bool,
    pub quiet: bool,
    pub exec: Execution,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            oracle: false,
            quiet: true,
            exec: Execution::default(),
        }
    }
}

pub const ANALYTICS_COLUMNS: [&str; 15] = [
    "omega0",
    "nu0",
    "g",
    "t_c",
    "t_h",
    "beta_app",
    "t_app",
    "q_c",
    "q_h",
    "e_r_dot",
    "eta",
    "eta_ac",
    "threshold_omega0",
    "regime",
    "error_order",
];

pub const TRAJECTORY_COLUMNS: [&str; 10] =
    ["t", "E_R", "E_S", "q_c", "q_h", "e_r_dot", "eta", "S_rho_R", "beta_app", "regime"];

pub const REGIME_MAP_COLUMNS: [&str; 5] = ["param_x", "param_y", "regime", "q_c", "eta_ac"];

pub const ORACLE_COLUMNS: [&str; 5] = ["g", "dq_c", "dq_h", "de_r", "slope_fit"];

/// Closed-form quantities for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Analytics {
    pub omega0: f64,
    pub nu0: f64,
    pub g: f64,
    pub t_c: f64,
    pub t_h: f64,
    /// NaN when the battery has no apparent temperature.
    pub beta_app: f64,
    pub flows: HeatFlowReport,
    pub eta_ac: f64,
    pub threshold_omega0: f64,
}

impl Analytics {
    pub fn compute(s: &Scenario) -> Result<Self, Error> {
        let cfg = s.machine()?;
        let state = s.battery_state(&cfg)?;
        let beta_app = match apparent_temperature(&BatteryInstance::new(cfg.battery.clone(), state.clone())?) {
            Ok(a) => a.beta,
            Err(Error::UndefinedTemperature(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        let (t_c, t_h) = (cfg.t_cold(), cfg.t_hot());
        Ok(Self {
            omega0: cfg.omega0,
            nu0: cfg.nu0,
            g: cfg.g,
            t_c,
            t_h,
            beta_app,
            flows: cold_heat_flow(&cfg, &state)?,
            eta_ac: max_achievable_efficiency_refrigeration(t_c, t_h, beta_app),
            threshold_omega0: refrigeration_threshold(t_c, t_h, cfg.nu0, beta_app),
        })
    }

    pub fn row(&self) -> Vec<String> {
        let t_app = if self.beta_app == 0.0 { f64::INFINITY } else { 1.0 / self.beta_app };
        let f = &self.flows;
        vec![
            num(self.omega0),
            num(self.nu0),
            num(self.g),
            num(self.t_c),
            num(self.t_h),
            num(self.beta_app),
            num(t_app),
            num(f.q_c),
            num(f.q_h),
            num(f.e_r_dot),
            num(f.eta),
            num(self.eta_ac),
            num(self.threshold_omega0),
            f.regime.to_string(),
            num(f.error_order),
        ]
    }
}

fn scenario_at(table: &toml::Table, edits: &[(&str, f64)]) -> Result<Scenario, CliError> {
    let mut t = table.clone();
    for (path, v) in edits {
        set_path(&mut t, path, toml::Value::Float(*v))?;
    }
    Scenario::from_table(&t)
}

fn log(opts: &RunOptions, msg: impl AsRef<str>) {
    if !opts.quiet {
        println!("[autotherm] {}", msg.as_ref());
    }
}

fn analytics_table(s: &Scenario) -> Result<Table, CliError> {
    let mut out = Table::new(&ANALYTICS_COLUMNS);
    out.push(Analytics::compute(s)?.row());
    Ok(out)
}

fn sweep_table(table: &toml::Table, parameter: &str, values: &[f64], exec: Execution) -> Result<Table, CliError> {
    let rows = try_map_collect(values, exec, |&v| -> Result<Vec<String>, CliError> {
        let s = scenario_at(table, &[(parameter, v)])?;
        let mut row = vec![num(v)];
        row.extend(Analytics::compute(&s)?.row());
        Ok(row)
    })?;
    let mut header = vec!["value"];
    header.extend(ANALYTICS_COLUMNS);
    let mut out = Table::new(&header).with_meta("parameter", parameter);
    for r in rows {
        out.push(r);
    }
    Ok(out)
}

fn regime_map_table(
    table: &toml::Table,
    (px, xs): (&str, &[f64]),
    (py, ys): (&str, &[f64]),
    exec: Execution,
) -> Result<Table, CliError> {
    let points: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let rows = try_map_collect(&points, exec, |&(x, y)| -> Result<Vec<String>, CliError> {
        let s = scenario_at(table, &[(px, x), (py, y)])?;
        let a = Analytics::compute(&s)?;
        Ok(vec![num(x), num(y), a.flows.regime.to_string(), num(a.flows.q_c), num(a.eta_ac)])
    })?;
    let mut out = Table::new(&REGIME_MAP_COLUMNS)
        .with_meta("param_x", px)
        .with_meta("param_y", py);
    for r in rows {
        out.push(r);
    }
    Ok(out)
}

fn trajectory_table(s: &Scenario, t_end: f64, step: f64) -> Result<Table, CliError> {
    let cfg = s.machine()?;
    let traj = evolve(&cfg, &s.battery_state(&cfg)?, t_end, step)?;
    let mut out = Table::new(&TRAJECTORY_COLUMNS);
    for k in 0..traj.len() {
        let r = &traj.reports[k];
        out.push(vec![
            num(traj.times[k]),
            num(traj.battery_energy[k]),
            num(traj.medium_energy[k]),
            num(r.q_c),
            num(r.q_h),
            num(r.e_r_dot),
            num(r.eta),
            num(traj.entropies[k]),
            num(traj.beta_app[k]),
            r.regime.to_string(),
        ]);
    }
    Ok(out)
}

fn oracle_table(s: &Scenario, gs: &[f64], exec: Execution) -> Result<Table, CliError> {
    let cfg = s.machine()?;
    let state = s.battery_state(&cfg)?;
    let cmps = g_sweep(&cfg, &state, gs, &RelaxOptions::default(), exec)?;
    let dq: Vec<f64> = cmps.iter().map(|c| c.dq_c()).collect();
    let slope = if gs.len() >= 2 { loglog_slope(gs, &dq) } else { f64::NAN };
    let mut out = Table::new(&ORACLE_COLUMNS);
    for c in &cmps {
        out.push(vec![num(c.g), num(c.dq_c()), num(c.dq_h()), num(c.de_r()), num(slope)]);
    }
    Ok(out)
}

/// Runs the scenario held in `table` and returns the files written.
pub fn run_table(table: &toml::Table, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let s = Scenario::from_table(table)?;
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, t: Table| -> Result<(), CliError> {
        let path = opts.out.join(name);
        t.write(&path)?;
        log(opts, format!("wrote {} ({} rows)", path.display(), t.rows.len()));
        written.push(path);
        Ok(())
    };
    let resolved = opts.out.join("scenario.toml");
    std::fs::write(&resolved, s.to_toml()?).map_err(|e| CliError::Io(format!("{}: {e}", resolved.display())))?;
    match &s.run {
        Run::Analytics => {
            log(opts, "analytics");
            emit("analytics.csv", analytics_table(&s)?)?;
        }
        Run::Trajectory { t_end, step } => {
            log(opts, format!("trajectory to t = {t_end}"));
            emit("trajectory.csv", trajectory_table(&s, *t_end, *step)?)?;
        }
        Run::Sweep { parameter, grid } => {
            let values = grid.values();
            log(opts, format!("sweep over {parameter}, {} points", values.len()));
            emit("sweep.csv", sweep_table(table, parameter, &values, opts.exec)?)?;
        }
        Run::RegimeMap { param_x, grid_x, param_y, grid_y } => {
            let (xs, ys) = (grid_x.values(), grid_y.values());
            log(opts, format!("regime map {param_x} x {param_y}, {} points", xs.len() * ys.len()));
            emit("regime_map.csv", regime_map_table(table, (param_x, &xs), (param_y, &ys), opts.exec)?)?;
        }
        Run::OracleCompare { g_list } => {
            log(opts, format!("oracle comparison at g = {g_list:?}"));
            emit("oracle.csv", oracle_table(&s, g_list, opts.exec)?)?;
        }
    }
    if opts.oracle && !matches!(s.run, Run::OracleCompare { .. }) {
        let g = s.machine.g;
        let gs = [g, g / 2.0, g / 4.0];
        log(opts, format!("oracle comparison at g = {gs:?}"));
        emit("oracle.csv", oracle_table(&s, &gs, opts.exec)?)?;
    }
    written.push(resolved);
    Ok(written)
}

pub fn run_file(path: &Path, overrides: &[String], opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut table = crate::scenario::parse_table(&text)?;
    crate::scenario::apply_overrides(&mut table, overrides)?;
    run_table(&table, opts)
}
