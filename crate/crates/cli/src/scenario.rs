//! Scenario files: a TOML document with `machine`, `battery_state` and `run`.

use autotherm::bath::{BathSide, BathSpec, SpectralModel};
use autotherm::battery::{build_dicke_state, build_squeezed_thermal_with, BatteryKind, BatterySpec};
use autotherm::machine::{MachineConfig, Medium};
use autotherm::operator::{from_rows, C64};
use autotherm::tol::Tolerances;
use autotherm::{DensityMatrix, Error};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub machine: MachineSection,
    pub battery_state: BatteryState,
    pub run: Run,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSection {
    pub omega0: f64,
    pub nu0: f64,
    pub g: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    pub medium: Medium,
    pub battery: BatteryKind,
    pub bath_c: BathSection,
    pub bath_h: BathSection,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FlatBand,
    Lorentzian,
}

/// Band shape; a missing `center` follows the resonance the bath serves
/// (omega0 for the cold bath, omega0 + nu0 for the hot one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub temperature: f64,
    pub model: ModelSection,
    #[serde(default)]
    pub lamb_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceEntry {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BatteryState {
    Thermal {
        temperature: f64,
    },
    /// |N, n_e> on a spin-ensemble battery of N spins.
    Dicke {
        count: usize,
        n_e: usize,
    },
    /// Squeezed thermal state on a truncated-oscillator battery.
    SqueezedThermal {
        temperature: f64,
        r: f64,
    },
    Explicit {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
    /// Diagonal populations plus listed off-diagonal elements (upper triangle).
    PhaseoniumLike {
        populations: Vec<f64>,
        #[serde(default)]
        coherences: Vec<CoherenceEntry>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n)
                    .map(|k| {
                        let t = k as f64 / (*n - 1) as f64;
                        start * (1.0 - t) + stop * t
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Run {
    Analytics,
    Trajectory {
        t_end: f64,
        step: f64,
    },
    /// `parameter` is a dotted path into the scenario, e.g. `machine.omega0`.
    Sweep {
        parameter: String,
        grid: Grid,
    },
    RegimeMap {
        param_x: String,
        grid_x: Grid,
        param_y: String,
        grid_y: Grid,
    },
    OracleCompare {
        g_list: Vec<f64>,
    },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses a TOML document into a table, reporting syntax errors as schema errors.
pub fn parse_table(text: &str) -> Result<toml::Table, CliError> {
    text.parse::<toml::Table>().map_err(|e| schema("", e.message().to_string()))
}

fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Sets `value` at a dotted path, creating intermediate tables.
pub fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), CliError> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(schema(path, "empty key in dotted path"));
    }
    let (last, parents) = keys.split_last().expect("non-empty");
    let mut cur = table;
    for (depth, k) in parents.iter().enumerate() {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(schema(keys[..=depth].join("."), "not a table")),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Applies `key=value` overrides; values use TOML syntax and fall back to strings.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<(), CliError> {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| schema(o.as_str(), "override must look like key=value"))?;
        set_path(table, k.trim(), parse_value(v.trim()))?;
    }
    Ok(())
}

impl Scenario {
    pub fn from_table(table: &toml::Table) -> Result<Self, CliError> {
        let text = toml::to_string(table).map_err(|e| schema("", e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| schema("", e.message().to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(path, e.into_inner().message().to_string())
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| schema("", e.to_string()))
    }

    pub fn to_table(&self) -> Result<toml::Table, CliError> {
        parse_table(&self.to_toml()?)
    }

    pub fn machine(&self) -> Result<MachineConfig, Error> {
        self.machine.config()
    }

    pub fn battery_state(&self, cfg: &MachineConfig) -> Result<DensityMatrix, Error> {
        self.battery_state.build(cfg)
    }
}

impl BathSection {
    fn spec(&self, side: BathSide, resonance: f64) -> Result<BathSpec, Error> {
        let m = self.model;
        let center = m.center.unwrap_or(resonance);
        let model = match m.kind {
            ModelKind::FlatBand => SpectralModel::FlatBand {
                center,
                width: m.width,
                height: m.height,
            },
            ModelKind::Lorentzian => SpectralModel::Lorentzian {
                center,
                width: m.width,
                height: m.height,
            },
        };
        let mut spec = BathSpec::new(self.temperature, model, side)?;
        spec.lamb_shift = self.lamb_shift;
        spec.validate()?;
        Ok(spec)
    }
}

impl MachineSection {
    pub fn config(&self) -> Result<MachineConfig, Error> {
        let cfg = MachineConfig {
            omega0: self.omega0,
            nu0: self.nu0,
            g: self.g,
            alpha: self.alpha,
            medium: self.medium,
            battery: BatterySpec::new(self.battery.clone(), self.nu0)?,
            bath_c: self.bath_c.spec(BathSide::Cold, self.omega0)?,
            bath_h: self.bath_h.spec(BathSide::Hot, self.omega0 + self.nu0)?,
            tolerances: self.tolerances,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl BatteryState {
    pub fn build(&self, cfg: &MachineConfig) -> Result<DensityMatrix, Error> {
        let tol = &cfg.tolerances;
        let state = match self {
            BatteryState::Thermal { temperature } => cfg.battery.thermal_state(*temperature)?,
            BatteryState::Dicke { count, n_e } => {
                match cfg.battery.kind {
                    BatteryKind::SpinEnsemble { count: c } if c == *count => {}
                    _ => {
                        return Err(Error::UnsupportedBattery(format!(
                            "Dicke state with N = {count} needs a spin-ensemble battery of {count} spins"
                        )))
                    }
                }
                build_dicke_state(*count, *n_e)?
            }
            BatteryState::SqueezedThermal { temperature, r } => match cfg.battery.kind {
                BatteryKind::TruncatedOscillator { cutoff } => {
                    build_squeezed_thermal_with(cutoff, cfg.nu0, *temperature, *r, tol)?.state().clone()
                }
                _ => {
                    return Err(Error::UnsupportedBattery(
                        "squeezed thermal state needs a truncated-oscillator battery".into(),
                    ))
                }
            },
            BatteryState::Explicit { re, im } => {
                DensityMatrix::with_tolerances(from_rows(re, im.as_deref())?, tol)?
            }
            BatteryState::PhaseoniumLike { populations, coherences } => {
                let mut m = autotherm::operator::diag_real(populations);
                let n = populations.len();
                for c in coherences {
                    if c.i >= n || c.j >= n || c.i == c.j {
                        return Err(Error::Shape(format!(
                            "coherence ({}, {}) outside the off-diagonal of a {n}x{n} state",
                            c.i, c.j
                        )));
                    }
                    let z = C64::new(c.re, c.im);
                    m[(c.i, c.j)] = z;
                    m[(c.j, c.i)] = z.conj();
                }
                DensityMatrix::with_tolerances(m, tol)?
            }
        };
        if state.dim() != cfg.battery.dim() {
            return Err(Error::Shape(format!(
                "battery state has dimension {}, battery {}",
                state.dim(),
                cfg.battery.dim()
            )));
        }
        Ok(state)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BatteryState::Thermal { .. } => "thermal",
            BatteryState::Dicke { .. } => "dicke",
            BatteryState::SqueezedThermal { .. } => "squeezed_thermal",
            BatteryState::Explicit { .. } => "explicit",
            BatteryState::PhaseoniumLike { .. } => "phaseonium_like",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TLS: &str = r#"
[machine]
omega0 = 1.0
nu0 = 1.0
g = 0.01
medium = { kind = "two_level" }
battery = { kind = "ladder", levels = 2 }

[machine.bath_c]
temperature = 1.0
model = { kind = "flat_band", width = 0.5, height = 0.05 }

[machine.bath_h]
temperature = 2.0
model = { kind = "flat_band", width = 0.5, height = 0.05 }

[battery_state]
kind = "thermal"
temperature = -2.0

[run]
kind = "analytics"
"#;

    #[test]
    fn loads_and_builds() {
        let s = Scenario::from_toml(TLS).unwrap();
        let cfg = s.machine().unwrap();
        assert_eq!(cfg.bath_c.model.center(), 1.0);
        assert_eq!(cfg.bath_h.model.center(), 2.0);
        assert_eq!(s.battery_state(&cfg).unwrap().dim(), 2);
    }

    #[test]
    fn unknown_field_reports_its_path() {
        let bad = TLS.replace("width = 0.5, height", "widht = 0.5, height");
        match Scenario::from_toml(&bad) {
            Err(CliError::Schema { path, .. }) => assert!(path.starts_with("machine.bath_c"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_is_idempotent() {
        let s = Scenario::from_toml(TLS).unwrap();
        let once = s.to_toml().unwrap();
        let twice = Scenario::from_toml(&once).unwrap().to_toml().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let mut t = parse_table(TLS).unwrap();
        apply_overrides(&mut t, &["machine.g=0.02".into(), "battery_state.temperature=3".into()]).unwrap();
        let s = Scenario::from_table(&t).unwrap();
        assert_eq!(s.machine.g, 0.02);
        assert_eq!(s.battery_state, BatteryState::Thermal { temperature: 3.0 });
        assert!(apply_overrides(&mut t, &["machine".into()]).is_err());
    }

    #[test]
    fn mistyped_override_reports_its_path() {
        let mut t = parse_table(TLS).unwrap();
        apply_overrides(&mut t, &["machine.g=\"x\"".into()]).unwrap();
        assert!(matches!(Scenario::from_table(&t), Err(CliError::Schema { path, .. }) if path == "machine.g"));
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::Range { start: 0.0, stop: 1.0, count: 3 }.values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Grid::List(vec![2.0]).values(), vec![2.0]);
    }

    #[test]
    fn phaseonium_state_is_validated() {
        let spec = r#"
[battery_state]
kind = "phaseonium_like"
populations = [0.4, 0.4, 0.2]
coherences = [{ i = 0, j = 1, re = -0.3 }]
"#;
        let text = TLS
            .replace("battery = { kind = \"ladder\", levels = 2 }", "battery = { kind = \"degenerate_ladder\", degeneracies = [2, 1] }")
            .replace("[battery_state]\nkind = \"thermal\"\ntemperature = -2.0\n", spec);
        let s = Scenario::from_toml(&text).unwrap();
        let cfg = s.machine().unwrap();
        let rho = s.battery_state(&cfg).unwrap();
        assert_eq!(rho.matrix()[(1, 0)].re, -0.3);
    }
}
