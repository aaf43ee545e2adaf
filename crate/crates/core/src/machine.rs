//! Machine description: working medium, battery, coupling and the two baths.

use serde::{Deserialize, Serialize};

use crate::bath::{BathSide, BathSpec};
use crate::battery::BatterySpec;
use crate::error::{Error, Result};
use crate::operator::{c, identity, tensor, ComplexMatrix, HermitianOperator};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Medium {
    /// H_S = omega0 |e><e|, coupled to the cold bath through sigma_x.
    TwoLevel,
    /// H_S = omega0 a^dagger a on `cutoff` Fock states, coupled through a + a^dagger.
    TruncatedOscillator { cutoff: usize },
}

impl Medium {
    pub fn dim(&self) -> usize {
        match self {
            Medium::TwoLevel => 2,
            Medium::TruncatedOscillator { cutoff } => *cutoff,
        }
    }

    /// A_S(omega0): sigma_minus or a.
    pub fn lowering(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut a = ComplexMatrix::zeros(d, d);
        for n in 1..d {
            let amp = match self {
                Medium::TwoLevel => 1.0,
                Medium::TruncatedOscillator { .. } => (n as f64).sqrt(),
            };
            a[(n - 1, n)] = c(amp);
        }
        a
    }

    pub fn hamiltonian(&self, omega0: f64) -> ComplexMatrix {
        let l = self.lowering();
        l.adjoint() * l * c(omega0)
    }

    pub fn coupling(&self) -> ComplexMatrix {
        let l = self.lowering();
        &l + l.adjoint()
    }

    pub fn is_oscillator(&self) -> bool {
        matches!(self, Medium::TruncatedOscillator { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    pub omega0: f64,
    pub nu0: f64,
    pub g: f64,
    pub alpha: f64,
    pub medium: Medium,
    pub battery: BatterySpec,
    pub bath_c: BathSpec,
    pub bath_h: BathSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl MachineConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_pos = |x: f64| x > 0.0 && x.is_finite();
        if !finite_pos(self.omega0) || !finite_pos(self.nu0) || !finite_pos(self.alpha) {
            return Err(Error::Validity(format!(
                "omega0, nu0 and alpha must be positive (got {}, {}, {})",
                self.omega0, self.nu0, self.alpha
            )));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::Validity(format!("g must be non-negative, got {}", self.g)));
        }
        if self.g / self.nu0 >= self.tolerances.weak_ratio {
            return Err(Error::Validity(format!(
                "g/nu0 = {} is not below weak_ratio = {}",
                self.g / self.nu0,
                self.tolerances.weak_ratio
            )));
        }
        self.battery.validate()?;
        if (self.battery.nu0 - self.nu0).abs() > 1e-12 * self.nu0 {
            return Err(Error::Validity(format!(
                "battery frequency {} differs from nu0 = {}",
                self.battery.nu0, self.nu0
            )));
        }
        self.bath_c.validate()?;
        self.bath_h.validate()?;
        if self.bath_c.side != BathSide::Cold || self.bath_h.side != BathSide::Hot {
            return Err(Error::Validity("bath sides are swapped".into()));
        }
        if !(self.bath_h.temperature > self.bath_c.temperature) {
            return Err(Error::Validity(format!(
                "need T_H > T_C (got T_C = {}, T_H = {})",
                self.bath_c.temperature, self.bath_h.temperature
            )));
        }
        if let Medium::TruncatedOscillator { cutoff } = self.medium {
            if cutoff < 2 {
                return Err(Error::Validity("medium cutoff must be at least 2".into()));
            }
        }
        self.check_bath_windows()
    }

    /// The cold bath must cover omega0 and the hot bath omega0 + nu0, each
    /// without reaching the other resonance.
    fn check_bath_windows(&self) -> Result<()> {
        let (w, n) = (self.omega0, self.nu0);
        if !self.bath_c.supports(w) {
            return Err(Error::BathModel(format!("cold bath does not cover omega0 = {w}")));
        }
        if !self.bath_h.supports(w + n) {
            return Err(Error::BathModel(format!("hot bath does not cover omega0 + nu0 = {}", w + n)));
        }
        if self.bath_c.supports(w + n) {
            return Err(Error::BathModel("cold bath support reaches omega0 + nu0 (heat leak)".into()));
        }
        if self.bath_h.supports(w) {
            return Err(Error::BathModel("hot bath support reaches omega0 (heat leak)".into()));
        }
        Ok(())
    }

    pub fn t_cold(&self) -> f64 {
        self.bath_c.temperature
    }

    pub fn t_hot(&self) -> f64 {
        self.bath_h.temperature
    }

    pub fn bath(&self, side: BathSide) -> &BathSpec {
        match side {
            BathSide::Cold => &self.bath_c,
            BathSide::Hot => &self.bath_h,
        }
    }

    /// (g/nu0)^3 omega0 G_C(omega0): the scale of neglected terms in heat flows.
    pub fn error_order(&self) -> f64 {
        (self.g / self.nu0).powi(3) * self.omega0 * self.bath_c.g(self.omega0)
    }

    /// Medium equilibration time 1/G_C(omega0).
    pub fn tau_es(&self) -> f64 {
        1.0 / self.bath_c.g(self.omega0)
    }

    /// Battery time scale nu0^2 / (G_C(omega0) g^2).
    pub fn tau_r(&self) -> f64 {
        self.nu0 * self.nu0 / (self.bath_c.g(self.omega0) * self.g * self.g)
    }

    pub fn with_omega0(&self, omega0: f64) -> Self {
        Self { omega0, ..self.clone() }
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn joint(&self) -> JointSystem {
        JointSystem::new(self)
    }
}

/// Operators of the S (x) R space, S first.
#[derive(Debug, Clone)]
pub struct JointSystem {
    pub ds: usize,
    pub dr: usize,
    /// H_S on the medium space.
    pub h_s_local: ComplexMatrix,
    /// A_S(omega0) on the medium space.
    pub a_s_lowering: ComplexMatrix,
    /// A_R(nu0) on the battery space.
    pub a_r_lowering: ComplexMatrix,
    pub h_s: ComplexMatrix,
    pub h_r: ComplexMatrix,
    pub coupling: ComplexMatrix,
    pub h_sr: HermitianOperator,
    /// A_S (x) 1.
    pub a_s: ComplexMatrix,
}

impl JointSystem {
    fn new(cfg: &MachineConfig) -> Self {
        let ds = cfg.medium.dim();
        let dr = cfg.battery.dim();
        let h_s_local = cfg.medium.hamiltonian(cfg.omega0);
        let a_s_lowering = cfg.medium.lowering();
        let a_r_lowering = cfg.battery.lowering_operator();
        let a_r = &a_r_lowering + a_r_lowering.adjoint();
        let h_r_local = cfg.battery.hamiltonian().into_matrix();
        let id_s = identity(ds);
        let id_r = identity(dr);
        let h_s = tensor(&h_s_local, &id_r);
        let h_r = tensor(&id_s, &h_r_local);
        let coupling = tensor(&h_s_local, &a_r) * c(cfg.g * cfg.alpha);
        let h_sr = HermitianOperator::new(&h_s + &h_r + &coupling).expect("sum of Hermitian terms");
        let a_s = tensor(&cfg.medium.coupling(), &id_r);
        Self {
            ds,
            dr,
            h_s_local,
            a_s_lowering,
            a_r_lowering,
            h_s,
            h_r,
            coupling,
            h_sr,
            a_s,
        }
    }

    pub fn dim(&self) -> usize {
        self.ds * self.dr
    }
}

/// Flat-band machine used throughout tests and examples: bands of width
/// `width` and height `height` centred on each resonance.
pub fn flat_band_machine(
    omega0: f64,
    nu0: f64,
    g: f64,
    medium: Medium,
    battery: BatterySpec,
    t_c: f64,
    t_h: f64,
    width: f64,
    height: f64,
) -> Result<MachineConfig> {
    let cfg = MachineConfig {
        omega0,
        nu0,
        g,
        alpha: 1.0,
        medium,
        battery,
        bath_c: BathSpec::flat(t_c, omega0, width, height, BathSide::Cold)?,
        bath_h: BathSpec::flat(t_h, omega0 + nu0, width, height, BathSide::Hot)?,
        tolerances: Tolerances::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}
