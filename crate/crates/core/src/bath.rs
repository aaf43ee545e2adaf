//! Thermal bath spectral densities with the KMS extension to negative
//! frequencies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathSide {
    Cold,
    Hot,
}

/// Positive-frequency shape of G(omega).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectralModel {
    /// Constant `height` on |omega - center| <= width/2, zero elsewhere.
    FlatBand { center: f64, width: f64, height: f64 },
    /// Lorentzian of full width `width` peaking at `height`, cut off at
    /// |omega - center| = LORENTZIAN_CUTOFF * width.
    Lorentzian { center: f64, width: f64, height: f64 },
}

pub const LORENTZIAN_CUTOFF: f64 = 10.0;

impl SpectralModel {
    pub fn center(&self) -> f64 {
        match *self {
            Self::FlatBand { center, .. } | Self::Lorentzian { center, .. } => center,
        }
    }

    pub fn height(&self) -> f64 {
        match *self {
            Self::FlatBand { height, .. } | Self::Lorentzian { height, .. } => height,
        }
    }

    /// Half width of the support window around the center.
    pub fn half_support(&self) -> f64 {
        match *self {
            Self::FlatBand { width, .. } => 0.5 * width,
            Self::Lorentzian { width, .. } => LORENTZIAN_CUTOFF * width,
        }
    }

    fn validate(&self) -> Result<()> {
        let (center, width, height) = match *self {
            Self::FlatBand { center, width, height } | Self::Lorentzian { center, width, height } => {
                (center, width, height)
            }
        };
        if !(center > 0.0 && center.is_finite()) || !(width > 0.0 && width.is_finite()) || !(height >= 0.0 && height.is_finite()) {
            return Err(Error::BathModel(format!(
                "need center > 0, width > 0, height >= 0; got {center}, {width}, {height}"
            )));
        }
        if self.half_support() >= center {
            return Err(Error::BathModel(format!(
                "support [{}, {}] reaches zero frequency",
                center - self.half_support(),
                center + self.half_support()
            )));
        }
        Ok(())
    }

    fn positive(&self, w: f64) -> (f64, f64) {
        let d = w - self.center();
        if d.abs() > self.half_support() {
            return (0.0, 0.0);
        }
        match *self {
            Self::FlatBand { height, .. } => (height, 0.0),
            Self::Lorentzian { width, height, .. } => {
                let h2 = 0.25 * width * width;
                let den = d * d + h2;
                (height * h2 / den, -2.0 * height * h2 * d / (den * den))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub temperature: f64,
    pub model: SpectralModel,
    pub side: BathSide,
    /// Constant imaginary part of Gamma on the support (zero by default).
    #[serde(default)]
    pub lamb_shift: f64,
}

impl BathSpec {
    pub fn new(temperature: f64, model: SpectralModel, side: BathSide) -> Result<Self> {
        let b = Self {
            temperature,
            model,
            side,
            lamb_shift: 0.0,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn flat(temperature: f64, center: f64, width: f64, height: f64, side: BathSide) -> Result<Self> {
        Self::new(temperature, SpectralModel::FlatBand { center, width, height }, side)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::BathModel(format!(
                "bath temperature must be positive and finite, got {}",
                self.temperature
            )));
        }
        if !self.lamb_shift.is_finite() {
            return Err(Error::BathModel("Lamb shift must be finite".into()));
        }
        self.model.validate()
    }

    /// True when omega (either sign) lies in the support.
    pub fn supports(&self, w: f64) -> bool {
        (w.abs() - self.model.center()).abs() <= self.model.half_support()
    }

    /// G(omega), with G(-omega) = exp(-omega/T) G(omega) for omega > 0.
    pub fn g(&self, w: f64) -> f64 {
        if w > 0.0 {
            self.model.positive(w).0
        } else if w < 0.0 {
            (w / self.temperature).exp() * self.model.positive(-w).0
        } else {
            0.0
        }
    }

    /// dG/domega, using G'(-omega) = exp(-omega/T) [G(omega)/T - G'(omega)].
    pub fn g_prime(&self, w: f64) -> f64 {
        if w > 0.0 {
            self.model.positive(w).1
        } else if w < 0.0 {
            let (g, dg) = self.model.positive(-w);
            (w / self.temperature).exp() * (g / self.temperature - dg)
        } else {
            0.0
        }
    }

    fn shift(&self, w: f64) -> f64 {
        if self.lamb_shift != 0.0 && self.supports(w) {
            self.lamb_shift
        } else {
            0.0
        }
    }

    /// Gamma(omega) = G(omega)/2 + i S(omega).
    pub fn gamma(&self, w: f64) -> C64 {
        C64::new(0.5 * self.g(w), self.shift(w))
    }

    /// dGamma/domega; the constant shift contributes nothing.
    pub fn gamma_prime(&self, w: f64) -> C64 {
        C64::new(0.5 * self.g_prime(w), 0.0)
    }
}
