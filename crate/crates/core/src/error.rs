use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The inputs describe a machine outside the model's domain of validity.
    Physics,
    /// A numerical routine failed or produced an unphysical result.
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian: max |A - A^dagger| = {deviation:.3e}")]
    Hermiticity { deviation: f64 },
    #[error("invalid density matrix: {0}")]
    State(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("temperature must be nonzero")]
    DegenerateTemperature,
    #[error("input outside the domain: {0}")]
    Domain(String),
    #[error("Fock truncation too small: top-level population {population:.3e} exceeds {tolerance:.1e}")]
    Truncation { population: f64, tolerance: f64 },
    #[error("apparent temperature undefined: {0}")]
    UndefinedTemperature(String),
    #[error("invalid bath model: {0}")]
    BathModel(String),
    #[error("battery apparent temperature {temperature} does not exceed T_C = {t_cold}: extraction is trivial")]
    TrivialExtraction { temperature: f64, t_cold: f64 },
    #[error("steady-state apparent temperature is degenerate: {0}")]
    DegenerateSteadyState(String),
    #[error("machine is not in the required regime: {0}")]
    Regime(String),
    #[error("unsupported battery: {0}")]
    UnsupportedBattery(String),
    #[error("machine configuration invalid: {0}")]
    Validity(String),
    #[error("density matrix lost positivity: min eigenvalue {min_eigenvalue:.3e} at t = {time}")]
    Positivity { min_eigenvalue: f64, time: f64 },
    #[error("integrator step size collapsed to {step:.3e} at t = {time}")]
    Stiffness { step: f64, time: f64 },
    #[error("oracle dimension {dim} exceeds the cap of {cap}")]
    OracleSize { dim: usize, cap: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Hermiticity { .. }
            | Error::Positivity { .. }
            | Error::Stiffness { .. }
            | Error::Numerical(_) => ErrorClass::Numerical,
            _ => ErrorClass::Physics,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Error::Hermiticity { .. } => "HermiticityError",
            Error::State(_) => "StateError",
            Error::Shape(_) => "ShapeError",
            Error::DegenerateTemperature => "DegenerateTemperatureError",
            Error::Domain(_) => "DomainError",
            Error::Truncation { .. } => "TruncationError",
            Error::UndefinedTemperature(_) => "UndefinedTemperatureError",
            Error::BathModel(_) => "BathModelError",
            Error::TrivialExtraction { .. } => "TrivialExtractionError",
            Error::DegenerateSteadyState(_) => "DegenerateSteadyStateError",
            Error::Regime(_) => "RegimeError",
            Error::UnsupportedBattery(_) => "UnsupportedBatteryError",
            Error::Validity(_) => "ValidityError",
            Error::Positivity { .. } => "PositivityError",
            Error::Stiffness { .. } => "StiffnessError",
            Error::OracleSize { .. } => "OracleSizeError",
            Error::Numerical(_) => "NumericalError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
