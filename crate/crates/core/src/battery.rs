//! Battery models: ladders (plain and degenerate), spin ensembles and
//! truncated oscillators, all with a single transition frequency nu0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    c, eigenoperators, identity, tensor, thermal_state, ComplexMatrix, DensityMatrix,
    EigenoperatorSet, HermitianOperator, C64, ONE, ZERO,
};
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BatteryKind {
    /// Non-degenerate ladder with `levels` states; amplitudes default to 1.
    Ladder {
        levels: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<Vec<f64>>,
    },
    /// Levels n = 0..N with degeneracies l_n and uniform unit amplitudes.
    DegenerateLadder { degeneracies: Vec<usize> },
    /// N two-level systems coupled through the collective sum of sigma_x.
    SpinEnsemble { count: usize },
    /// Harmonic oscillator truncated to `cutoff` Fock states.
    TruncatedOscillator { cutoff: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySpec {
    pub kind: BatteryKind,
    pub nu0: f64,
}

impl BatterySpec {
    pub fn new(kind: BatteryKind, nu0: f64) -> Result<Self> {
        let spec = Self { kind, nu0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ladder(levels: usize, nu0: f64) -> Result<Self> {
        Self::new(BatteryKind::Ladder { levels, amplitudes: None }, nu0)
    }

    pub fn degenerate_ladder(degeneracies: Vec<usize>, nu0: f64) -> Result<Self> {
        Self::new(BatteryKind::DegenerateLadder { degeneracies }, nu0)
    }

    pub fn spin_ensemble(count: usize, nu0: f64) -> Result<Self> {
        Self::new(BatteryKind::SpinEnsemble { count }, nu0)
    }

    pub fn oscillator(cutoff: usize, nu0: f64) -> Result<Self> {
        Self::new(BatteryKind::TruncatedOscillator { cutoff }, nu0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu0 > 0.0 && self.nu0.is_finite()) {
            return Err(Error::Domain(format!("nu0 must be positive, got {}", self.nu0)));
        }
        match &self.kind {
            BatteryKind::Ladder { levels, amplitudes } => {
                if *levels < 2 {
                    return Err(Error::Domain("a ladder needs at least two levels".into()));
                }
                if let Some(a) = amplitudes {
                    if a.len() != levels - 1 {
                        return Err(Error::Shape(format!(
                            "{} levels need {} amplitudes, got {}",
                            levels,
                            levels - 1,
                            a.len()
                        )));
                    }
                    if a.iter().any(|x| !x.is_finite() || *x == 0.0) {
                        return Err(Error::Domain("amplitudes must be finite and nonzero".into()));
                    }
                }
            }
            BatteryKind::DegenerateLadder { degeneracies } => {
                if degeneracies.len() < 2 {
                    return Err(Error::Domain("a ladder needs at least two levels".into()));
                }
                if degeneracies.iter().any(|&l| l == 0) {
                    return Err(Error::Domain("degeneracies must be at least 1".into()));
                }
            }
            BatteryKind::SpinEnsemble { count } => {
                if *count == 0 || *count > 12 {
                    return Err(Error::Domain(format!(
                        "spin ensembles need 1..=12 spins, got {count}"
                    )));
                }
            }
            BatteryKind::TruncatedOscillator { cutoff } => {
                if *cutoff < 2 {
                    return Err(Error::Domain("oscillator cutoff must be at least 2".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BatteryKind::Ladder { levels, .. } => *levels,
            BatteryKind::DegenerateLadder { degeneracies } => degeneracies.iter().sum(),
            BatteryKind::SpinEnsemble { count } => 1 << count,
            BatteryKind::TruncatedOscillator { cutoff } => *cutoff,
        }
    }

    /// Excitation number n of every basis state (H_R = nu0 n).
    pub fn level_of_basis(&self) -> Vec<usize> {
        match &self.kind {
            BatteryKind::Ladder { levels, .. } => (0..*levels).collect(),
            BatteryKind::TruncatedOscillator { cutoff } => (0..*cutoff).collect(),
            BatteryKind::DegenerateLadder { degeneracies } => degeneracies
                .iter()
                .enumerate()
                .flat_map(|(n, &l)| std::iter::repeat(n).take(l))
                .collect(),
            BatteryKind::SpinEnsemble { count } => {
                (0..1usize << count).map(|b| b.count_ones() as usize).collect()
            }
        }
    }

    /// Number of distinct energy levels.
    pub fn level_count(&self) -> usize {
        match &self.kind {
            BatteryKind::SpinEnsemble { count } => count + 1,
            BatteryKind::DegenerateLadder { degeneracies } => degeneracies.len(),
            BatteryKind::Ladder { levels, .. } => *levels,
            BatteryKind::TruncatedOscillator { cutoff } => *cutoff,
        }
    }

    pub fn hamiltonian(&self) -> HermitianOperator {
        let diag: Vec<f64> = self
            .level_of_basis()
            .into_iter()
            .map(|n| n as f64 * self.nu0)
            .collect();
        HermitianOperator::from_diagonal(&diag).expect("diagonal real matrix is Hermitian")
    }

    /// The lowering part of the coupling observable, built directly.
    pub fn lowering_operator(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut a = ComplexMatrix::zeros(d, d);
        match &self.kind {
            BatteryKind::Ladder { levels, amplitudes } => {
                for n in 1..*levels {
                    let amp = amplitudes.as_ref().map_or(1.0, |v| v[n - 1]);
                    a[(n - 1, n)] = c(amp);
                }
            }
            BatteryKind::TruncatedOscillator { cutoff } => {
                for n in 1..*cutoff {
                    a[(n - 1, n)] = c((n as f64).sqrt());
                }
            }
            BatteryKind::DegenerateLadder { degeneracies } => {
                let mut offsets = vec![0usize];
                for l in degeneracies {
                    offsets.push(offsets.last().unwrap() + l);
                }
                for n in 1..degeneracies.len() {
                    for k in 0..degeneracies[n - 1] {
                        for kp in 0..degeneracies[n] {
                            a[(offsets[n - 1] + k, offsets[n] + kp)] = ONE;
                        }
                    }
                }
            }
            BatteryKind::SpinEnsemble { count } => {
                let sm = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
                for i in 0..*count {
                    a += site_operator(&sm, i, *count);
                }
            }
        }
        a
    }

    pub fn coupling_observable(&self) -> HermitianOperator {
        let a = self.lowering_operator();
        HermitianOperator::new(&a + a.adjoint()).expect("A + A^dagger is Hermitian")
    }

    pub fn thermal_state(&self, t: f64) -> Result<DensityMatrix> {
        thermal_state(&self.hamiltonian(), t)
    }
}

/// Embeds a single-spin operator at site `i` (site 0 is the leftmost factor).
pub fn site_operator(op: &ComplexMatrix, i: usize, count: usize) -> ComplexMatrix {
    let left = identity(1 << i);
    let right = identity(1 << (count - i - 1));
    tensor(&tensor(&left, op), &right)
}

/// A battery model together with its current state.
#[derive(Debug, Clone)]
pub struct BatteryInstance {
    spec: BatterySpec,
    hamiltonian: HermitianOperator,
    coupling: HermitianOperator,
    ladder: EigenoperatorSet,
    lowering: ComplexMatrix,
    state: DensityMatrix,
}

impl BatteryInstance {
    pub fn new(spec: BatterySpec, state: DensityMatrix) -> Result<Self> {
        spec.validate()?;
        if state.dim() != spec.dim() {
            return Err(Error::Shape(format!(
                "battery has dimension {}, state {}",
                spec.dim(),
                state.dim()
            )));
        }
        let hamiltonian = spec.hamiltonian();
        let coupling = spec.coupling_observable();
        let ladder = eigenoperators(&coupling, &hamiltonian, None)?;
        let tol = 1e-9 * spec.nu0;
        let freqs = ladder.frequencies();
        if freqs.len() != 2 || (freqs[1] - spec.nu0).abs() > tol || (freqs[0] + spec.nu0).abs() > tol {
            return Err(Error::UnsupportedBattery(format!(
                "coupling observable has transition frequencies {freqs:?}, expected +-{}",
                spec.nu0
            )));
        }
        let lowering = ladder.get(spec.nu0, tol).cloned().expect("checked above");
        Ok(Self {
            spec,
            hamiltonian,
            coupling,
            ladder,
            lowering,
            state,
        })
    }

    /// Same operators, new state.
    pub fn with_state(&self, state: DensityMatrix) -> Result<Self> {
        if state.dim() != self.spec.dim() {
            return Err(Error::Shape(format!(
                "battery has dimension {}, state {}",
                self.spec.dim(),
                state.dim()
            )));
        }
        let mut out = self.clone();
        out.state = state;
        Ok(out)
    }

    pub fn spec(&self) -> &BatterySpec {
        &self.spec
    }

    pub fn nu0(&self) -> f64 {
        self.spec.nu0
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn coupling_observable(&self) -> &HermitianOperator {
        &self.coupling
    }

    pub fn ladder(&self) -> &EigenoperatorSet {
        &self.ladder
    }

    /// A_R(nu0).
    pub fn lowering(&self) -> &ComplexMatrix {
        &self.lowering
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    /// <A_R^dagger(nu0) A_R(nu0)>.
    pub fn n_plus(&self) -> f64 {
        self.state.expect(&(self.lowering.adjoint() * &self.lowering)).re
    }

    /// <A_R(nu0) A_R^dagger(nu0)>.
    pub fn n_minus(&self) -> f64 {
        self.state.expect(&(&self.lowering * self.lowering.adjoint())).re
    }

    pub fn energy(&self) -> f64 {
        self.state.expect(self.hamiltonian.matrix()).re
    }
}

pub fn build_ladder(levels: usize, amplitudes: Option<Vec<f64>>, nu0: f64, state: DensityMatrix) -> Result<BatteryInstance> {
    BatteryInstance::new(BatterySpec::new(BatteryKind::Ladder { levels, amplitudes }, nu0)?, state)
}

/// Ladder with levels n = 0..=n_top and degeneracies l_n.
pub fn build_degenerate_ladder(
    n_top: usize,
    degeneracies: &[usize],
    nu0: f64,
    state: DensityMatrix,
) -> Result<BatteryInstance> {
    if degeneracies.len() != n_top + 1 {
        return Err(Error::Shape(format!(
            "{} levels need {} degeneracies, got {}",
            n_top + 1,
            n_top + 1,
            degeneracies.len()
        )));
    }
    BatteryInstance::new(BatterySpec::degenerate_ladder(degeneracies.to_vec(), nu0)?, state)
}

pub fn build_spin_ensemble(count: usize, nu0: f64, state: DensityMatrix) -> Result<BatteryInstance> {
    BatteryInstance::new(BatterySpec::spin_ensemble(count, nu0)?, state)
}

pub fn build_oscillator(cutoff: usize, nu0: f64, state: DensityMatrix) -> Result<BatteryInstance> {
    BatteryInstance::new(BatterySpec::oscillator(cutoff, nu0)?, state)
}

/// Symmetric Dicke state |N, n_e> in the 2^N product basis (bit set = excited).
pub fn build_dicke_state(count: usize, n_e: usize) -> Result<DensityMatrix> {
    if count == 0 || count > 12 {
        return Err(Error::Domain(format!("spin count {count} outside 1..=12")));
    }
    if n_e > count {
        return Err(Error::Domain(format!("n_e = {n_e} exceeds N = {count}")));
    }
    let psi: Vec<C64> = (0..1usize << count)
        .map(|b| if b.count_ones() as usize == n_e { ONE } else { ZERO })
        .collect();
    DensityMatrix::pure(&psi)
}

/// S(r) rho_th(T_R) S(r)^dagger on `cutoff` Fock states, S(r) = exp(r/2 (a^2 - a^dagger^2)).
pub fn build_squeezed_thermal(cutoff: usize, nu0: f64, t_r: f64, r: f64) -> Result<BatteryInstance> {
    build_squeezed_thermal_with(cutoff, nu0, t_r, r, &Tolerances::default())
}

pub fn build_squeezed_thermal_with(
    cutoff: usize,
    nu0: f64,
    t_r: f64,
    r: f64,
    tol: &Tolerances,
) -> Result<BatteryInstance> {
    if !(t_r >= 0.0) || !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("need T_R >= 0 and r >= 0, got T_R = {t_r}, r = {r}")));
    }
    let spec = BatterySpec::oscillator(cutoff, nu0)?;
    let thermal = if t_r == 0.0 {
        crate::operator::ground_state(&spec.hamiltonian())?
    } else {
        spec.thermal_state(t_r)?
    };
    let a = spec.lowering_operator();
    let a2 = &a * &a;
    let gen = (&a2 - a2.adjoint()) * c(0.5 * r);
    let squeeze = unitary_from_antihermitian(&gen)?;
    let rho = &squeeze * thermal.matrix() * squeeze.adjoint();
    check_truncation(&rho, tol.trunc)?;
    let state = DensityMatrix::from_unnormalized(rho)?;
    BatteryInstance::new(spec, state)
}

/// exp(X) for anti-Hermitian X.
pub fn unitary_from_antihermitian(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let defect = crate::operator::norm(&(x + x.adjoint()));
    if defect > 1e-9 * (1.0 + crate::operator::norm(x)) {
        return Err(Error::Hermiticity { deviation: defect });
    }
    Ok(x.clone().exp())
}

/// Population of the top two Fock levels must stay below `trunc`.
pub fn check_truncation(rho: &ComplexMatrix, trunc: f64) -> Result<()> {
    let n = rho.nrows();
    let population = rho[(n - 1, n - 1)].re + if n >= 2 { rho[(n - 2, n - 2)].re } else { 0.0 };
    if population >= trunc {
        return Err(Error::Truncation {
            population,
            tolerance: trunc,
        });
    }
    Ok(())
}
