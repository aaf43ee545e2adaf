//! Dense complex operator algebra: Hermitian operators, density matrices,
//! spectral decompositions, eigenoperators and thermal states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol::{Tolerances, DEFAULT_DEGENERACY_REL, NUM_FLOOR};

pub type C64 = Complex64;

/// Dense square complex matrix. All operator symbols live in this type.
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Checks squareness and finiteness of a raw matrix.
pub fn check_matrix(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Frobenius norm.
pub fn norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Real part of tr(A B) without forming the product.
pub fn trace_product_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    trace_product(a, b).re
}

/// tr(A B) without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Kronecker product with the first factor as the slow (outer) index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = c(*v);
    }
    m
}

/// Builds a complex matrix from row-major real and (optional) imaginary parts.
pub fn from_rows(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<ComplexMatrix> {
    let n = re.len();
    if re.iter().any(|row| row.len() != n) {
        return Err(Error::Shape("real part is not square".into()));
    }
    if let Some(im) = im {
        if im.len() != n || im.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("imaginary part does not match the real part".into()));
        }
    }
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        C64::new(re[i][j], im.map_or(0.0, |im| im[i][j]))
    });
    check_matrix(&m)?;
    Ok(m)
}

/// Partial trace over the first factor of an `ds x dr` bipartite operator.
pub fn partial_trace_first(m: &ComplexMatrix, ds: usize, dr: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(dr, dr);
    for s in 0..ds {
        for i in 0..dr {
            for j in 0..dr {
                out[(i, j)] += m[(s * dr + i, s * dr + j)];
            }
        }
    }
    out
}

/// Partial trace over the second factor of an `ds x dr` bipartite operator.
pub fn partial_trace_second(m: &ComplexMatrix, ds: usize, dr: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(ds, ds);
    for i in 0..ds {
        for j in 0..ds {
            let mut acc = ZERO;
            for r in 0..dr {
                acc += m[(i * dr + r, j * dr + r)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Hermitian matrix, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().herm)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol_herm: f64) -> Result<Self> {
        check_matrix(&m)?;
        let deviation = hermiticity_defect(&m);
        if deviation > tol_herm {
            return Err(Error::Hermiticity { deviation });
        }
        Ok(Self(symmetrize(m)))
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(diag_real(values))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        eigh(&self.0)
    }
}

fn symmetrize(m: ComplexMatrix) -> ComplexMatrix {
    let adj = m.adjoint();
    (m + adj) * c(0.5)
}

/// Dense Hermitian eigensolver; eigenvalues ascending.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.nrows();
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Valid quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        check_matrix(&m)?;
        let deviation = hermiticity_defect(&m);
        if deviation > tol.herm {
            return Err(Error::State(format!("not Hermitian (deviation {deviation:.3e})")));
        }
        let m = symmetrize(m);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::State(format!("trace is {tr}, expected 1")));
        }
        let (values, _) = eigh(&m)?;
        if values[0] < -tol.psd {
            return Err(Error::State(format!(
                "negative eigenvalue {:.3e}",
                values[0]
            )));
        }
        Ok(Self(m))
    }

    /// Normalizes a positive semidefinite matrix to unit trace.
    pub fn from_unnormalized(m: ComplexMatrix) -> Result<Self> {
        check_matrix(&m)?;
        let tr = m.trace().re;
        if tr <= NUM_FLOOR {
            return Err(Error::State("zero trace".into()));
        }
        Self::new(m * c(1.0 / tr))
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let n2 = v.norm_squared();
        if n2 <= NUM_FLOOR {
            return Err(Error::State("zero state vector".into()));
        }
        Self::from_unnormalized(&v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(identity(dim) * c(1.0 / dim as f64))
    }

    pub fn from_populations(p: &[f64]) -> Result<Self> {
        Self::new(diag_real(p))
    }

    /// Skips validation; for internal use on matrices known to be states.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn expect(&self, op: &ComplexMatrix) -> C64 {
        trace_product(&self.0, op)
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn von_neumann_entropy(&self) -> Result<f64> {
        von_neumann_entropy(&self.0)
    }
}

/// -tr(rho ln rho), skipping eigenvalues below the numerical floor.
pub fn von_neumann_entropy(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = eigh(m)?;
    Ok(values
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| -p * p.ln())
        .sum())
}

/// Distinct eigenvalues with their eigenprojectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<ComplexMatrix>,
    /// Orthonormal eigenvectors of each eigenspace, as columns.
    pub eigenvectors: Vec<ComplexMatrix>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Rebuilds sum_k f(e_k) P_k.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.projectors[0].nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (e, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out += p * f(*e);
        }
        out
    }
}

/// Grouping tolerance used when the caller does not supply one.
pub fn default_degeneracy_tol(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = (hi - lo).max(lo.abs()).max(hi.abs());
    DEFAULT_DEGENERACY_REL * if scale > 0.0 { scale } else { 1.0 }
}

pub fn spectral_decompose(h: &HermitianOperator, tol_degen: Option<f64>) -> Result<SpectralDecomposition> {
    let (values, vectors) = h.eigh()?;
    let tol = tol_degen.unwrap_or_else(|| default_degeneracy_tol(&values));
    let n = values.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if values[k] - values[*g.last().unwrap()] <= tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut eigenvectors = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = g.iter().map(|&k| values[k]).sum::<f64>() / g.len() as f64;
        let block = ComplexMatrix::from_fn(n, g.len(), |i, j| vectors[(i, g[j])]);
        projectors.push(&block * block.adjoint());
        eigenvectors.push(block);
        eigenvalues.push(mean);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        eigenvectors,
    })
}

/// Frequency-resolved components A(nu) of an observable.
#[derive(Debug, Clone)]
pub struct EigenoperatorSet {
    entries: Vec<(f64, ComplexMatrix)>,
}

impl EigenoperatorSet {
    pub fn from_entries(mut entries: Vec<(f64, ComplexMatrix)>) -> Self {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { entries }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn entries(&self) -> &[(f64, ComplexMatrix)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Operator at the frequency closest to `nu`, if within `tol`.
    pub fn get(&self, nu: f64, tol: f64) -> Option<&ComplexMatrix> {
        self.entries
            .iter()
            .filter(|(f, _)| (f - nu).abs() <= tol)
            .min_by(|a, b| (a.0 - nu).abs().total_cmp(&(b.0 - nu).abs()))
            .map(|(_, m)| m)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.entries[0].1.nrows();
        self.entries
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, (_, m)| acc + m)
    }
}

/// Decomposes `a` into eigenoperators of `h`: A(nu) = sum over e' - e = nu of P(e) A P(e').
/// Zero blocks are dropped.
pub fn eigenoperators(
    a: &HermitianOperator,
    h: &HermitianOperator,
    tol_degen: Option<f64>,
) -> Result<EigenoperatorSet> {
    if a.dim() != h.dim() {
        return Err(Error::Shape(format!(
            "observable has dimension {}, Hamiltonian {}",
            a.dim(),
            h.dim()
        )));
    }
    let spec = spectral_decompose(h, tol_degen)?;
    let tol = tol_degen.unwrap_or_else(|| default_degeneracy_tol(&spec.eigenvalues));
    eigenoperators_in(a.matrix(), &spec, tol)
}

/// Same as [`eigenoperators`] against a precomputed decomposition.
pub fn eigenoperators_in(
    a: &ComplexMatrix,
    spec: &SpectralDecomposition,
    tol: f64,
) -> Result<EigenoperatorSet> {
    let scale = norm(a).max(NUM_FLOOR);
    let mut entries: Vec<(f64, ComplexMatrix)> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (i, pi) in spec.projectors.iter().enumerate() {
        let left = pi * a;
        for (j, pj) in spec.projectors.iter().enumerate() {
            let block = &left * pj;
            if norm(&block) <= 1e-14 * scale {
                continue;
            }
            let nu = spec.eigenvalues[j] - spec.eigenvalues[i];
            match entries.iter().position(|(f, _)| (f - nu).abs() <= tol) {
                Some(k) => {
                    let n = counts[k] as f64;
                    entries[k].0 = (entries[k].0 * n + nu) / (n + 1.0);
                    entries[k].1 += block;
                    counts[k] += 1;
                }
                None => {
                    entries.push((nu, block));
                    counts.push(1);
                }
            }
        }
    }
    symmetrize_frequencies(&mut entries, tol);
    Ok(EigenoperatorSet::from_entries(entries))
}

/// Makes the frequency list exactly antisymmetric so that A(-nu) pairs with A(nu).
fn symmetrize_frequencies(entries: &mut [(f64, ComplexMatrix)], tol: f64) {
    let freqs: Vec<f64> = entries.iter().map(|e| e.0).collect();
    for (k, f) in freqs.iter().enumerate() {
        if *f > 0.0 {
            if let Some(m) = freqs.iter().position(|g| (g + f).abs() <= tol) {
                let avg = 0.5 * (f - freqs[m]);
                entries[k].0 = avg;
                entries[m].0 = -avg;
            }
        } else if f.abs() <= tol {
            entries[k].0 = 0.0;
        }
    }
}

/// Gibbs state at inverse temperature `beta` (beta = 0 is the maximally mixed state).
pub fn thermal_state_beta(h: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::Domain(format!("inverse temperature {beta} is not finite")));
    }
    let (values, vectors) = h.eigh()?;
    let shift = if beta >= 0.0 { values[0] } else { values[values.len() - 1] };
    let weights: Vec<f64> = values.iter().map(|e| (-beta * (e - shift)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let n = values.len();
    let mut rho = ComplexMatrix::zeros(n, n);
    for (k, w) in weights.iter().enumerate() {
        let v = vectors.column(k);
        rho += &v * v.adjoint() * c(w / z);
    }
    Ok(DensityMatrix::from_trusted(symmetrize(rho)))
}

/// Gibbs state at temperature `t`; either infinity maps to the maximally mixed state.
pub fn thermal_state(h: &HermitianOperator, t: f64) -> Result<DensityMatrix> {
    if t == 0.0 || t.is_nan() {
        return Err(Error::DegenerateTemperature);
    }
    thermal_state_beta(h, 1.0 / t)
}

/// Normalized projector onto the lowest eigenspace (the T -> 0+ limit).
pub fn ground_state(h: &HermitianOperator) -> Result<DensityMatrix> {
    let spec = spectral_decompose(h, None)?;
    DensityMatrix::from_unnormalized(spec.projectors[0].clone())
}
