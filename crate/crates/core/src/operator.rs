//! Dense complex matrix algebra for observables and states.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Norms are
//! Frobenius norms throughout. Composite spaces use the (left ⊗ right)
//! Kronecker convention: basis index `i = i_left * d_right + i_right`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative hermiticity tolerance (against `max(1, ‖O‖)`).
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-10;
/// Relative eigenvalue clustering tolerance (against `max(1, ‖O‖)`).
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Absolute tolerance for projector identities (idempotency, orthogonality, completeness).
pub const PROJECTOR_TOL: f64 = 1e-8;
/// Tolerance for density-state normalization and positivity.
pub const STATE_TOL: f64 = 1e-9;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `‖O − O†‖`.
pub fn hermiticity_violation(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::Shape("matrix dimension must be at least 1".into()));
    }
    Ok(m.nrows())
}

/// A self-adjoint operator with a human-readable label.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
    label: String,
}

impl HermitianOperator {
    pub fn new(entries: CMatrix, label: impl Into<String>) -> Result<Self> {
        Self::with_tolerance(entries, label, DEFAULT_HERMITICITY_TOL)
    }

    /// Accepts `entries` if `‖O − O†‖ ≤ tol·max(1, ‖O‖)` and stores the
    /// symmetrized matrix `(O + O†)/2`.
    pub fn with_tolerance(entries: CMatrix, label: impl Into<String>, tol: f64) -> Result<Self> {
        check_square(&entries)?;
        let violation = hermiticity_violation(&entries);
        let tolerance = tol * entries.norm().max(1.0);
        if violation.is_nan() || violation > tolerance {
            return Err(Error::NotHermitian {
                violation,
                tolerance,
            });
        }
        Ok(Self {
            entries: symmetrize(&entries),
            label: label.into(),
        })
    }

    pub fn from_real(entries: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(entries.map(c), label)
    }

    pub fn diagonal(values: &[f64], label: impl Into<String>) -> Self {
        assert!(!values.is_empty(), "diagonal operator needs at least one entry");
        let v = DVector::from_iterator(values.len(), values.iter().copied().map(c));
        Self {
            entries: CMatrix::from_diagonal(&v),
            label: label.into(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim], "I")
    }

    pub fn zeros(dim: usize) -> Self {
        Self::diagonal(&vec![0.0; dim], "0")
    }

    /// Rank-one projector `|ψ⟩⟨ψ|` onto the normalized direction of `psi`.
    pub fn projector_onto(psi: &CVector, label: impl Into<String>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot project onto the zero vector".into()));
        }
        let u = psi / c(norm);
        Ok(Self::from_trusted(&u * u.adjoint(), label))
    }

    /// For matrices that are Hermitian by construction; still symmetrizes
    /// to remove round-off asymmetry.
    pub(crate) fn from_trusted(entries: CMatrix, label: impl Into<String>) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        Self {
            entries: symmetrize(&entries),
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `U O U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::from_trusted(u * &self.entries * u.adjoint(), self.label.clone())
    }

    /// `Σ_k c_k O^k` for real coefficients (lowest order first).
    pub fn polynomial(&self, coefficients: &[f64]) -> Self {
        let n = self.dim();
        let mut acc = CMatrix::zeros(n, n);
        let mut power = CMatrix::identity(n, n);
        for &coef in coefficients {
            acc += &power * c(coef);
            power = &power * &self.entries;
        }
        Self::from_trusted(acc, format!("p({})", self.label))
    }
}

impl AsRef<CMatrix> for HermitianOperator {
    fn as_ref(&self) -> &CMatrix {
        &self.entries
    }
}

impl fmt::Display for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}×{})", self.label, self.dim(), self.dim())
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        HermitianOperator::from_trusted(
            &self.entries + &rhs.entries,
            format!("{}+{}", self.label, rhs.label),
        )
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        HermitianOperator::from_trusted(
            &self.entries - &rhs.entries,
            format!("{}-{}", self.label, rhs.label),
        )
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;

    fn mul(self, rhs: f64) -> HermitianOperator {
        HermitianOperator::from_trusted(&self.entries * c(rhs), format!("{}·{}", rhs, self.label))
    }
}

/// A trace-one positive operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    entries: CMatrix,
}

impl DensityState {
    pub fn new(entries: CMatrix) -> Result<Self> {
        check_square(&entries)?;
        let violation = hermiticity_violation(&entries);
        if violation > DEFAULT_HERMITICITY_TOL * entries.norm().max(1.0) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (‖ρ − ρ†‖ = {violation:.3e})"
            )));
        }
        let entries = symmetrize(&entries);
        let trace = entries.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, not 1")));
        }
        let min_eig = SymmetricEigen::new(entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { entries })
    }

    /// `|ψ⟩⟨ψ|` for the normalized direction of `psi`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let u = psi / c(norm);
        Ok(Self::from_trusted(&u * u.adjoint()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(CMatrix::identity(dim, dim) * c(1.0 / dim as f64))
    }

    pub(crate) fn from_trusted(entries: CMatrix) -> Self {
        Self {
            entries: symmetrize(&entries),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// `ρ ⊗ σ`.
    pub fn product(&self, other: &DensityState) -> DensityState {
        Self::from_trusted(self.entries.kronecker(&other.entries))
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, o: &CMatrix) -> Complex64 {
        assert_eq!(o.nrows(), self.dim(), "operator and state dimensions differ");
        // Tr(ρO) = Σ_ij ρ_ij O_ji
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.entries[(i, j)] * o[(j, i)];
            }
        }
        acc
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl AsRef<CMatrix> for DensityState {
    fn as_ref(&self) -> &CMatrix {
        &self.entries
    }
}

/// A complete set of orthogonal projectors: `Π_a Π_b = δ_ab Π_a`, `Σ Π_a = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Csop {
    projectors: Vec<HermitianOperator>,
}

impl Csop {
    pub fn new(projectors: Vec<HermitianOperator>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::InvalidCsop("empty projector list".into()));
        };
        let n = first.dim();
        let mut sum = CMatrix::zeros(n, n);
        for (a, p) in projectors.iter().enumerate() {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.dim(),
                });
            }
            let idem = (p.matrix() * p.matrix() - p.matrix()).norm();
            if idem > PROJECTOR_TOL {
                return Err(Error::NotProjector { idempotency: idem });
            }
            for (b, q) in projectors.iter().enumerate().skip(a + 1) {
                let overlap = (p.matrix() * q.matrix()).norm();
                if overlap > PROJECTOR_TOL {
                    return Err(Error::InvalidCsop(format!(
                        "projectors {a} and {b} are not orthogonal (‖Π_a Π_b‖ = {overlap:.3e})"
                    )));
                }
            }
            sum += p.matrix();
        }
        let completeness = (sum - CMatrix::identity(n, n)).norm();
        if completeness > PROJECTOR_TOL {
            return Err(Error::InvalidCsop(format!(
                "projectors do not sum to the identity (‖ΣΠ − I‖ = {completeness:.3e})"
            )));
        }
        Ok(Self { projectors })
    }

    /// Rank-one projectors onto the columns of a unitary matrix.
    pub fn from_basis(basis: &CMatrix) -> Result<Self> {
        let n = check_square(basis)?;
        let defect = (basis.adjoint() * basis - CMatrix::identity(n, n)).norm();
        if defect > PROJECTOR_TOL {
            return Err(Error::InvalidCsop(format!(
                "basis columns are not orthonormal (‖U†U − I‖ = {defect:.3e})"
            )));
        }
        let projectors = (0..n)
            .map(|k| {
                let col = basis.column(k).into_owned();
                HermitianOperator::from_trusted(&col * col.adjoint(), format!("Π{k}"))
            })
            .collect();
        Ok(Self { projectors })
    }

    pub(crate) fn from_trusted(projectors: Vec<HermitianOperator>) -> Self {
        Self { projectors }
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    /// `Σ_{J ∈ event} Π_J`.
    pub fn event_projector(&self, event: &[usize]) -> CMatrix {
        let n = self.dim();
        let mut acc = CMatrix::zeros(n, n);
        for &j in event {
            acc += self.projectors[j].matrix();
        }
        acc
    }
}

/// Distinct eigenvalues (strictly increasing) with their eigenprojectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    projectors: Vec<HermitianOperator>,
    bases: Vec<CMatrix>,
    residual: f64,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    /// Orthonormal basis of each eigenspace, one matrix of column vectors per cluster.
    pub fn bases(&self) -> &[CMatrix] {
        &self.bases
    }

    /// `‖O − Σ ω_n P_n‖` measured at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.multiplicities.iter().any(|&k| k > 1)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (w, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc += p.matrix() * c(*w);
        }
        acc
    }

    pub fn csop(&self) -> Csop {
        Csop::from_trusted(self.projectors.clone())
    }

    /// All eigenvectors as columns, grouped by cluster in eigenvalue order.
    pub fn eigenbasis(&self) -> CMatrix {
        let n = self.dim();
        let mut u = CMatrix::zeros(n, n);
        let mut col = 0;
        for b in &self.bases {
            for k in 0..b.ncols() {
                u.set_column(col, &b.column(k));
                col += 1;
            }
        }
        u
    }

    /// Index of the cluster whose eigenvalue lies within `tol` of `value`.
    pub fn cluster_of(&self, value: f64, tol: f64) -> Option<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, w)| (*w - value).abs() <= tol)
            .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()))
            .map(|(i, _)| i)
    }
}

/// Eigenpairs sorted by increasing eigenvalue; eigenvectors are columns.
pub(crate) fn sorted_eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = check_square(m)?;
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 + 100 * n)
        .ok_or(Error::EigenFailure { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Two passes of modified Gram–Schmidt over the columns.
fn orthonormalize(mut cols: CMatrix) -> Result<CMatrix> {
    let k = cols.ncols();
    for _pass in 0..2 {
        for j in 0..k {
            for i in 0..j {
                let qi = cols.column(i).into_owned();
                let proj = qi.dotc(&cols.column(j));
                let updated = cols.column(j) - &qi * proj;
                cols.set_column(j, &updated);
            }
            let norm = cols.column(j).norm();
            if norm < 1e-8 {
                return Err(Error::EigenFailure { dim: cols.nrows() });
            }
            let normalized = cols.column(j) / c(norm);
            cols.set_column(j, &normalized);
        }
    }
    Ok(cols)
}

/// Spectral decomposition with degeneracy clustering.
///
/// Sorted raw eigenvalues are grouped greedily: a new cluster starts
/// whenever the gap to the previous eigenvalue exceeds
/// `cluster_tol · max(1, ‖O‖)`. Each cluster's eigenvectors are
/// re-orthonormalized before its projector is formed.
pub fn spectral_decompose(op: &HermitianOperator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if !(cluster_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cluster tolerance must be non-negative, got {cluster_tol}"
        )));
    }
    let m = op.matrix();
    let n = op.dim();
    let gap = cluster_tol * op.norm().max(1.0);
    let (values, vectors) = sorted_eigh(m)?;

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(cl) if values[k] - values[*cl.last().unwrap()] <= gap => cl.push(k),
            _ => clusters.push(vec![k]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut multiplicities = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut bases = Vec::with_capacity(clusters.len());
    for (idx, cl) in clusters.iter().enumerate() {
        let mut block = CMatrix::zeros(n, cl.len());
        for (j, &k) in cl.iter().enumerate() {
            block.set_column(j, &vectors.column(k));
        }
        let basis = orthonormalize(block)?;
        let mean = cl.iter().map(|&k| values[k]).sum::<f64>() / cl.len() as f64;
        eigenvalues.push(mean);
        multiplicities.push(cl.len());
        projectors.push(HermitianOperator::from_trusted(
            &basis * basis.adjoint(),
            format!("P{idx}[{}]", op.label()),
        ));
        bases.push(basis);
    }

    let mut decomposition = SpectralDecomposition {
        eigenvalues,
        multiplicities,
        projectors,
        bases,
        residual: 0.0,
    };
    decomposition.residual = (m - decomposition.reconstruct()).norm();
    Ok(decomposition)
}

/// Raw-matrix entry point: checks hermiticity with `herm_tol` first.
pub fn spectral_decompose_matrix(
    m: &CMatrix,
    cluster_tol: f64,
    herm_tol: f64,
) -> Result<SpectralDecomposition> {
    let op = HermitianOperator::with_tolerance(m.clone(), "O", herm_tol)?;
    spectral_decompose(&op, cluster_tol)
}

/// `A ⊗ B` in the (left ⊗ right) convention.
pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::from_trusted(
        a.matrix().kronecker(b.matrix()),
        format!("{}⊗{}", a.label(), b.label()),
    )
}

/// Which factor of a bipartite space to keep in a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Left,
    Right,
}

pub fn partial_trace_matrix(m: &CMatrix, dims: (usize, usize), keep: Factor) -> Result<CMatrix> {
    let (d1, d2) = dims;
    let n = check_square(m)?;
    if d1 == 0 || d2 == 0 || d1 * d2 != n {
        return Err(Error::DimensionMismatch {
            expected: d1 * d2,
            found: n,
        });
    }
    let out = match keep {
        Factor::Left => CMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum()
        }),
        Factor::Right => CMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).map(|k| m[(k * d2 + i, k * d2 + j)]).sum()
        }),
    };
    Ok(out)
}

/// Reduced state of one factor of a bipartite state.
pub fn partial_trace(rho: &DensityState, dims: (usize, usize), keep: Factor) -> Result<DensityState> {
    partial_trace_matrix(rho.matrix(), dims, keep).map(DensityState::from_trusted)
}

/// `e^{−iHt/ħ}`, built from the eigendecomposition of `H`.
pub fn propagator(h: &HermitianOperator, t: f64, hbar: f64) -> Result<CMatrix> {
    if !(hbar > 0.0) {
        return Err(Error::InvalidArgument(format!("ħ must be positive, got {hbar}")));
    }
    let (values, vectors) = sorted_eigh(h.matrix())?;
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|w| Complex64::from_polar(1.0, -w * t / hbar)),
    );
    Ok(&vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint())
}

/// `ρ(t) = e^{−iHt/ħ} ρ₀ e^{iHt/ħ}`.
pub fn evolve(rho0: &DensityState, h: &HermitianOperator, t: f64, hbar: f64) -> Result<DensityState> {
    if h.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: h.dim(),
        });
    }
    let u = propagator(h, t, hbar)?;
    Ok(DensityState::from_trusted(&u * rho0.matrix() * u.adjoint()))
}

/// `|ψ(t)⟩ = e^{−iHt/ħ}|ψ₀⟩`.
pub fn evolve_vector(psi: &CVector, h: &HermitianOperator, t: f64, hbar: f64) -> Result<CVector> {
    if h.dim() != psi.len() {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            found: h.dim(),
        });
    }
    Ok(propagator(h, t, hbar)? * psi)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.shape(), b.shape(), "commutator of differently sized matrices");
    a * b - b * a
}

/// `‖AB − BA‖` (Frobenius).
pub fn commutator_norm(a: &impl AsRef<CMatrix>, b: &impl AsRef<CMatrix>) -> f64 {
    commutator(a.as_ref(), b.as_ref()).norm()
}

/// `½ Σ |λ_k(ρ − σ)|`.
pub fn trace_distance(a: &DensityState, b: &DensityState) -> f64 {
    let diff = a.matrix() - b.matrix();
    SymmetricEigen::new(symmetrize(&diff))
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
        * 0.5
}

/// Square matrix interchange format: row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let mut re = Vec::with_capacity(dim * dim);
        let mut im = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { dim, re, im }
    }

    /// An empty `im` is read as all zeros.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Shape("dim must be at least 1".into()));
        }
        if self.re.len() != n * n {
            return Err(Error::Shape(format!(
                "re has {} entries, expected {}",
                self.re.len(),
                n * n
            )));
        }
        if !self.im.is_empty() && self.im.len() != n * n {
            return Err(Error::Shape(format!(
                "im has {} entries, expected {}",
                self.im.len(),
                n * n
            )));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            let k = i * n + j;
            Complex64::new(self.re[k], self.im.get(k).copied().unwrap_or(0.0))
        }))
    }

    pub fn to_operator(&self, label: impl Into<String>, herm_tol: f64) -> Result<HermitianOperator> {
        HermitianOperator::with_tolerance(self.to_matrix()?, label, herm_tol)
    }
}
