//! The three-stage von Neumann measurement: preparation, correlating interaction,
//! and free evolution of the apparatus, with ideal and non-ideal correlations.

pub mod quadrature;
pub mod stern_gerlach;
pub mod tails;
pub mod tomography;

use num_complex::Complex64;
use serde::Serialize;

use crate::actualization::{
    is_definite_valued, preferred_context_with, ActualizationOptions, DefiniteValueVerdict,
};
use crate::error::{Error, Result};
use crate::operator::{
    c, commutator_norm, evolve_vector, partial_trace, spectral_decompose, tensor_product, CMatrix,
    CVector, Csop, DensityState, Factor, HermitianOperator, PROJECTOR_TOL,
};
use crate::propensity::{propensity_table, PropensityTable};
use crate::systems::QuantumSystem;

pub const DEFAULT_RELIABILITY_THRESHOLD: f64 = 0.05;
/// Minimum gap between distinct pointer eigenvalues.
pub const POINTER_SEPARATION: f64 = 1.0;
/// Allowed `|Σ|d_ij|² − 1|`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementOptions {
    pub reliability_threshold: f64,
    pub actualization: ActualizationOptions,
}

impl Default for MeasurementOptions {
    fn default() -> Self {
        Self {
            reliability_threshold: DEFAULT_RELIABILITY_THRESHOLD,
            actualization: ActualizationOptions::default(),
        }
    }
}

/// Apparatus with Hamiltonian `H_M`, pointer `R` and ready state `|r₀⟩`.
#[derive(Clone, Debug)]
pub struct Apparatus {
    h_m: HermitianOperator,
    pointer: HermitianOperator,
    basis: CMatrix,
    pointer_values: Vec<f64>,
    ready_index: usize,
}

impl Apparatus {
    /// `basis` columns are joint eigenvectors of `H_M` and `R`; when absent the
    /// basis is computed and ordered by pointer value, then energy.
    pub fn new(
        h_m: HermitianOperator,
        pointer: HermitianOperator,
        basis: Option<CMatrix>,
        ready_index: usize,
        options: ActualizationOptions,
    ) -> Result<Self> {
        let n = h_m.dim();
        if pointer.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: pointer.dim(),
            });
        }
        if n < 2 {
            return Err(Error::InvalidArgument("pointer needs at least 2 states".into()));
        }
        if ready_index >= n {
            return Err(Error::InvalidArgument(format!(
                "ready index {ready_index} out of range for a {n}-state apparatus"
            )));
        }
        let comm = commutator_norm(&h_m, &pointer);
        let scale = h_m.norm().max(1.0) * pointer.norm().max(1.0);
        if comm > options.definite_tol * scale {
            return Err(Error::InvalidArgument(format!(
                "pointer does not commute with H_M (‖[H_M, R]‖ = {comm:.3e})"
            )));
        }
        let ctx = preferred_context_with(&h_m, options)?;
        let verdict = is_definite_valued(&pointer, &ctx)?;
        if !verdict.definite {
            return Err(Error::InvalidArgument(format!(
                "pointer is not block-scalar on the eigenspaces of H_M: {:?}",
                verdict.violation
            )));
        }
        let sd = spectral_decompose(&pointer, options.cluster_tol)?;
        for w in sd.eigenvalues().windows(2) {
            if w[1] - w[0] < POINTER_SEPARATION - 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "pointer eigenvalues {} and {} are closer than {POINTER_SEPARATION}",
                    w[0], w[1]
                )));
            }
        }
        let basis = match basis {
            Some(b) => {
                check_joint_eigenbasis(&b, &[h_m.matrix(), pointer.matrix()])?;
                b
            }
            None => joint_basis(&sd, &h_m)?,
        };
        let pointer_values = (0..n)
            .map(|j| {
                let v = basis.column(j);
                (v.adjoint() * pointer.matrix() * v)[(0, 0)].re
            })
            .collect();
        Ok(Self {
            h_m,
            pointer,
            basis,
            pointer_values,
            ready_index,
        })
    }

    /// `R = diag(0, 1, …, d−1)`, `H_M = diag(ε_j)` with distinct `ε_j = j/2 + j²/10`.
    pub fn ladder(dim: usize, ready_index: usize) -> Result<Self> {
        let r: Vec<f64> = (0..dim).map(|j| j as f64).collect();
        let e: Vec<f64> = r.iter().map(|j| 0.5 * j + 0.1 * j * j).collect();
        Self::new(
            HermitianOperator::diagonal(&e, "H_M"),
            HermitianOperator::diagonal(&r, "R"),
            Some(CMatrix::identity(dim, dim)),
            ready_index,
            ActualizationOptions::default(),
        )
    }

    pub fn dim(&self) -> usize {
        self.h_m.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.h_m
    }

    pub fn pointer(&self) -> &HermitianOperator {
        &self.pointer
    }

    /// Columns `|r_j⟩`.
    pub fn pointer_basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn pointer_values(&self) -> &[f64] {
        &self.pointer_values
    }

    pub fn ready_index(&self) -> usize {
        self.ready_index
    }

    pub fn ready_state(&self) -> CVector {
        self.basis.column(self.ready_index).into_owned()
    }

    /// Pointer index recording outcome `i`: every index but the ready one when
    /// there is room, otherwise the identity map.
    pub fn outcome_indices(&self, outcomes: usize) -> Result<Vec<usize>> {
        let d = self.dim();
        if d > outcomes {
            Ok((0..d).filter(|&j| j != self.ready_index).take(outcomes).collect())
        } else if d == outcomes {
            Ok((0..d).collect())
        } else {
            Err(Error::PointerTooSmall {
                outcomes,
                pointer_states: d,
            })
        }
    }
}

fn check_joint_eigenbasis(b: &CMatrix, ops: &[&CMatrix]) -> Result<()> {
    let n = ops[0].nrows();
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::Shape(format!(
            "pointer basis is {}×{}, expected {n}×{n}",
            b.nrows(),
            b.ncols()
        )));
    }
    let defect = (b.adjoint() * b - CMatrix::identity(n, n)).norm();
    if defect > PROJECTOR_TOL {
        return Err(Error::InvalidArgument(format!(
            "pointer basis is not orthonormal (‖B†B − I‖ = {defect:.3e})"
        )));
    }
    for op in ops {
        let d = b.adjoint() * *op * b;
        let off = (&d - CMatrix::from_diagonal(&d.diagonal())).norm();
        if off > 1e-8 * op.norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "pointer basis does not diagonalize the apparatus operators (off-diagonal {off:.3e})"
            )));
        }
    }
    Ok(())
}

/// Inside each pointer eigenspace, rotate to the eigenbasis of `H_M`.
fn joint_basis(
    sd: &crate::operator::SpectralDecomposition,
    h_m: &HermitianOperator,
) -> Result<CMatrix> {
    let n = h_m.dim();
    let mut out = CMatrix::zeros(n, n);
    let mut col = 0;
    for b in sd.bases() {
        let restricted = b.adjoint() * h_m.matrix() * b;
        let (_, vecs) = crate::operator::sorted_eigh(&restricted)?;
        let rotated = b * vecs;
        for k in 0..rotated.ncols() {
            out.set_column(col, &rotated.column(k));
            col += 1;
        }
    }
    Ok(out)
}

/// System `S`, observable `A` with eigenbasis `|a_i⟩`, prepared state `Σ c_i|a_i⟩`.
#[derive(Clone, Debug)]
pub struct MeasurementSetup {
    pub system: QuantumSystem,
    pub observable: HermitianOperator,
    basis: CMatrix,
    values: Vec<f64>,
    coefficients: Vec<Complex64>,
    pub apparatus: Apparatus,
}

impl MeasurementSetup {
    /// Uses the eigenbasis of `A`, ordered by increasing eigenvalue.
    pub fn new(
        system: QuantumSystem,
        observable: HermitianOperator,
        coefficients: Vec<Complex64>,
        apparatus: Apparatus,
    ) -> Result<Self> {
        let (_, basis) = crate::operator::sorted_eigh(observable.matrix())?;
        Self::with_eigenbasis(system, observable, basis, coefficients, apparatus)
    }

    pub fn with_eigenbasis(
        system: QuantumSystem,
        observable: HermitianOperator,
        basis: CMatrix,
        coefficients: Vec<Complex64>,
        apparatus: Apparatus,
    ) -> Result<Self> {
        let n = system.dim();
        if observable.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: observable.dim(),
            });
        }
        if coefficients.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: coefficients.len(),
            });
        }
        check_joint_eigenbasis(&basis, &[observable.matrix()])?;
        let norm_sqr: f64 = coefficients.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized { norm_sqr });
        }
        apparatus.outcome_indices(n)?;
        let values = (0..n)
            .map(|i| {
                let v = basis.column(i);
                (v.adjoint() * observable.matrix() * v)[(0, 0)].re
            })
            .collect();
        Ok(Self {
            system,
            observable,
            basis,
            values,
            coefficients,
            apparatus,
        })
    }

    pub fn observable_basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn observable_values(&self) -> &[f64] {
        &self.values
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `Σ c_i|a_i⟩ ⊗ |r₀⟩`.
    pub fn initial_state(&self) -> CVector {
        let psi: CVector = &self.basis * CVector::from_column_slice(&self.coefficients);
        psi.kronecker(&self.apparatus.ready_state())
    }

    /// `H_S⊗I + I⊗H_M`.
    pub fn free_hamiltonian(&self) -> HermitianOperator {
        let ds = self.system.dim();
        let dm = self.apparatus.dim();
        &tensor_product(self.system.hamiltonian(), &HermitianOperator::identity(dm))
            + &tensor_product(&HermitianOperator::identity(ds), self.apparatus.hamiltonian())
    }
}

/// `d_ij`, system index `i`, outcome index `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    d: CMatrix,
}

impl CorrelationMatrix {
    pub fn new(d: CMatrix) -> Result<Self> {
        if d.nrows() != d.ncols() {
            return Err(Error::Shape(format!(
                "correlation matrix is {}×{}, expected square",
                d.nrows(),
                d.ncols()
            )));
        }
        let norm_sqr = d.norm_squared();
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized { norm_sqr });
        }
        Ok(Self { d })
    }

    pub fn diagonal(c: &[Complex64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&CVector::from_column_slice(c)))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.d
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// `ρ_Mij = Σ_n d_ni d*_nj`, in outcome indices.
    pub fn reduced_pointer_matrix(&self) -> CMatrix {
        self.d.transpose() * self.d.map(|z| z.conj())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReliabilityReport {
    /// `Σ_{n≠i}|d_ni|² / |d_ii|²`; `inf` when `d_ii = 0` and the numerator is not.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub threshold: f64,
    pub reliable: bool,
    /// `ρ_Mii = Σ_n |d_ni|²`.
    pub recovered: Vec<f64>,
}

pub fn reliability(d: &CorrelationMatrix, threshold: f64) -> ReliabilityReport {
    let m = d.matrix();
    let n = d.dim();
    let mut ratios = Vec::with_capacity(n);
    let mut recovered = Vec::with_capacity(n);
    for i in 0..n {
        let diag = m[(i, i)].norm_sqr();
        let cross: f64 = (0..n).filter(|&k| k != i).map(|k| m[(k, i)].norm_sqr()).sum();
        ratios.push(if cross == 0.0 {
            0.0
        } else if diag == 0.0 {
            f64::INFINITY
        } else {
            cross / diag
        });
        recovered.push(diag + cross);
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    ReliabilityReport {
        ratios,
        max_ratio,
        threshold,
        reliable: max_ratio <= threshold,
        recovered,
    }
}

#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    /// State of `S ∪ M` after the interaction, in the product computational basis.
    pub post_state: CVector,
    /// Reduced apparatus state, computational basis.
    pub rho_m: DensityState,
    /// Propensities of the pointer basis states `|r_j⟩`.
    pub pointer_table: PropensityTable,
    /// Pointer index assigned to each outcome.
    pub outcome_indices: Vec<usize>,
    pub correlation: CorrelationMatrix,
    pub reliability: ReliabilityReport,
    /// `R` against the preferred context of `H_M`.
    pub pointer_verdict: DefiniteValueVerdict,
    /// `A` against the preferred context of `H_S`; false when `H_S` has none.
    pub observable_definite_on_system: bool,
}

impl MeasurementOutcome {
    /// Propensities at the outcome pointer indices.
    pub fn outcome_table(&self) -> Vec<f64> {
        self.outcome_indices
            .iter()
            .map(|&j| self.pointer_table.measures()[j])
            .collect()
    }
}

fn pointer_csop(apparatus: &Apparatus) -> Result<Csop> {
    Csop::from_basis(apparatus.pointer_basis())
}

fn observable_definite(setup: &MeasurementSetup, options: &MeasurementOptions) -> Result<bool> {
    let ctx = preferred_context_with(setup.system.hamiltonian(), options.actualization)?;
    if !ctx.has_context() {
        return Ok(false);
    }
    Ok(is_definite_valued(&setup.observable, &ctx)?.definite)
}

fn finish(
    setup: &MeasurementSetup,
    post_state: CVector,
    outcome_indices: Vec<usize>,
    correlation: CorrelationMatrix,
    options: &MeasurementOptions,
) -> Result<MeasurementOutcome> {
    let dims = (setup.system.dim(), setup.apparatus.dim());
    let joint = DensityState::from_trusted(&post_state * post_state.adjoint());
    let rho_m = partial_trace(&joint, dims, Factor::Right)?;
    let pointer_table = propensity_table(&rho_m, &pointer_csop(&setup.apparatus)?)?;
    let ctx = preferred_context_with(setup.apparatus.hamiltonian(), options.actualization)?;
    let pointer_verdict = is_definite_valued(setup.apparatus.pointer(), &ctx)?;
    Ok(MeasurementOutcome {
        post_state,
        rho_m,
        pointer_table,
        outcome_indices,
        reliability: reliability(&correlation, options.reliability_threshold),
        correlation,
        pointer_verdict,
        observable_definite_on_system: observable_definite(setup, options)?,
    })
}

/// Exact correlation `|a_i⟩⊗|r₀⟩ → |a_i⟩⊗|r_i⟩`; the diagonal case of
/// [`run_nonideal`], and computed through it.
pub fn run_ideal(setup: &MeasurementSetup, options: &MeasurementOptions) -> Result<MeasurementOutcome> {
    let d = CorrelationMatrix::diagonal(setup.coefficients())?;
    run_nonideal(setup, &d, options)
}

/// Post-interaction state `Σ_ij d_ij |a_i⟩⊗|r_j⟩`.
pub fn run_nonideal(
    setup: &MeasurementSetup,
    d: &CorrelationMatrix,
    options: &MeasurementOptions,
) -> Result<MeasurementOutcome> {
    let n = setup.system.dim();
    if d.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d.dim(),
        });
    }
    let outcome_indices = setup.apparatus.outcome_indices(n)?;
    let a = setup.observable_basis();
    let r = setup.apparatus.pointer_basis();
    let mut post = CVector::zeros(n * setup.apparatus.dim());
    for i in 0..n {
        let ai = a.column(i).into_owned();
        for (j, &pj) in outcome_indices.iter().enumerate() {
            let dij = d.matrix()[(i, j)];
            if dij != c(0.0) {
                post += ai.kronecker(&r.column(pj).into_owned()) * dij;
            }
        }
    }
    finish(setup, post, outcome_indices, d.clone(), options)
}

/// `P^R`: generator of the cyclic shift `|r_j⟩ → |r_{j+1}⟩`, eigenvalues `2πk/d`
/// with `k ∈ (−d/2, d/2]` on discrete-Fourier states of the pointer basis.
pub fn pointer_conjugate(apparatus: &Apparatus) -> HermitianOperator {
    let d = apparatus.dim();
    let tau = std::f64::consts::TAU;
    let f = CMatrix::from_fn(d, d, |j, k| {
        Complex64::from_polar(1.0 / (d as f64).sqrt(), -tau * (j * k) as f64 / d as f64)
    });
    let ks: Vec<f64> = (0..d)
        .map(|k| {
            let kc = if 2 * k > d { k as f64 - d as f64 } else { k as f64 };
            tau * kc / d as f64
        })
        .collect();
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(d, ks.into_iter().map(c)));
    let in_r = &f * diag * f.adjoint();
    let b = apparatus.pointer_basis();
    HermitianOperator::from_trusted(b * in_r * b.adjoint(), "P^R")
}

/// `H_int = −(λħ/t1)·A⊗P^R`.
pub fn build_interaction(
    a: &HermitianOperator,
    apparatus: &Apparatus,
    lambda: f64,
    t1: f64,
    hbar: f64,
) -> Result<HermitianOperator> {
    if apparatus.dim() < 2 {
        return Err(Error::InvalidArgument("pointer dimension below 2".into()));
    }
    if t1 <= 0.0 || hbar <= 0.0 {
        return Err(Error::InvalidArgument("t1 and ħ must be positive".into()));
    }
    let p = pointer_conjugate(apparatus);
    Ok((&tensor_product(a, &p) * (-lambda * hbar / t1)).with_label("H_int"))
}

#[derive(Clone, Debug)]
pub struct HamiltonianRun {
    pub outcome: MeasurementOutcome,
    /// `π(i) = (ready + round(λ a_i)) mod d`.
    pub target_indices: Vec<usize>,
    /// `1 − Σ_i |⟨a_i ⊗ r_π(i)|ψ(t1)⟩|²`.
    pub correlation_defect: f64,
    /// Total-variation distance from the ideal table placed at the target indices.
    pub table_deviation: f64,
}

/// Evolves `Σ c_i|a_i⟩⊗|r₀⟩` for `t1` under the full `H_S + H_M + H_int`.
pub fn run_hamiltonian(
    setup: &MeasurementSetup,
    lambda: f64,
    t1: f64,
    hbar: f64,
    options: &MeasurementOptions,
) -> Result<HamiltonianRun> {
    let n = setup.system.dim();
    let dm = setup.apparatus.dim();
    let h_int = build_interaction(&setup.observable, &setup.apparatus, lambda, t1, hbar)?;
    let h = &setup.free_hamiltonian() + &h_int;
    let psi = evolve_vector(&setup.initial_state(), &h, t1, hbar)?;
    let target: Vec<usize> = setup
        .observable_values()
        .iter()
        .map(|a| {
            let shift = (lambda * a).round() as i64;
            (setup.apparatus.ready_index() as i64 + shift).rem_euclid(dm as i64) as usize
        })
        .collect();
    let a = setup.observable_basis();
    let r = setup.apparatus.pointer_basis();
    let d = CMatrix::from_fn(n, n, |i, j| {
        let v = a.column(i).into_owned().kronecker(&r.column(target[j]).into_owned());
        (v.adjoint() * &psi)[(0, 0)]
    });
    let captured: f64 = (0..n).map(|i| d[(i, i)].norm_sqr()).sum();
    // captured weight on the target pointers, renormalized for the report
    let weight = d.norm_squared();
    let scaled = if weight > 0.0 { &d / c(weight.sqrt()) } else { d.clone() };
    let correlation = CorrelationMatrix { d: scaled };
    let outcome = finish(setup, psi, target.clone(), correlation, options)?;
    let mut ideal = vec![0.0; dm];
    for (i, &j) in target.iter().enumerate() {
        ideal[j] += setup.coefficients()[i].norm_sqr();
    }
    let table_deviation = 0.5
        * outcome
            .pointer_table
            .measures()
            .iter()
            .zip(&ideal)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>();
    Ok(HamiltonianRun {
        outcome,
        target_indices: target,
        correlation_defect: (1.0 - captured).max(0.0),
        table_deviation,
    })
}
