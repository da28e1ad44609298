//! The actualization rule: the Hamiltonian's eigenprojectors form the preferred
//! context, and an observable is definite-valued when it is a function of them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    commutator_norm, spectral_decompose, tensor_product, c, CMatrix, Csop, HermitianOperator,
    SpectralDecomposition, DEFAULT_CLUSTER_TOL,
};
use crate::systems::{CompositeSystem, QuantumSystem, DEFAULT_DECOMPOSITION_TOL};

/// Relative spread below which `H` counts as a multiple of the identity.
pub const DEFAULT_SCALAR_TOL: f64 = 1e-9;
/// Relative tolerance of the commutator and block-scalarity tests.
pub const DEFAULT_DEFINITE_TOL: f64 = 1e-8;
/// Default threshold on `score` for approximate definiteness.
pub const DEFAULT_APPROX_THRESHOLD: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActualizationOptions {
    pub cluster_tol: f64,
    pub scalar_tol: f64,
    pub definite_tol: f64,
    pub approx_threshold: f64,
}

impl Default for ActualizationOptions {
    fn default() -> Self {
        Self {
            cluster_tol: DEFAULT_CLUSTER_TOL,
            scalar_tol: DEFAULT_SCALAR_TOL,
            definite_tol: DEFAULT_DEFINITE_TOL,
            approx_threshold: DEFAULT_APPROX_THRESHOLD,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    /// `H ≈ kI`: only a global phase, nothing actualizes.
    None,
    Context,
}

#[derive(Clone, Debug)]
pub struct PreferredContext {
    kind: ContextKind,
    decomposition: SpectralDecomposition,
    hamiltonian: HermitianOperator,
    options: ActualizationOptions,
}

impl PreferredContext {
    pub fn kind(&self) -> ContextKind {
        self.kind
    }

    pub fn has_context(&self) -> bool {
        self.kind == ContextKind::Context
    }

    /// Eigenprojectors of `H`, ordered by eigenvalue. Empty when `kind` is none.
    pub fn projectors(&self) -> &[HermitianOperator] {
        match self.kind {
            ContextKind::None => &[],
            ContextKind::Context => self.decomposition.projectors(),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        match self.kind {
            ContextKind::None => &[],
            ContextKind::Context => self.decomposition.eigenvalues(),
        }
    }

    pub fn multiplicities(&self) -> &[usize] {
        match self.kind {
            ContextKind::None => &[],
            ContextKind::Context => self.decomposition.multiplicities(),
        }
    }

    pub fn csop(&self) -> Option<Csop> {
        self.has_context().then(|| self.decomposition.csop())
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn options(&self) -> &ActualizationOptions {
        &self.options
    }
}

pub fn preferred_context(s: &QuantumSystem) -> Result<PreferredContext> {
    preferred_context_with(s.hamiltonian(), ActualizationOptions::default())
}

pub fn preferred_context_with(
    h: &HermitianOperator,
    options: ActualizationOptions,
) -> Result<PreferredContext> {
    let decomposition = spectral_decompose(h, options.cluster_tol)?;
    let ev = decomposition.eigenvalues();
    let spread = ev[ev.len() - 1] - ev[0];
    let kind = if spread <= options.scalar_tol * h.norm().max(1.0) {
        ContextKind::None
    } else {
        ContextKind::Context
    };
    Ok(PreferredContext {
        kind,
        decomposition,
        hamiltonian: h.clone(),
        options,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `O` does not commute with `H`.
    Commutator { norm: f64, tolerance: f64 },
    /// `O` commutes with `H` but is not scalar on the given eigenspace.
    BlockStructure { block: usize, residual: f64, tolerance: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DefiniteValueVerdict {
    pub label: String,
    pub definite: bool,
    /// `a_n` per preferred projector when definite.
    pub induced_values: Option<Vec<f64>>,
    /// Least-squares block scalars `Tr(P_n O P_n)/rank P_n`, always reported.
    pub block_values: Vec<f64>,
    pub commutator_norm: f64,
    /// `‖P_n O P_n − a_n P_n‖` per block.
    pub block_residuals: Vec<f64>,
    /// `‖[O, H]‖/‖O‖`: rate at which `O` drifts, in units of `H/ħ`.
    pub score: f64,
    /// `max_n ‖P_n O P_n − a_n P_n‖ / max(1, ‖O‖)`.
    pub block_score: f64,
    pub approx_threshold: f64,
    /// `score ≤ approx_threshold` and `block_score ≤ approx_threshold`.
    pub approximately_definite: bool,
    pub violation: Option<Violation>,
    #[serde(skip)]
    projectors: Vec<HermitianOperator>,
}

impl DefiniteValueVerdict {
    /// Projectors the values refer to.
    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    /// `Σ a_n P_n` when definite.
    pub fn reconstruct(&self) -> Option<CMatrix> {
        let values = self.induced_values.as_ref()?;
        let n = self.projectors.first()?.dim();
        let mut out = CMatrix::zeros(n, n);
        for (a, p) in values.iter().zip(&self.projectors) {
            out += p.matrix() * c(*a);
        }
        Some(out)
    }
}

pub fn is_definite_valued(
    o: &HermitianOperator,
    ctx: &PreferredContext,
) -> Result<DefiniteValueVerdict> {
    if !ctx.has_context() {
        return Err(Error::NoActualizationContext);
    }
    if o.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.dim(),
            found: o.dim(),
        });
    }
    let opts = ctx.options();
    let o_scale = o.norm().max(1.0);
    let h_scale = ctx.hamiltonian().norm().max(1.0);
    let comm = commutator_norm(o, ctx.hamiltonian());
    let comm_tol = opts.definite_tol * o_scale * h_scale;
    let block_tol = opts.definite_tol * o_scale;

    let mut block_values = Vec::with_capacity(ctx.projectors().len());
    let mut block_residuals = Vec::with_capacity(ctx.projectors().len());
    for (p, &rank) in ctx.projectors().iter().zip(ctx.multiplicities()) {
        let pop = p.matrix() * o.matrix() * p.matrix();
        let a = pop.trace().re / rank as f64;
        block_residuals.push((pop - p.matrix() * c(a)).norm());
        block_values.push(a);
    }

    let violation = if comm > comm_tol {
        Some(Violation::Commutator {
            norm: comm,
            tolerance: comm_tol,
        })
    } else {
        block_residuals
            .iter()
            .enumerate()
            .find(|(_, &r)| r > block_tol)
            .map(|(block, &residual)| Violation::BlockStructure {
                block,
                residual,
                tolerance: block_tol,
            })
    };
    let definite = violation.is_none();
    let score = if o.norm() > 0.0 { comm / o.norm() } else { 0.0 };
    let block_score = block_residuals.iter().cloned().fold(0.0, f64::max) / o_scale;
    Ok(DefiniteValueVerdict {
        label: o.label().to_string(),
        definite,
        induced_values: definite.then(|| block_values.clone()),
        block_values,
        commutator_norm: comm,
        block_residuals,
        score,
        block_score,
        approx_threshold: opts.approx_threshold,
        approximately_definite: score <= opts.approx_threshold
            && block_score <= opts.approx_threshold,
        violation,
        projectors: ctx.projectors().to_vec(),
    })
}

fn require_subsystems(composite: &CompositeSystem) -> Result<()> {
    if composite.is_non_interacting(DEFAULT_DECOMPOSITION_TOL) {
        Ok(())
    } else {
        Err(Error::NotSubsystems {
            interaction_norm: composite.interaction_norm(),
        })
    }
}

/// A verdict for `A¹` on the first factor, carried over to `A¹⊗I²`.
pub fn lift_to_composite(
    verdict: &DefiniteValueVerdict,
    composite: &CompositeSystem,
) -> Result<DefiniteValueVerdict> {
    require_subsystems(composite)?;
    let (d1, d2) = composite.dims();
    if verdict.projectors.first().map(|p| p.dim()) != Some(d1) {
        return Err(Error::DimensionMismatch {
            expected: d1,
            found: verdict.projectors.first().map_or(0, |p| p.dim()),
        });
    }
    let id = HermitianOperator::identity(d2);
    let mut lifted = verdict.clone();
    lifted.label = format!("{}⊗I", verdict.label);
    lifted.projectors = verdict
        .projectors
        .iter()
        .map(|p| tensor_product(p, &id))
        .collect();
    lifted.block_residuals = verdict
        .block_residuals
        .iter()
        .map(|r| r * (d2 as f64).sqrt())
        .collect();
    Ok(lifted)
}

/// `f(A¹⊗I², I¹⊗A²)` with values `f(a_i, b_j)` on `P_i⊗Q_j`, ordered `i·n_b + j`.
/// Definite only when both factor verdicts are.
pub fn lift_combination(
    left: &DefiniteValueVerdict,
    right: &DefiniteValueVerdict,
    f: impl Fn(f64, f64) -> f64,
    composite: &CompositeSystem,
) -> Result<DefiniteValueVerdict> {
    require_subsystems(composite)?;
    let (d1, d2) = composite.dims();
    for (v, d) in [(left, d1), (right, d2)] {
        let found = v.projectors.first().map_or(0, |p| p.dim());
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let mut projectors = Vec::new();
    let mut block_values = Vec::new();
    for (p, a) in left.projectors.iter().zip(&left.block_values) {
        for (q, b) in right.projectors.iter().zip(&right.block_values) {
            projectors.push(tensor_product(p, q));
            block_values.push(f(*a, *b));
        }
    }
    let definite = left.definite && right.definite;
    let violation = left.violation.clone().or_else(|| right.violation.clone());
    let score = left.score.max(right.score);
    let block_score = left.block_score.max(right.block_score);
    Ok(DefiniteValueVerdict {
        label: format!("f({}, {})", left.label, right.label),
        definite,
        induced_values: definite.then(|| block_values.clone()),
        block_residuals: vec![0.0; block_values.len()],
        block_values,
        commutator_norm: left.commutator_norm.max(right.commutator_norm),
        score,
        block_score,
        approx_threshold: left.approx_threshold,
        approximately_definite: left.approximately_definite && right.approximately_definite,
        violation,
        projectors,
    })
}
