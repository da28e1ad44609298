//! Quantum systems, bipartite composition and Hamiltonian-based decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    c, partial_trace_matrix, spectral_decompose, tensor_product, CMatrix, Factor,
    HermitianOperator, MatrixJson,
};

/// Relative tolerance (against `‖H‖`) for accepting an additive split.
pub const DEFAULT_DECOMPOSITION_TOL: f64 = 1e-9;

/// How the global scalar `Tr(H)/(d1·d2)` is shared between the factors of a split.
pub const SCALAR_SPLIT_CONVENTION: &str = "global scalar Tr(H)/(d1*d2) assigned wholly to the first factor";

#[derive(Clone, Debug)]
pub struct QuantumSystem {
    label: String,
    hamiltonian: HermitianOperator,
}

impl QuantumSystem {
    pub fn new(label: impl Into<String>, hamiltonian: HermitianOperator) -> Self {
        Self {
            label: label.into(),
            hamiltonian,
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Two systems joined with `H = H¹⊗I² + I¹⊗H² + H_int`.
#[derive(Clone, Debug)]
pub struct CompositeSystem {
    left: QuantumSystem,
    right: QuantumSystem,
    interaction: HermitianOperator,
    total: HermitianOperator,
}

impl CompositeSystem {
    pub fn factors(&self) -> (&QuantumSystem, &QuantumSystem) {
        (&self.left, &self.right)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.left.dim(), self.right.dim())
    }

    pub fn interaction(&self) -> &HermitianOperator {
        &self.interaction
    }

    pub fn total(&self) -> &HermitianOperator {
        &self.total
    }

    pub fn interaction_norm(&self) -> f64 {
        self.interaction.norm()
    }

    /// True when `‖H_int‖ ≤ rel_tol·max(1, ‖H‖)`, i.e. the factors are subsystems.
    pub fn is_non_interacting(&self, rel_tol: f64) -> bool {
        self.interaction_norm() <= rel_tol * self.total.norm().max(1.0)
    }

    pub fn as_system(&self) -> QuantumSystem {
        QuantumSystem::new(
            format!("{}∪{}", self.left.label, self.right.label),
            self.total.clone(),
        )
    }
}

/// Builds the composite Hamiltonian. `None` means no interaction.
pub fn compose(
    s1: &QuantumSystem,
    s2: &QuantumSystem,
    h_int: Option<&HermitianOperator>,
) -> Result<CompositeSystem> {
    let n = s1.dim() * s2.dim();
    let interaction = match h_int {
        Some(h) if h.dim() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: h.dim(),
            })
        }
        Some(h) => h.clone(),
        None => HermitianOperator::zeros(n),
    };
    let free = &tensor_product(s1.hamiltonian(), &HermitianOperator::identity(s2.dim()))
        + &tensor_product(&HermitianOperator::identity(s1.dim()), s2.hamiltonian());
    let total = (&free + &interaction).with_label("H");
    Ok(CompositeSystem {
        left: s1.clone(),
        right: s2.clone(),
        interaction: interaction.with_label("H_int"),
        total,
    })
}

/// Best additive split `H ≈ H1⊗I + I⊗H2` for a given factorization.
#[derive(Clone, Debug)]
pub struct FactorizationReport {
    pub dims: (usize, usize),
    pub decomposable: bool,
    pub h1: HermitianOperator,
    pub h2: HermitianOperator,
    /// `‖H − H1⊗I − I⊗H2‖`.
    pub residual: f64,
    /// Absolute threshold the residual was compared against.
    pub tolerance: f64,
    pub scalar_split_convention: &'static str,
}

/// Orthogonal projection of `H` onto the additive-split subspace,
/// `H1 = Tr₂H/d2`, `H2 = Tr₁H/d1 − Tr(H)/(d1·d2)·I`.
pub fn check_decomposition(
    h: &HermitianOperator,
    dims: (usize, usize),
    rel_tol: f64,
) -> Result<FactorizationReport> {
    let (d1, d2) = dims;
    let m = h.matrix();
    let left = partial_trace_matrix(m, dims, Factor::Left)? / c(d2 as f64);
    let scalar = h.trace() / (d1 * d2) as f64;
    let right = partial_trace_matrix(m, dims, Factor::Right)? / c(d1 as f64)
        - CMatrix::identity(d2, d2) * c(scalar);
    let h1 = HermitianOperator::from_trusted(left, "H1");
    let h2 = HermitianOperator::from_trusted(right, "H2");
    let split = tensor_product(&h1, &HermitianOperator::identity(d2)).into_matrix()
        + tensor_product(&HermitianOperator::identity(d1), &h2).into_matrix();
    let residual = (m - split).norm();
    let tolerance = rel_tol * h.norm();
    Ok(FactorizationReport {
        dims,
        decomposable: residual <= tolerance,
        h1,
        h2,
        residual,
        tolerance,
        scalar_split_convention: SCALAR_SPLIT_CONVENTION,
    })
}

/// Every non-trivial `(d1, d2)` with `d1·d2 = dim` under which `H` splits.
/// When several exist all are reported; none is preferred.
pub fn all_decompositions(h: &HermitianOperator, rel_tol: f64) -> Vec<FactorizationReport> {
    let n = h.dim();
    (2..n)
        .filter(|d1| n % d1 == 0 && n / d1 >= 2)
        .filter_map(|d1| check_decomposition(h, (d1, n / d1), rel_tol).ok())
        .filter(|r| r.decomposable)
        .collect()
}

/// `H = U (H^ND ⊗ I^D) U†` with `H^ND` non-degenerate.
#[derive(Clone, Debug)]
pub struct UniformDegeneracy {
    pub h_nd: HermitianOperator,
    /// Columns are `|n, i⟩` in the order `n * degeneracy + i`.
    pub basis_change: CMatrix,
    /// `(number of distinct eigenvalues, common degeneracy)`.
    pub dims: (usize, usize),
}

impl UniformDegeneracy {
    pub fn rebuild(&self) -> CMatrix {
        let (_, deg) = self.dims;
        let inner = tensor_product(&self.h_nd, &HermitianOperator::identity(deg)).into_matrix();
        &self.basis_change * inner * self.basis_change.adjoint()
    }
}

/// Detects the case where every energy level has the same multiplicity `i > 1`.
pub fn uniform_degeneracy_factorization(
    h: &HermitianOperator,
    cluster_tol: f64,
) -> Result<Option<UniformDegeneracy>> {
    let sd = spectral_decompose(h, cluster_tol)?;
    let deg = sd.multiplicities()[0];
    if deg < 2 || sd.multiplicities().iter().any(|&k| k != deg) {
        return Ok(None);
    }
    let levels = sd.len();
    let n = h.dim();
    let mut basis_change = CMatrix::zeros(n, n);
    for (level, basis) in sd.bases().iter().enumerate() {
        for i in 0..deg {
            basis_change.set_column(level * deg + i, &basis.column(i));
        }
    }
    Ok(Some(UniformDegeneracy {
        h_nd: HermitianOperator::diagonal(sd.eigenvalues(), "H_ND"),
        basis_change,
        dims: (levels, deg),
    }))
}

/// `{label, dim, H}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemBundle {
    pub label: String,
    pub dim: usize,
    #[serde(rename = "H")]
    pub hamiltonian: MatrixJson,
}

impl SystemBundle {
    pub fn from_system(s: &QuantumSystem) -> Self {
        Self {
            label: s.label().to_string(),
            dim: s.dim(),
            hamiltonian: MatrixJson::from_matrix(s.hamiltonian().matrix()),
        }
    }

    pub fn to_system(&self, herm_tol: f64) -> Result<QuantumSystem> {
        if self.dim != self.hamiltonian.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.hamiltonian.dim,
            });
        }
        let h = self.hamiltonian.to_operator("H", herm_tol)?;
        Ok(QuantumSystem::new(self.label.clone(), h))
    }
}

/// `{label, dim, H, dims, H_int}`; `H` is the total Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeBundle {
    pub label: String,
    pub dim: usize,
    #[serde(rename = "H")]
    pub hamiltonian: MatrixJson,
    pub dims: (usize, usize),
    #[serde(rename = "H_int")]
    pub interaction: MatrixJson,
}

impl CompositeBundle {
    pub fn from_composite(label: impl Into<String>, comp: &CompositeSystem) -> Self {
        Self {
            label: label.into(),
            dim: comp.total().dim(),
            hamiltonian: MatrixJson::from_matrix(comp.total().matrix()),
            dims: comp.dims(),
            interaction: MatrixJson::from_matrix(comp.interaction().matrix()),
        }
    }

    /// Recovers the factor Hamiltonians by splitting `H − H_int`.
    pub fn to_composite(&self, herm_tol: f64, rel_tol: f64) -> Result<CompositeSystem> {
        let total = self.hamiltonian.to_operator("H", herm_tol)?;
        let interaction = self.interaction.to_operator("H_int", herm_tol)?;
        if interaction.dim() != total.dim() || total.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: interaction.dim(),
            });
        }
        let free = &total - &interaction;
        let report = check_decomposition(&free, self.dims, rel_tol)?;
        if !report.decomposable {
            return Err(Error::InvalidArgument(format!(
                "H − H_int does not split over dims {:?} (residual {:.3e})",
                self.dims, report.residual
            )));
        }
        let s1 = QuantumSystem::new(format!("{}.1", self.label), report.h1);
        let s2 = QuantumSystem::new(format!("{}.2", self.label), report.h2);
        compose(&s1, &s2, Some(&interaction))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::testutil::*;
    use crate::operator::{evolve, partial_trace, DensityState, DEFAULT_CLUSTER_TOL};
    use nalgebra::{DMatrix, DVector};

    fn sz() -> HermitianOperator {
        HermitianOperator::diagonal(&[1.0, -1.0], "σz")
    }

    #[test]
    fn free_composite_evolution_factorizes() {
        let mut r = rng(41);
        let s1 = QuantumSystem::new("a", random_hermitian(&mut r, 2));
        let s2 = QuantumSystem::new("b", random_hermitian(&mut r, 2));
        let comp = compose(&s1, &s2, None).unwrap();
        let r1 = random_state(&mut r, 2);
        let r2 = random_state(&mut r, 2);
        let t = 1.3;
        let joint = evolve(&r1.product(&r2), comp.total(), t, 1.0).unwrap();
        let separate = evolve(&r1, s1.hamiltonian(), t, 1.0)
            .unwrap()
            .product(&evolve(&r2, s2.hamiltonian(), t, 1.0).unwrap());
        assert!((joint.matrix() - separate.matrix()).norm() < 1e-12);
    }

    #[test]
    fn reduced_states_of_free_composite_evolve_unitarily() {
        let mut r = rng(43);
        for _ in 0..5 {
            let s1 = QuantumSystem::new("a", random_hermitian(&mut r, 2));
            let s2 = QuantumSystem::new("b", random_hermitian(&mut r, 3));
            let comp = compose(&s1, &s2, None).unwrap();
            // entangled initial state
            let rho = random_state(&mut r, 6);
            let t = 2.1;
            let joint = evolve(&rho, comp.total(), t, 1.0).unwrap();
            let red = partial_trace(&joint, (2, 3), Factor::Left).unwrap();
            let own = evolve(&partial_trace(&rho, (2, 3), Factor::Left).unwrap(), s1.hamiltonian(), t, 1.0).unwrap();
            assert!((red.matrix() - own.matrix()).norm() < 1e-10);
            let red2 = partial_trace(&joint, (2, 3), Factor::Right).unwrap();
            let own2 = evolve(&partial_trace(&rho, (2, 3), Factor::Right).unwrap(), s2.hamiltonian(), t, 1.0).unwrap();
            assert!((red2.matrix() - own2.matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn interaction_changes_reduced_purity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DVector::from_vec(vec![c(s), c(s)]);
        let q = QuantumSystem::new("q", HermitianOperator::zeros(2));
        let zz = tensor_product(&sz(), &sz());
        let comp = compose(&q, &q, Some(&zz)).unwrap();
        let rho0 = DensityState::pure(&plus.kronecker(&plus)).unwrap();
        let purities: Vec<f64> = [0.0, 0.2, 0.4, 0.785]
            .iter()
            .map(|&t| {
                let joint = evolve(&rho0, comp.total(), t, 1.0).unwrap();
                partial_trace(&joint, (2, 2), Factor::Left).unwrap().purity()
            })
            .collect();
        // Oracle: reduced off-diagonal is ½cos(2t), so purity is ½(1 + cos²(2t)).
        for (p, t) in purities.iter().zip([0.0f64, 0.2, 0.4, 0.785]) {
            let oracle = 0.5 * (1.0 + (2.0 * t).cos().powi(2));
            assert!((p - oracle).abs() < 1e-12);
        }
        assert!(purities[0] - purities[3] > 0.45);
    }

    #[test]
    fn compose_then_decompose_round_trip() {
        let mut r = rng(47);
        let a = random_hermitian(&mut r, 3);
        let b = random_hermitian(&mut r, 2);
        let comp = compose(&QuantumSystem::new("a", a.clone()), &QuantumSystem::new("b", b.clone()), None).unwrap();
        let rep = check_decomposition(comp.total(), (3, 2), DEFAULT_DECOMPOSITION_TOL).unwrap();
        assert!(rep.decomposable);
        assert!(rep.residual < 1e-12);
        // factors up to the scalar convention: H1 = A + cI, H2 = B − cI with c = Tr(B)/2
        let shift = b.trace() / 2.0;
        let expected_h1 = a.matrix() + CMatrix::identity(3, 3) * c(shift);
        let expected_h2 = b.matrix() - CMatrix::identity(2, 2) * c(shift);
        assert!((rep.h1.matrix() - expected_h1).norm() < 1e-12);
        assert!((rep.h2.matrix() - expected_h2).norm() < 1e-12);
        assert!(rep.h2.trace().abs() < 1e-12);
    }

    #[test]
    fn pure_interaction_is_not_decomposable() {
        let zz = tensor_product(&sz(), &sz());
        let rep = check_decomposition(&zz, (2, 2), DEFAULT_DECOMPOSITION_TOL).unwrap();
        assert!(!rep.decomposable);
        assert!((rep.residual - 2.0).abs() < 1e-12);
        assert!(check_decomposition(&zz, (3, 2), 1e-9).is_err());
    }

    #[test]
    fn interacting_composite_is_flagged() {
        let mut r = rng(53);
        let s1 = QuantumSystem::new("a", random_hermitian(&mut r, 2));
        let s2 = QuantumSystem::new("b", random_hermitian(&mut r, 2));
        let hint = &tensor_product(&sz(), &sz()) * 1e-3;
        let comp = compose(&s1, &s2, Some(&hint)).unwrap();
        assert!(!comp.is_non_interacting(DEFAULT_DECOMPOSITION_TOL));
        let rep = check_decomposition(comp.total(), (2, 2), DEFAULT_DECOMPOSITION_TOL).unwrap();
        assert!(!rep.decomposable);
    }

    /// Least-squares projection onto span{E_ab ⊗ I, I ⊗ E_cd} over the reals,
    /// solved with an SVD; independent of the partial-trace formula.
    fn least_squares_residual(h: &CMatrix, d1: usize, d2: usize) -> f64 {
        let n = d1 * d2;
        let mut columns: Vec<CMatrix> = Vec::new();
        for (da, db, left) in [(d1, d2, true), (d2, d1, false)] {
            for a in 0..da {
                for b in 0..da {
                    for phase in [c(1.0), num_complex::Complex64::new(0.0, 1.0)] {
                        let mut e = CMatrix::zeros(da, da);
                        e[(a, b)] = phase;
                        let id = CMatrix::identity(db, db);
                        columns.push(if left { e.kronecker(&id) } else { id.kronecker(&e) });
                    }
                }
            }
        }
        let rows = 2 * n * n;
        let flatten = |m: &CMatrix| -> Vec<f64> {
            m.iter().map(|z| z.re).chain(m.iter().map(|z| z.im)).collect()
        };
        let a = DMatrix::from_fn(rows, columns.len(), |i, j| flatten(&columns[j])[i]);
        let y = DVector::from_vec(flatten(h));
        let svd = a.clone().svd(true, true);
        let x = svd.solve(&y, 1e-12).unwrap();
        (a * x - y).norm()
    }

    #[test]
    fn residual_matches_least_squares_oracle() {
        let mut r = rng(59);
        for (d1, d2) in [(2, 2), (2, 3), (3, 2)] {
            let h = random_hermitian(&mut r, d1 * d2);
            let rep = check_decomposition(&h, (d1, d2), DEFAULT_DECOMPOSITION_TOL).unwrap();
            let oracle = least_squares_residual(h.matrix(), d1, d2);
            assert!((rep.residual - oracle).abs() < 1e-10, "{} vs {}", rep.residual, oracle);
        }
    }

    #[test]
    fn reports_every_splitting_factorization() {
        // diag over 2⊗2⊗2 with additive single-site energies splits as (2,4) and (4,2)
        let e = [0.0, 1.0];
        let f = [0.0, 3.0];
        let g = [0.0, 7.0];
        let mut d = Vec::new();
        for a in e {
            for b in f {
                for cc in g {
                    d.push(a + b + cc);
                }
            }
        }
        let h = HermitianOperator::diagonal(&d, "H");
        let reports = all_decompositions(&h, DEFAULT_DECOMPOSITION_TOL);
        let dims: Vec<_> = reports.iter().map(|r| r.dims).collect();
        assert_eq!(dims, vec![(2, 4), (4, 2)]);
    }

    #[test]
    fn uniform_degeneracy_cases() {
        let h = HermitianOperator::diagonal(&[1.0, 1.0, 2.0, 2.0], "H");
        let u = uniform_degeneracy_factorization(&h, DEFAULT_CLUSTER_TOL).unwrap().unwrap();
        assert_eq!(u.dims, (2, 2));
        assert_eq!(u.h_nd.matrix(), HermitianOperator::diagonal(&[1.0, 2.0], "").matrix());
        assert!((u.rebuild() - h.matrix()).norm() < 1e-12);

        let h = HermitianOperator::diagonal(&[1.0, 1.0, 2.0], "H");
        assert!(uniform_degeneracy_factorization(&h, DEFAULT_CLUSTER_TOL).unwrap().is_none());
        let h = HermitianOperator::diagonal(&[1.0, 2.0, 3.0], "H");
        assert!(uniform_degeneracy_factorization(&h, DEFAULT_CLUSTER_TOL).unwrap().is_none());
    }

    #[test]
    fn uniform_degeneracy_under_random_conjugation() {
        let mut r = rng(61);
        let nd = HermitianOperator::diagonal(&[-0.7, 0.4, 1.9], "ND");
        let inner = tensor_product(&nd, &HermitianOperator::identity(3));
        let u = random_unitary(&mut r, 9);
        let h = inner.conjugate_by(&u);
        let f = uniform_degeneracy_factorization(&h, DEFAULT_CLUSTER_TOL).unwrap().unwrap();
        assert_eq!(f.dims, (3, 3));
        let recovered = crate::operator::spectral_decompose(&f.h_nd, DEFAULT_CLUSTER_TOL).unwrap();
        for (x, y) in recovered.eigenvalues().iter().zip([-0.7, 0.4, 1.9]) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!((f.rebuild() - h.matrix()).norm() < 1e-10);
        let b = &f.basis_change;
        assert!((b.adjoint() * b - CMatrix::identity(9, 9)).norm() < 1e-10);
    }

    #[test]
    fn bundles_round_trip() {
        let mut r = rng(67);
        let s1 = QuantumSystem::new("a", random_hermitian(&mut r, 2));
        let s2 = QuantumSystem::new("b", random_hermitian(&mut r, 3));
        let hint = random_hermitian(&mut r, 6);
        let comp = compose(&s1, &s2, Some(&hint)).unwrap();
        let bundle = CompositeBundle::from_composite("ab", &comp);
        let json = serde_json::to_string(&bundle).unwrap();
        let back: CompositeBundle = serde_json::from_str(&json).unwrap();
        let rebuilt = back.to_composite(1e-10, 1e-9).unwrap();
        assert!((rebuilt.total().matrix() - comp.total().matrix()).norm() < 1e-12);
        let sb = SystemBundle::from_system(&s1);
        assert_eq!(sb.to_system(1e-10).unwrap().dim(), 2);
        assert!(json.contains("\"H_int\""));
    }
}
