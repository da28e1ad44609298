//! Textbook scenarios with their expected definite-valuedness verdicts.
//!
//! Internal units throughout: `ħ = 1`, masses and couplings absorbed into the
//! stated parameters.

pub mod angular;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::actualization::{
    is_definite_valued, preferred_context_with, ActualizationOptions, ContextKind,
};
use crate::decoherence::wigner::{PhaseHamiltonian, PositionGrid};
use crate::error::{Error, Result};
use crate::operator::{c, CMatrix, HermitianOperator, MatrixJson};
use crate::systems::{QuantumSystem, SystemBundle};
use angular::multiplet_operators;

#[derive(Clone, Debug)]
pub struct ScenarioFixture {
    pub name: String,
    pub system: QuantumSystem,
    pub observables: Vec<HermitianOperator>,
    /// Asserted verdicts by observable label.
    pub expected: BTreeMap<String, bool>,
    pub expected_context: ContextKind,
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictRow {
    pub label: String,
    pub expected: Option<bool>,
    pub actual: bool,
    pub score: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    pub name: String,
    pub expected_context: ContextKind,
    pub context: ContextKind,
    pub levels: usize,
    pub rows: Vec<VerdictRow>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservableJson {
    pub label: String,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureBundle {
    pub name: String,
    pub system: SystemBundle,
    pub observables: Vec<ObservableJson>,
    pub expected_verdicts: BTreeMap<String, bool>,
    pub expected_context: ContextKind,
    pub parameters: BTreeMap<String, f64>,
}

impl ScenarioFixture {
    fn new(
        name: impl Into<String>,
        h: HermitianOperator,
        observables: Vec<HermitianOperator>,
        expected: &[(&str, bool)],
        parameters: &[(&str, f64)],
    ) -> Self {
        let name = name.into();
        Self {
            system: QuantumSystem::new(name.clone(), h.with_label("H")),
            name,
            observables,
            expected: expected.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            expected_context: ContextKind::Context,
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn observable(&self, label: &str) -> Option<&HermitianOperator> {
        self.observables.iter().find(|o| o.label() == label)
    }

    /// Same fixture with `H + δ`, verdicts left to be recomputed.
    pub fn perturbed(&self, name: impl Into<String>, delta: &CMatrix) -> Result<Self> {
        let h = HermitianOperator::new(self.system.hamiltonian().matrix() + delta, "H")?;
        let name = name.into();
        Ok(Self {
            system: QuantumSystem::new(name.clone(), h),
            name,
            observables: self.observables.clone(),
            expected: BTreeMap::new(),
            expected_context: ContextKind::Context,
            parameters: self.parameters.clone(),
        })
    }

    /// Without a context nothing is definite-valued.
    pub fn check(&self, options: ActualizationOptions) -> Result<FixtureReport> {
        let ctx = preferred_context_with(self.system.hamiltonian(), options)?;
        let mut rows = Vec::with_capacity(self.observables.len());
        for o in &self.observables {
            let (actual, score) = if ctx.has_context() {
                let v = is_definite_valued(o, &ctx)?;
                (v.definite, Some(v.score))
            } else {
                (false, None)
            };
            let expected = self.expected.get(o.label()).copied();
            rows.push(VerdictRow {
                label: o.label().to_string(),
                expected,
                actual,
                score,
                pass: expected.is_none_or(|e| e == actual),
            });
        }
        let pass = ctx.kind() == self.expected_context && rows.iter().all(|r| r.pass);
        Ok(FixtureReport {
            name: self.name.clone(),
            expected_context: self.expected_context,
            context: ctx.kind(),
            levels: ctx.eigenvalues().len(),
            rows,
            pass,
        })
    }

    pub fn to_bundle(&self) -> FixtureBundle {
        FixtureBundle {
            name: self.name.clone(),
            system: SystemBundle::from_system(&self.system),
            observables: self
                .observables
                .iter()
                .map(|o| ObservableJson {
                    label: o.label().to_string(),
                    matrix: MatrixJson::from_matrix(o.matrix()),
                })
                .collect(),
            expected_verdicts: self.expected.clone(),
            expected_context: self.expected_context,
            parameters: self.parameters.clone(),
        }
    }
}

fn real_diag(values: impl IntoIterator<Item = f64>, label: &str) -> HermitianOperator {
    let v: Vec<f64> = values.into_iter().collect();
    HermitianOperator::diagonal(&v, label)
}

/// Momentum basis `p ∈ {−n,…,−1, 1,…,n}`, `H = P²/2` (`m = 1`).
pub fn free_particle(n_modes: usize) -> Result<ScenarioFixture> {
    if n_modes < 2 {
        return Err(Error::InvalidArgument("free_particle needs n_modes ≥ 2".into()));
    }
    let n = n_modes as i64;
    let p: Vec<f64> = (-n..=n).filter(|&k| k != 0).map(|k| k as f64).collect();
    let h = real_diag(p.iter().map(|x| 0.5 * x * x), "H");
    Ok(ScenarioFixture::new(
        "free_particle",
        h.clone(),
        vec![h, real_diag(p.iter().map(|x| x * x), "P²"), real_diag(p.clone(), "P")],
        &[("H", true), ("P²", true), ("P", false)],
        &[("n_modes", n_modes as f64), ("mass", 1.0)],
    ))
}

/// `H = P²/2 + f·P`: the term odd in `P` splits the `±p` pairs.
pub fn free_particle_biased(n_modes: usize, f: f64) -> Result<ScenarioFixture> {
    let base = free_particle(n_modes)?;
    let p = base.observable("P").unwrap().clone();
    let mut fx = base.perturbed("free_particle_biased", &(p.matrix() * c(f)))?;
    fx.expected = [("H", true), ("P²", true), ("P", true)]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    fx.parameters.insert("bias".into(), f);
    Ok(fx)
}

fn spin_observables(two_js: &[u32]) -> [HermitianOperator; 4] {
    multiplet_operators(two_js, "S")
}

/// Spin 1/2 with `H_s = kS² = (3k/4)·I`: scalar, so no context on this factor.
pub fn spin_system(k: f64) -> ScenarioFixture {
    let [sx, sy, sz, s2] = spin_observables(&[1]);
    let h = &s2 * k;
    let mut fx = ScenarioFixture::new(
        "spin_half",
        h,
        vec![sx, sy, sz, s2],
        &[("S_x", false), ("S_y", false), ("S_z", false)],
        &[("k", k)],
    );
    fx.expected_context = ContextKind::None;
    fx
}

/// Spin `½ ⊕ 1` with `H_s = kS²`: block-scalar, two levels.
pub fn spin_direct_sum(k: f64) -> ScenarioFixture {
    let [sx, sy, sz, s2] = spin_observables(&[1, 2]);
    let h = &s2 * k;
    ScenarioFixture::new(
        "spin_half_plus_one",
        h,
        vec![sx, sy, sz, s2],
        &[("S_x", false), ("S_y", false), ("S_z", false), ("S²", true)],
        &[("k", k)],
    )
}

/// Spin 1/2 with `H = kS² − γB·S_z`.
pub fn spin_in_field(k: f64, gamma_b: f64) -> ScenarioFixture {
    let [sx, sy, sz, s2] = spin_observables(&[1]);
    let h = &(&s2 * k) - &(&sz * gamma_b);
    ScenarioFixture::new(
        "spin_half_in_field",
        h,
        vec![sx, sy, sz, s2],
        &[("S_x", false), ("S_y", false), ("S_z", true), ("S²", true)],
        &[("k", k), ("gamma_b", gamma_b)],
    )
}

/// `H = Ω(N + ½)` on `n = 0..n_max`, `q = (a + a†)/√2`, `p = i(a† − a)/√2`.
pub fn harmonic_oscillator(n_max: usize, omega: f64) -> Result<ScenarioFixture> {
    if n_max < 1 || !(omega > 0.0) {
        return Err(Error::InvalidArgument("oscillator needs n_max ≥ 1 and Ω > 0".into()));
    }
    let d = n_max + 1;
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &ad) * c(s);
    let p = (&ad - &a) * num_complex::Complex64::new(0.0, s);
    let number = real_diag((0..d).map(|n| n as f64), "N");
    let h = real_diag((0..d).map(|n| omega * (n as f64 + 0.5)), "H");
    Ok(ScenarioFixture::new(
        "harmonic_oscillator",
        h.clone(),
        vec![
            h,
            number,
            HermitianOperator::new(q + p, "q+p")?,
        ],
        &[("H", true), ("N", true), ("q+p", false)],
        &[("n_max", n_max as f64), ("omega", omega)],
    ))
}

/// `(n, l, m)` in order `n = 1..n_max`, `l = 0..n−1`, `m = l..−l`.
pub fn hydrogen_states(n_max: usize) -> Vec<(usize, usize, i64)> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for l in 0..n {
            for m in (-(l as i64)..=l as i64).rev() {
                out.push((n, l, m));
            }
        }
    }
    out
}

fn hydrogen_family(
    name: &str,
    n_max: usize,
    energy: impl Fn(usize, usize, i64) -> f64,
    expected: &[(&str, bool)],
    parameters: &[(&str, f64)],
) -> Result<ScenarioFixture> {
    if n_max < 2 {
        return Err(Error::InvalidArgument("hydrogen fixtures need n_max ≥ 2".into()));
    }
    let states = hydrogen_states(n_max);
    let two_ls: Vec<u32> = (1..=n_max).flat_map(|n| (0..n).map(|l| 2 * l as u32)).collect();
    let [lx, _, lz, l2] = multiplet_operators(&two_ls, "L");
    let h = real_diag(states.iter().map(|&(n, l, m)| energy(n, l, m)), "H");
    Ok(ScenarioFixture::new(
        name,
        h.clone(),
        vec![h, l2, lz, lx],
        expected,
        parameters,
    ))
}

/// Spinless Coulomb levels `ω_n = −1/n²`.
pub fn hydrogen_like(n_max: usize) -> Result<ScenarioFixture> {
    hydrogen_family(
        "hydrogen",
        n_max,
        |n, _, _| -1.0 / (n * n) as f64,
        &[("H", true), ("L²", false), ("L_z", false), ("L_x", false)],
        &[("n_max", n_max as f64)],
    )
}

/// `ω_nl = −1/n² + ε·l`.
pub fn hydrogen_non_coulomb(n_max: usize, epsilon: f64) -> Result<ScenarioFixture> {
    hydrogen_family(
        "hydrogen_non_coulomb",
        n_max,
        move |n, l, _| -1.0 / (n * n) as f64 + epsilon * l as f64,
        &[("H", true), ("L²", true), ("L_z", false), ("L_x", false)],
        &[("n_max", n_max as f64), ("epsilon", epsilon)],
    )
}

/// `H_at + b·L_z` on a hydrogen-family fixture. On the Coulomb base the `m = 0`
/// members of each shell stay degenerate across `l`, so `L²` stays indefinite.
pub fn zeeman(base: &ScenarioFixture, b: f64) -> Result<ScenarioFixture> {
    let lz = base
        .observable("L_z")
        .ok_or_else(|| Error::InvalidArgument("zeeman needs a fixture with L_z".into()))?;
    let l2_definite = base.expected.get("L²").copied().unwrap_or(false);
    let mut fx = base.perturbed(format!("zeeman_{}", base.name), &(lz.matrix() * c(b)))?;
    let field_on = b != 0.0;
    fx.expected = [
        ("H", true),
        ("L²", l2_definite),
        ("L_z", field_on),
        ("L_x", false),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), *v))
    .collect();
    fx.parameters.insert("b".into(), b);
    Ok(fx)
}

/// `(n, l, 2j, 2m_j)` in the coupled basis, `s = ½`.
pub fn fine_structure_states(n_max: usize) -> Vec<(usize, usize, u32, i64)> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for l in 0..n {
            for two_j in [2 * l as i64 - 1, 2 * l as i64 + 1] {
                if two_j < 0 {
                    continue;
                }
                for two_m in (-two_j..=two_j).rev().step_by(2) {
                    out.push((n, l, two_j as u32, two_m));
                }
            }
        }
    }
    out
}

/// `ξ·[j(j+1) − l(l+1) − s(s+1)]`, `s = ½`.
pub fn spin_orbit_shift(l: usize, two_j: u32, xi: f64) -> f64 {
    let j = two_j as f64 / 2.0;
    let l = l as f64;
    xi * (j * (j + 1.0) - l * (l + 1.0) - 0.75)
}

/// `ω_nlj = −1/n² + ξ·[j(j+1) − l(l+1) − ¾]`, degenerate in `m_j`.
pub fn fine_structure(n_max: usize, xi: f64) -> Result<ScenarioFixture> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("fine_structure needs n_max ≥ 1".into()));
    }
    let states = fine_structure_states(n_max);
    // one entry per (n, l, j) multiplet
    let mut two_js = Vec::new();
    let mut k = 0;
    while k < states.len() {
        two_js.push(states[k].2);
        k += states[k].2 as usize + 1;
    }
    let [jx, _, jz, j2] = multiplet_operators(&two_js, "J");
    let h = real_diag(
        states
            .iter()
            .map(|&(n, l, tj, _)| -1.0 / (n * n) as f64 + spin_orbit_shift(l, tj, xi)),
        "H",
    );
    let l2 = real_diag(states.iter().map(|&(_, l, _, _)| (l * (l + 1)) as f64), "L²");
    let s2 = real_diag(states.iter().map(|_| 0.75), "S²");
    Ok(ScenarioFixture::new(
        "fine_structure",
        h,
        vec![l2, j2, s2, jz, jx],
        &[("L²", true), ("J²", true), ("S²", true), ("J_z", false), ("J_x", false)],
        &[("n_max", n_max as f64), ("xi", xi)],
    ))
}

/// Fine structure plus `b·J_z`.
pub fn anomalous_zeeman(n_max: usize, xi: f64, b: f64) -> Result<ScenarioFixture> {
    let base = fine_structure(n_max, xi)?;
    let jz = base.observable("J_z").unwrap().matrix() * c(b);
    let mut fx = base.perturbed("anomalous_zeeman", &jz)?;
    fx.expected = [("L²", true), ("J²", true), ("S²", true), ("J_z", true), ("J_x", false)]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    fx.parameters.insert("b".into(), b);
    Ok(fx)
}

/// Default parameters used by the regression suite.
pub const FIXTURE_NAMES: [&str; 13] = [
    "free_particle",
    "free_particle_biased",
    "spin_half",
    "spin_half_plus_one",
    "spin_half_in_field",
    "harmonic_oscillator",
    "hydrogen",
    "hydrogen_non_coulomb",
    "zeeman_hydrogen_non_coulomb",
    "zeeman_hydrogen",
    "zeeman_off",
    "fine_structure",
    "anomalous_zeeman",
];

/// Looks up a fixture; `oscillator`, `spin` and `zeeman` are short aliases.
pub fn by_name(name: &str) -> Result<ScenarioFixture> {
    let b = 0.1 * std::f64::consts::SQRT_2;
    match name {
        "free_particle" => free_particle(4),
        "free_particle_biased" => free_particle_biased(4, 0.3),
        "spin_half" | "spin" => Ok(spin_system(1.0)),
        "spin_half_plus_one" => Ok(spin_direct_sum(1.0)),
        "spin_half_in_field" => Ok(spin_in_field(1.0, 0.5)),
        "harmonic_oscillator" | "oscillator" => harmonic_oscillator(12, 1.0),
        "hydrogen" => hydrogen_like(3),
        "hydrogen_non_coulomb" => hydrogen_non_coulomb(3, 0.05),
        "zeeman_hydrogen_non_coulomb" | "zeeman" => zeeman(&hydrogen_non_coulomb(3, 0.05)?, 0.01 * b),
        "zeeman_hydrogen" => zeeman(&hydrogen_like(3)?, 0.01 * b),
        "zeeman_off" => {
            let mut fx = zeeman(&hydrogen_like(3)?, 0.0)?;
            fx.name = "zeeman_off".into();
            Ok(fx)
        }
        "fine_structure" => fine_structure(3, 0.01),
        "anomalous_zeeman" => anomalous_zeeman(3, 0.01, 0.001 * b),
        _ => Err(Error::InvalidArgument(format!(
            "unknown fixture '{name}' (known: {})",
            FIXTURE_NAMES.join(", ")
        ))),
    }
}

pub fn all_fixtures() -> Result<Vec<ScenarioFixture>> {
    FIXTURE_NAMES.iter().map(|n| by_name(n)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogReport {
    pub fixtures: Vec<FixtureReport>,
    pub pass: bool,
}

pub fn run_catalog(options: ActualizationOptions) -> Result<CatalogReport> {
    let fixtures = all_fixtures()?
        .iter()
        .map(|f| f.check(options))
        .collect::<Result<Vec<_>>>()?;
    let pass = fixtures.iter().all(|f| f.pass);
    Ok(CatalogReport { fixtures, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct MassStep {
    pub mass: f64,
    /// Drift score of `Q`.
    pub q_score: f64,
    pub p2_score: f64,
    pub q_approximately_definite: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BornOppenheimerReport {
    pub steps: Vec<MassStep>,
    pub threshold: f64,
}

/// `V(q) = ½q² + 0.1q⁴`.
pub fn born_oppenheimer_potential(q: f64) -> f64 {
    0.5 * q * q + 0.1 * q.powi(4)
}

/// `H = P²/2m + V(Q)` on a position grid; scores of `Q` and `P²` against each mass.
pub fn born_oppenheimer_scan(
    masses: &[f64],
    grid: &PositionGrid,
    options: ActualizationOptions,
) -> Result<BornOppenheimerReport> {
    if masses.is_empty() || masses.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::InvalidArgument("masses must be positive".into()));
    }
    let zero = |_: f64| 0.0;
    let p2 = PhaseHamiltonian {
        mass: 0.5,
        potential: &zero,
        omega_char: 1.0,
    }
    .quantize(grid, 1.0);
    let p2 = HermitianOperator::from_real(p2, "P²")?;
    let q = real_diag(grid.points(), "Q");
    let steps = masses
        .iter()
        .map(|&mass| {
            let h = PhaseHamiltonian {
                mass,
                potential: &born_oppenheimer_potential,
                omega_char: 1.0,
            }
            .quantize(grid, 1.0);
            let ctx = preferred_context_with(&HermitianOperator::from_real(h, "H")?, options)?;
            let vq = is_definite_valued(&q, &ctx)?;
            let vp = is_definite_valued(&p2, &ctx)?;
            Ok(MassStep {
                mass,
                q_score: vq.score,
                p2_score: vp.score,
                q_approximately_definite: vq.approximately_definite,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BornOppenheimerReport {
        steps,
        threshold: options.approx_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::spectral_decompose;

    fn opts() -> ActualizationOptions {
        ActualizationOptions::default()
    }

    #[test]
    fn every_fixture_reproduces_its_table() {
        let rep = run_catalog(opts()).unwrap();
        for f in &rep.fixtures {
            assert!(f.pass, "{f:#?}");
        }
        assert!(rep.pass);
    }

    #[test]
    fn free_particle_has_paired_levels() {
        let fx = free_particle(3).unwrap();
        let sd = spectral_decompose(fx.system.hamiltonian(), 1e-8).unwrap();
        assert_eq!(sd.multiplicities(), &[2, 2, 2]);
    }

    #[test]
    fn hydrogen_shell_sizes() {
        let states = hydrogen_states(3);
        for n in 1..=3 {
            assert_eq!(states.iter().filter(|s| s.0 == n).count(), n * n);
        }
        let sd = spectral_decompose(hydrogen_like(3).unwrap().system.hamiltonian(), 1e-8).unwrap();
        assert_eq!(sd.multiplicities(), &[1, 4, 9]);
    }

    #[test]
    fn zeeman_shifts_the_p_triplet_by_m() {
        let base = hydrogen_non_coulomb(2, 0.05).unwrap();
        let fx = zeeman(&base, 1.0).unwrap();
        let states = hydrogen_states(2);
        for (k, &(n, l, m)) in states.iter().enumerate() {
            if n == 2 && l == 1 {
                let shift = fx.system.hamiltonian().matrix()[(k, k)].re
                    - base.system.hamiltonian().matrix()[(k, k)].re;
                assert!((shift - m as f64).abs() < 1e-14);
            }
        }
        let off = zeeman(&hydrogen_like(3).unwrap(), 0.0).unwrap();
        let plain = hydrogen_like(3).unwrap().check(opts()).unwrap();
        let again = off.check(opts()).unwrap();
        for (a, b) in plain.rows.iter().zip(&again.rows) {
            assert_eq!(a.actual, b.actual);
        }
    }

    #[test]
    fn spin_orbit_arithmetic() {
        assert_eq!(spin_orbit_shift(1, 3, 1.0), 1.0);
        assert_eq!(spin_orbit_shift(1, 1, 1.0), -2.0);
        assert_eq!(spin_orbit_shift(0, 1, 1.0), 0.0);
        let states = fine_structure_states(2);
        assert_eq!(states.len(), 2 * (1 + 4));
    }

    #[test]
    fn oscillator_levels() {
        let fx = harmonic_oscillator(5, 2.0).unwrap();
        let sd = spectral_decompose(fx.system.hamiltonian(), 1e-8).unwrap();
        for (n, e) in sd.eigenvalues().iter().enumerate() {
            assert!((e - 2.0 * (n as f64 + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_fixture_is_an_error() {
        assert!(by_name("nope").is_err());
        assert!(free_particle(1).is_err());
        assert!(hydrogen_like(1).is_err());
    }

    #[test]
    fn born_oppenheimer_scaling() {
        let grid = PositionGrid::centered(10.0, 48).unwrap();
        let masses: Vec<f64> = (0..14).map(|k| 2f64.powi(k)).collect();
        let rep = born_oppenheimer_scan(&masses, &grid, opts()).unwrap();
        for w in rep.steps.windows(2) {
            assert!((w[1].q_score - 0.5 * w[0].q_score).abs() < 1e-10 * w[0].q_score.max(1.0));
            assert!((w[1].p2_score - w[0].p2_score).abs() < 1e-9 * w[0].p2_score);
        }
        assert!(rep.steps[0].p2_score < rep.steps[0].q_score);
        assert!(!rep.steps[0].q_approximately_definite);
        assert!(rep.steps.last().unwrap().q_approximately_definite);
    }

    #[test]
    fn bundle_roundtrip_keeps_hamiltonian() {
        let fx = by_name("fine_structure").unwrap();
        let b = fx.to_bundle();
        let s = b.system.to_system(1e-10).unwrap();
        assert_eq!(s.hamiltonian().matrix(), fx.system.hamiltonian().matrix());
        assert_eq!(b.expected_verdicts.len(), 5);
    }
}
