//! Acceptance criteria. One `[PASS]`/`[FAIL]` line per criterion; exits nonzero
//! if any fails. Run with `cargo test -p modal-core --test acceptance`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use modal_core::actualization::{preferred_context, ActualizationOptions};
use modal_core::catalog::run_catalog;
use modal_core::decoherence::wigner::{
    classical_limit_check, cosine_bump, momentum_density, wigner_transform, EnergyDensity,
    PhaseHamiltonian, PositionGrid,
};
use modal_core::decoherence::{
    decoherence_profile, expectation_evolution, gaussian_model, single_frequency_model,
    GaussianProfile,
};
use modal_core::measurement::stern_gerlach::stern_gerlach;
use modal_core::measurement::tails::{tails_overlap, Gaussian, Window};
use modal_core::measurement::tomography::{setting_observable, settings, tomography, Setting};
use modal_core::measurement::{
    run_ideal, run_nonideal, Apparatus, CorrelationMatrix, MeasurementOptions, MeasurementSetup,
};
use modal_core::operator::{
    evolve, propagator, CMatrix, CVector, Csop, DensityState, HermitianOperator,
};
use modal_core::propensity::{frequency_from_table, propensity_table, BooleanContext, PropensityTable};
use modal_core::systems::QuantumSystem;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(r: &mut impl Rng, n: usize, m: usize) -> CMatrix {
    CMatrix::from_fn(n, m, |_, _| {
        Complex64::new(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)
    })
}

fn random_hermitian(r: &mut impl Rng, n: usize) -> HermitianOperator {
    let a = random_matrix(r, n, n);
    HermitianOperator::new(&a + a.adjoint(), "H").unwrap()
}

fn random_unitary(r: &mut impl Rng, n: usize) -> CMatrix {
    propagator(&random_hermitian(r, n), 1.0, 1.0).unwrap()
}

fn random_state(r: &mut impl Rng, n: usize) -> DensityState {
    let a = random_matrix(r, n, n);
    let m = &a * a.adjoint();
    let t = m.trace();
    DensityState::new(m / t).unwrap()
}

fn random_unit_vector(r: &mut impl Rng, n: usize) -> Vec<Complex64> {
    let v = random_matrix(r, n, 1);
    let norm = v.norm();
    v.iter().map(|z| z / norm).collect()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn catalog_regression() -> Outcome {
    let t0 = Instant::now();
    let rep = run_catalog(ActualizationOptions::default()).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let rows: usize = rep.fixtures.iter().map(|f| f.rows.len()).sum();
    let bad: Vec<String> = rep
        .fixtures
        .iter()
        .flat_map(|f| f.rows.iter().filter(|r| !r.pass).map(move |r| format!("{}:{}", f.name, r.label)))
        .collect();
    ensure(bad.is_empty() && rep.pass, format!("mismatched verdicts {bad:?}"))?;
    ensure(secs < 10.0, format!("runtime {secs:.2} s"))?;
    Ok(format!("{} fixtures, {rows} verdicts, {secs:.2} s", rep.fixtures.len()))
}

fn ladder_setup(r: &mut impl Rng, n: usize, commuting: bool) -> MeasurementSetup {
    let u = random_unitary(r, n);
    let values: Vec<f64> = (0..n).map(|k| k as f64 + 0.5 * r.random::<f64>()).collect();
    let a = HermitianOperator::diagonal(&values, "A").conjugate_by(&u);
    let h_s = if commuting { a.clone().with_label("H_S") } else { random_hermitian(r, n) };
    MeasurementSetup::new(
        QuantumSystem::new("S", h_s),
        a,
        random_unit_vector(r, n),
        Apparatus::ladder(n + 1, 0).unwrap(),
    )
    .unwrap()
}

fn ideal_measurement() -> Outcome {
    let mut r = rng(2);
    let opts = MeasurementOptions::default();
    let mut worst = 0.0f64;
    for trial in 0..64 {
        let n = 1 + trial % 8;
        let setup = ladder_setup(&mut r, n, true);
        let out = run_ideal(&setup, &opts).map_err(|e| e.to_string())?;
        for (p, c) in out.outcome_table().iter().zip(setup.coefficients()) {
            worst = worst.max((p - c.norm_sqr()).abs());
        }
        ensure(out.pointer_verdict.definite, "pointer not definite")?;
        // a 1-level H_S is a multiple of I and selects no context
        if n > 1 {
            ensure(out.observable_definite_on_system, "A not definite when [H_S, A] = 0")?;
        }
    }
    ensure(worst <= 1e-12, format!("max |p − |c|²| = {worst:e}"))?;
    for n in 2..=8 {
        let setup = ladder_setup(&mut r, n, false);
        let out = run_ideal(&setup, &opts).map_err(|e| e.to_string())?;
        ensure(!out.observable_definite_on_system, format!("A definite on S with [H_S, A] ≠ 0 (n = {n})"))?;
        ensure(out.pointer_verdict.definite, "pointer not definite")?;
    }
    Ok(format!("max |p − |c|²| = {worst:.1e}; non-commuting H_S: A false, R true"))
}

fn nonideal_measurement() -> Outcome {
    let mut r = rng(3);
    let opts = MeasurementOptions::default();
    let mut worst = 0.0f64;
    for trial in 0..64 {
        let n = 1 + trial % 8;
        let setup = ladder_setup(&mut r, n, true);
        let raw = random_matrix(&mut r, n, n);
        let norm = raw.norm();
        let d = CorrelationMatrix::new(raw / Complex64::new(norm, 0.0)).unwrap();
        let out = run_nonideal(&setup, &d, &opts).map_err(|e| e.to_string())?;
        let dm = d.matrix();
        for (i, p) in out.outcome_table().iter().enumerate() {
            let oracle: f64 = (0..n).map(|k| dm[(k, i)].norm_sqr()).sum();
            worst = worst.max((p - oracle).abs());
        }
        // diagonal D is the ideal path
        let dd = CorrelationMatrix::diagonal(setup.coefficients()).unwrap();
        let a = run_nonideal(&setup, &dd, &opts).unwrap();
        let b = run_ideal(&setup, &opts).unwrap();
        ensure(a.pointer_table.measures() == b.pointer_table.measures(), "diagonal D differs from ideal")?;
        ensure(a.post_state == b.post_state, "diagonal D post-state differs from ideal")?;
    }
    ensure(worst <= 1e-12, format!("max |ρ_Mii − Σ|d_ni|²| = {worst:e}"))?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let d = CorrelationMatrix::new(CMatrix::from_row_slice(2, 2, &[c(0.6), c(0.1), c(0.1), c(0.62f64.sqrt())]))
        .unwrap();
    let rel = modal_core::measurement::reliability(&d, 0.05);
    ensure(
        (rel.ratios[0] - 0.0278).abs() < 5e-5 && (rel.ratios[1] - 0.0161).abs() < 5e-5,
        format!("worked example ratios {:?}", rel.ratios),
    )?;
    Ok(format!(
        "max deviation {worst:.1e}; worked example ratios {:.4}, {:.4}",
        rel.ratios[0], rel.ratios[1]
    ))
}

fn stern_gerlach_check() -> Outcome {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let opts = MeasurementOptions::default();
    let rep = stern_gerlach(h, h, None, 1.0, &opts).map_err(|e| e.to_string())?;
    let want = [0.5, 0.5, 0.0];
    let err = rep.ideal.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-12, format!("ideal {:?}", rep.ideal))?;
    ensure(rep.ideal[2] == 0.0, "ideal |0⟩ propensity nonzero")?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let d = CorrelationMatrix::new(CMatrix::from_row_slice(2, 2, &[c(0.6), c(0.1), c(0.1), c(0.62f64.sqrt())]))
        .unwrap();
    let rep2 = stern_gerlach(h, h, Some(d), 1.0, &opts).map_err(|e| e.to_string())?;
    let non = rep2.nonideal.ok_or("no non-ideal table")?;
    ensure(non[2] == 0.0, format!("non-ideal |0⟩ propensity {}", non[2]))?;
    ensure(rep.pointer_definite, "pointer not definite")?;
    Ok(format!("ideal {:?}, non-ideal p₀ = {}", rep.ideal, non[2]))
}

fn tails_check() -> Outcome {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rep = tails_overlap(
        Gaussian::new(1.0, 1.0).unwrap(),
        Gaussian::new(-1.0, 1.0).unwrap(),
        Window::new(0.0, f64::INFINITY).unwrap(),
        Window::new(f64::NEG_INFINITY, 0.0).unwrap(),
        h,
        h,
        0.05,
    )
    .map_err(|e| e.to_string())?;
    let phi = Normal::standard().cdf(-1.0);
    for f in [rep.cross_fraction_up, rep.cross_fraction_down] {
        ensure((f - phi).abs() <= 1e-6, format!("cross fraction {f} vs Φ(−1) = {phi}"))?;
        ensure((f - 0.158655).abs() <= 1e-6, format!("cross fraction {f} vs 0.158655"))?;
    }
    ensure(rep.pointer_plus == rep.p_up_plus + rep.p_down_plus, "+ pointer sum")?;
    ensure(rep.pointer_minus == rep.p_down_minus + rep.p_up_minus, "− pointer sum")?;
    let total = rep.pointer_plus + rep.pointer_minus;
    ensure((total - 1.0).abs() <= 1e-9, format!("pointer total {total}"))?;
    Ok(format!("cross fraction {:.9}, Φ(−1) = {phi:.9}", rep.cross_fraction_up))
}

fn sampling_check() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(6);
    let mut tables: Vec<Vec<f64>> = vec![vec![0.5, 0.5], vec![0.0, 0.3, 0.0, 0.7], vec![1e-3, 0.999]];
    for n in [3usize, 5, 8] {
        let raw: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        tables.push(raw.iter().map(|x| x / s).collect());
    }
    for (k, t) in tables.iter().enumerate() {
        let table = PropensityTable::from_measures(t.clone()).map_err(|e| e.to_string())?;
        let f = frequency_from_table(&table, 100_000, 6000 + k as u64, 0).unwrap();
        for (p, freq) in t.iter().zip(f.frequencies()) {
            let band = 3.0 * (p * (1.0 - p) / 1e5).sqrt();
            ensure((freq - p).abs() <= band, format!("table {k}: {freq} vs {p}"))?;
        }
        // no bias at a resolution 10× finer than the 3σ band
        let big = frequency_from_table(&table, 10_000_000, 6100 + k as u64, 0).unwrap();
        for (p, freq) in t.iter().zip(big.frequencies()) {
            let sd = (p * (1.0 - p) / 1e7).sqrt();
            ensure((freq - p).abs() <= 5.0 * sd, format!("table {k} at 10⁷ draws: {freq} vs {p}"))?;
        }
    }
    let zero = PropensityTable::from_measures(vec![0.2, 0.0, 0.8, 0.0]).unwrap();
    let f = frequency_from_table(&zero, 1_000_000, 7, 0).unwrap();
    ensure(f.counts[1] == 0 && f.counts[3] == 0, format!("zero-measure counts {:?}", f.counts))?;
    let sure = PropensityTable::from_measures(vec![0.0, 1.0, 0.0]).unwrap();
    let f = frequency_from_table(&sure, 1_000_000, 8, 0).unwrap();
    ensure(f.counts[1] == 1_000_000, format!("measure-1 atom counts {:?}", f.counts))?;
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < 5.0, format!("runtime {secs:.2} s"))?;
    Ok(format!("{} tables within 3σ, zero/one atoms exact, {secs:.2} s", tables.len()))
}

fn tomography_check() -> Outcome {
    let basis = CMatrix::identity(3, 3);
    // every setting is one of A, B_ij, C_ij with the stated expectation
    let mut r = rng(70);
    let rho = random_state(&mut r, 3);
    let u = random_unitary(&mut r, 3);
    let s = settings(3);
    ensure(s.len() == 7, format!("{} settings for d = 3", s.len()))?;
    for st in &s {
        let o = setting_observable(*st, &u);
        let m = u.adjoint() * rho.matrix() * &u;
        let e = rho.expectation(o.matrix()).re;
        let want = match *st {
            Setting::A => (0..3).map(|i| i as f64 * m[(i, i)].re).sum::<f64>(),
            Setting::B { i, j } => m[(i, j)].re,
            Setting::C { i, j } => m[(i, j)].im,
        };
        if !matches!(st, Setting::A) {
            ensure((e - want).abs() < 1e-12, format!("{st:?}: {e} vs {want}"))?;
        }
    }
    let mut good = 0;
    let mut worst = 0.0f64;
    for trial in 0..20u64 {
        let mut r = rng(1000 + trial);
        let rho = random_state(&mut r, 3);
        let rep = tomography(&rho, &basis, 1_000_000, trial).map_err(|e| e.to_string())?;
        worst = worst.max(rep.trace_distance);
        if rep.trace_distance < 0.01 {
            good += 1;
        }
    }
    ensure(good >= 19, format!("{good}/20 below 0.01"))?;
    Ok(format!("{good}/20 trials below 0.01, worst trace distance {worst:.4}"))
}

fn decoherence_check() -> Outcome {
    let profile = GaussianProfile::default();
    let model = gaussian_model(&profile).map_err(|e| e.to_string())?;
    let rec = model.recurrence_time();
    let times: Vec<f64> = (0..4000).map(|k| k as f64 * 0.5 * rec / 4000.0).collect();
    let prof = decoherence_profile(&model, &times).map_err(|e| e.to_string())?;
    let t_d = prof.t_d.ok_or("envelope never falls below 5%")?;
    ensure(t_d < 0.25 * rec, format!("t_D = {t_d} ≥ rec/4 = {}", 0.25 * rec))?;
    // independent diagonal value: ∫ρ(ω)ω dω for the same Gaussian on the grid
    let w: Vec<f64> = (0..profile.n).map(|k| k as f64 * profile.delta_omega).collect();
    let g: Vec<f64> = w.iter().map(|x| (-0.5 * ((x - profile.center) / profile.width).powi(2)).exp()).collect();
    let oracle = g.iter().zip(&w).map(|(a, x)| a * x).sum::<f64>() / g.iter().sum::<f64>();
    let mut plateau = 0.0f64;
    for k in 0..=200 {
        let t = 0.25 * rec + k as f64 * 0.2 * rec / 200.0;
        plateau = plateau.max((expectation_evolution(&model, t).re - oracle).abs());
    }
    ensure(plateau <= 1e-8, format!("plateau deviates by {plateau:e}"))?;
    let single = single_frequency_model(512, 1.0 / 512.0, 256, 0.5, 1.0).unwrap();
    let sp = decoherence_profile(&single, &times).unwrap();
    let spread = sp.envelope.iter().map(|e| (e - sp.initial_envelope).abs()).fold(0.0, f64::max);
    ensure(sp.t_d.is_none() && spread < 1e-12, format!("single frequency decays (spread {spread:e})"))?;
    Ok(format!(
        "t_D = {t_d:.1} < rec/4 = {:.1}; plateau error {plateau:.1e}; single frequency flat",
        0.25 * rec
    ))
}

fn wigner_check() -> Outcome {
    let hbar = 1.0;
    let grid = PositionGrid::centered(16.0, 256).map_err(|e| e.to_string())?;
    let x = grid.points();
    let psi: Vec<f64> = x.iter().map(|q| (-q * q / (2.0 * hbar)).exp()).collect();
    let norm: f64 = psi.iter().map(|v| v * v).sum();
    let rho = CMatrix::from_fn(grid.n, grid.n, |a, b| Complex64::new(psi[a] * psi[b] / norm, 0.0));
    let w = wigner_transform(&rho, &grid, hbar).map_err(|e| e.to_string())?;
    ensure(w.w.nrows() == 256 && w.w.ncols() == 256, "grid is not 256×256")?;
    let pref = 1.0 / (std::f64::consts::PI * hbar);
    let mut closed = 0.0f64;
    for (i, &q) in w.q.iter().enumerate() {
        for (m, &p) in w.p.iter().enumerate() {
            let exact = pref * (-(q * q + p * p) / hbar).exp();
            closed = closed.max((w.w[(i, m)] - exact).abs());
        }
    }
    ensure(closed <= 1e-9, format!("closed-form error {closed:e}"))?;
    let tol = 1e-6;
    let nrm = (w.normalization() - 1.0).abs();
    ensure(nrm <= tol, format!("normalization error {nrm:e}"))?;
    let dq = grid.dx;
    let qm = w
        .position_marginal()
        .iter()
        .enumerate()
        .map(|(k, v)| (v - rho[(k, k)].re / dq).abs())
        .fold(0.0, f64::max);
    ensure(qm <= tol, format!("position marginal error {qm:e}"))?;
    let pm = w
        .momentum_marginal()
        .iter()
        .zip(&w.p)
        .map(|(v, &p)| {
            let alias = std::f64::consts::PI * hbar / dq;
            (v - momentum_density(&rho, &grid, hbar, p) - momentum_density(&rho, &grid, hbar, p + alias)).abs()
        })
        .fold(0.0, f64::max);
    ensure(pm <= tol, format!("momentum marginal error {pm:e}"))?;
    // ⟨q²⟩ = ⟨p²⟩ = ħ/2 for the ground state
    let q2 = (w.expectation(|q, _| q * q) - 0.5 * hbar).abs();
    let p2 = (w.expectation(|_, p| p * p) - 0.5 * hbar).abs();
    let trq2 = (0..grid.n).map(|k| x[k] * x[k] * rho[(k, k)].re).sum::<f64>();
    let q2_tr = (w.expectation(|q, _| q * q) - trq2).abs();
    ensure(q2.max(p2).max(q2_tr) <= tol, format!("expectations: q² {q2:e}, p² {p2:e}, Tr {q2_tr:e}"))?;

    let cgrid = PositionGrid::centered(8.0, 256).unwrap();
    let v = |q: f64| 0.5 * q * q;
    let h = PhaseHamiltonian { mass: 1.0, potential: &v, omega_char: 1.0 };
    let bump = cosine_bump(2.0, 0.5);
    let dens = EnergyDensity { density: &bump, support: (1.5, 2.5) };
    let rep = classical_limit_check(&h, &dens, &cgrid, &[0.2, 0.1, 0.05]).map_err(|e| e.to_string())?;
    let cs: Vec<f64> = rep.steps.iter().map(|s| s.concentration).collect();
    ensure(rep.monotone && cs.windows(2).all(|p| p[1] > p[0]), format!("concentration {cs:?}"))?;
    Ok(format!(
        "closed form {closed:.1e}, norm {nrm:.1e}, marginals {qm:.1e}/{pm:.1e}; concentration {:.3} < {:.3} < {:.3}",
        cs[0], cs[1], cs[2]
    ))
}

/// A random CSOP: columns of a random unitary grouped into `k` blocks.
fn random_csop(r: &mut impl Rng, n: usize) -> Csop {
    let u = random_unitary(r, n);
    let k = r.random_range(1..=n);
    let mut owner: Vec<usize> = (0..n).map(|i| if i < k { i } else { r.random_range(0..k) }).collect();
    owner.sort_unstable();
    let projectors = (0..k)
        .map(|b| {
            let mut m = CMatrix::zeros(n, n);
            for (col, _) in owner.iter().enumerate().filter(|(_, &o)| o == b) {
                let v: CVector = u.column(col).into_owned();
                m += &v * v.adjoint();
            }
            HermitianOperator::new(m, format!("Π{b}")).unwrap()
        })
        .collect();
    Csop::new(projectors).unwrap()
}

fn kolmogorov_check() -> Outcome {
    let mut r = rng(10);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = r.random_range(2..=6);
        let rho = random_state(&mut r, n);
        let ctx = BooleanContext::new(random_csop(&mut r, n));
        let atoms = ctx.atoms();
        // disjoint pair: each atom goes to E1, E2 or neither
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for a in 0..atoms {
            match r.random_range(0..3) {
                0 => e1.push(a),
                1 => e2.push(a),
                _ => {}
            }
        }
        let union: Vec<usize> = e1.iter().chain(&e2).copied().collect();
        let p = |e: &[usize]| ctx.probability(&rho, e).unwrap();
        worst = worst.max((p(&union) - p(&e1) - p(&e2)).abs());
        worst = worst.max((p(&ctx.universe()) - 1.0).abs());
        worst = worst.max(p(&[]).abs());
    }
    ensure(worst <= 1e-10, format!("max violation {worst:e}"))?;
    Ok(format!("1000 instances, max violation {worst:.1e}"))
}

fn conservation_check() -> Outcome {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = 2 + trial % 5;
        let h = if trial % 3 == 0 {
            // degenerate spectrum
            let u = random_unitary(&mut r, n);
            let vals: Vec<f64> = (0..n).map(|i| ((i + 1) / 2) as f64).collect();
            HermitianOperator::diagonal(&vals, "H").conjugate_by(&u)
        } else {
            random_hermitian(&mut r, n)
        };
        let rho = random_state(&mut r, n);
        let t = r.random::<f64>() * 10.0;
        let ctx = preferred_context(&QuantumSystem::new("S", h.clone())).map_err(|e| e.to_string())?;
        let csop = ctx.csop().ok_or("no preferred context")?;
        let before = propensity_table(&rho, &csop).unwrap();
        let after = propensity_table(&evolve(&rho, &h, t, 1.0).unwrap(), &csop).unwrap();
        for (a, b) in before.measures().iter().zip(after.measures()) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-10, format!("max drift {worst:e}"))?;
    Ok(format!("50 triples, max drift {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("catalog regression", catalog_regression),
        ("ideal measurement", ideal_measurement),
        ("non-ideal measurement", nonideal_measurement),
        ("Stern-Gerlach", stern_gerlach_check),
        ("infinite tails", tails_check),
        ("sampling frequencies", sampling_check),
        ("tomography", tomography_check),
        ("decoherence", decoherence_check),
        ("Wigner", wigner_check),
        ("Kolmogorov properties", kolmogorov_check),
        ("conservation", conservation_check),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match out {
            Ok(msg) => println!("[PASS] {}. {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {msg}", k + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
