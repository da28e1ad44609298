//! Self-induced decoherence on a uniformly discretized energy continuum.
//!
//! The regular part `ρ(ω,ω′)O(ω,ω′)` is summed over the whole grid, `ω = ω′`
//! included, as a Riemann sum of the double integral.

pub mod wigner;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{c, hermiticity_violation, CMatrix, HermitianOperator, DEFAULT_HERMITICITY_TOL};

/// Envelope fraction that defines the decoherence time.
pub const DECAY_FRACTION: f64 = 0.05;
/// Allowed `|Σρ(ω)Δω − 1|`.
pub const DENSITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct QuasiContinuousModel {
    omega0: f64,
    delta_omega: f64,
    rho_diag: Vec<f64>,
    rho_off: CMatrix,
    o_diag: Vec<f64>,
    o_off: CMatrix,
    hbar: f64,
    /// `S(m) = Σ_l ρ(ω_{l+m}, ω_l)·O(ω_{l+m}, ω_l)` for `m = 0..N−1`.
    lag_sums: Vec<Complex64>,
}

fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    let v = hermiticity_violation(m);
    let tol = DEFAULT_HERMITICITY_TOL * m.norm().max(1.0);
    if v > tol {
        return Err(Error::InvalidArgument(format!(
            "{what} is not Hermitian-symmetric (violation {v:.3e})"
        )));
    }
    Ok(())
}

impl QuasiContinuousModel {
    /// Grid `ω_k = omega0 + k·Δω`, `k = 0..N−1`.
    pub fn new(
        omega0: f64,
        delta_omega: f64,
        rho_diag: Vec<f64>,
        rho_off: CMatrix,
        o_diag: Vec<f64>,
        o_off: CMatrix,
        hbar: f64,
    ) -> Result<Self> {
        let n = rho_diag.len();
        if n < 2 {
            return Err(Error::InvalidArgument("energy grid needs at least 2 points".into()));
        }
        if !(delta_omega > 0.0) || !(hbar > 0.0) {
            return Err(Error::InvalidArgument("Δω and ħ must be positive".into()));
        }
        for (m, what) in [(&rho_off, "ρ(ω,ω′)"), (&o_off, "O(ω,ω′)")] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Shape(format!(
                    "{what} is {}×{}, expected {n}×{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            check_hermitian(m, what)?;
        }
        if o_diag.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: o_diag.len(),
            });
        }
        if let Some(x) = rho_diag.iter().find(|&&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidState(format!("ρ(ω) has a value {x}")));
        }
        let total: f64 = rho_diag.iter().sum::<f64>() * delta_omega;
        if (total - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidState(format!("Σρ(ω)Δω = {total}, not 1")));
        }
        let lag_sums = (0..n)
            .map(|m| (0..n - m).map(|l| rho_off[(l + m, l)] * o_off[(l + m, l)]).sum())
            .collect();
        Ok(Self {
            omega0,
            delta_omega,
            rho_diag,
            rho_off,
            o_diag,
            o_off,
            hbar,
            lag_sums,
        })
    }

    pub fn len(&self) -> usize {
        self.rho_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho_diag.is_empty()
    }

    pub fn omega(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.omega0 + k as f64 * self.delta_omega)
            .collect()
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn rho_diag(&self) -> &[f64] {
        &self.rho_diag
    }

    pub fn rho_off(&self) -> &CMatrix {
        &self.rho_off
    }

    pub fn o_diag(&self) -> &[f64] {
        &self.o_diag
    }

    pub fn o_off(&self) -> &CMatrix {
        &self.o_off
    }

    /// `2πħ/Δω`: the discretized off-diagonal term is periodic with this period.
    pub fn recurrence_time(&self) -> f64 {
        std::f64::consts::TAU * self.hbar / self.delta_omega
    }

    /// `Σρ(ω)O(ω)Δω`, the value under the diagonal state.
    pub fn diagonal_term(&self) -> f64 {
        self.rho_diag
            .iter()
            .zip(&self.o_diag)
            .map(|(r, o)| r * o)
            .sum::<f64>()
            * self.delta_omega
    }

    /// `z(t) = Δω²·[S(0) + 2Σ_{m>0} S(m)·e^{−imΔωt/ħ}]`; the off-diagonal term is `Re z`.
    fn analytic(&self, t: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, -self.delta_omega * t / self.hbar);
        let mut phase = step;
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.lag_sums[1..] {
            acc += s * phase;
            phase *= step;
        }
        (self.lag_sums[0] + acc * 2.0) * (self.delta_omega * self.delta_omega)
    }

    /// Off-diagonal part of `⟨O⟩(t)`.
    pub fn off_diagonal_term(&self, t: f64) -> Complex64 {
        c(self.analytic(t).re)
    }

    /// `|⟨O⟩(t) − ⟨O⟩_ρ*|`.
    pub fn envelope(&self, t: f64) -> f64 {
        self.analytic(t).re.abs()
    }

    /// `Δω²·Σ_k ρ(ω_k,ω_k)O(ω_k,ω_k)`: the time-independent lag-zero contribution.
    pub fn lag_zero_term(&self) -> f64 {
        self.lag_sums[0].re * self.delta_omega * self.delta_omega
    }

    /// The double sum evaluated directly over the grid; independent of the lag sums.
    pub fn off_diagonal_direct(&self, t: f64) -> Complex64 {
        let w = self.omega();
        let n = self.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            for l in 0..n {
                let phase = Complex64::from_polar(1.0, -(w[k] - w[l]) * t / self.hbar);
                acc += self.rho_off[(k, l)] * self.o_off[(k, l)] * phase;
            }
        }
        acc * (self.delta_omega * self.delta_omega)
    }

    /// `H = diag(ω)`, `ρ_kk = ρ(ω_k)Δω`, `ρ_kl = ρ(ω_k,ω_l)Δω`, `O_kk = O(ω_k)`,
    /// `O_lk = O(ω_k,ω_l)Δω`, so that `Tr(ρ(t)O)` reproduces the model up to the
    /// constant `lag_zero_term`.
    pub fn dense_equivalent(&self) -> (CMatrix, CMatrix, HermitianOperator) {
        let n = self.len();
        let dw = self.delta_omega;
        let rho = CMatrix::from_fn(n, n, |k, l| {
            if k == l {
                c(self.rho_diag[k] * dw)
            } else {
                self.rho_off[(k, l)] * dw
            }
        });
        let o = CMatrix::from_fn(n, n, |l, k| {
            if k == l {
                c(self.o_diag[k])
            } else {
                self.o_off[(k, l)] * dw
            }
        });
        (rho, o, HermitianOperator::diagonal(&self.omega(), "H"))
    }
}

/// `⟨O⟩(t)`; the imaginary part vanishes for Hermitian-symmetric data.
pub fn expectation_evolution(model: &QuasiContinuousModel, t: f64) -> Complex64 {
    c(model.diagonal_term()) + model.off_diagonal_term(t)
}

/// Drops the off-diagonal data.
pub fn diagonal_state(model: &QuasiContinuousModel) -> QuasiContinuousModel {
    let n = model.len();
    let mut out = model.clone();
    out.rho_off = CMatrix::zeros(n, n);
    out.lag_sums = vec![Complex64::new(0.0, 0.0); n];
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct DecoherenceProfile {
    pub times: Vec<f64>,
    /// `Re ⟨O⟩(t)`.
    pub expectation: Vec<f64>,
    /// `|⟨O⟩(t) − ⟨O⟩_ρ*|`.
    pub envelope: Vec<f64>,
    pub initial_envelope: f64,
    pub diagonal_value: f64,
    /// First grid time with envelope below `DECAY_FRACTION` of its initial value;
    /// absent when it never drops.
    pub t_d: Option<f64>,
    pub recurrence_time: f64,
}

impl DecoherenceProfile {
    pub fn to_csv(&self) -> String {
        use crate::numfmt::fmt_num;
        let mut s = String::from("t,re_expectation,envelope\n");
        for ((t, x), e) in self.times.iter().zip(&self.expectation).zip(&self.envelope) {
            s.push_str(&format!("{},{},{}\n", fmt_num(*t), fmt_num(*x), fmt_num(*e)));
        }
        s
    }
}

/// Requires every time in `[0, recurrence/2)`.
pub fn decoherence_profile(model: &QuasiContinuousModel, t_grid: &[f64]) -> Result<DecoherenceProfile> {
    let rec = model.recurrence_time();
    let limit = 0.5 * rec;
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(0.0..limit).contains(&t)) {
        return Err(Error::EmptyWindow { limit });
    }
    let diagonal_value = model.diagonal_term();
    let initial_envelope = model.envelope(0.0);
    let mut expectation = Vec::with_capacity(t_grid.len());
    let mut envelope = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let off = model.off_diagonal_term(t).re;
        expectation.push(diagonal_value + off);
        envelope.push(off.abs());
    }
    let t_d = if initial_envelope == 0.0 {
        Some(0.0)
    } else {
        t_grid
            .iter()
            .zip(&envelope)
            .find(|(_, &e)| e < DECAY_FRACTION * initial_envelope)
            .map(|(&t, _)| t)
    };
    Ok(DecoherenceProfile {
        times: t_grid.to_vec(),
        expectation,
        envelope,
        initial_envelope,
        diagonal_value,
        t_d,
        recurrence_time: rec,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RevivalReport {
    pub recurrence_time: f64,
    pub initial: f64,
    pub at_half_recurrence: f64,
    pub at_recurrence: f64,
    /// The off-diagonal term returns to its initial value at the recurrence time.
    pub revived: bool,
}

pub fn revival(model: &QuasiContinuousModel) -> RevivalReport {
    let rec = model.recurrence_time();
    let initial = model.off_diagonal_term(0.0).re;
    let at_recurrence = model.off_diagonal_term(rec).re;
    RevivalReport {
        recurrence_time: rec,
        initial: initial.abs(),
        at_half_recurrence: model.off_diagonal_term(0.5 * rec).re.abs(),
        at_recurrence: at_recurrence.abs(),
        revived: initial != 0.0 && (at_recurrence - initial).abs() <= 1e-6 * initial.abs(),
    }
}

/// Parameters of the Gaussian test model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianProfile {
    pub n: usize,
    pub delta_omega: f64,
    /// Centre and width of `ρ(ω)`.
    pub center: f64,
    pub width: f64,
    /// Spread of the off-diagonal profile in `ω − ω′`.
    pub sigma: f64,
    /// Coherence strength in `[0, 1]`; keeps the dense state positive.
    pub coherence: f64,
    pub hbar: f64,
}

impl Default for GaussianProfile {
    fn default() -> Self {
        Self {
            n: 512,
            delta_omega: 1.0 / 512.0,
            center: 0.5,
            width: 0.06,
            sigma: 0.01,
            coherence: 0.5,
            hbar: 1.0,
        }
    }
}

/// `ρ(ω)` a normalized Gaussian bump, `ρ(ω,ω′) = κ√(ρ(ω)ρ(ω′))·e^{−(ω−ω′)²/2σ²}`,
/// `O(ω) = ω`, `O(ω,ω′) = 1`.
pub fn gaussian_model(p: &GaussianProfile) -> Result<QuasiContinuousModel> {
    let w: Vec<f64> = (0..p.n).map(|k| k as f64 * p.delta_omega).collect();
    let raw: Vec<f64> = w
        .iter()
        .map(|x| (-0.5 * ((x - p.center) / p.width).powi(2)).exp())
        .collect();
    let norm = raw.iter().sum::<f64>() * p.delta_omega;
    let rho: Vec<f64> = raw.iter().map(|x| x / norm).collect();
    let rho_off = CMatrix::from_fn(p.n, p.n, |k, l| {
        let g = (-0.5 * ((w[k] - w[l]) / p.sigma).powi(2)).exp();
        c(p.coherence * (rho[k] * rho[l]).sqrt() * g)
    });
    let o_off = CMatrix::from_element(p.n, p.n, c(1.0));
    QuasiContinuousModel::new(0.0, p.delta_omega, rho, rho_off, w, o_off, p.hbar)
}

/// All weight and coherence on one level `ω_k`: no frequency differences, so
/// nothing dephases.
pub fn single_frequency_model(
    n: usize,
    delta_omega: f64,
    level: usize,
    coherence: f64,
    hbar: f64,
) -> Result<QuasiContinuousModel> {
    if level >= n {
        return Err(Error::InvalidArgument(format!("level {level} outside a grid of {n}")));
    }
    let mut rho = vec![0.0; n];
    rho[level] = 1.0 / delta_omega;
    let mut rho_off = CMatrix::zeros(n, n);
    rho_off[(level, level)] = c(coherence / (delta_omega * delta_omega));
    let o_off = CMatrix::from_element(n, n, c(1.0));
    let w: Vec<f64> = (0..n).map(|k| k as f64 * delta_omega).collect();
    QuasiContinuousModel::new(0.0, delta_omega, rho, rho_off, w, o_off, hbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::propagator;

    fn small(sigma: f64) -> QuasiContinuousModel {
        gaussian_model(&GaussianProfile {
            n: 48,
            delta_omega: 1.0 / 48.0,
            center: 0.5,
            width: 0.1,
            sigma,
            coherence: 0.7,
            hbar: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn no_coherence_means_constant_expectation() {
        let m = diagonal_state(&small(0.05));
        for t in [0.0, 1.0, 17.0, 100.0] {
            let e = expectation_evolution(&m, t);
            assert_eq!(e.re, m.diagonal_term());
            assert_eq!(e.im, 0.0);
        }
        let p = decoherence_profile(&m, &[0.0, 1.0]).unwrap();
        assert_eq!(p.t_d, Some(0.0));
    }

    #[test]
    fn diagonal_state_is_idempotent_and_normalized() {
        let m = diagonal_state(&small(0.05));
        let again = diagonal_state(&m);
        assert_eq!(again.rho_off(), m.rho_off());
        let total: f64 = m.rho_diag().iter().sum::<f64>() * m.delta_omega();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lag_sums_match_direct_double_sum() {
        let m = small(0.05);
        for k in 0..50 {
            let t = 0.37 * k as f64;
            let fast = m.off_diagonal_term(t);
            let direct = m.off_diagonal_direct(t);
            assert!((fast - direct).norm() < 1e-12, "t = {t}");
            assert!(direct.im.abs() < 1e-12);
        }
    }

    #[test]
    fn dense_equivalent_reproduces_expectation() {
        let m = small(0.08);
        let (rho, o, h) = m.dense_equivalent();
        let shift = c(m.lag_zero_term());
        let direct = (&rho * &o).trace();
        assert!((direct + shift - expectation_evolution(&m, 0.0)).norm() < 1e-10);
        for t in [0.5, 3.0, 12.0] {
            let u = propagator(&h, t, m.hbar()).unwrap();
            let evolved = &u * &rho * u.adjoint();
            let dense = (&evolved * &o).trace() + shift;
            assert!((dense - expectation_evolution(&m, t)).norm() < 1e-10);
        }
    }

    #[test]
    fn recurrence_revives_the_off_diagonal_term() {
        let m = small(0.05);
        let r = revival(&m);
        assert!(r.revived);
        assert!(r.at_half_recurrence < 1e-3 * r.initial);
        assert!((r.recurrence_time - std::f64::consts::TAU * 48.0).abs() < 1e-9);
    }

    #[test]
    fn narrower_profile_decoheres_later() {
        let p = GaussianProfile::default();
        let rec = std::f64::consts::TAU * p.hbar / p.delta_omega;
        let grid: Vec<f64> = (0..2000).map(|k| k as f64 * rec / 4000.0).collect();
        let t_d: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&s| {
                let m = gaussian_model(&GaussianProfile { sigma: s, ..p }).unwrap();
                decoherence_profile(&m, &grid).unwrap().t_d.unwrap()
            })
            .collect();
        assert!(t_d[0] < t_d[1] && t_d[1] < t_d[2], "{t_d:?}");
    }

    #[test]
    fn envelope_is_even_for_real_symmetric_profile() {
        let m = small(0.05);
        for t in [0.3, 2.0, 9.0] {
            assert!((m.envelope(t) - m.envelope(-t)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_frequency_does_not_decay() {
        let m = single_frequency_model(64, 1.0 / 64.0, 10, 0.4, 1.0).unwrap();
        let grid: Vec<f64> = (0..500).map(|k| k as f64 * 0.4).collect();
        let p = decoherence_profile(&m, &grid).unwrap();
        assert!(p.t_d.is_none());
        assert!((p.envelope[0] - 0.4).abs() < 1e-12);
        let e0 = p.envelope[0];
        assert!(p.envelope.iter().all(|e| (e - e0).abs() < 1e-12));
    }

    #[test]
    fn grid_outside_window_is_rejected() {
        let m = small(0.05);
        let half = 0.5 * m.recurrence_time();
        assert!(matches!(decoherence_profile(&m, &[half]), Err(Error::EmptyWindow { .. })));
        assert!(matches!(decoherence_profile(&m, &[]), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn validation() {
        let n = 4;
        let ok = vec![1.0; n];
        let z = CMatrix::zeros(n, n);
        assert!(QuasiContinuousModel::new(0.0, 0.25, ok.clone(), z.clone(), ok.clone(), z.clone(), 1.0).is_ok());
        assert!(QuasiContinuousModel::new(0.0, 0.25, vec![2.0; n], z.clone(), ok.clone(), z.clone(), 1.0).is_err());
        let mut bad = z.clone();
        bad[(0, 1)] = c(1.0);
        assert!(QuasiContinuousModel::new(0.0, 0.25, ok.clone(), bad, ok, z, 1.0).is_err());
    }
}
