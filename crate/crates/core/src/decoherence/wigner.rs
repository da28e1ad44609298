//! Wigner transform on a uniform position grid and the ħ → 0 concentration check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::CMatrix;

/// `x_j = x0 + j·dx`, `j = 0..n−1`, `n` even.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositionGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl PositionGrid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("grid size {n} must be even and ≥ 2")));
        }
        if !(dx > 0.0) || !x0.is_finite() {
            return Err(Error::InvalidArgument("grid spacing must be positive".into()));
        }
        Ok(Self { x0, dx, n })
    }

    /// `n` points on `[−L/2, L/2)`.
    pub fn centered(length: f64, n: usize) -> Result<Self> {
        Self::new(-0.5 * length, length / n as f64, n)
    }

    /// Checks uniformity of explicit positions and builds the grid.
    pub fn from_points(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
        }
        let dx = xs[1] - xs[0];
        let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        for (j, x) in xs.iter().enumerate() {
            if (x - (xs[0] + j as f64 * dx)).abs() > 1e-9 * scale {
                return Err(Error::InvalidArgument(format!(
                    "grid is not uniform at index {j}"
                )));
            }
        }
        Self::new(xs[0], dx, xs.len())
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x0 + j as f64 * self.dx).collect()
    }

    /// Momentum grid of the transform: `n` points on `[−πħ/2dx, πħ/2dx)`.
    pub fn wigner_momenta(&self, hbar: f64) -> Vec<f64> {
        let dp = self.wigner_dp(hbar);
        let p0 = -0.5 * std::f64::consts::PI * hbar / self.dx;
        (0..self.n).map(|m| p0 + m as f64 * dp).collect()
    }

    pub fn wigner_dp(&self, hbar: f64) -> f64 {
        std::f64::consts::PI * hbar / (self.n as f64 * self.dx)
    }

    /// DFT momenta `2πħk/(n·dx)`, `k ∈ [−n/2, n/2)`.
    pub fn fourier_momenta(&self, hbar: f64) -> Vec<f64> {
        let n = self.n as i64;
        (0..n)
            .map(|k| {
                let kc = if k >= n / 2 { k - n } else { k };
                std::f64::consts::TAU * hbar * kc as f64 / (self.n as f64 * self.dx)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// `W[(i, m)]` at `(q_i, p_m)`.
    pub w: DMatrix<f64>,
    pub dq: f64,
    pub dp: f64,
    pub hbar: f64,
    /// Largest `|Im W|` before the real part was taken.
    pub max_imaginary: f64,
}

impl WignerGrid {
    pub fn normalization(&self) -> f64 {
        self.w.sum() * self.dq * self.dp
    }

    /// `Σ_p W Δp`, the position density.
    pub fn position_marginal(&self) -> Vec<f64> {
        (0..self.q.len())
            .map(|i| self.w.row(i).sum() * self.dp)
            .collect()
    }

    /// `Σ_q W Δq`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        (0..self.p.len())
            .map(|m| self.w.column(m).sum() * self.dq)
            .collect()
    }

    /// `Σ f(q,p) W ΔqΔp`.
    pub fn expectation(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (i, &q) in self.q.iter().enumerate() {
            for (m, &p) in self.p.iter().enumerate() {
                acc += f(q, p) * self.w[(i, m)];
            }
        }
        acc * self.dq * self.dp
    }

    pub fn to_csv(&self) -> String {
        use crate::numfmt::fmt_num;
        let mut s = String::from("q,p,w\n");
        for (i, &q) in self.q.iter().enumerate() {
            for (m, &p) in self.p.iter().enumerate() {
                s.push_str(&format!("{},{},{}\n", fmt_num(q), fmt_num(p), fmt_num(self.w[(i, m)])));
            }
        }
        s
    }
}

/// `W(q_k, p) = (1/πħ)·Σ_j ρ_{k+j,k−j}·e^{−2ipjΔq/ħ}` with `ρ_ab = ρ(x_a,x_b)Δq`
/// (the grid-basis density matrix, unit trace).
pub fn wigner_transform(rho: &CMatrix, grid: &PositionGrid, hbar: f64) -> Result<WignerGrid> {
    let n = grid.n;
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.nrows(),
        });
    }
    if !(hbar > 0.0) {
        return Err(Error::InvalidArgument("ħ must be positive".into()));
    }
    // phase for (j, m): e^{−2i p_m j Δq/ħ} = (−1)^j · e^{−2πi j m / n}
    let roots: Vec<Complex64> = (0..n)
        .map(|r| Complex64::from_polar(1.0, -std::f64::consts::TAU * r as f64 / n as f64))
        .collect();
    let pref = 1.0 / (std::f64::consts::PI * hbar);
    let mut w = DMatrix::zeros(n, n);
    let mut max_imaginary = 0.0f64;
    for k in 0..n {
        let reach = k.min(n - 1 - k) as i64;
        let terms: Vec<(i64, Complex64)> = (-reach..=reach)
            .map(|j| {
                let v = rho[((k as i64 + j) as usize, (k as i64 - j) as usize)];
                (j, if j % 2 == 0 { v } else { -v })
            })
            .collect();
        for m in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(j, v) in &terms {
                let r = (j * m as i64).rem_euclid(n as i64) as usize;
                acc += v * roots[r];
            }
            max_imaginary = max_imaginary.max(acc.im.abs() * pref);
            w[(k, m)] = acc.re * pref;
        }
    }
    Ok(WignerGrid {
        q: grid.points(),
        p: grid.wigner_momenta(hbar),
        w,
        dq: grid.dx,
        dp: grid.wigner_dp(hbar),
        hbar,
        max_imaginary,
    })
}

/// `n(p) = (1/2πħ)|Σ_a ψ…|²` generalized to mixed states:
/// `(Δq/2πħ)·Σ_ab ρ_ab e^{−ip(x_a−x_b)/ħ}`.
pub fn momentum_density(rho: &CMatrix, grid: &PositionGrid, hbar: f64, p: f64) -> f64 {
    let xs = grid.points();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..grid.n {
        for b in 0..grid.n {
            acc += rho[(a, b)] * Complex64::from_polar(1.0, -p * (xs[a] - xs[b]) / hbar);
        }
    }
    acc.re * grid.dx / (std::f64::consts::TAU * hbar)
}

/// `H(q,p) = p²/2m + V(q)`.
pub struct PhaseHamiltonian<'a> {
    pub mass: f64,
    pub potential: &'a (dyn Fn(f64) -> f64 + Sync),
    /// Characteristic frequency setting the band width `3ħΩ`.
    pub omega_char: f64,
}

impl PhaseHamiltonian<'_> {
    pub fn eval(&self, q: f64, p: f64) -> f64 {
        p * p / (2.0 * self.mass) + (self.potential)(q)
    }

    /// Grid Hamiltonian with exact spectral kinetic energy (real symmetric).
    pub fn quantize(&self, grid: &PositionGrid, hbar: f64) -> DMatrix<f64> {
        let n = grid.n;
        let ks = grid.fourier_momenta(hbar);
        let xs = grid.points();
        let mut h = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let d = (a as f64 - b as f64) * std::f64::consts::TAU / n as f64;
                let t: f64 = ks
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        let kc = if k >= n / 2 { k as f64 - n as f64 } else { k as f64 };
                        p * p / (2.0 * self.mass) * (kc * d).cos()
                    })
                    .sum::<f64>()
                    / n as f64;
                h[(a, b)] = t;
                h[(b, a)] = t;
            }
            h[(a, a)] += (self.potential)(xs[a]);
        }
        h
    }
}

/// `ρ(ω)` with compact support `[lo, hi]`.
pub struct EnergyDensity<'a> {
    pub density: &'a (dyn Fn(f64) -> f64 + Sync),
    pub support: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderStep {
    pub hbar: f64,
    /// Fraction of `Σ|W|` with `H(q,p)` within `3ħΩ` of the support of `ρ(ω)`.
    pub concentration: f64,
    pub levels_used: usize,
    pub normalization: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalLimitReport {
    pub steps: Vec<LadderStep>,
    pub monotone: bool,
}

/// `ρ_* = Σ_n ρ(ω_n)|n⟩⟨n| / Σ_n ρ(ω_n)` in the grid basis, with its spectrum.
pub fn diagonal_grid_state(
    h: &PhaseHamiltonian,
    rho: &EnergyDensity,
    grid: &PositionGrid,
    hbar: f64,
) -> Result<(DMatrix<f64>, usize)> {
    let eig = SymmetricEigen::new(h.quantize(grid, hbar));
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|&w| (rho.density)(w).max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "no energy level of the grid Hamiltonian lies where ρ(ω) > 0 (ħ = {hbar})"
        )));
    }
    let n = grid.n;
    let mut out = DMatrix::zeros(n, n);
    let mut used = 0;
    for (k, &wk) in weights.iter().enumerate() {
        if wk > 0.0 {
            used += 1;
            let v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
            out += &v * v.transpose() * (wk / total);
        }
    }
    Ok((out, used))
}

pub fn concentration(w: &WignerGrid, h: &PhaseHamiltonian, support: (f64, f64)) -> f64 {
    let band = 3.0 * w.hbar * h.omega_char;
    let (lo, hi) = (support.0 - band, support.1 + band);
    let mut inside = 0.0;
    let mut total = 0.0;
    for (i, &q) in w.q.iter().enumerate() {
        for (m, &p) in w.p.iter().enumerate() {
            let a = w.w[(i, m)].abs();
            total += a;
            let e = h.eval(q, p);
            if e >= lo && e <= hi {
                inside += a;
            }
        }
    }
    inside / total
}

pub fn classical_limit_check(
    h: &PhaseHamiltonian,
    rho: &EnergyDensity,
    grid: &PositionGrid,
    hbar_ladder: &[f64],
) -> Result<ClassicalLimitReport> {
    if hbar_ladder.is_empty() || hbar_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::LadderNotDecreasing);
    }
    let steps = hbar_ladder
        .iter()
        .map(|&hbar| {
            let (state, levels_used) = diagonal_grid_state(h, rho, grid, hbar)?;
            let w = wigner_transform(&state.map(Complex64::from), grid, hbar)?;
            Ok(LadderStep {
                hbar,
                concentration: concentration(&w, h, rho.support),
                levels_used,
                normalization: w.normalization(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = steps.windows(2).all(|s| s[1].concentration > s[0].concentration);
    Ok(ClassicalLimitReport { steps, monotone })
}

/// Smooth bump `∝ cos²(π(ω−ω0)/2δ)` on `|ω − ω0| < δ`, unnormalized.
pub fn cosine_bump(omega0: f64, delta: f64) -> impl Fn(f64) -> f64 + Sync {
    move |w: f64| {
        let u = (w - omega0) / delta;
        if u.abs() < 1.0 {
            (0.5 * std::f64::consts::PI * u).cos().powi(2)
        } else {
            0.0
        }
    }
}
