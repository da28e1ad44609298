//! Cross terms from infinite Gaussian tails in the two-detector spin measurement.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use super::DEFAULT_RELIABILITY_THRESHOLD;
use crate::error::{Error, Result};

/// Absolute quadrature tolerance.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Infinite window ends are cut at `μ ± CLIP_SIGMAS·σ`.
pub const CLIP_SIGMAS: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mu: f64,
    pub sigma: f64,
}

impl Gaussian {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Gaussian needs finite μ and σ > 0 (got μ = {mu}, σ = {sigma})"
            )));
        }
        Ok(Self { mu, sigma })
    }

    /// `|φ(z)|²`, a normal density.
    pub fn density(&self, z: f64) -> f64 {
        let u = (z - self.mu) / self.sigma;
        (-0.5 * u * u).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// `∫_window |φ|²` by adaptive quadrature.
    pub fn mass(&self, w: &Window) -> f64 {
        let lo = w.lo.max(self.mu - CLIP_SIGMAS * self.sigma);
        let hi = w.hi.min(self.mu + CLIP_SIGMAS * self.sigma);
        let breaks: Vec<f64> = (-8..=8).map(|k| self.mu + k as f64 * self.sigma).collect();
        integrate(&|z| self.density(z), lo, hi, &breaks, QUADRATURE_TOL)
    }
}

/// Detector window `[lo, hi]`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!("empty window [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn overlaps(&self, other: &Window) -> bool {
        self.lo.max(other.lo) < self.hi.min(other.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailsReport {
    /// `|c₁₁|²`: up, detected in the + window.
    pub p_up_plus: f64,
    /// `|c₁₂|²`: up, detected in the − window.
    pub p_up_minus: f64,
    /// `|c₂₁|²`: down, detected in the + window.
    pub p_down_plus: f64,
    /// `|c₂₂|²`: down, detected in the − window.
    pub p_down_minus: f64,
    pub pointer_plus: f64,
    pub pointer_minus: f64,
    /// `|c₁₂|²/|c₁|²`.
    pub cross_fraction_up: f64,
    /// `|c₂₁|²/|c₂|²`.
    pub cross_fraction_down: f64,
    /// `(|c₂₁|²/|c₁₁|², |c₁₂|²/|c₂₂|²)`.
    pub ratios: [f64; 2],
    pub threshold: f64,
    pub reliable: bool,
}

fn ratio(cross: f64, diag: f64) -> f64 {
    if cross == 0.0 {
        0.0
    } else if diag == 0.0 {
        f64::INFINITY
    } else {
        cross / diag
    }
}

pub fn tails_overlap(
    plus: Gaussian,
    minus: Gaussian,
    window_plus: Window,
    window_minus: Window,
    c1: Complex64,
    c2: Complex64,
    threshold: f64,
) -> Result<TailsReport> {
    if window_plus.overlaps(&window_minus) {
        return Err(Error::OverlappingWindows);
    }
    let w1 = c1.norm_sqr();
    let w2 = c2.norm_sqr();
    if (w1 + w2 - 1.0).abs() > super::NORMALIZATION_TOL {
        return Err(Error::Unnormalized { norm_sqr: w1 + w2 });
    }
    let up_in_plus = plus.mass(&window_plus);
    let up_in_minus = plus.mass(&window_minus);
    let down_in_plus = minus.mass(&window_plus);
    let down_in_minus = minus.mass(&window_minus);
    let p_up_plus = w1 * up_in_plus;
    let p_up_minus = w1 * up_in_minus;
    let p_down_plus = w2 * down_in_plus;
    let p_down_minus = w2 * down_in_minus;
    let ratios = [ratio(p_down_plus, p_up_plus), ratio(p_up_minus, p_down_minus)];
    Ok(TailsReport {
        p_up_plus,
        p_up_minus,
        p_down_plus,
        p_down_minus,
        pointer_plus: p_up_plus + p_down_plus,
        pointer_minus: p_down_minus + p_up_minus,
        cross_fraction_up: up_in_minus,
        cross_fraction_down: down_in_plus,
        ratios,
        threshold,
        reliable: ratios[0].max(ratios[1]) <= threshold,
    })
}

/// `tails_overlap` with the default reliability threshold.
pub fn tails_overlap_default(
    plus: Gaussian,
    minus: Gaussian,
    window_plus: Window,
    window_minus: Window,
    c1: Complex64,
    c2: Complex64,
) -> Result<TailsReport> {
    tails_overlap(
        plus,
        minus,
        window_plus,
        window_minus,
        c1,
        c2,
        DEFAULT_RELIABILITY_THRESHOLD,
    )
}
