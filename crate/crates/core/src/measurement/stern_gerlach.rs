//! Spin-1/2 measured by a three-state position pointer `P_z`.

use num_complex::Complex64;
use serde::Serialize;

use super::{
    run_ideal, run_nonideal, Apparatus, CorrelationMatrix, MeasurementOptions, MeasurementSetup,
    ReliabilityReport,
};
use crate::actualization::{is_definite_valued, preferred_context_with, ContextKind};
use crate::error::Result;
use crate::operator::{CMatrix, HermitianOperator};
use crate::systems::QuantumSystem;

/// Pointer values in basis order `|+⟩, |−⟩, |0⟩`.
pub const POINTER_VALUES: [f64; 3] = [1.0, -1.0, 0.0];
pub const READY_INDEX: usize = 2;

#[derive(Clone, Debug, Serialize)]
pub struct SternGerlachReport {
    /// `(p₊, p₋, p₀)` for the exact correlation.
    pub ideal: [f64; 3],
    pub nonideal: Option<[f64; 3]>,
    pub reliability: Option<ReliabilityReport>,
    /// Context of the free spin, `H_s = kS²`.
    pub spin_context: ContextKind,
    pub spin_sz_definite: bool,
    pub pointer_definite: bool,
}

/// `(S_x, S_y, S_z)` for spin 1/2, `ħ = 1`.
pub fn spin_half() -> [HermitianOperator; 3] {
    let z = Complex64::new(0.0, 0.0);
    let h = Complex64::new(0.5, 0.0);
    let i = Complex64::new(0.0, 0.5);
    [
        HermitianOperator::new(CMatrix::from_row_slice(2, 2, &[z, h, h, z]), "S_x").unwrap(),
        HermitianOperator::new(CMatrix::from_row_slice(2, 2, &[z, -i, i, z]), "S_y").unwrap(),
        HermitianOperator::diagonal(&[0.5, -0.5], "S_z"),
    ]
}

/// `H_M = P_z²/2 + P_z/4`: non-degenerate, diagonal with `P_z`.
pub fn apparatus() -> Result<Apparatus> {
    let p = HermitianOperator::diagonal(&POINTER_VALUES, "P_z");
    let h = HermitianOperator::diagonal(
        &POINTER_VALUES.map(|x| 0.5 * x * x + 0.25 * x),
        "H_M",
    );
    Apparatus::new(
        h,
        p,
        Some(CMatrix::identity(3, 3)),
        READY_INDEX,
        Default::default(),
    )
}

fn table3(t: Vec<f64>) -> [f64; 3] {
    [t[0], t[1], t[2]]
}

/// `c1|↑⟩ + c2|↓⟩`, `H_s = kS² = (3k/4)·I`. `d` rows index spin `(↑, ↓)`,
/// columns pointer `(+, −)`.
pub fn stern_gerlach(
    c1: Complex64,
    c2: Complex64,
    d: Option<CorrelationMatrix>,
    k: f64,
    options: &MeasurementOptions,
) -> Result<SternGerlachReport> {
    let [sx, sy, sz] = spin_half();
    let s2 = &(&(&sx.polynomial(&[0.0, 0.0, 1.0]) + &sy.polynomial(&[0.0, 0.0, 1.0]))
        + &sz.polynomial(&[0.0, 0.0, 1.0]))
        * k;
    let system = QuantumSystem::new("spin", s2.with_label("H_s"));
    let ctx = preferred_context_with(system.hamiltonian(), options.actualization)?;
    let spin_sz_definite = ctx.has_context() && is_definite_valued(&sz, &ctx)?.definite;
    let setup = MeasurementSetup::with_eigenbasis(
        system,
        sz,
        CMatrix::identity(2, 2),
        vec![c1, c2],
        apparatus()?,
    )?;
    let ideal = run_ideal(&setup, options)?;
    let mut pointer_definite = ideal.pointer_verdict.definite;
    let (nonideal, reliability) = match d {
        Some(d) => {
            let out = run_nonideal(&setup, &d, options)?;
            pointer_definite &= out.pointer_verdict.definite;
            (
                Some(table3(out.pointer_table.measures().to_vec())),
                Some(out.reliability),
            )
        }
        None => (None, None),
    };
    Ok(SternGerlachReport {
        ideal: table3(ideal.pointer_table.measures().to_vec()),
        nonideal,
        reliability,
        spin_context: ctx.kind(),
        spin_sz_definite,
        pointer_definite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::c;

    #[test]
    fn equal_weights_split_evenly() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = stern_gerlach(c(h), c(h), None, 1.0, &MeasurementOptions::default()).unwrap();
        for (x, y) in r.ideal.iter().zip([0.5, 0.5, 0.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(r.spin_context, ContextKind::None);
        assert!(!r.spin_sz_definite);
        assert!(r.pointer_definite);
    }

    #[test]
    fn nonideal_weights_follow_columns() {
        let raw = nalgebra::dmatrix![Complex64::new(0.5, 0.1), c(0.2); c(-0.3), c(0.7)];
        let d = CorrelationMatrix::new(&raw / c(raw.norm())).unwrap();
        let m = d.matrix().clone();
        let r = stern_gerlach(c(0.6), c(0.8), Some(d), 2.0, &MeasurementOptions::default()).unwrap();
        let t = r.nonideal.unwrap();
        assert!((t[0] - (m[(0, 0)].norm_sqr() + m[(1, 0)].norm_sqr())).abs() < 1e-12);
        assert!((t[1] - (m[(1, 1)].norm_sqr() + m[(0, 1)].norm_sqr())).abs() < 1e-12);
        assert!(t[2].abs() < 1e-15);
        assert!(r.ideal[2].abs() < 1e-15);
        assert!(r.pointer_definite);
    }

    #[test]
    fn spin_operators_have_casimir_three_quarters() {
        let [x, y, z] = spin_half();
        let s2 = &(&x.polynomial(&[0.0, 0.0, 1.0]) + &y.polynomial(&[0.0, 0.0, 1.0]))
            + &z.polynomial(&[0.0, 0.0, 1.0]);
        assert!((s2.matrix() - CMatrix::identity(2, 2) * c(0.75)).norm() < 1e-15);
    }
}
