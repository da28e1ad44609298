//! Angular-momentum matrices from ladder-operator elements.

use num_complex::Complex64;

use crate::operator::{c, CMatrix, HermitianOperator};

/// `(J_x, J_y, J_z)` for `j = two_j/2`, basis `m = j, j−1, …, −j`, `ħ = 1`.
pub fn angular_momentum(two_j: u32) -> [CMatrix; 3] {
    let j = two_j as f64 / 2.0;
    let d = two_j as usize + 1;
    let m = |k: usize| j - k as f64;
    // J₊|j,m⟩ = √(j(j+1) − m(m+1))|j,m+1⟩; |m+1⟩ sits at index k−1
    let mut jp = CMatrix::zeros(d, d);
    for k in 1..d {
        let mk = m(k);
        jp[(k - 1, k)] = c((j * (j + 1.0) - mk * (mk + 1.0)).sqrt());
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * c(0.5);
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    let jz = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, (0..d).map(|k| c(m(k)))));
    [jx, jy, jz]
}

/// Block-diagonal sum of square matrices.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// `J_x, J_y, J_z, J²` on `⊕_k (j = two_js[k]/2)`.
pub fn multiplet_operators(two_js: &[u32], prefix: &str) -> [HermitianOperator; 4] {
    let parts: Vec<[CMatrix; 3]> = two_js.iter().map(|&t| angular_momentum(t)).collect();
    let comp = |i: usize| direct_sum(&parts.iter().map(|p| p[i].clone()).collect::<Vec<_>>());
    let casimir: Vec<f64> = two_js
        .iter()
        .flat_map(|&t| {
            let j = t as f64 / 2.0;
            std::iter::repeat(j * (j + 1.0)).take(t as usize + 1)
        })
        .collect();
    [
        HermitianOperator::from_trusted(comp(0), format!("{prefix}_x")),
        HermitianOperator::from_trusted(comp(1), format!("{prefix}_y")),
        HermitianOperator::from_trusted(comp(2), format!("{prefix}_z")),
        HermitianOperator::diagonal(&casimir, format!("{prefix}²")),
    ]
}
