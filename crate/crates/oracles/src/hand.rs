//! Matrices computed by hand for the worked examples.

use num_complex::Complex64;
use pql_core::linalg::CMatrix;

fn m(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> CMatrix<f64> {
    let mut out = CMatrix::zeros(rows, cols);
    for &(r, c, v) in entries {
        out[(r, c)] = Complex64::new(v, 0.0);
    }
    out
}

/// Choi matrix of `ρ ↦ ⟨1|ρ|1⟩ |1⟩⟨1|` on one qubit: the first branch of
/// the measurement example, where the input is discarded and a fresh `|1⟩`
/// returned.
pub fn exp_true_branch_choi() -> CMatrix<f64> {
    // Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|); only i = j = 1 survives, giving |1⟩⟨1| ⊗ |1⟩⟨1|.
    m(4, 4, &[(3, 3, 1.0)])
}

/// Choi matrix of `ρ ↦ |0⟩⟨0|ρ|0⟩⟨0|`.
pub fn exp_false_branch_choi() -> CMatrix<f64> {
    m(4, 4, &[(0, 0, 1.0)])
}

/// Choi matrices of the two branches of measuring one qubit and keeping it.
pub fn meas_chois() -> [CMatrix<f64>; 2] {
    [m(4, 4, &[(3, 3, 1.0)]), m(4, 4, &[(0, 0, 1.0)])]
}

/// Output states of the measurement example on `|+⟩`: probability 1/2 each,
/// `|1⟩⟨1|` then `|0⟩⟨0|`, unnormalized.
pub fn exp_plus_leaves() -> [CMatrix<f64>; 2] {
    [m(2, 2, &[(1, 1, 0.5)]), m(2, 2, &[(0, 0, 0.5)])]
}
