//! Choi matrices of channel leaves reconstructed from the simulator.

use num_complex::Complex64;
use pql_core::linalg::CMatrix;
use pql_core::qcalg::{Channel, GateTable};
use pql_core::sim::{apply_channel, DensityMatrix, SimError};

/// One Choi matrix per output leaf, input factor first. The input register
/// is the sorted input wires; each leaf register is its sorted output wires.
pub fn leaf_chois(q: &Channel, gates: &GateTable<f64>) -> Result<Vec<CMatrix<f64>>, SimError> {
    let inputs: Vec<_> = q.in_wires()?.into_iter().collect();
    let din = 1usize << inputs.len();
    let mut chois: Vec<Option<CMatrix<f64>>> = vec![];
    for i in 0..din {
        for j in 0..din {
            let unit = CMatrix::from_fn(din, din, |r, c| if (r, c) == (i, j) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
            let leaves = apply_channel(q, &DensityMatrix::new(inputs.clone(), unit)?, gates)?;
            if chois.is_empty() {
                chois = vec![None; leaves.len()];
            }
            for (k, leaf) in leaves.iter().enumerate() {
                let out = leaf.state.sorted().rho;
                let dout = out.rows();
                let acc = chois[k].get_or_insert_with(|| CMatrix::zeros(din * dout, din * dout));
                for a in 0..dout {
                    for b in 0..dout {
                        acc[(i * dout + a, j * dout + b)] += out[(a, b)];
                    }
                }
            }
        }
    }
    Ok(chois.into_iter().map(|c| c.expect("every leaf is reached")).collect())
}
