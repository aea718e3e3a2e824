//! Branch maps of channel denotations against simulator tomography.

use pql_core::arbitrary::{random_channel, rng};
use pql_core::denot::{denote_channel, Index};
use pql_core::linalg::CMatrix;
use pql_core::qcalg::GateTable;
use pql_core::syntax::VarName;
use pql_oracles::tomography;

#[test]
fn random_channels_match_tomography() {
    let gates = GateTable::standard();
    let mut r = rng(31);
    let mut branches = 0;
    for _ in 0..200 {
        let (q, inputs) = random_channel(&mut r, 3, 5);
        let order: Vec<VarName> = inputs.iter().cloned().collect();
        let got = denote_channel(&q, &order, &gates).unwrap().apply(&Index::Unit).unwrap();
        let want = tomography::leaf_chois(&q, &gates).unwrap();
        assert_eq!(got.outcomes.len(), want.len(), "{q}");
        for (j, w) in want.iter().enumerate() {
            let c = match got.component(j).get(0, 0) {
                Some(s) => s.choi(),
                None => CMatrix::zeros(w.rows(), w.cols()),
            };
            assert!(c.approx_eq(w, 1e-9), "{q}, leaf {j}: deviation {}", c.max_abs_diff(w));
            branches += 1;
        }
    }
    assert!(branches >= 200);
}
