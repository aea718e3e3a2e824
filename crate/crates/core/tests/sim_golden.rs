use pql_core::eval::{FreshNameGen, Stepper};
use pql_core::qcalg::GateTable;
use pql_core::sim::run_program;
use pql_core::DensityMatrix64 as DensityMatrix;
use pql_core::syntax::parse_term;
use pql_oracles::hand;

const EXP: &str = "let <b, v_c> = meas v_c in if b then <init_tt *, free v_c> else <v_c, *>";

#[test]
fn exp_on_plus_splits_evenly() {
    let t = parse_term(EXP).unwrap();
    let mut st = Stepper::new(FreshNameGen::new("v_d"));
    let (_, outs) = run_program(&t, &DensityMatrix::hadamard_basis("v_c", true), 1000, &mut st, &GateTable::standard()).unwrap();
    assert_eq!(outs.len(), 2);
    let want = hand::exp_plus_leaves();
    assert!(outs[0].path == [true] && outs[1].path == [false]);
    assert_eq!(outs[0].state.wires[0].as_str(), "v_d0");
    assert_eq!(outs[1].state.wires[0].as_str(), "v_c");
    for (o, w) in outs.iter().zip(&want) {
        assert!((o.probability() - 0.5).abs() < 1e-9);
        assert!(o.state.rho.approx_eq(w, 1e-9));
    }
}

#[test]
fn exp_on_one_takes_first_branch() {
    let t = parse_term(EXP).unwrap();
    let mut st = Stepper::new(FreshNameGen::new("v_d"));
    let (_, outs) = run_program(&t, &DensityMatrix::basis("v_c", 1), 1000, &mut st, &GateTable::standard()).unwrap();
    assert!((outs[0].probability() - 1.0).abs() < 1e-9);
    assert!(outs[1].probability().abs() < 1e-9);
}
