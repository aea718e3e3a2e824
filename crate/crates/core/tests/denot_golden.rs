use pql_core::bunch::Bunch;
use pql_core::denot::{denote_channel, equal_observable, soundness_trace, Denoter, Index};
use pql_core::eval::{Configuration, FreshNameGen, Stepper};
use pql_core::qcalg::{Channel, GateTable};
use pql_core::syntax::{parse_term, parse_type, wires, Term, VarName};
use pql_core::typecheck::{check_configuration, check_term, Context};
use pql_oracles::{hand, tomography};

const EXP: &str = "let <b, v_c> = meas v_c in if b then <init_tt *, free v_c> else <v_c, *>";

fn den() -> Denoter<f64> {
    Denoter::new(GateTable::standard())
}

fn exp_config() -> Configuration {
    Configuration::initial(wires(["v_c"]), parse_term(EXP).unwrap())
}

#[test]
fn exp_initial_denotation_has_two_unit_pairs() {
    let c = exp_config();
    let ty = parse_type("qubit * I").unwrap();
    let d = check_configuration(&c.channel, &c.term, &ty).unwrap();
    let r = den().denote_configuration(&d).unwrap();
    let shown: Vec<String> = r.outcomes.iter().map(|x| x.to_string()).collect();
    assert_eq!(shown, ["<*, *>", "<*, *>"]);
    let chois: Vec<_> = (0..2).map(|j| r.component(j).get(0, 0).unwrap().choi()).collect();
    assert!(chois[0].approx_eq(&hand::exp_true_branch_choi(), 1e-12));
    assert!(chois[1].approx_eq(&hand::exp_false_branch_choi(), 1e-12));
}

#[test]
fn exp_soundness_trace_passes() {
    let mut st = Stepper::new(FreshNameGen::new("v_d"));
    let ty = parse_type("qubit * I").unwrap();
    let rep = soundness_trace(&den(), &exp_config(), &ty, 1000, &mut st, 1e-9).unwrap();
    assert_eq!(rep.steps.len(), 5);
    assert!(rep.passed, "{:?}", rep.steps);
    assert!(rep.max_deviation < 1e-9);
}

#[test]
fn measurement_channel_matches_simulator() {
    let q = Channel::meas("w", Channel::eps(["w"]), Channel::eps(["w"]));
    let r = denote_channel(&q, &[VarName::raw("w")], &GateTable::standard()).unwrap().apply(&Index::Unit).unwrap();
    assert_eq!(r.outcomes.len(), 2);
    let sim = tomography::leaf_chois(&q, &GateTable::standard()).unwrap();
    let want = hand::meas_chois();
    for j in 0..2 {
        let c = r.component(j).get(0, 0).unwrap().choi();
        assert!(c.approx_eq(&sim[j], 1e-12));
        assert!(c.approx_eq(&want[j], 1e-12));
    }
}

#[test]
fn identity_applied_to_true_equals_true() {
    let ctx = Context::new();
    let bool_t = parse_type("bool").unwrap();
    let a = check_term(&ctx, &parse_term("(fun x -> x) tt").unwrap(), &bool_t).unwrap();
    let b = check_term(&ctx, &Term::True, &bool_t).unwrap();
    let (ra, rb) = (den().denote_closed(&a).unwrap(), den().denote_closed(&b).unwrap());
    assert!(equal_observable(&ra, &rb, 1e-9).unwrap().equal);
    let f = check_term(&ctx, &Term::False, &bool_t).unwrap();
    assert!(!equal_observable(&ra, &den().denote_closed(&f).unwrap(), 1e-9).unwrap().equal);
}

#[test]
fn empty_channel_configuration_is_unit_of_monad() {
    let bool_t = parse_type("bool").unwrap();
    let d = check_configuration(&Channel::eps([]), &Bunch::Leaf(Term::True), &bool_t).unwrap();
    let r = den().denote_configuration(&d).unwrap();
    let tt = den().denote_closed(&check_term(&Context::new(), &Term::True, &bool_t).unwrap()).unwrap();
    assert!(equal_observable(&r, &tt, 1e-9).unwrap().equal);
}
