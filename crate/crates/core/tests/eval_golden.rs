use pql_core::bunch::Bunch;
use pql_core::eval::{trace, Configuration, FreshNameGen, Stepper};
use pql_core::qcalg::Channel;
use pql_core::syntax::{parse_term, wires, Term};

const EXP: &str = "let <b, v_c> = meas v_c in if b then <init_tt *, free v_c> else <v_c, *>";

#[test]
fn exp_reduces_to_golden_configuration() {
    let c = Configuration::initial(wires(["v_c"]), parse_term(EXP).unwrap());
    let mut st = Stepper::new(FreshNameGen::new("v_d"));
    let tr = trace(&c, 100, &mut st).unwrap();
    for s in &tr.steps {
        println!("{} {} :: {} ; {}", s.index, s.rule, s.config.channel, s.config.term);
    }
    let fin = tr.last();
    let d = match &fin.term {
        Bunch::Node(a, _) => match &**a {
            Bunch::Leaf(Term::Pair(x, _)) => match &**x {
                Term::Var(v) => v.clone(),
                t => panic!("{t}"),
            },
            t => panic!("{t}"),
        },
        t => panic!("{t}"),
    };
    let expected = Channel::meas(
        "v_c",
        Channel::init(true, d.as_str(), Channel::free("v_c", Channel::eps([d.as_str()]))),
        Channel::eps(["v_c"]),
    );
    assert_eq!(fin.channel, expected);
    assert_eq!(
        fin.term,
        Bunch::node(
            Bunch::Leaf(Term::pair(Term::Var(d.clone()), Term::Unit)),
            Bunch::Leaf(Term::pair(Term::var("v_c"), Term::Unit))
        )
    );
}
