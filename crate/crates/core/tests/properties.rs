//! Property suites for syntax, channels, substitution, reduction schedules
//! and the simulator.

use std::collections::BTreeMap;

use proptest::prelude::*;

use pql_core::arbitrary::{random_channel, random_program, random_state, random_type, rng, ProgramLimits};
use pql_core::eval::{run_to_value, substitute, Configuration, FreshNameGen, Schedule, Stepper, Substitution};
use pql_core::qcalg::GateTable;
use pql_core::sim::apply_channel;
use pql_core::syntax::{
    parse_channel, parse_term, parse_type, pretty_channel, pretty_term, pretty_type, wires, Term, VarName, WireSet,
};
use pql_core::DensityMatrix64;

/// Renames the generator's `x<n>` binders to `z<n>`, outside channel constants.
fn rename_binders(t: &Term) -> Term {
    let n = |x: &VarName| match x.as_str().strip_prefix('x') {
        Some(rest) if !rest.is_empty() => VarName::raw(&format!("z{rest}")),
        _ => x.clone(),
    };
    let s = |t: &Term| Box::new(rename_binders(t));
    match t {
        Term::Var(x) => Term::Var(n(x)),
        Term::Lambda(x, b) => Term::Lambda(n(x), s(b)),
        Term::App(a, b) => Term::App(s(a), s(b)),
        Term::Pair(a, b) => Term::Pair(s(a), s(b)),
        Term::LetPair(x, y, a, b) => Term::LetPair(n(x), n(y), s(a), s(b)),
        Term::If(c, a, b) => Term::If(s(c), s(a), s(b)),
        other => other.clone(),
    }
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg(300))]

    #[test]
    fn terms_round_trip_through_the_printer(seed in any::<u64>()) {
        let g = random_program(&mut rng(seed), ProgramLimits::default());
        let printed = pretty_term(&g.term);
        let back = parse_term(&printed).unwrap();
        prop_assert_eq!(&back, &g.term, "{}", printed);
        prop_assert_eq!(pretty_term(&back), printed);
    }

    #[test]
    fn types_round_trip_through_the_printer(seed in any::<u64>()) {
        let t = random_type(&mut rng(seed), 3);
        prop_assert_eq!(parse_type(&pretty_type(&t)).unwrap(), t);
    }

    #[test]
    fn channels_round_trip_through_the_printer(seed in any::<u64>()) {
        let (q, _) = random_channel(&mut rng(seed), 3, 5);
        prop_assert_eq!(parse_channel(&pretty_channel(&q)).unwrap(), q);
    }

    #[test]
    fn renaming_binders_is_alpha_equivalent(seed in any::<u64>()) {
        let g = random_program(&mut rng(seed), ProgramLimits::default());
        prop_assert_eq!(rename_binders(&g.term), g.term);
    }

    #[test]
    fn swapping_free_wires_changes_the_term(seed in any::<u64>()) {
        let g = random_program(&mut rng(seed), ProgramLimits::default());
        let fv = g.term.free_vars();
        prop_assume!(fv.len() >= 2);
        let mut it = fv.iter();
        let (a, b) = (it.next().unwrap().clone(), it.next().unwrap().clone());
        let swap: BTreeMap<_, _> = [(a.clone(), b.clone()), (b, a)].into_iter().collect();
        let swapped = pql_core::eval::rename_free(&g.term, &swap);
        prop_assert_ne!(swapped, g.term);
    }

    #[test]
    fn channels_validate_exactly_on_their_inputs(seed in any::<u64>()) {
        let (q, inputs) = random_channel(&mut rng(seed), 3, 5);
        prop_assert_eq!(q.in_wires().unwrap(), inputs.clone());
        prop_assert!(q.validate(&inputs).is_ok());
        let mut more = inputs.clone();
        more.insert(VarName::raw("extra"));
        prop_assert!(q.validate(&more).is_err());
    }

    #[test]
    fn extending_adds_the_wire_to_every_output(seed in any::<u64>()) {
        let (q, inputs) = random_channel(&mut rng(seed), 3, 5);
        let extra = wires(["spare"]);
        let q2 = q.extend(&extra).unwrap();
        let all: WireSet = inputs.union(&extra).cloned().collect();
        let outs = q.validate(&inputs).unwrap();
        let outs2 = q2.validate(&all).unwrap();
        for (a, b) in outs.leaves().into_iter().zip(outs2.leaves()) {
            let want: WireSet = a.union(&extra).cloned().collect();
            prop_assert_eq!(&want, b);
        }
    }

    #[test]
    fn substitution_replaces_exactly_the_free_occurrences(seed in any::<u64>(), pick in 0usize..3) {
        let g = random_program(&mut rng(seed), ProgramLimits::default());
        let fv = g.term.free_vars();
        prop_assume!(!fv.is_empty());
        let x = fv.iter().nth(pick % fv.len()).unwrap().clone();
        // The replacement names a generator binder, so capture must be avoided.
        let v = Term::pair(Term::var("x1"), Term::var("x2"));
        let s: Substitution = [(x.clone(), v)].into_iter().collect();
        let out = substitute(&g.term, &s);
        let mut want = fv.clone();
        want.remove(&x);
        want.insert(VarName::raw("x1"));
        want.insert(VarName::raw("x2"));
        prop_assert_eq!(out.free_vars(), want);
    }
}

proptest! {
    #![proptest_config(cfg(150))]

    #[test]
    fn schedules_reach_the_same_configuration(seed in any::<u64>()) {
        let g = random_program(&mut rng(seed), ProgramLimits::default());
        let c = Configuration::initial(g.inputs.iter().cloned().collect(), g.term);
        let run = |s: Schedule| run_to_value(&c, 10_000, &mut Stepper::with_schedule(FreshNameGen::new("w"), s)).unwrap().0;
        let par = run(Schedule::Parallel);
        prop_assert!(par.alpha_eq(&run(Schedule::Leftmost)));
        prop_assert!(par.alpha_eq(&run(Schedule::random(seed))));
    }

    #[test]
    fn simulated_leaves_are_states_summing_to_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (q, inputs) = random_channel(&mut r, 3, 5);
        let ws: Vec<VarName> = inputs.iter().cloned().collect();
        let rho: DensityMatrix64 = random_state(&mut r, &ws);
        let leaves = apply_channel(&q, &rho, &GateTable::standard()).unwrap();
        prop_assert_eq!(leaves.len(), q.leaf_count());
        let mut total = 0.0;
        for l in &leaves {
            prop_assert!(l.state.is_psd(1e-9));
            total += l.probability();
        }
        prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
    }
}

#[test]
fn time_to_value_matches_between_schedules_on_exp() {
    let exp = parse_term("let <b, v_c> = meas v_c in if b then <init_tt *, free v_c> else <v_c, *>").unwrap();
    let c = Configuration::initial(wires(["v_c"]), exp);
    let (par, n_par) = run_to_value(&c, 100, &mut Stepper::new(FreshNameGen::new("w"))).unwrap();
    let (left, n_left) =
        run_to_value(&c, 100, &mut Stepper::with_schedule(FreshNameGen::new("q"), Schedule::Leftmost)).unwrap();
    assert!(par.alpha_eq(&left));
    assert!(n_left >= n_par);
}
