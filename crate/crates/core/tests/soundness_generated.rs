//! Denotations are preserved by reduction on generated programs, and
//! derivations with inserted detours denote the same thing.

use pql_core::arbitrary::{random_program, rng, ProgramLimits};
use pql_core::denot::{detour_comparison, is_observable_type, soundness_trace, Denoter};
use pql_core::eval::{Configuration, FreshNameGen, Stepper};
use pql_core::qcalg::GateTable;
use pql_core::syntax::pretty_term;
use pql_core::typecheck::{check_term, Context};

#[test]
fn reduction_preserves_denotations_of_generated_programs() {
    let den = Denoter::<f64>::new(GateTable::standard());
    let mut r = rng(21);
    let mut checked = 0;
    while checked < 200 {
        let g = random_program(&mut r, ProgramLimits::default());
        if !is_observable_type(&g.ty) {
            continue;
        }
        let c = Configuration::initial(g.inputs.iter().cloned().collect(), g.term.clone());
        let mut st = Stepper::new(FreshNameGen::new("w"));
        let rep = soundness_trace(&den, &c, &g.ty, 10_000, &mut st, 1e-9)
            .unwrap_or_else(|e| panic!("`{}`: {e}", pretty_term(&g.term)));
        assert!(rep.passed, "`{}` : {}: {:?}", pretty_term(&g.term), g.ty, rep.first_violation());
        checked += 1;
    }
}

#[test]
fn detours_do_not_change_denotations_of_closed_programs() {
    let den = Denoter::<f64>::new(GateTable::standard());
    let mut r = rng(22);
    let mut checked = 0;
    while checked < 100 {
        let g = random_program(&mut r, ProgramLimits { max_inputs: 0, ..ProgramLimits::default() });
        if !is_observable_type(&g.ty) {
            continue;
        }
        let d = check_term(&Context::new(), &g.term, &g.ty).unwrap();
        let cmp = detour_comparison(&den, &d, 1e-9).unwrap();
        assert!(cmp.equal, "`{}`: deviation {}", pretty_term(&g.term), cmp.deviation);
        checked += 1;
    }
}
