//! Subject reduction, progress and termination over generated configurations.

use pql_core::arbitrary::{random_program, rng, ProgramLimits};
use pql_core::eval::{step_config, Configuration, FreshNameGen, StepOutcome, Stepper};
use pql_core::syntax::pretty_term;
use pql_core::typecheck::check_configuration;

#[test]
fn generated_programs_are_well_typed_and_run_to_values() {
    let mut r = rng(7);
    let mut steps_total = 0;
    for i in 0..500 {
        let g = random_program(&mut r, ProgramLimits::default());
        let mut c = Configuration::initial(g.inputs.iter().cloned().collect(), g.term.clone());
        check_configuration(&c.channel, &c.term, &g.ty)
            .unwrap_or_else(|e| panic!("program {i} `{}` : {}: {e}", pretty_term(&g.term), g.ty));
        let mut st = Stepper::new(FreshNameGen::new("w"));
        let mut fuel = 10_000;
        loop {
            match step_config(&c, &mut st).unwrap_or_else(|e| panic!("program {i} stuck: {e}")) {
                StepOutcome::Value => break,
                StepOutcome::Step(next, _) => {
                    check_configuration(&next.channel, &next.term, &g.ty).unwrap_or_else(|e| {
                        panic!("program {i} `{}` loses its type after a step: {e}", pretty_term(&g.term))
                    });
                    c = next;
                    steps_total += 1;
                }
            }
            fuel -= 1;
            assert!(fuel > 0, "program {i} did not terminate");
        }
    }
    assert!(steps_total > 500);
}
