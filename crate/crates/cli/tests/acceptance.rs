//! Acceptance suite. Runs every criterion in order and prints one PASS/FAIL
//! line for each; the process fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use pql_core::arbitrary::{random_channel, random_program, rng, ProgramLimits};
use pql_core::bunch::Bunch;
use pql_core::denot::{denote_channel, detour_comparison, is_observable_type, soundness_trace, Denoter, Index};
use pql_core::eval::{step_config, trace, Configuration, FreshNameGen, StepOutcome, Stepper};
use pql_core::linalg::CMatrix;
use pql_core::qcalg::{Channel, GateTable};
use pql_core::sim::run_program;
use pql_core::syntax::{parse_term, parse_type, pretty_term, Term, VarName};
use pql_core::typecheck::{check_configuration, check_term, infer_term, infer_types, Context};
use pql_core::DensityMatrix64;
use pql_oracles::{declarative, hand, laws, queries, tomography};

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(root().join("corpus"))
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "pql"))
        .collect();
    v.sort();
    v
}

fn exp_file() -> PathBuf {
    root().join("corpus/exp.pql")
}

fn report<T>(r: pql::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn captured(f: impl FnOnce(&mut Vec<u8>) -> pql::Result<()>) -> Result<String, String> {
    let mut out = vec![];
    report(f(&mut out))?;
    Ok(String::from_utf8(out).unwrap())
}

fn golden_typing() -> Outcome {
    let exp = exp_file();
    let line = captured(|o| pql::check(&exp, Some("qubit * I"), o))?;
    let want = format!("v_c : qubit |- {} : qubit * I\n", exp.display());
    ensure(line == want, || format!("check printed {line:?}"))?;
    let inferred = captured(|o| pql::check(&exp, None, o))?;
    ensure(inferred == want, || format!("inferred {inferred:?}"))?;
    let empty = Context::new();
    for (src, ty) in [("meas", "!(qubit -o bool * qubit)"), ("free", "!(qubit -o I)"), ("init_tt *", "qubit")] {
        let t = parse_term(src).unwrap();
        let d = check_term(&empty, &t, &parse_type(ty).unwrap()).map_err(|e| format!("{src}: {e}"))?;
        ensure(d.ty.to_string() == ty, || format!("{src} : {}", d.ty))?;
        let found = infer_types(&empty, &t).map_err(|e| format!("{src}: {e}"))?;
        ensure(found.iter().any(|d| d.ty.to_string() == ty), || format!("{src}: {ty} not among the inferred types"))?;
    }
    let i = infer_term(&empty, &parse_term("init_tt *").unwrap()).map_err(|e| e.to_string())?;
    ensure(i.ty.to_string() == "qubit", || format!("init_tt * inferred {}", i.ty))?;
    let bang = check_term(&empty, &parse_term("init_tt *").unwrap(), &parse_type("!qubit").unwrap());
    ensure(bang.is_err(), || "init_tt * accepted at !qubit".into())?;
    Ok("exp : qubit * I, meas, free, init_tt * exact".into())
}

fn golden_reduction() -> Outcome {
    let exp = exp_file();
    let loaded = report(pql::load(&exp))?;
    let tr = trace(&loaded.initial(), 100, &mut Stepper::new(FreshNameGen::new(pql::FRESH_PREFIX))).map_err(|e| e.to_string())?;
    let d = "fresh";
    let want = Configuration::new(
        Channel::meas("v_c", Channel::init(true, d, Channel::free("v_c", Channel::eps([d]))), Channel::eps(["v_c"])),
        Bunch::node(
            Bunch::Leaf(Term::pair(Term::var(d), Term::Unit)),
            Bunch::Leaf(Term::pair(Term::var("v_c"), Term::Unit)),
        ),
    );
    let fin = tr.last();
    ensure(fin.alpha_eq(&want), || format!("final configuration {} ; {}", fin.channel, fin.term))?;
    let labels = tr.labels();
    for l in ["a.2", "b.2", "c"] {
        ensure(labels.contains(l), || format!("no {l} step in {labels:?}"))?;
    }
    ensure(labels.iter().any(|l| l.starts_with("d.")), || format!("no d step in {labels:?}"))?;
    let printed = captured(|o| pql::run(&exp, false, 100, None, None, o))?;
    ensure(printed.contains("channel: meas v_c { init tt w_0; free v_c; eps{w_0} | eps{v_c} }"), || printed.clone())?;
    let seq: Vec<String> = tr.steps.iter().map(|s| s.rule.to_string()).collect();
    Ok(format!("{} steps [{}]", tr.steps.len(), seq.join("; ")))
}

fn lemmas() -> Outcome {
    let mut r = rng(7);
    let (mut configs, mut steps) = (0usize, 0usize);
    let limits = ProgramLimits::default();
    for i in 0..500 {
        let g = random_program(&mut r, limits);
        let mut c = Configuration::initial(g.inputs.iter().cloned().collect(), g.term.clone());
        ensure(g.inputs.len() <= limits.max_qubits, || format!("program {i} has {} inputs", g.inputs.len()))?;
        check_configuration(&c.channel, &c.term, &g.ty).map_err(|e| format!("program {i} `{}` ill-typed: {e}", pretty_term(&g.term)))?;
        let mut st = Stepper::new(FreshNameGen::new("w"));
        let mut fuel = 10_000;
        loop {
            configs += 1;
            match step_config(&c, &mut st).map_err(|e| format!("program {i} stuck: {e}"))? {
                StepOutcome::Value => break,
                StepOutcome::Step(next, _) => {
                    check_configuration(&next.channel, &next.term, &g.ty)
                        .map_err(|e| format!("program {i} `{}` loses its type: {e}", pretty_term(&g.term)))?;
                    c = next;
                    steps += 1;
                }
            }
            ensure(fuel > 0, || format!("program {i} exceeded fuel 10000"))?;
            fuel -= 1;
        }
    }
    Ok(format!("500 programs, {configs} configurations, {steps} steps"))
}

fn agreement() -> Outcome {
    let mut r = rng(4);
    let mut accepted = 0;
    let n = 1200;
    for i in 0..n {
        let (g, t, a) = queries::query(&mut r, i);
        let alg = check_term(&Context::from_pairs(g.clone()), &t, &a).is_ok();
        let dec = declarative::derivable(&g, &t, &a);
        ensure(alg == dec, || format!("{g:?} |- {} : {a}: checker {alg}, search {dec}", pretty_term(&t)))?;
        accepted += dec as usize;
    }
    Ok(format!("{n} queries agree, {accepted} derivable"))
}

fn simulation() -> Outcome {
    let t = parse_term("let <b, v_c> = meas v_c in if b then <init_tt *, free v_c> else <v_c, *>").unwrap();
    let gates = GateTable::standard();
    let run = |rho: DensityMatrix64| {
        run_program(&t, &rho, 100, &mut Stepper::new(FreshNameGen::new(pql::FRESH_PREFIX)), &gates).map_err(|e| e.to_string())
    };
    let (_, outs) = run(DensityMatrix64::hadamard_basis("v_c", true))?;
    ensure(outs.len() == 2, || format!("{} leaves", outs.len()))?;
    ensure(outs[0].path == [true] && outs[1].path == [false], || "leaf order".into())?;
    ensure(outs[0].state.wires[0].as_str() != "v_c" && outs[1].state.wires[0].as_str() == "v_c", || "leaf wires".into())?;
    let want = hand::exp_plus_leaves();
    let mut dev = 0.0f64;
    for (o, w) in outs.iter().zip(&want) {
        dev = dev.max((o.probability() - w.trace().re).abs()).max(o.state.rho.max_abs_diff(w));
    }
    ensure(dev < TOL, || format!("deviation {dev:e} from the hand-computed leaves"))?;
    let (_, ones) = run(DensityMatrix64::basis("v_c", 1))?;
    let (p0, p1) = (ones[0].probability(), ones[1].probability());
    ensure((p0 - 1.0).abs() < TOL && p1.abs() < TOL, || format!("|1> gives ({p0}, {p1})"))?;
    let printed = captured(|o| pql::simulate(&exp_file(), "v_c=+", 100, o))?;
    ensure(printed.matches("p=0.500000000000").count() == 2, || printed.clone())?;
    Ok(format!("|+> -> (0.5, 0.5), |1> -> ({p0}, {p1}), deviation {dev:.1e}"))
}

fn denotation_vs_simulation() -> Outcome {
    let gates = GateTable::standard();
    let mut r = rng(31);
    let (mut branches, mut dev) = (0, 0.0f64);
    for i in 0..200 {
        let (q, inputs) = random_channel(&mut r, 3, 5);
        let order: Vec<VarName> = inputs.iter().cloned().collect();
        let got = denote_channel(&q, &order, &gates).and_then(|k| k.apply(&Index::Unit)).map_err(|e| format!("{q}: {e}"))?;
        let want = tomography::leaf_chois(&q, &gates).map_err(|e| format!("{q}: {e}"))?;
        ensure(got.outcomes.len() == want.len(), || format!("channel {i} `{q}`: leaf count"))?;
        for (j, w) in want.iter().enumerate() {
            let c = got.component(j).get(0, 0).map(|s| s.choi()).unwrap_or_else(|| CMatrix::zeros(w.rows(), w.cols()));
            ensure(c.rows() == w.rows(), || format!("channel {i} `{q}` leaf {j}: dimensions"))?;
            dev = dev.max(c.max_abs_diff(w));
            branches += 1;
        }
    }
    ensure(dev < TOL, || format!("max Choi deviation {dev:e}"))?;
    Ok(format!("200 channels, {branches} branches, max deviation {dev:.1e}"))
}

fn categorical_laws() -> Outcome {
    let mut parts = vec![];
    for (name, r) in laws::all(TOL) {
        let n = r.map_err(|e| format!("{name}: {e}"))?;
        parts.push(format!("{name} {n}"));
    }
    Ok(parts.join(", "))
}

fn corpus_soundness() -> Outcome {
    let den = Denoter::<f64>::new(GateTable::standard());
    let files = corpus_files();
    ensure(files.len() >= 20, || format!("corpus has {} programs", files.len()))?;
    let mut worst = 0.0f64;
    for f in &files {
        let l = report(pql::load(f))?;
        let d = report(pql::observable_derivation(f, &l))?;
        let mut st = Stepper::new(FreshNameGen::new(pql::FRESH_PREFIX));
        let rep = soundness_trace(&den, &l.initial(), &d.ty, pql::DEFAULT_FUEL, &mut st, TOL).map_err(|e| format!("{}: {e}", f.display()))?;
        ensure(rep.passed, || format!("{}: {:?}", f.display(), rep.first_violation()))?;
        worst = worst.max(rep.max_deviation);
        if f == &exp_file() {
            ensure(rep.initial_outcomes == ["<*, *>", "<*, *>"], || format!("exp initial outcomes {:?}", rep.initial_outcomes))?;
        }
    }
    ensure(worst < TOL, || format!("max deviation {worst:e}"))?;
    Ok(format!("{} programs, max deviation {worst:.1e}, exp starts at [<*, *>, <*, *>]", files.len()))
}

fn corpus_detours() -> Outcome {
    let den = Denoter::<f64>::new(GateTable::standard());
    let mut checked = vec![];
    for f in corpus_files() {
        let l = report(pql::load(&f))?;
        if !l.program.inputs.is_empty() {
            continue;
        }
        let d = report(pql::observable_derivation(&f, &l))?;
        ensure(is_observable_type(&d.ty), || format!("{}: {}", f.display(), d.ty))?;
        let cmp = detour_comparison(&den, &d, TOL).map_err(|e| format!("{}: {e}", f.display()))?;
        ensure(cmp.equal, || format!("{}: deviation {:e}", f.display(), cmp.deviation))?;
        checked.push(f.file_stem().unwrap().to_string_lossy().into_owned());
    }
    ensure(checked.len() >= 5, || format!("only {} closed programs", checked.len()))?;
    Ok(format!("{} closed programs: {}", checked.len(), checked.join(", ")))
}

fn timed(n: usize, limit: Duration, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
    });
    let took = start.elapsed();
    let (ok, detail) = match r {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; took {took:.2?}, limit {limit:.0?}")),
        Err(e) => (false, e),
    };
    println!("criterion {n}: {} ({took:.2?}) {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn main() {
    let s = Duration::from_secs;
    let criteria: [(Duration, fn() -> Outcome); 9] = [
        (s(1), golden_typing),
        (s(1), golden_reduction),
        (s(60), lemmas),
        (s(60), agreement),
        (s(1), simulation),
        (s(120), denotation_vs_simulation),
        (s(30), categorical_laws),
        (s(60), corpus_soundness),
        (s(10), corpus_detours),
    ];
    let mut failed = 0;
    for (i, (limit, f)) in criteria.into_iter().enumerate() {
        if !timed(i + 1, limit, f) {
            failed += 1;
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
