//! The `pql` command line: checking, reduction, simulation, soundness and
//! denotation of `.pql` files.
//!
//! Every command writes its report to a caller-supplied sink and returns a
//! [`CliError`] on failure, so the binary and the tests share one code path.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use pql_core::denot::{is_observable_type, soundness_trace, Denoter};
use pql_core::eval::{trace, Configuration, EvalError, FreshNameGen, Schedule, Stepper};
use pql_core::interchange::{configuration_to_dot, configuration_to_json, denotation_document};
use pql_core::qcalg::GateTable;
use pql_core::sim::{run_program, SimError};
use pql_core::syntax::{parse_program, parse_type, Program, SyntaxError, TypeExpr, VarName};
use pql_core::typecheck::{check_configuration, check_term, infer_term, infer_types, Context, Derivation, TypeError};
use pql_core::DensityMatrix64;

pub const DEFAULT_FUEL: usize = 10_000;
/// Prefix of wires created by `init` during reduction.
pub const FRESH_PREFIX: &str = "w_";

#[derive(Parser, Debug)]
#[command(name = "pql", version, about = "Check, run, simulate and denote Proto-Quipper-L programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Type-check a program, inferring its type or checking against `--type`.
    Check {
        file: PathBuf,
        #[arg(long = "type", value_name = "T")]
        ty: Option<String>,
    },
    /// Reduce a program to a value configuration.
    Run {
        file: PathBuf,
        /// Print every step with the rules it used.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Seed for a random measurement-branch schedule; without one both
        /// branches step together.
        #[arg(long, env = "PQL_SEED")]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
    },
    /// Run a program on an input state and print the leaf states.
    Simulate {
        file: PathBuf,
        /// Comma-separated `wire=state` pairs, states one of 0, 1, +, -.
        #[arg(long = "in", value_name = "STATE-SPEC", default_value = "")]
        input: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Compare the denotations of consecutive configurations of a run.
    Soundness {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Print the denotation of the initial configuration as JSON.
    Denote { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Dot,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation, unreadable file or parse error: exit 2.
    Usage(String),
    /// Type error, failed reduction or failed soundness check: exit 1.
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Semantic(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Semantic(m) => f.write_str(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("error: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Runs a parsed command line, writing the report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Check { file, ty } => check(file, ty.as_deref(), out),
        Command::Run { file, trace, fuel, seed, emit } => run(file, *trace, *fuel, *seed, *emit, out),
        Command::Simulate { file, input, fuel } => simulate(file, input, *fuel, out),
        Command::Soundness { file, tol, fuel } => soundness(file, *tol, *fuel, out),
        Command::Denote { file } => denote(file, out),
    }
}

/// Parses `args` (including the program name) and runs them; returns the exit code.
pub fn main_with(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn syntax_diagnostic(file: &Path, e: &SyntaxError) -> CliError {
    let loc = match e {
        SyntaxError::Parse { line, column, .. } => format!("{}:{line}:{column}", file.display()),
        SyntaxError::InvalidIdentifier(_) => file.display().to_string(),
    };
    CliError::Usage(format!("error[SyntaxError] at {loc}: {e}"))
}

/// Name of the failing rule, as printed in diagnostics.
pub fn type_error_rule(e: &TypeError) -> &'static str {
    match e {
        TypeError::LinearityError { .. } => "LinearityError",
        TypeError::TypeMismatch { .. } => "TypeMismatch",
        TypeError::UnboundVariable(_) => "UnboundVariable",
        TypeError::NonValuePromotion(_) => "NonValuePromotion",
        TypeError::LinearInPromotion { .. } => "LinearInPromotion",
        TypeError::ShapeMismatch(_) => "ShapeMismatch",
        TypeError::DuplicatePatternVariable(_) => "DuplicatePatternVariable",
        TypeError::CannotInfer(_) => "CannotInfer",
        TypeError::InvalidChannel(_) => "InvalidChannel",
    }
}

fn type_diagnostic(file: &Path, e: &TypeError) -> CliError {
    let at = match e {
        TypeError::TypeMismatch { term, .. } | TypeError::LinearInPromotion { term, .. } => format!(" in `{term}`"),
        TypeError::NonValuePromotion(t) | TypeError::CannotInfer(t) => format!(" in `{t}`"),
        TypeError::LinearityError { var, .. } | TypeError::UnboundVariable(var) | TypeError::DuplicatePatternVariable(var) => {
            format!(" at variable `{var}`")
        }
        _ => String::new(),
    };
    CliError::Semantic(format!("error[{}] at {}{at}: {e}", type_error_rule(e), file.display()))
}

fn eval_diagnostic(e: &EvalError) -> CliError {
    let rule = match e {
        EvalError::OutOfFuel(_) => "FuelExhausted",
        EvalError::StuckTerm(_) => "StuckTerm",
        EvalError::ShapeMismatch(_) => "ShapeMismatch",
        EvalError::WireClash(_) => "WireClash",
        EvalError::Channel(_) => "InvalidChannel",
    };
    CliError::Semantic(format!("error[{rule}]: {e}"))
}

/// A parsed program with its input context.
pub struct Loaded {
    pub program: Program,
    pub ctx: Context,
}

impl Loaded {
    pub fn initial(&self) -> Configuration {
        Configuration::initial(self.program.inputs.iter().map(|(x, _)| x.clone()).collect(), self.program.term.clone())
    }

    pub fn input_names(&self) -> Vec<VarName> {
        self.program.inputs.iter().map(|(x, _)| x.clone()).collect()
    }
}

/// Reads and parses a program. Inputs are wires, so they must be qubits.
pub fn load(file: &Path) -> Result<Loaded> {
    let src = std::fs::read_to_string(file).map_err(|e| CliError::Usage(format!("error: cannot read {}: {e}", file.display())))?;
    let program = parse_program(&src).map_err(|e| syntax_diagnostic(file, &e))?;
    if let Some((x, t)) = program.inputs.iter().find(|(_, t)| *t != TypeExpr::Qubit) {
        return Err(CliError::Usage(format!("error: input `{x}` has type {t}; inputs must be qubits")));
    }
    let ctx = Context::from_pairs(program.inputs.clone());
    Ok(Loaded { program, ctx })
}

/// Derivation for the program: checked against `ty` when given, inferred otherwise.
pub fn derive(file: &Path, l: &Loaded, ty: Option<&TypeExpr>) -> Result<Derivation> {
    let r = match ty {
        Some(t) => check_term(&l.ctx, &l.program.term, t),
        None => infer_term(&l.ctx, &l.program.term),
    };
    r.map_err(|e| type_diagnostic(file, &e))
}

/// The most specific derivation at an observable type. Values of type `!A`
/// are also checked at `A`, so the first candidate need not be the one.
pub fn observable_derivation(file: &Path, l: &Loaded) -> Result<Derivation> {
    let ds = infer_types(&l.ctx, &l.program.term).map_err(|e| type_diagnostic(file, &e))?;
    let first = ds[0].ty.clone();
    let strip = |mut t: &TypeExpr| {
        while let TypeExpr::Bang(a) = t {
            t = a;
        }
        t.clone()
    };
    let found = ds.iter().find(|d| is_observable_type(&d.ty)).cloned().or_else(|| {
        ds.iter().map(|d| strip(&d.ty)).filter(is_observable_type).find_map(|t| check_term(&l.ctx, &l.program.term, &t).ok())
    });
    found.ok_or_else(|| {
        CliError::Semantic(format!("error[NotObservableType]: {first} is not built from I, bool, qubit and tensors"))
    })
}

fn context_line(ctx: &Context) -> String {
    ctx.bindings.iter().map(|(x, t)| format!("{x} : {t}")).collect::<Vec<_>>().join(", ")
}

pub fn check(file: &Path, ty: Option<&str>, out: &mut dyn Write) -> Result<()> {
    let want = ty
        .map(|s| parse_type(s).map_err(|e| CliError::Usage(format!("error[SyntaxError] in --type: {e}"))))
        .transpose()?;
    let l = load(file)?;
    let d = derive(file, &l, want.as_ref())?;
    let ctx = context_line(&l.ctx);
    let sep = if ctx.is_empty() { "" } else { " " };
    writeln!(out, "{ctx}{sep}|- {} : {}", file.display(), d.ty)?;
    Ok(())
}

fn stepper(seed: Option<u64>) -> Stepper {
    let gen = FreshNameGen::new(FRESH_PREFIX);
    match seed {
        Some(s) => Stepper::with_schedule(gen, Schedule::random(s)),
        None => Stepper::new(gen),
    }
}

pub fn run(file: &Path, show_trace: bool, fuel: usize, seed: Option<u64>, emit: Option<Emit>, out: &mut dyn Write) -> Result<()> {
    let l = load(file)?;
    derive(file, &l, None)?;
    let tr = trace(&l.initial(), fuel, &mut stepper(seed)).map_err(|e| eval_diagnostic(&e))?;
    if show_trace {
        for s in &tr.steps {
            writeln!(out, "{} {} {}", s.index, s.rule, configuration_to_json(&s.config))?;
        }
    }
    let fin = tr.last();
    match emit {
        Some(Emit::Json) => writeln!(out, "{}", configuration_to_json(fin))?,
        Some(Emit::Dot) => write!(out, "{}", configuration_to_dot(fin))?,
        None => {
            writeln!(out, "steps: {}", tr.steps.len())?;
            writeln!(out, "channel: {}", fin.channel)?;
            writeln!(out, "value: {}", fin.term)?;
        }
    }
    Ok(())
}

/// Parses `a=0,b=+` into a product state over `wires`, in that order.
pub fn parse_state_spec(spec: &str, wires: &[VarName]) -> Result<DensityMatrix64> {
    let mut given: Vec<(String, DensityMatrix64)> = vec![];
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (w, s) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("error: bad state spec `{part}`, expected wire=state")))?;
        let (w, s) = (w.trim(), s.trim());
        let rho = match s {
            "0" => DensityMatrix64::basis(w, 0),
            "1" => DensityMatrix64::basis(w, 1),
            "+" => DensityMatrix64::hadamard_basis(w, true),
            "-" | "\u{2212}" => DensityMatrix64::hadamard_basis(w, false),
            _ => return Err(CliError::Usage(format!("error: unknown state `{s}` for wire `{w}`; use 0, 1, + or -"))),
        };
        if given.iter().any(|(x, _)| x == w) {
            return Err(CliError::Usage(format!("error: wire `{w}` given twice")));
        }
        if !wires.iter().any(|x| x.as_str() == w) {
            return Err(CliError::Usage(format!("error: `{w}` is not an input wire")));
        }
        given.push((w.to_string(), rho));
    }
    let mut state = DensityMatrix64::scalar(1.0);
    for w in wires {
        let (_, rho) = given
            .iter()
            .find(|(x, _)| x == w.as_str())
            .ok_or_else(|| CliError::Usage(format!("error: no state given for input wire `{w}`")))?;
        state = state.tensor(rho).map_err(|e| CliError::Usage(format!("error: {e}")))?;
    }
    Ok(state)
}

fn sim_diagnostic(e: &SimError) -> CliError {
    CliError::Semantic(format!("error[SimError]: {e}"))
}

fn bits(path: &[bool]) -> String {
    if path.is_empty() {
        return "-".into();
    }
    path.iter().map(|b| if *b { "tt" } else { "ff" }).collect::<Vec<_>>().join(".")
}

fn complex(re: f64, im: f64) -> String {
    let z = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    let (re, im) = (z(re), z(im));
    if im == 0.0 {
        format!("{re:.6}")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

pub fn simulate(file: &Path, spec: &str, fuel: usize, out: &mut dyn Write) -> Result<()> {
    let l = load(file)?;
    let input = parse_state_spec(spec, &l.input_names())?;
    derive(file, &l, None)?;
    let (_, leaves) =
        run_program(&l.program.term, &input, fuel, &mut stepper(None), &GateTable::standard()).map_err(|e| sim_diagnostic(&e))?;
    for (i, o) in leaves.iter().enumerate() {
        let ws: Vec<&str> = o.state.wires.iter().map(VarName::as_str).collect();
        writeln!(out, "leaf {i} path {} p={:.12} value {}", bits(&o.path), o.probability(), o.value)?;
        writeln!(out, "  wires [{}]", ws.join(", "))?;
        let m = &o.state.rho;
        for r in 0..m.rows() {
            let row: Vec<String> = (0..m.cols()).map(|c| complex(m[(r, c)].re, m[(r, c)].im)).collect();
            writeln!(out, "  [{}]", row.join(", "))?;
        }
    }
    Ok(())
}

pub fn soundness(file: &Path, tol: f64, fuel: usize, out: &mut dyn Write) -> Result<()> {
    let l = load(file)?;
    let d = observable_derivation(file, &l)?;
    let den = Denoter::<f64>::new(GateTable::standard());
    let rep = soundness_trace(&den, &l.initial(), &d.ty, fuel, &mut stepper(None), tol)
        .map_err(|e| CliError::Semantic(format!("error[DenotError]: {e}")))?;
    writeln!(out, "initial outcomes: [{}]", rep.initial_outcomes.join(", "))?;
    for s in &rep.steps {
        writeln!(out, "step {} {} deviation {:.3e} {}", s.index, s.rule, s.deviation, if s.equal { "PASS" } else { "FAIL" })?;
    }
    writeln!(out, "max deviation {:.3e}", rep.max_deviation)?;
    writeln!(out, "{} at tolerance {tol:e}", if rep.passed { "PASS" } else { "FAIL" })?;
    if !rep.passed {
        return Err(CliError::Semantic(format!("error[SoundnessViolation]: max deviation {:e}", rep.max_deviation)));
    }
    Ok(())
}

pub fn denote(file: &Path, out: &mut dyn Write) -> Result<()> {
    let l = load(file)?;
    let d = observable_derivation(file, &l)?;
    let c = l.initial();
    let cd = check_configuration(&c.channel, &c.term, &d.ty).map_err(|e| type_diagnostic(file, &e))?;
    let den = Denoter::<f64>::new(GateTable::standard());
    let r = den.denote_configuration(&cd).map_err(|e| CliError::Semantic(format!("error[DenotError]: {e}")))?;
    let inputs = c.channel.in_wires().map_err(|e| CliError::Semantic(format!("error: {e}")))?;
    let doc = denotation_document(&inputs, &r).map_err(|e| CliError::Semantic(format!("error: {e}")))?;
    writeln!(out, "{}", serde_json::to_string(&doc).expect("denotation documents serialize"))?;
    Ok(())
}
