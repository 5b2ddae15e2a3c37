use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sclt::engine::{fresh_pool, Config, Engine, Verdict};
use sclt::frontend::{format_ground, format_saturation, format_trace, format_verdict, parse_problem};
use sclt::verify::{check_saturated, ground_unsat_check, Saturation};

const EXIT_UNSAT: u8 = 20;
const EXIT_SAT: u8 = 10;
const EXIT_SATURATED: u8 = 30;
const EXIT_INPUT: u8 = 1;
const EXIT_INVARIANT: u8 = 2;

#[derive(Parser)]
#[command(name = "sclt", about = "SCL(T) for pure BS(LRA) constrained clause sets")]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Run the regular strategy to a verdict.
    Prove(Opts),
    /// Check whether conflict search over the pool can ever reach a conflict.
    Saturate(Opts),
    /// Ground enumeration oracle over a fixed pool.
    Oracle(Opts),
    /// Search for a stuck state whose candidate model verifies.
    Model(Opts),
}

#[derive(Args)]
struct Opts {
    file: PathBuf,
    /// Initial number of pool constants.
    #[arg(long, default_value_t = 3)]
    constants: usize,
    /// Grow cap; defaults to the initial pool size.
    #[arg(long)]
    max_constants: Option<usize>,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    /// Propagations per decision level for the fair policy.
    #[arg(long, default_value_t = 1)]
    propagation_cap: usize,
    #[arg(long, default_value = "fair")]
    propagation: String,
    #[arg(long, default_value = "ordered")]
    decide: String,
    /// Print one line per rule application.
    #[arg(long, env = "SCLT_TRACE", value_parser = clap::builder::FalseyValueParser::new())]
    trace: bool,
    /// Report the first stuck state instead of exploring further.
    #[arg(long)]
    accept_stuck: bool,
    /// Check well-formedness after every step.
    #[arg(long)]
    check_wf: bool,
    /// Check that the termination measure decreases at every step.
    #[arg(long)]
    measure: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn config(o: &Opts, mode: &Mode) -> Result<Config, String> {
    let max_constants = o.max_constants.unwrap_or(o.constants);
    if o.constants == 0 || o.restarts == 0 || o.steps == 0 || o.propagation_cap == 0 {
        return Err("budgets and pool sizes must be positive".into());
    }
    if o.constants > max_constants {
        return Err(format!("--constants {} exceeds --max-constants {max_constants}", o.constants));
    }
    let seek_model = matches!(mode, Mode::Model(_));
    let propagation = if seek_model && o.propagation == "fair" { "random".to_string() } else { o.propagation.clone() };
    Ok(Config {
        constants: o.constants,
        max_constants,
        restarts: o.restarts,
        steps: o.steps,
        propagation,
        decision: o.decide.clone(),
        propagation_cap: o.propagation_cap,
        accept_stuck: o.accept_stuck,
        seek_model,
        check_wf: o.check_wf,
        check_measure: o.measure,
        enforce_adiff: true,
        seed: o.seed,
        trace: o.trace,
    })
}

fn run(mode: Mode) -> Result<u8, (u8, String)> {
    let o = match &mode {
        Mode::Prove(o) | Mode::Saturate(o) | Mode::Oracle(o) | Mode::Model(o) => o,
    };
    let input = |msg: String| (EXIT_INPUT, msg);
    let text = std::fs::read_to_string(&o.file).map_err(|e| input(format!("{}: {e}", o.file.display())))?;
    let problem = parse_problem(&text).map_err(|e| input(format!("{}:{e}", o.file.display())))?;
    let config = config(o, &mode).map_err(input)?;
    match mode {
        Mode::Prove(_) | Mode::Model(_) => {
            let mut engine = Engine::new(problem.clauses, config).map_err(|e| input(e.to_string()))?;
            let verdict = engine.run();
            if o.trace {
                print!("{}", format_trace(engine.trace()));
            }
            print!("{}", format_verdict(&verdict));
            if !engine.violations().is_empty() {
                return Err((EXIT_INVARIANT, engine.violations().join("\n")));
            }
            Ok(match verdict {
                Verdict::Unsatisfiable(_) => EXIT_UNSAT,
                Verdict::SatisfiableGround(_) => EXIT_SAT,
                Verdict::Unknown(_) => 0,
            })
        }
        Mode::Saturate(_) => {
            let report = check_saturated(&problem.clauses, &[], &fresh_pool(o.constants)).map_err(|e| input(e.to_string()))?;
            print!("{}", format_saturation(&report));
            Ok(if report.verdict == Saturation::Saturated { EXIT_SATURATED } else { 0 })
        }
        Mode::Oracle(_) => {
            let v = ground_unsat_check(&problem.clauses, &fresh_pool(o.constants)).map_err(|e| input(e.to_string()))?;
            print!("{}", format_ground(&v));
            Ok(if v.is_unsat() { EXIT_UNSAT } else { EXIT_SAT })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.mode) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
