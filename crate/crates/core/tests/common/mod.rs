//! Random pure problems in the concrete syntax, shared by the property and
//! acceptance suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sclt::clauses::Clause;
use sclt::frontend::parse_problem;

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub clauses: usize,
    pub vars: usize,
    pub preds: usize,
    pub max_arity: usize,
    pub lits: usize,
    pub min_lits: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { clauses: 4, vars: 3, preds: 2, max_arity: 2, lits: 3, min_lits: 1 }
    }
}

const VARS: [&str; 4] = ["x", "y", "z", "u"];
const PREDS: [&str; 6] = ["P", "Q", "R", "S", "T", "U"];
const RELS: [&str; 6] = ["<=", "<", "=", "!=", ">=", ">"];

fn expr(rng: &mut ChaCha8Rng, vars: &[&str]) -> String {
    let mut parts: Vec<(i32, String)> = Vec::new();
    for v in vars {
        if rng.gen_bool(0.6) {
            let k: i32 = rng.gen_range(-2..=2);
            if k != 0 {
                parts.push((k, format!("*{v}")));
            }
        }
    }
    let c: i32 = rng.gen_range(-2..=2);
    if parts.is_empty() || rng.gen_bool(0.4) {
        parts.push((c, String::new()));
    }
    let mut out = String::new();
    for (i, (k, v)) in parts.iter().enumerate() {
        match (i, *k < 0) {
            (0, _) => out.push_str(&format!("{k}{v}")),
            (_, true) => out.push_str(&format!(" - {}{v}", -k)),
            (_, false) => out.push_str(&format!(" + {k}{v}")),
        }
    }
    out
}

pub fn problem_text(seed: u64, shape: Shape) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let npreds = rng.gen_range(1..=shape.preds);
    let arities: Vec<usize> = (0..npreds).map(|_| rng.gen_range(1..=shape.max_arity)).collect();
    let decl: Vec<String> = (0..npreds).map(|i| format!("{}/{}", PREDS[i], arities[i])).collect();
    let mut out = format!("pred {}\n", decl.join(", "));
    let nclauses = rng.gen_range(1..=shape.clauses);
    for _ in 0..nclauses {
        let nv = rng.gen_range(1..=shape.vars);
        let vars = &VARS[..nv];
        let nlits = rng.gen_range(shape.min_lits..=shape.lits);
        let mut lits = Vec::new();
        let mut used = Vec::new();
        for _ in 0..nlits {
            let p = rng.gen_range(0..npreds);
            let args: Vec<&str> = (0..arities[p]).map(|_| *vars.choose(&mut rng).unwrap()).collect();
            used.extend(args.iter().copied());
            let sign = if rng.gen_bool(0.5) { "~" } else { "" };
            lits.push(format!("{sign}{}({})", PREDS[p], args.join(", ")));
        }
        used.sort();
        used.dedup();
        let ncons = rng.gen_range(0..=2);
        let cons: Vec<String> = (0..ncons)
            .map(|_| format!("{} {} {}", expr(&mut rng, &used), RELS.choose(&mut rng).unwrap(), expr(&mut rng, &used)))
            .collect();
        let constraint = if cons.is_empty() { "true".to_string() } else { cons.join(", ") };
        out.push_str(&format!("{constraint} || {}\n", lits.join(" | ")));
    }
    out
}

pub fn problem(seed: u64, shape: Shape) -> Vec<Clause> {
    let text = problem_text(seed, shape);
    parse_problem(&text).unwrap_or_else(|e| panic!("generated problem does not parse: {e}\n{text}")).clauses
}

pub fn max_vars(clauses: &[Clause]) -> usize {
    use sclt::terms::Syntax;
    clauses.iter().map(|c| c.vars().len()).max().unwrap_or(0)
}

pub fn bundled() -> Vec<(String, Vec<Clause>)> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/problems");
    let mut out = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        let text = std::fs::read_to_string(&path).unwrap();
        if let Ok(p) = parse_problem(&text) {
            out.push((path.file_name().unwrap().to_string_lossy().into_owned(), p.clauses));
        }
    }
    out
}
