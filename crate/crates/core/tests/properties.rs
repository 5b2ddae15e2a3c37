mod common;

use proptest::prelude::*;

use sclt::clauses::gnd_all;
use sclt::engine::{fresh_pool, Config, Engine, Step, Verdict};
use sclt::frontend::{format_problem, parse_problem};
use sclt::lra::{check_sat, check_sat_ordered, ConstraintStore, ElimOrder, SatResult};
use sclt::terms::{rat, BgLit, InputRel, LinExpr, Term};
use sclt::trail::Eval;
use sclt::verify::ground_unsat_check;

use common::Shape;

const SHAPES: [Shape; 2] = [
    Shape { clauses: 4, vars: 3, preds: 2, max_arity: 2, lits: 3, min_lits: 1 },
    Shape { clauses: 10, vars: 2, preds: 4, max_arity: 1, lits: 3, min_lits: 2 },
];

fn atom() -> impl Strategy<Value = BgLit> {
    let rels = prop_oneof![
        Just(InputRel::Le),
        Just(InputRel::Lt),
        Just(InputRel::Eq),
        Just(InputRel::Ne),
        Just(InputRel::Ge),
        Just(InputRel::Gt)
    ];
    (prop::collection::vec((0usize..4, -4i64..=4), 1..=3), rels, -6i64..=6).prop_map(|(terms, rel, k)| {
        let mut lhs = LinExpr::zero();
        for (i, c) in terms {
            lhs.add_term(Term::cnst(["a", "b", "c", "d"][i]), &rat(c));
        }
        BgLit::new(&lhs, rel, &LinExpr::constant(rat(k)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_problems_parse_back(seed in any::<u64>(), which in 0usize..2) {
        let p = parse_problem(&common::problem_text(seed, SHAPES[which])).unwrap();
        let again = parse_problem(&format_problem(&p)).unwrap();
        prop_assert_eq!(p, again);
    }

    #[test]
    fn sat_witnesses_satisfy(atoms in prop::collection::vec(atom(), 1..8)) {
        match check_sat(&atoms) {
            SatResult::Sat(w) => {
                for a in &atoms {
                    prop_assert_eq!(a.eval(&|t| Some(w.get(t).cloned().unwrap_or_default())), Some(true), "{}", a);
                }
            }
            SatResult::Unsat => prop_assert!(!check_sat_ordered(&atoms, ElimOrder::Reverse).is_sat()),
        }
    }

    #[test]
    fn store_matches_fresh_checks(ops in prop::collection::vec((any::<bool>(), atom()), 1..30)) {
        let mut store = ConstraintStore::new();
        for (push, a) in ops {
            if push || store.depth() == 0 {
                store.push(a);
            } else {
                store.pop(1);
            }
            let atoms: Vec<BgLit> = store.atoms().cloned().collect();
            prop_assert_eq!(store.is_sat(), check_sat(&atoms).is_sat());
        }
    }

    #[test]
    fn checked_runs_keep_their_invariants(seed in any::<u64>(), which in 0usize..2, k in 1usize..=3) {
        let n = common::problem(seed, SHAPES[which]);
        let config = Config { constants: k, max_constants: k, restarts: 10, steps: 20_000, check_wf: true, check_measure: true, ..Config::default() };
        let mut e = Engine::new(n.clone(), config).unwrap();
        let v = e.run();
        prop_assert!(e.violations().is_empty(), "{:?}", e.violations());
        match &v {
            Verdict::SatisfiableGround(m) => {
                let ground = gnd_all(&n, &m.pool);
                prop_assert!(ground.iter().all(|c| m.trail.eval_clause(c) == Eval::True));
            }
            Verdict::Unsatisfiable(_) => {
                if let Ok(o) = ground_unsat_check(&n, &fresh_pool(k)) {
                    prop_assert!(o.is_unsat());
                }
            }
            Verdict::Unknown(_) => {}
        }
    }

    #[test]
    fn runs_are_deterministic_per_seed(seed in any::<u64>()) {
        let n = common::problem(seed, SHAPES[1]);
        let config = Config { propagation: "random".into(), decision: "shuffled".into(), seed, trace: true, ..Config::default() };
        let run = || {
            let mut e = Engine::new(n.clone(), config.clone()).unwrap();
            let mut steps = 0;
            while matches!(e.step(), Step::Applied(_)) && steps < 2000 {
                steps += 1;
            }
            e.trace().iter().map(|t| format!("{:?}", t.rule)).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }
}
