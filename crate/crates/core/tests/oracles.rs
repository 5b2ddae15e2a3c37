mod common;

use sclt::clauses::Clause;
use sclt::engine::{fresh_pool, Config, Engine};
use sclt::frontend::parse_problem;
use sclt::verify::{entails, ground_unsat_check, hres_factor, hres_resolve, hres_saturate, HresOutcome, SaturationLimit, VerifyError};

use common::Shape;

const SMALL: Shape = Shape { clauses: 4, vars: 2, preds: 2, max_arity: 1, lits: 3, min_lits: 1 };

fn clauses(text: &str) -> Vec<Clause> {
    parse_problem(text).unwrap().clauses
}

fn engine_refutes(n: &[Clause], max: usize) -> bool {
    let config = Config { constants: 1, max_constants: max, accept_stuck: false, restarts: 50, steps: 50_000, ..Config::default() };
    Engine::new(n.to_vec(), config).unwrap().run().is_unsat()
}

#[test]
fn hres_inferences_are_entailed() {
    let pool = fresh_pool(2);
    let mut checked = 0;
    for seed in 0..150u64 {
        let n = common::problem(seed, SMALL);
        for (a, c1) in n.iter().enumerate() {
            for (i, j) in (0..c1.body().len()).flat_map(|i| (0..c1.body().len()).map(move |j| (i, j))) {
                if let Some(f) = hres_factor(c1, i, j) {
                    match entails(&n, &pool, &f) {
                        Ok(ok) => {
                            assert!(ok, "seed {seed}: factor {f} of {c1}");
                            checked += 1;
                        }
                        Err(VerifyError::TooLarge { .. }) => {}
                        Err(e) => panic!("{e}"),
                    }
                }
            }
            for c2 in &n[a..] {
                for i in 0..c1.body().len() {
                    for j in 0..c2.body().len() {
                        let Some(r) = hres_resolve(c1, c2, i, j) else { continue };
                        match entails(&n, &pool, &r) {
                            Ok(ok) => {
                                assert!(ok, "seed {seed}: resolvent {r} of {c1} and {c2}");
                                checked += 1;
                            }
                            Err(VerifyError::TooLarge { .. }) => {}
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 100, "only {checked} inferences checked");
}

#[test]
fn hres_refutations_are_found_by_the_engine() {
    let limits = SaturationLimit { max_clauses: 300, max_size: 4, max_constraint: 8, steps: 20_000 };
    let mut refuted = 0;
    for seed in 0..150u64 {
        let n = common::problem(seed, SMALL);
        if let HresOutcome::Unsatisfiable(_) = hres_saturate(&n, limits) {
            refuted += 1;
            assert!(engine_refutes(&n, 4), "seed {seed}");
        }
    }
    assert!(refuted > 0);
}

#[test]
fn bundled_refutations_agree_with_hres() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/problems/refutation.sclt")).unwrap();
    assert!(matches!(hres_saturate(&clauses(&text), SaturationLimit::default()), HresOutcome::Unsatisfiable(_)));
    let sat = clauses("pred P/1\ntrue || P(x)");
    assert!(!matches!(hres_saturate(&sat, SaturationLimit::default()), HresOutcome::Unsatisfiable(_)));
}

/// Free sorts compile to membership predicates; the verdicts must match a
/// version where each sort member gets its own predicate.
#[test]
fn free_sorts_match_hand_expansion() {
    // clause variables are universal, so a sort variable expands to one
    // clause per member
    let cases = [
        (
            "sort C = {r, g}\npred Paint(real, C)\nx < 0 || Paint(x, c)\nx > 5 || ~Paint(x, r)\n",
            "pred PaintR/1, PaintG/1\nx < 0 || PaintR(x)\nx < 0 || PaintG(x)\nx > 5 || ~PaintR(x)\n",
        ),
        (
            "sort C = {r, g}\npred Paint(real, C)\nx < 0 || Paint(x, c)\nx > -1 || ~Paint(x, g)\n",
            "pred PaintR/1, PaintG/1\nx < 0 || PaintR(x)\nx < 0 || PaintG(x)\nx > -1 || ~PaintG(x)\n",
        ),
        (
            "sort C = {r, g}\npred Paint(real, C)\ntrue || Paint(x, c)\ntrue || ~Paint(x, r)\n",
            "pred PaintR/1, PaintG/1\ntrue || PaintR(x)\ntrue || PaintG(x)\ntrue || ~PaintR(x)\n",
        ),
        (
            "sort C = {r, g, b}\npred Paint(real, C), Q/1\ntrue || ~Paint(x, c) | Q(x)\nx > 1 || Paint(x, g)\ntrue || ~Q(x)\n",
            "pred PaintR/1, PaintG/1, PaintB/1, Q/1\ntrue || ~PaintR(x) | Q(x)\ntrue || ~PaintG(x) | Q(x)\ntrue || ~PaintB(x) | Q(x)\nx > 1 || PaintG(x)\ntrue || ~Q(x)\n",
        ),
        (
            "sort C = {r, g, b}\npred Paint(real, C), Q/1\ntrue || ~Paint(x, c) | Q(x)\nx > 1 || Paint(x, g)\nx < 0 || ~Q(x)\n",
            "pred PaintR/1, PaintG/1, PaintB/1, Q/1\ntrue || ~PaintR(x) | Q(x)\ntrue || ~PaintG(x) | Q(x)\ntrue || ~PaintB(x) | Q(x)\nx > 1 || PaintG(x)\nx < 0 || ~Q(x)\n",
        ),
    ];
    let mut unsat = 0;
    for (sorted, expanded) in cases {
        let (s, e) = (clauses(sorted), clauses(expanded));
        assert_eq!(engine_refutes(&s, 4), engine_refutes(&e, 4), "{sorted}");
        let so = ground_unsat_check(&s, &fresh_pool(2)).unwrap();
        let eo = ground_unsat_check(&e, &fresh_pool(1)).unwrap();
        assert_eq!(so.is_unsat(), eo.is_unsat(), "{sorted}");
        unsat += usize::from(eo.is_unsat());
    }
    assert_eq!(unsat, 3);
}

#[test]
fn bundled_colors_problem_is_satisfiable() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/problems/colors.sclt")).unwrap();
    assert!(!engine_refutes(&clauses(&text), 4));
}
