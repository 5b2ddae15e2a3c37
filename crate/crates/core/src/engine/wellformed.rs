//! Well-formedness items 1, 2, 4a, 4b and 5. Item 3 (`N ⊨ U`) needs the
//! ground oracle and is checked by the test suite.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::clauses::{check_pure, Clause, Closure};
use crate::lra::{adiff, check_sat};
use crate::terms::{BgLit, Const, ConstSym, FgAtom, Syntax};
use crate::trail::{Annotation, Trail, TrailEntry};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub item: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "item {}: {}", self.item, self.detail)
    }
}

fn v(item: &'static str, detail: String) -> Violation {
    Violation { item, detail }
}

pub struct StateView<'a> {
    pub n: &'a [Clause],
    pub u: &'a [Clause],
    pub pool: &'a [Const],
    pub trail: &'a Trail,
    pub conflict: Option<&'a Closure>,
    pub enforce_adiff: bool,
}

fn foreground_consts<T: Syntax + ?Sized>(x: &T) -> BTreeSet<Const> {
    x.cons()
        .into_iter()
        .filter_map(|c| match c {
            ConstSym::Fg(k) => Some(k),
            ConstSym::Num(_) => None,
        })
        .collect()
}

pub fn check(state: &StateView<'_>) -> Vec<Violation> {
    let mut out = Vec::new();
    let allowed: BTreeSet<Const> = state.pool.iter().cloned().chain(foreground_consts(state.n)).collect();

    // 1: constants come from B or N
    let mut seen: BTreeSet<Const> = foreground_consts(state.u);
    for e in state.trail.entries() {
        match e {
            TrailEntry::Fg { lit, ann, .. } => {
                seen.extend(foreground_consts(lit));
                if let Annotation::Propagation { closure, .. } = ann {
                    seen.extend(foreground_consts(&closure.ground()));
                }
            }
            TrailEntry::Bg { lit, .. } => seen.extend(foreground_consts(lit)),
        }
    }
    if let Some(c) = state.conflict {
        seen.extend(foreground_consts(&c.ground()));
    }
    for k in seen.difference(&allowed) {
        out.push(v("1", format!("constant {k} is neither in B nor in N")));
    }

    // 2: M ∧ adiff(B) satisfiable
    let base: Vec<BgLit> = if state.enforce_adiff { adiff(state.pool).unwrap_or_default() } else { Vec::new() };
    let mut all = base.clone();
    all.extend(state.trail.bgd().cloned());
    if !check_sat(&all).is_sat() {
        out.push(v("2", "bgd(M) ∧ adiff(B) is unsatisfiable".into()));
    }

    // 4a: the conflict clause is false and its constraint admissible
    if let Some(c) = state.conflict {
        for l in c.ground_body() {
            if state.trail.value(&l) != Some(false) {
                out.push(v("4a", format!("conflict literal {l} is not false in fgd(M)")));
            }
        }
        let mut extra = all.clone();
        extra.extend(c.ground_constraint());
        if !check_sat(&extra).is_sat() {
            out.push(v("4a", format!("conflict constraint of {c} is inconsistent with the trail")));
        }
    }

    // 4b: each propagation was legal against the prefix left of it
    let mut values: HashMap<FgAtom, bool> = HashMap::new();
    let mut prefix_bg = base;
    for e in state.trail.entries() {
        match e {
            TrailEntry::Fg { lit, ann, .. } => {
                if let Annotation::Propagation { closure, .. } = ann {
                    let body = closure.ground_body();
                    if !body.contains(lit) {
                        out.push(v("4b", format!("justification {closure} does not contain {lit}")));
                    }
                    if values.contains_key(&lit.atom) {
                        out.push(v("4b", format!("{lit} was already defined when propagated")));
                    }
                    for l in body.iter().filter(|l| *l != lit) {
                        if values.get(&l.atom) != Some(&!l.positive) {
                            out.push(v("4b", format!("side literal {l} of {closure} not false left of {lit}")));
                        }
                    }
                    let mut extra = prefix_bg.clone();
                    extra.extend(closure.ground_constraint());
                    if !check_sat(&extra).is_sat() {
                        out.push(v("4b", format!("constraint of {closure} inconsistent left of {lit}")));
                    }
                }
                values.insert(lit.atom.clone(), lit.positive);
            }
            TrailEntry::Bg { lit, .. } => prefix_bg.push(lit.clone()),
        }
    }

    // 5: purity
    let mut clauses = state.n.to_vec();
    clauses.extend_from_slice(state.u);
    if let Err(e) = check_pure(&clauses) {
        out.push(v("5", e.to_string()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{FgLit, Subst, Term};

    #[test]
    fn false_conflict_annotation_is_reported() {
        let pool = vec![Const::new("a")];
        let trail = Trail::new(&pool, true);
        let c = Clause::new(vec![], vec![FgLit::pos(FgAtom::new("P", vec![Term::var("x")]))]);
        let conflict = Closure::new(c.clone(), Subst::from_pairs([(crate::terms::Var::new("x"), Term::cnst("a"))]));
        let view = StateView { n: &[c], u: &[], pool: &pool, trail: &trail, conflict: Some(&conflict), enforce_adiff: true };
        let found = check(&view);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].item, "4a");
    }

    #[test]
    fn foreign_constant_is_reported() {
        let pool = vec![Const::new("a")];
        let mut trail = Trail::new(&pool, true);
        trail.push_decision(FgLit::pos(FgAtom::new("P", vec![Term::cnst("zz")])), &[]);
        let view = StateView { n: &[], u: &[], pool: &pool, trail: &trail, conflict: None, enforce_adiff: true };
        assert_eq!(check(&view)[0].item, "1");
    }
}
