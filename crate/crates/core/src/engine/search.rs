//! Applicability search for the conflict-search rules over a fixed trail.
//! Shared by the engine loop and the saturation checker.

use std::collections::BTreeSet;

use crate::clauses::{groundings, Clause, Closure};
use crate::terms::{unify, unify_lits, BgLit, Const, FgAtom, FgLit, Subst, Syntax, Term, Var};
use crate::trail::Trail;

/// A ground instance of `clauses[clause]` that can propagate `lit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub clause: usize,
    pub subst: Subst,
    pub lit: FgLit,
    pub bg: Vec<BgLit>,
}

fn sorted_vars(c: &Clause) -> Vec<Var> {
    c.vars().into_iter().collect()
}

/// The only literal left undefined by the trail, if every other body
/// literal is false.
pub fn propagating_literal(trail: &Trail, body: &[FgLit]) -> Option<FgLit> {
    let mut target: Option<&FgLit> = None;
    for l in body {
        match trail.value(l) {
            Some(false) => {}
            Some(true) => return None,
            None => match target {
                None => target = Some(l),
                Some(t) if t == l => {}
                Some(_) => return None,
            },
        }
    }
    target.cloned()
}

pub fn ground_body(c: &Clause, s: &Subst) -> Vec<FgLit> {
    c.body().iter().map(|l| l.apply(s)).collect()
}

pub fn ground_constraint(c: &Clause, s: &Subst) -> Vec<BgLit> {
    c.constraint().iter().map(|l| l.apply(s)).collect()
}

/// Checks the Propagate side conditions for one grounding.
pub fn candidate_for(clauses: &[Clause], trail: &Trail, clause: usize, subst: &Subst) -> Option<Candidate> {
    let c = &clauses[clause];
    let lit = propagating_literal(trail, &ground_body(c, subst))?;
    let bg = ground_constraint(c, subst);
    trail.admits(&bg).then(|| Candidate { clause, subst: subst.clone(), lit, bg })
}

/// Every Propagate application, in clause order then grounding order.
pub fn candidates(clauses: &[Clause], trail: &Trail, pool: &[Const]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (i, c) in clauses.iter().enumerate() {
        if c.is_empty_body() {
            continue;
        }
        for s in groundings(&sorted_vars(c), pool) {
            if let Some(cand) = candidate_for(clauses, trail, i, &s) {
                out.push(cand);
            }
        }
    }
    out
}

pub fn is_false_instance(trail: &Trail, c: &Clause, s: &Subst) -> bool {
    c.body().iter().all(|l| trail.value(&l.apply(s)) == Some(false)) && trail.admits(&ground_constraint(c, s))
}

/// First clause instance falsified by the trail, in clause order then
/// lexicographic grounding order.
pub fn find_conflict(clauses: &[Clause], trail: &Trail, pool: &[Const]) -> Option<(usize, Subst)> {
    for (i, c) in clauses.iter().enumerate() {
        for s in groundings(&sorted_vars(c), pool) {
            if is_false_instance(trail, c, &s) {
                return Some((i, s));
            }
        }
    }
    None
}

/// Would adding `lit` (with background literals `bg`) to the trail make
/// some clause instance false? Only instances containing `comp(lit)` can
/// change status, so the search starts from those.
pub fn would_conflict(clauses: &[Clause], trail: &Trail, pool: &[Const], lit: &FgLit, bg: &[BgLit]) -> bool {
    let comp = lit.complement();
    for c in clauses {
        let vars = c.vars();
        for k in c.body() {
            if k.positive != comp.positive {
                continue;
            }
            let Some(seed) = unify(&k.atom, &comp.atom) else { continue };
            let rest: Vec<Var> = vars.iter().filter(|v| seed.get(v).is_none()).cloned().collect();
            for s in groundings(&rest, pool) {
                let s = seed.then(&s);
                let falsified = c.body().iter().all(|l| {
                    let g = l.apply(&s);
                    g == comp || trail.value(&g) == Some(false)
                });
                if falsified {
                    let mut extra = bg.to_vec();
                    extra.extend(ground_constraint(c, &s));
                    if trail.admits(&extra) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// `(Λ || C0 ∨ L)δ`: collapses the body literals whose ground image equals
/// `target` into one, via their most general unifier.
pub fn factor_onto(c: &Clause, s: &Subst, target: &FgLit) -> Clause {
    let positions: Vec<usize> = (0..c.body().len()).filter(|&j| c.body()[j].apply(s) == *target).collect();
    if positions.len() < 2 {
        return c.clone();
    }
    let mut delta = Subst::new();
    let first = &c.body()[positions[0]];
    for &p in &positions[1..] {
        let a = first.apply(&delta);
        let b = c.body()[p].apply(&delta);
        let u = unify_lits(&a, &b).expect("literals with equal ground images unify");
        delta = delta.then(&u);
    }
    let body = c
        .body()
        .iter()
        .enumerate()
        .filter(|(j, _)| !positions[1..].contains(j))
        .map(|(_, l)| l.apply(&delta))
        .collect();
    Clause::new(c.constraint().iter().map(|l| l.apply(&delta)).collect(), body)
}

/// The annotation closure for a propagation.
pub fn justification(clauses: &[Clause], cand: &Candidate) -> Closure {
    let factored = factor_onto(&clauses[cand.clause], &cand.subst, &cand.lit);
    Closure::new(factored, cand.subst.clone())
}

/// `atoms(gnd_B(clauses))`, ordered by predicate name and then by the
/// positions of the argument constants in the pool.
pub fn atom_universe(clauses: &[Clause], pool: &[Const]) -> Vec<FgAtom> {
    let mut set: BTreeSet<FgAtom> = BTreeSet::new();
    for c in clauses {
        for l in c.body() {
            let vars: Vec<Var> = l.atom.vars().into_iter().collect();
            for s in groundings(&vars, pool) {
                set.insert(l.atom.apply(&s));
            }
        }
    }
    let rank = |t: &Term| match t {
        Term::Const(k) => pool.iter().position(|p| p == k).unwrap_or(usize::MAX),
        Term::Var(_) => usize::MAX,
    };
    let mut atoms: Vec<FgAtom> = set.into_iter().collect();
    atoms.sort_by_key(|a| (a.pred.name().to_string(), a.args.iter().map(rank).collect::<Vec<_>>()));
    atoms
}

/// Distinct ground background literals of `gnd_B(clauses)`.
pub fn bg_universe(clauses: &[Clause], pool: &[Const]) -> BTreeSet<BgLit> {
    let mut set = BTreeSet::new();
    for c in clauses {
        for l in c.constraint() {
            let vars: Vec<Var> = l.vars().into_iter().collect();
            for s in groundings(&vars, pool) {
                set.insert(l.apply(&s));
            }
        }
    }
    set
}
