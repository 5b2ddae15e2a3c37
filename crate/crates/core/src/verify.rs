//! Independent oracles: hierarchic resolution, a ground enumeration oracle
//! over a fixed constant pool, and an exhaustive saturation check.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::clauses::{gnd_all, ground_atoms, Clause};
use crate::engine::search::{candidates, find_conflict, justification, would_conflict};
use crate::lra::{adiff, check_sat, ConstraintStore, Witness};
use crate::terms::{unify, BgLit, Const, FgAtom, FgLit, Subst, Syntax, Term, Var};
use crate::trail::Trail;

/// Ground instances with more foreground atoms than this are refused.
pub const MAX_GROUND_ATOMS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("{atoms} ground atoms exceed the enumeration bound of {MAX_GROUND_ATOMS}")]
    TooLarge { atoms: usize },
    #[error("the pool needs at least {need} constants, got {have}")]
    PoolTooSmall { need: usize, have: usize },
}

// ---- hierarchic resolution ----

fn rename_apart(c1: &Clause, c2: &Clause) -> Clause {
    let taken: BTreeSet<Var> = c1.vars();
    let mut index = 1;
    loop {
        let (renamed, _) = c2.renamed(index);
        if renamed.vars().is_disjoint(&taken) {
            return renamed;
        }
        index += 1;
    }
}

/// Unifiers between abstracted atoms only bind variables to variables.
fn is_simple(s: &Subst) -> bool {
    s.iter().all(|(_, t)| matches!(t, Term::Var(_)))
}

/// Resolves body literal `i` of `c1` with body literal `j` of `c2`
/// (after renaming `c2` apart).
pub fn hres_resolve(c1: &Clause, c2: &Clause, i: usize, j: usize) -> Option<Clause> {
    let c2 = rename_apart(c1, c2);
    let (l, k) = (c1.body().get(i)?, c2.body().get(j)?);
    if l.positive == k.positive {
        return None;
    }
    let s = unify(&l.atom, &k.atom).filter(is_simple)?;
    let constraint = c1.constraint().iter().chain(c2.constraint()).map(|b| b.apply(&s)).collect();
    let body = c1
        .body()
        .iter()
        .enumerate()
        .filter(|(x, _)| *x != i)
        .map(|(_, l)| l)
        .chain(c2.body().iter().enumerate().filter(|(x, _)| *x != j).map(|(_, l)| l))
        .map(|l| l.apply(&s))
        .collect();
    Some(Clause::new(constraint, body))
}

/// Merges body literals `i` and `j`, which must have the same polarity.
pub fn hres_factor(c: &Clause, i: usize, j: usize) -> Option<Clause> {
    let (l, k) = (c.body().get(i)?, c.body().get(j)?);
    if i == j || l.positive != k.positive {
        return None;
    }
    let s = unify(&l.atom, &k.atom).filter(is_simple)?;
    let body = c.body().iter().enumerate().filter(|(x, _)| *x != j).map(|(_, l)| l.apply(&s)).collect();
    Some(Clause::new(c.constraint().iter().map(|b| b.apply(&s)).collect(), body))
}

/// `c` subsumes `d` if some substitution maps the body of `c` into the body
/// of `d` (as multisets) and the constraint of `d` entails that of `c`.
pub fn subsumes(c: &Clause, d: &Clause) -> bool {
    type Matching = BTreeMap<Var, Term>;
    fn extend(c: &Clause, d: &Clause, at: usize, used: &mut Vec<bool>, m: Matching) -> bool {
        if at == c.body().len() {
            if c.constraint().iter().flat_map(|l| l.terms()).any(|t| matches!(t, Term::Var(v) if !m.contains_key(v))) {
                return false;
            }
            let s = Subst::from_pairs(m);
            return c.constraint().iter().all(|l| {
                let mut q = d.constraint().to_vec();
                q.push(l.apply(&s).complement());
                !check_sat(&q).is_sat()
            });
        }
        let l = &c.body()[at];
        for (k, lit) in d.body().iter().enumerate() {
            if used[k] || lit.positive != l.positive || lit.atom.pred != l.atom.pred {
                continue;
            }
            let mut m2 = m.clone();
            let ok = l.atom.args.iter().zip(&lit.atom.args).all(|(a, b)| match a {
                Term::Var(v) => m2.entry(v.clone()).or_insert_with(|| b.clone()) == b,
                Term::Const(_) => a == b,
            });
            if ok {
                used[k] = true;
                if extend(c, d, at + 1, used, m2) {
                    return true;
                }
                used[k] = false;
            }
        }
        false
    }
    c.body().len() <= d.body().len() && extend(c, d, 0, &mut vec![false; d.body().len()], Matching::new())
}

#[derive(Clone, Copy, Debug)]
pub struct SaturationLimit {
    pub max_clauses: usize,
    pub max_size: usize,
    /// Constraint atoms; elimination cost grows quickly past a dozen.
    pub max_constraint: usize,
    pub steps: usize,
}

impl Default for SaturationLimit {
    fn default() -> Self {
        SaturationLimit { max_clauses: 2000, max_size: 6, max_constraint: 10, steps: 200_000 }
    }
}

#[derive(Clone, Debug)]
pub enum HresOutcome {
    /// Carries the derived `Λ || ⊥` with satisfiable `Λ`.
    Unsatisfiable(Clause),
    SaturatedBounded(Vec<Clause>),
    Unknown,
}

/// Breadth-first closure under resolution and factoring. Clauses with an
/// unsatisfiable constraint or subsumed by a kept clause are dropped; so
/// are resolvents over `max_size` literals or `max_constraint` atoms, and
/// any such pruning turns a saturated answer into `Unknown`.
pub fn hres_saturate(n: &[Clause], limits: SaturationLimit) -> HresOutcome {
    let mut kept: Vec<Clause> = Vec::new();
    let mut queue: VecDeque<Clause> = n.iter().cloned().collect();
    let mut steps = 0;
    let mut pruned = false;
    while let Some(c) = queue.pop_front() {
        if !check_sat(c.constraint()).is_sat() || kept.iter().any(|k| subsumes(k, &c)) {
            continue;
        }
        if c.is_empty_body() {
            return HresOutcome::Unsatisfiable(c);
        }
        kept.retain(|k| !subsumes(&c, k));
        let mut fresh = Vec::new();
        for i in 0..c.body().len() {
            for j in i + 1..c.body().len() {
                fresh.extend(hres_factor(&c, i, j));
            }
        }
        for k in kept.iter().chain(std::iter::once(&c)) {
            for i in 0..c.body().len() {
                for j in 0..k.body().len() {
                    fresh.extend(hres_resolve(&c, k, i, j));
                }
            }
        }
        kept.push(c);
        for f in fresh {
            steps += 1;
            if f.body().len() > limits.max_size || f.constraint().len() > limits.max_constraint {
                pruned = true;
            } else {
                queue.push_back(f);
            }
        }
        if steps > limits.steps || kept.len() + queue.len() > limits.max_clauses {
            return HresOutcome::Unknown;
        }
    }
    if pruned {
        HresOutcome::Unknown
    } else {
        HresOutcome::SaturatedBounded(kept)
    }
}

// ---- ground oracle ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundVerdict {
    /// Some valuation of the pool consistent with `adiff(B)` activates a
    /// propositionally unsatisfiable set of ground instances.
    Unsatisfiable { witness: Witness },
    /// Every valuation leaves a satisfying assignment.
    SatisfiableOverB,
}

impl GroundVerdict {
    pub fn is_unsat(&self) -> bool {
        matches!(self, GroundVerdict::Unsatisfiable { .. })
    }
}

struct Ground {
    atoms: Vec<FgAtom>,
    /// constraint, body as (atom index, polarity)
    clauses: Vec<(Vec<BgLit>, Vec<(usize, bool)>)>,
}

impl Ground {
    fn new(n: &[Clause], pool: &[Const], base: &[BgLit]) -> Result<Ground, VerifyError> {
        let ground: Vec<Clause> = gnd_all(n, pool)
            .into_iter()
            .filter(|c| {
                let mut q = base.to_vec();
                q.extend(c.constraint().iter().cloned());
                check_sat(&q).is_sat()
            })
            .collect();
        let atoms: Vec<FgAtom> = ground_atoms(&ground).into_iter().collect();
        if atoms.len() > MAX_GROUND_ATOMS {
            return Err(VerifyError::TooLarge { atoms: atoms.len() });
        }
        let index = |a: &FgAtom| atoms.iter().position(|b| b == a).unwrap();
        let clauses = ground
            .iter()
            .map(|c| (c.constraint().to_vec(), c.body().iter().map(|l| (index(&l.atom), l.positive)).collect()))
            .collect();
        Ok(Ground { atoms, clauses })
    }

    fn violated(&self, assignment: &[bool]) -> Vec<usize> {
        (0..self.clauses.len()).filter(|&i| self.clauses[i].1.iter().all(|&(a, p)| assignment[a] != p)).collect()
    }

    /// Depth-first search for a foreground assignment and a valuation in
    /// which every violated instance has a false constraint. `active`
    /// restricts attention to a subset of instances and treats their
    /// constraints as true.
    fn find_model(&self, base: &[BgLit], active: Option<&[bool]>) -> Option<Vec<bool>> {
        let mut store = ConstraintStore::new();
        for b in base {
            if !store.push(b.clone()) {
                return None;
            }
        }
        let considered = |i: usize| active.map_or(true, |a| a[i]);
        // clauses become decided once their last atom is assigned
        let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); self.atoms.len() + 1];
        for (i, (_, body)) in self.clauses.iter().enumerate() {
            if considered(i) {
                let last = body.iter().map(|&(a, _)| a + 1).max().unwrap_or(0);
                by_last[last].push(i);
            }
        }
        let mut assignment = vec![false; self.atoms.len()];
        let fixed = active.is_some();
        if self.deactivate(&by_last[0], 0, &mut store, fixed, &assignment) && self.assign(0, &by_last, &mut assignment, &mut store, fixed) {
            Some(assignment)
        } else {
            None
        }
    }

    fn assign(&self, at: usize, by_last: &[Vec<usize>], assignment: &mut Vec<bool>, store: &mut ConstraintStore, fixed: bool) -> bool {
        if at == self.atoms.len() {
            return true;
        }
        for value in [true, false] {
            assignment[at] = value;
            let depth = store.depth();
            if self.deactivate(&by_last[at + 1], 0, store, fixed, assignment) && self.assign(at + 1, by_last, assignment, store, fixed) {
                return true;
            }
            store.pop(store.depth() - depth);
        }
        false
    }

    /// Makes the constraint of every violated clause in `pending[from..]`
    /// false by asserting the complement of one of its literals.
    fn deactivate(&self, pending: &[usize], from: usize, store: &mut ConstraintStore, fixed: bool, assignment: &[bool]) -> bool {
        let Some(&i) = pending.get(from) else { return true };
        let (constraint, body) = &self.clauses[i];
        if body.iter().any(|&(a, p)| assignment[a] == p) {
            return self.deactivate(pending, from + 1, store, fixed, assignment);
        }
        if fixed {
            return false;
        }
        for l in constraint {
            let c = l.complement();
            if store.check_with(std::slice::from_ref(&c)) {
                store.push(c);
                if self.deactivate(pending, from + 1, store, fixed, assignment) {
                    return true;
                }
                store.pop(1);
            }
        }
        false
    }

    fn active_at(&self, w: &Witness) -> Vec<bool> {
        let value = |t: &Term| Some(w.get(t).cloned().unwrap_or_default());
        self.clauses.iter().map(|(c, _)| c.iter().all(|l| l.eval(&value) == Some(true))).collect()
    }

    /// A valuation under which every listed set has an active member.
    fn hitting_valuation(&self, base: &[BgLit], sets: &[Vec<usize>]) -> Option<Witness> {
        fn go(g: &Ground, sets: &[Vec<usize>], at: usize, store: &mut ConstraintStore) -> bool {
            let Some(set) = sets.get(at) else { return true };
            for &i in set {
                let depth = store.depth();
                let ok = g.clauses[i].0.iter().all(|l| store.contains(l) || store.push(l.clone()));
                if ok && go(g, sets, at + 1, store) {
                    return true;
                }
                store.pop(store.depth() - depth);
            }
            false
        }
        let mut store = ConstraintStore::new();
        for b in base {
            if !store.push(b.clone()) {
                return None;
            }
        }
        go(self, sets, 0, &mut store).then(|| store.witness().unwrap_or_default())
    }
}

/// Decides whether some valuation of `pool` (ordered by `adiff`) makes the
/// active ground instances of `n` propositionally unsatisfiable. Alternates
/// between proposing a valuation that falsifies every assignment seen so
/// far and looking for an assignment that survives it.
pub fn ground_unsat_check(n: &[Clause], pool: &[Const]) -> Result<GroundVerdict, VerifyError> {
    let base = adiff(pool).unwrap_or_default();
    let g = Ground::new(n, pool, &base)?;
    let mut seen: Vec<Vec<usize>> = Vec::new();
    loop {
        let Some(w) = g.hitting_valuation(&base, &seen) else { return Ok(GroundVerdict::SatisfiableOverB) };
        let active = g.active_at(&w);
        match g.find_model(&[], Some(&active)) {
            None => return Ok(GroundVerdict::Unsatisfiable { witness: w }),
            Some(a) => {
                let v = g.violated(&a);
                if v.is_empty() {
                    return Ok(GroundVerdict::SatisfiableOverB);
                }
                seen.push(v);
            }
        }
    }
}

/// Whether some valuation and assignment satisfy every ground instance.
pub fn model_exists(n: &[Clause], pool: &[Const]) -> Result<bool, VerifyError> {
    let base = adiff(pool).unwrap_or_default();
    let g = Ground::new(n, pool, &base)?;
    Ok(g.find_model(&base, None).is_some())
}

/// `gnd_B(n) ⊨ gnd_B(c)` under every valuation respecting `adiff(B)`.
pub fn entails(n: &[Clause], pool: &[Const], c: &Clause) -> Result<bool, VerifyError> {
    for inst in gnd_all(std::slice::from_ref(c), pool) {
        let mut base = adiff(pool).unwrap_or_default();
        base.extend(inst.constraint().iter().cloned());
        if !check_sat(&base).is_sat() {
            continue;
        }
        let mut with_neg = n.to_vec();
        with_neg.extend(inst.body().iter().map(|l| Clause::new(Vec::new(), vec![l.complement()])));
        let g = Ground::new(&with_neg, pool, &base)?;
        if g.find_model(&base, None).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---- saturation ----

/// A conflict-search step, replayable through the engine's manual API.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplayStep {
    Propagate { clause: usize, subst: Subst },
    Decide(FgLit),
}

impl fmt::Display for ReplayStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayStep::Propagate { clause, subst } => write!(f, "Propagate clause#{clause} {subst}"),
            ReplayStep::Decide(l) => write!(f, "Decide {l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictWitness {
    pub steps: Vec<ReplayStep>,
    pub clause: usize,
    pub subst: Subst,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Saturation {
    Saturated,
    NotSaturated(ConflictWitness),
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationReport {
    pub verdict: Saturation,
    /// Distinct trail states visited.
    pub explored: usize,
}

/// Above this many distinct trail states the check reports `Unknown`.
pub const SATURATION_NODE_LIMIT: usize = 200_000;

/// Explores every regular sequence of Propagate and Decide over `pool` and
/// reports whether any of them enables Conflict. A decision is regular if no
/// pending propagation would conflict and the decided literal does not
/// falsify a clause instance itself.
pub fn check_saturated(n: &[Clause], u: &[Clause], pool: &[Const]) -> Result<SaturationReport, VerifyError> {
    let mut clauses = n.to_vec();
    clauses.extend_from_slice(u);
    let need = 2 * clauses.iter().map(|c| c.vars().len()).max().unwrap_or(0);
    if pool.len() < need {
        return Err(VerifyError::PoolTooSmall { need, have: pool.len() });
    }
    let atoms = crate::engine::search::atom_universe(&clauses, pool);
    let mut seen: HashSet<(BTreeSet<FgLit>, BTreeSet<BgLit>)> = HashSet::new();
    let mut steps = Vec::new();
    let trail = Trail::new(pool, true);
    let verdict = dfs(&clauses, pool, &atoms, trail, &mut steps, &mut seen);
    Ok(SaturationReport { verdict, explored: seen.len() })
}

fn dfs(
    clauses: &[Clause],
    pool: &[Const],
    atoms: &[FgAtom],
    trail: Trail,
    steps: &mut Vec<ReplayStep>,
    seen: &mut HashSet<(BTreeSet<FgLit>, BTreeSet<BgLit>)>,
) -> Saturation {
    let key = (trail.fgd().cloned().collect(), trail.bgd().cloned().collect());
    if !seen.insert(key) {
        return Saturation::Saturated;
    }
    if seen.len() > SATURATION_NODE_LIMIT {
        return Saturation::Unknown;
    }
    if let Some((clause, subst)) = find_conflict(clauses, &trail, pool) {
        return Saturation::NotSaturated(ConflictWitness { steps: steps.clone(), clause, subst });
    }
    let mut unknown = false;
    let mut branches: Vec<(ReplayStep, Trail)> = Vec::new();
    let cands = candidates(clauses, &trail, pool);
    for cand in &cands {
        let mut next = trail.clone();
        next.push_propagation(cand.lit.clone(), justification(clauses, cand), cand.clause, &cand.bg);
        branches.push((ReplayStep::Propagate { clause: cand.clause, subst: cand.subst.clone() }, next));
    }
    let reasonable = !cands.iter().any(|c| would_conflict(clauses, &trail, pool, &c.lit, &c.bg));
    for a in atoms.iter().filter(|a| reasonable && trail.position(a).is_none()) {
        for lit in [FgLit::pos(a.clone()), FgLit::neg(a.clone())] {
            if would_conflict(clauses, &trail, pool, &lit, &[]) {
                continue;
            }
            let mut next = trail.clone();
            next.push_decision(lit.clone(), &[]);
            branches.push((ReplayStep::Decide(lit), next));
        }
    }
    for (step, next) in branches {
        steps.push(step);
        match dfs(clauses, pool, atoms, next, steps, seen) {
            Saturation::Saturated => {}
            Saturation::Unknown => unknown = true,
            found => return found,
        }
        steps.pop();
        if unknown {
            break;
        }
    }
    if unknown {
        Saturation::Unknown
    } else {
        Saturation::Saturated
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_problem;

    fn clauses(text: &str) -> Vec<Clause> {
        parse_problem(text).unwrap().clauses
    }

    fn pool(n: usize) -> Vec<Const> {
        ["a", "b", "c", "d", "e", "f"][..n].iter().map(|k| Const::new(k)).collect()
    }

    const REFUTATION: &str = "pred P/1\nx = 0 || P(x)\ny = x + 1 || ~P(x) | P(y)\nz = 2 || ~P(z)\n";

    #[test]
    fn resolve_and_factor() {
        let cs = clauses("pred P/1\nx = 0 || P(x)\nz = 2 || ~P(z)\ny = x + 1 || ~P(x) | P(y)");
        let r = hres_resolve(&cs[0], &cs[1], 0, 0).unwrap();
        assert!(r.is_empty_body());
        assert!(!check_sat(r.constraint()).is_sat());
        let r = hres_resolve(&cs[0], &cs[2], 0, 0).unwrap();
        assert!(r.variant_of(&clauses("pred P/1\nx = 0, y = x + 1 || P(y)")[0]), "{r}");
        let q = clauses("pred P/1, Q/1\ntrue || P(x) | Q(y)");
        assert!(hres_resolve(&cs[0], &q[0], 0, 1).is_none());

        let f = clauses("pred P/1\ntrue || P(x) | P(y)");
        assert!(hres_factor(&f[0], 0, 1).unwrap().variant_of(&clauses("pred P/1\ntrue || P(x)")[0]));
        let g = clauses("pred P/2\nx >= y, z = u + v || ~P(x, y) | ~P(u, v)");
        let expected = clauses("pred P/2\nx >= y, z = x + y || ~P(x, y)");
        assert!(hres_factor(&g[0], 0, 1).unwrap().variant_of(&expected[0]));
        let h = clauses("pred P/1\ntrue || P(x) | ~P(y)");
        assert!(hres_factor(&h[0], 0, 1).is_none());
    }

    #[test]
    fn saturate() {
        assert!(matches!(hres_saturate(&clauses(REFUTATION), SaturationLimit::default()), HresOutcome::Unsatisfiable(_)));
        assert!(matches!(hres_saturate(&clauses("pred P/1\ntrue || P(x)"), SaturationLimit::default()), HresOutcome::SaturatedBounded(_)));
    }

    #[test]
    fn subsumption() {

        let cs = clauses("pred P/1, Q/1\nx >= 0 || P(x)\nx >= 1 || P(x) | Q(x)\nx >= -1 || P(x)");
        assert!(subsumes(&cs[0], &cs[1]));
        assert!(!subsumes(&cs[0], &cs[2]));
        assert!(subsumes(&cs[2], &cs[0]));
    }

    #[test]
    fn ground_oracle() {
        assert!(ground_unsat_check(&clauses(REFUTATION), &pool(3)).unwrap().is_unsat());
        assert!(!ground_unsat_check(&clauses(REFUTATION), &pool(2)).unwrap().is_unsat());
        let model = "pred P/1, Q/1\nx >= 1 || P(x)\nx < 0 || P(x)\n0 <= x, x < 1 || ~P(x)\n2x >= 1 || P(x) | Q(x)\n";
        assert_eq!(ground_unsat_check(&clauses(model), &pool(3)).unwrap(), GroundVerdict::SatisfiableOverB);
        assert_eq!(ground_unsat_check(&[], &pool(1)).unwrap(), GroundVerdict::SatisfiableOverB);
        assert!(model_exists(&clauses(model), &pool(3)).unwrap());
        let big = clauses("pred P/3\ntrue || P(x, y, z)");
        assert!(matches!(ground_unsat_check(&big, &pool(3)), Err(VerifyError::TooLarge { .. })));
    }

    #[test]
    fn entailment() {
        let cs = clauses(REFUTATION);
        let fact = clauses("pred P/1\ny = x + 1, x = 0 || P(y)");
        assert!(entails(&cs, &pool(2), &fact[0]).unwrap());
        let wrong = clauses("pred P/1\nx = 3 || P(x)");
        assert!(!entails(&cs, &pool(2), &wrong[0]).unwrap());
    }

    #[test]
    fn saturation_examples() {
        let r = check_saturated(&clauses("pred P/1\ntrue || P(x)"), &[], &pool(2)).unwrap();
        assert_eq!(r.verdict, Saturation::Saturated);
        let r = check_saturated(&clauses("pred P/1\ntrue || P(x)\ntrue || ~P(y)"), &[], &pool(2)).unwrap();
        let Saturation::NotSaturated(w) = r.verdict else { panic!() };
        assert_eq!(w.steps.len(), 1);
        assert!(matches!(check_saturated(&clauses(REFUTATION), &[], &pool(4)).unwrap().verdict, Saturation::NotSaturated(_)));
        let two = clauses("pred P/2\ntrue || P(x, y)");
        assert_eq!(check_saturated(&two, &[], &pool(3)).unwrap_err(), VerifyError::PoolTooSmall { need: 4, have: 3 });
    }
}
