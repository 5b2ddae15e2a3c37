//! Constrained clauses `L1, ..., Lk || C1 | ... | Cn` and the syntactic
//! operations on them: abstraction, purity, grounding over a constant pool,
//! subsumption, and the subset-based redundancy test.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::lra::check_sat;
use crate::terms::{BgLit, Const, FgAtom, FgLit, InputRel, LinExpr, Literal, Pred, Subst, Syntax, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClauseError {
    #[error("clause is not pure: foreground constant `{0}` ranges into the arithmetic sort")]
    Impure(String),
}

/// `constraint || body`: a conjunction of background literals guarding a
/// disjunction of foreground literals. The constraint is kept sorted and
/// duplicate-free; the body is a multiset and keeps duplicates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    constraint: Vec<BgLit>,
    body: Vec<FgLit>,
}

impl Clause {
    pub fn new(constraint: Vec<BgLit>, body: Vec<FgLit>) -> Self {
        let mut constraint = constraint;
        constraint.sort();
        constraint.dedup();
        Clause { constraint, body }
    }

    pub fn constraint(&self) -> &[BgLit] {
        &self.constraint
    }

    pub fn body(&self) -> &[FgLit] {
        &self.body
    }

    pub fn is_empty_body(&self) -> bool {
        self.body.is_empty()
    }

    pub fn apply(&self, subst: &Subst) -> Clause {
        Clause::new(
            self.constraint.iter().map(|l| l.apply(subst)).collect(),
            self.body.iter().map(|l| l.apply(subst)).collect(),
        )
    }

    /// Same clause with the body sorted, for set-level comparisons.
    pub fn canonical(&self) -> Clause {
        let mut body = self.body.clone();
        body.sort();
        Clause { constraint: self.constraint.clone(), body }
    }

    pub fn is_pure(&self) -> bool {
        self.impure_constant().is_none()
    }

    fn impure_constant(&self) -> Option<Const> {
        let consts = self
            .constraint
            .iter()
            .flat_map(|l| l.terms())
            .chain(self.body.iter().flat_map(|l| l.atom.args.iter()));
        consts.filter_map(|t| t.as_const()).next().cloned()
    }

    pub fn is_abstracted(&self) -> bool {
        self.body.iter().all(|l| l.atom.args.iter().all(|t| matches!(t, Term::Var(_))))
    }

    /// Equal up to a bijective renaming of variables and body order.
    pub fn variant_of(&self, other: &Clause) -> bool {
        let mine: Vec<Var> = self.vars().into_iter().collect();
        let theirs: Vec<Var> = other.vars().into_iter().collect();
        if mine.len() != theirs.len() || self.body.len() != other.body.len() || self.constraint.len() != other.constraint.len() {
            return false;
        }
        let target = other.canonical();
        let mut used = vec![false; theirs.len()];
        let mut pairs = Vec::new();
        fn search(c: &Clause, mine: &[Var], theirs: &[Var], used: &mut [bool], pairs: &mut Vec<(Var, Term)>, target: &Clause) -> bool {
            if pairs.len() == mine.len() {
                return c.apply(&Subst::from_pairs(pairs.iter().cloned())).canonical() == *target;
            }
            for j in 0..theirs.len() {
                if !used[j] {
                    used[j] = true;
                    pairs.push((mine[pairs.len()].clone(), Term::Var(theirs[j].clone())));
                    if search(c, mine, theirs, used, pairs, target) {
                        return true;
                    }
                    pairs.pop();
                    used[j] = false;
                }
            }
            false
        }
        search(self, &mine, &theirs, &mut used, &mut pairs, &target)
    }

    /// Renames every variable to a fresh copy with the given index.
    pub fn renamed(&self, index: u32) -> (Clause, Subst) {
        let renaming = Subst::from_pairs(self.vars().into_iter().map(|v| {
            let fresh = v.with_index(index);
            (v, Term::Var(fresh))
        }));
        (self.apply(&renaming), renaming)
    }

    /// All literals, background first, as seen by the H-order.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.constraint.iter().cloned().map(Literal::Bg).chain(self.body.iter().cloned().map(Literal::Fg))
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&Pred, usize)> {
        self.body.iter().map(|l| (&l.atom.pred, l.atom.args.len()))
    }
}

impl Syntax for Clause {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.constraint.collect_vars(out);
        self.body.collect_vars(out);
    }

    fn collect_cons(&self, out: &mut BTreeSet<crate::terms::ConstSym>) {
        self.constraint.collect_cons(out);
        self.body.collect_cons(out);
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constraint.is_empty() {
            f.write_str("true")?;
        }
        for (i, l) in self.constraint.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(" || ")?;
        if self.body.is_empty() {
            f.write_str("false")?;
        }
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A clause paired with a grounding substitution; denotes the ground
/// instance `clause . subst`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Closure {
    pub clause: Clause,
    pub subst: Subst,
}

impl Closure {
    pub fn new(clause: Clause, subst: Subst) -> Self {
        let subst = subst.restrict(&clause.vars());
        Closure { clause, subst }
    }

    pub fn ground(&self) -> Clause {
        self.clause.apply(&self.subst)
    }

    pub fn ground_body(&self) -> Vec<FgLit> {
        self.clause.body.iter().map(|l| l.apply(&self.subst)).collect()
    }

    pub fn ground_constraint(&self) -> Vec<BgLit> {
        self.clause.constraint.iter().map(|l| l.apply(&self.subst)).collect()
    }
}

impl fmt::Debug for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) . {}", self.clause, self.subst)
    }
}

/// A foreground literal before abstraction: arguments are linear terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RawLit {
    pub positive: bool,
    pub pred: Pred,
    pub args: Vec<LinExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RawClause {
    pub constraint: Vec<BgLit>,
    pub body: Vec<RawLit>,
}

const FRESH_NAMES: [&str; 5] = ["y", "z", "w", "u", "v"];

fn fresh_var(taken: &mut BTreeSet<Var>) -> Var {
    let candidates = FRESH_NAMES
        .iter()
        .map(|n| n.to_string())
        .chain((1..).flat_map(|i| FRESH_NAMES.iter().map(move |n| format!("{n}{i}"))));
    for name in candidates {
        let v = Var::new(&name);
        if taken.insert(v.clone()) {
            return v;
        }
    }
    unreachable!("infinitely many candidates")
}

/// Replaces every non-variable foreground argument `t` by a fresh variable
/// `z` and adds `z = t` to the constraint.
pub fn abstract_clause(raw: &RawClause) -> Result<Clause, ClauseError> {
    let mut taken: BTreeSet<Var> = raw.constraint.vars();
    for l in &raw.body {
        for a in &l.args {
            a.terms().for_each(|t| {
                if let Term::Var(v) = t {
                    taken.insert(v.clone());
                }
            });
        }
    }
    let all_terms = raw.constraint.iter().flat_map(|l| l.terms()).chain(raw.body.iter().flat_map(|l| l.args.iter().flat_map(|a| a.terms())));
    for t in all_terms {
        if let Term::Const(c) = t {
            return Err(ClauseError::Impure(c.name().to_string()));
        }
    }
    let mut constraint = raw.constraint.clone();
    let mut body = Vec::with_capacity(raw.body.len());
    for l in &raw.body {
        let mut args = Vec::with_capacity(l.args.len());
        for a in &l.args {
            match a.as_term() {
                Some(t @ Term::Var(_)) => args.push(t.clone()),
                _ => {
                    let z = fresh_var(&mut taken);
                    constraint.push(BgLit::new(&LinExpr::term(Term::Var(z.clone())), InputRel::Eq, a));
                    args.push(Term::Var(z));
                }
            }
        }
        body.push(FgLit { positive: l.positive, atom: FgAtom { pred: l.pred.clone(), args } });
    }
    Ok(Clause::new(constraint, body))
}

pub fn check_pure(clauses: &[Clause]) -> Result<(), ClauseError> {
    for c in clauses {
        if let Some(k) = c.impure_constant() {
            return Err(ClauseError::Impure(k.name().to_string()));
        }
    }
    Ok(())
}

pub fn is_pure(clauses: &[Clause]) -> bool {
    check_pure(clauses).is_ok()
}

/// Every grounding of `vars` over `pool`, in lexicographic pool order with
/// the first variable varying slowest.
pub fn groundings(vars: &[Var], pool: &[Const]) -> Vec<Subst> {
    if vars.is_empty() {
        return vec![Subst::new()];
    }
    if pool.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        out.push(Subst::from_pairs(vars.iter().zip(&idx).map(|(v, &i)| (v.clone(), Term::Const(pool[i].clone())))));
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < pool.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `gnd_B(c)`: the distinct ground instances over `pool`, canonicalized.
pub fn gnd(clause: &Clause, pool: &[Const]) -> Vec<Clause> {
    let vars: Vec<Var> = clause.vars().into_iter().collect();
    let set: BTreeSet<Clause> = groundings(&vars, pool).iter().map(|s| clause.apply(s).canonical()).collect();
    set.into_iter().collect()
}

pub fn gnd_all(clauses: &[Clause], pool: &[Const]) -> Vec<Clause> {
    let set: BTreeSet<Clause> = clauses.iter().flat_map(|c| gnd(c, pool)).collect();
    set.into_iter().collect()
}

/// Ground foreground atoms of a set of ground clauses.
pub fn ground_atoms(ground: &[Clause]) -> BTreeSet<FgAtom> {
    ground.iter().flat_map(|c| c.body.iter().map(|l| l.atom.clone())).collect()
}

fn multiset_contains(big: &[FgLit], small: &[FgLit]) -> bool {
    let mut counts: HashMap<&FgLit, isize> = HashMap::new();
    for l in big {
        *counts.entry(l).or_default() += 1;
    }
    for l in small {
        let e = counts.entry(l).or_default();
        *e -= 1;
        if *e < 0 {
            return false;
        }
    }
    true
}

/// `c1` subsumes `c2` (both ground): constraint subset and body sub-multiset.
pub fn subsumes_ground(c1: &Clause, c2: &Clause) -> bool {
    c1.constraint.iter().all(|l| c2.constraint.contains(l)) && multiset_contains(&c2.body, &c1.body)
}

/// True iff the ground clause is valid for trivial reasons: its constraint
/// is unsatisfiable or its body holds a complementary pair.
pub fn is_semantic_tautology(c: &Clause) -> bool {
    if !check_sat(&c.constraint).is_sat() {
        return true;
    }
    let lits: BTreeSet<&FgLit> = c.body.iter().collect();
    c.body.iter().any(|l| lits.contains(&l.complement()))
}

/// Decidable redundancy test: `c` is a tautology or some `d` in `n` with
/// `d <= c` in the given order subsumes it.
pub fn is_redundant_subset(c: &Clause, n: &[Clause], order: &HOrder) -> bool {
    is_semantic_tautology(c)
        || n.iter().any(|d| order.clause_cmp(d, c) != Ordering::Greater && subsumes_ground(d, c))
}

/// Ordering key of a ground literal; background literals sort first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum OrderKey {
    Background(BgLit),
    Defined(usize, bool),
    Undefined(FgAtom, bool),
}

/// A total order on ground literals induced by trail positions: background
/// literals are smallest, then defined foreground literals by position,
/// then undefined ones (lexicographically among themselves).
#[derive(Clone, Debug, Default)]
pub struct HOrder {
    positions: HashMap<FgAtom, usize>,
}

impl HOrder {
    pub fn from_positions<I: IntoIterator<Item = FgAtom>>(atoms: I) -> Self {
        HOrder { positions: atoms.into_iter().enumerate().map(|(i, a)| (a, i)).collect() }
    }

    fn key(&self, l: &Literal) -> OrderKey {
        match l {
            Literal::Bg(b) => OrderKey::Background(b.clone()),
            Literal::Fg(f) => match self.positions.get(&f.atom) {
                Some(&i) => OrderKey::Defined(i, !f.positive),
                None => OrderKey::Undefined(f.atom.clone(), !f.positive),
            },
        }
    }

    pub fn lit_cmp(&self, a: &Literal, b: &Literal) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }

    /// Multiset extension: compare the descending-sorted literal keys.
    pub fn clause_cmp(&self, a: &Clause, b: &Clause) -> Ordering {
        let sorted = |c: &Clause| {
            let mut keys: Vec<OrderKey> = c.literals().map(|l| self.key(&l)).collect();
            keys.sort_by(|x, y| y.cmp(x));
            keys
        };
        sorted(a).cmp(&sorted(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::rat;

    fn v(n: &str) -> LinExpr {
        LinExpr::term(Term::var(n))
    }

    fn k(q: i64) -> LinExpr {
        LinExpr::constant(rat(q))
    }

    fn gc(n: &str) -> LinExpr {
        LinExpr::term(Term::cnst(n))
    }

    fn lit(pos: bool, p: &str, args: &[Term]) -> FgLit {
        FgLit { positive: pos, atom: FgAtom::new(p, args.to_vec()) }
    }

    fn pool(names: &[&str]) -> Vec<Const> {
        names.iter().map(|n| Const::new(n)).collect()
    }

    #[test]
    fn abstraction_lifts_numerals() {
        let raw = RawClause {
            constraint: vec![BgLit::new(&v("x"), InputRel::Gt, &k(1))],
            body: vec![RawLit { positive: true, pred: Pred::new("R"), args: vec![v("x"), k(5)] }],
        };
        let got = abstract_clause(&raw).unwrap();
        let expected = Clause::new(
            vec![BgLit::new(&v("x"), InputRel::Gt, &k(1)), BgLit::new(&v("y"), InputRel::Eq, &k(5))],
            vec![lit(true, "R", &[Term::var("x"), Term::var("y")])],
        );
        assert_eq!(got, expected);
        assert!(got.is_abstracted());

        // already abstracted: unchanged
        let raw = RawClause {
            constraint: vec![BgLit::new(&v("x"), InputRel::Eq, &k(0))],
            body: vec![RawLit { positive: true, pred: Pred::new("P"), args: vec![v("x")] }],
        };
        let c = abstract_clause(&raw).unwrap();
        assert_eq!(c, Clause::new(raw.constraint.clone(), vec![lit(true, "P", &[Term::var("x")])]));

        // || Q(3x + 4)  ==>  y = 3x + 4 || Q(y)
        let mut arg = v("x").scaled(&rat(3));
        arg.add_constant(&rat(4));
        let raw = RawClause { constraint: vec![], body: vec![RawLit { positive: true, pred: Pred::new("Q"), args: vec![arg.clone()] }] };
        let c = abstract_clause(&raw).unwrap();
        assert_eq!(c, Clause::new(vec![BgLit::new(&v("y"), InputRel::Eq, &arg)], vec![lit(true, "Q", &[Term::var("y")])]));
    }

    #[test]
    fn abstraction_rejects_impure_input() {
        let raw = RawClause {
            constraint: vec![BgLit::new(&v("x"), InputRel::Eq, &gc("a"))],
            body: vec![RawLit { positive: true, pred: Pred::new("P"), args: vec![v("x")] }],
        };
        assert_eq!(abstract_clause(&raw), Err(ClauseError::Impure("a".into())));
    }

    #[test]
    fn purity_examples() {
        // x >= 5, 3x + 4y = z || Q(x,y,z)
        let mut lhs = v("x").scaled(&rat(3));
        lhs.add_scaled(&v("y"), &rat(4));
        let q = lit(true, "Q", &[Term::var("x"), Term::var("y"), Term::var("z")]);
        let pure = Clause::new(vec![BgLit::new(&v("x"), InputRel::Ge, &k(5)), BgLit::new(&lhs, InputRel::Eq, &v("z"))], vec![q.clone()]);
        assert!(is_pure(&[pure]));
        let impure = Clause::new(
            vec![
                BgLit::new(&v("x"), InputRel::Ge, &k(5)),
                BgLit::new(&lhs, InputRel::Eq, &gc("a")),
                BgLit::new(&v("z"), InputRel::Eq, &gc("a")),
            ],
            vec![q],
        );
        assert!(!is_pure(&[impure]));
        assert!(is_pure(&[]));
    }

    #[test]
    fn grounding_counts() {
        let c = Clause::new(vec![BgLit::new(&v("x"), InputRel::Eq, &k(0))], vec![lit(true, "P", &[Term::var("x")])]);
        let g = gnd(&c, &pool(&["a"]));
        assert_eq!(g, vec![Clause::new(vec![BgLit::new(&gc("a"), InputRel::Eq, &k(0))], vec![lit(true, "P", &[Term::cnst("a")])])]);

        let c = Clause::new(vec![], vec![lit(true, "P", &[Term::var("x")]), lit(true, "Q", &[Term::var("y")])]);
        assert_eq!(gnd(&c, &pool(&["a", "b"])).len(), 4);

        let d = Clause::new(vec![], vec![lit(true, "P", &[Term::cnst("d")])]);
        assert_eq!(gnd(&d, &pool(&["a", "b", "c"])), vec![d.clone()]);
        assert!(gnd(&c, &[]).is_empty());
    }

    #[test]
    fn ground_subsumption() {
        let pa = lit(true, "P", &[Term::cnst("a")]);
        let qb = lit(true, "Q", &[Term::cnst("b")]);
        let a0 = BgLit::new(&gc("a"), InputRel::Eq, &k(0));
        let b1 = BgLit::new(&gc("b"), InputRel::Eq, &k(1));
        let c1 = Clause::new(vec![a0.clone()], vec![pa.clone()]);
        let c2 = Clause::new(vec![a0.clone(), b1], vec![pa.clone(), qb]);
        assert!(subsumes_ground(&c1, &c2));
        let c3 = Clause::new(vec![a0], vec![lit(true, "Q", &[Term::cnst("a")])]);
        assert!(!subsumes_ground(&c1, &c3));
        let dup = Clause::new(vec![], vec![pa.clone(), pa.clone()]);
        let single = Clause::new(vec![], vec![pa]);
        assert!(!subsumes_ground(&dup, &single));
        assert!(subsumes_ground(&single, &dup));
    }

    #[test]
    fn tautologies() {
        let pa = lit(true, "P", &[Term::cnst("a")]);
        let aa = BgLit::new(&gc("a"), InputRel::Lt, &gc("a"));
        assert!(is_semantic_tautology(&Clause::new(vec![aa.clone()], vec![pa.clone()])));
        assert!(is_semantic_tautology(&Clause::new(vec![], vec![pa.clone(), pa.complement()])));
        assert!(!is_semantic_tautology(&Clause::new(vec![BgLit::new(&gc("a"), InputRel::Eq, &k(0))], vec![pa.clone()])));

        let order = HOrder::default();
        let c = Clause::new(vec![], vec![pa]);
        assert!(is_redundant_subset(&c, &[c.clone()], &order));
        assert!(is_redundant_subset(&Clause::new(vec![aa], vec![]), &[], &order));
        assert!(!is_redundant_subset(&c, &[], &order));
    }

    #[test]
    fn trail_induced_order() {
        let pa = FgAtom::new("P", vec![Term::cnst("a")]);
        let qb = FgAtom::new("Q", vec![Term::cnst("b")]);
        let rc = FgAtom::new("R", vec![Term::cnst("c")]);
        let order = HOrder::from_positions([pa.clone(), qb.clone()]);
        let l = |a: &FgAtom| Literal::Fg(FgLit::pos(a.clone()));
        assert_eq!(order.lit_cmp(&l(&pa), &l(&qb)), Ordering::Less);
        assert_eq!(order.lit_cmp(&l(&qb), &l(&rc)), Ordering::Less);
        let bg = Literal::Bg(BgLit::new(&gc("a"), InputRel::Eq, &k(0)));
        assert_eq!(order.lit_cmp(&bg, &l(&pa)), Ordering::Less);
    }
}
