//! The trail `M`: annotated ground literals with decision levels and a
//! paired constraint store holding `adiff(B) ∧ bgd(M)`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::clauses::{Clause, Closure, HOrder};
use crate::lra::{adiff, ConstraintStore, Witness};
use crate::terms::{BgLit, Const, FgAtom, FgLit};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Annotation {
    Decision(usize),
    /// `clause` indexes `N ++ U` for reporting.
    Propagation { closure: Closure, clause: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrailEntry {
    Fg { lit: FgLit, ann: Annotation, level: usize },
    /// `owner` is the position of the foreground entry that introduced it.
    Bg { lit: BgLit, owner: usize },
}

impl TrailEntry {
    pub fn fg(&self) -> Option<&FgLit> {
        match self {
            TrailEntry::Fg { lit, .. } => Some(lit),
            TrailEntry::Bg { .. } => None,
        }
    }

    pub fn is_decision(&self) -> bool {
        matches!(self, TrailEntry::Fg { ann: Annotation::Decision(_), .. })
    }
}

impl fmt::Display for TrailEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrailEntry::Fg { lit, ann: Annotation::Decision(k), .. } => write!(f, "{lit}@dec({k})"),
            TrailEntry::Fg { lit, ann: Annotation::Propagation { closure, clause }, .. } => {
                write!(f, "{lit}@prop(clause#{clause}, {})", closure.subst)
            }
            TrailEntry::Bg { lit, .. } => write!(f, "bg: {lit}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eval {
    True,
    False,
    Undefined,
}

#[derive(Clone, Debug)]
pub struct Trail {
    entries: Vec<TrailEntry>,
    index: HashMap<FgAtom, usize>,
    bg: HashSet<BgLit>,
    store: ConstraintStore,
    k: usize,
}

impl Trail {
    /// Empty trail over `pool`. With `enforce_adiff` off the store starts
    /// empty; that mode exists only to show what goes wrong without it.
    pub fn new(pool: &[Const], enforce_adiff: bool) -> Self {
        let mut store = ConstraintStore::new();
        if enforce_adiff {
            for atom in adiff(pool).expect("pool constants are distinct") {
                store.push(atom);
            }
        }
        Trail { entries: Vec::new(), index: HashMap::new(), bg: HashSet::new(), store, k: 0 }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn level(&self) -> usize {
        self.k
    }

    pub fn is_consistent(&self) -> bool {
        self.store.is_sat()
    }

    pub fn witness(&self) -> Option<Witness> {
        self.store.witness()
    }

    pub fn store(&self) -> &ConstraintStore {
        &self.store
    }

    /// `adiff(B) ∧ bgd(M) ∧ extra` is satisfiable.
    pub fn admits(&self, extra: &[BgLit]) -> bool {
        self.store.check_with(extra)
    }

    pub fn fgd(&self) -> impl Iterator<Item = &FgLit> {
        self.entries.iter().filter_map(|e| e.fg())
    }

    pub fn bgd(&self) -> impl Iterator<Item = &BgLit> {
        self.entries.iter().filter_map(|e| match e {
            TrailEntry::Bg { lit, .. } => Some(lit),
            TrailEntry::Fg { .. } => None,
        })
    }

    /// `Some(true)` if `lit` is on the trail, `Some(false)` if its
    /// complement is, `None` if undefined.
    pub fn value(&self, lit: &FgLit) -> Option<bool> {
        let &pos = self.index.get(&lit.atom)?;
        Some(self.entries[pos].fg().expect("index points at foreground entries").positive == lit.positive)
    }

    pub fn is_defined(&self, lit: &FgLit) -> bool {
        self.index.contains_key(&lit.atom)
    }

    pub fn is_defined_bg(&self, lit: &BgLit) -> bool {
        self.bg.contains(lit) || self.bg.contains(&lit.complement())
    }

    pub fn position(&self, atom: &FgAtom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn level_of(&self, lit: &FgLit) -> Option<usize> {
        match &self.entries[*self.index.get(&lit.atom)?] {
            TrailEntry::Fg { level, .. } => Some(*level),
            TrailEntry::Bg { .. } => unreachable!(),
        }
    }

    fn push_fg(&mut self, lit: FgLit, ann: Annotation, bg: &[BgLit]) {
        assert!(!self.index.contains_key(&lit.atom), "atom {} already on the trail", lit.atom);
        let owner = self.entries.len();
        self.index.insert(lit.atom.clone(), owner);
        self.entries.push(TrailEntry::Fg { lit, ann, level: self.k });
        for b in bg {
            if self.bg.insert(b.clone()) {
                self.store.push(b.clone());
                self.entries.push(TrailEntry::Bg { lit: b.clone(), owner });
            }
        }
    }

    pub fn push_decision(&mut self, lit: FgLit, bg: &[BgLit]) {
        self.k += 1;
        let k = self.k;
        self.push_fg(lit, Annotation::Decision(k), bg);
    }

    pub fn push_propagation(&mut self, lit: FgLit, closure: Closure, clause: usize, bg: &[BgLit]) {
        self.push_fg(lit, Annotation::Propagation { closure, clause }, bg);
    }

    fn pop_entry(&mut self) -> Option<TrailEntry> {
        let e = self.entries.pop()?;
        match &e {
            TrailEntry::Fg { lit, ann, .. } => {
                self.index.remove(&lit.atom);
                if matches!(ann, Annotation::Decision(_)) {
                    self.k -= 1;
                }
            }
            TrailEntry::Bg { lit, .. } => {
                self.bg.remove(lit);
                self.store.pop(1);
            }
        }
        Some(e)
    }

    /// Pops the rightmost foreground entry together with its background
    /// literals; returns the foreground entry.
    pub fn pop_group(&mut self) -> Option<TrailEntry> {
        loop {
            let e = self.pop_entry()?;
            if matches!(e, TrailEntry::Fg { .. }) {
                return Some(e);
            }
        }
    }

    pub fn truncate(&mut self, len: usize) {
        while self.entries.len() > len {
            self.pop_entry();
        }
    }

    /// Position of the rightmost foreground entry.
    pub fn rightmost_fg(&self) -> Option<usize> {
        self.entries.iter().rposition(|e| matches!(e, TrailEntry::Fg { .. }))
    }

    /// Position of the decision opening `level`.
    pub fn decision_position(&self, level: usize) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| matches!(e, TrailEntry::Fg { ann: Annotation::Decision(l), .. } if *l == level))
    }

    pub fn decisions(&self) -> Vec<FgLit> {
        self.entries.iter().filter(|e| e.is_decision()).filter_map(|e| e.fg().cloned()).collect()
    }

    /// Evaluates a ground clause: false needs every body literal falsified
    /// and the constraint compatible with the trail.
    pub fn eval_clause(&self, c: &Clause) -> Eval {
        if c.body().iter().any(|l| self.value(l) == Some(true)) || !self.admits(c.constraint()) {
            return Eval::True;
        }
        if c.body().iter().all(|l| self.value(l) == Some(false)) {
            Eval::False
        } else {
            Eval::Undefined
        }
    }

    pub fn induced_order(&self) -> HOrder {
        HOrder::from_positions(self.fgd().map(|l| l.atom.clone()))
    }
}

impl fmt::Display for Trail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{rat, InputRel, LinExpr, Subst, Term};

    fn c(n: &str) -> LinExpr {
        LinExpr::term(Term::cnst(n))
    }

    fn p(name: &str, args: &[&str]) -> FgLit {
        FgLit::pos(FgAtom::new(name, args.iter().map(|a| Term::cnst(a)).collect()))
    }

    fn pool(names: &[&str]) -> Vec<Const> {
        names.iter().map(|n| Const::new(n)).collect()
    }

    fn dummy() -> Closure {
        Closure::new(Clause::new(vec![], vec![]), Subst::new())
    }

    #[test]
    fn levels_and_definedness() {
        let mut t = Trail::new(&pool(&["a"]), true);
        let a0 = BgLit::new(&c("a"), InputRel::Eq, &LinExpr::constant(rat(0)));
        t.push_propagation(p("P", &["a"]), dummy(), 0, &[a0.clone()]);
        assert_eq!(t.level_of(&p("P", &["a"])), Some(0));
        t.push_decision(p("P", &["a", "a"]), &[]);
        t.push_propagation(p("Q", &["a"]), dummy(), 1, &[a0.clone()]);
        assert_eq!(t.level_of(&p("Q", &["a"])), Some(1));
        assert_eq!(t.level_of(&p("Q", &["a"]).complement()), Some(1));
        assert!(t.is_defined(&p("P", &["a"]).complement()));
        assert_eq!(t.value(&p("P", &["a"]).complement()), Some(false));
        assert!(!t.is_defined(&p("Q", &["b"])));
        // duplicate background literal is not pushed twice
        assert_eq!(t.bgd().count(), 1);
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn projections_and_grouped_pop() {
        let mut t = Trail::new(&pool(&["a", "b"]), true);
        assert_eq!(t.fgd().count(), 0);
        let a0 = BgLit::new(&c("a"), InputRel::Eq, &LinExpr::constant(rat(0)));
        t.push_propagation(p("P", &["a"]), dummy(), 0, &[a0.clone()]);
        t.push_decision(p("Q", &["b"]), &[]);
        assert_eq!(t.fgd().cloned().collect::<Vec<_>>(), vec![p("P", &["a"]), p("Q", &["b"])]);
        assert_eq!(t.bgd().cloned().collect::<Vec<_>>(), vec![a0.clone()]);
        assert_eq!(t.level(), 1);
        assert!(t.pop_group().unwrap().is_decision());
        assert_eq!(t.level(), 0);
        t.pop_group();
        assert!(t.is_empty());
        assert_eq!(t.store().depth(), 1);
    }

    #[test]
    fn evaluation() {
        let mut t = Trail::new(&pool(&["a"]), true);
        let a0 = BgLit::new(&c("a"), InputRel::Eq, &LinExpr::constant(rat(0)));
        t.push_propagation(p("P", &["a"]), dummy(), 0, &[a0.clone()]);
        assert_eq!(t.eval_clause(&Clause::new(vec![a0.clone()], vec![p("P", &["a"])])), Eval::True);
        assert_eq!(t.eval_clause(&Clause::new(vec![], vec![p("Q", &["b"])])), Eval::Undefined);
        assert_eq!(t.eval_clause(&Clause::new(vec![], vec![p("P", &["a"]).complement()])), Eval::False);
        let a1 = BgLit::new(&c("a"), InputRel::Eq, &LinExpr::constant(rat(1)));
        assert_eq!(t.eval_clause(&Clause::new(vec![a1], vec![p("P", &["a"]).complement()])), Eval::True);
    }

    #[test]
    fn order_follows_trail() {
        let mut t = Trail::new(&pool(&["a", "b"]), true);
        t.push_decision(p("P", &["a"]), &[]);
        t.push_decision(p("Q", &["b"]), &[]);
        let o = t.induced_order();
        use crate::terms::Literal;
        assert_eq!(o.lit_cmp(&Literal::Fg(p("P", &["a"])), &Literal::Fg(p("Q", &["b"]))), std::cmp::Ordering::Less);
        assert_eq!(o.lit_cmp(&Literal::Fg(p("Q", &["b"])), &Literal::Fg(p("R", &["a"]))), std::cmp::Ordering::Less);
        assert_eq!(t.decision_position(2), Some(1));
        assert_eq!(t.to_string(), "[P(a)@dec(1), Q(b)@dec(2)]");
    }
}
