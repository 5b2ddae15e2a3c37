//! Satisfiability of conjunctions of linear rational arithmetic literals.
//!
//! The base procedure is Fourier-Motzkin elimination over exact rationals.
//! Equalities are eliminated by substitution first, disequalities are split
//! into their two strict alternatives, and a witness is rebuilt by
//! back-substitution through the elimination order. Every term occurring in
//! the input (variable or constant) is treated as an unknown, so the same
//! procedure answers both ground satisfiability and existential questions.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::terms::{BgLit, Const, InputRel, LinExpr, Rational, Rel, Term};

pub type Witness = BTreeMap<Term, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Witness),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SatResult::Sat(w) => Some(w),
            SatResult::Unsat => None,
        }
    }
}

/// Variable selection for elimination. The two orders are independent
/// routes to the same answer and are cross-checked in tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ElimOrder {
    /// Cheapest variable first (fewest generated combinations), ties by term order.
    #[default]
    Greedy,
    /// Largest term first, regardless of cost.
    Reverse,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LraError {
    #[error("duplicate constant `{0}` in instantiation pool")]
    DuplicateConstant(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Kind {
    Le,
    Lt,
    Eq,
}

/// `coeffs . x + constant (kind) 0`
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Row {
    expr: LinExpr,
    kind: Kind,
}

impl Row {
    /// Scales so the leading coefficient has magnitude one; for equalities
    /// also fixes its sign. Keeps duplicate detection exact.
    fn normalized(self) -> Row {
        let Some(lead) = self.expr.coeffs().values().next().cloned() else {
            return self;
        };
        let factor = match self.kind {
            Kind::Eq => lead.recip(),
            _ => lead.abs().recip(),
        };
        Row { expr: self.expr.scaled(&factor), kind: self.kind }
    }

    /// Truth of a row without unknowns.
    fn holds_trivially(&self) -> bool {
        let c = self.expr.offset();
        match self.kind {
            Kind::Le => !c.is_positive(),
            Kind::Lt => c.is_negative(),
            Kind::Eq => c.is_zero(),
        }
    }
}

struct Bound {
    expr: LinExpr,
    strict: bool,
}

enum Step {
    Eliminated { term: Term, lowers: Vec<Bound>, uppers: Vec<Bound> },
    Defined { term: Term, def: LinExpr },
}

pub fn check_sat(atoms: &[BgLit]) -> SatResult {
    check_sat_ordered(atoms, ElimOrder::Greedy)
}

pub fn check_sat_ordered(atoms: &[BgLit], order: ElimOrder) -> SatResult {
    let mut rows = Vec::new();
    let mut diseqs = Vec::new();
    for a in atoms {
        let expr = a.expr();
        match a.rel() {
            Rel::Le => rows.push(Row { expr, kind: Kind::Le }),
            Rel::Lt => rows.push(Row { expr, kind: Kind::Lt }),
            Rel::Eq => rows.push(Row { expr, kind: Kind::Eq }),
            Rel::Ne => diseqs.push(expr),
        }
    }
    let all_terms: BTreeSet<Term> = atoms.iter().flat_map(|a| a.terms().cloned()).collect();
    match branch_diseqs(rows, &diseqs, order) {
        Some(mut w) => {
            for t in all_terms {
                w.entry(t).or_insert_with(Rational::zero);
            }
            debug_assert!(atoms.iter().all(|a| a.eval(&|t| w.get(t).cloned()) == Some(true)));
            SatResult::Sat(w)
        }
        None => SatResult::Unsat,
    }
}

fn branch_diseqs(rows: Vec<Row>, diseqs: &[LinExpr], order: ElimOrder) -> Option<Witness> {
    let Some((first, rest)) = diseqs.split_first() else {
        return solve_conjunction(rows, order);
    };
    if first.is_constant() {
        if first.offset().is_zero() {
            return None;
        }
        return branch_diseqs(rows, rest, order);
    }
    for expr in [first.clone(), first.negated()] {
        let mut branch = rows.clone();
        branch.push(Row { expr, kind: Kind::Lt });
        if let Some(w) = branch_diseqs(branch, rest, order) {
            return Some(w);
        }
    }
    None
}

fn pick_pivot(rows: &[Row], order: ElimOrder, eq: bool) -> Option<Term> {
    let candidates: BTreeSet<&Term> = rows
        .iter()
        .filter(|r| !eq || r.kind == Kind::Eq)
        .flat_map(|r| r.expr.terms())
        .collect();
    match order {
        ElimOrder::Reverse => candidates.iter().next_back().map(|t| (*t).clone()),
        ElimOrder::Greedy if eq => candidates.iter().next().map(|t| (*t).clone()),
        ElimOrder::Greedy => candidates
            .iter()
            .min_by_key(|t| {
                let (mut lo, mut hi) = (0usize, 0usize);
                for r in rows {
                    if let Some(c) = r.expr.coeffs().get(t) {
                        if c.is_positive() {
                            hi += 1;
                        } else {
                            lo += 1;
                        }
                    }
                }
                lo * hi
            })
            .map(|t| (*t).clone()),
    }
}

fn solve_conjunction(rows: Vec<Row>, order: ElimOrder) -> Option<Witness> {
    let mut steps = Vec::new();
    let mut rows: Vec<Row> = rows;

    // Equalities: solve for a pivot and substitute everywhere.
    loop {
        let mut trivial_ok = true;
        rows.retain(|r| {
            if r.expr.is_constant() {
                trivial_ok &= r.holds_trivially();
                false
            } else {
                true
            }
        });
        if !trivial_ok {
            return None;
        }
        let Some(pivot) = pick_pivot(&rows, order, true) else { break };
        let idx = rows
            .iter()
            .position(|r| r.kind == Kind::Eq && r.expr.coeffs().contains_key(&pivot))
            .expect("pivot comes from an equality");
        let eq = rows.swap_remove(idx);
        let c = eq.expr.coeffs()[&pivot].clone();
        // pivot = -(eq - c*pivot) / c
        let mut rest = eq.expr.clone();
        rest.add_term(pivot.clone(), &-c.clone());
        let def = rest.scaled(&(-c.recip()));
        rows = rows.into_iter().map(|r| substitute(r, &pivot, &def)).collect();
        steps.push(Step::Defined { term: pivot, def });
    }

    // Inequalities: Fourier-Motzkin.
    let mut rows: BTreeSet<Row> = rows.into_iter().map(Row::normalized).collect();
    loop {
        if rows.iter().any(|r| r.expr.is_constant() && !r.holds_trivially()) {
            return None;
        }
        rows.retain(|r| !r.expr.is_constant());
        let as_vec: Vec<Row> = rows.iter().cloned().collect();
        let Some(x) = pick_pivot(&as_vec, order, false) else { break };
        let mut lowers = Vec::new();
        let mut uppers = Vec::new();
        let mut keep = BTreeSet::new();
        for r in rows {
            let Some(a) = r.expr.coeffs().get(&x).cloned() else {
                keep.insert(r);
                continue;
            };
            // a*x + rest (<|<=) 0  ==>  x (<|<=) -rest/a   if a > 0
            //                        x (>|>=) -rest/a   if a < 0
            let mut rest = r.expr.clone();
            rest.add_term(x.clone(), &-a.clone());
            let bound = Bound { expr: rest.scaled(&(-a.recip())), strict: r.kind == Kind::Lt };
            if a.is_positive() {
                uppers.push(bound);
            } else {
                lowers.push(bound);
            }
        }
        for lo in &lowers {
            for hi in &uppers {
                let row = Row { expr: lo.expr.sub(&hi.expr), kind: if lo.strict || hi.strict { Kind::Lt } else { Kind::Le } };
                keep.insert(row.normalized());
            }
        }
        steps.push(Step::Eliminated { term: x, lowers, uppers });
        rows = keep;
    }

    let mut values = Witness::new();
    for step in steps.iter().rev() {
        match step {
            Step::Eliminated { term, lowers, uppers } => {
                let lo = tightest(lowers, &mut values, true);
                let hi = tightest(uppers, &mut values, false);
                let v = match (lo, hi) {
                    (None, None) => Rational::zero(),
                    (Some((l, false)), _) => l,
                    (Some((l, true)), None) => l + Rational::one(),
                    (None, Some((h, false))) => h,
                    (None, Some((h, true))) => h - Rational::one(),
                    (Some((l, true)), Some((h, false))) => {
                        if l < h {
                            h
                        } else {
                            return None;
                        }
                    }
                    (Some((l, true)), Some((h, true))) => (l + h) / Rational::from_integer(2.into()),
                };
                values.insert(term.clone(), v);
            }
            Step::Defined { term, def } => {
                let v = eval_defaulting(def, &mut values);
                values.insert(term.clone(), v);
            }
        }
    }
    Some(values)
}

fn eval_defaulting(expr: &LinExpr, values: &mut Witness) -> Rational {
    for t in expr.terms() {
        values.entry(t.clone()).or_insert_with(Rational::zero);
    }
    expr.eval(&|t| values.get(t).cloned()).expect("all terms assigned")
}

/// Strongest bound: max of lower bounds or min of upper bounds; at equal
/// values a strict bound wins.
fn tightest(bounds: &[Bound], values: &mut Witness, lower: bool) -> Option<(Rational, bool)> {
    let mut best: Option<(Rational, bool)> = None;
    for b in bounds {
        let v = eval_defaulting(&b.expr, values);
        best = match best {
            None => Some((v, b.strict)),
            Some((cur, s)) => {
                let better = if lower { v > cur } else { v < cur };
                if better {
                    Some((v, b.strict))
                } else if v == cur {
                    Some((cur, s || b.strict))
                } else {
                    Some((cur, s))
                }
            }
        };
    }
    best
}

fn substitute(row: Row, term: &Term, def: &LinExpr) -> Row {
    let Some(c) = row.expr.coeffs().get(term).cloned() else {
        return row;
    };
    let mut expr = row.expr.clone();
    expr.add_term(term.clone(), &-c.clone());
    expr.add_scaled(def, &c);
    Row { expr, kind: row.kind }
}

/// The ordering constraint `b1 < b2 < ... < bn` over a pool of constants.
pub fn adiff(pool: &[Const]) -> Result<Vec<BgLit>, LraError> {
    let mut seen = BTreeSet::new();
    for c in pool {
        if !seen.insert(c) {
            return Err(LraError::DuplicateConstant(c.name().to_string()));
        }
    }
    Ok(pool
        .windows(2)
        .map(|w| {
            BgLit::new(
                &LinExpr::term(Term::Const(w[0].clone())),
                InputRel::Lt,
                &LinExpr::term(Term::Const(w[1].clone())),
            )
        })
        .collect())
}

#[derive(Clone, Debug)]
struct Frame {
    atom: BgLit,
    result: SatResult,
}

/// Stack of asserted literals with the satisfiability status of every
/// prefix memoized, so popping is free and pushing recomputes once.
#[derive(Default, Clone, Debug)]
pub struct ConstraintStore {
    frames: Vec<Frame>,
    query_cache: RefCell<HashMap<Vec<BgLit>, bool>>,
}

impl ConstraintStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn is_sat(&self) -> bool {
        self.frames.last().map_or(true, |f| f.result.is_sat())
    }

    pub fn witness(&self) -> Option<Witness> {
        match self.frames.last() {
            None => Some(Witness::new()),
            Some(f) => f.result.witness().cloned(),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &BgLit> {
        self.frames.iter().map(|f| &f.atom)
    }

    pub fn contains(&self, atom: &BgLit) -> bool {
        self.frames.iter().any(|f| &f.atom == atom)
    }

    pub fn push(&mut self, atom: BgLit) -> bool {
        let result = if !self.is_sat() {
            SatResult::Unsat
        } else if self.frames.last().and_then(|f| f.result.witness()).map_or(false, |w| atom_holds(&atom, w)) {
            // The previous witness already satisfies the new atom.
            let w = self.frames.last().and_then(|f| f.result.witness()).cloned().unwrap_or_default();
            let mut w = w;
            for t in atom.terms() {
                w.entry(t.clone()).or_insert_with(Rational::zero);
            }
            SatResult::Sat(w)
        } else {
            let mut all: Vec<BgLit> = self.atoms().cloned().collect();
            all.push(atom.clone());
            check_sat(&all)
        };
        let sat = result.is_sat();
        self.frames.push(Frame { atom, result });
        self.query_cache.borrow_mut().clear();
        sat
    }

    /// Removes the `n` most recent frames.
    ///
    /// Panics if `n` exceeds the stack depth.
    pub fn pop(&mut self, n: usize) -> bool {
        assert!(n <= self.frames.len(), "pop({n}) beyond stack depth {}", self.frames.len());
        if n > 0 {
            self.frames.truncate(self.frames.len() - n);
            self.query_cache.borrow_mut().clear();
        }
        self.is_sat()
    }

    pub fn clear(&mut self) {
        self.frames.clear();
        self.query_cache.borrow_mut().clear();
    }

    /// Satisfiability of the stack conjoined with `extra`, without mutating.
    pub fn check_with(&self, extra: &[BgLit]) -> bool {
        if !self.is_sat() {
            return false;
        }
        let missing: Vec<BgLit> = {
            let mut v: Vec<BgLit> = extra.iter().filter(|a| !self.contains(a)).cloned().collect();
            v.sort();
            v.dedup();
            v
        };
        if missing.is_empty() {
            return true;
        }
        if let Some(w) = self.frames.last().and_then(|f| f.result.witness()) {
            if missing.iter().all(|a| atom_holds(a, w)) {
                return true;
            }
        }
        if let Some(&hit) = self.query_cache.borrow().get(&missing) {
            return hit;
        }
        let mut all: Vec<BgLit> = self.atoms().cloned().collect();
        all.extend(missing.iter().cloned());
        let sat = check_sat(&all).is_sat();
        self.query_cache.borrow_mut().insert(missing, sat);
        sat
    }

    pub fn witness_with(&self, extra: &[BgLit]) -> Option<Witness> {
        let mut all: Vec<BgLit> = self.atoms().cloned().collect();
        all.extend(extra.iter().cloned());
        check_sat(&all).witness().cloned()
    }
}

/// Whether `atom` is true under `w`; unassigned terms count as false.
fn atom_holds(atom: &BgLit, w: &Witness) -> bool {
    atom.eval(&|t| w.get(t).cloned()).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::rat;

    fn c(name: &str) -> LinExpr {
        LinExpr::term(Term::cnst(name))
    }

    fn plus(mut e: LinExpr, k: i64) -> LinExpr {
        e.add_constant(&rat(k));
        e
    }

    fn num(k: i64) -> LinExpr {
        LinExpr::constant(rat(k))
    }

    fn lit(l: LinExpr, rel: InputRel, r: LinExpr) -> BgLit {
        BgLit::new(&l, rel, &r)
    }

    fn verify(atoms: &[BgLit], w: &Witness) {
        for a in atoms {
            assert_eq!(a.eval(&|t| w.get(t).cloned()), Some(true), "{a} under {w:?}");
        }
    }

    #[test]
    fn refutation_constraints_have_the_expected_witness() {
        let atoms = vec![
            lit(c("a"), InputRel::Eq, num(0)),
            lit(c("b"), InputRel::Eq, plus(c("a"), 1)),
            lit(c("c"), InputRel::Eq, plus(c("b"), 1)),
            lit(c("c"), InputRel::Eq, num(2)),
            lit(c("a"), InputRel::Lt, c("b")),
            lit(c("b"), InputRel::Lt, c("c")),
        ];
        let SatResult::Sat(w) = check_sat(&atoms) else { panic!("expected sat") };
        verify(&atoms, &w);
        assert_eq!(w[&Term::cnst("a")], rat(0));
        assert_eq!(w[&Term::cnst("b")], rat(1));
        assert_eq!(w[&Term::cnst("c")], rat(2));
    }

    #[test]
    fn antisymmetry_and_collapsed_order_are_unsat() {
        assert_eq!(check_sat(&[lit(c("a"), InputRel::Lt, c("b")), lit(c("b"), InputRel::Lt, c("a"))]), SatResult::Unsat);
        let atoms = [
            lit(c("a"), InputRel::Le, c("b")),
            lit(c("a"), InputRel::Ge, c("b")),
            lit(c("a"), InputRel::Lt, c("b")),
        ];
        assert_eq!(check_sat(&atoms), SatResult::Unsat);
    }

    #[test]
    fn disequality_is_handled() {
        let atoms = [lit(c("a"), InputRel::Ne, num(0))];
        let SatResult::Sat(w) = check_sat(&atoms) else { panic!() };
        verify(&atoms, &w);
        let atoms = [
            lit(c("a"), InputRel::Ne, num(0)),
            lit(c("a"), InputRel::Le, num(0)),
            lit(c("a"), InputRel::Ge, num(0)),
        ];
        assert_eq!(check_sat(&atoms), SatResult::Unsat);
    }

    #[test]
    fn stack_discipline() {
        let mut store = ConstraintStore::new();
        assert!(store.push(lit(c("a"), InputRel::Lt, c("b"))));
        assert!(!store.push(lit(c("b"), InputRel::Lt, c("a"))));
        assert!(store.pop(1));
        assert!(store.pop(0));
        assert_eq!(store.depth(), 1);

        let mut store = ConstraintStore::new();
        let chain = [
            lit(c("a"), InputRel::Eq, num(0)),
            lit(c("b"), InputRel::Eq, plus(c("a"), 1)),
            lit(c("c"), InputRel::Eq, plus(c("b"), 1)),
        ];
        for (i, a) in chain.iter().enumerate() {
            assert!(store.push(a.clone()));
            assert!(check_sat(&chain[..=i]).is_sat());
        }
    }

    #[test]
    #[should_panic(expected = "beyond stack depth")]
    fn pop_past_bottom_panics() {
        ConstraintStore::new().pop(1);
    }

    #[test]
    fn adiff_chains() {
        let pool: Vec<Const> = ["a", "b", "c"].iter().map(|n| Const::new(n)).collect();
        let atoms = adiff(&pool).unwrap();
        assert_eq!(atoms, vec![lit(c("a"), InputRel::Lt, c("b")), lit(c("b"), InputRel::Lt, c("c"))]);
        assert!(adiff(&pool[..1]).unwrap().is_empty());
        assert!(adiff(&[]).unwrap().is_empty());
        assert_eq!(
            adiff(&[Const::new("a"), Const::new("a")]),
            Err(LraError::DuplicateConstant("a".into()))
        );
    }

    #[test]
    fn strict_bounds_pick_interior_points() {
        let atoms = [
            lit(c("a"), InputRel::Gt, num(0)),
            lit(c("a"), InputRel::Lt, num(1)),
            lit(plus(c("b"), 0), InputRel::Ge, c("a")),
            lit(c("b").scaled(&rat(2)), InputRel::Lt, num(3)),
        ];
        let SatResult::Sat(w) = check_sat(&atoms) else { panic!() };
        verify(&atoms, &w);
        let SatResult::Sat(w) = check_sat_ordered(&atoms, ElimOrder::Reverse) else { panic!() };
        verify(&atoms, &w);
    }
}
