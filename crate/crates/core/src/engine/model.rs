//! Symbolic model candidates read off a stuck trail. Every positive trail
//! literal `P(c1..cn)` contributes the conjunction of the trail's
//! background literals that mention only `c1..cn`, with the constants
//! generalized to parameters. The result is a candidate only: it is checked
//! against the clause set separately.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::clauses::Clause;
use crate::lra::check_sat;
use crate::terms::{BgLit, Const, InputRel, LinExpr, Pred, Rational, Subst, Term, Var};
use crate::trail::Trail;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredModel {
    pub params: Vec<Var>,
    /// Disjunction of conjunctions over `params`.
    pub disjuncts: Vec<Vec<BgLit>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolicModel {
    pub preds: BTreeMap<Pred, PredModel>,
}

/// Above this many DNF branches, verification gives up.
const BRANCH_LIMIT: usize = 4096;

fn params(arity: usize) -> Vec<Var> {
    const NAMES: [&str; 3] = ["x", "y", "z"];
    if arity <= NAMES.len() {
        NAMES[..arity].iter().map(|n| Var::new(n)).collect()
    } else {
        (1..=arity).map(|i| Var::new(&format!("x{i}"))).collect()
    }
}

impl SymbolicModel {
    /// `signature` lists every predicate with its arity; predicates with
    /// no positive trail literal are interpreted as empty.
    pub fn extract(trail: &Trail, signature: &BTreeMap<Pred, usize>) -> Self {
        let mut preds: BTreeMap<Pred, PredModel> = signature
            .iter()
            .map(|(p, &n)| (p.clone(), PredModel { params: params(n), disjuncts: Vec::new() }))
            .collect();
        let bg: Vec<&BgLit> = trail.bgd().collect();
        for lit in trail.fgd().filter(|l| l.positive) {
            let Some(model) = preds.get_mut(&lit.atom.pred) else { continue };
            let mut slot: BTreeMap<Const, Var> = BTreeMap::new();
            let mut conj = Vec::new();
            for (t, x) in lit.atom.args.iter().zip(&model.params) {
                let Term::Const(k) = t else { continue };
                match slot.get(k) {
                    Some(first) => conj.push(BgLit::new(
                        &LinExpr::term(Term::Var(x.clone())),
                        InputRel::Eq,
                        &LinExpr::term(Term::Var(first.clone())),
                    )),
                    None => {
                        slot.insert(k.clone(), x.clone());
                    }
                }
            }
            let local = |b: &BgLit| b.terms().all(|t| matches!(t, Term::Const(k) if slot.contains_key(k)));
            for b in bg.iter().filter(|b| local(b)) {
                let g = b.rename_terms(&|t| match t {
                    Term::Const(k) => Term::Var(slot[k].clone()),
                    other => other.clone(),
                });
                if !conj.contains(&g) {
                    conj.push(g);
                }
            }
            if !model.disjuncts.contains(&conj) {
                model.disjuncts.push(conj);
            }
        }
        SymbolicModel { preds }
    }

    /// Truth of `P(args)` for rational arguments.
    pub fn holds(&self, pred: &Pred, args: &[Rational]) -> bool {
        let Some(m) = self.preds.get(pred) else { return false };
        let value = |t: &Term| match t {
            Term::Var(v) => m.params.iter().position(|p| p == v).map(|i| args[i].clone()),
            Term::Const(_) => None,
        };
        m.disjuncts.iter().any(|conj| conj.iter().all(|l| l.eval(&value) == Some(true)))
    }

    fn instantiate(&self, pred: &Pred, args: &[Term]) -> Vec<Vec<BgLit>> {
        let Some(m) = self.preds.get(pred) else { return Vec::new() };
        let s = Subst::from_pairs(m.params.iter().cloned().zip(args.iter().cloned()));
        m.disjuncts.iter().map(|c| c.iter().map(|l| l.apply(&s)).collect()).collect()
    }

    /// Whether every clause holds for all rational values of its variables
    /// under this interpretation. `None` when the check is too large.
    pub fn verify(&self, clauses: &[Clause]) -> Option<bool> {
        for c in clauses {
            // search for a counterexample: constraint true, every body literal false
            let mut branches: Vec<Vec<BgLit>> = vec![c.constraint().to_vec()];
            for l in c.body() {
                let interp = self.instantiate(&l.atom.pred, &l.atom.args);
                let mut next = Vec::new();
                for b in &branches {
                    if l.positive {
                        // not (D1 or ... or Dk): pick one falsified literal per disjunct
                        let mut partial = vec![b.clone()];
                        for conj in &interp {
                            let mut grown = Vec::new();
                            for p in &partial {
                                for lit in conj {
                                    let mut q = p.clone();
                                    q.push(lit.complement());
                                    if check_sat(&q).is_sat() {
                                        grown.push(q);
                                    }
                                }
                            }
                            partial = grown;
                            if partial.len() > BRANCH_LIMIT {
                                return None;
                            }
                        }
                        next.extend(partial);
                    } else {
                        for conj in &interp {
                            let mut q = b.clone();
                            q.extend(conj.iter().cloned());
                            if check_sat(&q).is_sat() {
                                next.push(q);
                            }
                        }
                    }
                    if next.len() > BRANCH_LIMIT {
                        return None;
                    }
                }
                branches = next;
            }
            if branches.iter().any(|b| check_sat(b).is_sat()) {
                return Some(false);
            }
        }
        Some(true)
    }

    pub fn predicates(&self) -> BTreeSet<&Pred> {
        self.preds.keys().collect()
    }
}

impl fmt::Display for SymbolicModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, m) in &self.preds {
            let params: Vec<String> = m.params.iter().map(|v| v.to_string()).collect();
            write!(f, "{p}({}) <-> ", params.join(","))?;
            if m.disjuncts.is_empty() {
                f.write_str("false")?;
            }
            for (i, conj) in m.disjuncts.iter().enumerate() {
                if i > 0 {
                    f.write_str(" \\/ ")?;
                }
                if conj.is_empty() {
                    f.write_str("true")?;
                }
                let lits: Vec<String> = conj.iter().map(|l| l.to_string()).collect();
                let text = lits.join(" /\\ ");
                if m.disjuncts.len() > 1 && conj.len() > 1 {
                    write!(f, "({text})")?;
                } else {
                    f.write_str(&text)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
