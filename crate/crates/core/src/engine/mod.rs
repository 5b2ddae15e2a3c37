//! The SCL(T) rule system on states `(M; N; U; B; k; D)` and the regular
//! run strategy driving it.

pub mod measure;
pub mod model;
pub mod search;
pub mod strategy;
pub mod wellformed;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::clauses::{check_pure, gnd_all, is_redundant_subset, ClauseError, Clause, Closure};
use crate::lra::Witness;
use crate::terms::{unify, unify_lits, Const, FgAtom, FgLit, Pred, Subst, Syntax, Term};
use crate::trail::{Annotation, Eval, Trail, TrailEntry};

use measure::{measure, Measure, MeasureBase};
use model::SymbolicModel;
use search::{
    atom_universe, candidate_for, candidates, find_conflict, ground_constraint, is_false_instance, justification,
    would_conflict, Candidate,
};
use strategy::{DecisionStrategy, PropagationPolicy, Registry, StrategyParams};
use wellformed::{StateView, Violation};

#[derive(Clone, Debug)]
pub struct Config {
    /// Initial size of the constant pool `B`.
    pub constants: usize,
    /// Grow stops here; equal to `constants` disables Grow.
    pub max_constants: usize,
    pub restarts: usize,
    pub steps: usize,
    pub propagation: String,
    pub decision: String,
    pub propagation_cap: usize,
    /// Report the first stuck state instead of exploring further.
    pub accept_stuck: bool,
    /// Keep restarting until the symbolic candidate satisfies `N`.
    pub seek_model: bool,
    pub check_wf: bool,
    pub check_measure: bool,
    /// Test-only switch: off drops `adiff(B)` from every side condition.
    pub enforce_adiff: bool,
    pub seed: u64,
    pub trace: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            constants: 3,
            max_constants: 3,
            restarts: 100,
            steps: 100_000,
            propagation: "fair".into(),
            decision: "ordered".into(),
            propagation_cap: 1,
            accept_stuck: true,
            seek_model: false,
            check_wf: false,
            check_measure: false,
            enforce_adiff: true,
            seed: 0,
            trace: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Impure(#[from] ClauseError),
    #[error("clause `{0}` is not abstracted: foreground arguments must be variables")]
    NotAbstracted(String),
    #[error("unknown {kind} strategy `{name}` (available: {available})")]
    UnknownStrategy { kind: &'static str, name: String, available: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("{0} is not applicable: {1}")]
    Inapplicable(Rule, String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Propagate,
    Decide,
    Conflict,
    Resolve,
    Factorize,
    Skip,
    Backtrack,
    Grow,
    Restart,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug)]
pub struct TraceEvent {
    pub rule: Rule,
    pub detail: String,
    pub measure: Option<Measure>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.rule, self.detail)?;
        if let Some(m) = &self.measure {
            write!(f, "\tmu={m}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Refutation {
    pub conflict: Closure,
    /// Values for `B` satisfying the final constraint with `adiff(B)`.
    pub witness: Witness,
    pub learned: Vec<Clause>,
    pub pool: Vec<Const>,
}

#[derive(Clone, Debug)]
pub struct GroundModel {
    pub trail: Trail,
    pub pool: Vec<Const>,
    pub witness: Witness,
    pub candidate: SymbolicModel,
    /// `Some(true)` if the candidate was checked against `N` and holds.
    pub verified: Option<bool>,
    pub learned: Vec<Clause>,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Unsatisfiable(Refutation),
    SatisfiableGround(GroundModel),
    Unknown(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Unsatisfiable(_) => "Unsatisfiable",
            Verdict::SatisfiableGround(_) => "SatisfiableGround",
            Verdict::Unknown(_) => "Unknown",
        }
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsatisfiable(_))
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::SatisfiableGround(_))
    }
}

/// Outcome of a single regular step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Applied(Rule),
    /// `D = Λ || ⊥ · σ`.
    Refuted,
    Stuck,
}

/// Decision prefixes known to end in stuck states; a prefix is exhausted
/// once all of its extensions are.
#[derive(Clone, Debug, Default)]
struct Blockers {
    exhausted: HashSet<Vec<FgLit>>,
    forced: HashSet<Vec<FgLit>>,
}

impl Blockers {
    fn mark(&mut self, mut sig: Vec<FgLit>) {
        loop {
            self.exhausted.insert(sig.clone());
            let Some(last) = sig.last().cloned() else { return };
            let mut sibling = sig.clone();
            *sibling.last_mut().unwrap() = last.complement();
            if self.forced.contains(&sig) || self.exhausted.contains(&sibling) {
                sig.pop();
            } else {
                return;
            }
        }
    }

    fn root_exhausted(&self) -> bool {
        self.exhausted.contains(&Vec::new())
    }
}

pub struct Engine {
    config: Config,
    /// `N` followed by `U`.
    clauses: Vec<Clause>,
    n_len: usize,
    pool: Vec<Const>,
    trail: Trail,
    conflict: Option<Closure>,
    propagation: Box<dyn PropagationPolicy>,
    decision: Box<dyn DecisionStrategy>,
    atoms: Vec<FgAtom>,
    signature: BTreeMap<Pred, usize>,
    rename_index: u32,
    resolves: usize,
    steps: usize,
    restarts: usize,
    blockers: Blockers,
    signatures: Vec<Vec<FgLit>>,
    /// The conflict closure behind each learned clause.
    learn_log: Vec<Closure>,
    trace: Vec<TraceEvent>,
    violations: Vec<String>,
    measure_base: Option<MeasureBase>,
    last_measure: Option<Measure>,
}

pub fn fresh_pool(n: usize) -> Vec<Const> {
    (1..=n).map(|i| Const::new(&format!("_c{i}"))).collect()
}

impl Engine {
    pub fn new(n: Vec<Clause>, config: Config) -> Result<Engine, EngineError> {
        let pool = fresh_pool(config.constants);
        Self::with_pool(n, pool, config)
    }

    /// Starts from an explicit pool, e.g. `[a, b, c]`.
    pub fn with_pool(n: Vec<Clause>, pool: Vec<Const>, config: Config) -> Result<Engine, EngineError> {
        check_pure(&n)?;
        if let Some(c) = n.iter().find(|c| !c.is_abstracted()) {
            return Err(EngineError::NotAbstracted(c.to_string()));
        }
        let distinct: BTreeSet<&Const> = pool.iter().collect();
        if distinct.len() != pool.len() {
            return Err(EngineError::Config("pool constants must be distinct".into()));
        }
        if config.steps == 0 {
            return Err(EngineError::Config("step budget must be positive".into()));
        }
        let registry = Registry::default();
        let params = StrategyParams { propagation_cap: config.propagation_cap, seed: config.seed };
        let propagation = registry.propagation(&config.propagation, &params).ok_or_else(|| EngineError::UnknownStrategy {
            kind: "propagation",
            name: config.propagation.clone(),
            available: registry.propagation_names().join(", "),
        })?;
        let decision = registry.decision(&config.decision, &params).ok_or_else(|| EngineError::UnknownStrategy {
            kind: "decision",
            name: config.decision.clone(),
            available: registry.decision_names().join(", "),
        })?;
        let mut signature = BTreeMap::new();
        for c in &n {
            for (p, arity) in c.predicates() {
                signature.insert(p.clone(), arity);
            }
        }
        let trail = Trail::new(&pool, config.enforce_adiff);
        let n_len = n.len();
        let mut e = Engine {
            config,
            clauses: n,
            n_len,
            pool,
            trail,
            conflict: None,
            propagation,
            decision,
            atoms: Vec::new(),
            signature,
            rename_index: 0,
            resolves: 0,
            steps: 0,
            restarts: 0,
            blockers: Blockers::default(),
            signatures: Vec::new(),
            learn_log: Vec::new(),
            trace: Vec::new(),
            violations: Vec::new(),
            measure_base: None,
            last_measure: None,
        };
        e.refresh_universe();
        e.last_measure = e.current_measure();
        Ok(e)
    }

    pub fn set_strategies(&mut self, propagation: Box<dyn PropagationPolicy>, decision: Box<dyn DecisionStrategy>) {
        self.propagation = propagation;
        self.decision = decision;
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn initial(&self) -> &[Clause] {
        &self.clauses[..self.n_len]
    }

    pub fn learned(&self) -> &[Clause] {
        &self.clauses[self.n_len..]
    }

    pub fn pool(&self) -> &[Const] {
        &self.pool
    }

    /// Conflict closures in the order their clauses were learned.
    pub fn learned_groundings(&self) -> &[Closure] {
        &self.learn_log
    }

    pub fn trail(&self) -> &Trail {
        &self.trail
    }

    pub fn conflict(&self) -> Option<&Closure> {
        self.conflict.as_ref()
    }

    pub fn level(&self) -> usize {
        self.trail.level()
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Decision sequences of every stuck state met so far.
    pub fn stuck_signatures(&self) -> &[Vec<FgLit>] {
        &self.signatures
    }

    pub fn atoms(&self) -> &[FgAtom] {
        &self.atoms
    }

    pub fn signature(&self) -> &BTreeMap<Pred, usize> {
        &self.signature
    }

    fn refresh_universe(&mut self) {
        self.atoms = atom_universe(&self.clauses, &self.pool);
        self.measure_base = None;
    }

    fn current_measure(&mut self) -> Option<Measure> {
        if !(self.config.check_measure || self.config.trace) {
            return None;
        }
        let base = self.measure_base.get_or_insert_with(|| {
            MeasureBase::compute(&self.clauses, &self.clauses[self.n_len..], &self.pool)
        });
        Some(measure(base, &self.trail, self.conflict.as_ref()))
    }

    pub fn termination_measure(&mut self) -> Measure {
        let base = self
            .measure_base
            .get_or_insert_with(|| MeasureBase::compute(&self.clauses, &self.clauses[self.n_len..], &self.pool));
        measure(base, &self.trail, self.conflict.as_ref())
    }

    pub fn check_wellformed(&self) -> Vec<Violation> {
        wellformed::check(&StateView {
            n: &self.clauses[..self.n_len],
            u: &self.clauses[self.n_len..],
            pool: &self.pool,
            trail: &self.trail,
            conflict: self.conflict.as_ref(),
            enforce_adiff: self.config.enforce_adiff,
        })
    }

    fn record(&mut self, rule: Rule, detail: impl FnOnce(&Engine) -> String) {
        self.steps += 1;
        let m = self.current_measure();
        if self.config.check_measure && !matches!(rule, Rule::Grow | Rule::Restart) {
            if let (Some(before), Some(after)) = (&self.last_measure, &m) {
                if after >= before {
                    self.violations.push(format!("measure did not decrease at {rule}: {before} -> {after}"));
                }
            }
        }
        self.last_measure = m.clone();
        if self.config.check_wf {
            for v in self.check_wellformed() {
                self.violations.push(format!("after {rule}: {v}"));
            }
        }
        if self.config.trace {
            let detail = detail(self);
            self.trace.push(TraceEvent { rule, detail, measure: m });
        }
    }

    fn ensure_search_mode(&self, rule: Rule) -> Result<(), RuleError> {
        match &self.conflict {
            Some(_) => Err(RuleError::Inapplicable(rule, "the state is in conflict mode".into())),
            None => Ok(()),
        }
    }

    fn grounds_over_pool(&self, clause: usize, subst: &Subst) -> bool {
        self.clauses[clause].vars().iter().all(|v| matches!(subst.get(v), Some(Term::Const(k)) if self.pool.contains(k)))
    }

    // ---- conflict search rules ----

    fn apply_propagate(&mut self, cand: Candidate) {
        let closure = justification(&self.clauses, &cand);
        self.trail.push_propagation(cand.lit.clone(), closure, cand.clause, &cand.bg);
        self.propagation.propagated(cand.clause);
        self.record(Rule::Propagate, |e| describe_group(&e.trail, e.trail.rightmost_fg().unwrap()));
    }

    fn apply_decide(&mut self, lit: FgLit) {
        self.trail.push_decision(lit, &[]);
        self.propagation.new_epoch();
        self.record(Rule::Decide, |e| describe_group(&e.trail, e.trail.rightmost_fg().unwrap()));
    }

    fn apply_conflict(&mut self, clause: usize, subst: Subst) -> Step {
        let closure = Closure::new(self.clauses[clause].clone(), subst);
        let empty = closure.clause.is_empty_body();
        self.conflict = Some(closure);
        self.resolves = 0;
        let c = self.conflict.clone().unwrap();
        self.record(Rule::Conflict, |_| format!("clause#{clause} {c}"));
        if empty {
            Step::Refuted
        } else {
            Step::Applied(Rule::Conflict)
        }
    }

    /// Propagate with an explicit clause and grounding.
    pub fn propagate_with(&mut self, clause: usize, subst: &Subst) -> Result<(), RuleError> {
        self.ensure_search_mode(Rule::Propagate)?;
        if clause >= self.clauses.len() || !self.grounds_over_pool(clause, subst) {
            return Err(RuleError::Inapplicable(Rule::Propagate, "not a grounding over B".into()));
        }
        let cand = candidate_for(&self.clauses, &self.trail, clause, subst)
            .ok_or_else(|| RuleError::Inapplicable(Rule::Propagate, format!("side conditions fail for clause#{clause} {subst}")))?;
        self.apply_propagate(cand);
        Ok(())
    }

    /// Decide `lit` with an empty background constraint.
    pub fn decide_with(&mut self, lit: &FgLit) -> Result<(), RuleError> {
        self.ensure_search_mode(Rule::Decide)?;
        if self.trail.is_defined(lit) {
            return Err(RuleError::Inapplicable(Rule::Decide, format!("{lit} is defined")));
        }
        if !self.atoms.contains(&lit.atom) {
            return Err(RuleError::Inapplicable(Rule::Decide, format!("{} is not an atom of gnd_B(N ∪ U)", lit.atom)));
        }
        self.apply_decide(lit.clone());
        Ok(())
    }

    pub fn conflict_with(&mut self, clause: usize, subst: &Subst) -> Result<Step, RuleError> {
        self.ensure_search_mode(Rule::Conflict)?;
        if clause >= self.clauses.len() || !self.grounds_over_pool(clause, subst) {
            return Err(RuleError::Inapplicable(Rule::Conflict, "not a grounding over B".into()));
        }
        if !is_false_instance(&self.trail, &self.clauses[clause], subst) {
            return Err(RuleError::Inapplicable(Rule::Conflict, format!("clause#{clause} {subst} is not false")));
        }
        Ok(self.apply_conflict(clause, subst.restrict(&self.clauses[clause].vars())))
    }

    pub fn propagation_candidates(&self) -> Vec<Candidate> {
        if self.conflict.is_some() {
            return Vec::new();
        }
        candidates(&self.clauses, &self.trail, &self.pool)
    }

    pub fn find_conflict(&self) -> Option<(usize, Subst)> {
        if self.conflict.is_some() {
            return None;
        }
        find_conflict(&self.clauses, &self.trail, &self.pool)
    }

    pub fn undefined_atoms(&self) -> Vec<FgAtom> {
        self.atoms.iter().filter(|a| self.trail.position(a).is_none()).cloned().collect()
    }

    /// No rule but Grow/Restart applies and `D` is not `Λ || ⊥`.
    pub fn is_stuck(&self) -> bool {
        self.conflict.is_none() && self.undefined_atoms().is_empty() && self.find_conflict().is_none()
    }

    // ---- conflict resolution rules ----

    fn conflict_ref(&self, rule: Rule) -> Result<&Closure, RuleError> {
        self.conflict.as_ref().ok_or_else(|| RuleError::Inapplicable(rule, "no conflict".into()))
    }

    pub fn skip(&mut self) -> Result<(), RuleError> {
        let c = self.conflict_ref(Rule::Skip)?;
        let pos = self.trail.rightmost_fg().ok_or_else(|| RuleError::Inapplicable(Rule::Skip, "empty trail".into()))?;
        let lit = self.trail.entries()[pos].fg().unwrap().complement();
        if c.ground_body().contains(&lit) {
            return Err(RuleError::Inapplicable(Rule::Skip, format!("{lit} occurs in the conflict")));
        }
        let detail = describe_group(&self.trail, pos);
        self.trail.pop_group();
        self.record(Rule::Skip, |_| detail);
        Ok(())
    }

    /// Factorize two body literals whose ground images equal `target`.
    pub fn factorize(&mut self, target: &FgLit) -> Result<(), RuleError> {
        let c = self.conflict_ref(Rule::Factorize)?.clone();
        let body = c.clause.body();
        let pos: Vec<usize> = (0..body.len()).filter(|&j| body[j].apply(&c.subst) == *target).collect();
        if pos.len() < 2 {
            return Err(RuleError::Inapplicable(Rule::Factorize, format!("{target} occurs at most once")));
        }
        let eta = unify_lits(&body[pos[0]], &body[pos[1]]).expect("equal ground images unify");
        let new_body = body.iter().enumerate().filter(|(j, _)| *j != pos[1]).map(|(_, l)| l.apply(&eta)).collect();
        let new_constraint = c.clause.constraint().iter().map(|l| l.apply(&eta)).collect();
        self.conflict = Some(Closure::new(Clause::new(new_constraint, new_body), c.subst.clone()));
        let d = self.conflict.clone().unwrap();
        self.record(Rule::Factorize, |_| d.to_string());
        Ok(())
    }

    /// Resolve the conflict with the rightmost foreground trail literal.
    pub fn resolve(&mut self) -> Result<Step, RuleError> {
        let c = self.conflict_ref(Rule::Resolve)?.clone();
        let pos = self.trail.rightmost_fg().ok_or_else(|| RuleError::Inapplicable(Rule::Resolve, "empty trail".into()))?;
        let TrailEntry::Fg { lit, ann, .. } = &self.trail.entries()[pos] else { unreachable!() };
        let Annotation::Propagation { closure: just, .. } = ann else {
            return Err(RuleError::Inapplicable(Rule::Resolve, format!("{lit} is a decision")));
        };
        let comp = lit.complement();
        let body = c.clause.body();
        let Some(k) = (0..body.len()).find(|&j| body[j].apply(&c.subst) == comp) else {
            return Err(RuleError::Inapplicable(Rule::Resolve, format!("{comp} does not occur in the conflict")));
        };
        self.rename_index += 1;
        let (renamed, ren) = just.clause.renamed(self.rename_index);
        let rho = Subst::from_pairs(
            ren.iter().map(|(v, t)| (t.as_var().expect("renaming maps to variables").clone(), just.subst.apply_term(&Term::Var(v.clone())))),
        );
        let jb = renamed.body();
        let j0 = (0..jb.len()).find(|&j| jb[j].apply(&rho) == *lit).expect("justification contains its literal");
        let eta = unify(&jb[j0].atom, &body[k].atom).expect("ground images agree");
        let mut new_body: Vec<FgLit> = body.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, l)| l.apply(&eta)).collect();
        new_body.extend(jb.iter().enumerate().filter(|(j, _)| *j != j0).map(|(_, l)| l.apply(&eta)));
        let mut new_constraint: Vec<_> = c.clause.constraint().iter().map(|l| l.apply(&eta)).collect();
        new_constraint.extend(renamed.constraint().iter().map(|l| l.apply(&eta)));
        let subst = Subst::from_pairs(c.subst.iter().chain(rho.iter()).map(|(v, t)| (v.clone(), t.clone())));
        let closure = Closure::new(Clause::new(new_constraint, new_body), subst);
        let empty = closure.clause.is_empty_body();
        self.conflict = Some(closure);
        self.resolves += 1;
        let d = self.conflict.clone().unwrap();
        self.record(Rule::Resolve, |_| d.to_string());
        Ok(if empty { Step::Refuted } else { Step::Applied(Rule::Resolve) })
    }

    /// Backtrack on the single level-k literal `lk` of the conflict.
    pub fn backtrack(&mut self) -> Result<(), RuleError> {
        let c = self.conflict_ref(Rule::Backtrack)?.clone();
        let k = self.trail.level();
        let ground = c.ground_body();
        let top: BTreeSet<&FgLit> = ground.iter().filter(|l| self.trail.level_of(l) == Some(k)).collect();
        if k == 0 || top.len() != 1 {
            return Err(RuleError::Inapplicable(Rule::Backtrack, "needs exactly one literal of the current level".into()));
        }
        let lk = (*top.iter().next().unwrap()).clone();
        if ground.iter().filter(|l| **l == lk).count() > 1 {
            return Err(RuleError::Inapplicable(Rule::Backtrack, format!("{lk} must be factorized first")));
        }
        let i = ground.iter().filter(|l| **l != lk).filter_map(|l| self.trail.level_of(l)).max().unwrap_or(0);

        let learned_ground = c.ground().canonical();
        let existing = gnd_all(&self.clauses, &self.pool);
        if is_redundant_subset(&learned_ground, &existing, &self.trail.induced_order()) {
            self.violations.push(format!("learned clause {} is redundant at learn time", c));
        }

        self.clauses.push(c.clause.clone());
        self.learn_log.push(c.clone());
        let index = self.clauses.len() - 1;
        let cut = self.trail.decision_position(i + 1).expect("decision of level i+1 exists");
        self.trail.truncate(cut);
        let bg = ground_constraint(&c.clause, &c.subst);
        self.trail.push_propagation(lk, c.clone(), index, &bg);
        self.conflict = None;
        self.resolves = 0;
        self.propagation.new_epoch();
        self.refresh_universe();
        let learned = c.clause.clone();
        self.record(Rule::Backtrack, |_| format!("learn clause#{index} {learned}; level {i}"));
        Ok(())
    }

    /// One conflict-resolution step: Skip, then Factorize/Resolve with the
    /// rightmost foreground literal, Backtrack once a single literal of the
    /// current level remains and at least one Resolve happened.
    fn resolution_step(&mut self) -> Step {
        let c = self.conflict.clone().expect("conflict mode");
        let ground = c.ground_body();
        if ground.is_empty() {
            return Step::Refuted;
        }
        let k = self.trail.level();
        if k > 0 && self.resolves > 0 {
            let top: BTreeSet<&FgLit> = ground.iter().filter(|l| self.trail.level_of(l) == Some(k)).collect();
            if top.len() == 1 {
                let lk = (*top.iter().next().unwrap()).clone();
                if ground.iter().filter(|l| **l == lk).count() > 1 {
                    self.factorize(&lk).expect("duplicates present");
                    return Step::Applied(Rule::Factorize);
                }
                self.backtrack().expect("backtrack side conditions hold");
                return Step::Applied(Rule::Backtrack);
            }
        }
        let pos = self.trail.rightmost_fg().expect("a false conflict needs a nonempty trail");
        let entry = self.trail.entries()[pos].clone();
        let comp = entry.fg().unwrap().complement();
        if !ground.contains(&comp) {
            self.skip().expect("skip applies");
            return Step::Applied(Rule::Skip);
        }
        if ground.iter().filter(|l| **l == comp).count() > 1 {
            self.factorize(&comp).expect("duplicates present");
            return Step::Applied(Rule::Factorize);
        }
        if entry.is_decision() {
            // only reachable if a decision produced the conflict directly
            self.violations.push(format!("conflict {c} resolved without Resolve"));
            self.backtrack().expect("decision literal is the unique top-level literal");
            return Step::Applied(Rule::Backtrack);
        }
        self.resolve().expect("resolve applies")
    }

    /// One step of the regular strategy.
    pub fn step(&mut self) -> Step {
        if self.conflict.is_some() {
            return self.resolution_step();
        }
        if let Some((i, s)) = find_conflict(&self.clauses, &self.trail, &self.pool) {
            return self.apply_conflict(i, s);
        }
        let cands = candidates(&self.clauses, &self.trail, &self.pool);
        if let Some(c) = cands.iter().find(|c| would_conflict(&self.clauses, &self.trail, &self.pool, &c.lit, &c.bg)) {
            self.apply_propagate(c.clone());
            return Step::Applied(Rule::Propagate);
        }
        if let Some(i) = self.propagation.select(&cands, self.clauses.len()) {
            self.apply_propagate(cands[i].clone());
            return Step::Applied(Rule::Propagate);
        }
        let undefined = self.undefined_atoms();
        if undefined.is_empty() {
            return Step::Stuck;
        }
        let prefix = self.trail.decisions();
        let ranked = self.decision.rank(&undefined);
        let safe = |l: &FgLit| !would_conflict(&self.clauses, &self.trail, &self.pool, l, &[]);
        let extend = |l: &FgLit| {
            let mut p = prefix.clone();
            p.push(l.clone());
            p
        };
        let choice = ranked
            .iter()
            .find(|l| !self.blockers.exhausted.contains(&extend(l)) && safe(l))
            .or_else(|| ranked.iter().find(|l| safe(l)))
            .cloned();
        match choice {
            Some(lit) => {
                if !safe(&lit.complement()) {
                    self.blockers.forced.insert(extend(&lit));
                }
                self.apply_decide(lit);
                Step::Applied(Rule::Decide)
            }
            None => {
                // every decision would conflict, so some propagation is pending
                let c = cands.first().expect("a conflicting decision implies a propagation").clone();
                self.apply_propagate(c);
                Step::Applied(Rule::Propagate)
            }
        }
    }

    pub fn restart(&mut self) -> Result<(), RuleError> {
        if !self.is_stuck() {
            return Err(RuleError::Inapplicable(Rule::Restart, "the state is not stuck".into()));
        }
        let sig = self.trail.decisions();
        self.blockers.mark(sig.clone());
        self.trail = Trail::new(&self.pool, self.config.enforce_adiff);
        self.propagation.new_epoch();
        self.restarts += 1;
        self.record(Rule::Restart, |_| format!("blocked {}", show_lits(&sig)));
        Ok(())
    }

    /// Adds `count` fresh constants at the top of the `adiff` chain.
    pub fn grow(&mut self, count: usize) -> Result<(), RuleError> {
        if count == 0 {
            return Err(RuleError::Inapplicable(Rule::Grow, "B' must be nonempty".into()));
        }
        self.ensure_search_mode(Rule::Grow)?;
        let mut added = Vec::new();
        for _ in 0..count {
            let mut i = self.pool.len() + 1;
            while self.pool.contains(&Const::new(&format!("_c{i}"))) {
                i += 1;
            }
            let k = Const::new(&format!("_c{i}"));
            self.pool.push(k.clone());
            added.push(k);
        }
        self.trail = Trail::new(&self.pool, self.config.enforce_adiff);
        self.blockers = Blockers::default();
        self.propagation.new_epoch();
        self.refresh_universe();
        let names: Vec<String> = added.iter().map(|k| k.to_string()).collect();
        self.record(Rule::Grow, |_| format!("B += [{}]", names.join(", ")));
        Ok(())
    }

    /// Checks that every clause of `gnd_B(N ∪ U)` is true in the trail.
    pub fn ground_model_holds(&self) -> bool {
        gnd_all(&self.clauses, &self.pool).iter().all(|c| self.trail.eval_clause(c) == Eval::True)
    }

    pub fn extract_model(&self) -> GroundModel {
        let candidate = SymbolicModel::extract(&self.trail, &self.signature);
        GroundModel {
            trail: self.trail.clone(),
            pool: self.pool.clone(),
            witness: self.trail.witness().unwrap_or_default(),
            candidate,
            verified: None,
            learned: self.learned().to_vec(),
        }
    }

    fn refutation(&self) -> Refutation {
        let c = self.conflict.clone().expect("refuted");
        let witness = self.trail.store().witness_with(&c.ground_constraint()).unwrap_or_default();
        Refutation { conflict: c, witness, learned: self.learned().to_vec(), pool: self.pool.clone() }
    }

    /// Runs the regular strategy to a verdict.
    pub fn run(&mut self) -> Verdict {
        let mut last_model: Option<GroundModel> = None;
        loop {
            if self.steps >= self.config.steps {
                return match last_model {
                    Some(m) => Verdict::SatisfiableGround(m),
                    None => Verdict::Unknown(format!("step budget of {} exhausted", self.config.steps)),
                };
            }
            match self.step() {
                Step::Applied(_) => {}
                Step::Refuted => return Verdict::Unsatisfiable(self.refutation()),
                Step::Stuck => {
                    if !self.ground_model_holds() {
                        self.violations.push("stuck trail does not satisfy gnd_B(N ∪ U)".into());
                    }
                    self.signatures.push(self.trail.decisions());
                    let mut model = self.extract_model();
                    if self.config.seek_model {
                        model.verified = model.candidate.verify(self.initial());
                        if model.verified == Some(true) {
                            return Verdict::SatisfiableGround(model);
                        }
                    } else if self.config.accept_stuck {
                        return Verdict::SatisfiableGround(model);
                    }
                    last_model = Some(model);
                    let explore = self.config.seek_model || !self.blockers.root_exhausted();
                    if self.restarts < self.config.restarts && explore {
                        self.restart().expect("stuck");
                        if !self.config.seek_model && self.blockers.root_exhausted() {
                            if self.pool.len() < self.config.max_constants {
                                self.grow(1).expect("search mode");
                                continue;
                            }
                            return Verdict::SatisfiableGround(last_model.unwrap());
                        }
                    } else if self.pool.len() < self.config.max_constants {
                        self.grow(1).expect("search mode");
                    } else {
                        return Verdict::SatisfiableGround(last_model.unwrap());
                    }
                }
            }
        }
    }
}

fn show_lits(lits: &[FgLit]) -> String {
    let parts: Vec<String> = lits.iter().map(|l| l.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// A foreground entry with the background literals it introduced.
fn describe_group(trail: &Trail, pos: usize) -> String {
    let mut parts = vec![trail.entries()[pos].to_string()];
    for e in &trail.entries()[pos + 1..] {
        match e {
            TrailEntry::Bg { owner, .. } if *owner == pos => parts.push(e.to_string()),
            _ => break,
        }
    }
    parts.join("\t")
}
