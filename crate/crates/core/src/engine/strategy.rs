//! Pluggable heuristics. The calculus fixes which rule applications are
//! legal; these traits pick among them. Implementations are registered by
//! name and selected from the command line.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::search::Candidate;
use crate::terms::{FgAtom, FgLit};

/// Chooses which Propagate application to perform, or declines so the
/// engine moves on to Decide. Candidates that would immediately produce a
/// conflict never reach the policy: the engine takes those first.
pub trait PropagationPolicy {
    fn name(&self) -> &'static str;
    fn select(&mut self, candidates: &[Candidate], clauses: usize) -> Option<usize>;
    fn propagated(&mut self, clause: usize);
    /// A new decision level, backtrack, restart or grow.
    fn new_epoch(&mut self);
}

/// Ranks decision literals; the engine takes the first legal one.
pub trait DecisionStrategy {
    fn name(&self) -> &'static str;
    fn rank(&mut self, undefined: &[FgAtom]) -> Vec<FgLit>;
}

/// Each clause propagates at most `cap` times per epoch; the scan resumes
/// after the clause that propagated last.
pub struct Fair {
    cap: usize,
    used: HashMap<usize, usize>,
    cursor: usize,
}

impl Fair {
    pub fn new(cap: usize) -> Self {
        Fair { cap: cap.max(1), used: HashMap::new(), cursor: 0 }
    }
}

impl PropagationPolicy for Fair {
    fn name(&self) -> &'static str {
        "fair"
    }

    fn select(&mut self, candidates: &[Candidate], clauses: usize) -> Option<usize> {
        let open = |c: &Candidate| self.used.get(&c.clause).copied().unwrap_or(0) < self.cap;
        let distance = |c: &Candidate| (c.clause + clauses - self.cursor % clauses.max(1)) % clauses.max(1);
        candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| open(c))
            .min_by_key(|(i, c)| (distance(c), *i))
            .map(|(i, _)| i)
    }

    fn propagated(&mut self, clause: usize) {
        *self.used.entry(clause).or_default() += 1;
        self.cursor = clause + 1;
    }

    fn new_epoch(&mut self) {
        self.used.clear();
    }
}

/// No restriction: always the first candidate.
pub struct Exhaustive;

impl PropagationPolicy for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn select(&mut self, candidates: &[Candidate], _clauses: usize) -> Option<usize> {
        (!candidates.is_empty()).then_some(0)
    }

    fn propagated(&mut self, _clause: usize) {}

    fn new_epoch(&mut self) {}
}

/// No restriction; a uniformly random candidate.
pub struct RandomPick {
    rng: ChaCha8Rng,
}

impl PropagationPolicy for RandomPick {
    fn name(&self) -> &'static str {
        "random"
    }

    fn select(&mut self, candidates: &[Candidate], _clauses: usize) -> Option<usize> {
        (!candidates.is_empty()).then(|| self.rng.gen_range(0..candidates.len()))
    }

    fn propagated(&mut self, _clause: usize) {}

    fn new_epoch(&mut self) {}
}

/// Atoms in universe order, positive polarity first.
pub struct Ordered;

impl DecisionStrategy for Ordered {
    fn name(&self) -> &'static str {
        "ordered"
    }

    fn rank(&mut self, undefined: &[FgAtom]) -> Vec<FgLit> {
        undefined.iter().flat_map(|a| [FgLit::pos(a.clone()), FgLit::neg(a.clone())]).collect()
    }
}

/// Seeded random atom order and polarity.
pub struct Shuffled {
    rng: ChaCha8Rng,
}

impl DecisionStrategy for Shuffled {
    fn name(&self) -> &'static str {
        "shuffled"
    }

    fn rank(&mut self, undefined: &[FgAtom]) -> Vec<FgLit> {
        let mut atoms = undefined.to_vec();
        atoms.shuffle(&mut self.rng);
        atoms
            .into_iter()
            .flat_map(|a| {
                let (p, n) = (FgLit::pos(a.clone()), FgLit::neg(a));
                if self.rng.gen() { [p, n] } else { [n, p] }
            })
            .collect()
    }
}

/// Parameters a strategy constructor may use.
#[derive(Clone, Copy, Debug)]
pub struct StrategyParams {
    pub propagation_cap: usize,
    pub seed: u64,
}

type PropagationCtor = fn(&StrategyParams) -> Box<dyn PropagationPolicy>;
type DecisionCtor = fn(&StrategyParams) -> Box<dyn DecisionStrategy>;

pub struct Registry {
    propagation: BTreeMap<&'static str, PropagationCtor>,
    decision: BTreeMap<&'static str, DecisionCtor>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry { propagation: BTreeMap::new(), decision: BTreeMap::new() };
        r.register_propagation("fair", |p| Box::new(Fair::new(p.propagation_cap)));
        r.register_propagation("exhaustive", |_| Box::new(Exhaustive));
        r.register_propagation("random", |p| Box::new(RandomPick { rng: ChaCha8Rng::seed_from_u64(p.seed) }));
        r.register_decision("ordered", |_| Box::new(Ordered));
        r.register_decision("shuffled", |p| Box::new(Shuffled { rng: ChaCha8Rng::seed_from_u64(p.seed) }));
        r
    }
}

impl Registry {
    pub fn register_propagation(&mut self, name: &'static str, ctor: PropagationCtor) {
        self.propagation.insert(name, ctor);
    }

    pub fn register_decision(&mut self, name: &'static str, ctor: DecisionCtor) {
        self.decision.insert(name, ctor);
    }

    pub fn propagation(&self, name: &str, params: &StrategyParams) -> Option<Box<dyn PropagationPolicy>> {
        self.propagation.get(name).map(|ctor| ctor(params))
    }

    pub fn decision(&self, name: &str, params: &StrategyParams) -> Option<Box<dyn DecisionStrategy>> {
        self.decision.get(name).map(|ctor| ctor(params))
    }

    pub fn propagation_names(&self) -> Vec<&'static str> {
        self.propagation.keys().copied().collect()
    }

    pub fn decision_names(&self) -> Vec<&'static str> {
        self.decision.keys().copied().collect()
    }
}
