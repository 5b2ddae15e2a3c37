use std::fmt;

use num_bigint::BigInt;
use num_traits::Pow;

use crate::clauses::{gnd_all, Clause, Closure};
use crate::trail::Trail;

use super::search::{atom_universe, bg_universe};

/// `(u, s, m, r, d)`, compared lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure {
    pub u: BigInt,
    pub s: usize,
    pub m: usize,
    pub r: usize,
    pub d: usize,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {}, {})", self.u, self.s, self.m, self.r, self.d)
    }
}

/// The parts of the measure that only change when `N ∪ U` or `B` change.
#[derive(Clone, Debug)]
pub struct MeasureBase {
    /// Ground foreground atoms plus ground background literals: an upper
    /// bound on the trail length.
    pub l: usize,
    pub gnd_u: usize,
}

impl MeasureBase {
    pub fn compute(clauses: &[Clause], learned: &[Clause], pool: &[crate::terms::Const]) -> Self {
        let l = atom_universe(clauses, pool).len() + bg_universe(clauses, pool).len();
        MeasureBase { l, gnd_u: gnd_all(learned, pool).len() }
    }
}

pub fn measure(base: &MeasureBase, trail: &Trail, conflict: Option<&Closure>) -> Measure {
    let u = BigInt::from(3).pow(base.l as u32) - BigInt::from(base.gnd_u);
    let m = trail.len();
    match conflict {
        None => Measure { u, s: (1 + base.l).saturating_sub(m), m, r: 0, d: 0 },
        Some(c) => {
            let body = c.ground_body();
            let r = trail
                .rightmost_fg()
                .and_then(|p| trail.entries()[p].fg())
                .map(|l| {
                    let comp = l.complement();
                    body.iter().filter(|b| **b == comp).count()
                })
                .unwrap_or(0);
            Measure { u, s: 0, m, r, d: body.len() }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{Const, FgAtom, FgLit, Term};

    #[test]
    fn initial_measure() {
        let c = Clause::new(vec![], vec![FgLit::pos(FgAtom::new("P", vec![Term::var("x")]))]);
        let pool = vec![Const::new("a"), Const::new("b")];
        let base = MeasureBase::compute(&[c], &[], &pool);
        assert_eq!(base.l, 2);
        let t = Trail::new(&pool, true);
        assert_eq!(measure(&base, &t, None), Measure { u: BigInt::from(9), s: 3, m: 0, r: 0, d: 0 });
    }
}
