//! Terms, literals and substitutions for Bernays-Schoenfinkel clauses over
//! linear rational arithmetic.
//!
//! There is a single background sort (the rationals). Foreground symbols are
//! predicates and constants only, so a term is either a variable or a
//! constant, and arithmetic appears exclusively in background literals as
//! normalized linear forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// A variable. User variables have `index == 0`; renamed copies produced
/// during inference carry a positive index, so they never collide with
/// anything written in a problem file.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    name: Arc<str>,
    index: u32,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var { name: name.into(), index: 0 }
    }

    pub fn indexed(name: &str, index: u32) -> Self {
        Var { name: name.into(), index }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub(crate) fn with_index(&self, index: u32) -> Self {
        Var { name: self.name.clone(), index }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}_{}", self.name, self.index)
        }
    }
}

/// A foreground constant of the background sort (an element of the
/// instantiation pool, or an impure user constant).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Const(Arc<str>);

impl Const {
    pub fn new(name: &str) -> Self {
        Const(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred(Arc<str>);

impl Pred {
    pub fn new(name: &str) -> Self {
        Pred(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Const),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn cnst(name: &str) -> Self {
        Term::Const(Const::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Const> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// A linear combination `sum(c_i * t_i) + offset` in canonical form: the
/// coefficient map is sorted by term and never stores a zero coefficient.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinExpr {
    coeffs: BTreeMap<Term, Rational>,
    offset: Rational,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: Rational) -> Self {
        LinExpr { coeffs: BTreeMap::new(), offset: q }
    }

    pub fn term(t: Term) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(t, Rational::one());
        LinExpr { coeffs, offset: Rational::zero() }
    }

    pub fn coeffs(&self) -> &BTreeMap<Term, Rational> {
        &self.coeffs
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The single term this expression denotes, if it is exactly `1 * t`.
    pub fn as_term(&self) -> Option<&Term> {
        if !self.offset.is_zero() || self.coeffs.len() != 1 {
            return None;
        }
        let (t, c) = self.coeffs.iter().next()?;
        c.is_one().then_some(t)
    }

    pub fn add_term(&mut self, t: Term, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(t.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&t);
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, factor: &Rational) {
        for (t, c) in &other.coeffs {
            self.add_term(t.clone(), &(c * factor));
        }
        self.offset += &other.offset * factor;
    }

    pub fn add_constant(&mut self, q: &Rational) {
        self.offset += q;
    }

    pub fn scaled(&self, factor: &Rational) -> LinExpr {
        let mut out = LinExpr::zero();
        out.add_scaled(self, factor);
        out
    }

    pub fn negated(&self) -> LinExpr {
        self.scaled(&-Rational::one())
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn apply(&self, subst: &Subst) -> LinExpr {
        let mut out = LinExpr::constant(self.offset.clone());
        for (t, c) in &self.coeffs {
            out.add_term(subst.apply_term(t), c);
        }
        out
    }

    /// Evaluates under an assignment; `None` if some term is unassigned.
    pub fn eval(&self, value: &dyn Fn(&Term) -> Option<Rational>) -> Option<Rational> {
        let mut acc = self.offset.clone();
        for (t, c) in &self.coeffs {
            acc += c * value(t)?;
        }
        Some(acc)
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.coeffs.keys()
    }
}

fn fmt_rational(q: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

pub struct DisplayRational<'a>(pub &'a Rational);

impl fmt::Display for DisplayRational<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rational(self.0, f)
    }
}

fn fmt_linear(coeffs: &BTreeMap<Term, Rational>, offset: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for (t, c) in coeffs {
        let mag = c.abs();
        if first {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else if c.is_negative() {
            f.write_str(" - ")?;
        } else {
            f.write_str(" + ")?;
        }
        if !mag.is_one() {
            fmt_rational(&mag, f)?;
            f.write_str("*")?;
        }
        write!(f, "{t}")?;
        first = false;
    }
    if first {
        return fmt_rational(offset, f);
    }
    if !offset.is_zero() {
        f.write_str(if offset.is_negative() { " - " } else { " + " })?;
        fmt_rational(&offset.abs(), f)?;
    }
    Ok(())
}

impl fmt::Debug for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_linear(&self.coeffs, &self.offset, f)
    }
}

/// Relations accepted on input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputRel {
    Le,
    Lt,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl InputRel {
    pub fn symbol(self) -> &'static str {
        match self {
            InputRel::Le => "<=",
            InputRel::Lt => "<",
            InputRel::Eq => "=",
            InputRel::Ne => "!=",
            InputRel::Gt => ">",
            InputRel::Ge => ">=",
        }
    }
}

/// Canonical relations; `>` and `>=` are stored by negating the linear form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    Ne,
}

/// A background literal `lhs rel rhs` where `lhs` has no constant offset.
/// Polarity is folded into the relation, so the complement of a background
/// literal is again a background literal of the same shape.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BgLit {
    lhs: BTreeMap<Term, Rational>,
    rel: Rel,
    rhs: Rational,
}

impl BgLit {
    /// Builds `left rel right` in canonical form.
    pub fn new(left: &LinExpr, rel: InputRel, right: &LinExpr) -> Self {
        let diff = left.sub(right);
        let (expr, rel) = match rel {
            InputRel::Le => (diff, Rel::Le),
            InputRel::Lt => (diff, Rel::Lt),
            InputRel::Eq => (diff, Rel::Eq),
            InputRel::Ne => (diff, Rel::Ne),
            InputRel::Ge => (diff.negated(), Rel::Le),
            InputRel::Gt => (diff.negated(), Rel::Lt),
        };
        Self::from_expr(expr, rel)
    }

    /// `expr rel 0`.
    pub fn from_expr(expr: LinExpr, rel: Rel) -> Self {
        let LinExpr { mut coeffs, offset } = expr;
        let mut rhs = -offset;
        if matches!(rel, Rel::Eq | Rel::Ne) {
            let leading_negative = coeffs.values().next().map_or(false, |c| c.is_negative());
            if leading_negative {
                for c in coeffs.values_mut() {
                    *c = -c.clone();
                }
                rhs = -rhs;
            }
        }
        BgLit { lhs: coeffs, rel, rhs }
    }

    pub fn lhs(&self) -> &BTreeMap<Term, Rational> {
        &self.lhs
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    /// `lhs - rhs` as a linear expression (the literal reads `expr rel 0`).
    pub fn expr(&self) -> LinExpr {
        LinExpr { coeffs: self.lhs.clone(), offset: -self.rhs.clone() }
    }

    pub fn complement(&self) -> BgLit {
        match self.rel {
            Rel::Eq => BgLit { rel: Rel::Ne, ..self.clone() },
            Rel::Ne => BgLit { rel: Rel::Eq, ..self.clone() },
            // not (e <= r)  ==  -e < -r
            Rel::Le => BgLit::from_expr(self.expr().negated(), Rel::Lt),
            // not (e < r)  ==  -e <= -r
            Rel::Lt => BgLit::from_expr(self.expr().negated(), Rel::Le),
        }
    }

    pub fn apply(&self, subst: &Subst) -> BgLit {
        BgLit::from_expr(self.expr().apply(subst), self.rel)
    }

    /// Replaces terms one for one, e.g. constants by variables.
    pub fn rename_terms(&self, f: &dyn Fn(&Term) -> Term) -> BgLit {
        let mut e = LinExpr::constant(-self.rhs.clone());
        for (t, c) in &self.lhs {
            e.add_term(f(t), c);
        }
        BgLit::from_expr(e, self.rel)
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.lhs.keys()
    }

    pub fn is_ground(&self) -> bool {
        self.terms().all(|t| matches!(t, Term::Const(_)))
    }

    /// Truth value under an assignment of its terms.
    pub fn eval(&self, value: &dyn Fn(&Term) -> Option<Rational>) -> Option<bool> {
        let v = self.expr().eval(value)?;
        Some(match self.rel {
            Rel::Le => !v.is_positive(),
            Rel::Lt => v.is_negative(),
            Rel::Eq => v.is_zero(),
            Rel::Ne => !v.is_zero(),
        })
    }
}

impl fmt::Debug for BgLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for BgLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let all_negative = !self.lhs.is_empty() && self.lhs.values().all(|c| c.is_negative());
        let (coeffs, rhs, sym) = match self.rel {
            Rel::Le | Rel::Lt if all_negative => {
                let flipped = self.lhs.iter().map(|(t, c)| (t.clone(), -c.clone())).collect();
                let sym = if self.rel == Rel::Le { ">=" } else { ">" };
                (flipped, -self.rhs.clone(), sym)
            }
            Rel::Le => (self.lhs.clone(), self.rhs.clone(), "<="),
            Rel::Lt => (self.lhs.clone(), self.rhs.clone(), "<"),
            Rel::Eq => (self.lhs.clone(), self.rhs.clone(), "="),
            Rel::Ne => (self.lhs.clone(), self.rhs.clone(), "!="),
        };
        fmt_linear(&coeffs, &Rational::zero(), f)?;
        write!(f, " {sym} ")?;
        fmt_rational(&rhs, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FgAtom {
    pub pred: Pred,
    pub args: Vec<Term>,
}

impl FgAtom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        FgAtom { pred: Pred::new(pred), args }
    }

    pub fn apply(&self, subst: &Subst) -> FgAtom {
        FgAtom { pred: self.pred.clone(), args: self.args.iter().map(|t| subst.apply_term(t)).collect() }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }
}

impl fmt::Debug for FgAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FgAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FgLit {
    pub positive: bool,
    pub atom: FgAtom,
}

impl FgLit {
    pub fn pos(atom: FgAtom) -> Self {
        FgLit { positive: true, atom }
    }

    pub fn neg(atom: FgAtom) -> Self {
        FgLit { positive: false, atom }
    }

    pub fn complement(&self) -> FgLit {
        FgLit { positive: !self.positive, atom: self.atom.clone() }
    }

    pub fn apply(&self, subst: &Subst) -> FgLit {
        FgLit { positive: self.positive, atom: self.atom.apply(subst) }
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }
}

impl fmt::Debug for FgLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FgLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("~")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// Either kind of literal, as it may appear on a trail.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Literal {
    Fg(FgLit),
    Bg(BgLit),
}

impl Literal {
    pub fn complement(&self) -> Literal {
        match self {
            Literal::Fg(l) => Literal::Fg(l.complement()),
            Literal::Bg(l) => Literal::Bg(l.complement()),
        }
    }

    pub fn apply(&self, subst: &Subst) -> Literal {
        match self {
            Literal::Fg(l) => Literal::Fg(l.apply(subst)),
            Literal::Bg(l) => Literal::Bg(l.apply(subst)),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Fg(l) => write!(f, "{l}"),
            Literal::Bg(l) => write!(f, "{l}"),
        }
    }
}

/// A finite, well-sorted substitution. Since the only foreground operators
/// are constants, the codomain consists of variables and constants.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subst {
    map: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, Term)>>(pairs: I) -> Self {
        let mut s = Subst::new();
        for (v, t) in pairs {
            s.bind(v, t);
        }
        s
    }

    /// Adds `v -> t`; identity bindings are dropped so `dom` stays exact.
    pub fn bind(&mut self, v: Var, t: Term) {
        if t == Term::Var(v.clone()) {
            self.map.remove(&v);
        } else {
            self.map.insert(v, t);
        }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        }
    }

    /// `self` followed by `other`: x(self.then(other)) = (x self) other.
    pub fn then(&self, other: &Subst) -> Subst {
        let mut out = Subst::new();
        for (v, t) in &self.map {
            out.bind(v.clone(), other.apply_term(t));
        }
        for (v, t) in &other.map {
            if !self.map.contains_key(v) {
                out.bind(v.clone(), t.clone());
            }
        }
        out
    }

    /// Keeps only bindings for the given variables.
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Subst {
        Subst { map: self.map.iter().filter(|(v, _)| vars.contains(v)).map(|(v, t)| (v.clone(), t.clone())).collect() }
    }

    pub fn is_idempotent(&self) -> bool {
        self.map.values().all(|t| match t {
            Term::Var(v) => !self.map.contains_key(v),
            Term::Const(_) => true,
        })
    }
}

impl fmt::Debug for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}->{t}")?;
        }
        f.write_str("}")
    }
}

/// Most general unifier of two foreground atoms. Variables on the left are
/// bound in preference to variables on the right, so `unify(P(x), P(y))`
/// yields `{x -> y}`. The result is idempotent and introduces no variables.
pub fn unify(a: &FgAtom, b: &FgAtom) -> Option<Subst> {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return None;
    }
    let mut subst = Subst::new();
    for (s, t) in a.args.iter().zip(&b.args) {
        let s = subst.apply_term(s);
        let t = subst.apply_term(t);
        if s == t {
            continue;
        }
        let (v, r) = match (&s, &t) {
            (Term::Var(v), _) => (v.clone(), t.clone()),
            (_, Term::Var(v)) => (v.clone(), s.clone()),
            (Term::Const(_), Term::Const(_)) => return None,
        };
        let single = Subst::from_pairs([(v, r)]);
        subst = subst.then(&single);
    }
    Some(subst)
}

/// Unifies two literals that must agree in polarity.
pub fn unify_lits(a: &FgLit, b: &FgLit) -> Option<Subst> {
    if a.positive != b.positive {
        return None;
    }
    unify(&a.atom, &b.atom)
}

/// A constant symbol as reported by [`Syntax::cons`]: either a foreground
/// constant or a domain rational.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ConstSym {
    Fg(Const),
    Num(Rational),
}

/// Syntactic queries shared by terms, literals and clauses.
pub trait Syntax {
    fn collect_vars(&self, out: &mut BTreeSet<Var>);
    fn collect_cons(&self, out: &mut BTreeSet<ConstSym>);

    fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn cons(&self) -> BTreeSet<ConstSym> {
        let mut out = BTreeSet::new();
        self.collect_cons(&mut out);
        out
    }

    fn is_ground(&self) -> bool {
        self.vars().is_empty()
    }
}

impl Syntax for Term {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        if let Term::Var(v) = self {
            out.insert(v.clone());
        }
    }

    fn collect_cons(&self, out: &mut BTreeSet<ConstSym>) {
        if let Term::Const(c) = self {
            out.insert(ConstSym::Fg(c.clone()));
        }
    }
}

impl Syntax for FgAtom {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.args.iter().for_each(|t| t.collect_vars(out));
    }

    fn collect_cons(&self, out: &mut BTreeSet<ConstSym>) {
        self.args.iter().for_each(|t| t.collect_cons(out));
    }
}

impl Syntax for FgLit {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.atom.collect_vars(out)
    }

    fn collect_cons(&self, out: &mut BTreeSet<ConstSym>) {
        self.atom.collect_cons(out)
    }
}

impl Syntax for BgLit {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.terms().for_each(|t| t.collect_vars(out));
    }

    // Domain rationals are reported by magnitude of the normalized offset;
    // unit coefficients are implicit in the syntax and not counted.
    fn collect_cons(&self, out: &mut BTreeSet<ConstSym>) {
        self.terms().for_each(|t| t.collect_cons(out));
        out.insert(ConstSym::Num(self.rhs.abs()));
        for c in self.lhs.values() {
            let c = c.abs();
            if !c.is_one() {
                out.insert(ConstSym::Num(c));
            }
        }
    }
}

impl Syntax for Literal {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Literal::Fg(l) => l.collect_vars(out),
            Literal::Bg(l) => l.collect_vars(out),
        }
    }

    fn collect_cons(&self, out: &mut BTreeSet<ConstSym>) {
        match self {
            Literal::Fg(l) => l.collect_cons(out),
            Literal::Bg(l) => l.collect_cons(out),
        }
    }
}

impl<T: Syntax> Syntax for [T] {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.iter().for_each(|x| x.collect_vars(out));
    }

    fn collect_cons(&self, out: &mut BTreeSet<ConstSym>) {
        self.iter().for_each(|x| x.collect_cons(out));
    }
}

impl<T: Syntax> Syntax for Vec<T> {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.as_slice().collect_vars(out)
    }

    fn collect_cons(&self, out: &mut BTreeSet<ConstSym>) {
        self.as_slice().collect_cons(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(pairs: &[(i64, &str)], offset: i64) -> LinExpr {
        let mut e = LinExpr::constant(rat(offset));
        for (c, name) in pairs {
            e.add_term(Term::var(name), &rat(*c));
        }
        e
    }

    fn p(name: &str, args: &[&str]) -> FgAtom {
        FgAtom::new(name, args.iter().map(|a| Term::var(a)).collect())
    }

    #[test]
    fn complement_flips_polarity() {
        let pa = FgLit::pos(FgAtom::new("P", vec![Term::cnst("a")]));
        assert_eq!(pa.complement(), FgLit::neg(pa.atom.clone()));
        let nq = FgLit::neg(p("Q", &["x", "y"]));
        assert_eq!(nq.complement(), FgLit::pos(p("Q", &["x", "y"])));
    }

    #[test]
    fn background_complement_is_involution() {
        let a = LinExpr::term(Term::cnst("a"));
        let b = LinExpr::term(Term::cnst("b"));
        for rel in [InputRel::Le, InputRel::Lt, InputRel::Eq, InputRel::Ne, InputRel::Gt, InputRel::Ge] {
            let l = BgLit::new(&a, rel, &b);
            assert_eq!(l.complement().complement(), l, "{rel:?}");
            assert_ne!(l.complement(), l);
        }
    }

    #[test]
    fn apply_subst_on_background_literal() {
        // y = x + 1 under {x->a, y->b} reads b = a + 1
        let l = BgLit::new(&lin(&[(1, "y")], 0), InputRel::Eq, &lin(&[(1, "x")], 1));
        let s = Subst::from_pairs([(Var::new("x"), Term::cnst("a")), (Var::new("y"), Term::cnst("b"))]);
        let ground = l.apply(&s);
        let expected = BgLit::new(
            &LinExpr::term(Term::cnst("b")),
            InputRel::Eq,
            &{
                let mut e = LinExpr::term(Term::cnst("a"));
                e.add_constant(&rat(1));
                e
            },
        );
        assert_eq!(ground, expected);
        assert!(ground.is_ground());
        assert_eq!(l.apply(&Subst::new()), l);
    }

    #[test]
    fn linear_terms_merge_and_cancel() {
        let mut e = lin(&[(2, "x"), (3, "y")], 1);
        e.add_scaled(&lin(&[(-2, "x")], 0), &rat(1));
        assert_eq!(e, lin(&[(3, "y")], 1));
        // x and y collapse under {x -> y}
        let s = Subst::from_pairs([(Var::new("x"), Term::var("y"))]);
        assert_eq!(lin(&[(1, "x"), (-1, "y")], 0).apply(&s), LinExpr::zero());
    }

    #[test]
    fn unify_examples() {
        let s = unify(&p("P", &["x", "y"]), &p("P", &["u", "v"])).unwrap();
        assert_eq!(s, Subst::from_pairs([(Var::new("x"), Term::var("u")), (Var::new("y"), Term::var("v"))]));
        assert!(unify(&p("P", &["x"]), &p("Q", &["y"])).is_none());
        let s = unify(&p("P", &["x", "y"]), &p("P", &["y", "y"])).unwrap();
        assert_eq!(s, Subst::from_pairs([(Var::new("x"), Term::var("y"))]));
        assert!(s.is_idempotent());
        let a = FgAtom::new("P", vec![Term::cnst("a")]);
        let b = FgAtom::new("P", vec![Term::cnst("b")]);
        assert!(unify(&a, &b).is_none());
    }

    #[test]
    fn vars_cons_ground() {
        // x >= 5, 3x + 4y = z || Q(x,y,z)
        let c1 = BgLit::new(&lin(&[(1, "x")], 0), InputRel::Ge, &lin(&[], 5));
        let c2 = BgLit::new(&lin(&[(3, "x"), (4, "y")], 0), InputRel::Eq, &lin(&[(1, "z")], 0));
        let mut vars = vec![c1, c2].vars();
        vars.extend(FgLit::pos(p("Q", &["x", "y", "z"])).vars());
        assert_eq!(vars, ["x", "y", "z"].iter().map(|n| Var::new(n)).collect());
        assert!(FgLit::pos(FgAtom::new("P", vec![Term::cnst("a")])).is_ground());

        // a = 0, b = a + 1
        let a = LinExpr::term(Term::cnst("a"));
        let mut a1 = a.clone();
        a1.add_constant(&rat(1));
        let lits = vec![
            BgLit::new(&a, InputRel::Eq, &LinExpr::zero()),
            BgLit::new(&LinExpr::term(Term::cnst("b")), InputRel::Eq, &a1),
        ];
        let expected: BTreeSet<ConstSym> = [
            ConstSym::Fg(Const::new("a")),
            ConstSym::Fg(Const::new("b")),
            ConstSym::Num(rat(0)),
            ConstSym::Num(rat(1)),
        ]
        .into_iter()
        .collect();
        assert_eq!(lits.cons(), expected);
    }
}
