//! Problem files: one declaration or clause per line.
//!
//! ```text
//! # comment
//! pred P/1, R/2
//! pred Owns(real, Color)
//! sort Color = {red, green}
//! x = 0 || P(x)
//! y = x + 1 || ~P(x) | P(y)
//! 0 <= x < 1/2, y != 3x || false
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::clauses::{abstract_clause, Clause, RawClause, RawLit};
use crate::terms::{rat, BgLit, FgAtom, FgLit, InputRel, LinExpr, Pred, Rational, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    /// Predicate arities after free-sort compilation.
    pub preds: BTreeMap<Pred, usize>,
    pub clauses: Vec<Clause>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum ArgSort {
    Real,
    Free(String),
}

impl fmt::Display for ArgSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgSort::Real => f.write_str("real"),
            ArgSort::Free(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

const SYMBOLS: [&str; 18] = ["||", "!=", "<=", ">=", "|", ",", "(", ")", "{", "}", "=", "<", ">", "+", "-", "*", "/", "~"];

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: String| ParseError { line: lineno, col: col + 1, msg };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                return Err(err(start, "decimal numbers are not supported; write a fraction p/q".into()));
            }
            let digits: String = chars[start..i].iter().collect();
            let value = Rational::from_integer(digits.parse().map_err(|_| err(start, "bad number".into()))?);
            out.push(Token { tok: Tok::Num(value), col: start });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col: start });
        } else {
            let rest: String = chars[i..].iter().take(2).collect();
            let sym = SYMBOLS
                .iter()
                .find(|s| rest.starts_with(**s))
                .ok_or_else(|| err(i, format!("unexpected character `{c}`")))?;
            out.push(Token { tok: Tok::Sym(sym), col: i });
            i += sym.len();
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col + 1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, col: self.col(), msg: msg.into() })
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn eat(&mut self, sym: &str) -> bool {
        if self.peek() == Some(&Tok::Sym(sym_static(sym))) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.err(format!("expected `{sym}`"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn sym_static(s: &str) -> &'static str {
    SYMBOLS.iter().find(|x| **x == s).copied().unwrap_or("")
}

fn is_pred_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_uppercase())
}

#[derive(Default)]
struct Decls {
    preds: BTreeMap<String, Vec<ArgSort>>,
    /// sort name -> constants, numbered from 1
    sorts: BTreeMap<String, Vec<String>>,
    sort_of_const: BTreeMap<String, (String, usize)>,
    consts: BTreeSet<String>,
}

fn membership_pred(sort: &str) -> String {
    format!("In_{sort}")
}

struct ClauseParser<'a, 'd> {
    cur: Cursor<'a>,
    decls: &'d Decls,
    var_sorts: BTreeMap<String, (ArgSort, usize)>,
}

impl ClauseParser<'_, '_> {
    fn note_var(&mut self, name: &str, sort: ArgSort, col: usize) -> Result<(), ParseError> {
        match self.var_sorts.get(name) {
            Some((s, _)) if *s != sort => Err(ParseError {
                line: self.cur.line,
                col,
                msg: format!("variable `{name}` is used with sorts {s} and {sort}"),
            }),
            Some(_) => Ok(()),
            None => {
                self.var_sorts.insert(name.to_string(), (sort, col));
                Ok(())
            }
        }
    }

    fn check_variable_name(&self, name: &str) -> Result<(), ParseError> {
        if name.starts_with('_') {
            return self.cur.err(format!("identifier `{name}` is reserved for pool constants"));
        }
        if self.decls.consts.contains(name) {
            return self.cur.err(format!(
                "constant `{name}` ranges into the arithmetic sort; the clause set would not be pure"
            ));
        }
        if self.decls.sort_of_const.contains_key(name) {
            return self.cur.err(format!("sort constant `{name}` used where a number is expected"));
        }
        if is_pred_name(name) || name == "true" || name == "false" {
            return self.cur.err(format!("`{name}` cannot occur in an arithmetic term"));
        }
        Ok(())
    }

    fn number(&mut self) -> Result<Option<Rational>, ParseError> {
        let Some(Tok::Num(n)) = self.cur.peek() else { return Ok(None) };
        self.cur.pos += 1;
        let mut value = n.clone();
        if self.cur.peek() == Some(&Tok::Sym("/")) {
            self.cur.pos += 1;
            match self.cur.next() {
                Some(Tok::Num(d)) if !d.is_zero() => value /= d.clone(),
                _ => {
                    self.cur.pos -= 1;
                    return self.cur.err("expected a nonzero denominator");
                }
            }
        }
        Ok(Some(value))
    }

    fn term(&mut self) -> Result<LinExpr, ParseError> {
        if let Some(k) = self.number()? {
            self.cur.eat("*");
            if let Some(Tok::Ident(name)) = self.cur.peek() {
                let col = self.cur.col();
                self.check_variable_name(name)?;
                self.cur.pos += 1;
                self.note_var(name, ArgSort::Real, col)?;
                return Ok(LinExpr::term(Term::var(name)).scaled(&k));
            }
            return Ok(LinExpr::constant(k));
        }
        match self.cur.peek() {
            Some(Tok::Ident(name)) => {
                let col = self.cur.col();
                self.check_variable_name(name)?;
                self.cur.pos += 1;
                self.note_var(name, ArgSort::Real, col)?;
                Ok(LinExpr::term(Term::var(name)))
            }
            _ => self.cur.err("expected a number or a variable"),
        }
    }

    fn expr(&mut self) -> Result<LinExpr, ParseError> {
        let mut sign = Rational::one();
        if self.cur.eat("-") {
            sign = -sign;
        } else {
            self.cur.eat("+");
        }
        let mut e = self.term()?.scaled(&sign);
        loop {
            let s = if self.cur.eat("+") {
                Rational::one()
            } else if self.cur.eat("-") {
                -Rational::one()
            } else {
                return Ok(e);
            };
            e.add_scaled(&self.term()?, &s);
        }
    }

    fn rel(&mut self) -> Option<InputRel> {
        let r = match self.cur.peek()? {
            Tok::Sym("<=") => InputRel::Le,
            Tok::Sym("<") => InputRel::Lt,
            Tok::Sym("=") => InputRel::Eq,
            Tok::Sym("!=") => InputRel::Ne,
            Tok::Sym(">=") => InputRel::Ge,
            Tok::Sym(">") => InputRel::Gt,
            _ => return None,
        };
        self.cur.pos += 1;
        Some(r)
    }

    /// `e1 rel e2 [rel e3 ...]`, chains meaning a conjunction.
    fn atoms(&mut self, out: &mut Vec<BgLit>) -> Result<(), ParseError> {
        let mut left = self.expr()?;
        let Some(mut r) = self.rel() else { return self.cur.err("expected a relation") };
        loop {
            let right = self.expr()?;
            out.push(BgLit::new(&left, r, &right));
            match self.rel() {
                Some(next) => {
                    left = right;
                    r = next;
                }
                None => return Ok(()),
            }
        }
    }

    fn constraint(&mut self) -> Result<Vec<BgLit>, ParseError> {
        let mut out = Vec::new();
        if self.cur.peek() == Some(&Tok::Ident("true".into())) {
            self.cur.pos += 1;
            return Ok(out);
        }
        loop {
            self.atoms(&mut out)?;
            if !self.cur.eat(",") {
                return Ok(out);
            }
        }
    }

    fn argument(&mut self, sort: &ArgSort) -> Result<LinExpr, ParseError> {
        match sort {
            ArgSort::Real => self.expr(),
            ArgSort::Free(s) => {
                let col = self.cur.col();
                let name = self.cur.ident(&format!("a variable or constant of sort {s}"))?;
                if let Some((cs, i)) = self.decls.sort_of_const.get(&name) {
                    if cs != s {
                        self.cur.pos -= 1;
                        return self.cur.err(format!("constant `{name}` has sort {cs}, expected {s}"));
                    }
                    return Ok(LinExpr::constant(rat(*i as i64)));
                }
                self.cur.pos -= 1;
                self.check_variable_name(&name)?;
                self.cur.pos += 1;
                self.note_var(&name, sort.clone(), col)?;
                Ok(LinExpr::term(Term::var(&name)))
            }
        }
    }

    fn literal(&mut self) -> Result<RawLit, ParseError> {
        let positive = !self.cur.eat("~");
        let col = self.cur.col();
        let name = self.cur.ident("a predicate")?;
        let Some(sorts) = self.decls.preds.get(&name) else {
            return Err(ParseError { line: self.cur.line, col, msg: format!("unknown predicate `{name}`") });
        };
        let mut args = Vec::new();
        if self.cur.eat("(") && !self.cur.eat(")") {
            loop {
                let sort = sorts.get(args.len()).cloned().unwrap_or(ArgSort::Real);
                args.push(self.argument(&sort)?);
                if self.cur.eat(")") {
                    break;
                }
                self.cur.expect(",")?;
            }
        }
        if args.len() != sorts.len() {
            return Err(ParseError {
                line: self.cur.line,
                col,
                msg: format!("`{name}` expects {} arguments, got {}", sorts.len(), args.len()),
            });
        }
        Ok(RawLit { positive, pred: Pred::new(&name), args })
    }

    fn body(&mut self) -> Result<Vec<RawLit>, ParseError> {
        let mut out = Vec::new();
        if self.cur.peek() == Some(&Tok::Ident("false".into())) {
            self.cur.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.literal()?);
            if !self.cur.eat("|") {
                return Ok(out);
            }
        }
    }

    fn clause(mut self) -> Result<Clause, ParseError> {
        let constraint = self.constraint()?;
        self.cur.expect("||")?;
        let mut body = self.body()?;
        if !self.cur.done() {
            return self.cur.err("unexpected input after the clause");
        }
        for (name, (sort, _)) in &self.var_sorts {
            if let ArgSort::Free(s) = sort {
                body.push(RawLit { positive: false, pred: Pred::new(&membership_pred(s)), args: vec![LinExpr::term(Term::var(name))] });
            }
        }
        let raw = RawClause { constraint, body };
        abstract_clause(&raw).map_err(|e| ParseError { line: self.cur.line, col: 1, msg: e.to_string() })
    }
}

fn parse_pred_decl(cur: &mut Cursor<'_>, decls: &mut Decls) -> Result<(), ParseError> {
    loop {
        let col = cur.col();
        let name = cur.ident("a predicate name")?;
        if !is_pred_name(&name) {
            return Err(ParseError { line: cur.line, col, msg: format!("predicate `{name}` must start with an uppercase letter") });
        }
        let sorts = if cur.eat("/") {
            match cur.next() {
                Some(Tok::Num(n)) if n.is_integer() => vec![ArgSort::Real; n.to_integer().try_into().unwrap_or(0)],
                _ => {
                    cur.pos -= 1;
                    return cur.err("expected an arity");
                }
            }
        } else if cur.eat("(") {
            let mut sorts = Vec::new();
            if !cur.eat(")") {
                loop {
                    let s = cur.ident("a sort")?;
                    if s == "real" {
                        sorts.push(ArgSort::Real);
                    } else if decls.sorts.contains_key(&s) {
                        sorts.push(ArgSort::Free(s));
                    } else {
                        cur.pos -= 1;
                        return cur.err(format!("unknown sort `{s}`"));
                    }
                    if cur.eat(")") {
                        break;
                    }
                    cur.expect(",")?;
                }
            }
            sorts
        } else {
            Vec::new()
        };
        if decls.preds.insert(name.clone(), sorts).is_some() {
            return Err(ParseError { line: cur.line, col, msg: format!("predicate `{name}` declared twice") });
        }
        if !cur.eat(",") {
            break;
        }
    }
    if cur.done() {
        Ok(())
    } else {
        cur.err("unexpected input after declaration")
    }
}

fn parse_sort_decl(cur: &mut Cursor<'_>, decls: &mut Decls) -> Result<(), ParseError> {
    let name = cur.ident("a sort name")?;
    if decls.sorts.contains_key(&name) || name == "real" {
        cur.pos -= 1;
        return cur.err(format!("sort `{name}` declared twice"));
    }
    cur.expect("=")?;
    cur.expect("{")?;
    let mut members = Vec::new();
    loop {
        let k = cur.ident("a sort constant")?;
        if decls.sort_of_const.contains_key(&k) || decls.consts.contains(&k) {
            cur.pos -= 1;
            return cur.err(format!("constant `{k}` declared twice"));
        }
        members.push(k.clone());
        decls.sort_of_const.insert(k, (name.clone(), members.len()));
        if cur.eat("}") {
            break;
        }
        cur.expect(",")?;
    }
    if !cur.done() {
        return cur.err("unexpected input after declaration");
    }
    decls.sorts.insert(name, members);
    Ok(())
}

fn sort_axioms(sort: &str, size: usize) -> Vec<Clause> {
    let x = LinExpr::term(Term::var("x"));
    let member = FgAtom::new(&membership_pred(sort), vec![Term::var("x")]);
    let mut out: Vec<Clause> = (1..=size)
        .map(|i| Clause::new(vec![BgLit::new(&x, InputRel::Eq, &LinExpr::constant(rat(i as i64)))], vec![FgLit::pos(member.clone())]))
        .collect();
    let outside = (1..=size).map(|i| BgLit::new(&x, InputRel::Ne, &LinExpr::constant(rat(i as i64)))).collect();
    out.push(Clause::new(outside, vec![FgLit::neg(member)]));
    out
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut decls = Decls::default();
    let mut clauses = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = tokenize(line, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor { toks: &toks, pos: 0, line: lineno, end_col: line.chars().count() + 1 };
        match &toks[0].tok {
            Tok::Ident(k) if k == "pred" => {
                cur.pos = 1;
                parse_pred_decl(&mut cur, &mut decls)?;
            }
            Tok::Ident(k) if k == "sort" => {
                cur.pos = 1;
                parse_sort_decl(&mut cur, &mut decls)?;
            }
            Tok::Ident(k) if k == "const" => {
                cur.pos = 1;
                loop {
                    let c = cur.ident("a constant name")?;
                    decls.consts.insert(c);
                    if !cur.eat(",") {
                        break;
                    }
                }
            }
            _ => {
                let parser = ClauseParser { cur, decls: &decls, var_sorts: BTreeMap::new() };
                clauses.push(parser.clause()?);
            }
        }
    }
    let mut preds: BTreeMap<Pred, usize> = decls.preds.iter().map(|(p, s)| (Pred::new(p), s.len())).collect();
    for (sort, members) in &decls.sorts {
        let name = membership_pred(sort);
        if decls.preds.contains_key(&name) {
            return Err(ParseError { line: 1, col: 1, msg: format!("predicate `{name}` is reserved for sort {sort}") });
        }
        preds.insert(Pred::new(&name), 1);
        clauses.extend(sort_axioms(sort, members.len()));
    }
    Ok(Problem { preds, clauses })
}

/// Prints a problem so that `parse_problem` reads it back unchanged.
pub fn format_problem(p: &Problem) -> String {
    let mut out = String::new();
    for (pred, arity) in &p.preds {
        out.push_str(&format!("pred {pred}/{arity}\n"));
    }
    for c in &p.clauses {
        out.push_str(&format!("{c}\n"));
    }
    out
}
