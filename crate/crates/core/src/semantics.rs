//! Bounded formulas, their ground satisfaction, and Boolean values over names.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{self, Mask};
use crate::boolcomp::Forcing;
use crate::error::SyntaxError;
use crate::hf::{parse_hf_at, HFSet};
use crate::lexer::{Cursor, Tok};
use crate::names::{NameMap, PName};
use crate::order::Filter;

pub const DEFAULT_DEPTH_CAP: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("quantifier over `{0}` is unbounded; write `forall {0} in T (...)`")]
    Unbounded(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("formula depth {depth} exceeds the cap of {cap}")]
    TooDeep { depth: usize, cap: usize },
    #[error("a name term cannot be evaluated in the ground model; interpret it first")]
    NameInGround,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Arc<str>),
    Lit(HFSet),
    Name(PName),
}

impl Term {
    pub fn var(v: &str) -> Term {
        Term::Var(Arc::from(v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    In(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Forall(Arc<str>, Term, Box<Formula>),
    Exists(Arc<str>, Term, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn is_in(a: Term, b: Term) -> Formula {
        Formula::In(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, t: Term, body: Formula) -> Formula {
        Formula::Forall(Arc::from(v), t, Box::new(body))
    }

    pub fn exists(v: &str, t: Term, body: Formula) -> Formula {
        Formula::Exists(Arc::from(v), t, Box::new(body))
    }

    pub fn parse(text: &str) -> Result<Formula, FormulaError> {
        let mut cur = Cursor::new(text)?;
        let f = parse_or(&mut cur)?;
        if !cur.at_end() {
            return Err(cur.unexpected("end of formula").into());
        }
        Ok(f)
    }

    /// Connective and quantifier nesting; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Eq(..) | Formula::In(..) => 0,
            Formula::Not(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Forall(_, _, a) | Formula::Exists(_, _, a) => 1 + a.depth(),
        }
    }

    pub fn check_depth(&self, cap: usize) -> Result<(), FormulaError> {
        let depth = self.depth();
        if depth > cap {
            Err(FormulaError::TooDeep { depth, cap })
        } else {
            Ok(())
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Arc<str>>, out: &mut BTreeSet<Arc<str>>) {
        let mut term = |t: &Term, bound: &Vec<Arc<str>>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::Eq(a, b) | Formula::In(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, t, a) | Formula::Exists(v, t, a) => {
                term(t, bound);
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Negation normal form: negations only in front of atoms.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, pos: bool) -> Formula {
        match (self, pos) {
            (Formula::Eq(..) | Formula::In(..), true) => self.clone(),
            (Formula::Eq(..) | Formula::In(..), false) => Formula::not(self.clone()),
            (Formula::Not(a), _) => a.nnf_signed(!pos),
            (Formula::And(a, b), true) => Formula::and(a.nnf_signed(true), b.nnf_signed(true)),
            (Formula::And(a, b), false) => Formula::or(a.nnf_signed(false), b.nnf_signed(false)),
            (Formula::Or(a, b), true) => Formula::or(a.nnf_signed(true), b.nnf_signed(true)),
            (Formula::Or(a, b), false) => Formula::and(a.nnf_signed(false), b.nnf_signed(false)),
            (Formula::Forall(v, t, a), true) => Formula::Forall(v.clone(), t.clone(), Box::new(a.nnf_signed(true))),
            (Formula::Forall(v, t, a), false) => Formula::Exists(v.clone(), t.clone(), Box::new(a.nnf_signed(false))),
            (Formula::Exists(v, t, a), true) => Formula::Exists(v.clone(), t.clone(), Box::new(a.nnf_signed(true))),
            (Formula::Exists(v, t, a), false) => Formula::Forall(v.clone(), t.clone(), Box::new(a.nnf_signed(false))),
        }
    }

    /// Replaces free variables by terms. Bound variables shadow.
    pub fn substitute(&self, env: &HashMap<Arc<str>, Term>) -> Formula {
        let sub = |t: &Term| match t {
            Term::Var(v) => env.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        };
        match self {
            Formula::Eq(a, b) => Formula::Eq(sub(a), sub(b)),
            Formula::In(a, b) => Formula::In(sub(a), sub(b)),
            Formula::Not(a) => Formula::not(a.substitute(env)),
            Formula::And(a, b) => Formula::and(a.substitute(env), b.substitute(env)),
            Formula::Or(a, b) => Formula::or(a.substitute(env), b.substitute(env)),
            Formula::Forall(v, t, a) | Formula::Exists(v, t, a) => {
                let t = sub(t);
                let body = if env.contains_key(v) {
                    let mut inner = env.clone();
                    inner.remove(v);
                    a.substitute(&inner)
                } else {
                    a.substitute(env)
                };
                match self {
                    Formula::Forall(..) => Formula::Forall(v.clone(), t, Box::new(body)),
                    _ => Formula::Exists(v.clone(), t, Box::new(body)),
                }
            }
        }
    }

    /// Substitutes names for variables.
    pub fn with_names(&self, env: &NameEnv) -> Formula {
        let m: HashMap<Arc<str>, Term> = env.iter().map(|(k, v)| (k.clone(), Term::Name(v.clone()))).collect();
        self.substitute(&m)
    }

    /// Rewrites every term, leaving binders alone.
    pub fn map_terms<F: Fn(&Term) -> Term>(&self, t: &F) -> Formula {
        match self {
            Formula::Eq(a, b) => Formula::Eq(t(a), t(b)),
            Formula::In(a, b) => Formula::In(t(a), t(b)),
            Formula::Not(a) => Formula::not(a.map_terms(t)),
            Formula::And(a, b) => Formula::and(a.map_terms(t), b.map_terms(t)),
            Formula::Or(a, b) => Formula::or(a.map_terms(t), b.map_terms(t)),
            Formula::Forall(v, x, a) => Formula::Forall(v.clone(), t(x), Box::new(a.map_terms(t))),
            Formula::Exists(v, x, a) => Formula::Exists(v.clone(), t(x), Box::new(a.map_terms(t))),
        }
    }

    /// Replaces every name term by its interpretation under `g`.
    pub fn ground(&self, g: &Filter) -> Formula {
        self.map_terms(&|t: &Term| match t {
            Term::Name(s) => Term::Lit(s.interpret(g)),
            _ => t.clone(),
        })
    }

    /// Replaces every ground literal by its check name.
    pub fn with_check_literals(&self, top: usize) -> Formula {
        self.map_terms(&|t: &Term| match t {
            Term::Lit(x) => Term::Name(PName::check(x, top)),
            _ => t.clone(),
        })
    }
}

fn parse_or(cur: &mut Cursor) -> Result<Formula, FormulaError> {
    let mut f = parse_and(cur)?;
    while cur.eat_word("or") {
        f = Formula::or(f, parse_and(cur)?);
    }
    Ok(f)
}

fn parse_and(cur: &mut Cursor) -> Result<Formula, FormulaError> {
    let mut f = parse_unary(cur)?;
    while cur.eat_word("and") {
        f = Formula::and(f, parse_unary(cur)?);
    }
    Ok(f)
}

fn parse_unary(cur: &mut Cursor) -> Result<Formula, FormulaError> {
    if cur.eat_word("not") {
        return Ok(Formula::not(parse_unary(cur)?));
    }
    if cur.eat_punct('(') {
        let f = parse_or(cur)?;
        cur.expect_punct(')')?;
        return Ok(f);
    }
    for q in ["forall", "exists"] {
        if cur.eat_word(q) {
            let v = cur.word("variable")?;
            if !cur.eat_word("in") {
                return Err(FormulaError::Unbounded(v));
            }
            let t = parse_term(cur)?;
            cur.expect_punct('(')?;
            let body = parse_or(cur)?;
            cur.expect_punct(')')?;
            return Ok(if q == "forall" { Formula::forall(&v, t, body) } else { Formula::exists(&v, t, body) });
        }
    }
    let a = parse_term(cur)?;
    if cur.eat_punct('=') {
        return Ok(Formula::Eq(a, parse_term(cur)?));
    }
    if cur.eat_punct('!') {
        cur.expect_punct('=')?;
        return Ok(Formula::not(Formula::Eq(a, parse_term(cur)?)));
    }
    if cur.eat_word("in") {
        return Ok(Formula::In(a, parse_term(cur)?));
    }
    if matches!(cur.peek(), Some(Tok::Word(w)) if w == "not") && matches!(cur.peek_at(1), Some(Tok::Word(w)) if w == "in") {
        cur.next();
        cur.next();
        return Ok(Formula::not(Formula::In(a, parse_term(cur)?)));
    }
    Err(cur.unexpected("`=`, `!=`, `in` or `not in`").into())
}

const KEYWORDS: &[&str] = &["in", "not", "and", "or", "forall", "exists", "chk"];

fn parse_term(cur: &mut Cursor) -> Result<Term, FormulaError> {
    if cur.eat_word("chk") {
        return Ok(Term::Lit(parse_hf_at(cur)?));
    }
    match cur.peek() {
        Some(Tok::Word(w)) if !KEYWORDS.contains(&w.as_str()) && w.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') => {
            let v = Term::var(w);
            cur.next();
            Ok(v)
        }
        _ => Err(cur.unexpected("a term (`chk HF` or a variable)").into()),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Lit(x) => write!(f, "chk {x}"),
            Term::Name(s) => write!(f, "<name {:016x}>", s.structural_hash()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::In(a, b) => write!(f, "{a} in {b}"),
            Formula::Not(a) => match a.as_ref() {
                Formula::Eq(..) | Formula::In(..) | Formula::Not(_) => write!(f, "not {a}"),
                _ => write!(f, "not ({a})"),
            },
            Formula::And(a, b) => write!(f, "({a}) and ({b})"),
            Formula::Or(a, b) => write!(f, "({a}) or ({b})"),
            Formula::Forall(v, t, a) => write!(f, "forall {v} in {t} ({a})"),
            Formula::Exists(v, t, a) => write!(f, "exists {v} in {t} ({a})"),
        }
    }
}

pub type GroundEnv = NameMap<Arc<str>, HFSet>;
pub type NameEnv = NameMap<Arc<str>, PName>;

pub fn ground_env<I: IntoIterator<Item = (&'static str, HFSet)>>(it: I) -> GroundEnv {
    it.into_iter().map(|(k, v)| (Arc::from(k), v)).collect()
}

pub fn name_env<S: AsRef<str>, I: IntoIterator<Item = (S, PName)>>(it: I) -> NameEnv {
    it.into_iter().map(|(k, v)| (Arc::from(k.as_ref()), v)).collect()
}

/// Interprets every name of `env` under `g`.
pub fn interpret_env(env: &NameEnv, g: &Filter) -> GroundEnv {
    env.iter().map(|(k, s)| (k.clone(), s.interpret(g))).collect()
}

/// Standard satisfaction over hereditarily finite sets.
pub fn eval_ground(f: &Formula, env: &GroundEnv) -> Result<bool, FormulaError> {
    let mut scope: Vec<(Arc<str>, HFSet)> = Vec::new();
    ground_rec(f, env, &mut scope)
}

fn ground_term(t: &Term, env: &GroundEnv, scope: &[(Arc<str>, HFSet)]) -> Result<HFSet, FormulaError> {
    match t {
        Term::Lit(x) => Ok(x.clone()),
        Term::Name(_) => Err(FormulaError::NameInGround),
        Term::Var(v) => scope
            .iter()
            .rev()
            .find(|(k, _)| k == v)
            .map(|(_, x)| x.clone())
            .or_else(|| env.get(v).cloned())
            .ok_or_else(|| FormulaError::UnboundVariable(v.to_string())),
    }
}

fn ground_rec(f: &Formula, env: &GroundEnv, scope: &mut Vec<(Arc<str>, HFSet)>) -> Result<bool, FormulaError> {
    Ok(match f {
        Formula::Eq(a, b) => ground_term(a, env, scope)? == ground_term(b, env, scope)?,
        Formula::In(a, b) => ground_term(b, env, scope)?.contains(&ground_term(a, env, scope)?),
        Formula::Not(a) => !ground_rec(a, env, scope)?,
        Formula::And(a, b) => ground_rec(a, env, scope)? && ground_rec(b, env, scope)?,
        Formula::Or(a, b) => ground_rec(a, env, scope)? || ground_rec(b, env, scope)?,
        Formula::Forall(v, t, a) | Formula::Exists(v, t, a) => {
            let dom = ground_term(t, env, scope)?;
            let universal = matches!(f, Formula::Forall(..));
            let members: Vec<HFSet> = dom.members().map(|s| s.iter().cloned().collect()).unwrap_or_default();
            for x in members {
                scope.push((v.clone(), x));
                let r = ground_rec(a, env, scope);
                scope.pop();
                if r? != universal {
                    return Ok(!universal);
                }
            }
            universal
        }
    })
}

/// Boolean-valued evaluation over a fixed forcing, memoizing `⟦σ = τ⟧`.
///
/// The memo is keyed by node address and holds both names, so an address
/// cannot be reused while its entry lives.
pub struct Evaluator<'a> {
    pub forcing: &'a Forcing,
    eq_memo: NameMap<(usize, usize), (PName, PName, Mask)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(forcing: &'a Forcing) -> Self {
        Evaluator { forcing, eq_memo: NameMap::default() }
    }

    fn one(&self) -> Mask {
        self.forcing.alg.one()
    }

    /// `⟦σ = τ⟧`, by double inclusion.
    pub fn eq(&mut self, s: &PName, t: &PName) -> Mask {
        if s == t {
            return self.one();
        }
        match (s.leaf_value(), t.leaf_value()) {
            (Some(_), Some(_)) | (Some(_), None) | (None, Some(_)) => return 0,
            (None, None) => {}
        }
        let (a, b) = (s.ptr_id(), t.ptr_id());
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(&(_, _, v)) = self.eq_memo.get(&key) {
            return v;
        }
        let v = self.subset(s, t) & self.subset(t, s);
        self.eq_memo.insert(key, (s.clone(), t.clone(), v));
        v
    }

    /// `⟦σ ⊆ τ⟧` for set names.
    fn subset(&mut self, s: &PName, t: &PName) -> Mask {
        let one = self.one();
        let mut acc = one;
        for e in s.entries() {
            let q = self.forcing.embed(e.cond);
            acc &= (one & !q) | self.member(&e.child, t);
            if acc == 0 {
                break;
            }
        }
        acc
    }

    /// `⟦σ ∈ τ⟧`. Nothing is a member of a leaf.
    pub fn member(&mut self, s: &PName, t: &PName) -> Mask {
        let mut acc = 0;
        for e in t.entries() {
            let q = self.forcing.embed(e.cond);
            if q & !acc != 0 {
                acc |= q & self.eq(s, &e.child);
            }
        }
        acc
    }

    fn term(&self, t: &Term, env: &NameEnv, scope: &[(Arc<str>, PName)]) -> Result<PName, FormulaError> {
        match t {
            Term::Name(s) => Ok(s.clone()),
            Term::Lit(x) => Ok(PName::check(x, self.forcing.poset.top())),
            Term::Var(v) => scope
                .iter()
                .rev()
                .find(|(k, _)| k == v)
                .map(|(_, s)| s.clone())
                .or_else(|| env.get(v).cloned())
                .ok_or_else(|| FormulaError::UnboundVariable(v.to_string())),
        }
    }

    /// `⟦φ⟧` with free variables bound to names by `env`.
    pub fn value(&mut self, f: &Formula, env: &NameEnv) -> Result<Mask, FormulaError> {
        self.value_rec(f, env, &mut Vec::new())
    }

    fn value_rec(&mut self, f: &Formula, env: &NameEnv, scope: &mut Vec<(Arc<str>, PName)>) -> Result<Mask, FormulaError> {
        let one = self.one();
        Ok(match f {
            Formula::Eq(a, b) => {
                let (s, t) = (self.term(a, env, scope)?, self.term(b, env, scope)?);
                self.eq(&s, &t)
            }
            Formula::In(a, b) => {
                let (s, t) = (self.term(a, env, scope)?, self.term(b, env, scope)?);
                self.member(&s, &t)
            }
            Formula::Not(a) => one & !self.value_rec(a, env, scope)?,
            Formula::And(a, b) => self.value_rec(a, env, scope)? & self.value_rec(b, env, scope)?,
            Formula::Or(a, b) => self.value_rec(a, env, scope)? | self.value_rec(b, env, scope)?,
            Formula::Forall(v, t, a) => {
                let dom = self.term(t, env, scope)?;
                let mut acc = one;
                for e in dom.entries() {
                    let q = self.forcing.embed(e.cond);
                    scope.push((v.clone(), e.child.clone()));
                    let r = self.value_rec(a, env, scope);
                    scope.pop();
                    acc &= (one & !q) | r?;
                }
                acc
            }
            Formula::Exists(v, t, a) => {
                let dom = self.term(t, env, scope)?;
                let mut acc = 0;
                for e in dom.entries() {
                    let q = self.forcing.embed(e.cond);
                    scope.push((v.clone(), e.child.clone()));
                    let r = self.value_rec(a, env, scope);
                    scope.pop();
                    acc |= q & r?;
                }
                acc
            }
        })
    }

    /// `p ⊩ φ` iff `embed(p) ≤ ⟦φ⟧`.
    pub fn forces(&mut self, p: usize, f: &Formula, env: &NameEnv) -> Result<bool, FormulaError> {
        Ok(bits::subset(self.forcing.embed(p), self.value(f, env)?))
    }
}

/// `⟦φ⟧` with a fresh evaluator.
pub fn boolean_value(forcing: &Forcing, f: &Formula, env: &NameEnv) -> Result<Mask, FormulaError> {
    Evaluator::new(forcing).value(f, env)
}

pub fn forces(forcing: &Forcing, p: usize, f: &Formula, env: &NameEnv) -> Result<bool, FormulaError> {
    Evaluator::new(forcing).forces(p, f, env)
}

/// `p ⊩ φ` decided by truth in every generic extension through `p`.
pub fn forces_by_generics(forcing: &Forcing, p: usize, f: &Formula, env: &NameEnv) -> Result<bool, FormulaError> {
    for g in forcing.generic_filters() {
        if g.contains(p) && !eval_ground(f, &interpret_env(env, &g))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `p ⊩⁺ τ ∈ σ`: some `q ≥ p` has `(τ, q) ∈ σ`.
pub fn strongly_forces(forcing: &Forcing, p: usize, t: &PName, s: &PName) -> bool {
    s.entries()
        .iter()
        .any(|e| &e.child == t && forcing.poset.leq(p, e.cond))
}
