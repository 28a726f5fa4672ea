//! Many formulas evaluated together.
//!
//! A batch interns every subformula once, with variables resolved to slots
//! (free variables first, then binders by nesting level). Evaluating the
//! batch under one assignment memoizes each node on the slots it reads, so
//! a family of formulas built from common parts costs little more than its
//! distinct parts.

use std::collections::HashMap;
use std::sync::Arc;

use crate::bits::Mask;
use crate::boolcomp::Forcing;
use crate::hf::HFSet;
use crate::names::PName;
use crate::semantics::{Evaluator, Formula, FormulaError, Term};

/// Most slots (free variables plus nested binders) a batch supports.
pub const MAX_SLOTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Operand {
    Slot(u8),
    Lit(u32),
    Name(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Eq(Operand, Operand),
    In(Operand, Operand),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
    Forall(Operand, u32),
    Exists(Operand, u32),
}

/// Ids of the read slots, packed in slot order.
type Key = [usize; KEY_SLOTS];

/// Nodes reading more slots than this are not memoized.
const KEY_SLOTS: usize = 4;

#[derive(Clone, Debug)]
pub struct FormulaBatch {
    vars: Vec<Arc<str>>,
    nodes: Vec<Node>,
    /// Bit `i` set when node reads slot `i`.
    reads: Vec<u16>,
    /// Slot a quantifier binds.
    bind: Vec<u8>,
    roots: Vec<u32>,
    lits: Vec<HFSet>,
    names: Vec<PName>,
}

impl FormulaBatch {
    /// Interns `formulas`, whose free variables must be among `vars`.
    pub fn new<S: AsRef<str>>(formulas: &[Formula], vars: &[S]) -> Result<FormulaBatch, FormulaError> {
        let mut b = Builder::default();
        let vars: Vec<Arc<str>> = vars.iter().map(|v| Arc::from(v.as_ref())).collect();
        let mut roots = Vec::with_capacity(formulas.len());
        for f in formulas {
            let mut scope = vars.clone();
            roots.push(b.formula(f, &mut scope)?);
        }
        Ok(FormulaBatch { vars, nodes: b.nodes, reads: b.reads, bind: b.bind, roots, lits: b.lits, names: b.names })
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Distinct subformulas.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn vars(&self) -> &[Arc<str>] {
        &self.vars
    }

    /// `⟦φ⟧` for every formula, free variables bound in `vars` order.
    pub fn values(&self, ev: &mut Evaluator, env: &[PName]) -> Vec<Mask> {
        self.runner(ev.forcing).values(ev, env).to_vec()
    }

    /// Reusable scratch space for repeated [`Self::values`] calls over one
    /// forcing.
    pub fn runner<'b, 'f>(&'b self, forcing: &'f Forcing) -> BoolRun<'b, 'f> {
        let top = forcing.poset.top();
        BoolRun {
            batch: self,
            forcing,
            lits: self.lits.iter().map(|x| PName::check(x, top)).collect(),
            memo: vec![Vec::new(); self.nodes.len()],
            dirty: Vec::new(),
            is_outer: {
                let mut v = vec![false; self.nodes.len()];
                for n in self.outer() {
                    v[n as usize] = true;
                }
                v
            },
            outer: self.outer(),
            flat: vec![0; self.nodes.len()],
            out: Vec::with_capacity(self.roots.len()),
        }
    }

    /// Nodes computable before any binder is bound: reading free variables
    /// only, with every quantifier inside binding the first binder slot.
    fn outer(&self) -> Vec<u32> {
        let free = self.vars.len();
        let mut ok = vec![false; self.nodes.len()];
        for (n, node) in self.nodes.iter().enumerate() {
            ok[n] = self.reads[n] >> free == 0
                && match *node {
                    Node::Eq(..) | Node::In(..) => true,
                    Node::Not(a) => ok[a as usize],
                    Node::And(a, b) | Node::Or(a, b) => ok[a as usize] && ok[b as usize],
                    Node::Forall(..) | Node::Exists(..) => self.bind[n] as usize == free,
                };
        }
        (0..self.nodes.len() as u32).filter(|&n| ok[n as usize]).collect()
    }

    /// Ground truth of every formula, free variables bound in `vars` order.
    pub fn truths(&self, env: &[HFSet]) -> Vec<bool> {
        assert_eq!(env.len(), self.vars.len(), "one set per free variable");
        let mut run = GroundRun { batch: self, memo: vec![Vec::new(); self.nodes.len()], scope: env.iter().collect() };
        self.roots.iter().map(|&r| run.truth(r)).collect()
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    reads: Vec<u16>,
    bind: Vec<u8>,
    index: HashMap<Node, u32>,
    lits: Vec<HFSet>,
    names: Vec<PName>,
}

impl Builder {
    fn intern(&mut self, n: Node, reads: u16) -> u32 {
        self.intern_at(n, reads, 0)
    }

    fn intern_at(&mut self, n: Node, reads: u16, bind: u8) -> u32 {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(n);
        self.reads.push(reads);
        self.bind.push(bind);
        self.index.insert(n, i);
        i
    }

    fn operand(&mut self, t: &Term, scope: &[Arc<str>]) -> Result<(Operand, u16), FormulaError> {
        Ok(match t {
            Term::Var(v) => {
                let i = scope
                    .iter()
                    .rposition(|k| k == v)
                    .ok_or_else(|| FormulaError::UnboundVariable(v.to_string()))?;
                (Operand::Slot(i as u8), 1 << i)
            }
            Term::Lit(x) => {
                let i = self.lits.iter().position(|y| y == x).unwrap_or_else(|| {
                    self.lits.push(x.clone());
                    self.lits.len() - 1
                });
                (Operand::Lit(i as u32), 0)
            }
            Term::Name(s) => {
                let i = self.names.iter().position(|y| y == s).unwrap_or_else(|| {
                    self.names.push(s.clone());
                    self.names.len() - 1
                });
                (Operand::Name(i as u32), 0)
            }
        })
    }

    fn formula(&mut self, f: &Formula, scope: &mut Vec<Arc<str>>) -> Result<u32, FormulaError> {
        Ok(match f {
            Formula::Eq(a, b) | Formula::In(a, b) => {
                let (x, rx) = self.operand(a, scope)?;
                let (y, ry) = self.operand(b, scope)?;
                let n = if matches!(f, Formula::Eq(..)) { Node::Eq(x, y) } else { Node::In(x, y) };
                self.intern(n, rx | ry)
            }
            Formula::Not(a) => {
                let a = self.formula(a, scope)?;
                self.intern(Node::Not(a), self.reads[a as usize])
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let a = self.formula(a, scope)?;
                let b = self.formula(b, scope)?;
                let r = self.reads[a as usize] | self.reads[b as usize];
                let n = if matches!(f, Formula::And(..)) { Node::And(a, b) } else { Node::Or(a, b) };
                self.intern(n, r)
            }
            Formula::Forall(v, t, a) | Formula::Exists(v, t, a) => {
                if scope.len() >= MAX_SLOTS {
                    return Err(FormulaError::TooDeep { depth: scope.len() + 1, cap: MAX_SLOTS });
                }
                let (dom, rd) = self.operand(t, scope)?;
                let level = scope.len();
                scope.push(v.clone());
                let body = self.formula(a, scope);
                scope.pop();
                let body = body?;
                let r = rd | (self.reads[body as usize] & !(1 << level));
                let n = if matches!(f, Formula::Forall(..)) { Node::Forall(dom, body) } else { Node::Exists(dom, body) };
                self.intern_at(n, r, level as u8)
            }
        })
    }
}

fn key_of<T>(reads: u16, scope: &[T], id: impl Fn(&T) -> usize) -> Option<Key> {
    if reads.count_ones() as usize > KEY_SLOTS {
        return None;
    }
    let mut k = [0usize; KEY_SLOTS];
    let mut r = reads;
    let mut j = 0;
    while r != 0 {
        k[j] = id(&scope[r.trailing_zeros() as usize]);
        r &= r - 1;
        j += 1;
    }
    Some(k)
}

fn lookup<V: Copy>(memo: &[(Key, V)], key: &Option<Key>) -> Option<V> {
    let key = key.as_ref()?;
    memo.iter().find(|(k, _)| k.iter().zip(key).fold(0, |d, (x, y)| d | (x ^ y)) == 0).map(|e| e.1)
}

pub struct BoolRun<'b, 'f> {
    batch: &'b FormulaBatch,
    forcing: &'f Forcing,
    lits: Vec<PName>,
    memo: Vec<Vec<(Key, Mask)>>,
    /// Nodes with memo entries.
    dirty: Vec<u32>,
    /// Nodes reading no binder, in index order. Their children come first,
    /// so one pass computes them all without keys.
    outer: Vec<u32>,
    is_outer: Vec<bool>,
    flat: Vec<Mask>,
    out: Vec<Mask>,
}

impl BoolRun<'_, '_> {
    /// `⟦φ⟧` for every formula of the batch, in order. `ev` must evaluate
    /// over the runner's forcing.
    pub fn values(&mut self, ev: &mut Evaluator, env: &[PName]) -> &[Mask] {
        assert!(std::ptr::eq(ev.forcing, self.forcing), "evaluator over another forcing");
        assert_eq!(env.len(), self.batch.vars.len(), "one name per free variable");
        for &n in &self.dirty {
            self.memo[n as usize].clear();
        }
        self.dirty.clear();
        let mut cx = BoolCx {
            batch: self.batch,
            lits: &self.lits,
            memo: &mut self.memo,
            dirty: &mut self.dirty,
            flat: &mut self.flat,
            is_outer: &self.is_outer,
            scope: env.iter().collect(),
            one: self.forcing.alg.one(),
            ev,
        };
        for &n in &self.outer {
            let v = cx.compute(n);
            cx.flat[n as usize] = v;
        }
        self.out.clear();
        self.out.extend(self.batch.roots.iter().map(|&r| self.flat[r as usize]));
        &self.out
    }
}

struct BoolCx<'a, 'm, 'e, 'f> {
    batch: &'a FormulaBatch,
    lits: &'a [PName],
    memo: &'m mut [Vec<(Key, Mask)>],
    dirty: &'m mut Vec<u32>,
    flat: &'m mut [Mask],
    is_outer: &'a [bool],
    scope: Vec<&'a PName>,
    one: Mask,
    ev: &'e mut Evaluator<'f>,
}

impl<'a> BoolCx<'a, '_, '_, '_> {
    fn operand(&self, o: Operand) -> &'a PName {
        match o {
            Operand::Slot(i) => self.scope[i as usize],
            Operand::Lit(i) => &self.lits[i as usize],
            Operand::Name(i) => &self.batch.names[i as usize],
        }
    }

    fn value(&mut self, n: u32) -> Mask {
        if self.is_outer[n as usize] {
            return self.flat[n as usize];
        }
        let reads = self.batch.reads[n as usize];
        let key = key_of(reads, &self.scope, |s| PName::ptr_id(s));
        if let Some(v) = lookup(&self.memo[n as usize], &key) {
            return v;
        }
        let v = self.compute(n);
        if let Some(key) = key {
            let m = &mut self.memo[n as usize];
            if m.is_empty() {
                self.dirty.push(n);
            }
            m.push((key, v));
        }
        v
    }

    fn compute(&mut self, n: u32) -> Mask {
        let one = self.one;
        let v = match self.batch.nodes[n as usize] {
            Node::Eq(a, b) => self.ev.eq(self.operand(a), self.operand(b)),
            Node::In(a, b) => self.ev.member(self.operand(a), self.operand(b)),
            Node::Not(a) => one & !self.value(a),
            Node::And(a, b) => {
                let x = self.value(a);
                if x == 0 { 0 } else { x & self.value(b) }
            }
            Node::Or(a, b) => {
                let x = self.value(a);
                if x == one { one } else { x | self.value(b) }
            }
            Node::Forall(t, body) => {
                let mut acc = one;
                for e in self.operand(t).entries() {
                    let q = self.ev.forcing.embed(e.cond);
                    self.scope.push(&e.child);
                    acc &= (one & !q) | self.value(body);
                    self.scope.pop();
                }
                acc
            }
            Node::Exists(t, body) => {
                let mut acc = 0;
                for e in self.operand(t).entries() {
                    let q = self.ev.forcing.embed(e.cond);
                    self.scope.push(&e.child);
                    acc |= q & self.value(body);
                    self.scope.pop();
                }
                acc
            }
        };
        v
    }
}

struct GroundRun<'b> {
    batch: &'b FormulaBatch,
    memo: Vec<Vec<(Key, bool)>>,
    scope: Vec<&'b HFSet>,
}

impl<'b> GroundRun<'b> {
    fn operand(&self, o: Operand) -> Option<&'b HFSet> {
        match o {
            Operand::Slot(i) => Some(self.scope[i as usize]),
            Operand::Lit(i) => Some(&self.batch.lits[i as usize]),
            Operand::Name(_) => None,
        }
    }

    fn truth(&mut self, n: u32) -> bool {
        let key = key_of(self.batch.reads[n as usize], &self.scope, |x| *x as *const HFSet as usize);
        if let Some(v) = lookup(&self.memo[n as usize], &key) {
            return v;
        }
        let v = match self.batch.nodes[n as usize] {
            Node::Eq(a, b) => self.operand(a).zip(self.operand(b)).is_some_and(|(x, y)| x == y),
            Node::In(a, b) => self.operand(a).zip(self.operand(b)).is_some_and(|(x, y)| y.contains(x)),
            Node::Not(a) => !self.truth(a),
            Node::And(a, b) => self.truth(a) && self.truth(b),
            Node::Or(a, b) => self.truth(a) || self.truth(b),
            Node::Forall(t, body) | Node::Exists(t, body) => {
                let universal = matches!(self.batch.nodes[n as usize], Node::Forall(..));
                let members: Vec<&'b HFSet> = self
                    .operand(t)
                    .and_then(|d| d.members())
                    .map(|m| m.iter().collect())
                    .unwrap_or_default();
                let mut out = universal;
                for x in members {
                    self.scope.push(x);
                    let r = self.truth(body);
                    self.scope.pop();
                    if r != universal {
                        out = !universal;
                        break;
                    }
                }
                out
            }
        };
        if let Some(key) = key {
            self.memo[n as usize].push((key, v));
        }
        v
    }
}
