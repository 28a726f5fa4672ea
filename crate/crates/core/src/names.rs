//! Hereditarily finite names over a finite forcing.
//!
//! A name is either a leaf (the check name of an urelement) or a finite set
//! of `(child, condition)` entries. Conditions are element indices of the
//! ambient [`Poset`]. Nodes are shared behind an `Arc` and carry a cached
//! structural hash so that equality tables over large name spaces stay cheap.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{self, Mask};
use crate::boolcomp::Forcing;
use crate::error::SyntaxError;
use crate::hf::{parse_hf_at, HFSet};
use crate::lexer::{Cursor, Tok};
use crate::order::{Cone, Filter, OrderError, Poset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NameError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("name `{0}` is defined twice")]
    DuplicateName(String),
    #[error("expected a name of rank at most 1 whose children are check leaves")]
    NotRankOne,
    #[error("name is not {0}-bounded")]
    NotBounded(usize),
    #[error("poset is not well-met")]
    NotWellMet,
    #[error("ambient forcing is not a Boolean algebra: no condition has value {0}")]
    NotBoolean(String),
}

#[derive(Clone)]
pub struct PName(Arc<Node>);

struct Node {
    kind: Kind,
    hash: u64,
    rank: u32,
}

enum Kind {
    Leaf(u32),
    Set(Vec<Entry>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entry {
    pub child: PName,
    pub cond: usize,
}

impl PName {
    /// Check name of the urelement `x`.
    pub fn leaf(x: u32) -> PName {
        let mut h = DefaultHasher::new();
        (0u8, x).hash(&mut h);
        PName(Arc::new(Node { kind: Kind::Leaf(x), hash: h.finish(), rank: 0 }))
    }

    pub fn empty() -> PName {
        PName::set(std::iter::empty())
    }

    /// Entries are sorted and deduplicated.
    pub fn set<I: IntoIterator<Item = (PName, usize)>>(entries: I) -> PName {
        let mut v: Vec<Entry> = entries.into_iter().map(|(child, cond)| Entry { child, cond }).collect();
        v.sort();
        v.dedup();
        let mut h = DefaultHasher::new();
        1u8.hash(&mut h);
        for e in &v {
            (e.child.0.hash, e.cond).hash(&mut h);
        }
        let rank = v.iter().map(|e| e.child.rank() + 1).max().unwrap_or(0);
        PName(Arc::new(Node { kind: Kind::Set(v), hash: h.finish(), rank }))
    }

    /// `x̌ = {(y̌, 1) : y ∈ x}`; urelements become leaves.
    pub fn check(x: &HFSet, top: usize) -> PName {
        match x {
            HFSet::Atom(a) => PName::leaf(*a),
            HFSet::Set(s) => PName::set(s.iter().map(|y| (PName::check(y, top), top))),
        }
    }

    pub fn leaf_value(&self) -> Option<u32> {
        match self.0.kind {
            Kind::Leaf(x) => Some(x),
            Kind::Set(_) => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.leaf_value().is_some()
    }

    /// The empty set name (not a leaf), tagged apart from rank-0 leaves.
    pub fn is_empty_name(&self) -> bool {
        matches!(&self.0.kind, Kind::Set(v) if v.is_empty())
    }

    pub fn entries(&self) -> &[Entry] {
        match &self.0.kind {
            Kind::Leaf(_) => &[],
            Kind::Set(v) => v,
        }
    }

    pub fn rank(&self) -> u32 {
        self.0.rank
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    /// Address of the shared node; equal for clones of one name.
    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &PName) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Distinct children with their conditions, in entry order.
    pub fn groups(&self) -> Vec<(&PName, Vec<usize>)> {
        let mut out: Vec<(&PName, Vec<usize>)> = Vec::new();
        for e in self.entries() {
            match out.last_mut() {
                Some((c, conds)) if *c == &e.child => conds.push(e.cond),
                _ => out.push((&e.child, vec![e.cond])),
            }
        }
        out
    }

    pub fn children(&self) -> Vec<&PName> {
        self.groups().into_iter().map(|(c, _)| c).collect()
    }

    /// Set name whose children are all leaves (rank at most 1).
    pub fn is_flat(&self) -> bool {
        !self.is_leaf() && self.entries().iter().all(|e| e.child.is_leaf())
    }

    /// The ground set this name is the check name of, if it is one.
    pub fn as_check(&self, top: usize) -> Option<HFSet> {
        match &self.0.kind {
            Kind::Leaf(x) => Some(HFSet::Atom(*x)),
            Kind::Set(v) => {
                let mut out = std::collections::BTreeSet::new();
                for e in v {
                    if e.cond != top {
                        return None;
                    }
                    out.insert(e.child.as_check(top)?);
                }
                // Distinct check names denote distinct sets, so no collapse.
                Some(HFSet::Set(out))
            }
        }
    }

    /// At most `n` distinct children at every level.
    pub fn is_kappa_small(&self, n: usize) -> bool {
        let g = self.groups();
        g.len() <= n && g.iter().all(|(c, _)| c.is_kappa_small(n))
    }

    /// At most `m` conditions attached to each child, at every level.
    pub fn is_lambda_bounded(&self, m: usize) -> bool {
        self.groups().iter().all(|(c, conds)| conds.len() <= m && c.is_lambda_bounded(m))
    }

    pub fn max_width(&self) -> usize {
        let g = self.groups();
        g.iter().map(|(c, _)| c.max_width()).fold(g.len(), usize::max)
    }

    pub fn max_bound(&self) -> usize {
        self.groups()
            .iter()
            .map(|(c, conds)| conds.len().max(c.max_bound()))
            .max()
            .unwrap_or(0)
    }

    /// `σ^g = {τ^g : ∃p ∈ g, (τ, p) ∈ σ}`.
    pub fn interpret(&self, g: &Filter) -> HFSet {
        self.interpret_mask(g.members)
    }

    pub fn interpret_mask(&self, g: Mask) -> HFSet {
        match &self.0.kind {
            Kind::Leaf(x) => HFSet::Atom(*x),
            Kind::Set(v) => HFSet::set(
                v.iter()
                    .filter(|e| bits::has(g, e.cond))
                    .map(|e| e.child.interpret_mask(g)),
            ),
        }
    }

    /// Rewrites conditions; entries mapped to `None` are dropped.
    pub fn map_conds<F: Fn(usize) -> Option<usize> + Copy>(&self, f: F) -> PName {
        match &self.0.kind {
            Kind::Leaf(_) => self.clone(),
            Kind::Set(v) => PName::set(v.iter().filter_map(|e| f(e.cond).map(|c| (e.child.map_conds(f), c)))),
        }
    }

    /// All conditions used anywhere in the name.
    pub fn support(&self) -> Mask {
        self.entries().iter().fold(0, |m, e| m | bits::bit(e.cond) | e.child.support())
    }

    /// Renders in the name language, e.g. `{(chk 0, a), (chk {0}, 1)}`.
    pub fn to_dsl(&self, p: &Poset) -> String {
        let mut s = String::new();
        self.write_dsl(p, &mut s);
        s
    }

    fn write_dsl(&self, p: &Poset, out: &mut String) {
        if let Some(x) = self.as_check(p.top()) {
            if !self.is_empty_name() {
                let _ = write!(out, "chk {x}");
                return;
            }
        }
        out.push('{');
        for (i, e) in self.entries().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push('(');
            e.child.write_dsl(p, out);
            let _ = write!(out, ", {})", p.id(e.cond));
        }
        out.push('}');
    }
}

/// Hasher for maps keyed by names: mixes the cached structural hashes.
#[derive(Default, Clone, Copy)]
pub struct NameHasher(u64);

impl Hasher for NameHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        let mut words = bytes.chunks_exact(8);
        for w in &mut words {
            self.write_u64(u64::from_le_bytes(w.try_into().unwrap()));
        }
        for &b in words.remainder() {
            self.write_u64(b as u64);
        }
    }

    fn write_usize(&mut self, x: usize) {
        self.write_u64(x as u64);
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = (self.0.rotate_left(5) ^ x).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }
}

pub type NameMap<K, V> = std::collections::HashMap<K, V, std::hash::BuildHasherDefault<NameHasher>>;

impl PartialEq for PName {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || (self.0.hash == other.0.hash && self.cmp(other) == Ordering::Equal)
    }
}

impl Eq for PName {}

impl Hash for PName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for PName {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.ptr_eq(other) {
            return Ordering::Equal;
        }
        match (&self.0.kind, &other.0.kind) {
            (Kind::Leaf(a), Kind::Leaf(b)) => a.cmp(b),
            (Kind::Leaf(_), Kind::Set(_)) => Ordering::Less,
            (Kind::Set(_), Kind::Leaf(_)) => Ordering::Greater,
            (Kind::Set(a), Kind::Set(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for PName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Leaf(x) => write!(f, "chk {x}"),
            Kind::Set(v) => {
                f.write_str("{")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({:?}, #{})", e.child, e.cond)?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Value of `x̌ ∈ σ` for each leaf child `x` of a flat name.
fn leaf_values(f: &Forcing, s: &PName) -> Result<Vec<(u32, Mask)>, NameError> {
    if !s.is_flat() {
        return Err(NameError::NotRankOne);
    }
    Ok(s.groups()
        .into_iter()
        .map(|(c, conds)| {
            let v = conds.iter().fold(0, |m, &q| m | f.embed(q));
            (c.leaf_value().expect("flat"), v)
        })
        .collect())
}

/// `σ^(g) = {x : ∃p ∈ g, p ⊩ x̌ ∈ σ}` for flat names.
pub fn quasi_interpret(f: &Forcing, s: &PName, g: &Filter) -> Result<HFSet, NameError> {
    let vals = leaf_values(f, s)?;
    Ok(HFSet::set(
        vals.into_iter()
            .filter(|&(_, v)| bits::ones(g.members).any(|p| bits::subset(f.embed(p), v)))
            .map(|(x, _)| HFSet::Atom(x)),
    ))
}

/// Replaces the conditions attached to each leaf by their supremum.
/// The ambient forcing must be the nonzero part of an algebra.
pub fn canonicalize(f: &Forcing, s: &PName) -> Result<PName, NameError> {
    let vals = leaf_values(f, s)?;
    let mut out = Vec::new();
    for (x, v) in vals {
        let p = f
            .condition_for_value(v)
            .ok_or_else(|| NameError::NotBoolean(f.alg.format(v)))?;
        out.push((PName::leaf(x), p));
    }
    Ok(PName::set(out))
}

/// Splits an `m`-bounded flat name into `m` one-bounded names: the `δ`-th
/// one takes the `δ`-th condition of each child, if there is one.
pub fn split_bounded(s: &PName, m: usize) -> Result<Vec<PName>, NameError> {
    if !s.is_flat() {
        return Err(NameError::NotRankOne);
    }
    if !s.is_lambda_bounded(m) {
        return Err(NameError::NotBounded(m));
    }
    let groups = s.groups();
    Ok((0..m)
        .map(|d| {
            PName::set(
                groups
                    .iter()
                    .filter_map(|(c, conds)| conds.get(d).map(|&q| ((*c).clone(), q))),
            )
        })
        .collect())
}

/// Restricts `s` below `p`: each condition `q` becomes `q ∧ p`, and entries
/// with `q ⊥ p` are dropped. The result lives on the cone.
pub fn restrict_to_cone(poset: &Poset, s: &PName, p: usize) -> Result<(Cone, PName), NameError> {
    if !poset.is_well_met() {
        return Err(NameError::NotWellMet);
    }
    let cone = poset.cone(p);
    let r = s.map_conds(|q| poset.meet(q, p).and_then(|m| cone.from_parent(m)));
    Ok((cone, r))
}

/// Named names in declaration order.
#[derive(Clone, Debug, Default)]
pub struct NameTable {
    pub names: Vec<(String, PName)>,
}

impl NameTable {
    pub fn get(&self, id: &str) -> Option<&PName> {
        self.names.iter().find(|(n, _)| n == id).map(|(_, s)| s)
    }

    pub fn require(&self, id: &str) -> Result<&PName, NameError> {
        self.get(id).ok_or_else(|| NameError::UnknownName(id.to_string()))
    }

    pub fn to_dsl(&self, p: &Poset) -> String {
        self.names
            .iter()
            .map(|(n, s)| format!("name {n} = {}\n", s.to_dsl(p)))
            .collect()
    }
}

/// Parses `name ID = EXPR` declarations, where `EXPR` is `chk HF`, an
/// earlier name, or `{ (EXPR, cond), ... }`.
pub fn parse_names(text: &str, poset: &Poset) -> Result<NameTable, NameError> {
    let mut cur = Cursor::new(text)?;
    let mut table = NameTable::default();
    while !cur.at_end() {
        cur.expect_word("name")?;
        let id = cur.word("name identifier")?;
        if table.get(&id).is_some() {
            return Err(NameError::DuplicateName(id));
        }
        cur.expect_punct('=')?;
        let s = parse_name_expr(&mut cur, poset, &table)?;
        cur.eat_punct(';');
        table.names.push((id, s));
    }
    Ok(table)
}

/// Parses a single name expression.
pub fn parse_name(text: &str, poset: &Poset, table: &NameTable) -> Result<PName, NameError> {
    let mut cur = Cursor::new(text)?;
    let s = parse_name_expr(&mut cur, poset, table)?;
    if !cur.at_end() {
        return Err(cur.unexpected("end of input").into());
    }
    Ok(s)
}

fn parse_name_expr(cur: &mut Cursor, poset: &Poset, table: &NameTable) -> Result<PName, NameError> {
    match cur.peek() {
        Some(Tok::Word(w)) if w == "chk" => {
            cur.next();
            let x = parse_hf_at(cur)?;
            Ok(PName::check(&x, poset.top()))
        }
        Some(Tok::Word(w)) => {
            let w = w.clone();
            let s = table.require(&w)?.clone();
            cur.next();
            Ok(s)
        }
        Some(Tok::Punct('{')) => {
            cur.next();
            let mut entries = Vec::new();
            loop {
                if cur.eat_punct('}') {
                    break;
                }
                cur.expect_punct('(')?;
                let child = parse_name_expr(cur, poset, table)?;
                cur.expect_punct(',')?;
                let (line, col) = cur.here();
                let cond = cur.word("condition")?;
                let q = poset.index_of(&cond).map_err(|e| match e {
                    OrderError::UnknownElement(c) => {
                        NameError::Syntax(SyntaxError::new(line, col, format!("unknown condition `{c}`")))
                    }
                    other => other.into(),
                })?;
                cur.expect_punct(')')?;
                entries.push((child, q));
                cur.eat_punct(',');
            }
            Ok(PName::set(entries))
        }
        _ => Err(cur.unexpected("a name expression").into()),
    }
}
