//! Finite forcing posets: a partial order with a largest element `1`.
//!
//! Elements are opaque string identifiers. Internally they are numbered by
//! their lexicographic order, so every iteration below is deterministic and
//! sets of conditions are plain bit masks over those indices.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::bits::{self, Mask, MAX_POINTS};
use crate::error::SyntaxError;
use crate::lexer::{Cursor, Tok};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("order has a cycle through `{0}` and `{1}`")]
    Cycle(String, String),
    #[error("no unique maximum element")]
    NoUniqueMaximum,
    #[error("declared top `{0}` is not the maximum")]
    BadTop(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("a poset needs at least one element")]
    Empty,
    #[error("poset has {0} elements; at most {MAX_POINTS} are supported")]
    TooLarge(usize),
    #[error("generators `{0}` and `{1}` have no common lower bound")]
    IncompatibleGenerators(String, String),
    #[error("generators have no common lower bound")]
    NoCommonLowerBound,
    #[error("generators have lower bounds but no greatest one")]
    NoGreatestLowerBound,
}

/// A finite partial order with a top element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    name: String,
    ids: Vec<String>,
    /// `below[p]` is the set of `q` with `q <= p`.
    below: Vec<Mask>,
    above: Vec<Mask>,
    top: usize,
}

/// A filter on a poset, stored as the member mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Filter {
    pub members: Mask,
}

impl Filter {
    pub fn principal(p: &Poset, generator: usize) -> Filter {
        Filter { members: p.above(generator) }
    }

    pub fn contains(&self, q: usize) -> bool {
        bits::has(self.members, q)
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    pub fn meets(&self, set: Mask) -> bool {
        self.members & set != 0
    }
}

/// Which of the standard density notions a set of conditions satisfies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Classification {
    pub dense: bool,
    pub predense: bool,
    pub antichain: bool,
    pub maximal_antichain: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    Dense,
    Predense,
    Antichain,
    Unclassified,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Dense => "dense",
            Flavor::Predense => "predense",
            Flavor::Antichain => "antichain",
            Flavor::Unclassified => "unclassified",
        })
    }
}

/// Which classification a checker demands of its input sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Density {
    Dense,
    Predense,
    Unchecked,
}

impl Density {
    pub fn admits(&self, c: &Classification) -> bool {
        match self {
            Density::Dense => c.dense,
            Density::Predense => c.predense,
            Density::Unchecked => true,
        }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Density::Dense => "dense",
            Density::Predense => "predense",
            Density::Unchecked => "unchecked",
        })
    }
}

/// A set of conditions together with its classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CondSet {
    pub members: Mask,
    pub class: Classification,
}

impl CondSet {
    /// The strongest flavor that applies.
    pub fn flavor(&self) -> Flavor {
        if self.class.dense {
            Flavor::Dense
        } else if self.class.predense {
            Flavor::Predense
        } else if self.class.antichain {
            Flavor::Antichain
        } else {
            Flavor::Unclassified
        }
    }

    pub fn len(&self) -> usize {
        bits::count(self.members)
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }
}

/// `cone(P, p)`: the conditions below `p`, with `p` as top.
#[derive(Clone, Debug)]
pub struct Cone {
    pub poset: Poset,
    /// Cone index -> index in the parent poset.
    pub to_parent: Vec<usize>,
}

impl Cone {
    pub fn from_parent(&self, q: usize) -> Option<usize> {
        self.to_parent.iter().position(|&x| x == q)
    }

    /// Parent mask of a cone mask.
    pub fn lift(&self, m: Mask) -> Mask {
        bits::ones(m).fold(0, |acc, i| acc | bits::bit(self.to_parent[i]))
    }
}

impl Poset {
    /// Builds the reflexive-transitive closure of `covers` (`(lo, hi)` means
    /// `lo < hi`). The top is inferred unless declared.
    pub fn from_covers(
        name: &str,
        elems: &[&str],
        covers: &[(&str, &str)],
        declared_top: Option<&str>,
    ) -> Result<Poset, OrderError> {
        let mut ids: Vec<String> = elems.iter().map(|s| s.to_string()).collect();
        ids.sort();
        for w in ids.windows(2) {
            if w[0] == w[1] {
                return Err(OrderError::DuplicateElement(w[0].clone()));
            }
        }
        let n = ids.len();
        if n == 0 {
            return Err(OrderError::Empty);
        }
        if n > MAX_POINTS {
            return Err(OrderError::TooLarge(n));
        }
        let index: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let look = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| OrderError::UnknownElement(s.to_string()))
        };
        let mut below: Vec<Mask> = (0..n).map(bits::bit).collect();
        for &(lo, hi) in covers {
            let (lo, hi) = (look(lo)?, look(hi)?);
            below[hi] |= bits::bit(lo);
        }
        let top = match declared_top {
            Some(t) => Some(look(t)?),
            None => None,
        };
        Self::from_relation(name, ids, below, top)
    }

    /// `below[p]` need only be a generating relation; it is closed here.
    pub fn from_relation(
        name: &str,
        ids: Vec<String>,
        mut below: Vec<Mask>,
        declared_top: Option<usize>,
    ) -> Result<Poset, OrderError> {
        let n = ids.len();
        if n == 0 {
            return Err(OrderError::Empty);
        }
        if n > MAX_POINTS {
            return Err(OrderError::TooLarge(n));
        }
        for (p, b) in below.iter_mut().enumerate() {
            *b |= bits::bit(p);
        }
        for k in 0..n {
            for i in 0..n {
                if bits::has(below[i], k) {
                    below[i] |= below[k];
                }
            }
        }
        for p in 0..n {
            for q in bits::ones(below[p]) {
                if q != p && bits::has(below[q], p) {
                    let (a, b) = (p.min(q), p.max(q));
                    return Err(OrderError::Cycle(ids[a].clone(), ids[b].clone()));
                }
            }
        }
        let all = bits::full(n);
        let maxima: Vec<usize> = (0..n).filter(|&p| below[p] == all).collect();
        let top = match (declared_top, maxima.as_slice()) {
            (Some(t), [m]) if t == *m => t,
            (Some(t), _) => return Err(OrderError::BadTop(ids[t].clone())),
            (None, [m]) => *m,
            (None, _) => return Err(OrderError::NoUniqueMaximum),
        };
        let mut above = vec![0; n];
        for p in 0..n {
            for q in bits::ones(below[p]) {
                above[q] |= bits::bit(p);
            }
        }
        Ok(Poset { name: name.to_string(), ids, below, above, top })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, p: usize) -> &str {
        &self.ids[p]
    }

    pub fn index_of(&self, id: &str) -> Result<usize, OrderError> {
        self.ids
            .binary_search_by(|x| x.as_str().cmp(id))
            .map_err(|_| OrderError::UnknownElement(id.to_string()))
    }

    pub fn mask_of<S: AsRef<str>>(&self, ids: &[S]) -> Result<Mask, OrderError> {
        ids.iter()
            .try_fold(0, |m, s| Ok(m | bits::bit(self.index_of(s.as_ref())?)))
    }

    pub fn all(&self) -> Mask {
        bits::full(self.len())
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn leq(&self, p: usize, q: usize) -> bool {
        bits::has(self.below[q], p)
    }

    pub fn below(&self, p: usize) -> Mask {
        self.below[p]
    }

    pub fn above(&self, p: usize) -> Mask {
        self.above[p]
    }

    pub fn compatible(&self, p: usize, q: usize) -> bool {
        self.below[p] & self.below[q] != 0
    }

    pub fn compatible_ids(&self, p: &str, q: &str) -> Result<bool, OrderError> {
        Ok(self.compatible(self.index_of(p)?, self.index_of(q)?))
    }

    /// Minimal elements; at finite scale these generate the generic filters.
    pub fn minimal(&self) -> Mask {
        (0..self.len())
            .filter(|&p| self.below[p] == bits::bit(p))
            .fold(0, |m, p| m | bits::bit(p))
    }

    pub fn down_closure(&self, s: Mask) -> Mask {
        bits::ones(s).fold(0, |m, p| m | self.below[p])
    }

    pub fn up_closure(&self, s: Mask) -> Mask {
        bits::ones(s).fold(0, |m, p| m | self.above[p])
    }

    fn maximal_of(&self, s: Mask) -> Mask {
        bits::ones(s)
            .filter(|&p| self.above[p] & s == bits::bit(p))
            .fold(0, |m, p| m | bits::bit(p))
    }

    /// Greatest lower bound, if one exists.
    pub fn meet(&self, p: usize, q: usize) -> Option<usize> {
        let lower = self.below[p] & self.below[q];
        let max = self.maximal_of(lower);
        (bits::count(max) == 1).then(|| max.trailing_zeros() as usize)
    }

    /// Every compatible pair has a greatest lower bound.
    pub fn is_well_met(&self) -> bool {
        (0..self.len()).all(|p| {
            (p + 1..self.len()).all(|q| !self.compatible(p, q) || self.meet(p, q).is_some())
        })
    }

    /// `p ≼ q`: every extension of `p` is compatible with `q`.
    pub fn sep_leq(&self, p: usize, q: usize) -> bool {
        bits::ones(self.below[p]).all(|r| self.compatible(r, q))
    }

    pub fn is_separative(&self) -> bool {
        (0..self.len()).all(|p| (0..self.len()).all(|q| self.sep_leq(p, q) == self.leq(p, q)))
    }

    pub fn is_dense(&self, s: Mask) -> bool {
        (0..self.len()).all(|p| self.below[p] & s != 0)
    }

    /// Dense below `p`: every `r <= p` has an extension in `s`.
    pub fn is_dense_below(&self, s: Mask, p: usize) -> bool {
        bits::ones(self.below[p]).all(|r| self.below[r] & s != 0)
    }

    pub fn is_predense(&self, s: Mask) -> bool {
        (0..self.len()).all(|p| bits::ones(s).any(|q| self.compatible(p, q)))
    }

    pub fn is_antichain(&self, s: Mask) -> bool {
        let v: Vec<usize> = bits::ones(s).collect();
        v.iter()
            .enumerate()
            .all(|(i, &p)| v[i + 1..].iter().all(|&q| !self.compatible(p, q)))
    }

    pub fn classify(&self, s: Mask) -> CondSet {
        let dense = self.is_dense(s);
        let predense = dense || self.is_predense(s);
        let antichain = self.is_antichain(s);
        CondSet {
            members: s,
            class: Classification {
                dense,
                predense,
                antichain,
                maximal_antichain: antichain && predense,
            },
        }
    }

    pub fn is_filter(&self, s: Mask) -> bool {
        if s == 0 {
            return true;
        }
        if self.up_closure(s) != s {
            return false;
        }
        let v: Vec<usize> = bits::ones(s).collect();
        v.iter().all(|&p| v.iter().all(|&q| self.below[p] & self.below[q] & s != 0))
    }

    /// All filters in canonical order (by size, then by sorted member list).
    ///
    /// Every nonempty filter on a finite poset is principal: it contains a
    /// lower bound of all its members, hence equals the upset of that bound.
    pub fn filters(&self, include_empty: bool) -> Vec<Filter> {
        let mut out: Vec<Filter> = (0..self.len()).map(|p| Filter::principal(self, p)).collect();
        out.sort_by(|a, b| self.filter_order(a, b));
        if include_empty {
            out.insert(0, Filter { members: 0 });
        }
        out
    }

    fn filter_order(&self, a: &Filter, b: &Filter) -> std::cmp::Ordering {
        let ka: Vec<usize> = bits::ones(a.members).collect();
        let kb: Vec<usize> = bits::ones(b.members).collect();
        ka.len().cmp(&kb.len()).then(ka.cmp(&kb))
    }

    /// Generic filters: upsets of minimal elements, in index order of the
    /// generating minimal element.
    pub fn generic_filters(&self) -> Vec<Filter> {
        bits::ones(self.minimal()).map(|m| Filter::principal(self, m)).collect()
    }

    /// Least filter containing `s`: close under meets, then upward.
    pub fn generated_filter(&self, s: Mask) -> Result<Filter, OrderError> {
        let lower = bits::ones(s).fold(self.all(), |m, p| m & self.below[p]);
        if lower == 0 {
            let v: Vec<usize> = bits::ones(s).collect();
            for (i, &p) in v.iter().enumerate() {
                for &q in &v[i + 1..] {
                    if !self.compatible(p, q) {
                        return Err(OrderError::IncompatibleGenerators(
                            self.ids[p].clone(),
                            self.ids[q].clone(),
                        ));
                    }
                }
            }
            return Err(OrderError::NoCommonLowerBound);
        }
        let max = self.maximal_of(lower);
        if bits::count(max) != 1 {
            return Err(OrderError::NoGreatestLowerBound);
        }
        Ok(Filter::principal(self, max.trailing_zeros() as usize))
    }

    /// Quotient by mutual `≼`, plus the class map. Classes are labelled by
    /// their least member.
    pub fn separative_quotient(&self) -> (Poset, Vec<usize>) {
        let n = self.len();
        let prec: Vec<Mask> = (0..n)
            .map(|p| (0..n).filter(|&q| self.sep_leq(p, q)).fold(0, |m, q| m | bits::bit(q)))
            .collect();
        let mut rep = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for p in 0..n {
            if rep[p] != usize::MAX {
                continue;
            }
            let k = reps.len();
            reps.push(p);
            for q in p..n {
                if bits::has(prec[p], q) && bits::has(prec[q], p) {
                    rep[q] = k;
                }
            }
        }
        let ids: Vec<String> = reps.iter().map(|&p| self.ids[p].clone()).collect();
        // Labels are least members, so `ids` is already sorted and class
        // numbers match the quotient's own indices.
        let below: Vec<Mask> = reps
            .iter()
            .map(|&q| {
                reps.iter()
                    .enumerate()
                    .filter(|&(_, &p)| bits::has(prec[p], q))
                    .fold(0, |m, (k, _)| m | bits::bit(k))
            })
            .collect();
        let q = Poset::from_relation(&format!("{}/sep", self.name), ids, below, None)
            .expect("separative quotient of a poset is a poset");
        (q, rep)
    }

    pub fn cone(&self, p: usize) -> Cone {
        let to_parent: Vec<usize> = bits::ones(self.below[p]).collect();
        let ids: Vec<String> = to_parent.iter().map(|&q| self.ids[q].clone()).collect();
        let below: Vec<Mask> = to_parent
            .iter()
            .map(|&q| {
                to_parent
                    .iter()
                    .enumerate()
                    .filter(|&(_, &r)| self.leq(r, q))
                    .fold(0, |m, (k, _)| m | bits::bit(k))
            })
            .collect();
        let top = to_parent.iter().position(|&q| q == p);
        let poset = Poset::from_relation(&format!("{}@{}", self.name, self.ids[p]), ids, below, top)
            .expect("a cone of a poset is a poset");
        Cone { poset, to_parent }
    }

    /// Strict covering pairs `(lo, hi)`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for hi in 0..self.len() {
            let strict = self.below[hi] & !bits::bit(hi);
            for lo in bits::ones(strict) {
                let between = strict & self.above[lo] & !bits::bit(lo);
                if between == 0 {
                    out.push((lo, hi));
                }
            }
        }
        out
    }

    pub fn format_set(&self, s: Mask) -> String {
        let v: Vec<&str> = bits::ones(s).map(|p| self.ids[p].as_str()).collect();
        format!("{{{}}}", v.join(","))
    }

    pub fn to_dsl(&self) -> String {
        let mut s = format!("poset {} {{ elems {};", self.name, self.ids.join(" "));
        let covers = self.covers();
        if !covers.is_empty() {
            s.push_str(" order");
            for (lo, hi) in covers {
                s.push_str(&format!(" {}<{}", self.ids[lo], self.ids[hi]));
            }
            s.push(';');
        }
        s.push_str(" }");
        s
    }

    /// Same elements and order, ignoring the name.
    pub fn same_order(&self, other: &Poset) -> bool {
        self.ids == other.ids && self.below == other.below
    }
}

/// Parses `poset NAME { elems id+; order (id<id)+; [top id;] }`.
///
/// `order` accepts chains such as `c<a<1`.
pub fn parse_poset(text: &str) -> Result<Poset, OrderError> {
    let mut cur = Cursor::new(text)?;
    let p = parse_poset_at(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.unexpected("end of input").into());
    }
    Ok(p)
}

pub(crate) fn parse_poset_at(cur: &mut Cursor) -> Result<Poset, OrderError> {
    cur.expect_word("poset")?;
    let name = cur.word("poset name")?;
    cur.expect_punct('{')?;
    let mut elems: Vec<String> = Vec::new();
    let mut covers: Vec<(String, String)> = Vec::new();
    let mut top: Option<String> = None;
    let mut saw_elems = false;
    loop {
        if cur.eat_punct('}') {
            break;
        }
        if cur.eat_word("elems") {
            saw_elems = true;
            while let Some(Tok::Word(_)) = cur.peek() {
                elems.push(cur.word("element")?);
            }
            cur.expect_punct(';')?;
        } else if cur.eat_word("order") {
            loop {
                let mut prev = cur.word("element")?;
                if !cur.eat_punct('<') {
                    return Err(cur.unexpected("`<`").into());
                }
                loop {
                    let next = cur.word("element")?;
                    covers.push((prev, next.clone()));
                    prev = next;
                    if !cur.eat_punct('<') {
                        break;
                    }
                }
                if cur.eat_punct(';') {
                    break;
                }
            }
        } else if cur.eat_word("top") {
            top = Some(cur.word("element")?);
            cur.expect_punct(';')?;
        } else {
            return Err(cur.unexpected("`elems`, `order`, `top` or `}`").into());
        }
    }
    if !saw_elems {
        return Err(cur.error("missing `elems` section").into());
    }
    let e: Vec<&str> = elems.iter().map(String::as_str).collect();
    let c: Vec<(&str, &str)> = covers.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    Poset::from_covers(&name, &e, &c, top.as_deref())
}

/// Parses every `poset` block in `text`.
pub fn parse_posets(text: &str) -> Result<Vec<Poset>, OrderError> {
    let mut cur = Cursor::new(text)?;
    let mut out = Vec::new();
    while !cur.at_end() {
        out.push(parse_poset_at(&mut cur)?);
    }
    Ok(out)
}

impl fmt::Display for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}
