//! Finite Boolean completions.
//!
//! The completion of a finite poset is the powerset of its atoms, where the
//! atoms are the minimal elements (equivalently the minimal classes of the
//! separative quotient). An element of the algebra is a [`Mask`] over atoms.

use std::fmt;

use thiserror::Error;

use crate::bits::{self, Mask};
use crate::order::{Filter, Poset};

/// Ultrafilter and filter enumeration on an algebra is capped here.
pub const MAX_ATOMS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoolError {
    #[error("{0} atoms exceed the cap of {MAX_ATOMS}")]
    TooManyAtoms(usize),
    #[error("`{0}` is not an element of the algebra")]
    UnknownElement(String),
    #[error("the set is not a proper filter")]
    NotAFilter,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolAlg {
    labels: Vec<String>,
    /// The poset element generating each atom.
    atom_point: Vec<usize>,
    /// `embed[p]`: atoms below `p`.
    embed: Vec<Mask>,
}

/// A filter on a finite algebra; always principal, stored by its generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoolFilter {
    pub generator: Mask,
}

impl BoolFilter {
    pub fn contains(&self, x: Mask) -> bool {
        bits::subset(self.generator, x)
    }

    pub fn is_ultra(&self) -> bool {
        bits::count(self.generator) == 1
    }

    /// The atom of an ultrafilter.
    pub fn atom(&self) -> Option<usize> {
        self.is_ultra().then(|| self.generator.trailing_zeros() as usize)
    }
}

impl BoolAlg {
    /// Completion of `p`.
    pub fn complete(p: &Poset) -> BoolAlg {
        let (q, class) = p.separative_quotient();
        let atom_point: Vec<usize> = bits::ones(p.minimal()).collect();
        let labels = atom_point
            .iter()
            .map(|&m| format!("[{}]", q.id(class[m])))
            .collect();
        let embed = (0..p.len())
            .map(|x| {
                atom_point
                    .iter()
                    .enumerate()
                    .filter(|&(_, &m)| p.leq(m, x))
                    .fold(0, |acc, (i, _)| acc | bits::bit(i))
            })
            .collect();
        BoolAlg { labels, atom_point, embed }
    }

    pub fn atoms(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn atom_point(&self, atom: usize) -> usize {
        self.atom_point[atom]
    }

    pub fn one(&self) -> Mask {
        bits::full(self.atoms())
    }

    pub fn zero(&self) -> Mask {
        0
    }

    pub fn embed(&self, p: usize) -> Mask {
        self.embed[p]
    }

    pub fn embeddings(&self) -> &[Mask] {
        &self.embed
    }

    /// All elements, `0` through `1`.
    pub fn elements(&self) -> impl Iterator<Item = Mask> {
        0..=self.one()
    }

    pub fn sup<I: IntoIterator<Item = Mask>>(&self, xs: I) -> Mask {
        xs.into_iter().fold(0, |a, x| a | x)
    }

    pub fn inf<I: IntoIterator<Item = Mask>>(&self, xs: I) -> Mask {
        xs.into_iter().fold(self.one(), |a, x| a & x)
    }

    pub fn complement(&self, x: Mask) -> Mask {
        self.one() & !x
    }

    /// One principal ultrafilter per atom, in atom order.
    pub fn ultrafilters(&self) -> Vec<BoolFilter> {
        (0..self.atoms()).map(|a| BoolFilter { generator: bits::bit(a) }).collect()
    }

    pub fn principal_filter(&self, x: Mask) -> Result<BoolFilter, BoolError> {
        if x == 0 || !bits::subset(x, self.one()) {
            return Err(BoolError::NotAFilter);
        }
        Ok(BoolFilter { generator: x })
    }

    /// Builds a filter from its listed members, checking the filter laws.
    pub fn filter_from_members(&self, members: &[Mask]) -> Result<BoolFilter, BoolError> {
        let g = self.inf(members.iter().copied());
        let f = self.principal_filter(g)?;
        let listed = |x: Mask| members.contains(&x);
        if self.elements().all(|x| f.contains(x) == listed(x)) {
            Ok(f)
        } else {
            Err(BoolError::NotAFilter)
        }
    }

    /// Maximal antichains of the nonzero part: partitions of the atom set.
    pub fn maximal_antichains(&self) -> Result<Vec<Vec<Mask>>, BoolError> {
        if self.atoms() > MAX_ATOMS {
            return Err(BoolError::TooManyAtoms(self.atoms()));
        }
        let mut out = Vec::new();
        partitions(self.one(), &mut Vec::new(), &mut out);
        Ok(out)
    }

    /// `f` meets every maximal antichain.
    pub fn is_generic(&self, f: &BoolFilter) -> Result<bool, BoolError> {
        Ok(self
            .maximal_antichains()?
            .iter()
            .all(|a| a.iter().any(|&x| f.contains(x))))
    }

    pub fn format(&self, x: Mask) -> String {
        let v: Vec<&str> = bits::ones(x).map(|a| self.labels[a].as_str()).collect();
        format!("{{{}}}", v.join(","))
    }

    /// Parses `{[a],[b]}`, `0` or `1`.
    pub fn parse_element(&self, s: &str) -> Result<Mask, BoolError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match t.as_str() {
            "0" | "{}" => return Ok(0),
            "1" => return Ok(self.one()),
            _ => {}
        }
        let inner = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| BoolError::UnknownElement(s.to_string()))?;
        let mut m = 0;
        let mut rest = inner;
        while !rest.is_empty() {
            let end = rest.find(']').ok_or_else(|| BoolError::UnknownElement(s.to_string()))?;
            let lab = &rest[..=end];
            let i = self
                .labels
                .iter()
                .position(|l| l == lab)
                .ok_or_else(|| BoolError::UnknownElement(lab.to_string()))?;
            m |= bits::bit(i);
            rest = rest[end + 1..].trim_start_matches(',');
        }
        Ok(m)
    }
}

fn partitions(rest: Mask, cur: &mut Vec<Mask>, out: &mut Vec<Vec<Mask>>) {
    if rest == 0 {
        out.push(cur.clone());
        return;
    }
    let low = rest & rest.wrapping_neg();
    let others = rest & !low;
    // Blocks containing the lowest remaining atom.
    let mut sub = others;
    loop {
        cur.push(low | sub);
        partitions(others & !sub, cur, out);
        cur.pop();
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & others;
    }
}

/// A forcing together with its completion.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub poset: Poset,
    pub alg: BoolAlg,
}

impl Forcing {
    pub fn new(poset: Poset) -> Forcing {
        let alg = BoolAlg::complete(&poset);
        Forcing { poset, alg }
    }

    /// The nonzero part of `alg` as a forcing in its own right. The top is
    /// named `1`; other elements are named by their atoms, e.g. `[a,b]`.
    pub fn boolean(alg: &BoolAlg, name: &str) -> Result<Forcing, BoolError> {
        if alg.atoms() > MAX_ATOMS {
            return Err(BoolError::TooManyAtoms(alg.atoms()));
        }
        let one = alg.one();
        let short: Vec<&str> = alg
            .labels
            .iter()
            .map(|l| l.trim_start_matches('[').trim_end_matches(']'))
            .collect();
        let id_of = |x: Mask| {
            if x == one {
                "1".to_string()
            } else {
                let v: Vec<&str> = bits::ones(x).map(|a| short[a]).collect();
                format!("[{}]", v.join(","))
            }
        };
        let mut elems: Vec<(String, Mask)> = (1..=one).map(|x| (id_of(x), x)).collect();
        elems.sort();
        let ids: Vec<String> = elems.iter().map(|e| e.0.clone()).collect();
        let below: Vec<Mask> = elems
            .iter()
            .map(|&(_, y)| {
                elems
                    .iter()
                    .enumerate()
                    .filter(|&(_, &(_, x))| bits::subset(x, y))
                    .fold(0, |acc, (i, _)| acc | bits::bit(i))
            })
            .collect();
        let poset = Poset::from_relation(name, ids, below, None).expect("nonzero part of an algebra");
        let embed: Vec<Mask> = elems.iter().map(|e| e.1).collect();
        let atom_point = (0..alg.atoms())
            .map(|a| embed.iter().position(|&x| x == bits::bit(a)).expect("atom"))
            .collect();
        let alg = BoolAlg { labels: alg.labels.clone(), atom_point, embed };
        Ok(Forcing { poset, alg })
    }

    pub fn embed(&self, p: usize) -> Mask {
        self.alg.embed(p)
    }

    /// The condition whose value is exactly `x`, if any.
    pub fn condition_for_value(&self, x: Mask) -> Option<usize> {
        self.alg.embeddings().iter().position(|&e| e == x)
    }

    /// True when the poset is the nonzero part of its own algebra.
    pub fn is_boolean(&self) -> bool {
        let one = self.alg.one();
        self.poset.len() as u64 == one && (1..=one).all(|x| self.condition_for_value(x).is_some())
    }

    /// Generic filters, one per atom, in atom order.
    pub fn generic_filters(&self) -> Vec<Filter> {
        (0..self.alg.atoms())
            .map(|a| Filter::principal(&self.poset, self.alg.atom_point(a)))
            .collect()
    }
}

impl fmt::Display for BoolAlg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "atoms {}", self.format(self.one()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{ch2, fork3, nsep4};
    use crate::order::parse_poset;

    #[test]
    fn fork3_completion() {
        let p = fork3();
        let b = BoolAlg::complete(&p);
        assert_eq!(b.labels(), ["[a]", "[b]"]);
        assert_eq!(b.elements().count(), 4);
        assert_eq!(b.format(b.embed(p.index_of("a").unwrap())), "{[a]}");
        assert_eq!(b.embed(p.top()), b.one());
    }

    #[test]
    fn collapsing_completions() {
        let c = ch2();
        let b = BoolAlg::complete(&c);
        assert_eq!(b.atoms(), 1);
        assert!(b.embeddings().iter().all(|&x| x == b.one()));
        let n = nsep4();
        let b = BoolAlg::complete(&n);
        assert_eq!(b.atoms(), 1);
        assert_eq!(b.embeddings(), [1, 1, 1, 1]);
    }

    #[test]
    fn arithmetic() {
        let b = BoolAlg::complete(&fork3());
        assert_eq!(b.sup([0b01, 0b10]), b.one());
        assert_eq!(b.complement(0), b.one());
        assert_eq!(b.inf([0b01, 0b10]), 0);
        assert_eq!(b.sup([]), 0);
        assert_eq!(b.inf([]), b.one());
    }

    #[test]
    fn ultrafilter_counts() {
        assert_eq!(BoolAlg::complete(&fork3()).ultrafilters().len(), 2);
        assert_eq!(BoolAlg::complete(&ch2()).ultrafilters().len(), 1);
        let p3 = parse_poset("poset F4 { elems 1 a b c; order a<1 b<1 c<1; }").unwrap();
        let b = BoolAlg::complete(&p3);
        assert_eq!(b.elements().count(), 8);
        assert_eq!(b.ultrafilters().len(), 3);
        for u in b.ultrafilters() {
            assert!(b.is_generic(&u).unwrap());
        }
        // Bell number B(3).
        assert_eq!(b.maximal_antichains().unwrap().len(), 5);
    }

    #[test]
    fn non_ultra_filter() {
        let b = BoolAlg::complete(&fork3());
        let f = b.filter_from_members(&[b.one()]).unwrap();
        assert!(!f.is_ultra());
        assert!(b.filter_from_members(&[0b01]).is_err());
        assert!(b.filter_from_members(&[0b01, 0b11]).unwrap().is_ultra());
    }

    #[test]
    fn parse_elements() {
        let b = BoolAlg::complete(&fork3());
        assert_eq!(b.parse_element("{[a], [b]}").unwrap(), 3);
        assert_eq!(b.parse_element("{[b]}").unwrap(), 2);
        assert_eq!(b.parse_element("0").unwrap(), 0);
        assert!(b.parse_element("{[z]}").is_err());
    }

    #[test]
    fn boolean_forcing() {
        let b = BoolAlg::complete(&fork3());
        let f = Forcing::boolean(&b, "B").unwrap();
        assert_eq!(f.poset.ids(), ["1", "[a]", "[b]"]);
        assert_eq!(f.poset.id(f.poset.top()), "1");
        assert_eq!(f.alg.labels(), b.labels());
        for p in 0..f.poset.len() {
            assert_eq!(f.condition_for_value(f.embed(p)), Some(p));
        }
        assert!(!f.poset.compatible_ids("[a]", "[b]").unwrap());
    }
}
