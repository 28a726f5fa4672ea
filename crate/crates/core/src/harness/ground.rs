//! Hash-consed interpretations of names.
//!
//! Equal ground sets get equal ids, so comparing interpretations is an
//! integer comparison and membership is a binary search.

use std::collections::HashMap;

use crate::bits::{self, Mask};
use crate::hf::HFSet;
use crate::names::{NameMap, PName};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum GNode {
    Atom(u32),
    Set(Box<[u32]>),
}

#[derive(Default)]
pub struct GroundTable {
    nodes: Vec<GNode>,
    index: HashMap<GNode, u32>,
    memo: NameMap<(usize, Mask), u32>,
    /// Names behind memo keys, kept alive so addresses stay unique.
    keep: Vec<PName>,
}

impl GroundTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct ground sets seen.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn intern(&mut self, n: GNode) -> u32 {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(n.clone());
        self.index.insert(n, i);
        i
    }

    /// Id of `σ^g`, where `g` is the member mask of a filter.
    pub fn value(&mut self, s: &PName, g: Mask) -> u32 {
        if let Some(x) = s.leaf_value() {
            return self.intern(GNode::Atom(x));
        }
        let key = (s.ptr_id(), g);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut m: Vec<u32> = s
            .entries()
            .iter()
            .filter(|e| bits::has(g, e.cond))
            .map(|e| self.value(&e.child, g))
            .collect();
        m.sort_unstable();
        m.dedup();
        let v = self.intern(GNode::Set(m.into()));
        self.memo.insert(key, v);
        self.keep.push(s.clone());
        v
    }

    /// Id of a ground set.
    pub fn of_set(&mut self, x: &HFSet) -> u32 {
        match x {
            HFSet::Atom(a) => self.intern(GNode::Atom(*a)),
            HFSet::Set(ms) => {
                let mut m: Vec<u32> = ms.iter().map(|y| self.of_set(y)).collect();
                m.sort_unstable();
                self.intern(GNode::Set(m.into()))
            }
        }
    }

    pub fn contains(&self, set: u32, x: u32) -> bool {
        match &self.nodes[set as usize] {
            GNode::Atom(_) => false,
            GNode::Set(m) => m.binary_search(&x).is_ok(),
        }
    }

    pub fn to_hf(&self, id: u32) -> HFSet {
        match &self.nodes[id as usize] {
            GNode::Atom(a) => HFSet::Atom(*a),
            GNode::Set(m) => HFSet::set(m.iter().map(|&y| self.to_hf(y))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::nsep4;
    use crate::harness::{enumerate_names, NameSpec};

    #[test]
    fn agrees_with_interpret() {
        let p = nsep4();
        let names = enumerate_names(&p, &NameSpec::new(2, 2, 2)).unwrap();
        let mut t = GroundTable::new();
        for g in p.filters(true) {
            for s in names.iter().step_by(7) {
                let id = t.value(s, g.members);
                let x = s.interpret(&g);
                assert_eq!(t.to_hf(id), x);
                assert_eq!(t.of_set(&x), id);
            }
        }
        let e = t.of_set(&HFSet::empty());
        let z = t.of_set(&HFSet::atom(0));
        let s = t.of_set(&HFSet::set([HFSet::atom(0)]));
        assert!(t.contains(s, z) && !t.contains(e, z) && !t.contains(z, z));
    }
}
