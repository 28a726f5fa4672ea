#![allow(dead_code)]

use forcelab_core::bits::{self, Mask};
use forcelab_core::order::Filter;
use forcelab_core::principles::name_on;
use forcelab_core::semantics::Formula;
use forcelab_core::{HFSet, PName, Poset};

pub fn hf(s: &str) -> HFSet {
    HFSet::parse(s).unwrap()
}

pub fn name(p: &Poset, s: &str) -> PName {
    name_on(p, s).unwrap()
}

pub fn phi(s: &str) -> Formula {
    Formula::parse(s).unwrap()
}

pub fn mask(p: &Poset, ids: &[&str]) -> Mask {
    p.mask_of(ids).unwrap()
}

pub fn filt(p: &Poset, ids: &[&str]) -> Filter {
    let m = mask(p, ids);
    assert!(p.is_filter(m), "{ids:?} is not a filter");
    Filter { members: m }
}

pub fn idx(p: &Poset, id: &str) -> usize {
    p.index_of(id).unwrap()
}

/// Sorted ids of a mask, for readable assertions.
pub fn ids(p: &Poset, m: Mask) -> Vec<String> {
    bits::ones(m).map(|q| p.id(q).to_string()).collect()
}
