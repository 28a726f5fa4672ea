mod common;

use common::*;
use forcelab_core::boolcomp::Forcing;
use forcelab_core::fixtures::{fork3, nsep4};
use forcelab_core::names::{canonicalize, quasi_interpret, restrict_to_cone, split_bounded};
use forcelab_core::{BoolAlg, HFSet, PName};

#[test]
fn ranks() {
    let f = fork3();
    assert_eq!(PName::leaf(0).rank(), 0);
    assert_eq!(name(&f, "{(chk 0, a)}").rank(), 1);
    assert_eq!(name(&f, "{({(chk 0, a)}, b)}").rank(), 2);
    assert!(PName::empty().is_empty_name() && !PName::empty().is_leaf());
}

#[test]
fn check_names() {
    let f = fork3();
    let top = f.top();
    assert!(PName::check(&HFSet::empty(), top).is_empty_name());
    assert_eq!(PName::check(&hf("{0}"), top), PName::set([(PName::leaf(0), top)]));
    assert_eq!(PName::check(&hf("{{0}}"), top), PName::set([(PName::set([(PName::leaf(0), top)]), top)]));
    assert_eq!(name(&f, "chk {0}"), PName::check(&hf("{0}"), top));
}

#[test]
fn smallness_and_boundedness() {
    let f = fork3();
    let s = name(&f, "{(chk 0, a), (chk 1, b)}");
    assert!(s.is_kappa_small(2) && !s.is_kappa_small(1));
    assert!(!name(&f, "chk {0,1,2}").is_kappa_small(2));
    let t = name(&f, "{(chk 0, a), (chk 0, b)}");
    assert!(!t.is_lambda_bounded(1) && t.is_lambda_bounded(2));
    assert!(name(&f, "chk {0,1,{0}}").is_lambda_bounded(1));
    assert!(s.is_lambda_bounded(1));
}

#[test]
fn interpretation() {
    let f = fork3();
    let s = name(&f, "{(chk 0, a), (chk 1, b)}");
    assert_eq!(s.interpret(&filt(&f, &["1", "a"])), hf("{0}"));
    assert_eq!(s.interpret(&filt(&f, &["1"])), HFSet::empty());
    let c = name(&f, "chk {0,1}");
    for g in f.filters(false) {
        assert_eq!(c.interpret(&g), hf("{0,1}"));
    }
}

#[test]
fn quasi_interpretation() {
    let n = nsep4();
    let fz = Forcing::new(n.clone());
    let s = name(&n, "{(chk 0, b)}");
    let g = filt(&n, &["1"]);
    assert_eq!(quasi_interpret(&fz, &s, &g).unwrap(), hf("{0}"));
    assert_eq!(s.interpret(&g), HFSet::empty());
    let f = fork3();
    let fz = Forcing::new(f.clone());
    let s = name(&f, "{(chk 0, a)}");
    assert_eq!(quasi_interpret(&fz, &s, &filt(&f, &["1", "b"])).unwrap(), HFSet::empty());
}

#[test]
fn canonical_forms() {
    let b = Forcing::boolean(&BoolAlg::complete(&fork3()), "B").unwrap();
    let p = &b.poset;
    let s = name(p, "{(chk 0, [a]), (chk 0, [b])}");
    assert_eq!(canonicalize(&b, &s).unwrap(), name(p, "{(chk 0, 1)}"));
    let t = name(p, "{(chk 0, [a]), (chk 1, 1)}");
    assert_eq!(canonicalize(&b, &t).unwrap(), t);
    assert_eq!(canonicalize(&b, &PName::empty()).unwrap(), PName::empty());
}

#[test]
fn splitting() {
    let f = fork3();
    let s = name(&f, "{(chk 0, a), (chk 0, b), (chk 1, a)}");
    let parts = split_bounded(&s, 2).unwrap();
    assert_eq!(parts, [name(&f, "{(chk 0, a), (chk 1, a)}"), name(&f, "{(chk 0, b)}")]);
    let one = name(&f, "{(chk 0, a), (chk 1, b)}");
    assert_eq!(split_bounded(&one, 1).unwrap(), [one]);
    assert_eq!(split_bounded(&PName::empty(), 3).unwrap(), vec![PName::empty(); 3]);
}

#[test]
fn cone_restriction() {
    let n = nsep4();
    let s = name(&n, "{(chk 0, b)}");
    let (cone, r) = restrict_to_cone(&n, &s, idx(&n, "a")).unwrap();
    assert_eq!(r, name(&cone.poset, "{(chk 0, c)}"));
    let (cone, r) = restrict_to_cone(&n, &s, n.top()).unwrap();
    assert_eq!(cone.lift(r.support()), s.support());
    let f = fork3();
    let (_, r) = restrict_to_cone(&f, &name(&f, "{(chk 0, b), (chk 1, 1)}"), idx(&f, "a")).unwrap();
    assert_eq!(r.entries().len(), 1);
}
