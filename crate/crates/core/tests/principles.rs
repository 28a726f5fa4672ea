mod common;

use std::collections::BTreeSet;

use common::*;
use forcelab_core::boolcomp::Forcing;
use forcelab_core::bits;
use forcelab_core::fixtures::{fork3, nsep4, nwm5};
use forcelab_core::harness::FormulaSpace;
use forcelab_core::order::Density;
use forcelab_core::principles::{
    check_fa, check_n, check_phi_n, check_simultaneous_n, hamkins_pipeline, trace, Largeness, NameFlags, PrincipleError,
    Property,
};
use forcelab_core::semantics::name_env;
use forcelab_core::{HFSet, PName};

fn zero() -> BTreeSet<u32> {
    [0].into_iter().collect()
}

#[test]
fn traces() {
    let p = fork3();
    let ab = mask(&p, &["a", "b"]);
    let a = mask(&p, &["a"]);
    let b = mask(&p, &["b"]);
    assert_eq!(trace(&filt(&p, &["1", "a"]), &[ab, b]), 0b1);
    assert_eq!(trace(&filt(&p, &["1"]), &[ab, a, b]), 0);
    assert_eq!(trace(&filt(&p, &["1", "a"]), &[a, ab, b]), 0b11);
}

#[test]
fn forcing_axiom() {
    let p = fork3();
    let ab = mask(&p, &["a", "b"]);
    let r = check_fa(&p, &[ab, ab], &Largeness::All, Density::Dense).unwrap();
    assert!(r.holds());
    assert_eq!(r.witness_ids(), ["1", "a"]);
    let r = check_fa(&p, &[mask(&p, &["a"]), mask(&p, &["b"])], &Largeness::All, Density::Unchecked).unwrap();
    assert!(!r.holds());
    let r = check_fa(&nsep4(), &[], &Largeness::All, Density::Dense).unwrap();
    assert!(r.holds());
    assert_eq!(r.witness_ids(), ["1"]);
    assert!(check_fa(&p, &[mask(&p, &["a"])], &Largeness::All, Density::Dense).unwrap_err().is_hypothesis());
}

#[test]
fn name_principle() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let s = name(&p, "{(chk 0, a), (chk 0, b)}");
    let r = check_n(&f, &s, &hf("{0}"), NameFlags::default()).unwrap();
    assert!(r.holds());
    assert_eq!(r.witness_ids(), ["1", "a"]);
    let r = check_n(&f, &name(&p, "chk {0}"), &hf("{0}"), NameFlags::default()).unwrap();
    assert_eq!(r.witness_ids(), ["1"]);
    let e = check_n(&f, &name(&p, "{(chk 0, a)}"), &hf("{0}"), NameFlags::default()).unwrap_err();
    assert!(e.is_hypothesis(), "{e}");
}

#[test]
fn phi_name_principle() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let s = name(&p, "{(chk 0, a), (chk 1, b)}");
    let r = check_phi_n(&f, &s, &Property::large(Largeness::Nonempty, 2)).unwrap();
    assert!(r.holds());
    assert_eq!(r.witness_ids(), ["1", "a"]);
    let t = name(&p, "{(chk 0, a), (chk 0, b)}");
    assert!(check_phi_n(&f, &t, &Property::large(Largeness::Contains(zero()), 2)).unwrap().holds());
    let e = check_phi_n(&f, &name(&p, "chk {}"), &Property::large(Largeness::Nonempty, 2)).unwrap_err();
    assert!(matches!(e, PrincipleError::Hypothesis(_)));
    let body = phi("chk 0 in s");
    assert!(check_phi_n(&f, &t, &Property::formula("s", body)).unwrap().holds());
}

#[test]
fn simultaneous_name_principle() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let space = FormulaSpace::standard(2);
    let env = name_env([("s", name(&p, "chk {0}"))]);
    let (r, forced) = check_simultaneous_n(&f, &env, &space).unwrap();
    assert!(r.holds() && !forced.is_empty());
    let env = name_env([("s", name(&p, "{(chk 0, a), (chk 0, b)}"))]);
    let (r, forced) = check_simultaneous_n(&f, &env, &space).unwrap();
    assert!(forced.contains(&phi("s = chk {0}")));
    assert_eq!(r.witness_ids(), ["1", "a"]);
    // Forced equal, with disjoint supports.
    let s = name(&p, "{(chk 0, a), (chk 0, b)}");
    let t = name(&p, "{(chk 0, 1)}");
    assert_eq!(s.support() & t.support(), 0);
    let two = FormulaSpace::new(&["s", "t"], vec![HFSet::atom(0)], 1);
    let (r, forced) = check_simultaneous_n(&f, &name_env([("s", s.clone()), ("t", t.clone())]), &two).unwrap();
    assert!(forced.contains(&phi("s = t")));
    let g = r.witness.unwrap();
    assert_eq!(s.interpret(&g), t.interpret(&g));
    // Every forced equality with a literal is an instance of the name principle.
    for x in [HFSet::empty(), hf("{0}")] {
        if forced.contains(&forcelab_core::semantics::Formula::parse(&format!("s = chk {x}")).unwrap()) {
            assert!(check_n(&f, &s, &x, NameFlags::default()).unwrap().holds());
        }
    }
}

#[test]
fn hamkins() {
    let n = nsep4();
    let f = Forcing::new(n.clone());
    let s = name(&n, "{(chk 0, a), (chk 1, b)}");
    let r = hamkins_pipeline(&f, &s, &Largeness::Nonempty, 2).unwrap();
    assert_eq!(r.components, [s.clone()]);
    assert!(r.confirmed());
    let t = name(&n, "{(chk 0, a), (chk 0, b)}");
    let r = hamkins_pipeline(&f, &t, &Largeness::Nonempty, 1).unwrap();
    assert_eq!(r.components.len(), 2);
    assert!(r.deciders_dense && !r.cones.is_empty());
    assert!(r.cones.iter().all(|c| c.regenerates && c.transfers));
    assert!(r.report.holds() && r.confirmed());
    let w = nwm5();
    let e = hamkins_pipeline(&Forcing::new(w.clone()), &name(&w, "{(chk 0, a)}"), &Largeness::Nonempty, 1).unwrap_err();
    assert!(e.is_hypothesis(), "{e}");
    // Splitting a two-bounded name needs a partition-regular predicate.
    let e = hamkins_pipeline(&f, &t, &Largeness::AtLeast(2), 2).unwrap_err();
    assert!(matches!(e, PrincipleError::NotPartitionRegular { .. }), "{e}");
}

#[test]
fn partition_regularity() {
    for k in 1..=4 {
        assert!(Largeness::Nonempty.is_partition_regular(k, 3).unwrap());
        assert!(Largeness::AtLeast(1).is_partition_regular(k, 3).unwrap());
        assert!(Largeness::Contains(zero()).is_partition_regular(k, 3).unwrap());
        assert!(Largeness::Meets(zero()).is_partition_regular(k, 3).unwrap());
        assert_eq!(Largeness::All.is_partition_regular(k, 2).unwrap(), k <= 1);
        for m in 2..=k {
            // Splitting into two halves of size below m defeats AT_LEAST(m).
            assert!(!Largeness::AtLeast(m).is_partition_regular(k, 2).unwrap(), "k={k} m={m}");
        }
    }
    let two: BTreeSet<u32> = [0, 1].into_iter().collect();
    assert!(!Largeness::Contains(two).is_partition_regular(2, 2).unwrap());
    let one = bits::full(1);
    assert!(Largeness::All.accepts_mask(one, 1));
    assert!(PName::empty().is_lambda_bounded(1));
}
