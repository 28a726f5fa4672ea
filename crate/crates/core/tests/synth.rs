mod common;

use common::*;
use forcelab_core::boolcomp::Forcing;
use forcelab_core::fixtures::{fork3, nsep4};
use forcelab_core::order::Density;
use forcelab_core::semantics::{name_env, Formula, NameEnv, Term};
use forcelab_core::synth::{
    encode_family_as_name, family_check_equality, family_for_formula, family_for_formula_bounded, family_interp_agreement,
    guarantee_counterexample, recover_family, DenseFamily, SynthError,
};
use forcelab_core::{BoolAlg, HFSet, PName, Poset};

fn set_of<'a>(fam: &'a DenseFamily, tag: &str) -> &'a forcelab_core::order::CondSet {
    &fam.sets.iter().find(|s| s.tag == tag).unwrap_or_else(|| panic!("no set {tag}")).set
}

fn holds(f: &Forcing, fam: &DenseFamily, phi: &Formula, env: &NameEnv) -> bool {
    guarantee_counterexample(f, fam, phi, env).unwrap().is_none()
}

fn eq_check(s: &PName, a: &HFSet) -> Formula {
    Formula::Eq(Term::Name(s.clone()), Term::Lit(a.clone()))
}

#[test]
fn check_equality_families() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let s = name(&p, "{(chk 0, a), (chk 0, b)}");
    let a = hf("{0}");
    let fam = family_check_equality(&f, &s, &a).unwrap();
    assert!(fam.sets.iter().all(|x| x.set.class.dense));
    assert!(fam.masks().contains(&mask(&p, &["a", "b"])), "{}", fam.render(&f));
    assert!(holds(&f, &fam, &eq_check(&s, &a), &NameEnv::default()));
    for g in p.filters(false).iter().filter(|g| fam.met_by(g)) {
        assert_eq!(s.interpret(g), a);
    }
    // A check name needs no dense sets.
    let c = PName::check(&a, p.top());
    assert!(family_check_equality(&f, &c, &a).unwrap().is_empty());
    // Rank two.
    let t = name(&p, "{({(chk 0, a)}, 1)}");
    let b = hf("{{0}}");
    let fam = family_check_equality(&f, &t, &b).unwrap();
    assert!(!fam.is_empty());
    assert!(holds(&f, &fam, &eq_check(&t, &b), &NameEnv::default()));
}

#[test]
fn agreement_families() {
    let n = nsep4();
    let f = Forcing::new(n.clone());
    let fam = family_interp_agreement(&f, &name(&n, "{(chk 0, b)}")).unwrap();
    assert_eq!(ids(&n, set_of(&fam, "E_0").members), ["b", "c"]);
    assert!(!fam.met_by(&filt(&n, &["1"])));
    let p = fork3();
    let f = Forcing::new(p.clone());
    let fam = family_interp_agreement(&f, &name(&p, "{(chk 0, a)}")).unwrap();
    assert_eq!(ids(&p, set_of(&fam, "E_0").members), ["a", "b"]);
    let fam = family_interp_agreement(&f, &name(&p, "chk {0,1}")).unwrap();
    assert!(fam.sets.iter().all(|x| x.set.members == p.all()));
    assert_eq!(family_interp_agreement(&f, &name(&p, "{({(chk 0, a)}, 1)}")), Err(SynthError::NotRankOne));
}

#[test]
fn formula_families() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let s = name(&p, "{(chk 0, a), (chk 0, b)}");
    let env = name_env([("s", s.clone()), ("t", s.clone())]);
    let same = phi("s = t");
    let fam = family_for_formula(&f, &same, &env).unwrap();
    for g in p.filters(false) {
        assert!(!fam.met_by(&g) || s.interpret(&g) == s.interpret(&g));
    }
    assert!(holds(&f, &fam, &same, &env));
    let has = phi("chk 0 in s");
    let fam = family_for_formula(&f, &has, &env).unwrap();
    assert!(fam.masks().contains(&mask(&p, &["a", "b"])));
    assert!(holds(&f, &fam, &has, &env));
    let u = name(&p, "{(chk 0, a), (chk 1, b)}");
    let env = name_env([("s", u.clone())]);
    let all = phi("forall x in s (x in chk {0})");
    let fam = family_for_formula(&f, &all, &env).unwrap();
    assert!(holds(&f, &fam, &all, &env));
    // Under {1,b} nothing forcing the formula is present; under {1,a} it is true.
    let b = filt(&p, &["1", "b"]);
    assert!(!forcelab_core::semantics::forces(&f, idx(&p, "b"), &all, &env).unwrap());
    assert!(!forcelab_core::semantics::forces(&f, p.top(), &all, &env).unwrap());
    assert_eq!(u.interpret(&b), hf("{1}"));
    let a = filt(&p, &["1", "a"]);
    assert!(fam.met_by(&a));
    assert_eq!(u.interpret(&a), hf("{0}"));
}

fn boolean_fork() -> Forcing {
    Forcing::boolean(&BoolAlg::complete(&fork3()), "B").unwrap()
}

#[test]
fn bounded_families() {
    let b = boolean_fork();
    let p = &b.poset;
    let s = name(p, "{(chk 0, [a]), (chk 1, [b])}");
    let env = name_env([("s", s.clone())]);
    let e = phi("s = chk {0}");
    let fam = family_for_formula_bounded(&b, &e, &env, 1).unwrap();
    assert!(!fam.is_empty());
    for x in &fam.sets {
        assert!(x.set.class.predense);
        assert!(x.set.len() <= x.bound.unwrap());
        assert!(x.set.len() <= 2, "{} has {} conditions", x.tag, x.set.len());
    }
    assert!(holds(&b, &fam, &e, &env));
    let c = name_env([("s", name(p, "chk {0}"))]);
    let fam = family_for_formula_bounded(&b, &e, &c, 1).unwrap();
    assert!(fam.sets.iter().all(|x| ids(p, x.set.members) == ["1"]));
    let wide = name_env([("s", name(p, "{(chk 0, [a]), (chk 0, [b])}"))]);
    assert_eq!(family_for_formula_bounded(&b, &e, &wide, 1), Err(SynthError::NotBounded(1)));
    // FORK3 is already the nonzero part of its algebra; NSEP4 is not.
    assert!(Forcing::new(fork3()).is_boolean());
    let plain = Forcing::new(nsep4());
    let env = name_env([("s", name(&plain.poset, "{(chk 0, a)}"))]);
    assert_eq!(family_for_formula_bounded(&plain, &e, &env, 1), Err(SynthError::NotBoolean));
}

#[test]
fn encoding() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let d = mask(&p, &["a", "b"]);
    let s = encode_family_as_name(&f, &[d], &[HFSet::atom(0)], Density::Dense).unwrap();
    assert_eq!(s, name(&p, "{(chk 0, a), (chk 0, b)}"));
    assert_eq!(s.interpret(&filt(&p, &["1", "a"])), hf("{0}"));
    assert_eq!(s.interpret(&filt(&p, &["1", "b"])), hf("{0}"));
    assert_eq!(s.interpret(&filt(&p, &["1"])), HFSet::empty());
    assert_eq!(recover_family(&f, &s, &[HFSet::atom(0)]), [d]);
    let e = encode_family_as_name(&f, &[], &[], Density::Dense).unwrap();
    assert!(e.is_empty_name());
    let env = NameEnv::default();
    assert_eq!(
        forcelab_core::semantics::boolean_value(&f, &eq_check(&e, &HFSet::empty()), &env).unwrap(),
        f.alg.one()
    );
    let w = encode_family_as_name(&f, &[p.all()], &[HFSet::atom(0)], Density::Dense).unwrap();
    assert_eq!(w.entries().len(), p.len());
    assert!(encode_family_as_name(&f, &[mask(&p, &["a"])], &[HFSet::atom(0)], Density::Dense).is_err());
}

#[test]
fn recovery_is_downward_closure() {
    let p: Poset = forcelab_core::order::parse_poset("poset CH3 { elems 1 a b; order b<a a<1; }").unwrap();
    let f = Forcing::new(p.clone());
    let d = mask(&p, &["1", "b"]);
    assert_ne!(p.down_closure(d), d);
    let s = encode_family_as_name(&f, &[d], &[HFSet::atom(0)], Density::Dense).unwrap();
    assert_eq!(recover_family(&f, &s, &[HFSet::atom(0)]), [p.down_closure(d)]);
}
