mod common;

use common::*;
use forcelab_core::boolcomp::Forcing;
use forcelab_core::fixtures::fork3;
use forcelab_core::semantics::{
    boolean_value, eval_ground, forces, forces_by_generics, ground_env, name_env, strongly_forces, Formula, NameEnv,
};
use forcelab_core::{HFSet, PName};

#[test]
fn parsing() {
    assert!(matches!(phi("s = chk {0}"), Formula::Eq(..)));
    assert!(matches!(phi("forall x in s (x in chk {0,1})"), Formula::Forall(..)));
    assert!(Formula::parse("exists x (x = x)").is_err());
    let f = phi("forall x in s (exists y in t (x = y))");
    assert_eq!(Formula::parse(&f.to_string()).unwrap(), f);
}

#[test]
fn ground_evaluation() {
    let f = phi("s = chk {0}");
    assert!(eval_ground(&f, &ground_env([("s", hf("{0}"))])).unwrap());
    assert!(!eval_ground(&f, &ground_env([("s", HFSet::empty())])).unwrap());
    let g = phi("forall x in s (x in t)");
    assert!(eval_ground(&g, &ground_env([("s", hf("{0}")), ("t", hf("{0,1}"))])).unwrap());
    assert!(matches!(eval_ground(&g, &ground_env([("s", hf("{0}"))])), Err(_)));
}

#[test]
fn boolean_values() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let env = name_env([("s", name(&p, "{(chk 0, a), (chk 1, b)}"))]);
    let v = boolean_value(&f, &phi("s = chk {0}"), &env).unwrap();
    assert_eq!(f.alg.format(v), "{[a]}");
    let none = NameEnv::default();
    assert_eq!(boolean_value(&f, &phi("chk {0} = chk {0}"), &none).unwrap(), f.alg.one());
    assert_eq!(boolean_value(&f, &phi("chk {0} = chk {1}"), &none).unwrap(), 0);
}

#[test]
fn forcing() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let env = name_env([("s", name(&p, "{(chk 0, a), (chk 1, b)}"))]);
    let e = phi("s = chk {0}");
    assert!(forces(&f, idx(&p, "a"), &e, &env).unwrap());
    assert!(!forces(&f, p.top(), &e, &env).unwrap());
    for q in 0..p.len() {
        assert!(forces(&f, q, &phi("chk {} = chk {}"), &env).unwrap());
        assert_eq!(forces(&f, q, &e, &env).unwrap(), forces_by_generics(&f, q, &e, &env).unwrap());
    }
}

#[test]
fn strong_forcing() {
    let p = fork3();
    let f = Forcing::new(p.clone());
    let s = name(&p, "{(chk 0, a)}");
    assert!(strongly_forces(&f, idx(&p, "a"), &PName::leaf(0), &s));
    assert!(!strongly_forces(&f, idx(&p, "b"), &PName::leaf(0), &s));
    assert!(strongly_forces(&f, p.top(), &PName::leaf(0), &name(&p, "{(chk 0, 1)}")));
}
