//! Bundles survive a TOML round trip and re-verify to their verdict.

mod common;

use common::*;
use forcelab_core::fixtures::{fork3, nsep4};
use forcelab_core::harness::{replay, run_suite, Bundle, InstanceSpace, NameSpec, Outcome, Suite};
use forcelab_core::principles::Largeness;
use forcelab_core::Poset;

fn b(suite: &str, prop: &str, p: &Poset) -> Bundle {
    Bundle::new(suite, prop, p).verdict(Outcome::Holds)
}

/// One instance per property that should hold.
fn holding() -> Vec<Bundle> {
    let f = fork3();
    let n = nsep4();
    let s = "{(chk 0, a), (chk 1, b)}";
    let mut out = Vec::new();
    for prop in ["strong-implies-forces", "forces-implies-dense-strong", "strong-implies-member", "nonmember-criterion"] {
        out.push(
            b("sforcing", prop, &f)
                .name("s", s.into())
                .name("t", "chk 0".into())
                .cond(&f, idx(&f, "a"))
                .filter(&f, mask(&f, &["1", "a"])),
        );
    }
    for prop in ["boolean-vs-generics", "value-is-supremum"] {
        out.push(b("semantics", prop, &f).name("s", s.into()).formula("s = chk {0}").cond(&f, f.top()));
    }
    out.push(b("correspondence", "check-equality-guarantee", &f).name("s", s.into()).value(hf("{0}")));
    for prop in ["formula-guarantee", "families-dense"] {
        out.push(b("correspondence", prop, &f).name("s", s.into()).formula("forall x in s (x in chk {0})"));
    }
    for prop in ["encode-roundtrip", "fa-iff-n", "witness-transfer"] {
        out.push(b("correspondence", prop, &n).sets(&n, &[mask(&n, &["a", "c"]), mask(&n, &["c"])]));
    }
    for prop in ["bounded-sizes", "bounded-guarantee"] {
        let mut x = b("bounded", prop, &f).name("s", "{(chk 0, [a]), (chk 1, [b])}".into()).formula("s = chk {0}");
        x.m = Some(1);
        x.universe = Some("boolean".into());
        out.push(x);
    }
    for prop in ["agreement-guarantee", "separative-agreement"] {
        out.push(b("interp-agreement", prop, &f).name("s", "{(chk 0, a)}".into()).filter(&f, mask(&f, &["1", "a"])));
    }
    for prop in ["cone-transfer", "filter-regeneration"] {
        let mut x = b("hamkins", prop, &n).name("s", "{(chk 0, a), (chk 0, b)}".into());
        x.largeness = Some(Largeness::Nonempty);
        x.k = Some(2);
        out.push(x);
    }
    let ultra = |prop: &str| {
        let mut x = b("ultrapower", prop, &f);
        x.universe = Some("1,2,2".into());
        x.atom = Some("[a]".into());
        x
    };
    out.push(ultra("los").name("s", "{(chk 0, [a]), (chk 1, [b])}".into()).formula("chk 0 in s"));
    out.push(ultra("trace-identity").name("s", "{(chk 0, [a])}".into()));
    out.push(ultra("elementarity").name("s", "{(chk 0, [a]), (chk 1, [b])}".into()).value(hf("{0,1}")));
    out.push(ultra("generic-ultrafilter"));
    out.push(ultra("j-embedding"));
    let mut l = ultra("leibniz")
        .name("s", "{(chk 0, [a]), (chk 0, [b])}".into())
        .name("t", "{(chk 0, 1)}".into())
        .formula("chk 0 in s");
    l.universe = Some("1,2,2,grouped".into());
    out.push(l);
    out.push(b("triviality", "fa-dense-all", &n).sets(&n, &[mask(&n, &["c"]), mask(&n, &["a", "c"])]));
    out.push(b("triviality", "bn1", &f).name("s", "{(chk 0, a), (chk 0, b)}".into()).value(hf("{0}")));
    out
}

#[test]
fn every_property_replays() {
    let bundles = holding();
    for s in Suite::ALL {
        for (prop, _) in s.properties() {
            assert!(
                bundles.iter().any(|x| x.suite == s.id() && x.property == *prop)
                    || (s == Suite::SeparativityProbe),
                "no bundle for {s}/{prop}"
            );
        }
    }
    for x in bundles {
        let back = Bundle::parse(&x.to_toml()).unwrap();
        assert_eq!(back, x);
        assert_eq!(replay(&back).unwrap(), Outcome::Holds, "{}/{}", x.suite, x.property);
    }
}

#[test]
fn divergence_replays_as_failure() {
    let n = nsep4();
    let x = Bundle::new("separativity-probe", "nonseparative-agreement", &n)
        .name("s", "{(chk 0, b)}".into())
        .filter(&n, mask(&n, &["1"]));
    assert_eq!(replay(&x).unwrap(), Outcome::Fails);
}

#[test]
fn written_bundles_replay_to_their_verdict() {
    let space = InstanceSpace { max_poset: 4, names: NameSpec::new(1, 2, 2), depth: 1, ..InstanceSpace::default() };
    let r = run_suite(&space, &[Suite::SeparativityProbe]).unwrap();
    let dir = std::env::temp_dir().join(format!("forcelab-replay-{}", std::process::id()));
    let paths = r.write_bundles(&dir).unwrap();
    assert_eq!(paths.len(), 1);
    for p in &paths {
        let x = Bundle::load(p).unwrap();
        assert_eq!(replay(&x).unwrap(), x.verdict);
        assert_eq!(replay(&x).unwrap(), replay(&x).unwrap());
        assert!(Bundle::replay_command(p).starts_with("forcelab replay "));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_bundles_are_rejected() {
    assert!(Bundle::parse("suite = 1").is_err());
    let f = fork3();
    let x = Bundle::new("sforcing", "no-such-property", &f).name("s", "chk 0".into());
    assert!(replay(&x).is_err());
    let missing = Bundle::new("semantics", "boolean-vs-generics", &f);
    assert!(replay(&missing).is_err());
    let mut bad = Bundle::new("interp-agreement", "separative-agreement", &f).name("s", "{(chk 0, a)}".into());
    bad.filter = Some(vec!["a".into()]);
    assert!(replay(&bad).is_err());
}
