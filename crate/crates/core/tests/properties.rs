//! Structural invariants on random small posets, names and algebras.

use forcelab_core::bits::{self, Mask};
use forcelab_core::boolcomp::Forcing;
use forcelab_core::harness::{isomorphic, FormulaSpace};
use forcelab_core::names::quasi_interpret;
use forcelab_core::order::Density;
use forcelab_core::principles::{check_n, check_simultaneous_n, trace, NameFlags};
use forcelab_core::semantics::{forces, forces_by_generics, name_env, strongly_forces, Formula, Term};
use forcelab_core::synth::{encode_family_as_name, recover_family};
use forcelab_core::{BoolAlg, HFSet, PName, Poset};
use proptest::prelude::*;

const IDS: [&str; 6] = ["1", "a", "b", "c", "d", "e"];

/// A poset on `n` points: `1` on top, and `IDS[j] < IDS[i]` for `i < j` when the bit is set.
fn poset() -> impl Strategy<Value = Poset> {
    (1usize..=6, any::<u16>()).prop_map(|(n, rel)| {
        let mut covers: Vec<(&str, &str)> = (1..n).map(|j| (IDS[j], "1")).collect();
        let mut bit = 0;
        for i in 1..n {
            for j in i + 1..n {
                if rel >> (bit % 16) & 1 == 1 {
                    covers.push((IDS[j], IDS[i]));
                }
                bit += 1;
            }
        }
        Poset::from_covers("R", &IDS[..n], &covers, None).unwrap()
    })
}

/// Flat names as `(leaf, condition)` seeds, conditions reduced mod the poset size.
fn flat_seed() -> impl Strategy<Value = Vec<(u32, usize)>> {
    prop::collection::vec((0u32..3, 0usize..6), 0..5)
}

fn flat(p: &Poset, seed: &[(u32, usize)]) -> PName {
    PName::set(seed.iter().map(|&(x, q)| (PName::leaf(x), q % p.len())))
}

fn nested(p: &Poset, outer: &[(usize, usize)], inner: &[Vec<(u32, usize)>]) -> PName {
    PName::set(outer.iter().map(|&(c, q)| {
        let child = if inner.is_empty() { PName::leaf(0) } else { flat(p, &inner[c % inner.len()]) };
        (child, q % p.len())
    }))
}

fn hf_set() -> impl Strategy<Value = HFSet> {
    let leaf = prop_oneof![(0u32..3).prop_map(HFSet::atom), Just(HFSet::empty())];
    leaf.prop_recursive(3, 12, 3, |inner| prop::collection::vec(inner, 0..4).prop_map(HFSet::set))
}

fn subsets(p: &Poset) -> impl Iterator<Item = Mask> {
    0..=p.all()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filters_are_filters(p in poset()) {
        for g in p.filters(false) {
            for q in bits::ones(g.members) {
                prop_assert!(bits::subset(p.above(q), g.members));
            }
            for a in bits::ones(g.members) {
                for b in bits::ones(g.members) {
                    prop_assert!(g.members & p.below(a) & p.below(b) != 0);
                }
            }
            prop_assert_eq!(p.generated_filter(g.members).unwrap(), g);
        }
    }

    #[test]
    fn dense_sets_are_predense(p in poset()) {
        for s in subsets(&p) {
            prop_assert!(!p.is_dense(s) || p.is_predense(s));
        }
    }

    #[test]
    fn quotient_is_idempotent(p in poset()) {
        let (q, _) = p.separative_quotient();
        let (qq, _) = q.separative_quotient();
        prop_assert!(isomorphic(&q, &qq));
        prop_assert!(q.is_separative());
        prop_assert!(p.cone(p.top()).poset.same_order(&p));
    }

    #[test]
    fn algebra_laws(p in poset()) {
        let b = BoolAlg::complete(&p);
        let els: Vec<Mask> = b.elements().collect();
        for &x in &els {
            for &y in &els {
                prop_assert_eq!(b.complement(b.sup([x, y])), b.inf([b.complement(x), b.complement(y)]));
                prop_assert_eq!(b.complement(b.inf([x, y])), b.sup([b.complement(x), b.complement(y)]));
                for &z in &els {
                    prop_assert_eq!(b.inf([x, b.sup([y, z])]), b.sup([b.inf([x, y]), b.inf([x, z])]));
                }
            }
        }
        for x in els.iter().filter(|&&x| x != 0) {
            prop_assert!((0..p.len()).any(|q| bits::subset(b.embed(q), *x)));
        }
        for i in 0..p.len() {
            for j in 0..p.len() {
                prop_assert_eq!(p.compatible(i, j), b.embed(i) & b.embed(j) != 0);
            }
        }
        for u in b.ultrafilters() {
            prop_assert!(b.is_generic(&u).unwrap());
        }
    }

    #[test]
    fn interpretation_invariants(p in poset(), seed in flat_seed()) {
        let f = Forcing::new(p.clone());
        let s = flat(&p, &seed);
        let filters = p.filters(false);
        for g in &filters {
            let x = s.interpret(g);
            let q = quasi_interpret(&f, &s, g).unwrap();
            prop_assert!(x.members().unwrap().is_subset(q.members().unwrap()));
            for h in filters.iter().filter(|h| bits::subset(g.members, h.members)) {
                prop_assert!(x.members().unwrap().is_subset(s.interpret(h).members().unwrap()));
            }
        }
        for g in f.generic_filters() {
            prop_assert_eq!(s.interpret(&g), quasi_interpret(&f, &s, &g).unwrap());
        }
        if p.is_separative() && s.is_lambda_bounded(1) {
            for g in &filters {
                prop_assert_eq!(s.interpret(g), quasi_interpret(&f, &s, g).unwrap());
            }
        }
    }

    #[test]
    fn check_names(x in hf_set()) {
        let s = PName::check(&x, 0);
        prop_assert_eq!(s.rank(), x.depth());
        prop_assert!(s.is_kappa_small(x.max_width().max(1)));
        prop_assert!(s.is_lambda_bounded(1));
        prop_assert_eq!(s.as_check(0), Some(x));
    }

    #[test]
    fn strong_forcing_and_deciders(
        p in poset(),
        outer in prop::collection::vec((0usize..4, 0usize..6), 0..4),
        inner in prop::collection::vec(flat_seed(), 0..3),
    ) {
        let f = Forcing::new(p.clone());
        let s = nested(&p, &outer, &inner);
        for (c, _) in s.groups() {
            let member = Formula::In(Term::var("t"), Term::var("s"));
            let env = name_env([("s", s.clone()), ("t", (*c).clone())]);
            for q in 0..p.len() {
                let forced = forces(&f, q, &member, &env).unwrap();
                prop_assert!(!strongly_forces(&f, q, c, &s) || forced);
                prop_assert_eq!(forced, forces_by_generics(&f, q, &member, &env).unwrap());
                for g in p.filters(false).iter().filter(|g| g.contains(q)) {
                    if strongly_forces(&f, q, c, &s) {
                        prop_assert!(s.interpret(g).contains(&c.interpret(g)));
                    }
                }
            }
        }
    }

    #[test]
    fn trace_is_monotone(p in poset(), sets in prop::collection::vec(any::<u8>(), 0..4)) {
        let sets: Vec<Mask> = sets.iter().map(|&m| m as Mask & p.all()).collect();
        let fs = p.filters(false);
        for g in &fs {
            for h in fs.iter().filter(|h| bits::subset(g.members, h.members)) {
                prop_assert!(bits::subset(trace(g, &sets), trace(h, &sets)));
            }
        }
    }

    #[test]
    fn encoding_round_trip(p in poset(), picks in prop::collection::vec(any::<u8>(), 1..3)) {
        let f = Forcing::new(p.clone());
        let dense: Vec<Mask> = (1..=p.all()).filter(|&d| p.is_dense(d)).collect();
        let sets: Vec<Mask> = picks.iter().map(|&i| dense[i as usize % dense.len()]).collect();
        let values: Vec<HFSet> = (0..sets.len() as u32).map(HFSet::atom).collect();
        let s = encode_family_as_name(&f, &sets, &values, Density::Dense).unwrap();
        let back = recover_family(&f, &s, &values);
        prop_assert_eq!(back, sets.iter().map(|&d| p.down_closure(d)).collect::<Vec<_>>());
        let a = HFSet::set(values);
        prop_assert!(check_n(&f, &s, &a, NameFlags::default()).unwrap().holds());
    }

    #[test]
    fn simultaneous_implies_single(p in poset(), seed in flat_seed()) {
        prop_assume!(p.len() <= 4);
        let f = Forcing::new(p.clone());
        let s = flat(&p, &seed);
        let space = FormulaSpace::standard(1);
        let (r, forced) = check_simultaneous_n(&f, &name_env([("s", s.clone())]), &space).unwrap();
        for phi in &forced {
            if let Formula::Eq(Term::Var(_), Term::Lit(a)) = phi {
                let n = check_n(&f, &s, a, NameFlags::default()).unwrap();
                prop_assert!(!r.holds() || n.holds());
            }
        }
    }
}
