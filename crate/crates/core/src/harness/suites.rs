//! The exhaustive property suites and counterexample replay.
//!
//! Sweeps use fast paths (batched Boolean values, hash-consed ground
//! values, mask arithmetic). Replay re-checks a single instance through the
//! plain public operations, so a bundle is confirmed independently of the
//! sweep that produced it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use super::enumerate::{enumerate_names, FormulaSpace, NameSpec};
use super::ground::GroundTable;
use super::report::{Bundle, Outcome, Sheet, SuiteReport, Tally};
use super::space::InstanceSpace;
use super::HarnessError;
use crate::batch::FormulaBatch;
use crate::bits::{self, Mask};
use crate::boolcomp::{BoolAlg, Forcing};
use crate::error::Error;
use crate::hf::HFSet;
use crate::names::{quasi_interpret, PName};
use crate::order::{parse_poset, Density, Filter, Poset};
use crate::principles::{check_fa, check_n, hamkins_pipeline, name_on, trace, Largeness, NameFlags};
use crate::semantics::{
    boolean_value, forces, forces_by_generics, name_env, strongly_forces, Evaluator, Formula, NameEnv, Term,
};
use crate::synth::{
    encode_family_as_name, family_check_equality, family_for_formula, family_for_formula_bounded,
    family_interp_agreement, guarantee_counterexample, recover_family, DenseFamily,
};
use crate::ultrapower::{check_leibniz, los_sweep, ultrafilter_at, QuotientModel, Universe};

/// Evaluator memo is dropped after this many names.
const EV_RESET: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Sforcing,
    Semantics,
    Correspondence,
    Bounded,
    InterpAgreement,
    SeparativityProbe,
    Hamkins,
    Ultrapower,
    Triviality,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Sforcing,
        Suite::Semantics,
        Suite::Correspondence,
        Suite::Bounded,
        Suite::InterpAgreement,
        Suite::SeparativityProbe,
        Suite::Hamkins,
        Suite::Ultrapower,
        Suite::Triviality,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::Sforcing => "sforcing",
            Suite::Semantics => "semantics",
            Suite::Correspondence => "correspondence",
            Suite::Bounded => "bounded",
            Suite::InterpAgreement => "interp-agreement",
            Suite::SeparativityProbe => "separativity-probe",
            Suite::Hamkins => "hamkins",
            Suite::Ultrapower => "ultrapower",
            Suite::Triviality => "triviality",
        }
    }

    /// Property ids with their probe flag.
    pub fn properties(self) -> &'static [(&'static str, bool)] {
        match self {
            Suite::Sforcing => SFORCING,
            Suite::Semantics => SEMANTICS,
            Suite::Correspondence => CORRESPONDENCE,
            Suite::Bounded => BOUNDED,
            Suite::InterpAgreement => INTERP,
            Suite::SeparativityProbe => PROBE,
            Suite::Hamkins => HAMKINS,
            Suite::Ultrapower => ULTRAPOWER,
            Suite::Triviality => TRIVIALITY,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Suite, HarnessError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.id() == s)
            .ok_or_else(|| HarnessError::UnknownSuite(s.to_string()))
    }
}

const SFORCING: &[(&str, bool)] = &[
    ("strong-implies-forces", false),
    ("forces-implies-dense-strong", false),
    ("strong-implies-member", false),
    ("nonmember-criterion", false),
];
const SEMANTICS: &[(&str, bool)] = &[("boolean-vs-generics", false), ("value-is-supremum", false)];
const CORRESPONDENCE: &[(&str, bool)] = &[
    ("check-equality-guarantee", false),
    ("formula-guarantee", false),
    ("families-dense", false),
    ("encode-roundtrip", false),
    ("fa-iff-n", false),
    ("witness-transfer", false),
];
const BOUNDED: &[(&str, bool)] = &[("bounded-sizes", false), ("bounded-guarantee", false)];
const INTERP: &[(&str, bool)] = &[("agreement-guarantee", false), ("separative-agreement", false)];
const PROBE: &[(&str, bool)] = &[("nonseparative-agreement", true)];
const HAMKINS: &[(&str, bool)] = &[("cone-transfer", false), ("filter-regeneration", false)];
const ULTRAPOWER: &[(&str, bool)] = &[
    ("los", false),
    ("leibniz", false),
    ("trace-identity", false),
    ("elementarity", false),
    ("generic-ultrafilter", false),
    ("j-embedding", false),
];
const TRIVIALITY: &[(&str, bool)] = &[("fa-dense-all", false), ("bn1", false)];

/// Runs the listed suites over the space, in the order given.
pub fn run_suite(space: &InstanceSpace, suites: &[Suite]) -> Result<SuiteReport, Error> {
    space.validate()?;
    let mut report = SuiteReport::default();
    for &s in suites {
        let t = Instant::now();
        let sheet = match s {
            Suite::Sforcing => per_poset(space, s, sforcing_on)?,
            Suite::Semantics => semantics(space)?,
            Suite::Correspondence => correspondence(space)?,
            Suite::Bounded => bounded(space)?,
            Suite::InterpAgreement => per_poset(space, s, interp_on)?,
            Suite::SeparativityProbe => probe(space)?,
            Suite::Hamkins => per_poset(space, s, hamkins_on)?,
            Suite::Ultrapower => ultrapower(space)?,
            Suite::Triviality => per_poset(space, s, triviality_on)?,
        };
        report.results.extend(sheet.results(t.elapsed()));
    }
    Ok(report)
}

fn sheet(s: Suite) -> Sheet {
    Sheet::new(s.id(), s.properties())
}

/// Runs `f` on every poset in parallel and merges in enumeration order.
fn per_poset<F>(space: &InstanceSpace, s: Suite, f: F) -> Result<Sheet, Error>
where
    F: Fn(&InstanceSpace, usize, &Poset, &mut Sheet) -> Result<(), Error> + Sync,
{
    let posets = space.posets()?;
    let parts: Vec<Result<Sheet, Error>> = posets
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut sh = sheet(s);
            f(space, i, p, &mut sh)?;
            Ok(sh)
        })
        .collect();
    let mut out = sheet(s);
    for part in parts {
        out.absorb(part?);
    }
    Ok(out)
}

fn count(m: Mask) -> u64 {
    bits::count(m) as u64
}

fn lowest(m: Mask) -> usize {
    m.trailing_zeros() as usize
}

/// Conditions `q` with `embed(q) ≤ v`.
fn forced_by(f: &Forcing, v: Mask) -> Mask {
    (0..f.poset.len())
        .filter(|&q| bits::subset(f.embed(q), v))
        .fold(0, |m, q| m | bits::bit(q))
}

/// Conditions `q` with `embed(q) ∧ v = 0`.
fn refuting(f: &Forcing, v: Mask) -> Mask {
    (0..f.poset.len())
        .filter(|&q| f.embed(q) & v == 0)
        .fold(0, |m, q| m | bits::bit(q))
}

fn member_formula(t: &PName, s: &PName) -> Formula {
    Formula::In(Term::Name(t.clone()), Term::Name(s.clone()))
}

fn check_formula(s: &PName, a: &HFSet) -> Formula {
    Formula::Eq(Term::Name(s.clone()), Term::Lit(a.clone()))
}

fn dense_sets(p: &Poset) -> Vec<Mask> {
    (1..=p.all()).filter(|&d| p.is_dense(d)).collect()
}

/// Singletons and pairs of dense sets, then all of them at once.
fn dense_families(p: &Poset) -> Vec<Vec<Mask>> {
    let d = dense_sets(p);
    let mut out: Vec<Vec<Mask>> = d.iter().map(|&x| vec![x]).collect();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            out.push(vec![d[i], d[j]]);
        }
    }
    if d.len() > 2 && d.len() <= 64 {
        out.push(d);
    }
    out
}

/// Boolean algebras completing the posets of the space, one per atom count.
fn completions(space: &InstanceSpace) -> Result<Vec<(usize, Poset, BoolAlg)>, Error> {
    let mut out: Vec<(usize, Poset, BoolAlg)> = Vec::new();
    for p in space.posets()? {
        let alg = BoolAlg::complete(&p);
        let n = alg.atoms();
        if !out.iter().any(|(m, _, _)| *m == n) {
            out.push((n, p, alg));
        }
    }
    out.sort_by_key(|(n, _, _)| *n);
    Ok(out)
}

// ---- strong forcing ----

/// `σ` over the space's names, `τ` over every name of rank at most one.
fn sforcing_on(space: &InstanceSpace, i: usize, p: &Poset, sh: &mut Sheet) -> Result<(), Error> {
    let f = Forcing::new(p.clone());
    let sigmas = space.names_on(p, i, &space.names)?;
    let taus = enumerate_names(p, &space.at_rank(1))?;
    let filters = p.filters(false);
    let n = p.len() as u64;
    let mut gt = GroundTable::new();
    let tau_ids: Vec<Vec<u32>> = taus
        .iter()
        .map(|t| filters.iter().map(|g| gt.value(t, g.members)).collect())
        .collect();
    let mut ev = Evaluator::new(&f);
    for (k, s) in sigmas.iter().enumerate() {
        if k % EV_RESET == 0 {
            ev = Evaluator::new(&f);
        }
        let sg: Vec<u32> = filters.iter().map(|g| gt.value(s, g.members)).collect();
        let groups = s.groups();
        let kids: Vec<(Vec<u32>, Mask)> = groups
            .iter()
            .map(|(c, _)| {
                let ids = filters.iter().map(|g| gt.value(c, g.members)).collect();
                (ids, refuting(&f, ev.member(c, s)))
            })
            .collect();
        let bundle = |prop: &str, t: &PName, q: usize| {
            Bundle::new("sforcing", prop, p)
                .name("s", s.to_dsl(p))
                .name("t", t.to_dsl(p))
                .cond(p, q)
        };
        for (ti, t) in taus.iter().enumerate() {
            let forced = forced_by(&f, ev.member(t, s));
            let strong = s
                .entries()
                .iter()
                .filter(|e| &e.child == t)
                .fold(0, |m, e| m | p.below(e.cond));
            let bad = strong & !forced;
            sh.tallies[0].count(n, count(bad), || bundle(SFORCING[0].0, t, lowest(bad)).detail("strongly forced but not forced"));
            let mut witnesses = 0;
            for (c, conds) in &groups {
                let same = forced_by(&f, ev.eq(c, t));
                for &q in conds {
                    witnesses |= p.below(q) & same;
                }
            }
            let bad = bits::ones(forced)
                .filter(|&q| !p.is_dense_below(witnesses & p.below(q), q))
                .fold(0, |m, q| m | bits::bit(q));
            sh.tallies[1].count(n, count(bad), || {
                bundle(SFORCING[1].0, t, lowest(bad)).detail("forced membership without dense strong witnesses")
            });
            for (gi, g) in filters.iter().enumerate() {
                let tg = tau_ids[ti][gi];
                let member = gt.contains(sg[gi], tg);
                let inside = g.members;
                let bad = if member { 0 } else { inside & strong };
                sh.tallies[2].count(count(inside), count(bad), || {
                    bundle(SFORCING[2].0, t, lowest(bad)).filter(p, inside).detail("strongly forced but not a member")
                });
                let hyp = kids
                    .iter()
                    .filter(|(ids, _)| ids[gi] == tg)
                    .fold(p.all(), |h, (_, z)| h & z);
                let bad = if member { inside & hyp } else { 0 };
                sh.tallies[3].count(count(inside), count(bad), || {
                    bundle(SFORCING[3].0, t, lowest(bad)).filter(p, inside).detail("criterion met but a member")
                });
            }
        }
    }
    Ok(())
}

fn recheck_sforcing(b: &Bundle, f: &Forcing) -> Result<bool, Error> {
    let p = &f.poset;
    let s = bundle_name(b, p, "s")?;
    let t = bundle_name(b, p, "t")?;
    let q = bundle_cond(b, p)?;
    let empty = NameEnv::default();
    let forced = forces(f, q, &member_formula(&t, &s), &empty)?;
    let strong = strongly_forces(f, q, &t, &s);
    Ok(match b.property.as_str() {
        "strong-implies-forces" => !strong || forced,
        "forces-implies-dense-strong" => {
            if !forced {
                return Ok(true);
            }
            let mut d = 0;
            for r in (0..p.len()).filter(|&r| p.leq(r, q)) {
                for c in s.children() {
                    let eq = Formula::Eq(Term::Name(c.clone()), Term::Name(t.clone()));
                    if strongly_forces(f, r, c, &s) && forces(f, r, &eq, &empty)? {
                        d |= bits::bit(r);
                    }
                }
            }
            p.is_dense_below(d, q)
        }
        "strong-implies-member" => {
            let g = bundle_filter(b, p)?;
            let member = s.interpret(&g).contains(&t.interpret(&g));
            !(g.contains(q) && strong) || member
        }
        "nonmember-criterion" => {
            let g = bundle_filter(b, p)?;
            let tg = t.interpret(&g);
            let mut hyp = g.contains(q);
            for c in s.children() {
                let refuted = forces(f, q, &Formula::not(member_formula(c, &s)), &empty)?;
                hyp &= c.interpret(&g) != tg || refuted;
            }
            !hyp || !s.interpret(&g).contains(&tg)
        }
        other => return Err(unknown(b, other)),
    })
}

// ---- semantics ----

fn semantics(space: &InstanceSpace) -> Result<Sheet, Error> {
    let formulas = FormulaSpace::standard(space.depth).enumerate()?;
    let batch = FormulaBatch::new(&formulas, &["s"])?;
    per_poset(space, Suite::Semantics, |space, i, p, sh| semantics_on(space, &formulas, &batch, i, p, sh))
}

/// Boolean-value forcing against truth in every generic extension, for every
/// formula, name and condition. Ground truth is computed once per distinct
/// tuple of generic interpretations.
fn semantics_on(
    space: &InstanceSpace,
    formulas: &[Formula],
    batch: &FormulaBatch,
    i: usize,
    p: &Poset,
    sh: &mut Sheet,
) -> Result<(), Error> {
    let f = Forcing::new(p.clone());
    let names = space.names_on(p, i, &space.names)?;
    let generics = f.generic_filters();
    let n = p.len();
    let one = f.alg.one() as usize;
    let bool_forced: Vec<Mask> = (0..=one).map(|v| forced_by(&f, v as Mask)).collect();
    let supremum_ok: Vec<bool> = (0..=one)
        .map(|v| bits::ones(bool_forced[v]).fold(0, |m, q| m | f.embed(q)) == v as Mask)
        .collect();
    let through: Vec<Mask> = (0..n)
        .map(|q| (0..generics.len()).filter(|&gi| generics[gi].contains(q)).fold(0, |m, gi| m | bits::bit(gi)))
        .collect();
    let gen_forced: Vec<Mask> = (0..1usize << generics.len())
        .map(|t| (0..n).filter(|&q| bits::subset(through[q], t as Mask)).fold(0, |m, q| m | bits::bit(q)))
        .collect();
    let mut gt = GroundTable::new();
    let mut truths: HashMap<u32, Vec<bool>> = HashMap::new();
    let mut tables: HashMap<Vec<u32>, Vec<u8>> = HashMap::new();
    let mut run = batch.runner(&f);
    let mut ev = Evaluator::new(&f);
    for (k, s) in names.iter().enumerate() {
        if k % EV_RESET == 0 {
            ev = Evaluator::new(&f);
        }
        let key: Vec<u32> = generics.iter().map(|g| gt.value(s, g.members)).collect();
        if !tables.contains_key(&key) {
            let mut tv = vec![0u8; formulas.len()];
            for (gi, &id) in key.iter().enumerate() {
                let tr = truths.entry(id).or_insert_with(|| batch.truths(&[gt.to_hf(id)]));
                for (j, &b) in tr.iter().enumerate() {
                    if b {
                        tv[j] |= 1 << gi;
                    }
                }
            }
            tables.insert(key.clone(), tv);
        }
        let tv = &tables[&key];
        let values = run.values(&mut ev, std::slice::from_ref(s));
        let (mut bad, mut first) = (0u64, None);
        let (mut sup_bad, mut sup_first) = (0u64, None);
        for (j, &v) in values.iter().enumerate() {
            let d = bool_forced[v as usize] ^ gen_forced[tv[j] as usize];
            if d != 0 {
                bad += count(d);
                first.get_or_insert((j, lowest(d)));
            }
            if !supremum_ok[v as usize] {
                sup_bad += 1;
                sup_first.get_or_insert(j);
            }
        }
        let nf = values.len() as u64;
        sh.tallies[0].count(nf * n as u64, bad, || {
            let (j, q) = first.expect("a disagreement");
            Bundle::new("semantics", SEMANTICS[0].0, p)
                .name("s", s.to_dsl(p))
                .formula(&formulas[j])
                .cond(p, q)
                .detail("Boolean-value and generic deciders disagree")
        });
        sh.tallies[1].count(nf, sup_bad, || {
            Bundle::new("semantics", SEMANTICS[1].0, p)
                .name("s", s.to_dsl(p))
                .formula(&formulas[sup_first.expect("a failure")])
                .detail("Boolean value is not the supremum of the forcing conditions")
        });
    }
    Ok(())
}

fn recheck_semantics(b: &Bundle, f: &Forcing) -> Result<bool, Error> {
    let p = &f.poset;
    let env = name_env([("s", bundle_name(b, p, "s")?)]);
    let phi = bundle_formula(b)?;
    Ok(match b.property.as_str() {
        "boolean-vs-generics" => {
            let q = bundle_cond(b, p)?;
            forces(f, q, &phi, &env)? == forces_by_generics(f, q, &phi, &env)?
        }
        "value-is-supremum" => {
            let v = boolean_value(f, &phi, &env)?;
            bits::ones(forced_by(f, v)).fold(0, |m, q| m | f.embed(q)) == v
        }
        other => return Err(unknown(b, other)),
    })
}

// ---- correspondence ----

fn correspondence(space: &InstanceSpace) -> Result<Sheet, Error> {
    let formulas = FormulaSpace::standard(space.depth).enumerate()?;
    per_poset(space, Suite::Correspondence, |space, i, p, sh| correspondence_on(space, &formulas, i, p, sh))
}

fn family_dense(fam: &DenseFamily) -> bool {
    fam.sets.iter().all(|s| s.set.class.dense)
}

fn correspondence_on(space: &InstanceSpace, formulas: &[Formula], i: usize, p: &Poset, sh: &mut Sheet) -> Result<(), Error> {
    let f = Forcing::new(p.clone());
    let filters = p.filters(false);
    let empty = NameEnv::default();
    let mut gt = GroundTable::new();
    // σ = Ǎ for every value σ takes under some filter.
    for s in space.names_on(p, i, &space.names)? {
        let values: BTreeSet<u32> = filters.iter().map(|g| gt.value(&s, g.members)).collect();
        for id in values {
            let a = gt.to_hf(id);
            let r = family_check_equality(&f, &s, &a)
                .and_then(|fam| guarantee_counterexample(&f, &fam, &check_formula(&s, &a), &empty));
            sh.tallies[0].check(matches!(r, Ok(None)), || {
                Bundle::new("correspondence", CORRESPONDENCE[0].0, p)
                    .name("s", s.to_dsl(p))
                    .value(a.clone())
                    .detail(outcome_detail(&r, p))
            });
        }
    }
    for s in space.names_on(p, i, &space.at_rank(1))? {
        let env = name_env([("s", s.clone())]);
        for phi in formulas {
            let bundle = |prop: &str, d: String| {
                Bundle::new("correspondence", prop, p).name("s", s.to_dsl(p)).formula(phi).detail(d)
            };
            match family_for_formula(&f, phi, &env) {
                Ok(fam) => {
                    sh.tallies[2].check(family_dense(&fam), || bundle(CORRESPONDENCE[2].0, "a set is not dense".into()));
                    let r = guarantee_counterexample(&f, &fam, phi, &env);
                    sh.tallies[1].check(matches!(r, Ok(None)), || bundle(CORRESPONDENCE[1].0, outcome_detail(&r, p)));
                }
                Err(e) => {
                    sh.tallies[1].check(false, || bundle(CORRESPONDENCE[1].0, e.to_string()));
                    sh.tallies[2].check(false, || bundle(CORRESPONDENCE[2].0, e.to_string()));
                }
            }
        }
    }
    for fam in dense_families(p) {
        let [roundtrip, iff, transfer] = fa_n_instance(&f, &fam)?;
        let bundle = |prop: &str, d: &str| {
            Bundle::new("correspondence", prop, p).sets(p, &fam).detail(d.to_string())
        };
        sh.tallies[3].check(roundtrip, || bundle(CORRESPONDENCE[3].0, "recovered family differs"));
        sh.tallies[4].check(iff, || bundle(CORRESPONDENCE[4].0, "FA and N disagree"));
        sh.tallies[5].check(transfer, || bundle(CORRESPONDENCE[5].0, "a witness does not transfer"));
    }
    Ok(())
}

fn outcome_detail<E: fmt::Display>(r: &Result<Option<Filter>, E>, p: &Poset) -> String {
    match r {
        Ok(None) => "guarantee holds".into(),
        Ok(Some(g)) => format!("filter {} meets the family and fails", p.format_set(g.members)),
        Err(e) => e.to_string(),
    }
}

fn fa_values(k: usize) -> Vec<HFSet> {
    (0..k as u32).map(HFSet::atom).collect()
}

/// Encodes the family as a name with values `0, 1, …` and replays both
/// directions: `[roundtrip, fa-iff-n, witness-transfer]`.
fn fa_n_instance(f: &Forcing, fam: &[Mask]) -> Result<[bool; 3], Error> {
    let p = &f.poset;
    let values = fa_values(fam.len());
    let s = encode_family_as_name(f, fam, &values, Density::Dense)?;
    let recovered = recover_family(f, &s, &values);
    let roundtrip = recovered.iter().zip(fam).all(|(&r, &d)| r == p.down_closure(d));
    let fa = check_fa(p, fam, &Largeness::All, Density::Dense)?;
    let a = HFSet::set(values);
    let Ok(n) = check_n(f, &s, &a, NameFlags::default()) else {
        return Ok([roundtrip, false, false]);
    };
    let transfer = fa.witness.is_some_and(|g| s.interpret(&g) == a)
        && n.witness.is_some_and(|h| trace(&h, fam) == bits::full(fam.len()));
    Ok([roundtrip, fa.holds() == n.holds(), transfer])
}

fn recheck_correspondence(b: &Bundle, f: &Forcing) -> Result<bool, Error> {
    let p = &f.poset;
    Ok(match b.property.as_str() {
        "check-equality-guarantee" => {
            let s = bundle_name(b, p, "s")?;
            let a = b.value.clone().ok_or_else(|| missing(b, "value"))?;
            let fam = family_check_equality(f, &s, &a)?;
            guarantee_counterexample(f, &fam, &check_formula(&s, &a), &NameEnv::default())?.is_none()
        }
        "formula-guarantee" | "families-dense" => {
            let env = name_env([("s", bundle_name(b, p, "s")?)]);
            let phi = bundle_formula(b)?;
            let fam = family_for_formula(f, &phi, &env)?;
            if b.property == "families-dense" {
                family_dense(&fam)
            } else {
                guarantee_counterexample(f, &fam, &phi, &env)?.is_none()
            }
        }
        "encode-roundtrip" | "fa-iff-n" | "witness-transfer" => {
            let fam = bundle_sets(b, p)?;
            let r = fa_n_instance(f, &fam)?;
            r[["encode-roundtrip", "fa-iff-n", "witness-transfer"].iter().position(|x| *x == b.property).expect("listed")]
        }
        other => return Err(unknown(b, other)),
    })
}

// ---- bounded ----

/// Depth of the formulas paired with rank-two names in the bounded suite.
const BOUNDED_RANK2_DEPTH: usize = 1;

fn bounded(space: &InstanceSpace) -> Result<Sheet, Error> {
    let deep = FormulaSpace::standard(space.depth).enumerate()?;
    let shallow = FormulaSpace::standard(space.depth.min(BOUNDED_RANK2_DEPTH)).enumerate()?;
    let algebras = completions(space)?;
    let parts: Vec<Result<Sheet, Error>> = algebras
        .par_iter()
        .map(|(n, src, alg)| {
            let mut sh = sheet(Suite::Bounded);
            let b = Forcing::boolean(alg, &format!("B{n}"))?;
            for m in [1, 2] {
                let mut plan = vec![(space.at_rank(1).bounded(m), &deep)];
                if *n <= 2 && space.names.rank >= 2 {
                    plan.push((space.at_rank(2).bounded(m), &shallow));
                }
                for (spec, formulas) in plan {
                    for s in space.names_on(&b.poset, *n, &spec)? {
                        let env = name_env([("s", s.clone())]);
                        for phi in formulas {
                            let [sizes, guarantee] = bounded_instance(&b, phi, &env, m);
                            let bundle = |prop: &str| {
                                let mut x = Bundle::new("bounded", prop, src)
                                    .name("s", s.to_dsl(&b.poset))
                                    .formula(phi)
                                    .detail(format!("{m}-bounded family on the completion"));
                                x.m = Some(m);
                                x.universe = Some("boolean".into());
                                x
                            };
                            sh.tallies[0].check(sizes, || bundle(BOUNDED[0].0));
                            sh.tallies[1].check(guarantee, || bundle(BOUNDED[1].0));
                        }
                    }
                }
            }
            Ok(sh)
        })
        .collect();
    let mut out = sheet(Suite::Bounded);
    for part in parts {
        out.absorb(part?);
    }
    out.notes.push(format!(
        "completions with {} atoms",
        algebras.iter().map(|(n, _, _)| n.to_string()).collect::<Vec<_>>().join(", ")
    ));
    Ok(out)
}

/// `[predense with size bounds, guarantee]`; an error fails both.
fn bounded_instance(b: &Forcing, phi: &Formula, env: &NameEnv, m: usize) -> [bool; 2] {
    match family_for_formula_bounded(b, phi, env, m) {
        Ok(fam) => {
            let sizes = fam
                .sets
                .iter()
                .all(|x| x.set.class.predense && x.bound.is_some_and(|bd| x.set.len() <= bd));
            let guarantee = matches!(guarantee_counterexample(b, &fam, phi, env), Ok(None));
            [sizes, guarantee]
        }
        Err(_) => [false, false],
    }
}

fn recheck_bounded(b: &Bundle, f: &Forcing) -> Result<bool, Error> {
    let env = name_env([("s", bundle_name(b, &f.poset, "s")?)]);
    let m = b.m.ok_or_else(|| missing(b, "m"))?;
    let r = bounded_instance(f, &bundle_formula(b)?, &env, m);
    Ok(match b.property.as_str() {
        "bounded-sizes" => r[0],
        "bounded-guarantee" => r[1],
        other => return Err(unknown(b, other)),
    })
}

// ---- interpretation agreement and the separativity probe ----

fn flat_names(space: &InstanceSpace, i: usize, p: &Poset) -> Result<Vec<PName>, Error> {
    Ok(space.names_on(p, i, &space.at_rank(1))?.into_iter().filter(PName::is_flat).collect())
}

fn agrees(f: &Forcing, s: &PName, g: &Filter) -> Result<bool, Error> {
    Ok(s.interpret(g) == quasi_interpret(f, s, g)?)
}

fn interp_on(space: &InstanceSpace, i: usize, p: &Poset, sh: &mut Sheet) -> Result<(), Error> {
    let f = Forcing::new(p.clone());
    let filters = p.filters(false);
    let separative = p.is_separative();
    for s in flat_names(space, i, p)? {
        let bundle = |prop: &str, g: &Filter| {
            Bundle::new("interp-agreement", prop, p).name("s", s.to_dsl(p)).filter(p, g.members)
        };
        let fam = family_interp_agreement(&f, &s)?;
        for g in &filters {
            if fam.met_by(g) {
                sh.tallies[0].check(agrees(&f, &s, g)?, || bundle(INTERP[0].0, g).detail("meets the family, semantics differ"));
            }
            if separative && s.is_lambda_bounded(1) {
                sh.tallies[1].check(agrees(&f, &s, g)?, || bundle(INTERP[1].0, g).detail("separative, semantics differ"));
            }
        }
    }
    Ok(())
}

/// The documented divergence: on NSEP4, `{(chk 0, b)}` under the filter `{1}`.
pub fn nsep4_pair() -> Result<(PName, Filter, HFSet, HFSet), Error> {
    let p = crate::fixtures::nsep4();
    let f = Forcing::new(p.clone());
    let s = name_on(&p, "{(chk 0, b)}")?;
    let g = Filter::principal(&p, p.top());
    let quasi = quasi_interpret(&f, &s, &g)?;
    Ok((s.clone(), g, s.interpret(&g), quasi))
}

fn probe(space: &InstanceSpace) -> Result<Sheet, Error> {
    let mut out = per_poset(space, Suite::SeparativityProbe, |space, i, p, sh| {
        if p.is_separative() {
            return Ok(());
        }
        let f = Forcing::new(p.clone());
        let mut local = Tally::default();
        let mut first = None;
        for s in flat_names(space, i, p)?.into_iter().filter(|s| s.is_lambda_bounded(1)) {
            for g in p.filters(false) {
                let ok = agrees(&f, &s, &g)?;
                if !ok && first.is_none() {
                    first = Some(format!(
                        "{} = {} at {}: interpret {}, quasi {}",
                        "s",
                        s.to_dsl(p),
                        p.format_set(g.members),
                        s.interpret(&g),
                        quasi_interpret(&f, &s, &g)?
                    ));
                }
                local.check(ok, || {
                    Bundle::new("separativity-probe", PROBE[0].0, p)
                        .name("s", s.to_dsl(p))
                        .filter(p, g.members)
                        .detail("interpretation and quasi-interpretation differ")
                });
            }
        }
        if let Some(line) = first {
            local.finding(format!("{}: {} of {} pairs diverge; first {line}", p.name(), local.failures, local.instances));
        }
        sh.tallies[0].absorb(local);
        Ok(())
    })?;
    let (s, g, x, q) = nsep4_pair()?;
    let p = crate::fixtures::nsep4();
    out.notes.push(format!(
        "NSEP4 pair {} at {}: interpret {x}, quasi {q}{}",
        s.to_dsl(&p),
        p.format_set(g.members),
        if x != q { " (diverges)" } else { "" }
    ));
    Ok(out)
}

fn recheck_interp(b: &Bundle, f: &Forcing) -> Result<bool, Error> {
    let p = &f.poset;
    let s = bundle_name(b, p, "s")?;
    let g = bundle_filter(b, p)?;
    Ok(match b.property.as_str() {
        "agreement-guarantee" => !family_interp_agreement(f, &s)?.met_by(&g) || agrees(f, &s, &g)?,
        "separative-agreement" | "nonseparative-agreement" => agrees(f, &s, &g)?,
        other => return Err(unknown(b, other)),
    })
}

// ---- Hamkins splitting ----

fn predicates(base: u32) -> Vec<Largeness> {
    let zero: BTreeSet<u32> = [0].into_iter().collect();
    let mut out = vec![Largeness::All, Largeness::AtLeast(1), Largeness::Nonempty];
    if base > 0 {
        out.push(Largeness::Contains(zero.clone()));
        out.push(Largeness::Meets(zero));
    }
    out
}

/// `[cone-transfer, filter-regeneration]`, or `None` when the instance is
/// outside the argument's hypotheses.
fn hamkins_instance(f: &Forcing, s: &PName, pred: &Largeness, k: usize) -> Result<Option<[bool; 2]>, Error> {
    let p = &f.poset;
    let m = s.max_bound().max(1);
    if !pred.is_partition_regular(k, m)? {
        return Ok(None);
    }
    match hamkins_pipeline(f, s, pred, k) {
        Ok(r) => {
            let transfer = r.deciders_dense
                && r.cones.iter().all(|c| c.transfers)
                && r.report.holds()
                && r.report.holds() == r.direct.holds();
            let regen = r
                .cones
                .iter()
                .all(|c| c.regenerates && p.generated_filter(c.cone_witness).ok() == Some(c.regenerated));
            Ok(Some([transfer, regen]))
        }
        Err(e) if e.is_hypothesis() => Ok(None),
        Err(_) => Ok(Some([false, false])),
    }
}

fn hamkins_on(space: &InstanceSpace, i: usize, p: &Poset, sh: &mut Sheet) -> Result<(), Error> {
    if !p.is_well_met() {
        return Ok(());
    }
    let f = Forcing::new(p.clone());
    let k = space.names.base as usize;
    for s in flat_names(space, i, p)? {
        for pred in predicates(space.names.base) {
            let Some([transfer, regen]) = hamkins_instance(&f, &s, &pred, k)? else {
                continue;
            };
            let bundle = |prop: &str| {
                let mut b = Bundle::new("hamkins", prop, p).name("s", s.to_dsl(p)).detail(format!("largeness {pred}"));
                b.largeness = Some(pred.clone());
                b.k = Some(k);
                b
            };
            sh.tallies[0].check(transfer, || bundle(HAMKINS[0].0));
            sh.tallies[1].check(regen, || bundle(HAMKINS[1].0));
        }
    }
    Ok(())
}

fn recheck_hamkins(b: &Bundle, f: &Forcing) -> Result<bool, Error> {
    let s = bundle_name(b, &f.poset, "s")?;
    let pred = b.largeness.clone().ok_or_else(|| missing(b, "largeness"))?;
    let k = b.k.ok_or_else(|| missing(b, "k"))?;
    let Some(r) = hamkins_instance(f, &s, &pred, k)? else {
        return Ok(true);
    };
    Ok(match b.property.as_str() {
        "cone-transfer" => r[0],
        "filter-regeneration" => r[1],
        other => return Err(unknown(b, other)),
    })
}

// ---- Boolean ultrapowers ----

/// Universe caps per atom count: the space's caps up to three atoms, rank
/// one beyond. Three atoms are swept one name per Boolean-equality group.
fn universe_plan(space: &InstanceSpace, atoms: usize) -> (NameSpec, bool) {
    match atoms {
        0..=2 => (space.names.clone(), false),
        3 => (space.names.clone(), true),
        _ => (space.at_rank(1), false),
    }
}

fn universe_label(spec: &NameSpec, grouped: bool) -> String {
    format!("{},{},{}{}", spec.rank, spec.base, spec.entries, if grouped { ",grouped" } else { "" })
}

fn ultrapower(space: &InstanceSpace) -> Result<Sheet, Error> {
    let formulas = FormulaSpace::standard(space.depth).enumerate()?;
    let mut sh = sheet(Suite::Ultrapower);
    for (n, src, alg) in completions(space)? {
        let (spec, grouped) = universe_plan(space, n);
        let label = universe_label(&spec, grouped);
        let forcing = Forcing::boolean(&alg, &format!("B{n}"))?;
        let universe = Universe::new(forcing, spec)?;
        let models = universe.quotients()?;
        let fp = &universe.forcing.poset;
        let base = |prop: &str| {
            let mut b = Bundle::new("ultrapower", prop, &src);
            b.universe = Some(label.clone());
            b
        };
        let groups = grouped.then(|| universe.boolean_classes());
        let swept: Vec<usize> = match &groups {
            Some(g) => g.reps.clone(),
            None => (0..universe.len()).collect(),
        };
        let los = los_sweep(&universe, &swept, &models, &formulas, "s")?;
        sh.tallies[0].count(los.checks as u64, los.failures.len() as u64, || {
            let x = &los.failures[0];
            let mut b = base(ULTRAPOWER[0].0).name("s", x.name.to_dsl(fp)).formula(&x.formula).detail("Łoś fails");
            b.atom = Some(alg.labels()[x.atom].clone());
            b
        });
        if let Some(g) = &groups {
            let pairs = g.second.iter().filter(|x| x.is_some()).count() as u64;
            let bad = check_leibniz(&universe, g, &models, &formulas, "s")?;
            sh.tallies[1].count(pairs * (formulas.len() as u64 + 1), bad.len() as u64, || {
                let (gi, phi) = &bad[0];
                let second = g.second[*gi].expect("a pair");
                base(ULTRAPOWER[1].0)
                    .name("s", universe.names[g.reps[*gi]].to_dsl(fp))
                    .name("t", universe.names[second].to_dsl(fp))
                    .formula(phi)
                    .detail("Boolean-equal names separated")
            });
            sh.notes.push(format!(
                "{n} atoms: {} names in {} Boolean-equality groups, Łoś on one name per group",
                universe.len(),
                g.len()
            ));
        } else {
            sh.notes.push(format!("{n} atoms: {} names, universe caps {label}", universe.len()));
        }
        let flat: Vec<&PName> = universe.names.iter().filter(|s| s.is_flat()).collect();
        let x = HFSet::set((0..universe.spec.base).map(HFSet::atom));
        for m in &models {
            let atom = alg.labels()[m.atom].clone();
            let with_atom = |prop: &str| {
                let mut b = base(prop);
                b.atom = Some(atom.clone());
                b
            };
            for s in &flat {
                let ok = m.check_trace_identity(s)?.holds();
                sh.tallies[2].check(ok, || with_atom(ULTRAPOWER[2].0).name("s", s.to_dsl(fp)).detail("trace identity fails"));
                let e = m.check_elementarity(&x, s, space.depth)?;
                sh.tallies[3].count(e.checked as u64, e.mismatches.len() as u64, || {
                    with_atom(ULTRAPOWER[3].0)
                        .name("s", s.to_dsl(fp))
                        .value(x.clone())
                        .formula(&e.mismatches[0])
                        .detail("j is not elementary")
                });
            }
            let generic = alg.is_generic(&m.ultra)? && m.missed_antichains()?.is_empty();
            sh.tallies[4].check(generic, || with_atom(ULTRAPOWER[4].0).detail("ultrafilter misses a maximal antichain"));
            sh.tallies[5].check(m.j_is_embedding(), || with_atom(ULTRAPOWER[5].0).detail("j is not an ∈-embedding"));
        }
    }
    Ok(sh)
}

fn parse_universe(b: &Bundle) -> Result<(NameSpec, bool), Error> {
    let text = b.universe.as_deref().ok_or_else(|| missing(b, "universe"))?;
    let parts: Vec<&str> = text.split(',').collect();
    let num = |i: usize| -> Result<usize, Error> {
        parts
            .get(i)
            .and_then(|x| x.trim().parse().ok())
            .ok_or_else(|| HarnessError::Bundle(format!("bad universe `{text}`")).into())
    };
    let spec = NameSpec::new(num(0)? as u32, num(1)? as u32, num(2)?);
    Ok((spec, parts.get(3).is_some_and(|x| x.trim() == "grouped")))
}

fn recheck_ultrapower(b: &Bundle, src: &Poset) -> Result<bool, Error> {
    let (spec, _) = parse_universe(b)?;
    let alg = BoolAlg::complete(src);
    let forcing = Forcing::boolean(&alg, &format!("B{}", alg.atoms()))?;
    let universe = Universe::new(forcing, spec)?;
    let fp = &universe.forcing.poset;
    let atom = b.atom.as_deref().ok_or_else(|| missing(b, "atom"))?;
    let m = QuotientModel::build(&universe, ultrafilter_at(&alg, atom)?)?;
    Ok(match b.property.as_str() {
        "los" => {
            let env = name_env([("s", bundle_name(b, fp, "s")?)]);
            m.check_los(&bundle_formula(b)?, &env)?
        }
        "leibniz" => {
            let s = bundle_name(b, fp, "s")?;
            let t = bundle_name(b, fp, "t")?;
            let phi = bundle_formula(b)?.with_check_literals(fp.top());
            let vs = boolean_value(&universe.forcing, &phi, &name_env([("s", s.clone())]))?;
            let vt = boolean_value(&universe.forcing, &phi, &name_env([("s", t.clone())]))?;
            vs == vt && m.class_of_name(&s)? == m.class_of_name(&t)?
        }
        "trace-identity" => m.check_trace_identity(&bundle_name(b, fp, "s")?)?.holds(),
        "elementarity" => {
            let x = b.value.clone().ok_or_else(|| missing(b, "value"))?;
            m.check_elementarity(&x, &bundle_name(b, fp, "s")?, 3)?.holds()
        }
        "generic-ultrafilter" => alg.is_generic(&m.ultra)? && m.missed_antichains()?.is_empty(),
        "j-embedding" => m.j_is_embedding(),
        other => return Err(unknown(b, other)),
    })
}

// ---- triviality ----

/// Values `A` over the base with `1 ⊩ σ = Ǎ` possible.
fn subsets_of_base(base: u32) -> Vec<HFSet> {
    (0..1u32 << base)
        .map(|m| HFSet::set((0..base).filter(|i| m >> i & 1 == 1).map(HFSet::atom)))
        .collect()
}

fn triviality_on(space: &InstanceSpace, i: usize, p: &Poset, sh: &mut Sheet) -> Result<(), Error> {
    let f = Forcing::new(p.clone());
    for fam in dense_families(p) {
        let ok = check_fa(p, &fam, &Largeness::All, Density::Dense)?.holds();
        sh.tallies[0].check(ok, || Bundle::new("triviality", TRIVIALITY[0].0, p).sets(p, &fam).detail("no filter meets every set"));
    }
    let flags = NameFlags { rank: Some(1), small: None, bounded: Some(1) };
    for s in flat_names(space, i, p)?.into_iter().filter(|s| s.is_lambda_bounded(1)) {
        for a in subsets_of_base(space.names.base) {
            match check_n(&f, &s, &a, flags) {
                Ok(r) => sh.tallies[1].check(r.holds(), || {
                    Bundle::new("triviality", TRIVIALITY[1].0, p)
                        .name("s", s.to_dsl(p))
                        .value(a.clone())
                        .detail("no filter interprets the name as forced")
                }),
                Err(e) if e.is_hypothesis() => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

fn recheck_triviality(b: &Bundle, f: &Forcing) -> Result<bool, Error> {
    let p = &f.poset;
    Ok(match b.property.as_str() {
        "fa-dense-all" => check_fa(p, &bundle_sets(b, p)?, &Largeness::All, Density::Dense)?.holds(),
        "bn1" => {
            let s = bundle_name(b, p, "s")?;
            let a = b.value.clone().ok_or_else(|| missing(b, "value"))?;
            let flags = NameFlags { rank: Some(1), small: None, bounded: Some(1) };
            match check_n(f, &s, &a, flags) {
                Ok(r) => r.holds(),
                Err(e) if e.is_hypothesis() => true,
                Err(e) => return Err(e.into()),
            }
        }
        other => return Err(unknown(b, other)),
    })
}

// ---- replay ----

fn missing(b: &Bundle, field: &str) -> Error {
    HarnessError::Bundle(format!("{}/{} needs `{field}`", b.suite, b.property)).into()
}

fn unknown(b: &Bundle, prop: &str) -> Error {
    HarnessError::Bundle(format!("unknown property `{prop}` in suite `{}`", b.suite)).into()
}

fn bundle_name(b: &Bundle, p: &Poset, id: &str) -> Result<PName, Error> {
    let text = b.names.get(id).ok_or_else(|| missing(b, &format!("names.{id}")))?;
    Ok(name_on(p, text)?)
}

fn bundle_cond(b: &Bundle, p: &Poset) -> Result<usize, Error> {
    Ok(p.index_of(b.cond.as_deref().ok_or_else(|| missing(b, "cond"))?)?)
}

fn bundle_filter(b: &Bundle, p: &Poset) -> Result<Filter, Error> {
    let ids = b.filter.as_ref().ok_or_else(|| missing(b, "filter"))?;
    let m = p.mask_of(ids)?;
    if !p.is_filter(m) {
        return Err(HarnessError::Bundle(format!("{} is not a filter", p.format_set(m))).into());
    }
    Ok(Filter { members: m })
}

fn bundle_formula(b: &Bundle) -> Result<Formula, Error> {
    Ok(Formula::parse(b.formula.as_deref().ok_or_else(|| missing(b, "formula"))?)?)
}

fn bundle_sets(b: &Bundle, p: &Poset) -> Result<Vec<Mask>, Error> {
    let sets = b.sets.as_ref().ok_or_else(|| missing(b, "sets"))?;
    Ok(sets.iter().map(|ids| p.mask_of(ids)).collect::<Result<_, _>>()?)
}

/// Re-checks the bundled instance and returns its verdict.
pub fn replay(b: &Bundle) -> Result<Outcome, Error> {
    let p = parse_poset(&b.poset)?;
    let suite: Suite = b.suite.parse()?;
    let forcing = || -> Result<Forcing, Error> {
        Ok(match b.universe.as_deref() {
            Some("boolean") => Forcing::boolean(&BoolAlg::complete(&p), &format!("B{}", BoolAlg::complete(&p).atoms()))?,
            _ => Forcing::new(p.clone()),
        })
    };
    let ok = match suite {
        Suite::Sforcing => recheck_sforcing(b, &forcing()?)?,
        Suite::Semantics => recheck_semantics(b, &forcing()?)?,
        Suite::Correspondence => recheck_correspondence(b, &forcing()?)?,
        Suite::Bounded => recheck_bounded(b, &forcing()?)?,
        Suite::InterpAgreement | Suite::SeparativityProbe => recheck_interp(b, &forcing()?)?,
        Suite::Hamkins => recheck_hamkins(b, &forcing()?)?,
        Suite::Ultrapower => recheck_ultrapower(b, &p)?,
        Suite::Triviality => recheck_triviality(b, &forcing()?)?,
    };
    Ok(Outcome::of(ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> InstanceSpace {
        InstanceSpace { max_poset: 3, names: NameSpec::new(1, 2, 2), depth: 2, ..InstanceSpace::default() }
    }

    #[test]
    fn suite_ids_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.id().parse::<Suite>().unwrap(), s);
            assert!(!s.properties().is_empty());
        }
        assert!(matches!("nope".parse::<Suite>(), Err(HarnessError::UnknownSuite(_))));
    }

    #[test]
    fn empty_suite_list() {
        let r = run_suite(&small(), &[]).unwrap();
        assert!(r.is_empty() && r.passed());
    }

    #[test]
    fn small_space_passes() {
        let r = run_suite(&small(), &Suite::ALL).unwrap();
        assert!(r.passed(), "{r}");
        // Leibniz runs only on three-atom completions.
        for x in r.results.iter().filter(|x| !x.probe && x.property != "leibniz") {
            assert!(x.instances > 0, "{} {} is vacuous", x.suite, x.property);
            assert_eq!(x.failures, 0);
        }
        let probe = r.property("separativity-probe", "nonseparative-agreement").unwrap();
        assert!(probe.failures > 0);
        assert!(probe.findings.iter().any(|f| f.starts_with("NSEP4:")));
        assert!(probe.notes.iter().any(|n| n.contains("{(chk 0, b)}") && n.contains("diverges")));
        assert_eq!(r.machine_lines().len(), r.results.len());
    }

    #[test]
    fn probe_counterexample_replays() {
        let r = run_suite(&small(), &[Suite::SeparativityProbe]).unwrap();
        let b = r.results[0].counterexample.clone().unwrap();
        let back = Bundle::parse(&b.to_toml()).unwrap();
        assert_eq!(back, b);
        assert_eq!(replay(&back).unwrap(), b.verdict);
    }

    #[test]
    fn nsep4_divergence() {
        let (_, g, x, q) = nsep4_pair().unwrap();
        assert_eq!(g.members, 1);
        assert_eq!(x, HFSet::empty());
        assert_eq!(q, HFSet::set([HFSet::atom(0)]));
    }

    #[test]
    fn sampled_runs_are_seeded() {
        let space = InstanceSpace { sample: Some(20), seed: 3, ..small() };
        let a = run_suite(&space, &[Suite::Sforcing]).unwrap().machine_lines();
        let b = run_suite(&space, &[Suite::Sforcing]).unwrap().machine_lines();
        assert_eq!(a, b);
    }
}
