//! Dense-set families that force filters to interpret names correctly.
//!
//! Each set is first described symbolically by a [`SetSpec`]: a disjunction
//! of clauses, each either "p forces ψ" or "p strongly forces a child into a
//! container, and forces ψ". The unbounded variant realizes a spec as the
//! full set of conditions satisfying it. The bounded variant, over the
//! nonzero part of a Boolean algebra, replaces a forcing clause by the value
//! of ψ and a strong-forcing clause by the entry conditions met with that
//! value, which yields a small predense subset of the same set.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::bits::{self, Mask};
use crate::boolcomp::Forcing;
use crate::hf::HFSet;
use crate::names::PName;
use crate::order::{CondSet, Density, Filter};
use crate::semantics::{eval_ground, Evaluator, Formula, FormulaError, NameEnv, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("set `{0}` is not dense")]
    NotDense(String),
    #[error("set `{0}` is not predense")]
    NotPredense(String),
    #[error("set `{tag}` has {size} conditions, above its bound {bound}")]
    SizeBound { tag: String, size: usize, bound: usize },
    #[error("a name is not {0}-bounded")]
    NotBounded(usize),
    #[error("the bounded construction needs the nonzero part of a Boolean algebra as its forcing")]
    NotBoolean,
    #[error("expected a name of rank at most 1 whose children are check leaves")]
    NotRankOne,
    #[error("values must be pairwise distinct; `{0}` repeats")]
    RepeatedValue(String),
    #[error("{sets} sets but {values} values")]
    LengthMismatch { sets: usize, values: usize },
}

/// One disjunct of a set description.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Clause {
    /// `p ⊩ ψ` for a closed formula.
    Forces(Formula),
    /// `p ⊩⁺ child ∈ container`, and `p ⊩ also` when given.
    Strong { container: PName, child: PName, also: Option<Formula> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSpec {
    pub tag: String,
    pub clauses: Vec<Clause>,
}

impl SetSpec {
    /// Most conditions the bounded realization can produce under `m`-bounded names.
    pub fn bound(&self, m: usize) -> usize {
        self.clauses
            .iter()
            .map(|c| match c {
                Clause::Forces(_) => 1,
                Clause::Strong { .. } => m,
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySet {
    pub tag: String,
    pub set: CondSet,
    /// Declared size bound (bounded variant only).
    pub bound: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DenseFamily {
    pub sets: Vec<FamilySet>,
}

impl DenseFamily {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn masks(&self) -> Vec<Mask> {
        self.sets.iter().map(|s| s.set.members).collect()
    }

    pub fn met_by(&self, g: &Filter) -> bool {
        self.sets.iter().all(|s| g.meets(s.set.members))
    }

    pub fn render(&self, f: &Forcing) -> String {
        let mut out = String::new();
        for s in &self.sets {
            out.push_str(&format!(
                "{} {} {}",
                s.set.flavor(),
                f.poset.format_set(s.set.members),
                s.tag
            ));
            if let Some(b) = s.bound {
                out.push_str(&format!(" (size {} <= {b})", s.set.len()));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Forces(p) => write!(f, "forces {p}"),
            Clause::Strong { also: Some(p), .. } => write!(f, "strong and forces {p}"),
            Clause::Strong { also: None, .. } => write!(f, "strong"),
        }
    }
}

fn n(s: &PName) -> Term {
    Term::Name(s.clone())
}

fn eq(a: &PName, b: &PName) -> Formula {
    Formula::Eq(n(a), n(b))
}

fn neq(a: &PName, b: &PName) -> Formula {
    Formula::not(eq(a, b))
}

fn mem(a: &PName, b: &PName) -> Formula {
    Formula::In(n(a), n(b))
}

fn nmem(a: &PName, b: &PName) -> Formula {
    Formula::not(mem(a, b))
}

fn strong(container: &PName, child: &PName, also: Option<Formula>) -> Clause {
    Clause::Strong { container: container.clone(), child: child.clone(), also }
}

/// Walks a closed negation-normal formula and collects set descriptions.
struct Builder {
    top: usize,
    specs: Vec<SetSpec>,
    seen: HashSet<Formula>,
}

impl Builder {
    fn new(top: usize) -> Self {
        Builder { top, specs: Vec::new(), seen: HashSet::new() }
    }

    fn push(&mut self, tag: String, clauses: Vec<Clause>) {
        self.specs.push(SetSpec { tag, clauses });
    }

    fn name(&self, t: &Term) -> Result<PName, FormulaError> {
        match t {
            Term::Name(s) => Ok(s.clone()),
            Term::Lit(x) => Ok(PName::check(x, self.top)),
            Term::Var(v) => Err(FormulaError::UnboundVariable(v.to_string())),
        }
    }

    fn check_of(&self, s: &PName) -> Option<HFSet> {
        s.as_check(self.top)
    }

    fn formula(&mut self, f: &Formula, path: &str) -> Result<(), FormulaError> {
        if !self.seen.insert(f.clone()) {
            return Ok(());
        }
        match f {
            Formula::Eq(a, b) => self.equal(&self.name(a)?, &self.name(b)?, path),
            Formula::In(a, b) => self.member(&self.name(a)?, &self.name(b)?, path),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Eq(a, b) => self.unequal(&self.name(a)?, &self.name(b)?, path),
                Formula::In(a, b) => self.non_member(&self.name(a)?, &self.name(b)?, path),
                _ => self.formula(&inner.nnf_negated(), path),
            },
            Formula::And(a, b) => {
                self.formula(a, &format!("{path}/and.l"))?;
                self.formula(b, &format!("{path}/and.r"))
            }
            Formula::Or(a, b) => {
                self.push(
                    format!("{path}/or D"),
                    vec![
                        Clause::Forces(Formula::not(f.clone())),
                        Clause::Forces(a.as_ref().clone()),
                        Clause::Forces(b.as_ref().clone()),
                    ],
                );
                self.formula(a, &format!("{path}/or.l"))?;
                self.formula(b, &format!("{path}/or.r"))
            }
            Formula::Forall(v, t, body) => {
                let dom = self.name(t)?;
                for (i, c) in dom.children().into_iter().enumerate() {
                    let inst = instantiate(body, v, c);
                    self.formula(&inst, &format!("{path}/forall[{i}]"))?;
                }
                Ok(())
            }
            Formula::Exists(v, t, body) => {
                let dom = self.name(t)?;
                let mut clauses = vec![Clause::Forces(Formula::not(f.clone()))];
                let kids: Vec<PName> = dom.children().into_iter().cloned().collect();
                for c in &kids {
                    clauses.push(strong(&dom, c, Some(instantiate(body, v, c))));
                }
                self.push(format!("{path}/exists D"), clauses);
                for (i, c) in kids.iter().enumerate() {
                    self.formula(&instantiate(body, v, c), &format!("{path}/exists[{i}]"))?;
                }
                Ok(())
            }
        }
    }

    /// `σ = τ`.
    fn equal(&mut self, s: &PName, t: &PName, path: &str) -> Result<(), FormulaError> {
        if s == t {
            return Ok(());
        }
        if let Some(a) = self.check_of(t) {
            return self.equal_check(s, &a, path);
        }
        if let Some(a) = self.check_of(s) {
            return self.equal_check(t, &a, path);
        }
        let (sk, tk): (Vec<PName>, Vec<PName>) = (
            s.children().into_iter().cloned().collect(),
            t.children().into_iter().cloned().collect(),
        );
        for (g, sg) in sk.iter().enumerate() {
            let mut cl = vec![Clause::Forces(neq(s, t)), Clause::Forces(nmem(sg, s))];
            cl.extend(tk.iter().map(|td| strong(t, td, Some(eq(sg, td)))));
            self.push(format!("{path}/s=t D_gamma[{g}]"), cl);
        }
        for (d, td) in tk.iter().enumerate() {
            let mut cl = vec![Clause::Forces(neq(s, t)), Clause::Forces(nmem(td, t))];
            cl.extend(sk.iter().map(|sg| strong(s, sg, Some(eq(sg, td)))));
            self.push(format!("{path}/s=t E_delta[{d}]"), cl);
        }
        for (g, sg) in sk.iter().enumerate() {
            for (d, td) in tk.iter().enumerate() {
                self.formula(&eq(sg, td), &format!("{path}/s=t[{g},{d}]"))?;
            }
        }
        Ok(())
    }

    /// `σ = Ǎ`.
    fn equal_check(&mut self, s: &PName, a: &HFSet, path: &str) -> Result<(), FormulaError> {
        // Check names are interpreted as themselves; an urelement never equals a set name.
        let Some(members) = a.members() else { return Ok(()) };
        if self.check_of(s).is_some() {
            return Ok(());
        }
        let top = self.top;
        let an = PName::check(a, top);
        let kids: Vec<PName> = s.children().into_iter().cloned().collect();
        for b in members {
            let bn = PName::check(b, top);
            let mut cl = vec![Clause::Forces(neq(s, &an))];
            cl.extend(kids.iter().map(|sg| strong(s, sg, Some(eq(sg, &bn)))));
            self.push(format!("{path}/s=A D_B[{b}]"), cl);
        }
        for (g, sg) in kids.iter().enumerate() {
            let mut cl = vec![Clause::Forces(neq(s, &an)), Clause::Forces(nmem(sg, s))];
            cl.extend(members.iter().map(|b| Clause::Forces(eq(sg, &PName::check(b, top)))));
            self.push(format!("{path}/s=A E_gamma[{g}]"), cl);
        }
        for (g, sg) in kids.iter().enumerate() {
            for b in members {
                self.formula(&eq(sg, &PName::check(b, top)), &format!("{path}/s=A[{g},{b}]"))?;
            }
        }
        Ok(())
    }

    /// `τ ∈ σ`.
    fn member(&mut self, t: &PName, s: &PName, path: &str) -> Result<(), FormulaError> {
        let kids: Vec<PName> = s.children().into_iter().cloned().collect();
        let mut cl = vec![Clause::Forces(nmem(t, s))];
        cl.extend(kids.iter().map(|sg| strong(s, sg, Some(eq(t, sg)))));
        self.push(format!("{path}/t in s D"), cl);
        for (g, sg) in kids.iter().enumerate() {
            self.formula(&eq(t, sg), &format!("{path}/t in s[{g}]"))?;
        }
        Ok(())
    }

    /// `σ ≠ τ`.
    fn unequal(&mut self, s: &PName, t: &PName, path: &str) -> Result<(), FormulaError> {
        if s == t {
            return Ok(());
        }
        if let Some(a) = self.check_of(t) {
            return self.unequal_check(s, &a, path);
        }
        if let Some(a) = self.check_of(s) {
            return self.unequal_check(t, &a, path);
        }
        let (sk, tk): (Vec<PName>, Vec<PName>) = (
            s.children().into_iter().cloned().collect(),
            t.children().into_iter().cloned().collect(),
        );
        let mut cl = vec![Clause::Forces(eq(s, t))];
        cl.extend(sk.iter().map(|sg| strong(s, sg, Some(nmem(sg, t)))));
        cl.extend(tk.iter().map(|td| strong(t, td, Some(nmem(td, s)))));
        self.push(format!("{path}/s!=t D"), cl);
        for (g, sg) in sk.iter().enumerate() {
            for (d, td) in tk.iter().enumerate() {
                self.formula(&neq(sg, td), &format!("{path}/s!=t[{g},{d}]"))?;
            }
        }
        Ok(())
    }

    /// `σ ≠ Ǎ`.
    fn unequal_check(&mut self, s: &PName, a: &HFSet, path: &str) -> Result<(), FormulaError> {
        let Some(members) = a.members() else { return Ok(()) };
        if self.check_of(s).is_some() {
            return Ok(());
        }
        let top = self.top;
        let an = PName::check(a, top);
        let kids: Vec<PName> = s.children().into_iter().cloned().collect();
        let mut cl = vec![Clause::Forces(eq(s, &an))];
        cl.extend(kids.iter().map(|sg| strong(s, sg, Some(nmem(sg, &an)))));
        cl.extend(members.iter().map(|b| Clause::Forces(nmem(&PName::check(b, top), s))));
        self.push(format!("{path}/s!=A D"), cl);
        for (g, sg) in kids.iter().enumerate() {
            for b in members {
                self.formula(&neq(sg, &PName::check(b, top)), &format!("{path}/s!=A[{g},{b}]"))?;
            }
        }
        Ok(())
    }

    /// `τ ∉ σ`.
    fn non_member(&mut self, t: &PName, s: &PName, path: &str) -> Result<(), FormulaError> {
        for (g, sg) in s.children().into_iter().cloned().collect::<Vec<_>>().iter().enumerate() {
            self.formula(&neq(t, sg), &format!("{path}/t notin s[{g}]"))?;
        }
        Ok(())
    }
}

impl Formula {
    /// Negation normal form of `¬self`.
    fn nnf_negated(&self) -> Formula {
        Formula::not(self.clone()).nnf()
    }
}

fn instantiate(body: &Formula, v: &std::sync::Arc<str>, c: &PName) -> Formula {
    let m = [(v.clone(), Term::Name(c.clone()))].into_iter().collect();
    body.substitute(&m)
}

/// Closes `f` with `env` and puts it in negation normal form.
fn close(f: &Formula, env: &NameEnv) -> Result<Formula, FormulaError> {
    let c = f.with_names(env);
    if let Some(v) = c.free_vars().into_iter().next() {
        return Err(FormulaError::UnboundVariable(v.to_string()));
    }
    Ok(c.nnf())
}

/// Set descriptions for a closed formula, in construction order.
pub fn specs_for_formula(forcing: &Forcing, f: &Formula, env: &NameEnv) -> Result<Vec<SetSpec>, SynthError> {
    let closed = close(f, env)?;
    let mut b = Builder::new(forcing.poset.top());
    b.formula(&closed, "")?;
    Ok(b.specs)
}

/// Conditions forcing each clause, as a mask.
fn realize(ev: &mut Evaluator, spec: &SetSpec) -> Result<Mask, SynthError> {
    let p = &ev.forcing.poset;
    let n = p.len();
    let empty = NameEnv::default();
    let mut out = 0;
    for c in &spec.clauses {
        match c {
            Clause::Forces(phi) => {
                let v = ev.value(phi, &empty)?;
                out |= forcing_mask(ev.forcing, n, v);
            }
            Clause::Strong { container, child, also } => {
                let below = container
                    .entries()
                    .iter()
                    .filter(|e| &e.child == child)
                    .fold(0, |m, e| m | ev.forcing.poset.below(e.cond));
                let ok = match also {
                    Some(phi) => forcing_mask(ev.forcing, n, ev.value(phi, &empty)?),
                    None => bits::full(n),
                };
                out |= below & ok;
            }
        }
    }
    Ok(out)
}

fn forcing_mask(f: &Forcing, n: usize, v: Mask) -> Mask {
    (0..n).filter(|&p| bits::subset(f.embed(p), v)).fold(0, |m, p| m | bits::bit(p))
}

fn realize_all(forcing: &Forcing, specs: &[SetSpec]) -> Result<DenseFamily, SynthError> {
    let mut ev = Evaluator::new(forcing);
    let mut sets = Vec::with_capacity(specs.len());
    for s in specs {
        let m = realize(&mut ev, s)?;
        let set = forcing.poset.classify(m);
        if !set.class.dense {
            return Err(SynthError::NotDense(s.tag.clone()));
        }
        sets.push(FamilySet { tag: s.tag.clone(), set, bound: None });
    }
    Ok(DenseFamily { sets })
}

/// Dense sets such that any filter meeting them and containing a condition
/// forcing `f` satisfies `f` under its interpretation of the names.
pub fn family_for_formula(forcing: &Forcing, f: &Formula, env: &NameEnv) -> Result<DenseFamily, SynthError> {
    realize_all(forcing, &specs_for_formula(forcing, f, env)?)
}

/// The family for `σ = Ǎ`.
pub fn family_check_equality(forcing: &Forcing, s: &PName, a: &HFSet) -> Result<DenseFamily, SynthError> {
    let f = Formula::Eq(Term::Name(s.clone()), Term::Lit(a.clone()));
    family_for_formula(forcing, &f, &NameEnv::default())
}

/// `E_γ = {p : p ⊩ γ̌ ∉ σ or p ⊩⁺ γ̌ ∈ σ}` for each leaf child `γ`.
pub fn family_interp_agreement(forcing: &Forcing, s: &PName) -> Result<DenseFamily, SynthError> {
    if !s.is_flat() {
        return Err(SynthError::NotRankOne);
    }
    let specs: Vec<SetSpec> = s
        .children()
        .into_iter()
        .map(|c| SetSpec {
            tag: format!("E_{}", c.leaf_value().expect("flat")),
            clauses: vec![Clause::Forces(nmem(c, s)), strong(s, c, None)],
        })
        .collect();
    realize_all(forcing, &specs)
}

/// `D_γ = {p : p ⊩⁺ γ̌ ∈ σ}` for `γ ∈ A`, given `1 ⊩ σ = Ǎ` with `σ` flat.
/// A filter meeting these interprets `σ` as `A`.
pub fn family_rank_one(forcing: &Forcing, s: &PName, a: &HFSet) -> Result<DenseFamily, SynthError> {
    if !s.is_flat() {
        return Err(SynthError::NotRankOne);
    }
    let specs: Vec<SetSpec> = a
        .members()
        .into_iter()
        .flatten()
        .map(|x| {
            let c = PName::check(x, forcing.poset.top());
            SetSpec { tag: format!("D_{x}"), clauses: vec![strong(s, &c, None)] }
        })
        .collect();
    realize_all(forcing, &specs)
}

/// Predense variant: every set has at most `bound(m)` conditions.
pub fn family_for_formula_bounded(forcing: &Forcing, f: &Formula, env: &NameEnv, m: usize) -> Result<DenseFamily, SynthError> {
    if !forcing.is_boolean() {
        return Err(SynthError::NotBoolean);
    }
    if env.values().any(|s| !s.is_lambda_bounded(m)) {
        return Err(SynthError::NotBounded(m));
    }
    let specs = specs_for_formula(forcing, f, env)?;
    let mut ev = Evaluator::new(forcing);
    let empty = NameEnv::default();
    let mut sets = Vec::with_capacity(specs.len());
    for s in &specs {
        let mut vals: Vec<Mask> = Vec::new();
        for c in &s.clauses {
            match c {
                Clause::Forces(phi) => vals.push(ev.value(phi, &empty)?),
                Clause::Strong { container, child, also } => {
                    let v = match also {
                        Some(phi) => ev.value(phi, &empty)?,
                        None => forcing.alg.one(),
                    };
                    let entries: Vec<usize> = container
                        .entries()
                        .iter()
                        .filter(|e| &e.child == child)
                        .map(|e| e.cond)
                        .collect();
                    if entries.len() > m {
                        return Err(SynthError::NotBounded(m));
                    }
                    vals.extend(entries.iter().map(|&q| forcing.embed(q) & v));
                }
            }
        }
        let members = vals
            .into_iter()
            .filter(|&v| v != 0)
            .fold(0, |acc, v| acc | bits::bit(forcing.condition_for_value(v).expect("boolean forcing")));
        let set = forcing.poset.classify(members);
        if !set.class.predense {
            return Err(SynthError::NotPredense(s.tag.clone()));
        }
        let bound = s.bound(m);
        if set.len() > bound {
            return Err(SynthError::SizeBound { tag: s.tag.clone(), size: set.len(), bound });
        }
        sets.push(FamilySet { tag: s.tag.clone(), set, bound: Some(bound) });
    }
    Ok(DenseFamily { sets })
}

/// `σ = {(Ǎ_γ, p) : p ∈ D_γ}`.
pub fn encode_family_as_name(
    forcing: &Forcing,
    sets: &[Mask],
    values: &[HFSet],
    require: Density,
) -> Result<PName, SynthError> {
    if sets.len() != values.len() {
        return Err(SynthError::LengthMismatch { sets: sets.len(), values: values.len() });
    }
    for (i, a) in values.iter().enumerate() {
        if values[..i].contains(a) {
            return Err(SynthError::RepeatedValue(a.to_string()));
        }
    }
    let top = forcing.poset.top();
    let mut entries = Vec::new();
    for (i, (&d, a)) in sets.iter().zip(values).enumerate() {
        let c = forcing.poset.classify(d);
        if !require.admits(&c.class) {
            let tag = format!("D_{i}");
            return Err(match require {
                Density::Predense => SynthError::NotPredense(tag),
                _ => SynthError::NotDense(tag),
            });
        }
        let an = PName::check(a, top);
        entries.extend(bits::ones(d).map(|p| (an.clone(), p)));
    }
    Ok(PName::set(entries))
}

/// `{p : p ⊩⁺ Ǎ_γ ∈ σ}` for each value; the downward closure of the encoded set.
pub fn recover_family(forcing: &Forcing, s: &PName, values: &[HFSet]) -> Vec<Mask> {
    let top = forcing.poset.top();
    values
        .iter()
        .map(|a| {
            let an = PName::check(a, top);
            (0..forcing.poset.len())
                .filter(|&p| crate::semantics::strongly_forces(forcing, p, &an, s))
                .fold(0, |m, p| m | bits::bit(p))
        })
        .collect()
}

/// First filter that meets the family, contains a condition forcing `f`,
/// and still fails `f` under its interpretation. `None` means the guarantee holds.
pub fn guarantee_counterexample(
    forcing: &Forcing,
    family: &DenseFamily,
    f: &Formula,
    env: &NameEnv,
) -> Result<Option<Filter>, SynthError> {
    let closed = close(f, env)?;
    let v = Evaluator::new(forcing).value(&closed, &NameEnv::default())?;
    for g in forcing.poset.filters(false) {
        if !family.met_by(&g) {
            continue;
        }
        let forced = bits::ones(g.members).any(|p| bits::subset(forcing.embed(p), v));
        if forced && !eval_ground(&closed.ground(&g), &Default::default())? {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fork3, nsep4};
    use crate::names::{parse_name, NameTable};
    use crate::semantics::{forces, name_env};

    fn nm(f: &Forcing, text: &str) -> PName {
        parse_name(text, &f.poset, &NameTable::default()).unwrap()
    }

    fn hf(s: &str) -> HFSet {
        HFSet::parse(s).unwrap()
    }

    fn sets(f: &Forcing, fam: &DenseFamily) -> Vec<String> {
        fam.sets.iter().map(|s| f.poset.format_set(s.set.members)).collect()
    }

    #[test]
    fn check_equality_family() {
        let f = Forcing::new(fork3());
        let s = nm(&f, "{(chk 0, a), (chk 0, b)}");
        let fam = family_check_equality(&f, &s, &hf("{0}")).unwrap();
        assert_eq!(fam.sets[0].tag, "/s=A D_B[0]");
        assert_eq!(f.poset.format_set(fam.sets[0].set.members), "{a,b}");
        let phi = Formula::parse("s = chk {0}").unwrap();
        let env = name_env([("s", s)]);
        assert_eq!(guarantee_counterexample(&f, &fam, &phi, &env).unwrap(), None);
        for g in f.poset.filters(false) {
            if fam.met_by(&g) {
                assert_eq!(env["s"].interpret(&g), hf("{0}"));
            }
        }
    }

    #[test]
    fn check_names_need_no_sets() {
        let f = Forcing::new(fork3());
        let c = PName::check(&hf("{0,{0}}"), f.poset.top());
        assert!(family_check_equality(&f, &c, &hf("{0,{0}}")).unwrap().is_empty());
    }

    #[test]
    fn nested_family() {
        let f = Forcing::new(fork3());
        let s = nm(&f, "{({(chk 0, a)}, 1)}");
        let fam = family_check_equality(&f, &s, &hf("{{0}}")).unwrap();
        assert!(fam.len() > 2);
        let phi = Formula::parse("s = chk {{0}}").unwrap();
        assert_eq!(guarantee_counterexample(&f, &fam, &phi, &name_env([("s", s)])).unwrap(), None);
    }

    #[test]
    fn formula_families() {
        let f = Forcing::new(fork3());
        let s = nm(&f, "{(chk 0, a), (chk 0, b)}");
        let env = name_env([("s", s.clone()), ("t", s)]);
        let same = Formula::parse("s = t").unwrap();
        let fam = family_for_formula(&f, &same, &env).unwrap();
        assert!(fam.is_empty());
        let phi = Formula::parse("chk 0 in s").unwrap();
        let fam = family_for_formula(&f, &phi, &env).unwrap();
        assert_eq!(sets(&f, &fam)[0], "{a,b}");
        assert_eq!(guarantee_counterexample(&f, &fam, &phi, &env).unwrap(), None);
    }

    #[test]
    fn universal_family() {
        let f = Forcing::new(fork3());
        let s = nm(&f, "{(chk 0, a), (chk 1, b)}");
        let env = name_env([("s", s)]);
        let phi = Formula::parse("forall x in s (x in chk {0})").unwrap();
        let fam = family_for_formula(&f, &phi, &env).unwrap();
        assert_eq!(guarantee_counterexample(&f, &fam, &phi, &env).unwrap(), None);
        let gb = Filter::principal(&f.poset, f.poset.index_of("b").unwrap());
        let ga = Filter::principal(&f.poset, f.poset.index_of("a").unwrap());
        let closed = phi.with_names(&env);
        let v = Evaluator::new(&f).value(&closed, &NameEnv::default()).unwrap();
        assert!(bits::ones(gb.members).all(|p| !bits::subset(f.embed(p), v)));
        assert!(fam.met_by(&ga));
        assert!(eval_ground(&closed.ground(&ga), &Default::default()).unwrap());
    }

    #[test]
    fn agreement_family() {
        let n = Forcing::new(nsep4());
        let s = nm(&n, "{(chk 0, b)}");
        let fam = family_interp_agreement(&n, &s).unwrap();
        assert_eq!(sets(&n, &fam), ["{b,c}"]);
        assert!(!fam.met_by(&Filter::principal(&n.poset, n.poset.top())));
        let f = Forcing::new(fork3());
        let s = nm(&f, "{(chk 0, a)}");
        assert_eq!(sets(&f, &family_interp_agreement(&f, &s).unwrap()), ["{a,b}"]);
        let c = PName::check(&hf("{0,1}"), f.poset.top());
        let fam = family_interp_agreement(&f, &c).unwrap();
        assert!(fam.sets.iter().all(|s| s.set.members == f.poset.all()));
    }

    #[test]
    fn bounded_family() {
        let base = Forcing::new(fork3());
        let b = Forcing::boolean(&base.alg, "B").unwrap();
        let s = nm(&b, "{(chk 0, [a])}");
        let env = name_env([("s", s.clone())]);
        let phi = Formula::parse("s = chk {0}").unwrap();
        let fam = family_for_formula_bounded(&b, &phi, &env, 1).unwrap();
        for set in &fam.sets {
            assert!(set.set.class.predense);
            if set.tag.contains("E_gamma") {
                assert!(set.set.len() <= 2, "{}", set.tag);
            }
        }
        assert_eq!(guarantee_counterexample(&b, &fam, &phi, &env).unwrap(), None);
        let chk = Formula::parse("chk {0} = chk {0} and chk 0 in chk {0}").unwrap();
        let fam = family_for_formula_bounded(&b, &chk, &env, 1).unwrap();
        assert!(fam.sets.iter().all(|s| s.set.members == bits::bit(b.poset.top())));
        let two = nm(&b, "{(chk 0, [a]), (chk 0, [b])}");
        assert_eq!(
            family_for_formula_bounded(&b, &phi, &name_env([("s", two)]), 1),
            Err(SynthError::NotBounded(1))
        );
        let chain = Forcing::new(crate::fixtures::ch2());
        let s = PName::check(&hf("{0}"), chain.poset.top());
        let env = name_env([("s", s)]);
        assert_eq!(family_for_formula_bounded(&chain, &phi, &env, 1), Err(SynthError::NotBoolean));
    }

    #[test]
    fn encoding() {
        let f = Forcing::new(fork3());
        let d = f.poset.mask_of(&["a", "b"]).unwrap();
        let s = encode_family_as_name(&f, &[d], &[hf("0")], Density::Dense).unwrap();
        assert_eq!(s.to_dsl(&f.poset), "{(chk 0, a), (chk 0, b)}");
        let a = HFSet::set([hf("0")]);
        let env = name_env([("s", s.clone())]);
        let phi = Formula::Eq(Term::var("s"), Term::Lit(a.clone()));
        assert!(forces(&f, f.poset.top(), &phi, &env).unwrap());
        for g in f.poset.filters(false) {
            assert_eq!(s.interpret(&g) == a, g.meets(d));
        }
        let e = encode_family_as_name(&f, &[], &[], Density::Dense).unwrap();
        assert!(e.is_empty_name());
        let all = encode_family_as_name(&f, &[f.poset.all()], &[hf("0")], Density::Dense).unwrap();
        assert_eq!(all.entries().len(), 3);
        assert_eq!(recover_family(&f, &s, &[hf("0")]), vec![d]);
        assert_eq!(
            encode_family_as_name(&f, &[f.poset.mask_of(&["a"]).unwrap()], &[hf("0")], Density::Dense),
            Err(SynthError::NotDense("D_0".into()))
        );
    }
}
