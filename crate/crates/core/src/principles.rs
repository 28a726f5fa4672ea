//! Forcing axioms and name principles, checked by exhaustive filter search.
//!
//! Largeness predicates are finite stand-ins for club, stationary and
//! unbounded: monotone conditions on subsets of an index set `{0..k-1}`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, Mask};
use crate::boolcomp::Forcing;
use crate::fixtures;
use crate::harness::FormulaSpace;
use crate::hf::HFSet;
use crate::names::{parse_name, parse_names, restrict_to_cone, split_bounded, NameError, PName};
use crate::order::{parse_poset, Density, Filter, OrderError, Poset};
use crate::semantics::{eval_ground, interpret_env, Evaluator, Formula, FormulaError, NameEnv, Term};

/// Largest index set on which monotonicity and partition regularity are checked by brute force.
pub const MAX_INDEX: usize = 12;

#[derive(Debug, Error)]
pub enum PrincipleError {
    #[error("hypothesis fails: {0}")]
    Hypothesis(String),
    #[error("classification mismatch: {0}")]
    Classification(String),
    #[error("{pred} is not partition-regular for {parts} parts on {k} indices")]
    NotPartitionRegular { pred: Largeness, parts: usize, k: usize },
    #[error("{0} is not monotone")]
    NotMonotone(Largeness),
    #[error("index set of size {0} is too large to check")]
    IndexTooLarge(usize),
    #[error("bad largeness predicate `{0}`")]
    BadPredicate(String),
    #[error("instance: {0}")]
    Instance(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Name(#[from] NameError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Harness(#[from] crate::harness::HarnessError),
}

impl PrincipleError {
    /// Errors that mean the instance does not meet the principle's hypotheses.
    pub fn is_hypothesis(&self) -> bool {
        matches!(
            self,
            PrincipleError::Hypothesis(_)
                | PrincipleError::Classification(_)
                | PrincipleError::NotPartitionRegular { .. }
                | PrincipleError::Name(NameError::NotWellMet)
        )
    }
}

/// A monotone predicate on subsets of `{0..k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Largeness {
    All,
    AtLeast(usize),
    Contains(BTreeSet<u32>),
    Nonempty,
    Meets(BTreeSet<u32>),
}

impl Largeness {
    pub fn accepts_mask(&self, s: Mask, k: usize) -> bool {
        match self {
            Largeness::All => bits::subset(bits::full(k), s),
            Largeness::AtLeast(m) => bits::count(s) >= *m,
            Largeness::Contains(c) => c.iter().all(|&i| bits::has(s, i as usize)),
            Largeness::Nonempty => s != 0,
            Largeness::Meets(c) => c.iter().any(|&i| bits::has(s, i as usize)),
        }
    }

    /// Ground version on a set whose relevant members are the urelements `0..k`.
    pub fn accepts_set(&self, x: &HFSet, k: usize) -> bool {
        let Some(members) = x.members() else { return false };
        let has = |i: u32| members.contains(&HFSet::Atom(i));
        match self {
            Largeness::All => (0..k as u32).all(has),
            Largeness::AtLeast(m) => members.len() >= *m,
            Largeness::Contains(c) => c.iter().all(|&i| has(i)),
            Largeness::Nonempty => !members.is_empty(),
            Largeness::Meets(c) => c.iter().any(|&i| has(i)),
        }
    }

    /// A bounded formula in `var` with the same meaning as [`Self::accepts_set`].
    pub fn formula(&self, var: &str, k: usize) -> Formula {
        let v = || Term::var(var);
        let mem = |i: u32| Formula::In(Term::Lit(HFSet::Atom(i)), v());
        let always = || Formula::Eq(v(), v());
        let conj = |xs: Vec<Formula>| xs.into_iter().reduce(Formula::and).unwrap_or_else(always);
        match self {
            Largeness::All => conj((0..k as u32).map(mem).collect()),
            Largeness::Contains(c) => conj(c.iter().map(|&i| mem(i)).collect()),
            Largeness::Meets(c) => c
                .iter()
                .map(|&i| mem(i))
                .reduce(Formula::or)
                .unwrap_or_else(|| Formula::not(always())),
            Largeness::Nonempty => Largeness::AtLeast(1).formula(var, k),
            Largeness::AtLeast(0) => always(),
            Largeness::AtLeast(m) => {
                let xs: Vec<String> = (0..*m).map(|i| format!("{var}_{i}")).collect();
                let mut body = Vec::new();
                for i in 0..*m {
                    for j in i + 1..*m {
                        body.push(Formula::not(Formula::Eq(Term::var(&xs[i]), Term::var(&xs[j]))));
                    }
                }
                let mut f = conj(body);
                if *m == 1 {
                    f = Formula::Eq(Term::var(&xs[0]), Term::var(&xs[0]));
                }
                for x in xs.iter().rev() {
                    f = Formula::exists(x, v(), f);
                }
                f
            }
        }
    }

    fn check_index(k: usize) -> Result<(), PrincipleError> {
        if k > MAX_INDEX {
            return Err(PrincipleError::IndexTooLarge(k));
        }
        Ok(())
    }

    /// Supersets of accepted sets are accepted.
    pub fn is_monotone(&self, k: usize) -> Result<bool, PrincipleError> {
        Self::check_index(k)?;
        let all = bits::full(k);
        Ok((0..=all).all(|s| {
            !self.accepts_mask(s, k) || bits::ones(all & !s).all(|i| self.accepts_mask(s | bits::bit(i), k))
        }))
    }

    /// Whenever an accepted set is split into `parts` pieces, some piece is accepted.
    pub fn is_partition_regular(&self, k: usize, parts: usize) -> Result<bool, PrincipleError> {
        Self::check_index(k)?;
        if parts <= 1 {
            return Ok(true);
        }
        let all = bits::full(k);
        for s in 0..=all {
            if !self.accepts_mask(s, k) {
                continue;
            }
            let members: Vec<usize> = bits::ones(s).collect();
            let mut colour = vec![0usize; members.len()];
            loop {
                let mut pieces = vec![0; parts];
                for (i, &c) in colour.iter().enumerate() {
                    pieces[c] |= bits::bit(members[i]);
                }
                if !pieces.iter().any(|&p| self.accepts_mask(p, k)) {
                    return Ok(false);
                }
                let mut i = 0;
                while i < colour.len() && colour[i] == parts - 1 {
                    colour[i] = 0;
                    i += 1;
                }
                if i == colour.len() {
                    break;
                }
                colour[i] += 1;
            }
        }
        Ok(true)
    }

    /// Registration check: monotone on `{0..k-1}`.
    pub fn register(self, k: usize) -> Result<Self, PrincipleError> {
        if self.is_monotone(k)? {
            Ok(self)
        } else {
            Err(PrincipleError::NotMonotone(self))
        }
    }
}

impl fmt::Display for Largeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |c: &BTreeSet<u32>| c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Largeness::All => f.write_str("ALL"),
            Largeness::AtLeast(m) => write!(f, "AT_LEAST({m})"),
            Largeness::Contains(c) => write!(f, "CONTAINS({})", list(c)),
            Largeness::Nonempty => f.write_str("NONEMPTY"),
            Largeness::Meets(c) => write!(f, "MEETS({})", list(c)),
        }
    }
}

impl FromStr for Largeness {
    type Err = PrincipleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PrincipleError::BadPredicate(s.to_string());
        let t = s.trim();
        match t {
            "ALL" => return Ok(Largeness::All),
            "NONEMPTY" => return Ok(Largeness::Nonempty),
            _ => {}
        }
        let (head, rest) = t.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let nums = || -> Result<BTreeSet<u32>, PrincipleError> {
            args.split(',')
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(|a| a.parse::<u32>().map_err(|_| bad()))
                .collect()
        };
        match head.trim() {
            "AT_LEAST" => args.trim().parse().map(Largeness::AtLeast).map_err(|_| bad()),
            "CONTAINS" => Ok(Largeness::Contains(nums()?)),
            "MEETS" => Ok(Largeness::Meets(nums()?)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Largeness {
    type Error = PrincipleError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Largeness> for String {
    fn from(l: Largeness) -> String {
        l.to_string()
    }
}

/// `Tr_{g,D⃗} = {i : g ∩ D_i ≠ ∅}` as an index mask.
pub fn trace(g: &Filter, sets: &[Mask]) -> Mask {
    sets.iter()
        .enumerate()
        .filter(|(_, &d)| g.meets(d))
        .fold(0, |m, (i, _)| m | bits::bit(i))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Principle {
    Fa,
    N,
    PhiN,
    SimN,
    Hamkins,
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Principle::Fa => "fa",
            Principle::N => "n",
            Principle::PhiN => "phi-n",
            Principle::SimN => "sim-n",
            Principle::Hamkins => "hamkins",
        })
    }
}

impl FromStr for Principle {
    type Err = PrincipleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "fa" => Principle::Fa,
            "n" => Principle::N,
            "phi-n" => Principle::PhiN,
            "sim-n" => Principle::SimN,
            "hamkins" => Principle::Hamkins,
            _ => return Err(PrincipleError::Instance(format!("unknown principle `{s}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
}

#[derive(Clone, Debug)]
pub struct PrincipleReport {
    pub principle: Principle,
    pub instance: String,
    pub verdict: Verdict,
    /// First witness filter in canonical order.
    pub witness: Option<Filter>,
    /// Filters examined before the verdict was reached.
    pub scanned: usize,
    /// Free-form lines recording intermediate stages.
    pub stages: Vec<String>,
    witness_ids: Vec<String>,
}

impl PrincipleReport {
    fn new(principle: Principle, instance: String, p: &Poset, witness: Option<Filter>, scanned: usize) -> Self {
        let witness_ids = witness
            .as_ref()
            .map(|g| bits::ones(g.members).map(|i| p.id(i).to_string()).collect())
            .unwrap_or_default();
        PrincipleReport {
            principle,
            instance,
            verdict: if witness.is_some() { Verdict::Holds } else { Verdict::Fails },
            witness,
            scanned,
            stages: Vec::new(),
            witness_ids,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// Witness as a sorted list of element ids.
    pub fn witness_ids(&self) -> &[String] {
        &self.witness_ids
    }

    /// One tab-separated line: principle, verdict, witness, filters scanned.
    pub fn machine_line(&self) -> String {
        format!(
            "result\t{}\t{}\t{}\t{}",
            self.principle,
            if self.holds() { "holds" } else { "fails" },
            self.witness_ids.join(","),
            self.scanned
        )
    }
}

impl fmt::Display for PrincipleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "principle: {}", self.principle)?;
        writeln!(f, "instance: {}", self.instance)?;
        for s in &self.stages {
            writeln!(f, "  {s}")?;
        }
        match self.verdict {
            Verdict::Holds => writeln!(f, "verdict: holds, witness {{{}}}", self.witness_ids.join(","))?,
            Verdict::Fails => writeln!(f, "verdict: fails after {} filters", self.scanned)?,
        }
        write!(f, "{}", self.machine_line())
    }
}

/// First nonempty filter in canonical order satisfying `ok`, with the count scanned.
fn search<F: FnMut(&Filter) -> Result<bool, PrincipleError>>(
    p: &Poset,
    mut ok: F,
) -> Result<(Option<Filter>, usize), PrincipleError> {
    let mut n = 0;
    for g in p.filters(false) {
        n += 1;
        if ok(&g)? {
            return Ok((Some(g), n));
        }
    }
    Ok((None, n))
}

/// Some filter meets a large set of the `sets`.
pub fn check_fa(p: &Poset, sets: &[Mask], large: &Largeness, require: Density) -> Result<PrincipleReport, PrincipleError> {
    if sets.len() > 64 {
        return Err(PrincipleError::Instance("at most 64 sets".into()));
    }
    for (i, &d) in sets.iter().enumerate() {
        let c = p.classify(d);
        if !require.admits(&c.class) {
            return Err(PrincipleError::Classification(format!(
                "D_{i} = {} is not {require}",
                p.format_set(d)
            )));
        }
    }
    let k = sets.len();
    let (w, n) = search(p, |g| Ok(large.accepts_mask(trace(g, sets), k)))?;
    Ok(PrincipleReport::new(Principle::Fa, format!("{} sets, {large}", k), p, w, n))
}

/// Declared classification of a name.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameFlags {
    pub rank: Option<u32>,
    pub small: Option<usize>,
    pub bounded: Option<usize>,
}

impl NameFlags {
    pub fn check(&self, s: &PName) -> Result<(), PrincipleError> {
        if let Some(r) = self.rank {
            if s.rank() > r {
                return Err(PrincipleError::Classification(format!("rank {} exceeds {r}", s.rank())));
            }
        }
        if let Some(n) = self.small {
            if !s.is_kappa_small(n) {
                return Err(PrincipleError::Classification(format!("name is not {n}-small")));
            }
        }
        if let Some(m) = self.bounded {
            if !s.is_lambda_bounded(m) {
                return Err(PrincipleError::Classification(format!("name is not {m}-bounded")));
            }
        }
        Ok(())
    }
}

/// Given `1 ⊩ σ = Ǎ`, some filter interprets `σ` as `A`.
pub fn check_n(f: &Forcing, s: &PName, a: &HFSet, flags: NameFlags) -> Result<PrincipleReport, PrincipleError> {
    flags.check(s)?;
    let phi = Formula::Eq(Term::Name(s.clone()), Term::Lit(a.clone()));
    if !Evaluator::new(f).forces(f.poset.top(), &phi, &NameEnv::default())? {
        return Err(PrincipleError::Hypothesis(format!("1 does not force the name to equal {a}")));
    }
    let (w, n) = search(&f.poset, |g| Ok(&s.interpret(g) == a))?;
    Ok(PrincipleReport::new(Principle::N, format!("{} = {a}", s.to_dsl(&f.poset)), &f.poset, w, n))
}

/// A property of a single ground set: a formula in one variable, or a largeness predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Property {
    Formula { var: Arc<str>, body: Formula },
    Large { pred: Largeness, k: usize },
}

impl Property {
    pub fn formula(var: &str, body: Formula) -> Property {
        Property::Formula { var: Arc::from(var), body }
    }

    pub fn large(pred: Largeness, k: usize) -> Property {
        Property::Large { pred, k }
    }

    /// The property as a formula in its variable.
    pub fn as_formula(&self) -> (Arc<str>, Formula) {
        match self {
            Property::Formula { var, body } => (var.clone(), body.clone()),
            Property::Large { pred, k } => (Arc::from("s"), pred.formula("s", *k)),
        }
    }

    pub fn holds_of(&self, x: &HFSet) -> Result<bool, PrincipleError> {
        match self {
            Property::Formula { var, body } => {
                let env = [(var.clone(), x.clone())].into_iter().collect();
                Ok(eval_ground(body, &env)?)
            }
            Property::Large { pred, k } => Ok(pred.accepts_set(x, *k)),
        }
    }

    /// `⟦φ(σ)⟧`.
    pub fn value(&self, ev: &mut Evaluator, s: &PName) -> Result<Mask, PrincipleError> {
        let (var, body) = self.as_formula();
        let free = body.free_vars();
        if free.iter().any(|v| *v != var) {
            return Err(PrincipleError::Instance(format!("formula must have only `{var}` free")));
        }
        let env: NameEnv = [(var, s.clone())].into_iter().collect();
        Ok(ev.value(&body, &env)?)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Formula { var, body } => write!(f, "{var} ↦ {body}"),
            Property::Large { pred, k } => write!(f, "{pred} on {k} indices"),
        }
    }
}

/// Given `1 ⊩ φ(σ)`, some filter `g` has `φ(σ^g)` in the ground model.
pub fn check_phi_n(f: &Forcing, s: &PName, prop: &Property) -> Result<PrincipleReport, PrincipleError> {
    let v = prop.value(&mut Evaluator::new(f), s)?;
    if !bits::subset(f.embed(f.poset.top()), v) {
        return Err(PrincipleError::Hypothesis(format!("1 does not force {prop}")));
    }
    let (w, n) = search(&f.poset, |g| prop.holds_of(&s.interpret(g)))?;
    Ok(PrincipleReport::new(Principle::PhiN, format!("{} with {prop}", s.to_dsl(&f.poset)), &f.poset, w, n))
}

/// Some filter satisfies, under its interpretation of `env`, every formula
/// of the space that `1` forces. Returns the report and the forced formulas.
pub fn check_simultaneous_n(
    f: &Forcing,
    env: &NameEnv,
    space: &FormulaSpace,
) -> Result<(PrincipleReport, Vec<Formula>), PrincipleError> {
    let mut ev = Evaluator::new(f);
    let one = f.embed(f.poset.top());
    let mut forced = Vec::new();
    for phi in space.enumerate()? {
        if bits::subset(one, ev.value(&phi, env)?) {
            forced.push(phi);
        }
    }
    let (w, n) = search(&f.poset, |g| {
        let ground = interpret_env(env, g);
        for phi in &forced {
            if !eval_ground(phi, &ground)? {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    let mut vars: Vec<&Arc<str>> = env.keys().collect();
    vars.sort();
    let desc = vars.iter().map(|v| format!("{v} = {}", env[*v].to_dsl(&f.poset))).collect::<Vec<_>>().join("; ");
    let mut r = PrincipleReport::new(Principle::SimN, desc, &f.poset, w, n);
    r.stages.push(format!("{} forced formulas of depth <= {}", forced.len(), space.depth));
    Ok((r, forced))
}

/// One cone of the splitting argument.
#[derive(Clone, Debug)]
pub struct ConeStage {
    pub cond: usize,
    pub component: usize,
    /// Witness on the cone, as a parent mask.
    pub cone_witness: Mask,
    pub regenerated: Filter,
    /// `regenerated ∩ cone` is the cone witness.
    pub regenerates: bool,
    /// `φ` holds of `σ` under the regenerated filter.
    pub transfers: bool,
}

#[derive(Clone, Debug)]
pub struct HamkinsReport {
    pub report: PrincipleReport,
    pub components: Vec<PName>,
    /// Conditions forcing some component to be large.
    pub deciders: Mask,
    pub deciders_dense: bool,
    pub cones: Vec<ConeStage>,
    /// Direct search on the original name, for comparison with the transfer.
    pub direct: PrincipleReport,
}

impl HamkinsReport {
    /// Every stage of the replay went through.
    pub fn confirmed(&self) -> bool {
        self.deciders_dense
            && self.cones.iter().all(|c| c.regenerates && c.transfers)
            && self.report.holds() == self.direct.holds()
    }
}

/// Replays the splitting argument for an `m`-bounded flat name on a
/// well-met poset: split into one-bounded components, find conditions that
/// force a component to be large, solve the one-bounded problem on each cone,
/// and carry the witness back up with [`Poset::generated_filter`].
pub fn hamkins_pipeline(f: &Forcing, s: &PName, pred: &Largeness, k: usize) -> Result<HamkinsReport, PrincipleError> {
    let p = &f.poset;
    if !p.is_well_met() {
        return Err(NameError::NotWellMet.into());
    }
    if !s.is_flat() {
        return Err(NameError::NotRankOne.into());
    }
    let pred = pred.clone().register(k)?;
    let m = s.max_bound().max(1);
    if !pred.is_partition_regular(k, m)? {
        return Err(PrincipleError::NotPartitionRegular { pred, parts: m, k });
    }
    let prop = Property::large(pred.clone(), k);
    let mut ev = Evaluator::new(f);
    let whole = prop.value(&mut ev, s)?;
    if !bits::subset(f.embed(p.top()), whole) {
        return Err(PrincipleError::Hypothesis(format!("1 does not force {prop}")));
    }
    let components = split_bounded(s, m)?;
    let values: Vec<Mask> = components.iter().map(|c| prop.value(&mut ev, c)).collect::<Result<_, _>>()?;
    let decides = |q: usize| values.iter().position(|&v| bits::subset(f.embed(q), v));
    let deciders = (0..p.len()).filter(|&q| decides(q).is_some()).fold(0, |acc, q| acc | bits::bit(q));
    let deciders_dense = p.is_dense(deciders);
    let mut stages = vec![
        format!("split into {} one-bounded components", components.len()),
        format!("deciding conditions {} ({})", p.format_set(deciders), if deciders_dense { "dense" } else { "not dense" }),
    ];
    let mut cones = Vec::new();
    for q in bits::ones(deciders) {
        for (d, comp) in components.iter().enumerate() {
            if !bits::subset(f.embed(q), values[d]) {
                continue;
            }
            let (cone, restricted) = restrict_to_cone(p, comp, q)?;
            let cf = Forcing::new(cone.poset.clone());
            let local = check_phi_n(&cf, &restricted, &prop)?;
            let Some(h) = local.witness else {
                stages.push(format!("cone below {}: no witness for component {d}", p.id(q)));
                continue;
            };
            let lifted = cone.lift(h.members);
            let g = p.generated_filter(lifted)?;
            let cone_mask = cone.lift(cone.poset.all());
            let regenerates = g.members & cone_mask == lifted;
            let transfers = prop.holds_of(&s.interpret(&g))?;
            stages.push(format!(
                "cone below {} with component {d}: witness {}, regenerated {}",
                p.id(q),
                p.format_set(lifted),
                p.format_set(g.members)
            ));
            cones.push(ConeStage { cond: q, component: d, cone_witness: lifted, regenerated: g, regenerates, transfers });
        }
    }
    let direct = check_phi_n(f, s, &prop)?;
    let witness = cones.iter().find(|c| c.transfers).map(|c| c.regenerated);
    let scanned = cones.len();
    let mut report = PrincipleReport::new(Principle::Hamkins, format!("{} with {prop}", s.to_dsl(p)), p, witness, scanned);
    report.stages = stages;
    Ok(HamkinsReport { report, components, deciders, deciders_dense, cones, direct })
}

/// Instance file for the `check` command.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    /// Poset in the poset language, or a built-in fixture name.
    pub poset: String,
    /// Name declarations.
    #[serde(default)]
    pub names: String,
    /// `fa`: the sets, as lists of element ids.
    #[serde(default)]
    pub sets: Vec<Vec<String>>,
    /// `fa`: `dense`, `predense` or `unchecked`.
    #[serde(default)]
    pub density: Option<String>,
    /// `fa`, `phi-n`, `hamkins`: a largeness predicate.
    #[serde(default)]
    pub largeness: Option<Largeness>,
    /// `phi-n`, `hamkins`: size of the index set (default: one past the largest leaf).
    #[serde(default)]
    pub base: Option<usize>,
    /// `n`, `phi-n`, `hamkins`: which declared name to use.
    #[serde(default)]
    pub name: Option<String>,
    /// `n`: the ground value.
    #[serde(default)]
    pub value: Option<HFSet>,
    /// `phi-n`: a formula in `var`, instead of a largeness predicate.
    #[serde(default)]
    pub formula: Option<String>,
    #[serde(default)]
    pub var: Option<String>,
    /// `n`: declared classification.
    #[serde(default, flatten)]
    pub flags: NameFlags,
    /// `sim-n`: formula depth.
    #[serde(default)]
    pub depth: Option<usize>,
}

impl Instance {
    pub fn parse(text: &str) -> Result<Instance, PrincipleError> {
        toml::from_str(text).map_err(|e| PrincipleError::Instance(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance serializes")
    }

    pub fn load_poset(&self) -> Result<Poset, PrincipleError> {
        match fixtures::builtin(self.poset.trim()) {
            Some(p) => Ok(p),
            None => Ok(parse_poset(&self.poset)?),
        }
    }

    fn name(&self, p: &Poset) -> Result<PName, PrincipleError> {
        let table = parse_names(&self.names, p)?;
        match &self.name {
            Some(id) => Ok(table.require(id)?.clone()),
            None => table
                .names
                .first()
                .map(|(_, s)| s.clone())
                .ok_or_else(|| PrincipleError::Instance("no names declared".into())),
        }
    }

    fn base(&self, s: &PName) -> usize {
        self.base.unwrap_or_else(|| {
            s.children().iter().filter_map(|c| c.leaf_value()).map(|x| x as usize + 1).max().unwrap_or(0)
        })
    }

    fn largeness(&self) -> Result<Largeness, PrincipleError> {
        self.largeness.clone().ok_or_else(|| PrincipleError::Instance("missing `largeness`".into()))
    }

    pub fn run(&self, which: Principle) -> Result<PrincipleReport, PrincipleError> {
        let p = self.load_poset()?;
        let f = Forcing::new(p);
        match which {
            Principle::Fa => {
                let sets = self
                    .sets
                    .iter()
                    .map(|ids| f.poset.mask_of(ids))
                    .collect::<Result<Vec<_>, _>>()?;
                let density = match self.density.as_deref().unwrap_or("dense") {
                    "dense" => Density::Dense,
                    "predense" => Density::Predense,
                    "unchecked" | "none" => Density::Unchecked,
                    d => return Err(PrincipleError::Instance(format!("unknown density `{d}`"))),
                };
                check_fa(&f.poset, &sets, &self.largeness()?, density)
            }
            Principle::N => {
                let s = self.name(&f.poset)?;
                let a = self.value.clone().ok_or_else(|| PrincipleError::Instance("missing `value`".into()))?;
                check_n(&f, &s, &a, self.flags)
            }
            Principle::PhiN => {
                let s = self.name(&f.poset)?;
                let prop = match &self.formula {
                    Some(text) => Property::formula(self.var.as_deref().unwrap_or("s"), Formula::parse(text)?),
                    None => Property::large(self.largeness()?, self.base(&s)),
                };
                check_phi_n(&f, &s, &prop)
            }
            Principle::SimN => {
                let table = parse_names(&self.names, &f.poset)?;
                let env: NameEnv = table.names.iter().map(|(k, v)| (Arc::from(k.as_str()), v.clone())).collect();
                let mut vars: Vec<&str> = table.names.iter().map(|(k, _)| k.as_str()).collect();
                vars.sort();
                let space = FormulaSpace::new(&vars, FormulaSpace::standard(0).literals, self.depth.unwrap_or(2));
                Ok(check_simultaneous_n(&f, &env, &space)?.0)
            }
            Principle::Hamkins => {
                let s = self.name(&f.poset)?;
                let k = self.base(&s);
                Ok(hamkins_pipeline(&f, &s, &self.largeness()?, k)?.report)
            }
        }
    }
}

/// Parses a single name against `p` with no declared names in scope.
pub fn name_on(p: &Poset, text: &str) -> Result<PName, PrincipleError> {
    Ok(parse_name(text, p, &Default::default())?)
}
