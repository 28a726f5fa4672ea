//! Boolean ultrapowers of finite algebras.
//!
//! Names live over the nonzero part of an algebra. An ultrafilter `U` is
//! principal on an atom; `σ =_U τ` iff `⟦σ = τ⟧ ∈ U`. The quotient is
//! computed on a finite universe of names, with one representative per class
//! (the first in universe order).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::batch::FormulaBatch;
use crate::bits::{self, Mask};
use crate::boolcomp::{BoolAlg, BoolError, BoolFilter, Forcing};
use crate::harness::{enumerate_names, enumerate_names_reduced, HarnessError, NameSpec};
use crate::hf::HFSet;
use crate::names::{quasi_interpret, NameError, PName};
use crate::order::{Filter, Poset};
use crate::semantics::{eval_ground, Evaluator, Formula, FormulaError, GroundEnv, NameEnv, Term};

/// Most names a universe may hold.
pub const MAX_UNIVERSE: usize = 300_000;

#[derive(Debug, Error)]
pub enum UltraError {
    #[error("not an ultrafilter: {0}")]
    NotUltra(String),
    #[error("names must live over the nonzero part of an algebra")]
    NotBoolean,
    #[error("universe of {size} names exceeds the cap of {cap}")]
    UniverseCap { size: usize, cap: usize },
    #[error("{0} is outside the universe")]
    OutsideUniverse(String),
    #[error("=_U is not an equivalence: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Bool(#[from] BoolError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Name(#[from] NameError),
}

/// The nonzero part of the completion of `p`, as a forcing.
pub fn boolean_forcing(p: &Poset) -> Result<Forcing, UltraError> {
    Ok(Forcing::boolean(&BoolAlg::complete(p), &format!("B({})", p.name()))?)
}

/// The ultrafilter on the atom labelled `label` (`a` or `[a]`).
pub fn ultrafilter_at(alg: &BoolAlg, label: &str) -> Result<BoolFilter, UltraError> {
    let want = format!("[{}]", label.trim_start_matches('[').trim_end_matches(']'));
    alg.labels()
        .iter()
        .position(|l| *l == want)
        .map(|a| BoolFilter { generator: bits::bit(a) })
        .ok_or_else(|| UltraError::NotUltra(format!("no atom `{label}`")))
}

/// A finite universe of names over a Boolean forcing.
#[derive(Clone, Debug)]
pub struct Universe {
    pub forcing: Forcing,
    pub spec: NameSpec,
    pub names: Vec<PName>,
    /// Built by [`Universe::reduced`].
    pub reduced: bool,
    index: HashMap<PName, usize>,
}

impl Universe {
    /// All names meeting `spec`: hereditary level `rank`, urelements `0..base`,
    /// at most `entries` entries per set.
    pub fn new(forcing: Forcing, spec: NameSpec) -> Result<Universe, UltraError> {
        if !forcing.is_boolean() {
            return Err(UltraError::NotBoolean);
        }
        let names = enumerate_names(&forcing.poset, &spec)?;
        Universe::from_names(forcing, spec, names, false)
    }

    /// One name per `⟦σ = τ⟧ = 1` group at every level: children are
    /// themselves representatives. Every name of the full universe is
    /// Boolean-equal to one of these.
    pub fn reduced(forcing: Forcing, spec: NameSpec) -> Result<Universe, UltraError> {
        if !forcing.is_boolean() {
            return Err(UltraError::NotBoolean);
        }
        let names = enumerate_names_reduced(&forcing.poset, &spec, |level| {
            let g = group_boolean_equal(&forcing, &level);
            g.reps.iter().map(|&i| level[i].clone()).collect()
        })?;
        Universe::from_names(forcing, spec, names, true)
    }

    fn from_names(forcing: Forcing, spec: NameSpec, names: Vec<PName>, reduced: bool) -> Result<Universe, UltraError> {
        if names.len() > MAX_UNIVERSE {
            return Err(UltraError::UniverseCap { size: names.len(), cap: MAX_UNIVERSE });
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Universe { forcing, spec, names, index, reduced })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, s: &PName) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn ultrafilters(&self) -> Vec<BoolFilter> {
        self.forcing.alg.ultrafilters()
    }

    /// Groups the universe by `⟦σ = τ⟧ = 1`.
    pub fn boolean_classes(&self) -> BooleanClasses {
        group_boolean_equal(&self.forcing, &self.names)
    }

    /// Quotients for every ultrafilter, in atom order.
    pub fn quotients(&self) -> Result<Vec<QuotientModel<'_>>, UltraError> {
        self.ultrafilters().into_iter().map(|u| QuotientModel::build(self, u)).collect()
    }
}

/// `V^B / U` restricted to a universe.
#[derive(Clone, Debug)]
pub struct QuotientModel<'u> {
    pub universe: &'u Universe,
    pub ultra: BoolFilter,
    pub atom: usize,
    /// `U` as a filter on the conditions.
    pub generic: Filter,
    /// Class of each universe name.
    pub class_of: Vec<usize>,
    /// Universe index of each class representative.
    pub reps: Vec<usize>,
    /// `members[c]`: classes `d` with `d ∈_U c`, ascending.
    pub members: Vec<Vec<usize>>,
    member: Vec<Vec<bool>>,
    checks: HashMap<HFSet, usize>,
    /// Names whose interpretation did not point at their class.
    pub hint_misses: usize,
}

impl<'u> QuotientModel<'u> {
    pub fn build(universe: &'u Universe, ultra: BoolFilter) -> Result<QuotientModel<'u>, UltraError> {
        let f = &universe.forcing;
        let atom = ultra
            .atom()
            .ok_or_else(|| UltraError::NotUltra(f.alg.format(ultra.generator)))?;
        let generic = Filter::principal(&f.poset, f.alg.atom_point(atom));
        let in_u = |x: Mask| ultra.contains(x);
        let mut ev = Evaluator::new(f);
        let mut class_of = Vec::with_capacity(universe.len());
        let mut reps: Vec<usize> = Vec::new();
        let mut hint: HashMap<HFSet, usize> = HashMap::new();
        let mut hint_misses = 0;
        for (i, s) in universe.names.iter().enumerate() {
            let key = s.interpret(&generic);
            let guess = hint.get(&key).copied();
            let found = match guess {
                Some(c) if in_u(ev.eq(s, &universe.names[reps[c]])) => Some(c),
                _ => {
                    let c = (0..reps.len()).find(|&c| in_u(ev.eq(s, &universe.names[reps[c]])));
                    if c.is_some() || guess.is_some() {
                        hint_misses += 1;
                    }
                    c
                }
            };
            let c = found.unwrap_or_else(|| {
                reps.push(i);
                hint.entry(key).or_insert(reps.len() - 1);
                reps.len() - 1
            });
            class_of.push(c);
        }
        let n = reps.len();
        let mut member = vec![vec![false; n]; n];
        for c in 0..n {
            let rc = &universe.names[reps[c]];
            for d in 0..n {
                let rd = &universe.names[reps[d]];
                if c != d && in_u(ev.eq(rc, rd)) {
                    return Err(UltraError::Inconsistent(format!("representatives {c} and {d} are U-equal")));
                }
                member[d][c] = in_u(ev.member(rd, rc));
            }
        }
        let members = (0..n).map(|c| (0..n).filter(|&d| member[d][c]).collect()).collect();
        let top = f.poset.top();
        let checks = universe
            .names
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_check(top).map(|x| (x, class_of[i])))
            .collect();
        Ok(QuotientModel { universe, ultra, atom, generic, class_of, reps, members, member, checks, hint_misses })
    }

    pub fn classes(&self) -> usize {
        self.reps.len()
    }

    pub fn rep(&self, c: usize) -> &PName {
        &self.universe.names[self.reps[c]]
    }

    /// `d ∈_U c`.
    pub fn is_member(&self, d: usize, c: usize) -> bool {
        self.member[d][c]
    }

    /// `[σ]_U`, comparing against representatives when `σ` is outside the universe.
    pub fn class_of_name(&self, s: &PName) -> Result<usize, UltraError> {
        if let Some(i) = self.universe.position(s) {
            return Ok(self.class_of[i]);
        }
        let mut ev = Evaluator::new(&self.universe.forcing);
        (0..self.classes())
            .find(|&c| self.ultra.contains(ev.eq(s, self.rep(c))))
            .ok_or_else(|| UltraError::OutsideUniverse(s.to_dsl(&self.universe.forcing.poset)))
    }

    /// `j_U(x) = [x̌]_U`.
    pub fn embedding_j(&self, x: &HFSet) -> Result<usize, UltraError> {
        self.checks
            .get(x)
            .copied()
            .ok_or_else(|| UltraError::OutsideUniverse(x.to_string()))
    }

    /// Ground sets whose check names are in the universe, with their `j` values.
    pub fn j_image(&self) -> Vec<(&HFSet, usize)> {
        let mut v: Vec<(&HFSet, usize)> = self.checks.iter().map(|(x, &c)| (x, c)).collect();
        v.sort();
        v
    }

    /// `j` is injective and preserves and reflects `∈` on the ground sets it sees.
    pub fn j_is_embedding(&self) -> bool {
        let img = self.j_image();
        img.iter().all(|&(x, cx)| {
            img.iter().all(|&(y, cy)| (x == y) == (cx == cy) && y.contains(x) == self.member[cx][cy])
        })
    }

    /// Every class holds a check name, so `j` is onto.
    pub fn j_is_onto(&self) -> bool {
        let hit: BTreeSet<usize> = self.checks.values().copied().collect();
        hit.len() == self.classes()
    }

    /// `M ⊨ φ` with free variables bound to classes.
    pub fn satisfies(&self, f: &Formula, env: &HashMap<Arc<str>, usize>) -> Result<bool, UltraError> {
        let (vars, mut slots): (Vec<Arc<str>>, Vec<usize>) = env.iter().map(|(k, &c)| (k.clone(), c)).unzip();
        Ok(self.compile(f, &vars)?.eval(self, &mut slots))
    }

    /// Resolves variables to slots (free variables first, in `vars` order)
    /// and ground terms to classes.
    pub fn compile(&self, f: &Formula, vars: &[Arc<str>]) -> Result<Compiled, UltraError> {
        let mut scope = vars.to_vec();
        self.compile_rec(f, &mut scope)
    }

    fn compile_term(&self, t: &Term, scope: &[Arc<str>]) -> Result<Slot, UltraError> {
        match t {
            Term::Var(v) => scope
                .iter()
                .rposition(|k| k == v)
                .map(Slot::Var)
                .ok_or_else(|| FormulaError::UnboundVariable(v.to_string()).into()),
            Term::Lit(x) => Ok(Slot::Class(self.embedding_j(x)?)),
            Term::Name(s) => Ok(Slot::Class(self.class_of_name(s)?)),
        }
    }

    fn compile_rec(&self, f: &Formula, scope: &mut Vec<Arc<str>>) -> Result<Compiled, UltraError> {
        let bx = |c: Compiled| Box::new(c);
        Ok(match f {
            Formula::Eq(a, b) => Compiled::Eq(self.compile_term(a, scope)?, self.compile_term(b, scope)?),
            Formula::In(a, b) => Compiled::In(self.compile_term(a, scope)?, self.compile_term(b, scope)?),
            Formula::Not(a) => Compiled::Not(bx(self.compile_rec(a, scope)?)),
            Formula::And(a, b) => Compiled::And(bx(self.compile_rec(a, scope)?), bx(self.compile_rec(b, scope)?)),
            Formula::Or(a, b) => Compiled::Or(bx(self.compile_rec(a, scope)?), bx(self.compile_rec(b, scope)?)),
            Formula::Forall(v, t, a) | Formula::Exists(v, t, a) => {
                let dom = self.compile_term(t, scope)?;
                scope.push(v.clone());
                let body = self.compile_rec(a, scope);
                scope.pop();
                let body = bx(body?);
                if matches!(f, Formula::Forall(..)) {
                    Compiled::Forall(dom, body)
                } else {
                    Compiled::Exists(dom, body)
                }
            }
        })
    }

    /// Both sides of Łoś for one formula: `(M ⊨ φ([σ⃗]), ⟦φ(σ⃗)⟧ ∈ U)`.
    pub fn los_sides(&self, f: &Formula, env: &NameEnv) -> Result<(bool, bool), UltraError> {
        let classes = env
            .iter()
            .map(|(k, s)| Ok((k.clone(), self.class_of_name(s)?)))
            .collect::<Result<HashMap<_, _>, UltraError>>()?;
        let v = Evaluator::new(&self.universe.forcing).value(f, env)?;
        Ok((self.satisfies(f, &classes)?, self.ultra.contains(v)))
    }

    pub fn check_los(&self, f: &Formula, env: &NameEnv) -> Result<bool, UltraError> {
        let (a, b) = self.los_sides(f, env)?;
        Ok(a == b)
    }

    /// `[σ]^{∈_U} ∩ j[X]` against `j[σ^(U)]`, for flat `σ` over `0..base`.
    pub fn check_trace_identity(&self, s: &PName) -> Result<TraceIdentity, UltraError> {
        let f = &self.universe.forcing;
        let base = self.universe.spec.base;
        let c = self.class_of_name(s)?;
        let jx: Vec<usize> = (0..base).map(|x| self.embedding_j(&HFSet::atom(x))).collect::<Result<_, _>>()?;
        let lhs = jx.iter().copied().filter(|&d| self.member[d][c]).collect();
        let quasi = quasi_interpret(f, s, &self.generic)?;
        let rhs = quasi
            .members()
            .into_iter()
            .flatten()
            .map(|x| self.embedding_j(x))
            .collect::<Result<_, _>>()?;
        Ok(TraceIdentity { lhs, rhs })
    }

    /// Compares `(M, ∈, σ^U)` with `(j(M)^{∈_U}, ∈_U, [σ]_U)` on every formula
    /// in `m` and `s` up to `depth` whose quantifiers are bounded by `m`, with
    /// the members of `M` as parameters.
    pub fn check_elementarity(&self, m: &HFSet, s: &PName, depth: usize) -> Result<Elementarity, UltraError> {
        let lits: Vec<HFSet> = m.members().into_iter().flatten().cloned().collect();
        let space = crate::harness::FormulaSpace::new(&["m", "s"], lits, depth);
        let formulas: Vec<Formula> = space.enumerate()?.into_iter().filter(|f| bounded_by(f, "m")).collect();
        let ground: GroundEnv = [(Arc::from("m"), m.clone()), (Arc::from("s"), s.interpret(&self.generic))]
            .into_iter()
            .collect();
        let quot: HashMap<Arc<str>, usize> = [(Arc::from("m"), self.embedding_j(m)?), (Arc::from("s"), self.class_of_name(s)?)]
            .into_iter()
            .collect();
        let mut mismatches = Vec::new();
        for f in &formulas {
            if eval_ground(f, &ground)? != self.satisfies(f, &quot)? {
                mismatches.push(f.clone());
            }
        }
        Ok(Elementarity { checked: formulas.len(), mismatches })
    }

    /// Maximal antichains of the algebra that `U` misses. Always empty on
    /// finite algebras; exposed so callers never assume it silently.
    pub fn missed_antichains(&self) -> Result<Vec<Vec<Mask>>, UltraError> {
        Ok(self
            .universe
            .forcing
            .alg
            .maximal_antichains()?
            .into_iter()
            .filter(|a| !a.iter().any(|&x| self.ultra.contains(x)))
            .collect())
    }
}

impl fmt::Display for QuotientModel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.universe.forcing.poset;
        let alg = &self.universe.forcing.alg;
        writeln!(f, "ultrafilter {} over {} names, {} classes", alg.format(self.ultra.generator), self.universe.len(), self.classes())?;
        let mut sizes = vec![0usize; self.classes()];
        for &c in &self.class_of {
            sizes[c] += 1;
        }
        for c in 0..self.classes() {
            let mem: Vec<String> = self.members[c].iter().map(|d| format!("#{d}")).collect();
            writeln!(f, "  #{c}  {}  size {}  members {{{}}}", self.rep(c).to_dsl(p), sizes[c], mem.join(","))?;
        }
        let img: Vec<String> = self.j_image().iter().map(|(x, c)| format!("j({x}) = #{c}")).collect();
        write!(f, "  {}", img.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Var(usize),
    Class(usize),
}

/// A formula with variables resolved to slots and ground terms to classes
/// of one quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Compiled {
    Eq(Slot, Slot),
    In(Slot, Slot),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Forall(Slot, Box<Compiled>),
    Exists(Slot, Box<Compiled>),
}

impl Compiled {
    /// Evaluates in `m`; `slots` holds the free variables and is restored on return.
    pub fn eval(&self, m: &QuotientModel<'_>, slots: &mut Vec<usize>) -> bool {
        let get = |s: Slot, slots: &[usize]| match s {
            Slot::Var(i) => slots[i],
            Slot::Class(c) => c,
        };
        match self {
            Compiled::Eq(a, b) => get(*a, slots) == get(*b, slots),
            Compiled::In(a, b) => m.member[get(*a, slots)][get(*b, slots)],
            Compiled::Not(a) => !a.eval(m, slots),
            Compiled::And(a, b) => a.eval(m, slots) && b.eval(m, slots),
            Compiled::Or(a, b) => a.eval(m, slots) || b.eval(m, slots),
            Compiled::Forall(t, a) | Compiled::Exists(t, a) => {
                let universal = matches!(self, Compiled::Forall(..));
                let dom = get(*t, slots);
                for &d in &m.members[dom] {
                    slots.push(d);
                    let r = a.eval(m, slots);
                    slots.pop();
                    if r != universal {
                        return !universal;
                    }
                }
                universal
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceIdentity {
    pub lhs: BTreeSet<usize>,
    pub rhs: BTreeSet<usize>,
}

impl TraceIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

#[derive(Clone, Debug)]
pub struct Elementarity {
    pub checked: usize,
    pub mismatches: Vec<Formula>,
}

impl Elementarity {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Every quantifier in `f` ranges over the variable `var`.
pub fn bounded_by(f: &Formula, var: &str) -> bool {
    match f {
        Formula::Eq(..) | Formula::In(..) => true,
        Formula::Not(a) => bounded_by(a, var),
        Formula::And(a, b) | Formula::Or(a, b) => bounded_by(a, var) && bounded_by(b, var),
        Formula::Forall(_, t, a) | Formula::Exists(_, t, a) => {
            matches!(t, Term::Var(v) if &**v == var) && bounded_by(a, var)
        }
    }
}

/// Groups names with `⟦σ = τ⟧ = 1`. Candidates are grouped by their
/// interpretations under every generic filter; membership of a group is
/// then confirmed by the Boolean value, and unconfirmed names start their
/// own group.
pub fn group_boolean_equal(f: &Forcing, names: &[PName]) -> BooleanClasses {
    let one = f.alg.one();
    let generics = f.generic_filters();
    let mut ev = Evaluator::new(f);
    let mut by_key: HashMap<Vec<HFSet>, usize> = HashMap::new();
    let mut group_of = Vec::with_capacity(names.len());
    let mut reps: Vec<usize> = Vec::new();
    let mut second: Vec<Option<usize>> = Vec::new();
    for (i, s) in names.iter().enumerate() {
        let key: Vec<HFSet> = generics.iter().map(|g| s.interpret(g)).collect();
        let g = match by_key.get(&key) {
            Some(&g) if ev.eq(s, &names[reps[g]]) == one => g,
            found => {
                reps.push(i);
                second.push(None);
                if found.is_none() {
                    by_key.insert(key, reps.len() - 1);
                }
                reps.len() - 1
            }
        };
        if reps[g] != i && second[g].is_none() {
            second[g] = Some(i);
        }
        group_of.push(g);
    }
    BooleanClasses { group_of, reps, second }
}

/// Names of a universe grouped by `⟦σ = τ⟧ = 1`.
#[derive(Clone, Debug)]
pub struct BooleanClasses {
    pub group_of: Vec<usize>,
    /// First member of each group.
    pub reps: Vec<usize>,
    /// Second member of each group, if any.
    pub second: Vec<Option<usize>>,
}

impl BooleanClasses {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

/// Checks that the second member of every group has the same Boolean value
/// as its representative on every formula, and the same class in every
/// quotient. Returns the offending `(group, formula)` pairs.
pub fn check_leibniz(
    universe: &Universe,
    groups: &BooleanClasses,
    models: &[QuotientModel<'_>],
    formulas: &[Formula],
    var: &str,
) -> Result<Vec<(usize, Formula)>, UltraError> {
    let var: Arc<str> = Arc::from(var);
    let top = universe.forcing.poset.top();
    let boolean: Vec<Formula> = formulas.iter().map(|f| f.with_check_literals(top)).collect();
    let pairs: Vec<(usize, usize, usize)> = groups
        .second
        .iter()
        .enumerate()
        .filter_map(|(g, s)| s.map(|j| (g, groups.reps[g], j)))
        .collect();
    let out: Vec<Result<Vec<(usize, Formula)>, UltraError>> = pairs
        .par_chunks(64)
        .map(|chunk| {
            let mut ev = Evaluator::new(&universe.forcing);
            let mut bad = Vec::new();
            for &(g, i, j) in chunk {
                if models.iter().any(|m| m.class_of[i] != m.class_of[j]) {
                    bad.push((g, Formula::eq(Term::var(&var), Term::var(&var))));
                }
                let ei: NameEnv = [(var.clone(), universe.names[i].clone())].into_iter().collect();
                let ej: NameEnv = [(var.clone(), universe.names[j].clone())].into_iter().collect();
                for (k, f) in boolean.iter().enumerate() {
                    if ev.value(f, &ei)? != ev.value(f, &ej)? {
                        bad.push((g, formulas[k].clone()));
                    }
                }
            }
            Ok(bad)
        })
        .collect();
    out.into_iter().try_fold(Vec::new(), |mut acc, r| {
        acc.extend(r?);
        Ok(acc)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LosFailure {
    pub formula: Formula,
    pub name: PName,
    pub atom: usize,
    pub value: Mask,
}

#[derive(Clone, Debug, Default)]
pub struct LosReport {
    pub checks: usize,
    pub failures: Vec<LosFailure>,
}

impl LosReport {
    fn merge(mut self, other: LosReport) -> LosReport {
        self.checks += other.checks;
        self.failures.extend(other.failures);
        self
    }
}

/// Łoś for the listed names of the universe bound to `var`, every formula,
/// and every quotient. Each `⟦φ(σ)⟧` is computed once and read against all `U`.
pub fn los_sweep(
    universe: &Universe,
    names: &[usize],
    models: &[QuotientModel<'_>],
    formulas: &[Formula],
    var: &str,
) -> Result<LosReport, UltraError> {
    let var: Arc<str> = Arc::from(var);
    let top = universe.forcing.poset.top();
    let boolean: Vec<Formula> = formulas.iter().map(|f| f.with_check_literals(top)).collect();
    let compiled: Vec<Vec<Compiled>> = models
        .iter()
        .map(|m| formulas.iter().map(|f| m.compile(f, std::slice::from_ref(&var))).collect())
        .collect::<Result<_, _>>()?;
    let batch = FormulaBatch::new(&boolean, std::slice::from_ref(&var))?;
    let chunks: Vec<LosReport> = names
        .par_chunks(256)
        .map(|chunk| {
            let mut ev = Evaluator::new(&universe.forcing);
            let mut run = batch.runner(&universe.forcing);
            let mut rep = LosReport::default();
            let mut slots = Vec::with_capacity(8);
            for &i in chunk {
                let s = &universe.names[i];
                let values = run.values(&mut ev, std::slice::from_ref(s));
                for (k, &v) in values.iter().enumerate() {
                    for (m, cs) in models.iter().zip(&compiled) {
                        rep.checks += 1;
                        slots.clear();
                        slots.push(m.class_of[i]);
                        if cs[k].eval(m, &mut slots) != m.ultra.contains(v) {
                            rep.failures.push(LosFailure { formula: formulas[k].clone(), name: s.clone(), atom: m.atom, value: v });
                        }
                    }
                }
            }
            rep
        })
        .collect();
    Ok(chunks.into_iter().fold(LosReport::default(), LosReport::merge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{ch2, fork3};
    use crate::names::parse_name;
    use crate::semantics::name_env;

    fn hf(s: &str) -> HFSet {
        HFSet::parse(s).unwrap()
    }

    fn fork_universe(rank: u32) -> Universe {
        Universe::new(boolean_forcing(&fork3()).unwrap(), NameSpec::new(rank, 2, 2)).unwrap()
    }

    #[test]
    fn classes_on_fork() {
        let u = fork_universe(1);
        let alg = &u.forcing.alg;
        let ua = ultrafilter_at(alg, "a").unwrap();
        let q = QuotientModel::build(&u, ua).unwrap();
        let p = &u.forcing.poset;
        let s = parse_name("{(chk 0, [a]), (chk 1, [b])}", p, &Default::default()).unwrap();
        assert_eq!(q.class_of_name(&s).unwrap(), q.embedding_j(&hf("{0}")).unwrap());
        let env = name_env([("s", s.clone())]);
        let has0 = Formula::parse("chk 0 in s").unwrap();
        let has1 = Formula::parse("chk 1 in s").unwrap();
        assert_eq!(q.los_sides(&has0, &env).unwrap(), (true, true));
        assert_eq!(q.los_sides(&has1, &env).unwrap(), (false, false));
        assert!(q.j_is_embedding() && q.missed_antichains().unwrap().is_empty());
        let t = parse_name("{(chk 0, [a])}", p, &Default::default()).unwrap();
        let ti = q.check_trace_identity(&t).unwrap();
        assert!(ti.holds() && ti.lhs.len() == 1);
        assert!(q.check_trace_identity(&PName::empty()).unwrap().lhs.is_empty());
        assert!(ultrafilter_at(alg, "c").is_err());
        assert!(QuotientModel::build(&u, alg.principal_filter(alg.one()).unwrap()).is_err());
    }

    #[test]
    fn two_element_algebra_gives_ground_sets() {
        let u = Universe::new(boolean_forcing(&ch2()).unwrap(), NameSpec::new(2, 2, 2)).unwrap();
        let qs = u.quotients().unwrap();
        assert_eq!(qs.len(), 1);
        let q = &qs[0];
        assert!(q.j_is_onto() && q.j_is_embedding());
        let distinct: BTreeSet<HFSet> = u.names.iter().map(|s| s.interpret(&q.generic)).collect();
        assert_eq!(distinct.len(), q.classes());
        assert_eq!(q.embedding_j(&HFSet::empty()).unwrap(), q.class_of_name(&PName::empty()).unwrap());
    }

    #[test]
    fn los_on_small_universe() {
        let u = fork_universe(1);
        let qs = u.quotients().unwrap();
        let fs = crate::harness::FormulaSpace::standard(2).enumerate().unwrap();
        let all: Vec<usize> = (0..u.len()).collect();
        let r = los_sweep(&u, &all, &qs, &fs, "s").unwrap();
        assert!(r.failures.is_empty());
        assert_eq!(r.checks, u.len() * fs.len() * 2);
        for q in &qs {
            assert!(q.j_is_onto());
            for s in u.names.iter().filter(|s| s.is_flat()) {
                assert!(q.check_trace_identity(s).unwrap().holds());
            }
        }
    }

    #[test]
    fn boolean_classes_respect_leibniz() {
        let u = fork_universe(2);
        let groups = u.boolean_classes();
        assert!(groups.len() < u.len() && groups.second.iter().any(|s| s.is_some()));
        let qs = u.quotients().unwrap();
        let fs = crate::harness::FormulaSpace::standard(2).enumerate().unwrap();
        assert!(check_leibniz(&u, &groups, &qs, &fs, "s").unwrap().is_empty());
    }

    #[test]
    fn elementarity() {
        let u = fork_universe(1);
        let p = &u.forcing.poset;
        let s = parse_name("{(chk 0, [a]), (chk 1, [b])}", p, &Default::default()).unwrap();
        for q in u.quotients().unwrap() {
            let e = q.check_elementarity(&hf("{0,1}"), &s, 3).unwrap();
            assert!(e.holds() && e.checked > 100);
            assert!(q.check_elementarity(&HFSet::empty(), &s, 2).unwrap().holds());
        }
        assert!(!bounded_by(&Formula::parse("forall x in s (x = x)").unwrap(), "m"));
    }
}
