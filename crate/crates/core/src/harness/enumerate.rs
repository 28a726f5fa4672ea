//! Exhaustive enumeration of small posets, names and formulas.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::{self, Mask};
use crate::hf::HFSet;
use crate::names::PName;
use crate::order::Poset;
use crate::semantics::{Formula, Term};

use super::HarnessError;

/// Largest poset the enumerator will produce.
pub const MAX_ENUM_POSET: usize = 6;

/// Element ids for enumerated posets: the top is `1`, the rest `a`, `b`, ...
fn enum_ids(k: usize) -> Vec<String> {
    std::iter::once("1".to_string())
        .chain((0..k - 1).map(|i| ((b'a' + i as u8) as char).to_string()))
        .collect()
}

/// Strict order on `n` points as a bit matrix `lt[i]` = points strictly below `i`.
type Strict = Vec<Mask>;

/// Smallest encoding over all relabelings.
fn canonical_code(lt: &Strict) -> Vec<Mask> {
    let n = lt.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<Mask>> = None;
    permute(&mut perm, 0, &mut |p| {
        let mut code = vec![0; n];
        for i in 0..n {
            for j in bits::ones(lt[i]) {
                code[p[i]] |= bits::bit(p[j]);
            }
        }
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    });
    best.unwrap_or_default()
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// All posets with a top on exactly `k` elements, one per isomorphism class,
/// ordered by canonical code.
pub fn enumerate_posets(k: usize) -> Result<Vec<Poset>, HarnessError> {
    if k == 0 || k > MAX_ENUM_POSET {
        return Err(HarnessError::PosetCap { k, cap: MAX_ENUM_POSET });
    }
    let n = k - 1;
    // Every order has a linear extension, so relations going from a lower to
    // a higher label cover every class.
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let mut codes: BTreeSet<Vec<Mask>> = BTreeSet::new();
    for sel in 0u64..(1 << pairs.len()) {
        let mut lt: Strict = vec![0; n];
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if sel >> b & 1 == 1 {
                lt[j] |= bits::bit(i);
            }
        }
        let transitive = (0..n).all(|j| bits::ones(lt[j]).all(|i| bits::subset(lt[i], lt[j])));
        if transitive {
            codes.insert(canonical_code(&lt));
        }
    }
    let ids = enum_ids(k);
    codes
        .into_iter()
        .enumerate()
        .map(|(idx, code)| {
            // Point i of the code becomes element i+1; element 0 is the top.
            let mut below = vec![0; k];
            below[0] = bits::full(k);
            for i in 0..n {
                below[i + 1] = (code[i] << 1) | bits::bit(i + 1);
            }
            Poset::from_relation(&format!("P{k}_{idx}"), ids.clone(), below, Some(0))
                .map_err(HarnessError::from)
        })
        .collect()
}

/// Same order up to relabeling. Both posets need at most
/// [`MAX_ENUM_POSET`] elements and a top.
pub fn isomorphic(a: &Poset, b: &Poset) -> bool {
    a.len() == b.len() && a.len() <= MAX_ENUM_POSET && canonical_code(&strict_below_top(a)) == canonical_code(&strict_below_top(b))
}

fn strict_below_top(p: &Poset) -> Strict {
    let rest: Vec<usize> = (0..p.len()).filter(|&q| q != p.top()).collect();
    rest.iter()
        .map(|&j| {
            rest.iter()
                .enumerate()
                .filter(|&(_, &i)| i != j && p.leq(i, j))
                .fold(0, |m, (k, _)| m | bits::bit(k))
        })
        .collect()
}

/// Posets with a top on 1 to `k` elements.
pub fn enumerate_posets_up_to(k: usize) -> Result<Vec<Poset>, HarnessError> {
    let mut out = Vec::new();
    for i in 1..=k {
        out.extend(enumerate_posets(i)?);
    }
    Ok(out)
}

/// Caps for name enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameSpec {
    /// Hereditary level: level 0 is the leaves, level `r` the sets whose
    /// children have level below `r`.
    pub rank: u32,
    /// Urelements `0..base`.
    pub base: u32,
    /// Most entries per set, at every level.
    pub entries: usize,
    /// Most conditions per child, at every level.
    #[serde(default)]
    pub bounded: Option<usize>,
}

impl NameSpec {
    pub fn new(rank: u32, base: u32, entries: usize) -> Self {
        NameSpec { rank, base, entries, bounded: None }
    }

    pub fn bounded(mut self, m: usize) -> Self {
        self.bounded = Some(m);
        self
    }
}

/// Hard cap on the number of names a single enumeration may produce.
pub const MAX_NAMES: usize = 2_000_000;

/// All names meeting `spec` over the conditions of `p`, sorted, without duplicates.
pub fn enumerate_names(p: &Poset, spec: &NameSpec) -> Result<Vec<PName>, HarnessError> {
    enumerate_names_reduced(p, spec, |v| v)
}

/// As [`enumerate_names`], passing each level through `reduce` before the
/// next level is built from it.
pub fn enumerate_names_reduced<R>(p: &Poset, spec: &NameSpec, mut reduce: R) -> Result<Vec<PName>, HarnessError>
where
    R: FnMut(Vec<PName>) -> Vec<PName>,
{
    let leaves: Vec<PName> = (0..spec.base).map(PName::leaf).collect();
    let mut level = leaves.clone();
    for _ in 0..spec.rank {
        let entries: Vec<(PName, usize)> = level
            .iter()
            .flat_map(|c| (0..p.len()).map(move |q| (c.clone(), q)))
            .collect();
        let estimate = (0..=spec.entries).fold(0f64, |acc, k| acc + binom(entries.len(), k));
        if estimate > MAX_NAMES as f64 {
            return Err(HarnessError::NameCap { estimate: estimate as usize, cap: MAX_NAMES });
        }
        let mut next = leaves.clone();
        let mut pick = Vec::new();
        subsets(&entries, spec.entries, 0, &mut pick, &mut |sel| {
            let s = PName::set(sel.iter().cloned());
            if spec.bounded.is_none_or(|m| s.is_lambda_bounded(m)) {
                next.push(s);
            }
        });
        next.sort();
        next.dedup();
        level = reduce(next);
    }
    Ok(level)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subsets<T: Clone>(items: &[T], max: usize, from: usize, pick: &mut Vec<T>, f: &mut dyn FnMut(&[T])) {
    f(pick);
    if pick.len() == max {
        return;
    }
    for i in from..items.len() {
        pick.push(items[i].clone());
        subsets(items, max, i + 1, pick, f);
        pick.pop();
    }
}

/// A canonical finite family of bounded formulas.
///
/// Depth counts every connective and quantifier. Atoms relate the focus
/// (innermost bound variable, or any free variable at the outside) to the
/// other terms. Binary connectives join two atoms, negation applies to any
/// non-negated formula, and quantifiers range over variables with bodies one
/// level shallower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaSpace {
    pub vars: Vec<String>,
    pub literals: Vec<HFSet>,
    pub depth: usize,
}

const BOUND: [&str; 4] = ["x", "y", "z", "w"];

#[derive(Clone)]
struct Ctx {
    free: Vec<Arc<str>>,
    bound: Vec<Arc<str>>,
    lits: Vec<HFSet>,
}

impl Ctx {
    fn terms(&self) -> Vec<Term> {
        self.free
            .iter()
            .chain(&self.bound)
            .map(|v| Term::Var(v.clone()))
            .chain(self.lits.iter().map(|x| Term::Lit(x.clone())))
            .collect()
    }

    fn focus(&self) -> Option<Term> {
        self.bound.last().map(|v| Term::Var(v.clone()))
    }

    fn atoms(&self) -> Vec<Formula> {
        let terms = self.terms();
        let focus = self.focus();
        let mut out = Vec::new();
        for (i, a) in terms.iter().enumerate() {
            for (j, b) in terms.iter().enumerate() {
                if matches!((a, b), (Term::Lit(_), Term::Lit(_))) {
                    continue;
                }
                if let Some(f) = &focus {
                    if a != f && b != f {
                        continue;
                    }
                }
                if i < j {
                    out.push(Formula::Eq(a.clone(), b.clone()));
                }
                out.push(Formula::In(a.clone(), b.clone()));
            }
        }
        out
    }

    fn bind(&self) -> Option<Ctx> {
        let v = BOUND.get(self.bound.len())?;
        let mut c = self.clone();
        c.bound.push(Arc::from(*v));
        Some(c)
    }

    fn bounds(&self) -> Vec<Term> {
        self.free.iter().chain(&self.bound).map(|v| Term::Var(v.clone())).collect()
    }
}

impl FormulaSpace {
    pub fn new<S: AsRef<str>>(vars: &[S], literals: Vec<HFSet>, depth: usize) -> Self {
        FormulaSpace { vars: vars.iter().map(|v| v.as_ref().to_string()).collect(), literals, depth }
    }

    /// One free variable `s` with literals `0` and `{0}`.
    pub fn standard(depth: usize) -> Self {
        FormulaSpace::new(&["s"], vec![HFSet::atom(0), HFSet::set([HFSet::atom(0)])], depth)
    }

    pub fn enumerate(&self) -> Result<Vec<Formula>, HarnessError> {
        if self.depth > BOUND.len() {
            return Err(HarnessError::DepthCap { depth: self.depth, cap: BOUND.len() });
        }
        let ctx = Ctx {
            free: self.vars.iter().map(|v| Arc::from(v.as_str())).collect(),
            bound: Vec::new(),
            lits: self.literals.clone(),
        };
        Ok((0..=self.depth).flat_map(|d| exact(&ctx, d)).collect())
    }
}

fn exact(ctx: &Ctx, d: usize) -> Vec<Formula> {
    if d == 0 {
        return ctx.atoms();
    }
    let lower = exact(ctx, d - 1);
    let mut out: Vec<Formula> = lower
        .iter()
        .filter(|f| !matches!(f, Formula::Not(_)))
        .map(|f| Formula::not(f.clone()))
        .collect();
    if d == 1 {
        for (i, a) in lower.iter().enumerate() {
            for b in &lower[i + 1..] {
                out.push(Formula::and(a.clone(), b.clone()));
                out.push(Formula::or(a.clone(), b.clone()));
            }
        }
    }
    if let Some(inner) = ctx.bind() {
        let v = inner.bound.last().expect("just bound").clone();
        let bodies = exact(&inner, d - 1);
        for t in ctx.bounds() {
            for body in &bodies {
                out.push(Formula::Forall(v.clone(), t.clone(), Box::new(body.clone())));
                out.push(Formula::Exists(v.clone(), t.clone(), Box::new(body.clone())));
            }
        }
    }
    out
}
