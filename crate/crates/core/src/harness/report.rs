//! Suite results, counterexample bundles and their text forms.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bits::{self, Mask};
use crate::hf::HFSet;
use crate::order::Poset;
use crate::principles::Largeness;

/// Findings kept per probe property.
const MAX_FINDINGS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
}

impl Outcome {
    pub fn of(ok: bool) -> Outcome {
        if ok { Outcome::Holds } else { Outcome::Fails }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
        })
    }
}

/// One instance of one property, self-contained enough to re-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub suite: String,
    pub property: String,
    pub verdict: Outcome,
    pub detail: String,
    /// Poset in the poset language.
    pub poset: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub names: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<HFSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<HFSet>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub largeness: Option<Largeness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Atom label of an ultrafilter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<String>,
    /// Name universe as `rank,base,entries`, or `boolean` for the Boolean
    /// completion itself. A trailing `,grouped` marks Boolean-equality groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<String>,
}

impl Bundle {
    pub fn new(suite: &str, property: &str, p: &Poset) -> Bundle {
        Bundle {
            suite: suite.into(),
            property: property.into(),
            verdict: Outcome::Fails,
            detail: String::new(),
            poset: p.to_dsl(),
            names: BTreeMap::new(),
            formula: None,
            cond: None,
            filter: None,
            value: None,
            sets: None,
            values: None,
            largeness: None,
            k: None,
            m: None,
            atom: None,
            universe: None,
        }
    }

    pub fn name(mut self, id: &str, dsl: String) -> Self {
        self.names.insert(id.into(), dsl);
        self
    }

    pub fn formula(mut self, f: impl ToString) -> Self {
        self.formula = Some(f.to_string());
        self
    }

    pub fn cond(mut self, p: &Poset, q: usize) -> Self {
        self.cond = Some(p.id(q).to_string());
        self
    }

    pub fn filter(mut self, p: &Poset, g: Mask) -> Self {
        self.filter = Some(ids(p, g));
        self
    }

    pub fn value(mut self, x: HFSet) -> Self {
        self.value = Some(x);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn verdict(mut self, v: Outcome) -> Self {
        self.verdict = v;
        self
    }

    pub fn sets(mut self, p: &Poset, sets: &[Mask]) -> Self {
        self.sets = Some(sets.iter().map(|&d| ids(p, d)).collect());
        self
    }

    pub fn parse(text: &str) -> Result<Bundle, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Bundle(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("bundles serialize")
    }

    pub fn load(path: &Path) -> Result<Bundle, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Bundle::parse(&text)
    }

    pub fn replay_command(path: &Path) -> String {
        format!("forcelab replay {}", path.display())
    }
}

pub(crate) fn ids(p: &Poset, m: Mask) -> Vec<String> {
    bits::ones(m).map(|q| p.id(q).to_string()).collect()
}

/// Running count for one property.
#[derive(Clone, Debug, Default)]
pub(crate) struct Tally {
    pub instances: u64,
    pub failures: u64,
    pub first: Option<Bundle>,
    pub findings: Vec<String>,
}

impl Tally {
    /// Counts one instance; the bundle is built only for the first failure.
    pub fn check(&mut self, ok: bool, bundle: impl FnOnce() -> Bundle) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(bundle());
            }
        }
    }

    /// Counts `n` instances of which `failed` fail.
    pub fn count(&mut self, n: u64, failed: u64, bundle: impl FnOnce() -> Bundle) {
        self.instances += n;
        if failed > 0 {
            self.failures += failed;
            if self.first.is_none() {
                self.first = Some(bundle());
            }
        }
    }

    pub fn finding(&mut self, line: String) {
        if self.findings.len() < MAX_FINDINGS {
            self.findings.push(line);
        }
    }

    pub fn absorb(&mut self, o: Tally) {
        self.instances += o.instances;
        self.failures += o.failures;
        if self.first.is_none() {
            self.first = o.first;
        }
        let room = MAX_FINDINGS.saturating_sub(self.findings.len());
        self.findings.extend(o.findings.into_iter().take(room));
    }
}

/// Property tallies of one suite, in registration order.
#[derive(Clone, Debug)]
pub(crate) struct Sheet {
    pub suite: &'static str,
    pub props: Vec<(&'static str, bool)>,
    pub tallies: Vec<Tally>,
    pub notes: Vec<String>,
}

impl Sheet {
    /// `props` lists `(id, probe)`.
    pub fn new(suite: &'static str, props: &[(&'static str, bool)]) -> Sheet {
        Sheet { suite, props: props.to_vec(), tallies: vec![Tally::default(); props.len()], notes: Vec::new() }
    }

    pub fn absorb(&mut self, o: Sheet) {
        for (t, u) in self.tallies.iter_mut().zip(o.tallies) {
            t.absorb(u);
        }
        self.notes.extend(o.notes);
    }

    pub fn results(self, elapsed: Duration) -> Vec<PropertyResult> {
        let n = self.props.len();
        let mut out: Vec<PropertyResult> = self
            .props
            .into_iter()
            .zip(self.tallies)
            .map(|((id, probe), t)| PropertyResult {
                suite: self.suite.to_string(),
                property: id.to_string(),
                probe,
                instances: t.instances,
                failures: t.failures,
                counterexample: t.first,
                findings: t.findings,
                notes: Vec::new(),
                elapsed: Duration::ZERO,
            })
            .collect();
        if n > 0 {
            out[0].elapsed = elapsed;
            out[0].notes = self.notes;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PropertyResult {
    pub suite: String,
    pub property: String,
    /// Probe properties report without failing the run.
    pub probe: bool,
    pub instances: u64,
    pub failures: u64,
    /// First failing instance in enumeration order.
    pub counterexample: Option<Bundle>,
    pub findings: Vec<String>,
    pub notes: Vec<String>,
    /// Wall clock of the whole suite, carried on its first property.
    pub elapsed: Duration,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.probe || self.failures == 0
    }

    pub fn machine_line(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.suite, self.property, self.instances, self.failures)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn suite<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a PropertyResult> {
        self.results.iter().filter(move |r| r.suite == name)
    }

    pub fn property(&self, suite: &str, id: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.suite == suite && r.property == id)
    }

    /// Wall clock of a suite.
    pub fn elapsed(&self, suite: &str) -> Duration {
        self.suite(suite).map(|r| r.elapsed).sum()
    }

    pub fn machine_lines(&self) -> Vec<String> {
        self.results.iter().map(PropertyResult::machine_line).collect()
    }

    /// Writes every counterexample and probe finding as a TOML bundle into
    /// `dir`, returning the paths.
    pub fn write_bundles(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        let mut out = Vec::new();
        for r in &self.results {
            if let Some(b) = &r.counterexample {
                std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(e.to_string()))?;
                let path = dir.join(format!("{}-{}.toml", r.suite, r.property));
                std::fs::write(&path, b.to_toml()).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
                out.push(path);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut last = "";
        for r in &self.results {
            if r.suite != last {
                writeln!(f, "suite {} ({:.1}s)", r.suite, self.elapsed(&r.suite).as_secs_f64())?;
                last = &r.suite;
            }
            let status = match (r.failures, r.probe) {
                (0, _) => "ok",
                (_, true) => "finding",
                _ => "FAIL",
            };
            writeln!(f, "  {:<6} {:<28} {:>10} instances {:>6} failures", status, r.property, r.instances, r.failures)?;
            for n in &r.notes {
                writeln!(f, "         {n}")?;
            }
            for x in &r.findings {
                writeln!(f, "         {x}")?;
            }
            if let Some(b) = &r.counterexample {
                writeln!(f, "         first: {}", b.detail)?;
            }
        }
        Ok(())
    }
}
