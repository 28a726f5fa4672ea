//! Hereditarily finite sets over natural-number urelements.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SyntaxError;
use crate::lexer::{Cursor, Tok};

/// An urelement is distinct from every set, including `{}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum HFSet {
    Atom(u32),
    Set(BTreeSet<HFSet>),
}

impl HFSet {
    pub fn empty() -> HFSet {
        HFSet::Set(BTreeSet::new())
    }

    pub fn atom(x: u32) -> HFSet {
        HFSet::Atom(x)
    }

    pub fn set<I: IntoIterator<Item = HFSet>>(xs: I) -> HFSet {
        HFSet::Set(xs.into_iter().collect())
    }

    /// `{0, 1, ..., n-1}` as urelements.
    pub fn base(n: u32) -> HFSet {
        HFSet::set((0..n).map(HFSet::Atom))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, HFSet::Atom(_))
    }

    pub fn members(&self) -> Option<&BTreeSet<HFSet>> {
        match self {
            HFSet::Set(s) => Some(s),
            HFSet::Atom(_) => None,
        }
    }

    pub fn contains(&self, x: &HFSet) -> bool {
        self.members().is_some_and(|s| s.contains(x))
    }

    /// Urelements have depth 0; a set sits one above its deepest member.
    pub fn depth(&self) -> u32 {
        match self {
            HFSet::Atom(_) => 0,
            HFSet::Set(s) => s.iter().map(|m| m.depth() + 1).max().unwrap_or(0),
        }
    }

    /// Largest cardinality of any set in the transitive closure.
    pub fn max_width(&self) -> usize {
        match self {
            HFSet::Atom(_) => 0,
            HFSet::Set(s) => s.iter().map(HFSet::max_width).fold(s.len(), usize::max),
        }
    }

    pub fn parse(text: &str) -> Result<HFSet, SyntaxError> {
        let mut cur = Cursor::new(text)?;
        let x = parse_hf_at(&mut cur)?;
        if !cur.at_end() {
            return Err(cur.unexpected("end of input"));
        }
        Ok(x)
    }
}

pub(crate) fn parse_hf_at(cur: &mut Cursor) -> Result<HFSet, SyntaxError> {
    match cur.peek() {
        Some(Tok::Word(w)) => {
            let x = w
                .parse::<u32>()
                .map_err(|_| cur.error(format!("expected a natural number, found `{w}`")))?;
            cur.next();
            Ok(HFSet::Atom(x))
        }
        Some(Tok::Punct('∅')) => {
            cur.next();
            Ok(HFSet::empty())
        }
        Some(Tok::Punct('{')) => {
            cur.next();
            let mut s = BTreeSet::new();
            if cur.eat_punct('}') {
                return Ok(HFSet::Set(s));
            }
            loop {
                s.insert(parse_hf_at(cur)?);
                if cur.eat_punct('}') {
                    return Ok(HFSet::Set(s));
                }
                cur.expect_punct(',')?;
            }
        }
        _ => Err(cur.unexpected("a hereditarily finite set")),
    }
}

impl TryFrom<String> for HFSet {
    type Error = SyntaxError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        HFSet::parse(&s)
    }
}

impl From<HFSet> for String {
    fn from(x: HFSet) -> String {
        x.to_string()
    }
}

impl fmt::Display for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HFSet::Atom(x) => write!(f, "{x}"),
            HFSet::Set(s) => {
                f.write_str("{")?;
                for (i, m) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{m}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let x = HFSet::parse("{0, 1, {0}}").unwrap();
        assert_eq!(x.to_string(), "{0,1,{0}}");
        assert_eq!(x.depth(), 2);
        assert_eq!(HFSet::parse("{}").unwrap(), HFSet::empty());
        assert_eq!(HFSet::parse("{∅}").unwrap(), HFSet::parse("{{}}").unwrap());
        assert_eq!(HFSet::parse("{1,1,0}").unwrap(), HFSet::base(2));
        assert!(HFSet::parse("{0,").is_err());
        assert!(HFSet::parse("{a}").is_err());
    }

    #[test]
    fn urelements_are_not_sets() {
        assert_ne!(HFSet::atom(0), HFSet::empty());
        assert!(!HFSet::atom(0).contains(&HFSet::atom(0)));
        assert_eq!(HFSet::empty().depth(), 0);
        assert_eq!(HFSet::parse("{{{}}}").unwrap().depth(), 2);
    }
}
