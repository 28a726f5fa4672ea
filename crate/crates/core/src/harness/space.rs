//! The instance space the suites sweep.

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate_names, enumerate_posets_up_to, isomorphic, NameSpec, MAX_ENUM_POSET};
use super::HarnessError;
use crate::fixtures;
use crate::names::PName;
use crate::order::Poset;
use crate::semantics::DEFAULT_DEPTH_CAP;

/// Highest name rank a space may request.
pub const MAX_SPACE_RANK: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstanceSpace {
    /// Posets with a top on up to this many elements, one per isomorphism class.
    pub max_poset: usize,
    pub names: NameSpec,
    /// Formula depth cap.
    pub depth: usize,
    /// Built-in fixtures stand in for their isomorphism classes, and larger
    /// fixtures are appended.
    pub fixtures: bool,
    /// Draw this many names per poset instead of all of them.
    pub sample: Option<usize>,
    /// Seed for sampling; ignored by exhaustive runs.
    pub seed: u64,
}

impl Default for InstanceSpace {
    fn default() -> Self {
        InstanceSpace { max_poset: 5, names: NameSpec::new(2, 2, 2), depth: 3, fixtures: true, sample: None, seed: 0 }
    }
}

impl InstanceSpace {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.max_poset == 0 || self.max_poset > MAX_ENUM_POSET {
            return Err(HarnessError::PosetCap { k: self.max_poset, cap: MAX_ENUM_POSET });
        }
        if self.depth > DEFAULT_DEPTH_CAP {
            return Err(HarnessError::DepthCap { depth: self.depth, cap: DEFAULT_DEPTH_CAP });
        }
        if self.names.rank > MAX_SPACE_RANK {
            return Err(HarnessError::Space(format!("name rank {} exceeds {MAX_SPACE_RANK}", self.names.rank)));
        }
        if self.names.base == 0 || self.names.base > 4 {
            return Err(HarnessError::Space("base must be in 1..=4".into()));
        }
        Ok(())
    }

    pub fn is_exhaustive(&self) -> bool {
        self.sample.is_none()
    }

    /// Enumerated posets in order, with fixtures in place of their classes.
    pub fn posets(&self) -> Result<Vec<Poset>, HarnessError> {
        self.validate()?;
        let mut out = enumerate_posets_up_to(self.max_poset)?;
        if self.fixtures {
            for fx in fixtures::builtins() {
                match out.iter().position(|p| isomorphic(p, &fx)) {
                    Some(i) => out[i] = fx,
                    None => out.push(fx),
                }
            }
        }
        Ok(out)
    }

    /// The space's names over `p`, or a seeded sample of them.
    pub fn names_on(&self, p: &Poset, index: usize, spec: &NameSpec) -> Result<Vec<PName>, HarnessError> {
        let all = enumerate_names(p, spec)?;
        Ok(match self.sample {
            Some(n) if n < all.len() => {
                let mut rng = StdRng::seed_from_u64(self.seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let mut pick = rand::seq::index::sample(&mut rng, all.len(), n).into_vec();
                pick.sort_unstable();
                pick.into_iter().map(|i| all[i].clone()).collect()
            }
            _ => all,
        })
    }

    /// The space's caps with the rank lowered to `rank`.
    pub fn at_rank(&self, rank: u32) -> NameSpec {
        NameSpec { rank: rank.min(self.names.rank), ..self.names.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_space() {
        let s = InstanceSpace::default();
        let ps = s.posets().unwrap();
        assert_eq!(ps.len(), 1 + 1 + 2 + 5 + 16);
        for name in ["CH2", "FORK3", "NSEP4", "NWM5"] {
            assert_eq!(ps.iter().filter(|p| p.name() == name).count(), 1, "{name}");
        }
        let small = InstanceSpace { max_poset: 3, ..InstanceSpace::default() };
        let ps = small.posets().unwrap();
        assert_eq!(ps.len(), 4 + 2);
        assert_eq!(ps[4].name(), "NSEP4");
    }

    #[test]
    fn sampling_is_seeded() {
        let p = fixtures::fork3();
        let s = InstanceSpace { sample: Some(10), seed: 7, ..InstanceSpace::default() };
        let a = s.names_on(&p, 2, &s.names).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, s.names_on(&p, 2, &s.names).unwrap());
        let all = InstanceSpace::default().names_on(&p, 2, &s.names).unwrap();
        assert!(all.len() > 10 && a.iter().all(|x| all.contains(x)));
        assert!(InstanceSpace { depth: 4, ..InstanceSpace::default() }.validate().is_err());
    }
}
