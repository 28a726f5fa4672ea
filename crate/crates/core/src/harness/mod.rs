//! Instance enumeration, exhaustive property suites, and replayable reports.

use thiserror::Error;

mod enumerate;
pub mod ground;
mod report;
mod space;
mod suites;

pub use enumerate::{
    enumerate_names, enumerate_names_reduced, enumerate_posets, enumerate_posets_up_to, isomorphic, FormulaSpace, NameSpec,
    MAX_ENUM_POSET, MAX_NAMES,
};
pub use ground::GroundTable;
pub use report::{Bundle, Outcome, PropertyResult, SuiteReport};
pub use space::{InstanceSpace, MAX_SPACE_RANK};
pub use suites::{nsep4_pair, replay, run_suite, Suite};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("poset size {k} is outside 1..={cap}")]
    PosetCap { k: usize, cap: usize },
    #[error("about {estimate} names requested; the cap is {cap}")]
    NameCap { estimate: usize, cap: usize },
    #[error("formula depth {depth} exceeds the cap of {cap}")]
    DepthCap { depth: usize, cap: usize },
    #[error("instance space: {0}")]
    Space(String),
    #[error("bundle: {0}")]
    Bundle(String),
    #[error("{0}")]
    Io(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error(transparent)]
    Order(#[from] crate::order::OrderError),
}
