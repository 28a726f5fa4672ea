//! Finite-scale forcing workbench.
//!
//! Posets and their Boolean completions, names and their interpretations,
//! Boolean-valued semantics for bounded formulas, dense-set synthesis,
//! checkers for forcing axioms and name principles, Boolean ultrapowers,
//! and the exhaustive harness tying them together.

pub mod batch;
pub mod bits;
pub mod boolcomp;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod hf;
pub mod lexer;
pub mod names;
pub mod order;
pub mod principles;
pub mod semantics;
pub mod synth;
pub mod ultrapower;

pub use boolcomp::{BoolAlg, Forcing};
pub use error::Error;
pub use hf::HFSet;
pub use names::PName;
pub use order::{Filter, Poset};
