//! Interaction trees with deterministic CSP and Circus operators, and bounded
//! checkers for their trace, failure and divergence semantics.

pub mod circus;
pub mod csp;
pub mod gen;
pub mod itree;
pub mod laws;
pub mod optics;
pub mod pfun;
pub mod semantics;

pub use itree::{ITree, KTree, Node, Output, Verdict};
pub use optics::{Event, Value};
pub use pfun::PFun;
