//! Proof search, proof checking and countermodel extraction for Goedel-Loeb
//! provability logic (GL) and its intuitionistic variant (IGL).
//!
//! The toolkit works with labelled sequents over a transitive accessibility
//! relation.  Proofs are finite graphs with back-edges; a size-change style
//! progress condition separates genuine cyclic proofs from mere preproofs.
//! Failed searches yield saturated refutation trees from which finite
//! birelational / Kripke countermodels are read off.

pub mod certificates;
pub mod countermodel;
pub mod cutelim;
pub mod cyclic;
pub mod formula;
pub mod prover;
pub mod rules;
pub mod semantics;
pub mod sequent;

pub use cyclic::{CyclicProof, NodeId, ProofNode, Step};
pub use formula::{Formula, Label};
pub use rules::{RuleInstance, RuleName, SystemId};
pub use sequent::{DisjFormula, LabelledFormula, Sequent};
