//! Workbench for intuitionistic modal logics between CK and IK.
//!
//! The library is organised around six modules:
//!
//! - [`syntax`]: formula AST, text grammar, substitution, schema matching, enumeration
//! - [`hilbert`]: Hilbert-style calculus over consecutions `Γ ⊢ φ`, proof objects, a
//!   checker, transformers for the admissible rules, and a library of built-in derivations
//! - [`kripke`]: finite birelational frames and models with an exploding world,
//!   the forcing relation, and validity checking
//! - [`conditions`]: decision procedures for the frame conditions matching the
//!   axioms Nd, Cd, Idb, Ndb
//! - [`search`]: exhaustive frame enumeration, correspondence audits, and bounded
//!   countermodel search
//! - [`transform`]: validity-preserving frame transformations and their
//!   preservation checks

pub mod conditions;
pub mod hilbert;
pub mod kripke;
pub mod search;
pub mod syntax;
pub mod transform;

pub use hilbert::{AxiomName, AxiomSet, Consecution, Proof};
pub use kripke::{Frame, Model, Valuation, WorldSet};
pub use syntax::{Formula, ParseError, Substitution};
