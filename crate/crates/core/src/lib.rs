//! Core knowledge model for OML/CKML: types, instances, axioms and checks.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It models the
//! classification-projection diagram: ontologies of entity and binary-relation
//! types on one side, collections of classified instances on the other.
//!
//! * [`model`] holds ontologies, collections and name resolution.
//! * [`checker`] computes subtype/classification closures and enforces the
//!   core constraints.
//! * [`calculus`] gives identity, composition and transpose on relation types
//!   with an extensional semantics over collections.
//! * [`hot`] adds higher-order assertions (types classified by metatypes, own
//!   slots) and their classification check.
//! * [`dtd`] compiles an ontology into a domain-specific DTD.
//! * [`view`] flattens a knowledge base into a comparable semantic value.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calculus;
pub mod checker;
pub mod diagnostic;
pub mod dtd;
mod error;
pub mod hot;
pub mod model;
pub mod view;

pub use diagnostic::{Code, Diagnostic, Location, Severity};
pub use error::{Error, Result};
pub use model::{
    Collection, CollectionBuilder, FunctionInstance, LocatedError, KnowledgeBase, Literal, Loc, Mode, ObjectId,
    ObjectInstance, Ontology, RelationInstance, SubtypeAxiom, Target, TypeDecl, TypeId, TypeKind,
};
