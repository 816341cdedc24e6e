//! In-memory classification-projection model: ontologies at the type level,
//! collections at the instance level.

mod builder;
mod collection;
pub mod names;
mod ontology;

use alloc::vec::Vec;

pub use builder::{CollectionBuilder, LocatedError};
pub use collection::{
    Collection, FunctionInstance, Literal, ObjectId, ObjectInstance, RelationInstance, Target,
};
pub use ontology::{
    Import, Mode, Ontology, Origin, SubtypeAxiom, TypeDecl, TypeId, TypeKind, METATYPES,
};
pub(crate) use ontology::supertypes_in;

/// Source position (1-based; zero means unknown).
///
/// Positions are bookkeeping for diagnostics: two values that differ only in
/// where they were read from compare equal.
#[derive(Clone, Copy, Debug, Default)]
pub struct Loc {
    pub line: u32,
    pub column: u32,
}

impl Loc {
    pub fn new(line: u32, column: u32) -> Self {
        Loc { line, column }
    }

    pub fn is_known(&self) -> bool {
        self.line > 0
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Loc {}

/// An ontology paired with the instance collections classified by it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub ontology: Ontology,
    pub collections: Vec<Collection>,
}

impl KnowledgeBase {
    pub fn new(ontology: Ontology) -> Self {
        KnowledgeBase {
            ontology,
            collections: Vec::new(),
        }
    }

    pub fn with_collection(mut self, collection: Collection) -> Self {
        self.collections.push(collection);
        self
    }
}
