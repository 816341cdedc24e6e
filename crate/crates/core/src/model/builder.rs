use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Collection, Loc, ObjectId, Ontology, Target, TypeId, TypeKind};
use crate::Error;

/// A model error tied to the position of the construct that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatedError {
    pub error: Error,
    pub loc: Loc,
}

impl fmt::Display for LocatedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.loc.is_known() {
            write!(f, "{}:{}: {}", self.loc.line, self.loc.column, self.error)
        } else {
            self.error.fmt(f)
        }
    }
}

impl core::error::Error for LocatedError {}

trait At<T> {
    fn at(self, loc: Loc) -> Result<T, LocatedError>;
}

impl<T> At<T> for Result<T, Error> {
    fn at(self, loc: Loc) -> Result<T, LocatedError> {
        self.map_err(|error| LocatedError { error, loc })
    }
}

enum Source {
    Object(ObjectId),
    Named(String),
}

enum Link {
    Relation(Vec<(String, Loc)>),
    Function(String),
}

struct Pending {
    source: Source,
    target: String,
    link: Link,
    loc: Loc,
}

/// Builds a collection from names, deferring `target.Instance` resolution
/// until every object is known so forward references work.
pub struct CollectionBuilder<'a> {
    ont: &'a Ontology,
    coll: Collection,
    pending: Vec<Pending>,
}

impl<'a> CollectionBuilder<'a> {
    pub fn new(ont: &'a Ontology) -> Self {
        CollectionBuilder {
            ont,
            coll: Collection::new(),
            pending: Vec::new(),
        }
    }

    pub fn collection_mut(&mut self) -> &mut Collection {
        &mut self.coll
    }

    pub fn object(&mut self, id: Option<&str>, about: Option<&str>, loc: Loc) -> Result<ObjectId, LocatedError> {
        self.coll.push_object(id, about, loc).at(loc)
    }

    pub fn classify(&mut self, obj: ObjectId, type_name: &str, loc: Loc) -> Result<(), LocatedError> {
        let t = self.ont.resolve_type_name(type_name).at(loc)?;
        self.coll.classify(self.ont, obj, t).at(loc)
    }

    pub fn relation(&mut self, source: ObjectId, target: &str, classes: Vec<(String, Loc)>, loc: Loc) {
        self.pending.push(Pending {
            source: Source::Object(source),
            target: target.to_string(),
            link: Link::Relation(classes),
            loc,
        });
    }

    /// A relation instance whose source is named explicitly
    /// (`source.Instance`) instead of being the enclosing object.
    pub fn relation_from(&mut self, source: &str, target: &str, classes: Vec<(String, Loc)>, loc: Loc) {
        self.pending.push(Pending {
            source: Source::Named(source.to_string()),
            target: target.to_string(),
            link: Link::Relation(classes),
            loc,
        });
    }

    pub fn function(&mut self, source: ObjectId, function: &str, target: &str, loc: Loc) {
        self.pending.push(Pending {
            source: Source::Object(source),
            target: target.to_string(),
            link: Link::Function(function.to_string()),
            loc,
        });
    }

    fn signature_target(&self, t: TypeId) -> Option<TypeId> {
        self.ont.decl(t).target
    }

    pub fn finish(mut self) -> Result<Collection, LocatedError> {
        let ont = self.ont;
        for p in core::mem::take(&mut self.pending) {
            let source = match &p.source {
                Source::Object(o) => *o,
                Source::Named(n) => self.coll.resolve_instance(ont, n).at(p.loc)?,
            };
            match p.link {
                Link::Relation(classes) => {
                    let mut ids = Vec::with_capacity(classes.len());
                    for (name, loc) in &classes {
                        ids.push(ont.resolve_type_name(name).at(*loc)?);
                    }
                    let expected: Vec<TypeId> =
                        ids.iter().filter_map(|&t| self.signature_target(t)).collect();
                    let target = self.coll.resolve_target(ont, &p.target, &expected).at(p.loc)?;
                    self.coll.push_relation(ont, source, target, ids, p.loc).at(p.loc)?;
                }
                Link::Function(name) => {
                    let f = ont.resolve_type_name(&name).at(p.loc)?;
                    if ont.kind(f) != TypeKind::Function {
                        return Err(Error::KindMismatch(alloc::format!(
                            "`{name}` is not a function type"
                        )))
                        .at(p.loc);
                    }
                    let expected: Vec<TypeId> = self.signature_target(f).into_iter().collect();
                    let target: Target = self.coll.resolve_target(ont, &p.target, &expected).at(p.loc)?;
                    self.coll.push_function(ont, source, f, target, p.loc).at(p.loc)?;
                }
            }
        }
        Ok(self.coll)
    }
}
