use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::names::{is_local_name, is_natno, InstanceName};
use super::{Loc, Mode, Ontology, TypeId, TypeKind};
use crate::{Error, Result};

/// Index of an object instance inside one [`Collection`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(u32);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        ObjectId(i as u32)
    }
}

/// A data value; on a par with object instances as an entity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub datatype: TypeId,
    pub lexical: String,
}

impl Literal {
    /// Check `lexical` against the lexical space of `datatype`.
    pub fn new(ont: &Ontology, datatype: TypeId, lexical: &str) -> Result<Self> {
        let d = ont.decl(datatype);
        let ok = match (d.kind, d.values.as_ref()) {
            (TypeKind::Data, Some(values)) => values.iter().any(|v| v == lexical),
            (TypeKind::Data, None) if datatype == TypeId::NATNO => is_natno(lexical),
            (TypeKind::Data, None) => true,
            _ => false,
        };
        if ok {
            Ok(Literal {
                datatype,
                lexical: lexical.to_string(),
            })
        } else {
            Err(Error::InvalidLiteral {
                datatype: ont.qualified_name(datatype),
                lexical: lexical.to_string(),
            })
        }
    }
}

/// What a `target.Instance` points at.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Object(ObjectId),
    Literal(Literal),
    /// Unresolved name kept in lenient mode.
    External(String),
    /// A type used as an individual endpoint (higher-order mode only).
    Type(TypeId),
}

/// The pair (enclosing object, target) with its relation-type memberships.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationInstance {
    pub target: Target,
    pub classifications: BTreeSet<TypeId>,
    pub loc: Loc,
}

/// A value of a partial, single-valued function on the enclosing object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionInstance {
    pub function: TypeId,
    pub target: Target,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectInstance {
    pub id: Option<String>,
    pub about: Option<String>,
    pub classifications: BTreeSet<TypeId>,
    pub relations: Vec<RelationInstance>,
    pub functions: Vec<FunctionInstance>,
    pub comment: Option<String>,
    pub loc: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Collection {
    pub id: Option<String>,
    /// URI of the ontology the collection is classified by.
    pub ontology: Option<String>,
    pub source_name: String,
    objects: Vec<ObjectInstance>,
}

impl Collection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> impl Iterator<Item = (ObjectId, &ObjectInstance)> + '_ {
        self.objects
            .iter()
            .enumerate()
            .map(|(i, o)| (ObjectId::from_index(i), o))
    }

    pub fn object(&self, id: ObjectId) -> &ObjectInstance {
        &self.objects[id.index()]
    }

    pub fn object_mut(&mut self, id: ObjectId) -> &mut ObjectInstance {
        &mut self.objects[id.index()]
    }

    pub fn find_id(&self, id: &str) -> Option<ObjectId> {
        self.objects
            .iter()
            .position(|o| o.id.as_deref() == Some(id))
            .map(ObjectId::from_index)
    }

    /// The object's id, or the generated `_gN` (1-based position) when it
    /// has none.
    pub fn display_name(&self, obj: ObjectId) -> String {
        match &self.object(obj).id {
            Some(id) => id.clone(),
            None => format!("_g{}", obj.index() + 1),
        }
    }

    pub fn add_object(&mut self, id: Option<&str>, about: Option<&str>) -> Result<ObjectId> {
        self.push_object(id, about, Loc::default())
    }

    pub fn push_object(&mut self, id: Option<&str>, about: Option<&str>, loc: Loc) -> Result<ObjectId> {
        if let Some(id) = id {
            if !is_local_name(id) {
                return Err(Error::InvalidName(id.to_string()));
            }
            if self.find_id(id).is_some() {
                return Err(Error::DuplicateInstanceId(id.to_string()));
            }
        }
        self.objects.push(ObjectInstance {
            id: id.map(str::to_string),
            about: about.map(str::to_string),
            classifications: BTreeSet::new(),
            relations: Vec::new(),
            functions: Vec::new(),
            comment: None,
            loc,
        });
        Ok(ObjectId::from_index(self.objects.len() - 1))
    }

    fn check_object(&self, obj: ObjectId) -> Result<()> {
        if obj.index() < self.objects.len() {
            Ok(())
        } else {
            Err(Error::UnresolvedInstanceRef(format!("_g{}", obj.index() + 1)))
        }
    }

    /// Add `obj ⊨ t` for an entity type `t`.
    pub fn classify(&mut self, ont: &Ontology, obj: ObjectId, t: TypeId) -> Result<()> {
        self.check_object(obj)?;
        if !ont.kind(t).is_entity() {
            return Err(Error::KindMismatch(format!(
                "object `{}` cannot be classified by relation type `{}`",
                self.display_name(obj),
                ont.qualified_name(t)
            )));
        }
        self.objects[obj.index()].classifications.insert(t);
        Ok(())
    }

    fn check_target(&self, target: &Target) -> Result<()> {
        match target {
            Target::Object(o) => self.check_object(*o),
            _ => Ok(()),
        }
    }

    fn check_relation_type(&self, ont: &Ontology, t: TypeId) -> Result<()> {
        if ont.kind(t) == TypeKind::BinaryRelation {
            Ok(())
        } else {
            Err(Error::KindMismatch(format!(
                "relation instances are classified by binary relation types, `{}` is not one",
                ont.qualified_name(t)
            )))
        }
    }

    /// Add the pair (obj, target). A pair that already exists gains the new
    /// classifications instead of being duplicated. Returns its index.
    pub fn add_relation_instance(
        &mut self,
        ont: &Ontology,
        obj: ObjectId,
        target: Target,
        classifications: impl IntoIterator<Item = TypeId>,
    ) -> Result<usize> {
        self.push_relation(ont, obj, target, classifications, Loc::default())
    }

    pub fn push_relation(
        &mut self,
        ont: &Ontology,
        obj: ObjectId,
        target: Target,
        classifications: impl IntoIterator<Item = TypeId>,
        loc: Loc,
    ) -> Result<usize> {
        self.check_object(obj)?;
        self.check_target(&target)?;
        let classes: BTreeSet<TypeId> = classifications.into_iter().collect();
        for &c in &classes {
            self.check_relation_type(ont, c)?;
        }
        let rels = &mut self.objects[obj.index()].relations;
        if let Some(i) = rels.iter().position(|r| r.target == target) {
            rels[i].classifications.extend(classes);
            return Ok(i);
        }
        rels.push(RelationInstance {
            target,
            classifications: classes,
            loc,
        });
        Ok(rels.len() - 1)
    }

    pub fn classify_relation(&mut self, ont: &Ontology, obj: ObjectId, index: usize, t: TypeId) -> Result<()> {
        self.check_object(obj)?;
        self.check_relation_type(ont, t)?;
        self.objects[obj.index()].relations[index]
            .classifications
            .insert(t);
        Ok(())
    }

    /// Set `function(obj) = target`; functions are partial and single-valued.
    pub fn add_function_instance(
        &mut self,
        ont: &Ontology,
        obj: ObjectId,
        function: TypeId,
        target: Target,
    ) -> Result<usize> {
        self.push_function(ont, obj, function, target, Loc::default())
    }

    pub fn push_function(
        &mut self,
        ont: &Ontology,
        obj: ObjectId,
        function: TypeId,
        target: Target,
        loc: Loc,
    ) -> Result<usize> {
        self.check_object(obj)?;
        self.check_target(&target)?;
        if ont.kind(function) != TypeKind::Function {
            return Err(Error::KindMismatch(format!(
                "`{}` is not a function type",
                ont.qualified_name(function)
            )));
        }
        let name = self.display_name(obj);
        let fns = &mut self.objects[obj.index()].functions;
        if let Some(i) = fns.iter().position(|f| f.function == function) {
            if fns[i].target == target {
                return Ok(i);
            }
            return Err(Error::DuplicateFunctionValue {
                instance: name,
                function: ont.qualified_name(function),
            });
        }
        fns.push(FunctionInstance {
            function,
            target,
            loc,
        });
        Ok(fns.len() - 1)
    }

    /// Resolve an `instanceNSname`. A bare id is looked up among this
    /// collection's ids; `type#id` additionally requires the instance to be
    /// classified by the type or one of its subtypes.
    pub fn resolve_instance(&self, ont: &Ontology, nsname: &str) -> Result<ObjectId> {
        let parsed =
            InstanceName::parse(nsname).ok_or_else(|| Error::InvalidName(nsname.to_string()))?;
        let obj = self
            .find_id(parsed.id)
            .ok_or_else(|| Error::UnresolvedInstanceRef(nsname.to_string()))?;
        if let Some(tn) = parsed.type_name {
            let mut full = String::new();
            if let Some(p) = tn.prefix {
                full.push_str(p);
                full.push(':');
            }
            full.push_str(tn.local);
            let t = ont.resolve_type_name(&full)?;
            let classified = self
                .object(obj)
                .classifications
                .iter()
                .any(|&c| ont.is_subtype(c, t));
            if !classified {
                return Err(Error::UnresolvedInstanceRef(nsname.to_string()));
            }
        }
        Ok(obj)
    }

    /// Interpret a `target.Instance` value. Declared instances win; in
    /// higher-order mode a type name is an individual endpoint; otherwise a
    /// datatype among `expected` makes it a literal. Anything else is an
    /// external reference (lenient) or an error (strict).
    pub fn resolve_target(&self, ont: &Ontology, text: &str, expected: &[TypeId]) -> Result<Target> {
        if let Some(parsed) = InstanceName::parse(text) {
            let obj = if parsed.type_name.is_some() {
                self.resolve_instance(ont, text).ok()
            } else {
                self.find_id(parsed.id)
            };
            let as_type = if ont.higher_order() && parsed.type_name.is_none() {
                ont.resolve_type_name(text).ok()
            } else {
                None
            };
            match (obj, as_type) {
                (Some(_), Some(_)) => return Err(Error::AmbiguousName(text.to_string())),
                (Some(o), None) => return Ok(Target::Object(o)),
                (None, Some(t)) => return Ok(Target::Type(t)),
                (None, None) => {}
            }
        }
        if let Some(&dt) = expected.iter().find(|&&t| ont.kind(t) == TypeKind::Data) {
            return Literal::new(ont, dt, text).map(Target::Literal);
        }
        match ont.mode() {
            Mode::Lenient => Ok(Target::External(text.to_string())),
            Mode::Strict => Err(Error::UnresolvedInstanceRef(text.to_string())),
        }
    }

    /// The text a target serializes to.
    pub fn target_text(&self, ont: &Ontology, target: &Target) -> String {
        match target {
            Target::Object(o) => self.display_name(*o),
            Target::Literal(l) => l.lexical.clone(),
            Target::External(n) => n.clone(),
            Target::Type(t) => ont.qualified_name(*t),
        }
    }
}
