use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::names::{is_local_name, TypeName};
use super::Loc;
use crate::calculus::Registration;
use crate::hot::HoAssertion;
use crate::{Error, Result};

/// Index of a type inside one [`Ontology`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(u32);

impl TypeId {
    pub const STRING: TypeId = TypeId(0);
    pub const NATNO: TypeId = TypeId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        TypeId(i as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeKind {
    Object,
    Data,
    BinaryRelation,
    Function,
}

impl TypeKind {
    /// `Entity = Object + Data`.
    pub fn is_entity(self) -> bool {
        matches!(self, TypeKind::Object | TypeKind::Data)
    }

    /// Binary relations and functions share the relation dimension.
    pub fn is_relation(self) -> bool {
        !self.is_entity()
    }

    pub fn same_family(self, other: TypeKind) -> bool {
        self.is_entity() == other.is_entity()
    }

    pub fn family_name(self) -> &'static str {
        if self.is_entity() {
            "entity"
        } else {
            "binary relation"
        }
    }

    /// Canonical generic-style tag.
    pub fn tag(self) -> &'static str {
        match self {
            TypeKind::Object => "Type.Object",
            TypeKind::Data => "Type.Data",
            TypeKind::BinaryRelation => "Type.BinaryRelation",
            TypeKind::Function => "Type.Function",
        }
    }
}

/// Where a type declaration came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Local,
    /// `String`, `Natno`, and (higher-order mode) the core metatypes.
    Builtin,
    /// Created for an undeclared name in lenient mode.
    Placeholder,
    Imported {
        prefix: Option<String>,
        uri: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub kind: TypeKind,
    pub name: String,
    pub origin: Origin,
    pub source: Option<TypeId>,
    pub target: Option<TypeId>,
    pub comment: Option<String>,
    /// Lexical values of a declared enumeration datatype.
    pub values: Option<Vec<String>>,
    pub loc: Loc,
}

impl TypeDecl {
    pub fn is_local(&self) -> bool {
        self.origin == Origin::Local
    }

    pub fn signature(&self) -> Option<(TypeId, TypeId)> {
        Some((self.source?, self.target?))
    }
}

/// `specific ⊢ generic`; a missing generic stands for the root of the kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtypeAxiom {
    pub specific: TypeId,
    pub generic: Option<TypeId>,
    pub imported: bool,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Import {
    pub uri: String,
    pub prefix: Option<String>,
    pub loc: Loc,
}

/// Strict rejects unresolved references when they are made; lenient
/// records placeholders and leaves them to the checker.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Lenient,
    Strict,
}

const BUILTIN_DATA: [&str; 2] = ["String", "Natno"];

/// Core metatypes available as type references in higher-order mode.
pub const METATYPES: [&str; 6] = [
    "Type.Object",
    "Type.Entity",
    "Type.Data",
    "Type.BinaryRelation",
    "Type.Relation",
    "Type.Function",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ontology {
    pub name: String,
    pub source_name: String,
    mode: Mode,
    higher_order: bool,
    imports: Vec<Import>,
    types: Vec<TypeDecl>,
    /// Local types in declaration order.
    order: Vec<TypeId>,
    axioms: Vec<SubtypeAxiom>,
    disjoint: BTreeSet<(TypeId, TypeId)>,
    incoherent: BTreeSet<TypeId>,
    pub(crate) ho: Vec<HoAssertion>,
    pub(crate) registered: Vec<Registration>,
}

fn ordered(a: TypeId, b: TypeId) -> (TypeId, TypeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Ontology {
    pub fn new(name: impl Into<String>) -> Self {
        let mut ont = Ontology {
            name: name.into(),
            source_name: String::new(),
            mode: Mode::default(),
            higher_order: false,
            imports: Vec::new(),
            types: Vec::new(),
            order: Vec::new(),
            axioms: Vec::new(),
            disjoint: BTreeSet::new(),
            incoherent: BTreeSet::new(),
            ho: Vec::new(),
            registered: Vec::new(),
        };
        for n in BUILTIN_DATA {
            ont.push_decl(TypeKind::Data, n, Origin::Builtin, Loc::default());
        }
        ont
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn higher_order(&self) -> bool {
        self.higher_order
    }

    pub fn set_higher_order(&mut self, on: bool) {
        self.higher_order = on;
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn type_ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.types.len()).map(TypeId::from_index)
    }

    pub fn types(&self) -> impl Iterator<Item = (TypeId, &TypeDecl)> + '_ {
        self.types
            .iter()
            .enumerate()
            .map(|(i, d)| (TypeId::from_index(i), d))
    }

    /// Local declarations in the order they were made.
    pub fn local_types(&self) -> impl Iterator<Item = (TypeId, &TypeDecl)> + '_ {
        self.order.iter().map(|&t| (t, &self.types[t.index()]))
    }

    /// Imported declarations (table order) followed by local ones.
    pub fn declared_types(&self) -> impl Iterator<Item = (TypeId, &TypeDecl)> + '_ {
        self.types()
            .filter(|(_, d)| matches!(d.origin, Origin::Imported { .. }))
            .chain(self.local_types())
    }

    pub fn placeholders(&self) -> impl Iterator<Item = (TypeId, &TypeDecl)> + '_ {
        self.types().filter(|(_, d)| d.origin == Origin::Placeholder)
    }

    pub fn decl(&self, id: TypeId) -> &TypeDecl {
        &self.types[id.index()]
    }

    pub fn kind(&self, id: TypeId) -> TypeKind {
        self.decl(id).kind
    }

    pub fn imports(&self) -> &[Import] {
        &self.imports
    }

    pub fn axioms(&self) -> &[SubtypeAxiom] {
        &self.axioms
    }

    pub fn disjoint_pairs(&self) -> &BTreeSet<(TypeId, TypeId)> {
        &self.disjoint
    }

    pub fn incoherent_types(&self) -> &BTreeSet<TypeId> {
        &self.incoherent
    }

    /// The name to use when referring to `id` from inside this ontology.
    pub fn qualified_name(&self, id: TypeId) -> String {
        let d = self.decl(id);
        match &d.origin {
            Origin::Imported {
                prefix: Some(p), ..
            } => format!("{p}:{}", d.name),
            _ => d.name.clone(),
        }
    }

    fn push_decl(&mut self, kind: TypeKind, name: &str, origin: Origin, loc: Loc) -> TypeId {
        let id = TypeId::from_index(self.types.len());
        if origin == Origin::Local {
            self.order.push(id);
        }
        self.types.push(TypeDecl {
            kind,
            name: name.to_string(),
            origin,
            source: None,
            target: None,
            comment: None,
            values: None,
            loc,
        });
        id
    }

    fn find(&self, pred: impl Fn(&TypeDecl) -> bool) -> Vec<TypeId> {
        self.types()
            .filter(|(_, d)| pred(d))
            .map(|(id, _)| id)
            .collect()
    }

    /// Register a type name without its signature; relation and function
    /// types must be completed with [`Ontology::set_signature`].
    ///
    /// A placeholder with the same name is upgraded in place so earlier
    /// references stay valid.
    pub fn reserve_type(&mut self, kind: TypeKind, name: &str, loc: Loc) -> Result<TypeId> {
        if !is_local_name(name) {
            return Err(Error::InvalidName(name.to_string()));
        }
        let clash = self.find(|d| {
            d.name == name && matches!(d.origin, Origin::Local | Origin::Builtin)
        });
        if !clash.is_empty() {
            return Err(Error::DuplicateTypeName(name.to_string()));
        }
        if let Some(&ph) = self
            .find(|d| d.name == name && d.origin == Origin::Placeholder)
            .first()
        {
            if !kind.is_entity() {
                return Err(Error::KindMismatch(format!(
                    "`{name}` is used as an entity type but declared as a relation"
                )));
            }
            let d = &mut self.types[ph.index()];
            d.kind = kind;
            d.origin = Origin::Local;
            d.loc = loc;
            self.order.push(ph);
            return Ok(ph);
        }
        Ok(self.push_decl(kind, name, Origin::Local, loc))
    }

    /// Declare a type with an already resolved signature.
    pub fn declare_type(
        &mut self,
        kind: TypeKind,
        name: &str,
        signature: Option<(TypeId, TypeId)>,
    ) -> Result<TypeId> {
        match (kind, signature) {
            (TypeKind::Object, None) => {}
            (TypeKind::Data, _) => {
                return Err(Error::KindMismatch(format!(
                    "datatype `{name}` must be declared as an enumeration"
                )))
            }
            (TypeKind::Object, Some(_)) => {
                return Err(Error::KindMismatch(format!(
                    "object type `{name}` has no source or target"
                )))
            }
            (_, None) => {
                return Err(Error::KindMismatch(format!(
                    "relation type `{name}` needs a source and a target"
                )))
            }
            (_, Some((s, t))) => {
                self.check_endpoint(s)?;
                self.check_endpoint(t)?;
            }
        }
        let id = self.reserve_type(kind, name, Loc::default())?;
        if let Some((s, t)) = signature {
            let d = &mut self.types[id.index()];
            d.source = Some(s);
            d.target = Some(t);
        }
        Ok(id)
    }

    pub fn declare_object(&mut self, name: &str) -> Result<TypeId> {
        self.declare_type(TypeKind::Object, name, None)
    }

    /// Declare a binary relation type, resolving the endpoint names.
    pub fn declare_relation(&mut self, name: &str, source: &str, target: &str) -> Result<TypeId> {
        self.declare_with_names(TypeKind::BinaryRelation, name, source, target)
    }

    pub fn declare_function(&mut self, name: &str, source: &str, target: &str) -> Result<TypeId> {
        self.declare_with_names(TypeKind::Function, name, source, target)
    }

    fn declare_with_names(
        &mut self,
        kind: TypeKind,
        name: &str,
        source: &str,
        target: &str,
    ) -> Result<TypeId> {
        let s = self.resolve_or_defer(source)?;
        let t = self.resolve_or_defer(target)?;
        self.declare_type(kind, name, Some((s, t)))
    }

    pub fn declare_enumeration(&mut self, name: &str, values: Vec<String>) -> Result<TypeId> {
        let id = self.reserve_type(TypeKind::Data, name, Loc::default())?;
        self.set_enumeration(id, values);
        Ok(id)
    }

    pub fn set_enumeration(&mut self, id: TypeId, values: Vec<String>) {
        let d = &mut self.types[id.index()];
        d.kind = TypeKind::Data;
        d.values = Some(values);
    }

    pub fn set_comment(&mut self, id: TypeId, comment: Option<String>) {
        self.types[id.index()].comment = comment;
    }

    fn check_endpoint(&self, t: TypeId) -> Result<()> {
        if self.kind(t).is_entity() {
            Ok(())
        } else {
            Err(Error::KindMismatch(format!(
                "`{}` is a relation type and cannot be a source or target",
                self.qualified_name(t)
            )))
        }
    }

    /// Resolve and attach the source/target of a reserved relation type.
    pub fn set_signature(&mut self, id: TypeId, source: &str, target: &str) -> Result<()> {
        let at = self.types[id.index()].loc;
        let s = self.resolve_or_defer_at(source, at)?;
        let t = self.resolve_or_defer_at(target, at)?;
        self.check_endpoint(s)?;
        self.check_endpoint(t)?;
        let d = &mut self.types[id.index()];
        d.source = Some(s);
        d.target = Some(t);
        Ok(())
    }

    /// Resolve `nsname`, creating a placeholder object type in lenient mode
    /// (or a core metatype in higher-order mode) when it is undeclared.
    pub fn resolve_or_defer(&mut self, nsname: &str) -> Result<TypeId> {
        self.resolve_or_defer_at(nsname, Loc::default())
    }

    /// As [`Ontology::resolve_or_defer`]; a new placeholder records `loc` as
    /// its first reference.
    pub fn resolve_or_defer_at(&mut self, nsname: &str, loc: Loc) -> Result<TypeId> {
        match self.resolve_type_name(nsname) {
            Err(Error::UnresolvedTypeRef(_)) if self.higher_order && METATYPES.contains(&nsname) => {
                Ok(self.push_decl(TypeKind::Object, nsname, Origin::Builtin, Loc::default()))
            }
            Err(Error::UnresolvedTypeRef(n)) if self.mode == Mode::Lenient => {
                Ok(self.push_decl(TypeKind::Object, &n, Origin::Placeholder, loc))
            }
            other => other,
        }
    }

    /// Resolve a `typeNSname`: local declarations, then built-ins, then
    /// imports; a prefix selects one import binding.
    pub fn resolve_type_name(&self, nsname: &str) -> Result<TypeId> {
        let parsed = match TypeName::parse(nsname) {
            Some(n) => n,
            None if self.higher_order && METATYPES.contains(&nsname) => TypeName {
                prefix: None,
                local: nsname,
            },
            None => return Err(Error::InvalidName(nsname.to_string())),
        };
        let unique = |c: Vec<TypeId>| match c.len() {
            0 => None,
            1 => Some(Ok(c[0])),
            _ => Some(Err(Error::AmbiguousName(nsname.to_string()))),
        };
        if let Some(p) = parsed.prefix {
            if !self.imports.iter().any(|i| i.prefix.as_deref() == Some(p)) {
                return Err(Error::UnknownPrefix(p.to_string()));
            }
            let c = self.find(|d| {
                d.name == parsed.local
                    && matches!(&d.origin, Origin::Imported { prefix: Some(q), .. } if q == p)
            });
            if let Some(r) = unique(c) {
                return r;
            }
        } else {
            let c = self.find(|d| {
                d.name == parsed.local && matches!(d.origin, Origin::Local | Origin::Builtin)
            });
            if let Some(r) = unique(c) {
                return r;
            }
            let c = self.find(|d| {
                d.name == parsed.local && matches!(d.origin, Origin::Imported { .. })
            });
            if let Some(r) = unique(c) {
                return r;
            }
        }
        let c = self.find(|d| d.name == nsname && d.origin == Origin::Placeholder);
        unique(c).unwrap_or_else(|| Err(Error::UnresolvedTypeRef(nsname.to_string())))
    }

    pub fn declare_subtype(&mut self, specific: TypeId, generic: Option<TypeId>) -> Result<()> {
        self.push_subtype(specific, generic, Loc::default())
    }

    pub fn push_subtype(
        &mut self,
        specific: TypeId,
        generic: Option<TypeId>,
        loc: Loc,
    ) -> Result<()> {
        if let Some(g) = generic {
            self.check_same_family(specific, g)?;
        }
        let exists = self
            .axioms
            .iter()
            .any(|a| a.specific == specific && a.generic == generic);
        if !exists {
            self.axioms.push(SubtypeAxiom {
                specific,
                generic,
                imported: false,
                loc,
            });
        }
        Ok(())
    }

    fn check_same_family(&self, a: TypeId, b: TypeId) -> Result<()> {
        if self.kind(a).same_family(self.kind(b)) {
            Ok(())
        } else {
            Err(Error::KindMismatch(format!(
                "`{}` is an {} type but `{}` is a {} type",
                self.qualified_name(a),
                self.kind(a).family_name(),
                self.qualified_name(b),
                self.kind(b).family_name()
            )))
        }
    }

    /// Record that `a` and `b` share no instances. A type disjoint from
    /// itself is empty and is marked incoherent.
    pub fn declare_disjoint(&mut self, a: TypeId, b: TypeId) -> Result<()> {
        self.check_same_family(a, b)?;
        self.disjoint.insert(ordered(a, b));
        if a == b {
            self.incoherent.insert(a);
        }
        Ok(())
    }

    pub fn declare_incoherent(&mut self, t: TypeId) {
        self.incoherent.insert(t);
    }

    /// Merge `other` into this ontology under an `extends` binding.
    ///
    /// Every non-builtin type of `other` (its own and those it imports)
    /// becomes reachable through `prefix`. Types already merged through
    /// another path are reused.
    pub fn import(&mut self, uri: &str, prefix: Option<&str>, other: &Ontology, loc: Loc) -> Result<()> {
        if let Some(p) = prefix {
            if !is_local_name(p) {
                return Err(Error::InvalidName(p.to_string()));
            }
        }
        self.imports.push(Import {
            uri: uri.to_string(),
            prefix: prefix.map(str::to_string),
            loc,
        });
        let mut map = Vec::with_capacity(other.types.len());
        for d in &other.types {
            let id = match &d.origin {
                Origin::Builtin => match self.find(|x| x.name == d.name && x.origin == Origin::Builtin).first() {
                    Some(&id) => id,
                    None => self.push_decl(d.kind, &d.name, Origin::Builtin, Loc::default()),
                },
                Origin::Placeholder => match self
                    .find(|x| x.name == d.name && x.origin == Origin::Placeholder)
                    .first()
                {
                    Some(&id) => id,
                    None => self.push_decl(d.kind, &d.name, Origin::Placeholder, Loc::default()),
                },
                Origin::Local | Origin::Imported { .. } => {
                    let def_uri = match &d.origin {
                        Origin::Imported { uri, .. } => uri.clone(),
                        _ => uri.to_string(),
                    };
                    let existing = self.find(|x| {
                        x.name == d.name
                            && matches!(&x.origin, Origin::Imported { uri: u, .. } if *u == def_uri)
                    });
                    match existing.first() {
                        Some(&id) => id,
                        None => {
                            let origin = Origin::Imported {
                                prefix: prefix.map(str::to_string),
                                uri: def_uri,
                            };
                            let id = self.push_decl(d.kind, &d.name, origin, d.loc);
                            let nd = &mut self.types[id.index()];
                            nd.comment = d.comment.clone();
                            nd.values = d.values.clone();
                            id
                        }
                    }
                }
            };
            map.push(id);
        }
        for (i, d) in other.types.iter().enumerate() {
            if let (Some(s), Some(t)) = (d.source, d.target) {
                let nd = &mut self.types[map[i].index()];
                nd.source = Some(map[s.index()]);
                nd.target = Some(map[t.index()]);
            }
        }
        let m = |t: TypeId| map[t.index()];
        for a in &other.axioms {
            let (s, g) = (m(a.specific), a.generic.map(m));
            if !self.axioms.iter().any(|x| x.specific == s && x.generic == g) {
                self.axioms.push(SubtypeAxiom {
                    specific: s,
                    generic: g,
                    imported: true,
                    loc: a.loc,
                });
            }
        }
        for &(a, b) in &other.disjoint {
            self.disjoint.insert(ordered(m(a), m(b)));
        }
        for &t in &other.incoherent {
            self.incoherent.insert(m(t));
        }
        for h in &other.ho {
            let mapped = h.remap(&m);
            if !self.ho.iter().any(|x| x.same_assertion(&mapped)) {
                self.ho.push(mapped);
            }
        }
        Ok(())
    }

    /// Direct generics of each type, from the declared axioms.
    pub fn direct_supertypes(&self) -> BTreeMap<TypeId, BTreeSet<TypeId>> {
        let mut up: BTreeMap<TypeId, BTreeSet<TypeId>> = BTreeMap::new();
        for a in &self.axioms {
            if let Some(g) = a.generic {
                up.entry(a.specific).or_default().insert(g);
            }
        }
        up
    }

    /// Reflexive-transitive generics of `t`.
    pub fn supertypes(&self, t: TypeId) -> BTreeSet<TypeId> {
        supertypes_in(&self.direct_supertypes(), t)
    }

    pub fn is_subtype(&self, specific: TypeId, generic: TypeId) -> bool {
        specific == generic || self.supertypes(specific).contains(&generic)
    }
}

pub(crate) fn supertypes_in(up: &BTreeMap<TypeId, BTreeSet<TypeId>>, t: TypeId) -> BTreeSet<TypeId> {
    let mut seen = BTreeSet::new();
    let mut stack = alloc::vec![t];
    while let Some(x) = stack.pop() {
        if seen.insert(x) {
            if let Some(next) = up.get(&x) {
                stack.extend(next.iter().copied().filter(|n| !seen.contains(n)));
            }
        }
    }
    seen
}
