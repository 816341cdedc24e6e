//! Identity, composition and transpose on relation types, evaluated
//! extensionally over a knowledge base.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::checker::{ClosureTables, InstanceKey};
use crate::model::{KnowledgeBase, Literal, Loc, ObjectId, Ontology, Target, TypeId};
use crate::{Error, Result};

/// A relation-type expression.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelExpr {
    /// A declared relation or function type.
    Named(TypeId),
    Identity(TypeId),
    Compose(Box<RelExpr>, Box<RelExpr>),
    Transpose(Box<RelExpr>),
}

impl RelExpr {
    pub fn compose(a: RelExpr, b: RelExpr) -> RelExpr {
        RelExpr::Compose(Box::new(a), Box::new(b))
    }

    /// `ρ††` reduces to `ρ` and `ι†` to `ι`; everything else is wrapped.
    pub fn transpose(e: RelExpr) -> RelExpr {
        match e {
            RelExpr::Transpose(inner) => *inner,
            id @ RelExpr::Identity(_) => id,
            other => RelExpr::Transpose(Box::new(other)),
        }
    }

    /// Render with qualified type names, in the syntax [`parse_expr`] reads.
    pub fn display<'a>(&'a self, ont: &'a Ontology) -> impl fmt::Display + 'a {
        struct D<'a>(&'a RelExpr, &'a Ontology);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self.0 {
                    RelExpr::Named(t) => f.write_str(&self.1.qualified_name(*t)),
                    RelExpr::Identity(t) => write!(f, "identity({})", self.1.qualified_name(*t)),
                    RelExpr::Compose(a, b) => write!(f, "compose({}, {})", D(a, self.1), D(b, self.1)),
                    RelExpr::Transpose(a) => write!(f, "transpose({})", D(a, self.1)),
                }
            }
        }
        D(self, ont)
    }
}

/// A relation-type expression with its computed endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedRelationType {
    pub definition: RelExpr,
    pub source: TypeId,
    pub target: TypeId,
}

/// When `compose(ρ, σ)` is defined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Composability {
    /// Target of `ρ` equals source of `σ`.
    #[default]
    Strict,
    /// Target of `ρ` is a subtype of the source of `σ`.
    Lenient,
}

/// A named relation type as a derived type.
pub fn named_type(ont: &Ontology, rho: TypeId) -> Result<DerivedRelationType> {
    match ont.decl(rho).signature() {
        Some((source, target)) if ont.kind(rho).is_relation() => Ok(DerivedRelationType {
            definition: RelExpr::Named(rho),
            source,
            target,
        }),
        _ => Err(Error::KindMismatch(format!(
            "`{}` is not a relation type with source and target",
            ont.qualified_name(rho)
        ))),
    }
}

pub fn identity_type(ont: &Ontology, a: TypeId) -> Result<DerivedRelationType> {
    if !ont.kind(a).is_entity() {
        return Err(Error::KindMismatch(format!(
            "identity needs an entity type, `{}` is a {}",
            ont.qualified_name(a),
            ont.kind(a).family_name()
        )));
    }
    Ok(DerivedRelationType {
        definition: RelExpr::Identity(a),
        source: a,
        target: a,
    })
}

pub fn transpose_type(rho: &DerivedRelationType) -> DerivedRelationType {
    DerivedRelationType {
        definition: RelExpr::transpose(rho.definition.clone()),
        source: rho.target,
        target: rho.source,
    }
}

pub fn compose_types(
    ont: &Ontology,
    rho: &DerivedRelationType,
    sigma: &DerivedRelationType,
    mode: Composability,
) -> Result<DerivedRelationType> {
    let ok = rho.target == sigma.source
        || (mode == Composability::Lenient && ont.is_subtype(rho.target, sigma.source));
    if !ok {
        return Err(Error::NotComposable {
            first: format!("{}", rho.definition.display(ont)),
            second: format!("{}", sigma.definition.display(ont)),
        });
    }
    Ok(DerivedRelationType {
        definition: RelExpr::compose(rho.definition.clone(), sigma.definition.clone()),
        source: rho.source,
        target: sigma.target,
    })
}

/// Type-check an expression bottom up.
pub fn type_expr(ont: &Ontology, e: &RelExpr, mode: Composability) -> Result<DerivedRelationType> {
    match e {
        RelExpr::Named(t) => named_type(ont, *t),
        RelExpr::Identity(t) => identity_type(ont, *t),
        RelExpr::Transpose(a) => Ok(transpose_type(&type_expr(ont, a, mode)?)),
        RelExpr::Compose(a, b) => compose_types(ont, &type_expr(ont, a, mode)?, &type_expr(ont, b, mode)?, mode),
    }
}

/// A named derived relation type stored with an ontology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Registration {
    pub name: String,
    pub expr: RelExpr,
    pub loc: Loc,
}

impl Ontology {
    pub fn registrations(&self) -> &[Registration] {
        &self.registered
    }

    pub fn registration(&self, name: &str) -> Option<&Registration> {
        self.registered.iter().find(|r| r.name == name)
    }

    /// Name a derived type. The name may not clash with a type or another
    /// registration, and the expression must type-check.
    pub fn register(&mut self, name: &str, expr: RelExpr, loc: Loc) -> Result<DerivedRelationType> {
        if !crate::model::names::is_local_name(name) {
            return Err(Error::InvalidName(name.to_string()));
        }
        if self.resolve_type_name(name).is_ok() || self.registration(name).is_some() {
            return Err(Error::NameCollision(name.to_string()));
        }
        let typed = type_expr(self, &expr, Composability::Strict)?;
        self.registered.push(Registration {
            name: name.to_string(),
            expr,
            loc,
        });
        Ok(typed)
    }
}

/// Parse `compose(a, b)`, `transpose(a)`, `identity(T)` or a relation name.
/// Registered names expand to their definitions.
pub fn parse_expr(ont: &Ontology, text: &str) -> Result<RelExpr> {
    let mut p = ExprParser { s: text, pos: 0, ont };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.error());
    }
    Ok(e)
}

struct ExprParser<'a> {
    s: &'a str,
    pos: usize,
    ont: &'a Ontology,
}

impl ExprParser<'_> {
    fn error(&self) -> Error {
        Error::UnresolvedRef(format!("malformed expression `{}` at offset {}", self.s, self.pos))
    }

    fn skip_ws(&mut self) {
        let rest = &self.s[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.s[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn name(&mut self) -> Result<&str> {
        self.skip_ws();
        let rest = &self.s[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')' || c == ',')
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error());
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn expr(&mut self) -> Result<RelExpr> {
        let start = self.pos;
        let name = self.name()?.to_string();
        self.skip_ws();
        if !self.s[self.pos..].starts_with('(') {
            if let Some(r) = self.ont.registration(&name) {
                return Ok(r.expr.clone());
            }
            return Ok(RelExpr::Named(self.ont.resolve_type_name(&name)?));
        }
        self.eat('(')?;
        let e = match name.as_str() {
            "compose" => {
                let a = self.expr()?;
                self.eat(',')?;
                let b = self.expr()?;
                RelExpr::compose(a, b)
            }
            "transpose" => RelExpr::transpose(self.expr()?),
            "identity" => {
                let t = self.name()?.to_string();
                RelExpr::Identity(self.ont.resolve_type_name(&t)?)
            }
            _ => {
                self.pos = start;
                return Err(self.error());
            }
        };
        self.eat(')')?;
        Ok(e)
    }
}

/// An entity in a collection, as an endpoint of a relation pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Object { collection: u32, object: ObjectId },
    Literal(Literal),
    External(String),
}

impl Node {
    pub fn name(&self, kb: &KnowledgeBase) -> String {
        match self {
            Node::Object { collection, object } => kb.collections[*collection as usize].display_name(*object),
            Node::Literal(l) => format!("\"{}\"^^{}", l.lexical, kb.ontology.qualified_name(l.datatype)),
            Node::External(n) => n.clone(),
        }
    }
}

fn target_node(collection: u32, t: &Target) -> Option<Node> {
    match t {
        Target::Object(object) => Some(Node::Object {
            collection,
            object: *object,
        }),
        Target::Literal(l) => Some(Node::Literal(l.clone())),
        Target::External(n) => Some(Node::External(n.clone())),
        // Types as individuals live in the ontology, not the collection.
        Target::Type(_) => None,
    }
}

pub type Pairs = BTreeSet<(Node, Node)>;

/// Extension of every relation and function type under the classification
/// closure. Types with no instances are absent.
pub fn relation_pairs(kb: &KnowledgeBase, tables: &ClosureTables) -> BTreeMap<TypeId, Pairs> {
    let mut out: BTreeMap<TypeId, Pairs> = BTreeMap::new();
    for &(key, t) in &tables.classification {
        let (collection, object, target) = match key {
            InstanceKey::Object { .. } => continue,
            InstanceKey::Relation { collection, object, index } => (
                collection,
                object,
                &kb.collections[collection as usize].object(object).relations[index as usize].target,
            ),
            InstanceKey::Function { collection, object, index } => (
                collection,
                object,
                &kb.collections[collection as usize].object(object).functions[index as usize].target,
            ),
        };
        if let Some(b) = target_node(collection, target) {
            out.entry(t).or_default().insert((Node::Object { collection, object }, b));
        }
    }
    out
}

/// Members of each entity type: classified objects, plus literals whose
/// datatype is a subtype.
pub fn entity_members(kb: &KnowledgeBase, tables: &ClosureTables) -> BTreeMap<TypeId, BTreeSet<Node>> {
    let mut out: BTreeMap<TypeId, BTreeSet<Node>> = BTreeMap::new();
    for &(key, t) in &tables.classification {
        if let InstanceKey::Object { collection, object } = key {
            out.entry(t).or_default().insert(Node::Object { collection, object });
        }
    }
    for c in &kb.collections {
        for (_, o) in c.objects() {
            let targets = o.relations.iter().map(|r| &r.target).chain(o.functions.iter().map(|f| &f.target));
            for t in targets {
                if let Target::Literal(l) = t {
                    for g in tables.supertypes(l.datatype) {
                        out.entry(g).or_default().insert(Node::Literal(l.clone()));
                    }
                }
            }
        }
    }
    out
}

/// Evaluates expressions against one knowledge base.
pub struct Evaluator {
    pairs: BTreeMap<TypeId, Pairs>,
    members: BTreeMap<TypeId, BTreeSet<Node>>,
}

impl Evaluator {
    pub fn new(kb: &KnowledgeBase, tables: &ClosureTables) -> Self {
        Evaluator {
            pairs: relation_pairs(kb, tables),
            members: entity_members(kb, tables),
        }
    }

    pub fn extension(&self, e: &RelExpr) -> Pairs {
        match e {
            RelExpr::Named(t) => self.pairs.get(t).cloned().unwrap_or_default(),
            RelExpr::Identity(t) => self
                .members
                .get(t)
                .map(|m| m.iter().map(|n| (n.clone(), n.clone())).collect())
                .unwrap_or_default(),
            RelExpr::Transpose(a) => transpose(&self.extension(a)),
            RelExpr::Compose(a, b) => compose(&self.extension(a), &self.extension(b)),
        }
    }
}

/// Extension of `e` over `kb`.
pub fn relation_extension(kb: &KnowledgeBase, e: &RelExpr) -> Pairs {
    let tables = crate::checker::analyze(kb);
    Evaluator::new(kb, &tables).extension(e)
}

/// Relational join: `(a, c)` whenever `(a, b) ∈ r` and `(b, c) ∈ s`.
pub fn compose<A: Ord + Clone, B: Ord + Clone, C: Ord + Clone>(
    r: &BTreeSet<(A, B)>,
    s: &BTreeSet<(B, C)>,
) -> BTreeSet<(A, C)> {
    let mut by_source: BTreeMap<&B, Vec<&C>> = BTreeMap::new();
    for (b, c) in s {
        by_source.entry(b).or_default().push(c);
    }
    let mut out = BTreeSet::new();
    for (a, b) in r {
        for c in by_source.get(b).into_iter().flatten() {
            out.insert((a.clone(), (*c).clone()));
        }
    }
    out
}

pub fn transpose<A: Ord + Clone, B: Ord + Clone>(r: &BTreeSet<(A, B)>) -> BTreeSet<(B, A)> {
    r.iter().map(|(a, b)| (b.clone(), a.clone())).collect()
}

pub fn identity<A: Ord + Clone>(set: impl IntoIterator<Item = A>) -> BTreeSet<(A, A)> {
    set.into_iter().map(|a| (a.clone(), a)).collect()
}

/// The subtype and classification tables read as relations: reflexive,
/// transitive, and closed under `classification ∘ subtype`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OperatorAxioms {
    pub reflexive: bool,
    pub transitive: bool,
    pub classification_closed: bool,
}

impl OperatorAxioms {
    pub fn all(self) -> bool {
        self.reflexive && self.transitive && self.classification_closed
    }
}

pub fn operator_axioms(ont: &Ontology, tables: &ClosureTables) -> OperatorAxioms {
    let st = &tables.subtype;
    OperatorAxioms {
        reflexive: identity(ont.type_ids()).is_subset(st),
        transitive: compose(st, st).is_subset(st),
        classification_closed: compose(&tables.classification, st).is_subset(&tables.classification),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Collection, Ontology};

    fn movie() -> (Ontology, TypeId, TypeId, TypeId, TypeId) {
        let mut o = Ontology::new("Movie");
        let m = o.declare_object("Movie").unwrap();
        let g = o.declare_object("Genre").unwrap();
        o.declare_object("Cast").unwrap();
        let genre = o.declare_relation("genre", "Movie", "Genre").unwrap();
        let movie = o.declare_relation("movie", "Cast", "Movie").unwrap();
        (o, m, g, genre, movie)
    }

    #[test]
    fn endpoints() {
        let (o, m, g, genre, movie) = movie();
        let genre_t = named_type(&o, genre).unwrap();
        let movie_t = named_type(&o, movie).unwrap();
        let c = compose_types(&o, &movie_t, &genre_t, Composability::Strict).unwrap();
        assert_eq!((c.source, c.target), (o.resolve_type_name("Cast").unwrap(), g));
        assert!(matches!(
            compose_types(&o, &genre_t, &movie_t, Composability::Strict),
            Err(Error::NotComposable { .. })
        ));
        let right = compose_types(&o, &genre_t, &identity_type(&o, g).unwrap(), Composability::Strict).unwrap();
        assert_eq!((right.source, right.target), (m, g));
        let t = transpose_type(&genre_t);
        assert_eq!((t.source, t.target), (g, m));
        assert_eq!(transpose_type(&t), genre_t);
        let id = identity_type(&o, m).unwrap();
        assert_eq!(transpose_type(&id), id);
        assert!(matches!(identity_type(&o, genre), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn lenient_composition_follows_subtypes() {
        let mut o = Ontology::new("x");
        o.declare_object("A").unwrap();
        o.declare_object("B").unwrap();
        let b2 = o.declare_object("B2").unwrap();
        let b = o.resolve_type_name("B").unwrap();
        o.declare_subtype(b2, Some(b)).unwrap();
        let r = o.declare_relation("r", "A", "B2").unwrap();
        let s = o.declare_relation("s", "B", "A").unwrap();
        let (r, s) = (named_type(&o, r).unwrap(), named_type(&o, s).unwrap());
        assert!(compose_types(&o, &r, &s, Composability::Strict).is_err());
        assert!(compose_types(&o, &r, &s, Composability::Lenient).is_ok());
    }

    #[test]
    fn parse_and_display() {
        let (mut o, ..) = movie();
        let e = parse_expr(&o, "compose( movie , transpose(transpose(genre)))").unwrap();
        assert_eq!(alloc::format!("{}", e.display(&o)), "compose(movie, genre)");
        assert!(parse_expr(&o, "compose(movie)").is_err());
        assert!(parse_expr(&o, "nope").is_err());
        let id = parse_expr(&o, "transpose(identity(Movie))").unwrap();
        assert!(matches!(id, RelExpr::Identity(_)));
        o.register("castGenre", e.clone(), Loc::default()).unwrap();
        assert_eq!(parse_expr(&o, "castGenre").unwrap(), e);
        assert!(matches!(o.register("genre", e, Loc::default()), Err(Error::NameCollision(_))));
    }

    #[test]
    fn casablanca_extensions() {
        let (o, m, _, genre, movie) = movie();
        let mut c = Collection::new();
        let film = c.add_object(Some("Casablanca_1942"), None).unwrap();
        c.classify(&o, film, m).unwrap();
        let drama = c.add_object(Some("Drama"), None).unwrap();
        let romance = c.add_object(Some("Romance"), None).unwrap();
        for g in [drama, romance] {
            c.classify(&o, g, o.resolve_type_name("Genre").unwrap()).unwrap();
            c.add_relation_instance(&o, film, Target::Object(g), [genre]).unwrap();
        }
        let cast = c.add_object(Some("cast1"), None).unwrap();
        c.classify(&o, cast, o.resolve_type_name("Cast").unwrap()).unwrap();
        c.add_relation_instance(&o, cast, Target::Object(film), [movie]).unwrap();
        let kb = KnowledgeBase::new(o).with_collection(c);
        let n = |object| Node::Object { collection: 0, object };
        let ext = relation_extension(&kb, &RelExpr::compose(RelExpr::Named(movie), RelExpr::Named(genre)));
        assert_eq!(ext, [(n(cast), n(drama)), (n(cast), n(romance))].into_iter().collect());
        let id = relation_extension(&kb, &RelExpr::Identity(m));
        assert_eq!(id, [(n(film), n(film))].into_iter().collect());
        let empty = KnowledgeBase::new(kb.ontology.clone());
        assert!(relation_extension(&empty, &RelExpr::Named(genre)).is_empty());
    }
}
