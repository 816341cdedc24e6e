//! Turning parsed documents into model values: `extends` resolution,
//! two-pass type declaration, and collection building.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use oml_core::calculus::parse_expr;
use oml_core::hot::SlotEnd;
use oml_core::{Collection, CollectionBuilder, KnowledgeBase, Mode, Ontology, TypeKind};

use crate::error::{Error, ModelResult, Result};
use crate::xmlio::{parse_oml, CollectionDoc, EndKind, ExtItem, OmlDocument, OntItem, OntologyDoc, ParseOptions, Root};

/// Text of a document named by URI.
pub struct Source {
    pub text: String,
    pub name: String,
}

/// Maps `extends`/`ontology` URIs to document text. No network access.
pub trait Resolver {
    fn resolve(&self, uri: &str) -> Option<Source>;
}

/// Resolves nothing.
pub struct NoResolver;

impl Resolver for NoResolver {
    fn resolve(&self, _: &str) -> Option<Source> {
        None
    }
}

/// In-memory documents keyed by URI.
#[derive(Default)]
pub struct MemoryResolver(pub BTreeMap<String, String>);

impl Resolver for MemoryResolver {
    fn resolve(&self, uri: &str) -> Option<Source> {
        self.0.get(uri).map(|t| Source {
            text: t.clone(),
            name: uri.to_string(),
        })
    }
}

/// URI to file mappings, falling back to treating the URI as a path
/// relative to `base` when it names an existing file.
#[derive(Default)]
pub struct FileResolver {
    pub map: BTreeMap<String, PathBuf>,
    pub base: Option<PathBuf>,
}

impl Resolver for FileResolver {
    fn resolve(&self, uri: &str) -> Option<Source> {
        let path = match self.map.get(uri) {
            Some(p) => p.clone(),
            None => {
                let p = Path::new(uri);
                let p = match &self.base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.to_path_buf(),
                };
                if !p.is_file() {
                    return None;
                }
                p
            }
        };
        let text = std::fs::read_to_string(&path).ok()?;
        Some(Source {
            text,
            name: path.display().to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub mode: Mode,
    pub higher_order: bool,
}

impl LoadOptions {
    pub fn parse_options(self) -> ParseOptions {
        ParseOptions {
            higher_order: self.higher_order,
        }
    }
}

/// Build an ontology from its document, loading imports through `resolver`.
pub fn load_ontology(
    doc: &OntologyDoc,
    source_name: &str,
    resolver: &dyn Resolver,
    options: LoadOptions,
) -> Result<Ontology> {
    let mut stack = vec![source_name.to_string()];
    load_ontology_inner(doc, source_name, resolver, options, &mut stack)
}

fn ontology_name(source_name: &str) -> String {
    Path::new(source_name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| source_name.to_string())
}

fn load_ontology_inner(
    doc: &OntologyDoc,
    source_name: &str,
    resolver: &dyn Resolver,
    options: LoadOptions,
    stack: &mut Vec<String>,
) -> Result<Ontology> {
    let d = source_name;
    let mut ont = Ontology::new(ontology_name(source_name)).with_mode(options.mode);
    ont.source_name = source_name.to_string();
    ont.set_higher_order(options.higher_order);

    for item in &doc.items {
        if let OntItem::Extends { ontology, prefix, loc } = item {
            if stack.contains(ontology) {
                let mut chain = stack.clone();
                chain.push(ontology.clone());
                return Err(Error::ImportCycle { chain });
            }
            let src = resolver
                .resolve(ontology)
                .ok_or_else(|| Error::UnresolvableImport { uri: ontology.clone() })?;
            let parsed = parse_oml(&src.text, &src.name, options.parse_options())?;
            let Root::Ontology(inner) = &parsed.root else {
                return Err(Error::Grammar {
                    document: src.name,
                    rule: 3,
                    message: format!("`{ontology}` is not an ontology"),
                    loc: Default::default(),
                });
            };
            stack.push(ontology.clone());
            let other = load_ontology_inner(inner, &src.name, resolver, options, stack)?;
            stack.pop();
            ont.import(ontology, prefix.as_deref(), &other, *loc).located(d, *loc)?;
        }
    }

    // Names first so declarations may refer forward.
    for item in &doc.items {
        match item {
            OntItem::Type { kind, name, loc, .. } => {
                ont.reserve_type(*kind, name, *loc).located(d, *loc)?;
            }
            OntItem::Ext(ExtItem::Enumeration(name, values), loc) => {
                let id = ont.reserve_type(TypeKind::Data, name, *loc).located(d, *loc)?;
                ont.set_enumeration(id, values.clone());
            }
            _ => {}
        }
    }
    for item in &doc.items {
        if let OntItem::Type {
            name,
            source,
            target,
            comment,
            loc,
            ..
        } = item
        {
            let id = ont.resolve_type_name(name).located(d, *loc)?;
            if let (Some(s), Some(t)) = (source, target) {
                ont.set_signature(id, s, t).located(d, *loc)?;
            }
            ont.set_comment(id, comment.clone());
        }
    }
    for item in &doc.items {
        match item {
            OntItem::Subtype { specific, generic, loc } => {
                let s = ont.resolve_or_defer_at(specific, *loc).located(d, *loc)?;
                let g = match generic {
                    Some(g) => Some(ont.resolve_or_defer_at(g, *loc).located(d, *loc)?),
                    None => None,
                };
                ont.push_subtype(s, g, *loc).located(d, *loc)?;
            }
            OntItem::Classification { instance, ty, loc } => {
                let i = ont.resolve_or_defer_at(instance, *loc).located(d, *loc)?;
                let t = ont.resolve_or_defer_at(ty, *loc).located(d, *loc)?;
                ont.push_type_classification(i, t, *loc).located(d, *loc)?;
            }
            OntItem::Slot {
                relation,
                source,
                target,
                loc,
                ..
            } => {
                let r = ont
                    .resolve_type_name(relation)
                    .map_err(|_| oml_core::Error::UnresolvedRef(relation.clone()))
                    .located(d, *loc)?;
                let mut end = |(name, kind): &(String, EndKind)| -> Result<SlotEnd> {
                    Ok(match kind {
                        EndKind::Type => SlotEnd::Type(ont.resolve_or_defer_at(name, *loc).located(d, *loc)?),
                        EndKind::Instance => ont.slot_end(name),
                    })
                };
                let (s, t) = (end(source)?, end(target)?);
                ont.push_own_slot(r, s, t, *loc).located(d, *loc)?;
            }
            _ => {}
        }
    }
    for item in &doc.items {
        if let OntItem::Ext(e, loc) = item {
            match e {
                ExtItem::Disjoint(a, b) => {
                    let a = ont.resolve_or_defer_at(a, *loc).located(d, *loc)?;
                    let b = ont.resolve_or_defer_at(b, *loc).located(d, *loc)?;
                    ont.declare_disjoint(a, b).located(d, *loc)?;
                }
                ExtItem::Incoherent(t) => {
                    let t = ont.resolve_or_defer_at(t, *loc).located(d, *loc)?;
                    ont.declare_incoherent(t);
                }
                ExtItem::Derived(name, expr) => {
                    let e = parse_expr(&ont, expr).located(d, *loc)?;
                    ont.register(name, e, *loc).located(d, *loc)?;
                }
                ExtItem::Enumeration(..) => {}
            }
        }
    }
    Ok(ont)
}

/// Build a collection against `ont`. Targets are resolved after every object
/// is known, so forward references work.
pub fn load_collection(doc: &CollectionDoc, ont: &Ontology, source_name: &str) -> Result<Collection> {
    use crate::xmlio::ObjItem;
    let err = |e| Error::model(source_name, e);
    let mut b = CollectionBuilder::new(ont);
    {
        let c = b.collection_mut();
        c.id = doc.id.clone();
        c.ontology = doc.ontology.clone();
        c.source_name = source_name.to_string();
    }
    for o in &doc.objects {
        let obj = b.object(o.id.as_deref(), o.about.as_deref(), o.loc).map_err(err)?;
        for item in &o.items {
            match item {
                ObjItem::Classification { ty, loc } => b.classify(obj, ty, *loc).map_err(err)?,
                ObjItem::Relation { target, classes, loc } => b.relation(obj, target, classes.clone(), *loc),
                ObjItem::Function {
                    target, function, loc, ..
                } => b.function(obj, function, target, *loc),
            }
        }
    }
    b.finish().map_err(err)
}

/// Load any document. A collection is paired with `ontology` when given,
/// otherwise with the ontology its `ontology` attribute names.
pub fn load_document(
    doc: &OmlDocument,
    resolver: &dyn Resolver,
    options: LoadOptions,
    ontology: Option<Ontology>,
) -> Result<KnowledgeBase> {
    match &doc.root {
        Root::Ontology(o) => Ok(KnowledgeBase::new(load_ontology(o, &doc.source_name, resolver, options)?)),
        Root::Collection(c) => {
            let ont = match (ontology, &c.ontology) {
                (Some(o), _) => o,
                (None, Some(uri)) => {
                    let src = resolver
                        .resolve(uri)
                        .ok_or_else(|| Error::UnresolvableImport { uri: uri.clone() })?;
                    let parsed = parse_oml(&src.text, &src.name, options.parse_options())?;
                    match load_document(&parsed, resolver, options, None)? {
                        kb if kb.collections.is_empty() => kb.ontology,
                        _ => {
                            return Err(Error::Grammar {
                                document: src.name,
                                rule: 15,
                                message: format!("`{uri}` is not an ontology"),
                                loc: Default::default(),
                            })
                        }
                    }
                }
                (None, None) => {
                    let mut o = Ontology::new("unbound").with_mode(options.mode);
                    o.set_higher_order(options.higher_order);
                    o
                }
            };
            let coll = load_collection(c, &ont, &doc.source_name)?;
            Ok(KnowledgeBase::new(ont).with_collection(coll))
        }
    }
}

/// Parse and load in one step.
pub fn read_document(
    text: &str,
    source_name: &str,
    resolver: &dyn Resolver,
    options: LoadOptions,
    ontology: Option<Ontology>,
) -> Result<KnowledgeBase> {
    let doc = parse_oml(text, source_name, options.parse_options())?;
    load_document(&doc, resolver, options, ontology)
}
