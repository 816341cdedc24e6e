//! RDF/S exchange through a line-based triple format.
//!
//! One triple per line, three whitespace-separated terms. A term is a name,
//! a blank node `_:label`, or a double-quoted literal with an optional
//! `^^Datatype` suffix. Lines starting with `#` are comments and a trailing
//! `.` is ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use oml_core::calculus::parse_expr;
use oml_core::model::{Collection, KnowledgeBase, Literal, ObjectId, Ontology, Origin, Target, TypeId, TypeKind};
use oml_core::{Code, Diagnostic, Loc, Severity};

use crate::error::{Error, Result};

pub const RDF_TYPE: &str = "rdf:type";
pub const RDF_PROPERTY: &str = "rdf:Property";
pub const RDFS_CLASS: &str = "rdfs:Class";
pub const RDFS_RESOURCE: &str = "rdfs:Resource";
pub const RDFS_SUBCLASS_OF: &str = "rdfs:subClassOf";
pub const RDFS_SUBPROPERTY_OF: &str = "rdfs:subPropertyOf";
pub const RDFS_DOMAIN: &str = "rdfs:domain";
pub const RDFS_RANGE: &str = "rdfs:range";
pub const RDFS_COMMENT: &str = "rdfs:comment";
pub const OML_FUNCTION: &str = "oml:Function";
pub const OML_DISJOINT_WITH: &str = "oml:disjointWith";
pub const OML_INCOHERENT: &str = "oml:Incoherent";
pub const OML_ABOUT: &str = "oml:about";
pub const OML_DERIVED_AS: &str = "oml:derivedAs";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Name(String),
    Blank(String),
    Literal { lexical: String, datatype: Option<String> },
}

impl Term {
    fn name(s: &str) -> Self {
        Term::Name(s.to_string())
    }

    fn as_name(&self) -> Option<&str> {
        match self {
            Term::Name(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(n) => f.write_str(n),
            Term::Blank(b) => write!(f, "_:{b}"),
            Term::Literal { lexical, datatype } => {
                f.write_str("\"")?;
                for c in lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                match datatype {
                    Some(d) => write!(f, "^^{d}"),
                    None => Ok(()),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
    /// Source line, zero when built in memory.
    pub line: u32,
}

impl Triple {
    fn new(subject: Term, predicate: &str, object: Term) -> Self {
        Triple {
            subject,
            predicate: predicate.to_string(),
            object,
            line: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripleDoc {
    pub triples: Vec<Triple>,
}

impl fmt::Display for TripleDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.triples {
            writeln!(f, "{} {} {}", t.subject, t.predicate, t.object)?;
        }
        Ok(())
    }
}

fn lex_line(line: &str) -> std::result::Result<Vec<Term>, String> {
    let mut terms = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '"' {
            chars.next();
            let mut lexical = String::new();
            loop {
                match chars.next() {
                    None => return Err("unterminated literal".into()),
                    Some((_, '"')) => break,
                    Some((_, '\\')) => match chars.next() {
                        Some((_, 'n')) => lexical.push('\n'),
                        Some((_, 'r')) => lexical.push('\r'),
                        Some((_, 't')) => lexical.push('\t'),
                        Some((_, c @ ('"' | '\\'))) => lexical.push(c),
                        _ => return Err("bad escape in literal".into()),
                    },
                    Some((_, c)) => lexical.push(c),
                }
            }
            let mut datatype = None;
            if line[chars.peek().map_or(line.len(), |p| p.0)..].starts_with("^^") {
                chars.next();
                chars.next();
                let mut d = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() {
                        break;
                    }
                    d.push(c);
                    chars.next();
                }
                if d.is_empty() {
                    return Err("missing datatype after `^^`".into());
                }
                datatype = Some(d);
            }
            terms.push(Term::Literal { lexical, datatype });
        } else {
            let mut end = line.len();
            while let Some(&(i, c)) = chars.peek() {
                if c.is_whitespace() {
                    end = i;
                    break;
                }
                chars.next();
            }
            let word = &line[start..end];
            terms.push(match word.strip_prefix("_:") {
                Some(b) => Term::Blank(b.to_string()),
                None => Term::name(word),
            });
        }
    }
    if terms.last() == Some(&Term::name(".")) {
        terms.pop();
    }
    Ok(terms)
}

/// Read triple text. Malformed lines are reported and skipped.
pub fn parse_triples(text: &str, document: &str) -> (TripleDoc, Vec<Diagnostic>) {
    let mut doc = TripleDoc::default();
    let mut diags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i as u32 + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let problem = match lex_line(trimmed) {
            Err(e) => e,
            Ok(mut terms) if terms.len() == 3 => {
                let object = terms.pop().unwrap_or(Term::name(""));
                let predicate = terms.pop().unwrap_or(Term::name(""));
                let subject = terms.pop().unwrap_or(Term::name(""));
                match (predicate, &subject) {
                    (_, Term::Literal { .. }) => "a literal cannot be a subject".into(),
                    (Term::Name(predicate), _) => {
                        doc.triples.push(Triple {
                            subject,
                            predicate,
                            object,
                            line: n,
                        });
                        continue;
                    }
                    _ => "the predicate must be a name".into(),
                }
            }
            Ok(terms) => format!("expected 3 terms, found {}", terms.len()),
        };
        diags.push(Diagnostic::new(Severity::Error, Code::SYN001, problem).at(document, Loc::new(n, 1)));
    }
    (doc, diags)
}

fn object_term(coll: &Collection, obj: ObjectId) -> Term {
    match &coll.object(obj).id {
        Some(id) => Term::name(id),
        None => Term::Blank(format!("g{}", obj.index() + 1)),
    }
}

/// Export a first-order knowledge base as triples.
pub fn export_rdfs(kb: &KnowledgeBase) -> Result<TripleDoc> {
    let ont = &kb.ontology;
    if !ont.imports().is_empty() {
        return Err(Error::UnsupportedConstruct(
            "ontologies with imports; export the merged ontology instead".into(),
        ));
    }
    if !ont.ho_assertions().is_empty() {
        return Err(Error::HigherOrderUnsupported("type classifications and own slots".into()));
    }
    let name = |t: TypeId| Term::Name(ont.qualified_name(t));
    let mut out = Vec::new();
    let mut push = |s: Term, p: &str, o: Term| out.push(Triple::new(s, p, o));

    let schema_types = ont
        .types()
        .filter(|(_, d)| matches!(d.origin, Origin::Placeholder))
        .chain(ont.local_types());
    for (t, d) in schema_types {
        match d.kind {
            TypeKind::Data => return Err(Error::DataTypeUnsupported(d.name.clone())),
            TypeKind::Object => push(name(t), RDF_TYPE, Term::name(RDFS_CLASS)),
            TypeKind::BinaryRelation | TypeKind::Function => {
                push(name(t), RDF_TYPE, Term::name(RDF_PROPERTY));
                if d.kind == TypeKind::Function {
                    push(name(t), RDF_TYPE, Term::name(OML_FUNCTION));
                }
                if let Some((s, g)) = d.signature() {
                    push(name(t), RDFS_DOMAIN, name(s));
                    push(name(t), RDFS_RANGE, name(g));
                }
            }
        }
        if let Some(c) = &d.comment {
            push(
                name(t),
                RDFS_COMMENT,
                Term::Literal {
                    lexical: c.clone(),
                    datatype: None,
                },
            );
        }
    }
    for a in ont.axioms() {
        let relation = ont.kind(a.specific).is_relation();
        let (p, root) = if relation {
            (RDFS_SUBPROPERTY_OF, RDF_PROPERTY)
        } else {
            (RDFS_SUBCLASS_OF, RDFS_RESOURCE)
        };
        push(name(a.specific), p, a.generic.map_or(Term::name(root), name));
    }
    for &(a, b) in ont.disjoint_pairs() {
        push(name(a), OML_DISJOINT_WITH, name(b));
    }
    for &t in ont.incoherent_types() {
        if !ont.disjoint_pairs().contains(&(t, t)) {
            push(name(t), RDF_TYPE, Term::name(OML_INCOHERENT));
        }
    }
    for r in ont.registrations() {
        push(
            Term::name(&r.name),
            OML_DERIVED_AS,
            Term::Literal {
                lexical: r.expr.display(ont).to_string(),
                datatype: None,
            },
        );
    }

    for coll in &kb.collections {
        for (obj, o) in coll.objects() {
            let s = object_term(coll, obj);
            if let Some(a) = &o.about {
                push(
                    s.clone(),
                    OML_ABOUT,
                    Term::Literal {
                        lexical: a.clone(),
                        datatype: None,
                    },
                );
            }
            if o.classifications.is_empty() {
                push(s.clone(), RDF_TYPE, Term::name(RDFS_RESOURCE));
            }
            for &t in &o.classifications {
                push(s.clone(), RDF_TYPE, name(t));
            }
            let target = |t: &Target| -> Result<Term> {
                Ok(match t {
                    Target::Object(x) => object_term(coll, *x),
                    Target::Literal(l) => Term::Literal {
                        lexical: l.lexical.clone(),
                        datatype: Some(ont.qualified_name(l.datatype)),
                    },
                    Target::External(n) => Term::name(n),
                    Target::Type(t) => {
                        return Err(Error::HigherOrderUnsupported(format!(
                            "type `{}` used as an instance",
                            ont.qualified_name(*t)
                        )))
                    }
                })
            };
            for f in &o.functions {
                push(s.clone(), &ont.qualified_name(f.function), target(&f.target)?);
            }
            for r in &o.relations {
                let tgt = target(&r.target)?;
                for &c in &r.classifications {
                    push(s.clone(), &ont.qualified_name(c), tgt.clone());
                }
            }
        }
    }
    Ok(TripleDoc { triples: out })
}

/// An imported knowledge base with the warnings collected on the way.
#[derive(Debug)]
pub struct RdfImport {
    pub kb: KnowledgeBase,
    pub diagnostics: Vec<Diagnostic>,
}

struct Importer<'a> {
    document: &'a str,
    diagnostics: Vec<Diagnostic>,
}

impl Importer<'_> {
    fn warn(&mut self, t: &Triple, message: impl Into<String>) {
        self.diagnostics
            .push(Diagnostic::new(Severity::Warning, Code::RDF001, message).at(self.document, Loc::new(t.line, 1)));
    }
}

fn is_vocabulary(n: &str) -> bool {
    ["rdf:", "rdfs:", "oml:"].iter().any(|p| n.starts_with(p))
}

/// Import triples. Never fails: anything outside the mapped subset is
/// skipped with an RDF001 warning.
pub fn import_rdfs(doc: &TripleDoc, ontology_name: &str, document: &str) -> RdfImport {
    let mut im = Importer {
        document,
        diagnostics: Vec::new(),
    };
    let mut ont = Ontology::new(ontology_name);
    ont.source_name = document.to_string();
    let is_type_triple = |t: &Triple, class: &str| t.predicate == RDF_TYPE && t.object.as_name() == Some(class);

    // Schema: which subjects are classes and properties, in order.
    let functions: BTreeSet<&str> = doc
        .triples
        .iter()
        .filter(|t| is_type_triple(t, OML_FUNCTION))
        .filter_map(|t| t.subject.as_name())
        .collect();
    let mut domain = BTreeMap::new();
    let mut range = BTreeMap::new();
    for t in &doc.triples {
        if let (Some(s), Some(o)) = (t.subject.as_name(), t.object.as_name()) {
            match t.predicate.as_str() {
                RDFS_DOMAIN => domain.entry(s).or_insert(o),
                RDFS_RANGE => range.entry(s).or_insert(o),
                _ => continue,
            };
        }
    }
    let mut consumed = vec![false; doc.triples.len()];
    let mut properties = Vec::new();
    for (i, t) in doc.triples.iter().enumerate() {
        let Some(s) = t.subject.as_name() else { continue };
        let kind = if is_type_triple(t, RDFS_CLASS) {
            TypeKind::Object
        } else if is_type_triple(t, RDF_PROPERTY) {
            if !(domain.contains_key(s) && range.contains_key(s)) {
                im.warn(t, format!("property `{s}` needs both a domain and a range"));
                consumed[i] = true;
                continue;
            }
            if functions.contains(s) {
                TypeKind::Function
            } else {
                TypeKind::BinaryRelation
            }
        } else {
            continue;
        };
        consumed[i] = true;
        if ont.resolve_type_name(s).is_ok() {
            continue;
        }
        match ont.reserve_type(kind, s, Loc::new(t.line, 1)) {
            Ok(id) if kind != TypeKind::Object => properties.push((id, s, t.clone())),
            Ok(_) => {}
            Err(e) => im.warn(t, e.to_string()),
        }
    }
    for (id, s, t) in properties {
        if let Err(e) = ont.set_signature(id, domain[s], range[s]) {
            im.warn(&t, e.to_string());
        }
    }
    for (i, t) in doc.triples.iter().enumerate() {
        let (Some(s), o) = (t.subject.as_name(), &t.object) else { continue };
        let resolved = ont.resolve_type_name(s);
        let handled = match (t.predicate.as_str(), resolved) {
            (RDFS_DOMAIN | RDFS_RANGE, Ok(_)) => Ok(()),
            (RDF_TYPE, Ok(_)) if o.as_name() == Some(OML_FUNCTION) => Ok(()),
            (RDF_TYPE, Ok(ty)) if o.as_name() == Some(OML_INCOHERENT) => {
                ont.declare_incoherent(ty);
                Ok(())
            }
            (RDFS_SUBCLASS_OF | RDFS_SUBPROPERTY_OF, Ok(ty)) => {
                let generic = match o.as_name() {
                    Some(RDFS_RESOURCE | RDF_PROPERTY) => Ok(None),
                    Some(g) => ont.resolve_or_defer(g).map(Some),
                    None => Err(oml_core::Error::KindMismatch("a literal cannot be a supertype".into())),
                };
                generic.and_then(|g| ont.declare_subtype(ty, g))
            }
            (OML_DISJOINT_WITH, Ok(ty)) => match o.as_name().map(|g| ont.resolve_or_defer(g)) {
                Some(Ok(g)) => ont.declare_disjoint(ty, g),
                Some(Err(e)) => Err(e),
                None => Err(oml_core::Error::KindMismatch("a literal cannot be disjoint".into())),
            },
            (RDFS_COMMENT, Ok(ty)) => match o {
                Term::Literal { lexical, .. } => {
                    ont.set_comment(ty, Some(lexical.clone()));
                    Ok(())
                }
                _ => Err(oml_core::Error::KindMismatch("a comment must be a literal".into())),
            },
            (_, Ok(_)) if consumed[i] => Ok(()),
            (_, Ok(_)) => {
                im.warn(t, format!("`{}` is not mapped on types", t.predicate));
                Ok(())
            }
            _ => continue,
        };
        consumed[i] = true;
        if let Err(e) = handled {
            im.warn(t, e.to_string());
        }
    }
    for (i, t) in doc.triples.iter().enumerate() {
        if t.predicate != OML_DERIVED_AS {
            continue;
        }
        consumed[i] = true;
        let (Some(n), Term::Literal { lexical, .. }) = (t.subject.as_name(), &t.object) else {
            im.warn(t, "oml:derivedAs relates a name to an expression literal");
            continue;
        };
        if let Err(e) = parse_expr(&ont, lexical).and_then(|e| ont.register(n, e, Loc::new(t.line, 1))) {
            im.warn(t, e.to_string());
        }
    }
    // Classes named by instance triples but never declared.
    for (i, t) in doc.triples.iter().enumerate() {
        if consumed[i] || t.predicate != RDF_TYPE {
            continue;
        }
        if let Some(c) = t.object.as_name() {
            if !is_vocabulary(c) && ont.resolve_type_name(c).is_err() {
                im.warn(t, format!("class `{c}` is not declared"));
                if let Err(e) = ont.resolve_or_defer(c) {
                    im.warn(t, e.to_string());
                }
            }
        }
    }

    let coll = instances(doc, &ont, &consumed, &mut im);
    RdfImport {
        kb: KnowledgeBase::new(ont).with_collection(coll),
        diagnostics: im.diagnostics,
    }
}

fn instances(doc: &TripleDoc, ont: &Ontology, consumed: &[bool], im: &mut Importer) -> Collection {
    let mut coll = Collection::new();
    coll.source_name = im.document.to_string();
    let triples: Vec<&Triple> = doc
        .triples
        .iter()
        .zip(consumed)
        .filter(|(_, &c)| !c)
        .map(|(t, _)| t)
        .collect();
    let about: BTreeMap<&Term, &str> = triples
        .iter()
        .filter(|t| t.predicate == OML_ABOUT)
        .filter_map(|t| match &t.object {
            Term::Literal { lexical, .. } => Some((&t.subject, lexical.as_str())),
            _ => None,
        })
        .collect();
    let mut objects: BTreeMap<Term, ObjectId> = BTreeMap::new();
    let mut typed = BTreeSet::new();
    let mut make = |coll: &mut Collection, im: &mut Importer, t: &Triple, term: &Term| {
        if objects.contains_key(term) {
            return;
        }
        let id = match term {
            Term::Name(n) if ont.resolve_type_name(n).is_ok() || is_vocabulary(n) => return,
            Term::Name(n) => Some(n.as_str()),
            Term::Blank(_) => None,
            Term::Literal { .. } => return,
        };
        match coll.push_object(id, about.get(term).copied(), Loc::new(t.line, 1)) {
            Ok(o) => {
                objects.insert(term.clone(), o);
            }
            Err(e) => im.warn(t, e.to_string()),
        }
    };
    // Objects are the subjects, in document order. Names that only occur
    // as values stay references outside the collection.
    for t in &triples {
        make(&mut coll, im, t, &t.subject);
        if t.predicate == RDF_TYPE {
            typed.insert(&t.subject);
        }
    }
    let mut warned = BTreeSet::new();
    for t in &triples {
        let Some(&src) = objects.get(&t.subject) else { continue };
        if !typed.contains(&t.subject) && warned.insert(&t.subject) {
            im.warn(t, format!("resource `{}` has no rdf:type", t.subject));
        }
        let loc = Loc::new(t.line, 1);
        let result = match t.predicate.as_str() {
            OML_ABOUT => Ok(()),
            RDF_TYPE => match t.object.as_name() {
                Some(RDFS_RESOURCE) => Ok(()),
                Some(c) => ont.resolve_type_name(c).and_then(|c| coll.classify(ont, src, c)),
                None => Err(oml_core::Error::KindMismatch("rdf:type needs a class".into())),
            },
            p => match ont.resolve_type_name(p) {
                Ok(rho) if ont.kind(rho).is_relation() => {
                    let expected = ont.decl(rho).target;
                    let target = match &t.object {
                        Term::Literal { lexical, datatype } => {
                            let dt = match datatype {
                                Some(d) => ont.resolve_type_name(d),
                                None => Ok(expected
                                    .filter(|&g| ont.kind(g) == TypeKind::Data)
                                    .unwrap_or_else(|| ont.resolve_type_name("String").expect("String is built in"))),
                            };
                            dt.and_then(|d| Literal::new(ont, d, lexical)).map(Target::Literal)
                        }
                        term => match objects.get(term) {
                            Some(&o) => Ok(Target::Object(o)),
                            None => match term {
                                Term::Name(n) => coll.resolve_target(ont, n, &Vec::from_iter(expected)),
                                _ => Ok(Target::External(term.to_string())),
                            },
                        },
                    };
                    target.and_then(|target| {
                        if ont.kind(rho) == TypeKind::Function {
                            coll.push_function(ont, src, rho, target, loc).map(drop)
                        } else {
                            coll.push_relation(ont, src, target, [rho], loc).map(drop)
                        }
                    })
                }
                _ => {
                    im.warn(t, format!("predicate `{p}` is not a declared property"));
                    Ok(())
                }
            },
        };
        if let Err(e) = result {
            im.warn(t, e.to_string());
        }
    }
    coll
}
