//! Generic-style OML documents: a syntax tree that mirrors the core grammar,
//! its parser and canonical serializer, and conversion from model values.
//!
//! Tag spellings are normalized on input (`OML:` prefix, `Type.Entity`,
//! `Instance.Entity`, `Extends`, and `Individual.*` in higher-order mode);
//! output always uses the canonical spelling.

use oml_core::calculus::Registration;
use oml_core::hot::{HoAssertion, SlotEnd};
use oml_core::model::names::{is_local_name, TypeName};
use oml_core::{Collection, Loc, Ontology, TypeKind};

use crate::error::{Error, Result};
use crate::xml::{self, Element, Node, XmlWriter};

/// Marker that opens a sidecar comment.
pub const EXT_MARKER: &str = "OML-EXT";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept the higher-order grammar extension.
    pub higher_order: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmlDocument {
    pub root: Root,
    pub source_name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Root {
    Ontology(OntologyDoc),
    Collection(CollectionDoc),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OntologyDoc {
    pub items: Vec<OntItem>,
    pub loc: Loc,
}

/// Which attribute spelling an own-slot endpoint used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndKind {
    /// `source.Type` / `target.Type`: must name a type.
    Type,
    /// `source.Instance` / `target.Instance`: a type or an individual.
    Instance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OntItem {
    Extends {
        ontology: String,
        prefix: Option<String>,
        loc: Loc,
    },
    Type {
        kind: TypeKind,
        name: String,
        source: Option<String>,
        target: Option<String>,
        comment: Option<String>,
        loc: Loc,
    },
    Subtype {
        specific: String,
        generic: Option<String>,
        loc: Loc,
    },
    /// A type classified by a metatype (higher-order).
    Classification {
        instance: String,
        ty: String,
        loc: Loc,
    },
    /// A relation instance between types or individuals (higher-order).
    /// `specific` records the `<relation source.Instance target.Instance>`
    /// spelling.
    Slot {
        relation: String,
        source: (String, EndKind),
        target: (String, EndKind),
        specific: bool,
        loc: Loc,
    },
    Ext(ExtItem, Loc),
}

/// Sidecar statements carried in `<!-- OML-EXT ... -->` comments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtItem {
    Disjoint(String, String),
    Incoherent(String),
    Enumeration(String, Vec<String>),
    Derived(String, String),
}

impl ExtItem {
    fn parse(line: &str) -> Option<ExtItem> {
        let (key, rest) = line.split_once(':')?;
        let words: Vec<&str> = rest.split_whitespace().collect();
        match (key.trim(), words.as_slice()) {
            ("disjoint", [a, b]) => Some(ExtItem::Disjoint(a.to_string(), b.to_string())),
            ("incoherent", [t]) => Some(ExtItem::Incoherent(t.to_string())),
            ("enumeration", [name, values @ ..]) => Some(ExtItem::Enumeration(
                name.to_string(),
                values.iter().map(|v| v.to_string()).collect(),
            )),
            ("derived", _) => {
                let (name, expr) = rest.split_once('=')?;
                Some(ExtItem::Derived(name.trim().to_string(), expr.trim().to_string()))
            }
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            ExtItem::Disjoint(a, b) => format!("disjoint: {a} {b}"),
            ExtItem::Incoherent(t) => format!("incoherent: {t}"),
            ExtItem::Enumeration(n, vs) if vs.is_empty() => format!("enumeration: {n}"),
            ExtItem::Enumeration(n, vs) => format!("enumeration: {n} {}", vs.join(" ")),
            ExtItem::Derived(n, e) => format!("derived: {n} = {e}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CollectionDoc {
    pub id: Option<String>,
    pub ontology: Option<String>,
    pub objects: Vec<ObjectDoc>,
    pub loc: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObjectDoc {
    pub id: Option<String>,
    pub about: Option<String>,
    pub items: Vec<ObjItem>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjItem {
    Classification {
        ty: String,
        loc: Loc,
    },
    Relation {
        target: String,
        classes: Vec<(String, Loc)>,
        loc: Loc,
    },
    Function {
        target: String,
        function: String,
        function_loc: Loc,
        loc: Loc,
    },
}

// ---------------------------------------------------------------------------
// Parsing

struct Parser<'a> {
    doc: &'a str,
    options: ParseOptions,
}

/// Canonical spelling of a tag, or `None` if it is not a core tag.
pub fn canonical_tag(name: &str, higher_order: bool) -> Option<&'static str> {
    let name = name.strip_prefix("OML:").unwrap_or(name);
    Some(match name {
        "OML" => "OML",
        "Ontology" => "Ontology",
        "Collection" => "Collection",
        "extends" | "Extends" => "extends",
        "Type.Object" | "Type.Entity" => "Type.Object",
        "Type.BinaryRelation" => "Type.BinaryRelation",
        "Type.Function" => "Type.Function",
        "subtype" => "subtype",
        "classification" => "classification",
        "Instance.Object" | "Instance.Entity" => "Instance.Object",
        "Instance.BinaryRelation" => "Instance.BinaryRelation",
        "Instance.Function" => "Instance.Function",
        "Individual.Object" | "Individual.Entity" if higher_order => "Instance.Object",
        "Individual.BinaryRelation" if higher_order => "Instance.BinaryRelation",
        "Individual.Function" if higher_order => "Instance.Function",
        _ => return None,
    })
}

/// Parse generic-style OML text.
pub fn parse_oml(text: &str, source_name: &str, options: ParseOptions) -> Result<OmlDocument> {
    let nodes = xml::parse(text).map_err(|error| Error::Syntax {
        document: source_name.to_string(),
        error,
    })?;
    let p = Parser {
        doc: source_name,
        options,
    };
    let mut roots = xml::top_elements(&nodes);
    let Some(oml) = roots.next() else {
        return Err(p.grammar(1, "document has no <OML> element", Loc::new(1, 1)));
    };
    if let Some(extra) = roots.next() {
        return Err(p.grammar(1, "more than one top-level element", extra.loc));
    }
    if p.tag(oml) != Some("OML") {
        return Err(p.grammar(1, format!("expected <OML>, found <{}>", oml.name), oml.loc));
    }
    p.attributes(oml, 1, &[], &[])?;
    p.no_text(oml, 1)?;
    let mut children = oml.elements();
    let root = match (children.next(), children.next()) {
        (Some(e), None) => match p.tag(e) {
            Some("Ontology") => Root::Ontology(p.ontology(e)?),
            Some("Collection") => Root::Collection(p.collection(e)?),
            _ => return Err(p.grammar(1, format!("<{}> cannot appear directly in <OML>", e.name), e.loc)),
        },
        (None, _) => return Err(p.grammar(1, "<OML> must contain an <Ontology> or a <Collection>", oml.loc)),
        (Some(_), Some(e)) => return Err(p.grammar(1, "<OML> contains more than one child", e.loc)),
    };
    Ok(OmlDocument {
        root,
        source_name: source_name.to_string(),
    })
}

impl Parser<'_> {
    fn grammar(&self, rule: u8, message: impl Into<String>, loc: Loc) -> Error {
        Error::Grammar {
            document: self.doc.to_string(),
            rule,
            message: message.into(),
            loc,
        }
    }

    fn tag(&self, e: &Element) -> Option<&'static str> {
        canonical_tag(&e.name, self.options.higher_order)
    }

    fn no_text(&self, e: &Element, rule: u8) -> Result<()> {
        for n in &e.children {
            if let Node::Text(t, loc) = n {
                if !t.trim().is_empty() {
                    return Err(self.grammar(rule, format!("character data inside <{}>", e.name), *loc));
                }
            }
        }
        Ok(())
    }

    fn empty(&self, e: &Element, rule: u8) -> Result<()> {
        match e.elements().next() {
            Some(c) => Err(self.grammar(rule, format!("<{}> must be empty", e.name), c.loc)),
            None => self.no_text(e, rule),
        }
    }

    /// Values of `required` then `optional` attributes; anything else is an
    /// error against `rule`.
    fn attributes(&self, e: &Element, rule: u8, required: &[&str], optional: &[&str]) -> Result<Vec<Option<String>>> {
        for a in &e.attributes {
            if !required.contains(&a.name.as_str()) && !optional.contains(&a.name.as_str()) {
                return Err(self.grammar(rule, format!("<{}> has no attribute `{}`", e.name, a.name), a.loc));
            }
        }
        let mut out = Vec::new();
        for r in required {
            match e.attribute(r) {
                Some(v) => out.push(Some(v.to_string())),
                None => return Err(self.grammar(rule, format!("<{}> requires attribute `{r}`", e.name), e.loc)),
            }
        }
        out.extend(optional.iter().map(|o| e.attribute(o).map(str::to_string)));
        Ok(out)
    }

    fn attr_loc(e: &Element, name: &str) -> Loc {
        e.attributes.iter().find(|a| a.name == name).map_or(e.loc, |a| a.loc)
    }

    fn check(&self, e: &Element, attr: &str, value: &str, rule: u8) -> Result<()> {
        let ok = match rule {
            16 | 17 | 24 => is_local_name(value),
            18..=22 | 26 => TypeName::parse(value).is_some(),
            15 | 25 => !value.is_empty(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(self.grammar(rule, format!("`{value}` is not a valid `{attr}`"), Self::attr_loc(e, attr)))
        }
    }

    fn ontology(&self, o: &Element) -> Result<OntologyDoc> {
        self.attributes(o, 2, &[], &[])?;
        self.no_text(o, 2)?;
        let mut items = Vec::new();
        for n in &o.children {
            let e = match n {
                Node::Element(e) => e,
                Node::Comment(body, loc) => {
                    items.extend(self.sidecar(body, *loc)?);
                    continue;
                }
                Node::Text(..) => continue,
            };
            let item = match self.tag(e) {
                Some("extends") => {
                    self.empty(e, 3)?;
                    let v = self.attributes(e, 3, &["ontology"], &["prefix"])?;
                    let (ontology, prefix) = (v[0].clone().unwrap_or_default(), v[1].clone());
                    self.check(e, "ontology", &ontology, 15)?;
                    if let Some(p) = &prefix {
                        self.check(e, "prefix", p, 16)?;
                    }
                    OntItem::Extends {
                        ontology,
                        prefix,
                        loc: e.loc,
                    }
                }
                Some(tag @ ("Type.Object" | "Type.BinaryRelation" | "Type.Function")) => self.type_decl(e, tag)?,
                Some("subtype") => {
                    self.empty(e, 8)?;
                    let v = self.attributes(e, 8, &["specific"], &["generic"])?;
                    let specific = v[0].clone().unwrap_or_default();
                    self.check(e, "specific", &specific, 20)?;
                    if let Some(g) = &v[1] {
                        self.check(e, "generic", g, 21)?;
                    }
                    OntItem::Subtype {
                        specific,
                        generic: v[1].clone(),
                        loc: e.loc,
                    }
                }
                Some("classification") if self.options.higher_order => {
                    self.empty(e, 8)?;
                    let v = self.attributes(e, 8, &["instance", "type"], &[])?;
                    let (instance, ty) = (v[0].clone().unwrap_or_default(), v[1].clone().unwrap_or_default());
                    self.check(e, "instance", &instance, 26)?;
                    self.check(e, "type", &ty, 22)?;
                    OntItem::Classification {
                        instance,
                        ty,
                        loc: e.loc,
                    }
                }
                Some("Instance.BinaryRelation") if self.options.higher_order => {
                    self.empty(e, 8)?;
                    let v = self.attributes(
                        e,
                        8,
                        &["type"],
                        &["source.Type", "target.Type", "source.Instance", "target.Instance"],
                    )?;
                    let relation = v[0].clone().unwrap_or_default();
                    self.check(e, "type", &relation, 22)?;
                    let source = self.slot_end(e, "source", v[1].clone(), v[3].clone())?;
                    let target = self.slot_end(e, "target", v[2].clone(), v[4].clone())?;
                    OntItem::Slot {
                        relation,
                        source,
                        target,
                        specific: false,
                        loc: e.loc,
                    }
                }
                None if self.options.higher_order && TypeName::parse(&e.name).is_some() => {
                    self.empty(e, 8)?;
                    let v = self.attributes(e, 8, &["source.Instance", "target.Instance"], &[])?;
                    OntItem::Slot {
                        relation: e.name.clone(),
                        source: (v[0].clone().unwrap_or_default(), EndKind::Instance),
                        target: (v[1].clone().unwrap_or_default(), EndKind::Instance),
                        specific: true,
                        loc: e.loc,
                    }
                }
                _ => return Err(self.grammar(2, format!("<{}> cannot appear in <Ontology>", e.name), e.loc)),
            };
            items.push(item);
        }
        Ok(OntologyDoc { items, loc: o.loc })
    }

    fn slot_end(
        &self,
        e: &Element,
        which: &str,
        as_type: Option<String>,
        as_instance: Option<String>,
    ) -> Result<(String, EndKind)> {
        match (as_type, as_instance) {
            (Some(t), None) => {
                self.check(e, &format!("{which}.Type"), &t, 26)?;
                Ok((t, EndKind::Type))
            }
            (None, Some(i)) => Ok((i, EndKind::Instance)),
            _ => Err(self.grammar(
                8,
                format!("<{}> needs exactly one of `{which}.Type` and `{which}.Instance`", e.name),
                e.loc,
            )),
        }
    }

    fn type_decl(&self, e: &Element, tag: &str) -> Result<OntItem> {
        let (kind, rule) = match tag {
            "Type.Object" => (TypeKind::Object, 5),
            "Type.BinaryRelation" => (TypeKind::BinaryRelation, 6),
            _ => (TypeKind::Function, 7),
        };
        self.empty(e, rule)?;
        let v = if kind == TypeKind::Object {
            self.attributes(e, rule, &["name"], &["comment"])?
        } else {
            let mut v = self.attributes(e, rule, &["name", "source.Type", "target.Type"], &["comment"])?;
            let comment = v.pop().unwrap_or_default();
            for (attr, value, r) in [("source.Type", &v[1], 18), ("target.Type", &v[2], 19)] {
                self.check(e, attr, value.as_deref().unwrap_or_default(), r)?;
            }
            v.push(comment);
            v
        };
        let name = v[0].clone().unwrap_or_default();
        self.check(e, "name", &name, 17)?;
        let (source, target, comment) = if kind == TypeKind::Object {
            (None, None, v[1].clone())
        } else {
            (v[1].clone(), v[2].clone(), v[3].clone())
        };
        Ok(OntItem::Type {
            kind,
            name,
            source,
            target,
            comment,
            loc: e.loc,
        })
    }

    fn sidecar(&self, body: &str, loc: Loc) -> Result<Vec<OntItem>> {
        let Some(rest) = body.trim_start().strip_prefix(EXT_MARKER) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, line) in rest.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let line_loc = Loc::new(loc.line + i as u32, if i == 0 { loc.column } else { 1 });
            match ExtItem::parse(line) {
                Some(item) => out.push(OntItem::Ext(item, line_loc)),
                None => return Err(self.grammar(2, format!("unrecognized {EXT_MARKER} statement `{line}`"), line_loc)),
            }
        }
        Ok(out)
    }

    fn collection(&self, c: &Element) -> Result<CollectionDoc> {
        self.no_text(c, 9)?;
        let v = self.attributes(c, 9, &[], &["id", "ontology"])?;
        if let Some(id) = &v[0] {
            self.check(c, "id", id, 24)?;
        }
        if let Some(o) = &v[1] {
            self.check(c, "ontology", o, 15)?;
        }
        let mut objects = Vec::new();
        for e in c.elements() {
            if self.tag(e) != Some("Instance.Object") {
                return Err(self.grammar(10, format!("<{}> cannot appear in <Collection>", e.name), e.loc));
            }
            objects.push(self.object(e)?);
        }
        Ok(CollectionDoc {
            id: v[0].clone(),
            ontology: v[1].clone(),
            objects,
            loc: c.loc,
        })
    }

    fn object(&self, o: &Element) -> Result<ObjectDoc> {
        self.no_text(o, 11)?;
        let v = self.attributes(o, 11, &[], &["id", "about"])?;
        if let Some(id) = &v[0] {
            self.check(o, "id", id, 24)?;
        }
        if let Some(a) = &v[1] {
            self.check(o, "about", a, 25)?;
        }
        let mut items = Vec::new();
        for e in o.elements() {
            match self.object_item(e)? {
                Some(item) => items.push(item),
                None => return Err(self.grammar(11, format!("<{}> cannot appear in <{}>", e.name, o.name), e.loc)),
            }
        }
        Ok(ObjectDoc {
            id: v[0].clone(),
            about: v[1].clone(),
            items,
            loc: o.loc,
        })
    }

    /// One generic object-content element, or `None` if `e` is not one.
    fn object_item(&self, e: &Element) -> Result<Option<ObjItem>> {
        let item = match self.tag(e) {
            Some("classification") => {
                let (ty, loc) = self.classification(e)?;
                ObjItem::Classification { ty, loc }
            }
            Some(tag @ ("Instance.BinaryRelation" | "Instance.Function")) => {
                let rule = if tag == "Instance.Function" { 13 } else { 12 };
                self.no_text(e, rule)?;
                let target = self.attributes(e, rule, &["target.Instance"], &[])?.remove(0).unwrap_or_default();
                let mut classes = Vec::new();
                for c in e.elements() {
                    if self.tag(c) != Some("classification") {
                        return Err(self.grammar(rule, format!("<{}> cannot appear in <{}>", c.name, e.name), c.loc));
                    }
                    classes.push(self.classification(c)?);
                }
                if rule == 12 {
                    ObjItem::Relation {
                        target,
                        classes,
                        loc: e.loc,
                    }
                } else {
                    if classes.len() != 1 {
                        return Err(self.grammar(
                            13,
                            "a function instance needs exactly one classification",
                            e.loc,
                        ));
                    }
                    let (function, function_loc) = classes.remove(0);
                    ObjItem::Function {
                        target,
                        function,
                        function_loc,
                        loc: e.loc,
                    }
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(item))
    }

    fn classification(&self, e: &Element) -> Result<(String, Loc)> {
        self.empty(e, 14)?;
        let ty = self.attributes(e, 14, &["type"], &[])?.remove(0).unwrap_or_default();
        self.check(e, "type", &ty, 22)?;
        Ok((ty, e.loc))
    }
}

/// Parse a generic `<Instance.Object>` element found inside a document of
/// another style.
pub fn parse_object_element(e: &Element, source_name: &str, options: ParseOptions) -> Result<ObjectDoc> {
    Parser { doc: source_name, options }.object(e)
}

/// Parse a generic object-content element (`classification`,
/// `Instance.BinaryRelation`, `Instance.Function`); `None` for other tags.
pub fn parse_object_item(e: &Element, source_name: &str, options: ParseOptions) -> Result<Option<ObjItem>> {
    Parser { doc: source_name, options }.object_item(e)
}

// ---------------------------------------------------------------------------
// Serialization

/// Canonical generic-style text: two-space indentation, attributes in
/// grammar order, items in document order, empty elements self-closing.
pub fn serialize(doc: &OmlDocument) -> String {
    let mut w = XmlWriter::new();
    w.open("OML", &[]);
    match &doc.root {
        Root::Ontology(o) => write_ontology(&mut w, o),
        Root::Collection(c) => write_collection(&mut w, c),
    }
    w.close("OML");
    w.finish()
}

fn write_ontology(w: &mut XmlWriter, o: &OntologyDoc) {
    if o.items.is_empty() {
        w.empty("Ontology", &[]);
        return;
    }
    w.open("Ontology", &[]);
    for item in &o.items {
        match item {
            OntItem::Extends { ontology, prefix, .. } => {
                let mut a = vec![("ontology", ontology.as_str())];
                if let Some(p) = prefix {
                    a.push(("prefix", p));
                }
                w.empty("extends", &a);
            }
            OntItem::Type {
                kind,
                name,
                source,
                target,
                comment,
                ..
            } => {
                let mut a = vec![("name", name.as_str())];
                if let (Some(s), Some(t)) = (source, target) {
                    a.push(("source.Type", s));
                    a.push(("target.Type", t));
                }
                if let Some(c) = comment {
                    a.push(("comment", c));
                }
                w.empty(kind.tag(), &a);
            }
            OntItem::Subtype { specific, generic, .. } => {
                let mut a = vec![("specific", specific.as_str())];
                if let Some(g) = generic {
                    a.push(("generic", g));
                }
                w.empty("subtype", &a);
            }
            OntItem::Classification { instance, ty, .. } => {
                w.empty("classification", &[("instance", instance), ("type", ty)]);
            }
            OntItem::Slot {
                relation,
                source,
                target,
                specific,
                ..
            } => {
                let attr = |which: &'static str, k: EndKind| match (which, k) {
                    ("source", EndKind::Type) => "source.Type",
                    ("source", EndKind::Instance) => "source.Instance",
                    (_, EndKind::Type) => "target.Type",
                    (_, EndKind::Instance) => "target.Instance",
                };
                let ends = [(attr("source", source.1), source.0.as_str()), (attr("target", target.1), target.0.as_str())];
                if *specific {
                    w.empty(relation, &ends);
                } else {
                    let mut a = vec![("type", relation.as_str())];
                    a.extend(ends);
                    w.empty("Instance.BinaryRelation", &a);
                }
            }
            OntItem::Ext(e, _) => w.comment(&format!(" {EXT_MARKER} {} ", e.render())),
        }
    }
    w.close("Ontology");
}

fn write_collection(w: &mut XmlWriter, c: &CollectionDoc) {
    let mut a = Vec::new();
    if let Some(id) = &c.id {
        a.push(("id", id.as_str()));
    }
    if let Some(o) = &c.ontology {
        a.push(("ontology", o.as_str()));
    }
    if c.objects.is_empty() {
        w.empty("Collection", &a);
        return;
    }
    w.open("Collection", &a);
    for o in &c.objects {
        let mut a = Vec::new();
        if let Some(id) = &o.id {
            a.push(("id", id.as_str()));
        }
        if let Some(ab) = &o.about {
            a.push(("about", ab.as_str()));
        }
        if o.items.is_empty() {
            w.empty("Instance.Object", &a);
            continue;
        }
        w.open("Instance.Object", &a);
        for item in &o.items {
            match item {
                ObjItem::Classification { ty, .. } => w.empty("classification", &[("type", ty)]),
                ObjItem::Relation { target, classes, .. } => {
                    let a = [("target.Instance", target.as_str())];
                    if classes.is_empty() {
                        w.empty("Instance.BinaryRelation", &a);
                    } else {
                        w.open("Instance.BinaryRelation", &a);
                        for (c, _) in classes {
                            w.empty("classification", &[("type", c)]);
                        }
                        w.close("Instance.BinaryRelation");
                    }
                }
                ObjItem::Function { target, function, .. } => {
                    w.open("Instance.Function", &[("target.Instance", target)]);
                    w.empty("classification", &[("type", function)]);
                    w.close("Instance.Function");
                }
            }
        }
        w.close("Instance.Object");
    }
    w.close("Collection");
}

// ---------------------------------------------------------------------------
// From model values

/// The document an ontology serializes to: imports, local types, local
/// axioms, higher-order assertions, then sidecar statements.
pub fn ontology_document(ont: &Ontology) -> OntologyDoc {
    let name = |t| ont.qualified_name(t);
    let mut items = Vec::new();
    for i in ont.imports() {
        items.push(OntItem::Extends {
            ontology: i.uri.clone(),
            prefix: i.prefix.clone(),
            loc: i.loc,
        });
    }
    let mut enumerations = Vec::new();
    for (_, d) in ont.local_types() {
        if d.kind == TypeKind::Data {
            enumerations.push(ExtItem::Enumeration(d.name.clone(), d.values.clone().unwrap_or_default()));
            continue;
        }
        items.push(OntItem::Type {
            kind: d.kind,
            name: d.name.clone(),
            source: d.source.map(name),
            target: d.target.map(name),
            comment: d.comment.clone(),
            loc: d.loc,
        });
    }
    for a in ont.axioms().iter().filter(|a| !a.imported) {
        items.push(OntItem::Subtype {
            specific: name(a.specific),
            generic: a.generic.map(name),
            loc: a.loc,
        });
    }
    let end = |e: &SlotEnd| match e {
        SlotEnd::Type(t) => (name(*t), EndKind::Type),
        SlotEnd::Individual(n) => (n.clone(), EndKind::Instance),
    };
    for h in ont.ho_assertions().iter().filter(|h| !h.is_imported()) {
        items.push(match h {
            HoAssertion::TypeClassification { instance, metatype, loc, .. } => OntItem::Classification {
                instance: name(*instance),
                ty: name(*metatype),
                loc: *loc,
            },
            HoAssertion::OwnSlot {
                relation,
                source,
                target,
                loc,
                ..
            } => OntItem::Slot {
                relation: name(*relation),
                source: end(source),
                target: end(target),
                specific: false,
                loc: *loc,
            },
        });
    }
    let mut ext = enumerations;
    ext.extend(ont.disjoint_pairs().iter().map(|&(a, b)| ExtItem::Disjoint(name(a), name(b))));
    let self_disjoint = |t| ont.disjoint_pairs().contains(&(t, t));
    ext.extend(
        ont.incoherent_types()
            .iter()
            .filter(|&&t| !self_disjoint(t))
            .map(|&t| ExtItem::Incoherent(name(t))),
    );
    ext.extend(
        ont.registrations()
            .iter()
            .map(|Registration { name, expr, .. }| ExtItem::Derived(name.clone(), expr.display(ont).to_string())),
    );
    items.extend(ext.into_iter().map(|e| OntItem::Ext(e, Loc::default())));
    OntologyDoc {
        items,
        loc: Loc::default(),
    }
}

/// The generic-style document of a collection. Objects keep their order;
/// inside each, classifications come first, then functions, then relations.
pub fn collection_document(coll: &Collection, ont: &Ontology) -> CollectionDoc {
    let name = |t| ont.qualified_name(t);
    let objects = coll
        .objects()
        .map(|(_, o)| {
            let mut items: Vec<ObjItem> = o
                .classifications
                .iter()
                .map(|&t| ObjItem::Classification { ty: name(t), loc: o.loc })
                .collect();
            for f in &o.functions {
                items.push(ObjItem::Function {
                    target: coll.target_text(ont, &f.target),
                    function: name(f.function),
                    function_loc: f.loc,
                    loc: f.loc,
                });
            }
            for r in &o.relations {
                items.push(ObjItem::Relation {
                    target: coll.target_text(ont, &r.target),
                    classes: r.classifications.iter().map(|&t| (name(t), r.loc)).collect(),
                    loc: r.loc,
                });
            }
            ObjectDoc {
                id: o.id.clone(),
                about: o.about.clone(),
                items,
                loc: o.loc,
            }
        })
        .collect();
    CollectionDoc {
        id: coll.id.clone(),
        ontology: coll.ontology.clone(),
        objects,
        loc: Loc::default(),
    }
}

pub fn serialize_ontology(ont: &Ontology) -> String {
    serialize(&OmlDocument {
        root: Root::Ontology(ontology_document(ont)),
        source_name: ont.source_name.clone(),
    })
}

pub fn serialize_collection(coll: &Collection, ont: &Ontology) -> String {
    serialize(&OmlDocument {
        root: Root::Collection(collection_document(coll, ont)),
        source_name: coll.source_name.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<OmlDocument> {
        parse_oml(text, "t.oml", ParseOptions::default())
    }

    fn rule(r: Result<OmlDocument>) -> u8 {
        match r {
            Err(Error::Grammar { rule, .. }) => rule,
            other => panic!("expected a grammar error, got {other:?}"),
        }
    }

    #[test]
    fn grammar_errors_cite_rules() {
        assert_eq!(rule(parse("<OML></OML>")), 1);
        assert_eq!(rule(parse("<Ontology/>")), 1);
        assert_eq!(rule(parse("<OML><Ontology/><Collection/></OML>")), 1);
        assert_eq!(rule(parse("<OML><Ontology><Foo/></Ontology></OML>")), 2);
        assert_eq!(rule(parse("<OML><Ontology><Type.Object/></Ontology></OML>")), 5);
        assert_eq!(rule(parse("<OML><Ontology><Type.Object name=\"a:b\"/></Ontology></OML>")), 17);
        assert_eq!(
            rule(parse("<OML><Ontology><Type.Function name=\"f\" source.Type=\"A\"/></Ontology></OML>")),
            7
        );
        assert_eq!(rule(parse("<OML><Ontology><subtype generic=\"A\"/></Ontology></OML>")), 8);
        assert_eq!(rule(parse("<OML><Collection><Type.Object name=\"A\"/></Collection></OML>")), 10);
        assert_eq!(
            rule(parse("<OML><Collection><Instance.Object><subtype specific=\"A\"/></Instance.Object></Collection></OML>")),
            11
        );
        assert_eq!(
            rule(parse(
                "<OML><Collection><Instance.Object><Instance.Function target.Instance=\"1\"/></Instance.Object></Collection></OML>"
            )),
            13
        );
        assert_eq!(
            rule(parse("<OML><Collection><Instance.Object><classification/></Instance.Object></Collection></OML>")),
            14
        );
        assert_eq!(rule(parse("<OML><Collection id=\"a b\"/></OML>")), 24);
        assert!(matches!(parse("<OML>"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn synonyms_and_higher_order_gate() {
        let a = parse("<OML:OML><OML:Ontology><Type.Entity name=\"A\"></Type.Entity></OML:Ontology></OML:OML>").unwrap();
        let b = parse("<OML><Ontology><Type.Object name=\"A\"/></Ontology></OML>").unwrap();
        assert_eq!(a.root, b.root);
        let ho = "<OML><Ontology><classification instance=\"Red\" type=\"Color\"/></Ontology></OML>";
        assert_eq!(rule(parse(ho)), 2);
        let opts = ParseOptions { higher_order: true };
        assert!(parse_oml(ho, "t", opts).is_ok());
        let missing = "<OML><Ontology><classification instance=\"Red\"/></Ontology></OML>";
        assert!(matches!(parse_oml(missing, "t", opts), Err(Error::Grammar { rule: 8, .. })));
        let ind = "<OML><Collection><Individual.Object id=\"x\"/></Collection></OML>";
        assert!(parse(ind).is_err());
        assert!(parse_oml(ind, "t", opts).is_ok());
    }

    #[test]
    fn sidecar_round_trip() {
        let text = "<OML><Ontology><Type.Object name=\"A\"/>\
            <!-- OML-EXT\n disjoint: A B\n incoherent: C\n enumeration: Rating G PG\n derived: d = transpose(r)\n-->\
            </Ontology></OML>";
        let doc = parse(text).unwrap();
        let Root::Ontology(o) = &doc.root else { panic!() };
        assert_eq!(o.items.len(), 5);
        let again = parse(&serialize(&doc)).unwrap();
        assert_eq!(again, doc);
        assert!(parse("<OML><Ontology><!-- OML-EXT bogus --></Ontology></OML>").is_err());
        assert!(parse("<OML><Ontology><!-- plain comment --></Ontology></OML>").is_ok());
    }

    #[test]
    fn escaping() {
        let text = "<OML><Collection><Instance.Object id=\"c\"><Instance.Function target.Instance=\"Rich &lt;Blaine&gt;\">\
            <classification type=\"character\"/></Instance.Function></Instance.Object></Collection></OML>";
        let doc = parse(text).unwrap();
        let out = serialize(&doc);
        assert!(out.contains("target.Instance=\"Rich &lt;Blaine&gt;\""));
        assert_eq!(parse(&out).unwrap(), doc);
    }
}
