//! Translation between the generic style (core tags) and the specific style,
//! where each ontology type name is itself an element or attribute name.
//!
//! A specific document is a sequence of top-level elements, optionally
//! preceded by a header comment naming the collection:
//!
//! ```text
//! <!-- OML-SPECIFIC ontology="movie.oml" id="c1" -->
//! <Movie id="Casablanca_1942" year="1942">
//!   <genre target.Instance="Drama"/>
//! </Movie>
//! ```

use std::collections::BTreeSet;

use oml_core::model::{Collection, CollectionBuilder, ObjectId, Ontology, Target, TypeId, TypeKind};
use oml_core::Loc;

use crate::error::{Error, Result};
use crate::xml::{self, Element, Node, XmlWriter};
use crate::xmlio::{canonical_tag, parse_object_element, parse_object_item, ObjItem, ObjectDoc, ParseOptions};

pub const HEADER_MARKER: &str = "OML-SPECIFIC";

/// The unique most specific entity type among `obj`'s classifications.
fn element_type(coll: &Collection, ont: &Ontology, obj: ObjectId) -> Result<TypeId> {
    let name = coll.display_name(obj);
    let s = &coll.object(obj).classifications;
    let minimal: Vec<TypeId> = s
        .iter()
        .copied()
        .filter(|&t| {
            !s.iter()
                .any(|&u| u != t && ont.is_subtype(u, t) && !ont.is_subtype(t, u))
        })
        .collect();
    match minimal.as_slice() {
        [] => Err(Error::MissingClassification { instance: name }),
        [t] => Ok(*t),
        many => Err(Error::AmbiguousClassification {
            instance: name,
            candidates: many.iter().map(|&t| ont.qualified_name(t)).collect(),
        }),
    }
}

fn reserved(name: &str) -> Result<()> {
    if canonical_tag(name, true).is_some() || matches!(name, "id" | "about" | "target.Instance" | "source.Instance") {
        Err(Error::ReservedTag { name: name.to_string() })
    } else {
        Ok(())
    }
}

/// Render a collection in the specific style.
pub fn to_specific(coll: &Collection, ont: &Ontology) -> Result<String> {
    let anonymous: BTreeSet<ObjectId> = coll
        .objects()
        .filter(|(_, o)| o.id.is_none())
        .map(|(i, _)| i)
        .collect();
    let mut w = XmlWriter::new();
    let mut header = String::new();
    if let Some(o) = &coll.ontology {
        header.push_str(&format!(" ontology=\"{}\"", xml::escape_attribute(o)));
    }
    if let Some(id) = &coll.id {
        header.push_str(&format!(" id=\"{}\"", xml::escape_attribute(id)));
    }
    w.comment(&format!(" {HEADER_MARKER}{header} "));
    for (obj, o) in coll.objects() {
        let tag = ont.qualified_name(element_type(coll, ont, obj)?);
        reserved(&tag)?;
        let name = coll.display_name(obj);
        let check_target = |t: &Target| match t {
            Target::Object(x) if anonymous.contains(x) => Err(Error::UnnamedInstance { referrer: name.clone() }),
            _ => Ok(()),
        };
        let mut attrs = vec![("id".to_string(), name.clone())];
        if let Some(a) = &o.about {
            attrs.push(("about".to_string(), a.clone()));
        }
        for f in &o.functions {
            check_target(&f.target)?;
            let fname = ont.qualified_name(f.function);
            reserved(&fname)?;
            attrs.push((fname, coll.target_text(ont, &f.target)));
        }
        let mut children = Vec::new();
        for r in &o.relations {
            check_target(&r.target)?;
            let target = coll.target_text(ont, &r.target);
            for &c in &r.classifications {
                let rname = ont.qualified_name(c);
                reserved(&rname)?;
                children.push((rname, target.clone()));
            }
        }
        let attrs: Vec<(&str, &str)> = attrs.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        if children.is_empty() {
            w.empty(&tag, &attrs);
        } else {
            w.open(&tag, &attrs);
            for (rname, target) in &children {
                w.empty(rname, &[("target.Instance", target)]);
            }
            w.close(&tag);
        }
    }
    Ok(w.finish())
}

struct Reader<'a> {
    ont: &'a Ontology,
    doc: &'a str,
    options: ParseOptions,
}

impl Reader<'_> {
    fn resolve(&self, name: &str, loc: Loc, accept: impl Fn(TypeKind) -> bool) -> Result<TypeId> {
        match self.ont.resolve_type_name(name) {
            Ok(t) if accept(self.ont.kind(t)) => Ok(t),
            _ => Err(Error::UnknownTag {
                document: self.doc.to_string(),
                name: name.to_string(),
                loc,
            }),
        }
    }

    fn unknown_attribute(&self, e: &Element, a: &xml::Attribute) -> Error {
        Error::UnknownAttribute {
            document: self.doc.to_string(),
            element: e.name.clone(),
            attribute: a.name.clone(),
            loc: a.loc,
        }
    }

    fn grammar(&self, rule: u8, message: String, loc: Loc) -> Error {
        Error::Grammar {
            document: self.doc.to_string(),
            rule,
            message,
            loc,
        }
    }

    fn no_text(&self, e: &Element) -> Result<()> {
        match e.children.iter().find(|n| matches!(n, Node::Text(..)) && !n.is_blank_text()) {
            Some(Node::Text(_, loc)) => Err(self.grammar(11, format!("character data inside <{}>", e.name), *loc)),
            _ => Ok(()),
        }
    }

    fn generic_object(&self, b: &mut CollectionBuilder, o: &ObjectDoc) -> Result<()> {
        let err = |e| Error::model(self.doc, e);
        let obj = b.object(o.id.as_deref(), o.about.as_deref(), o.loc).map_err(err)?;
        for item in &o.items {
            self.item(b, obj, item)?;
        }
        Ok(())
    }

    fn item(&self, b: &mut CollectionBuilder, obj: ObjectId, item: &ObjItem) -> Result<()> {
        match item {
            ObjItem::Classification { ty, loc } => b.classify(obj, ty, *loc).map_err(|e| Error::model(self.doc, e))?,
            ObjItem::Relation { target, classes, loc } => b.relation(obj, target, classes.clone(), *loc),
            ObjItem::Function {
                target, function, loc, ..
            } => b.function(obj, function, target, *loc),
        }
        Ok(())
    }

    /// A relation element `<rho target.Instance="..."/>`, nested (source is
    /// `parent`) or at top level with `source.Instance`.
    fn relation(&self, b: &mut CollectionBuilder, e: &Element, parent: Option<ObjectId>) -> Result<()> {
        self.resolve(&e.name, e.loc, TypeKind::is_relation)?;
        if let Some(c) = e.elements().next() {
            return Err(self.grammar(12, format!("<{}> must be empty", e.name), c.loc));
        }
        self.no_text(e)?;
        let mut target = None;
        let mut source = None;
        for a in &e.attributes {
            match a.name.as_str() {
                "target.Instance" => target = Some(a.value.as_str()),
                "source.Instance" => source = Some(a.value.as_str()),
                _ => return Err(self.unknown_attribute(e, a)),
            }
        }
        let Some(target) = target else {
            return Err(self.grammar(12, format!("<{}> requires attribute `target.Instance`", e.name), e.loc));
        };
        let classes = vec![(e.name.clone(), e.loc)];
        match (source, parent) {
            (Some(s), _) => b.relation_from(s, target, classes, e.loc),
            (None, Some(p)) => b.relation(p, target, classes, e.loc),
            (None, None) => {
                return Err(self.grammar(
                    12,
                    format!("top-level <{}> requires attribute `source.Instance`", e.name),
                    e.loc,
                ))
            }
        }
        Ok(())
    }

    fn object(&self, b: &mut CollectionBuilder, e: &Element) -> Result<()> {
        let err = |x| Error::model(self.doc, x);
        self.no_text(e)?;
        let mut functions = Vec::new();
        for a in &e.attributes {
            if a.name != "id" && a.name != "about" {
                match self.ont.resolve_type_name(&a.name) {
                    Ok(f) if self.ont.kind(f) == TypeKind::Function => functions.push(a),
                    _ => return Err(self.unknown_attribute(e, a)),
                }
            }
        }
        let obj = b.object(e.attribute("id"), e.attribute("about"), e.loc).map_err(err)?;
        b.classify(obj, &e.name, e.loc).map_err(err)?;
        for a in functions {
            b.function(obj, &a.name, &a.value, a.loc);
        }
        for c in e.elements() {
            match parse_object_item(c, self.doc, self.options)? {
                Some(item) => self.item(b, obj, &item)?,
                None => self.relation(b, c, Some(obj))?,
            }
        }
        Ok(())
    }
}

fn header(nodes: &[Node]) -> Option<Element> {
    nodes.iter().find_map(|n| match n {
        Node::Comment(body, _) => {
            let rest = body.trim().strip_prefix(HEADER_MARKER)?;
            match xml::parse(&format!("<h {rest}/>")).ok()?.into_iter().next()? {
                Node::Element(e) => Some(e),
                _ => None,
            }
        }
        _ => None,
    })
}

/// Read a specific-style document (or one mixing specific elements with
/// generic `Instance.Object` elements) as a collection of `ont`. The
/// elements may stand alone or sit inside a `<Collection>`.
pub fn to_generic(text: &str, ont: &Ontology, source_name: &str, options: ParseOptions) -> Result<Collection> {
    let nodes = xml::parse(text).map_err(|error| Error::Syntax {
        document: source_name.to_string(),
        error,
    })?;
    let r = Reader {
        ont,
        doc: source_name,
        options,
    };
    // A lone `<Collection>` (optionally inside `<OML>`) wraps the elements.
    let mut top: Vec<&Element> = xml::top_elements(&nodes).collect();
    let mut wrapper = header(&nodes);
    loop {
        match top.as_slice() {
            [w] if matches!(canonical_tag(&w.name, true), Some("OML" | "Collection")) => {
                if canonical_tag(&w.name, true) == Some("Collection") {
                    wrapper = Some((*w).clone());
                }
                top = w.elements().collect();
            }
            _ => break,
        }
    }
    let mut b = CollectionBuilder::new(ont);
    {
        let c = b.collection_mut();
        c.source_name = source_name.to_string();
        if let Some(h) = wrapper {
            c.id = h.attribute("id").map(str::to_string);
            c.ontology = h.attribute("ontology").map(str::to_string);
        }
    }
    for e in top {
        if canonical_tag(&e.name, options.higher_order) == Some("Instance.Object") {
            r.generic_object(&mut b, &parse_object_element(e, source_name, options)?)?;
        } else if ont.resolve_type_name(&e.name).is_ok_and(|t| ont.kind(t).is_relation()) {
            r.relation(&mut b, e, None)?;
        } else {
            r.resolve(&e.name, e.loc, |k| k == TypeKind::Object)?;
            r.object(&mut b, e)?;
        }
    }
    b.finish().map_err(|e| Error::model(source_name, e))
}
