//! XOL module exchange.
//!
//! Object types become classes, relation and function types become slots,
//! objects become individuals, and instances of a slot become `slot-values`.
//! XOL does not tell functions from relations, so a function comes back as
//! a plain relation unless a hint ontology declares a function of that name.

use oml_core::calculus::parse_expr;
use oml_core::dtd::DtdDocument;
use oml_core::hot::{HoAssertion, SlotEnd};
use oml_core::model::{CollectionBuilder, KnowledgeBase, Ontology, Origin, TypeId, TypeKind};
use oml_core::Loc;

use crate::error::{Error, Result};
use crate::xml::{self, Element, XmlWriter};

/// The XOL core DTD, completed with the declaration of `value`, which the
/// core content models reference.
pub const XOL_DTD: &str = "<!ELEMENT module
  (name, class*, slot*, individual*)
>
<!ELEMENT name (#PCDATA)>
<!ELEMENT class
  (name, (subclass-of | instance-of | slot-values)* )
>
<!ELEMENT slot
  (name, (domain | slot-value-type | slot-values)* )
>
<!ELEMENT individual
  (name, (instance-of | slot-values)* )
>
<!ELEMENT slot-values
  (name, value*)
>
<!ELEMENT subclass-of (#PCDATA)>
<!ELEMENT instance-of (#PCDATA)>
<!ELEMENT domain (#PCDATA)>
<!ELEMENT slot-value-type (#PCDATA)>
<!ELEMENT value (#PCDATA)>
";

/// [`XOL_DTD`] plus `documentation` on classes and slots and `slot-inverse`
/// on slots.
pub const XOL_EXTENDED_DTD: &str = "<!ELEMENT module (name, class*, slot*, individual*)>
<!ELEMENT name (#PCDATA)>
<!ELEMENT class (name, (subclass-of | instance-of | slot-values | documentation)*)>
<!ELEMENT slot (name, (domain | slot-value-type | slot-values | slot-inverse | documentation)*)>
<!ELEMENT individual (name, (instance-of | slot-values)*)>
<!ELEMENT slot-values (name, value*)>
<!ELEMENT subclass-of (#PCDATA)>
<!ELEMENT instance-of (#PCDATA)>
<!ELEMENT domain (#PCDATA)>
<!ELEMENT slot-value-type (#PCDATA)>
<!ELEMENT value (#PCDATA)>
<!ELEMENT slot-inverse (#PCDATA)>
<!ELEMENT documentation (#PCDATA)>
";

pub fn xol_dtd(extended: bool) -> DtdDocument {
    let text = if extended { XOL_EXTENDED_DTD } else { XOL_DTD };
    crate::dtd::parse_dtd(text, "xol.dtd").expect("built-in XOL DTD parses")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct XolOptions {
    /// Allow `documentation` and `slot-inverse`, which the core DTD lacks.
    pub extended: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlotValues {
    pub name: String,
    pub values: Vec<String>,
    pub loc: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XolClass {
    pub name: String,
    pub subclass_of: Vec<String>,
    pub instance_of: Vec<String>,
    pub slot_values: Vec<SlotValues>,
    pub documentation: Option<String>,
    pub loc: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XolSlot {
    pub name: String,
    pub domain: Vec<String>,
    pub slot_value_type: Vec<String>,
    pub slot_values: Vec<SlotValues>,
    pub inverse: Vec<String>,
    pub documentation: Option<String>,
    pub loc: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XolIndividual {
    pub name: String,
    pub instance_of: Vec<String>,
    pub slot_values: Vec<SlotValues>,
    pub loc: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XolModule {
    pub name: String,
    pub classes: Vec<XolClass>,
    pub slots: Vec<XolSlot>,
    pub individuals: Vec<XolIndividual>,
}

fn add_value(list: &mut Vec<SlotValues>, name: String, value: String) {
    match list.iter_mut().find(|s| s.name == name) {
        Some(s) => s.values.push(value),
        None => list.push(SlotValues {
            name,
            values: vec![value],
            loc: Loc::default(),
        }),
    }
}

fn unsupported(what: String) -> Error {
    Error::UnsupportedConstruct(format!("{what} has no XOL counterpart"))
}

/// The module a knowledge base maps to.
pub fn module_from_kb(kb: &KnowledgeBase, options: XolOptions) -> Result<XolModule> {
    let ont = &kb.ontology;
    let name = |t: TypeId| ont.qualified_name(t);
    if !ont.imports().is_empty() {
        return Err(unsupported("an ontology with imports".into()));
    }
    let mut m = XolModule {
        name: ont.name.clone(),
        ..Default::default()
    };
    let documentation = |d: &Option<String>, n: &str| match d {
        Some(_) if !options.extended => Err(unsupported(format!("the comment on `{n}`"))),
        other => Ok(other.clone()),
    };
    let types = ont
        .types()
        .filter(|(_, d)| d.origin == Origin::Placeholder)
        .chain(ont.local_types());
    for (t, d) in types {
        match d.kind {
            TypeKind::Data => return Err(unsupported(format!("enumeration datatype `{}`", d.name))),
            TypeKind::Object => m.classes.push(XolClass {
                name: name(t),
                documentation: documentation(&d.comment, &d.name)?,
                ..Default::default()
            }),
            TypeKind::BinaryRelation | TypeKind::Function => m.slots.push(XolSlot {
                name: name(t),
                domain: d.source.map(name).into_iter().collect(),
                slot_value_type: d.target.map(name).into_iter().collect(),
                documentation: documentation(&d.comment, &d.name)?,
                ..Default::default()
            }),
        }
    }
    let class = |m: &XolModule, t: TypeId| -> Option<usize> { m.classes.iter().position(|c| c.name == name(t)) };
    let slot = |m: &XolModule, t: TypeId| -> Option<usize> { m.slots.iter().position(|c| c.name == name(t)) };
    for a in ont.axioms() {
        if ont.kind(a.specific).is_relation() {
            return Err(unsupported(format!("the relation subtype axiom on `{}`", name(a.specific))));
        }
        if let (Some(g), Some(i)) = (a.generic, class(&m, a.specific)) {
            m.classes[i].subclass_of.push(name(g));
        }
    }
    if let Some(&(a, b)) = ont.disjoint_pairs().iter().next() {
        return Err(unsupported(format!("disjointness of `{}` and `{}`", name(a), name(b))));
    }
    if let Some(&t) = ont.incoherent_types().iter().next() {
        return Err(unsupported(format!("incoherence of `{}`", name(t))));
    }
    for r in ont.registrations() {
        let inverse_of = match &r.expr {
            oml_core::calculus::RelExpr::Transpose(inner) if options.extended => match **inner {
                oml_core::calculus::RelExpr::Named(t) => slot(&m, t),
                _ => None,
            },
            _ => None,
        };
        match inverse_of {
            Some(i) => m.slots[i].inverse.push(r.name.clone()),
            None => return Err(unsupported(format!("derived relation `{}`", r.name))),
        }
    }
    let end = |e: &SlotEnd| match e {
        SlotEnd::Type(t) => name(*t),
        SlotEnd::Individual(n) => n.clone(),
    };
    for h in ont.ho_assertions() {
        match h {
            HoAssertion::TypeClassification { instance, metatype, .. } => match class(&m, *instance) {
                Some(i) => m.classes[i].instance_of.push(name(*metatype)),
                None => return Err(unsupported(format!("classifying relation type `{}`", name(*instance)))),
            },
            HoAssertion::OwnSlot {
                relation,
                source: SlotEnd::Type(s),
                target,
                ..
            } => {
                let (rel, value) = (name(*relation), end(target));
                if let Some(i) = class(&m, *s) {
                    add_value(&mut m.classes[i].slot_values, rel, value);
                } else if let Some(i) = slot(&m, *s) {
                    add_value(&mut m.slots[i].slot_values, rel, value);
                } else {
                    return Err(unsupported(format!("own slot on `{}`", name(*s))));
                }
            }
            HoAssertion::OwnSlot {
                relation,
                source: SlotEnd::Individual(s),
                ..
            } => {
                return Err(unsupported(format!(
                    "own slot `{}` on individual `{s}` inside an ontology",
                    name(*relation)
                )))
            }
        }
    }
    for coll in &kb.collections {
        for (obj, o) in coll.objects() {
            if o.about.is_some() {
                return Err(unsupported(format!("the `about` link of `{}`", coll.display_name(obj))));
            }
            let mut ind = XolIndividual {
                name: coll.display_name(obj),
                instance_of: o.classifications.iter().map(|&t| name(t)).collect(),
                ..Default::default()
            };
            for f in &o.functions {
                add_value(&mut ind.slot_values, name(f.function), coll.target_text(ont, &f.target));
            }
            for r in &o.relations {
                for &c in &r.classifications {
                    add_value(&mut ind.slot_values, name(c), coll.target_text(ont, &r.target));
                }
            }
            m.individuals.push(ind);
        }
    }
    Ok(m)
}

fn write_slot_values(w: &mut XmlWriter, list: &[SlotValues]) {
    for s in list {
        w.open("slot-values", &[]);
        w.text_element("name", &s.name);
        for v in &s.values {
            w.text_element("value", v);
        }
        w.close("slot-values");
    }
}

/// Render a module as indented XML.
pub fn render(m: &XolModule) -> String {
    let mut w = XmlWriter::new();
    w.open("module", &[]);
    w.text_element("name", &m.name);
    for c in &m.classes {
        w.open("class", &[]);
        w.text_element("name", &c.name);
        for s in &c.subclass_of {
            w.text_element("subclass-of", s);
        }
        for s in &c.instance_of {
            w.text_element("instance-of", s);
        }
        write_slot_values(&mut w, &c.slot_values);
        if let Some(d) = &c.documentation {
            w.text_element("documentation", d);
        }
        w.close("class");
    }
    for s in &m.slots {
        w.open("slot", &[]);
        w.text_element("name", &s.name);
        for d in &s.domain {
            w.text_element("domain", d);
        }
        for t in &s.slot_value_type {
            w.text_element("slot-value-type", t);
        }
        write_slot_values(&mut w, &s.slot_values);
        for i in &s.inverse {
            w.text_element("slot-inverse", i);
        }
        if let Some(d) = &s.documentation {
            w.text_element("documentation", d);
        }
        w.close("slot");
    }
    for i in &m.individuals {
        w.open("individual", &[]);
        w.text_element("name", &i.name);
        for c in &i.instance_of {
            w.text_element("instance-of", c);
        }
        write_slot_values(&mut w, &i.slot_values);
        w.close("individual");
    }
    w.close("module");
    w.finish()
}

pub fn export_xol(kb: &KnowledgeBase, options: XolOptions) -> Result<String> {
    module_from_kb(kb, options).map(|m| render(&m))
}

struct Reader<'a> {
    document: &'a str,
}

impl Reader<'_> {
    fn error(&self, message: String, loc: Loc) -> Error {
        Error::Xol {
            document: self.document.to_string(),
            message,
            loc,
        }
    }

    /// Text content, kept verbatim.
    fn text(&self, e: &Element) -> Result<String> {
        match e.elements().next() {
            Some(c) => Err(self.error(format!("<{}> cannot contain <{}>", e.name, c.name), c.loc)),
            None => Ok(e.text()),
        }
    }

    /// A name: text content without surrounding whitespace.
    fn leaf(&self, e: &Element) -> Result<String> {
        self.text(e).map(|t| t.trim().to_string())
    }

    /// Split `e` into its leading `<name>` and the remaining children.
    fn named<'e>(&self, e: &'e Element) -> Result<(String, Vec<&'e Element>)> {
        let mut children = e.elements();
        match children.next() {
            Some(n) if n.name == "name" => Ok((self.leaf(n)?, children.collect())),
            _ => Err(self.error(format!("<{}> must start with <name>", e.name), e.loc)),
        }
    }

    fn slot_values(&self, e: &Element) -> Result<SlotValues> {
        let (name, rest) = self.named(e)?;
        let mut values = Vec::new();
        for v in rest {
            if v.name != "value" {
                return Err(self.error(format!("<{}> cannot appear in <slot-values>", v.name), v.loc));
            }
            values.push(self.text(v)?);
        }
        Ok(SlotValues {
            name,
            values,
            loc: e.loc,
        })
    }

    fn unexpected(&self, c: &Element, parent: &str) -> Error {
        self.error(format!("<{}> cannot appear in <{parent}>", c.name), c.loc)
    }

    fn module(&self, root: &Element) -> Result<XolModule> {
        if !matches!(root.name.as_str(), "module" | "ontology" | "kb" | "database" | "dataset") {
            return Err(self.error(format!("expected <module>, found <{}>", root.name), root.loc));
        }
        let (name, rest) = self.named(root)?;
        let mut m = XolModule {
            name,
            ..Default::default()
        };
        for e in rest {
            let (name, rest) = self.named(e)?;
            match e.name.as_str() {
                "class" => {
                    let mut c = XolClass {
                        name,
                        loc: e.loc,
                        ..Default::default()
                    };
                    for x in rest {
                        match x.name.as_str() {
                            "subclass-of" => c.subclass_of.push(self.leaf(x)?),
                            "instance-of" => c.instance_of.push(self.leaf(x)?),
                            "slot-values" => c.slot_values.push(self.slot_values(x)?),
                            "documentation" => c.documentation = Some(self.text(x)?),
                            _ => return Err(self.unexpected(x, "class")),
                        }
                    }
                    m.classes.push(c);
                }
                "slot" => {
                    let mut s = XolSlot {
                        name,
                        loc: e.loc,
                        ..Default::default()
                    };
                    for x in rest {
                        match x.name.as_str() {
                            "domain" => s.domain.push(self.leaf(x)?),
                            "slot-value-type" => s.slot_value_type.push(self.leaf(x)?),
                            "slot-values" => s.slot_values.push(self.slot_values(x)?),
                            "slot-inverse" => s.inverse.push(self.leaf(x)?),
                            "documentation" => s.documentation = Some(self.text(x)?),
                            _ => return Err(self.unexpected(x, "slot")),
                        }
                    }
                    m.slots.push(s);
                }
                "individual" => {
                    let mut i = XolIndividual {
                        name,
                        loc: e.loc,
                        ..Default::default()
                    };
                    for x in rest {
                        match x.name.as_str() {
                            "instance-of" => i.instance_of.push(self.leaf(x)?),
                            "slot-values" => i.slot_values.push(self.slot_values(x)?),
                            _ => return Err(self.unexpected(x, "individual")),
                        }
                    }
                    m.individuals.push(i);
                }
                _ => return Err(self.unexpected(e, &root.name)),
            }
        }
        Ok(m)
    }
}

/// Read XOL text into a module.
pub fn parse_xol(text: &str, document: &str) -> Result<XolModule> {
    let nodes = xml::parse(text).map_err(|error| Error::Syntax {
        document: document.to_string(),
        error,
    })?;
    let r = Reader { document };
    let mut roots = xml::top_elements(&nodes);
    match (roots.next(), roots.next()) {
        (Some(root), None) => r.module(root),
        (None, _) => Err(r.error("no <module> element".into(), Loc::new(1, 1))),
        (Some(_), Some(extra)) => Err(r.error("more than one top-level element".into(), extra.loc)),
    }
}

/// Build a knowledge base from a module. Slots named like a function of
/// `hint` become functions; every other slot becomes a relation type.
pub fn kb_from_module(m: &XolModule, document: &str, hint: Option<&Ontology>) -> Result<KnowledgeBase> {
    let err = |loc: Loc| move |error: oml_core::Error| Error::Model {
        document: document.to_string(),
        loc,
        error,
    };
    let names_class = |v: &String| m.classes.iter().any(|c| &c.name == v);
    let higher_order = m
        .classes
        .iter()
        .any(|c| !c.instance_of.is_empty() || !c.slot_values.is_empty())
        || m.slots.iter().any(|s| !s.slot_values.is_empty())
        || m.individuals
            .iter()
            .flat_map(|i| &i.slot_values)
            .any(|s| s.values.iter().any(names_class));
    let mut ont = Ontology::new(m.name.clone());
    ont.source_name = document.to_string();
    ont.set_higher_order(higher_order);

    let mut class_ids = Vec::new();
    for c in &m.classes {
        class_ids.push(ont.reserve_type(TypeKind::Object, &c.name, c.loc).map_err(err(c.loc))?);
    }
    let mut slot_ids = Vec::new();
    for s in &m.slots {
        let is_function = hint
            .and_then(|h| h.resolve_type_name(&s.name).ok().map(|t| h.kind(t)))
            .is_some_and(|k| k == TypeKind::Function);
        let kind = if is_function {
            TypeKind::Function
        } else {
            TypeKind::BinaryRelation
        };
        slot_ids.push(ont.reserve_type(kind, &s.name, s.loc).map_err(err(s.loc))?);
    }
    for (s, &id) in m.slots.iter().zip(&slot_ids) {
        let ([d], [t]) = (s.domain.as_slice(), s.slot_value_type.as_slice()) else {
            return Err(Error::UnsupportedConstruct(format!(
                "slot `{}` needs exactly one domain and one slot-value-type",
                s.name
            )));
        };
        ont.set_signature(id, d, t).map_err(err(s.loc))?;
        ont.set_comment(id, s.documentation.clone());
    }
    for (c, &id) in m.classes.iter().zip(&class_ids) {
        ont.set_comment(id, c.documentation.clone());
        for g in &c.subclass_of {
            let g = ont.resolve_or_defer(g).map_err(err(c.loc))?;
            ont.push_subtype(id, Some(g), c.loc).map_err(err(c.loc))?;
        }
        for meta in &c.instance_of {
            let meta = ont.resolve_or_defer(meta).map_err(err(c.loc))?;
            ont.push_type_classification(id, meta, c.loc).map_err(err(c.loc))?;
        }
    }
    let own_slots = m
        .classes
        .iter()
        .zip(&class_ids)
        .map(|(c, &id)| (&c.slot_values, id))
        .chain(m.slots.iter().zip(&slot_ids).map(|(s, &id)| (&s.slot_values, id)));
    for (list, source) in own_slots {
        for sv in list {
            let rho = ont
                .resolve_type_name(&sv.name)
                .map_err(|_| oml_core::Error::UnresolvedRef(sv.name.clone()))
                .map_err(err(sv.loc))?;
            for v in &sv.values {
                let target = ont.slot_end(v);
                ont.push_own_slot(rho, SlotEnd::Type(source), target, sv.loc).map_err(err(sv.loc))?;
            }
        }
    }
    for s in &m.slots {
        for inv in &s.inverse {
            let expr = parse_expr(&ont, &format!("transpose({})", s.name)).map_err(err(s.loc))?;
            ont.register(inv, expr, s.loc).map_err(err(s.loc))?;
        }
    }

    let mut b = CollectionBuilder::new(&ont);
    let located = |e: oml_core::LocatedError| Error::model(document, e);
    for i in &m.individuals {
        let obj = b.object(Some(&i.name), None, i.loc).map_err(located)?;
        for c in &i.instance_of {
            b.classify(obj, c, i.loc).map_err(located)?;
        }
        for sv in &i.slot_values {
            let is_function = ont.resolve_type_name(&sv.name).is_ok_and(|t| ont.kind(t) == TypeKind::Function);
            for v in &sv.values {
                if is_function {
                    b.function(obj, &sv.name, v, sv.loc);
                } else {
                    b.relation(obj, v, vec![(sv.name.clone(), sv.loc)], sv.loc);
                }
            }
        }
    }
    let mut coll = b.finish().map_err(located)?;
    coll.source_name = document.to_string();
    Ok(KnowledgeBase::new(ont).with_collection(coll))
}

pub fn import_xol(text: &str, document: &str, hint: Option<&Ontology>) -> Result<KnowledgeBase> {
    kb_from_module(&parse_xol(text, document)?, document, hint)
}
