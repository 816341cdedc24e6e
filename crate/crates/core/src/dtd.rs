//! DTD documents: the data model, text rendering, and compilation of an
//! ontology into its domain-specific DTD.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::diagnostic::{Code, Diagnostic, Severity};
use crate::model::names::is_xml_name;
use crate::model::{Ontology, TypeId, TypeKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Occurs {
    One,
    Optional,
    ZeroOrMore,
    OneOrMore,
}

impl Occurs {
    pub fn suffix(self) -> &'static str {
        match self {
            Occurs::One => "",
            Occurs::Optional => "?",
            Occurs::ZeroOrMore => "*",
            Occurs::OneOrMore => "+",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Particle {
    Name(String, Occurs),
    Seq(Vec<Particle>, Occurs),
    Choice(Vec<Particle>, Occurs),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ContentModel {
    Empty,
    Any,
    /// `(#PCDATA)` when the list is empty, `(#PCDATA | a | b)*` otherwise.
    Mixed(Vec<String>),
    Children(Particle),
}

impl ContentModel {
    /// `(a | b)*`, the shape compiled object elements use.
    pub fn repeatable_choice(names: impl IntoIterator<Item = String>) -> Self {
        let names: Vec<Particle> = names.into_iter().map(|n| Particle::Name(n, Occurs::One)).collect();
        if names.is_empty() {
            ContentModel::Empty
        } else {
            ContentModel::Children(Particle::Choice(names, Occurs::ZeroOrMore))
        }
    }

    /// Element names this model may contain.
    pub fn names(&self) -> Vec<&str> {
        fn walk<'a>(p: &'a Particle, out: &mut Vec<&'a str>) {
            match p {
                Particle::Name(n, _) => out.push(n),
                Particle::Seq(ps, _) | Particle::Choice(ps, _) => ps.iter().for_each(|p| walk(p, out)),
            }
        }
        let mut out = Vec::new();
        match self {
            ContentModel::Mixed(ns) => out.extend(ns.iter().map(String::as_str)),
            ContentModel::Children(p) => walk(p, &mut out),
            ContentModel::Empty | ContentModel::Any => {}
        }
        out
    }
}

impl fmt::Display for Particle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (items, sep, occurs) = match self {
            Particle::Name(n, o) => return write!(f, "{n}{}", o.suffix()),
            Particle::Seq(ps, o) => (ps, ", ", o),
            Particle::Choice(ps, o) => (ps, " | ", o),
        };
        f.write_char('(')?;
        for (i, p) in items.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "){}", occurs.suffix())
    }
}

impl fmt::Display for ContentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContentModel::Empty => f.write_str("EMPTY"),
            ContentModel::Any => f.write_str("ANY"),
            ContentModel::Mixed(ns) if ns.is_empty() => f.write_str("(#PCDATA)"),
            ContentModel::Mixed(ns) => {
                f.write_str("(#PCDATA")?;
                for n in ns {
                    write!(f, " | {n}")?;
                }
                f.write_str(")*")
            }
            // A bare name still needs its parentheses.
            ContentModel::Children(p @ Particle::Name(..)) => write!(f, "({p})"),
            ContentModel::Children(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AttType {
    Cdata,
    Id,
    Idref,
    Nmtoken,
    Nmtokens,
    Enumerated(Vec<String>),
}

impl fmt::Display for AttType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttType::Cdata => f.write_str("CDATA"),
            AttType::Id => f.write_str("ID"),
            AttType::Idref => f.write_str("IDREF"),
            AttType::Nmtoken => f.write_str("NMTOKEN"),
            AttType::Nmtokens => f.write_str("NMTOKENS"),
            AttType::Enumerated(vs) => write!(f, "({})", vs.join(" | ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AttDefault {
    Required,
    Implied,
    Fixed(String),
    Value(String),
}

impl fmt::Display for AttDefault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttDefault::Required => f.write_str("#REQUIRED"),
            AttDefault::Implied => f.write_str("#IMPLIED"),
            AttDefault::Fixed(v) => write!(f, "#FIXED \"{v}\""),
            AttDefault::Value(v) => write!(f, "\"{v}\""),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AttDef {
    pub name: String,
    pub ty: AttType,
    pub default: AttDefault,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementDecl {
    pub name: String,
    pub content: ContentModel,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AttList {
    pub element: String,
    pub attributes: Vec<AttDef>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DtdDocument {
    pub elements: Vec<ElementDecl>,
    pub attlists: Vec<AttList>,
}

impl DtdDocument {
    pub fn element(&self, name: &str) -> Option<&ElementDecl> {
        self.elements.iter().find(|e| e.name == name)
    }

    /// All attribute definitions for `element`, across ATTLISTs.
    pub fn attributes<'a>(&'a self, element: &'a str) -> impl Iterator<Item = &'a AttDef> + 'a {
        self.attlists
            .iter()
            .filter(move |a| a.element == element)
            .flat_map(|a| a.attributes.iter())
    }

    /// Names used in content models without an element declaration.
    pub fn undeclared_references(&self) -> BTreeSet<&str> {
        let declared: BTreeSet<&str> = self.elements.iter().map(|e| e.name.as_str()).collect();
        self.elements
            .iter()
            .flat_map(|e| e.content.names())
            .filter(|n| !declared.contains(n))
            .collect()
    }
}

/// Each element declaration followed by its ATTLIST, groups separated by a
/// blank line; attributes one per line with four spaces of indent, the
/// attribute type starting in column 28.
impl fmt::Display for DtdDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut done = BTreeSet::new();
        let mut first = true;
        let mut group = |f: &mut fmt::Formatter<'_>, el: Option<&ElementDecl>, name: &str| -> fmt::Result {
            if !first {
                f.write_char('\n')?;
            }
            first = false;
            if let Some(e) = el {
                writeln!(f, "<!ELEMENT {} {}>", e.name, e.content)?;
            }
            for a in self.attlists.iter().filter(|a| a.element == name && !a.attributes.is_empty()) {
                write!(f, "<!ATTLIST {}", a.element)?;
                for d in &a.attributes {
                    write!(f, "\n    {:<22} {} {}", d.name, d.ty, d.default)?;
                }
                f.write_str(">\n")?;
            }
            Ok(())
        };
        for e in &self.elements {
            done.insert(e.name.as_str());
            group(f, Some(e), &e.name)?;
        }
        let orphans: Vec<&str> = self
            .attlists
            .iter()
            .map(|a| a.element.as_str())
            .filter(|n| done.insert(n))
            .collect();
        for n in orphans {
            group(f, None, n)?;
        }
        Ok(())
    }
}

/// The compiled DTD plus the relation elements a subtype inherited from a
/// supertype's content model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledDtd {
    pub document: DtdDocument,
    /// `(object type, relation type)` pairs where the relation's source is a
    /// proper supertype of the object type.
    pub inherited: Vec<(TypeId, TypeId)>,
}

impl CompiledDtd {
    pub fn render(&self) -> String {
        self.document.to_string()
    }

    pub fn inherited_diagnostics(&self, ont: &Ontology) -> Vec<Diagnostic> {
        self.inherited
            .iter()
            .map(|&(o, r)| {
                Diagnostic::new(
                    Severity::Info,
                    Code::DTD007,
                    format!(
                        "`{}` may contain `{}`, declared on supertype `{}`",
                        ont.qualified_name(o),
                        ont.qualified_name(r),
                        ont.decl(r).source.map(|s| ont.qualified_name(s)).unwrap_or_default()
                    ),
                )
                .at(&ont.source_name, ont.decl(o).loc)
            })
            .collect()
    }
}

/// Element and attribute name of the relation endpoint.
pub const TARGET_ATTRIBUTE: &str = "target.Instance";
pub const ID_ATTRIBUTE: &str = "id";

/// Compile the domain-specific DTD of `ont`.
///
/// Object types become elements whose content is a repeatable choice of the
/// relation types sourced at the type or a supertype; function types become
/// implied attributes. Relation types become empty elements carrying the
/// target. Placeholders and built-in types produce nothing.
pub fn compile_dtd(ont: &Ontology) -> Result<CompiledDtd> {
    let declared: Vec<(TypeId, &crate::model::TypeDecl)> = ont.declared_types().collect();
    let mut document = DtdDocument::default();
    let mut inherited = Vec::new();
    let mut element_names = BTreeSet::new();
    for &(t, d) in &declared {
        let name = ont.qualified_name(t);
        match d.kind {
            TypeKind::Object => {
                let sup = ont.supertypes(t);
                let from_sup = |r: TypeId| ont.decl(r).source.is_some_and(|s| sup.contains(&s));
                let mut relations = Vec::new();
                let mut attributes = alloc::vec![AttDef {
                    name: ID_ATTRIBUTE.to_string(),
                    ty: AttType::Id,
                    default: AttDefault::Required,
                }];
                for &(r, rd) in &declared {
                    if !from_sup(r) {
                        continue;
                    }
                    match rd.kind {
                        TypeKind::BinaryRelation => {
                            if rd.source != Some(t) {
                                inherited.push((t, r));
                            }
                            relations.push(ont.qualified_name(r));
                        }
                        TypeKind::Function => {
                            let attr = ont.qualified_name(r);
                            if attributes.iter().any(|a| a.name == attr) {
                                return Err(Error::NameCollision(format!("attribute `{attr}` on element `{name}`")));
                            }
                            let ty = if rd.target == Some(TypeId::NATNO) {
                                AttType::Nmtoken
                            } else {
                                AttType::Cdata
                            };
                            attributes.push(AttDef {
                                name: attr,
                                ty,
                                default: AttDefault::Implied,
                            });
                        }
                        _ => {}
                    }
                }
                push_element(&mut document, &mut element_names, name.clone(), ContentModel::repeatable_choice(relations))?;
                document.attlists.push(AttList {
                    element: name,
                    attributes,
                });
            }
            TypeKind::BinaryRelation => {
                push_element(&mut document, &mut element_names, name.clone(), ContentModel::Empty)?;
                document.attlists.push(AttList {
                    element: name,
                    attributes: alloc::vec![AttDef {
                        name: TARGET_ATTRIBUTE.to_string(),
                        ty: AttType::Cdata,
                        default: AttDefault::Required,
                    }],
                });
            }
            TypeKind::Data | TypeKind::Function => {}
        }
    }
    Ok(CompiledDtd { document, inherited })
}

fn push_element(doc: &mut DtdDocument, seen: &mut BTreeSet<String>, name: String, content: ContentModel) -> Result<()> {
    if !is_xml_name(&name) || !seen.insert(name.clone()) {
        return Err(Error::NameCollision(format!("element `{name}`")));
    }
    doc.elements.push(ElementDecl { name, content });
    Ok(())
}
