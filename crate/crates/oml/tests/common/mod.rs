//! Random first-order knowledge bases and random surface spellings of
//! generic-style documents.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use oml::load::{load_document, MemoryResolver, LoadOptions};
use oml::xml::{self, Node};
use oml::xmlio::{canonical_tag, parse_oml, OmlDocument, ParseOptions};
use oml_core::calculus::RelExpr;
use oml_core::model::{Collection, KnowledgeBase, Literal, Ontology, Target, TypeId};
use oml_core::Loc;
use proptest::prelude::*;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

/// Parse and load `name` from the data directory, resolving other data
/// files by name.
pub fn load(name: &str, options: LoadOptions) -> KnowledgeBase {
    let doc = parse_oml(&read(name), name, options.parse_options()).unwrap();
    load_document(&doc, &data_resolver(), options, None).unwrap()
}

pub fn data_resolver() -> MemoryResolver {
    let mut r = MemoryResolver::default();
    for f in std::fs::read_dir(data("")).unwrap() {
        let p = f.unwrap().path();
        if p.extension().is_some_and(|e| e == "oml") {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            r.0.insert(name, std::fs::read_to_string(&p).unwrap());
        }
    }
    r
}

pub fn higher_order() -> LoadOptions {
    LoadOptions {
        higher_order: true,
        ..Default::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Range {
    Entity(usize),
    String,
    Natno,
}

#[derive(Clone, Copy, Debug)]
pub enum Derived {
    Transpose(usize),
    Compose(usize, usize),
}

#[derive(Clone, Debug)]
pub struct ObjSpec {
    pub named: bool,
    pub about: Option<String>,
    pub classes: Vec<usize>,
    /// `(relation, target object)`.
    pub links: Vec<(usize, usize)>,
    /// `(function, seed for the value)`.
    pub values: Vec<(usize, usize)>,
}

/// Which constructs a generated knowledge base may use.
#[derive(Clone, Copy, Debug, Default)]
pub struct Features {
    pub relation_axioms: bool,
    pub disjointness: bool,
    pub comments: bool,
    pub about: bool,
    pub transposes: bool,
    pub compositions: bool,
}

impl Features {
    pub fn all() -> Self {
        Features {
            relation_axioms: true,
            disjointness: true,
            comments: true,
            about: true,
            transposes: true,
            compositions: true,
        }
    }

    /// What an XOL module can carry.
    pub fn xol(extended: bool) -> Self {
        Features {
            comments: extended,
            transposes: extended,
            ..Default::default()
        }
    }
}

/// Entity types `E0..`, relation types `R0..`, function types `F0..`,
/// registrations `D0..`, objects `i0..` (or anonymous).
#[derive(Clone, Debug)]
pub struct FoSpec {
    pub entities: usize,
    pub relations: Vec<(usize, usize)>,
    pub functions: Vec<(usize, Range)>,
    pub entity_axioms: Vec<(usize, usize)>,
    pub relation_axioms: Vec<(usize, usize)>,
    pub disjoint: Vec<(usize, usize)>,
    pub incoherent: Vec<usize>,
    pub comments: Vec<(usize, String)>,
    pub derived: Vec<Derived>,
    pub objects: Vec<ObjSpec>,
}

const TEXTS: [&str; 6] = ["plain", "two words", "a < b & c", "quote \" and ' apostrophe", "", "tab\tin"];

fn literal_text(seed: usize) -> String {
    format!("{}{seed}", TEXTS[seed % TEXTS.len()])
}

impl FoSpec {
    fn object_name(&self, i: usize) -> Option<String> {
        self.objects[i].named.then(|| format!("i{i}"))
    }

    pub fn build(&self) -> KnowledgeBase {
        let mut o = Ontology::new("random");
        let mut ents = Vec::new();
        for i in 0..self.entities {
            ents.push(o.declare_object(&format!("E{i}")).unwrap());
        }
        let mut rels = Vec::new();
        for (k, &(s, t)) in self.relations.iter().enumerate() {
            rels.push(o.declare_relation(&format!("R{k}"), &format!("E{s}"), &format!("E{t}")).unwrap());
        }
        let mut fns = Vec::new();
        for (k, &(s, r)) in self.functions.iter().enumerate() {
            let target = match r {
                Range::Entity(e) => format!("E{e}"),
                Range::String => "String".into(),
                Range::Natno => "Natno".into(),
            };
            fns.push(o.declare_function(&format!("F{k}"), &format!("E{s}"), &target).unwrap());
        }
        for &(a, b) in &self.entity_axioms {
            o.declare_subtype(ents[a], Some(ents[b])).unwrap();
        }
        for &(a, b) in &self.relation_axioms {
            o.declare_subtype(rels[a], Some(rels[b])).unwrap();
        }
        for &(a, b) in &self.disjoint {
            o.declare_disjoint(ents[a], ents[b]).unwrap();
        }
        for &e in &self.incoherent {
            o.declare_incoherent(ents[e]);
        }
        for (e, text) in &self.comments {
            o.set_comment(ents[*e], Some(text.clone()));
        }
        for (k, d) in self.derived.iter().enumerate() {
            let expr = match *d {
                Derived::Transpose(r) => RelExpr::transpose(RelExpr::Named(rels[r])),
                Derived::Compose(a, b) => RelExpr::compose(RelExpr::Named(rels[a]), RelExpr::Named(rels[b])),
            };
            // Ill-typed compositions are simply left out.
            let _ = o.register(&format!("D{k}"), expr, Loc::default());
        }

        let mut c = Collection::new();
        let objs: Vec<_> = (0..self.objects.len())
            .map(|i| {
                let spec = &self.objects[i];
                c.add_object(self.object_name(i).as_deref(), spec.about.as_deref()).unwrap()
            })
            .collect();
        for (i, spec) in self.objects.iter().enumerate() {
            for &e in &spec.classes {
                c.classify(&o, objs[i], ents[e]).unwrap();
            }
            for &(r, t) in &spec.links {
                c.add_relation_instance(&o, objs[i], Target::Object(objs[t]), [rels[r]]).unwrap();
            }
            for &(f, seed) in &spec.values {
                let target = match self.functions[f].1 {
                    Range::String => Target::Literal(Literal::new(&o, TypeId::STRING, &literal_text(seed)).unwrap()),
                    Range::Natno => Target::Literal(Literal::new(&o, TypeId::NATNO, &seed.to_string()).unwrap()),
                    Range::Entity(_) => {
                        // Function values name their target, so only named
                        // objects qualify.
                        let named: Vec<usize> = (0..self.objects.len()).filter(|&j| self.objects[j].named).collect();
                        if named.is_empty() {
                            continue;
                        }
                        Target::Object(objs[named[seed % named.len()]])
                    }
                };
                c.add_function_instance(&o, objs[i], fns[f], target).unwrap();
            }
        }
        KnowledgeBase::new(o).with_collection(c)
    }
}

fn distinct<T: Ord>(v: Vec<T>) -> Vec<T> {
    v.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}

/// At most 5 entity, 3 relation and 2 function types and 8 objects.
pub fn fo_spec(features: Features) -> impl Strategy<Value = FoSpec> {
    (1usize..=5, 0usize..=3, 0usize..=2, 0usize..=8)
        .prop_flat_map(move |(entities, nrels, nfns, nobjs)| {
            let range = prop_oneof![
                (0..entities).prop_map(Range::Entity),
                Just(Range::String),
                Just(Range::Natno),
            ];
            let rel_pairs = if nrels == 0 || !features.relation_axioms {
                Just(Vec::new()).boxed()
            } else {
                prop::collection::vec((0..nrels, 0..nrels), 0..=3).boxed()
            };
            let disjoint = if features.disjointness {
                prop::collection::vec((0..entities, 0..entities), 0..=2).boxed()
            } else {
                Just(Vec::new()).boxed()
            };
            let incoherent = if features.disjointness {
                prop::collection::vec(0..entities, 0..=1).boxed()
            } else {
                Just(Vec::new()).boxed()
            };
            let comments = if features.comments {
                prop::collection::vec((0..entities, 0..TEXTS.len()), 0..=2)
                    .prop_map(|v| {
                        v.into_iter()
                            .map(|(e, k)| (e, format!("note {}", TEXTS[k])))
                            .collect::<std::collections::BTreeMap<_, _>>()
                            .into_iter()
                            .collect()
                    })
                    .boxed()
            } else {
                Just(Vec::new()).boxed()
            };
            let derived = {
                let mut options: Vec<BoxedStrategy<Derived>> = Vec::new();
                if nrels > 0 && features.transposes {
                    options.push((0..nrels).prop_map(Derived::Transpose).boxed());
                }
                if nrels > 0 && features.compositions {
                    options.push((0..nrels, 0..nrels).prop_map(|(a, b)| Derived::Compose(a, b)).boxed());
                }
                if options.is_empty() {
                    Just(Vec::new()).boxed()
                } else {
                    prop::collection::vec(prop::strategy::Union::new(options), 0..=2).boxed()
                }
            };
            let object = (
                prop::bool::weighted(0.8),
                if features.about {
                    prop::option::weighted(0.2, (0..3usize).prop_map(|k| format!("http://example.org/r{k}"))).boxed()
                } else {
                    Just(None).boxed()
                },
                prop::collection::vec(0..entities, 0..=2),
                if nrels == 0 || nobjs == 0 {
                    Just(Vec::new()).boxed()
                } else {
                    prop::collection::vec((0..nrels, 0..nobjs), 0..=3).boxed()
                },
                if nfns == 0 {
                    Just(Vec::new()).boxed()
                } else {
                    prop::collection::vec((0..nfns, 0..50usize), 0..=2).boxed()
                },
            )
                .prop_map(|(named, about, classes, links, values)| ObjSpec {
                    named,
                    about,
                    classes: distinct(classes),
                    links,
                    // Functions are single-valued.
                    values: values
                        .into_iter()
                        .collect::<std::collections::BTreeMap<_, _>>()
                        .into_iter()
                        .collect(),
                });
            (
                Just(entities),
                prop::collection::vec((0..entities, 0..entities), nrels),
                prop::collection::vec((0..entities, range), nfns),
                prop::collection::vec((0..entities, 0..entities), 0..=6),
                rel_pairs,
                disjoint,
                incoherent,
                comments,
                derived,
                prop::collection::vec(object, nobjs),
            )
        })
        .prop_map(
            |(entities, relations, functions, entity_axioms, relation_axioms, disjoint, incoherent, comments, derived, objects)| FoSpec {
                entities,
                relations,
                functions,
                entity_axioms,
                relation_axioms,
                disjoint,
                incoherent: distinct(incoherent),
                comments,
                derived,
                objects,
            },
        )
}

// ---------------------------------------------------------------------------
// Surface spellings

/// Choices drawn in turn from a random byte string.
pub struct Style {
    bytes: Vec<u8>,
    next: usize,
}

impl Style {
    pub fn new(bytes: Vec<u8>) -> Self {
        Style { bytes, next: 0 }
    }

    fn pick(&mut self, n: u8) -> u8 {
        if self.bytes.is_empty() {
            return 0;
        }
        let b = self.bytes[self.next % self.bytes.len()];
        self.next += 1;
        b % n
    }
}

fn synonym(tag: &str, style: &mut Style) -> String {
    let base = match (tag, style.pick(2)) {
        ("Type.Object", 1) => "Type.Entity",
        ("Instance.Object", 1) => "Instance.Entity",
        (t, _) => t,
    };
    if canonical_tag(base, false).is_some() && style.pick(3) == 0 {
        format!("OML:{base}")
    } else {
        base.to_string()
    }
}

fn escape(s: &str, quote: char) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '"' if quote == '"' => out.push_str("&quot;"),
            '\'' if quote == '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            c => out.push(c),
        }
    }
    out
}

fn filler(style: &mut Style, out: &mut String) {
    match style.pick(6) {
        0 => {}
        1 => out.push('\n'),
        2 => out.push_str("\n    "),
        3 => out.push_str(" <!-- remark --> "),
        4 => out.push('\t'),
        _ => out.push_str("\n<!---->\n"),
    }
}

fn write_element(e: &xml::Element, style: &mut Style, out: &mut String) {
    let tag = synonym(&e.name, style);
    out.push('<');
    out.push_str(&tag);
    let mut attrs: Vec<_> = e.attributes.iter().collect();
    if style.pick(2) == 1 {
        attrs.reverse();
    }
    for a in attrs {
        let quote = if style.pick(2) == 0 { '"' } else { '\'' };
        let gap = match style.pick(3) {
            0 => " ",
            1 => "\n   ",
            _ => "  ",
        };
        let eq = if style.pick(4) == 0 { " = " } else { "=" };
        out.push_str(&format!("{gap}{}{eq}{quote}{}{quote}", a.name, escape(&a.value, quote)));
    }
    let content: Vec<&Node> = e
        .children
        .iter()
        .filter(|n| !matches!(n, Node::Text(t, _) if t.trim().is_empty()))
        .collect();
    if content.is_empty() {
        match style.pick(3) {
            0 => out.push_str("/>"),
            1 => out.push_str(" />"),
            _ => out.push_str(&format!("></{tag}>")),
        }
        return;
    }
    out.push('>');
    for n in content {
        filler(style, out);
        match n {
            Node::Element(c) => write_element(c, style, out),
            Node::Text(t, _) => out.push_str(&escape(t, '"')),
            Node::Comment(c, _) => out.push_str(&format!("<!--{c}-->")),
        }
    }
    filler(style, out);
    out.push_str(&format!("</{tag}>"));
}

/// The same document under another surface spelling: tag synonyms and
/// prefixes, attribute order and quoting, empty-element forms, whitespace
/// and comments.
pub fn restyle(text: &str, style: &mut Style) -> String {
    let nodes = xml::parse(text).unwrap();
    let mut out = String::new();
    if style.pick(2) == 0 {
        out.push_str("<?xml version=\"1.0\"?>\n");
    }
    for n in &nodes {
        match n {
            Node::Element(e) => write_element(e, style, &mut out),
            Node::Comment(c, _) => out.push_str(&format!("<!--{c}-->")),
            Node::Text(..) => {}
        }
        filler(style, &mut out);
    }
    out
}

pub fn parse(text: &str, options: ParseOptions) -> OmlDocument {
    parse_oml(text, "generated", options).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

// ---------------------------------------------------------------------------
// Round trips

use oml::interop::{rdf, xol};
use oml_core::view::{semantic_view, ViewOptions};

fn same(a: &KnowledgeBase, b: &KnowledgeBase, options: ViewOptions) -> Result<(), String> {
    let (va, vb) = (semantic_view(a, options), semantic_view(b, options));
    if va == vb {
        Ok(())
    } else {
        Err(format!("views differ\nbefore: {va:#?}\nafter:  {vb:#?}"))
    }
}

/// Export as triples, reparse the text, import, compare.
pub fn rdf_round_trip(kb: &KnowledgeBase) -> Result<(), String> {
    let text = rdf::export_rdfs(kb).map_err(|e| e.to_string())?.to_string();
    let (doc, diags) = rdf::parse_triples(&text, "export.nt");
    if !diags.is_empty() {
        return Err(format!("{diags:?}\n{text}"));
    }
    let imported = rdf::import_rdfs(&doc, &kb.ontology.name, "export.nt");
    if !imported.diagnostics.is_empty() {
        return Err(format!("{:?}\n{text}", imported.diagnostics));
    }
    same(kb, &imported.kb, ViewOptions::default()).map_err(|e| format!("{e}\n{text}"))
}

/// Export as XOL, validate against the XOL DTD, import and compare. With a
/// hint the functions come back exactly; without one they come back as
/// binary relations.
pub fn xol_round_trip(kb: &KnowledgeBase, extended: bool, hint: bool) -> Result<(), String> {
    let text = xol::export_xol(kb, xol::XolOptions { extended }).map_err(|e| e.to_string())?;
    let diags = oml::dtd::validate(&xol::xol_dtd(extended), &text, "export.xol");
    if !diags.is_empty() {
        return Err(format!("{diags:?}\n{text}"));
    }
    let back = xol::import_xol(&text, "export.xol", hint.then_some(&kb.ontology)).map_err(|e| format!("{e}\n{text}"))?;
    let options = ViewOptions {
        demote_functions: !hint,
        ..Default::default()
    };
    same(kb, &back, options).map_err(|e| format!("{e}\n{text}"))
}
