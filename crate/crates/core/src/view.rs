//! A name-based, order-free view of a knowledge base, used to compare
//! knowledge bases across serializations and formats.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::checker::{self, InstanceKey};
use crate::hot::{HoAssertion, SlotEnd};
use crate::model::{KnowledgeBase, Origin, Ontology, Target, TypeId, TypeKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ViewOptions {
    /// Treat function types and instances as binary relations (for formats
    /// that do not distinguish them).
    pub demote_functions: bool,
    /// Leave out type comments.
    pub ignore_comments: bool,
}

/// One type declaration: kind tag, name, endpoints, comment, enumeration.
pub type TypeEntry = (String, String, Option<(String, String)>, Option<String>, Option<Vec<String>>);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SemanticView {
    pub types: BTreeSet<TypeEntry>,
    /// Proper subtype pairs of the closure.
    pub subtypes: BTreeSet<(String, String)>,
    pub disjoint: BTreeSet<(String, String)>,
    pub incoherent: BTreeSet<String>,
    pub registrations: BTreeSet<(String, String)>,
    pub type_classifications: BTreeSet<(String, String)>,
    pub own_slots: BTreeSet<(String, String, String)>,
    /// Closure classifications of objects.
    pub classifications: BTreeSet<(String, String)>,
    /// `(source, relation, target)` over the closure, functions included.
    pub relations: BTreeSet<(String, String, String)>,
    pub about: BTreeSet<(String, String)>,
}

fn in_view(ont: &Ontology, t: TypeId) -> bool {
    matches!(ont.decl(t).origin, Origin::Local | Origin::Placeholder)
}

fn kind_tag(kind: TypeKind, options: ViewOptions) -> String {
    match kind {
        TypeKind::Function if options.demote_functions => TypeKind::BinaryRelation.tag().to_string(),
        k => k.tag().to_string(),
    }
}

pub fn semantic_view(kb: &KnowledgeBase, options: ViewOptions) -> SemanticView {
    let ont = &kb.ontology;
    let tables = checker::analyze(kb);
    let name = |t: TypeId| ont.qualified_name(t);
    let mut v = SemanticView::default();

    for (t, d) in ont.types().filter(|&(t, _)| in_view(ont, t)) {
        v.types.insert((
            kind_tag(d.kind, options),
            name(t),
            d.signature().map(|(s, g)| (name(s), name(g))),
            if options.ignore_comments { None } else { d.comment.clone() },
            d.values.clone(),
        ));
    }
    for &(a, b) in &tables.subtype {
        if a != b && in_view(ont, a) {
            v.subtypes.insert((name(a), name(b)));
        }
    }
    let sorted = |a: String, b: String| if a <= b { (a, b) } else { (b, a) };
    for &(a, b) in ont.disjoint_pairs() {
        v.disjoint.insert(sorted(name(a), name(b)));
    }
    v.incoherent.extend(ont.incoherent_types().iter().map(|&t| name(t)));
    for r in ont.registrations() {
        v.registrations.insert((r.name.clone(), format!("{}", r.expr.display(ont))));
    }
    let end = |e: &SlotEnd| match e {
        SlotEnd::Type(t) => name(*t),
        SlotEnd::Individual(n) => n.clone(),
    };
    for a in ont.ho_assertions() {
        match a {
            HoAssertion::TypeClassification { instance, metatype, .. } => {
                v.type_classifications.insert((name(*instance), name(*metatype)));
            }
            HoAssertion::OwnSlot { relation, source, target, .. } => {
                v.own_slots.insert((end(source), name(*relation), end(target)));
            }
        }
    }

    for &(key, t) in &tables.classification {
        let coll = &kb.collections[key.collection()];
        let src = coll.display_name(key.object());
        let target = match key {
            InstanceKey::Object { .. } => {
                v.classifications.insert((src, name(t)));
                continue;
            }
            InstanceKey::Relation { index, .. } => &coll.object(key.object()).relations[index as usize].target,
            InstanceKey::Function { index, .. } => &coll.object(key.object()).functions[index as usize].target,
        };
        let tgt = match target {
            Target::Object(o) => coll.display_name(*o),
            Target::Literal(l) => format!("\"{}\"^^{}", l.lexical, name(l.datatype)),
            Target::External(n) => n.clone(),
            Target::Type(ty) => name(*ty),
        };
        v.relations.insert((src, name(t), tgt));
    }
    for c in &kb.collections {
        for (id, o) in c.objects() {
            if let Some(a) = &o.about {
                v.about.insert((c.display_name(id), a.clone()));
            }
        }
    }
    v
}

/// Whether two knowledge bases say the same thing, up to order, anonymous
/// object numbering aside.
pub fn semantically_equal(a: &KnowledgeBase, b: &KnowledgeBase, options: ViewOptions) -> bool {
    semantic_view(a, options) == semantic_view(b, options)
}
