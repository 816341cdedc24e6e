//! Subtype and classification closures and the core constraints.
//!
//! Every check is a pure function over a knowledge base and returns
//! [`Diagnostic`]s; nothing here mutates the model except
//! [`complete_classifications`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::calculus::{relation_pairs, Node};
use crate::diagnostic::{self, Code, Diagnostic, Severity};
use crate::hot;
use crate::model::{KnowledgeBase, Loc, ObjectId, Ontology, Target, TypeId};

/// An instance of any dimension: an object, or a relation/function instance
/// nested in one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InstanceKey {
    Object { collection: u32, object: ObjectId },
    Relation { collection: u32, object: ObjectId, index: u32 },
    Function { collection: u32, object: ObjectId, index: u32 },
}

impl InstanceKey {
    pub fn collection(self) -> usize {
        match self {
            InstanceKey::Object { collection, .. }
            | InstanceKey::Relation { collection, .. }
            | InstanceKey::Function { collection, .. } => collection as usize,
        }
    }

    pub fn object(self) -> ObjectId {
        match self {
            InstanceKey::Object { object, .. }
            | InstanceKey::Relation { object, .. }
            | InstanceKey::Function { object, .. } => object,
        }
    }
}

pub type TypePairs = BTreeSet<(TypeId, TypeId)>;
pub type ClassificationPairs = BTreeSet<(InstanceKey, TypeId)>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClosureTables {
    /// Reflexive-transitive subtype relation.
    pub subtype: TypePairs,
    /// Stored classifications composed with `subtype`.
    pub classification: ClassificationPairs,
    /// Declared and derived disjoint pairs, each stored as `(min, max)`.
    pub disjoint: TypePairs,
    /// Declared and derived incoherent types.
    pub incoherent: BTreeSet<TypeId>,
}

impl ClosureTables {
    pub fn is_subtype(&self, a: TypeId, b: TypeId) -> bool {
        self.subtype.contains(&(a, b))
    }

    pub fn is_classified(&self, i: InstanceKey, t: TypeId) -> bool {
        self.classification.contains(&(i, t))
    }

    pub fn is_disjoint(&self, a: TypeId, b: TypeId) -> bool {
        self.disjoint.contains(&ordered(a, b))
    }

    pub fn supertypes(&self, t: TypeId) -> impl Iterator<Item = TypeId> + '_ {
        self.subtype
            .range((t, TypeId::from_index(0))..=(t, TypeId::from_index(u32::MAX as usize)))
            .map(|&(_, g)| g)
    }
}

fn ordered(a: TypeId, b: TypeId) -> (TypeId, TypeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Least reflexive-transitive relation containing the declared axioms.
pub fn subtype_closure(ont: &Ontology) -> TypePairs {
    let up = ont.direct_supertypes();
    let mut out = TypePairs::new();
    for t in ont.type_ids() {
        for g in crate::model::supertypes_in(&up, t) {
            out.insert((t, g));
        }
    }
    out
}

/// Every classification recorded in the collections, relation/function
/// instances included.
pub fn stored_classifications(kb: &KnowledgeBase) -> ClassificationPairs {
    let mut out = ClassificationPairs::new();
    for (ci, c) in kb.collections.iter().enumerate() {
        let collection = ci as u32;
        for (object, o) in c.objects() {
            for &t in &o.classifications {
                out.insert((InstanceKey::Object { collection, object }, t));
            }
            for (i, r) in o.relations.iter().enumerate() {
                let key = InstanceKey::Relation {
                    collection,
                    object,
                    index: i as u32,
                };
                out.extend(r.classifications.iter().map(|&t| (key, t)));
            }
            for (i, f) in o.functions.iter().enumerate() {
                let key = InstanceKey::Function {
                    collection,
                    object,
                    index: i as u32,
                };
                out.insert((key, f.function));
            }
        }
    }
    out
}

/// `i ⊨ t1` and `t1 ⊢ t2` give `i ⊨ t2`.
pub fn classification_closure(kb: &KnowledgeBase, subtype: &TypePairs) -> ClassificationPairs {
    let tables = ClosureTables {
        subtype: subtype.clone(),
        ..Default::default()
    };
    let mut out = ClassificationPairs::new();
    for (i, t) in stored_classifications(kb) {
        out.extend(tables.supertypes(t).map(|g| (i, g)));
    }
    out
}

/// Disjointness and incoherence after propagation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Derived {
    pub disjoint: TypePairs,
    pub incoherent: BTreeSet<TypeId>,
}

/// Propagate disjointness and incoherence:
///
/// * `α,γ` or `β,δ` disjoint makes `ρ: α → β` and `σ: γ → δ` disjoint;
/// * an incoherent source or target makes the relation type incoherent;
/// * a type below two disjoint types is incoherent.
///
/// Entity disjointness is never derived, so the rules stratify: entity
/// incoherence first, then relation disjointness, then relation incoherence.
pub fn derive_incompatible_and_incoherent(ont: &Ontology, subtype: &TypePairs) -> Derived {
    let mut disjoint = ont.disjoint_pairs().clone();
    let mut incoherent = ont.incoherent_types().clone();
    let tables = ClosureTables {
        subtype: subtype.clone(),
        ..Default::default()
    };
    let below_disjoint = |t: TypeId, pairs: &TypePairs| {
        let sup: BTreeSet<TypeId> = tables.supertypes(t).collect();
        pairs
            .iter()
            .any(|(x, y)| sup.contains(x) && sup.contains(y))
    };

    let entity_pairs: TypePairs = disjoint
        .iter()
        .copied()
        .filter(|&(a, _)| ont.kind(a).is_entity())
        .collect();
    for t in ont.type_ids().filter(|&t| ont.kind(t).is_entity()) {
        if below_disjoint(t, &entity_pairs) {
            incoherent.insert(t);
        }
    }

    let relations: Vec<(TypeId, TypeId, TypeId)> = ont
        .types()
        .filter_map(|(id, d)| d.signature().map(|(s, t)| (id, s, t)))
        .collect();
    let is_disjoint = |a: TypeId, b: TypeId| entity_pairs.contains(&ordered(a, b));
    for &(rho, alpha, beta) in &relations {
        for &(sigma, gamma, delta) in &relations {
            if rho <= sigma && (is_disjoint(alpha, gamma) || is_disjoint(beta, delta)) {
                disjoint.insert((rho, sigma));
            }
        }
    }

    let relation_pairs: TypePairs = disjoint
        .iter()
        .copied()
        .filter(|&(a, _)| ont.kind(a).is_relation())
        .collect();
    for &(rho, alpha, beta) in &relations {
        if incoherent.contains(&alpha) || incoherent.contains(&beta) || below_disjoint(rho, &relation_pairs) {
            incoherent.insert(rho);
        }
    }
    Derived {
        disjoint,
        incoherent,
    }
}

/// All closure tables for a knowledge base.
pub fn analyze(kb: &KnowledgeBase) -> ClosureTables {
    let subtype = subtype_closure(&kb.ontology);
    let classification = classification_closure(kb, &subtype);
    let derived = derive_incompatible_and_incoherent(&kb.ontology, &subtype);
    ClosureTables {
        subtype,
        classification,
        disjoint: derived.disjoint,
        incoherent: derived.incoherent,
    }
}

fn type_diag(ont: &Ontology, t: TypeId, severity: Severity, code: Code, message: String) -> Diagnostic {
    Diagnostic::new(severity, code, message).at(&ont.source_name, ont.decl(t).loc)
}

/// Mutual subtypes form equivalence classes; each nontrivial class is
/// reported once.
pub fn subtype_cycles(ont: &Ontology, subtype: &TypePairs) -> Vec<Diagnostic> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in ont.type_ids() {
        if seen.contains(&t) {
            continue;
        }
        let class: Vec<TypeId> = ont
            .type_ids()
            .filter(|&u| subtype.contains(&(t, u)) && subtype.contains(&(u, t)))
            .collect();
        if class.len() > 1 {
            let names: Vec<String> = class.iter().map(|&u| ont.qualified_name(u)).collect();
            out.push(type_diag(
                ont,
                t,
                Severity::Info,
                Code::CYC001,
                format!("subtype cycle makes {} equivalent", names.join(", ")),
            ));
        }
        seen.extend(class);
    }
    out
}

/// How violations of preservation of classification are handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Enforcement {
    /// Violations are errors.
    Strict,
    /// Missing endpoint classifications are inferred; what cannot be
    /// inferred is a warning.
    #[default]
    Complete,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassificationCheck {
    pub diagnostics: Vec<Diagnostic>,
    /// Object classifications to add (only filled in `Complete` mode).
    pub inferred: BTreeSet<(usize, ObjectId, TypeId)>,
}

/// `r ⊨ ρ` with `ρ: α → β` and `r = (a, b)` requires `a ⊨ α` and `b ⊨ β`.
pub fn check_preservation_of_classification(
    kb: &KnowledgeBase,
    tables: &ClosureTables,
    enforcement: Enforcement,
) -> ClassificationCheck {
    let ont = &kb.ontology;
    let type_classes = hot::type_classification_closure(ont);
    let mut check = ClassificationCheck::default();
    let violation = if enforcement == Enforcement::Strict {
        Severity::Error
    } else {
        Severity::Warning
    };
    for &(key, rho) in &tables.classification {
        let (collection, object, target, loc) = match key {
            InstanceKey::Object { .. } => continue,
            InstanceKey::Relation { collection, object, index } => {
                let r = &kb.collections[collection as usize].object(object).relations[index as usize];
                (collection as usize, object, &r.target, r.loc)
            }
            InstanceKey::Function { collection, object, index } => {
                let f = &kb.collections[collection as usize].object(object).functions[index as usize];
                (collection as usize, object, &f.target, f.loc)
            }
        };
        let Some((alpha, beta)) = ont.decl(rho).signature() else {
            continue;
        };
        let coll = &kb.collections[collection];
        let doc = &coll.source_name;
        let rho_name = ont.qualified_name(rho);
        let src = InstanceKey::Object {
            collection: collection as u32,
            object,
        };
        if !tables.is_classified(src, alpha) {
            let msg = format!(
                "`{}` is the source of a `{rho_name}` instance but is not classified by `{}`",
                coll.display_name(object),
                ont.qualified_name(alpha)
            );
            push_violation(&mut check, enforcement, violation, doc, loc, msg, (collection, object, alpha));
        }
        match target {
            Target::Object(b) => {
                let tgt = InstanceKey::Object {
                    collection: collection as u32,
                    object: *b,
                };
                if !tables.is_classified(tgt, beta) {
                    let msg = format!(
                        "`{}` is the target of a `{rho_name}` instance but is not classified by `{}`",
                        coll.display_name(*b),
                        ont.qualified_name(beta)
                    );
                    push_violation(&mut check, enforcement, violation, doc, loc, msg, (collection, *b, beta));
                }
            }
            Target::Literal(l) => {
                if !tables.is_subtype(l.datatype, beta) {
                    check.diagnostics.push(
                        Diagnostic::new(
                            violation,
                            Code::CLS001,
                            format!(
                                "literal `{}` of type `{}` is the target of a `{rho_name}` instance but `{}` expects `{}`",
                                l.lexical,
                                ont.qualified_name(l.datatype),
                                rho_name,
                                ont.qualified_name(beta)
                            ),
                        )
                        .at(doc, loc),
                    );
                }
            }
            Target::Type(t) => {
                if !type_classes.contains(&(*t, beta)) {
                    check.diagnostics.push(
                        Diagnostic::new(
                            violation,
                            Code::CLS001,
                            format!(
                                "type `{}` is the target of a `{rho_name}` instance but is not classified by `{}`",
                                ont.qualified_name(*t),
                                ont.qualified_name(beta)
                            ),
                        )
                        .at(doc, loc),
                    );
                }
            }
            // Unresolved names are reported by `check_references`.
            Target::External(_) => {}
        }
    }
    check
}

fn push_violation(
    check: &mut ClassificationCheck,
    enforcement: Enforcement,
    violation: Severity,
    doc: &str,
    loc: Loc,
    msg: String,
    inference: (usize, ObjectId, TypeId),
) {
    match enforcement {
        Enforcement::Strict => check
            .diagnostics
            .push(Diagnostic::new(violation, Code::CLS001, msg).at(doc, loc)),
        Enforcement::Complete => {
            if check.inferred.insert(inference) {
                check
                    .diagnostics
                    .push(Diagnostic::new(Severity::Info, Code::CLS002, format!("inferred: {msg}")).at(doc, loc));
            }
        }
    }
}

/// Add every inferable endpoint classification until preservation of
/// classification holds. Returns the info diagnostics describing what was
/// added plus warnings for what could not be repaired.
pub fn complete_classifications(kb: &mut KnowledgeBase) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    loop {
        let tables = analyze(kb);
        let check = check_preservation_of_classification(kb, &tables, Enforcement::Complete);
        if check.inferred.is_empty() {
            out.extend(check.diagnostics);
            return out;
        }
        out.extend(check.diagnostics.into_iter().filter(|d| d.code == Code::CLS002));
        for (c, o, t) in check.inferred {
            kb.collections[c].object_mut(o).classifications.insert(t);
        }
    }
}

/// `σ ⊢ ρ` with `σ: γ → δ`, `ρ: α → β` should come with `γ ⊢ α` and `δ ⊢ β`.
pub fn check_preservation_of_entailment(ont: &Ontology, subtype: &TypePairs) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for &(sigma, rho) in subtype {
        if sigma == rho {
            continue;
        }
        let (Some((gamma, delta)), Some((alpha, beta))) =
            (ont.decl(sigma).signature(), ont.decl(rho).signature())
        else {
            continue;
        };
        for (end, x, y) in [("source", gamma, alpha), ("target", delta, beta)] {
            if !subtype.contains(&(x, y)) {
                out.push(type_diag(
                    ont,
                    sigma,
                    Severity::Warning,
                    Code::ENT001,
                    format!(
                        "`{}` ⊢ `{}` but {end} `{}` is not a subtype of `{}`",
                        ont.qualified_name(sigma),
                        ont.qualified_name(rho),
                        ont.qualified_name(x),
                        ont.qualified_name(y)
                    ),
                ));
            }
        }
    }
    out
}

/// Report derived disjointness and incoherence.
pub fn check_incompatible_and_incoherent(ont: &Ontology, tables: &ClosureTables) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for &(a, b) in &tables.disjoint {
        if ont.disjoint_pairs().contains(&(a, b)) || a == b {
            continue;
        }
        out.push(type_diag(
            ont,
            a,
            Severity::Info,
            Code::DIS001,
            format!(
                "`{}` and `{}` are disjoint (their endpoint types are)",
                ont.qualified_name(a),
                ont.qualified_name(b)
            ),
        ));
    }
    for &t in &tables.incoherent {
        let how = if ont.incoherent_types().contains(&t) {
            "declared"
        } else {
            "derived"
        };
        out.push(type_diag(
            ont,
            t,
            Severity::Warning,
            Code::INC001,
            format!("`{}` is incoherent ({how})", ont.qualified_name(t)),
        ));
    }
    out
}

/// Instances classified by disjoint or incoherent types.
pub fn check_instance_consistency(kb: &KnowledgeBase, tables: &ClosureTables) -> Vec<Diagnostic> {
    let ont = &kb.ontology;
    let mut by_instance: BTreeMap<InstanceKey, Vec<TypeId>> = BTreeMap::new();
    for &(i, t) in &tables.classification {
        by_instance.entry(i).or_default().push(t);
    }
    let mut out = Vec::new();
    for (i, types) in by_instance {
        let coll = &kb.collections[i.collection()];
        let obj = coll.object(i.object());
        let loc = match i {
            InstanceKey::Object { .. } => obj.loc,
            InstanceKey::Relation { index, .. } => obj.relations[index as usize].loc,
            InstanceKey::Function { index, .. } => obj.functions[index as usize].loc,
        };
        let name = coll.display_name(i.object());
        for (n, &a) in types.iter().enumerate() {
            if tables.incoherent.contains(&a) {
                out.push(
                    Diagnostic::new(
                        Severity::Error,
                        Code::INC002,
                        format!("instance at `{name}` is classified by incoherent type `{}`", ont.qualified_name(a)),
                    )
                    .at(&coll.source_name, loc),
                );
            }
            for &b in &types[n + 1..] {
                if tables.is_disjoint(a, b) {
                    out.push(
                        Diagnostic::new(
                            Severity::Error,
                            Code::DIS002,
                            format!(
                                "instance at `{name}` is classified by disjoint types `{}` and `{}`",
                                ont.qualified_name(a),
                                ont.qualified_name(b)
                            ),
                        )
                        .at(&coll.source_name, loc),
                    );
                }
            }
        }
    }
    out
}

/// Placeholder types and external (unresolved) instance references.
pub fn check_references(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    let ont = &kb.ontology;
    let mut out = Vec::new();
    for (_, d) in ont.placeholders() {
        out.push(
            Diagnostic::new(
                Severity::Warning,
                Code::UNR001,
                format!("type `{}` is referenced but never declared", d.name),
            )
            .at(&ont.source_name, d.loc),
        );
    }
    for c in &kb.collections {
        for (_, o) in c.objects() {
            let targets = o
                .relations
                .iter()
                .map(|r| (&r.target, r.loc))
                .chain(o.functions.iter().map(|f| (&f.target, f.loc)));
            for (t, loc) in targets {
                if let Target::External(n) = t {
                    out.push(
                        Diagnostic::new(
                            Severity::Warning,
                            Code::REF001,
                            format!("`{n}` is not an instance of this collection"),
                        )
                        .at(&c.source_name, loc),
                    );
                }
            }
        }
    }
    out
}

/// Inclusion implies subtype, as a lint: a relation type whose nonempty
/// extension is contained in another's without a subtype axiom.
pub fn lint_inclusion_implies_subtype(kb: &KnowledgeBase, tables: &ClosureTables) -> Vec<Diagnostic> {
    let ont = &kb.ontology;
    let ext = relation_pairs(kb, tables);
    let empty = BTreeSet::<(Node, Node)>::new();
    let mut out = Vec::new();
    for (&sigma, sigma_ext) in &ext {
        if sigma_ext.is_empty() {
            continue;
        }
        for rho in ont.type_ids().filter(|&t| ont.kind(t).is_relation() && t != sigma) {
            if tables.is_subtype(sigma, rho) {
                continue;
            }
            let rho_ext = ext.get(&rho).unwrap_or(&empty);
            if sigma_ext.is_subset(rho_ext) {
                out.push(type_diag(
                    ont,
                    sigma,
                    Severity::Info,
                    Code::SUG001,
                    format!(
                        "every `{0}` pair is a `{1}` pair; consider <subtype specific=\"{0}\" generic=\"{1}\"/>",
                        ont.qualified_name(sigma),
                        ont.qualified_name(rho)
                    ),
                ));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    pub enforcement: Enforcement,
    pub lint: bool,
}

/// Every pass, sorted in document order. In `Complete` mode the inferred
/// classifications are reported but the knowledge base is left untouched.
pub fn check_all(kb: &KnowledgeBase, options: CheckOptions) -> Vec<Diagnostic> {
    let ont = &kb.ontology;
    let tables = analyze(kb);
    let mut out = check_references(kb);
    out.extend(subtype_cycles(ont, &tables.subtype));
    out.extend(check_preservation_of_entailment(ont, &tables.subtype));
    out.extend(check_incompatible_and_incoherent(ont, &tables));
    out.extend(check_instance_consistency(kb, &tables));
    match options.enforcement {
        Enforcement::Strict => {
            out.extend(check_preservation_of_classification(kb, &tables, Enforcement::Strict).diagnostics)
        }
        Enforcement::Complete => out.extend(complete_classifications(&mut kb.clone())),
    }
    if ont.higher_order() {
        out.extend(hot::check_higher_order_classification(ont));
        out.extend(hot::check_name_collisions(kb));
    }
    if options.lint {
        out.extend(lint_inclusion_implies_subtype(kb, &tables));
    }
    diagnostic::sort(&mut out);
    out
}
