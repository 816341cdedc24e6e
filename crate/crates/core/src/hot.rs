//! Higher-order assertions: types classified by metatypes, relation types
//! classified by relation types, and own slots (relation instances whose
//! endpoints are types).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diagnostic::{Code, Diagnostic, Severity};
use crate::model::{supertypes_in, KnowledgeBase, Loc, Ontology, TypeId, TypeKind};
use crate::{Error, Result};

/// Endpoint of an own slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlotEnd {
    Type(TypeId),
    Individual(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HoAssertion {
    /// `instance ⊨ metatype` where both are types of the same dimension.
    TypeClassification {
        instance: TypeId,
        metatype: TypeId,
        imported: bool,
        loc: Loc,
    },
    OwnSlot {
        relation: TypeId,
        source: SlotEnd,
        target: SlotEnd,
        imported: bool,
        loc: Loc,
    },
}

impl HoAssertion {
    pub fn is_imported(&self) -> bool {
        match self {
            HoAssertion::TypeClassification { imported, .. } | HoAssertion::OwnSlot { imported, .. } => {
                *imported
            }
        }
    }

    pub fn loc(&self) -> Loc {
        match self {
            HoAssertion::TypeClassification { loc, .. } | HoAssertion::OwnSlot { loc, .. } => *loc,
        }
    }

    pub(crate) fn remap(&self, m: &impl Fn(TypeId) -> TypeId) -> Self {
        let end = |e: &SlotEnd| match e {
            SlotEnd::Type(t) => SlotEnd::Type(m(*t)),
            SlotEnd::Individual(n) => SlotEnd::Individual(n.clone()),
        };
        match self {
            HoAssertion::TypeClassification {
                instance,
                metatype,
                loc,
                ..
            } => HoAssertion::TypeClassification {
                instance: m(*instance),
                metatype: m(*metatype),
                imported: true,
                loc: *loc,
            },
            HoAssertion::OwnSlot {
                relation,
                source,
                target,
                loc,
                ..
            } => HoAssertion::OwnSlot {
                relation: m(*relation),
                source: end(source),
                target: end(target),
                imported: true,
                loc: *loc,
            },
        }
    }

    pub(crate) fn same_assertion(&self, other: &Self) -> bool {
        match (self, other) {
            (
                HoAssertion::TypeClassification { instance: a, metatype: b, .. },
                HoAssertion::TypeClassification { instance: c, metatype: d, .. },
            ) => a == c && b == d,
            (
                HoAssertion::OwnSlot { relation: r, source: s, target: t, .. },
                HoAssertion::OwnSlot { relation: r2, source: s2, target: t2, .. },
            ) => r == r2 && s == s2 && t == t2,
            _ => false,
        }
    }
}

impl Ontology {
    pub fn ho_assertions(&self) -> &[HoAssertion] {
        &self.ho
    }

    /// Stored `(instance type, metatype)` pairs.
    pub fn type_classifications(&self) -> impl Iterator<Item = (TypeId, TypeId)> + '_ {
        self.ho.iter().filter_map(|h| match h {
            HoAssertion::TypeClassification {
                instance, metatype, ..
            } => Some((*instance, *metatype)),
            _ => None,
        })
    }

    /// Classify type `t` by `metatype`. Entity types take entity metatypes
    /// (towers of any height are fine); relation types take relation types.
    pub fn classify_type(&mut self, t: TypeId, metatype: TypeId) -> Result<()> {
        self.push_type_classification(t, metatype, Loc::default())
    }

    pub fn push_type_classification(&mut self, t: TypeId, metatype: TypeId, loc: Loc) -> Result<()> {
        if !self.kind(t).same_family(self.kind(metatype)) {
            return Err(Error::KindMismatch(format!(
                "{} type `{}` cannot be classified by {} type `{}`",
                self.kind(t).family_name(),
                self.qualified_name(t),
                self.kind(metatype).family_name(),
                self.qualified_name(metatype)
            )));
        }
        let a = HoAssertion::TypeClassification {
            instance: t,
            metatype,
            imported: false,
            loc,
        };
        if !self.ho.iter().any(|h| h.same_assertion(&a)) {
            self.ho.push(a);
        }
        Ok(())
    }

    /// Resolve an own-slot endpoint: a type name if one resolves, otherwise
    /// an individual name.
    pub fn slot_end(&self, name: &str) -> SlotEnd {
        match self.resolve_type_name(name) {
            Ok(t) => SlotEnd::Type(t),
            Err(_) => SlotEnd::Individual(name.to_string()),
        }
    }

    pub fn assert_own_slot(&mut self, relation: TypeId, source: SlotEnd, target: SlotEnd) -> Result<()> {
        self.push_own_slot(relation, source, target, Loc::default())
    }

    /// Name-based variant; an undeclared relation type is an error.
    pub fn assert_own_slot_named(&mut self, relation: &str, source: &str, target: &str) -> Result<()> {
        let r = self
            .resolve_type_name(relation)
            .map_err(|_| Error::UnresolvedRef(relation.to_string()))?;
        let (s, t) = (self.slot_end(source), self.slot_end(target));
        self.push_own_slot(r, s, t, Loc::default())
    }

    pub fn push_own_slot(&mut self, relation: TypeId, source: SlotEnd, target: SlotEnd, loc: Loc) -> Result<()> {
        if self.kind(relation) != TypeKind::BinaryRelation {
            return Err(Error::KindMismatch(format!(
                "own slot `{}` is not a binary relation type",
                self.qualified_name(relation)
            )));
        }
        let a = HoAssertion::OwnSlot {
            relation,
            source,
            target,
            imported: false,
            loc,
        };
        if !self.ho.iter().any(|h| h.same_assertion(&a)) {
            self.ho.push(a);
        }
        Ok(())
    }
}

/// Stored type classifications closed upward along the subtype order of the
/// metatype: `x ⊨ m` and `m ⊢ m'` give `x ⊨ m'`.
pub fn type_classification_closure(ont: &Ontology) -> BTreeSet<(TypeId, TypeId)> {
    let up = ont.direct_supertypes();
    let mut out = BTreeSet::new();
    for (x, m) in ont.type_classifications() {
        for g in supertypes_in(&up, m) {
            out.insert((x, g));
        }
    }
    out
}

/// For each relation-type classification `σ ⊨ ρ` with `σ: γ → δ` and
/// `ρ: α → β`, require `γ ⊨ α` and `δ ⊨ β` among type classifications.
pub fn check_higher_order_classification(ont: &Ontology) -> Vec<Diagnostic> {
    let closure = type_classification_closure(ont);
    let mut out = Vec::new();
    for h in &ont.ho {
        let HoAssertion::TypeClassification {
            instance, metatype, loc, ..
        } = h
        else {
            continue;
        };
        let (sigma, rho) = (*instance, *metatype);
        if !ont.kind(sigma).is_relation() {
            continue;
        }
        let (Some((gamma, delta)), Some((alpha, beta))) =
            (ont.decl(sigma).signature(), ont.decl(rho).signature())
        else {
            continue;
        };
        for (end, x, m) in [("source", gamma, alpha), ("target", delta, beta)] {
            if !closure.contains(&(x, m)) {
                out.push(
                    Diagnostic::new(
                        Severity::Warning,
                        Code::HOT001,
                        format!(
                            "`{}` ⊨ `{}` but {end} type `{}` is not classified by `{}`",
                            ont.qualified_name(sigma),
                            ont.qualified_name(rho),
                            ont.qualified_name(x),
                            ont.qualified_name(m)
                        ),
                    )
                    .at(&ont.source_name, *loc),
                );
            }
        }
    }
    out
}

/// A name may denote a type or an individual, never both.
pub fn check_name_collisions(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    let ont = &kb.ontology;
    let mut out = Vec::new();
    if !ont.higher_order() {
        return out;
    }
    for c in &kb.collections {
        for (_, o) in c.objects() {
            let Some(id) = &o.id else { continue };
            if ont.resolve_type_name(id).is_ok() {
                out.push(
                    Diagnostic::new(
                        Severity::Error,
                        Code::HOT002,
                        format!("`{id}` names both a type and an individual"),
                    )
                    .at(&c.source_name, o.loc),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn colors() -> Ontology {
        let mut o = Ontology::new("colors");
        o.set_higher_order(true);
        let color = o.declare_object("Color").unwrap();
        let red = o.declare_object("Red").unwrap();
        o.declare_object("Ball").unwrap();
        o.declare_relation("chrc", "Ball", "Color").unwrap();
        o.classify_type(red, color).unwrap();
        o
    }

    #[test]
    fn red_is_a_color() {
        let o = colors();
        let red = o.resolve_type_name("Red").unwrap();
        let color = o.resolve_type_name("Color").unwrap();
        assert!(type_classification_closure(&o).contains(&(red, color)));
    }

    #[test]
    fn towers_are_allowed() {
        let mut o = colors();
        let palette = o.declare_object("Palette").unwrap();
        let color = o.resolve_type_name("Color").unwrap();
        o.classify_type(color, palette).unwrap();
        assert_eq!(o.type_classifications().count(), 2);
    }

    #[test]
    fn relation_metatype_for_entity_is_rejected() {
        let mut o = colors();
        let red = o.resolve_type_name("Red").unwrap();
        let chrc = o.resolve_type_name("chrc").unwrap();
        assert!(matches!(o.classify_type(red, chrc), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn own_slot_with_unknown_relation() {
        let mut o = colors();
        assert!(matches!(
            o.assert_own_slot_named("argument", "Ball", "Red"),
            Err(Error::UnresolvedRef(_))
        ));
    }

    #[test]
    fn own_slot_endpoints_resolve_to_types() {
        let mut o = Ontology::new("movie");
        o.set_higher_order(true);
        o.declare_object("Movie").unwrap();
        o.declare_object("Cast").unwrap();
        o.declare_relation("argument", "Type.Object", "Type.Relation").unwrap();
        o.assert_own_slot_named("argument", "Movie", "Cast").unwrap();
        let movie = o.resolve_type_name("Movie").unwrap();
        match &o.ho_assertions()[0] {
            HoAssertion::OwnSlot { source, .. } => assert_eq!(*source, SlotEnd::Type(movie)),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn second_level() -> (Ontology, TypeId, TypeId) {
        // α, β are second-level types; ρ: α → β; σ: γ → δ with γ ⊨ α.
        let mut o = Ontology::new("ho");
        let alpha = o.declare_object("Alpha").unwrap();
        let beta = o.declare_object("Beta").unwrap();
        let gamma = o.declare_object("Gamma").unwrap();
        let delta = o.declare_object("Delta").unwrap();
        let rho = o.declare_relation("rho", "Alpha", "Beta").unwrap();
        let sigma = o.declare_relation("sigma", "Gamma", "Delta").unwrap();
        o.classify_type(gamma, alpha).unwrap();
        o.classify_type(sigma, rho).unwrap();
        (o, delta, beta)
    }

    #[test]
    fn relation_classification_preserved() {
        let (mut o, delta, beta) = second_level();
        o.classify_type(delta, beta).unwrap();
        assert!(check_higher_order_classification(&o).is_empty());
    }

    #[test]
    fn relation_classification_missing_target() {
        let (o, _, _) = second_level();
        let d = check_higher_order_classification(&o);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::HOT001);
    }

    #[test]
    fn vacuous_without_relation_classifications() {
        assert!(check_higher_order_classification(&colors()).is_empty());
    }
}
