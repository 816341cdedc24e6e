//! Random ontologies and knowledge bases, plus naive reference
//! implementations to compare the library against.
#![allow(dead_code, clippy::type_complexity, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use oml_core::model::{Collection, KnowledgeBase, Ontology, Target, TypeId, TypeKind};
use proptest::prelude::*;

/// Raw description of a random ontology: `entities` object types
/// `E0..`, then relation types `R0..` with endpoints given as entity indices.
#[derive(Clone, Debug)]
pub struct OntSpec {
    pub entities: usize,
    pub relations: Vec<(usize, usize)>,
    /// Subtype axioms as indices into the combined type list.
    pub axioms: Vec<(usize, usize)>,
    pub disjoint: Vec<(usize, usize)>,
    pub incoherent: Vec<usize>,
}

impl OntSpec {
    pub fn len(&self) -> usize {
        self.entities + self.relations.len()
    }

    pub fn is_relation(&self, i: usize) -> bool {
        i >= self.entities
    }

    pub fn name(&self, i: usize) -> String {
        if self.is_relation(i) {
            format!("R{}", i - self.entities)
        } else {
            format!("E{i}")
        }
    }

    pub fn same_family(&self, a: usize, b: usize) -> bool {
        self.is_relation(a) == self.is_relation(b)
    }

    /// The ontology, and the id of each spec index.
    pub fn build(&self) -> (Ontology, Vec<TypeId>) {
        let mut o = Ontology::new("random");
        let mut ids = Vec::new();
        for i in 0..self.entities {
            ids.push(o.declare_object(&self.name(i)).unwrap());
        }
        for (k, &(s, t)) in self.relations.iter().enumerate() {
            let sig = Some((ids[s], ids[t]));
            ids.push(
                o.declare_type(TypeKind::BinaryRelation, &self.name(self.entities + k), sig)
                    .unwrap(),
            );
        }
        for &(a, b) in &self.axioms {
            o.declare_subtype(ids[a], Some(ids[b])).unwrap();
        }
        for &(a, b) in &self.disjoint {
            o.declare_disjoint(ids[a], ids[b]).unwrap();
        }
        for &i in &self.incoherent {
            o.declare_incoherent(ids[i]);
        }
        (o, ids)
    }
}

fn same_family_pairs(n: usize, entities: usize, max: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0..n, 0..n), 0..=max).prop_map(move |v| {
        v.into_iter()
            .filter(|&(a, b)| (a >= entities) == (b >= entities))
            .collect()
    })
}

/// At most 8 types and 20 subtype axioms.
pub fn ont_spec() -> impl Strategy<Value = OntSpec> {
    (1usize..=5, 0usize..=3)
        .prop_flat_map(|(entities, rels)| {
            let n = entities + rels;
            (
                Just(entities),
                prop::collection::vec((0..entities, 0..entities), rels),
                same_family_pairs(n, entities, 20),
                same_family_pairs(n, entities, 3),
                prop::collection::vec(0..n, 0..=1),
            )
        })
        .prop_map(|(entities, relations, axioms, disjoint, incoherent)| OntSpec {
            entities,
            relations,
            axioms,
            disjoint,
            incoherent,
        })
}

/// Reflexive pairs plus axioms, closed by repeated squaring until stable.
pub fn naive_subtype_closure(spec: &OntSpec) -> BTreeSet<(usize, usize)> {
    let mut s: BTreeSet<(usize, usize)> = (0..spec.len()).map(|i| (i, i)).collect();
    s.extend(spec.axioms.iter().copied());
    loop {
        let mut next = s.clone();
        for &(a, b) in &s {
            for &(c, d) in &s {
                if b == c {
                    next.insert((a, d));
                }
            }
        }
        if next == s {
            return s;
        }
        s = next;
    }
}

/// All three propagation rules applied together until nothing changes.
pub fn naive_derived(spec: &OntSpec) -> (BTreeSet<(usize, usize)>, BTreeSet<usize>) {
    let st = naive_subtype_closure(spec);
    let n = spec.len();
    let norm = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut dis: BTreeSet<(usize, usize)> = spec.disjoint.iter().map(|&(a, b)| norm(a, b)).collect();
    let mut inc: BTreeSet<usize> = spec.incoherent.iter().copied().collect();
    inc.extend(spec.disjoint.iter().filter(|(a, b)| a == b).map(|&(a, _)| a));
    let sig = |i: usize| spec.relations[i - spec.entities];
    loop {
        let (d0, i0) = (dis.len(), inc.len());
        for r in spec.entities..n {
            for s in spec.entities..n {
                let ((a, b), (c, d)) = (sig(r), sig(s));
                if dis.contains(&norm(a, c)) || dis.contains(&norm(b, d)) {
                    dis.insert(norm(r, s));
                }
            }
            let (a, b) = sig(r);
            if inc.contains(&a) || inc.contains(&b) {
                inc.insert(r);
            }
        }
        for t in 0..n {
            let hit = dis
                .iter()
                .any(|&(x, y)| st.contains(&(t, x)) && st.contains(&(t, y)));
            if hit {
                inc.insert(t);
            }
        }
        if dis.len() == d0 && inc.len() == i0 {
            return (dis, inc);
        }
    }
}

/// A random knowledge base for the calculus: entity types, relation types
/// and objects with random classifications and relation instances.
#[derive(Clone, Debug)]
pub struct KbSpec {
    pub ont: OntSpec,
    /// Entity classifications per object.
    pub objects: Vec<Vec<usize>>,
    /// `(source object, target object, relation spec index)`.
    pub links: Vec<(usize, usize, usize)>,
}

impl KbSpec {
    pub fn build(&self) -> (KnowledgeBase, Vec<TypeId>) {
        let (o, ids) = self.ont.build();
        let mut c = Collection::new();
        let objs: Vec<_> = (0..self.objects.len())
            .map(|i| c.add_object(Some(&format!("o{i}")), None).unwrap())
            .collect();
        for (i, classes) in self.objects.iter().enumerate() {
            for &t in classes {
                c.classify(&o, objs[i], ids[t]).unwrap();
            }
        }
        for &(a, b, r) in &self.links {
            c.add_relation_instance(&o, objs[a], Target::Object(objs[b]), [ids[r]])
                .unwrap();
        }
        (KnowledgeBase::new(o).with_collection(c), ids)
    }
}

/// At most 6 relation types over at most 3 entity types, at most 30 objects.
pub fn kb_spec() -> impl Strategy<Value = KbSpec> {
    (1usize..=3, 1usize..=6, 1usize..=30)
        .prop_flat_map(|(entities, rels, objects)| {
            let n = entities + rels;
            (
                Just(entities),
                prop::collection::vec((0..entities, 0..entities), rels),
                prop::collection::vec((entities..n, entities..n), 0..=3),
                prop::collection::vec(prop::collection::vec(0..entities, 0..=2), objects),
                prop::collection::vec((0..objects, 0..objects, entities..n), 0..=40),
            )
        })
        .prop_map(|(entities, relations, axioms, objects, links)| KbSpec {
            ont: OntSpec {
                entities,
                relations,
                axioms,
                disjoint: Vec::new(),
                incoherent: Vec::new(),
            },
            objects,
            links,
        })
}

/// Object-index pairs in the extension of each relation type, from the raw
/// spec and the naive subtype closure.
pub fn naive_extension(spec: &KbSpec, rel: usize) -> BTreeSet<(usize, usize)> {
    let st = naive_subtype_closure(&spec.ont);
    spec.links
        .iter()
        .filter(|&&(_, _, r)| st.contains(&(r, rel)))
        .map(|&(a, b, _)| (a, b))
        .collect()
}

/// Objects classified by entity type `e` under the closure.
pub fn naive_members(spec: &KbSpec, e: usize) -> BTreeSet<usize> {
    let st = naive_subtype_closure(&spec.ont);
    (0..spec.objects.len())
        .filter(|&i| spec.objects[i].iter().any(|&t| st.contains(&(t, e))))
        .collect()
}

/// Nested-loop join.
pub fn naive_join(r: &BTreeSet<(usize, usize)>, s: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for &(a, b) in r {
        for &(c, d) in s {
            if b == c {
                out.insert((a, d));
            }
        }
    }
    out
}

pub fn swap(r: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    r.iter().map(|&(a, b)| (b, a)).collect()
}

/// Ontology plus a small collection, for the constraint checks.
pub fn axiom_kb() -> impl Strategy<Value = KbSpec> {
    ont_spec()
        .prop_flat_map(|ont| {
            let n = ont.len();
            let entities = ont.entities;
            let rels = ont.relations.len();
            let links = if rels == 0 {
                Just(Vec::new()).boxed()
            } else {
                prop::collection::vec((0..6usize, 0..6usize, entities..n), 0..=8).boxed()
            };
            (
                Just(ont),
                prop::collection::vec(prop::collection::vec(0..entities, 0..=2), 6),
                links,
            )
        })
        .prop_map(|(ont, objects, links)| KbSpec { ont, objects, links })
}

use oml_core::calculus::{self, Evaluator, Node, RelExpr};
use oml_core::checker::{self, Enforcement};
use oml_core::Code;
use std::collections::BTreeMap;

fn count(diags: &[oml_core::Diagnostic], code: Code) -> usize {
    diags.iter().filter(|d| d.code == code).count()
}

/// Links merged the way the model stores them: one instance per
/// `(source, target)` carrying all its relation types.
fn instances(spec: &KbSpec) -> BTreeMap<(usize, usize), BTreeSet<usize>> {
    let mut m: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for &(a, b, r) in &spec.links {
        m.entry((a, b)).or_default().insert(r);
    }
    m
}

/// Closures, derivations and the five constraints against the naive
/// reference on one random knowledge base.
pub fn check_axioms(spec: &KbSpec) -> Result<(), TestCaseError> {
    let (kb, ids) = spec.build();
    let ont = &kb.ontology;
    let o = &spec.ont;
    let back: BTreeMap<TypeId, usize> = ids.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let map_pairs = |s: &BTreeSet<(TypeId, TypeId)>| -> BTreeSet<(usize, usize)> {
        s.iter()
            .filter_map(|(a, b)| Some((*back.get(a)?, *back.get(b)?)))
            .collect()
    };

    // Subtype closure: naive oracle, idempotence.
    let st = checker::subtype_closure(ont);
    let naive_st = naive_subtype_closure(o);
    prop_assert_eq!(map_pairs(&st), naive_st.clone());
    let mut closed = o.clone();
    closed.axioms = naive_st.iter().copied().collect();
    prop_assert_eq!(naive_subtype_closure(&closed), naive_st.clone());
    let again = {
        let (mut o2, ids2) = o.build();
        for &(a, b) in &naive_st {
            o2.declare_subtype(ids2[a], Some(ids2[b])).unwrap();
        }
        checker::subtype_closure(&o2)
    };
    prop_assert_eq!(&again, &st);

    // Classification closure is closed under subtype and is the join.
    let tables = checker::analyze(&kb);
    prop_assert!(calculus::compose(&tables.classification, &tables.subtype).is_subset(&tables.classification));
    let stored = checker::stored_classifications(&kb);
    let mut joined = BTreeSet::new();
    for &(i, t1) in &stored {
        for &(a, b) in &st {
            if a == t1 {
                joined.insert((i, b));
            }
        }
    }
    prop_assert_eq!(&joined, &tables.classification);
    prop_assert!(calculus::operator_axioms(ont, &tables).all());

    // Incompatible and incoherent types.
    let (dis, inc) = naive_derived(o);
    prop_assert_eq!(map_pairs(&tables.disjoint), dis.clone());
    let got_inc: BTreeSet<usize> = tables.incoherent.iter().map(|t| back[t]).collect();
    prop_assert_eq!(&got_inc, &inc);

    // Preservation of classification.
    let members = |e: usize| naive_members(spec, e);
    let inst = instances(spec);
    let mut want_cls = 0;
    for (&(a, b), rels) in &inst {
        let sup: BTreeSet<usize> = naive_st
            .iter()
            .filter(|(x, _)| rels.contains(x))
            .map(|&(_, y)| y)
            .collect();
        for r in sup {
            let (s, t) = o.relations[r - o.entities];
            want_cls += usize::from(!members(s).contains(&a)) + usize::from(!members(t).contains(&b));
        }
    }
    let strict = checker::check_preservation_of_classification(&kb, &tables, Enforcement::Strict);
    prop_assert_eq!(count(&strict.diagnostics, Code::CLS001), want_cls);
    let mut completed = kb.clone();
    checker::complete_classifications(&mut completed);
    let t2 = checker::analyze(&completed);
    let recheck = checker::check_preservation_of_classification(&completed, &t2, Enforcement::Strict);
    prop_assert!(recheck.diagnostics.is_empty());
    // Adding a closure classification keeps a clean KB clean.
    if let Some(&(key, t)) = t2.classification.iter().next() {
        let mut more = completed.clone();
        if let checker::InstanceKey::Object { object, .. } = key {
            more.collections[0].classify(&more.ontology.clone(), object, t).unwrap();
        }
        let t3 = checker::analyze(&more);
        prop_assert!(checker::check_preservation_of_classification(&more, &t3, Enforcement::Strict)
            .diagnostics
            .is_empty());
    }

    // Preservation of entailment.
    let mut want_ent = 0;
    for &(s, r) in &naive_st {
        if s != r && o.is_relation(s) {
            let ((g, d), (a, b)) = (o.relations[s - o.entities], o.relations[r - o.entities]);
            want_ent += usize::from(!naive_st.contains(&(g, a))) + usize::from(!naive_st.contains(&(d, b)));
        }
    }
    let ent = checker::check_preservation_of_entailment(ont, &st);
    prop_assert_eq!(count(&ent, Code::ENT001), want_ent);

    // Instances under disjoint or incoherent types.
    let close = |ts: &BTreeSet<usize>| -> Vec<usize> {
        let s: BTreeSet<usize> = naive_st.iter().filter(|(x, _)| ts.contains(x)).map(|&(_, y)| y).collect();
        s.into_iter().collect()
    };
    let mut instance_types: Vec<Vec<usize>> = spec
        .objects
        .iter()
        .map(|c| close(&c.iter().copied().collect()))
        .filter(|v| !v.is_empty())
        .collect();
    instance_types.extend(inst.values().map(close));
    let (mut want_dis, mut want_inc) = (0, 0);
    for ts in &instance_types {
        for (k, &a) in ts.iter().enumerate() {
            want_inc += usize::from(inc.contains(&a));
            for &b in &ts[k + 1..] {
                want_dis += usize::from(dis.contains(&(a, b)));
            }
        }
    }
    let cons = checker::check_instance_consistency(&kb, &tables);
    prop_assert_eq!(count(&cons, Code::DIS002), want_dis);
    prop_assert_eq!(count(&cons, Code::INC002), want_inc);

    // Inclusion implies subtype.
    let ext: Vec<BTreeSet<(usize, usize)>> = (o.entities..o.len()).map(|r| naive_extension(spec, r)).collect();
    let mut want_sug = 0;
    for s in o.entities..o.len() {
        for r in o.entities..o.len() {
            let (es, er) = (&ext[s - o.entities], &ext[r - o.entities]);
            if s != r && !es.is_empty() && es.is_subset(er) && !naive_st.contains(&(s, r)) {
                want_sug += 1;
            }
        }
    }
    let sug = checker::lint_inclusion_implies_subtype(&kb, &tables);
    prop_assert_eq!(count(&sug, Code::SUG001), want_sug);
    Ok(())
}

fn indices(p: &calculus::Pairs) -> BTreeSet<(usize, usize)> {
    let ix = |n: &Node| match n {
        Node::Object { object, .. } => object.index(),
        other => panic!("unexpected node {other:?}"),
    };
    p.iter().map(|(a, b)| (ix(a), ix(b))).collect()
}

/// Associativity, identity and involution laws on one random knowledge base,
/// every extension checked against nested-loop joins.
pub fn check_calculus(spec: &KbSpec) -> Result<(), TestCaseError> {
    let (kb, ids) = spec.build();
    let ont = &kb.ontology;
    let o = &spec.ont;
    let tables = checker::analyze(&kb);
    let ev = Evaluator::new(&kb, &tables);
    let ext = |e: &RelExpr| indices(&ev.extension(e));

    // Named relations and their transposes, with oracle extensions and endpoints.
    let mut atoms: Vec<(RelExpr, BTreeSet<(usize, usize)>, usize, usize)> = Vec::new();
    for r in o.entities..o.len() {
        let (s, t) = o.relations[r - o.entities];
        let e = RelExpr::Named(ids[r]);
        let n = naive_extension(spec, r);
        prop_assert_eq!(ext(&e), n.clone());
        let tr = RelExpr::transpose(e.clone());
        prop_assert_eq!(RelExpr::transpose(tr.clone()), e.clone());
        atoms.push((tr, swap(&n), t, s));
        atoms.push((e, n, s, t));
    }

    for a in 0..o.entities {
        let id = RelExpr::Identity(ids[a]);
        prop_assert_eq!(RelExpr::transpose(id.clone()), id.clone());
        let diag: BTreeSet<(usize, usize)> = naive_members(spec, a).into_iter().map(|i| (i, i)).collect();
        prop_assert_eq!(ext(&id), diag);
    }

    for (e, n, s, t) in &atoms {
        let left = RelExpr::compose(RelExpr::Identity(ids[*s]), e.clone());
        let right = RelExpr::compose(e.clone(), RelExpr::Identity(ids[*t]));
        let src = naive_members(spec, *s);
        let tgt = naive_members(spec, *t);
        let want_left: BTreeSet<_> = n.iter().copied().filter(|(a, _)| src.contains(a)).collect();
        let want_right: BTreeSet<_> = n.iter().copied().filter(|(_, b)| tgt.contains(b)).collect();
        prop_assert_eq!(ext(&left), want_left);
        prop_assert_eq!(ext(&right), want_right);
        prop_assert!(calculus::type_expr(ont, &left, calculus::Composability::Strict).is_ok());
    }

    let mut triples = 0;
    'outer: for (e1, n1, _, t1) in &atoms {
        for (e2, n2, s2, t2) in &atoms {
            if t1 != s2 {
                continue;
            }
            let c12 = RelExpr::compose(e1.clone(), e2.clone());
            let j12 = naive_join(n1, n2);
            prop_assert_eq!(ext(&c12), j12.clone());
            let inv = RelExpr::transpose(c12.clone());
            let rev = RelExpr::compose(RelExpr::transpose(e2.clone()), RelExpr::transpose(e1.clone()));
            prop_assert_eq!(ext(&inv), ext(&rev));
            prop_assert_eq!(ext(&inv), swap(&j12));
            for (e3, n3, s3, _) in &atoms {
                if t2 != s3 {
                    continue;
                }
                let l = RelExpr::compose(c12.clone(), e3.clone());
                let r = RelExpr::compose(e1.clone(), RelExpr::compose(e2.clone(), e3.clone()));
                prop_assert!(calculus::type_expr(ont, &l, calculus::Composability::Strict).is_ok());
                let want = naive_join(&j12, n3);
                prop_assert_eq!(ext(&l), want.clone());
                prop_assert_eq!(ext(&r), want);
                triples += 1;
                if triples >= 40 {
                    break 'outer;
                }
            }
        }
    }
    Ok(())
}
