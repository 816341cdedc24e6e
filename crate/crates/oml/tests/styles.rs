mod common;

use oml::load::LoadOptions;
use oml::xmlio::ParseOptions;
use oml::{dtd, styles, Error};
use oml_core::dtd::compile_dtd;
use oml_core::view::{semantically_equal, ViewOptions};
use oml_core::{Code, Collection, CollectionBuilder, KnowledgeBase, Loc, Ontology, Target};
use proptest::prelude::*;

fn movie() -> KnowledgeBase {
    common::load("casablanca-generic.oml", LoadOptions::default())
}

#[test]
fn movie_dtd_matches_golden_file() {
    let kb = movie();
    assert_eq!(compile_dtd(&kb.ontology).unwrap().render(), common::read("movie.dtd"));
}

#[test]
fn casablanca_in_both_styles() {
    let kb = movie();
    let specific = styles::to_specific(&kb.collections[0], &kb.ontology).unwrap();
    assert!(specific.starts_with("<!-- OML-SPECIFIC ontology=\"movie.oml\" -->\n<Movie id=\"Casablanca_1942\" year=\"1942\">"));
    assert!(specific.contains("<genre target.Instance=\"Drama\"/>"));
    assert!(specific.contains("character=\"Rich Blaine\""));

    let back = styles::to_generic(&specific, &kb.ontology, "s", ParseOptions::default()).unwrap();
    assert_eq!(back.ontology.as_deref(), Some("movie.oml"));
    let again = KnowledgeBase::new(kb.ontology.clone()).with_collection(back);
    assert!(semantically_equal(&kb, &again, ViewOptions::default()));
}

#[test]
fn specific_output_validates() {
    let kb = movie();
    let dtd = dtd::parse_dtd(&common::read("movie.dtd"), "movie.dtd").unwrap();
    let specific = styles::to_specific(&kb.collections[0], &kb.ontology).unwrap();
    assert!(dtd::validate(&dtd, &specific, "s").is_empty());
    assert!(dtd::validate(&dtd, &common::read("casablanca-specific.xml"), "s").is_empty());
}

#[test]
fn invalid_specific_documents() {
    let dtd = dtd::parse_dtd(&common::read("movie.dtd"), "movie.dtd").unwrap();
    let codes = |text: &str| -> Vec<Code> { dtd::validate(&dtd, text, "t").into_iter().map(|d| d.code).collect() };
    assert_eq!(codes("<Film id=\"a\"/>"), [Code::DTD001]);
    assert_eq!(codes("<Movie id=\"a\"><Cast id=\"b\"/></Movie>"), [Code::DTD002]);
    assert_eq!(codes("<Movie year=\"1942\"/>"), [Code::DTD003]);
    assert_eq!(codes("<Movie id=\"a\"/><Cast id=\"a\"/>"), [Code::DTD004]);
    assert_eq!(codes("<Movie id=\"a\" director=\"x\"/>"), [Code::DTD005]);
    assert_eq!(codes("<Movie id=\"a\" year=\"nineteen 42\"/>"), [Code::DTD006]);
    assert_eq!(codes("<Movie id=\"a\""), [Code::SYN001]);
}

#[test]
fn higher_order_specific_collection() {
    let kb = common::load("color.oml", common::higher_order());
    let ball = styles::to_generic(&common::read("ball.xml"), &kb.ontology, "ball.xml", ParseOptions { higher_order: true })
        .unwrap();
    assert_eq!(ball.len(), 1);
    let text = styles::to_specific(&ball, &kb.ontology).unwrap();
    // Anonymous objects take their display name as id, which the DTD needs.
    assert!(text.contains("<Ball id=\"_g1\">\n  <chrc target.Instance=\"Red\"/>\n</Ball>"), "{text}");
}

fn shapes() -> Ontology {
    let mut o = Ontology::new("shapes");
    o.declare_object("Shape").unwrap();
    o.declare_object("Round").unwrap();
    o.declare_object("Solid").unwrap();
    o.declare_relation("near", "Shape", "Shape").unwrap();
    o
}

#[test]
fn untranslatable_collections() {
    let o = shapes();
    let translate = |f: &dyn Fn(&mut CollectionBuilder)| {
        let mut b = CollectionBuilder::new(&o);
        f(&mut b);
        styles::to_specific(&b.finish().unwrap(), &o)
    };
    let at = Loc::default();
    let r = translate(&|b| {
        b.object(Some("x"), None, at).unwrap();
    });
    assert!(matches!(r, Err(Error::MissingClassification { .. })), "{r:?}");
    let r = translate(&|b| {
        let x = b.object(Some("x"), None, at).unwrap();
        b.classify(x, "Round", at).unwrap();
        b.classify(x, "Solid", at).unwrap();
    });
    assert!(matches!(r, Err(Error::AmbiguousClassification { .. })), "{r:?}");
    let shape = o.resolve_type_name("Shape").unwrap();
    let near = o.resolve_type_name("near").unwrap();
    let mut c = Collection::new();
    let x = c.add_object(Some("x"), None).unwrap();
    let y = c.add_object(None, None).unwrap();
    c.classify(&o, x, shape).unwrap();
    c.classify(&o, y, shape).unwrap();
    c.add_relation_instance(&o, x, Target::Object(y), [near]).unwrap();
    let r = styles::to_specific(&c, &o);
    assert!(matches!(r, Err(Error::UnnamedInstance { .. })), "{r:?}");

    let mut reserved = Ontology::new("r");
    reserved.declare_object("classification").unwrap();
    let mut b = CollectionBuilder::new(&reserved);
    let x = b.object(Some("x"), None, at).unwrap();
    b.classify(x, "classification", at).unwrap();
    let r = styles::to_specific(&b.finish().unwrap(), &reserved);
    assert!(matches!(r, Err(Error::ReservedTag { .. })), "{r:?}");
}

#[test]
fn unknown_specific_markup() {
    let o = shapes();
    let go = |t: &str| styles::to_generic(t, &o, "t", ParseOptions::default());
    assert!(matches!(go("<Square id=\"a\"/>"), Err(Error::UnknownTag { .. })));
    assert!(matches!(go("<Shape id=\"a\" colour=\"red\"/>"), Err(Error::UnknownAttribute { .. })));
    assert!(matches!(go("<Shape id=\"a\"><near/></Shape>"), Err(Error::Grammar { .. })));
    let c = go("<Shape id=\"a\"><near target.Instance=\"b\"/></Shape><Shape id=\"b\"/>").unwrap();
    assert_eq!(c.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    // With one entity type per object and every object named, the two styles
    // carry the same content and the specific form meets the compiled DTD.
    #[test]
    fn styles_agree(spec in common::fo_spec(common::Features::default())) {
        let mut spec = spec;
        let (relations, functions) = (spec.relations.clone(), spec.functions.clone());
        for o in &mut spec.objects {
            o.named = true;
            let class = o.classes.first().copied().unwrap_or(0);
            o.classes = vec![class];
            o.links.retain(|&(r, _)| relations[r].0 == class);
            o.values.retain(|&(f, _)| functions[f].0 == class);
        }
        spec.entity_axioms.clear();
        let kb = spec.build();
        let text = styles::to_specific(&kb.collections[0], &kb.ontology).unwrap();
        let dtd = compile_dtd(&kb.ontology).unwrap().document;
        let diags = dtd::validate(&dtd, &text, "s");
        prop_assert!(diags.is_empty(), "{:?}\n{}", diags, text);
        let back = styles::to_generic(&text, &kb.ontology, "s", ParseOptions::default()).unwrap();
        let again = KnowledgeBase::new(kb.ontology.clone()).with_collection(back);
        prop_assert!(semantically_equal(&kb, &again, ViewOptions::default()), "{}", text);
    }
}
