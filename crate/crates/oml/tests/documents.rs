mod common;

use oml::load::{load_document, LoadOptions, MemoryResolver};
use oml::xmlio::{parse_oml, serialize, serialize_collection, serialize_ontology, ParseOptions};
use oml::Error;
use oml_core::view::semantic_view;
use proptest::prelude::*;

use common::{Features, Style};

#[test]
fn golden_documents_are_stable() {
    for (name, ho) in [
        ("movie.oml", false),
        ("casablanca-generic.oml", false),
        ("people.oml", false),
        ("broken.oml", false),
        ("color.oml", true),
        ("argument.oml", true),
    ] {
        let options = ParseOptions { higher_order: ho };
        let first = parse_oml(&common::read(name), name, options).unwrap();
        let text = serialize(&first);
        let second = parse_oml(&text, name, options).unwrap();
        assert_eq!(first.root, second.root, "{name}");
        assert_eq!(serialize(&second), text, "{name}");
    }
}

#[test]
fn canonical_movie_collection() {
    let doc = parse_oml(&common::read("casablanca-generic.oml"), "c", ParseOptions::default()).unwrap();
    let text = serialize(&doc);
    assert!(text.starts_with("<OML>\n  <Collection ontology=\"movie.oml\">\n    <Instance.Object id=\"Casablanca_1942\">"));
    assert!(!text.contains("Instance.Entity"));
}

#[test]
fn grammar_errors_name_the_rule() {
    let cases = [
        ("<OML><Ontology><Type.Object/></Ontology></OML>", "name"),
        ("<OML><Collection><Instance.Object><bogus/></Instance.Object></Collection></OML>", "bogus"),
        ("<OML><Ontology><Type.Object name=\"A\"><x/></Type.Object></Ontology></OML>", "must be empty"),
    ];
    for (text, needle) in cases {
        match parse_oml(text, "t", ParseOptions::default()) {
            Err(e @ Error::Grammar { .. }) => assert!(e.to_string().contains(needle), "{e}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(
        parse_oml("<OML><Ontology>", "t", ParseOptions::default()),
        Err(Error::Syntax { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn serialized_knowledge_bases_load_back(spec in common::fo_spec(Features::all())) {
        let kb = spec.build();
        let ont_text = serialize_ontology(&kb.ontology);
        let mut coll = kb.collections[0].clone();
        coll.ontology = Some("o.oml".into());
        let coll_text = serialize_collection(&coll, &kb.ontology);
        let resolver = MemoryResolver([("o.oml".to_string(), ont_text.clone())].into_iter().collect());
        let doc = parse_oml(&coll_text, "c.oml", ParseOptions::default()).unwrap();
        let back = load_document(&doc, &resolver, LoadOptions::default(), None)
            .map_err(|e| TestCaseError::fail(format!("{e}\n{ont_text}\n{coll_text}")))?;
        prop_assert_eq!(semantic_view(&kb, Default::default()), semantic_view(&back, Default::default()));
    }

    #[test]
    fn spelling_does_not_matter(spec in common::fo_spec(Features::all()), bytes in prop::collection::vec(any::<u8>(), 1..64)) {
        let kb = spec.build();
        let canonical = serialize_ontology(&kb.ontology);
        let text = common::restyle(&canonical, &mut Style::new(bytes));
        let a = common::parse(&text, ParseOptions::default());
        let b = common::parse(&canonical, ParseOptions::default());
        prop_assert_eq!(&a.root, &b.root);
        prop_assert_eq!(serialize(&a), canonical);
    }
}
