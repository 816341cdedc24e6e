mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn axioms_match_naive_reference(spec in common::axiom_kb()) {
        common::check_axioms(&spec)?;
    }

    #[test]
    fn calculus_laws_hold(spec in common::kb_spec()) {
        common::check_calculus(&spec)?;
    }
}
