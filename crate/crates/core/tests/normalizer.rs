//! Properties of text canonicalization and rule resolution.

use std::sync::OnceLock;

use collab_core::affnorm::{canonicalize_text, Outcome, RuleSet, RulesFile};
use proptest::prelude::*;

const RULES: &str = include_str!("../fixtures/uw_rules.json");

fn uw_rules() -> &'static RuleSet {
    static R: OnceLock<RuleSet> = OnceLock::new();
    R.get_or_init(|| RuleSet::from_json(RULES).unwrap())
}

fn aliases() -> &'static [String] {
    static A: OnceLock<Vec<String>> = OnceLock::new();
    A.get_or_init(|| {
        let file: RulesFile = serde_json::from_str(RULES).unwrap();
        file.department_aliases.into_values().flatten().collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn canonicalize_is_idempotent(s in any::<String>()) {
        let once = canonicalize_text(&s);
        prop_assert_eq!(canonicalize_text(&once), once);
    }

    #[test]
    fn canonical_text_is_trimmed_and_single_spaced(s in "[ a-zA-Z0-9.,&'\\-éüÅＡ-Ｚ\u{0301}]{0,40}") {
        let c = canonicalize_text(&s);
        prop_assert!(!c.starts_with(' ') && !c.ends_with(' '));
        prop_assert!(!c.contains("  "));
        prop_assert_eq!(c.to_lowercase(), c.clone());
    }

    #[test]
    fn resolution_reaches_a_fixed_point(idx in 0usize..1000, noise in "[ .,]{0,3}") {
        let rules = uw_rules();
        let raw = format!("{noise}{}{noise}", aliases()[idx % aliases().len()]);
        if let Outcome::Resolved(id) = rules.resolve_department(&raw).outcome {
            let again = rules.resolve_department(&RuleSet::display_form(&id));
            prop_assert_eq!(again.outcome, Outcome::Resolved(id));
        } else {
            prop_assert!(false, "alias `{}` did not resolve", raw);
        }
    }
}
