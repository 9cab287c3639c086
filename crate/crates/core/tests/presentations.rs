use proptest::prelude::*;
use semifield_core::classify::is_isotopic;
use semifield_core::fixtures;
use semifield_core::presentations::{
    appendix_rule, appendix_rules, check_appendix, check_rule, rule_to_table, AppendixOutcome,
    MultiplicationRule,
};
use semifield_core::semifield::nuclei_and_center;

fn rule(k: usize) -> MultiplicationRule {
    appendix_rules().swap_remove(k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_rule_is_biadditive(k in 0usize..67, x in 0u8..64, y in 0u8..64, a in 0u8..64) {
        let r = rule(k);
        prop_assert_eq!(r.eval_packed(x ^ y, a), r.eval_packed(x, a) ^ r.eval_packed(y, a));
        prop_assert_eq!(r.eval_packed(a, x ^ y), r.eval_packed(a, x) ^ r.eval_packed(a, y));
    }

    #[test]
    fn packing_round_trips(k in 0usize..67, v in 0u8..64) {
        let r = rule(k);
        prop_assert_eq!(r.pack(&r.unpack(v)), v);
    }
}

#[test]
fn rule_fourteen_matches_its_plane() {
    let t = rule_to_table(&appendix_rule("XIV").unwrap()).unwrap();
    assert_eq!(nuclei_and_center(&t).0, [2, 2, 2, 2, 4]);
    let rep = fixtures::representative("XIV").unwrap().table().unwrap();
    let triple = is_isotopic(&t, &rep).expect("isotopic");
    assert!(triple.verify(&t, &rep));
}

#[test]
fn rule_nineteen_has_fourteen_autotopies() {
    let r = appendix_rule("XIX").unwrap();
    assert_eq!(r.kind, 3);
    let t = rule_to_table(&r).unwrap();
    let sa = semifield_core::classify::sa_decomposition(&t).unwrap();
    assert_eq!(sa.at_order, 14);
}

#[test]
fn a_corrupted_rule_is_rejected() {
    let mut r = appendix_rule("XIV").unwrap();
    let t = &mut r.coords[1][0];
    t.a_frob = (t.a_frob + 1) % 3;
    let report = check_rule(&r);
    assert!(matches!(
        report.outcome,
        AppendixOutcome::NotIsotopic | AppendixOutcome::ZeroDivisor { .. }
    ));
}

#[test]
fn unknown_labels_are_reported() {
    let reports = check_appendix(Some(&["XIII".to_string(), "XCIX".to_string()]));
    assert_eq!(reports[0].outcome, AppendixOutcome::MissingRule);
    assert_eq!(reports[1].outcome, AppendixOutcome::MissingRule);
}

/// Every rule against its representative, with nuclei orders.
#[test]
#[ignore = "full corpus; run nightly"]
fn appendix_full_corpus() {
    let reports = check_appendix(None);
    let mut bad = Vec::new();
    for r in &reports {
        if !r.passed() {
            bad.push(format!("{} {:?}", r.label, r.outcome));
            continue;
        }
        let t = rule_to_table(&appendix_rule(&r.label).unwrap()).unwrap();
        let want = fixtures::plane_properties(&r.label).unwrap().zn;
        if nuclei_and_center(&t) != want {
            bad.push(format!("{} ZN {}", r.label, nuclei_and_center(&t)));
        }
    }
    assert_eq!(reports.len(), 67);
    assert!(
        bad.is_empty(),
        "{} of 67 entries fail: {}",
        bad.len(),
        bad.join("; ")
    );
}
