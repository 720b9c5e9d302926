use isospec::enumerate::{same_curve, unoriented_key, Realization};
use isospec::reproduce::pruned_and_brute;
use isospec::transplant::*;
use isospec::{bundled, Error};

fn realize(name: &str) -> Realization {
    Realization::new(bundled(name, None).unwrap()).unwrap()
}

#[test]
fn derived_table_follows_the_rules() {
    let t = derive_transition_table(&bundled("s1", None).unwrap(), &bundled("s2", None).unwrap()).unwrap();
    assert!(t.rule_violations().is_empty(), "{:?}", t.rule_violations());
}

#[test]
fn initiation_by_crossing_parity() {
    assert_eq!(initiation_offset(0, 0), 0);
    assert_eq!(initiation_offset(2, 1), 0);
    assert_eq!(initiation_offset(1, 0), 1);
    assert_eq!(initiation_offset(3, 2), 1);
    assert_eq!(initiation_offset(1, 1), 2);
    assert_eq!(initiate(7, 1, 1), 1);
}

#[test]
fn branch_offsets_of_the_amalgam_pairs() {
    let b = |n: &str| bundled(n, None).unwrap();
    assert_eq!(branch_offset(&b("x1_homeo"), &b("x2_homeo")), Some(0));
    assert_eq!(branch_offset(&b("x1_nonhomeo"), &b("x2_nonhomeo")), Some(1));
}

#[test]
fn surface_transplant_is_a_bijection() {
    let (a, b) = (realize("s1"), realize("s2"));
    let cutoff = 6.0 * a.cx().c;
    let (ga, gb) = (a.geodesics(cutoff, 6), b.geodesics(cutoff, 6));
    let wa: Vec<_> = ga.iter().filter(|g| !g.word.is_empty()).map(|g| g.word.clone()).collect();
    let wb: Vec<_> = gb.iter().filter(|g| !g.word.is_empty()).map(|g| g.word.clone()).collect();
    let report = verify_bijection(&a, &b, &wa, &wb, None);
    assert!(report.ok(), "{:?}", report.failures);
    for w in &wa {
        let t = transplant_word(&a, &b, w, None).unwrap();
        let back = transplant_back(&b, &a, &t.word, None).unwrap();
        assert_eq!(unoriented_key(&back.word), unoriented_key(w));
    }
}

#[test]
fn pruned_search_finds_every_curve() {
    for name in ["s1", "x1_nonhomeo"] {
        let r = realize(name);
        let (p, b) = pruned_and_brute(&r, 3, 6.0 * r.cx().c);
        assert_eq!(p, b, "{name}");
    }
}

#[test]
fn words_print_and_parse_back() {
    for name in ["s1", "x1_homeo"] {
        let r = realize(name);
        for g in r.geodesics(5.0 * r.cx().c, 5).iter().filter(|g| !g.word.is_empty()) {
            assert_eq!(r.parse_word(&r.word_string(&g.word)).unwrap(), g.word);
            let h = r.straighten(&g.word).unwrap();
            assert!(same_curve(g, &h, 1e-9));
        }
    }
    let r = realize("s1");
    assert!(r.parse_word("").is_err());
    assert!(r.parse_word("9:1[Cl>Cr]").is_err());
    assert!(r.parse_word("1:1[Cl>Cl]").is_err());
}

#[test]
fn single_sheet_words_are_reported() {
    let r = realize("x1_homeo");
    let words: Vec<_> = r.transversal_geodesics(8.0 * r.cx().c, 8);
    let single = words.iter().filter(|g| matches!(beta_decomposition(&r, &g.word), Err(Error::NoBranchCrossing))).count();
    assert!(single < words.len());
}

#[test]
fn closing_case_counts() {
    assert_eq!(case_formula(2, 1, ClosingCase::One), 4);
    assert_eq!(case_formula(2, 1, ClosingCase::Two), 2);
    assert_eq!(case_formula(2, 1, ClosingCase::Three), 2);
    assert_eq!(case_formula(4, 1, ClosingCase::One), 16);
    assert_eq!(case_formula(4, 1, ClosingCase::Two), 12);
}

#[test]
fn nonhomeo_counts_match_their_closed_form() {
    let (a, b) = (realize("x1_nonhomeo"), realize("x2_nonhomeo"));
    let offset = branch_offset(a.cx(), b.cx()).unwrap();
    let gs = a.transversal_geodesics(13.0 * a.cx().c, 13);
    assert!(!gs.is_empty());
    for g in &gs {
        let (h, t) = paired_counts(&a, &b, &g.word, offset).unwrap();
        assert_eq!(h.search, t.search);
        assert_eq!(h.formula, Some(h.search));
    }
}
