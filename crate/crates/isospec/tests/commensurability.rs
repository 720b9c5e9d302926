use isospec::bundled;
use isospec::commens::*;
use proptest::prelude::*;

fn vector(text: &str) -> ChamberVector {
    validate_cover(&CoverSpec::parse(text).unwrap()).unwrap()
}

#[test]
fn covers_have_the_stated_chamber_vectors() {
    assert_eq!(vector(X1_HAT).runs(), vec![(-12, 6), (-6, 12)]);
    assert_eq!(vector(X2_HAT).runs(), vec![(-10, 9), (-6, 9)]);
}

#[test]
fn covers_sit_over_their_bases() {
    for (text, base) in [(X1_HAT, "x1_triple"), (X2_HAT, "x2_triple")] {
        let spec = CoverSpec::parse(text).unwrap();
        assert!(base_matches(&spec, &bundled(base, None).unwrap()).unwrap());
    }
    let spec = CoverSpec::parse(X1_HAT).unwrap();
    assert!(!base_matches(&spec, &bundled("x2_triple", None).unwrap()).unwrap());
}

#[test]
fn ratio_test_rejects_the_pair() {
    let v = ratio_test(&vector(X1_HAT), &vector(X2_HAT)).unwrap();
    assert!(!v.compatible);
    assert_eq!(v.ratios.first().unwrap().to_string(), "6/5");
    assert_eq!(v.ratios.last().unwrap().to_string(), "1");
}

#[test]
fn volumes_agree() {
    let a = volume(&bundled("x1_triple", None).unwrap());
    let b = volume(&bundled("x2_triple", None).unwrap());
    assert_eq!(a, b);
    assert!((a - 48.0 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn wrong_sheet_degree_is_rejected() {
    let mut spec = CoverSpec::parse(X1_HAT).unwrap();
    spec.sheets[0].degree = 2;
    assert!(validate_cover(&spec).is_err());
}

#[test]
fn wrong_sheet_count_is_rejected() {
    let mut spec = CoverSpec::parse(X2_HAT).unwrap();
    spec.sheets[1].count += 1;
    assert!(validate_cover(&spec).is_err());
}

#[test]
fn boundary_lifts_must_match() {
    let mut spec = CoverSpec::parse(X1_HAT).unwrap();
    spec.branch_lifts = 5;
    assert!(validate_cover(&spec).is_err());
}

#[test]
fn vectors_must_have_equal_length() {
    let a = ChamberVector::new(vec![-2, -4]).unwrap();
    let b = ChamberVector::new(vec![-2]).unwrap();
    assert!(ratio_test(&a, &b).is_err());
    assert!(ChamberVector::new(vec![-2, 0]).is_err());
}

proptest! {
    #[test]
    fn ratios_are_reduced(p in -500i64..500, q in 1i64..500) {
        let r = Ratio::new(p, q);
        prop_assert!(r.den > 0);
        prop_assert_eq!(r.num * q, p * r.den);
        let g = (1..=r.den).rev().find(|d| r.num % d == 0 && r.den % d == 0).unwrap();
        prop_assert_eq!(g, 1);
    }

    #[test]
    fn ratio_test_is_symmetric(v in proptest::collection::vec(-30i64..-1, 1..8), k in 1i64..5) {
        let a = ChamberVector::new(v.clone()).unwrap();
        let b = ChamberVector::new(v.iter().map(|x| x * k).collect()).unwrap();
        let ab = ratio_test(&a, &b).unwrap();
        let ba = ratio_test(&b, &a).unwrap();
        prop_assert!(ab.compatible && ba.compatible);
        prop_assert_eq!(ab.ratios[0], Ratio::new(1, k));
    }

    #[test]
    fn compatibility_does_not_depend_on_order(
        vw in proptest::collection::vec((-30i64..-1, -30i64..-1), 1..8),
    ) {
        let (v, w): (Vec<i64>, Vec<i64>) = vw.into_iter().unzip();
        let (a, b) = (ChamberVector::new(v).unwrap(), ChamberVector::new(w).unwrap());
        prop_assert_eq!(ratio_test(&a, &b).unwrap().compatible, ratio_test(&b, &a).unwrap().compatible);
    }
}
