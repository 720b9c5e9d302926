use isospec::enumerate::Realization;
use isospec::spectrum::{band, build_spectrum, compare, Mode};
use isospec::{bundled, Error};
use proptest::prelude::*;

fn surface(name: &str) -> Realization {
    Realization::new(bundled(name, None).unwrap()).unwrap()
}

#[test]
fn systole_band_just_above_c() {
    for name in ["s1", "s2"] {
        let s = build_spectrum(&surface(name), 0.51, 1e-6, None);
        assert_eq!(s.bands.len(), 1, "{name}");
        assert!((s.bands[0].length - 0.5).abs() < 1e-9);
        assert_eq!(s.bands[0].multiplicity, 4);
    }
}

#[test]
fn nothing_below_c() {
    let s = build_spectrum(&surface("s1"), 0.49, 1e-6, None);
    assert!(s.bands.is_empty());
}

#[test]
fn perturbed_systoles_follow_c() {
    let r = Realization::new(bundled("s2", Some((0.8, 0.45))).unwrap()).unwrap();
    let s = build_spectrum(&r, 0.46, 1e-6, None);
    assert_eq!(s.bands.len(), 1);
    assert!((s.bands[0].length - 0.45).abs() < 1e-9);
    assert_eq!(s.bands[0].multiplicity, 4);
}

#[test]
fn surface_pair_agrees_up_to_4c() {
    let (a, b) = (surface("s1"), surface("s2"));
    let (sa, sb) = (build_spectrum(&a, 2.0, 1e-6, None), build_spectrum(&b, 2.0, 1e-6, None));
    let full = compare(&sa, &sb, Mode::Full).unwrap();
    assert!(full.equal, "{:?}", full.first());
    assert!(sa.total() > 4);
}

#[test]
fn csv_is_deterministic() {
    let r = surface("s1");
    let x = build_spectrum(&r, 2.5, 1e-6, None).to_csv();
    let y = build_spectrum(&r, 2.5, 1e-6, None).to_csv();
    assert_eq!(x, y);
    assert!(x.starts_with("length,multiplicity\n0.500000000,4\n"));
}

#[test]
fn cutoffs_must_match() {
    let r = surface("s1");
    let err = compare(&build_spectrum(&r, 1.0, 1e-6, None), &build_spectrum(&r, 1.5, 1e-6, None), Mode::Full).unwrap_err();
    assert!(matches!(err, Error::CutoffMismatch(..)));
}

fn spectrum_from(lengths: &[f64]) -> isospec::spectrum::LengthSpectrum {
    isospec::spectrum::LengthSpectrum {
        complex: "t".into(),
        cutoff: 10.0,
        tol: 1e-6,
        max_crossings: 1,
        bands: band(lengths.iter().map(|&l| (l, String::new())).collect(), 1e-6),
        certificate: String::new(),
    }
}

proptest! {
    #[test]
    fn banding_keeps_every_curve(v in proptest::collection::vec(0.1f64..5.0, 0..40)) {
        let s = spectrum_from(&v);
        prop_assert_eq!(s.total(), v.len());
        prop_assert!(s.bands.windows(2).all(|w| w[0].length < w[1].length));
    }

    #[test]
    fn comparison_is_reflexive_and_symmetric(
        v in proptest::collection::vec(0.1f64..5.0, 0..30),
        w in proptest::collection::vec(0.1f64..5.0, 0..30),
    ) {
        let (a, b) = (spectrum_from(&v), spectrum_from(&w));
        prop_assert!(compare(&a, &a, Mode::Full).unwrap().equal);
        for mode in [Mode::Full, Mode::Weak] {
            prop_assert_eq!(compare(&a, &b, mode).unwrap().equal, compare(&b, &a, mode).unwrap().equal);
        }
        if compare(&a, &b, Mode::Full).unwrap().equal {
            prop_assert!(compare(&a, &b, Mode::Weak).unwrap().equal);
        }
    }

    #[test]
    fn shuffled_multiset_has_equal_spectrum(mut v in proptest::collection::vec(0.1f64..5.0, 1..30), k in 0usize..30) {
        let a = spectrum_from(&v);
        let n = v.len();
        v.rotate_left(k % n);
        prop_assert!(compare(&a, &spectrum_from(&v), Mode::Full).unwrap().equal);
    }
}
