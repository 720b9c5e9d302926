use isospec::complex::BlockComplex;
use isospec::{bundled, bundled_text, Error, BUNDLED};

fn kinds(cs: &[isospec::complex::Component]) -> Vec<(i64, usize)> {
    let mut v: Vec<_> = cs.iter().map(|c| c.kind()).collect();
    v.sort();
    v
}

#[test]
fn every_bundled_complex_loads() {
    for name in BUNDLED {
        let cx = bundled(name, None).unwrap();
        assert_eq!(cx.name, name);
        assert!(cx.euler_characteristic() < 0, "{name}");
        assert_eq!(cx.is_amalgam(), name != "s1" && name != "s2", "{name}");
    }
}

#[test]
fn surfaces_have_genus_five() {
    for name in ["s1", "s2"] {
        let cx = bundled(name, None).unwrap();
        assert_eq!(cx.euler_characteristic(), -8);
        assert_eq!(cx.combinatorial_systoles().len(), 4, "{name}");
    }
}

#[test]
fn chamber_types() {
    let x1 = kinds(&bundled("x1_nonhomeo", None).unwrap().chambers().unwrap());
    let x2 = kinds(&bundled("x2_nonhomeo", None).unwrap().chambers().unwrap());
    assert_eq!((x1.len(), x2.len()), (2, 1));
    let h1 = kinds(&bundled("x1_homeo", None).unwrap().chambers().unwrap());
    let h2 = kinds(&bundled("x2_homeo", None).unwrap().chambers().unwrap());
    assert_eq!(h1, h2);
}

#[test]
fn surfaces_have_no_chambers() {
    assert!(matches!(bundled("s1", None).unwrap().chambers(), Err(Error::NotAmalgam(_))));
}

#[test]
fn metric_is_replaced_and_checked() {
    let cx = bundled("s1", None).unwrap();
    let p = cx.with_metric(0.8, 0.45).unwrap();
    assert_eq!((p.b, p.c), (0.8, 0.45));
    assert!(matches!(cx.with_metric(0.45, 0.8), Err(Error::Metric { .. })));
}

#[test]
fn dropped_pairing_is_rejected() {
    let mut doc: serde_json::Value = serde_json::from_str(bundled_text("s1").unwrap()).unwrap();
    doc["pairings"].as_array_mut().unwrap().remove(0);
    let err = BlockComplex::load(&doc.to_string()).unwrap_err();
    assert!(matches!(err, Error::UnpairedSide { .. }), "{err}");
}

#[test]
fn duplicated_pairing_is_rejected() {
    let mut doc: serde_json::Value = serde_json::from_str(bundled_text("s2").unwrap()).unwrap();
    let first = doc["pairings"][0].clone();
    doc["pairings"].as_array_mut().unwrap().push(first);
    assert!(BlockComplex::load(&doc.to_string()).is_err());
}

#[test]
fn mismatched_lengths_are_rejected() {
    let mut doc: serde_json::Value = serde_json::from_str(bundled_text("s1").unwrap()).unwrap();
    doc["pairings"][0]["end_b"][2] = "A-top-left".into();
    assert!(BlockComplex::load(&doc.to_string()).is_err());
}

#[test]
fn malformed_documents_are_schema_errors() {
    assert!(matches!(BlockComplex::load("{"), Err(Error::Schema(_))));
    assert!(matches!(BlockComplex::load(r#"{"name": "x"}"#), Err(Error::Schema(_))));
}
