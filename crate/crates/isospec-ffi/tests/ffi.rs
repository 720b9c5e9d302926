use std::ffi::{c_char, CString};
use std::ptr;

use isospec_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { iso_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn load(name: &str) -> *mut IsoComplex {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { iso_complex_load_bundled(name.as_ptr(), &mut h) }, IsoStatus::Ok);
    assert!(!h.is_null());
    h
}

fn spectrum(h: *const IsoComplex, cutoff: f64) -> *mut IsoSpectrum {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { iso_spectrum_build(h, cutoff, 1e-6, 0, &mut s) }, IsoStatus::Ok);
    s
}

#[test]
fn surfaces_have_the_systole_band() {
    let h = load("s1");
    let mut chi = 0;
    assert_eq!(unsafe { iso_complex_euler(h, &mut chi) }, IsoStatus::Ok);
    assert_eq!(chi, -8);
    let s = spectrum(h, 0.51);
    assert_eq!(unsafe { iso_spectrum_len(s) }, 1);
    let (mut length, mut mult) = (0.0, 0);
    assert_eq!(unsafe { iso_spectrum_band(s, 0, &mut length, &mut mult) }, IsoStatus::Ok);
    assert!((length - 0.5).abs() < 1e-9);
    assert_eq!(mult, 4);
    assert_eq!(unsafe { iso_spectrum_band(s, 1, &mut length, &mut mult) }, IsoStatus::OutOfRange);
    unsafe {
        iso_spectrum_free(s);
        iso_complex_free(h);
    }
}

#[test]
fn surface_pair_compares_equal() {
    let (a, b) = (load("s1"), load("s2"));
    let (sa, sb) = (spectrum(a, 2.0), spectrum(b, 2.0));
    let mut equal = false;
    assert_eq!(unsafe { iso_spectrum_compare(sa, sb, false, &mut equal) }, IsoStatus::Ok);
    assert!(equal);
    unsafe {
        iso_spectrum_free(sa);
        iso_spectrum_free(sb);
        iso_complex_free(a);
        iso_complex_free(b);
    }
}

#[test]
fn cutoff_mismatch_is_reported() {
    let h = load("s1");
    let (x, y) = (spectrum(h, 1.0), spectrum(h, 2.0));
    let mut equal = false;
    assert_eq!(unsafe { iso_spectrum_compare(x, y, true, &mut equal) }, IsoStatus::Mismatch);
    assert!(!last_error().is_empty());
    unsafe {
        iso_spectrum_free(x);
        iso_spectrum_free(y);
        iso_complex_free(h);
    }
}

#[test]
fn chambers_of_amalgams() {
    for (name, want) in [("x1_nonhomeo", 2), ("x2_nonhomeo", 1)] {
        let h = load(name);
        let mut n = 0;
        assert_eq!(unsafe { iso_complex_chambers(h, &mut n) }, IsoStatus::Ok);
        assert_eq!(n, want, "{name}");
        unsafe { iso_complex_free(h) };
    }
}

#[test]
fn metric_changes_and_rejections() {
    let h = load("s2");
    assert_eq!(unsafe { iso_complex_set_metric(h, 0.8, 0.45) }, IsoStatus::Ok);
    assert_eq!(unsafe { iso_complex_set_metric(h, 0.4, 0.6) }, IsoStatus::InvalidMetric);
    assert!(last_error().contains('0'));
    let mut a = 0.0;
    assert_eq!(unsafe { iso_octagon_a(0.75, 0.5, &mut a) }, IsoStatus::Ok);
    assert!(a > 0.0 && a.is_finite());
    assert_eq!(unsafe { iso_octagon_a(0.5, 0.75, &mut a) }, IsoStatus::InvalidMetric);
    unsafe { iso_complex_free(h) };
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let mut h = ptr::null_mut();
    let unknown = CString::new("torus").unwrap();
    assert_eq!(unsafe { iso_complex_load_bundled(unknown.as_ptr(), &mut h) }, IsoStatus::UnknownComplex);
    assert!(last_error().contains("torus"));
    assert_eq!(unsafe { iso_complex_load_bundled(ptr::null(), &mut h) }, IsoStatus::NullPointer);
    let junk = CString::new("{not json").unwrap();
    assert_eq!(unsafe { iso_complex_load_json(junk.as_ptr(), &mut h) }, IsoStatus::InvalidComplex);
    let bytes = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { iso_complex_load_json(bytes.as_ptr() as *const c_char, &mut h) }, IsoStatus::InvalidUtf8);
    assert!(h.is_null());
    let mut s = ptr::null_mut();
    let c = load("s1");
    assert_eq!(unsafe { iso_spectrum_build(c, -1.0, 1e-6, 0, &mut s) }, IsoStatus::OutOfRange);
    assert_eq!(unsafe { iso_spectrum_len(ptr::null()) }, 0);
    unsafe {
        iso_complex_free(ptr::null_mut());
        iso_spectrum_free(ptr::null_mut());
        iso_complex_free(c);
    }
}

#[test]
fn json_round_trip_matches_bundled() {
    let json = CString::new(isospec::bundled_text("x1_homeo").unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { iso_complex_load_json(json.as_ptr(), &mut h) }, IsoStatus::Ok);
    let mut chi = 0;
    assert_eq!(unsafe { iso_complex_euler(h, &mut chi) }, IsoStatus::Ok);
    assert!(chi < 0);
    unsafe { iso_complex_free(h) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/isospec.h")).unwrap();
    assert!(header.contains("#ifndef ISOSPEC_H"));
    for f in [
        "iso_last_error",
        "iso_complex_load_bundled",
        "iso_complex_load_json",
        "iso_complex_set_metric",
        "iso_complex_free",
        "iso_complex_euler",
        "iso_complex_chambers",
        "iso_octagon_a",
        "iso_spectrum_build",
        "iso_spectrum_len",
        "iso_spectrum_band",
        "iso_spectrum_compare",
        "iso_spectrum_free",
        "ISO_STATUS_INVALID_METRIC",
        "typedef struct IsoComplex IsoComplex",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
}
