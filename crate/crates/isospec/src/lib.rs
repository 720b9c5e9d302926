//! Closed geodesics and length spectra of hyperbolic surfaces and surface
//! amalgams assembled from right-angled octagons.

pub mod commens;
pub mod complex;
pub mod enumerate;
pub mod error;
pub mod geometry;
pub mod reproduce;
pub mod spectrum;
pub mod transplant;

pub use complex::BlockComplex;
pub use error::{Error, Result};

/// Names of the bundled complex descriptions.
pub const BUNDLED: [&str; 8] =
    ["s1", "s2", "x1_homeo", "x2_homeo", "x1_nonhomeo", "x2_nonhomeo", "x1_triple", "x2_triple"];

/// Text of a bundled complex description.
pub fn bundled_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "s1" => include_str!("../data/s1.json"),
        "s2" => include_str!("../data/s2.json"),
        "x1_homeo" => include_str!("../data/x1_homeo.json"),
        "x2_homeo" => include_str!("../data/x2_homeo.json"),
        "x1_nonhomeo" => include_str!("../data/x1_nonhomeo.json"),
        "x2_nonhomeo" => include_str!("../data/x2_nonhomeo.json"),
        "x1_triple" => include_str!("../data/x1_triple.json"),
        "x2_triple" => include_str!("../data/x2_triple.json"),
        _ => return None,
    })
}

/// Load a bundled complex, optionally overriding its metric.
pub fn bundled(name: &str, metric: Option<(f64, f64)>) -> Result<BlockComplex> {
    let text = bundled_text(name).ok_or_else(|| Error::Io(format!("no bundled complex named {name}")))?;
    let cx = BlockComplex::load(text)?;
    Ok(match metric {
        Some((b, c)) => cx.with_metric(b, c)?,
        None => cx,
    })
}
