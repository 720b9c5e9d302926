//! Banded length spectra and their comparison.

use std::fmt::Write as _;

use serde::Serialize;

use crate::enumerate::{ClosedGeodesic, Realization};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;

/// How multiplicities are counted; stated in every report.
pub const CONVENTION: &str = "multiplicity counts unoriented primitive closed geodesics";

/// Lengths within the tolerance of each other, merged.
#[derive(Clone, Debug, Serialize)]
pub struct Band {
    pub length: f64,
    pub diameter: f64,
    pub multiplicity: usize,
    pub witnesses: Vec<String>,
    /// Closer than ten tolerances to a neighbouring band.
    pub crowded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LengthSpectrum {
    pub complex: String,
    pub cutoff: f64,
    pub tol: f64,
    pub max_crossings: usize,
    pub bands: Vec<Band>,
    pub certificate: String,
}

const WITNESSES: usize = 3;

/// Group sorted (length, witness) pairs into bands: a length joins the
/// current band when it is within `tol` of the band's largest length.
pub fn band(mut items: Vec<(f64, String)>, tol: f64) -> Vec<Band> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut out: Vec<Band> = Vec::new();
    let mut lo = f64::NAN;
    let mut hi = f64::NAN;
    for (l, w) in items {
        match out.last_mut() {
            Some(b) if l - hi <= tol => {
                b.multiplicity += 1;
                if b.witnesses.len() < WITNESSES {
                    b.witnesses.push(w);
                }
                hi = l;
                b.diameter = hi - lo;
            }
            _ => {
                if let Some(b) = out.last_mut() {
                    b.length = 0.5 * (lo + hi);
                }
                lo = l;
                hi = l;
                out.push(Band { length: l, diameter: 0.0, multiplicity: 1, witnesses: vec![w], crowded: false });
            }
        }
    }
    if let Some(b) = out.last_mut() {
        b.length = 0.5 * (lo + hi);
    }
    for k in 1..out.len() {
        let gap = (out[k].length - 0.5 * out[k].diameter) - (out[k - 1].length + 0.5 * out[k - 1].diameter);
        if gap < 10.0 * tol {
            out[k].crowded = true;
            out[k - 1].crowded = true;
        }
    }
    out
}

/// Crossing bound used for a cutoff: ceil(cutoff / c).
pub fn crossing_bound(cutoff: f64, c: f64) -> usize {
    (cutoff / c - 1e-12).ceil().max(1.0) as usize
}

/// Spectrum of the primitive closed geodesics of length at most `cutoff`.
pub fn build_spectrum(r: &Realization, cutoff: f64, tol: f64, max_crossings: Option<usize>) -> LengthSpectrum {
    let n = max_crossings.unwrap_or_else(|| crossing_bound(cutoff, r.cx().c));
    let geodesics = r.geodesics(cutoff, n);
    spectrum_of(r, &geodesics, cutoff, tol, n)
}

/// Spectrum of an already enumerated list of geodesics.
pub fn spectrum_of(r: &Realization, geodesics: &[ClosedGeodesic], cutoff: f64, tol: f64, n: usize) -> LengthSpectrum {
    let items = geodesics
        .iter()
        .filter(|g| g.primitive && g.length <= cutoff)
        .map(|g| (g.length, r.witness(g)))
        .collect();
    LengthSpectrum {
        complex: r.cx().name.clone(),
        cutoff,
        tol,
        max_crossings: n,
        bands: band(items, tol),
        certificate: format!(
            "crossing words enumerated up to {n} side crossings (ceil(cutoff / c) with c = {}), plus closed curves in the 1-skeleton up to the cutoff",
            r.cx().c
        ),
    }
}

impl LengthSpectrum {
    pub fn total(&self) -> usize {
        self.bands.iter().map(|b| b.multiplicity).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("length,multiplicity\n");
        for b in &self.bands {
            writeln!(s, "{:.9},{}", b.length, b.multiplicity).unwrap();
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "# Length spectrum of {}\n\ncutoff {}, tolerance {:e}, {CONVENTION}.\n{}.\n\n| length | multiplicity | diameter | witness |\n|---|---|---|---|\n",
            self.complex, self.cutoff, self.tol, self.certificate
        );
        for b in &self.bands {
            writeln!(
                s,
                "| {:.9} | {} | {:.1e} | {}{} |",
                b.length,
                b.multiplicity,
                b.diameter,
                b.witnesses.first().map(String::as_str).unwrap_or(""),
                if b.crowded { " (crowded)" } else { "" }
            )
            .unwrap();
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Full,
    Weak,
}

#[derive(Clone, Debug, Serialize)]
pub struct Discrepancy {
    pub length: f64,
    pub multiplicity: [usize; 2],
    pub witnesses: [Vec<String>; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub mode: Mode,
    pub equal: bool,
    pub bands: [usize; 2],
    pub discrepancies: Vec<Discrepancy>,
}

impl Comparison {
    pub fn first(&self) -> Option<&Discrepancy> {
        self.discrepancies.first()
    }
}

/// Compare two spectra band by band. Bands match when their lengths agree
/// within the tolerance; full mode also requires equal multiplicities.
pub fn compare(a: &LengthSpectrum, b: &LengthSpectrum, mode: Mode) -> Result<Comparison> {
    if (a.cutoff - b.cutoff).abs() > 1e-12 {
        return Err(Error::CutoffMismatch(a.cutoff, b.cutoff));
    }
    if (a.tol - b.tol).abs() > 1e-18 {
        return Err(Error::Io(format!("tolerance mismatch: {} vs {}", a.tol, b.tol)));
    }
    let tol = a.tol;
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let miss = |x: Option<&Band>, y: Option<&Band>| Discrepancy {
        length: x.or(y).map(|b| b.length).unwrap_or(f64::NAN),
        multiplicity: [x.map_or(0, |b| b.multiplicity), y.map_or(0, |b| b.multiplicity)],
        witnesses: [x.map_or(vec![], |b| b.witnesses.clone()), y.map_or(vec![], |b| b.witnesses.clone())],
    };
    while i < a.bands.len() || j < b.bands.len() {
        match (a.bands.get(i), b.bands.get(j)) {
            (Some(x), Some(y)) if (x.length - y.length).abs() <= tol => {
                if mode == Mode::Full && x.multiplicity != y.multiplicity {
                    out.push(miss(Some(x), Some(y)));
                }
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.length < y.length => {
                out.push(miss(Some(x), None));
                i += 1;
            }
            (Some(x), None) => {
                out.push(miss(Some(x), None));
                i += 1;
            }
            (_, y) => {
                out.push(miss(None, y));
                j += 1;
            }
        }
    }
    Ok(Comparison { mode, equal: out.is_empty(), bands: [a.bands.len(), b.bands.len()], discrepancies: out })
}

/// Markdown report of a comparison.
pub fn comparison_markdown(a: &LengthSpectrum, b: &LengthSpectrum, c: &Comparison) -> String {
    let mut s = format!(
        "# {} vs {} ({:?})\n\ncutoff {}, tolerance {:e}, {CONVENTION}.\n\nverdict: **{}** ({} vs {} bands, {} vs {} curves)\n",
        a.complex,
        b.complex,
        c.mode,
        a.cutoff,
        a.tol,
        if c.equal { "equal" } else { "different" },
        c.bands[0],
        c.bands[1],
        a.total(),
        b.total()
    );
    if !c.discrepancies.is_empty() {
        s.push_str("\n| length | multiplicity | witness (first) | witness (second) |\n|---|---|---|---|\n");
        for d in &c.discrepancies {
            writeln!(
                s,
                "| {:.9} | {} vs {} | {} | {} |",
                d.length,
                d.multiplicity[0],
                d.multiplicity[1],
                d.witnesses[0].first().map(String::as_str).unwrap_or("-"),
                d.witnesses[1].first().map(String::as_str).unwrap_or("-")
            )
            .unwrap();
        }
    }
    s
}
