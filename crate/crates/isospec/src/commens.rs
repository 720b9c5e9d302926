//! Euler-characteristic arithmetic of finite covers of amalgams and the
//! chamber ratio test.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::complex::BlockComplex;
use crate::error::{Error, Result};

/// Topological type of a compact surface with boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SurfaceType {
    pub genus: u32,
    pub boundaries: u32,
}

impl SurfaceType {
    pub fn euler(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundaries as i64
    }
}

impl std::fmt::Display for SurfaceType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S({},{})", self.genus, self.boundaries)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseChamber {
    pub genus: u32,
    pub boundaries: u32,
    pub count: u32,
}

impl BaseChamber {
    pub fn surface(&self) -> SurfaceType {
        SurfaceType { genus: self.genus, boundaries: self.boundaries }
    }
}

/// `count` cover chambers of type `cover`, each a `degree`-sheeted cover of
/// a chamber of type `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sheet {
    pub base: SurfaceType,
    pub cover: SurfaceType,
    pub degree: u32,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub name: String,
    pub base: String,
    pub degree: u32,
    /// Number of lifts of the (single) branch curve; each cover chamber
    /// meets each lift in exactly one boundary component.
    pub branch_lifts: u32,
    pub base_chambers: Vec<BaseChamber>,
    pub sheets: Vec<Sheet>,
}

impl CoverSpec {
    pub fn parse(text: &str) -> Result<CoverSpec> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }
}

pub const X1_HAT: &str = include_str!("../data/covers/x1_hat.json");
pub const X2_HAT: &str = include_str!("../data/covers/x2_hat.json");

/// Euler characteristics of the chambers, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChamberVector(pub Vec<i64>);

impl ChamberVector {
    pub fn new(mut v: Vec<i64>) -> Result<ChamberVector> {
        if let Some(x) = v.iter().find(|&&x| x >= 0) {
            return Err(Error::Cover(format!("chamber with Euler characteristic {x} is not hyperbolic")));
        }
        v.sort();
        Ok(ChamberVector(v))
    }

    pub fn of_complex(cx: &BlockComplex) -> Result<ChamberVector> {
        ChamberVector::new(cx.chambers()?.iter().map(|c| c.euler).collect())
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Run-length form, e.g. [(-12, 6), (-6, 12)].
    pub fn runs(&self) -> Vec<(i64, usize)> {
        let mut out: Vec<(i64, usize)> = Vec::new();
        for &x in &self.0 {
            match out.last_mut() {
                Some((y, n)) if *y == x => *n += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }
}

/// Check the covering arithmetic of a spec and return its chamber vector.
pub fn validate_cover(spec: &CoverSpec) -> Result<ChamberVector> {
    let mut errors = Vec::new();
    if spec.degree == 0 {
        errors.push("degree must be positive".to_string());
    }
    let base: BTreeMap<SurfaceType, u32> = spec.base_chambers.iter().map(|b| (b.surface(), b.count)).collect();
    let mut covered: BTreeMap<SurfaceType, u64> = BTreeMap::new();
    for (k, s) in spec.sheets.iter().enumerate() {
        if !base.contains_key(&s.base) {
            errors.push(format!("sheet {k}: base chamber {} is not a chamber of {}", s.base, spec.base));
        }
        if s.degree == 0 || s.count == 0 {
            errors.push(format!("sheet {k}: degree and count must be positive"));
            continue;
        }
        if s.cover.euler() != s.degree as i64 * s.base.euler() {
            errors.push(format!(
                "sheet {k}: chi({}) = {} but {} x chi({}) = {}",
                s.cover,
                s.cover.euler(),
                s.degree,
                s.base,
                s.degree as i64 * s.base.euler()
            ));
        }
        if s.cover.boundaries < s.base.boundaries || s.cover.boundaries > s.degree * s.base.boundaries {
            errors.push(format!(
                "sheet {k}: a {}-sheeted cover of {} cannot have {} boundary components",
                s.degree, s.base, s.cover.boundaries
            ));
        }
        if s.cover.boundaries != spec.branch_lifts {
            errors.push(format!(
                "sheet {k}: {} boundary components but {} lifts of the branch curve",
                s.cover.boundaries, spec.branch_lifts
            ));
        }
        *covered.entry(s.base).or_default() += s.degree as u64 * s.count as u64;
    }
    for (t, &n) in &base {
        let want = spec.degree as u64 * n as u64;
        let got = covered.get(t).copied().unwrap_or(0);
        if got != want {
            errors.push(format!("chambers of type {t}: sheets cover {got} times, expected {} x {n} = {want}", spec.degree));
        }
    }
    let chi_base: i64 = spec.base_chambers.iter().map(|b| b.count as i64 * b.surface().euler()).sum();
    let chi_cover: i64 = spec.sheets.iter().map(|s| s.count as i64 * s.cover.euler()).sum();
    if chi_cover != spec.degree as i64 * chi_base {
        errors.push(format!("total chi {chi_cover} differs from {} x {chi_base}", spec.degree));
    }
    if !errors.is_empty() {
        return Err(Error::Cover(errors.join("; ")));
    }
    ChamberVector::new(spec.sheets.iter().flat_map(|s| std::iter::repeat_n(s.cover.euler(), s.count as usize)).collect())
}

/// Whether the spec's base chambers are those of the complex.
pub fn base_matches(spec: &CoverSpec, cx: &BlockComplex) -> Result<bool> {
    let mut computed: BTreeMap<SurfaceType, u32> = BTreeMap::new();
    for c in cx.chambers()? {
        let Some(g) = c.genus else { return Ok(false) };
        *computed.entry(SurfaceType { genus: g as u32, boundaries: c.boundaries as u32 }).or_default() += 1;
    }
    let stated: BTreeMap<SurfaceType, u32> = spec.base_chambers.iter().map(|b| (b.surface(), b.count)).collect();
    Ok(computed == stated)
}

/// A reduced fraction p / q with q > 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Ratio {
        let g = gcd(num, den).max(1) * den.signum();
        Ratio { num: num / g, den: den / g }
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioVerdict {
    pub compatible: bool,
    pub ratios: Vec<Ratio>,
}

/// Compare two ascending chamber vectors entrywise: commensurability is
/// possible only if every ratio chi(S_i) / chi(T_i) is the same.
pub fn ratio_test(v1: &ChamberVector, v2: &ChamberVector) -> Result<RatioVerdict> {
    if v1.0.len() != v2.0.len() {
        return Err(Error::Cardinality(v1.0.len(), v2.0.len()));
    }
    let ratios: Vec<Ratio> = v1.0.iter().zip(&v2.0).map(|(&a, &b)| Ratio::new(a, b)).collect();
    let compatible = ratios.windows(2).all(|w| w[0] == w[1]);
    Ok(RatioVerdict { compatible, ratios })
}

/// Total area: every octagon block has area 2 pi.
pub fn volume(cx: &BlockComplex) -> f64 {
    2.0 * std::f64::consts::PI * cx.block_count()
}

/// Markdown verdict with the ratio table.
pub fn report(a: &CoverSpec, va: &ChamberVector, b: &CoverSpec, vb: &ChamberVector, verdict: &RatioVerdict) -> String {
    let fmt_runs = |v: &ChamberVector| v.runs().iter().map(|(x, n)| format!("{x} x{n}")).collect::<Vec<_>>().join(", ");
    let mut s = format!(
        "# Chamber ratio test: {} vs {}\n\n- {}: {{{}}}, total {}\n- {}: {{{}}}, total {}\n\nverdict: **{}**\n\n| i | chi(S_i) | chi(T_i) | ratio |\n|---|---|---|---|\n",
        a.name,
        b.name,
        a.name,
        fmt_runs(va),
        va.sum(),
        b.name,
        fmt_runs(vb),
        vb.sum(),
        if verdict.compatible { "compatible" } else { "not commensurable" }
    );
    for (i, r) in verdict.ratios.iter().enumerate() {
        writeln!(s, "| {} | {} | {} | {} |", i + 1, va.0[i], vb.0[i], r).unwrap();
    }
    s
}
