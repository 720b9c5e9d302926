//! Closed geodesics as cyclic crossing words.
//!
//! A word lists the cells a curve passes through together with the sides it
//! enters and leaves by. Words are developed into the hyperbolic plane; the
//! axis of the holonomy is the geodesic, provided it crosses every developed
//! side in order. Curves lying in the 1-skeleton are found separately by
//! walking edges straight through vertices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{BlockComplex, Cell, EdgeCurve, Half, Side};
use crate::error::{Error, Result};
use crate::geometry::{axis, det3, from_hyperboloid, geodesic_length, minkowski, solve_block, to_hyperboloid, BlockGeometry, Isometry, V3};

/// Crossing coordinates this close to a side endpoint count as passing
/// through the vertex.
pub const GRAZE_TOL: f64 = 1e-7;
const PRUNE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Traversal {
    pub cell: u32,
    pub entry: u8,
    pub exit: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BranchProfile {
    Avoids,
    Contained,
    Crosses,
}

impl BranchProfile {
    pub fn name(self) -> &'static str {
        match self {
            BranchProfile::Avoids => "avoids",
            BranchProfile::Contained => "contained",
            BranchProfile::Crosses => "crosses",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClosedGeodesic {
    /// Canonical crossing word; empty for curves in the skeleton.
    pub word: Vec<Traversal>,
    pub edge_curve: Option<EdgeCurve>,
    pub length: f64,
    pub primitive: bool,
    pub power: u32,
    pub profile: BranchProfile,
    pub holonomy: Option<Isometry>,
    pub grazing: bool,
    pub edge_geodesic: bool,
    /// Pieces of positive length inside each cell; identifies the curve
    /// independently of how passages through vertices are encoded.
    pub chords: Vec<Chord>,
}

/// Segment of a geodesic inside one cell, endpoints in standard position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chord {
    pub cell: u32,
    pub ends: [f64; 4],
}

fn same_chords(x: &[Chord], y: &[Chord], tol: f64) -> bool {
    x.len() == y.len()
        && x.iter().zip(y).all(|(a, b)| a.cell == b.cell && a.ends.iter().zip(&b.ends).all(|(u, v)| (u - v).abs() <= tol * (1.0 + u.abs())))
}

/// Whether two straightened curves are the same curve, possibly encoded by
/// different words through vertices.
pub fn same_curve(a: &ClosedGeodesic, b: &ClosedGeodesic, tol: f64) -> bool {
    (a.length - b.length).abs() <= tol && same_chords(&a.chords, &b.chords, tol)
}

/// Smallest rotation of a cyclic sequence.
pub fn least_rotation<T: Ord + Clone>(w: &[T]) -> Vec<T> {
    let n = w.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0;
    for r in 1..n {
        for k in 0..n {
            let (x, y) = (&w[(r + k) % n], &w[(best + k) % n]);
            if x != y {
                if x < y {
                    best = r;
                }
                break;
            }
        }
    }
    (0..n).map(|k| w[(best + k) % n].clone()).collect()
}

/// Smallest period p of a cyclic sequence (n / p is its power).
pub fn period<T: PartialEq>(w: &[T]) -> usize {
    let n = w.len();
    (1..=n).find(|&p| n.is_multiple_of(p) && (0..n).all(|k| w[k] == w[(k + p) % n])).unwrap_or(n)
}

pub fn reverse_word(w: &[Traversal]) -> Vec<Traversal> {
    w.iter().rev().map(|t| Traversal { cell: t.cell, entry: t.exit, exit: t.entry }).collect()
}

/// Canonical form of the unoriented class of a word.
pub fn unoriented_key(w: &[Traversal]) -> Vec<Traversal> {
    let a = least_rotation(w);
    let b = least_rotation(&reverse_word(w));
    a.min(b)
}

#[derive(Clone, Copy, Debug)]
struct Crossing {
    target: usize,
    iso: Isometry,
    reflect: bool,
}

/// A complex together with its block geometry and precomputed crossings.
#[derive(Clone, Debug)]
pub struct Realization {
    pub complex: BlockComplex,
    pub geometry: BlockGeometry,
    cross: Vec<Vec<Crossing>>,
    side_std: Vec<(C64, C64, f64)>,
    /// Distance between two sides of a cell, indexed by half, entry, exit.
    side_gap: [Vec<Vec<f64>>; 3],
}

fn half_index(h: Half) -> usize {
    match h {
        Half::Whole => 0,
        Half::Left => 1,
        Half::Right => 2,
    }
}

/// Where a traversal cuts a corner: `Some(true)` when entry and exit meet at
/// the end of the exit side, `Some(false)` at its start.
fn exit_corner(t: &Traversal, n: u8) -> Option<bool> {
    if (t.entry + 1) % n == t.exit {
        Some(false)
    } else if (t.exit + 1) % n == t.entry {
        Some(true)
    } else {
        None
    }
}

/// As `exit_corner`, seen from the entry side.
fn entry_corner(t: &Traversal, n: u8) -> Option<bool> {
    exit_corner(t, n).map(|b| !b)
}

fn cell_centre(half: Half) -> C64 {
    match half {
        Half::Whole => C64::new(0.0, 1.0),
        Half::Left => C64::new(-0.05, 1.0),
        Half::Right => C64::new(0.05, 1.0),
    }
}

fn hnorm(v: V3) -> V3 {
    let k = minkowski(&v, &v);
    if k > 0.0 {
        let s = k.sqrt();
        [v[0] / s, v[1] / s, v[2] / s]
    } else {
        v
    }
}

fn hdist(p: &V3, q: &V3) -> f64 {
    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    2.0 * ((-minkowski(&d, &d)).max(0.0).sqrt() / 2.0).asinh()
}

fn point_segment_distance(x: &V3, p: &V3, q: &V3) -> f64 {
    let n = [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ];
    // n as a Minkowski normal: ⟨Jn, y⟩ = det(p, q, y)
    let jn = [n[0], -n[1], -n[2]];
    let nn = -minkowski(&jn, &jn);
    let best_end = hdist(x, p).min(hdist(x, q));
    if nn <= 0.0 {
        return best_end;
    }
    let s = det3(p, q, x) / nn;
    let f = hnorm([x[0] + s * jn[0], x[1] + s * jn[1], x[2] + s * jn[2]]);
    if on_segment(&f, p, q) {
        hdist(x, &f)
    } else {
        best_end
    }
}

/// Unit spacelike normal of the line through p and q.
fn line_normal(p: &V3, q: &V3) -> Option<V3> {
    let n = [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ];
    let jn = [n[0], -n[1], -n[2]];
    let k = -minkowski(&jn, &jn);
    (k > 0.0).then(|| {
        let s = k.sqrt();
        [jn[0] / s, jn[1] / s, jn[2] / s]
    })
}

fn on_segment(f: &V3, p: &V3, q: &V3) -> bool {
    let pq = minkowski(p, q);
    minkowski(f, p) <= pq && minkowski(f, q) <= pq
}

/// Distance between two geodesic segments of the hyperboloid.
pub fn segment_distance(p1: &V3, q1: &V3, p2: &V3, q2: &V3) -> f64 {
    let s1 = det3(p2, q2, p1) * det3(p2, q2, q1);
    let s2 = det3(p1, q1, p2) * det3(p1, q1, q2);
    if s1 <= 0.0 && s2 <= 0.0 {
        return 0.0;
    }
    let mut best = point_segment_distance(p1, p2, q2)
        .min(point_segment_distance(q1, p2, q2))
        .min(point_segment_distance(p2, p1, q1))
        .min(point_segment_distance(q2, p1, q1));
    // ultraparallel lines: the common perpendicular may land inside both
    if let (Some(n1), Some(n2)) = (line_normal(p1, q1), line_normal(p2, q2)) {
        let k = minkowski(&n1, &n2);
        if k.abs() > 1.0 {
            let foot = |a: &V3, b: &V3| {
                let f = [b[0] + k * a[0], b[1] + k * a[1], b[2] + k * a[2]];
                let f = hnorm(f);
                if f[0] < 0.0 {
                    [-f[0], -f[1], -f[2]]
                } else {
                    f
                }
            };
            let (f1, f2) = (foot(&n1, &n2), foot(&n2, &n1));
            if on_segment(&f1, p1, q1) && on_segment(&f2, p2, q2) {
                best = best.min(hdist(&f1, &f2));
            }
        }
    }
    best
}

/// Convex cone of R³ kept as a spherical polygon of unit rays.
#[derive(Clone, Debug)]
struct Cone {
    rays: Vec<V3>,
}

fn unit(v: V3) -> V3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Cone {
    fn hemisphere(w: V3) -> Cone {
        let w = unit(w);
        let t = if w[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = unit([
            w[1] * t[2] - w[2] * t[1],
            w[2] * t[0] - w[0] * t[2],
            w[0] * t[1] - w[1] * t[0],
        ]);
        let e2 = [
            w[1] * e1[2] - w[2] * e1[1],
            w[2] * e1[0] - w[0] * e1[2],
            w[0] * e1[1] - w[1] * e1[0],
        ];
        Cone { rays: vec![e1, e2, [-e1[0], -e1[1], -e1[2]], [-e2[0], -e2[1], -e2[2]]] }
    }

    /// Intersect with {x : w·x ≥ 0}, leniently.
    fn clip(&self, w: V3) -> Option<Cone> {
        let w = unit(w);
        let n = self.rays.len();
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..n {
            let u = self.rays[k];
            let v = self.rays[(k + 1) % n];
            let (du, dv) = (dot(&w, &u), dot(&w, &v));
            let (iu, iv) = (du >= -PRUNE_EPS, dv >= -PRUNE_EPS);
            if iu {
                out.push(u);
            }
            if iu != iv && n > 1 {
                let s = if du > dv { 1.0 } else { -1.0 };
                let x = [
                    s * (du * v[0] - dv * u[0]),
                    s * (du * v[1] - dv * u[1]),
                    s * (du * v[2] - dv * u[2]),
                ];
                let l = dot(&x, &x).sqrt();
                if l > 0.0 {
                    out.push([x[0] / l, x[1] / l, x[2] / l]);
                }
            }
        }
        if out.is_empty() {
            None
        } else {
            Some(Cone { rays: out })
        }
    }
}

/// Result of checking an axis against a developed word.
#[derive(Clone, Debug)]
struct AxisCheck {
    grazing: bool,
    edge: bool,
    chords: Vec<Chord>,
}

impl Realization {
    pub fn new(complex: BlockComplex) -> Result<Realization> {
        let geometry = solve_block(complex.b, complex.c)?;
        let n = complex.side_count();
        let mut cross = Vec::with_capacity(n);
        let mut side_std = Vec::with_capacity(n);
        for s in 0..n {
            let ha = complex.cells[complex.cell_of(s)].half;
            let sg = geometry.sides(ha)[complex.pos_of(s)];
            side_std.push((sg.start, sg.end, sg.length));
            let mut v = Vec::new();
            for (t, reflect) in complex.crossings(s) {
                let hb = complex.cells[complex.cell_of(t)].half;
                let iso = geometry.crossing(ha, complex.pos_of(s), hb, complex.pos_of(t), reflect)?;
                v.push(Crossing { target: t, iso, reflect });
            }
            cross.push(v);
        }
        let side_gap = [Half::Whole, Half::Left, Half::Right].map(|h| {
            let sides = geometry.sides(h);
            sides
                .iter()
                .map(|a| {
                    let (p1, q1) = (to_hyperboloid(a.start), to_hyperboloid(a.end));
                    sides
                        .iter()
                        .map(|b| segment_distance(&p1, &q1, &to_hyperboloid(b.start), &to_hyperboloid(b.end)))
                        .collect()
                })
                .collect()
        });
        Ok(Realization { complex, geometry, cross, side_std, side_gap })
    }

    pub fn cx(&self) -> &BlockComplex {
        &self.complex
    }

    fn sid(&self, cell: u32, pos: u8) -> usize {
        self.complex.sid(cell as usize, pos as usize)
    }

    fn crossing_between(&self, from: usize, to: usize) -> Option<&Crossing> {
        self.cross[from].iter().find(|c| c.target == to)
    }

    /// Whether the crossing into traversal k+1 is a reflection.
    pub fn crossing_reflects(&self, a: &Traversal, b: &Traversal) -> Option<bool> {
        self.crossing_between(self.sid(a.cell, a.exit), self.sid(b.cell, b.entry)).map(|c| c.reflect)
    }

    /// Placements g_0 = id, …, g_n = holonomy of a closed word.
    pub fn develop(&self, word: &[Traversal]) -> Result<Vec<Isometry>> {
        let n = word.len();
        let mut g = vec![Isometry::IDENTITY];
        for k in 0..n {
            let t = word[k];
            let u = word[(k + 1) % n];
            if t.entry == t.exit {
                return Err(Error::ClosureFailure(format!("traversal {k} backtracks")));
            }
            let c = self
                .crossing_between(self.sid(t.cell, t.exit), self.sid(u.cell, u.entry))
                .ok_or_else(|| Error::ClosureFailure(format!("no crossing from traversal {k} to the next")))?;
            let next = g[k].mul(&c.iso);
            g.push(next);
        }
        Ok(g)
    }

    pub fn holonomy(&self, word: &[Traversal]) -> Result<Isometry> {
        Ok(*self.develop(word)?.last().unwrap())
    }

    /// Developed exit side of traversal k, oriented so that the cell lies on
    /// its right.
    fn developed_exit(&self, g: &Isometry, t: &Traversal) -> (V3, V3) {
        let (s, e, _) = self.side_std[self.sid(t.cell, t.exit)];
        let (p, q) = (to_hyperboloid(g.apply(s)), to_hyperboloid(g.apply(e)));
        if g.preserves_orientation() {
            (p, q)
        } else {
            (q, p)
        }
    }

    /// Crossing isometries X_k carrying cell k+1 into the frame of cell k.
    fn crossing_isos(&self, word: &[Traversal]) -> Result<Vec<(Isometry, bool)>> {
        let n = word.len();
        (0..n)
            .map(|k| {
                let (t, u) = (word[k], word[(k + 1) % n]);
                if t.entry == t.exit {
                    return Err(Error::ClosureFailure(format!("traversal {k} backtracks")));
                }
                self.crossing_between(self.sid(t.cell, t.exit), self.sid(u.cell, u.entry))
                    .map(|c| (c.iso, c.reflect))
                    .ok_or_else(|| Error::ClosureFailure(format!("no crossing from traversal {k} to the next")))
            })
            .collect()
    }

    /// Check the geodesic against every cell of the word. Each cell is
    /// examined in its own standard position using the holonomy of the word
    /// rotated to start there, which keeps the arithmetic near the origin.
    fn check_axis(&self, word: &[Traversal], xs: &[(Isometry, bool)]) -> Result<AxisCheck> {
        let n = word.len();
        let cx = &self.complex;
        let mut grazing = false;
        let mut edge = false;
        let mut chords = Vec::new();
        for k in 0..n {
            let t = &word[k];
            let cell = cx.cells[t.cell as usize];
            let mut h = Isometry::IDENTITY;
            for j in 0..n {
                h = h.mul(&xs[(k + j) % n].0);
            }
            let ax = axis(&h)?;
            let tol = 1e-9;
            for pos in 0..cell.half.sides().len() {
                let (s, e, _) = self.side_std[self.sid(t.cell, pos as u8)];
                let (p, q) = (to_hyperboloid(s), to_hyperboloid(e));
                if (ax.side(&p) / p[0]).abs() < tol && (ax.side(&q) / q[0]).abs() < tol {
                    edge = true;
                }
            }
            let meet = |pos: u8, index: usize| -> Result<(f64, f64, f64, usize)> {
                let sid = self.sid(t.cell, pos);
                let (s0, e0, l) = self.side_std[sid];
                let (p, q) = (to_hyperboloid(s0), to_hyperboloid(e0));
                let tp = ax.meet(&p, &q).ok_or(Error::AxisMiss { index })?;
                let x = ax.point_at(tp);
                let (u, rest) = (hdist(&p, &x), hdist(&x, &q));
                if (u + rest - l).abs() > GRAZE_TOL * (1.0 + l) {
                    return Err(Error::AxisMiss { index });
                }
                Ok((tp, u, rest, sid))
            };
            let (t_in, _, _, _) = meet(t.entry, (k + n - 1) % n)?;
            let (t_out, u, rest, sid) = meet(t.exit, k)?;
            if t_out < t_in - GRAZE_TOL {
                return Err(Error::AxisMiss { index: k });
            }
            let (s0, e0, _) = self.side_std[sid];
            let (p, q) = (to_hyperboloid(s0), to_hyperboloid(e0));
            let centre = to_hyperboloid(cell_centre(cell.half));
            if det3(&p, &q, &ax.tangent_at(t_out)) * det3(&p, &q, &centre) >= 0.0 {
                return Err(Error::AxisMiss { index: k });
            }
            if u < GRAZE_TOL || rest < GRAZE_TOL {
                grazing = true;
            }
            if t_out - t_in >= GRAZE_TOL {
                let a = from_hyperboloid(&ax.point_at(t_in));
                let b = from_hyperboloid(&ax.point_at(t_out));
                let (a, b) = if (a.re, a.im) <= (b.re, b.im) { (a, b) } else { (b, a) };
                chords.push(Chord { cell: t.cell, ends: [a.re, a.im, b.re, b.im] });
            }
        }
        chords.sort_by(|x, y| x.cell.cmp(&y.cell).then(x.ends.partial_cmp(&y.ends).unwrap_or(std::cmp::Ordering::Equal)));
        Ok(AxisCheck { grazing, edge, chords })
    }

    /// Straighten a closed word into a geodesic, or explain why it is not one.
    pub fn straighten(&self, word: &[Traversal]) -> Result<ClosedGeodesic> {
        let xs = self.crossing_isos(word)?;
        let h = xs.iter().fold(Isometry::IDENTITY, |h, x| h.mul(&x.0));
        let length = geodesic_length(&h)?;
        let check = self.check_axis(word, &xs).map_err(|e| match e {
            // a bend where the curve passes between sheets
            Error::AxisMiss { index } if self.exits_on_branch(&word[index]) => Error::BranchAngleViolation { index },
            e => e,
        })?;
        let p = period(word);
        let power = (word.len() / p) as u32;
        Ok(ClosedGeodesic {
            word: least_rotation(word),
            edge_curve: None,
            length,
            primitive: power == 1,
            power,
            profile: self.word_profile(word),
            holonomy: Some(h),
            grazing: check.grazing,
            edge_geodesic: check.edge,
            chords: check.chords,
        })
    }

    pub fn exits_on_branch(&self, t: &Traversal) -> bool {
        let (e, _) = self.complex.edge_of(self.sid(t.cell, t.exit));
        self.complex.edges[e].branch
    }

    fn word_profile(&self, word: &[Traversal]) -> BranchProfile {
        let crosses = word.iter().any(|t| {
            let (e, _) = self.complex.edge_of(self.sid(t.cell, t.exit));
            self.complex.edges[e].branch
        });
        if crosses {
            BranchProfile::Crosses
        } else {
            BranchProfile::Avoids
        }
    }

    /// Two consecutive traversals cutting corners at the same point cannot
    /// belong to a geodesic: the two cells span a straight angle there.
    fn double_corner(&self, a: &Traversal, b: &Traversal, same_direction: bool) -> bool {
        let na = self.complex.cells[a.cell as usize].half.sides().len() as u8;
        let nb = self.complex.cells[b.cell as usize].half.sides().len() as u8;
        match (exit_corner(a, na), entry_corner(b, nb)) {
            (Some(x), Some(y)) => (x == y) == same_direction,
            _ => false,
        }
    }

    pub fn gap(&self, t: &Traversal) -> f64 {
        let h = self.complex.cells[t.cell as usize].half;
        self.side_gap[half_index(h)][t.entry as usize][t.exit as usize]
    }

    fn start_traversals(&self) -> Vec<Traversal> {
        let mut out = Vec::new();
        for (ci, cell) in self.complex.cells.iter().enumerate() {
            let n = cell.half.sides().len() as u8;
            for entry in 0..n {
                for exit in 0..n {
                    if entry != exit {
                        out.push(Traversal { cell: ci as u32, entry, exit });
                    }
                }
            }
        }
        out
    }

    /// Canonical closed words of at most `max_crossings` traversals. With
    /// `prune`, prefixes whose developed sides admit no common transversal,
    /// or whose first and last sides are further apart than `max_length`,
    /// are abandoned.
    pub fn enumerate_words(&self, max_crossings: usize, max_length: Option<f64>, prune: bool) -> Vec<Vec<Traversal>> {
        let starts = self.start_traversals();
        starts
            .par_iter()
            .map(|t0| {
                let mut out = Vec::new();
                let mut path = vec![*t0];
                let walked = self.gap(t0);
                self.dfs(&mut path, Isometry::IDENTITY, None, None, walked, max_crossings, max_length, prune, &mut out);
                out
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        path: &mut Vec<Traversal>,
        g: Isometry,
        cone: Option<&Cone>,
        first: Option<(V3, V3)>,
        walked: f64,
        max_crossings: usize,
        max_length: Option<f64>,
        prune: bool,
        out: &mut Vec<Vec<Traversal>>,
    ) {
        let t0 = path[0];
        let tk = *path.last().unwrap();
        let mut cone_here = None;
        let mut first_here = first;
        if prune {
            if let Some(l) = max_length {
                if walked > l + 1e-9 {
                    return;
                }
            }
            let (p, q) = self.developed_exit(&g, &tk);
            let w1 = [p[0], -p[1], -p[2]];
            let w2 = [-q[0], q[1], q[2]];
            let c = match cone {
                None => Cone::hemisphere(w1).clip(w2),
                Some(c) => c.clip(w1).and_then(|c| c.clip(w2)),
            };
            match c {
                None => return,
                Some(c) => cone_here = Some(c),
            }
            match first {
                None => first_here = Some((p, q)),
                Some((p0, q0)) => {
                    if let Some(l) = max_length {
                        if segment_distance(&p0, &q0, &p, &q) > l + 1e-9 {
                            return;
                        }
                    }
                }
            }
        }
        let sid = self.sid(tk.cell, tk.exit);
        for c in &self.cross[sid] {
            let cell = self.complex.cell_of(c.target) as u32;
            let entry = self.complex.pos_of(c.target) as u8;
            let g2 = g.mul(&c.iso);
            if cell == t0.cell
                && entry == t0.entry
                && !(prune && self.double_corner(&tk, &t0, c.reflect))
                && least_rotation(path) == *path
                && period(path) == path.len()
            {
                out.push(path.clone());
            }
            if path.len() >= max_crossings {
                continue;
            }
            let n = self.complex.cells[cell as usize].half.sides().len() as u8;
            for exit in 0..n {
                if exit == entry {
                    continue;
                }
                let t = Traversal { cell, entry, exit };
                if t < t0 || (prune && self.double_corner(&tk, &t, c.reflect)) {
                    continue;
                }
                path.push(t);
                let w = walked + self.gap(&t);
                self.dfs(path, g2, cone_here.as_ref(), first_here, w, max_crossings, max_length, prune, out);
                path.pop();
            }
        }
    }

    /// Length of an edge.
    pub fn edge_length(&self, e: usize) -> f64 {
        let edge = &self.complex.edges[e];
        self.geometry.length(edge.class, edge.half_b)
    }

    /// Closed geodesics lying in the skeleton, primitive, up to `max_length`.
    pub fn edge_geodesics(&self, max_length: f64) -> Vec<ClosedGeodesic> {
        let cx = &self.complex;
        let mut found: BTreeSet<EdgeCurve> = BTreeSet::new();
        let canon = |c: &EdgeCurve| -> EdgeCurve {
            let rev: EdgeCurve = c.iter().rev().map(|&(e, f)| (e, !f)).collect();
            least_rotation(c).min(least_rotation(&rev))
        };
        for e0 in 0..cx.edges.len() {
            for f0 in [true, false] {
                let mut path = vec![(e0, f0)];
                self.edge_dfs(&mut path, self.edge_length(e0), max_length, &mut found, &canon);
            }
        }
        found
            .into_iter()
            .map(|curve| {
                let length: f64 = curve.iter().map(|&(e, _)| self.edge_length(e)).sum();
                let contained = curve.iter().all(|&(e, _)| cx.edges[e].branch);
                let touches = curve.iter().any(|&(e, _)| {
                    let ed = &cx.edges[e];
                    ed.branch || cx.vertex_on_branch(ed.start) || cx.vertex_on_branch(ed.end)
                });
                let profile = if contained {
                    BranchProfile::Contained
                } else if touches {
                    BranchProfile::Crosses
                } else {
                    BranchProfile::Avoids
                };
                ClosedGeodesic {
                    word: Vec::new(),
                    edge_curve: Some(curve),
                    length,
                    primitive: true,
                    power: 1,
                    profile,
                    holonomy: None,
                    grazing: false,
                    edge_geodesic: true,
                    chords: Vec::new(),
                }
            })
            .collect()
    }

    fn edge_dfs(
        &self,
        path: &mut EdgeCurve,
        len: f64,
        max_length: f64,
        found: &mut BTreeSet<EdgeCurve>,
        canon: &dyn Fn(&EdgeCurve) -> EdgeCurve,
    ) {
        let (e, f) = *path.last().unwrap();
        for next in self.complex.straight_continuations(e, f) {
            if next == path[0] && period(path) == path.len() {
                found.insert(canon(path));
            }
            let l = len + self.edge_length(next.0);
            if l > max_length + 1e-9 || next < path[0] {
                continue;
            }
            path.push(next);
            self.edge_dfs(path, l, max_length, found, canon);
            path.pop();
        }
    }

    /// All primitive unoriented closed geodesics with at most `max_crossings`
    /// transverse crossings and length at most `max_length`, deduplicated.
    pub fn geodesics(&self, max_length: f64, max_crossings: usize) -> Vec<ClosedGeodesic> {
        let words = self.enumerate_words(max_crossings, Some(max_length), true);
        self.collect(words, max_length)
    }

    /// Straighten candidate words and keep one representative per geodesic.
    pub fn collect(&self, words: Vec<Vec<Traversal>>, max_length: f64) -> Vec<ClosedGeodesic> {
        let mut out = self.collect_words(words, max_length);
        out.extend(self.edge_geodesics(max_length));
        out.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.word.cmp(&b.word)).then_with(|| a.edge_curve.cmp(&b.edge_curve)));
        out
    }

    /// Primitive geodesics crossing the branch locus transversally, without
    /// the closed curves of the 1-skeleton.
    pub fn transversal_geodesics(&self, max_length: f64, max_crossings: usize) -> Vec<ClosedGeodesic> {
        let words = self.enumerate_words(max_crossings, Some(max_length), true);
        let mut out = self.collect_words(words, max_length);
        out.retain(|g| g.profile == BranchProfile::Crosses);
        out
    }

    /// Straightened crossing words, one per geodesic, sorted by length.
    fn collect_words(&self, words: Vec<Vec<Traversal>>, max_length: f64) -> Vec<ClosedGeodesic> {
        let straightened: Vec<ClosedGeodesic> = words
            .par_iter()
            .filter_map(|w| self.straighten(w).ok())
            .filter(|g| g.length <= max_length + 1e-9 && g.primitive && !g.edge_geodesic)
            .collect();
        // keep one orientation
        let mut by_key: BTreeMap<Vec<Traversal>, ClosedGeodesic> = BTreeMap::new();
        for g in straightened {
            by_key.entry(unoriented_key(&g.word)).or_insert(g);
        }
        // merge encodings of the same curve through vertices
        let mut out: Vec<ClosedGeodesic> = Vec::new();
        let mut kept_grazing: Vec<usize> = Vec::new();
        for (key, mut g) in by_key {
            if g.grazing {
                let dup = kept_grazing.iter().any(|&i| {
                    let h = &out[i];
                    (h.length - g.length).abs() <= 1e-6 && same_chords(&h.chords, &g.chords, 1e-6)
                });
                if dup {
                    continue;
                }
                kept_grazing.push(out.len());
            }
            g.word = key;
            out.push(g);
        }
        out.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.word.cmp(&b.word)).then_with(|| a.edge_curve.cmp(&b.edge_curve)));
        out
    }

    /// Human-readable form of a word.
    pub fn word_string(&self, word: &[Traversal]) -> String {
        word.iter()
            .map(|t| {
                let cell = self.complex.cells[t.cell as usize];
                let sides = cell.half.sides();
                format!("{}[{}>{}]", cell, short(sides[t.entry as usize]), short(sides[t.exit as usize]))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parse the form produced by [`Realization::word_string`], e.g.
    /// `1:2[Atl>Atr] 1:6R[Abr>m]`.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Traversal>> {
        let bad = |t: &str, why: &str| Error::Schema(format!("traversal `{t}`: {why}"));
        let mut out = Vec::new();
        for tok in text.split_whitespace() {
            let (cell, rest) = tok.split_once('[').ok_or_else(|| bad(tok, "expected cell[entry>exit]"))?;
            let sides = rest.strip_suffix(']').ok_or_else(|| bad(tok, "missing ]"))?;
            let (entry, exit) = sides.split_once('>').ok_or_else(|| bad(tok, "expected entry>exit"))?;
            let (copy, block) = cell.split_once(':').ok_or_else(|| bad(tok, "expected copy:block"))?;
            let (block, half) = match block.strip_suffix('L') {
                Some(b) => (b, Half::Left),
                None => match block.strip_suffix('R') {
                    Some(b) => (b, Half::Right),
                    None => (block, Half::Whole),
                },
            };
            let copy: u32 = copy.parse().map_err(|_| bad(tok, "copy is not a number"))?;
            let block: u8 = block.parse().map_err(|_| bad(tok, "block is not a number"))?;
            let target = Cell { copy, block, half };
            let ci = self.complex.cell_id(&target).ok_or_else(|| bad(tok, "no such cell"))?;
            let pos = |name: &str| {
                half.sides().iter().position(|&x| short(x) == name).ok_or_else(|| bad(tok, &format!("no side {name} in this cell")))
            };
            let t = Traversal { cell: ci as u32, entry: pos(entry)? as u8, exit: pos(exit)? as u8 };
            if t.entry == t.exit {
                return Err(bad(tok, "entry and exit coincide"));
            }
            out.push(t);
        }
        if out.is_empty() {
            return Err(Error::Schema("empty word".into()));
        }
        Ok(out)
    }

    pub fn witness(&self, g: &ClosedGeodesic) -> String {
        match &g.edge_curve {
            Some(curve) => curve
                .iter()
                .map(|&(e, f)| {
                    let (cell, side) = self.complex.edge_cells(e)[0];
                    format!("{}{}{}", cell, short(side), if f { "+" } else { "-" })
                })
                .collect::<Vec<_>>()
                .join(" "),
            None => self.word_string(&g.word),
        }
    }
}

pub fn short(s: Side) -> &'static str {
    match s {
        Side::Cl => "Cl",
        Side::Atl => "Atl",
        Side::Bt => "Bt",
        Side::Atr => "Atr",
        Side::Cr => "Cr",
        Side::Abr => "Abr",
        Side::Bb => "Bb",
        Side::Abl => "Abl",
        Side::M => "m",
    }
}

impl fmt::Display for Traversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}>{}]", self.cell, self.entry, self.exit)
    }
}
