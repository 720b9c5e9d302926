//! Transplantation of closed geodesics between partner complexes, translated
//! copies of branch segments, and identical-copy counting.
//!
//! Every operation here is built on [`shadow`]: following the side labels of
//! a crossing word from a chosen cell of some complex. Blocks are isometric,
//! so a shadow that exists has the same holonomy, hence the same length.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::complex::{block_add, BlockComplex, Cell, LengthClass};
use crate::enumerate::{period, unoriented_key, Realization, Traversal};
use crate::error::{Error, Result};

/// Offset between block indices, always reduced mod 8.
pub type Delta = u8;

fn delta_of(from: u8, to: u8) -> Delta {
    ((to as i64 - from as i64).rem_euclid(8)) as u8
}

/// New offset after crossing a side of a given length class.
#[derive(Clone, Debug, Serialize)]
pub struct TransitionTable {
    /// (class, delta) -> new delta; `None` when no block realizes the state.
    pub entries: BTreeMap<(LengthClass, Delta), Option<Delta>>,
}

impl TransitionTable {
    pub fn next(&self, class: LengthClass, delta: Delta) -> Option<Delta> {
        self.entries.get(&(class, delta)).copied().flatten()
    }

    /// Disagreements with the stated rules: a flips even offsets by 4 and
    /// fixes odd ones, c fixes every offset, b fixes 0 and 4 and flips 2 and 6.
    pub fn rule_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for d in 0..8u8 {
            let a = if d % 2 == 0 { (d + 4) % 8 } else { d };
            let mut expect = vec![(LengthClass::A, a), (LengthClass::C, d)];
            if d % 2 == 0 {
                expect.push((LengthClass::B, if d % 4 == 0 { d } else { (d + 4) % 8 }));
            }
            for (class, want) in expect {
                match self.next(class, d) {
                    Some(got) if got == want => {}
                    got => out.push(format!("{class:?} crossing at delta {d}: expected {want}, derived {got:?}")),
                }
            }
        }
        out
    }
}

/// Derive the offset transitions between two complexes built from the same
/// blocks, by comparing where each side crossing leads in both.
pub fn derive_transition_table(a: &BlockComplex, b: &BlockComplex) -> Result<TransitionTable> {
    let mut seen: BTreeMap<(LengthClass, Delta), BTreeSet<Delta>> = BTreeMap::new();
    for class in [LengthClass::A, LengthClass::B, LengthClass::C] {
        for d in 0..8 {
            seen.insert((class, d), BTreeSet::new());
        }
    }
    for (i, cell) in a.cells.iter().enumerate() {
        for d in 0..8u8 {
            let twin = Cell { block: block_add(cell.block, d as i64), ..*cell };
            let Some(j) = b.cell_id(&twin) else { continue };
            for (pos, side) in cell.half.sides().iter().enumerate() {
                let class = side.class();
                if class == LengthClass::M {
                    continue;
                }
                let (sa, sb) = (a.sid(i, pos), b.sid(j, pos));
                if a.edges[a.edge_of(sa).0].branch || b.edges[b.edge_of(sb).0].branch {
                    continue;
                }
                let (ta, tb) = (a.crossings(sa), b.crossings(sb));
                let (Some(&(ta, _)), Some(&(tb, _))) = (ta.first(), tb.first()) else { continue };
                if a.side_label(ta) != b.side_label(tb) {
                    continue;
                }
                let next = delta_of(a.cells[a.cell_of(ta)].block, b.cells[b.cell_of(tb)].block);
                seen.get_mut(&(class, d)).unwrap().insert(next);
            }
        }
    }
    let mut entries = BTreeMap::new();
    for ((class, d), set) in seen {
        if set.len() > 1 {
            return Err(Error::IllDefined { class, delta: d });
        }
        entries.insert((class, d), set.into_iter().next());
    }
    Ok(TransitionTable { entries })
}

/// Number of crossings of sides of length a and of length b in a closed word.
pub fn crossing_counts(r: &Realization, word: &[Traversal]) -> (usize, usize) {
    let cx = r.cx();
    let class = |t: &Traversal| cx.cells[t.cell as usize].half.sides()[t.exit as usize].class();
    let na = word.iter().filter(|t| class(t) == LengthClass::A).count();
    let nb = word.iter().filter(|t| class(t) == LengthClass::B).count();
    (na, nb)
}

/// Starting offset for a word with the given numbers of a- and b-crossings.
pub fn initiation_offset(n_a: usize, n_b: usize) -> Delta {
    match (n_a % 2, n_b % 2) {
        (0, _) => 0,
        (_, 0) => 1,
        _ => 2,
    }
}

/// Starting block in the partner complex.
pub fn initiate(start_block: u8, n_a: usize, n_b: usize) -> u8 {
    block_add(start_block, initiation_offset(n_a, n_b) as i64)
}

/// Whether the step from `a` to `b` passes between sheets: it crosses the
/// branch locus into a side other than the one glued to the exit side in
/// the underlying surface.
pub fn sheet_change(r: &Realization, a: &Traversal, b: &Traversal) -> bool {
    let cx = r.cx();
    let x = cx.sid(a.cell as usize, a.exit as usize);
    r.exits_on_branch(a) && cx.surface_partner(x) != Some(cx.sid(b.cell as usize, b.entry as usize))
}

/// Follow the side labels of `word` in `dst`, starting from cell `start`.
///
/// Every step must leave through the side with the same label, enter the
/// next cell through the side with the same label, and glue the same way.
/// A step inside the underlying surface maps to a step inside the surface;
/// a step between sheets maps to the unique step between sheets that fits.
/// With `closed`, the last crossing must return to the first traversal.
pub fn shadow(src: &Realization, word: &[Traversal], dst: &Realization, start: usize, closed: bool) -> Option<Vec<Traversal>> {
    let (sc, dc) = (src.cx(), dst.cx());
    let n = word.len();
    if n == 0 || sc.cells[word[0].cell as usize].half != dc.cells[start].half {
        return None;
    }
    let mut out = Vec::with_capacity(n);
    let mut cell = start;
    let steps = if closed { n } else { n - 1 };
    for k in 0..n {
        let t = word[k];
        out.push(Traversal { cell: cell as u32, entry: t.entry, exit: t.exit });
        if k >= steps {
            break;
        }
        let u = word[(k + 1) % n];
        let reflect = src.crossing_reflects(&t, &u)?;
        let exit = dc.sid(cell, t.exit as usize);
        let partner = dc.surface_partner(exit);
        let want_half = sc.cells[u.cell as usize].half;
        let fits = |s: usize| {
            dc.pos_of(s) == u.entry as usize
                && dc.cells[dc.cell_of(s)].half == want_half
                && dc.crossings(exit).contains(&(s, reflect))
        };
        let s = if sheet_change(src, &t, &u) {
            let mut hits = dc.crossings(exit).into_iter().map(|(s, _)| s).filter(|&s| Some(s) != partner && fits(s));
            let s = hits.next()?;
            if hits.next().is_some() {
                return None;
            }
            s
        } else {
            partner.filter(|&s| fits(s))?
        };
        cell = dc.cell_of(s);
        if k + 1 == n && cell != start {
            return None;
        }
    }
    Some(out)
}

/// Offsets between corresponding blocks of two words of the same shape.
pub fn delta_trace(src: &Realization, word: &[Traversal], dst: &Realization, image: &[Traversal]) -> Vec<Delta> {
    word.iter()
        .zip(image)
        .map(|(t, u)| delta_of(src.cx().cells[t.cell as usize].block, dst.cx().cells[u.cell as usize].block))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Transplant {
    pub word: Vec<Traversal>,
    pub offset: Delta,
    pub deltas: Vec<Delta>,
}

/// Transplant a closed word with an explicit starting offset, checking each
/// offset change against `table` when one is given.
pub fn transplant_with_offset(
    src: &Realization,
    dst: &Realization,
    word: &[Traversal],
    offset: Delta,
    table: Option<&TransitionTable>,
) -> Result<Transplant> {
    let first = src.cx().cells[word[0].cell as usize];
    let target = Cell { block: block_add(first.block, offset as i64), ..first };
    let start = dst
        .cx()
        .cell_id(&target)
        .ok_or_else(|| Error::ClosureFailure(format!("partner has no cell {target}")))?;
    let image = shadow(src, word, dst, start, true)
        .ok_or_else(|| Error::ClosureFailure(format!("transplant of {} does not close", src.word_string(word))))?;
    let deltas = delta_trace(src, word, dst, &image);
    if let Some(table) = table {
        let cx = src.cx();
        for k in 0..word.len() {
            let class = cx.cells[word[k].cell as usize].half.sides()[word[k].exit as usize].class();
            let want = table.next(class, deltas[k]);
            let got = deltas[(k + 1) % word.len()];
            if want != Some(got) {
                return Err(Error::ClosureFailure(format!(
                    "offset {} after crossing {k} disagrees with the table ({want:?})",
                    got
                )));
            }
        }
    }
    Ok(Transplant { word: image, offset, deltas })
}

/// Transplant a closed word of a closed surface to its partner, using the
/// initiation rule to choose the starting block.
pub fn transplant_word(src: &Realization, dst: &Realization, word: &[Traversal], table: Option<&TransitionTable>) -> Result<Transplant> {
    let (na, nb) = crossing_counts(src, word);
    transplant_with_offset(src, dst, word, initiation_offset(na, nb), table)
}

/// Inverse of [`transplant_word`]: the same rules read in the other direction.
pub fn transplant_back(src: &Realization, dst: &Realization, word: &[Traversal], table: Option<&TransitionTable>) -> Result<Transplant> {
    let (na, nb) = crossing_counts(src, word);
    let offset = (8 - initiation_offset(na, nb)) % 8;
    transplant_with_offset(src, dst, word, offset, table)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BijectionReport {
    pub words: usize,
    pub partner_words: usize,
    pub injective: bool,
    pub into_partner: bool,
    pub round_trip: bool,
    pub max_length_error: f64,
    pub failures: Vec<String>,
}

impl BijectionReport {
    pub fn ok(&self) -> bool {
        self.injective && self.into_partner && self.round_trip && self.words == self.partner_words && self.failures.is_empty()
    }
}

/// Check that transplantation is a length-preserving bijection between two
/// sets of canonical words, one per unoriented closed geodesic.
pub fn verify_bijection(
    src: &Realization,
    dst: &Realization,
    words: &[Vec<Traversal>],
    partner_words: &[Vec<Traversal>],
    table: Option<&TransitionTable>,
) -> BijectionReport {
    let partner: BTreeSet<Vec<Traversal>> = partner_words.iter().map(|w| unoriented_key(w)).collect();
    let mut report = BijectionReport {
        words: words.len(),
        partner_words: partner.len(),
        injective: true,
        into_partner: true,
        round_trip: true,
        ..Default::default()
    };
    let mut images: HashMap<Vec<Traversal>, usize> = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        let t = match transplant_word(src, dst, w, table) {
            Ok(t) => t,
            Err(e) => {
                report.failures.push(format!("{}: {e}", src.word_string(w)));
                continue;
            }
        };
        match (src.straighten(w), dst.straighten(&t.word)) {
            (Ok(g), Ok(h)) => report.max_length_error = report.max_length_error.max((g.length - h.length).abs()),
            (_, Err(e)) | (Err(e), _) => report.failures.push(format!("{}: {e}", src.word_string(w))),
        }
        match transplant_back(dst, src, &t.word, table) {
            Ok(b) if b.word == *w => {}
            _ => report.round_trip = false,
        }
        let key = unoriented_key(&t.word);
        if !partner.contains(&key) {
            report.into_partner = false;
        }
        if images.insert(key, i).is_some() {
            report.injective = false;
        }
    }
    report
}

/// Split a closed word where it passes between sheets. Each piece is a
/// geodesic segment of the underlying surface with endpoints on the branch
/// locus; the word is rotated so the first piece starts right after a split.
pub fn beta_decomposition(r: &Realization, word: &[Traversal]) -> Result<Vec<Vec<Traversal>>> {
    let n = word.len();
    let split = |k: usize| sheet_change(r, &word[k], &word[(k + 1) % n]);
    let cut = (0..n).find(|&k| split(k)).ok_or(Error::NoBranchCrossing)?;
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for k in 0..n {
        let i = (cut + 1 + k) % n;
        cur.push(word[i]);
        if split(i) {
            out.push(std::mem::take(&mut cur));
        }
    }
    Ok(out)
}

/// Every copy of a branch segment in `r` with the same side labels and
/// gluings, entering from the branch locus and leaving through it. The segment itself may come from a partner complex `src`.
pub fn segment_copies(src: &Realization, beta: &[Traversal], r: &Realization) -> Vec<Vec<Traversal>> {
    let cx = r.cx();
    let half = src.cx().cells[beta[0].cell as usize].half;
    let last = beta[beta.len() - 1];
    (0..cx.cells.len())
        .filter(|&c| cx.cells[c].half == half)
        .filter(|&c| cx.edges[cx.edge_of(cx.sid(c, beta[0].entry as usize)).0].branch)
        .filter_map(|c| shadow(src, beta, r, c, false))
        .filter(|w| {
            let end = w[w.len() - 1];
            debug_assert_eq!(end.exit, last.exit);
            r.exits_on_branch(&end)
        })
        .collect()
}

/// Point of the branch locus where a segment starts: the edge and the
/// direction of the entry side along it.
pub fn start_point(r: &Realization, seg: &[Traversal]) -> (usize, bool) {
    r.cx().edge_of(r.cx().sid(seg[0].cell as usize, seg[0].entry as usize))
}

pub fn end_point(r: &Realization, seg: &[Traversal]) -> (usize, bool) {
    let t = seg[seg.len() - 1];
    r.cx().edge_of(r.cx().sid(t.cell as usize, t.exit as usize))
}

/// Translated copies of a segment: copies that start and end at the same
/// points of the branch locus. The segment itself is the first entry.
pub fn translated_copies(r: &Realization, beta: &[Traversal]) -> Vec<Vec<Traversal>> {
    let (s, e) = (start_point(r, beta), end_point(r, beta));
    let mut out: Vec<Vec<Traversal>> = segment_copies(r, beta, r)
        .into_iter()
        .filter(|w| start_point(r, w) == s && end_point(r, w) == e)
        .collect();
    out.sort_by_key(|w| *w != beta);
    out
}

/// Whether `next` continues `prev` across the branch locus: it enters at the
/// point where `prev` leaves, glued the given way, through a different side.
pub fn joins(r: &Realization, prev: &[Traversal], next: &[Traversal], reflect: bool) -> bool {
    let cx = r.cx();
    let (a, b) = (prev[prev.len() - 1], next[0]);
    let (x, y) = (cx.sid(a.cell as usize, a.exit as usize), cx.sid(b.cell as usize, b.entry as usize));
    x != y && cx.crossings(x).contains(&(y, reflect))
}

/// Whether `next` would re-enter through the side `prev` leaves by.
pub fn backtracks(r: &Realization, prev: &[Traversal], next: &[Traversal]) -> bool {
    let cx = r.cx();
    let (a, b) = (prev[prev.len() - 1], next[0]);
    cx.sid(a.cell as usize, a.exit as usize) == cx.sid(b.cell as usize, b.entry as usize)
}

/// Gluing flags at the junctions of a decomposition: entry `i` is the
/// crossing from piece `i - 1` (cyclically) into piece `i`.
pub fn junction_flags(r: &Realization, pieces: &[Vec<Traversal>]) -> Vec<bool> {
    let n = pieces.len();
    (0..n)
        .map(|i| {
            let prev = &pieces[(i + n - 1) % n];
            r.crossing_reflects(&prev[prev.len() - 1], &pieces[i][0]).unwrap_or(false)
        })
        .collect()
}

/// Number of closed admissible concatenations choosing one candidate per
/// position, cyclically.
pub fn count_concatenations(r: &Realization, candidates: &[Vec<Vec<Traversal>>], flags: &[bool]) -> u64 {
    let n = candidates.len();
    if n == 0 {
        return 0;
    }
    // ok[i][p][q]: candidate p at i-1 joins candidate q at i
    let ok: Vec<Vec<Vec<bool>>> = (0..n)
        .map(|i| {
            let prev = &candidates[(i + n - 1) % n];
            prev.iter()
                .map(|p| candidates[i].iter().map(|q| joins(r, p, q, flags[i])).collect())
                .collect()
        })
        .collect();
    let mut total = 0;
    for first in 0..candidates[0].len() {
        let mut ways: Vec<u64> = (0..candidates[0].len()).map(|q| (q == first) as u64).collect();
        for i in 1..n {
            ways = (0..candidates[i].len())
                .map(|q| (0..candidates[i - 1].len()).filter(|&p| ok[i][p][q]).map(|p| ways[p]).sum())
                .collect();
        }
        total += (0..candidates[n - 1].len()).filter(|&p| ok[0][p][first]).map(|p| ways[p]).sum::<u64>();
    }
    total
}

/// Which of the three closing configurations a decomposition is in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClosingCase {
    One,
    Two,
    Three,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdenticalCount {
    pub pieces: usize,
    /// Translated copies of each piece.
    pub copies: Vec<usize>,
    /// Copies of piece i that can follow the piece i - 1 itself (i >= 1).
    pub choices: Vec<usize>,
    pub case: Option<ClosingCase>,
    pub search: u64,
    pub formula: Option<u64>,
}

/// Copies of piece i (translates of `candidates[i]`) that backtrack into the
/// fixed piece i - 1.
fn backtrack_exists(r: &Realization, prev: &[Traversal], cands: &[Vec<Traversal>]) -> bool {
    cands.iter().any(|q| backtracks(r, prev, q))
}

fn backtrack_exists_end(r: &Realization, cands: &[Vec<Traversal>], first: &[Traversal]) -> bool {
    cands.iter().any(|p| backtracks(r, p, first))
}

/// The closed-form count for `k` translates per piece.
pub fn case_formula(k: u64, inner: u64, case: ClosingCase) -> u64 {
    match (case, k) {
        (ClosingCase::One, _) => k * inner * k,
        (ClosingCase::Two, _) => k * inner * (k - 1),
        (ClosingCase::Three, 2) => 2 * inner,
        (ClosingCase::Three, 4) => inner * 3 + 3 * inner * 2,
        (ClosingCase::Three, _) => k * inner * (k - 2),
    }
}

/// Count the closed geodesics identical to the one with decomposition
/// `pieces` (of the geodesic in `src`), realized in `r` from the segments
/// `images` (the pieces themselves, or their transplants).
pub fn count_identical_pieces(r: &Realization, images: &[Vec<Traversal>], flags: &[bool]) -> IdenticalCount {
    let n = images.len();
    let cands: Vec<Vec<Vec<Traversal>>> = images.iter().map(|b| translated_copies(r, b)).collect();
    let search = count_concatenations(r, &cands, flags);
    let copies: Vec<usize> = cands.iter().map(|c| c.len()).collect();
    let choices: Vec<usize> = (1..n)
        .map(|i| cands[i].iter().filter(|q| !backtracks(r, &images[i - 1], q)).count())
        .collect();
    let k = copies[0] as u64;
    let uniform = copies.iter().all(|&c| c as u64 == k);
    let (case, formula) = if n >= 2 && uniform && (k == 2 || k == 4) {
        let fact1 = backtrack_exists(r, &images[n - 2], &cands[n - 1]);
        let fact2 = backtrack_exists_end(r, &cands[n - 1], &images[0]);
        let case = match (fact1, fact2) {
            (false, false) => ClosingCase::One,
            (true, true) => ClosingCase::Three,
            _ => ClosingCase::Two,
        };
        let inner: u64 = (1..n - 1)
            .map(|i| if backtrack_exists(r, &images[i - 1], &cands[i]) { k - 1 } else { k })
            .product();
        (Some(case), Some(case_formula(k, inner, case)))
    } else if n == 1 && (k == 2 || k == 4) {
        // every translate of a lone piece ends where it starts
        (None, Some(k))
    } else {
        (None, None)
    };
    IdenticalCount { pieces: n, copies, choices, case, search, formula }
}

/// Identical-copy count of a closed word crossing the branch locus.
pub fn count_identical(r: &Realization, word: &[Traversal]) -> Result<IdenticalCount> {
    let pieces = beta_decomposition(r, word)?;
    let flags = junction_flags(r, &pieces);
    Ok(count_identical_pieces(r, &pieces, &flags))
}

/// Transplant each branch segment of a word from `src` into `dst` with a
/// fixed starting offset, keeping copy and half.
pub fn transplant_pieces(src: &Realization, dst: &Realization, pieces: &[Vec<Traversal>], offset: Delta) -> Result<Vec<Vec<Traversal>>> {
    pieces
        .iter()
        .map(|p| {
            let first = src.cx().cells[p[0].cell as usize];
            let target = Cell { block: block_add(first.block, offset as i64), ..first };
            dst.cx()
                .cell_id(&target)
                .and_then(|c| shadow(src, p, dst, c, false))
                .filter(|w| dst.exits_on_branch(&w[w.len() - 1]))
                .ok_or_else(|| Error::ClosureFailure(format!("segment {} has no transplant", src.word_string(p))))
        })
        .collect()
}

/// Identical-copy counts of one geodesic in a pair of amalgams, the second
/// count built from transplanted pieces started at the given offset.
pub fn paired_counts(
    src: &Realization,
    dst: &Realization,
    word: &[Traversal],
    offset: Delta,
) -> Result<(IdenticalCount, IdenticalCount)> {
    let pieces = beta_decomposition(src, word)?;
    let flags = junction_flags(src, &pieces);
    let here = count_identical_pieces(src, &pieces, &flags);
    let images = transplant_pieces(src, dst, &pieces, offset)?;
    let there = count_identical_pieces(dst, &images, &flags);
    Ok((here, there))
}

/// Identical-copy count restricted to concatenations inside a single
/// surface copy, summed over the copies.
pub fn count_identical_per_copy(r: &Realization, images: &[Vec<Traversal>], flags: &[bool]) -> u64 {
    let cands: Vec<Vec<Vec<Traversal>>> = images.iter().map(|b| translated_copies(r, b)).collect();
    (1..=r.cx().copies)
        .map(|s| {
            let inside: Vec<Vec<Vec<Traversal>>> = cands
                .iter()
                .map(|c| c.iter().filter(|w| w.iter().all(|t| r.cx().cells[t.cell as usize].copy == s)).cloned().collect())
                .collect();
            count_concatenations(r, &inside, flags)
        })
        .sum()
}

/// Closed curves built from copies of the pieces anywhere in `r`, each
/// counted once per starting copy of the first piece.
pub fn count_global(r: &Realization, images: &[Vec<Traversal>], src: &Realization, flags: &[bool]) -> u64 {
    let cands: Vec<Vec<Vec<Traversal>>> = images.iter().map(|b| segment_copies(src, b, r)).collect();
    count_concatenations(r, &cands, flags)
}

/// Offset chosen for one segment by the amalgam transplantation rules.
pub fn amalgam_offset(src: &Realization, piece: &[Traversal]) -> Delta {
    let cx = src.cx();
    let special = |t: &Traversal| matches!(cx.cells[t.cell as usize].block, 1 | 4 | 5 | 8);
    let nb = piece[..piece.len() - 1]
        .iter()
        .filter(|t| cx.cells[t.cell as usize].half.sides()[t.exit as usize].class() == LengthClass::B)
        .count();
    if special(&piece[0]) {
        if nb % 2 == 0 {
            0
        } else {
            4
        }
    } else if special(&piece[piece.len() - 1]) {
        0
    } else {
        2
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AmalgamTransplant {
    pub word: Vec<Traversal>,
    pub offsets: Vec<Delta>,
    /// Surface copy chosen for each segment.
    pub copies: Vec<u32>,
    /// Segments moved to another copy to avoid backtracking.
    pub moved: usize,
    /// Segments whose offset differs from the rule's choice.
    pub fallback: usize,
}

/// Transplant a word crossing the branch locus between amalgams built from
/// copies of the two surfaces: per segment, choose the offset by the rules,
/// then the first surface copy (the segment's own, then ascending) that
/// continues the previous segment and, for the last one, closes up.
pub fn transplant_amalgam(src: &Realization, dst: &Realization, word: &[Traversal]) -> Result<AmalgamTransplant> {
    let pieces = match beta_decomposition(src, word) {
        Ok(p) => p,
        Err(Error::NoBranchCrossing) => {
            // a curve of one surface copy
            let t = transplant_word(src, dst, word, None)?;
            let copy = src.cx().cells[word[0].cell as usize].copy;
            return Ok(AmalgamTransplant { word: t.word, offsets: vec![t.offset], copies: vec![copy], moved: 0, fallback: 0 });
        }
        Err(e) => return Err(e),
    };
    let flags = junction_flags(src, &pieces);
    let n = pieces.len();
    let ncopies = dst.cx().copies;
    // candidates per piece, in preference order: (offset, copy, image)
    let mut cands: Vec<Vec<(Delta, u32, Vec<Traversal>, bool)>> = Vec::with_capacity(n);
    for p in &pieces {
        let first = src.cx().cells[p[0].cell as usize];
        let rule = amalgam_offset(src, p);
        let mut offsets = vec![rule];
        offsets.extend((0..8).filter(|&d| d != rule));
        let mut order: Vec<u32> = vec![first.copy];
        order.extend((1..=ncopies).filter(|&c| c != first.copy));
        let mut v = Vec::new();
        for &d in &offsets {
            for &copy in &order {
                let target = Cell { copy, block: block_add(first.block, d as i64), half: first.half };
                if let Some(img) = dst
                    .cx()
                    .cell_id(&target)
                    .and_then(|c| shadow(src, p, dst, c, false))
                    .filter(|w| dst.exits_on_branch(&w[w.len() - 1]))
                {
                    v.push((d, copy, img, d != rule));
                }
            }
        }
        if v.is_empty() {
            return Err(Error::NoValidCopy(src.word_string(p)));
        }
        cands.push(v);
    }
    let mut choice = vec![0usize; n];
    if !pick(dst, &cands, &flags, &mut choice, 0) {
        return Err(Error::NoValidCopy(src.word_string(word)));
    }
    let mut out = AmalgamTransplant { word: Vec::new(), offsets: Vec::new(), copies: Vec::new(), moved: 0, fallback: 0 };
    for (i, &c) in choice.iter().enumerate() {
        let (d, copy, img, fb) = &cands[i][c];
        out.word.extend_from_slice(img);
        out.offsets.push(*d);
        out.copies.push(*copy);
        out.moved += (*copy != src.cx().cells[pieces[i][0].cell as usize].copy) as usize;
        out.fallback += *fb as usize;
    }
    Ok(out)
}

type Candidate = (Delta, u32, Vec<Traversal>, bool);

fn pick(r: &Realization, cands: &[Vec<Candidate>], flags: &[bool], choice: &mut [usize], i: usize) -> bool {
    let n = cands.len();
    if i == n {
        // the image of a primitive curve must not wind twice
        let word: Vec<Traversal> = (0..n).flat_map(|k| cands[k][choice[k]].2.iter().copied()).collect();
        return period(&word) == word.len();
    }
    for c in 0..cands[i].len() {
        let img = &cands[i][c].2;
        if i > 0 && !joins(r, &cands[i - 1][choice[i - 1]].2, img, flags[i]) {
            continue;
        }
        let first = if i == 0 { img } else { &cands[0][choice[0]].2 };
        if i == n - 1 && !joins(r, img, first, flags[0]) {
            continue;
        }
        choice[i] = c;
        if pick(r, cands, flags, choice, i + 1) {
            return true;
        }
    }
    false
}

/// Smallest block offset carrying every branch side of `src` onto a branch
/// side of `dst`, the offset at which the pieces of a transversal geodesic
/// are transplanted.
pub fn branch_offset(src: &BlockComplex, dst: &BlockComplex) -> Option<Delta> {
    let on_branch = |cx: &BlockComplex, sid: usize| cx.edges[cx.edge_of(sid).0].branch;
    (0..8u8).find(|&d| {
        (0..src.side_count()).filter(|&s| on_branch(src, s)).all(|s| {
            let cell = src.cells[src.cell_of(s)];
            let target = Cell { block: block_add(cell.block, d as i64), ..cell };
            dst.cell_id(&target).is_some_and(|c| on_branch(dst, dst.sid(c, src.pos_of(s))))
        })
    })
}
