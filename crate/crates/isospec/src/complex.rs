//! Combinatorial model of complexes built from octagonal blocks.
//!
//! Sides of a cell are listed in clockwise order; corner `k` of a cell is the
//! end of side `k`. A side's arc-length coordinate runs along that clockwise
//! traversal.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Cl,
    Atl,
    Bt,
    Atr,
    Cr,
    Abr,
    Bb,
    Abl,
    M,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LengthClass {
    A,
    B,
    C,
    M,
}

impl Side {
    pub const OCTAGON: [Side; 8] = [
        Side::Cl,
        Side::Atl,
        Side::Bt,
        Side::Atr,
        Side::Cr,
        Side::Abr,
        Side::Bb,
        Side::Abl,
    ];

    pub fn class(self) -> LengthClass {
        match self {
            Side::Cl | Side::Cr => LengthClass::C,
            Side::Bt | Side::Bb => LengthClass::B,
            Side::M => LengthClass::M,
            _ => LengthClass::A,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Cl => "C-left",
            Side::Atl => "A-top-left",
            Side::Bt => "B-top",
            Side::Atr => "A-top-right",
            Side::Cr => "C-right",
            Side::Abr => "A-bottom-right",
            Side::Bb => "B-bottom",
            Side::Abl => "A-bottom-left",
            Side::M => "m",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        Side::OCTAGON
            .iter()
            .chain(std::iter::once(&Side::M))
            .copied()
            .find(|x| x.name() == s)
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Half {
    Whole,
    Left,
    Right,
}

impl Half {
    /// Clockwise side list of a cell of this kind.
    pub fn sides(self) -> &'static [Side] {
        match self {
            Half::Whole => &Side::OCTAGON,
            Half::Left => &[Side::Cl, Side::Atl, Side::Bt, Side::M, Side::Bb, Side::Abl],
            Half::Right => &[Side::Bt, Side::Atr, Side::Cr, Side::Abr, Side::Bb, Side::M],
        }
    }

    fn parse(s: &str) -> Option<Half> {
        match s {
            "whole" => Some(Half::Whole),
            "left" => Some(Half::Left),
            "right" => Some(Half::Right),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Half::Whole => "whole",
            Half::Left => "left",
            Half::Right => "right",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub copy: u32,
    pub block: u8,
    pub half: Half,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = match self.half {
            Half::Whole => "",
            Half::Left => "L",
            Half::Right => "R",
        };
        write!(f, "{}:{}{}", self.copy, self.block, h)
    }
}

/// Block index arithmetic: 1..8, mod 8, with 0 written as 8.
pub fn block_add(n: u8, d: i64) -> u8 {
    ((n as i64 - 1 + d).rem_euclid(8) + 1) as u8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Preserving,
    Reversing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SideRef {
    pub cell: Cell,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairing {
    pub a: SideRef,
    pub b: SideRef,
    pub orientation: Orientation,
}

/// An oriented arc: a side traversed along (`forward`) or against the cell's
/// clockwise direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub side: SideRef,
    pub forward: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluingClass {
    pub members: Vec<Vec<Arc>>,
}

/// An edge of the quotient CW structure: the class of identified sides.
/// `sides` holds (side id, whether the side's clockwise direction agrees with
/// the edge direction).
#[derive(Clone, Debug)]
pub struct Edge {
    pub class: LengthClass,
    pub half_b: bool,
    pub sides: Vec<(usize, bool)>,
    pub branch: bool,
    pub start: usize,
    pub end: usize,
}

/// A closed curve in the skeleton as a cyclic list of (edge, forward).
pub type EdgeCurve = Vec<(usize, bool)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub cells: Vec<Cell>,
    pub euler: i64,
    pub boundaries: usize,
    pub genus: Option<i64>,
    pub surface: bool,
}

impl Component {
    pub fn kind(&self) -> (i64, usize) {
        (self.genus.unwrap_or(-1), self.boundaries)
    }
}

#[derive(Clone, Debug)]
pub struct BlockComplex {
    pub name: String,
    pub b: f64,
    pub c: f64,
    pub copies: u32,
    pub cells: Vec<Cell>,
    pub pairings: Vec<Pairing>,
    pub gluing_classes: Vec<GluingClass>,
    offsets: Vec<usize>,
    side_cell: Vec<usize>,
    side_pos: Vec<usize>,
    cell_index: HashMap<Cell, usize>,
    pub edges: Vec<Edge>,
    side_edge: Vec<(usize, bool)>,
    corner_vertex: Vec<usize>,
    pub n_vertices: usize,
    germ_adj: Vec<Vec<usize>>,
    surface_partner: Vec<Option<usize>>,
}

struct ParityUf {
    parent: Vec<usize>,
    parity: Vec<bool>,
}

impl ParityUf {
    fn new(n: usize) -> Self {
        ParityUf { parent: (0..n).collect(), parity: vec![false; n] }
    }
    fn find(&mut self, x: usize) -> (usize, bool) {
        let p = self.parent[x];
        if p == x {
            return (x, false);
        }
        let (r, pp) = self.find(p);
        self.parent[x] = r;
        self.parity[x] ^= pp;
        (r, self.parity[x])
    }
    /// Declare `parity(x) ^ parity(y) == rel`. Returns false on contradiction.
    fn union(&mut self, x: usize, y: usize, rel: bool) -> bool {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            return px ^ py == rel;
        }
        self.parent[rx] = ry;
        self.parity[rx] = px ^ py ^ rel;
        true
    }
}

fn uf_find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let n = p[y];
        p[y] = r;
        y = n;
    }
    r
}

fn uf_union(p: &mut [usize], a: usize, b: usize) {
    let ra = uf_find(p, a);
    let rb = uf_find(p, b);
    if ra != rb {
        p[ra] = rb;
    }
}

fn schema<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Schema(msg.into()))
}

fn parse_cell_ref(v: &Value, with_side: bool) -> Result<(Cell, Option<Side>, Vec<Value>)> {
    let arr = match v.as_array() {
        Some(a) => a,
        None => return schema(format!("expected array reference, got {v}")),
    };
    let num = |i: usize| -> Result<u64> {
        arr.get(i)
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Schema(format!("bad reference {v}")))
    };
    let copy = num(0)? as u32;
    let block = num(1)? as u8;
    if !(1..=8).contains(&block) || copy == 0 {
        return schema(format!("block or copy out of range in {v}"));
    }
    let mut rest: Vec<Value> = arr[2..].to_vec();
    let mut half = Half::Whole;
    if let Some(h) = rest.first().and_then(Value::as_str).and_then(Half::parse) {
        half = h;
        rest.remove(0);
    }
    let mut side = None;
    if with_side {
        let s = rest.first().and_then(Value::as_str).and_then(Side::parse);
        match s {
            Some(s) => {
                side = Some(s);
                rest.remove(0);
            }
            None => return schema(format!("missing or unknown side in {v}")),
        }
    }
    Ok((Cell { copy, block, half }, side, rest))
}

impl BlockComplex {
    /// Parse and validate a complex description document.
    pub fn load(document: &str) -> Result<BlockComplex> {
        let v: Value = serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
        let name = v["name"].as_str().ok_or_else(|| Error::Schema("missing name".into()))?;
        let b = v["metric"]["b"].as_f64().ok_or_else(|| Error::Schema("missing metric.b".into()))?;
        let c = v["metric"]["c"].as_f64().ok_or_else(|| Error::Schema("missing metric.c".into()))?;
        let copies = v["copies"].as_u64().unwrap_or(1) as u32;
        let mut cells = Vec::new();
        for cv in v["cells"].as_array().ok_or_else(|| Error::Schema("missing cells".into()))? {
            let (cell, _, _) = parse_cell_ref(cv, false)?;
            if cell.copy > copies {
                return schema(format!("cell {cell} exceeds copies = {copies}"));
            }
            cells.push(cell);
        }
        let mut pairings = Vec::new();
        for pv in v["pairings"].as_array().ok_or_else(|| Error::Schema("missing pairings".into()))? {
            let (ca, sa, _) = parse_cell_ref(&pv["end_a"], true)?;
            let (cb, sb, _) = parse_cell_ref(&pv["end_b"], true)?;
            let orientation = match pv["orientation"].as_str() {
                Some("reversing") => Orientation::Reversing,
                Some("preserving") => Orientation::Preserving,
                _ => return schema(format!("bad orientation in {pv}")),
            };
            pairings.push(Pairing {
                a: SideRef { cell: ca, side: sa.unwrap() },
                b: SideRef { cell: cb, side: sb.unwrap() },
                orientation,
            });
        }
        let mut gluing_classes = Vec::new();
        if let Some(gs) = v.get("gluing_classes").and_then(Value::as_array) {
            for gv in gs {
                let mut members = Vec::new();
                for mv in gv["members"].as_array().ok_or_else(|| Error::Schema("gluing class without members".into()))? {
                    let mut arcs = Vec::new();
                    for av in mv.as_array().ok_or_else(|| Error::Schema("member must be an arc list".into()))? {
                        let (cell, side, rest) = parse_cell_ref(av, true)?;
                        let forward = match rest.first().and_then(Value::as_str) {
                            Some("+") => true,
                            Some("-") => false,
                            _ => return schema(format!("arc {av} needs a direction '+' or '-'")),
                        };
                        arcs.push(Arc { side: SideRef { cell, side: side.unwrap() }, forward });
                    }
                    members.push(arcs);
                }
                gluing_classes.push(GluingClass { members });
            }
        }
        Self::build(name.to_string(), b, c, copies, cells, pairings, gluing_classes)
    }

    pub fn build(
        name: String,
        b: f64,
        c: f64,
        copies: u32,
        mut cells: Vec<Cell>,
        pairings: Vec<Pairing>,
        gluing_classes: Vec<GluingClass>,
    ) -> Result<BlockComplex> {
        if !(0.0 < c && c < b && b < 1.0) {
            return Err(Error::Metric { b, c });
        }
        if cells.is_empty() {
            return schema("complex has no cells");
        }
        cells.sort();
        let mut cell_index = HashMap::new();
        for (i, &cell) in cells.iter().enumerate() {
            if cell_index.insert(cell, i).is_some() {
                return schema(format!("duplicate cell {cell}"));
            }
        }
        for copy in 1..=copies {
            for block in 1..=8u8 {
                let halves: Vec<Half> = cells
                    .iter()
                    .filter(|x| x.copy == copy && x.block == block)
                    .map(|x| x.half)
                    .collect();
                let ok = halves == [Half::Whole] || halves == [Half::Left, Half::Right] || halves.is_empty();
                if !ok {
                    return schema(format!("block {copy}:{block} must be whole or a left/right pair"));
                }
            }
        }
        let mut offsets = Vec::with_capacity(cells.len());
        let mut side_cell = Vec::new();
        let mut side_pos = Vec::new();
        for (i, cell) in cells.iter().enumerate() {
            offsets.push(side_cell.len());
            for k in 0..cell.half.sides().len() {
                side_cell.push(i);
                side_pos.push(k);
            }
        }
        let n_sides = side_cell.len();
        let mut cx = BlockComplex {
            name,
            b,
            c,
            copies,
            cells,
            pairings,
            gluing_classes,
            offsets,
            side_cell,
            side_pos,
            cell_index,
            edges: Vec::new(),
            side_edge: vec![(0, true); n_sides],
            corner_vertex: vec![0; n_sides],
            n_vertices: 0,
            germ_adj: Vec::new(),
            surface_partner: vec![None; n_sides],
        };
        cx.assemble()?;
        for p in &cx.pairings {
            let (x, y) = (cx.find_side(&p.a)?, cx.find_side(&p.b)?);
            cx.surface_partner[x] = Some(y);
            cx.surface_partner[y] = Some(x);
        }
        Ok(cx)
    }

    /// The side glued to `sid` in the underlying surface, before any
    /// identifications along the branch locus.
    pub fn surface_partner(&self, sid: usize) -> Option<usize> {
        self.surface_partner[sid]
    }

    pub fn side_count(&self) -> usize {
        self.side_cell.len()
    }

    pub fn sid(&self, cell: usize, pos: usize) -> usize {
        self.offsets[cell] + pos
    }

    pub fn cell_of(&self, sid: usize) -> usize {
        self.side_cell[sid]
    }

    pub fn pos_of(&self, sid: usize) -> usize {
        self.side_pos[sid]
    }

    pub fn side_label(&self, sid: usize) -> Side {
        self.cells[self.side_cell[sid]].half.sides()[self.side_pos[sid]]
    }

    pub fn cell_id(&self, cell: &Cell) -> Option<usize> {
        self.cell_index.get(cell).copied()
    }

    pub fn find_side(&self, r: &SideRef) -> Result<usize> {
        let ci = self
            .cell_id(&r.cell)
            .ok_or_else(|| Error::Schema(format!("unknown cell {}", r.cell)))?;
        let pos = r
            .cell
            .half
            .sides()
            .iter()
            .position(|&s| s == r.side)
            .ok_or_else(|| Error::Schema(format!("cell {} has no side {}", r.cell, r.side)))?;
        Ok(self.sid(ci, pos))
    }

    pub fn side_ref(&self, sid: usize) -> SideRef {
        SideRef { cell: self.cells[self.cell_of(sid)], side: self.side_label(sid) }
    }

    fn n_cell_sides(&self, cell: usize) -> usize {
        self.cells[cell].half.sides().len()
    }

    /// Corner at the start of a side (the end of the previous side).
    pub fn start_corner(&self, sid: usize) -> usize {
        let cell = self.cell_of(sid);
        let n = self.n_cell_sides(cell);
        self.sid(cell, (self.pos_of(sid) + n - 1) % n)
    }

    pub fn end_corner(&self, sid: usize) -> usize {
        sid
    }

    pub fn edge_of(&self, sid: usize) -> (usize, bool) {
        self.side_edge[sid]
    }

    pub fn vertex_of_corner(&self, corner: usize) -> usize {
        self.corner_vertex[corner]
    }

    fn half_b(&self, sid: usize) -> bool {
        self.side_label(sid) == Side::Bt || self.side_label(sid) == Side::Bb
    }

    fn side_length_key(&self, sid: usize) -> (LengthClass, bool) {
        let half = self.cells[self.cell_of(sid)].half != Half::Whole;
        (self.side_label(sid).class(), half && self.half_b(sid))
    }

    fn assemble(&mut self) -> Result<()> {
        let n = self.side_count();
        let mut uf = ParityUf::new(n);
        let mut count = vec![0usize; n];
        for p in self.pairings.clone() {
            let sa = self.find_side(&p.a)?;
            let sb = self.find_side(&p.b)?;
            if self.side_length_key(sa) != self.side_length_key(sb) {
                return Err(Error::LengthMismatch {
                    a: format!("{} {}", p.a.cell, p.a.side),
                    b: format!("{} {}", p.b.cell, p.b.side),
                });
            }
            if sa == sb {
                return Err(Error::Inconsistent(format!("side {} {} paired with itself", p.a.cell, p.a.side)));
            }
            count[sa] += 1;
            count[sb] += 1;
            let rel = p.orientation == Orientation::Reversing;
            if !uf.union(sa, sb, rel) {
                return Err(Error::Inconsistent(format!("pairing {} {} contradicts earlier ones", p.a.cell, p.a.side)));
            }
        }
        let mut in_class = vec![false; n];
        let mut resolved = Vec::new();
        for g in &self.gluing_classes {
            if g.members.len() < 2 {
                return schema("gluing class needs at least two members");
            }
            let mut ms = Vec::new();
            for m in &g.members {
                if m.len() != g.members[0].len() {
                    return schema("gluing class members differ in arc count");
                }
                let mut arcs = Vec::new();
                for a in m {
                    let s = self.find_side(&a.side)?;
                    in_class[s] = true;
                    arcs.push((s, a.forward));
                }
                ms.push(arcs);
            }
            resolved.push(ms);
        }
        for s in 0..n {
            let r = self.side_ref(s);
            if count[s] == 0 {
                return Err(Error::UnpairedSide { cell: r.cell.to_string(), side: r.side.to_string() });
            }
            if count[s] > 1 && !in_class[s] {
                return Err(Error::DuplicatePairing { cell: r.cell.to_string(), side: r.side.to_string() });
            }
        }
        // Vertices from the pairings alone, used to check that members close up.
        let pair_edges = self.edges_from(&mut uf, &vec![false; n]);
        let pair_vertices = self.vertices_from(&pair_edges, n);
        for ms in &resolved {
            for m in ms {
                for k in 0..m.len() {
                    let (s, f) = m[k];
                    let (t, g) = m[(k + 1) % m.len()];
                    let end = if f { self.end_corner(s) } else { self.start_corner(s) };
                    let start = if g { self.start_corner(t) } else { self.end_corner(t) };
                    if pair_vertices[end] != pair_vertices[start] {
                        return Err(Error::NotEmbedded(format!(
                            "gluing member arc {} {} does not meet the next arc",
                            self.side_ref(s).cell,
                            self.side_ref(s).side
                        )));
                    }
                }
            }
            for m in &ms[1..] {
                for (k, &(s, f)) in m.iter().enumerate() {
                    let (t, g) = ms[0][k];
                    if self.side_length_key(s) != self.side_length_key(t) {
                        return Err(Error::LengthMismatch {
                            a: format!("{}", self.side_ref(s).cell),
                            b: format!("{}", self.side_ref(t).cell),
                        });
                    }
                    // parity(s) ^ f == parity(t) ^ g
                    if !uf.union(s, t, f ^ g) {
                        return Err(Error::Inconsistent("gluing class identifies an arc with its reverse".into()));
                    }
                }
            }
        }
        let branch: Vec<bool> = in_class.clone();
        self.edges = self.edges_from(&mut uf, &branch);
        for (e, edge) in self.edges.iter().enumerate() {
            for &(s, d) in &edge.sides {
                self.side_edge[s] = (e, d);
            }
        }
        self.corner_vertex = self.vertices_from(&self.edges, n);
        self.n_vertices = self.corner_vertex.iter().copied().max().map_or(0, |m| m + 1);
        for e in 0..self.edges.len() {
            let (s, d) = self.edges[e].sides[0];
            let (st, en) = (self.start_corner(s), self.end_corner(s));
            let (st, en) = if d { (st, en) } else { (en, st) };
            self.edges[e].start = self.corner_vertex[st];
            self.edges[e].end = self.corner_vertex[en];
        }
        self.build_links();
        self.check_links()?;
        if self.gluing_classes.is_empty() {
            let chi = self.euler_characteristic();
            if chi != -8 * self.copies as i64 {
                return Err(Error::Inconsistent(format!(
                    "Euler characteristic {chi} differs from the expected {}",
                    -8 * self.copies as i64
                )));
            }
        }
        Ok(())
    }

    fn edges_from(&self, uf: &mut ParityUf, branch: &[bool]) -> Vec<Edge> {
        let n = self.side_count();
        let mut groups: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
        for s in 0..n {
            let (r, p) = uf.find(s);
            groups.entry(r).or_default().push((s, !p));
        }
        let mut edges: Vec<Edge> = groups
            .into_values()
            .map(|mut sides| {
                sides.sort();
                // normalise so the first side runs along the edge
                if !sides[0].1 {
                    for x in sides.iter_mut() {
                        x.1 = !x.1;
                    }
                }
                let s0 = sides[0].0;
                let (class, half_b) = self.side_length_key(s0);
                Edge {
                    class,
                    half_b,
                    branch: sides.iter().any(|&(s, _)| branch[s]),
                    sides,
                    start: 0,
                    end: 0,
                }
            })
            .collect();
        edges.sort_by_key(|e| e.sides[0].0);
        edges
    }

    fn vertices_from(&self, edges: &[Edge], n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for e in edges {
            let ends = |&(s, d): &(usize, bool)| {
                let (st, en) = (self.start_corner(s), self.end_corner(s));
                if d {
                    (st, en)
                } else {
                    (en, st)
                }
            };
            let (s0, e0) = ends(&e.sides[0]);
            for x in &e.sides[1..] {
                let (s1, e1) = ends(x);
                uf_union(&mut p, s0, s1);
                uf_union(&mut p, e0, e1);
            }
        }
        let mut ids = HashMap::new();
        let mut out = vec![0; n];
        for corner in 0..n {
            let r = uf_find(&mut p, corner);
            let next = ids.len();
            out[corner] = *ids.entry(r).or_insert(next);
        }
        out
    }

    /// Germ index: 2·edge + (1 if the germ sits at the edge's end).
    fn germ_at_end_of_side(&self, sid: usize) -> usize {
        let (e, d) = self.side_edge[sid];
        2 * e + usize::from(d)
    }

    fn germ_at_start_of_side(&self, sid: usize) -> usize {
        let (e, d) = self.side_edge[sid];
        2 * e + usize::from(!d)
    }

    pub fn germ_vertex(&self, g: usize) -> usize {
        let e = &self.edges[g / 2];
        if g % 2 == 1 {
            e.end
        } else {
            e.start
        }
    }

    fn build_links(&mut self) {
        let mut adj = vec![Vec::new(); 2 * self.edges.len()];
        for cell in 0..self.cells.len() {
            let n = self.n_cell_sides(cell);
            for k in 0..n {
                let s = self.sid(cell, k);
                let t = self.sid(cell, (k + 1) % n);
                let g = self.germ_at_end_of_side(s);
                let h = self.germ_at_start_of_side(t);
                adj[g].push(h);
                adj[h].push(g);
            }
        }
        self.germ_adj = adj;
    }

    pub fn vertex_on_branch(&self, v: usize) -> bool {
        self.edges.iter().any(|e| e.branch && (e.start == v || e.end == v))
    }

    fn check_links(&self) -> Result<()> {
        let mut corners = vec![0usize; self.n_vertices];
        for c in 0..self.side_count() {
            corners[self.corner_vertex[c]] += 1;
        }
        for v in 0..self.n_vertices {
            if self.vertex_on_branch(v) {
                continue;
            }
            if corners[v] != 4 {
                return Err(Error::VertexLink { vertex: v, reason: format!("{} corners instead of 4", corners[v]) });
            }
            let germs: Vec<usize> = (0..self.germ_adj.len()).filter(|&g| self.germ_vertex(g) == v).collect();
            let cycle = germs.len() == 4 && germs.iter().all(|&g| self.germ_adj[g].len() == 2);
            if !cycle {
                return Err(Error::VertexLink { vertex: v, reason: "link is not a circle".into() });
            }
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.cells.len() as i64
    }

    pub fn is_amalgam(&self) -> bool {
        !self.gluing_classes.is_empty()
    }

    pub fn branch_edges(&self) -> BTreeSet<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].branch).collect()
    }

    /// Other sides reachable by crossing side `sid`, with a flag telling
    /// whether the crossing matches coordinates in the same direction (a
    /// reflection) rather than reversed.
    pub fn crossings(&self, sid: usize) -> Vec<(usize, bool)> {
        let (e, d) = self.side_edge[sid];
        self.edges[e]
            .sides
            .iter()
            .filter(|&&(s, _)| s != sid)
            .map(|&(s, d2)| (s, d == d2))
            .collect()
    }

    /// Connected pieces of the complex cut open along the given edges, with
    /// their combinatorial topology.
    pub fn topology(&self, cut: &BTreeSet<usize>) -> Vec<Component> {
        let nc = self.cells.len();
        let mut cp: Vec<usize> = (0..nc).collect();
        for (e, edge) in self.edges.iter().enumerate() {
            if cut.contains(&e) {
                continue;
            }
            for w in edge.sides.windows(2) {
                uf_union(&mut cp, self.cell_of(w[0].0), self.cell_of(w[1].0));
            }
        }
        let n = self.side_count();
        let mut vp: Vec<usize> = (0..n).collect();
        for (e, edge) in self.edges.iter().enumerate() {
            if cut.contains(&e) {
                continue;
            }
            let ends = |&(s, d): &(usize, bool)| {
                let (st, en) = (self.start_corner(s), self.end_corner(s));
                if d {
                    (st, en)
                } else {
                    (en, st)
                }
            };
            let (s0, e0) = ends(&edge.sides[0]);
            for x in &edge.sides[1..] {
                let (s1, e1) = ends(x);
                uf_union(&mut vp, s0, s1);
                uf_union(&mut vp, e0, e1);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for cell in 0..nc {
            groups.entry(uf_find(&mut cp, cell)).or_default().push(cell);
        }
        let mut out = Vec::new();
        for cells in groups.into_values() {
            let inside: BTreeSet<usize> = cells.iter().copied().collect();
            let mut verts = BTreeSet::new();
            let mut boundary_sides = Vec::new();
            let mut interior_edges = 0i64;
            let mut surface = true;
            for &cell in &cells {
                for k in 0..self.n_cell_sides(cell) {
                    verts.insert(uf_find(&mut vp, self.sid(cell, k)));
                }
            }
            for (e, edge) in self.edges.iter().enumerate() {
                let here: Vec<_> = edge.sides.iter().filter(|x| inside.contains(&self.cell_of(x.0))).collect();
                if here.is_empty() {
                    continue;
                }
                if cut.contains(&e) {
                    boundary_sides.extend(here.iter().map(|x| x.0));
                } else {
                    interior_edges += 1;
                    if here.len() != 2 {
                        surface = false;
                    }
                }
            }
            let mut bp: BTreeMap<usize, usize> = BTreeMap::new();
            let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
            for &s in &boundary_sides {
                let a = uf_find(&mut vp, self.start_corner(s));
                let b = uf_find(&mut vp, self.end_corner(s));
                bp.entry(a).or_insert(a);
                bp.entry(b).or_insert(b);
                *deg.entry(a).or_default() += 1;
                *deg.entry(b).or_default() += 1;
            }
            if deg.values().any(|&d| d != 2) {
                surface = false;
            }
            let keys: Vec<usize> = bp.keys().copied().collect();
            let idx: HashMap<usize, usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
            let mut bpar: Vec<usize> = (0..keys.len()).collect();
            for &s in &boundary_sides {
                let a = idx[&uf_find(&mut vp, self.start_corner(s))];
                let b = idx[&uf_find(&mut vp, self.end_corner(s))];
                uf_union(&mut bpar, a, b);
            }
            let boundaries = (0..keys.len()).filter(|&i| uf_find(&mut bpar, i) == i).count();
            let euler = verts.len() as i64 - interior_edges - boundary_sides.len() as i64 + cells.len() as i64;
            let twice_genus = 2 - euler - boundaries as i64;
            let genus = if surface && twice_genus >= 0 && twice_genus % 2 == 0 { Some(twice_genus / 2) } else { None };
            out.push(Component {
                cells: cells.iter().map(|&i| self.cells[i]).collect(),
                euler,
                boundaries,
                genus,
                surface,
            });
        }
        out
    }

    /// Check that each curve is a closed edge path and cut along all of them.
    pub fn cut_along(&self, curves: &[EdgeCurve]) -> Result<Vec<Component>> {
        let mut cut = BTreeSet::new();
        for curve in curves {
            if curve.is_empty() {
                return Err(Error::NotEmbedded("empty curve".into()));
            }
            for k in 0..curve.len() {
                let (e, f) = curve[k];
                let (e2, f2) = curve[(k + 1) % curve.len()];
                if e >= self.edges.len() || e2 >= self.edges.len() {
                    return Err(Error::NotEmbedded(format!("edge {e} does not exist")));
                }
                let end = if f { self.edges[e].end } else { self.edges[e].start };
                let start = if f2 { self.edges[e2].start } else { self.edges[e2].end };
                if end != start {
                    return Err(Error::NotEmbedded(format!("edges {e} and {e2} do not meet")));
                }
                cut.insert(e);
            }
        }
        Ok(self.topology(&cut))
    }

    /// Homeomorphism types of the chambers, sorted.
    pub fn chambers(&self) -> Result<Vec<Component>> {
        if !self.is_amalgam() {
            return Err(Error::NotAmalgam(self.name.clone()));
        }
        let mut ch = self.topology(&self.branch_edges());
        ch.sort_by_key(|c| (c.kind(), c.cells.clone()));
        Ok(ch)
    }

    /// Directed edges that continue a skeleton path straight through the
    /// vertex at the head of `(edge, forward)`: germs at link distance at
    /// least π (two corners) from the arriving germ.
    pub fn straight_continuations(&self, edge: usize, forward: bool) -> Vec<(usize, bool)> {
        let arrive = 2 * edge + usize::from(forward);
        let v = self.germ_vertex(arrive);
        let mut dist: HashMap<usize, usize> = HashMap::new();
        dist.insert(arrive, 0);
        let mut q = VecDeque::from([arrive]);
        while let Some(g) = q.pop_front() {
            let d = dist[&g];
            if d >= 2 {
                continue;
            }
            for &h in &self.germ_adj[g] {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(h) {
                    e.insert(d + 1);
                    q.push_back(h);
                }
            }
        }
        let mut out = Vec::new();
        for g in 0..self.germ_adj.len() {
            if self.germ_vertex(g) != v {
                continue;
            }
            if dist.get(&g).is_none_or(|&d| d >= 2) {
                // leaving through germ g: forward if it is the edge's start
                out.push((g / 2, g % 2 == 0));
            }
        }
        out
    }

    /// Closed single-edge curves of class c that are straight at their vertex.
    pub fn combinatorial_systoles(&self) -> Vec<EdgeCurve> {
        let mut out = Vec::new();
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.class != LengthClass::C || edge.start != edge.end {
                continue;
            }
            if self.straight_continuations(e, true).contains(&(e, true)) {
                out.push(vec![(e, true)]);
            }
        }
        out
    }

    /// Pieces left after cutting along the branch locus and every
    /// combinatorial systole.
    pub fn systole_cut(&self) -> Vec<Component> {
        let mut cut = self.branch_edges();
        cut.extend(self.combinatorial_systoles().iter().flat_map(|c| c.iter().map(|&(e, _)| e)));
        self.topology(&cut)
    }

    /// The cells incident to an edge, for reporting.
    pub fn edge_cells(&self, e: usize) -> Vec<(Cell, Side)> {
        self.edges[e].sides.iter().map(|&(s, _)| (self.cells[self.cell_of(s)], self.side_label(s))).collect()
    }

    /// Number of octagon blocks (a half counts one half).
    pub fn block_count(&self) -> f64 {
        self.cells.iter().map(|c| if c.half == Half::Whole { 1.0 } else { 0.5 }).sum()
    }
}

impl BlockComplex {
    /// The same complex with different block parameters.
    pub fn with_metric(&self, b: f64, c: f64) -> Result<BlockComplex> {
        if !(0.0 < c && c < b && b < 1.0) {
            return Err(Error::Metric { b, c });
        }
        let mut out = self.clone();
        out.b = b;
        out.c = c;
        Ok(out)
    }
}
