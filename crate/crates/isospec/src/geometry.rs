//! Metric realization of the building block and isometries of the upper
//! half-plane.
//!
//! Isometries are real 2×2 matrices of determinant ±1. Determinant +1 acts by
//! z ↦ (az + b)/(cz + d); determinant −1 acts by z ↦ (a z̄ + b)/(c z̄ + d).
//! The second kind is needed when an amalgam glues two sheets with matching
//! arc-length directions.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::complex::{Half, LengthClass, Side};
use crate::error::{Error, Result};

pub const EPS_HYP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Isometry {
        Isometry { a, b, c, d }.normalized()
    }

    /// Move distance `t` up the imaginary axis.
    pub fn translation(t: f64) -> Isometry {
        Isometry { a: (t / 2.0).exp(), b: 0.0, c: 0.0, d: (-t / 2.0).exp() }
    }

    /// Counter-clockwise rotation by `theta` about i.
    pub fn rotation(theta: f64) -> Isometry {
        let (s, c) = (theta / 2.0).sin_cos();
        Isometry { a: c, b: s, c: -s, d: c }
    }

    /// Reflection in the imaginary axis, z ↦ −z̄.
    pub fn reflection() -> Isometry {
        Isometry { a: -1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn preserves_orientation(&self) -> bool {
        self.det() > 0.0
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn normalized(self) -> Isometry {
        let k = 1.0 / self.det().abs().sqrt();
        Isometry { a: self.a * k, b: self.b * k, c: self.c * k, d: self.d * k }
    }

    pub fn mul(&self, o: &Isometry) -> Isometry {
        let r = Isometry {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        };
        if (r.det().abs() - 1.0).abs() > 1e-12 {
            r.normalized()
        } else {
            r
        }
    }

    pub fn inverse(&self) -> Isometry {
        let k = 1.0 / self.det();
        Isometry { a: self.d * k, b: -self.b * k, c: -self.c * k, d: self.a * k }
    }

    pub fn pow(&self, k: u32) -> Isometry {
        (0..k).fold(Isometry::IDENTITY, |acc, _| acc.mul(self))
    }

    pub fn apply(&self, z: C64) -> C64 {
        let w = if self.preserves_orientation() { z } else { z.conj() };
        (w * self.a + self.b) / (w * self.c + self.d)
    }

    /// Distance in operator sense between two isometries up to sign.
    pub fn distance(&self, o: &Isometry) -> f64 {
        let plus = (self.a - o.a).abs().max((self.b - o.b).abs()).max((self.c - o.c).abs()).max((self.d - o.d).abs());
        let minus = (self.a + o.a).abs().max((self.b + o.b).abs()).max((self.c + o.c).abs()).max((self.d + o.d).abs());
        plus.min(minus)
    }
}

/// Translation length of a hyperbolic isometry (or glide reflection).
pub fn geodesic_length(h: &Isometry) -> Result<f64> {
    let t = h.trace().abs();
    if h.preserves_orientation() {
        if t <= 2.0 + EPS_HYP {
            return Err(Error::NonHyperbolic { trace: t });
        }
        Ok(2.0 * (t / 2.0).acosh())
    } else {
        if t <= EPS_HYP {
            return Err(Error::NonHyperbolic { trace: t });
        }
        Ok(2.0 * (t / 2.0).asinh())
    }
}

/// Hyperbolic distance in the upper half-plane.
pub fn distance(z: C64, w: C64) -> f64 {
    (1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im)).acosh()
}

pub type V3 = [f64; 3];

/// Point of the hyperboloid model corresponding to z.
pub fn to_hyperboloid(z: C64) -> V3 {
    let r2 = z.norm_sqr();
    [(r2 + 1.0) / (2.0 * z.im), (r2 - 1.0) / (2.0 * z.im), z.re / z.im]
}

/// Inverse of `to_hyperboloid`.
pub fn from_hyperboloid(p: &V3) -> C64 {
    let y = 1.0 / (p[0] - p[1]);
    C64::new(p[2] * y, y)
}

/// Null vector of the boundary point X/Y, scaled to unit Euclidean length.
pub fn boundary_vector(x: f64, y: f64) -> V3 {
    let v = [(x * x + y * y) / 2.0, (x * x - y * y) / 2.0, x * y];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

pub fn minkowski(u: &V3, v: &V3) -> f64 {
    u[0] * v[0] - u[1] * v[1] - u[2] * v[2]
}

pub fn det3(a: &V3, b: &V3, c: &V3) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Oriented axis of a hyperbolic isometry: the boundary points it translates
/// away from and towards.
#[derive(Clone, Copy, Debug)]
pub struct Axis {
    pub repel: V3,
    pub attract: V3,
    pub repel_point: (f64, f64),
    pub attract_point: (f64, f64),
}

impl Axis {
    /// Signed side of a point: positive on the left of the oriented axis.
    pub fn side(&self, p: &V3) -> f64 {
        det3(&self.repel, &self.attract, p)
    }

    fn frame(&self) -> (V3, V3) {
        let k = (2.0 * minkowski(&self.repel, &self.attract)).sqrt();
        let p0 = [
            (self.repel[0] + self.attract[0]) / k,
            (self.repel[1] + self.attract[1]) / k,
            (self.repel[2] + self.attract[2]) / k,
        ];
        let d = [
            (self.attract[0] - self.repel[0]) / k,
            (self.attract[1] - self.repel[1]) / k,
            (self.attract[2] - self.repel[2]) / k,
        ];
        (p0, d)
    }

    /// Parameter along the axis where it meets the line through p and q.
    pub fn meet(&self, p: &V3, q: &V3) -> Option<f64> {
        let (p0, d) = self.frame();
        let a = det3(p, q, &p0);
        let b = det3(p, q, &d);
        if b == 0.0 || (a / b).abs() >= 1.0 {
            return None;
        }
        Some((-a / b).atanh())
    }

    pub fn point_at(&self, t: f64) -> V3 {
        let (p0, d) = self.frame();
        let (ch, sh) = (t.cosh(), t.sinh());
        [ch * p0[0] + sh * d[0], ch * p0[1] + sh * d[1], ch * p0[2] + sh * d[2]]
    }

    /// Tangent direction of the axis at parameter t.
    pub fn tangent_at(&self, t: f64) -> V3 {
        let (p0, d) = self.frame();
        let (ch, sh) = (t.cosh(), t.sinh());
        [sh * p0[0] + ch * d[0], sh * p0[1] + ch * d[1], sh * p0[2] + ch * d[2]]
    }
}

/// Axis of a hyperbolic isometry or glide reflection.
pub fn axis(h: &Isometry) -> Result<Axis> {
    geodesic_length(h)?;
    let (a, b, c, d) = (h.a, h.b, h.c, h.d);
    // fixed points of x ↦ (ax + b)/(cx + d) in homogeneous form [X:Y]
    let disc = ((d - a) * (d - a) + 4.0 * b * c).max(0.0).sqrt();
    let roots: [(f64, f64); 2] = if c.abs() >= b.abs() {
        let q = -0.5 * ((d - a) + if d - a >= 0.0 { disc } else { -disc });
        // c X² + (d−a) X − b = 0 with Y = 1
        let r1 = if c != 0.0 { q / c } else { f64::INFINITY };
        let r2 = if q != 0.0 { -b / q } else { 0.0 };
        [(r1, 1.0), (r2, 1.0)]
    } else {
        // −b s² + (d − a) s + c = 0 with s = Y/X
        let q = -0.5 * ((d - a) + if d - a >= 0.0 { disc } else { -disc });
        let s1 = q / -b;
        let s2 = if q != 0.0 { c / q } else { 0.0 };
        [(1.0, s1), (1.0, s2)]
    };
    let lambda = |(x, y): (f64, f64)| {
        if x.abs() > y.abs() {
            (a * x + b * y) / x
        } else {
            (c * x + d * y) / y
        }
    };
    let fix = |(x, y): (f64, f64)| if x.is_infinite() { (1.0, 0.0) } else { (x, y) };
    let (r1, r2) = (fix(roots[0]), fix(roots[1]));
    let (rep, att) = if lambda(r1).abs() > lambda(r2).abs() { (r2, r1) } else { (r1, r2) };
    Ok(Axis {
        repel: boundary_vector(rep.0, rep.1),
        attract: boundary_vector(att.0, att.1),
        repel_point: rep,
        attract_point: att,
    })
}

/// One side of a cell in standard position: the frame carrying the segment
/// [i, i·e^len] of the imaginary axis onto the side, start to end.
#[derive(Clone, Copy, Debug)]
pub struct SideGeom {
    pub frame: Isometry,
    pub length: f64,
    pub start: C64,
    pub end: C64,
}

impl SideGeom {
    pub fn point_at(&self, t: f64) -> C64 {
        self.frame.apply(C64::new(0.0, t.exp()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryReport {
    pub b: f64,
    pub c: f64,
    pub a: f64,
    pub m: f64,
    pub h: f64,
    pub closure_residual: f64,
    pub angle_residual: f64,
    pub area: f64,
    pub vertices: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct BlockGeometry {
    pub b: f64,
    pub c: f64,
    pub a: f64,
    pub m: f64,
    pub h: f64,
    /// Octagon corners, corner k being the end of side k.
    pub vertices: [C64; 8],
    pub closure_residual: f64,
    whole: Vec<SideGeom>,
    left: Vec<SideGeom>,
    right: Vec<SideGeom>,
}

/// Solve the octagon with sides (c, a, b, a, c, a, b, a), requiring 0 < c < b < 1.
pub fn solve_block(b: f64, c: f64) -> Result<BlockGeometry> {
    if !(0.0 < c && c < b && b < 1.0) {
        return Err(Error::Metric { b, c });
    }
    Ok(solve_block_unchecked(b, c))
}

/// As [`solve_block`] but for any positive parameters.
pub fn solve_block_unchecked(b: f64, c: f64) -> BlockGeometry {
    let m = 2.0 * ((c / 2.0).cosh() / (b / 2.0).sinh()).asinh();
    let h = 2.0 * ((b / 2.0).cosh() / (c / 2.0).sinh()).asinh();
    let a = ((m / 2.0).sinh() * (h / 2.0).sinh()).acosh();

    let t = Isometry::translation;
    let turn_right = Isometry::rotation(-PI / 2.0);
    // from the centre, up to the middle of B-top, then left to its first corner
    let mid_top = t(m / 2.0);
    let corner1 = mid_top.mul(&Isometry::rotation(PI / 2.0)).mul(&t(b / 2.0)).mul(&Isometry::rotation(PI));

    // walk the boundary clockwise from B-top
    let order = [Side::Bt, Side::Atr, Side::Cr, Side::Abr, Side::Bb, Side::Abl, Side::Cl, Side::Atl];
    let len = |s: Side| match s.class() {
        LengthClass::A => a,
        LengthClass::B => b,
        LengthClass::C => c,
        LengthClass::M => m,
    };
    let mut frames = [Isometry::IDENTITY; 8];
    let mut f = corner1;
    for s in order {
        frames[s as usize] = f;
        f = f.mul(&t(len(s))).mul(&turn_right);
    }
    let closure_residual = f.distance(&corner1);

    let side = |frame: Isometry, length: f64| SideGeom {
        frame,
        length,
        start: frame.apply(C64::new(0.0, 1.0)),
        end: frame.apply(C64::new(0.0, length.exp())),
    };
    let whole: Vec<SideGeom> = Side::OCTAGON.iter().map(|&s| side(frames[s as usize], len(s))).collect();
    let mut vertices = [C64::new(0.0, 0.0); 8];
    for k in 0..8 {
        vertices[k] = whole[k].end;
    }
    let bt = frames[Side::Bt as usize];
    let bb = frames[Side::Bb as usize];
    let m_down = side(mid_top.mul(&Isometry::rotation(PI)), m);
    let m_up = side(t(-m / 2.0), m);
    let left = vec![
        whole[Side::Cl as usize],
        whole[Side::Atl as usize],
        side(bt, b / 2.0),
        m_down,
        side(bb.mul(&t(b / 2.0)), b / 2.0),
        whole[Side::Abl as usize],
    ];
    let right = vec![
        side(bt.mul(&t(b / 2.0)), b / 2.0),
        whole[Side::Atr as usize],
        whole[Side::Cr as usize],
        whole[Side::Abr as usize],
        side(bb, b / 2.0),
        m_up,
    ];
    BlockGeometry { b, c, a, m, h, vertices, closure_residual, whole, left, right }
}

impl BlockGeometry {
    pub fn sides(&self, half: Half) -> &[SideGeom] {
        match half {
            Half::Whole => &self.whole,
            Half::Left => &self.left,
            Half::Right => &self.right,
        }
    }

    pub fn length(&self, class: LengthClass, half_b: bool) -> f64 {
        match class {
            LengthClass::A => self.a,
            LengthClass::B if half_b => self.b / 2.0,
            LengthClass::B => self.b,
            LengthClass::C => self.c,
            LengthClass::M => self.m,
        }
    }

    /// Isometry placing the neighbouring cell: its side `(half_b, pos_b)` is
    /// laid onto side `(half_a, pos_a)` of the cell in standard position.
    /// `reflect` matches arc-length coordinates in the same direction;
    /// otherwise coordinate t goes to L − t.
    pub fn crossing(&self, half_a: Half, pos_a: usize, half_b: Half, pos_b: usize, reflect: bool) -> Result<Isometry> {
        let sa = self.sides(half_a)[pos_a];
        let sb = self.sides(half_b)[pos_b];
        if (sa.length - sb.length).abs() > 1e-9 {
            return Err(Error::LengthMismatch {
                a: format!("{:?} side {pos_a}", half_a),
                b: format!("{:?} side {pos_b}", half_b),
            });
        }
        let flip = if reflect {
            Isometry::reflection()
        } else {
            Isometry::translation(sa.length).mul(&Isometry::rotation(PI))
        };
        Ok(sa.frame.mul(&flip).mul(&sb.frame.inverse()))
    }

    /// Interior angles of the octagon, from the hyperbolic law of cosines.
    pub fn angles(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for k in 0..8 {
            let p = self.vertices[(k + 7) % 8];
            let v = self.vertices[k];
            let q = self.vertices[(k + 1) % 8];
            out[k] = law_of_cosines_angle(distance(v, p), distance(v, q), distance(p, q));
        }
        out
    }

    /// Area by fanning triangles from the centre i.
    pub fn area(&self) -> f64 {
        let o = C64::new(0.0, 1.0);
        let mut area = 0.0;
        for k in 0..8 {
            let p = self.vertices[k];
            let q = self.vertices[(k + 1) % 8];
            let (op, oq, pq) = (distance(o, p), distance(o, q), distance(p, q));
            let angle_o = law_of_cosines_angle(op, oq, pq);
            let angle_p = law_of_cosines_angle(op, pq, oq);
            let angle_q = law_of_cosines_angle(oq, pq, op);
            area += PI - angle_o - angle_p - angle_q;
        }
        area
    }

    pub fn report(&self) -> GeometryReport {
        let angle_residual = self.angles().iter().map(|x| (x - PI / 2.0).abs()).fold(0.0, f64::max);
        GeometryReport {
            b: self.b,
            c: self.c,
            a: self.a,
            m: self.m,
            h: self.h,
            closure_residual: self.closure_residual,
            angle_residual,
            area: self.area(),
            vertices: self.vertices.iter().map(|z| (z.re, z.im)).collect(),
        }
    }
}

/// Angle between sides x and y of a triangle whose third side is z.
fn law_of_cosines_angle(x: f64, y: f64, z: f64) -> f64 {
    let cos = (x.cosh() * y.cosh() - z.cosh()) / (x.sinh() * y.sinh());
    cos.clamp(-1.0, 1.0).acos()
}
