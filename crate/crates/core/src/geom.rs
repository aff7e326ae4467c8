//! Small planar geometry helpers shared by the contouring, shape and
//! front-tracking code.

/// A point / vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    // plain methods rather than std::ops impls so call sites need no
    // trait imports
    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// An ordered chain of points, closed or open.
#[derive(Debug, Clone)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

impl Polyline {
    pub fn closed(points: Vec<Vec2>) -> Self {
        Polyline {
            points,
            closed: true,
        }
    }

    pub fn open(points: Vec<Vec2>) -> Self {
        Polyline {
            points,
            closed: false,
        }
    }

    /// Signed shoelace area (positive for counterclockwise orientation).
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        s += p.cross(q);
    }
    0.5 * s
}

/// Distance from point `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.sub(a).norm();
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.sub(a.add(ab.scale(t))).norm()
}

/// Even-odd point-in-polygon test (polygon given by its vertex loop).
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < xint {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Clip a polygon against the half-plane `y >= c` (Sutherland-Hodgman).
pub fn clip_polygon_above(poly: &[Vec2], c: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 4);
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let nxt = poly[(i + 1) % n];
        let cur_in = cur.y >= c;
        let nxt_in = nxt.y >= c;
        if cur_in {
            out.push(cur);
        }
        if cur_in != nxt_in {
            let t = (c - cur.y) / (nxt.y - cur.y);
            out.push(Vec2::new(cur.x + t * (nxt.x - cur.x), c));
        }
    }
    out
}

/// Do segments a-b and c-d properly intersect?
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = b.sub(a).cross(c.sub(a));
    let d2 = b.sub(a).cross(d.sub(a));
    let d3 = d.sub(c).cross(a.sub(c));
    let d4 = d.sub(c).cross(b.sub(c));
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}
