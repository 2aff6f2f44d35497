//! Planar primitives used to describe the example domains before rasterization.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Rect::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Strict (open) containment.
    pub fn contains_open(&self, p: Point) -> bool {
        p.x > self.x0 && p.x < self.x1 && p.y > self.y0 && p.y < self.y1
    }

    pub fn contains_closed(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Grow by `d` on every side.
    pub fn inflate(&self, d: f64) -> Rect {
        Rect::new(self.x0 - d, self.y0 - d, self.x1 + d, self.y1 + d)
    }
}

/// A closed segment. Obstacles are segments removed from the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn horizontal(x0: f64, x1: f64, y: f64) -> Self {
        Segment::new(Point::new(x0.min(x1), y), Point::new(x0.max(x1), y))
    }

    pub fn vertical(x: f64, y0: f64, y1: f64) -> Self {
        Segment::new(Point::new(x, y0.min(y1)), Point::new(x, y0.max(y1)))
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }

    pub fn is_axis_aligned(&self) -> bool {
        self.a.x == self.b.x || self.a.y == self.b.y
    }

    /// Chebyshev distance from `p` to an axis-aligned segment, Euclidean otherwise.
    pub fn distance(&self, p: Point) -> f64 {
        if self.is_axis_aligned() {
            let (xl, xh) = (self.a.x.min(self.b.x), self.a.x.max(self.b.x));
            let (yl, yh) = (self.a.y.min(self.b.y), self.a.y.max(self.b.y));
            let dx = (xl - p.x).max(p.x - xh).max(0.0);
            let dy = (yl - p.y).max(p.y - yh).max(0.0);
            dx.max(dy)
        } else {
            let (vx, vy) = (self.b.x - self.a.x, self.b.y - self.a.y);
            let len2 = vx * vx + vy * vy;
            let t = (((p.x - self.a.x) * vx + (p.y - self.a.y) * vy) / len2).clamp(0.0, 1.0);
            Point::new(self.a.x + t * vx, self.a.y + t * vy).dist(&p)
        }
    }
}

/// Open planar shapes whose union forms the base of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Rect(Rect),
    Disk { cx: f64, cy: f64, r: f64 },
    /// `{|z| < r, Im z > 0}`
    UpperHalfDisk { r: f64 },
    Annulus { cx: f64, cy: f64, r_in: f64, r_out: f64 },
}

impl Shape {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Shape::Rect(r) => r.contains_open(p),
            Shape::Disk { cx, cy, r } => (p.x - cx).hypot(p.y - cy) < r,
            Shape::UpperHalfDisk { r } => p.norm() < r && p.y > 0.0,
            Shape::Annulus { cx, cy, r_in, r_out } => {
                let d = (p.x - cx).hypot(p.y - cy);
                d > r_in && d < r_out
            }
        }
    }
}

/// Which sides of the window stand for truncated, unbounded directions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSides {
    pub left: bool,
    pub right: bool,
    pub bottom: bool,
    pub top: bool,
}

impl OpenSides {
    pub const NONE: OpenSides = OpenSides { left: false, right: false, bottom: false, top: false };

    pub fn any(&self) -> bool {
        self.left || self.right || self.bottom || self.top
    }
}

/// Exact geometry of a (truncated) example domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub parts: Vec<Shape>,
    pub holes: Vec<Shape>,
    pub obstacles: Vec<Segment>,
    /// Areas where dropped members of an infinite family would live.
    pub residue: Vec<Rect>,
    pub open_sides: OpenSides,
    /// Smallest gap between features that rasterization must resolve.
    pub min_gap: f64,
}

impl Geometry {
    pub fn new(parts: Vec<Shape>) -> Self {
        Geometry {
            parts,
            holes: Vec::new(),
            obstacles: Vec::new(),
            residue: Vec::new(),
            open_sides: OpenSides::NONE,
            min_gap: f64::INFINITY,
        }
    }

    /// Membership of the exact (non-dilated) open set.
    pub fn contains(&self, p: Point) -> bool {
        self.parts.iter().any(|s| s.contains(p))
            && !self.holes.iter().any(|s| s.contains(p))
            && !self.obstacles.iter().any(|s| s.distance(p) == 0.0)
    }

    /// Membership after dilating obstacles to `half_width` (Chebyshev for axis-aligned ones).
    pub fn contains_dilated(&self, p: Point, half_width: f64) -> bool {
        self.parts.iter().any(|s| s.contains(p))
            && !self.holes.iter().any(|s| s.contains(p))
            && !self.obstacles.iter().any(|s| s.distance(p) <= half_width)
    }

    pub fn in_residue(&self, p: Point) -> bool {
        self.residue.iter().any(|r| r.contains_open(p))
    }
}
