//! Rasterized planar domains.
//!
//! Cells sit on a regular lattice covering the window; cell `(i, j)` has center
//! `(x0 + (i + 1/2) h, y0 + (j + 1/2) h)` and index `j * nx + i`. Connectivity is
//! 4-neighbour. Distances are always Euclidean between cell centers.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::DomainSpec;
use crate::error::{Error, Result};
use crate::geometry::{OpenSides, Point, Rect};

pub type Cell = usize;

/// Sorted, duplicate-free set of cell indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    cells: Vec<Cell>,
}

impl Region {
    pub fn new(mut cells: Vec<Cell>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        Region { cells }
    }

    /// Caller guarantees `cells` is sorted and unique.
    pub fn from_sorted(cells: Vec<Cell>) -> Self {
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        Region { cells }
    }

    pub fn single(c: Cell) -> Self {
        Region { cells: vec![c] }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.binary_search(&c).is_ok()
    }

    pub fn min_cell(&self) -> Option<Cell> {
        self.cells.first().copied()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut j = 0;
        for &c in &self.cells {
            while j < other.cells.len() && other.cells[j] < c {
                j += 1;
            }
            if j == other.cells.len() || other.cells[j] != c {
                return false;
            }
        }
        true
    }

    pub fn intersects(&self, other: &Region) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.cells.len() && j < other.cells.len() {
            match self.cells[i].cmp(&other.cells[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn intersection(&self, other: &Region) -> Region {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.cells.len() && j < other.cells.len() {
            match self.cells[i].cmp(&other.cells[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.cells[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Region { cells: out }
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut v = self.cells.clone();
        v.extend_from_slice(&other.cells);
        Region::new(v)
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region { cells: self.cells.iter().copied().filter(|c| !other.contains(*c)).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().copied()
    }
}

impl FromIterator<Cell> for Region {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        Region::new(iter.into_iter().collect())
    }
}

/// Fraction of the window extent treated as the neighbourhood of an open side.
pub const HORIZON_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Direction offsets in the order left, right, down, up.
const DIRS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

#[derive(Debug, Clone)]
pub struct GridDomain {
    pub name: String,
    pub spacing: f64,
    pub window: Rect,
    pub nx: usize,
    pub ny: usize,
    pub open_sides: OpenSides,
    pub truncation: u32,
    inside: Vec<bool>,
    residue: Vec<bool>,
}

/// Rasterize a domain spec at the given spacing.
pub fn rasterize(spec: &DomainSpec, spacing: f64) -> Result<GridDomain> {
    if !(spacing > 0.0) {
        return Err(Error::Invalid(format!("spacing must be positive, got {spacing}")));
    }
    let geom = spec.geometry()?;
    if geom.min_gap < 3.0 * spacing {
        return Err(Error::SpacingTooCoarse { spacing, gap: geom.min_gap });
    }
    let window = spec.window_rect();
    let nx = (window.width() / spacing + 1e-9).floor() as usize;
    let ny = (window.height() / spacing + 1e-9).floor() as usize;
    if nx == 0 || ny == 0 {
        return Err(Error::SpacingTooCoarse { spacing, gap: window.width().min(window.height()) });
    }
    let mut inside = vec![false; nx * ny];
    let mut residue = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let p = Point::new(
                window.x0 + (i as f64 + 0.5) * spacing,
                window.y0 + (j as f64 + 0.5) * spacing,
            );
            // closed Chebyshev band of half-width h/2 always covers a full row or column
            inside[j * nx + i] = geom.contains_dilated(p, spacing / 2.0);
            residue[j * nx + i] = geom.in_residue(p);
        }
    }
    Ok(GridDomain {
        name: spec.name.clone(),
        spacing,
        window,
        nx,
        ny,
        open_sides: geom.open_sides,
        truncation: spec.truncation,
        inside,
        residue,
    })
}

impl GridDomain {
    /// Build directly from a mask (row-major, `ny` rows of `nx`).
    pub fn from_mask(
        name: &str,
        spacing: f64,
        origin: Point,
        nx: usize,
        ny: usize,
        inside: Vec<bool>,
    ) -> Self {
        assert_eq!(inside.len(), nx * ny);
        GridDomain {
            name: name.to_string(),
            spacing,
            window: Rect::new(
                origin.x,
                origin.y,
                origin.x + nx as f64 * spacing,
                origin.y + ny as f64 * spacing,
            ),
            nx,
            ny,
            open_sides: OpenSides::NONE,
            truncation: 1,
            inside,
            residue: vec![false; nx * ny],
        }
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn ij(&self, c: Cell) -> (usize, usize) {
        (c % self.nx, c / self.nx)
    }

    pub fn index(&self, i: usize, j: usize) -> Cell {
        j * self.nx + i
    }

    pub fn center(&self, c: Cell) -> Point {
        let (i, j) = self.ij(c);
        Point::new(
            self.window.x0 + (i as f64 + 0.5) * self.spacing,
            self.window.y0 + (j as f64 + 0.5) * self.spacing,
        )
    }

    pub fn dist(&self, a: Cell, b: Cell) -> f64 {
        self.center(a).dist(&self.center(b))
    }

    /// Lattice cell whose square contains `p`.
    pub fn cell_at(&self, p: Point) -> Option<Cell> {
        let fx = (p.x - self.window.x0) / self.spacing;
        let fy = (p.y - self.window.y0) / self.spacing;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        (i < self.nx && j < self.ny).then(|| self.index(i, j))
    }

    /// Inside cell nearest to `p` (searching outward ring by ring).
    pub fn nearest_inside(&self, p: Point) -> Option<Cell> {
        let fx = ((p.x - self.window.x0) / self.spacing - 0.5).round() as i64;
        let fy = ((p.y - self.window.y0) / self.spacing - 0.5).round() as i64;
        let maxr = self.nx.max(self.ny) as i64;
        for r in 0..=maxr {
            let mut best: Option<(f64, Cell)> = None;
            for dj in -r..=r {
                for di in -r..=r {
                    if di.abs() != r && dj.abs() != r {
                        continue;
                    }
                    if let Some(c) = self.offset_ij(fx + di, fy + dj) {
                        if self.inside[c] {
                            let d = self.center(c).dist(&p);
                            if best.map_or(true, |(bd, bc)| d < bd || (d == bd && c < bc)) {
                                best = Some((d, c));
                            }
                        }
                    }
                }
            }
            if let Some((_, c)) = best {
                return Some(c);
            }
        }
        None
    }

    fn offset_ij(&self, i: i64, j: i64) -> Option<Cell> {
        (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny)
            .then(|| self.index(i as usize, j as usize))
    }

    pub fn is_inside(&self, c: Cell) -> bool {
        self.inside[c]
    }

    pub fn is_residue(&self, c: Cell) -> bool {
        self.residue[c]
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn inside_cells(&self) -> Region {
        Region::from_sorted((0..self.num_cells()).filter(|&c| self.inside[c]).collect())
    }

    /// Lattice neighbours (inside or not), left/right/down/up.
    pub fn lattice_neighbors(&self, c: Cell) -> [Option<Cell>; 4] {
        let (i, j) = self.ij(c);
        DIRS.map(|(di, dj)| self.offset_ij(i as i64 + di, j as i64 + dj))
    }

    /// Inside 4-neighbours.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        self.lattice_neighbors(c).into_iter().flatten().filter(move |&n| self.inside[n])
    }

    /// Whether `c` sits on the outermost row/column of an open (truncated) side.
    pub fn touches_frame(&self, c: Cell) -> bool {
        let (i, j) = self.ij(c);
        let o = self.open_sides;
        (o.left && i == 0)
            || (o.right && i + 1 == self.nx)
            || (o.bottom && j == 0)
            || (o.top && j + 1 == self.ny)
    }

    /// Euclidean distance from the cell center to the nearest open side.
    pub fn frame_distance(&self, c: Cell) -> f64 {
        let p = self.center(c);
        let o = self.open_sides;
        let w = self.window;
        let mut d = f64::INFINITY;
        if o.left {
            d = d.min(p.x - w.x0);
        }
        if o.right {
            d = d.min(w.x1 - p.x);
        }
        if o.bottom {
            d = d.min(p.y - w.y0);
        }
        if o.top {
            d = d.min(w.y1 - p.y);
        }
        d
    }

    /// Whether `c` lies within the horizon of an open side, i.e. stands in for a
    /// neighbourhood of infinity. The horizon is a fixed fraction of the window
    /// extent along the side's axis.
    pub fn near_infinity(&self, c: Cell) -> bool {
        let p = self.center(c);
        let o = self.open_sides;
        let w = self.window;
        let hx = HORIZON_FRACTION * w.width();
        let hy = HORIZON_FRACTION * w.height();
        (o.left && p.x - w.x0 < hx)
            || (o.right && w.x1 - p.x < hx)
            || (o.bottom && p.y - w.y0 < hy)
            || (o.top && w.y1 - p.y < hy)
    }

    /// Distance from every inside cell center to the rasterized boundary
    /// (nearest-seed propagation over 8-neighbours); `+∞` off the domain or
    /// when there is no boundary.
    pub fn boundary_distance(&self) -> Vec<f64> {
        let n = self.num_cells();
        let mut best = vec![f64::INFINITY; n];
        let mut seed = vec![Point::new(0.0, 0.0); n];
        let mut heap = std::collections::BinaryHeap::new();
        for c in 0..n {
            if let Some(q) = self.edge_points(c).into_iter().next() {
                best[c] = self.spacing / 2.0;
                seed[c] = q;
                heap.push(std::cmp::Reverse((OrdF64(best[c]), c)));
            }
        }
        while let Some(std::cmp::Reverse((OrdF64(v), c))) = heap.pop() {
            if v > best[c] {
                continue;
            }
            let (i, j) = self.ij(c);
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let Some(m) = self.offset_ij(i as i64 + di, j as i64 + dj) else { continue };
                    if !self.inside[m] {
                        continue;
                    }
                    let d = self.center(m).dist(&seed[c]);
                    if d < best[m] {
                        best[m] = d;
                        seed[m] = seed[c];
                        heap.push(std::cmp::Reverse((OrdF64(d), m)));
                    }
                }
            }
        }
        best
    }

    /// Points of the rasterized boundary adjacent to `c`: midpoints of the
    /// edges shared with non-inside cells or with the window on a closed side.
    pub fn edge_points(&self, c: Cell) -> Vec<Point> {
        if !self.inside[c] {
            return Vec::new();
        }
        let p = self.center(c);
        let h = self.spacing / 2.0;
        let (i, j) = self.ij(c);
        let o = self.open_sides;
        let mut out = Vec::new();
        for (k, n) in self.lattice_neighbors(c).into_iter().enumerate() {
            let boundary = match n {
                Some(n) => !self.inside[n],
                None => match k {
                    0 => !o.left && i == 0,
                    1 => !o.right && i + 1 == self.nx,
                    2 => !o.bottom && j == 0,
                    _ => !o.top && j + 1 == self.ny,
                },
            };
            if boundary {
                let (dx, dy) = DIRS[k];
                out.push(Point::new(p.x + dx as f64 * h, p.y + dy as f64 * h));
            }
        }
        out
    }

    pub fn is_edge_cell(&self, c: Cell) -> bool {
        !self.edge_points(c).is_empty()
    }

    pub fn mask(&self, region: &Region) -> Vec<bool> {
        let mut m = vec![false; self.num_cells()];
        for c in region.iter() {
            m[c] = true;
        }
        m
    }

    /// Cells of `region` with an inside 4-neighbour outside `region`
    /// (the relative boundary `Omega ∩ ∂E` at grid scale).
    pub fn relative_boundary(&self, region: &Region) -> Region {
        let m = self.mask(region);
        Region::from_sorted(
            region.iter().filter(|&c| self.neighbors(c).any(|n| !m[n])).collect(),
        )
    }

    /// One-cell dilation of `region` within inside cells.
    pub fn dilate(&self, region: &Region) -> Region {
        let mut v: Vec<Cell> = region.cells().to_vec();
        for c in region.iter() {
            v.extend(self.neighbors(c));
        }
        Region::new(v)
    }

    /// One-cell erosion: cells whose inside-neighbours all lie in `region` and
    /// which are not on the domain boundary.
    pub fn erode(&self, region: &Region) -> Region {
        let m = self.mask(region);
        Region::from_sorted(
            region
                .iter()
                .filter(|&c| {
                    self.lattice_neighbors(c).into_iter().all(|n| n.map_or(false, |n| m[n]))
                })
                .collect(),
        )
    }

    pub fn centers(&self, region: &Region) -> Vec<Point> {
        region.iter().map(|c| self.center(c)).collect()
    }

    /// Plain-text bitmask export (PBM P1) with a commented header.
    pub fn to_pbm(&self) -> String {
        let mut s = String::new();
        let w = self.window;
        let _ = writeln!(s, "P1");
        let _ = writeln!(s, "# domain {}", self.name);
        let _ = writeln!(s, "# spacing {}", self.spacing);
        let _ = writeln!(s, "# window {} {} {} {}", w.x0, w.y0, w.x1, w.y1);
        let _ = writeln!(s, "# truncation {}", self.truncation);
        let _ = writeln!(s, "{} {}", self.nx, self.ny);
        for j in (0..self.ny).rev() {
            let row: Vec<&str> = (0..self.nx)
                .map(|i| if self.inside[self.index(i, j)] { "1" } else { "0" })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

/// Partition `region` into maximal 4-connected pieces, ordered by minimum cell.
pub fn components(domain: &GridDomain, region: &Region) -> Vec<Region> {
    let mut in_region = domain.mask(region);
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for seed in region.iter() {
        if !in_region[seed] {
            continue;
        }
        in_region[seed] = false;
        queue.push_back(seed);
        let mut piece = Vec::new();
        while let Some(c) = queue.pop_front() {
            piece.push(c);
            for n in domain.neighbors(c) {
                if in_region[n] {
                    in_region[n] = false;
                    queue.push_back(n);
                }
            }
        }
        out.push(Region::new(piece));
    }
    out
}

/// Component of `region` containing `cell`, if any.
pub fn component_of(domain: &GridDomain, region: &Region, cell: Cell) -> Option<Region> {
    if !region.contains(cell) {
        return None;
    }
    let mut in_region = domain.mask(region);
    in_region[cell] = false;
    let mut queue = VecDeque::from([cell]);
    let mut piece = Vec::new();
    while let Some(c) = queue.pop_front() {
        piece.push(c);
        for n in domain.neighbors(c) {
            if in_region[n] {
                in_region[n] = false;
                queue.push_back(n);
            }
        }
    }
    Some(Region::new(piece))
}

/// Inside cells whose centers lie within `radius` of `center`.
pub fn ball(domain: &GridDomain, center: Point, radius: f64) -> Region {
    let h = domain.spacing;
    let w = domain.window;
    let i0 = (((center.x - radius - w.x0) / h - 0.5).floor().max(0.0)) as usize;
    let j0 = (((center.y - radius - w.y0) / h - 0.5).floor().max(0.0)) as usize;
    let i1 = ((((center.x + radius - w.x0) / h - 0.5).ceil()).max(-1.0) as i64)
        .min(domain.nx as i64 - 1);
    let j1 = ((((center.y + radius - w.y0) / h - 0.5).ceil()).max(-1.0) as i64)
        .min(domain.ny as i64 - 1);
    let mut cells = Vec::new();
    if i1 < 0 || j1 < 0 {
        return Region::default();
    }
    for j in j0..=(j1 as usize) {
        for i in i0..=(i1 as usize) {
            let c = domain.index(i, j);
            if domain.is_inside(c) && domain.center(c).dist(&center) <= radius {
                cells.push(c);
            }
        }
    }
    Region::from_sorted(cells)
}

/// Diameter of a finite point set: convex hull, then exact maximum over hull pairs.
pub fn point_diameter(points: &[Point]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    if points.len() <= 64 {
        return brute_diameter(points);
    }
    let hull = convex_hull(points);
    brute_diameter(&hull)
}

fn brute_diameter(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.max(points[i].dist(&points[j]));
        }
    }
    best
}

/// Andrew's monotone chain.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Point, a: &Point, b: &Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Maximum Euclidean distance between cell centers of a nonempty region.
pub fn diameter(domain: &GridDomain, region: &Region) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(point_diameter(&domain.centers(region)))
}

/// Inverse stereographic projection of the plane onto the unit sphere.
pub fn stereographic_project(p: Point) -> [f64; 3] {
    let r2 = p.x * p.x + p.y * p.y;
    if !r2.is_finite() {
        return [0.0, 0.0, 1.0];
    }
    let d = r2 + 1.0;
    [2.0 * p.x / d, 2.0 * p.y / d, (r2 - 1.0) / d]
}

pub fn chordal_distance(a: Point, b: Point) -> f64 {
    let (u, v) = (stereographic_project(a), stereographic_project(b));
    ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt()
}

/// Diameter of the projected point set in the chordal metric.
pub fn chordal_diameter(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.max(chordal_distance(points[i], points[j]));
        }
    }
    best
}

/// A point of the boundary together with the inside cells near it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAnchor {
    pub point: Point,
    pub incident_cells: Region,
}

/// Incidence radius for boundary anchors, in units of the spacing.
pub const INCIDENCE_RADIUS: f64 = 2.0;

impl BoundaryAnchor {
    /// Incident cells are inside, non-residue cells within `2h` of `point`.
    pub fn new(domain: &GridDomain, point: Point) -> Result<Self> {
        let h = domain.spacing;
        if let Some(c) = domain.cell_at(point) {
            if domain.is_inside(c) && domain.center(c).dist(&point) < 1e-12 * h.max(1.0) {
                return Err(Error::Invalid("anchor coincides with an inside cell center".into()));
            }
        }
        let incident = ball(domain, point, INCIDENCE_RADIUS * h)
            .iter()
            .filter(|&c| !domain.is_residue(c))
            .collect();
        Ok(BoundaryAnchor { point, incident_cells: incident })
    }

    pub fn is_isolated(&self) -> bool {
        self.incident_cells.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::spec;

    fn unit_square(h: f64) -> GridDomain {
        rasterize(&spec("rectangle", &[], None).unwrap(), h).unwrap()
    }

    #[test]
    fn full_square_has_64_cells_one_component() {
        let d = unit_square(1.0 / 8.0);
        assert_eq!(d.inside_count(), 64);
        assert_eq!(components(&d, &d.inside_cells()).len(), 1);
    }

    #[test]
    fn empty_region_has_no_components() {
        let d = unit_square(0.25);
        assert!(components(&d, &Region::default()).is_empty());
    }

    #[test]
    fn diameter_cases() {
        let d = unit_square(1.0 / 8.0);
        let all = d.inside_cells();
        let expected = 2f64.sqrt() * 7.0 / 8.0;
        assert!((diameter(&d, &all).unwrap() - expected).abs() < 1e-12);
        assert_eq!(diameter(&d, &Region::single(3)).unwrap(), 0.0);
        assert!(matches!(diameter(&d, &Region::default()), Err(Error::EmptyRegion)));
        let d4 = unit_square(0.25);
        let a = d4.cell_at(Point::new(0.25, 0.25)).unwrap();
        let a = d4.nearest_inside(d4.center(a)).unwrap();
        let two = Region::new(vec![
            d4.cell_at(Point::new(0.2, 0.2)).unwrap(),
            d4.cell_at(Point::new(0.7, 0.2)).unwrap(),
        ]);
        assert!(d4.center(a).x > 0.0);
        assert!((diameter(&d4, &two).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn harmonic_comb_teeth_positions() {
        let s = spec("harmonic_comb", &[], Some(8)).unwrap();
        let d = rasterize(&s, 1.0 / 256.0).unwrap();
        for n in 1..=8 {
            let x = 1.0 / (n as f64 + 1.0);
            let c = d.nearest_inside(Point::new(x, 0.25)).unwrap();
            // the nearest inside cell sits beside the tooth, not on it
            assert!((d.center(c).x - x).abs() >= d.spacing / 2.0);
            let top = d.cell_at(Point::new(x, 0.75)).unwrap();
            assert!(d.is_inside(top));
        }
    }

    #[test]
    fn comb_strips_left_of_half() {
        let s = spec("harmonic_comb", &[("residue", 0.0)], Some(4)).unwrap();
        let d = rasterize(&s, 1.0 / 128.0).unwrap();
        let region: Region = d
            .inside_cells()
            .iter()
            .filter(|&c| {
                let p = d.center(c);
                p.x < 0.5 && p.y < 0.5
            })
            .collect();
        assert_eq!(components(&d, &region).len(), 4);
    }

    #[test]
    fn barrier_gate_removes_expected_cells() {
        let s = spec("barrier_gate", &[("h", 0.5), ("k_max", 1.0)], None).unwrap();
        let d = rasterize(&s, 1.0 / 32.0).unwrap();
        for p in [(0.5, 0.0), (0.5, 0.2), (1.0, 0.25), (1.9, -0.25), (1.5, 0.0)] {
            let c = d.cell_at(Point::new(p.0 + 1e-9, p.1 + 1e-9)).unwrap();
            assert!(!d.is_inside(c), "{p:?} should be removed");
        }
        assert!(d.is_inside(d.cell_at(Point::new(0.0, 0.01)).unwrap()));
    }

    #[test]
    fn slit_ball_splits() {
        let d = rasterize(&spec("slit_disk", &[], None).unwrap(), 1.0 / 64.0).unwrap();
        let b = ball(&d, Point::new(0.5, 0.0), 0.1);
        assert_eq!(components(&d, &b).len(), 2);
    }

    #[test]
    fn degenerate_ball() {
        let d = unit_square(0.25);
        let b = ball(&d, Point::new(0.25, 0.25), 0.1);
        assert!(b.is_empty());
    }

    #[test]
    fn coarse_spacing_rejected() {
        let s = spec("harmonic_comb", &[], Some(8)).unwrap();
        assert!(matches!(rasterize(&s, 0.01), Err(Error::SpacingTooCoarse { .. })));
    }

    #[test]
    fn stereographic_poles() {
        assert_eq!(stereographic_project(Point::new(0.0, 0.0)), [0.0, 0.0, -1.0]);
        let far = stereographic_project(Point::new(1e9, 0.0));
        assert!((far[2] - 1.0).abs() < 1e-9);
        // chordal diameter of [r, 1] x {0}: both endpoints lie in the xz-plane
        let r = 0.01;
        let pts: Vec<Point> = (0..=100).map(|k| Point::new(r + (1.0 - r) * k as f64 / 100.0, 0.0)).collect();
        let ends = chordal_distance(Point::new(r, 0.0), Point::new(1.0, 0.0));
        assert!((chordal_diameter(&pts) - ends).abs() < 1e-12);
        // |phi(1) - phi(r)| evaluated by hand: phi(1) = (1, 0, 0)
        let pr = stereographic_project(Point::new(r, 0.0));
        let direct = ((1.0 - pr[0]).powi(2) + pr[2].powi(2)).sqrt();
        assert!((ends - direct).abs() < 1e-15);
    }

    #[test]
    fn boundary_distance_in_square() {
        let d = unit_square(1.0 / 16.0);
        let bd = d.boundary_distance();
        let c = d.cell_at(Point::new(0.3, 0.45)).unwrap();
        assert!((bd[c] - 0.28125).abs() < 1e-12);
        let e = d.cell_at(Point::new(0.01, 0.5)).unwrap();
        assert!((bd[e] - 1.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn pbm_header() {
        let d = unit_square(0.25);
        let s = d.to_pbm();
        assert!(s.starts_with("P1\n# domain rectangle\n# spacing 0.25"));
        assert!(s.contains("\n4 4\n1 1 1 1\n"));
    }
}
