//! Analytic homeomorphisms, their action on grid domains, and distortion envelopes.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{point_diameter, Cell, GridDomain, Region};
use crate::prime_ends::{divides, impression, validate_chain, Chain, ChainFlags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    ZSquared,
    AngleDoubling,
    Inversion,
    FoldXy,
    Identity,
    Affine,
}

impl MapKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "z_squared" => MapKind::ZSquared,
            "angle_doubling" => MapKind::AngleDoubling,
            "inversion" => MapKind::Inversion,
            "fold_xy" => MapKind::FoldXy,
            "identity" => MapKind::Identity,
            "affine" => MapKind::Affine,
            other => return Err(Error::Invalid(format!("unknown map `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MapKind::ZSquared => "z_squared",
            MapKind::AngleDoubling => "angle_doubling",
            MapKind::Inversion => "inversion",
            MapKind::FoldXy => "fold_xy",
            MapKind::Identity => "identity",
            MapKind::Affine => "affine",
        }
    }
}

/// A named map with numeric parameters. `affine` reads `a11 a12 a21 a22 tx ty`
/// (identity by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub kind: MapKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl MapSpec {
    pub fn new(kind: MapKind) -> Self {
        MapSpec { kind, params: BTreeMap::new() }
    }

    pub fn named(name: &str) -> Result<Self> {
        Ok(MapSpec::new(MapKind::parse(name)?))
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), v);
        self
    }

    fn p(&self, key: &str, d: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(d)
    }

    fn affine(&self) -> [f64; 6] {
        [self.p("a11", 1.0), self.p("a12", 0.0), self.p("a21", 0.0), self.p("a22", 1.0), self.p("tx", 0.0), self.p("ty", 0.0)]
    }

    fn violation(&self, p: Point) -> Error {
        Error::DomainViolation { map: self.kind.name().to_string(), x: p.x, y: p.y }
    }

    pub fn forward(&self, p: Point) -> Result<Point> {
        let (x, y) = (p.x, p.y);
        Ok(match self.kind {
            MapKind::ZSquared => Point::new(x * x - y * y, 2.0 * x * y),
            MapKind::AngleDoubling => {
                let r = p.norm();
                let t = 2.0 * y.atan2(x);
                Point::new(r * t.cos(), r * t.sin())
            }
            MapKind::Inversion => {
                let r2 = x * x + y * y;
                if r2 == 0.0 {
                    return Err(self.violation(p));
                }
                Point::new(x / r2, -y / r2)
            }
            MapKind::FoldXy => Point::new(x * y, y),
            MapKind::Identity => p,
            MapKind::Affine => {
                let [a, b, c, d, tx, ty] = self.affine();
                Point::new(a * x + b * y + tx, c * x + d * y + ty)
            }
        })
    }

    /// Inverse onto the declared source: the upper half-plane branch for
    /// `z_squared` and `angle_doubling`.
    pub fn inverse(&self, q: Point) -> Result<Point> {
        let (u, v) = (q.x, q.y);
        Ok(match self.kind {
            MapKind::ZSquared => {
                let r = q.norm();
                let a = ((r + u) / 2.0).max(0.0).sqrt();
                let b = ((r - u) / 2.0).max(0.0).sqrt();
                if v >= 0.0 {
                    Point::new(a, b)
                } else {
                    Point::new(-a, b)
                }
            }
            MapKind::AngleDoubling => {
                let r = q.norm();
                let mut t = v.atan2(u);
                if t < 0.0 {
                    t += 2.0 * std::f64::consts::PI;
                }
                Point::new(r * (t / 2.0).cos(), r * (t / 2.0).sin())
            }
            MapKind::Inversion => {
                let r2 = u * u + v * v;
                if r2 == 0.0 {
                    return Err(self.violation(q));
                }
                Point::new(u / r2, -v / r2)
            }
            MapKind::FoldXy => {
                if v == 0.0 {
                    return Err(self.violation(q));
                }
                Point::new(u / v, v)
            }
            MapKind::Identity => q,
            MapKind::Affine => {
                let [a, b, c, d, tx, ty] = self.affine();
                let det = a * d - b * c;
                if det.abs() < 1e-300 {
                    return Err(Error::Degenerate("affine map is singular".into()));
                }
                let (x, y) = (u - tx, v - ty);
                Point::new((d * x - b * y) / det, (-c * x + a * y) / det)
            }
        })
    }
}

/// Image domain with, for every image cell, the source cell it came from.
#[derive(Debug, Clone)]
pub struct MappedDomain {
    pub map: MapSpec,
    pub image: GridDomain,
    pub correspondence: Vec<Option<Cell>>,
}

impl MappedDomain {
    /// Image cells whose source cell lies in `region`.
    pub fn push_region(&self, region: &Region) -> Region {
        Region::from_sorted(
            (0..self.correspondence.len())
                .filter(|&q| self.correspondence[q].is_some_and(|c| region.contains(c)))
                .collect(),
        )
    }
}

/// Rasterize the image of `domain` under `map` at `target_spacing`.
///
/// An image cell is inside when its center pulls back into an inside source
/// cell. Neighbouring image cells whose pullbacks jump apart (the inverse is
/// discontinuous between them, as across the slit of `z²`) are cut by
/// dropping the lower-indexed cell.
pub fn apply_map(map: &MapSpec, domain: &GridDomain, target_spacing: f64) -> Result<MappedDomain> {
    if !(target_spacing > 0.0) {
        return Err(Error::Invalid("target spacing must be positive".into()));
    }
    let cells = domain.inside_cells();
    if cells.is_empty() {
        return Err(Error::InteriorEmpty(0));
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in cells.iter() {
        let q = map.forward(domain.center(c))?;
        x0 = x0.min(q.x);
        y0 = y0.min(q.y);
        x1 = x1.max(q.x);
        y1 = y1.max(q.y);
    }
    let pad = 2.0 * target_spacing;
    // half-cell offset keeps image centers on source centers when the map is an isometry
    let origin = Point::new(x0 - pad - target_spacing / 2.0, y0 - pad - target_spacing / 2.0);
    let nx = ((x1 - x0 + 2.0 * pad) / target_spacing).ceil() as usize + 1;
    let ny = ((y1 - y0 + 2.0 * pad) / target_spacing).ceil() as usize + 1;
    let probe = GridDomain::from_mask("probe", target_spacing, origin, nx, ny, vec![false; nx * ny]);
    let mut corr: Vec<Option<Cell>> = (0..nx * ny)
        .map(|q| {
            let p = map.inverse(probe.center(q)).ok()?;
            domain.cell_at(p).filter(|&c| domain.is_inside(c))
        })
        .collect();
    let h_src = domain.spacing;
    let torn = |a: Point, b: Point| -> bool {
        let (Ok(mut ga), Ok(mut gb)) = (map.inverse(a), map.inverse(b)) else { return true };
        let d = ga.dist(&gb);
        if d <= 3.0 * h_src {
            return false;
        }
        let (mut a, mut b) = (a, b);
        for _ in 0..5 {
            let m = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
            let Ok(gm) = map.inverse(m) else { return true };
            if ga.dist(&gm) >= gm.dist(&gb) {
                b = m;
                gb = gm;
            } else {
                a = m;
                ga = gm;
            }
        }
        ga.dist(&gb) > 0.5 * d
    };
    let mut cut = vec![false; nx * ny];
    for q in 0..nx * ny {
        if corr[q].is_none() {
            continue;
        }
        let [_, right, _, up] = probe.lattice_neighbors(q);
        for n in [right, up].into_iter().flatten() {
            if corr[n].is_some() && torn(probe.center(q), probe.center(n)) {
                cut[q] = true;
            }
        }
    }
    for q in 0..nx * ny {
        if cut[q] {
            corr[q] = None;
        }
    }
    let mask = corr.iter().map(Option::is_some).collect();
    let image = GridDomain::from_mask(
        &format!("{}({})", map.kind.name(), domain.name),
        target_spacing,
        origin,
        nx,
        ny,
        mask,
    );
    Ok(MappedDomain { map: map.clone(), image, correspondence: corr })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    Intersecting,
    Disjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumPair {
    pub e: Region,
    pub f: Region,
    pub intersecting: bool,
    pub diam_e: f64,
    pub diam_f: f64,
    /// Built to straddle an obstacle rather than drawn at random.
    pub adversarial: bool,
}

impl ContinuumPair {
    pub fn new(domain: &GridDomain, e: Region, f: Region, adversarial: bool) -> Self {
        ContinuumPair {
            intersecting: e.intersects(&f),
            diam_e: point_diameter(&domain.centers(&e)),
            diam_f: point_diameter(&domain.centers(&f)),
            e,
            f,
            adversarial,
        }
    }
}

fn bfs_path(domain: &GridDomain, a: Cell, b: Cell, blocked: &[bool]) -> Option<Vec<Cell>> {
    let mut prev = vec![usize::MAX; domain.num_cells()];
    prev[a] = a;
    let mut q = VecDeque::from([a]);
    while let Some(c) = q.pop_front() {
        if c == b {
            let mut path = vec![b];
            let mut cur = b;
            while cur != a {
                cur = prev[cur];
                path.push(cur);
            }
            return Some(path);
        }
        for n in domain.neighbors(c) {
            if prev[n] == usize::MAX && !blocked[n] {
                prev[n] = c;
                q.push_back(n);
            }
        }
    }
    None
}

/// Union of shortest paths from `start` to random inside cells roughly `size` away.
fn grow(domain: &GridDomain, rng: &mut ChaCha8Rng, start: Cell, size: f64, blocked: &[bool]) -> Option<Region> {
    let p = domain.center(start);
    let mut cells = vec![start];
    let branches = rng.gen_range(1..=2);
    for _ in 0..branches {
        let mut target = None;
        for _ in 0..40 {
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let rad = size * rng.gen_range(0.7..1.0);
            let q = Point::new(p.x + rad * ang.cos(), p.y + rad * ang.sin());
            if let Some(c) = domain.cell_at(q).filter(|&c| domain.is_inside(c) && !blocked[c]) {
                target = Some(c);
                break;
            }
        }
        if let Some(path) = target.and_then(|t| bfs_path(domain, start, t, blocked)) {
            cells.extend(path);
        }
    }
    (cells.len() > 1).then(|| Region::new(cells))
}

/// Random connected pairs with diameters spread log-uniformly over `scale`.
/// Every fourth pair is adversarial: `E` is a shortest path joining two cells
/// that face each other across an obstacle. Pairs with a diameter below `4h`
/// are regenerated.
pub fn sample_continuum_pairs(
    domain: &GridDomain,
    n: usize,
    mode: PairMode,
    scale: (f64, f64),
    seed: u64,
) -> Result<Vec<ContinuumPair>> {
    let h = domain.spacing;
    let lo = scale.0.max(4.0 * h);
    let hi = scale.1.max(lo);
    let cells = domain.inside_cells();
    if cells.is_empty() {
        return Err(Error::InteriorEmpty(0));
    }
    let facing = facing_pairs(domain);
    let none = vec![false; domain.num_cells()];
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for _attempt in 0..50 {
            let size_f = (rng.gen_range(lo.ln()..=hi.ln())).exp();
            let t = (rng.gen_range((lo / hi).ln()..=0.0f64)).exp();
            let size_e = (size_f * t).max(lo);
            let adversarial = k % 4 == 3 && !facing.is_empty();
            let e = if adversarial {
                let (a, b) = facing[rng.gen_range(0..facing.len())];
                bfs_path(domain, a, b, &none).map(Region::new)
            } else {
                let s = cells.cells()[rng.gen_range(0..cells.len())];
                grow(domain, &mut rng, s, size_e, &none)
            };
            let Some(e) = e else { continue };
            let f = match mode {
                PairMode::Intersecting => {
                    let s = e.cells()[rng.gen_range(0..e.len())];
                    grow(domain, &mut rng, s, size_f, &none)
                }
                PairMode::Disjoint => {
                    let blocked = domain.mask(&domain.dilate(&e));
                    let free: Vec<Cell> = cells.iter().filter(|&c| !blocked[c]).collect();
                    if free.is_empty() {
                        continue;
                    }
                    let s = free[rng.gen_range(0..free.len())];
                    grow(domain, &mut rng, s, size_f, &blocked)
                }
            };
            let Some(f) = f else { continue };
            let pair = ContinuumPair::new(domain, e, f, adversarial);
            if pair.diam_e >= 4.0 * h && pair.diam_f >= 4.0 * h {
                out.push(pair);
                break;
            }
        }
    }
    Ok(out)
}

/// Inside cells `a < b` on one lattice line with only non-inside cells
/// (at most three) between them.
fn facing_pairs(domain: &GridDomain) -> Vec<(Cell, Cell)> {
    let mut out = Vec::new();
    for a in 0..domain.num_cells() {
        if !domain.is_inside(a) {
            continue;
        }
        let (i, j) = domain.ij(a);
        for (di, dj) in [(1usize, 0usize), (0, 1)] {
            for gap in 1..=3 {
                let (i2, j2) = (i + di * (gap + 1), j + dj * (gap + 1));
                if i2 >= domain.nx || j2 >= domain.ny {
                    break;
                }
                let between_blocked = (1..=gap).all(|s| !domain.is_inside(domain.index(i + di * s, j + dj * s)));
                if !between_blocked {
                    break;
                }
                let b = domain.index(i2, j2);
                if domain.is_inside(b) {
                    out.push((a, b));
                    break;
                }
            }
        }
    }
    out
}

/// `E_r = [r, 1] × {0⁺}` and a unit-circle arc through `1` with chord `diam E_r`, giving `t ≈ 1`.
pub fn inversion_pair(domain: &GridDomain, r: f64) -> Result<ContinuumPair> {
    let h = domain.spacing;
    let row = domain.cell_at(Point::new(r.max(h), h / 2.0)).ok_or_else(|| Error::Invalid("r outside window".into()))?;
    let (_, j) = domain.ij(row);
    let e: Region = (0..domain.nx)
        .map(|i| domain.index(i, j))
        .filter(|&c| domain.is_inside(c) && (r..=1.0).contains(&domain.center(c).x))
        .collect();
    let phi = ((1.0 - r) / 2.0).asin();
    let arc: Region = (0..domain.num_cells())
        .filter(|&c| {
            let p = domain.center(c);
            domain.is_inside(c) && (p.norm() - 1.0).abs() <= 0.75 * h && p.y.atan2(p.x).abs() <= phi
        })
        .collect();
    let f = e.union(&arc);
    let f = crate::grid::component_of(domain, &f, e.cells()[e.len() - 1])
        .map(|c| c.difference(&e.difference(&arc)))
        .unwrap_or(arc);
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut pair = ContinuumPair::new(domain, e, f, true);
    pair.intersecting = true;
    Ok(pair)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub points: Vec<Point>,
    pub t: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaEnvelope {
    /// `(t, s)` sorted by `t`, `s` replaced by its running maximum.
    pub points: Vec<(f64, f64)>,
    /// Log-log slope of the staircase over its smallest quarter of `t`.
    pub small_t_trend: f64,
    /// Observation with the largest `s`.
    pub witness: Option<Witness>,
}

impl EtaEnvelope {
    fn build(mut raw: Vec<(f64, f64, Vec<Point>)>) -> Self {
        raw.retain(|r| r.0.is_finite() && r.1.is_finite());
        raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let witness = raw
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|r| Witness { points: r.2.clone(), t: r.0, s: r.1 });
        let mut run = f64::NEG_INFINITY;
        let points: Vec<(f64, f64)> = raw
            .iter()
            .map(|r| {
                run = run.max(r.1);
                (r.0, run)
            })
            .collect();
        let q = (points.len() / 4).max(2).min(points.len());
        let lows: Vec<(f64, f64)> = points[..q].iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
        let small_t_trend = if lows.len() >= 2 {
            let n = lows.len() as f64;
            let mx = lows.iter().map(|p| p.0).sum::<f64>() / n;
            let my = lows.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx: f64 = lows.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = lows.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            if sxx > 0.0 { sxy / sxx } else { 0.0 }
        } else {
            0.0
        };
        EtaEnvelope { points, small_t_trend, witness }
    }

    /// Staircase value at `t` (largest `s` observed for ratios up to `t`).
    pub fn at(&self, t: f64) -> Option<f64> {
        self.points.iter().take_while(|p| p.0 <= t).last().map(|p| p.1)
    }

    pub fn max(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.1)
    }
}

fn mapped_diameter(map: &MapSpec, domain: &GridDomain, r: &Region) -> Result<f64> {
    let pts = r.iter().map(|c| map.forward(domain.center(c))).collect::<Result<Vec<_>>>()?;
    Ok(point_diameter(&pts))
}

/// BQS staircase: `t = diam E / diam F`, `s = diam f(E) / diam f(F)` over intersecting pairs.
pub fn eta_envelope(map: &MapSpec, domain: &GridDomain, pairs: &[ContinuumPair]) -> Result<EtaEnvelope> {
    let mut raw = Vec::new();
    for p in pairs.iter().filter(|p| p.intersecting) {
        let t = p.diam_e / p.diam_f;
        let s = mapped_diameter(map, domain, &p.e)? / mapped_diameter(map, domain, &p.f)?;
        let a = domain.center(p.e.min_cell().expect("nonempty"));
        let b = domain.center(p.f.min_cell().expect("nonempty"));
        raw.push((t, s, vec![a, b]));
    }
    Ok(EtaEnvelope::build(raw))
}

/// Quasisymmetry staircase over triples `(x, y, z)`: `t = |x−y| / |x−z|`,
/// `s = |fx−fy| / |fx−fz|`. Half of the triples pick `x` on the boundary and
/// `z` as the boundary cell at least `8h` away whose image lies closest to `f(x)`.
pub fn quasisymmetry_envelope(map: &MapSpec, domain: &GridDomain, n_triples: usize, seed: u64) -> Result<EtaEnvelope> {
    if n_triples == 0 {
        return Err(Error::Invalid("n_triples must be at least 1".into()));
    }
    let h = domain.spacing;
    let cells = domain.inside_cells();
    if cells.len() < 3 {
        return Err(Error::InteriorEmpty(cells.len()));
    }
    let edge: Vec<Cell> = cells.iter().filter(|&c| domain.is_edge_cell(c)).collect();
    let edge_img = edge.iter().map(|&c| map.forward(domain.center(c))).collect::<Result<Vec<_>>>()?;
    let mut raw = Vec::new();
    for k in 0..n_triples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let (x, z) = if k % 2 == 1 && edge.len() > 2 {
            let ix = rng.gen_range(0..edge.len());
            let px = domain.center(edge[ix]);
            let best = (0..edge.len())
                .filter(|&j| domain.center(edge[j]).dist(&px) >= 8.0 * h)
                .min_by(|&a, &b| edge_img[a].dist(&edge_img[ix]).total_cmp(&edge_img[b].dist(&edge_img[ix])).then(a.cmp(&b)));
            match best {
                Some(j) => (edge[ix], edge[j]),
                None => continue,
            }
        } else {
            (cells.cells()[rng.gen_range(0..cells.len())], cells.cells()[rng.gen_range(0..cells.len())])
        };
        let y = cells.cells()[rng.gen_range(0..cells.len())];
        if x == y || x == z {
            continue;
        }
        let (px, py, pz) = (domain.center(x), domain.center(y), domain.center(z));
        let (fx, fy, fz) = (map.forward(px)?, map.forward(py)?, map.forward(pz)?);
        let den = fx.dist(&fz);
        if den == 0.0 {
            continue;
        }
        raw.push((px.dist(&py) / px.dist(&pz), fx.dist(&fy) / den, vec![px, py, pz]));
    }
    Ok(EtaEnvelope::build(raw))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushedChain {
    pub chain: Chain,
    pub source_flags: ChainFlags,
    pub source_singleton: bool,
    pub image_singleton: bool,
}

impl PushedChain {
    /// Every flag that held in the source still holds, and singletons stay singletons.
    pub fn preserved(&self) -> bool {
        let (s, i) = (self.source_flags, self.chain.flags);
        (!s.nested || i.nested)
            && (!s.separated || i.separated)
            && (!s.impression_in_boundary || i.impression_in_boundary)
            && (!self.source_singleton || self.image_singleton)
    }
}

/// Push a validated source chain through the map and validate it in the image.
pub fn push_chain(source: &GridDomain, mapped: &MappedDomain, chain: &Chain) -> PushedChain {
    let mut image = Chain::new(chain.links.iter().map(|l| mapped.push_region(l)).collect());
    image.anchor = chain.anchor.and_then(|p| mapped.map.forward(p).ok());
    let mut image = validate_chain(&mapped.image, &image);
    let image_singleton = impression(&mapped.image, &image).is_ok_and(|i| i.singleton);
    image.singleton = Some(image_singleton);
    PushedChain {
        source_flags: chain.flags,
        source_singleton: chain.singleton.unwrap_or_else(|| impression(source, chain).is_ok_and(|i| i.singleton)),
        image_singleton,
        chain: image,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub chains: usize,
    pub flags_preserved: usize,
    /// Ordered pairs whose divisibility relation survives the push.
    pub divisibility_preserved: usize,
    pub divisibility_total: usize,
    pub equivalence_preserved: usize,
    pub equivalence_total: usize,
    pub singleton_preserved: usize,
    pub singleton_total: usize,
}

impl ExtensionReport {
    pub fn divisibility_rate(&self) -> f64 {
        if self.divisibility_total == 0 {
            1.0
        } else {
            self.divisibility_preserved as f64 / self.divisibility_total as f64
        }
    }

    pub fn all_pass(&self) -> bool {
        self.flags_preserved == self.chains
            && self.divisibility_preserved == self.divisibility_total
            && self.equivalence_preserved == self.equivalence_total
            && self.singleton_preserved == self.singleton_total
    }
}

/// Compare the divisibility matrix, equivalences and singleton impressions of
/// source chains with those of their images.
pub fn extension_consistency(source: &GridDomain, mapped: &MappedDomain, chains: &[Chain]) -> ExtensionReport {
    let pushed: Vec<PushedChain> = chains.iter().map(|c| push_chain(source, mapped, c)).collect();
    let mut r = ExtensionReport {
        chains: chains.len(),
        flags_preserved: pushed.iter().filter(|p| p.preserved()).count(),
        divisibility_preserved: 0,
        divisibility_total: 0,
        equivalence_preserved: 0,
        equivalence_total: 0,
        singleton_preserved: pushed.iter().filter(|p| p.source_singleton && p.image_singleton).count(),
        singleton_total: pushed.iter().filter(|p| p.source_singleton).count(),
    };
    for i in 0..chains.len() {
        for j in 0..chains.len() {
            let src = divides(&chains[i], &chains[j]);
            let img = divides(&pushed[i].chain, &pushed[j].chain);
            r.divisibility_total += 1;
            r.divisibility_preserved += usize::from(src == img);
            if i < j && src && divides(&chains[j], &chains[i]) {
                r.equivalence_total += 1;
                r.equivalence_preserved += usize::from(img && divides(&pushed[j].chain, &pushed[i].chain));
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::spec;
    use crate::grid::{components, rasterize};

    #[test]
    fn inverses_round_trip() {
        let p = Point::new(0.3, 0.4);
        for name in ["z_squared", "angle_doubling", "inversion", "fold_xy", "identity"] {
            let m = MapSpec::named(name).unwrap();
            let back = m.inverse(m.forward(p).unwrap()).unwrap();
            assert!(back.dist(&p) < 1e-12, "{name}");
        }
        let a = MapSpec::new(MapKind::Affine).with("a11", 2.0).with("a12", 1.0).with("ty", 3.0);
        assert!(a.inverse(a.forward(p).unwrap()).unwrap().dist(&p) < 1e-12);
    }

    #[test]
    fn inversion_at_zero_is_a_violation() {
        let m = MapSpec::named("inversion").unwrap();
        assert!(matches!(m.forward(Point::new(0.0, 0.0)), Err(Error::DomainViolation { .. })));
    }

    #[test]
    fn z_squared_tears_the_slit() {
        let d = rasterize(&spec("half_disk", &[], None).unwrap(), 1.0 / 64.0).unwrap();
        let m = apply_map(&MapSpec::named("z_squared").unwrap(), &d, 1.0 / 64.0).unwrap();
        let img = &m.image;
        let above = img.cell_at(Point::new(0.5, 0.02)).unwrap();
        let below = img.cell_at(Point::new(0.5, -0.02)).unwrap();
        assert!(img.is_inside(above) && img.is_inside(below));
        // the two sides only meet around the tip at 0
        let ball = crate::grid::ball(img, Point::new(0.5, 0.0), 0.2);
        assert_eq!(components(img, &ball).len(), 2);
        let left = img.cell_at(Point::new(-0.5, 0.01)).unwrap();
        assert!(img.is_inside(left));
    }

    #[test]
    fn identity_envelope_is_diagonal() {
        let d = rasterize(&spec("rectangle", &[], None).unwrap(), 1.0 / 32.0).unwrap();
        let id = MapSpec::named("identity").unwrap();
        let pairs = sample_continuum_pairs(&d, 20, PairMode::Intersecting, (0.1, 0.8), 3).unwrap();
        let env = eta_envelope(&id, &d, &pairs).unwrap();
        let raw_max = pairs.iter().map(|p| p.diam_e / p.diam_f).fold(0.0, f64::max);
        assert!((env.max() - raw_max).abs() < 1e-12);
        let qs = quasisymmetry_envelope(&id, &d, 50, 1).unwrap();
        assert!(qs.points.iter().all(|p| p.1 <= p.0 + 1e-12));
    }

    #[test]
    fn staircase_is_monotone() {
        let env = EtaEnvelope::build(vec![(0.5, 2.0, vec![]), (0.1, 3.0, vec![]), (0.3, 1.0, vec![])]);
        assert_eq!(env.points, vec![(0.1, 3.0), (0.3, 3.0), (0.5, 3.0)]);
    }

    #[test]
    fn degenerate_pairs_rejected() {
        let d = rasterize(&spec("rectangle", &[], None).unwrap(), 1.0 / 16.0).unwrap();
        let pairs = sample_continuum_pairs(&d, 5, PairMode::Intersecting, (0.0, 0.0), 9).unwrap();
        assert!(pairs.iter().all(|p| p.diam_e >= 0.25 && p.diam_f >= 0.25));
    }

    #[test]
    fn disjoint_pairs_are_disjoint() {
        let d = rasterize(&spec("rectangle", &[], None).unwrap(), 1.0 / 32.0).unwrap();
        let pairs = sample_continuum_pairs(&d, 10, PairMode::Disjoint, (0.1, 0.4), 5).unwrap();
        assert!(!pairs.is_empty());
        assert!(pairs.iter().all(|p| !p.intersecting));
    }
}
