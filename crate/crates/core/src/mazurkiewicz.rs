//! Brackets for the Mazurkiewicz (inner-diameter) distance.
//!
//! `lower` is the smallest `d` for which the two cells are joined inside the lens
//! `ball(x, d) ∩ ball(y, d)`; it is found by a bottleneck search, which visits the
//! candidate distances in sorted order and stops at the first one that connects.
//! `upper` is the diameter of a shortest 4-path inside that lens, hence `upper ≤ 2·lower`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{point_diameter, Cell, GridDomain, Region};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Connected set realizing `upper`.
    pub witness: Region,
}

impl IntervalEstimate {
    pub fn zero(c: Cell) -> Self {
        IntervalEstimate { lower: 0.0, upper: 0.0, witness: Region::single(c) }
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        self.lower - slack <= v && v <= self.upper + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedTurningReport {
    pub lambda: f64,
    pub worst_pair: [Point; 2],
    pub sample_count: usize,
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) struct Key(pub(crate) f64, pub(crate) Cell);

impl Eq for Key {}

impl Ord for Key {
    // reversed: BinaryHeap pops the smallest key first, ties broken by cell index
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Per-thread scratch arrays, reset in O(1) by bumping a generation stamp.
struct Scratch {
    val: Vec<f64>,
    stamp: Vec<u32>,
    done: Vec<u32>,
    prev: Vec<Cell>,
    gen: u32,
}

impl Scratch {
    const fn empty() -> Self {
        Scratch { val: Vec::new(), stamp: Vec::new(), done: Vec::new(), prev: Vec::new(), gen: 0 }
    }

    fn begin(&mut self, n: usize) {
        if self.val.len() != n || self.gen == u32::MAX {
            self.val = vec![f64::INFINITY; n];
            self.stamp = vec![0; n];
            self.done = vec![0; n];
            self.prev = vec![0; n];
            self.gen = 0;
        }
        self.gen += 1;
    }

    fn get(&self, c: Cell) -> f64 {
        if self.stamp[c] == self.gen {
            self.val[c]
        } else {
            f64::INFINITY
        }
    }

    fn set(&mut self, c: Cell, v: f64) {
        self.stamp[c] = self.gen;
        self.val[c] = v;
    }
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = const { RefCell::new(Scratch::empty()) };
}

/// Bottleneck search from `source` until a cell accepted by `stop` is settled;
/// returns the least possible maximum of `cost` along a 4-path to it.
fn bottleneck_to(
    domain: &GridDomain,
    source: Cell,
    cost: impl Fn(Cell) -> f64,
    stop: impl Fn(Cell) -> bool,
) -> Option<f64> {
    SCRATCH.with(|s| {
        let mut s = s.borrow_mut();
        s.begin(domain.num_cells());
        let gen = s.gen;
        let mut heap = BinaryHeap::new();
        let v0 = cost(source);
        s.set(source, v0);
        heap.push(Key(v0, source));
        while let Some(Key(v, c)) = heap.pop() {
            if s.done[c] == gen {
                continue;
            }
            s.done[c] = gen;
            if stop(c) {
                return Some(v);
            }
            for n in domain.neighbors(c) {
                if s.done[n] == gen {
                    continue;
                }
                let nv = v.max(cost(n));
                if nv < s.get(n) {
                    s.set(n, nv);
                    heap.push(Key(nv, n));
                }
            }
        }
        None
    })
}

/// Minimax radius from `source`: `r(c) = min over paths max |p − source|`.
/// Satisfies `r(c) ≤ d_M(source, c) ≤ 2 r(c)`; unreachable cells get `+∞`.
pub fn minimax_radius(domain: &GridDomain, source: Cell) -> Vec<f64> {
    let p = domain.center(source);
    let cost = |c: Cell| domain.center(c).dist(&p);
    let mut best = vec![f64::INFINITY; domain.num_cells()];
    let mut done = vec![false; domain.num_cells()];
    let mut heap = BinaryHeap::new();
    best[source] = 0.0;
    heap.push(Key(0.0, source));
    while let Some(Key(v, c)) = heap.pop() {
        if done[c] {
            continue;
        }
        done[c] = true;
        for n in domain.neighbors(c) {
            let nv = v.max(cost(n));
            if !done[n] && nv < best[n] {
                best[n] = nv;
                heap.push(Key(nv, n));
            }
        }
    }
    best
}

/// Cells whose minimax radius from `source` is at most `r`. Contains the
/// Mazurkiewicz ball of radius `r` and is contained in the one of radius `2r`.
pub fn mazurkiewicz_ball(domain: &GridDomain, source: Cell, r: f64) -> Region {
    let rad = minimax_radius(domain, source);
    Region::from_sorted((0..domain.num_cells()).filter(|&c| rad[c] <= r).collect())
}

/// Shortest 4-path from `a` to `b` through cells accepted by `allowed`.
fn bfs_path(domain: &GridDomain, a: Cell, b: Cell, allowed: impl Fn(Cell) -> bool) -> Option<Vec<Cell>> {
    SCRATCH.with(|s| {
        let mut s = s.borrow_mut();
        s.begin(domain.num_cells());
        let gen = s.gen;
        s.done[a] = gen;
        s.prev[a] = a;
        let mut q = VecDeque::from([a]);
        while let Some(c) = q.pop_front() {
            if c == b {
                let mut path = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = s.prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for n in domain.neighbors(c) {
                if s.done[n] != gen && allowed(n) {
                    s.done[n] = gen;
                    s.prev[n] = c;
                    q.push_back(n);
                }
            }
        }
        None
    })
}

/// Bracket for `d_M(x, y)`. The computation always runs from the smaller index,
/// so the result is symmetric in its arguments.
pub fn mazurkiewicz_distance(domain: &GridDomain, x: Cell, y: Cell) -> Result<IntervalEstimate> {
    check_inside(domain, x)?;
    check_inside(domain, y)?;
    if x == y {
        return Ok(IntervalEstimate::zero(x));
    }
    let (x, y) = (x.min(y), x.max(y));
    let (px, py) = (domain.center(x), domain.center(y));
    let key = |c: Cell| {
        let p = domain.center(c);
        p.dist(&px).max(p.dist(&py))
    };
    let Some(lower) = bottleneck_to(domain, x, key, |c| c == y) else {
        return Err(Error::Disconnected);
    };
    let path = bfs_path(domain, x, y, |c| key(c) <= lower).ok_or(Error::Disconnected)?;
    let upper = point_diameter(&path.iter().map(|&c| domain.center(c)).collect::<Vec<_>>());
    Ok(IntervalEstimate { lower, upper: upper.max(lower), witness: Region::new(path) })
}

fn check_inside(domain: &GridDomain, c: Cell) -> Result<()> {
    if c >= domain.num_cells() || !domain.is_inside(c) {
        return Err(Error::Invalid(format!("cell {c} is not an inside cell")));
    }
    Ok(())
}

/// Bracket for `d_M(A, B) = inf diam(γ)` over connected `γ` meeting both sets.
///
/// Candidate endpoints are the relative-boundary cells of each set. Pairs are
/// scanned by increasing `|a − b|` until that reaches the best lens value; a
/// pair is skipped when the minimax radius needed to reach the other set from
/// either endpoint already rules it out.
pub fn mazurkiewicz_set_distance(domain: &GridDomain, a: &Region, b: &Region) -> Result<IntervalEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyRegion);
    }
    for &c in a.cells().iter().chain(b.cells()) {
        check_inside(domain, c)?;
    }
    let common = a.intersection(b);
    if let Some(c) = common.min_cell() {
        return Ok(IntervalEstimate::zero(c));
    }
    let ea = domain.relative_boundary(a).cells().to_vec();
    let eb = domain.relative_boundary(b).cells().to_vec();
    let mut pairs = Vec::with_capacity(ea.len() * eb.len());
    for (i, &ca) in ea.iter().enumerate() {
        for (j, &cb) in eb.iter().enumerate() {
            pairs.push((domain.dist(ca, cb), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let (mask_a, mask_b) = (domain.mask(a), domain.mask(b));
    let mut ra = vec![f64::NAN; ea.len()];
    let mut rb = vec![f64::NAN; eb.len()];
    let mut best: Option<IntervalEstimate> = None;
    let mut best_lower = f64::INFINITY;
    for (d, i, j) in pairs {
        if d >= best_lower {
            break;
        }
        if ra[i].is_nan() {
            ra[i] = reach_radius(domain, ea[i], &mask_b);
        }
        if rb[j].is_nan() {
            rb[j] = reach_radius(domain, eb[j], &mask_a);
        }
        if ra[i].max(rb[j]) >= best_lower {
            continue;
        }
        let est = match mazurkiewicz_distance(domain, ea[i], eb[j]) {
            Ok(e) => e,
            Err(Error::Disconnected) => continue,
            Err(e) => return Err(e),
        };
        best_lower = best_lower.min(est.lower);
        if best.as_ref().map_or(true, |b| est.upper < b.upper) {
            best = Some(est);
        }
    }
    let mut best = best.ok_or(Error::Disconnected)?;
    best.lower = best_lower;
    Ok(best)
}

fn reach_radius(domain: &GridDomain, from: Cell, target: &[bool]) -> f64 {
    let p = domain.center(from);
    bottleneck_to(domain, from, |n| domain.center(n).dist(&p), |n| target[n]).unwrap_or(f64::INFINITY)
}

/// Largest domain the exhaustive oracle accepts.
pub const ORACLE_LIMIT: usize = 64;

/// Exact minimum over simple 4-paths from `x` to `y` of the path diameter.
pub fn brute_force_oracle(domain: &GridDomain, x: Cell, y: Cell) -> Result<f64> {
    let n = domain.inside_count();
    if n > ORACLE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: ORACLE_LIMIT });
    }
    check_inside(domain, x)?;
    check_inside(domain, y)?;
    let mut st = Dfs {
        domain,
        target: y,
        on_path: vec![false; domain.num_cells()],
        path: Vec::new(),
        best: f64::INFINITY,
    };
    st.on_path[x] = true;
    st.path.push(domain.center(x));
    st.go(x, 0.0);
    if st.best.is_finite() {
        Ok(st.best)
    } else {
        Err(Error::Disconnected)
    }
}

struct Dfs<'a> {
    domain: &'a GridDomain,
    target: Cell,
    on_path: Vec<bool>,
    path: Vec<Point>,
    best: f64,
}

impl Dfs<'_> {
    fn go(&mut self, c: Cell, diam: f64) {
        if c == self.target {
            self.best = self.best.min(diam);
            return;
        }
        let goal = self.domain.center(self.target);
        let mut next: Vec<Cell> = self.domain.neighbors(c).filter(|&n| !self.on_path[n]).collect();
        next.sort_by(|&a, &b| {
            self.domain.center(a).dist(&goal).total_cmp(&self.domain.center(b).dist(&goal))
        });
        for n in next {
            let p = self.domain.center(n);
            let d = self.path.iter().fold(diam, |m, q| m.max(q.dist(&p)));
            if d >= self.best {
                continue;
            }
            self.on_path[n] = true;
            self.path.push(p);
            self.go(n, d);
            self.path.pop();
            self.on_path[n] = false;
        }
    }
}

/// Sampled bounded-turning constant: the largest `upper / d_X` over random pairs.
/// Half of the pairs are local (second point within a small random window).
pub fn bounded_turning_constant(domain: &GridDomain, n_samples: usize, seed: u64) -> Result<BoundedTurningReport> {
    if n_samples == 0 {
        return Err(Error::Invalid("n_samples must be at least 1".into()));
    }
    let cells = domain.inside_cells();
    if cells.is_empty() {
        return Err(Error::InteriorEmpty(0));
    }
    let mut report = BoundedTurningReport {
        lambda: 1.0,
        worst_pair: [domain.center(cells.cells()[0]); 2],
        sample_count: 0,
    };
    for k in 0..n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let x = cells.cells()[rng.gen_range(0..cells.len())];
        let y = if rng.gen_bool(0.5) {
            cells.cells()[rng.gen_range(0..cells.len())]
        } else {
            let w = rng.gen_range(1..=16i64);
            let (i, j) = domain.ij(x);
            let i2 = i as i64 + rng.gen_range(-w..=w);
            let j2 = j as i64 + rng.gen_range(-w..=w);
            if i2 < 0 || j2 < 0 || i2 as usize >= domain.nx || j2 as usize >= domain.ny {
                continue;
            }
            domain.index(i2 as usize, j2 as usize)
        };
        if x == y || !domain.is_inside(y) {
            continue;
        }
        let est = match mazurkiewicz_distance(domain, x, y) {
            Ok(e) => e,
            Err(Error::Disconnected) => continue,
            Err(e) => return Err(e),
        };
        report.sample_count += 1;
        let ratio = est.upper / domain.dist(x, y);
        if ratio > report.lambda {
            report.lambda = ratio;
            report.worst_pair = [domain.center(x), domain.center(y)];
        }
    }
    Ok(report)
}
