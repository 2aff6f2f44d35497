//! Finite-depth prime-end approximations.
//!
//! Chains are built from the components of shrinking balls around a boundary
//! anchor. Everything infinite is truncated: a tree has a fixed depth `J`, an
//! impression is read off the deepest links, and "unbounded" means reaching the
//! horizon of an open window side.

mod classify;
mod connectivity;

pub use classify::{classify_end, ends_at_infinity, separator_candidates, EndClass, EndKind, InfinityReport};
pub use connectivity::{
    fiber_anchors, finite_connectivity_check, separated_chain_family, ChainFamily, FiniteConnectivityReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{ball, components, point_diameter, BoundaryAnchor, Cell, GridDomain, Region};
use crate::mazurkiewicz::{mazurkiewicz_set_distance, IntervalEstimate};

/// Relative boundaries closer than this many cells count as touching.
pub const SEPARATION_CELLS: f64 = 2.0;
/// Impressions whose (extrapolated) diameter is at most this many cells are points.
pub const SINGLETON_CELLS: f64 = 4.0;
/// Number of deepest links used when extrapolating to infinite depth.
const FIT_LINKS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub level: usize,
    pub region: Region,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleComponentTree {
    pub anchor: BoundaryAnchor,
    pub r0: f64,
    pub depth: usize,
    pub radii: Vec<f64>,
    pub nodes: Vec<TreeNode>,
    /// Node indices per level.
    pub levels: Vec<Vec<usize>>,
}

impl ScaleComponentTree {
    pub fn level_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Root-to-leaf paths reaching the deepest level.
    pub fn full_paths(&self) -> Vec<Vec<usize>> {
        let Some(leaves) = self.levels.last() else { return Vec::new() };
        leaves
            .iter()
            .map(|&leaf| {
                let mut path = vec![leaf];
                let mut cur = leaf;
                while let Some(p) = self.nodes[cur].parent {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                path
            })
            .filter(|p| p.len() == self.depth + 1)
            .collect()
    }
}

/// Components of `ball(anchor, r0 2^-j) ∩ Ω` meeting the anchor's incident cells, `j = 0..=depth`.
pub fn scale_component_tree(
    domain: &GridDomain,
    anchor: &BoundaryAnchor,
    r0: f64,
    depth: usize,
) -> Result<ScaleComponentTree> {
    let h = domain.spacing;
    if !(r0 > 4.0 * h * 2f64.powi(depth as i32)) {
        return Err(Error::RadiusUnresolvable { r0, depth, spacing: h });
    }
    let radii: Vec<f64> = (0..=depth).map(|j| r0 / 2f64.powi(j as i32)).collect();
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for (j, &r) in radii.iter().enumerate() {
        let b = ball(domain, anchor.point, r);
        let mut here = Vec::new();
        for comp in components(domain, &b) {
            if !comp.intersects(&anchor.incident_cells) {
                continue;
            }
            let parent = if j == 0 {
                None
            } else {
                let probe = comp.min_cell().expect("components are nonempty");
                levels[j - 1].iter().copied().find(|&p| nodes[p].region.contains(probe))
            };
            let id = nodes.len();
            if let Some(p) = parent {
                nodes[p].children.push(id);
            }
            nodes.push(TreeNode { level: j, region: comp, parent, children: Vec::new() });
            here.push(id);
        }
        levels.push(here);
    }
    Ok(ScaleComponentTree { anchor: anchor.clone(), r0, depth, radii, nodes, levels })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChainFlags {
    pub nested: bool,
    pub separated: bool,
    pub impression_in_boundary: bool,
}

impl ChainFlags {
    pub fn all(&self) -> bool {
        self.nested && self.separated && self.impression_in_boundary
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub links: Vec<Region>,
    pub separation: Vec<IntervalEstimate>,
    pub flags: ChainFlags,
    pub anchor: Option<Point>,
    /// Filled in by enumeration: whether the impression is a point at this scale.
    pub singleton: Option<bool>,
}

impl Chain {
    pub fn new(links: Vec<Region>) -> Self {
        Chain { links, separation: Vec::new(), flags: ChainFlags::default(), anchor: None, singleton: None }
    }

    pub fn depth(&self) -> usize {
        self.links.len()
    }

    pub fn deepest(&self) -> &Region {
        self.links.last().expect("chains have at least one link")
    }

    /// Drop the deepest links, keeping the first `k`.
    pub fn prefix(&self, k: usize) -> Chain {
        let mut c = Chain::new(self.links[..k.min(self.links.len())].to_vec());
        c.anchor = self.anchor;
        c
    }

    /// Separation gaps whose lower bound is at most `2h`.
    pub fn stagnant_gaps(&self, spacing: f64) -> Vec<usize> {
        self.separation
            .iter()
            .enumerate()
            .filter(|(_, s)| s.lower <= SEPARATION_CELLS * spacing)
            .map(|(k, _)| k)
            .collect()
    }
}

/// One tree path per chain, each validated and tagged with its singleton flag.
pub fn enumerate_prime_end_approximations(domain: &GridDomain, tree: &ScaleComponentTree) -> Vec<Chain> {
    tree.full_paths()
        .into_iter()
        .map(|path| {
            let mut chain = Chain::new(path.iter().map(|&n| tree.nodes[n].region.clone()).collect());
            chain.anchor = Some(tree.anchor.point);
            let mut chain = validate_chain(domain, &chain);
            chain.singleton = Some(impression(domain, &chain).map_or(false, |i| i.singleton));
            chain
        })
        .collect()
}

/// Least-squares intercept of `y` against `x`; the mean of `y` when `x` barely varies.
pub(crate) fn fit_intercept(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return f64::INFINITY;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) {
        return my;
    }
    my - sxy / sxx * mx
}

fn link_diameter(domain: &GridDomain, link: &Region) -> f64 {
    point_diameter(&domain.centers(link))
}

/// Check nestedness, separation of relative boundaries, and the boundary
/// condition on the impression. Failures only clear flags.
pub fn validate_chain(domain: &GridDomain, chain: &Chain) -> Chain {
    let h = domain.spacing;
    let mut out = chain.clone();
    let links = &chain.links;
    out.flags.nested = !links.is_empty()
        && links.iter().all(|l| !l.is_empty() && components(domain, l).len() == 1)
        && links.windows(2).all(|w| w[1].is_subset(&w[0]) && w[1].len() < w[0].len());
    out.separation = links
        .windows(2)
        .map(|w| {
            let (a, b) = (domain.relative_boundary(&w[0]), domain.relative_boundary(&w[1]));
            match mazurkiewicz_set_distance(domain, &a, &b) {
                Ok(e) => e,
                Err(_) => IntervalEstimate {
                    lower: f64::INFINITY,
                    upper: f64::INFINITY,
                    witness: Region::default(),
                },
            }
        })
        .collect();
    out.flags.separated = out.separation.iter().all(|s| s.lower > SEPARATION_CELLS * h);
    out.flags.impression_in_boundary = collar_in_boundary(domain, links);
    out
}

/// Proxy for `⋂ cl(E_k) ⊆ ∂Ω`: the largest distance from the boundary within
/// the deepest links, extrapolated to zero link size, is at most `2h`. Links
/// that only survive near infinity make the condition vacuous.
fn collar_in_boundary(domain: &GridDomain, links: &[Region]) -> bool {
    let Some(last) = links.last() else { return false };
    let bd = domain.boundary_distance();
    let finite: Vec<Cell> = last.iter().filter(|&c| !domain.near_infinity(c)).collect();
    if finite.is_empty() {
        return true;
    }
    let h = domain.spacing;
    let tail = &links[links.len().saturating_sub(FIT_LINKS)..];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for l in tail {
        let depth = l.iter().filter(|&c| !domain.near_infinity(c)).map(|c| bd[c]).fold(0.0, f64::max);
        xs.push(link_diameter(domain, l));
        ys.push(depth);
    }
    ys.last().map_or(false, |&m| m <= SEPARATION_CELLS * h) || fit_intercept(&xs, &ys) <= SEPARATION_CELLS * h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Impression {
    /// Cells of the deepest link touching the boundary away from infinity.
    pub cells: Region,
    pub diameter: f64,
    /// Contact diameter extrapolated to zero link size.
    pub extrapolated_diameter: f64,
    pub centroid: Point,
    pub connected: bool,
    pub singleton: bool,
}

fn contact_cells(domain: &GridDomain, link: &Region) -> Vec<Cell> {
    link.iter().filter(|&c| !domain.near_infinity(c) && domain.is_edge_cell(c)).collect()
}

fn contact_points(domain: &GridDomain, cells: &[Cell]) -> Vec<Point> {
    cells.iter().flat_map(|&c| domain.edge_points(c)).collect()
}

/// Finite-depth impression read off the boundary contacts of the deepest links.
pub fn impression(domain: &GridDomain, chain: &Chain) -> Result<Impression> {
    let h = domain.spacing;
    let deepest = contact_cells(domain, chain.deepest());
    if deepest.is_empty() {
        return Err(Error::EmptyImpression { depth: chain.depth() });
    }
    let pts = contact_points(domain, &deepest);
    let diameter = point_diameter(&pts);
    let tail = &chain.links[chain.links.len().saturating_sub(FIT_LINKS)..];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for l in tail {
        let cc = contact_cells(domain, l);
        if cc.is_empty() {
            continue;
        }
        xs.push(link_diameter(domain, l));
        ys.push(point_diameter(&contact_points(domain, &cc)));
    }
    let extrapolated = fit_intercept(&xs, &ys).max(0.0);
    let n = pts.len() as f64;
    let centroid = Point::new(pts.iter().map(|p| p.x).sum::<f64>() / n, pts.iter().map(|p| p.y).sum::<f64>() / n);
    let cells = Region::new(deepest);
    Ok(Impression {
        connected: eight_connected(domain, &cells),
        singleton: diameter <= SINGLETON_CELLS * h || extrapolated <= SINGLETON_CELLS * h,
        diameter,
        extrapolated_diameter: extrapolated,
        centroid,
        cells,
    })
}

fn eight_connected(domain: &GridDomain, region: &Region) -> bool {
    let Some(start) = region.min_cell() else { return true };
    let mut seen = vec![start];
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        let (i, j) = domain.ij(c);
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || b < 0 || a as usize >= domain.nx || b as usize >= domain.ny {
                    continue;
                }
                let n = domain.index(a as usize, b as usize);
                if region.contains(n) && !seen.contains(&n) {
                    seen.push(n);
                    stack.push(n);
                }
            }
        }
    }
    seen.len() == region.len()
}

/// For each link of `b`, the index of the first link of `a` contained in it.
pub fn division_indices(a: &Chain, b: &Chain) -> Option<Vec<usize>> {
    b.links
        .iter()
        .map(|f| a.links.iter().position(|e| e.is_subset(f)))
        .collect()
}

/// `a` divides `b`: every link of `b` contains some link of `a`.
pub fn divides(a: &Chain, b: &Chain) -> bool {
    division_indices(a, b).is_some()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenRefinement {
    pub chain: Chain,
    pub divides_input: bool,
    pub divided_by_input: bool,
}

impl OpenRefinement {
    pub fn equivalent(&self) -> bool {
        self.divides_input && self.divided_by_input
    }
}

/// Replace each link by the component of its interior relative to `Ω` that holds
/// the next (refined) link, working from the deepest link up.
///
/// The deepest refined link has no deeper input link to contain, so the
/// "divided by input" check covers all links but that one.
pub fn open_refinement(domain: &GridDomain, chain: &Chain) -> Result<OpenRefinement> {
    let mut refined: Vec<Region> = vec![Region::default(); chain.links.len()];
    for k in (0..chain.links.len()).rev() {
        let interior = chain.links[k].difference(&domain.relative_boundary(&chain.links[k]));
        if interior.is_empty() {
            return Err(Error::InteriorEmpty(k));
        }
        let comps = components(domain, &interior);
        let pick = if k + 1 < chain.links.len() {
            comps.iter().position(|c| c.intersects(&refined[k + 1]))
        } else {
            None
        };
        let pick = pick.unwrap_or_else(|| {
            (0..comps.len()).max_by(|&a, &b| comps[a].len().cmp(&comps[b].len()).then(b.cmp(&a))).unwrap()
        });
        refined[k] = comps[pick].clone();
    }
    let mut out = Chain::new(refined);
    out.anchor = chain.anchor;
    let out = validate_chain(domain, &out);
    Ok(OpenRefinement {
        divides_input: divides(&out, chain),
        divided_by_input: divides(chain, &out.prefix(out.depth().saturating_sub(1).max(1))),
        chain: out,
    })
}
