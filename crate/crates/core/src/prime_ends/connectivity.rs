use serde::{Deserialize, Serialize};

use super::{enumerate_prime_end_approximations, scale_component_tree, Chain};
use crate::error::Result;
use crate::geometry::Point;
use crate::grid::{ball, components, BoundaryAnchor, GridDomain, Region};
use crate::mazurkiewicz::mazurkiewicz_set_distance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteConnectivityReport {
    pub anchor: Point,
    pub radii: Vec<f64>,
    /// Components of `ball(anchor, r) ∩ Ω` touching the anchor, per radius.
    pub counts: Vec<usize>,
    /// Whether some smaller ball lies inside the touching components, per radius.
    pub captured: Vec<bool>,
    pub condition1: bool,
    pub condition2: bool,
    pub verdict: bool,
}

/// Finite connectedness at a boundary point, tested at each radius: count the
/// touching components, then shrink `ρ` by halves down to `2h` looking for a
/// ball `ball(anchor, ρ) ∩ Ω` inside their union.
pub fn finite_connectivity_check(
    domain: &GridDomain,
    anchor: &BoundaryAnchor,
    radii: &[f64],
) -> FiniteConnectivityReport {
    let h = domain.spacing;
    let mut counts = Vec::new();
    let mut captured = Vec::new();
    for &r in radii {
        let touching: Vec<Region> = components(domain, &ball(domain, anchor.point, r))
            .into_iter()
            .filter(|c| c.intersects(&anchor.incident_cells))
            .collect();
        counts.push(touching.len());
        let union = touching.iter().fold(Region::default(), |u, c| u.union(c));
        let mut rho = r;
        let mut ok = false;
        while rho >= 2.0 * h {
            if ball(domain, anchor.point, rho).is_subset(&union) {
                ok = true;
                break;
            }
            rho /= 2.0;
        }
        captured.push(ok);
    }
    // a finite grid never has infinitely many components
    let condition1 = true;
    let condition2 = captured.iter().all(|&b| b);
    FiniteConnectivityReport {
        anchor: anchor.point,
        radii: radii.to_vec(),
        counts,
        captured,
        condition1,
        condition2,
        verdict: condition1 && condition2,
    }
}

/// Boundary points on the vertical line through `x`: the lattice column whose
/// center is nearest `x`, cut wherever inside and outside cells meet.
pub fn fiber_anchors(domain: &GridDomain, x: f64) -> Vec<Point> {
    let h = domain.spacing;
    let i = (((x - domain.window.x0) / h - 0.5).round().max(0.0) as usize).min(domain.nx - 1);
    let cx = domain.window.x0 + (i as f64 + 0.5) * h;
    let mut out = Vec::new();
    for j in 0..domain.ny {
        let c = domain.index(i, j);
        if !domain.is_inside(c) || domain.near_infinity(c) {
            continue;
        }
        for p in domain.edge_points(c) {
            if (p.x - cx).abs() < 1e-12 {
                out.push(p);
            }
        }
    }
    out.sort_by(|a, b| a.y.total_cmp(&b.y));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFamily {
    pub chains: Vec<Chain>,
    /// Indices into `chains` of a pairwise separated subfamily.
    pub selected: Vec<usize>,
}

impl ChainFamily {
    pub fn count(&self) -> usize {
        self.selected.len()
    }
}

/// Depth-`depth` chains at every anchor, then a greedy bottom-up selection of
/// chains whose deepest links are pairwise at Mazurkiewicz distance at least
/// `threshold` (by lower bound).
pub fn separated_chain_family(
    domain: &GridDomain,
    anchors: &[Point],
    r0: f64,
    depth: usize,
    threshold: f64,
) -> Result<ChainFamily> {
    let mut chains = Vec::new();
    for &p in anchors {
        let anchor = BoundaryAnchor::new(domain, p)?;
        let tree = scale_component_tree(domain, &anchor, r0, depth)?;
        chains.extend(enumerate_prime_end_approximations(domain, &tree));
    }
    chains.sort_by(|a, b| {
        let (pa, pb) = (a.anchor.unwrap_or(Point::new(0.0, 0.0)), b.anchor.unwrap_or(Point::new(0.0, 0.0)));
        pa.y.total_cmp(&pb.y).then(pa.x.total_cmp(&pb.x)).then(a.deepest().min_cell().cmp(&b.deepest().min_cell()))
    });
    let mut selected: Vec<usize> = Vec::new();
    for (k, c) in chains.iter().enumerate() {
        let mut ok = true;
        for &s in &selected {
            let far = match mazurkiewicz_set_distance(domain, c.deepest(), chains[s].deepest()) {
                Ok(e) => e.lower >= threshold,
                Err(crate::Error::Disconnected) => true,
                Err(e) => return Err(e),
            };
            if !far {
                ok = false;
                break;
            }
        }
        if ok {
            selected.push(k);
        }
    }
    Ok(ChainFamily { chains, selected })
}
