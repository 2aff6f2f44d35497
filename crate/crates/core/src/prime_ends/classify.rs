use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{impression, validate_chain, Chain};
use crate::error::{Error, Result};
use crate::grid::{components, Cell, GridDomain, Region};
use crate::mazurkiewicz::minimax_radius;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndKind {
    /// Some link is bounded.
    A,
    /// Every link unbounded, nonempty impression.
    B,
    /// End at infinity: empty impression.
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndClass {
    pub kind: EndKind,
    /// Index of the bounded link (A), the first separated gap (B) or the first link (C).
    pub link: usize,
    /// Separator `R_k` for B, compact `K` for C.
    pub certificate: Option<Region>,
    /// Bracket for the Mazurkiewicz diameter of the certificate.
    pub certificate_diameter: Option<(f64, f64)>,
}

fn touches_frame(domain: &GridDomain, r: &Region) -> bool {
    r.iter().any(|c| domain.touches_frame(c))
}

/// `[m, 4m]` with `m` the largest minimax radius from the first cell to the set.
fn diameter_bracket(domain: &GridDomain, r: &Region) -> (f64, f64) {
    let Some(c0) = r.min_cell() else { return (0.0, 0.0) };
    let rad = minimax_radius(domain, c0);
    let m = r.iter().map(|c| rad[c]).fold(0.0, f64::max);
    (m, 4.0 * m)
}

/// Cells of `Ω ∖ E` adjacent to `E`.
fn outer_collar(domain: &GridDomain, e: &Region) -> Region {
    domain.dilate(e).difference(e)
}

/// Layers at fixed graph distance from `Ω ∩ ∂E_{k+1}` inside `E_k ∖ E_{k+1}`,
/// nearest first. Each layer closer than `Ω ∩ ∂E_k` separates the two boundaries.
pub fn separator_candidates(domain: &GridDomain, outer: &Region, inner: &Region) -> Vec<Region> {
    let start = domain.relative_boundary(inner);
    let target = domain.mask(&domain.relative_boundary(outer));
    let in_outer = domain.mask(outer);
    let in_inner = domain.mask(inner);
    let mut dist = vec![usize::MAX; domain.num_cells()];
    let mut q: VecDeque<Cell> = start.iter().collect();
    for c in start.iter() {
        dist[c] = 0;
    }
    let mut stop = usize::MAX;
    while let Some(c) = q.pop_front() {
        if target[c] {
            stop = stop.min(dist[c]);
            continue;
        }
        for n in domain.neighbors(c) {
            if dist[n] == usize::MAX && in_outer[n] && !in_inner[n] {
                dist[n] = dist[c] + 1;
                q.push_back(n);
            }
        }
    }
    if stop == usize::MAX {
        stop = dist.iter().filter(|&&d| d != usize::MAX).max().map_or(0, |m| m + 1);
    }
    let mut layers: Vec<Vec<Cell>> = vec![Vec::new(); stop];
    for (c, &d) in dist.iter().enumerate() {
        if d >= 1 && d < stop {
            layers[d].push(c);
        }
    }
    layers.into_iter().skip(1).filter(|l| !l.is_empty()).map(Region::from_sorted).collect()
}

/// Flood fill `Ω ∖ R`: no component may meet both boundaries.
fn separates(domain: &GridDomain, r: &Region, a: &Region, b: &Region) -> bool {
    if a.is_empty() || b.is_empty() || r.intersects(a) || r.intersects(b) {
        return false;
    }
    let rest = domain.inside_cells().difference(r);
    let ma = domain.mask(a);
    let mb = domain.mask(b);
    !components(domain, &rest).iter().any(|c| c.iter().any(|x| ma[x]) && c.iter().any(|x| mb[x]))
}

fn find_separator(domain: &GridDomain, outer: &Region, inner: &Region) -> Option<(Region, (f64, f64))> {
    let (ba, bb) = (domain.relative_boundary(outer), domain.relative_boundary(inner));
    separator_candidates(domain, outer, inner)
        .into_iter()
        .filter(|r| !touches_frame(domain, r))
        .find(|r| separates(domain, r, &ba, &bb))
        .map(|r| {
            let d = diameter_bracket(domain, &r);
            (r, d)
        })
        .filter(|(_, d)| d.1.is_finite())
}

/// Classify a validated chain as type A, B or C.
///
/// A separator or compact set only certifies a finite Mazurkiewicz diameter
/// when it stays off the open sides of the window.
pub fn classify_end(domain: &GridDomain, chain: &Chain) -> Result<EndClass> {
    if let Some(k) = chain.links.iter().position(|l| !touches_frame(domain, l)) {
        return Ok(EndClass { kind: EndKind::A, link: k, certificate: None, certificate_diameter: None });
    }
    match impression(domain, chain) {
        Ok(_) => {
            let mut first = None;
            for (k, w) in chain.links.windows(2).enumerate() {
                match find_separator(domain, &w[0], &w[1]) {
                    Some(found) => {
                        first.get_or_insert((k, found));
                    }
                    None => {
                        return Err(Error::CertificateNotFound(format!(
                            "no separator of finite Mazurkiewicz diameter between links {k} and {}",
                            k + 1
                        )))
                    }
                }
            }
            let (k, (r, d)) = first.ok_or_else(|| Error::CertificateNotFound("chain has a single link".into()))?;
            Ok(EndClass { kind: EndKind::B, link: k, certificate: Some(r), certificate_diameter: Some(d) })
        }
        Err(Error::EmptyImpression { .. }) => {
            let mut first = None;
            for (k, e) in chain.links.iter().enumerate() {
                let kset = outer_collar(domain, e);
                if kset.is_empty() || touches_frame(domain, &kset) {
                    return Err(Error::CertificateNotFound(format!(
                        "link {k} is not cut off by a set of finite Mazurkiewicz diameter"
                    )));
                }
                first.get_or_insert((k, kset));
            }
            let (k, kset) = first.expect("chains have links");
            let d = diameter_bracket(domain, &kset);
            Ok(EndClass { kind: EndKind::C, link: k, certificate: Some(kset), certificate_diameter: Some(d) })
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinityReport {
    pub radii: Vec<f64>,
    /// Unbounded components of `Ω ∖ B_M(x0, R)` per radius.
    pub unbounded_counts: Vec<usize>,
    pub chains: Vec<Chain>,
}

/// Chains of unbounded components of the complements of growing Mazurkiewicz
/// balls around `basepoint`. Balls use the minimax radius, which sits between
/// `d_M / 2` and `d_M`.
pub fn ends_at_infinity(domain: &GridDomain, basepoint: Cell, radii: &[f64]) -> Result<InfinityReport> {
    if !domain.open_sides.any() {
        return Err(Error::Invalid("domain has no open side".into()));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("radii must be nonempty and increasing".into()));
    }
    if !domain.is_inside(basepoint) {
        return Err(Error::Invalid(format!("basepoint {basepoint} is not inside")));
    }
    let rad = minimax_radius(domain, basepoint);
    let mut levels: Vec<Vec<Region>> = Vec::new();
    for &r in radii {
        let rest = Region::from_sorted((0..domain.num_cells()).filter(|&c| domain.is_inside(c) && rad[c] > r).collect());
        levels.push(components(domain, &rest).into_iter().filter(|c| touches_frame(domain, c)).collect());
    }
    let unbounded_counts = levels.iter().map(Vec::len).collect();
    let mut chains = Vec::new();
    for last in levels.last().expect("radii nonempty") {
        let probe = last.min_cell().expect("components are nonempty");
        let links: Option<Vec<Region>> =
            levels.iter().map(|lvl| lvl.iter().find(|c| c.contains(probe)).cloned()).collect();
        if let Some(links) = links {
            chains.push(validate_chain(domain, &Chain::new(links)));
        }
    }
    Ok(InfinityReport { radii: radii.to_vec(), unbounded_counts, chains })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{OpenSides, Point};

    /// Channel open to the right whose only way back is a one-cell gap in a wall.
    fn gated_channel() -> (GridDomain, Cell) {
        let (nx, ny) = (48, 16);
        let mut mask = vec![true; nx * ny];
        for i in 0..nx {
            mask[8 * nx + i] = i == 2;
        }
        let mut d = GridDomain::from_mask("channel", 1.0 / 16.0, Point::new(0.0, 0.0), nx, ny, mask);
        d.open_sides = OpenSides { right: true, ..OpenSides::NONE };
        let gap = d.index(2, 8);
        (d, gap)
    }

    fn channel_chain(d: &GridDomain, gap: Cell) -> Chain {
        let p = d.center(gap);
        let links = [10.0, 6.5, 3.0]
            .iter()
            .map(|r| {
                let r = r * d.spacing;
                Region::from_sorted(
                    (0..d.num_cells())
                        .filter(|&c| d.is_inside(c))
                        .filter(|&c| d.ij(c).1 <= 8 || d.center(c).dist(&p) <= r)
                        .collect(),
                )
            })
            .collect();
        Chain::new(links)
    }

    #[test]
    fn channel_behind_a_gap_is_type_b() {
        let (d, gap) = gated_channel();
        let chain = channel_chain(&d, gap);
        let class = classify_end(&d, &chain).unwrap();
        assert_eq!(class.kind, EndKind::B);
        let cert = class.certificate.unwrap();
        assert!(!touches_frame(&d, &cert));
        let (lo, hi) = class.certificate_diameter.unwrap();
        assert!(lo > 0.0 && lo <= hi && hi.is_finite());
    }

    #[test]
    fn bounded_link_is_type_a() {
        let (d, gap) = gated_channel();
        let mut chain = channel_chain(&d, gap);
        chain.links.push(Region::single(gap));
        assert_eq!(classify_end(&d, &chain).unwrap().kind, EndKind::A);
    }

    #[test]
    fn open_strip_end_is_type_c() {
        let (nx, ny) = (64, 8);
        let mut d = GridDomain::from_mask("strip", 1.0 / 8.0, Point::new(0.0, 0.0), nx, ny, vec![true; nx * ny]);
        d.open_sides = OpenSides { right: true, ..OpenSides::NONE };
        let base = d.index(2, 4);
        let rep = ends_at_infinity(&d, base, &[2.0, 4.0, 6.2]).unwrap();
        assert_eq!(rep.unbounded_counts, vec![1, 1, 1]);
        let class = classify_end(&d, &rep.chains[0]).unwrap();
        assert_eq!(class.kind, EndKind::C);
        assert_eq!(class.link, 0);
    }

    #[test]
    fn closed_domain_has_no_ends_at_infinity() {
        let d = GridDomain::from_mask("box", 0.25, Point::new(0.0, 0.0), 4, 4, vec![true; 16]);
        assert!(ends_at_infinity(&d, 0, &[1.0]).is_err());
    }
}
