//! Shared fixtures for the kernel benchmarks.

use mazlab::corpus::spec;
use mazlab::{rasterize, BoundaryAnchor, Cell, DomainSpec, GridDomain, Point};

pub fn comb_spec(teeth: u32) -> DomainSpec {
    spec("harmonic_comb", &[], Some(teeth)).expect("comb spec")
}

pub fn slit_disk(spacing: f64) -> GridDomain {
    rasterize(&spec("slit_disk", &[], None).expect("slit disk"), spacing).expect("raster")
}

/// Cells just above and below the slit, the worst case for the metric.
pub fn slit_pair(d: &GridDomain) -> (Cell, Cell) {
    let h = d.spacing;
    let a = d.nearest_inside(Point::new(0.5, h)).expect("above");
    let b = d.nearest_inside(Point::new(0.5, -h)).expect("below");
    (a, b)
}

pub fn slit_anchor(d: &GridDomain) -> BoundaryAnchor {
    BoundaryAnchor::new(d, Point::new(0.5, 0.0)).expect("anchor")
}
