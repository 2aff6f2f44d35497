//! Prime ends, the Mazurkiewicz metric and modulus on rasterized planar domains.

pub mod corpus;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod maps;
pub mod mazurkiewicz;
pub mod modulus;
pub mod prime_ends;
pub mod report;
pub mod svg;

pub use corpus::{generate, DomainSpec};
pub use error::{Error, Result};
pub use geometry::{Geometry, OpenSides, Point, Rect, Segment, Shape};
pub use grid::{ball, components, diameter, rasterize, BoundaryAnchor, Cell, GridDomain, Region};
pub use mazurkiewicz::{mazurkiewicz_distance, mazurkiewicz_set_distance, IntervalEstimate};
pub use maps::{apply_map, MapKind, MapSpec};
pub use modulus::{modulus, ModulusSolution};
pub use report::{run_report, Report, ReportConfig};
