use mazlab::corpus::spec;
use mazlab::maps::{eta_envelope, sample_continuum_pairs, PairMode};
use mazlab::prime_ends::{divides, enumerate_prime_end_approximations, scale_component_tree};
use mazlab::{
    components, mazurkiewicz_distance, modulus, rasterize, BoundaryAnchor, Cell, GridDomain, MapSpec, Point, Region,
};
use proptest::prelude::*;

/// Largest component of a random mask, as its own domain.
fn blob(nx: usize, ny: usize, bits: &[bool]) -> Option<(GridDomain, Vec<Cell>)> {
    let d = GridDomain::from_mask("blob", 1.0 / nx as f64, Point::new(0.0, 0.0), nx, ny, bits.to_vec());
    let big = components(&d, &d.inside_cells()).into_iter().max_by_key(Region::len)?;
    if big.len() < 4 {
        return None;
    }
    let mut mask = vec![false; nx * ny];
    for c in big.iter() {
        mask[c] = true;
    }
    let d = GridDomain::from_mask("blob", 1.0 / nx as f64, Point::new(0.0, 0.0), nx, ny, mask);
    Some((d, big.cells().to_vec()))
}

fn mask_strategy() -> impl Strategy<Value = (usize, usize, Vec<bool>)> {
    (4usize..10, 3usize..8).prop_flat_map(|(nx, ny)| {
        (Just(nx), Just(ny), proptest::collection::vec(proptest::bool::weighted(0.75), nx * ny))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_is_symmetric_and_bracketed((nx, ny, bits) in mask_strategy(), i in 0usize..1000, j in 0usize..1000) {
        let Some((d, cells)) = blob(nx, ny, &bits) else { return Ok(()) };
        let (x, y) = (cells[i % cells.len()], cells[j % cells.len()]);
        let a = mazurkiewicz_distance(&d, x, y).unwrap();
        let b = mazurkiewicz_distance(&d, y, x).unwrap();
        prop_assert_eq!(a.lower, b.lower);
        prop_assert_eq!(a.upper, b.upper);
        prop_assert!(a.lower <= a.upper + 1e-12);
        prop_assert!(a.upper + 1e-12 >= d.dist(x, y));
    }

    #[test]
    fn metric_triangle_inequality(
        (nx, ny, bits) in mask_strategy(),
        i in 0usize..1000,
        j in 0usize..1000,
        k in 0usize..1000,
    ) {
        let Some((d, cells)) = blob(nx, ny, &bits) else { return Ok(()) };
        let n = cells.len();
        let (x, y, z) = (cells[i % n], cells[j % n], cells[k % n]);
        let xz = mazurkiewicz_distance(&d, x, z).unwrap();
        let xy = mazurkiewicz_distance(&d, x, y).unwrap();
        let yz = mazurkiewicz_distance(&d, y, z).unwrap();
        prop_assert!(xz.lower <= xy.upper + yz.upper + 1e-9);
    }

    #[test]
    fn modulus_symmetric_and_monotone(
        nx in 4usize..8,
        ny in 2usize..5,
        e_rows in 1usize..5,
    ) {
        let d = GridDomain::from_mask("rect", 1.0, Point::new(0.0, 0.0), nx, ny, vec![true; nx * ny]);
        let col = |i: usize, rows: usize| Region::new((0..rows.min(ny)).map(|j| d.index(i, j)).collect());
        let f = col(nx - 1, ny);
        let small = col(0, e_rows);
        let full = col(0, ny);
        let tol = 1e-4;
        let a = modulus(&d, &small, &f, 2.0, tol).unwrap().value;
        let b = modulus(&d, &f, &small, 2.0, tol).unwrap().value;
        let c = modulus(&d, &full, &f, 2.0, tol).unwrap().value;
        prop_assert!((a - b).abs() <= 4.0 * tol * a.max(b));
        prop_assert!(a <= c * (1.0 + 4.0 * tol));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn component_tree_nests(angle in 0.05f64..3.1) {
        let d = rasterize(&spec("slit_disk", &[], None).unwrap(), 1.0 / 32.0).unwrap();
        let Ok(anchor) = BoundaryAnchor::new(&d, Point::new(angle.cos(), angle.sin())) else { return Ok(()) };
        let tree = scale_component_tree(&d, &anchor, 0.6, 2).unwrap();
        for node in &tree.nodes {
            if let Some(p) = node.parent {
                prop_assert_eq!(tree.nodes[p].level + 1, node.level);
                prop_assert!(node.region.is_subset(&tree.nodes[p].region));
            }
        }
    }

    #[test]
    fn divides_is_reflexive_and_transitive(x in 0.1f64..0.9) {
        let d = rasterize(&spec("slit_disk", &[], None).unwrap(), 1.0 / 64.0).unwrap();
        let anchor = BoundaryAnchor::new(&d, Point::new(x, 0.0)).unwrap();
        let tree = scale_component_tree(&d, &anchor, 0.6, 3).unwrap();
        for c in enumerate_prime_end_approximations(&d, &tree) {
            prop_assert!(divides(&c, &c));
            let n = c.depth();
            for k in 1..=n {
                for j in 1..=k {
                    let (mid, top) = (c.prefix(k), c.prefix(j));
                    prop_assert!(divides(&c, &mid) && divides(&mid, &top));
                    prop_assert!(divides(&c, &top));
                }
            }
        }
    }

    #[test]
    fn envelope_is_a_staircase(seed in 0u64..1000) {
        let d = rasterize(&spec("half_disk", &[], None).unwrap(), 1.0 / 32.0).unwrap();
        let h = d.spacing;
        let pairs = sample_continuum_pairs(&d, 30, PairMode::Intersecting, (4.0 * h, 1.0), seed).unwrap();
        let env = eta_envelope(&MapSpec::named("z_squared").unwrap(), &d, &pairs).unwrap();
        for w in env.points.windows(2) {
            prop_assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
        }
        let probes = [0.05, 0.1, 0.3, 0.6, 1.0];
        let vals: Vec<f64> = probes.iter().map(|&t| env.at(t).unwrap_or(0.0)).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(vals.iter().all(|&v| v <= env.max()));
    }
}
