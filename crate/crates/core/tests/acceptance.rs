//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use std::f64::consts::PI;
use std::io::Write;

use mazlab::corpus::spec;
use mazlab::geometry::Point;
use mazlab::grid::{components, rasterize, BoundaryAnchor, GridDomain, Region};
use mazlab::mazurkiewicz::{brute_force_oracle, mazurkiewicz_distance};
use mazlab::prime_ends::{
    classify_end, divides, ends_at_infinity, enumerate_prime_end_approximations, fiber_anchors,
    finite_connectivity_check, impression, scale_component_tree, separated_chain_family, EndKind,
};
use mazlab::maps::{
    apply_map, eta_envelope, extension_consistency, inversion_pair, push_chain, quasisymmetry_envelope,
    sample_continuum_pairs, MapSpec, PairMode,
};
use mazlab::modulus::{modulus, modulus_oracle_small, qc_distortion, rectangle_families, DEFAULT_TOL};
use mazlab::{run_report, Error, ReportConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Written to the raw stdout handle so the line survives test output capture.
fn report(n: u32, ok: bool, detail: &str) {
    let line = format!("criterion {n:>2}: {} | {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}

fn verdict(n: u32, ok: bool, detail: String) {
    report(n, ok, &detail);
    assert!(ok, "criterion {n} failed: {detail}");
}

fn domain(name: &str, params: &[(&str, f64)], t: Option<u32>, h: f64) -> GridDomain {
    rasterize(&spec(name, params, t).unwrap(), h).unwrap()
}

#[test]
fn c01_bracket_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    let mut bad = 0;
    while checked < 100 {
        let (nx, ny) = (rng.gen_range(2..=8), rng.gen_range(2..=8));
        let h = 1.0 / 8.0;
        let mask: Vec<bool> = (0..nx * ny).map(|_| rng.gen_bool(0.7)).collect();
        let d = GridDomain::from_mask("random", h, Point::new(0.0, 0.0), nx, ny, mask);
        let comps = components(&d, &d.inside_cells());
        let Some(big) = comps.iter().max_by_key(|c| c.len()) else { continue };
        if big.len() < 2 {
            continue;
        }
        let x = big.cells()[rng.gen_range(0..big.len())];
        let y = big.cells()[rng.gen_range(0..big.len())];
        let est = mazurkiewicz_distance(&d, x, y).unwrap();
        let exact = brute_force_oracle(&d, x, y).unwrap();
        let ok = est.lower <= exact + 1e-12 && exact <= est.upper + 1e-12 && est.upper <= 2.0 * est.lower + 4.0 * h;
        if !ok {
            bad += 1;
        }
        checked += 1;
    }
    verdict(1, bad == 0, format!("{checked} random domains, {bad} violations"));
}

#[test]
fn c02_convex_collapse() {
    let d = domain("rectangle", &[], None, 1.0 / 64.0);
    let cells = d.inside_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = cells.cells()[rng.gen_range(0..cells.len())];
        let y = cells.cells()[rng.gen_range(0..cells.len())];
        let e = mazurkiewicz_distance(&d, x, y).unwrap();
        worst = worst.max(e.upper - e.lower);
    }
    verdict(2, worst <= 2.0 * d.spacing, format!("max upper-lower = {worst:.5}, 2h = {:.5}", 2.0 * d.spacing));
}

#[test]
fn c03_slit_detour() {
    let d = domain("slit_disk", &[], None, 1.0 / 128.0);
    let x = d.cell_at(Point::new(0.5, 0.05)).unwrap();
    let y = d.cell_at(Point::new(0.5, -0.05)).unwrap();
    let e = mazurkiewicz_distance(&d, x, y).unwrap();
    let target = 2.0 * 0.5 + 0.1;
    let ok = e.lower <= 1.1 * target && e.upper >= 0.9 * target;
    // the target is the detour length; the smallest continuum only has to reach the tip
    let tip = d.center(x).dist(&Point::new(0.0, 0.0)).max(d.center(y).dist(&Point::new(0.0, 0.0)));
    let h = d.spacing;
    report(3, ok, &format!("bracket [{:.4}, {:.4}] vs {target} +- 10%; distance to tip {tip:.4}", e.lower, e.upper));
    assert!(e.lower >= tip - 2.0 * h && e.upper <= tip + 4.0 * h, "bracket [{}, {}] vs tip {tip}", e.lower, e.upper);
}

fn disk_anchors() -> Vec<Point> {
    (0..16).map(|k| {
        let t = 2.0 * PI * k as f64 / 16.0;
        Point::new(t.cos(), t.sin())
    }).collect()
}

#[test]
fn c04_disk_prime_ends() {
    let d = domain("disk", &[], None, 1.0 / 256.0);
    let mut problems = Vec::new();
    for p in disk_anchors() {
        let a = BoundaryAnchor::new(&d, p).unwrap();
        let t = scale_component_tree(&d, &a, 1.1, 6).unwrap();
        let chains = enumerate_prime_end_approximations(&d, &t);
        if chains.len() != 1 {
            problems.push(format!("{p:?}: {} chains", chains.len()));
            continue;
        }
        let c = &chains[0];
        let imp = impression(&d, c).unwrap();
        if !c.flags.all() || !imp.singleton {
            problems.push(format!("{p:?}: flags {:?}, impression {:.4}/{:.4}", c.flags, imp.diameter, imp.extrapolated_diameter));
        }
    }
    verdict(4, problems.is_empty(), format!("16 anchors, J=6; problems: {problems:?}"));
}

#[test]
fn c05_slit_two_sided() {
    let d = domain("slit_disk", &[], None, 1.0 / 256.0);
    let mut detail = Vec::new();
    let mut ok = true;
    for x in [0.3, 0.5, 0.7] {
        let a = BoundaryAnchor::new(&d, Point::new(x, 0.0)).unwrap();
        let t = scale_component_tree(&d, &a, 1.1, 6).unwrap();
        let chains = enumerate_prime_end_approximations(&d, &t);
        let two = chains.len() == 2 && !divides(&chains[0], &chains[1]) && !divides(&chains[1], &chains[0]);
        ok &= two;
        detail.push(format!("x={x}: {} chains", chains.len()));
    }
    let a = BoundaryAnchor::new(&d, Point::new(0.0, 0.0)).unwrap();
    let t = scale_component_tree(&d, &a, 1.1, 6).unwrap();
    let tip = enumerate_prime_end_approximations(&d, &t).len();
    ok &= tip == 1;
    detail.push(format!("tip: {tip} chains"));
    verdict(5, ok, detail.join(", "));
}

#[test]
fn c06_comb_pathology() {
    let mut ok = true;
    let mut detail = Vec::new();
    for t in [4, 6, 8] {
        let d = domain("harmonic_comb", &[], Some(t), 1.0 / 256.0);
        let a = BoundaryAnchor::new(&d, Point::new(0.0, 0.25)).unwrap();
        let radii = [0.2, 0.1, 0.05];
        let r = finite_connectivity_check(&d, &a, &radii);
        let nonempty = radii.iter().all(|&rho| !mazlab::grid::ball(&d, a.point, rho).is_empty());
        let pass = !r.verdict && !r.condition2 && r.counts.iter().all(|&c| c == 0) && nonempty;
        ok &= pass;
        detail.push(format!("T={t}: counts {:?} verdict {}", r.counts, r.verdict));
    }
    let d = domain("disk", &[], None, 1.0 / 128.0);
    let disk_ok = disk_anchors().into_iter().all(|p| {
        let a = BoundaryAnchor::new(&d, p).unwrap();
        finite_connectivity_check(&d, &a, &[0.4, 0.2, 0.1]).verdict
    });
    ok &= disk_ok;
    detail.push(format!("disk all true: {disk_ok}"));
    verdict(6, ok, detail.join(", "));
}

#[test]
fn c07_growth_witness() {
    let mut counts = Vec::new();
    for t in [2u32, 3, 4] {
        let d = domain("double_comb", &[], Some(t), 1.0 / 256.0);
        let anchors = fiber_anchors(&d, 0.5);
        let fam = separated_chain_family(&d, &anchors, 0.3, 4, 0.1).unwrap();
        counts.push(fam.count());
    }
    let grows = counts.windows(2).all(|w| w[1] >= w[0]) && counts.iter().zip([2, 3, 4]).all(|(&c, t)| c >= t);
    let d = domain("disk", &[], None, 1.0 / 256.0);
    let disk: Vec<usize> = disk_anchors()
        .into_iter()
        .map(|p| separated_chain_family(&d, &[p], 0.3, 4, 0.1).unwrap().count())
        .collect();
    let disk_ok = disk.iter().all(|&c| c == 1);
    verdict(7, grows && disk_ok, format!("double comb T=2,3,4: {counts:?}; disk counts all 1: {disk_ok}"));
}

#[test]
fn c12_end_classification() {
    let d = domain("strip_with_slits", &[], Some(4), 1.0 / 64.0);
    let base = d.cell_at(Point::new(0.5, 0.75)).unwrap();
    let rep = ends_at_infinity(&d, base, &[1.5, 2.5, 3.5, 4.6]).unwrap();
    let mut c_ends = 0;
    let mut b_verified = 0;
    for c in &rep.chains {
        match classify_end(&d, c) {
            Ok(k) if k.kind == EndKind::C => c_ends += 1,
            Ok(k) if k.kind == EndKind::B => b_verified += 1,
            _ => {}
        }
    }
    let mut gate_failures = Vec::new();
    for (t, h) in [(1, 1.0 / 192.0), (2, 1.0 / 384.0)] {
        let d = domain("gate_domain", &[("height", 0.25), ("k_max", 1.0)], Some(t), h);
        let links: Vec<_> = (2..=4)
            .map(|j| {
                let cut = 0.5f64.powi(j);
                let r = mazlab::grid::Region::from_sorted(
                    (0..d.num_cells()).filter(|&c| d.is_inside(c) && d.center(c).y < cut).collect(),
                );
                let seed = d.cell_at(Point::new(0.0, h / 2.0)).unwrap();
                mazlab::grid::component_of(&d, &r, seed).unwrap()
            })
            .collect();
        let chain = mazlab::prime_ends::validate_chain(&d, &mazlab::prime_ends::Chain::new(links));
        gate_failures.push(matches!(classify_end(&d, &chain), Err(Error::CertificateNotFound(_))));
    }
    let ok = c_ends >= 1 && b_verified == 0 && gate_failures.iter().all(|&f| f);
    verdict(
        12,
        ok,
        format!("strip: {c_ends} type-C, {b_verified} verified type-B; gate certificate failures {gate_failures:?}"),
    );
}

#[test]
fn c10_bqs_not_qs() {
    let d = domain("half_disk", &[], None, 1.0 / 512.0);
    let z2 = MapSpec::named("z_squared").unwrap();
    let pairs = sample_continuum_pairs(&d, 400, PairMode::Intersecting, (4.0 * d.spacing, 2.0), 10).unwrap();
    let env = eta_envelope(&z2, &d, &pairs).unwrap();
    let small = env.at(0.01);
    let bqs_ok = small.is_some_and(|s| s <= 0.2);
    let qs = quasisymmetry_envelope(&z2, &d, 400, 10).unwrap();
    let w = qs.witness.clone().unwrap();
    let near_slit = |p: Point| {
        let q = z2.forward(p).unwrap();
        q.y.abs() <= 0.05 && (0.0..=1.0).contains(&q.x)
    };
    let qs_ok = w.s > 50.0 && near_slit(w.points[0]) && near_slit(w.points[2]);
    let a = domain("annulus", &[], None, 1.0 / 512.0);
    let inv = MapSpec::named("inversion").unwrap();
    let mut inv_detail = Vec::new();
    let mut inv_ok = true;
    for r in [0.1, 0.03, 0.01] {
        let pair = inversion_pair(&a, r).unwrap();
        let s = eta_envelope(&inv, &a, &[pair]).unwrap().max();
        inv_ok &= s >= 0.5 / r;
        inv_detail.push(format!("r={r}: {s:.1} vs {:.1}", 0.5 / r));
    }
    verdict(
        10,
        bqs_ok && qs_ok && inv_ok,
        format!(
            "z^2 eta(0.01) = {small:?}, QS witness ratio {:.1} near slit {}; inversion {}",
            w.s,
            near_slit(w.points[0]) && near_slit(w.points[2]),
            inv_detail.join(", ")
        ),
    );
}

#[test]
fn c11_push_chain_z_squared() {
    let h = 1.0 / 256.0;
    let d = domain("half_disk", &[], None, h);
    let z2 = MapSpec::named("z_squared").unwrap();
    let mapped = apply_map(&z2, &d, h / 2.0).unwrap();
    let mut anchors: Vec<Point> = [-0.6, -0.3, 0.3, 0.6].iter().map(|&x| Point::new(x, 0.0)).collect();
    anchors.extend([0.2, 0.4, 0.6, 0.8].iter().map(|&f| Point::new((f * PI).cos(), (f * PI).sin())));
    let mut chains = Vec::new();
    for p in &anchors {
        let a = BoundaryAnchor::new(&d, *p).unwrap();
        let t = scale_component_tree(&d, &a, 0.6, 5).unwrap();
        chains.extend(enumerate_prime_end_approximations(&d, &t));
    }
    let pushed: Vec<_> = chains.iter().map(|c| push_chain(&d, &mapped, c)).collect();
    let kept = pushed.iter().filter(|p| p.preserved() && p.source_singleton).count();
    let rep = extension_consistency(&d, &mapped, &chains);
    verdict(
        11,
        kept == chains.len() && chains.len() >= 8 && rep.all_pass(),
        format!(
            "{} chains from 8 anchors, {kept} preserved with singleton impressions; divisibility {}/{}, singletons {}/{}",
            chains.len(),
            rep.divisibility_preserved,
            rep.divisibility_total,
            rep.singleton_preserved,
            rep.singleton_total
        ),
    );
}

#[test]
fn c08_modulus_benchmark() {
    let rect = |k: usize| {
        let (nx, ny) = (60 * k, 30 * k);
        let d = GridDomain::from_mask("rect", 1.0 / (30 * k) as f64, Point::new(0.0, 0.0), nx, ny, vec![true; nx * ny]);
        let e: Region = (0..ny).map(|j| d.index(0, j)).collect();
        let f: Region = (0..ny).map(|j| d.index(nx - 1, j)).collect();
        modulus(&d, &e, &f, 2.0, DEFAULT_TOL).unwrap().value
    };
    let (v1, v2) = (rect(1), rect(2));
    let within = (v1 - 0.5).abs() <= 0.075;
    let stable = (v2 - v1).abs() / v1 < 0.08;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut instances, mut worst) = (0, 0.0f64);
    for _ in 0..300 {
        let (nx, ny) = (rng.gen_range(2..=5), rng.gen_range(1..=4));
        let mask: Vec<bool> = (0..nx * ny).map(|_| rng.gen_bool(0.8)).collect();
        let d = GridDomain::from_mask("small", 0.25, Point::new(0.0, 0.0), nx, ny, mask);
        let e: Region = (0..ny).map(|j| d.index(0, j)).filter(|&c| d.is_inside(c)).collect();
        let f: Region = (0..ny).map(|j| d.index(nx - 1, j)).filter(|&c| d.is_inside(c)).collect();
        if e.is_empty() || f.is_empty() {
            continue;
        }
        let Ok(oracle) = modulus_oracle_small(&d, &e, &f, 2.0) else { continue };
        let value = match modulus(&d, &e, &f, 2.0, DEFAULT_TOL) {
            Ok(s) => s.value,
            Err(Error::NoCurves) => 0.0,
            Err(err) => panic!("{err}"),
        };
        worst = worst.max((value - oracle).abs());
        instances += 1;
    }
    verdict(
        8,
        within && stable && worst <= 1e-3,
        format!("60x30: {v1:.5}, 120x60: {v2:.5}; oracle on {instances} small instances, max |diff| {worst:.2e}"),
    );
}

#[test]
fn c09_qc_conformal() {
    let h = 1.0 / 32.0;
    let d = domain("half_disk", &[], None, h);
    let fams = rectangle_families(&d, 10, 2, 0.35, 0.8);
    let z2 = apply_map(&MapSpec::named("z_squared").unwrap(), &d, h / 2.0).unwrap();
    let id = apply_map(&MapSpec::named("identity").unwrap(), &d, h).unwrap();
    let a = qc_distortion(&d, &z2, &fams, 2.0, 1e-2).unwrap().bracket;
    let b = qc_distortion(&d, &id, &fams, 2.0, 1e-2).unwrap().bracket;
    let ok = fams.len() == 10 && a.0 >= 0.5 && a.1 <= 2.0 && b.0 >= 0.99 && b.1 <= 1.01;
    verdict(9, ok, format!("{} families; z^2 [{:.3}, {:.3}], identity [{:.4}, {:.4}]", fams.len(), a.0, a.1, b.0, b.1));
}

#[test]
fn c13_determinism() {
    let configs = [
        r#"{"domain": {"generator": "half_disk"}, "spacing": 0.015625, "analyses": [
            {"kind": "check_bqs", "map": {"kind": "z_squared"}, "pairs": 60, "seed": 5},
            {"kind": "check_qs", "map": {"kind": "z_squared"}, "triples": 200, "seed": 5},
            {"kind": "bounded_turning", "samples": 100, "seed": 5}]}"#,
        r#"{"domain": {"generator": "rectangle"}, "spacing": 0.0625, "analyses": [
            {"kind": "loewner", "q": 2.0, "samples": 12, "seed": 5}]}"#,
    ];
    let mut identical = Vec::new();
    for text in configs {
        let cfg = ReportConfig::from_json(text).unwrap();
        let a = run_report(&cfg).unwrap().result_section();
        let b = run_report(&cfg).unwrap().result_section();
        identical.push(a == b && !a.contains("\"error\""));
    }
    let d = domain("slit_disk", &[], None, 1.0 / 64.0);
    let p1 = sample_continuum_pairs(&d, 30, PairMode::Disjoint, (0.05, 0.5), 9).unwrap();
    let p2 = sample_continuum_pairs(&d, 30, PairMode::Disjoint, (0.05, 0.5), 9).unwrap();
    identical.push(serde_json::to_string(&p1).unwrap() == serde_json::to_string(&p2).unwrap());
    verdict(13, identical.iter().all(|&b| b), format!("repeated runs byte-identical: {identical:?}"));
}
