//! Config-driven analysis runs with structured-text reports and SVG artifacts.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::{generate, DomainSpec};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{rasterize, BoundaryAnchor, Cell, GridDomain, Region};
use crate::maps::{
    apply_map, eta_envelope, extension_consistency, push_chain, quasisymmetry_envelope, sample_continuum_pairs,
    EtaEnvelope, MapKind, MapSpec, PairMode,
};
use crate::mazurkiewicz::{bounded_turning_constant, mazurkiewicz_distance};
use crate::modulus::{loewner_profile, modulus, qc_distortion, rectangle_families, DEFAULT_TOL};
use crate::prime_ends::{
    classify_end, ends_at_infinity, enumerate_prime_end_approximations, finite_connectivity_check, impression,
    scale_component_tree, Chain, EndKind,
};
use crate::svg;

/// Either a full domain spec or a generator name with parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    Spec(DomainSpec),
    Generator {
        generator: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        #[serde(default)]
        truncation: Option<u32>,
    },
}

impl DomainRef {
    pub fn spec(&self) -> Result<DomainSpec> {
        match self {
            DomainRef::Spec(s) => {
                s.validate()?;
                Ok(s.clone())
            }
            DomainRef::Generator { generator, params, truncation } => generate(generator, params, *truncation),
        }
    }
}

fn default_p() -> f64 {
    2.0
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_qc_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analysis {
    Mazurkiewicz {
        x: [f64; 2],
        y: [f64; 2],
    },
    BoundedTurning {
        samples: usize,
        seed: u64,
    },
    PrimeEnds {
        anchors: Vec<[f64; 2]>,
        r0: f64,
        depth: usize,
    },
    FiniteConnectivity {
        anchor: [f64; 2],
        radii: Vec<f64>,
    },
    EndsAtInfinity {
        basepoint: [f64; 2],
        radii: Vec<f64>,
    },
    CheckBqs {
        map: MapSpec,
        pairs: usize,
        seed: u64,
        #[serde(default)]
        scale: Option<[f64; 2]>,
        #[serde(default)]
        t_probe: Option<f64>,
    },
    CheckQs {
        map: MapSpec,
        triples: usize,
        seed: u64,
    },
    PushChain {
        map: MapSpec,
        anchors: Vec<[f64; 2]>,
        r0: f64,
        depth: usize,
        #[serde(default)]
        image_spacing: Option<f64>,
    },
    Modulus {
        e: String,
        f: String,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Loewner {
        q: f64,
        samples: usize,
        seed: u64,
    },
    QcCheck {
        map: MapSpec,
        families: usize,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_qc_tol")]
        tol: f64,
        #[serde(default)]
        image_spacing: Option<f64>,
    },
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Mazurkiewicz { .. } => "mazurkiewicz",
            Analysis::BoundedTurning { .. } => "bounded_turning",
            Analysis::PrimeEnds { .. } => "prime_ends",
            Analysis::FiniteConnectivity { .. } => "finite_connectivity",
            Analysis::EndsAtInfinity { .. } => "ends_at_infinity",
            Analysis::CheckBqs { .. } => "check_bqs",
            Analysis::CheckQs { .. } => "check_qs",
            Analysis::PushChain { .. } => "push_chain",
            Analysis::Modulus { .. } => "modulus",
            Analysis::Loewner { .. } => "loewner",
            Analysis::QcCheck { .. } => "qc_check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub analysis: Analysis,
    /// Required values of top-level result fields.
    #[serde(default)]
    pub expect: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub domain: DomainRef,
    pub spacing: f64,
    #[serde(default)]
    pub analyses: Vec<AnalysisConfig>,
}

impl ReportConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOutput {
    pub name: String,
    pub kind: String,
    /// Result fields, or `{"error": ...}`.
    pub result: Value,
    /// Failed expectations, as `key: expected vs actual`.
    pub failures: Vec<String>,
}

impl AnalysisOutput {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.result.get("error").is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: ReportConfig,
    pub results: Vec<AnalysisOutput>,
    pub timings_ms: BTreeMap<String, f64>,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.results.iter().all(AnalysisOutput::passed)
    }

    /// Everything except timing; identical configs give identical bytes.
    pub fn result_section(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let _ = writeln!(out, "[result {}]", r.name);
            let _ = writeln!(out, "kind = {}", r.kind);
            let _ = writeln!(out, "status = {}", if r.passed() { "pass" } else { "fail" });
            for f in &r.failures {
                let _ = writeln!(out, "expectation failed: {f}");
            }
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&r.result).expect("json"));
            out.push('\n');
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::from("mazlab report\n\n[config]\n");
        out.push_str(&self.config.to_json());
        out.push_str("\n\n");
        out.push_str(&self.result_section());
        out.push_str("[provenance]\n");
        let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.timings_ms {
            let _ = writeln!(out, "elapsed_ms.{k} = {v:.1}");
        }
        out
    }
}

fn pt(a: [f64; 2]) -> Point {
    Point::new(a[0], a[1])
}

fn inside_cell(d: &GridDomain, a: [f64; 2]) -> Result<Cell> {
    d.cell_at(pt(a))
        .filter(|&c| d.is_inside(c))
        .or_else(|| d.nearest_inside(pt(a)))
        .ok_or_else(|| Error::Invalid(format!("no inside cell near {a:?}")))
}

/// `left`, `right`, `bottom`, `top` (outermost inside column or row) or a box `x0,y0,x1,y1`.
pub fn parse_region(d: &GridDomain, text: &str) -> Result<Region> {
    let inside = d.inside_cells();
    let pick = |key: fn(&GridDomain, Cell) -> i64| -> Region {
        let best = inside.iter().map(|c| key(d, c)).min();
        inside.iter().filter(|&c| Some(key(d, c)) == best).collect()
    };
    let r = match text.trim() {
        "left" => pick(|d, c| d.ij(c).0 as i64),
        "right" => pick(|d, c| -(d.ij(c).0 as i64)),
        "bottom" => pick(|d, c| d.ij(c).1 as i64),
        "top" => pick(|d, c| -(d.ij(c).1 as i64)),
        other => {
            let v: Vec<f64> = other
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Invalid(format!("bad region `{other}`")))?;
            let [x0, y0, x1, y1] = v[..] else {
                return Err(Error::Invalid(format!("region `{other}` needs 4 numbers")));
            };
            inside
                .iter()
                .filter(|&c| {
                    let p = d.center(c);
                    p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1
                })
                .collect()
        }
    };
    if r.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(r)
}

fn envelope_json(env: &EtaEnvelope, probe: f64) -> Value {
    json!({
        "samples": env.points.len(),
        "max": env.max(),
        "t_probe": probe,
        "eta_at_probe": env.at(probe),
        "small_t_trend": env.small_t_trend,
        "witness": env.witness,
        "staircase": env.points,
    })
}

fn chain_json(d: &GridDomain, c: &Chain) -> Value {
    let imp = impression(d, c);
    json!({
        "depth": c.depth(),
        "flags": c.flags,
        "separation_lower": c.separation.iter().map(|s| s.lower).collect::<Vec<_>>(),
        "impression": match &imp {
            Ok(i) => json!({
                "diameter": i.diameter,
                "extrapolated_diameter": i.extrapolated_diameter,
                "connected": i.connected,
                "singleton": i.singleton,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        },
    })
}

fn run_one(d: &GridDomain, name: &str, a: &Analysis, art: &mut Vec<Artifact>) -> Result<Value> {
    let h = d.spacing;
    Ok(match a {
        Analysis::Mazurkiewicz { x, y } => {
            let (cx, cy) = (inside_cell(d, *x)?, inside_cell(d, *y)?);
            let e = mazurkiewicz_distance(d, cx, cy)?;
            art.push(Artifact { file: format!("{name}.svg"), contents: svg::domain_svg(d, &[(e.witness.clone(), "#d62728".into())]) });
            json!({
                "x": d.center(cx), "y": d.center(cy),
                "euclidean": d.dist(cx, cy),
                "lower": e.lower, "upper": e.upper,
                "witness_cells": e.witness.len(),
            })
        }
        Analysis::BoundedTurning { samples, seed } => serde_json::to_value(bounded_turning_constant(d, *samples, *seed)?)?,
        Analysis::PrimeEnds { anchors, r0, depth } => {
            let mut per = Vec::new();
            let mut all_singleton = true;
            let mut all_flags = true;
            for (k, p) in anchors.iter().enumerate() {
                let anchor = BoundaryAnchor::new(d, pt(*p))?;
                let tree = scale_component_tree(d, &anchor, *r0, *depth)?;
                let chains = enumerate_prime_end_approximations(d, &tree);
                for c in &chains {
                    all_flags &= c.flags.all();
                    all_singleton &= impression(d, c).is_ok_and(|i| i.singleton);
                }
                if let Some(c) = chains.first() {
                    art.push(Artifact { file: format!("{name}-anchor{k}.svg"), contents: svg::links_svg(d, &c.links) });
                }
                per.push(json!({
                    "anchor": p,
                    "level_counts": tree.level_counts(),
                    "chains": chains.iter().map(|c| chain_json(d, c)).collect::<Vec<_>>(),
                }));
            }
            json!({ "anchors": per, "all_singleton": all_singleton, "all_flags": all_flags })
        }
        Analysis::FiniteConnectivity { anchor, radii } => {
            let a = BoundaryAnchor::new(d, pt(*anchor))?;
            serde_json::to_value(finite_connectivity_check(d, &a, radii))?
        }
        Analysis::EndsAtInfinity { basepoint, radii } => {
            let rep = ends_at_infinity(d, inside_cell(d, *basepoint)?, radii)?;
            let mut counts = BTreeMap::from([("A", 0), ("B", 0), ("C", 0), ("uncertified", 0)]);
            let chains: Vec<Value> = rep
                .chains
                .iter()
                .map(|c| {
                    let class = classify_end(d, c);
                    let key = match &class {
                        Ok(k) if k.kind == EndKind::A => "A",
                        Ok(k) if k.kind == EndKind::B => "B",
                        Ok(_) => "C",
                        Err(_) => "uncertified",
                    };
                    *counts.get_mut(key).expect("known key") += 1;
                    let mut v = chain_json(d, c);
                    v["class"] = match class {
                        Ok(k) => json!({ "kind": k.kind, "link": k.link, "certificate_diameter": k.certificate_diameter }),
                        Err(e) => json!({ "error": e.to_string() }),
                    };
                    v
                })
                .collect();
            if let Some(c) = rep.chains.first() {
                art.push(Artifact { file: format!("{name}.svg"), contents: svg::links_svg(d, &c.links) });
            }
            json!({ "radii": rep.radii, "unbounded_counts": rep.unbounded_counts, "classes": counts, "chains": chains })
        }
        Analysis::CheckBqs { map, pairs, seed, scale, t_probe } => {
            let hull = crate::grid::point_diameter(&d.centers(&d.inside_cells()));
            let scale = scale.map_or((4.0 * h, hull), |s| (s[0], s[1]));
            let ps = sample_continuum_pairs(d, *pairs, PairMode::Intersecting, scale, *seed)?;
            let env = eta_envelope(map, d, &ps)?;
            art.push(Artifact { file: format!("{name}.svg"), contents: svg::envelope_svg(&env.points) });
            let mut v = envelope_json(&env, t_probe.unwrap_or(0.01));
            v["adversarial_pairs"] = json!(ps.iter().filter(|p| p.adversarial).count());
            v
        }
        Analysis::CheckQs { map, triples, seed } => {
            let env = quasisymmetry_envelope(map, d, *triples, *seed)?;
            art.push(Artifact { file: format!("{name}.svg"), contents: svg::envelope_svg(&env.points) });
            envelope_json(&env, 1.0)
        }
        Analysis::PushChain { map, anchors, r0, depth, image_spacing } => {
            let mapped = apply_map(map, d, image_spacing.unwrap_or(h / 2.0))?;
            let mut chains = Vec::new();
            for p in anchors {
                let anchor = BoundaryAnchor::new(d, pt(*p))?;
                chains.extend(enumerate_prime_end_approximations(d, &scale_component_tree(d, &anchor, *r0, *depth)?));
            }
            let pushed: Vec<Value> = chains
                .iter()
                .map(|c| {
                    let pc = push_chain(d, &mapped, c);
                    json!({
                        "anchor": c.anchor,
                        "source_flags": pc.source_flags,
                        "image_flags": pc.chain.flags,
                        "source_singleton": pc.source_singleton,
                        "image_singleton": pc.image_singleton,
                        "preserved": pc.preserved(),
                    })
                })
                .collect();
            let rep = extension_consistency(d, &mapped, &chains);
            art.push(Artifact { file: format!("{name}-image.svg"), contents: svg::domain_svg(&mapped.image, &[]) });
            json!({
                "image_cells": mapped.image.inside_count(),
                "chains": pushed,
                "extension": rep,
                "all_preserved": rep.all_pass(),
            })
        }
        Analysis::Modulus { e, f, p, tol } => {
            let (re, rf) = (parse_region(d, e)?, parse_region(d, f)?);
            match modulus(d, &re, &rf, *p, *tol) {
                Ok(s) => {
                    art.push(Artifact { file: format!("{name}-density.svg"), contents: svg::heatmap_svg(d, &s.density) });
                    art.push(Artifact { file: format!("{name}-density.pgm"), contents: density_pgm(d, &s.density) });
                    json!({
                        "value": s.value, "lower": s.lower, "upper": s.upper,
                        "gap": s.gap, "rounds": s.rounds, "curves": s.curves.len(), "p": s.p,
                    })
                }
                Err(Error::NoCurves) => json!({ "value": 0.0, "curves": 0, "note": "E and F are not connected" }),
                Err(e) => return Err(e),
            }
        }
        Analysis::Loewner { q, samples, seed } => serde_json::to_value(loewner_profile(d, *q, *samples, *seed)?)?,
        Analysis::QcCheck { map, families, p, tol, image_spacing } => {
            let default_spacing = if map.kind == MapKind::Identity { h } else { h / 2.0 };
            let mapped = apply_map(map, d, image_spacing.unwrap_or(default_spacing))?;
            let fams = rectangle_families(d, *families, 2, 0.35, 0.8);
            let rep = qc_distortion(d, &mapped, &fams, *p, *tol)?;
            json!({ "families": rep.families.len(), "ratios": rep.families, "bracket": rep.bracket })
        }
    })
}

/// Raw `P2` raster of the density, scaled to 0..=255.
pub fn density_pgm(d: &GridDomain, density: &[f64]) -> String {
    let top = density.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P2\n# spacing {}\n{} {}\n255\n", d.spacing, d.nx, d.ny);
    for j in (0..d.ny).rev() {
        let row: Vec<String> = (0..d.nx)
            .map(|i| {
                let v = density[d.index(i, j)];
                let g = if top > 0.0 { (255.0 * v / top).round() as u32 } else { 0 };
                g.to_string()
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn check(result: &Value, expect: &BTreeMap<String, Value>) -> Vec<String> {
    expect
        .iter()
        .filter_map(|(k, want)| {
            let got = result.get(k).cloned().unwrap_or(Value::Null);
            let ok = match (got.as_f64(), want.as_f64()) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-6 * b.abs().max(1.0),
                _ => got == *want,
            };
            (!ok).then(|| format!("{k}: expected {want} got {got}"))
        })
        .collect()
}

/// Rasterize the configured domain and run every analysis in name order.
pub fn run_report(config: &ReportConfig) -> Result<Report> {
    let spec = config.domain.spec()?;
    let d = rasterize(&spec, config.spacing)?;
    let mut named: Vec<(String, &AnalysisConfig)> = config
        .analyses
        .iter()
        .enumerate()
        .map(|(k, a)| (a.name.clone().unwrap_or_else(|| format!("{:02}-{}", k + 1, a.analysis.kind())), a))
        .collect();
    named.sort_by(|a, b| a.0.cmp(&b.0));
    let mut results = Vec::new();
    let mut timings_ms = BTreeMap::new();
    let mut artifacts = vec![Artifact { file: "domain.svg".into(), contents: svg::domain_svg(&d, &[]) }];
    for (name, a) in named {
        let start = Instant::now();
        let (result, failures) = match run_one(&d, &name, &a.analysis, &mut artifacts) {
            Ok(v) => {
                let f = check(&v, &a.expect);
                (v, f)
            }
            Err(e) => (json!({ "error": e.to_string() }), Vec::new()),
        };
        timings_ms.insert(name.clone(), start.elapsed().as_secs_f64() * 1e3);
        results.push(AnalysisOutput { name, kind: a.analysis.kind().to_string(), result, failures });
    }
    Ok(Report { config: config.clone(), results, timings_ms, artifacts })
}
