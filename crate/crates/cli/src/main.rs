use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mazlab::corpus::{generate, DomainSpec};
use mazlab::maps::MapSpec;
use mazlab::report::{Analysis, AnalysisConfig, DomainRef};
use mazlab::{rasterize, run_report, Report, ReportConfig};
use serde_json::Value;

/// Prime ends, the Mazurkiewicz metric and curve modulus on rasterized planar domains.
///
/// Reports go to stdout. When MAZLAB_OUT names a directory, the report and its
/// SVG and raster artifacts are also written there.
#[derive(Parser)]
#[command(name = "mazlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DomainArgs {
    /// JSON domain spec file.
    #[arg(long, conflicts_with = "generator")]
    domain: Option<PathBuf>,
    /// Generator name, e.g. disk, slit_disk, harmonic_comb.
    #[arg(long)]
    generator: Option<String>,
    /// Generator parameter as key=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long)]
    truncation: Option<u32>,
    /// Grid spacing h.
    #[arg(long)]
    spacing: f64,
    /// Required result field as key=json; repeatable.
    #[arg(long = "expect", value_parser = parse_expect)]
    expect: Vec<(String, Value)>,
}

#[derive(Args, Clone)]
struct MapArgs {
    /// z_squared, angle_doubling, inversion, fold_xy, identity or affine.
    #[arg(long)]
    map: String,
    /// Map parameter as key=value (affine: a11 a12 a21 a22 tx ty).
    #[arg(long = "map-param", value_parser = parse_param)]
    map_params: Vec<(String, f64)>,
}

impl MapArgs {
    fn spec(&self) -> Result<MapSpec> {
        let mut m = MapSpec::named(&self.map)?;
        for (k, v) in &self.map_params {
            m = m.with(k, *v);
        }
        Ok(m)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print a domain spec as JSON; with --spacing also write the grid bitmask (PBM).
    GenerateDomain {
        #[arg(long)]
        generator: String,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long)]
        truncation: Option<u32>,
        /// Window override as x0,y0,x1,y1.
        #[arg(long, value_parser = parse_point4)]
        window: Option<[f64; 4]>,
        #[arg(long)]
        spacing: Option<f64>,
        /// Bitmask output file (PBM); defaults to stdout after the spec.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Bracket the Mazurkiewicz distance between two points.
    Mazurkiewicz {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        x: [f64; 2],
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        y: [f64; 2],
        /// Also sample the bounded-turning constant with this many pairs.
        #[arg(long)]
        turning_samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Chains of nested components at boundary anchors.
    PrimeEnds {
        #[command(flatten)]
        domain: DomainArgs,
        /// Anchors as x,y;x,y;...
        #[arg(long, value_parser = parse_points, allow_hyphen_values = true)]
        anchors: PointList,
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        depth: usize,
    },
    /// Finite connectedness test at one boundary point.
    FiniteConnectivity {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        anchor: [f64; 2],
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
    },
    /// Ends at infinity of a domain with open window sides, with their A/B/C class.
    EndsAtInfinity {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        basepoint: [f64; 2],
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
    },
    /// Diameter-ratio envelope over intersecting continua.
    CheckBqs {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report the envelope at this t.
        #[arg(long)]
        t_probe: Option<f64>,
    },
    /// Three-point distance-ratio envelope.
    CheckQs {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 400)]
        triples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Push chains through a map and compare flags, singletons and divisibility.
    PushChain {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_parser = parse_points, allow_hyphen_values = true)]
        anchors: PointList,
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        image_spacing: Option<f64>,
    },
    /// Discrete p-modulus of the curves joining E and F.
    Modulus {
        #[command(flatten)]
        domain: DomainArgs,
        /// left, right, bottom, top or a box x0,y0,x1,y1.
        #[arg(long = "E", allow_hyphen_values = true)]
        e: String,
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Fit the Loewner function constant from sampled continua.
    Loewner {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long = "Q", default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Modulus distortion of a map over rectangle-like families.
    QcCheck {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 10)]
        families: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long)]
        image_spacing: Option<f64>,
    },
    /// Run every analysis in a JSON config; exit code 1 if any expectation fails.
    Report {
        config: PathBuf,
    },
}

type PointList = Vec<[f64; 2]>;

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().parse().map_err(|_| format!("bad number in `{s}`"))?))
}

fn parse_expect(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=json, got `{s}`"))?;
    Ok((k.trim().to_string(), serde_json::from_str(v.trim()).map_err(|e| e.to_string())?))
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number in `{s}`"))).collect()
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    numbers(s)?.try_into().map_err(|_| format!("expected x,y, got `{s}`"))
}

fn parse_point4(s: &str) -> Result<[f64; 4], String> {
    numbers(s)?.try_into().map_err(|_| format!("expected x0,y0,x1,y1, got `{s}`"))
}

fn parse_points(s: &str) -> Result<PointList, String> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_point).collect()
}

impl DomainArgs {
    fn domain_ref(&self) -> Result<DomainRef> {
        match (&self.domain, &self.generator) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok(DomainRef::Spec(DomainSpec::from_json(&text)?))
            }
            (None, Some(g)) => Ok(DomainRef::Generator {
                generator: g.clone(),
                params: self.params.iter().cloned().collect(),
                truncation: self.truncation,
            }),
            (None, None) => bail!("give --domain FILE or --generator NAME"),
        }
    }

    fn config(&self, analysis: Analysis) -> Result<ReportConfig> {
        Ok(ReportConfig {
            domain: self.domain_ref()?,
            spacing: self.spacing,
            analyses: vec![AnalysisConfig { name: None, analysis, expect: self.expect.iter().cloned().collect() }],
        })
    }
}

fn emit(report: &Report) -> Result<ExitCode> {
    print!("{}", report.render());
    if let Ok(dir) = std::env::var("MAZLAB_OUT") {
        let dir = PathBuf::from(dir);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("report.txt"), report.render())?;
        for a in &report.artifacts {
            std::fs::write(dir.join(&a.file), &a.contents)?;
        }
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (args, analysis) = match cli.command {
        Command::GenerateDomain { generator, params, truncation, window, spacing, mask } => {
            let params: BTreeMap<String, f64> = params.into_iter().collect();
            let mut spec = generate(&generator, &params, truncation)?;
            if let Some(w) = window {
                spec = spec.with_window(w);
                spec.validate()?;
            }
            println!("{}", spec.to_json());
            if let Some(h) = spacing {
                let pbm = rasterize(&spec, h)?.to_pbm();
                match mask {
                    Some(path) => std::fs::write(&path, pbm).with_context(|| format!("writing {}", path.display()))?,
                    None => print!("{pbm}"),
                }
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Report { config } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            return emit(&run_report(&ReportConfig::from_json(&text)?)?);
        }
        Command::Mazurkiewicz { domain, x, y, turning_samples, seed } => {
            let mut cfg = domain.config(Analysis::Mazurkiewicz { x, y })?;
            if let Some(samples) = turning_samples {
                cfg.analyses.push(AnalysisConfig {
                    name: None,
                    analysis: Analysis::BoundedTurning { samples, seed },
                    expect: BTreeMap::new(),
                });
            }
            return emit(&run_report(&cfg)?);
        }
        Command::PrimeEnds { domain, anchors, r0, depth } => (domain, Analysis::PrimeEnds { anchors, r0, depth }),
        Command::FiniteConnectivity { domain, anchor, radii } => {
            (domain, Analysis::FiniteConnectivity { anchor, radii })
        }
        Command::EndsAtInfinity { domain, basepoint, radii } => (domain, Analysis::EndsAtInfinity { basepoint, radii }),
        Command::CheckBqs { domain, map, pairs, seed, t_probe } => {
            (domain, Analysis::CheckBqs { map: map.spec()?, pairs, seed, scale: None, t_probe })
        }
        Command::CheckQs { domain, map, triples, seed } => {
            (domain, Analysis::CheckQs { map: map.spec()?, triples, seed })
        }
        Command::PushChain { domain, map, anchors, r0, depth, image_spacing } => {
            (domain, Analysis::PushChain { map: map.spec()?, anchors, r0, depth, image_spacing })
        }
        Command::Modulus { domain, e, f, p, tol } => (domain, Analysis::Modulus { e, f, p, tol }),
        Command::Loewner { domain, q, samples, seed } => (domain, Analysis::Loewner { q, samples, seed }),
        Command::QcCheck { domain, map, families, p, tol, image_spacing } => {
            (domain, Analysis::QcCheck { map: map.spec()?, families, p, tol, image_spacing })
        }
    };
    emit(&run_report(&args.config(analysis)?)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
