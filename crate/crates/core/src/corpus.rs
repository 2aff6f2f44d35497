//! Generators for the example domains.
//!
//! A [`DomainSpec`] is the serializable description (generator name, numeric
//! parameters, window, truncation). [`DomainSpec::geometry`] turns it into exact
//! planar [`Geometry`] that `grid::rasterize` samples. Generators for infinite
//! families keep the first `truncation` members only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, OpenSides, Point, Rect, Segment, Shape};

pub const GENERATORS: &[&str] = &[
    "rectangle",
    "disk",
    "half_disk",
    "slit_disk",
    "annulus",
    "harmonic_comb",
    "comb_1_over_n",
    "double_comb",
    "double_comb_fixed",
    "barrier_gate",
    "gate_domain",
    "strip",
    "strip_with_slits",
    "half_plane",
    "spiral_tube",
];

fn is_infinite_family(name: &str) -> bool {
    matches!(
        name,
        "harmonic_comb"
            | "comb_1_over_n"
            | "double_comb"
            | "double_comb_fixed"
            | "gate_domain"
            | "strip_with_slits"
            | "spiral_tube"
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub window: [f64; 4],
    #[serde(default = "one")]
    pub truncation: u32,
}

fn one() -> u32 {
    1
}

impl DomainSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DomainSpec =
            serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn window_rect(&self) -> Rect {
        Rect::from_array(self.window)
    }

    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn validate(&self) -> Result<()> {
        if !GENERATORS.contains(&self.name.as_str()) {
            return Err(Error::UnknownGenerator(self.name.clone()));
        }
        let w = self.window_rect();
        if !(w.width() > 0.0 && w.height() > 0.0) || !w.width().is_finite() || !w.height().is_finite()
        {
            return Err(self.bad("window must have positive finite width and height"));
        }
        if is_infinite_family(&self.name) && self.truncation < 1 {
            return Err(self.bad("truncation must be at least 1"));
        }
        Ok(())
    }

    fn bad(&self, reason: &str) -> Error {
        Error::BadParams { generator: self.name.clone(), reason: reason.to_string() }
    }

    /// Exact geometry of the truncated domain.
    pub fn geometry(&self) -> Result<Geometry> {
        self.validate()?;
        let t = self.truncation as usize;
        let win = self.window_rect();
        let g = match self.name.as_str() {
            "rectangle" => {
                let mut g = Geometry::new(vec![Shape::Rect(Rect::new(
                    self.param("x0", 0.0),
                    self.param("y0", 0.0),
                    self.param("x1", 1.0),
                    self.param("y1", 1.0),
                ))]);
                g.min_gap = self.param("x1", 1.0).min(self.param("y1", 1.0));
                g
            }
            "disk" => {
                let r = self.param("r", 1.0);
                let mut g = Geometry::new(vec![Shape::Disk {
                    cx: self.param("cx", 0.0),
                    cy: self.param("cy", 0.0),
                    r,
                }]);
                g.min_gap = r;
                g
            }
            "half_disk" => {
                let r = self.param("r", 1.0);
                let mut g = Geometry::new(vec![Shape::UpperHalfDisk { r }]);
                g.min_gap = r / 2.0;
                g
            }
            "slit_disk" => {
                let mut g = Geometry::new(vec![Shape::Disk { cx: 0.0, cy: 0.0, r: 1.0 }]);
                g.obstacles.push(Segment::horizontal(0.0, 1.0, 0.0));
                g.min_gap = 0.5;
                g
            }
            "annulus" => {
                let r_in = self.param("r_in", 0.005);
                let r_out = self.param("r_out", 1.1);
                if !(r_in > 0.0 && r_out > r_in) {
                    return Err(self.bad("need 0 < r_in < r_out"));
                }
                let mut g =
                    Geometry::new(vec![Shape::Annulus { cx: 0.0, cy: 0.0, r_in, r_out }]);
                g.min_gap = 2.0 * r_in;
                g
            }
            "harmonic_comb" | "comb_1_over_n" => {
                let mut g = Geometry::new(vec![Shape::Rect(Rect::new(0.0, 0.0, 1.0, 1.0))]);
                for n in 1..=t {
                    let x = 1.0 / (n as f64 + 1.0);
                    g.obstacles.push(Segment::vertical(x, 0.0, 0.5));
                }
                let last = 1.0 / (t as f64 + 1.0);
                // gap between the last two teeth, or the last tooth and the wall
                g.min_gap = if t >= 2 { 1.0 / t as f64 - last } else { 0.5 }.min(last);
                if self.param("residue", 1.0) != 0.0 {
                    g.residue.push(Rect::new(0.0, 0.0, last, 0.5));
                }
                g
            }
            "double_comb" | "double_comb_fixed" => {
                let fixed = self.name == "double_comb_fixed";
                let mut g = Geometry::new(vec![Shape::Rect(Rect::new(0.0, 0.0, 1.0, 1.0))]);
                let mut heights = vec![1.0];
                for n in 1..=t {
                    let nf = n as f64;
                    let (l_end, r_start) =
                        if fixed { (2.0 / 3.0, 1.0 / 3.0) } else { (1.0 - 1.0 / nf, 1.0 / nf) };
                    let (yl, yr) = (1.0 / (2.0 * nf), 1.0 / (2.0 * nf + 1.0));
                    if l_end > 0.0 {
                        g.obstacles.push(Segment::horizontal(0.0, l_end, yl));
                        heights.push(yl);
                    }
                    if r_start < 1.0 {
                        g.obstacles.push(Segment::horizontal(r_start, 1.0, yr));
                        heights.push(yr);
                    }
                }
                heights.push(0.0);
                heights.sort_by(f64::total_cmp);
                g.min_gap = heights.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                if self.param("residue", 0.0) != 0.0 {
                    g.residue.push(Rect::new(0.0, 0.0, 1.0, 1.0 / (2.0 * t as f64 + 1.0)));
                }
                g
            }
            "barrier_gate" => {
                let h = self.param("h", 0.5);
                let k_max = self.param("k_max", 1.0) as usize;
                let mut g = Geometry::new(vec![Shape::Rect(win)]);
                let (obs, gap) = gate_barrier(h, k_max, 0.0, 0.0, win.x0, win.x1);
                g.obstacles = obs;
                g.min_gap = gap;
                g
            }
            "gate_domain" => self.gate_domain(t, win)?,
            "strip" => {
                let mut g = Geometry::new(vec![Shape::Rect(Rect::new(
                    0.0,
                    0.0,
                    f64::INFINITY,
                    1.0,
                ))]);
                g.open_sides.right = true;
                g.min_gap = 1.0;
                g
            }
            "strip_with_slits" => {
                let mut g = Geometry::new(vec![Shape::Rect(Rect::new(
                    0.0,
                    0.0,
                    f64::INFINITY,
                    1.0,
                ))]);
                for k in 1..=t {
                    let y = 0.5f64.powi(k as i32);
                    g.obstacles.push(Segment::horizontal(0.0, k as f64, y));
                }
                g.open_sides.right = true;
                g.min_gap = 0.5f64.powi(t as i32);
                if self.param("residue", 0.0) != 0.0 {
                    g.residue.push(Rect::new(0.0, 0.0, f64::INFINITY, 0.5f64.powi(t as i32)));
                }
                g
            }
            "half_plane" => {
                let mut g = Geometry::new(vec![Shape::Rect(Rect::new(
                    f64::NEG_INFINITY,
                    0.0,
                    f64::INFINITY,
                    f64::INFINITY,
                ))]);
                g.open_sides = OpenSides { left: true, right: true, top: true, bottom: false };
                g.min_gap = win.height();
                g
            }
            "spiral_tube" => self.spiral_tube(t)?,
            other => return Err(Error::UnknownGenerator(other.to_string())),
        };
        Ok(g)
    }

    fn gate_domain(&self, t: usize, win: Rect) -> Result<Geometry> {
        let k_max = self.param("k_max", 2.0) as usize;
        if k_max < 1 {
            return Err(self.bad("k_max must be at least 1"));
        }
        let mut g = Geometry::new(vec![Shape::Rect(Rect::new(
            f64::NEG_INFINITY,
            0.0,
            f64::INFINITY,
            f64::INFINITY,
        ))]);
        g.open_sides = OpenSides { left: true, right: true, top: true, bottom: false };
        let mut gap = f64::INFINITY;
        for j in 2..(2 + t) {
            let jf = j as i32;
            // default heights h_j = 2^{-4j}; `height` rescales to h_j = height * 2^{-j}
            let h = match self.params.get("height") {
                Some(&s) => s * 0.5f64.powi(jf),
                None => 0.5f64.powi(4 * jf),
            };
            let (cx, cy) = (2f64.powi(jf), 0.5f64.powi(jf));
            let (obs, gg) = gate_barrier(h, k_max, cx, cy, win.x0, win.x1);
            g.obstacles.extend(obs);
            gap = gap.min(gg);
            // distance to the next barrier line below
            gap = gap.min(cy / 2.0 - h);
        }
        g.min_gap = gap;
        Ok(g)
    }

    fn spiral_tube(&self, t: usize) -> Result<Geometry> {
        let s = self.param("x_scale", 1.0);
        let fixed_width = self.params.get("half_width").copied();
        let mut parts = Vec::new();
        let mut legs_x: Vec<f64> = Vec::new();
        let mut min_width = f64::INFINITY;
        for j in 1..=t {
            let k = 2 * j;
            let eps = fixed_width.unwrap_or_else(|| 64f64.powi(-(k as i32)));
            min_width = min_width.min(eps);
            for seg in spiral_arm(k, s) {
                if seg.a.x == seg.b.x {
                    legs_x.push(seg.a.x);
                }
                parts.push(Shape::Rect(
                    Rect::new(seg.a.x, seg.a.y, seg.b.x, seg.b.y).inflate(eps),
                ));
            }
        }
        // continuation toward infinity: the first leg of the next arm
        let k_next = 2 * t + 2;
        let eps = fixed_width.unwrap_or_else(|| 64f64.powi(-(k_next as i32)));
        let x_last = s / 2f64.powi(k_next as i32);
        parts.push(Shape::Rect(Rect::new(x_last, 1.0, x_last, f64::INFINITY).inflate(eps)));
        legs_x.push(x_last);
        legs_x.sort_by(f64::total_cmp);
        legs_x.dedup();
        let mut g = Geometry::new(parts);
        g.open_sides.top = true;
        let leg_gap =
            legs_x.windows(2).map(|w| w[1] - w[0] - 2.0 * min_width).fold(f64::INFINITY, f64::min);
        g.min_gap = leg_gap.min(2.0 * min_width.min(eps));
        Ok(g)
    }
}

/// Segments of the arm `A_k` (x coordinates multiplied by `x_scale`).
pub fn spiral_arm(k: usize, x_scale: f64) -> Vec<Segment> {
    let p = |e: i32| x_scale / 2f64.powi(e);
    let ki = k as i32;
    let top = 2f64.powi(ki);
    vec![
        Segment::vertical(p(ki), 1.0, top),
        Segment::horizontal(p(ki + 1), p(ki), top),
        Segment::vertical(p(ki + 1), 0.0, top),
        Segment::horizontal(p(ki + 2), p(ki + 1), 0.0),
        Segment::vertical(p(ki + 2), 0.0, 1.0),
    ]
}

/// Arc length of `A_k`: `2^{k+1} + 3 / 2^{k+2}` (unscaled).
pub fn spiral_arm_length(k: usize) -> f64 {
    spiral_arm(k, 1.0).iter().map(Segment::length).sum()
}

/// The barrier `G(h)` translated to `(cx, cy)`, clipped to `[x_lo, x_hi]`.
/// Returns the obstacle segments and the smallest gap between them.
pub fn gate_barrier(
    h: f64,
    k_max: usize,
    cx: f64,
    cy: f64,
    x_lo: f64,
    x_hi: f64,
) -> (Vec<Segment>, f64) {
    let mut out = Vec::new();
    let clip = |a: f64, b: f64| (a.max(x_lo), b.min(x_hi));
    let (a, b) = clip(cx + 1.0, f64::INFINITY);
    if a < b {
        out.push(Segment::horizontal(a, b, cy));
    }
    let (a, b) = clip(f64::NEG_INFINITY, cx - 1.0);
    if a < b {
        out.push(Segment::horizontal(a, b, cy));
    }
    let mut gap = f64::INFINITY;
    for k in 1..=k_max {
        let kf = k as i32;
        let half = h * 0.5f64.powi(kf);
        let xin = 1.0 - 0.5f64.powi(kf);
        let xout = 2f64.powi(kf);
        for sign in [1.0, -1.0] {
            let xv = cx + sign * xin;
            out.push(Segment::vertical(xv, cy - half, cy + half));
            let (a, b) = if sign > 0.0 { clip(xv, cx + xout) } else { clip(cx - xout, xv) };
            if a < b {
                out.push(Segment::horizontal(a, b, cy + half));
                out.push(Segment::horizontal(a, b, cy - half));
            }
        }
        // nested horizontals at ±h 2^{-k}; neighbours differ by h 2^{-k-1}, verticals by 2^{-k-1}
        gap = gap.min(h * 0.5f64.powi(kf + 1)).min(0.5f64.powi(kf + 1));
    }
    gap = gap.min(h * 0.5f64.powi(k_max as i32));
    (out, gap)
}

fn default_window(name: &str, params: &BTreeMap<String, f64>, truncation: u32) -> [f64; 4] {
    let p = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    match name {
        "rectangle" => [p("x0", 0.0), p("y0", 0.0), p("x1", 1.0), p("y1", 1.0)],
        "disk" => {
            let r = p("r", 1.0);
            [p("cx", 0.0) - r, p("cy", 0.0) - r, p("cx", 0.0) + r, p("cy", 0.0) + r]
        }
        "half_disk" => {
            let r = p("r", 1.0);
            [-r, 0.0, r, r]
        }
        "slit_disk" => [-1.0, -1.0, 1.0, 1.0],
        "annulus" => {
            let r = p("r_out", 1.1);
            [-r, -r, r, r]
        }
        "harmonic_comb" | "comb_1_over_n" | "double_comb" | "double_comb_fixed" => {
            [0.0, 0.0, 1.0, 1.0]
        }
        "barrier_gate" => [-2.0, -1.0, 2.0, 1.0],
        "gate_domain" => {
            let last = 2f64.powi(truncation as i32 + 1);
            let reach = 2f64.powi(p("k_max", 2.0) as i32);
            [-1.0, 0.0, last + reach + 1.0, 0.5]
        }
        "strip" => [0.0, 0.0, p("length", 4.0), 1.0],
        "strip_with_slits" => [0.0, 0.0, p("length", truncation as f64 + 2.0), 1.0],
        "half_plane" => {
            let w = p("extent", 1.0);
            [-w, 0.0, w, w]
        }
        "spiral_tube" => {
            let s = p("x_scale", 1.0);
            let eps = p("half_width", 1.0 / 4096.0);
            let top = 4f64.powi(truncation as i32) + 1.0;
            [-2.0 * eps, -2.0 * eps, s / 4.0 + 2.0 * eps, top]
        }
        _ => [0.0, 0.0, 1.0, 1.0],
    }
}

/// Build a spec for a named generator with its default window.
pub fn generate(
    name: &str,
    params: &BTreeMap<String, f64>,
    truncation: Option<u32>,
) -> Result<DomainSpec> {
    if !GENERATORS.contains(&name) {
        return Err(Error::UnknownGenerator(name.to_string()));
    }
    let truncation = match (is_infinite_family(name), truncation) {
        (true, None) => {
            return Err(Error::BadParams {
                generator: name.to_string(),
                reason: "truncation is required for infinite families".into(),
            })
        }
        (_, Some(t)) => t,
        (false, None) => 1,
    };
    let spec = DomainSpec {
        name: name.to_string(),
        params: params.clone(),
        window: default_window(name, params, truncation),
        truncation,
    };
    spec.validate()?;
    Ok(spec)
}

/// Shorthand for building parameter maps.
pub fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Convenience: `generate` with parameters given as pairs.
pub fn spec(name: &str, pairs: &[(&str, f64)], truncation: Option<u32>) -> Result<DomainSpec> {
    generate(name, &params(pairs), truncation)
}

impl DomainSpec {
    /// Same generator with a different window.
    pub fn with_window(mut self, window: [f64; 4]) -> Self {
        self.window = window;
        self
    }
}

/// Point helper used in generators and tests.
pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_comb_teeth_match_formula() {
        let s = spec("double_comb", &[], Some(4)).unwrap();
        let g = s.geometry().unwrap();
        // n = 1 teeth are degenerate and skipped
        assert_eq!(g.obstacles.len(), 6);
        for n in 2..=4 {
            let nf = n as f64;
            assert!(g.obstacles.contains(&Segment::horizontal(0.0, 1.0 - 1.0 / nf, 1.0 / (2.0 * nf))));
            assert!(g.obstacles.contains(&Segment::horizontal(1.0 / nf, 1.0, 1.0 / (2.0 * nf + 1.0))));
        }
    }

    #[test]
    fn spiral_arm_length_closed_form() {
        for k in [2usize, 4, 6] {
            let expected = 2f64.powi(k as i32 + 1) + 3.0 / 2f64.powi(k as i32 + 2);
            assert!((spiral_arm_length(k) - expected).abs() < 1e-12);
        }
        assert!((spiral_arm_length(2) - (8.0 + 3.0 / 16.0)).abs() < 1e-12);
    }

    #[test]
    fn spiral_truncation_one_uses_eps_two() {
        let s = spec("spiral_tube", &[], Some(1)).unwrap();
        let g = s.geometry().unwrap();
        // A_2 arm has five legs plus the continuation leg
        assert_eq!(g.parts.len(), 6);
        if let Shape::Rect(r) = g.parts[0] {
            assert!((r.x0 - (0.25 - 1.0 / 4096.0)).abs() < 1e-15);
        } else {
            panic!("expected rect");
        }
    }

    #[test]
    fn gate_barrier_contains_expected_pieces() {
        let (obs, _) = gate_barrier(0.5, 1, 0.0, 0.0, -2.0, 2.0);
        assert!(obs.contains(&Segment::vertical(0.5, -0.25, 0.25)));
        assert!(obs.contains(&Segment::horizontal(0.5, 2.0, 0.25)));
        assert!(obs.contains(&Segment::horizontal(0.5, 2.0, -0.25)));
        assert!(obs.contains(&Segment::horizontal(1.0, 2.0, 0.0)));
    }

    #[test]
    fn infinite_family_requires_truncation() {
        assert!(matches!(
            generate("harmonic_comb", &BTreeMap::new(), None),
            Err(Error::BadParams { .. })
        ));
        assert!(matches!(spec("nope", &[], None), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn json_round_trip() {
        let s = spec("strip_with_slits", &[("length", 8.0)], Some(4)).unwrap();
        let back = DomainSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
    }
}
