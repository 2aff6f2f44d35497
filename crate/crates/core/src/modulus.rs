//! Discrete p-modulus of curve families, Loewner profiles and modulus distortion.
//!
//! Curves are 4-connected cell paths; `∫_γ ρ ds` is `Σ ρ(c)·h` over the cells of
//! `γ` and `∫ ρ^p dμ` is `Σ ρ(c)^p·h²`.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{point_diameter, Cell, GridDomain, Region};
use crate::maps::{sample_continuum_pairs, MappedDomain, PairMode};
use crate::mazurkiewicz::Key;

pub const DEFAULT_TOL: f64 = 1e-3;
/// Violation tolerance for the many solves behind a Loewner profile.
pub const SAMPLED_TOL: f64 = 1e-2;
const MAX_ROUNDS: usize = 20_000;
const MAX_SWEEPS: usize = 20_000;
const BATCH: usize = 16;
const INNER_SWEEPS: usize = 4;
pub const ORACLE_PATH_LIMIT: usize = 200;

/// `dist(E, F) / min(diam E, diam F)` on cell centers.
pub fn relative_distance(domain: &GridDomain, e: &Region, f: &Region) -> Result<f64> {
    let h = domain.spacing;
    if e.intersects(f) {
        return Err(Error::Degenerate("E and F intersect".into()));
    }
    let (pe, pf) = (domain.centers(e), domain.centers(f));
    let (de, df) = (point_diameter(&pe), point_diameter(&pf));
    if de < 4.0 * h || df < 4.0 * h {
        return Err(Error::Degenerate(format!("diameters {de} and {df} are below 4h")));
    }
    let mut dist = f64::INFINITY;
    for a in &pe {
        for b in &pf {
            dist = dist.min(a.dist(b));
        }
    }
    if dist <= h {
        return Err(Error::Degenerate("E touches F".into()));
    }
    Ok(dist / de.min(df))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamilySpec {
    pub e: Region,
    pub f: Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusSolution {
    pub density: Vec<f64>,
    pub value: f64,
    pub p: f64,
    /// `max(0, 1 − min ρ-length)` over all curves at termination.
    pub gap: f64,
    pub rounds: usize,
    /// Dual objective: a lower bound for the modulus of the full family.
    pub lower: f64,
    /// Value of `ρ / min ρ-length`, which is admissible for every curve.
    pub upper: f64,
    pub curves: Vec<Vec<Cell>>,
    /// Value after each complete solve over the current curves.
    pub history: Vec<f64>,
}

/// Dual coordinate ascent for `min Σ w ρ^p` subject to `Σ_{c∈γ} a ρ_c ≥ 1`.
/// Dual variables `λ_γ ≥ 0`; `ρ_c = (a s_c / (p w))^{1/(p−1)}` with
/// `s_c = Σ_{γ∋c} λ_γ`.
struct Dual {
    p: f64,
    a: f64,
    w: f64,
    lambda: Vec<f64>,
    s: Vec<f64>,
}

impl Dual {
    fn new(n: usize, p: f64, h: f64) -> Self {
        Dual { p, a: h, w: h * h, lambda: Vec::new(), s: vec![0.0; n] }
    }

    fn rho_of(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if self.p == 2.0 {
            self.a * s / (2.0 * self.w)
        } else {
            (self.a * s / (self.p * self.w)).powf(1.0 / (self.p - 1.0))
        }
    }

    fn length(&self, curve: &[Cell], delta: f64) -> f64 {
        curve.iter().map(|&c| self.a * self.rho_of(self.s[c] + delta)).sum()
    }

    fn shift(&mut self, k: usize, curve: &[Cell], delta: f64) {
        self.lambda[k] += delta;
        for &c in curve {
            self.s[c] += delta;
        }
    }

    /// Exact maximization along coordinate `k`; returns the residual before the step.
    fn update(&mut self, k: usize, curve: &[Cell]) -> f64 {
        let l0 = self.length(curve, 0.0);
        let lam = self.lambda[k];
        let resid = if lam > 0.0 { (1.0 - l0).abs() } else { (1.0 - l0).max(0.0) };
        let delta = if self.p == 2.0 {
            let slope = curve.len() as f64 * self.a * self.a / (2.0 * self.w);
            ((1.0 - l0) / slope).max(-lam)
        } else if self.length(curve, -lam) >= 1.0 {
            -lam
        } else {
            let (mut lo, mut hi) = (-lam, 1.0f64.max(lam));
            while self.length(curve, hi) < 1.0 {
                hi *= 2.0;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if self.length(curve, mid) < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        self.shift(k, curve, delta);
        resid
    }

    fn solve(&mut self, curves: &[Vec<Cell>], tol: f64, sweeps: usize) {
        while self.lambda.len() < curves.len() {
            self.lambda.push(0.0);
        }
        for _ in 0..sweeps {
            let mut worst = 0.0f64;
            for (k, c) in curves.iter().enumerate() {
                worst = worst.max(self.update(k, c));
            }
            if worst < tol {
                break;
            }
        }
    }

    /// Drop curves with `λ = 0`; they do not affect `ρ`.
    fn prune(&mut self, curves: &mut Vec<Vec<Cell>>) {
        let mut k = 0;
        curves.retain(|_| {
            k += 1;
            self.lambda[k - 1] > 0.0
        });
        self.lambda.retain(|&l| l > 0.0);
    }

    fn objective(&self) -> f64 {
        let energy: f64 = self.s.iter().map(|&s| self.w * self.rho_of(s).powf(self.p)).sum();
        self.lambda.iter().sum::<f64>() - (self.p - 1.0) * energy
    }

    fn density(&self) -> Vec<f64> {
        self.s.iter().map(|&s| self.rho_of(s)).collect()
    }
}

fn value_of(density: &[f64], p: f64, h: f64) -> f64 {
    density.iter().filter(|&&r| r > 0.0).map(|r| r.powf(p) * h * h).sum()
}

/// Minimal ρ-length over `E → F` paths (node weights `ρ·h`), plus up to
/// `batch` paths shorter than `cutoff`, each ending at a different cell of `F`.
fn short_curves(
    domain: &GridDomain,
    rho: &[f64],
    e: &Region,
    f: &Region,
    cutoff: f64,
    batch: usize,
) -> Option<(f64, Vec<Vec<Cell>>)> {
    let h = domain.spacing;
    let n = domain.num_cells();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let in_f = domain.mask(f);
    let mut heap = BinaryHeap::new();
    for c in e.iter().filter(|&c| domain.is_inside(c)) {
        dist[c] = rho[c] * h;
        prev[c] = c;
        heap.push(Key(dist[c], c));
    }
    let mut best = None;
    let mut paths = Vec::new();
    while let Some(Key(d, c)) = heap.pop() {
        if d > dist[c] {
            continue;
        }
        if in_f[c] {
            best.get_or_insert(d);
            if d >= cutoff || paths.len() == batch {
                break;
            }
            let mut path = vec![c];
            let mut cur = c;
            while prev[cur] != cur {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            paths.push(path);
            continue;
        }
        for m in domain.neighbors(c) {
            let nd = d + rho[m] * h;
            if nd < dist[m] {
                dist[m] = nd;
                prev[m] = c;
                heap.push(Key(nd, m));
            }
        }
    }
    best.map(|b| (b, paths))
}

/// Constraint generation: solve over the current curves, add the ρ-shortest
/// curves, repeat until every curve has ρ-length at least `1 − tol`.
pub fn modulus(domain: &GridDomain, e: &Region, f: &Region, p: f64, tol: f64) -> Result<ModulusSolution> {
    if !(p > 1.0) {
        return Err(Error::Invalid(format!("p must exceed 1, got {p}")));
    }
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let h = domain.spacing;
    let mut dual = Dual::new(domain.num_cells(), p, h);
    let mut curves: Vec<Vec<Cell>> = Vec::new();
    let mut history = Vec::new();
    let mut rho = vec![0.0; domain.num_cells()];
    let mut gap;
    let mut min_len;
    let mut settled = false;
    let mut rounds = 0;
    loop {
        let (len, found) = short_curves(domain, &rho, e, f, 1.0 - tol, BATCH).ok_or(Error::NoCurves)?;
        gap = (1.0 - len).max(0.0);
        min_len = len;
        if rounds >= MAX_ROUNDS || (found.is_empty() && settled) {
            break;
        }
        rounds += 1;
        if found.is_empty() {
            // every curve is long enough under a partial solve: finish the solve and re-check
            dual.solve(&curves, tol / 10.0, MAX_SWEEPS);
            settled = true;
            history.push(value_of(&dual.density(), p, h));
        } else {
            curves.extend(found);
            dual.solve(&curves, tol / 10.0, INNER_SWEEPS);
            settled = false;
        }
        dual.prune(&mut curves);
        rho = dual.density();
    }
    let value = value_of(&rho, p, h);
    let upper = if min_len > 0.0 { value / min_len.powf(p) } else { f64::INFINITY };
    Ok(ModulusSolution {
        value,
        density: rho,
        p,
        gap,
        rounds,
        lower: dual.objective().max(0.0),
        upper,
        curves,
        history,
    })
}

/// Every simple path that starts in `E`, ends in `F` and meets `E ∪ F` nowhere else.
pub fn enumerate_curves(domain: &GridDomain, e: &Region, f: &Region, limit: usize) -> Result<Vec<Vec<Cell>>> {
    let (in_e, in_f) = (domain.mask(e), domain.mask(f));
    let mut out = Vec::new();
    let mut on = vec![false; domain.num_cells()];
    fn dfs(
        d: &GridDomain,
        c: Cell,
        path: &mut Vec<Cell>,
        on: &mut [bool],
        masks: (&[bool], &[bool]),
        out: &mut Vec<Vec<Cell>>,
        limit: usize,
    ) -> Result<()> {
        if masks.1[c] {
            if out.len() == limit {
                return Err(Error::TooLarge { size: limit + 1, limit });
            }
            out.push(path.clone());
            return Ok(());
        }
        for n in d.neighbors(c) {
            if on[n] || (masks.0[n] && !masks.1[n]) {
                continue;
            }
            on[n] = true;
            path.push(n);
            dfs(d, n, path, on, masks, out, limit)?;
            path.pop();
            on[n] = false;
        }
        Ok(())
    }
    for s in e.iter().filter(|&c| domain.is_inside(c)) {
        on[s] = true;
        let mut path = vec![s];
        dfs(domain, s, &mut path, &mut on, (&in_e, &in_f), &mut out, limit)?;
        on[s] = false;
    }
    Ok(out)
}

/// Exact modulus over the complete path family (at most 200 paths). For `p = 2`
/// the optimum is the least-norm point of the constraint polyhedron, found by
/// Dykstra's alternating projections; other `p` run the dual ascent to `1e-12`.
pub fn modulus_oracle_small(domain: &GridDomain, e: &Region, f: &Region, p: f64) -> Result<f64> {
    let curves = enumerate_curves(domain, e, f, ORACLE_PATH_LIMIT)?;
    if curves.is_empty() {
        return Ok(0.0);
    }
    let h = domain.spacing;
    if p != 2.0 {
        let mut dual = Dual::new(domain.num_cells(), p, h);
        dual.solve(&curves, 1e-12, MAX_SWEEPS);
        return Ok(value_of(&dual.density(), p, h));
    }
    let n = domain.num_cells();
    let m = curves.len();
    let mut x = vec![0.0; n];
    let mut q = vec![vec![0.0; n]; m + 1];
    for _ in 0..200_000 {
        let before = x.clone();
        for (k, c) in curves.iter().enumerate() {
            let y: Vec<f64> = x.iter().zip(&q[k]).map(|(a, b)| a + b).collect();
            let dot: f64 = c.iter().map(|&i| h * y[i]).sum();
            let mut proj = y.clone();
            if dot < 1.0 {
                let t = (1.0 - dot) / (c.len() as f64 * h * h);
                for &i in c {
                    proj[i] += t * h;
                }
            }
            q[k] = y.iter().zip(&proj).map(|(a, b)| a - b).collect();
            x = proj;
        }
        let y: Vec<f64> = x.iter().zip(&q[m]).map(|(a, b)| a + b).collect();
        let proj: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
        q[m] = y.iter().zip(&proj).map(|(a, b)| a - b).collect();
        x = proj;
        let moved = x.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if moved < 1e-14 {
            break;
        }
    }
    Ok(value_of(&x, 2.0, h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoewnerProfile {
    pub q: f64,
    /// `(Δ, mod)` pairs.
    pub samples: Vec<(f64, f64)>,
    pub fitted_c: f64,
    /// RMS of `ln mod − ln(C φ(Δ))` over the fitted samples.
    pub fit_residual: f64,
    /// `fitted_c` below `LOEWNER_FLOOR`: no useful lower bound at this scale.
    pub flagged: bool,
}

pub const LOEWNER_FLOOR: f64 = 0.3;

pub fn loewner_phi(t: f64, q: f64) -> f64 {
    let l = t.ln().abs();
    (1.0 / t).ln().max(l.powf(1.0 - q))
}

/// Sample disjoint continua, solve `Mod_Q` for each pair, and fit the largest
/// `C` with `mod ≥ C φ(Δ)` over samples with `Δ ≤ 1/2`.
pub fn loewner_profile(domain: &GridDomain, q: f64, n_samples: usize, seed: u64) -> Result<LoewnerProfile> {
    if n_samples < 10 {
        return Err(Error::Invalid("loewner_profile needs at least 10 samples".into()));
    }
    let h = domain.spacing;
    let hull = point_diameter(&domain.centers(&domain.inside_cells()));
    let pairs = sample_continuum_pairs(domain, n_samples, PairMode::Disjoint, (4.0 * h, hull / 2.0), seed)?;
    let mut samples = Vec::new();
    for pair in &pairs {
        let Ok(delta) = relative_distance(domain, &pair.e, &pair.f) else { continue };
        let m = match modulus(domain, &pair.e, &pair.f, q, SAMPLED_TOL) {
            Ok(s) => s.value,
            Err(Error::NoCurves) => 0.0,
            Err(e) => return Err(e),
        };
        samples.push((delta, m));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let fit: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.0 <= 0.5).collect();
    let fitted_c = fit.iter().map(|&(t, m)| m / loewner_phi(t, q)).fold(f64::INFINITY, f64::min);
    let fitted_c = if fitted_c.is_finite() { fitted_c } else { 0.0 };
    let logs: Vec<f64> = fit
        .iter()
        .filter(|s| s.1 > 0.0 && fitted_c > 0.0)
        .map(|&(t, m)| (m.ln() - (fitted_c * loewner_phi(t, q)).ln()).powi(2))
        .collect();
    let fit_residual = if logs.is_empty() { 0.0 } else { (logs.iter().sum::<f64>() / logs.len() as f64).sqrt() };
    Ok(LoewnerProfile { q, samples, fitted_c, fit_residual, flagged: fitted_c < LOEWNER_FLOOR })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    /// `(Mod Γ, Mod fΓ, ratio)` per family.
    pub families: Vec<(f64, f64, f64)>,
    pub bracket: (f64, f64),
}

/// `Mod_p(Γ(E, F, Ω)) / Mod_p(Γ(fE, fF, fΩ))` per family.
pub fn qc_distortion(
    source: &GridDomain,
    mapped: &MappedDomain,
    families: &[CurveFamilySpec],
    p: f64,
    tol: f64,
) -> Result<QcReport> {
    let mut out = Vec::new();
    for fam in families {
        let a = modulus(source, &fam.e, &fam.f, p, tol)?.value;
        let (ie, jf) = (mapped.push_region(&fam.e), mapped.push_region(&fam.f));
        let b = modulus(&mapped.image, &ie, &jf, p, tol)?.value;
        out.push((a, b, a / b));
    }
    let lo = out.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let hi = out.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(QcReport { families: out, bracket: (lo, hi) })
}

/// `n` pairs of facing vertical segments, `thickness` cells wide, spread over
/// the inside of the domain in annuli `|z| ∈ [r_lo, r_hi]`.
pub fn rectangle_families(domain: &GridDomain, n: usize, thickness: usize, r_lo: f64, r_hi: f64) -> Vec<CurveFamilySpec> {
    let h = domain.spacing;
    let seg = |x: f64, y0: f64, y1: f64| -> Region {
        (0..domain.num_cells())
            .filter(|&c| {
                let p = domain.center(c);
                domain.is_inside(c) && p.x >= x && p.x < x + thickness as f64 * h && p.y >= y0 && p.y <= y1
            })
            .collect()
    };
    let mut out = Vec::new();
    for k in 0..n {
        let t = (k as f64 + 0.5) / n as f64;
        let ang = std::f64::consts::PI * (0.15 + 0.7 * t);
        let r = r_lo + (r_hi - r_lo) * ((k * 7 % n) as f64 + 0.5) / n as f64;
        let (cx, cy) = (r * ang.cos(), r * ang.sin());
        let w = 0.12 + 0.08 * (k % 3) as f64;
        let hgt = 0.1 + 0.05 * (k % 2) as f64;
        let e = seg(cx - w / 2.0, cy - hgt / 2.0, cy + hgt / 2.0);
        let f = seg(cx + w / 2.0, cy - hgt / 2.0, cy + hgt / 2.0);
        if !e.is_empty() && !f.is_empty() {
            out.push(CurveFamilySpec { e, f });
        }
    }
    out
}
