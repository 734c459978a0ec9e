//! Gauss–Legendre rules, graded meshes toward the cusp tip, and the two
//! integrals everything else is built on: `∬_K |P|^p` and
//! `∫ f^w |P_n^{(α,β)}|^p dx`.
//!
//! Meshes live in the gap coordinate `s = 1 - x` so that panels near the tip
//! keep full relative precision. Panels may be evaluated on any number of
//! threads; their contributions are always combined by [`pairwise_sum`] in
//! panel order, so the result does not depend on scheduling.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::domain::{CuspProfile, GraphDomain, Symmetry};
use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::poly::Poly2D;

const MODULE: &str = "quad";

/// Largest supported Gauss–Legendre order.
pub const MAX_RULE_SIZE: usize = 256;

/// A quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds a rule from raw parts. Only the shape is validated (matching
    /// lengths, increasing nodes inside `[-1, 1]`); weights are taken as given.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::domain(MODULE, "rule needs matching, nonempty node and weight lists"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) || nodes.iter().any(|x| !(-1.0..=1.0).contains(x)) {
            return Err(Error::domain(MODULE, "rule nodes must be strictly increasing inside [-1, 1]"));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(&t, &w)| (mid + half * t, half * w))
    }

    /// `∫_a^b f` by this rule, summed pairwise.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self.mapped(a, b).map(|(x, w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }
}

fn compute_gauss_legendre(m: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        if 2 * i + 1 == m {
            x = 0.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    QuadratureRule { nodes, weights }
}

/// The `m`-point Gauss–Legendre rule, `1 ≤ m ≤ 256`, nodes increasing.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule> {
    static CACHE: OnceLock<Vec<OnceLock<QuadratureRule>>> = OnceLock::new();
    if !(1..=MAX_RULE_SIZE).contains(&m) {
        return Err(Error::domain(MODULE, format!("Gauss–Legendre order {m} outside 1..={MAX_RULE_SIZE}")));
    }
    let cache = CACHE.get_or_init(|| (0..=MAX_RULE_SIZE).map(|_| OnceLock::new()).collect());
    Ok(cache[m].get_or_init(|| compute_gauss_legendre(m)).clone())
}

/// Tree summation with a fixed split pattern.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Geometric panel layout toward the cusp tip.
///
/// Panel edges in the gap coordinate are `L ρ^j` for `j = 0..=depth`
/// (`L` the largest gap) plus the tip itself, merged with any profile kinks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedMesh {
    ratio: f64,
    depth: usize,
    nodes_per_panel: Option<usize>,
}

impl Default for GradedMesh {
    fn default() -> Self {
        Self { ratio: 0.5, depth: 40, nodes_per_panel: None }
    }
}

impl GradedMesh {
    pub fn new(ratio: f64, depth: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::domain(MODULE, format!("grading ratio {ratio} must lie in (0, 1)")));
        }
        if depth == 0 {
            return Err(Error::domain(MODULE, "mesh depth must be at least 1"));
        }
        Ok(Self { ratio, depth, nodes_per_panel: None })
    }

    /// Fixes the Gauss order on every panel instead of the per-integral default.
    pub fn with_nodes_per_panel(mut self, m: usize) -> Result<Self> {
        if !(1..=MAX_RULE_SIZE).contains(&m) {
            return Err(Error::domain(MODULE, format!("nodes per panel {m} outside 1..={MAX_RULE_SIZE}")));
        }
        self.nodes_per_panel = Some(m);
        Ok(self)
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn nodes_per_panel(&self) -> Option<usize> {
        self.nodes_per_panel
    }

    /// Panel edges in the gap coordinate, increasing from 0 to `max_gap`.
    pub fn gap_edges(&self, max_gap: f64, kinks: &[f64]) -> Vec<f64> {
        let mut edges: Vec<f64> = (0..=self.depth).map(|j| max_gap * self.ratio.powi(j as i32)).collect();
        edges.push(0.0);
        edges.extend(kinks.iter().copied().filter(|&k| k > 0.0 && k < max_gap));
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));
        edges
    }

    /// Panel edges as abscissae, increasing to 1.
    pub fn breakpoints(&self, profile: &CuspProfile) -> Vec<f64> {
        self.gap_edges(profile.max_gap(), &profile.kinks()).into_iter().rev().map(|s| 1.0 - s).collect()
    }

    fn panels(&self, profile: &CuspProfile) -> Vec<(f64, f64)> {
        let edges = self.gap_edges(profile.max_gap(), &profile.kinks());
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn panel_count(&self, profile: &CuspProfile) -> usize {
        self.panels(profile).len()
    }
}

/// Default Gauss order per panel for line integrals of `|P_n|^p`.
pub fn default_line_nodes(n: usize, p: f64) -> usize {
    let want = ((p * n as f64) / 2.0).ceil() as usize + 8;
    want.clamp(16, MAX_RULE_SIZE)
}

/// Default outer Gauss order per panel for area integrals of degree-`n` data.
pub fn default_area_nodes(n: usize, p: f64) -> usize {
    let want = (p * n as f64).ceil() as usize + 8;
    want.max(16).max(n + 2).min(MAX_RULE_SIZE)
}

/// `∫ h(s) ds` over the profile support in gap coordinates, one Gauss rule of
/// order `m` per mesh panel. Panels run in parallel; the reduction is fixed.
pub fn integrate_over_gap<F>(profile: &CuspProfile, mesh: &GradedMesh, m: usize, h: F) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let rule = gauss_legendre(m)?;
    let panels = mesh.panels(profile);
    let parts: Vec<f64> = panels.par_iter().map(|&(a, b)| rule.integrate(a, b, &h)).collect();
    Ok(pairwise_sum(&parts))
}

/// `∫ f(x)^w |P_n^{(α,β)}(x)|^p dx` over the profile support.
pub fn lp_weighted_line(
    profile: &CuspProfile,
    weight_power: f64,
    params: &JacobiParams,
    n: usize,
    p: f64,
    mesh: &GradedMesh,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(MODULE, format!("p = {p} must be ≥ 1")));
    }
    if !weight_power.is_finite() || weight_power < 0.0 {
        return Err(Error::domain(MODULE, format!("weight power {weight_power} must be finite and ≥ 0")));
    }
    let m = mesh.nodes_per_panel().unwrap_or_else(|| default_line_nodes(n, p));
    let total = m * mesh.panel_count(profile);
    if total < 8 * n {
        return Err(Error::configuration(
            MODULE,
            format!("{total} outer nodes cannot resolve degree {n}; at least {} required", 8 * n),
        ));
    }
    integrate_over_gap(profile, mesh, m, |s| {
        let f = profile.value_at_gap(s);
        let weight = if weight_power == 0.0 { 1.0 } else { f.powf(weight_power) };
        weight * params.eval_unchecked(n, 1.0 - s).abs().powf(p)
    })
}

fn is_even_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p as i64) % 2 == 0
}

/// `∬_K |P|^p`, using the closed-form inner integral when `P = y·q(x)`.
pub fn lp_norm_pth_power(domain: &GraphDomain, poly: &Poly2D, p: f64, mesh: &GradedMesh, inner_nodes: usize) -> Result<f64> {
    if let Some(q) = poly.as_y_times_x_poly() {
        check_area_args(domain, p)?;
        let profile = domain.profile();
        let m = mesh.nodes_per_panel().unwrap_or_else(|| default_area_nodes(poly.degree(), p));
        let sides = match domain.symmetry() {
            Symmetry::UpperOnly => 1.0,
            Symmetry::Symmetric => 2.0,
        };
        let eval_q = |x: f64| q.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let line = integrate_over_gap(profile, mesh, m, |s| {
            profile.value_at_gap(s).powf(p + 1.0) * eval_q(1.0 - s).abs().powf(p)
        })?;
        return Ok(sides * line / (p + 1.0));
    }
    lp_norm_pth_power_general(domain, poly, p, mesh, inner_nodes)
}

/// `∬_K |P|^p` with Gauss–Legendre in `y` at every outer node.
///
/// For even integer `p` the inner rule is exact once `p·deg ≤ 2·inner_nodes - 1`.
/// Otherwise each vertical segment is split at sign changes of `P` located by
/// sampling and bisection; the result is then accurate to roughly `1e-8`.
pub fn lp_norm_pth_power_general(
    domain: &GraphDomain,
    poly: &Poly2D,
    p: f64,
    mesh: &GradedMesh,
    inner_nodes: usize,
) -> Result<f64> {
    check_area_args(domain, p)?;
    let inner = gauss_legendre(inner_nodes)?;
    let profile = domain.profile();
    let m = mesh.nodes_per_panel().unwrap_or_else(|| default_area_nodes(poly.degree(), p));
    let even = is_even_integer(p);
    let samples = 4 * (poly.degree() + 1);
    integrate_over_gap(profile, mesh, m, |s| {
        let x = 1.0 - s;
        let f = profile.value_at_gap(s);
        let lo = match domain.symmetry() {
            Symmetry::UpperOnly => 0.0,
            Symmetry::Symmetric => -f,
        };
        if f <= 0.0 {
            return 0.0;
        }
        let g = |y: f64| poly.eval(x, y).abs().powf(p);
        if even {
            return inner.integrate(lo, f, g);
        }
        let mut cuts = vec![lo];
        let pv = |y: f64| poly.eval(x, y);
        let h = (f - lo) / samples as f64;
        let mut prev = pv(lo);
        for i in 1..=samples {
            let y = lo + h * i as f64;
            let cur = pv(y);
            if cur == 0.0 {
                if i < samples {
                    cuts.push(y);
                }
                continue;
            }
            if prev * cur < 0.0 {
                let (mut a, mut b, fa) = (y - h, y, prev);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if pv(mid) * fa > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                cuts.push(0.5 * (a + b));
            }
            prev = cur;
        }
        cuts.push(f);
        let parts: Vec<f64> = cuts.windows(2).map(|w| inner.integrate(w[0], w[1], g)).collect();
        pairwise_sum(&parts)
    })
}

fn check_area_args(domain: &GraphDomain, p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::domain(MODULE, format!("p = {p} must be ≥ 1")));
    }
    if !(domain.profile().max_value() > 0.0) {
        return Err(Error::domain(MODULE, "domain is empty"));
    }
    Ok(())
}

/// A tensor quadrature cloud on the domain, grouped by mesh panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelCloud {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub ws: Vec<f64>,
}

/// Product-rule points for the domain: `outer` Gauss nodes per mesh panel in
/// `x`, `inner` Gauss nodes on each vertical segment.
pub fn domain_cloud(domain: &GraphDomain, mesh: &GradedMesh, outer: usize, inner: usize) -> Result<Vec<PanelCloud>> {
    let outer_rule = gauss_legendre(outer)?;
    let inner_rule = gauss_legendre(inner)?;
    let profile = domain.profile();
    let clouds = mesh
        .panels(profile)
        .into_iter()
        .map(|(a, b)| {
            let mut cloud = PanelCloud { xs: Vec::new(), ys: Vec::new(), ws: Vec::new() };
            for (s, ws) in outer_rule.mapped(a, b) {
                let f = profile.value_at_gap(s);
                if f <= 0.0 {
                    continue;
                }
                let lo = match domain.symmetry() {
                    Symmetry::UpperOnly => 0.0,
                    Symmetry::Symmetric => -f,
                };
                for (y, wy) in inner_rule.mapped(lo, f) {
                    cloud.xs.push(1.0 - s);
                    cloud.ys.push(y);
                    cloud.ws.push(ws * wy);
                }
            }
            cloud
        })
        .collect();
    Ok(clouds)
}
