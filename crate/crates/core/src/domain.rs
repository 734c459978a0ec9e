//! Normalised cuspidal graph domains `{x0 ≤ x ≤ 1, 0 ≤ y ≤ f(x)}` (or the
//! symmetric `|y| ≤ f(x)` variant) with the cusp at `(1, 0)`.
//!
//! Profiles are evaluated through the gap `s = 1 - x`. The boundary modulus
//! of continuity is `ω(t) = sqrt((1 - f⁻¹(t))² + t²)` and the cusp scale
//! `ε_n` solves `2n² ω(ε_n / n²) = 1`.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::hermite::FlatCapInterpolant;

const MODULE: &str = "domain";

/// Grid size used by every convexity test.
pub const CONVEXITY_GRID: usize = 2048;
/// Second differences above this are accepted as convex.
pub const CONVEXITY_SLACK: f64 = -1e-12;
/// Right end of the convexity grid sits this far from the tip.
pub const CONVEXITY_TIP_OFFSET: f64 = 1e-9;
/// Cap on the convexity index search used by the regularity check.
pub const DEFAULT_R_MAX: f64 = 64.0;
/// `δ` in the margin `(I_conv + δ) f(x) + f'(x)(1 - x)`.
pub const APPINDEX_DELTA: f64 = 0.01;
/// The margin must stay above this.
pub const APPINDEX_SLACK: f64 = -1e-9;

/// Closed-form or interpolated shape of the upper boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `f(x) = (1 - x)^k`, `k ≥ 1`.
    Power { k: f64 },
    /// `f(x) = φ((1 - x)^ι)` with `φ(t) = t / (1 + ln(1/t))`, `ι ≥ 1`.
    Log { iota: f64 },
    /// `f(x) = height`; a Lipschitz rectangle, not a cusp.
    Constant { height: f64 },
    /// Flat cap followed by a convex C¹ spline and a power tail.
    FlatCap(FlatCapInterpolant),
}

/// A boundary profile on the support `[start, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspProfile {
    kind: ProfileKind,
    start: f64,
}

impl CuspProfile {
    pub fn power(k: f64) -> Result<Self> {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::domain(MODULE, format!("power cusp exponent k = {k} must be ≥ 1")));
        }
        Ok(Self { kind: ProfileKind::Power { k }, start: 0.0 })
    }

    pub fn log(iota: f64) -> Result<Self> {
        if !(iota >= 1.0 && iota.is_finite()) {
            return Err(Error::domain(MODULE, format!("log cusp exponent ι = {iota} must be ≥ 1")));
        }
        Ok(Self { kind: ProfileKind::Log { iota }, start: 0.0 })
    }

    pub fn constant(height: f64) -> Result<Self> {
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::domain(MODULE, format!("constant profile height {height} must be positive")));
        }
        Ok(Self { kind: ProfileKind::Constant { height }, start: 0.0 })
    }

    pub fn flat_cap(interpolant: FlatCapInterpolant) -> Self {
        Self { kind: ProfileKind::FlatCap(interpolant), start: 0.0 }
    }

    /// Moves the left end of the support to `start ∈ [-1, 1)`. Graph domains
    /// additionally require `start ≥ 0`; negative starts are for line
    /// integrals over the whole Jacobi interval.
    pub fn with_start(mut self, start: f64) -> Result<Self> {
        if !(-1.0..1.0).contains(&start) {
            return Err(Error::domain(MODULE, format!("support start {start} outside [-1, 1)")));
        }
        self.start = start;
        Ok(self)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    /// Largest gap on the support, `1 - start`.
    pub fn max_gap(&self) -> f64 {
        1.0 - self.start
    }

    /// `f(x)` for `x ∈ [start, 1]`.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(self.start..=1.0).contains(&x) {
            return Err(Error::domain(MODULE, format!("x = {x} outside the support [{}, 1]", self.start)));
        }
        Ok(self.value_at_gap(1.0 - x))
    }

    /// `g(s) = f(1 - s)`.
    pub fn value_at_gap(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::Power { k } => s.powf(*k),
            ProfileKind::Log { iota } => {
                if s <= 1e-15 {
                    0.0
                } else {
                    log_cusp_phi(s.powf(*iota))
                }
            }
            ProfileKind::Constant { height } => *height,
            ProfileKind::FlatCap(interp) => interp.value_at_gap(s),
        }
    }

    /// `g'(s) = -f'(1 - s)`.
    pub fn slope_at_gap(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::Power { k } => {
                if *k == 1.0 {
                    1.0
                } else {
                    k * s.powf(k - 1.0)
                }
            }
            ProfileKind::Log { iota } => {
                if s <= 1e-15 {
                    return 0.0;
                }
                let t = s.powf(*iota);
                let l = -t.ln();
                (2.0 + l) / ((1.0 + l) * (1.0 + l)) * iota * s.powf(iota - 1.0)
            }
            ProfileKind::Constant { .. } => 0.0,
            ProfileKind::FlatCap(interp) => interp.slope_at_gap(s),
        }
    }

    /// `f'(x)`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.value(x)?;
        Ok(-self.slope_at_gap(1.0 - x))
    }

    /// Left end `η` of the interval on which the profile is declared convex.
    pub fn convex_from(&self) -> f64 {
        match &self.kind {
            ProfileKind::FlatCap(interp) => (1.0 - interp.cap_gap()).max(self.start),
            _ => self.start,
        }
    }

    /// Largest profile value, attained at the left end of the support.
    pub fn max_value(&self) -> f64 {
        self.value_at_gap(self.max_gap())
    }

    /// Gaps inside the support where the profile is not smooth. Quadrature
    /// panels are split at these points.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::FlatCap(interp) => {
                interp.breakpoints().into_iter().filter(|&s| s > 0.0 && s < self.max_gap()).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        !matches!(self.kind, ProfileKind::Constant { .. })
    }

    /// Smallest gap `s` with `g(s) ≥ t`, by bisection to full precision.
    pub fn inverse_gap(&self, t: f64) -> Result<f64> {
        if !self.is_strictly_decreasing() {
            return Err(Error::domain(MODULE, "profile inverse requires a strictly decreasing profile"));
        }
        let top = self.max_value();
        if !(0.0..=top).contains(&t) {
            return Err(Error::domain(MODULE, format!("t = {t} outside the profile range [0, {top}]")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0f64, self.max_gap());
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value_at_gap(mid) >= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `f⁻¹(t)` as an abscissa.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.inverse_gap(t)?)
    }
}

/// `φ(t) = t / (1 + ln(1/t))`, `φ(0) = 0`.
pub fn log_cusp_phi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t / (1.0 - t.ln())
    }
}

/// Which side(s) of the x-axis the domain occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// `0 ≤ y ≤ f(x)`.
    UpperOnly,
    /// `-f(x) ≤ y ≤ f(x)`.
    Symmetric,
}

/// A normalised graph domain inside `[0, 1] × [-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDomain {
    profile: CuspProfile,
    symmetry: Symmetry,
}

impl GraphDomain {
    pub fn new(profile: CuspProfile, symmetry: Symmetry) -> Result<Self> {
        if profile.start() < 0.0 {
            return Err(Error::domain(MODULE, "graph domains live in x ∈ [0, 1]; support start must be ≥ 0"));
        }
        let top = profile.max_value();
        if top > 1.0 + 1e-15 {
            return Err(Error::domain(MODULE, format!("profile maximum {top} exceeds the bounding box height 1")));
        }
        if !(top > 0.0) {
            return Err(Error::domain(MODULE, "domain is empty"));
        }
        Ok(Self { profile, symmetry })
    }

    pub fn upper(profile: CuspProfile) -> Result<Self> {
        Self::new(profile, Symmetry::UpperOnly)
    }

    pub fn profile(&self) -> &CuspProfile {
        &self.profile
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// `[y_lo, y_hi]` of the bounding box actually occupied.
    pub fn y_range(&self) -> (f64, f64) {
        let top = self.profile.max_value();
        match self.symmetry {
            Symmetry::UpperOnly => (0.0, top),
            Symmetry::Symmetric => (-top, top),
        }
    }

    /// `ω(t) = sqrt((1 - f⁻¹(t))² + t²)` for `0 < t ≤ f(start)`.
    pub fn modulus_of_continuity(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(MODULE, format!("modulus argument t = {t} must be positive")));
        }
        let s = self.profile.inverse_gap(t)?;
        Ok(s.hypot(t))
    }

    /// Solves `2n² ω(ε/n²) = 1`.
    ///
    /// The bisection runs on the gap `s` of the boundary point `(1 - s, f(1 - s))`,
    /// which is equivalent to bisecting on `ε = n² g(s)` for a strictly
    /// monotone profile and avoids a nested inversion.
    pub fn solve_epsilon_n(&self, n: usize) -> Result<CuspScale> {
        if n == 0 {
            return Err(Error::domain(MODULE, "ε_n is defined for n ≥ 1"));
        }
        if !self.profile.is_strictly_decreasing() {
            return Err(Error::construction(MODULE, "ε_n needs a cusp; the profile is not strictly decreasing"));
        }
        let n2 = (n as f64).powi(2);
        let excess = |s: f64| 2.0 * n2 * s.hypot(self.profile.value_at_gap(s)) - 1.0;
        let (mut lo, mut hi) = (0.0f64, self.profile.max_gap());
        if excess(hi) < 0.0 {
            return Err(Error::construction(
                MODULE,
                format!("2n²ω(ε/n²) - 1 has no sign change on (0, n² f(x0)] for n = {n}"),
            ));
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let s = if excess(hi).abs() <= excess(lo).abs() { hi } else { lo };
        let t = self.profile.value_at_gap(s);
        let epsilon_n = n2 * t;
        let residual = (2.0 * n2 * self.modulus_of_continuity(t)? - 1.0).abs();
        Ok(CuspScale { n, epsilon_n, gap: s, x_n: 1.0 - s, u_n: 2.0 * (0.5 * s).sqrt().asin(), residual })
    }
}

/// The cusp scale at degree `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspScale {
    pub n: usize,
    pub epsilon_n: f64,
    /// `1 - x_n`.
    pub gap: f64,
    /// `x_n = f⁻¹(ε_n / n²)`.
    pub x_n: f64,
    /// `u_n = arccos x_n`.
    pub u_n: f64,
    /// `|2n² ω(ε_n/n²) - 1|`.
    pub residual: f64,
}

impl CuspScale {
    /// `1 - 1/(2n²) ≤ x_n ≤ 1 - 1/(4n²)`, checked on the gap with a relative
    /// allowance of `1e-12` for the bisection.
    pub fn in_sandwich(&self) -> bool {
        let n2 = (self.n as f64).powi(2);
        self.gap >= 0.25 / n2 * (1.0 - 1e-12) && self.gap <= 0.5 / n2 * (1.0 + 1e-12)
    }

    /// `n² / ε_n`, the predicted growth of Markov factors.
    pub fn growth(&self) -> f64 {
        (self.n as f64).powi(2) / self.epsilon_n
    }
}

fn root_is_convex(profile: &CuspProfile, eta: f64, r: f64) -> bool {
    let span = 1.0 - eta - CONVEXITY_TIP_OFFSET;
    let h = span / (CONVEXITY_GRID - 1) as f64;
    let at = |i: usize| profile.value_at_gap(CONVEXITY_TIP_OFFSET + h * i as f64).powf(1.0 / r);
    let (mut a, mut b) = (at(0), at(1));
    for i in 2..CONVEXITY_GRID {
        let c = at(i);
        if a - 2.0 * b + c < CONVEXITY_SLACK {
            return false;
        }
        a = b;
        b = c;
    }
    true
}

/// `I_conv(f) = sup{r ≥ 1 : f^{1/r} convex on [η, 1]}`, found by bisection on
/// `r ∈ [1, r_max]` to absolute tolerance `1e-6`.
///
/// Convexity is decided by second differences on a fixed 2048-point grid of
/// `[η, 1 - 1e-9]`. Returns `r_max` when convexity never fails.
pub fn index_of_convexity(profile: &CuspProfile, eta: f64, r_max: f64) -> Result<f64> {
    if !(eta >= profile.start() && eta < 1.0) {
        return Err(Error::domain(MODULE, format!("η = {eta} must lie in [{}, 1)", profile.start())));
    }
    if !(r_max >= 1.0) {
        return Err(Error::domain(MODULE, format!("r_max = {r_max} must be ≥ 1")));
    }
    if !root_is_convex(profile, eta, 1.0) {
        return Err(Error::domain(MODULE, format!("profile is not convex on [{eta}, 1]")));
    }
    if root_is_convex(profile, eta, r_max) {
        return Ok(r_max);
    }
    let (mut lo, mut hi) = (1.0f64, r_max);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if root_is_convex(profile, eta, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of the regular-cusp audit.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub eta: f64,
    /// Profile passes the grid convexity test on `[η, 1]`.
    pub convex: bool,
    /// Convexity index (meaningful only when `convex`).
    pub i_conv: f64,
    /// `i_conv < r_max`.
    pub i_conv_finite: bool,
    /// `min_x [(I_conv + δ) f(x) + f'(x)(1 - x)]` over the grid.
    pub appindex_margin: f64,
    pub appindex_holds: bool,
    /// Profile is convex, vanishes at the tip and has a finite index.
    pub regular: bool,
}

/// Checks that the tip `(1, 0)` is a regular cusp in normalised form.
pub fn validate_regular_cusp(domain: &GraphDomain) -> RegularityReport {
    let profile = domain.profile();
    let eta = profile.convex_from();
    let convex = root_is_convex(profile, eta, 1.0);
    let i_conv = if convex { index_of_convexity(profile, eta, DEFAULT_R_MAX).unwrap_or(f64::NAN) } else { f64::NAN };
    let i_conv_finite = convex && i_conv < DEFAULT_R_MAX;
    let span = 1.0 - eta - CONVEXITY_TIP_OFFSET;
    let h = span / (CONVEXITY_GRID - 1) as f64;
    let appindex_margin = if convex {
        (0..CONVEXITY_GRID)
            .map(|i| {
                let s = CONVEXITY_TIP_OFFSET + h * i as f64;
                (i_conv + APPINDEX_DELTA) * profile.value_at_gap(s) - s * profile.slope_at_gap(s)
            })
            .fold(f64::INFINITY, f64::min)
    } else {
        f64::NAN
    };
    let vanishes_at_tip = profile.value_at_gap(0.0) == 0.0;
    RegularityReport {
        eta,
        convex,
        i_conv,
        i_conv_finite,
        appindex_margin,
        appindex_holds: appindex_margin >= APPINDEX_SLACK,
        regular: convex && i_conv_finite && vanishes_at_tip,
    }
}

/// Gap at which the log cusp `ι = 1` takes the value `e^{-1}/2`.
pub fn log_cusp_reference_gap() -> f64 {
    1.0 / E
}
