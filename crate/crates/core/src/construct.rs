//! Domains whose Markov factors follow a prescribed scale sequence.
//!
//! Given `ε_1 ≥ ε_2 ≥ … > 0` and constants `C_n > 0`, the profile `F` is pinned
//! at `x_n = 1 - 1/(2n²)` by `F(x_n) = ε_n/n²` and `F'(x_n) = -C_n ε_n`, joined
//! by convex quadratic pieces, closed by a power tail at the tip and capped by
//! the constant `ε_1` on `[0, 1/2]`. The resulting domain satisfies
//! `ω_D(ε_n/n²) = sqrt(1/(4n⁴) + ε_n²/n⁴)` at every knot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{CuspProfile, GraphDomain};
use crate::error::{Error, Result};
use crate::hermite::{check_interval, FlatCapInterpolant, HermiteKnot, Incompatibility, PowerTail};

const MODULE: &str = "construct";

/// Default number of knots used by [`build_profile`].
pub const DEFAULT_N_MAX: usize = 64;

/// Relative slack when comparing the two sides of the separation condition.
const SEPARATION_TOL: f64 = 1e-12;

/// Prescribed scales `ε_1..ε_N` and slope constants `C_1..C_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSequence {
    values: Vec<f64>,
    constants: Vec<f64>,
}

impl EpsilonSequence {
    pub fn new(values: Vec<f64>, constants: Vec<f64>) -> Result<Self> {
        if values.len() != constants.len() {
            return Err(Error::construction(
                MODULE,
                format!("{} scales but {} constants", values.len(), constants.len()),
            ));
        }
        Ok(Self { values, constants })
    }

    /// `ε_n = n^{2-2s}`, `C_n = 2s`, `n = 1..=n_max`; the knots of `2^s (1-x)^s`.
    pub fn power_law(s: f64, n_max: usize) -> Self {
        let values = (1..=n_max).map(|n| (n as f64).powf(2.0 - 2.0 * s)).collect();
        Self { values, constants: vec![2.0 * s; n_max] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    /// `ε_n`, 1-based.
    pub fn epsilon(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    /// `C_n`, 1-based.
    pub fn constant(&self, n: usize) -> f64 {
        self.constants[n - 1]
    }

    /// Hermite data at `x_n` in gap coordinates: gap `1/(2n²)`, value
    /// `ε_n/n²`, slope `C_n ε_n`.
    pub fn knot(&self, n: usize) -> HermiteKnot {
        let n2 = (n as f64).powi(2);
        HermiteKnot { gap: 0.5 / n2, value: self.epsilon(n) / n2, slope: self.constant(n) * self.epsilon(n) }
    }

    fn truncated(&self, n_max: usize) -> Self {
        let k = n_max.min(self.len());
        Self { values: self.values[..k].to_vec(), constants: self.constants[..k].to_vec() }
    }
}

/// A failed hypothesis of the construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooShort { len: usize },
    NonPositive { n: usize, epsilon: f64, constant: f64 },
    /// `ε_{n+1} > ε_n`.
    Increasing { n: usize, current: f64, next: f64 },
    /// `ε_n/n² - ε_m/m² < -C_m (ε_m/2)(1/m² - 1/n²)` for `n > m`.
    Separation { m: usize, n: usize, margin: f64 },
    /// No convex C¹ interpolant between `x_m` and `x_n`.
    Incompatible { m: usize, n: usize, reason: Incompatibility },
    /// The power tail from the last knot would be concave (`C_N < 2`).
    ConcaveTail { n: usize, exponent: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::TooShort { len } => write!(f, "sequence has {len} entries; at least 2 are needed"),
            Violation::NonPositive { n, epsilon, constant } => {
                write!(f, "n = {n}: ε = {epsilon}, C = {constant} must both be positive")
            }
            Violation::Increasing { n, current, next } => {
                write!(f, "ε increases from n = {n} ({current}) to n = {} ({next})", n + 1)
            }
            Violation::Separation { m, n, margin } => {
                write!(f, "separation condition fails for m = {m}, n = {n} (margin {margin:e})")
            }
            Violation::Incompatible { m, n, reason } => write!(f, "knot interval [x_{m}, x_{n}]: {reason}"),
            Violation::ConcaveTail { n, exponent } => {
                write!(f, "tail from x_{n} has exponent {exponent} < 1 (needs C_{n} ≥ 2)")
            }
        }
    }
}

/// A pair where the separation condition holds with equality, which forces
/// `C_n ε_n = C_m ε_m`. Reported, never enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityCase {
    pub m: usize,
    pub n: usize,
    pub slope_m: f64,
    pub slope_n: f64,
    pub consistent: bool,
}

/// Outcome of [`validate_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub violations: Vec<Violation>,
    pub equality_cases: Vec<EqualityCase>,
    /// Inclusive range of `n` the pairwise conditions were checked on.
    pub checked_range: (usize, usize),
    pub sup_constant: f64,
}

impl SequenceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks positivity, monotonicity, the pairwise separation condition,
/// convex Hermite compatibility of consecutive knots and tail convexity.
pub fn validate_sequence(seq: &EpsilonSequence) -> SequenceReport {
    let len = seq.len();
    let mut violations = Vec::new();
    let mut equality_cases = Vec::new();
    let sup_constant = seq.constants().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if len < 2 {
        violations.push(Violation::TooShort { len });
    }
    for n in 1..=len {
        let (e, c) = (seq.epsilon(n), seq.constant(n));
        if !(e > 0.0 && c > 0.0 && e.is_finite() && c.is_finite()) {
            violations.push(Violation::NonPositive { n, epsilon: e, constant: c });
        }
    }
    if !violations.is_empty() {
        return SequenceReport { violations, equality_cases, checked_range: (1, len), sup_constant };
    }
    for n in 1..len {
        if seq.epsilon(n + 1) > seq.epsilon(n) {
            violations.push(Violation::Increasing { n, current: seq.epsilon(n), next: seq.epsilon(n + 1) });
        }
    }
    for m in 1..=len {
        let mf2 = (m as f64).powi(2);
        for n in (m + 1)..=len {
            let nf2 = (n as f64).powi(2);
            let lhs = seq.epsilon(n) / nf2 - seq.epsilon(m) / mf2;
            let rhs = -seq.constant(m) * (seq.epsilon(m) / 2.0) * (1.0 / mf2 - 1.0 / nf2);
            let margin = lhs - rhs;
            let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
            if margin < -SEPARATION_TOL * scale {
                violations.push(Violation::Separation { m, n, margin });
            } else if margin.abs() <= SEPARATION_TOL * scale {
                let (slope_m, slope_n) = (seq.constant(m) * seq.epsilon(m), seq.constant(n) * seq.epsilon(n));
                let consistent = (slope_m - slope_n).abs() <= SEPARATION_TOL * slope_m.max(slope_n);
                equality_cases.push(EqualityCase { m, n, slope_m, slope_n, consistent });
            }
        }
    }
    for m in 1..len {
        if let Err(reason) = check_interval(seq.knot(m + 1), seq.knot(m)) {
            violations.push(Violation::Incompatible { m, n: m + 1, reason });
        }
    }
    if len >= 1 {
        let last = seq.knot(len);
        let exponent = last.slope * last.gap / last.value;
        if exponent < 1.0 {
            violations.push(Violation::ConcaveTail { n: len, exponent });
        }
    }
    SequenceReport { violations, equality_cases, checked_range: (1, len), sup_constant }
}

/// Hermite data at one knot in the original coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructedKnot {
    pub n: usize,
    /// `x_n = 1 - 1/(2n²)`.
    pub x: f64,
    /// `ε_n / n²`.
    pub value: f64,
    /// `F'(x_n) = -C_n ε_n`.
    pub slope: f64,
}

/// The built profile and its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionResult {
    pub profile: CuspProfile,
    pub knots: Vec<ConstructedKnot>,
    pub tail: PowerTail,
    /// `F'(1/2⁺) = -C_1 ε_1` against the cap's slope 0.
    pub cap_kink: f64,
    pub report: SequenceReport,
}

impl ConstructionResult {
    pub fn interpolant(&self) -> &FlatCapInterpolant {
        match self.profile.kind() {
            crate::domain::ProfileKind::FlatCap(interp) => interp,
            _ => unreachable!("constructed profiles are always flat-capped"),
        }
    }
}

/// Builds the flat-capped convex C¹ profile from the first `n_max` entries.
pub fn build_profile(seq: &EpsilonSequence, n_max: usize) -> Result<ConstructionResult> {
    let seq = seq.truncated(n_max);
    let report = validate_sequence(&seq);
    if let Some(first) = report.violations.first() {
        return Err(Error::construction(MODULE, format!("sequence rejected: {first}")));
    }
    let knots: Vec<HermiteKnot> = (1..=seq.len()).map(|n| seq.knot(n)).collect();
    let interp = FlatCapInterpolant::from_knots(seq.epsilon(1), knots)?;
    let tail = *interp.tail();
    let constructed = (1..=seq.len())
        .map(|n| {
            let k = seq.knot(n);
            ConstructedKnot { n, x: 1.0 - k.gap, value: k.value, slope: -k.slope }
        })
        .collect();
    Ok(ConstructionResult {
        profile: CuspProfile::flat_cap(interp),
        knots: constructed,
        tail,
        cap_kink: -seq.constant(1) * seq.epsilon(1),
        report,
    })
}

/// Outcome of [`check_secant_property`].
#[derive(Debug, Clone, PartialEq)]
pub struct SecantReport {
    pub samples: usize,
    pub checked: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Smallest `(f(x1) - f(x2))/(x2 - x1) - f(y)/(1 - y)` observed.
    pub worst_margin: f64,
    /// `(x1, x2, y)` attaining the worst margin.
    pub worst_at: Option<(f64, f64, f64)>,
}

/// Slack allowed on the secant inequality.
pub const SECANT_SLACK: f64 = 1e-10;

/// Audits `f(y)/(1-y) ≤ (f(x1) - f(x2))/(x2 - x1)` whenever `f(y) = f(x1) - f(x2)`,
/// on seeded pairs `1/2 ≤ x1 < x2 ≤ 1`.
///
/// Even-numbered samples draw `x1, x2` uniformly; odd-numbered ones draw the
/// gaps `1 - x` log-uniformly down to `1e-12` so the tip is exercised.
pub fn check_secant_property(profile: &CuspProfile, samples: usize, seed: u64) -> SecantReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        SecantReport { samples, checked: 0, skipped: 0, violations: 0, worst_margin: f64::INFINITY, worst_at: None };
    let lo_gap_log = 1e-12f64.ln();
    let hi_gap_log = 0.5f64.ln();
    for i in 0..samples {
        let (a, b) = if i % 2 == 0 {
            (rng.random_range(0.5..=1.0), rng.random_range(0.5..=1.0))
        } else {
            let g1 = rng.random_range(lo_gap_log..=hi_gap_log).exp();
            let g2 = rng.random_range(lo_gap_log..=hi_gap_log).exp();
            (1.0 - g1, 1.0 - g2)
        };
        let (x1, x2) = if a <= b { (a, b) } else { (b, a) };
        let (f1, f2) = (profile.value_at_gap(1.0 - x1), profile.value_at_gap(1.0 - x2));
        let d = f1 - f2;
        if x1 == x2 || !(d > 0.0) {
            report.skipped += 1;
            continue;
        }
        let Ok(gap_y) = profile.inverse_gap(d) else {
            report.skipped += 1;
            continue;
        };
        if gap_y <= 0.0 {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        let margin = d / (x2 - x1) - profile.value_at_gap(gap_y) / gap_y;
        if margin < -SECANT_SLACK {
            report.violations += 1;
        }
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_at = Some((x1, x2, 1.0 - gap_y));
        }
    }
    report
}

/// Tolerance for the knot identity `ω_D(ε_n/n²) = sqrt(1/(4n⁴) + ε_n²/n⁴)`.
pub const OMEGA_KNOT_TOL: f64 = 1e-10;

/// The domain `{0 ≤ x ≤ 1, 0 ≤ y ≤ f̃(x)}`, after checking the modulus identity at every knot.
pub fn build_domain(result: &ConstructionResult) -> Result<GraphDomain> {
    let domain = GraphDomain::upper(result.profile.clone())?;
    for k in &result.knots {
        let n2 = (k.n as f64).powi(2);
        let omega = domain.modulus_of_continuity(k.value)?;
        let expected = (0.25 / (n2 * n2) + k.value * k.value).sqrt();
        if (omega - expected).abs() > OMEGA_KNOT_TOL {
            return Err(Error::construction(
                MODULE,
                format!("ω_D at knot n = {} is {omega}, expected {expected}", k.n),
            ));
        }
    }
    Ok(domain)
}

/// `E_ι = {0 ≤ x ≤ 1, 0 ≤ y ≤ φ((1-x)^ι)}`.
pub fn log_cusp_domain(iota: f64) -> Result<GraphDomain> {
    GraphDomain::upper(CuspProfile::log(iota)?)
}
