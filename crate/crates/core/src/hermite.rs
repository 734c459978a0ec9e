//! Convex C¹ piecewise-quadratic Hermite interpolation.
//!
//! Profiles are stored in the gap coordinate `s = 1 - x` (distance to the cusp
//! tip), in which a convex non-increasing profile `f(x)` becomes a convex
//! non-decreasing `g(s) = f(1 - s)` with `g(0) = 0`. Working in `s` keeps full
//! relative precision near the tip.
//!
//! Between two knots with values `va, vb` and slopes `da ≤ db`, a convex C¹
//! interpolant exists iff the secant `σ = (vb - va)/(b - a)` satisfies
//! `da < σ < db` (or all three coincide). When `σ` equals the mean slope a
//! single quadratic suffices; otherwise two quadratics meet at the abscissa
//! where the endpoint tangent lines intersect, with slope `σ` there.

use crate::error::{Error, Result};

const MODULE: &str = "construct";

/// Relative tolerance for the single-quadratic test and collinear data.
const SINGLE_PIECE_TOL: f64 = 1e-12;

/// Hermite data at one abscissa of the gap coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteKnot {
    pub gap: f64,
    pub value: f64,
    pub slope: f64,
}

/// `g(s) = value + slope (s - anchor) + curvature/2 (s - anchor)²` on `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPiece {
    pub left: f64,
    pub right: f64,
    pub anchor: f64,
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

impl QuadPiece {
    pub fn value_at(&self, s: f64) -> f64 {
        let d = s - self.anchor;
        self.value + d * (self.slope + 0.5 * self.curvature * d)
    }

    pub fn slope_at(&self, s: f64) -> f64 {
        self.slope + self.curvature * (s - self.anchor)
    }
}

/// `g(s) = value_end (s / end)^exponent` on `[0, end]`, closing the profile at
/// the tip with `g(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub end: f64,
    pub value_end: f64,
    pub exponent: f64,
}

impl PowerTail {
    /// Matches value and slope at `knot`. The exponent is
    /// `slope · gap / value`, which must be at least 1 for convexity.
    pub fn matching(knot: HermiteKnot) -> Result<Self> {
        if !(knot.value > 0.0 && knot.gap > 0.0) {
            return Err(Error::construction(MODULE, "power tail needs a positive value at a positive gap"));
        }
        let exponent = knot.slope * knot.gap / knot.value;
        if exponent < 1.0 {
            return Err(Error::construction(
                MODULE,
                format!(
                    "power tail from gap {} has exponent {exponent} < 1; slope {} is below the secant to the tip",
                    knot.gap, knot.slope
                ),
            ));
        }
        Ok(Self { end: knot.gap, value_end: knot.value, exponent })
    }

    /// Coefficient `c` in `c s^q`.
    pub fn coefficient(&self) -> f64 {
        self.value_end / self.end.powf(self.exponent)
    }

    pub fn value_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.value_end * (s / self.end).powf(self.exponent)
    }

    pub fn slope_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return if self.exponent == 1.0 { self.value_end / self.end } else { 0.0 };
        }
        self.value_end * self.exponent / self.end * (s / self.end).powf(self.exponent - 1.0)
    }
}

/// Why Hermite data on an interval admit no convex C¹ interpolant.
#[derive(Debug, Clone, PartialEq)]
pub enum Incompatibility {
    /// The secant slope is not strictly between the endpoint slopes.
    SecantOutsideSlopes { secant: f64, left_slope: f64, right_slope: f64 },
    /// The interval has non-positive width.
    EmptyInterval,
}

impl std::fmt::Display for Incompatibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Incompatibility::SecantOutsideSlopes { secant, left_slope, right_slope } => write!(
                f,
                "secant slope {secant} not strictly between endpoint slopes {left_slope} and {right_slope}"
            ),
            Incompatibility::EmptyInterval => write!(f, "knots do not bound an interval"),
        }
    }
}

/// Checks the convex C¹ existence condition between two knots with `a.gap < b.gap`.
pub fn check_interval(a: HermiteKnot, b: HermiteKnot) -> std::result::Result<(), Incompatibility> {
    let h = b.gap - a.gap;
    if !(h > 0.0) {
        return Err(Incompatibility::EmptyInterval);
    }
    let secant = (b.value - a.value) / h;
    let scale = secant.abs().max(a.slope.abs()).max(b.slope.abs());
    let tol = SINGLE_PIECE_TOL * scale;
    let collinear = (b.slope - a.slope).abs() <= tol && (secant - a.slope).abs() <= tol;
    if collinear || (a.slope < secant && secant < b.slope) {
        Ok(())
    } else {
        Err(Incompatibility::SecantOutsideSlopes { secant, left_slope: a.slope, right_slope: b.slope })
    }
}

/// Quadratic pieces interpolating `a` and `b` (`a.gap < b.gap`), ordered by abscissa.
pub fn interpolate_interval(a: HermiteKnot, b: HermiteKnot) -> std::result::Result<Vec<QuadPiece>, Incompatibility> {
    check_interval(a, b)?;
    let h = b.gap - a.gap;
    let secant = (b.value - a.value) / h;
    let mean = 0.5 * (a.slope + b.slope);
    let scale = secant.abs().max(a.slope.abs()).max(b.slope.abs());
    if (secant - mean).abs() <= SINGLE_PIECE_TOL * scale {
        // Hermite at `a`, value at `b`; the slope at `b` is then exact up to the tolerance.
        let curvature = 2.0 * (b.value - a.value - a.slope * h) / (h * h);
        return Ok(vec![QuadPiece { left: a.gap, right: b.gap, anchor: a.gap, value: a.value, slope: a.slope, curvature }]);
    }
    // Tangent lines at a and b meet at `joint`; the derivative there equals the secant.
    let joint = (b.value - a.value + a.slope * a.gap - b.slope * b.gap) / (a.slope - b.slope);
    let mut pieces = Vec::with_capacity(2);
    if joint > a.gap {
        pieces.push(QuadPiece {
            left: a.gap,
            right: joint,
            anchor: a.gap,
            value: a.value,
            slope: a.slope,
            curvature: (secant - a.slope) / (joint - a.gap),
        });
    }
    if joint < b.gap {
        pieces.push(QuadPiece {
            left: joint,
            right: b.gap,
            anchor: b.gap,
            value: b.value,
            slope: b.slope,
            curvature: (b.slope - secant) / (b.gap - joint),
        });
    }
    Ok(pieces)
}

/// A profile equal to `cap_value` for gaps at or beyond `cap_gap`, a convex
/// quadratic spline through the knots below it, and a power tail to the tip.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCapInterpolant {
    cap_value: f64,
    cap_gap: f64,
    knots: Vec<HermiteKnot>,
    pieces: Vec<QuadPiece>,
    tail: PowerTail,
}

impl FlatCapInterpolant {
    /// Builds the interpolant. `knots` may come in any order; the knot with
    /// the largest gap must carry `cap_value`, which is where the cap starts.
    pub fn from_knots(cap_value: f64, mut knots: Vec<HermiteKnot>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::construction(MODULE, "at least two knots are required"));
        }
        knots.sort_by(|p, q| p.gap.total_cmp(&q.gap));
        let outer = *knots.last().expect("non-empty");
        if (outer.value - cap_value).abs() > 1e-14 * cap_value.abs().max(1.0) {
            return Err(Error::construction(
                MODULE,
                format!("outermost knot value {} does not match the cap value {cap_value}", outer.value),
            ));
        }
        let mut pieces = Vec::new();
        for pair in knots.windows(2) {
            let seg = interpolate_interval(pair[0], pair[1]).map_err(|why| {
                Error::construction(MODULE, format!("knot interval gap [{}, {}]: {why}", pair[0].gap, pair[1].gap))
            })?;
            pieces.extend(seg);
        }
        let tail = PowerTail::matching(knots[0])?;
        Ok(Self { cap_value, cap_gap: outer.gap, knots, pieces, tail })
    }

    pub fn cap_value(&self) -> f64 {
        self.cap_value
    }

    pub fn cap_gap(&self) -> f64 {
        self.cap_gap
    }

    /// Knots sorted by increasing gap (i.e. decreasing `x`).
    pub fn knots(&self) -> &[HermiteKnot] {
        &self.knots
    }

    pub fn pieces(&self) -> &[QuadPiece] {
        &self.pieces
    }

    pub fn tail(&self) -> &PowerTail {
        &self.tail
    }

    fn piece_for(&self, s: f64) -> &QuadPiece {
        let idx = self.pieces.partition_point(|p| p.right < s);
        &self.pieces[idx.min(self.pieces.len() - 1)]
    }

    pub fn value_at_gap(&self, s: f64) -> f64 {
        if s >= self.cap_gap {
            self.cap_value
        } else if s <= self.tail.end {
            self.tail.value_at(s)
        } else {
            self.piece_for(s).value_at(s)
        }
    }

    /// Right derivative in `s` at the cap junction is reported as the
    /// spline's slope; inside the cap it is zero.
    pub fn slope_at_gap(&self, s: f64) -> f64 {
        if s > self.cap_gap {
            0.0
        } else if s <= self.tail.end {
            self.tail.slope_at(s)
        } else {
            self.piece_for(s).slope_at(s)
        }
    }

    /// All abscissas where the second derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pieces.iter().flat_map(|p| [p.left, p.right]).collect();
        out.push(self.tail.end);
        out.push(self.cap_gap);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}
