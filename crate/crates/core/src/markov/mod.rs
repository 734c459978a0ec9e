//! Markov factors `sup ‖∂P/∂x_j‖_p / ‖P‖_p` on graph domains.
//!
//! Three estimators are provided:
//!
//! * [`extremal_ratio`] evaluates the ratio for `P_n(x, y) = y·P_n^{(α,β)}(x)`
//!   through one-dimensional integrals, which reaches large degrees cheaply;
//! * [`best_markov_p2`] solves the `p = 2` problem exactly as a symmetric
//!   definite pencil on a Gram basis;
//! * [`lower_bound_markov_p`] climbs the ratio for general `p` and certifies
//!   only a lower bound.
//!
//! Per-direction factors are reported together with their maximum. The
//! norm of `max_j |∂P/∂x_j|` lies between that maximum and `2^{1/p}` times it.

mod ascent;
mod fit;
mod gram;

pub use ascent::{lower_bound_markov_p, AscentOptions};
pub use fit::{fit_exponent, local_slopes, FitModel, MarkovReport};
pub use gram::{assemble_gram, best_markov_p2, domain_box, EigenOptions, GramPair, P2_DEGREE_GUARDRAIL};

use crate::domain::{index_of_convexity, CuspProfile, GraphDomain, DEFAULT_R_MAX};
use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::quad::{lp_weighted_line, GradedMesh};

const MODULE: &str = "markov";

/// Differentiation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    X,
    Y,
    /// The larger of the `x` and `y` factors.
    Max,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Direction::X),
            "y" => Ok(Direction::Y),
            "max" => Ok(Direction::Max),
            other => Err(Error::domain(MODULE, format!("unknown direction '{other}' (expected x, y or max)"))),
        }
    }
}

/// `α = (2(p+1)·I_conv + 2 - p/2)/p + margin`.
///
/// For `margin > 0` this satisfies `αp + p/2 - 2 > 2 I_conv (p+1)`, and in
/// particular `αp ≥ 2 I_conv + 2 - p/2`.
pub fn alpha_selector(p: f64, i_conv: f64, margin: f64) -> f64 {
    (2.0 * (p + 1.0) * i_conv + 2.0 - p / 2.0) / p + margin
}

/// `(∫ f |P_n^{(α,β)}|^p / ((1/(p+1)) ∫ f^{p+1} |P_n^{(α,β)}|^p))^{1/p}`, the
/// ratio `‖∂P/∂y‖_p / ‖P‖_p` for `P = y·P_n^{(α,β)}(x)`.
pub fn extremal_ratio(domain: &GraphDomain, params: &JacobiParams, n: usize, p: f64, mesh: &GradedMesh) -> Result<f64> {
    let profile = domain.profile();
    let top = lp_weighted_line(profile, 1.0, params, n, p, mesh)?;
    let bottom = lp_weighted_line(profile, p + 1.0, params, n, p, mesh)? / (p + 1.0);
    if !(bottom > 0.0) {
        return Err(Error::numerical(MODULE, format!("‖y·P_n‖_p vanished at n = {n}")));
    }
    Ok((top / bottom).powf(1.0 / p))
}

/// `[∫ f |P_n^{(α,β)}|^p dx] / (ε_n n^{αp-4})` with `ε_n = n² f(1 - υ/n²)`.
///
/// The lemma's hypothesis `αp ≥ 2 I_conv(f) + 2 - p/2` is checked first, with
/// `I_conv` estimated on the profile's convex part.
pub fn lemma31_ratio(
    profile: &CuspProfile,
    params: &JacobiParams,
    n: usize,
    p: f64,
    upsilon: f64,
    mesh: &GradedMesh,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain(MODULE, "lemma ratio is defined for n ≥ 1"));
    }
    if !(upsilon > 0.0 && upsilon <= 1.0) {
        return Err(Error::domain(MODULE, format!("υ = {upsilon} must lie in (0, 1]")));
    }
    let i_conv = index_of_convexity(profile, profile.convex_from(), DEFAULT_R_MAX)?;
    let lhs = params.alpha() * p;
    let rhs = 2.0 * i_conv + 2.0 - p / 2.0;
    if lhs < rhs {
        return Err(Error::precondition(
            MODULE,
            format!("αp ≥ 2·I_conv + 2 - p/2 fails: αp = {lhs}, 2·I_conv + 2 - p/2 = {rhs} (I_conv ≈ {i_conv:.6})"),
        ));
    }
    let nf = n as f64;
    let epsilon_n = nf * nf * profile.value_at_gap(upsilon / (nf * nf));
    let integral = lp_weighted_line(profile, 1.0, params, n, p, mesh)?;
    Ok(integral / (epsilon_n * nf.powf(lhs - 4.0)))
}
