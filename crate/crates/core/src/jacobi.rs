//! Jacobi polynomials, their classical asymptotics, and the Bessel function
//! `J_α` that appears in the Mehler–Heine limit.
//!
//! Everything here is a pure function of its arguments. Evaluation uses the
//! forward three-term recurrence, which is stable on `[-1, 1]` for the
//! parameter ranges the rest of the crate uses.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const MODULE: &str = "jacobi";

/// Relative size below which a Bessel series term ends the summation.
const BESSEL_REL_TOL: f64 = 1e-17;
const BESSEL_MAX_TERMS: usize = 200;
/// Largest argument accepted by [`bessel_j`]. Cancellation in the alternating
/// series costs roughly `z / ln 10` digits, so accuracy is best for small `z`.
pub const BESSEL_MAX_ARG: f64 = 50.0;

const ZERO_MAX_NEWTON: usize = 50;

/// The pair `(α, β)` indexing `P_n^{(α,β)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    /// Both parameters must exceed `-1` so that the weight
    /// `(1-x)^α (1+x)^β` is integrable.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && alpha.is_finite()) || !(beta > -1.0 && beta.is_finite()) {
            return Err(Error::domain(
                MODULE,
                format!("Jacobi parameters must satisfy α > -1, β > -1 (got α = {alpha}, β = {beta})"),
            ));
        }
        Ok(Self { alpha, beta })
    }

    /// Legendre polynomials, `α = β = 0`.
    pub fn legendre() -> Self {
        Self { alpha: 0.0, beta: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `P_n^{(α,β)}(x)` by forward recurrence.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        check_unit_interval(x)?;
        Ok(self.eval_unchecked(n, x))
    }

    /// Recurrence without the range check; callers guarantee `x ∈ [-1, 1]`.
    pub(crate) fn eval_unchecked(&self, n: usize, x: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let p0 = 1.0;
        if n == 0 {
            return p0;
        }
        let p1 = 0.5 * (2.0 * (a + 1.0) + (a + b + 2.0) * (x - 1.0));
        if n == 1 {
            return p1;
        }
        let ab = a + b;
        let ab_sq_diff = a * a - b * b;
        let (mut prev, mut cur) = (p0, p1);
        for k in 2..=n {
            let k = k as f64;
            let two_k_ab = 2.0 * k + ab;
            let c1 = 2.0 * k * (k + ab) * (two_k_ab - 2.0);
            let c2 = (two_k_ab - 1.0) * ab_sq_diff;
            let c3 = (two_k_ab - 2.0) * (two_k_ab - 1.0) * two_k_ab;
            let c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * two_k_ab;
            let next = ((c2 + c3 * x) * cur - c4 * prev) / c1;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// `d/dx P_n^{(α,β)}(x) = (n+α+β+1)/2 · P_{n-1}^{(α+1,β+1)}(x)`.
    pub fn deriv(&self, n: usize, x: f64) -> Result<f64> {
        check_unit_interval(x)?;
        Ok(self.deriv_unchecked(n, x))
    }

    pub(crate) fn deriv_unchecked(&self, n: usize, x: f64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let shifted = Self { alpha: self.alpha + 1.0, beta: self.beta + 1.0 };
        0.5 * (n as f64 + self.alpha + self.beta + 1.0) * shifted.eval_unchecked(n - 1, x)
    }

    /// `|n^{-α} P_n(cos(z/n)) - (z/2)^{-α} J_α(z)|`, the error in the
    /// Mehler–Heine limit at finite degree.
    pub fn mehler_heine_gap(&self, z: f64, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain(MODULE, "Mehler–Heine gap needs n ≥ 1"));
        }
        let nf = n as f64;
        if !(z > 0.0 && z <= nf) {
            return Err(Error::domain(MODULE, format!("Mehler–Heine argument z = {z} outside (0, {n}]")));
        }
        let scaled_poly = self.eval_unchecked(n, (z / nf).cos()) * nf.powf(-self.alpha);
        let limit = bessel_j_scaled(self.alpha, z)?;
        Ok((scaled_poly - limit).abs())
    }

    /// Interior (Darboux) asymptotic form at degree `n` and angle `θ`.
    pub fn darboux(&self, n: usize, theta: f64) -> Result<DarbouxApprox> {
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::domain(MODULE, format!("Darboux amplitude is singular at θ = {theta}; need 0 < θ < π")));
        }
        if n == 0 {
            return Err(Error::domain(MODULE, "Darboux form needs n ≥ 1"));
        }
        let (a, b) = (self.alpha, self.beta);
        let k_theta = PI.powf(-0.5) * (theta / 2.0).sin().powf(-a - 0.5) * (theta / 2.0).cos().powf(-b - 0.5);
        Ok(DarbouxApprox { n, theta, k_theta, big_n: self.darboux_degree(n), gamma: self.darboux_phase() })
    }

    /// Convenience for `darboux(n, θ)?.value()`.
    pub fn darboux_eval(&self, n: usize, theta: f64) -> Result<f64> {
        Ok(self.darboux(n, theta)?.value())
    }

    /// `max |P_n(cos θ) - darboux_eval(n, θ)|` over `samples + 1` equally
    /// spaced angles of `[lo, hi]`.
    pub fn darboux_max_error(&self, n: usize, lo: f64, hi: f64, samples: usize) -> Result<f64> {
        if !(0.0 < lo && lo < hi && hi < PI) || samples == 0 {
            return Err(Error::domain(MODULE, format!("Darboux window [{lo}, {hi}] must satisfy 0 < lo < hi < π")));
        }
        let mut worst = 0.0f64;
        for i in 0..=samples {
            let t = lo + (hi - lo) * i as f64 / samples as f64;
            worst = worst.max((self.eval_unchecked(n, t.cos()) - self.darboux_eval(n, t)?).abs());
        }
        Ok(worst)
    }

    /// `N = n + (α+β+1)/2`.
    pub fn darboux_degree(&self, n: usize) -> f64 {
        n as f64 + 0.5 * (self.alpha + self.beta + 1.0)
    }

    /// `γ = -(α + 1/2) π / 2`.
    pub fn darboux_phase(&self) -> f64 {
        -(self.alpha + 0.5) * PI / 2.0
    }

    /// Zeros of `θ ↦ P_n(cos θ)` lying in `[a, b] ⊂ (0, π)`, in increasing
    /// order.
    ///
    /// Starting points come from the Darboux phase, `θ_l = ((l - 1/2)π - γ) / N`,
    /// and are refined by Newton's method safeguarded by a sign-change bracket.
    pub fn zeros_theta(&self, n: usize, a: f64, b: f64) -> Result<Vec<f64>> {
        if !(0.0 < a && a < b && b < PI) {
            return Err(Error::domain(MODULE, format!("zero search interval [{a}, {b}] must satisfy 0 < a < b < π")));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let big_n = self.darboux_degree(n);
        let gamma = self.darboux_phase();
        let spacing = PI / big_n;
        let g = |t: f64| self.eval_unchecked(n, t.cos());
        let dg = |t: f64| -t.sin() * self.deriv_unchecked(n, t.cos());

        let l_lo = ((a - spacing) * big_n + gamma) / PI + 0.5;
        let l_hi = ((b + spacing) * big_n + gamma) / PI + 0.5;
        let mut zeros: Vec<f64> = Vec::new();
        for l in (l_lo.floor() as i64)..=(l_hi.ceil() as i64) {
            let guess = ((l as f64 - 0.5) * PI - gamma) / big_n;
            if guess <= 0.0 || guess >= PI {
                continue;
            }
            let Some(root) = refine_zero(&g, &dg, guess, spacing, l)? else {
                continue;
            };
            if root < a || root > b {
                continue;
            }
            if zeros.iter().all(|z| (z - root).abs() > 1e-6 * spacing) {
                zeros.push(root);
            }
        }
        zeros.sort_by(|x, y| x.total_cmp(y));
        Ok(zeros)
    }

    /// Two-regime envelope for `|P_n(cos θ)|` on `(0, π - δ]`: `n^α` while
    /// `θ ≤ c/n`, then `n^{-1/2} θ^{-α-1/2}`.
    pub fn envelope_bound(&self, n: usize, theta: f64, consts: EnvelopeConstants) -> f64 {
        let nf = n.max(1) as f64;
        if theta <= consts.c / nf {
            nf.powf(self.alpha)
        } else {
            nf.powf(-0.5) * theta.powf(-self.alpha - 0.5)
        }
    }
}

/// Constants of the envelope: cap width `c / n` and end margin `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConstants {
    pub c: f64,
    pub delta: f64,
}

impl Default for EnvelopeConstants {
    fn default() -> Self {
        Self { c: 1.0, delta: 0.1 }
    }
}

/// The leading Darboux term `n^{-1/2} k(θ) cos(Nθ + γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxApprox {
    pub n: usize,
    pub theta: f64,
    /// `k(θ) = π^{-1/2} sin(θ/2)^{-α-1/2} cos(θ/2)^{-β-1/2}`.
    pub k_theta: f64,
    /// `N = n + (α+β+1)/2`.
    pub big_n: f64,
    /// `γ = -(α+1/2)π/2`.
    pub gamma: f64,
}

impl DarbouxApprox {
    pub fn value(&self) -> f64 {
        (self.n as f64).powf(-0.5) * self.k_theta * (self.big_n * self.theta + self.gamma).cos()
    }
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::domain(MODULE, format!("x = {x} outside [-1, 1]")));
    }
    Ok(())
}

/// Returns `None` when no sign change brackets the guess.
fn refine_zero(
    g: &impl Fn(f64) -> f64,
    dg: &impl Fn(f64) -> f64,
    guess: f64,
    spacing: f64,
    index: i64,
) -> Result<Option<f64>> {
    let clamp = |t: f64| t.clamp(f64::EPSILON, PI - f64::EPSILON);
    let mut bracket = None;
    for half_width in [0.5 * spacing, spacing] {
        let (lo, hi) = (clamp(guess - half_width), clamp(guess + half_width));
        let (glo, ghi) = (g(lo), g(hi));
        if glo == 0.0 {
            return Ok(Some(lo));
        }
        if ghi == 0.0 {
            return Ok(Some(hi));
        }
        if glo.signum() != ghi.signum() {
            bracket = Some((lo, hi, glo));
            break;
        }
    }
    let Some((mut lo, mut hi, glo)) = bracket else {
        return Ok(None);
    };
    let lo_sign = glo.signum();
    let mut t = guess.clamp(lo, hi);
    for _ in 0..ZERO_MAX_NEWTON {
        let gt = g(t);
        if gt == 0.0 {
            return Ok(Some(t));
        }
        if gt.signum() == lo_sign {
            lo = t;
        } else {
            hi = t;
        }
        let slope = dg(t);
        let newton = t - gt / slope;
        let next = if slope != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.max(1.0) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(Some(next));
        }
        t = next;
    }
    Err(Error::numerical(MODULE, format!("Newton refinement of zero l = {index} did not converge in {ZERO_MAX_NEWTON} steps")))
}

/// `J_α(z)` from the ascending power series.
///
/// The sum stops once a term falls below `1e-17` of the running total or after
/// 200 terms. Requires `α > -1`, `0 ≤ z ≤ 50`; `z = 0` with `α < 0` has no
/// finite value and is rejected.
pub fn bessel_j(alpha: f64, z: f64) -> Result<f64> {
    check_bessel_args(alpha, z)?;
    if z == 0.0 {
        if alpha < 0.0 {
            return Err(Error::domain(MODULE, format!("J_α(0) is unbounded for α = {alpha} < 0")));
        }
        return Ok(if alpha == 0.0 { 1.0 } else { 0.0 });
    }
    Ok((0.5 * z).powf(alpha) * bessel_j_scaled(alpha, z)?)
}

/// `(z/2)^{-α} J_α(z) = Σ_m (-z²/4)^m / (m! Γ(m+α+1))`, finite at `z = 0`.
pub fn bessel_j_scaled(alpha: f64, z: f64) -> Result<f64> {
    check_bessel_args(alpha, z)?;
    let q = -0.25 * z * z;
    let mut term = 1.0 / gamma(alpha + 1.0);
    let mut sum = term;
    for m in 1..BESSEL_MAX_TERMS {
        let mf = m as f64;
        term *= q / (mf * (mf + alpha));
        sum += term;
        if term.abs() < BESSEL_REL_TOL * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// Partial sum of the first `terms` series terms of `J_α(z)`.
pub fn bessel_j_partial(alpha: f64, z: f64, terms: usize) -> Result<f64> {
    check_bessel_args(alpha, z)?;
    let q = -0.25 * z * z;
    let mut term = 1.0 / gamma(alpha + 1.0);
    let mut sum = 0.0;
    for m in 0..terms {
        if m > 0 {
            let mf = m as f64;
            term *= q / (mf * (mf + alpha));
        }
        sum += term;
    }
    Ok((0.5 * z).powf(alpha) * sum)
}

fn check_bessel_args(alpha: f64, z: f64) -> Result<()> {
    if !(alpha > -1.0) {
        return Err(Error::domain(MODULE, format!("Bessel order α = {alpha} must exceed -1")));
    }
    if !(0.0..=BESSEL_MAX_ARG).contains(&z) {
        return Err(Error::domain(MODULE, format!("Bessel argument z = {z} outside [0, {BESSEL_MAX_ARG}]")));
    }
    Ok(())
}

/// Lower bound for `min_{z∈[0,1]} (z/2)^{-α} J_α(z)` obtained from the first
/// two series terms: `(4α+3) / (4Γ(α+2))`.
pub fn scaled_bessel_floor(alpha: f64) -> f64 {
    (4.0 * alpha + 3.0) / (4.0 * gamma(alpha + 2.0))
}

/// The weaker constant `(4α+2) / (4Γ(α+2))` carried into the lower-bound
/// estimate.
pub fn scaled_bessel_floor_weak(alpha: f64) -> f64 {
    (4.0 * alpha + 2.0) / (4.0 * gamma(alpha + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Double-double number used to keep the alternating series oracle exact
    /// to well below the tolerance of the recurrence comparison.
    #[derive(Clone, Copy)]
    struct Dd(f64, f64);

    impl Dd {
        fn from(x: f64) -> Self {
            Dd(x, 0.0)
        }
        fn two_sum(a: f64, b: f64) -> Self {
            let s = a + b;
            let bb = s - a;
            Dd(s, (a - (s - bb)) + (b - bb))
        }
        fn add(self, o: Dd) -> Dd {
            let Dd(s, e) = Dd::two_sum(self.0, o.0);
            let e = e + self.1 + o.1;
            Dd::two_sum(s, e)
        }
        fn mul(self, o: Dd) -> Dd {
            let p = self.0 * o.0;
            let e = self.0.mul_add(o.0, -p) + self.0 * o.1 + self.1 * o.0;
            Dd::two_sum(p, e)
        }
        fn div_f64(self, d: f64) -> Dd {
            let q1 = self.0 / d;
            let r = self.add(Dd::from(q1).mul(Dd::from(-d)));
            Dd::two_sum(q1, r.0 / d)
        }
    }

    /// Hypergeometric series
    /// `P_n(x) = Σ_k C(n+α, n-k) C(n+β, k) ((x-1)/2)^k ((x+1)/2)^{n-k}`,
    /// summed in double-double arithmetic.
    fn series_oracle(alpha: f64, beta: f64, n: usize, x: f64) -> f64 {
        fn binom(top: Dd, k: usize) -> Dd {
            (0..k).fold(Dd::from(1.0), |acc, j| acc.mul(top.add(Dd::from(-(j as f64)))).div_f64(j as f64 + 1.0))
        }
        fn pow(b: Dd, e: usize) -> Dd {
            (0..e).fold(Dd::from(1.0), |acc, _| acc.mul(b))
        }
        let na = Dd::two_sum(n as f64, alpha);
        let nb = Dd::two_sum(n as f64, beta);
        let xm = Dd::two_sum(x, -1.0).div_f64(2.0);
        let xp = Dd::two_sum(x, 1.0).div_f64(2.0);
        let total = (0..=n).fold(Dd::from(0.0), |acc, k| {
            acc.add(binom(na, n - k).mul(binom(nb, k)).mul(pow(xm, k)).mul(pow(xp, n - k)))
        });
        total.0 + total.1
    }

    #[test]
    fn low_degree_values() {
        let legendre = JacobiParams::legendre();
        assert_eq!(legendre.eval(0, 0.3).unwrap(), 1.0);
        assert_relative_eq!(legendre.eval(1, 0.5).unwrap(), series_oracle(0.0, 0.0, 1, 0.5), epsilon = 1e-15);
        assert_relative_eq!(legendre.eval(1, 0.5).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn value_at_one_is_binomial() {
        let params = JacobiParams::new(7.5, 0.0).unwrap();
        // C(12.5, 5) = 12.5·11.5·10.5·9.5·8.5 / 5!
        let expected = 12.5 * 11.5 * 10.5 * 9.5 * 8.5 / 120.0;
        assert_relative_eq!(params.eval(5, 1.0).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(series_oracle(7.5, 0.0, 5, 1.0), expected, max_relative = 1e-14);
        let via_gamma = gamma(13.5) / (gamma(8.5) * 120.0);
        assert_relative_eq!(expected, via_gamma, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters_and_arguments() {
        assert!(matches!(JacobiParams::new(-1.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(JacobiParams::new(0.0, -1.5), Err(Error::Domain { .. })));
        assert!(JacobiParams::legendre().eval(3, 1.01).is_err());
        assert!(JacobiParams::legendre().deriv(3, -1.01).is_err());
    }

    #[test]
    fn derivative_examples() {
        let legendre = JacobiParams::legendre();
        assert_eq!(legendre.deriv(0, 0.7).unwrap(), 0.0);
        let h = 1e-6;
        let fd = (legendre.eval(2, h).unwrap() - legendre.eval(2, -h).unwrap()) / (2.0 * h);
        assert!(fd.abs() < 1e-9);
        assert!(legendre.deriv(2, 0.0).unwrap().abs() < 1e-15);

        let p = JacobiParams::new(1.0, 1.0).unwrap();
        let fd = (p.eval(3, 0.2 + h).unwrap() - p.eval(3, 0.2 - h).unwrap()) / (2.0 * h);
        assert!((p.deriv(3, 0.2).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn orthogonality_under_jacobi_weight() {
        let rule = crate::quad::gauss_legendre(64).unwrap();
        for &(a, b) in &[(0.0, 0.0), (1.0, 0.0), (2.0, 2.0), (1.0, 2.0)] {
            let p = JacobiParams::new(a, b).unwrap();
            for m in 0..=8 {
                for n in (m + 1)..=8 {
                    let integral: f64 = rule
                        .nodes()
                        .iter()
                        .zip(rule.weights())
                        .map(|(&x, &w)| w * (1.0 - x).powf(a) * (1.0 + x).powf(b) * p.eval(m, x).unwrap() * p.eval(n, x).unwrap())
                        .sum();
                    assert!(integral.abs() < 1e-8, "(α,β)=({a},{b}) m={m} n={n}: {integral}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_series(n in 0usize..=20, x in -1.0f64..=1.0, a in -0.9f64..=8.0, b in -0.9f64..=8.0) {
            let p = JacobiParams::new(a, b).unwrap();
            let value = p.eval(n, x).unwrap();
            let oracle = series_oracle(a, b, n, x);
            prop_assert!((value - oracle).abs() <= 1e-9 * (1.0 + value.abs()), "{value} vs {oracle}");
        }

        #[test]
        fn derivative_matches_central_difference(n in 0usize..=15, x in -0.99f64..=0.99, a in 0.0f64..=3.0, b in 0.0f64..=3.0) {
            let p = JacobiParams::new(a, b).unwrap();
            let h = 1e-6;
            let fd = (p.eval(n, x + h).unwrap() - p.eval(n, x - h).unwrap()) / (2.0 * h);
            let exact = p.deriv(n, x).unwrap();
            let scale = exact.abs().max(p.eval(n, x).unwrap().abs()).max(1.0);
            prop_assert!((exact - fd).abs() <= 1e-6 * scale, "{exact} vs {fd}");
        }
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        // 30-term series evaluated independently of the adaptive stop.
        let oracle: f64 = (0..30)
            .map(|m| {
                let fact: f64 = (1..=m).map(|j| j as f64).product();
                (-1f64).powi(m) * 0.25f64.powi(m) / (fact * fact)
            })
            .sum();
        assert_relative_eq!(bessel_j(0.0, 1.0).unwrap(), oracle, epsilon = 1e-15);
        assert!((bessel_j(0.0, 1.0).unwrap() - 0.7651976866).abs() < 1e-10);
        assert!(bessel_j(0.0, -0.1).is_err());
        assert!(bessel_j(-0.5, 0.0).is_err());
    }

    #[test]
    fn scaled_bessel_floor_holds_on_unit_interval() {
        for &alpha in &[0.0, 0.5, 2.0, 7.5] {
            let min = (0..=1000)
                .map(|i| bessel_j_scaled(alpha, i as f64 / 1000.0).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(min >= scaled_bessel_floor(alpha), "α={alpha}");
            assert!(min >= scaled_bessel_floor_weak(alpha), "α={alpha}");
        }
        assert_relative_eq!(scaled_bessel_floor(0.0), 0.75);
    }

    #[test]
    fn bessel_tail_bounded_by_first_omitted_term() {
        for &alpha in &[0.0, 0.5, 3.0] {
            for &z in &[0.3, 1.0, 2.0] {
                let full = bessel_j(alpha, z).unwrap();
                for terms in 1..8 {
                    let partial = bessel_j_partial(alpha, z, terms).unwrap();
                    let omitted = (bessel_j_partial(alpha, z, terms + 1).unwrap() - partial).abs();
                    assert!((full - partial).abs() <= omitted * (1.0 + 1e-12), "α={alpha} z={z} terms={terms}");
                }
            }
        }
    }

    #[test]
    fn mehler_heine_gap_shrinks() {
        let p = JacobiParams::new(0.5, 0.0).unwrap();
        assert!(p.mehler_heine_gap(1.0, 500).unwrap() <= 0.01);
        let legendre = JacobiParams::legendre();
        assert!(legendre.mehler_heine_gap(1e-9, 7).unwrap() < 1e-12);
        assert!(legendre.mehler_heine_gap(2.0, 400).unwrap() < legendre.mehler_heine_gap(2.0, 100).unwrap());
        assert!(legendre.mehler_heine_gap(0.0, 10).is_err());
        assert!(legendre.mehler_heine_gap(11.0, 10).is_err());
    }

    fn darboux_max_error(p: &JacobiParams, n: usize) -> f64 {
        p.darboux_max_error(n, 0.6, PI - 0.6, 2000).unwrap()
    }

    #[test]
    fn darboux_examples() {
        let legendre = JacobiParams::legendre();
        let err = (legendre.eval(100, 0.0).unwrap() - legendre.darboux_eval(100, PI / 2.0).unwrap()).abs();
        // P_100(0) has a closed form; the measured constant C = err·100^{3/2} stays O(1).
        assert!(err * 100f64.powf(1.5) < 1.0, "C = {}", err * 1000.0);

        let sym = JacobiParams::new(1.5, 1.5).unwrap();
        for &t in &[0.2, 0.9, 1.4] {
            let left = sym.darboux(10, t).unwrap().k_theta;
            let right = sym.darboux(10, PI - t).unwrap().k_theta;
            assert_relative_eq!(left, right, max_relative = 1e-13);
        }
        assert!(legendre.darboux(10, 0.0).is_err());
        assert!(legendre.darboux(10, PI).is_err());

        let ratio = darboux_max_error(&legendre, 200) / darboux_max_error(&legendre, 100);
        assert!((0.35..=0.65).contains(&ratio), "E_200/E_100 = {ratio}");
    }

    #[test]
    fn darboux_error_decay_exponent() {
        let legendre = JacobiParams::legendre();
        let ns = [50.0f64, 100.0, 200.0, 400.0];
        let logs: Vec<(f64, f64)> = ns.iter().map(|&n| (n.ln(), darboux_max_error(&legendre, n as usize).ln())).collect();
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / 4.0;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / 4.0;
        let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!(slope <= -1.3, "slope {slope}");
    }

    #[test]
    fn legendre_two_zeros() {
        let zeros = JacobiParams::legendre().zeros_theta(2, 0.5, PI - 0.5).unwrap();
        assert_eq!(zeros.len(), 2);
        assert_relative_eq!(zeros[0], (1.0 / 3f64.sqrt()).acos(), epsilon = 1e-13);
        assert_relative_eq!(zeros[1], (-1.0 / 3f64.sqrt()).acos(), epsilon = 1e-13);
    }

    #[test]
    fn zero_count_and_residuals() {
        for &(a, b, n) in &[(0.0, 0.0, 40usize), (7.5, 0.0, 64), (2.0, 1.0, 17), (0.5, 0.0, 150)] {
            let p = JacobiParams::new(a, b).unwrap();
            let (lo, hi) = (0.3, 2.8);
            let zeros = p.zeros_theta(n, lo, hi).unwrap();
            // Sign-change oracle on a fine grid.
            let grid: Vec<f64> = (0..=20000).map(|i| p.eval(n, (lo + (hi - lo) * i as f64 / 20000.0).cos()).unwrap()).collect();
            let changes = grid.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
            assert_eq!(zeros.len(), changes, "(α,β,n)=({a},{b},{n})");
            let expected = p.darboux_degree(n) * (hi - lo) / PI;
            assert!((zeros.len() as f64 - expected).abs() <= 1.0 + 1e-9);
            let scale = grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for &t in &zeros {
                assert!(p.eval(n, t.cos()).unwrap().abs() <= 1e-10 * scale);
            }
            assert!(zeros.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn envelope_examples() {
        let consts = EnvelopeConstants::default();
        let legendre = JacobiParams::legendre();
        assert_eq!(legendre.envelope_bound(10, 0.01, consts), 1.0);

        let p = JacobiParams::new(7.5, 0.0).unwrap();
        for n in [10usize, 50, 200] {
            let cap = p.envelope_bound(n, 1.0 / n as f64, consts);
            let tail = (n as f64).powf(-0.5) * (1.0 / n as f64).powf(-8.0);
            assert_relative_eq!(cap / tail, 1.0, max_relative = 1e-12);
        }

        let sup_ratio = |n: usize| {
            (1..=4000)
                .map(|i| {
                    let t = (PI - consts.delta) * i as f64 / 4000.0;
                    p.eval(n, t.cos()).unwrap().abs() / p.envelope_bound(n, t, consts)
                })
                .fold(0.0, f64::max)
        };
        let c: Vec<f64> = [20, 40, 80].iter().map(|&n| sup_ratio(n)).collect();
        let (lo, hi) = c.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi / lo <= 2.0, "{c:?}");
    }
}
