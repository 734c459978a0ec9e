//! Closed-form checks from every module, run by `mlab selftest`.

use std::f64::consts::{E, PI};
use std::io::Write;

use mlab_core::construct::{build_profile, validate_sequence, EpsilonSequence, Violation};
use mlab_core::domain::{index_of_convexity, validate_regular_cusp, CuspProfile, GraphDomain};
use mlab_core::hermite::{interpolate_interval, HermiteKnot};
use mlab_core::jacobi::{bessel_j, EnvelopeConstants, JacobiParams};
use mlab_core::markov::{alpha_selector, assemble_gram, best_markov_p2, extremal_ratio, fit_exponent, Direction};
use mlab_core::markov::{EigenOptions, FitModel};
use mlab_core::poly::{Basis, Poly2D};
use mlab_core::quad::{gauss_legendre, lp_norm_pth_power, lp_weighted_line, GradedMesh, QuadratureRule};

/// Deliberate corruption used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Scale every Gauss–Legendre weight handed to the rule checks by `1 + 1e-3`.
    QuadWeights,
}

struct Ctx {
    fault: Option<Fault>,
}

impl Ctx {
    fn rule(&self, m: usize) -> Result<QuadratureRule, String> {
        let rule = gauss_legendre(m).map_err(|e| e.to_string())?;
        match self.fault {
            Some(Fault::QuadWeights) => {
                let w = rule.weights().iter().map(|w| w * (1.0 + 1e-3)).collect();
                QuadratureRule::from_parts(rule.nodes().to_vec(), w).map_err(|e| e.to_string())
            }
            None => Ok(rule),
        }
    }
}

type Check = fn(&Ctx) -> Result<(), String>;

fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got:e}, expected {want:e} (tolerance {tol:e})"))
    }
}

fn holds(what: &str, ok: bool) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn s<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn jacobi(a: f64, b: f64) -> Result<JacobiParams, String> {
    s(JacobiParams::new(a, b))
}

fn power(k: f64) -> Result<CuspProfile, String> {
    s(CuspProfile::power(k))
}

fn square() -> Result<GraphDomain, String> {
    s(GraphDomain::upper(s(CuspProfile::constant(1.0))?))
}

const CHECKS: &[(&str, &str, Check)] = &[
    ("jacobi", "degree-zero-is-one", |_| close("P_0(0.3)", s(jacobi(0.0, 0.0)?.eval(0, 0.3))?, 1.0, 0.0)),
    ("jacobi", "legendre-p1", |_| close("P_1(0.5)", s(jacobi(0.0, 0.0)?.eval(1, 0.5))?, 0.5, 1e-15)),
    ("jacobi", "value-at-one", |_| {
        let want = (1..=5).map(|i| (7.5 + i as f64) / i as f64).product::<f64>();
        close("P_5^(7.5,0)(1)", s(jacobi(7.5, 0.0)?.eval(5, 1.0))?, want, 1e-12 * want)
    }),
    ("jacobi", "derivative-degree-zero", |_| close("P_0'", s(jacobi(1.0, 2.0)?.deriv(0, 0.4))?, 0.0, 0.0)),
    ("jacobi", "legendre-p2-derivative", |_| close("P_2'(0)", s(jacobi(0.0, 0.0)?.deriv(2, 0.0))?, 0.0, 1e-15)),
    ("jacobi", "bessel-j0-at-zero", |_| close("J_0(0)", s(bessel_j(0.0, 0.0))?, 1.0, 0.0)),
    ("jacobi", "bessel-j0-at-one", |_| close("J_0(1)", s(bessel_j(0.0, 1.0))?, 0.7651976866, 1e-10)),
    ("jacobi", "mehler-heine-small-z", |_| close("gap", s(jacobi(0.0, 0.0)?.mehler_heine_gap(1e-9, 7))?, 0.0, 1e-12)),
    ("jacobi", "mehler-heine-n500", |_| {
        let gap = s(jacobi(0.5, 0.0)?.mehler_heine_gap(1.0, 500))?;
        holds(&format!("gap {gap:e} exceeds 0.01"), gap <= 0.01)
    }),
    ("jacobi", "darboux-amplitude-symmetry", |_| {
        let p = jacobi(1.5, 1.5)?;
        let (l, r) = (s(p.darboux(10, 0.9))?.k_theta, s(p.darboux(10, PI - 0.9))?.k_theta);
        close("k(θ) - k(π-θ)", l - r, 0.0, 1e-13 * l.abs())
    }),
    ("jacobi", "legendre-two-zeros", |_| {
        let z = s(jacobi(0.0, 0.0)?.zeros_theta(2, 0.5, PI - 0.5))?;
        holds(&format!("expected two zeros, got {z:?}"), z.len() == 2)?;
        close("θ_1", z[0], (1.0 / 3f64.sqrt()).acos(), 1e-13)?;
        close("θ_2", z[1], (-1.0 / 3f64.sqrt()).acos(), 1e-13)
    }),
    ("jacobi", "envelope-flat-cap", |_| {
        close("envelope", jacobi(0.0, 0.0)?.envelope_bound(10, 0.01, EnvelopeConstants::default()), 1.0, 0.0)
    }),
    ("domain", "power-tip", |_| close("f(1)", s(power(2.0)?.value(1.0))?, 0.0, 0.0)),
    ("domain", "log-cusp-value", |_| {
        close("φ(e^-1)", s(s(CuspProfile::log(1.0))?.value(1.0 - 1.0 / E))?, 0.5 / E, 1e-15)
    }),
    ("domain", "power-k3-midpoint", |_| close("f(0.5)", s(power(3.0)?.value(0.5))?, 0.125, 1e-16)),
    ("domain", "modulus-k2", |_| {
        let d = s(GraphDomain::upper(power(2.0)?))?;
        let t = 0.09;
        close("ω(t)", s(d.modulus_of_continuity(t))?, (t + t * t).sqrt(), 1e-12)
    }),
    ("domain", "epsilon-one-k2", |_| {
        let d = s(GraphDomain::upper(power(2.0)?))?;
        close("ε_1", s(d.solve_epsilon_n(1))?.epsilon_n, (2f64.sqrt() - 1.0) / 2.0, 1e-10)
    }),
    ("domain", "convexity-index-k3", |_| close("I_conv", s(index_of_convexity(&power(3.0)?, 0.0, 64.0))?, 3.0, 1e-4)),
    ("domain", "convexity-index-linear", |_| close("I_conv", s(index_of_convexity(&power(1.0)?, 0.0, 64.0))?, 1.0, 1e-4)),
    ("domain", "k2-is-regular", |_| {
        let r = validate_regular_cusp(&s(GraphDomain::upper(power(2.0)?))?);
        holds("k = 2 cusp reported irregular", r.regular && r.appindex_holds)?;
        close("I_conv", r.i_conv, 2.0, 1e-4)
    }),
    ("quad", "midpoint-rule", |c| {
        let r = c.rule(1)?;
        close("node", r.nodes()[0], 0.0, 0.0)?;
        close("weight", r.weights()[0], 2.0, 1e-15)
    }),
    ("quad", "two-point-rule", |c| {
        let r = c.rule(2)?;
        close("node", r.nodes()[1], 1.0 / 3f64.sqrt(), 1e-15)?;
        close("weight", r.weights()[0], 1.0, 1e-15)?;
        close("weight", r.weights()[1], 1.0, 1e-15)
    }),
    ("quad", "quartic-exactness", |c| close("∫x⁴", c.rule(3)?.integrate(-1.0, 1.0, |x| x.powi(4)), 0.4, 1e-15)),
    ("quad", "weights-sum-to-two", |c| {
        let r = c.rule(64)?;
        close("∑w", r.weights().iter().sum(), 2.0, 1e-13)
    }),
    ("quad", "square-xy", |_| {
        let xy = s(Poly2D::monomial_from_terms(2, &[((1, 1), 1.0)]))?;
        close("∬x²y²", s(lp_norm_pth_power(&square()?, &xy, 2.0, &GradedMesh::default(), 8))?, 1.0 / 9.0, 1e-13)
    }),
    ("quad", "triangle-area", |_| {
        let one = s(Poly2D::monomial_from_terms(0, &[((0, 0), 1.0)]))?;
        let d = s(GraphDomain::upper(power(1.0)?))?;
        close("area", s(lp_norm_pth_power(&d, &one, 2.0, &GradedMesh::default(), 8))?, 0.5, 1e-13)
    }),
    ("quad", "weighted-line-constant", |_| {
        let v = s(lp_weighted_line(&power(1.0)?, 1.0, &jacobi(0.0, 0.0)?, 0, 2.0, &GradedMesh::default()))?;
        close("∫(1-x)", v, 0.5, 1e-13)
    }),
    ("quad", "legendre-normalisation", |_| {
        let full = s(s(CuspProfile::constant(1.0))?.with_start(-1.0))?;
        let v = s(lp_weighted_line(&full, 0.0, &jacobi(0.0, 0.0)?, 4, 2.0, &GradedMesh::default()))?;
        close("∫P_4²", v, 2.0 / 9.0, 1e-13)
    }),
    ("markov", "alpha-selector", |_| {
        close("α(2, 2, 0.5)", alpha_selector(2.0, 2.0, 0.5), 7.0, 1e-15)?;
        close("α(1, 1, 1)", alpha_selector(1.0, 1.0, 1.0), 6.5, 1e-15)
    }),
    ("markov", "rectangle-ratio", |_| {
        let r = s(extremal_ratio(&square()?, &jacobi(7.5, 0.0)?, 9, 2.0, &GradedMesh::default()))?;
        close("ratio", r, 3f64.sqrt(), 1e-12)
    }),
    ("markov", "square-moments", |_| {
        let g = s(assemble_gram(&square()?, 1, Basis::Monomial, &GradedMesh::default(), 1e-12))?;
        let want = [[1.0, 0.5, 0.5], [0.5, 1.0 / 3.0, 0.25], [0.5, 0.25, 1.0 / 3.0]];
        for (i, row) in want.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                close(&format!("G[{i},{j}]"), g.g[(i, j)], w, 1e-14)?;
            }
        }
        Ok(())
    }),
    ("markov", "constants-have-zero-factor", |_| {
        close("M_0", s(best_markov_p2(&square()?, 0, Direction::Max, &EigenOptions::default()))?, 0.0, 0.0)
    }),
    ("markov", "thin-strip-factor", |_| {
        let strip = s(GraphDomain::upper(s(CuspProfile::constant(1e-3))?))?;
        let f = s(best_markov_p2(&strip, 1, Direction::X, &EigenOptions::default()))?;
        close("factor", f, 12f64.sqrt(), 1e-10)
    }),
    ("markov", "exact-power-fit", |_| {
        let data: Vec<(usize, f64)> = [2, 4, 8, 16, 32].iter().map(|&n| (n, 5.0 * (n as f64).powi(3))).collect();
        let r = s(fit_exponent(&data, FitModel::PurePower))?;
        close("μ", r.fitted_exponent, 3.0, 1e-12)?;
        close("c", r.fitted_constant, 5.0, 1e-11)?;
        holds("residual above 1e-12", r.residual <= 1e-12)
    }),
    ("construct", "power-law-sequence-passes", |_| {
        let r = validate_sequence(&EpsilonSequence::power_law(2.0, 32));
        holds(&format!("violations: {:?}", r.violations), r.passed())
    }),
    ("construct", "increasing-flagged", |_| {
        let r = validate_sequence(&s(EpsilonSequence::new(vec![0.1, 0.2, 0.3], vec![4.0; 3]))?);
        holds("no monotonicity violation", r.violations.iter().any(|v| matches!(v, Violation::Increasing { .. })))
    }),
    ("construct", "zero-slopes-flagged", |_| {
        let r = validate_sequence(&s(EpsilonSequence::new(vec![1.0, 0.5, 0.25], vec![0.0; 3]))?);
        holds("zero slopes accepted", !r.passed())
    }),
    ("construct", "collinear-data-is-a-line", |_| {
        let a = HermiteKnot { gap: 0.1, value: 0.2, slope: 2.0 };
        let b = HermiteKnot { gap: 0.3, value: 0.6, slope: 2.0 };
        let pieces = s(interpolate_interval(a, b))?;
        holds(&format!("{} pieces", pieces.len()), pieces.len() == 1)?;
        close("curvature", pieces[0].curvature, 0.0, 1e-12)
    }),
    ("construct", "knot-interpolation", |_| {
        let r = s(build_profile(&EpsilonSequence::power_law(2.0, 32), 32))?;
        for k in &r.knots {
            close(&format!("F(x_{})", k.n), s(r.profile.value(k.x))?, k.value, 1e-14)?;
            close(&format!("F'(x_{})", k.n), s(r.profile.derivative(k.x))?, k.slope, 1e-14)?;
        }
        Ok(())
    }),
    ("construct", "log-cusp-values", |_| {
        close("φ(1)", s(s(CuspProfile::log(1.0))?.value(0.0))?, 1.0, 1e-15)?;
        close("φ(e^-1)", s(s(CuspProfile::log(2.0))?.value(1.0 - (-0.5f64).exp()))?, 0.5 / E, 1e-15)
    }),
];

/// Runs every check, printing one line each, and returns the failures as
/// `module/id` names.
pub fn run(fault: Option<Fault>, out: &mut impl Write) -> std::io::Result<Vec<String>> {
    let ctx = Ctx { fault };
    let mut failed = Vec::new();
    for (module, id, check) in CHECKS {
        match check(&ctx) {
            Ok(()) => writeln!(out, "ok   {module}/{id}")?,
            Err(e) => {
                writeln!(out, "FAIL {module}/{id}: {e}")?;
                failed.push(format!("{module}/{id}"));
            }
        }
    }
    writeln!(out, "selftest: {} of {} checks passed", CHECKS.len() - failed.len(), CHECKS.len())?;
    Ok(failed)
}
