use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::gram::{assemble_gram, basis_matrices, domain_box, gram_nodes};
use super::Direction;
use crate::domain::GraphDomain;
use crate::error::{Error, Result};
use crate::poly::Basis;
use crate::quad::{domain_cloud, GradedMesh, MAX_RULE_SIZE};

const MODULE: &str = "markov";

/// Settings for the general-`p` ratio ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub mesh: GradedMesh,
    /// Relative cutoff used when whitening the coefficient space.
    pub threshold: f64,
    /// Gradient evaluations per restart.
    pub max_iterations: usize,
    /// Stop once an accepted step improves the ratio by less than this.
    pub relative_gain: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { mesh: GradedMesh::default(), threshold: 1e-12, max_iterations: 64, relative_gain: 1e-10 }
    }
}

struct Objective {
    w: Vec<f64>,
    phi: DMatrix<f64>,
    dphi: DMatrix<f64>,
    p: f64,
}

impl Objective {
    /// `ln ∑ w|∂P|^p - ln ∑ w|P|^p` and its gradient.
    fn eval(&self, z: &DVector<f64>, want_grad: bool) -> (f64, Option<DVector<f64>>) {
        let v = &self.phi * z;
        let d = &self.dphi * z;
        let p = self.p;
        let num: f64 = self.w.iter().zip(d.iter()).map(|(w, x)| w * x.abs().powf(p)).sum();
        let den: f64 = self.w.iter().zip(v.iter()).map(|(w, x)| w * x.abs().powf(p)).sum();
        let value = num.ln() - den.ln();
        if !want_grad {
            return (value, None);
        }
        let kernel = |x: f64, w: f64| w * x.abs().powf(p - 1.0) * x.signum();
        let gd = DVector::from_iterator(d.len(), d.iter().zip(&self.w).map(|(&x, &w)| kernel(x, w)));
        let gv = DVector::from_iterator(v.len(), v.iter().zip(&self.w).map(|(&x, &w)| kernel(x, w)));
        let grad = self.dphi.tr_mul(&gd) * (p / num) - self.phi.tr_mul(&gv) * (p / den);
        (value, Some(grad))
    }
}

fn climb(obj: &Objective, mut z: DVector<f64>, options: &AscentOptions) -> f64 {
    z.normalize_mut();
    let (mut value, _) = obj.eval(&z, false);
    let mut step = 0.5;
    for _ in 0..options.max_iterations {
        let (_, grad) = obj.eval(&z, true);
        let grad = grad.expect("gradient requested");
        let norm = grad.norm();
        if !(norm > 0.0) || !value.is_finite() {
            break;
        }
        let dir = grad / norm;
        let mut accepted = None;
        while step > 1e-14 {
            let candidate = (&z + &dir * step).normalize();
            let (cv, _) = obj.eval(&candidate, false);
            if cv > value {
                accepted = Some((candidate, cv));
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, cv)) = accepted else { break };
        let gain = ((cv - value) / obj.p).exp_m1();
        z = candidate;
        value = cv;
        if gain < options.relative_gain {
            break;
        }
    }
    (value / obj.p).exp()
}

/// Best ratio `‖∂P/∂x_j‖_p / ‖P‖_p` found by normalised gradient ascent from
/// `restarts` seeded starting points. Only a lower bound on the supremum.
///
/// Coefficients live in the `L²`-whitened basis, so the ascent at `p = 2` is a
/// shifted power iteration for the pencil of [`super::best_markov_p2`].
/// Restart `i` draws its start from a ChaCha8 stream `i` seeded by `seed`.
pub fn lower_bound_markov_p(
    domain: &GraphDomain,
    n: usize,
    p: f64,
    direction: Direction,
    restarts: usize,
    seed: u64,
    options: &AscentOptions,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(MODULE, format!("p = {p} must be ≥ 1")));
    }
    if restarts == 0 {
        return Err(Error::domain(MODULE, "at least one restart is required"));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let basis = Basis::TensorLegendre(domain_box(domain));
    let gram = assemble_gram(domain, n, basis, &options.mesh, options.threshold)?;
    let (outer_default, inner2) = gram_nodes(n);
    let outer = options.mesh.nodes_per_panel().unwrap_or(outer_default);
    let inner = (((p * n as f64) / 2.0).ceil() as usize + 4).max(inner2).min(MAX_RULE_SIZE);
    let clouds = domain_cloud(domain, &options.mesh, outer, inner)?;

    let mut rows = Vec::new();
    let (mut w, mut phi_rows, mut dx_rows, mut dy_rows) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for cloud in clouds.iter().filter(|c| !c.ws.is_empty()) {
        let (b, bx, by) = basis_matrices(cloud, n, basis);
        phi_rows.push(b * &gram.whitening);
        dx_rows.push(bx * &gram.whitening);
        dy_rows.push(by * &gram.whitening);
        w.extend_from_slice(&cloud.ws);
        rows.push(cloud.ws.len());
    }
    let stack = |parts: &[DMatrix<f64>]| {
        let total: usize = rows.iter().sum();
        let mut out = DMatrix::zeros(total, gram.retained_dim);
        let mut at = 0;
        for m in parts {
            out.rows_mut(at, m.nrows()).copy_from(m);
            at += m.nrows();
        }
        out
    };
    let phi = stack(&phi_rows);
    let dims = gram.retained_dim;
    let objectives: Vec<Objective> = match direction {
        Direction::X => vec![Objective { w: w.clone(), phi: phi.clone(), dphi: stack(&dx_rows), p }],
        Direction::Y => vec![Objective { w: w.clone(), phi: phi.clone(), dphi: stack(&dy_rows), p }],
        Direction::Max => vec![
            Objective { w: w.clone(), phi: phi.clone(), dphi: stack(&dx_rows), p },
            Objective { w: w.clone(), phi: phi.clone(), dphi: stack(&dy_rows), p },
        ],
    };
    let best: Vec<f64> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let start = DVector::from_iterator(dims, (0..dims).map(|_| StandardNormal.sample(&mut rng)));
            objectives.iter().map(|obj| climb(obj, start.clone(), options)).fold(0.0, f64::max)
        })
        .collect();
    Ok(best.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::CuspProfile;
    use crate::jacobi::JacobiParams;
    use crate::markov::{best_markov_p2, extremal_ratio, EigenOptions};

    fn square() -> GraphDomain {
        GraphDomain::upper(CuspProfile::constant(1.0).unwrap()).unwrap()
    }

    #[test]
    fn agrees_with_eigen_factor_at_p2() {
        let opts = AscentOptions::default();
        for n in 1..=6 {
            let exact = best_markov_p2(&square(), n, Direction::X, &EigenOptions::default()).unwrap();
            let climbed = lower_bound_markov_p(&square(), n, 2.0, Direction::X, 8, 7, &opts).unwrap();
            assert!(climbed >= 0.999 * exact, "n={n}: {climbed} vs {exact}");
            assert!(climbed <= exact * (1.0 + 1e-9), "n={n}: {climbed} vs {exact}");
        }
    }

    #[test]
    fn dominates_the_extremal_candidate() {
        let d = GraphDomain::upper(CuspProfile::power(2.0).unwrap()).unwrap();
        let params = JacobiParams::new(7.5, 0.0).unwrap();
        for p in [2.0, 3.0] {
            let candidate = extremal_ratio(&d, &params, 5, p, &GradedMesh::default()).unwrap();
            let climbed = lower_bound_markov_p(&d, 6, p, Direction::Y, 4, 11, &AscentOptions::default()).unwrap();
            assert!(climbed >= candidate, "p={p}: {climbed} < {candidate}");
        }
    }

    #[test]
    fn more_restarts_never_hurt_and_seed_is_reproducible() {
        let d = GraphDomain::upper(CuspProfile::power(2.0).unwrap()).unwrap();
        let opts = AscentOptions { max_iterations: 6, ..AscentOptions::default() };
        let two = lower_bound_markov_p(&d, 4, 3.0, Direction::Max, 2, 5, &opts).unwrap();
        let eight = lower_bound_markov_p(&d, 4, 3.0, Direction::Max, 8, 5, &opts).unwrap();
        assert!(eight >= two);
        let again = lower_bound_markov_p(&d, 4, 3.0, Direction::Max, 8, 5, &opts).unwrap();
        assert_eq!(eight.to_bits(), again.to_bits());
    }
}
