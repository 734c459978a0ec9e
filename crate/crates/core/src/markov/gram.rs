use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::Direction;
use crate::domain::GraphDomain;
use crate::error::{Error, Result};
use crate::poly::{Basis, BasisEvaluator, BoundingBox};
use crate::quad::{domain_cloud, GradedMesh, PanelCloud, MAX_RULE_SIZE};

const MODULE: &str = "markov";

/// Largest degree accepted by [`best_markov_p2`] without an explicit override.
pub const P2_DEGREE_GUARDRAIL: usize = 14;

/// Mass and stiffness matrices of a polynomial basis on a domain, with the
/// whitening map onto the retained eigenspace of the mass matrix.
#[derive(Debug, Clone)]
pub struct GramPair {
    pub g: DMatrix<f64>,
    pub a_x: DMatrix<f64>,
    pub a_y: DMatrix<f64>,
    /// `V_r Λ_r^{-1/2}`: columns span the retained directions and are
    /// `G`-orthonormal.
    pub whitening: DMatrix<f64>,
    pub retained_dim: usize,
    pub full_dim: usize,
    /// Eigenvalues of `G`, ascending.
    pub mass_spectrum: Vec<f64>,
}

impl GramPair {
    /// `sqrt(λ_max)` of the pencil `(A_j, G)` on the retained subspace.
    pub fn factor(&self, direction: Direction) -> f64 {
        let top = |a: &DMatrix<f64>| {
            if self.retained_dim == 0 {
                return 0.0;
            }
            let m = self.whitening.transpose() * a * &self.whitening;
            let m = 0.5 * (&m + m.transpose());
            SymmetricEigen::new(m).eigenvalues.iter().copied().fold(0.0f64, f64::max).sqrt()
        };
        match direction {
            Direction::X => top(&self.a_x),
            Direction::Y => top(&self.a_y),
            Direction::Max => top(&self.a_x).max(top(&self.a_y)),
        }
    }
}

/// Bounding box `[x0, 1] × [y_lo, y_hi]` of the domain.
pub fn domain_box(domain: &GraphDomain) -> BoundingBox {
    let (y0, y1) = domain.y_range();
    BoundingBox { x0: domain.profile().start(), x1: 1.0, y0, y1 }
}

pub(crate) fn gram_nodes(n: usize) -> (usize, usize) {
    ((3 * n + 8).clamp(16, MAX_RULE_SIZE), (n + 2).min(MAX_RULE_SIZE))
}

/// Basis values and derivatives on a panel cloud, one row per point.
pub(crate) fn basis_matrices(cloud: &PanelCloud, n: usize, basis: Basis) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let mut ev = BasisEvaluator::new(n, basis);
    let dim = ev.dim();
    let rows = cloud.xs.len();
    let (mut b, mut bx, mut by) = (DMatrix::zeros(rows, dim), DMatrix::zeros(rows, dim), DMatrix::zeros(rows, dim));
    let (mut v, mut dx, mut dy) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    for r in 0..rows {
        ev.eval(cloud.xs[r], cloud.ys[r], &mut v, &mut dx, &mut dy);
        for c in 0..dim {
            b[(r, c)] = v[c];
            bx[(r, c)] = dx[c];
            by[(r, c)] = dy[c];
        }
    }
    (b, bx, by)
}

fn pairwise_matrix_sum(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    match mats.len() {
        1 => mats[0].clone(),
        len => {
            let mid = len / 2;
            pairwise_matrix_sum(&mats[..mid]) + pairwise_matrix_sum(&mats[mid..])
        }
    }
}

/// Assembles `G`, `A_x`, `A_y` by quadrature and whitens `G`.
///
/// Eigen-directions of `G` below `threshold·λ_max(G)` are dropped.
pub fn assemble_gram(domain: &GraphDomain, n: usize, basis: Basis, mesh: &GradedMesh, threshold: f64) -> Result<GramPair> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::domain(MODULE, format!("threshold {threshold} must lie in (0, 1)")));
    }
    let (outer_default, inner) = gram_nodes(n);
    let outer = mesh.nodes_per_panel().unwrap_or(outer_default);
    let clouds = domain_cloud(domain, mesh, outer, inner)?;
    let parts: Vec<[DMatrix<f64>; 3]> = clouds
        .par_iter()
        .filter(|c| !c.ws.is_empty())
        .map(|cloud| {
            let (mut b, mut bx, mut by) = basis_matrices(cloud, n, basis);
            for (r, w) in cloud.ws.iter().enumerate() {
                let sw = w.sqrt();
                b.row_mut(r).scale_mut(sw);
                bx.row_mut(r).scale_mut(sw);
                by.row_mut(r).scale_mut(sw);
            }
            [b.tr_mul(&b), bx.tr_mul(&bx), by.tr_mul(&by)]
        })
        .collect();
    if parts.is_empty() {
        return Err(Error::domain(MODULE, "domain has no quadrature points"));
    }
    let sym = |k: usize| {
        let m = pairwise_matrix_sum(&parts.iter().map(|p| p[k].clone()).collect::<Vec<_>>());
        0.5 * (&m + m.transpose())
    };
    let (g, a_x, a_y) = (sym(0), sym(1), sym(2));
    let full_dim = g.nrows();
    let eig = SymmetricEigen::new(g.clone());
    let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lambda_max > 0.0) {
        return Err(Error::numerical(MODULE, "mass matrix has no positive eigenvalue"));
    }
    if lambda_min < -1e-10 * lambda_max {
        return Err(Error::numerical(
            MODULE,
            format!("mass matrix indefinite: λ_min = {lambda_min:e}, λ_max = {lambda_max:e}"),
        ));
    }
    let keep: Vec<usize> = (0..full_dim).filter(|&i| eig.eigenvalues[i] >= threshold * lambda_max).collect();
    let mut whitening = DMatrix::zeros(full_dim, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt().recip();
        whitening.set_column(c, &(eig.eigenvectors.column(i) * s));
    }
    let mut mass_spectrum: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    mass_spectrum.sort_by(f64::total_cmp);
    Ok(GramPair { g, a_x, a_y, whitening, retained_dim: keep.len(), full_dim, mass_spectrum })
}

/// Settings for the exact `p = 2` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub mesh: GradedMesh,
    /// Relative eigenvalue cutoff for the mass matrix.
    pub threshold: f64,
    /// `None` selects a tensor-Legendre basis on the domain's bounding box.
    pub basis: Option<Basis>,
    /// Permits degrees above [`P2_DEGREE_GUARDRAIL`].
    pub allow_large_degree: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { mesh: GradedMesh::default(), threshold: 1e-12, basis: None, allow_large_degree: false }
    }
}

/// The optimal constant in `‖∂P/∂x_j‖_2 ≤ M ‖P‖_2` over `𝒫_n`.
pub fn best_markov_p2(domain: &GraphDomain, n: usize, direction: Direction, options: &EigenOptions) -> Result<f64> {
    if n > P2_DEGREE_GUARDRAIL && !options.allow_large_degree {
        return Err(Error::precondition(
            MODULE,
            format!("degree {n} exceeds the p = 2 guardrail n ≤ {P2_DEGREE_GUARDRAIL}; set the override to proceed"),
        ));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let basis = options.basis.unwrap_or_else(|| Basis::TensorLegendre(domain_box(domain)));
    let gram = assemble_gram(domain, n, basis, &options.mesh, options.threshold)?;
    let f = gram.factor(direction);
    if !f.is_finite() {
        return Err(Error::numerical(MODULE, "pencil eigenvalue is not finite"));
    }
    Ok(f)
}
