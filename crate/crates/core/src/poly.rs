//! Bivariate polynomials of total degree at most `n`.
//!
//! Basis elements are ordered by total degree and then by the power of `y`:
//! index `(d, j)` holds `b_{d-j}(x)·b_j(y)`.

use crate::error::{Error, Result};

const MODULE: &str = "markov";

/// Dimension of the space of bivariate polynomials of degree ≤ `n`.
pub fn basis_dim(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// `(i, j)` exponent pairs in basis order.
pub fn basis_exponents(n: usize) -> Vec<(usize, usize)> {
    (0..=n).flat_map(|d| (0..=d).map(move |j| (d - j, j))).collect()
}

/// Axis-aligned box used to rescale a tensor-Legendre basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::domain(MODULE, format!("degenerate box [{x0}, {x1}] × [{y0}, {y1}]")));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        Self { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }
    }
}

/// Which one-dimensional family the tensor basis is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Monomial,
    /// `L_i(ξ(x)) L_j(η(y))` with `ξ, η` the affine maps of the box onto `[-1, 1]`.
    TensorLegendre(BoundingBox),
}

/// Values and first derivatives of a one-dimensional family up to degree `n`.
fn family_1d(basis: &Basis, axis: usize, n: usize, t: f64, vals: &mut [f64], ders: &mut [f64]) {
    match basis {
        Basis::Monomial => {
            vals[0] = 1.0;
            ders[0] = 0.0;
            for k in 1..=n {
                vals[k] = vals[k - 1] * t;
                ders[k] = k as f64 * vals[k - 1];
            }
        }
        Basis::TensorLegendre(b) => {
            let (lo, hi) = if axis == 0 { (b.x0, b.x1) } else { (b.y0, b.y1) };
            let scale = 2.0 / (hi - lo);
            let xi = scale * (t - lo) - 1.0;
            vals[0] = 1.0;
            ders[0] = 0.0;
            if n >= 1 {
                vals[1] = xi;
                ders[1] = 1.0;
            }
            for k in 2..=n {
                let kf = k as f64;
                vals[k] = ((2.0 * kf - 1.0) * xi * vals[k - 1] - (kf - 1.0) * vals[k - 2]) / kf;
                ders[k] = ders[k - 2] + (2.0 * kf - 1.0) * vals[k - 1];
            }
            for d in ders.iter_mut().take(n + 1) {
                *d *= scale;
            }
        }
    }
}

/// Scratch space for evaluating a whole basis at one point.
#[derive(Debug, Clone)]
pub struct BasisEvaluator {
    degree: usize,
    basis: Basis,
    exps: Vec<(usize, usize)>,
    xv: Vec<f64>,
    xd: Vec<f64>,
    yv: Vec<f64>,
    yd: Vec<f64>,
}

impl BasisEvaluator {
    pub fn new(degree: usize, basis: Basis) -> Self {
        Self {
            degree,
            basis,
            exps: basis_exponents(degree),
            xv: vec![0.0; degree + 1],
            xd: vec![0.0; degree + 1],
            yv: vec![0.0; degree + 1],
            yd: vec![0.0; degree + 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Fills `vals`, `dx`, `dy` (each of length `dim`) at `(x, y)`.
    pub fn eval(&mut self, x: f64, y: f64, vals: &mut [f64], dx: &mut [f64], dy: &mut [f64]) {
        family_1d(&self.basis, 0, self.degree, x, &mut self.xv, &mut self.xd);
        family_1d(&self.basis, 1, self.degree, y, &mut self.yv, &mut self.yd);
        for (k, &(i, j)) in self.exps.iter().enumerate() {
            vals[k] = self.xv[i] * self.yv[j];
            dx[k] = self.xd[i] * self.yv[j];
            dy[k] = self.xv[i] * self.yd[j];
        }
    }
}

/// A polynomial in `𝒫_n(ℝ²)` expanded in a tensor basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2D {
    degree: usize,
    coeffs: Vec<f64>,
    basis: Basis,
}

impl Poly2D {
    pub fn new(degree: usize, coeffs: Vec<f64>, basis: Basis) -> Result<Self> {
        if coeffs.len() != basis_dim(degree) {
            return Err(Error::domain(
                MODULE,
                format!("degree {degree} needs {} coefficients, got {}", basis_dim(degree), coeffs.len()),
            ));
        }
        Ok(Self { degree, coeffs, basis })
    }

    /// Monomial-basis polynomial from `((i, j), c)` terms `c·x^i y^j`.
    pub fn monomial_from_terms(degree: usize, terms: &[((usize, usize), f64)]) -> Result<Self> {
        let exps = basis_exponents(degree);
        let mut coeffs = vec![0.0; exps.len()];
        for &((i, j), c) in terms {
            let k = exps
                .iter()
                .position(|&e| e == (i, j))
                .ok_or_else(|| Error::domain(MODULE, format!("x^{i} y^{j} exceeds degree {degree}")))?;
            coeffs[k] += c;
        }
        Self::new(degree, coeffs, Basis::Monomial)
    }

    /// `y·q(x)` where `q` has monomial coefficients `q[0] + q[1] x + …`.
    pub fn y_times(q: &[f64]) -> Result<Self> {
        let terms: Vec<((usize, usize), f64)> = q.iter().enumerate().map(|(i, &c)| ((i, 1), c)).collect();
        Self::monomial_from_terms(q.len(), &terms)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// `Some(q)` with monomial coefficients when the polynomial is `y·q(x)`.
    pub fn as_y_times_x_poly(&self) -> Option<Vec<f64>> {
        if self.basis != Basis::Monomial {
            return None;
        }
        let mut q = vec![0.0; self.degree];
        let mut any = false;
        for (&(i, j), &c) in basis_exponents(self.degree).iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            if j != 1 {
                return None;
            }
            q[i] = c;
            any = true;
        }
        any.then_some(q)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_with_grad(x, y).0
    }

    /// `(∂P/∂x, ∂P/∂y)`.
    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let (_, gx, gy) = self.eval_with_grad(x, y);
        (gx, gy)
    }

    fn eval_with_grad(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let mut ev = BasisEvaluator::new(self.degree, self.basis);
        let dim = ev.dim();
        let (mut v, mut dx, mut dy) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
        ev.eval(x, y, &mut v, &mut dx, &mut dy);
        let dot = |a: &[f64]| a.iter().zip(&self.coeffs).map(|(a, c)| a * c).sum::<f64>();
        (dot(&v), dot(&dx), dot(&dy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ordering_and_dimension() {
        assert_eq!(basis_exponents(2), vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for n in 0..12 {
            assert_eq!(basis_exponents(n).len(), basis_dim(n));
        }
        assert!(Poly2D::new(2, vec![0.0; 5], Basis::Monomial).is_err());
    }

    #[test]
    fn monomial_eval_and_grad() {
        let p = Poly2D::monomial_from_terms(3, &[((2, 1), 2.0), ((0, 0), -1.0)]).unwrap();
        assert_relative_eq!(p.eval(0.5, 3.0), 2.0 * 0.25 * 3.0 - 1.0);
        let (gx, gy) = p.grad(0.5, 3.0);
        assert_relative_eq!(gx, 2.0 * 2.0 * 0.5 * 3.0);
        assert_relative_eq!(gy, 2.0 * 0.25);
        assert!(Poly2D::monomial_from_terms(1, &[((1, 1), 1.0)]).is_err());
    }

    #[test]
    fn y_times_detection() {
        let p = Poly2D::y_times(&[1.0, 0.0, 2.0]).unwrap();
        assert_eq!(p.as_y_times_x_poly(), Some(vec![1.0, 0.0, 2.0]));
        let q = Poly2D::monomial_from_terms(2, &[((0, 1), 1.0), ((1, 0), 1.0)]).unwrap();
        assert_eq!(q.as_y_times_x_poly(), None);
    }

    proptest! {
        #[test]
        fn legendre_basis_gradient_matches_finite_difference(
            coeffs in proptest::collection::vec(-1.0f64..1.0, basis_dim(4)),
            x in 0.05f64..0.95, y in 0.05f64..0.45,
        ) {
            let b = BoundingBox::new(0.0, 1.0, 0.0, 0.5).unwrap();
            let p = Poly2D::new(4, coeffs, Basis::TensorLegendre(b)).unwrap();
            let h = 1e-6;
            let (gx, gy) = p.grad(x, y);
            let fx = (p.eval(x + h, y) - p.eval(x - h, y)) / (2.0 * h);
            let fy = (p.eval(x, y + h) - p.eval(x, y - h)) / (2.0 * h);
            prop_assert!((gx - fx).abs() <= 1e-6 * (1.0 + fx.abs()));
            prop_assert!((gy - fy).abs() <= 1e-6 * (1.0 + fy.abs()));
        }
    }

    #[test]
    fn legendre_values_on_box_edges() {
        let b = BoundingBox::new(2.0, 4.0, -1.0, 1.0).unwrap();
        let mut ev = BasisEvaluator::new(3, Basis::TensorLegendre(b));
        let dim = ev.dim();
        let (mut v, mut dx, mut dy) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
        ev.eval(4.0, 1.0, &mut v, &mut dx, &mut dy);
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        // d/dx L_1(x - 3) = 1.
        assert_relative_eq!(dx[1], 1.0);
    }
}
