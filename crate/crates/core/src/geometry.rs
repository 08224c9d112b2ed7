//! Riemannian structures on the positive orthant.
//!
//! Two metrics are supported on `M = R^n_{++}`:
//!
//! - the Poisson Fisher-Rao metric `G(x) = diag(1/x)`, and
//! - the interior-point (log-barrier Hessian) metric `G(x) = diag(1/x^2)`.
//!
//! Both share the same geodesics `x * exp(tau * v / x)`, so a single
//! [`exp_map`] serves either geometry. Tangent spaces are identified with
//! `R^n`, and tangents are moved between base points with the
//! e-transport `v -> (x'/x) v`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest magnitude of the exponent fed to `exp` inside [`exp_map`].
pub const EXP_ARG_LIMIT: f64 = 700.0;

/// A point of the positive orthant. Every coordinate is finite and > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        for (index, &value) in coords.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value <= 0.0 {
                return Err(Error::NonPositive { index, value });
            }
        }
        Ok(Point(coords))
    }

    /// Skips validation in release builds. Callers must guarantee positivity.
    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(
            coords.iter().all(|c| c.is_finite() && *c > 0.0),
            "point left the positive orthant"
        );
        Point(coords)
    }

    pub fn ones(n: usize) -> Self {
        Point(vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A tangent vector, identified with an element of `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent(Vec<f64>);

impl Tangent {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Tangent(coords))
    }

    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        Tangent(coords)
    }

    pub fn zeros(n: usize) -> Self {
        Tangent(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Tangent {
        Tangent(self.0.iter().map(|c| s * c).collect())
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: f64, other: &Tangent) -> Tangent {
        assert_eq!(self.dim(), other.dim(), "tangent dimension mismatch");
        Tangent(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl std::ops::Index<usize> for Tangent {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Which metric the orthant carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryKind {
    /// `G(x) = diag(1/x)`.
    PoissonFisherRao,
    /// `G(x) = diag(1/x^2)`.
    InteriorPoint,
}

impl GeometryKind {
    /// Diagonal entry of the metric tensor at coordinate value `xi`.
    #[inline]
    fn weight(self, xi: f64) -> f64 {
        match self {
            GeometryKind::PoissonFisherRao => 1.0 / xi,
            GeometryKind::InteriorPoint => 1.0 / (xi * xi),
        }
    }

    /// Inverse metric entry, used to raise the Euclidean gradient.
    #[inline]
    fn inverse_weight(self, xi: f64) -> f64 {
        match self {
            GeometryKind::PoissonFisherRao => xi,
            GeometryKind::InteriorPoint => xi * xi,
        }
    }
}

fn check_dims(x: &Point, n: usize) {
    assert_eq!(
        x.dim(),
        n,
        "dimension mismatch between base point and tangent"
    );
}

/// `<u, G(x) v>`.
///
/// Panics if `x`, `u` and `v` do not share a dimension.
pub fn metric_inner(kind: GeometryKind, x: &Point, u: &Tangent, v: &Tangent) -> f64 {
    check_dims(x, u.dim());
    check_dims(x, v.dim());
    x.0.iter()
        .zip(u.0.iter().zip(&v.0))
        .map(|(&xi, (&ui, &vi))| ui * kind.weight(xi) * vi)
        .sum()
}

/// Squared metric norm `<v, G(x) v>`.
pub fn metric_norm_sq(kind: GeometryKind, x: &Point, v: &Tangent) -> f64 {
    metric_inner(kind, x, v, v)
}

/// Riemannian gradient `G(x)^{-1} grad`: `x * grad` for Poisson, `x^2 * grad`
/// for the interior-point metric.
pub fn riemannian_grad(kind: GeometryKind, x: &Point, euclid_grad: &Tangent) -> Tangent {
    check_dims(x, euclid_grad.dim());
    Tangent(
        x.0.iter()
            .zip(&euclid_grad.0)
            .map(|(&xi, &gi)| kind.inverse_weight(xi) * gi)
            .collect(),
    )
}

/// Result of a geodesic step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpStep {
    pub point: Point,
    /// Coordinates whose exponent hit [`EXP_ARG_LIMIT`]. When non-empty the
    /// point is not on the true geodesic.
    pub clamped: Vec<usize>,
}

impl ExpStep {
    pub fn is_clamped(&self) -> bool {
        !self.clamped.is_empty()
    }
}

/// Geodesic step `x * exp(tau * v / x)`, shared by both geometries.
///
/// Exponents are clamped to `±EXP_ARG_LIMIT` and reported in
/// [`ExpStep::clamped`]. A coordinate that still underflows to zero or
/// overflows to infinity is an error.
pub fn exp_map(x: &Point, v: &Tangent, tau: f64) -> Result<ExpStep> {
    check_dims(x, v.dim());
    let mut clamped = Vec::new();
    let mut coords = Vec::with_capacity(x.dim());
    for (i, (&xi, &vi)) in x.0.iter().zip(&v.0).enumerate() {
        let mut arg = tau * vi / xi;
        if arg > EXP_ARG_LIMIT {
            arg = EXP_ARG_LIMIT;
            clamped.push(i);
        } else if arg < -EXP_ARG_LIMIT {
            arg = -EXP_ARG_LIMIT;
            clamped.push(i);
        }
        let yi = xi * arg.exp();
        if yi == 0.0 {
            return Err(Error::ExpUnderflow { coord: i });
        }
        if !yi.is_finite() {
            return Err(Error::ExpOverflow { coord: i });
        }
        coords.push(yi);
    }
    Ok(ExpStep {
        point: Point::new_unchecked(coords),
        clamped,
    })
}

/// e-parallel transport `v -> (x'/x) v` from `T_x M` to `T_{x'} M`.
pub fn transport_e(x: &Point, x_prime: &Point, v: &Tangent) -> Tangent {
    check_dims(x, x_prime.dim());
    check_dims(x, v.dim());
    Tangent(
        x.0.iter()
            .zip(&x_prime.0)
            .zip(&v.0)
            .map(|((&a, &b), &vi)| (b / a) * vi)
            .collect(),
    )
}

/// m-Hessian applied to the Poisson Riemannian gradient:
/// `x * grad^2 + x * Hess f [x * grad]`.
///
/// `hess_vec` must return the Euclidean Hessian-vector product of `f` at `x`.
pub fn m_hessian_apply<F>(x: &Point, euclid_grad: &Tangent, hess_vec: F) -> Result<Tangent>
where
    F: FnOnce(&Tangent) -> Result<Tangent>,
{
    check_dims(x, euclid_grad.dim());
    let rgrad = riemannian_grad(GeometryKind::PoissonFisherRao, x, euclid_grad);
    let hv = hess_vec(&rgrad)?;
    check_dims(x, hv.dim());
    Ok(Tangent(
        x.0.iter()
            .zip(&euclid_grad.0)
            .zip(&hv.0)
            .map(|((&xi, &gi), &hi)| xi * gi * gi + xi * hi)
            .collect(),
    ))
}
