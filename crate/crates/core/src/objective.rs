//! Objective functions on the positive orthant.

use crate::error::{Error, Result};
use crate::geometry::{Point, Tangent};

/// A smooth function on the positive orthant.
///
/// Implementations must be pure: identical inputs give bit-identical
/// outputs, which the solvers rely on for reproducible traces.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, x: &Point) -> Result<f64>;

    /// Value and Euclidean gradient.
    fn value_and_grad(&self, x: &Point) -> Result<(f64, Tangent)>;

    /// Euclidean Hessian-vector product, when available.
    fn hess_vec(&self, _x: &Point, _v: &Tangent) -> Result<Tangent> {
        Err(Error::NoHessian)
    }

    /// Cumulative count of linear-operator applications (forward plus
    /// adjoint). Objectives without an operator report zero.
    fn operator_applications(&self) -> u64 {
        0
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        (**self).value(x)
    }
    fn value_and_grad(&self, x: &Point) -> Result<(f64, Tangent)> {
        (**self).value_and_grad(x)
    }
    fn hess_vec(&self, x: &Point, v: &Tangent) -> Result<Tangent> {
        (**self).hess_vec(x, v)
    }
    fn operator_applications(&self) -> u64 {
        (**self).operator_applications()
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VecFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type HessFn = Box<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Objective assembled from closures over plain slices.
pub struct FnObjective {
    dim: usize,
    value: ValueFn,
    grad: VecFn,
    hess: Option<HessFn>,
}

impl FnObjective {
    pub fn new<F, G>(dim: usize, value: F, grad: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        FnObjective {
            dim,
            value: Box::new(value),
            grad: Box::new(grad),
            hess: None,
        }
    }

    pub fn with_hessian<H>(mut self, hess: H) -> Self
    where
        H: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.hess = Some(Box::new(hess));
        self
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let v = (self.value)(x.as_slice());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite objective value {v}")))
        }
    }

    fn value_and_grad(&self, x: &Point) -> Result<(f64, Tangent)> {
        let v = self.value(x)?;
        let g = Tangent::new((self.grad)(x.as_slice()))?;
        Ok((v, g))
    }

    fn hess_vec(&self, x: &Point, v: &Tangent) -> Result<Tangent> {
        match &self.hess {
            Some(h) => Tangent::new(h(x.as_slice(), v.as_slice())),
            None => Err(Error::NoHessian),
        }
    }
}

/// `f(x) = 0.5 * sum_i d_i (x_i - a_i)^2`, a separable convex quadratic.
pub fn diagonal_quadratic(a: Vec<f64>, d: Vec<f64>) -> FnObjective {
    assert_eq!(a.len(), d.len());
    let n = a.len();
    let (a1, d1) = (a.clone(), d.clone());
    let (a2, d2) = (a, d.clone());
    FnObjective::new(
        n,
        move |x| {
            x.iter()
                .zip(a1.iter().zip(&d1))
                .map(|(xi, (ai, di))| 0.5 * di * (xi - ai).powi(2))
                .sum()
        },
        move |x| {
            x.iter()
                .zip(a2.iter().zip(&d2))
                .map(|(xi, (ai, di))| di * (xi - ai))
                .collect()
        },
    )
    .with_hessian(move |_, v| v.iter().zip(&d).map(|(vi, di)| di * vi).collect())
}
