//! Negative entropy, its Legendre dual, KL and Bregman divergences, and the
//! scalar function `h(tau) = <1, x(tau)>` along the EG flow
//! `x(tau) = x * exp(-tau * grad)`.

use crate::geometry::{dot, exp_map, riemannian_grad, GeometryKind, Point, Tangent, EXP_ARG_LIMIT};

/// `psi(x) = <x, log x> - <1, x>`.
pub fn neg_entropy(x: &Point) -> f64 {
    x.as_slice().iter().map(|&v| v * v.ln() - v).sum()
}

/// `psi*(y) = <1, exp(y)>`. Exponents are clamped to `±EXP_ARG_LIMIT`.
pub fn log_partition(x_star: &Tangent) -> f64 {
    x_star
        .as_slice()
        .iter()
        .map(|&v| v.clamp(-EXP_ARG_LIMIT, EXP_ARG_LIMIT).exp())
        .sum()
}

/// Gradient of [`log_partition`], which maps dual coordinates back to points.
pub fn log_partition_grad(x_star: &Tangent) -> Tangent {
    Tangent::new_unchecked(
        x_star
            .as_slice()
            .iter()
            .map(|&v| v.clamp(-EXP_ARG_LIMIT, EXP_ARG_LIMIT).exp())
            .collect(),
    )
}

/// Dual coordinates `log x`.
pub fn dual_coords(x: &Point) -> Tangent {
    Tangent::new_unchecked(x.as_slice().iter().map(|v| v.ln()).collect())
}

/// `KL(x, y) = <x, log(x/y)> - <1, x - y>` with `0 log 0 = 0`.
///
/// Panics if `x` has a negative entry or the dimensions differ.
pub fn kl(x: &[f64], y: &Point) -> f64 {
    assert_eq!(x.len(), y.dim(), "dimension mismatch");
    x.iter()
        .zip(y.as_slice())
        .map(|(&xi, &yi)| {
            assert!(xi >= 0.0, "kl: first argument must be nonnegative");
            let entropy = if xi == 0.0 { 0.0 } else { xi * (xi / yi).ln() };
            entropy - xi + yi
        })
        .sum()
}

/// A convex function on the positive orthant generating a Bregman divergence.
pub trait BregmanGenerator {
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Tangent;
}

/// The negative entropy [`neg_entropy`]; its divergence is KL.
#[derive(Debug, Clone, Copy, Default)]
pub struct NegEntropy;

impl BregmanGenerator for NegEntropy {
    fn value(&self, x: &Point) -> f64 {
        neg_entropy(x)
    }
    fn gradient(&self, x: &Point) -> Tangent {
        dual_coords(x)
    }
}

/// `0.5 * ||x||^2`, whose divergence is half the squared distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfSquaredNorm;

impl BregmanGenerator for HalfSquaredNorm {
    fn value(&self, x: &Point) -> f64 {
        0.5 * dot(x.as_slice(), x.as_slice())
    }
    fn gradient(&self, x: &Point) -> Tangent {
        Tangent::new_unchecked(x.as_slice().to_vec())
    }
}

/// `D_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>`.
pub fn bregman<G: BregmanGenerator + ?Sized>(phi: &G, x: &Point, y: &Point) -> f64 {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    let gy = phi.gradient(y);
    let lin: f64 = gy
        .as_slice()
        .iter()
        .zip(x.as_slice().iter().zip(y.as_slice()))
        .map(|(g, (a, b))| g * (a - b))
        .sum();
    phi.value(x) - phi.value(y) - lin
}

/// `t e^t - (e^t - 1)`, evaluated without cancellation near zero.
///
/// This is the per-unit-mass KL between `x e^t` and `x`, and also the
/// bracket in the KL scaling constant.
pub(crate) fn flow_kernel(t: f64) -> f64 {
    if t.abs() < 0.1 {
        // sum_{k>=2} (k-1) t^k / k!
        let mut term = t; // t^k / k! for k = 1
        let mut sum = 0.0;
        for k in 2..30 {
            term *= t / k as f64;
            let contrib = (k - 1) as f64 * term;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        t * t.exp() - t.exp_m1()
    }
}

/// `KL(x(tau), x)` along the EG flow, accurate for small `tau`.
pub fn kl_along_flow(x: &Point, euclid_grad: &Tangent, tau: f64) -> f64 {
    assert_eq!(x.dim(), euclid_grad.dim(), "dimension mismatch");
    x.as_slice()
        .iter()
        .zip(euclid_grad.as_slice())
        .map(|(&xi, &gi)| xi * flow_kernel(-tau * gi))
        .sum()
}

/// `x(tau) = x * exp(-tau * grad)` as a plain vector (no clamp bookkeeping).
pub fn eg_flow(x: &Point, euclid_grad: &Tangent, tau: f64) -> Vec<f64> {
    x.as_slice()
        .iter()
        .zip(euclid_grad.as_slice())
        .map(|(&xi, &gi)| xi * (-tau * gi).clamp(-EXP_ARG_LIMIT, EXP_ARG_LIMIT).exp())
        .collect()
}

/// `h(tau)` and its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HDerivatives {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

/// Derivatives of `h(tau) = <1, x(tau)>`:
/// `h' = -<g, x(tau)>`, `h'' = <g^2, x(tau)>`, `h''' = -<g^3, x(tau)>`.
pub fn h_derivatives(x: &Point, euclid_grad: &Tangent, tau: f64) -> HDerivatives {
    assert_eq!(x.dim(), euclid_grad.dim(), "dimension mismatch");
    let xt = eg_flow(x, euclid_grad, tau);
    let mut d = HDerivatives {
        h0: 0.0,
        h1: 0.0,
        h2: 0.0,
        h3: 0.0,
    };
    for (&xi, &g) in xt.iter().zip(euclid_grad.as_slice()) {
        d.h0 += xi;
        d.h1 -= g * xi;
        d.h2 += g * g * xi;
        d.h3 -= g * g * g * xi;
    }
    d
}

/// Self-concordant-like constant `mu = ||grad||_inf`.
pub fn scl_mu(euclid_grad: &Tangent) -> f64 {
    euclid_grad.sup_norm()
}

/// `kappa = (mu^2 / 2) / (exp(mu tau_bar) (mu tau_bar - 1) + 1)`.
///
/// Panics unless `mu > 0` and `tau_bar > 0`.
pub fn kappa(mu: f64, tau_bar: f64) -> f64 {
    assert!(mu > 0.0, "kappa requires mu > 0");
    assert!(tau_bar > 0.0, "kappa requires tau_bar > 0");
    0.5 * mu * mu / flow_kernel(mu * tau_bar)
}

/// Returns `(KL(x(tau), x), D_h(0, tau))`. The two agree in exact arithmetic.
///
/// `D_h(0, tau) = h(0) - h(tau) + tau h'(tau)`.
pub fn kl_duality_check(x: &Point, euclid_grad: &Tangent, tau: f64) -> (f64, f64) {
    let rgrad = riemannian_grad(GeometryKind::PoissonFisherRao, x, euclid_grad);
    let xt = match exp_map(x, &rgrad.scaled(-1.0), tau) {
        Ok(step) => step.point.into_inner(),
        Err(_) => eg_flow(x, euclid_grad, tau),
    };
    let lhs = kl(&xt, x);
    let at0 = h_derivatives(x, euclid_grad, 0.0);
    let at_tau = h_derivatives(x, euclid_grad, tau);
    let rhs = at0.h0 - at_tau.h0 + tau * at_tau.h1;
    (lhs, rhs)
}
