//! Step-size policies along geodesics: Riemannian Armijo backtracking,
//! constant steps, and diagnostics for the exact line search.

use crate::error::{Error, Result};
use crate::geometry::{
    exp_map, metric_inner, metric_norm_sq, riemannian_grad, GeometryKind, Point, Tangent,
};
use crate::objective::Objective;
use serde::{Deserialize, Serialize};

/// Parameters of the backtracking search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoParams {
    /// Sufficient-decrease constant in `(0, 1)`.
    pub sigma: f64,
    /// Contraction factor in `(0, 1)`.
    pub beta: f64,
    /// Initial trial step.
    pub tau_bar: f64,
    /// Backtracking stops once the trial step falls below this.
    pub tau_min: f64,
    pub max_halvings: u32,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        ArmijoParams {
            sigma: 1e-4,
            beta: 0.5,
            tau_bar: 1.0,
            tau_min: 1e-10,
            max_halvings: 60,
        }
    }
}

impl ArmijoParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad("sigma must lie in (0, 1)");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.tau_bar > 0.0 && self.tau_bar.is_finite()) {
            return bad("tau_bar must be positive");
        }
        if !(self.tau_min > 0.0 && self.tau_min < self.tau_bar) {
            return bad("tau_min must lie in (0, tau_bar)");
        }
        if self.max_halvings == 0 {
            return bad("max_halvings must be positive");
        }
        Ok(())
    }

    pub fn with_tau_bar(mut self, tau_bar: f64) -> Self {
        self.tau_bar = tau_bar;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepStatus {
    Accepted,
    /// The trial step dropped below `tau_min` (or the halving budget ran
    /// out) without satisfying the decrease condition.
    HitTauMin,
    /// Every trial step was rejected because the exponential map clamped.
    Clamped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub tau: f64,
    pub halvings: u32,
    /// The accepted point, or the starting point when nothing was accepted.
    pub new_point: Point,
    pub new_value: f64,
    pub status: StepStatus,
}

impl StepResult {
    pub fn accepted(&self) -> bool {
        self.status == StepStatus::Accepted
    }
}

/// Riemannian Armijo backtracking along the geodesic `exp_map(x, direction, tau)`.
///
/// Returns the first `tau = beta^m tau_bar` with
/// `f(exp_map(x, d, tau)) <= f(x) + sigma tau <grad_M f(x), d>_x`.
/// For `d = -grad_M f(x)` the right-hand side is
/// `f(x) - sigma tau ||grad_M f(x)||_x^2`.
///
/// `fx` and `euclid_grad` are the value and Euclidean gradient at `x`.
/// A clamped exponential map or a trial outside the objective's domain
/// counts as a rejected trial.
pub fn armijo_backtrack<O: Objective + ?Sized>(
    geom: GeometryKind,
    obj: &O,
    x: &Point,
    fx: f64,
    euclid_grad: &Tangent,
    direction: &Tangent,
    params: &ArmijoParams,
) -> Result<StepResult> {
    let rgrad = riemannian_grad(geom, x, euclid_grad);
    let slope = metric_inner(geom, x, &rgrad, direction);

    if direction.is_zero() && !rgrad.is_zero() {
        return Err(Error::NotDescent { slope });
    }
    if rgrad.is_zero() {
        return Ok(StepResult {
            tau: params.tau_bar,
            halvings: 0,
            new_point: x.clone(),
            new_value: fx,
            status: StepStatus::Accepted,
        });
    }
    if !(slope < 0.0) {
        return Err(Error::NotDescent { slope });
    }

    let mut tau = params.tau_bar;
    let mut halvings = 0u32;
    let mut all_clamped = true;
    loop {
        if halvings > params.max_halvings || tau < params.tau_min {
            let status = if all_clamped {
                StepStatus::Clamped
            } else {
                StepStatus::HitTauMin
            };
            return Ok(StepResult {
                tau,
                halvings,
                new_point: x.clone(),
                new_value: fx,
                status,
            });
        }
        match exp_map(x, direction, tau) {
            Ok(step) if !step.is_clamped() => {
                all_clamped = false;
                let f_new = match obj.value(&step.point) {
                    Ok(v) => v,
                    Err(Error::Domain(_)) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                if f_new <= fx + params.sigma * tau * slope {
                    return Ok(StepResult {
                        tau,
                        halvings,
                        new_point: step.point,
                        new_value: f_new,
                        status: StepStatus::Accepted,
                    });
                }
            }
            Ok(_) | Err(Error::ExpUnderflow { .. }) | Err(Error::ExpOverflow { .. }) => {}
            Err(e) => return Err(e),
        }
        tau *= params.beta;
        halvings += 1;
    }
}

/// A constant step size. Always positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantStep(f64);

impl ConstantStep {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau.is_finite() {
            Ok(ConstantStep(tau))
        } else {
            Err(Error::InvalidParameter(format!(
                "constant step must be positive, got {tau}"
            )))
        }
    }

    pub fn tau(self) -> f64 {
        self.0
    }
}

/// How a solver picks its step size each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepPolicy {
    Armijo(ArmijoParams),
    Constant(ConstantStep),
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy::Armijo(ArmijoParams::default())
    }
}

/// Constant step policy; rejects `tau <= 0`.
pub fn constant_step(tau: f64) -> Result<StepPolicy> {
    ConstantStep::new(tau).map(StepPolicy::Constant)
}

/// `Delta_x(tau) = -<grad_M f(x), grad_M f(x(tau))>_x` along the EG geodesic
/// `x(tau) = exp_map(x, -grad_M f(x), tau)`. Equals `d/dtau f(x(tau))`.
pub fn exact_residual<O: Objective + ?Sized>(x: &Point, obj: &O, tau: f64) -> Result<f64> {
    let poi = GeometryKind::PoissonFisherRao;
    let (_, g) = obj.value_and_grad(x)?;
    let rgrad = riemannian_grad(poi, x, &g);
    if rgrad.is_zero() {
        return Ok(0.0);
    }
    let xt = exp_map(x, &rgrad.scaled(-1.0), tau)?.point;
    let (_, gt) = obj.value_and_grad(&xt)?;
    let rgrad_t = riemannian_grad(poi, &xt, &gt);
    Ok(-metric_inner(poi, x, &rgrad, &rgrad_t))
}

/// First-order model `-||grad_M f||_x^2 + tau <grad_M f, H(x)>_x` of
/// [`exact_residual`], where `H` is the m-Hessian applied to the gradient.
pub fn exact_residual_model<O: Objective + ?Sized>(x: &Point, obj: &O, tau: f64) -> Result<f64> {
    let poi = GeometryKind::PoissonFisherRao;
    let (_, g) = obj.value_and_grad(x)?;
    let rgrad = riemannian_grad(poi, x, &g);
    let h = crate::geometry::m_hessian_apply(x, &g, |v| obj.hess_vec(x, v))?;
    Ok(-metric_norm_sq(poi, x, &rgrad) + tau * metric_inner(poi, x, &rgrad, &h))
}
