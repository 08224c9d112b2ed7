//! Iterative methods on the positive orthant.
//!
//! | method   | geometry        | update                                   |
//! |----------|-----------------|------------------------------------------|
//! | `Eg`     | Poisson         | `x exp(-tau grad f)`                     |
//! | `IpGRgd` | interior point  | `x exp(-tau x grad f)`                   |
//! | `IpEMd`  | interior point  | `x / (1 + tau x grad f)` (log-barrier MD) |
//! | `PoiCg`  | Poisson         | `exp_map(x, tau v)`, PR-type direction   |
//!
//! All methods share the termination rule in [`check_termination`] and
//! record one [`IterationRecord`] per iterate, starting with the initial point.

use crate::error::{Error, Result};
use crate::geometry::{
    exp_map, metric_inner, metric_norm_sq, riemannian_grad, transport_e, ExpStep, GeometryKind,
    Point, Tangent,
};
use crate::linesearch::{armijo_backtrack, ArmijoParams, StepPolicy};
use crate::objective::Objective;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "EG")]
    Eg,
    #[serde(rename = "IPgRGD")]
    IpGRgd,
    #[serde(rename = "IPeMD")]
    IpEMd,
    #[serde(rename = "PoiCG")]
    PoiCg,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Eg, Method::PoiCg, Method::IpGRgd, Method::IpEMd];

    /// Geometry whose norm measures the gradient for termination.
    pub fn geometry(self) -> GeometryKind {
        match self {
            Method::Eg | Method::PoiCg => GeometryKind::PoissonFisherRao,
            Method::IpGRgd | Method::IpEMd => GeometryKind::InteriorPoint,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Eg => "EG",
            Method::IpGRgd => "IPgRGD",
            Method::IpEMd => "IPeMD",
            Method::PoiCg => "PoiCG",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub step: StepPolicy,
    pub max_iterations: usize,
    pub grad_norm_tol: f64,
    pub step_size_tol: f64,
    pub seed: u64,
    /// Start each backtracking search at twice the previous accepted step
    /// (capped at `tau_bar`) instead of at `tau_bar`.
    pub warm_start: bool,
    /// Fill `IterationRecord::wall_nanos`. Off by default so traces are
    /// reproducible byte for byte.
    pub record_wall_time: bool,
}

impl SolverConfig {
    /// Defaults: Armijo steps, 300 iterations, gradient tolerance `1e-6`,
    /// step tolerance `1e-10`.
    pub fn new(method: Method) -> Self {
        SolverConfig {
            method,
            step: StepPolicy::default(),
            max_iterations: 300,
            grad_norm_tol: 1e-6,
            step_size_tol: 1e-10,
            seed: 0,
            warm_start: false,
            record_wall_time: false,
        }
    }

    pub fn with_step(mut self, step: StepPolicy) -> Self {
        self.step = step;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub f: f64,
    pub riem_grad_norm: f64,
    pub tau: f64,
    pub halvings: u32,
    /// Cumulative operator applications since the run started.
    pub matvec_count: u64,
    pub wall_nanos: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalStatus {
    MaxIter,
    GradTol,
    StepTol,
    /// A mirror step had a non-positive denominator.
    StepInfeasible,
    /// A constant-step geodesic update clamped, underflowed or overflowed.
    NumericalFailure,
}

impl TerminalStatus {
    pub fn is_abort(self) -> bool {
        matches!(
            self,
            TerminalStatus::StepInfeasible | TerminalStatus::NumericalFailure
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub method: Method,
    pub records: Vec<IterationRecord>,
    pub terminal_status: TerminalStatus,
    pub final_point: Point,
    /// Iterations at which the CG direction was reset to steepest descent.
    pub restarts: Vec<usize>,
}

impl RunTrace {
    pub fn last(&self) -> &IterationRecord {
        self.records
            .last()
            .expect("a trace always holds the initial record")
    }

    pub fn iterations(&self) -> usize {
        self.last().k
    }
}

/// EG step `x exp(-tau grad)`, computed as the Poisson e-geodesic step
/// along `-grad_M f`.
pub fn step_eg(x: &Point, euclid_grad: &Tangent, tau: f64) -> Result<ExpStep> {
    let d = riemannian_grad(GeometryKind::PoissonFisherRao, x, euclid_grad).scaled(-1.0);
    exp_map(x, &d, tau)
}

/// Interior-point g-geodesic step `x exp(-tau x grad)`.
pub fn step_ip_g_rgd(x: &Point, euclid_grad: &Tangent, tau: f64) -> Result<ExpStep> {
    let d = riemannian_grad(GeometryKind::InteriorPoint, x, euclid_grad).scaled(-1.0);
    exp_map(x, &d, tau)
}

/// Mirror-descent step for the log barrier `-<log x, 1>`:
/// `1/x+ = 1/x + tau grad`, i.e. `x+ = x / (1 + tau x grad)`.
pub fn step_ip_e_md(x: &Point, euclid_grad: &Tangent, tau: f64) -> Result<Point> {
    assert_eq!(x.dim(), euclid_grad.dim(), "dimension mismatch");
    let mut out = Vec::with_capacity(x.dim());
    for (coord, (&xi, &gi)) in x.as_slice().iter().zip(euclid_grad.as_slice()).enumerate() {
        let denominator = 1.0 + tau * xi * gi;
        if !(denominator > 0.0) {
            return Err(Error::StepInfeasible { coord, denominator });
        }
        out.push(xi / denominator);
    }
    Point::new(out)
}

/// Constant step `1 / (2 ||b||_1)` from the relative Lipschitz constant
/// `L = ||b||_1` of `KL(b, A .)` with respect to the log barrier.
pub fn relative_lipschitz_step(b: &[f64]) -> f64 {
    assert!(b.iter().all(|&v| v > 0.0), "b must be positive");
    1.0 / (2.0 * b.iter().sum::<f64>())
}

/// Geometric Polak-Ribiere ratio
/// `<grad_new, grad_new - transported_dir>_{x_new} / ||grad_old||^2_{x_old}`.
///
/// Panics if `grad_old_norm_sq <= 0`; the solver stops before that.
pub fn pr_beta(
    x_new: &Point,
    grad_new_riem: &Tangent,
    grad_old_norm_sq: f64,
    transported_dir: &Tangent,
) -> f64 {
    assert!(
        grad_old_norm_sq > 0.0,
        "previous gradient norm must be positive"
    );
    let u = grad_new_riem.add_scaled(-1.0, transported_dir);
    metric_inner(GeometryKind::PoissonFisherRao, x_new, grad_new_riem, &u) / grad_old_norm_sq
}

/// First criterion that fires, in priority order GradTol, StepTol, MaxIter.
/// The step criterion is ignored for the initial record.
pub fn check_termination(
    record: &IterationRecord,
    config: &SolverConfig,
) -> Option<TerminalStatus> {
    if record.riem_grad_norm < config.grad_norm_tol {
        Some(TerminalStatus::GradTol)
    } else if record.k > 0 && record.tau < config.step_size_tol {
        Some(TerminalStatus::StepTol)
    } else if record.k >= config.max_iterations {
        Some(TerminalStatus::MaxIter)
    } else {
        None
    }
}

/// i.i.d. uniform(0.5, 1.5) coordinates from a seeded ChaCha8 stream.
pub fn default_initial_point(n: usize, seed: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Point::new_unchecked((0..n).map(|_| rng.random_range(0.5..1.5)).collect())
}

/// Accepted point and value (if any), last trial step, halvings.
type MdSearch = (Option<(Point, f64)>, f64, u32);

/// Backtracking along the mirror curve `x / (1 + tau x grad)`, whose
/// initial slope is `-||grad_IP f||^2_IP`. Infeasible trials are rejected.
fn md_backtrack<O: Objective + ?Sized>(
    obj: &O,
    x: &Point,
    fx: f64,
    g: &Tangent,
    params: &ArmijoParams,
) -> Result<MdSearch> {
    let ip = GeometryKind::InteriorPoint;
    let decrease = metric_norm_sq(ip, x, &riemannian_grad(ip, x, g));
    let mut tau = params.tau_bar;
    let mut halvings = 0;
    while halvings <= params.max_halvings && tau >= params.tau_min {
        if let Ok(trial) = step_ip_e_md(x, g, tau) {
            let ft = match obj.value(&trial) {
                Ok(v) => v,
                Err(Error::Domain(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if ft <= fx - params.sigma * tau * decrease {
                return Ok((Some((trial, ft)), tau, halvings));
            }
        }
        tau *= params.beta;
        halvings += 1;
    }
    Ok((None, tau, halvings))
}

struct Clock {
    start: Instant,
    enabled: bool,
}

impl Clock {
    fn nanos(&self) -> u64 {
        if self.enabled {
            self.start.elapsed().as_nanos() as u64
        } else {
            0
        }
    }
}

/// Runs `config.method` from `x0` until a termination criterion fires.
///
/// Objective failures propagate as errors. An infeasible mirror step or a
/// failed constant-step geodesic update ends the run with an abort status
/// and the trace so far.
pub fn solve<O: Objective + ?Sized>(
    config: &SolverConfig,
    obj: &O,
    x0: &Point,
) -> Result<RunTrace> {
    if let StepPolicy::Armijo(p) = &config.step {
        p.validate()?;
    }
    if x0.dim() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            found: x0.dim(),
        });
    }
    let method = config.method;
    let geom = method.geometry();
    let poi = GeometryKind::PoissonFisherRao;
    let ops_start = obj.operator_applications();
    let clock = Clock {
        start: Instant::now(),
        enabled: config.record_wall_time,
    };

    let mut x = x0.clone();
    let (mut f, mut g) = obj.value_and_grad(&x)?;
    let mut rgrad = riemannian_grad(geom, &x, &g);
    let mut records = vec![IterationRecord {
        k: 0,
        f,
        riem_grad_norm: metric_norm_sq(geom, &x, &rgrad).sqrt(),
        tau: 0.0,
        halvings: 0,
        matvec_count: obj.operator_applications() - ops_start,
        wall_nanos: clock.nanos(),
    }];
    let mut restarts = Vec::new();
    let finish = |records: Vec<IterationRecord>, status, x: Point, restarts| {
        Ok(RunTrace {
            method,
            records,
            terminal_status: status,
            final_point: x,
            restarts,
        })
    };
    if let Some(status) = check_termination(&records[0], config) {
        return finish(records, status, x, restarts);
    }

    // CG search direction, kept in the tangent space at the current x
    let mut cg_dir = rgrad.scaled(-1.0);
    let mut last_tau = match config.step {
        StepPolicy::Armijo(p) => p.tau_bar,
        StepPolicy::Constant(c) => c.tau(),
    };

    for k in 1.. {
        let tau;
        let halvings;
        let x_new;
        let mut failed = false;

        match (method, config.step) {
            (Method::IpEMd, StepPolicy::Constant(c)) => {
                tau = c.tau();
                halvings = 0;
                match step_ip_e_md(&x, &g, tau) {
                    Ok(p) => x_new = p,
                    Err(Error::StepInfeasible { .. }) => {
                        return finish(records, TerminalStatus::StepInfeasible, x, restarts);
                    }
                    Err(e) => return Err(e),
                }
            }
            (Method::IpEMd, StepPolicy::Armijo(p)) => {
                let p = warm(p, config.warm_start, last_tau);
                let (accepted, t, h) = md_backtrack(obj, &x, f, &g, &p)?;
                tau = t;
                halvings = h;
                match accepted {
                    Some((p, _)) => x_new = p,
                    None => {
                        x_new = x.clone();
                        failed = true;
                    }
                }
            }
            (_, step) => {
                let mut dir = match method {
                    Method::PoiCg => cg_dir.clone(),
                    _ => rgrad.scaled(-1.0),
                };
                let mut steepest = method != Method::PoiCg;
                if !steepest && !(metric_inner(geom, &x, &rgrad, &dir) < 0.0) {
                    dir = rgrad.scaled(-1.0);
                    steepest = true;
                    restarts.push(k);
                }
                match step {
                    StepPolicy::Armijo(p) => {
                        let p = warm(p, config.warm_start, last_tau);
                        let mut res = armijo_backtrack(geom, obj, &x, f, &g, &dir, &p)?;
                        if !res.accepted() && !steepest {
                            dir = rgrad.scaled(-1.0);
                            restarts.push(k);
                            res = armijo_backtrack(geom, obj, &x, f, &g, &dir, &p)?;
                        }
                        tau = res.tau;
                        halvings = res.halvings;
                        failed = !res.accepted();
                        x_new = res.new_point;
                    }
                    StepPolicy::Constant(c) => {
                        tau = c.tau();
                        halvings = 0;
                        match exp_map(&x, &dir, tau) {
                            Ok(s) if !s.is_clamped() => x_new = s.point,
                            Ok(_)
                            | Err(Error::ExpUnderflow { .. })
                            | Err(Error::ExpOverflow { .. }) => {
                                return finish(
                                    records,
                                    TerminalStatus::NumericalFailure,
                                    x,
                                    restarts,
                                );
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
                if method == Method::PoiCg && !failed {
                    let (f_new, g_new) = obj.value_and_grad(&x_new)?;
                    let r_new = riemannian_grad(poi, &x_new, &g_new);
                    let old_norm_sq = metric_norm_sq(poi, &x, &rgrad);
                    let moved = transport_e(&x, &x_new, &dir);
                    let beta = pr_beta(&x_new, &r_new, old_norm_sq, &moved).max(0.0);
                    cg_dir = r_new.scaled(-1.0).add_scaled(beta, &moved);
                    x = x_new;
                    f = f_new;
                    g = g_new;
                    rgrad = r_new;
                    last_tau = tau;
                    let rec = record(
                        k, &x, f, geom, &rgrad, tau, halvings, obj, ops_start, &clock,
                    );
                    records.push(rec);
                    if let Some(status) = check_termination(&rec, config) {
                        return finish(records, status, x, restarts);
                    }
                    continue;
                }
            }
        }

        if failed {
            let rec = record(
                k, &x, f, geom, &rgrad, tau, halvings, obj, ops_start, &clock,
            );
            records.push(rec);
            let status = check_termination(&rec, config).unwrap_or(TerminalStatus::StepTol);
            return finish(records, status, x, restarts);
        }

        let (f_new, g_new) = obj.value_and_grad(&x_new)?;
        x = x_new;
        f = f_new;
        g = g_new;
        rgrad = riemannian_grad(geom, &x, &g);
        last_tau = tau;
        let rec = record(
            k, &x, f, geom, &rgrad, tau, halvings, obj, ops_start, &clock,
        );
        records.push(rec);
        if let Some(status) = check_termination(&rec, config) {
            return finish(records, status, x, restarts);
        }
    }
    unreachable!("the iteration counter is unbounded")
}

fn warm(p: ArmijoParams, enabled: bool, last_tau: f64) -> ArmijoParams {
    if enabled {
        let start = (2.0 * last_tau).min(p.tau_bar);
        if start > p.tau_min {
            return p.with_tau_bar(start);
        }
    }
    p
}

#[allow(clippy::too_many_arguments)]
fn record<O: Objective + ?Sized>(
    k: usize,
    x: &Point,
    f: f64,
    geom: GeometryKind,
    rgrad: &Tangent,
    tau: f64,
    halvings: u32,
    obj: &O,
    ops_start: u64,
    clock: &Clock,
) -> IterationRecord {
    IterationRecord {
        k,
        f,
        riem_grad_norm: metric_norm_sq(geom, x, rgrad).sqrt(),
        tau,
        halvings,
        matvec_count: obj.operator_applications() - ops_start,
        wall_nanos: clock.nanos(),
    }
}
