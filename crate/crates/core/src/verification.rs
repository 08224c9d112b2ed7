//! Independent reference computations used by the test suite and the
//! `verify` command. None of these reuse the code paths they check.

use crate::divergence::{h_derivatives, kappa, kl_along_flow, kl_duality_check, scl_mu};
use crate::error::Result;
use crate::geometry::{
    dot, exp_map, metric_norm_sq, riemannian_grad, GeometryKind, Point, Tangent,
};
use crate::linesearch::{armijo_backtrack, exact_residual, ArmijoParams};
use crate::objective::{FnObjective, Objective};
use crate::problems::tv::{discrete_gradient, discrete_gradient_adjoint, huber_tv, ImageShape};
use crate::problems::{build_projector, kl_fidelity, ProblemInstance, SparseOperator};
use crate::solvers::step_eg;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Outcome of comparing a computed quantity with its reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub reference: f64,
    pub computed: f64,
    pub abs_err: f64,
    /// `abs_err / scale`, with the scale stated by the check.
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    /// Relative comparison against `max(|reference|, f64::MIN_POSITIVE)`.
    pub fn relative(
        name: impl Into<String>,
        reference: f64,
        computed: f64,
        tolerance: f64,
    ) -> Self {
        Self::scaled(name, reference, computed, tolerance, reference.abs())
    }

    /// Passes when `|computed - reference| <= tolerance * scale`.
    pub fn scaled(
        name: impl Into<String>,
        reference: f64,
        computed: f64,
        tolerance: f64,
        scale: f64,
    ) -> Self {
        let abs_err = (computed - reference).abs();
        let rel_err = abs_err / scale.max(f64::MIN_POSITIVE);
        OracleReport {
            name: name.into(),
            reference,
            computed,
            abs_err,
            rel_err,
            tolerance,
            pass: rel_err <= tolerance,
        }
    }

    /// A one-sided check `computed >= -tolerance` on a slack.
    pub fn slack(name: impl Into<String>, computed: f64, tolerance: f64) -> Self {
        let violation = (-computed).max(0.0);
        OracleReport {
            name: name.into(),
            reference: 0.0,
            computed,
            abs_err: violation,
            rel_err: violation,
            tolerance,
            pass: computed >= -tolerance,
        }
    }
}

/// Central-difference gradient check, one report per coordinate.
///
/// The step is `h` if given, otherwise `1e-6 max(1, |x_i|)`. A step that
/// would leave the orthant is shrunk to `1e-4 x_i`. Errors are relative to
/// `max(||grad||_inf, 1e-8)`.
pub fn fd_gradient_check<O: Objective + ?Sized>(
    obj: &O,
    x: &Point,
    h: Option<f64>,
    tolerance: f64,
) -> Result<Vec<OracleReport>> {
    let (_, g) = obj.value_and_grad(x)?;
    let scale = g.sup_norm().max(1e-8);
    let mut reports = Vec::with_capacity(x.dim());
    for i in 0..x.dim() {
        let mut hi = h.unwrap_or(1e-6 * x[i].abs().max(1.0));
        if x[i] - hi <= 0.0 {
            hi = 1e-4 * x[i];
        }
        let mut up = x.as_slice().to_vec();
        let mut dn = x.as_slice().to_vec();
        up[i] += hi;
        dn[i] -= hi;
        let fd = (obj.value(&Point::new(up)?)? - obj.value(&Point::new(dn)?)?) / (2.0 * hi);
        reports.push(OracleReport::scaled(
            format!("grad[{i}]"),
            fd,
            g[i],
            tolerance,
            scale,
        ));
    }
    Ok(reports)
}

/// RK4 integration of the geodesic equations `g'' = g'^2 / g` (one per
/// coordinate) from `x` with velocity `v` over `[0, tau]`.
pub fn geodesic_ode_oracle(x: &Point, v: &Tangent, tau: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 100, "use at least 100 RK4 steps");
    let h = tau / steps as f64;
    let rhs = |p: f64, q: f64| (q, q * q / p);
    x.as_slice()
        .iter()
        .zip(v.as_slice())
        .map(|(&p0, &q0)| {
            let (mut p, mut q) = (p0, q0);
            for _ in 0..steps {
                let (k1p, k1q) = rhs(p, q);
                let (k2p, k2q) = rhs(p + 0.5 * h * k1p, q + 0.5 * h * k1q);
                let (k3p, k3q) = rhs(p + 0.5 * h * k2p, q + 0.5 * h * k2q);
                let (k4p, k4q) = rhs(p + h * k3p, q + h * k3q);
                p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            }
            p
        })
        .collect()
}

/// Minimizer of `tau <g, z - x> + KL(z, x)` found coordinate by coordinate,
/// by bisection on the derivative `tau g_i + log(z_i / x_i)`.
pub fn md_argmin_oracle(x: &Point, euclid_grad: &Tangent, tau: f64) -> Vec<f64> {
    x.as_slice()
        .iter()
        .zip(euclid_grad.as_slice())
        .map(|(&xi, &gi)| {
            let deriv = |z: f64| tau * gi + (z / xi).ln();
            let (mut lo, mut hi) = (0.5 * xi, 2.0 * xi);
            for _ in 0..2000 {
                if deriv(lo) <= 0.0 {
                    break;
                }
                lo *= 0.5;
            }
            for _ in 0..2000 {
                if deriv(hi) >= 0.0 {
                    break;
                }
                hi *= 2.0;
            }
            for _ in 0..400 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if deriv(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineSearchFlag {
    /// Minimizer found inside `(0, tau_max)`.
    Interior,
    /// `f(x(tau))` kept decreasing up to `tau_max`.
    Boundary,
    /// Zero gradient: every step stays at `x`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLineSearch {
    pub tau: f64,
    pub value: f64,
    pub flag: LineSearchFlag,
}

/// Minimizes `tau -> f(x(tau))` along the EG geodesic over `[0, tau_max]`
/// by a dense grid followed by golden-section refinement.
pub fn exact_linesearch_oracle<O: Objective + ?Sized>(
    x: &Point,
    obj: &O,
    tau_max: f64,
    grid: usize,
) -> Result<ExactLineSearch> {
    assert!(grid >= 1000, "use a grid of at least 1000 points");
    let (f0, g) = obj.value_and_grad(x)?;
    if g.is_zero() {
        return Ok(ExactLineSearch {
            tau: 0.0,
            value: f0,
            flag: LineSearchFlag::Degenerate,
        });
    }
    let along = |tau: f64| -> f64 {
        let pt: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(g.as_slice())
            .map(|(xi, gi)| xi * (-tau * gi).exp())
            .collect();
        match Point::new(pt) {
            Ok(p) => obj.value(&p).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };
    let step = tau_max / grid as f64;
    let (mut best_i, mut best_f) = (0usize, f0);
    for i in 1..=grid {
        let fi = along(i as f64 * step);
        if fi < best_f {
            best_i = i;
            best_f = fi;
        }
    }
    if best_i == grid {
        return Ok(ExactLineSearch {
            tau: tau_max,
            value: best_f,
            flag: LineSearchFlag::Boundary,
        });
    }
    let (mut a, mut b) = (
        (best_i.max(1) - 1) as f64 * step,
        (best_i + 1) as f64 * step,
    );
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (along(c), along(d));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * b.max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = along(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = along(d);
        }
    }
    let tau = 0.5 * (a + b);
    Ok(ExactLineSearch {
        tau,
        value: along(tau),
        flag: LineSearchFlag::Interior,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Smallest slack of each inequality over a `tau` grid. Non-negative slack
/// means the inequality held everywhere on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSlacks {
    /// `KL(x(tau), x) / tau^2 - kappa KL(x(tau_bar), x)`.
    pub kl_scaling: f64,
    /// `sqrt(2c) sqrt(KL(x(tau), x)) - ||x(tau) - x||_1`.
    pub pinsker: f64,
    /// `-KL(x(tau), x) / tau - <g, x(tau) - x>`.
    pub mirror_descent: f64,
    /// `mu h''(tau) - |h'''(tau)|`.
    pub self_concordance: f64,
}

/// Evaluates the inequalities on `tau_bar * j / grid_points`, `j = 1..=grid_points`.
///
/// The Pinsker constant `c` is the largest `||x(tau)||_1` over the grid and
/// `tau = 0`.
pub fn flow_inequality_slacks(
    x: &Point,
    g: &Tangent,
    tau_bar: f64,
    grid_points: usize,
) -> FlowSlacks {
    let mu = scl_mu(g);
    let grid: Vec<f64> = (1..=grid_points)
        .map(|j| tau_bar * j as f64 / grid_points as f64)
        .collect();
    let k = if mu > 0.0 { kappa(mu, tau_bar) } else { 0.0 };
    let kl_bar = kl_along_flow(x, g, tau_bar);

    // x(tau) - x = x expm1(-tau g), exact near tau = 0
    let displacement = |tau: f64| -> Vec<f64> {
        x.as_slice()
            .iter()
            .zip(g.as_slice())
            .map(|(xi, gi)| xi * (-tau * gi).exp_m1())
            .collect()
    };
    let c = grid
        .iter()
        .map(|&t| x.l1_norm() + displacement(t).iter().sum::<f64>())
        .fold(x.l1_norm(), f64::max);

    let mut s = FlowSlacks {
        kl_scaling: f64::INFINITY,
        pinsker: f64::INFINITY,
        mirror_descent: f64::INFINITY,
        self_concordance: f64::INFINITY,
    };
    for &tau in &grid {
        let kl_t = kl_along_flow(x, g, tau);
        let disp = displacement(tau);
        s.kl_scaling = s.kl_scaling.min(kl_t / (tau * tau) - k * kl_bar);
        let l1: f64 = disp.iter().map(|d| d.abs()).sum();
        s.pinsker = s.pinsker.min((2.0 * c).sqrt() * kl_t.sqrt() - l1);
        s.mirror_descent = s.mirror_descent.min(-kl_t / tau - dot(g.as_slice(), &disp));
        let h = h_derivatives(x, g, tau);
        s.self_concordance = s.self_concordance.min(mu * h.h2 - h.h3.abs());
    }
    s
}

/// Dense random nonnegative matrix with no zero row, as a sparse operator.
pub fn random_operator(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    density: f64,
) -> SparseOperator {
    let mut triplets = Vec::new();
    for r in 0..rows {
        let anchor = rng.random_range(0..cols);
        for c in 0..cols {
            if c == anchor || rng.random_bool(density) {
                triplets.push((r, c, rng.random_range(0.1..1.0)));
            }
        }
    }
    SparseOperator::from_triplets(rows, cols, triplets).expect("rows are never empty")
}

/// Random tomography-shaped instance on a `n_side x n_side` image with a
/// random nonnegative operator, plus a random positive point.
pub fn random_instance(n_side: usize, seed: u64) -> (ProblemInstance, Point) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_side * n_side;
    let m = n / 2;
    let a = random_operator(&mut rng, m, n, 0.2);
    let b: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..5.0)).collect();
    let lambda = rng.random_range(0.01..1.0);
    let delta = rng.random_range(0.02..0.5);
    let x = Point::new((0..n).map(|_| rng.random_range(0.5..1.5)).collect()).expect("positive");
    let inst =
        ProblemInstance::new(a, b, lambda, delta, ImageShape::square(n_side)).expect("valid");
    (inst, x)
}

/// Families of smooth test objectives on the orthant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothFamily {
    /// `0.5 (x - a)^T Q (x - a)` with dense SPD `Q`.
    ConvexQuadratic,
    /// `KL(b, Ax)` with a random nonnegative `A`.
    KlFidelity,
    /// `sum (x_i^2 - c_i)^2 / 4 + sum w_i (x_i - x_{i+1})^2 / 2 - <e, x>`, nonconvex.
    NonconvexQuartic,
}

/// A random member of `family` in dimension `n`. All members provide
/// analytic Hessian-vector products.
pub fn random_smooth_objective(
    family: SmoothFamily,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Box<dyn Objective> {
    match family {
        SmoothFamily::ConvexQuadratic => {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
            let m: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let mut q = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    q[i][j] = (0..n).map(|k| m[k][i] * m[k][j]).sum::<f64>() / n as f64;
                }
                q[i][i] += 0.1;
            }
            let matvec = |q: &[Vec<f64>], v: &[f64]| -> Vec<f64> {
                q.iter().map(|row| dot(row, v)).collect()
            };
            let (q1, q2, q3) = (q.clone(), q.clone(), q);
            let (a1, a2) = (a.clone(), a);
            Box::new(
                FnObjective::new(
                    n,
                    move |x| {
                        let d: Vec<f64> = x.iter().zip(&a1).map(|(xi, ai)| xi - ai).collect();
                        0.5 * dot(&d, &matvec(&q1, &d))
                    },
                    move |x| {
                        let d: Vec<f64> = x.iter().zip(&a2).map(|(xi, ai)| xi - ai).collect();
                        matvec(&q2, &d)
                    },
                )
                .with_hessian(move |_, v| matvec(&q3, v)),
            )
        }
        SmoothFamily::KlFidelity => {
            let m = (n + 1).max(2);
            let a = random_operator(rng, m, n, 0.4);
            let b: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..5.0)).collect();
            let inst = ProblemInstance::new(
                a,
                b,
                0.0,
                1.0,
                ImageShape {
                    height: 1,
                    width: n,
                },
            )
            .expect("valid instance");
            Box::new(inst)
        }
        SmoothFamily::NonconvexQuartic => {
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let e: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
            let (c1, w1, e1) = (c.clone(), w.clone(), e.clone());
            let (c2, w2, e2) = (c.clone(), w.clone(), e);
            let (c3, w3) = (c, w);
            Box::new(
                FnObjective::new(
                    n,
                    move |x| {
                        let mut f = 0.0;
                        for i in 0..x.len() {
                            f += 0.25 * (x[i] * x[i] - c1[i]).powi(2) - e1[i] * x[i];
                            if i + 1 < x.len() {
                                f += 0.5 * w1[i] * (x[i] - x[i + 1]).powi(2);
                            }
                        }
                        f
                    },
                    move |x| {
                        let mut g: Vec<f64> = (0..x.len())
                            .map(|i| x[i] * (x[i] * x[i] - c2[i]) - e2[i])
                            .collect();
                        for i in 0..x.len().saturating_sub(1) {
                            let d = w2[i] * (x[i] - x[i + 1]);
                            g[i] += d;
                            g[i + 1] -= d;
                        }
                        g
                    },
                )
                .with_hessian(move |x, v| {
                    let mut out: Vec<f64> = (0..x.len())
                        .map(|i| (3.0 * x[i] * x[i] - c3[i]) * v[i])
                        .collect();
                    for i in 0..x.len().saturating_sub(1) {
                        let d = w3[i] * (v[i] - v[i + 1]);
                        out[i] += d;
                        out[i + 1] -= d;
                    }
                    out
                }),
            )
        }
    }
}

/// Deliberate defects for exercising the battery's failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Negates the analytic gradient of the objective under the first check.
    FlipGradientSign,
}

struct SignFlipped<'a>(&'a ProblemInstance);

impl Objective for SignFlipped<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        self.0.value(x)
    }
    fn value_and_grad(&self, x: &Point) -> Result<(f64, Tangent)> {
        let (v, g) = self.0.value_and_grad(x)?;
        Ok((v, g.scaled(-1.0)))
    }
}

struct KlOnly<'a>(&'a ProblemInstance);

impl Objective for KlOnly<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        crate::problems::kl_fidelity_value(&self.0.a, &self.0.b, x)
    }
    fn value_and_grad(&self, x: &Point) -> Result<(f64, Tangent)> {
        kl_fidelity(&self.0.a, &self.0.b, x)
    }
}

struct TvOnly<'a>(&'a ProblemInstance);

impl Objective for TvOnly<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        Ok(huber_tv(
            x.as_slice(),
            self.0.lambda,
            self.0.delta,
            self.0.image_shape,
        )?
        .0)
    }
    fn value_and_grad(&self, x: &Point) -> Result<(f64, Tangent)> {
        let (v, g) = huber_tv(
            x.as_slice(),
            self.0.lambda,
            self.0.delta,
            self.0.image_shape,
        )?;
        Ok((v, Tangent::new(g)?))
    }
}

/// Worst coordinate of a per-coordinate report list, renamed.
fn worst(name: String, reports: Vec<OracleReport>) -> OracleReport {
    let mut w = reports
        .into_iter()
        .max_by(|a, b| {
            (a.rel_err, !a.pass)
                .partial_cmp(&(b.rel_err, !b.pass))
                .unwrap()
        })
        .expect("at least one coordinate");
    w.name = format!("{name} {}", w.name);
    w
}

/// Number of reports produced by [`run_battery`].
pub const BATTERY_SIZE: usize = 3 * 5 + 10 + 10 + 5 + 4 * 10 + 10 + 5 + 2 + 5;

/// Runs the oracle battery with fixed seeds, one report per check.
pub fn run_battery(fault: Fault) -> Result<Vec<OracleReport>> {
    let mut out = Vec::with_capacity(BATTERY_SIZE);
    let poi = GeometryKind::PoissonFisherRao;

    // analytic gradients against central differences
    for seed in 0..5u64 {
        let (inst, x) = random_instance(8, 1000 + seed);
        let full = if seed == 0 && fault == Fault::FlipGradientSign {
            fd_gradient_check(&SignFlipped(&inst), &x, None, 1e-6)?
        } else {
            fd_gradient_check(&inst, &x, None, 1e-6)?
        };
        out.push(worst(format!("fd full_objective #{seed}"), full));
        out.push(worst(
            format!("fd kl_fidelity #{seed}"),
            fd_gradient_check(&KlOnly(&inst), &x, None, 1e-6)?,
        ));
        out.push(worst(
            format!("fd huber_tv #{seed}"),
            fd_gradient_check(&TvOnly(&inst), &x, None, 1e-6)?,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let random_pair = |rng: &mut ChaCha8Rng, n: usize, gmax: f64| {
        let x = Point::new((0..n).map(|_| rng.random_range(0.1..5.0)).collect()).expect("positive");
        let g =
            Tangent::new((0..n).map(|_| rng.random_range(-gmax..gmax)).collect()).expect("finite");
        (x, g)
    };

    // closed-form geodesic against RK4
    for i in 0..10 {
        let n = rng.random_range(1..=10);
        let (x, r) = random_pair(&mut rng, n, 2.0);
        let v = Tangent::new(
            x.as_slice()
                .iter()
                .zip(r.as_slice())
                .map(|(a, b)| a * b)
                .collect(),
        )?;
        let tau = rng.random_range(0.0..2.0);
        let closed = exp_map(&x, &v, tau)?.point;
        let ode = geodesic_ode_oracle(&x, &v, tau, 1000);
        let reports = (0..n)
            .map(|j| OracleReport::relative(format!("coord {j}"), ode[j], closed[j], 1e-8))
            .collect();
        out.push(worst(format!("exp_map vs rk4 #{i}"), reports));
    }

    // EG step against the mirror-descent argmin
    for i in 0..10 {
        let n = rng.random_range(1..=50);
        let (x, g) = random_pair(&mut rng, n, 3.0);
        let tau = rng.random_range(0.01..2.0);
        let eg = step_eg(&x, &g, tau)?.point;
        let md = md_argmin_oracle(&x, &g, tau);
        let reports = (0..n)
            .map(|j| OracleReport::relative(format!("coord {j}"), md[j], eg[j], 1e-8))
            .collect();
        out.push(worst(format!("step_eg vs md argmin #{i}"), reports));
    }

    // Armijo decrease never beats the exact line search
    for i in 0..5 {
        let n = rng.random_range(2..=10);
        let obj = random_smooth_objective(SmoothFamily::ConvexQuadratic, n, &mut rng);
        let x = Point::new((0..n).map(|_| rng.random_range(0.2..3.0)).collect())?;
        let (fx, g) = obj.value_and_grad(&x)?;
        let d = riemannian_grad(poi, &x, &g).scaled(-1.0);
        let step = armijo_backtrack(poi, obj.as_ref(), &x, fx, &g, &d, &ArmijoParams::default())?;
        let exact = exact_linesearch_oracle(&x, obj.as_ref(), 2.0, 2000)?;
        out.push(OracleReport::slack(
            format!("armijo >= exact line search #{i}"),
            step.new_value - exact.value,
            1e-12,
        ));
    }

    // inequalities along the EG flow on 50-point grids
    for i in 0..10 {
        let n = rng.random_range(1..=20);
        let (x, g) = random_pair(&mut rng, n, 2.0);
        let tau_bar = if i % 2 == 0 { 0.1 } else { 1.0 };
        let s = flow_inequality_slacks(&x, &g, tau_bar, 50);
        out.push(OracleReport::slack(
            format!("kl scaling #{i}"),
            s.kl_scaling,
            1e-12,
        ));
        out.push(OracleReport::slack(
            format!("pinsker #{i}"),
            s.pinsker,
            1e-12,
        ));
        out.push(OracleReport::slack(
            format!("md inequality #{i}"),
            s.mirror_descent,
            1e-12,
        ));
        out.push(OracleReport::slack(
            format!("self-concordance #{i}"),
            s.self_concordance,
            1e-12,
        ));
    }

    // h''(0) is the squared Poisson gradient norm
    for i in 0..10 {
        let n = rng.random_range(1..=20);
        let (x, g) = random_pair(&mut rng, n, 2.0);
        let h2 = h_derivatives(&x, &g, 0.0).h2;
        let norm_sq = metric_norm_sq(poi, &x, &riemannian_grad(poi, &x, &g));
        out.push(OracleReport::scaled(
            format!("h''(0) identity #{i}"),
            norm_sq,
            h2,
            1e-12,
            norm_sq.max(1.0),
        ));
    }

    // KL against its h-representation
    for i in 0..5 {
        let n = rng.random_range(1..=10);
        let (x, g) = random_pair(&mut rng, n, 1.0);
        let tau = rng.random_range(0.1..1.0);
        let (kl, dh) = kl_duality_check(&x, &g, tau);
        out.push(OracleReport::relative(
            format!("kl duality #{i}"),
            kl,
            dh,
            1e-10,
        ));
    }

    // adjoints
    let a = build_projector(16, 5)?;
    let xv: Vec<f64> = (0..a.cols()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let yv: Vec<f64> = (0..a.rows()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let lhs = dot(&a.apply(&xv), &yv);
    let rhs = dot(&xv, &a.apply_adjoint(&yv));
    out.push(OracleReport::relative("projector adjoint", lhs, rhs, 1e-12));
    let shape = ImageShape::square(16);
    let yv: Vec<f64> = (0..2 * shape.len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let lhs = dot(&discrete_gradient(shape, &xv)?, &yv);
    let rhs = dot(&xv, &discrete_gradient_adjoint(shape, &yv)?);
    out.push(OracleReport::relative(
        "discrete gradient adjoint",
        lhs,
        rhs,
        1e-12,
    ));

    // exact residual is the derivative of f along the geodesic
    for i in 0..5 {
        let n = rng.random_range(2..=10);
        let obj = random_smooth_objective(SmoothFamily::NonconvexQuartic, n, &mut rng);
        let x = Point::new((0..n).map(|_| rng.random_range(0.5..2.0)).collect())?;
        let (_, g) = obj.value_and_grad(&x)?;
        let tau = 0.05;
        let along = |s: f64| -> Result<f64> {
            let d = riemannian_grad(poi, &x, &g).scaled(-1.0);
            obj.value(&exp_map(&x, &d, s)?.point)
        };
        let h = 1e-5;
        let fd = (along(tau + h)? - along(tau - h)?) / (2.0 * h);
        let r = exact_residual(&x, obj.as_ref(), tau)?;
        out.push(OracleReport::relative(
            format!("exact residual vs fd #{i}"),
            fd,
            r,
            1e-6,
        ));
    }

    debug_assert_eq!(out.len(), BATTERY_SIZE);
    Ok(out)
}
