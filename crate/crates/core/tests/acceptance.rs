//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fail.

use eg_orthant::divergence::h_derivatives;
use eg_orthant::experiment::{
    iterations_to_level, run_experiment, ExperimentResult, ExperimentSpec,
};
use eg_orthant::geometry::{exp_map, metric_norm_sq, riemannian_grad};
use eg_orthant::linesearch::{armijo_backtrack, exact_residual, exact_residual_model, StepStatus};
use eg_orthant::objective::{diagonal_quadratic, FnObjective};
use eg_orthant::problems::tv::huber_tv;
use eg_orthant::problems::{kl_fidelity, kl_fidelity_value};
use eg_orthant::solvers::{default_initial_point, solve, step_eg};
use eg_orthant::trace::write_trace_csv;
use eg_orthant::verification::{
    fd_gradient_check, flow_inequality_slacks, geodesic_ode_oracle, loglog_slope, md_argmin_oracle,
    random_instance, random_smooth_objective, SmoothFamily,
};
use eg_orthant::{GeometryKind, Method, Objective, Point, SolverConfig, Tangent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

const POI: GeometryKind = GeometryKind::PoissonFisherRao;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn positive(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Point {
    Point::new((0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

fn signed(rng: &mut ChaCha8Rng, n: usize, m: f64) -> Tangent {
    Tangent::new((0..n).map(|_| rng.random_range(-m..m)).collect()).unwrap()
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst = [0.0f64; 3];
    let mut fails = 0;
    for seed in 0..20 {
        let (inst, x) = random_instance(8, seed);
        let (a1, b1, a2, b2) = (
            inst.a.clone(),
            inst.b.clone(),
            inst.a.clone(),
            inst.b.clone(),
        );
        let kl = FnObjective::new(
            inst.dim(),
            move |x| kl_fidelity_value(&a1, &b1, &Point::new(x.to_vec()).unwrap()).unwrap(),
            move |x| {
                kl_fidelity(&a2, &b2, &Point::new(x.to_vec()).unwrap())
                    .unwrap()
                    .1
                    .into_inner()
            },
        );
        let (shape, lambda, delta) = (inst.image_shape, inst.lambda, inst.delta);
        let tv = FnObjective::new(
            inst.dim(),
            move |x| huber_tv(x, lambda, delta, shape).unwrap().0,
            move |x| huber_tv(x, lambda, delta, shape).unwrap().1,
        );
        let checks = [
            fd_gradient_check(&kl, &x, None, 1e-6).unwrap(),
            fd_gradient_check(&tv, &x, None, 1e-6).unwrap(),
            fd_gradient_check(&inst, &x, None, 1e-6).unwrap(),
        ];
        for (w, reports) in worst.iter_mut().zip(&checks) {
            for r in reports {
                *w = w.max(r.rel_err);
                fails += usize::from(!r.pass);
            }
        }
    }
    let t = start.elapsed();
    outcome(
        fails == 0 && within(t, 10),
        format!(
            "worst rel err kl {:.1e}, huber_tv {:.1e}, full {:.1e} (tol 1e-6), {fails} failing coords, {t:.2?}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn geodesic_closed_form() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=10);
        let x = positive(&mut rng, n, 0.1, 5.0);
        let r = signed(&mut rng, n, 2.0);
        let v = Tangent::new(
            x.as_slice()
                .iter()
                .zip(r.as_slice())
                .map(|(a, b)| a * b)
                .collect(),
        )
        .unwrap();
        let tau = rng.random_range(0.0..=2.0);
        let closed = exp_map(&x, &v, tau).unwrap().point;
        let ode = geodesic_ode_oracle(&x, &v, tau, 1000);
        for i in 0..n {
            worst = worst.max((closed[i] - ode[i]).abs() / ode[i].abs());
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-8 && within(t, 5),
        format!("worst rel err {worst:.1e} (tol 1e-8), {t:.2?}"),
    )
}

fn eg_md_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=50);
        let x = positive(&mut rng, n, 0.1, 5.0);
        let g = signed(&mut rng, n, 3.0);
        let tau = rng.random_range(0.01..2.0);
        let eg = step_eg(&x, &g, tau).unwrap().point;
        let md = md_argmin_oracle(&x, &g, tau);
        for i in 0..n {
            worst = worst.max((eg[i] - md[i]).abs() / md[i]);
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-8 && within(t, 5),
        format!("worst rel err {worst:.1e} (tol 1e-8), {t:.2?}"),
    )
}

fn armijo_finite_termination() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let families = [
        SmoothFamily::ConvexQuadratic,
        SmoothFamily::KlFidelity,
        SmoothFamily::NonconvexQuartic,
    ];
    let (mut accepted, mut tau_min_hits, mut other, mut max_halvings) = (0, 0, 0, 0u32);
    for i in 0..1000 {
        let n = rng.random_range(1..=50);
        let obj = random_smooth_objective(families[i % 3], n, &mut rng);
        let x = positive(&mut rng, n, 0.1, 3.0);
        let (fx, g) = obj.value_and_grad(&x).unwrap();
        let d = riemannian_grad(POI, &x, &g).scaled(-1.0);
        let params = Default::default();
        match armijo_backtrack(POI, obj.as_ref(), &x, fx, &g, &d, &params) {
            Ok(r) => {
                match r.status {
                    StepStatus::Accepted => accepted += 1,
                    StepStatus::HitTauMin => tau_min_hits += 1,
                    StepStatus::Clamped => other += 1,
                }
                max_halvings = max_halvings.max(r.halvings);
            }
            Err(_) => other += 1,
        }
    }
    let t = start.elapsed();
    outcome(
        accepted == 1000 && tau_min_hits == 0 && max_halvings <= 60 && within(t, 30),
        format!("{accepted}/1000 accepted, {tau_min_hits} HitTauMin, {other} other, max halvings {max_halvings}, {t:.2?}"),
    )
}

fn flow_inequalities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = [f64::INFINITY; 4];
    let mut skipped = 0;
    for i in 0..200 {
        let n = rng.random_range(1..=20);
        let x = positive(&mut rng, n, 0.1, 5.0);
        let g = signed(&mut rng, n, 2.0);
        if g.is_zero() {
            skipped += 1;
            continue;
        }
        let tau_bar = if i % 2 == 0 { 0.1 } else { 1.0 };
        let s = flow_inequality_slacks(&x, &g, tau_bar, 50);
        for (w, v) in worst.iter_mut().zip([
            s.kl_scaling,
            s.pinsker,
            s.mirror_descent,
            s.self_concordance,
        ]) {
            *w = w.min(v);
        }
    }
    let t = start.elapsed();
    let pass = worst.iter().all(|&w| w >= -1e-12) && skipped == 0 && within(t, 30);
    outcome(
        pass,
        format!(
            "min slack kl-scaling {:.1e}, pinsker {:.1e}, md {:.1e}, self-concordance {:.1e} (>= -1e-12), {t:.2?}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn h2_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=20);
        let x = positive(&mut rng, n, 0.1, 5.0);
        let g = signed(&mut rng, n, 2.0);
        let h2 = h_derivatives(&x, &g, 0.0).h2;
        let norm_sq = metric_norm_sq(POI, &x, &riemannian_grad(POI, &x, &g));
        worst = worst.max((h2 - norm_sq).abs() / norm_sq.max(1.0));
    }
    outcome(
        worst <= 1e-12,
        format!("worst rel err {worst:.1e} (tol 1e-12)"),
    )
}

fn exactness_model() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let families = [
        SmoothFamily::ConvexQuadratic,
        SmoothFamily::KlFidelity,
        SmoothFamily::NonconvexQuartic,
    ];
    let taus = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut min_slope = f64::INFINITY;
    for i in 0..20 {
        let n = rng.random_range(2..=8);
        let obj = random_smooth_objective(families[i % 3], n, &mut rng);
        let x = positive(&mut rng, n, 0.5, 2.0);
        let errs: Vec<f64> = taus
            .iter()
            .map(|&tau| {
                (exact_residual(&x, obj.as_ref(), tau).unwrap()
                    - exact_residual_model(&x, obj.as_ref(), tau).unwrap())
                .abs()
            })
            .collect();
        min_slope = min_slope.min(loglog_slope(&taus, &errs));
    }
    outcome(
        min_slope >= 1.9,
        format!("min log-log slope {min_slope:.3} over 20 instances (>= 1.9)"),
    )
}

fn monotone(values: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.collect();
    v.windows(2).all(|w| w[1] <= w[0])
}

fn per_iteration_matvecs(res: &ExperimentResult, method: Method) -> f64 {
    let t = res.traces.iter().find(|t| t.method == method).unwrap();
    let last = t.last();
    (last.matvec_count - t.records[0].matvec_count) as f64 / last.k.max(1) as f64
}

fn desk_reproduction(res: &ExperimentResult, elapsed: Duration) -> Outcome {
    let trace = |m: Method| res.traces.iter().find(|t| t.method == m).unwrap();
    let rel = res.relative_values();
    let level = |m: Method| {
        let idx = res.traces.iter().position(|t| t.method == m).unwrap();
        iterations_to_level(&rel[idx], 1e-3)
    };
    let a = monotone(trace(Method::Eg).records.iter().map(|r| r.f));
    let (cg, eg) = (level(Method::PoiCg), level(Method::Eg));
    let b = matches!((cg, eg), (Some(c), Some(e)) if c < e) || matches!((cg, eg), (Some(_), None));
    let c = monotone(trace(Method::IpEMd).records.iter().map(|r| r.f));
    let (md_mv, eg_mv) = (
        per_iteration_matvecs(res, Method::IpEMd),
        per_iteration_matvecs(res, Method::Eg),
    );
    let d = md_mv <= eg_mv;
    outcome(
        a && b && c && d && within(elapsed, 300),
        format!(
            "(a) EG monotone {a}; (b) iterations to 1e-3 PoiCG {cg:?} vs EG {eg:?}; (c) IPeMD monotone {c}; \
             (d) matvecs/iter IPeMD {md_mv:.2} vs EG {eg_mv:.2}; {elapsed:.2?}"
        ),
    )
}

fn trace_bytes(res: &ExperimentResult) -> Vec<Vec<u8>> {
    res.traces
        .iter()
        .map(|t| {
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, t).unwrap();
            buf
        })
        .collect()
}

fn determinism(first: &ExperimentResult) -> Outcome {
    let second = run_experiment(&ExperimentSpec::default()).unwrap();
    let same = trace_bytes(first) == trace_bytes(&second);
    outcome(
        same,
        format!("trace CSVs of two seeded runs identical: {same}"),
    )
}

fn convex_convergence() -> Outcome {
    let a = [2.0, 3.0];
    let f = diagonal_quadratic(a.to_vec(), vec![1.0; 2]);
    let mut worst = 0.0f64;
    let mut max_k = 0;
    for seed in 0..20u64 {
        let x0 = default_initial_point(2, seed);
        let tr = solve(&SolverConfig::new(Method::Eg), &f, &x0).unwrap();
        let err = tr
            .final_point
            .as_slice()
            .iter()
            .zip(&a)
            .map(|(x, a)| (x - a).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        max_k = max_k.max(tr.last().k);
    }
    outcome(
        worst <= 1e-4,
        format!("f = ||x - [2, 3]||^2 / 2, 20 seeded starts: worst ||x - a||_inf {worst:.1e} (tol 1e-4), at most {max_k} iterations"),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "gradient correctness", gradient_correctness()),
        (2, "geodesic closed form", geodesic_closed_form()),
        (3, "EG-MD identity", eg_md_identity()),
        (4, "Armijo finite termination", armijo_finite_termination()),
        (5, "inequalities along the EG flow", flow_inequalities()),
        (6, "h''(0) identity", h2_identity()),
        (7, "exactness model", exactness_model()),
    ];
    let start = Instant::now();
    let desk = run_experiment(&ExperimentSpec::default()).unwrap();
    let elapsed = start.elapsed();
    results.push((
        8,
        "desk-scale reproduction",
        desk_reproduction(&desk, elapsed),
    ));
    results.push((9, "determinism", determinism(&desk)));
    results.push((10, "convex convergence", convex_convergence()));

    let mut failed = 0;
    for (id, name, o) in &results {
        println!(
            "{} criterion {id:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
