//! Side-by-side runs of several methods on one tomography instance.

use crate::error::Result;
use crate::geometry::Point;
use crate::linesearch::{constant_step, ArmijoParams, StepPolicy};
use crate::objective::Objective;
use crate::problems::{build_tomography, ProblemInstance, TomographySpec};
use crate::solvers::{
    default_initial_point, relative_lipschitz_step, solve, Method, RunTrace, SolverConfig,
};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: TomographySpec,
    pub methods: Vec<Method>,
    pub armijo: ArmijoParams,
    pub max_iterations: usize,
    pub grad_norm_tol: f64,
    pub step_size_tol: f64,
    pub warm_start: bool,
    pub record_wall_time: bool,
    /// Constant step for IPeMD. `None` means `1 / (2 ||b||_1)`.
    pub ip_md_step: Option<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let base = SolverConfig::new(Method::Eg);
        ExperimentSpec {
            problem: TomographySpec::default(),
            methods: Method::ALL.to_vec(),
            armijo: ArmijoParams::default(),
            max_iterations: base.max_iterations,
            grad_norm_tol: base.grad_norm_tol,
            step_size_tol: base.step_size_tol,
            warm_start: false,
            record_wall_time: false,
            ip_md_step: None,
        }
    }
}

impl ExperimentSpec {
    /// Solver settings used for `method` on an instance with data `b`.
    pub fn solver_config(&self, method: Method, b: &[f64]) -> Result<SolverConfig> {
        let step = match method {
            Method::IpEMd => constant_step(
                self.ip_md_step
                    .unwrap_or_else(|| relative_lipschitz_step(b)),
            )?,
            _ => StepPolicy::Armijo(self.armijo),
        };
        let mut cfg = SolverConfig::new(method)
            .with_step(step)
            .with_max_iterations(self.max_iterations);
        cfg.grad_norm_tol = self.grad_norm_tol;
        cfg.step_size_tol = self.step_size_tol;
        cfg.seed = self.problem.seed;
        cfg.warm_start = self.warm_start;
        cfg.record_wall_time = self.record_wall_time;
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub instance: ProblemInstance,
    pub x_true: Vec<f64>,
    pub x0: Point,
    pub traces: Vec<RunTrace>,
}

impl ExperimentResult {
    /// Smallest objective value seen in any run.
    pub fn f_best(&self) -> f64 {
        self.traces
            .iter()
            .flat_map(|t| t.records.iter().map(|r| r.f))
            .fold(f64::INFINITY, f64::min)
    }

    /// `(f_k - f_best) / (f_0 - f_best)` per run. All runs share `f_0`.
    pub fn relative_values(&self) -> Vec<Vec<f64>> {
        let best = self.f_best();
        self.traces
            .iter()
            .map(|t| relative_values(t, best))
            .collect()
    }

    /// CSV with column `k` and one column per method; runs that stopped early
    /// leave their cells empty. The first line is a `#` comment stating the
    /// normalization.
    pub fn write_relative_values_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# relative value = (f_k - f_best) / (f_0 - f_best), f_best = {:e} (minimum over all runs)",
            self.f_best()
        )?;
        let rel = self.relative_values();
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["k".to_string()];
        header.extend(self.traces.iter().map(|t| t.method.name().to_string()));
        wr.write_record(&header)?;
        let rows = rel.iter().map(Vec::len).max().unwrap_or(0);
        for k in 0..rows {
            let mut row = vec![k.to_string()];
            row.extend(
                rel.iter()
                    .map(|r| r.get(k).map(|v| format!("{v:e}")).unwrap_or_default()),
            );
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Relative values of one trace against `f_best`; zero when `f_0 = f_best`.
pub fn relative_values(trace: &RunTrace, f_best: f64) -> Vec<f64> {
    let f0 = trace.records[0].f;
    let span = f0 - f_best;
    trace
        .records
        .iter()
        .map(|r| {
            if span > 0.0 {
                (r.f - f_best) / span
            } else {
                0.0
            }
        })
        .collect()
}

/// First iteration whose relative value is at most `level`.
pub fn iterations_to_level(relative: &[f64], level: f64) -> Option<usize> {
    relative.iter().position(|&v| v <= level)
}

/// Builds the instance and runs every method from the same seeded start.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let (instance, x_true) = build_tomography(&spec.problem)?;
    let x0 = default_initial_point(instance.dim(), spec.problem.seed);
    let mut traces = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        instance.a.reset_counts();
        let cfg = spec.solver_config(method, &instance.b)?;
        traces.push(solve(&cfg, &instance, &x0)?);
    }
    Ok(ExperimentResult {
        instance,
        x_true,
        x0,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            problem: TomographySpec {
                n_side: 12,
                ..TomographySpec::default()
            },
            max_iterations: 15,
            ..ExperimentSpec::default()
        }
    }

    #[test]
    fn runs_all_methods_from_shared_start() {
        let res = run_experiment(&small_spec()).unwrap();
        assert_eq!(res.traces.len(), 4);
        let first = res.traces[0].records[0];
        for t in &res.traces {
            // one forward and one adjoint product for the starting gradient
            assert_eq!(t.records[0].f, first.f);
            assert_eq!(t.records[0].matvec_count, 2);
        }
        for rel in res.relative_values() {
            assert_eq!(rel[0], 1.0);
            assert!(rel.iter().all(|&v| v >= 0.0));
        }
        assert!(res.relative_values().iter().any(|r| r.contains(&0.0)));
    }

    #[test]
    fn relative_csv_has_documented_header() {
        let res = run_experiment(&small_spec()).unwrap();
        let mut buf = Vec::new();
        res.write_relative_values_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("# relative value = (f_k - f_best) / (f_0 - f_best)"));
        assert_eq!(lines.next().unwrap(), "k,EG,PoiCG,IPgRGD,IPeMD");
    }

    #[test]
    fn experiment_is_deterministic() {
        let a = run_experiment(&small_spec()).unwrap();
        let b = run_experiment(&small_spec()).unwrap();
        for (ta, tb) in a.traces.iter().zip(&b.traces) {
            assert_eq!(ta.records, tb.records);
        }
    }

    #[test]
    fn level_search() {
        assert_eq!(iterations_to_level(&[1.0, 0.5, 1e-4], 1e-3), Some(2));
        assert_eq!(iterations_to_level(&[1.0, 0.5], 1e-3), None);
    }
}
