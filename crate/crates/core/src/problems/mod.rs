//! Poisson tomography test bed: `f(x) = KL(b, Ax) + lambda <L_delta(grad x), 1>`
//! with a parallel-beam projector and a synthetic phantom.

pub mod instance;
pub mod io;
pub mod operator;
pub mod phantom;
pub mod projector;
pub mod tv;

pub use instance::{full_objective, kl_fidelity, kl_fidelity_value, ProblemInstance};
pub use operator::SparseOperator;
pub use phantom::{make_phantom, simulate_data};
pub use projector::{angles_for_undersampling, build_projector};
pub use tv::{discrete_gradient, discrete_gradient_adjoint, huber, huber_tv, ImageShape};

use crate::error::Result;

/// Parameters of a synthetic tomography instance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TomographySpec {
    pub n_side: usize,
    /// Ratio of measurements to unknowns.
    pub undersampling: f64,
    pub lambda: f64,
    pub delta: f64,
    pub noisy: bool,
    pub seed: u64,
}

impl Default for TomographySpec {
    fn default() -> Self {
        TomographySpec {
            n_side: 64,
            undersampling: 0.2,
            lambda: 0.01,
            delta: 0.01,
            noisy: false,
            seed: 0,
        }
    }
}

/// Phantom, projector and data for `spec`. Operator counters start at zero.
pub fn build_tomography(spec: &TomographySpec) -> Result<(ProblemInstance, Vec<f64>)> {
    let n_angles = angles_for_undersampling(spec.n_side, spec.undersampling);
    let a = build_projector(spec.n_side, n_angles)?;
    let x_true = make_phantom(spec.n_side)?;
    let b = simulate_data(&a, &x_true, spec.seed, spec.noisy)?;
    a.reset_counts();
    let inst = ProblemInstance::new(
        a,
        b,
        spec.lambda,
        spec.delta,
        ImageShape::square(spec.n_side),
    )?;
    Ok((inst, x_true))
}
