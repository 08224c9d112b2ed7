use super::operator::SparseOperator;
use super::tv::{huber_tv, huber_tv_hess_vec, huber_tv_value, ImageShape};
use crate::error::{Error, Result};
use crate::geometry::{Point, Tangent};
use crate::objective::Objective;

fn kl_terms(b: &[f64], ax: &[f64]) -> Result<f64> {
    let mut value = 0.0;
    for (i, (&bi, &ai)) in b.iter().zip(ax).enumerate() {
        if !(ai > 0.0) {
            return Err(Error::Domain(format!("(Ax)_{i} = {ai} is not positive")));
        }
        value += bi * (bi / ai).ln() - bi + ai;
    }
    Ok(value)
}

/// `KL(b, Ax)` and its gradient `A^T (1 - b / Ax)`.
///
/// Costs one forward and one adjoint application of `a`.
pub fn kl_fidelity(a: &SparseOperator, b: &[f64], x: &Point) -> Result<(f64, Tangent)> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    if x.dim() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: x.dim(),
        });
    }
    let ax = a.apply(x.as_slice());
    let value = kl_terms(b, &ax)?;
    let residual: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| 1.0 - bi / ai).collect();
    let grad = a.apply_adjoint(&residual);
    Ok((value, Tangent::new(grad)?))
}

/// `KL(b, Ax)` alone; one forward application.
pub fn kl_fidelity_value(a: &SparseOperator, b: &[f64], x: &Point) -> Result<f64> {
    if x.dim() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: x.dim(),
        });
    }
    kl_terms(b, &a.apply(x.as_slice()))
}

/// Poisson tomography objective `f(x) = KL(b, Ax) + lambda <L_delta(grad x), 1>`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: SparseOperator,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub delta: f64,
    pub image_shape: ImageShape,
}

impl ProblemInstance {
    pub fn new(
        a: SparseOperator,
        b: Vec<f64>,
        lambda: f64,
        delta: f64,
        image_shape: ImageShape,
    ) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: b.len(),
            });
        }
        if image_shape.len() != a.cols() {
            return Err(Error::DimensionMismatch {
                expected: a.cols(),
                found: image_shape.len(),
            });
        }
        if let Some(i) = b.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "b[{i}] = {} is not positive",
                b[i]
            )));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter("lambda must be >= 0".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter("delta must be > 0".into()));
        }
        Ok(ProblemInstance {
            a,
            b,
            lambda,
            delta,
            image_shape,
        })
    }

    pub fn b_l1(&self) -> f64 {
        self.b.iter().sum()
    }
}

/// Sum of [`kl_fidelity`] and the Huber-TV term, values and gradients.
pub fn full_objective(instance: &ProblemInstance, x: &Point) -> Result<(f64, Tangent)> {
    let (kv, kg) = kl_fidelity(&instance.a, &instance.b, x)?;
    let (tv, tg) = huber_tv(
        x.as_slice(),
        instance.lambda,
        instance.delta,
        instance.image_shape,
    )?;
    let grad: Vec<f64> = kg.as_slice().iter().zip(&tg).map(|(a, b)| a + b).collect();
    Ok((kv + tv, Tangent::new(grad)?))
}

impl Objective for ProblemInstance {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let kv = kl_fidelity_value(&self.a, &self.b, x)?;
        let tv = huber_tv_value(x.as_slice(), self.lambda, self.delta, self.image_shape)?;
        Ok(kv + tv)
    }

    fn value_and_grad(&self, x: &Point) -> Result<(f64, Tangent)> {
        full_objective(self, x)
    }

    /// `A^T diag(b / (Ax)^2) A v + Huber-TV Hessian`.
    fn hess_vec(&self, x: &Point, v: &Tangent) -> Result<Tangent> {
        let ax = self.a.apply(x.as_slice());
        let av = self.a.apply(v.as_slice());
        let weighted: Vec<f64> = self
            .b
            .iter()
            .zip(ax.iter().zip(&av))
            .map(|(bi, (ai, vi))| bi / (ai * ai) * vi)
            .collect();
        let kl_part = self.a.apply_adjoint(&weighted);
        let tv_part = huber_tv_hess_vec(
            x.as_slice(),
            v.as_slice(),
            self.lambda,
            self.delta,
            self.image_shape,
        )?;
        Tangent::new(kl_part.iter().zip(&tv_part).map(|(a, b)| a + b).collect())
    }

    fn operator_applications(&self) -> u64 {
        self.a.total_applications()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::projector::build_projector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn kl_fidelity_examples() {
        let a = SparseOperator::from_dense(&[vec![1.0]]).unwrap();
        let (v, g) = kl_fidelity(&a, &[2.0], &p(&[1.0])).unwrap();
        assert!((v - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert_eq!(g.as_slice(), &[-1.0]);
        let h = 1e-6;
        let fd = (kl_fidelity_value(&a, &[2.0], &p(&[1.0 + h])).unwrap()
            - kl_fidelity_value(&a, &[2.0], &p(&[1.0 - h])).unwrap())
            / (2.0 * h);
        assert!((fd + 1.0).abs() < 1e-8);

        let a = SparseOperator::from_dense(&[vec![1.0, 1.0]]).unwrap();
        let (v, g) = kl_fidelity(&a, &[2.0], &p(&[1.0, 1.0])).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn consistent_data_is_a_minimum() {
        let a = build_projector(4, 3).unwrap();
        let x = p(&[0.5; 16]);
        let b = a.apply(x.as_slice());
        let inst = ProblemInstance::new(a, b, 0.0, 0.1, ImageShape::square(4)).unwrap();
        let (v, g) = full_objective(&inst, &x).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(g.sup_norm() < 1e-12);
    }

    #[test]
    fn components_add_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = build_projector(6, 4).unwrap();
        let b: Vec<f64> = (0..a.rows()).map(|_| rng.random_range(0.5..3.0)).collect();
        let x = Point::new((0..36).map(|_| rng.random_range(0.5..1.5)).collect()).unwrap();
        let inst = ProblemInstance::new(a, b, 0.3, 0.05, ImageShape::square(6)).unwrap();
        let (v, _) = full_objective(&inst, &x).unwrap();
        let kv = kl_fidelity(&inst.a, &inst.b, &x).unwrap().0;
        let tv = huber_tv(x.as_slice(), 0.3, 0.05, inst.image_shape)
            .unwrap()
            .0;
        assert_eq!(v, kv + tv);
        assert_eq!(inst.value(&x).unwrap(), v);
    }

    #[test]
    fn counters_advance_once_per_evaluation() {
        let a = build_projector(4, 2).unwrap();
        let b = vec![1.0; a.rows()];
        let inst = ProblemInstance::new(a, b, 0.1, 0.1, ImageShape::square(4)).unwrap();
        let x = Point::ones(16);
        inst.value_and_grad(&x).unwrap();
        assert_eq!(inst.a.counts(), (1, 1));
        inst.value(&x).unwrap();
        assert_eq!(inst.a.counts(), (2, 1));
        assert_eq!(inst.operator_applications(), 3);
    }

    #[test]
    fn rejects_bad_instances() {
        let a = build_projector(4, 2).unwrap();
        let m = a.rows();
        assert!(
            ProblemInstance::new(a.clone(), vec![0.0; m], 0.1, 0.1, ImageShape::square(4)).is_err()
        );
        assert!(
            ProblemInstance::new(a.clone(), vec![1.0; m], -0.1, 0.1, ImageShape::square(4))
                .is_err()
        );
        assert!(
            ProblemInstance::new(a.clone(), vec![1.0; m], 0.1, 0.0, ImageShape::square(4)).is_err()
        );
        assert!(ProblemInstance::new(a, vec![1.0; m], 0.1, 0.1, ImageShape::square(5)).is_err());
    }
}
