//! Huber-smoothed total variation on a row-major image.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageShape {
    pub height: usize,
    pub width: usize,
}

impl ImageShape {
    pub fn square(n: usize) -> Self {
        ImageShape {
            height: n,
            width: n,
        }
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, found: usize) -> Result<()> {
        if found == self.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            })
        }
    }
}

/// Huber function and its derivative:
/// `a^2/2` for `|a| <= delta`, `delta (|a| - delta/2)` otherwise.
pub fn huber(a: f64, delta: f64) -> (f64, f64) {
    debug_assert!(delta > 0.0);
    if a.abs() <= delta {
        (0.5 * a * a, a)
    } else {
        (delta * (a.abs() - 0.5 * delta), delta * a.signum())
    }
}

/// Forward differences: the first `n` entries are horizontal
/// (`x[r][c+1] - x[r][c]`), the next `n` vertical (`x[r+1][c] - x[r][c]`).
/// Differences leaving the image are zero.
pub fn discrete_gradient(shape: ImageShape, x: &[f64]) -> Result<Vec<f64>> {
    shape.check(x.len())?;
    let (h, w) = (shape.height, shape.width);
    let n = shape.len();
    let mut out = vec![0.0; 2 * n];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w {
                out[i] = x[i + 1] - x[i];
            }
            if r + 1 < h {
                out[n + i] = x[i + w] - x[i];
            }
        }
    }
    Ok(out)
}

/// Exact transpose of [`discrete_gradient`].
pub fn discrete_gradient_adjoint(shape: ImageShape, y: &[f64]) -> Result<Vec<f64>> {
    let n = shape.len();
    if y.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: y.len(),
        });
    }
    let (h, w) = (shape.height, shape.width);
    let mut out = vec![0.0; n];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w {
                out[i + 1] += y[i];
                out[i] -= y[i];
            }
            if r + 1 < h {
                out[i + w] += y[n + i];
                out[i] -= y[n + i];
            }
        }
    }
    Ok(out)
}

/// `lambda * sum L_delta(grad x)` and its gradient
/// `lambda * grad^T L_delta'(grad x)`.
pub fn huber_tv(x: &[f64], lambda: f64, delta: f64, shape: ImageShape) -> Result<(f64, Vec<f64>)> {
    shape.check(x.len())?;
    if lambda == 0.0 {
        return Ok((0.0, vec![0.0; x.len()]));
    }
    let d = discrete_gradient(shape, x)?;
    let mut value = 0.0;
    let mut dual = Vec::with_capacity(d.len());
    for &a in &d {
        let (v, dv) = huber(a, delta);
        value += v;
        dual.push(lambda * dv);
    }
    let grad = discrete_gradient_adjoint(shape, &dual)?;
    Ok((lambda * value, grad))
}

/// Value only.
pub fn huber_tv_value(x: &[f64], lambda: f64, delta: f64, shape: ImageShape) -> Result<f64> {
    shape.check(x.len())?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let d = discrete_gradient(shape, x)?;
    Ok(lambda * d.iter().map(|&a| huber(a, delta).0).sum::<f64>())
}

/// Hessian-vector product `lambda * grad^T diag(1{|grad x| <= delta}) grad v`.
pub fn huber_tv_hess_vec(
    x: &[f64],
    v: &[f64],
    lambda: f64,
    delta: f64,
    shape: ImageShape,
) -> Result<Vec<f64>> {
    let d = discrete_gradient(shape, x)?;
    let mut dv = discrete_gradient(shape, v)?;
    for (dvi, &di) in dv.iter_mut().zip(&d) {
        *dvi *= if di.abs() <= delta { lambda } else { 0.0 };
    }
    discrete_gradient_adjoint(shape, &dv)
}
