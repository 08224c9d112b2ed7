use super::operator::SparseOperator;
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Background level added to every phantom pixel so the image is positive.
pub const PHANTOM_BACKGROUND: f64 = 0.01;

/// Replacement for zero Poisson counts.
pub const COUNT_FLOOR: f64 = 1e-8;

/// Deterministic piecewise-constant test image, row-major, values in
/// `[PHANTOM_BACKGROUND, 1]`.
///
/// A disc with a bright shell, a darker core and one bright off-centre
/// inclusion.
pub fn make_phantom(n_side: usize) -> Result<Vec<f64>> {
    if n_side < 4 {
        return Err(Error::InvalidParameter(format!(
            "n_side must be >= 4, got {n_side}"
        )));
    }
    let n = n_side as f64;
    let mut img = Vec::with_capacity(n_side * n_side);
    for r in 0..n_side {
        for c in 0..n_side {
            let u = 2.0 * (c as f64 + 0.5) / n - 1.0;
            let v = 1.0 - 2.0 * (r as f64 + 0.5) / n;
            let rad = (u * u + v * v).sqrt();
            let mut val = if rad < 0.6 {
                0.5
            } else if rad < 0.78 {
                0.99
            } else if rad < 0.88 {
                0.35
            } else {
                0.0
            };
            if rad < 0.25 {
                val = 0.2;
            }
            let (du, dv) = (u - 0.32, v + 0.28);
            if (du * du + dv * dv).sqrt() < 0.14 {
                val = 0.85;
            }
            img.push(val + PHANTOM_BACKGROUND);
        }
    }
    Ok(img)
}

/// Measurements `b = A x_true`, or independent Poisson draws with that mean
/// when `noisy`. Zero draws are replaced by [`COUNT_FLOOR`].
pub fn simulate_data(
    a: &SparseOperator,
    x_true: &[f64],
    seed: u64,
    noisy: bool,
) -> Result<Vec<f64>> {
    if x_true.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: x_true.len(),
        });
    }
    let mean = a.apply(x_true);
    if !noisy {
        return Ok(mean);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    mean.into_iter()
        .map(|m| {
            let dist = Poisson::new(m)
                .map_err(|e| Error::InvalidParameter(format!("poisson mean {m}: {e}")))?;
            let k: f64 = dist.sample(&mut rng);
            Ok(if k > 0.0 { k } else { COUNT_FLOOR })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::projector::build_projector;

    #[test]
    fn phantom_is_deterministic_and_positive() {
        let a = make_phantom(32).unwrap();
        assert_eq!(a, make_phantom(32).unwrap());
        assert!(a.iter().all(|v| (PHANTOM_BACKGROUND..=1.0).contains(v)));
        // piecewise constant with several levels
        let mut levels: Vec<u64> = a.iter().map(|v| (v * 1e6) as u64).collect();
        levels.sort();
        levels.dedup();
        assert!(levels.len() >= 5);
        assert!(make_phantom(3).is_err());
    }

    #[test]
    fn noiseless_data_equals_projection() {
        let a = build_projector(8, 3).unwrap();
        let x = make_phantom(8).unwrap();
        let b = simulate_data(&a, &x, 1, false).unwrap();
        assert_eq!(b, a.apply(&x));
    }

    #[test]
    fn noisy_data_is_reproducible_and_positive() {
        let a = build_projector(16, 4).unwrap();
        let x = make_phantom(16).unwrap();
        let b1 = simulate_data(&a, &x, 42, true).unwrap();
        let b2 = simulate_data(&a, &x, 42, true).unwrap();
        let b3 = simulate_data(&a, &x, 43, true).unwrap();
        assert_eq!(b1, b2);
        assert_ne!(b1, b3);
        assert!(b1.iter().all(|&v| v > 0.0));
        assert!(b1.iter().all(|&v| v == COUNT_FLOOR || v.fract() == 0.0));
    }
}
