//! Parallel-beam projector by exact ray/pixel intersection lengths.
//!
//! The image is `n_side x n_side` unit pixels centred at the origin, stored
//! row-major with row 0 at the top. Pixel `(r, c)` covers
//! `x in [c - n/2, c + 1 - n/2]`, `y in [n/2 - r - 1, n/2 - r]`.
//! At angle `theta` the detector axis is `(cos, sin)` and rays travel along
//! `(-sin, cos)`; detector bin `j` sits at offset `j - (n - 1)/2`, so at
//! `theta = 0` bin `j` runs straight down column `j`.

use super::operator::SparseOperator;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// `n_angles` equidistant angles in `[0, 2 pi)`.
pub fn equidistant_angles(n_angles: usize) -> Vec<f64> {
    (0..n_angles)
        .map(|k| 2.0 * PI * k as f64 / n_angles as f64)
        .collect()
}

/// Number of angles giving `fraction * n_side^2` rays with `n_side`
/// detector bins per angle (at least one).
pub fn angles_for_undersampling(n_side: usize, fraction: f64) -> usize {
    ((fraction * n_side as f64).round() as usize).max(1)
}

/// Intersection lengths of one ray with the pixel grid, as `(pixel, length)`
/// sorted by pixel index.
pub fn trace_ray(n_side: usize, theta: f64, offset: f64) -> Vec<(usize, f64)> {
    let n = n_side as f64;
    let half = n / 2.0;
    let (s, c) = theta.sin_cos();
    let origin = (offset * c, offset * s);
    let dir = (-s, c);

    // parametric interval where the ray is inside the square
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (o, d) in [(origin.0, dir.0), (origin.1, dir.1)] {
        if d.abs() < 1e-14 {
            if o <= -half || o >= half {
                return Vec::new();
            }
        } else {
            let a = (-half - o) / d;
            let b = (half - o) / d;
            t_lo = t_lo.max(a.min(b));
            t_hi = t_hi.min(a.max(b));
        }
    }
    if !(t_hi > t_lo) {
        return Vec::new();
    }

    let mut ts = vec![t_lo, t_hi];
    for (o, d) in [(origin.0, dir.0), (origin.1, dir.1)] {
        if d.abs() < 1e-14 {
            continue;
        }
        for k in 0..=n_side {
            let t = (k as f64 - half - o) / d;
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut hits: Vec<(usize, f64)> = Vec::new();
    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= 1e-12 {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let px = origin.0 + tm * dir.0;
        let py = origin.1 + tm * dir.1;
        let col = (px + half).floor();
        let row = (half - py).floor();
        if col < 0.0 || row < 0.0 || col >= n || row >= n {
            continue;
        }
        hits.push((row as usize * n_side + col as usize, len));
    }
    hits.sort_by_key(|h| h.0);
    hits.dedup_by(|later, earlier| {
        if later.0 == earlier.0 {
            earlier.1 += later.1;
            true
        } else {
            false
        }
    });
    hits
}

/// System matrix for `n_angles` equidistant angles in `[0, 2 pi)` with
/// `n_side` detector bins per angle. Rays missing the image are dropped.
pub fn build_projector(n_side: usize, n_angles: usize) -> Result<SparseOperator> {
    if n_side < 4 {
        return Err(Error::InvalidParameter(format!(
            "n_side must be >= 4, got {n_side}"
        )));
    }
    if n_angles == 0 {
        return Err(Error::InvalidParameter("n_angles must be positive".into()));
    }
    let mut triplets = Vec::new();
    let mut row = 0usize;
    for theta in equidistant_angles(n_angles) {
        for j in 0..n_side {
            let offset = j as f64 - (n_side as f64 - 1.0) / 2.0;
            let hits = trace_ray(n_side, theta, offset);
            if hits.is_empty() {
                continue;
            }
            triplets.extend(hits.into_iter().map(|(px, len)| (row, px, len)));
            row += 1;
        }
    }
    SparseOperator::from_triplets(row, n_side * n_side, triplets)
}
