//! All-roots-at-once polynomial solver (Aberth–Ehrlich iteration).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const MAX_ITERATIONS: usize = 200;
pub const TOLERANCE: f64 = 1e-13;

/// Roots of the polynomial with ascending coefficients `coeffs`.
///
/// The leading coefficient must be nonzero. Each root is frozen once its
/// Newton correction falls below `tol` (relative) or its residual reaches the
/// rounding floor of Horner evaluation, which is what stops the iteration on
/// multiple roots.
pub fn aberth(coeffs: &[Complex64], max_iterations: usize, tol: f64) -> Result<Vec<Complex64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    if lead.norm() == 0.0 {
        return Err(Error::InvalidArgument("leading coefficient is zero".into()));
    }
    if n == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }

    let (mut roots, radius) = initial_guesses(coeffs);
    // Absolute floor for the step test so that a cluster collapsing onto the
    // origin still terminates.
    let floor_scale = 1e-3 * radius;
    let mut frozen = [false; 64];
    let mut frozen_vec;
    let frozen: &mut [bool] = if n <= 64 {
        &mut frozen[..n]
    } else {
        frozen_vec = vec![false; n];
        &mut frozen_vec
    };

    for _ in 0..max_iterations {
        let mut active = false;
        for k in 0..n {
            if frozen[k] {
                continue;
            }
            let z = roots[k];
            let (p, dp, floor) = horner_with_bound(coeffs, z);
            if p.norm() <= 4.0 * f64::EPSILON * floor {
                frozen[k] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &r) in roots.iter().enumerate() {
                if j != k {
                    s += (z - r).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !step.re.is_finite() || !step.im.is_finite() {
                return Err(Error::RootSolveFailure {
                    iterations: 0,
                    residual: f64::NAN,
                });
            }
            roots[k] = z - step;
            if step.norm() <= tol * roots[k].norm().max(floor_scale) {
                frozen[k] = true;
            } else {
                active = true;
            }
        }
        if !active {
            return Ok(roots);
        }
    }

    let residual = roots
        .iter()
        .map(|&z| horner_with_bound(coeffs, z).0.norm())
        .fold(0.0, f64::max);
    Err(Error::RootSolveFailure {
        iterations: max_iterations,
        residual,
    })
}

/// Aberth with the default iteration cap and tolerance.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    aberth(coeffs, MAX_ITERATIONS, TOLERANCE)
}

/// One or two Newton steps on an already-isolated root; skipped when the
/// derivative is too small for Newton to help (clustered roots).
pub fn polish(coeffs: &[Complex64], z: Complex64, steps: usize) -> Complex64 {
    let mut z = z;
    for _ in 0..steps {
        let (p, dp, floor) = horner_with_bound(coeffs, z);
        if p.norm() <= f64::EPSILON * floor || dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        let candidate = z - step;
        if horner_with_bound(coeffs, candidate).0.norm() < p.norm() {
            z = candidate;
        } else {
            break;
        }
    }
    z
}

/// Value, derivative and the running bound `sum |a_k| |z|^k` used as the
/// rounding-error floor.
#[inline]
fn horner_with_bound(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let zero = Complex64::new(0.0, 0.0);
    let az = z.norm();
    let (mut p, mut dp, mut b) = (zero, zero, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        b = b * az + c.norm();
    }
    (p, dp, b)
}

fn initial_guesses(coeffs: &[Complex64]) -> (Vec<Complex64>, f64) {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let center = -coeffs[n - 1] / (lead * n as f64);
    // Geometric mean distance of the roots from the centroid.
    let shifted = shifted_constant(coeffs, center);
    let mut radius = (shifted.norm() / lead.norm()).powf(1.0 / n as f64);
    if !radius.is_finite() || radius <= 0.0 {
        radius = coeffs
            .iter()
            .take(n)
            .map(|c| (c.norm() / lead.norm()).powf(1.0 / n as f64))
            .fold(0.0, f64::max)
            .max(1e-3);
    }
    let guesses = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect();
    (guesses, radius)
}

fn shifted_constant(coeffs: &[Complex64], center: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * center + c)
}
