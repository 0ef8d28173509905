//! Eigenvalues of small dense complex matrices: Householder reduction to
//! Hessenberg form, shifted QR sweeps with deflation, and eigenvectors by
//! inverse iteration.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 64;
pub const MAX_SWEEPS: usize = 10_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by decreasing modulus.
    pub values: Vec<Complex64>,
    /// Unit 2-norm, largest component real and positive.
    pub vectors: Vec<Vec<Complex64>>,
}

impl Spectrum {
    pub fn spectral_radius(&self) -> f64 {
        self.values.first().map_or(0.0, |v| v.norm())
    }

    /// Index of the eigenvalue closest to `target`.
    pub fn nearest(&self, target: Complex64) -> Option<usize> {
        (0..self.values.len()).min_by(|&i, &j| {
            (self.values[i] - target)
                .norm()
                .total_cmp(&(self.values[j] - target).norm())
        })
    }
}

pub fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let alpha: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H ← (I − 2vv*/v*v) H (I − 2vv*/v*v)
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * h[(k + 1 + t, j)]).sum();
            let s = s * (2.0 / vnorm2);
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vt * s;
            }
        }
        for i in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vt)| h[(i, k + 1 + t)] * vt).sum();
            let s = s * (2.0 / vnorm2);
            for (t, vt) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= s * vt.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr / 4.0 - det).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = tr / 2.0 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() || a.rows() > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "eigenvalues need a square matrix of dimension at most {MAX_DIM}"
        )));
    }
    let n = a.rows();
    let mut h = hessenberg(a);
    let mut values = Vec::with_capacity(n);
    if n == 0 {
        return Ok(values);
    }
    let mut hi = n - 1;
    let mut sweeps = 0;
    let mut since_deflation = 0;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let scale = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if h[(l, l - 1)].norm() <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            values.push(h[(hi, hi)]);
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        since_deflation += 1;
        let mut mu = wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
        if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            mu = h[(hi, hi)] + Complex64::new(0.75, 0.25) * h[(hi, hi - 1)].norm();
        }
        qr_sweep(&mut h, l, hi, mu);
    }
    values.push(h[(0, 0)]);
    Ok(values)
}

/// One explicit shifted QR step on the active block `l..=hi`.
fn qr_sweep(h: &mut CMatrix, l: usize, hi: usize, mu: Complex64) {
    for k in l..=hi {
        h[(k, k)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - l);
    for k in l..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), ZERO)
        } else {
            (a / r, b / r)
        };
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rotations.push((c, s));
    }
    for (t, (c, s)) in rotations.into_iter().enumerate() {
        let k = l + t;
        for i in l..=(k + 1).min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for k in l..=hi {
        h[(k, k)] += mu;
    }
}

/// Eigenvector for `lambda` by inverse iteration on `A − σI`.
pub fn inverse_iteration(a: &CMatrix, lambda: Complex64) -> Vec<Complex64> {
    let n = a.rows();
    let scale = a.frobenius_norm().max(1.0);
    let mut offset = 1e-10 * scale;
    let lu = loop {
        let mut shifted = a.clone();
        let sigma = lambda + Complex64::new(offset, 0.5 * offset);
        for i in 0..n {
            shifted[(i, i)] -= sigma;
        }
        match shifted.lu() {
            Some(lu) => break lu,
            None => offset *= 10.0,
        }
    };
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * (i % 3) as f64))
        .collect();
    for _ in 0..6 {
        x = lu.solve(&x);
        normalize(&mut x);
    }
    x
}

fn normalize(x: &mut [Complex64]) {
    let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return;
    }
    let pivot = x
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    for v in x.iter_mut() {
        *v *= phase / norm;
    }
}

pub fn spectrum(a: &CMatrix) -> Result<Spectrum> {
    let mut values = eigenvalues(a)?;
    values.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(y.re.total_cmp(&x.re)).then(y.im.total_cmp(&x.im)));
    let vectors = values.iter().map(|&l| inverse_iteration(a, l)).collect();
    Ok(Spectrum { values, vectors })
}
