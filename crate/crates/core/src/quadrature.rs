//! Planar Lebesgue integration with pole-aware importance sampling.
//!
//! Unbounded regions are split into an inner chart `|z| ≤ R0` and an outer
//! chart `w = 1/z` with Jacobian `|w|⁻⁴`. In each chart the proposal is a
//! mixture of a uniform disk and polar shells (density `∝ 1/r`) around the
//! declared poles; `ε`-disks around poles are excluded and their
//! contribution is bounded separately in `pole_correction`.
//!
//! Samples are drawn in fixed-size chunks, each from its own substream, and
//! reduced in chunk order with compensated sums, so the result is a pure
//! function of `(seed, budget)` whatever the thread count.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::operators::{beltrami_apply, ruelle_apply};
use crate::rational::RationalMap;
use crate::rng::RandomStream;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub enum Region {
    WholePlane,
    Disk { center: Complex64, radius: f64 },
    Annulus { center: Complex64, inner: f64, outer: f64 },
    Preimage { map: Arc<RationalMap>, inner: Box<Region> },
    Complement(Box<Region>),
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    pub fn preimage(map: &RationalMap, inner: Region) -> Self {
        Region::Preimage {
            map: Arc::new(map.clone()),
            inner: Box::new(inner),
        }
    }

    pub fn complement(inner: Region) -> Self {
        Region::Complement(Box::new(inner))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Region::WholePlane => true,
            Region::Disk { center, radius } => (z - center).norm() < *radius,
            Region::Annulus { center, inner, outer } => {
                let r = (z - center).norm();
                *inner <= r && r < *outer
            }
            Region::Preimage { map, inner } => {
                let v = map.value(z);
                v.re.is_finite() && v.im.is_finite() && inner.contains(v)
            }
            Region::Complement(inner) => !inner.contains(z),
        }
    }

    /// Whether the point at infinity stays away from the closure.
    pub fn is_bounded(&self) -> bool {
        match self {
            Region::WholePlane | Region::Complement(_) => false,
            Region::Disk { .. } | Region::Annulus { .. } => true,
            Region::Preimage { map, inner } => match map.apply(SpherePoint::Infinity) {
                SpherePoint::Infinity => inner.is_bounded(),
                SpherePoint::Finite(v) => !inner.is_unbounded_near(v),
            },
        }
    }

    /// Conservative: true unless `v` is clearly outside a bounded region.
    fn is_unbounded_near(&self, v: Complex64) -> bool {
        match self {
            Region::Disk { center, radius } => (v - center).norm() <= *radius * (1.0 + 1e-9),
            Region::Annulus { center, inner, outer } => {
                let r = (v - center).norm();
                r >= *inner * (1.0 - 1e-9) && r <= *outer * (1.0 + 1e-9)
            }
            _ => true,
        }
    }

    /// A disk containing the region, when one is known in closed form.
    pub fn bounding_disk(&self) -> Option<(Complex64, f64)> {
        match self {
            Region::Disk { center, radius } => Some((*center, *radius)),
            Region::Annulus { center, outer, .. } => Some((*center, *outer)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: Complex64,
    pub stderr: f64,
    pub nodes: usize,
    /// Bound on the mass of the excluded `ε`-disks, `Σ 2πε·|res|`.
    pub pole_correction: f64,
    /// Nodes where the integrand was not finite (measure-zero singular sets).
    pub skipped: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    pub inner_radius: f64,
    pub epsilon: f64,
    pub shell_fraction: f64,
    pub residue_radius: f64,
    pub chunk: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            inner_radius: 2.0,
            epsilon: 1e-4,
            shell_fraction: 0.3,
            residue_radius: 1e-3,
            chunk: 4096,
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Debug)]
struct Moments {
    re: Vec<Compensated>,
    im: Vec<Compensated>,
    sq: Vec<Compensated>,
    skipped: Vec<usize>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self {
            re: vec![Compensated::default(); k],
            im: vec![Compensated::default(); k],
            sq: vec![Compensated::default(); k],
            skipped: vec![0; k],
        }
    }

    fn merge(&mut self, other: &Moments) {
        for i in 0..self.re.len() {
            self.re[i].add(other.re[i].value());
            self.im[i].add(other.im[i].value());
            self.sq[i].add(other.sq[i].value());
            self.skipped[i] += other.skipped[i];
        }
    }
}

/// One chart restricted to a disk, with the poles it must resolve.
/// Radius of the polar shell around each pole.
const SHELL_RADIUS: f64 = 0.5;

struct Stratum {
    center: Complex64,
    radius: f64,
    /// Chart `w = 1/z` with Jacobian `|w|⁻⁴`.
    outer: bool,
    poles: Vec<Complex64>,
    shells: Vec<f64>,
    budget: usize,
}

impl Stratum {
    fn new(center: Complex64, radius: f64, outer: bool, candidates: &[Complex64], budget: usize, eps: f64) -> Self {
        let mut poles: Vec<Complex64> = Vec::new();
        for &p in candidates {
            if (p - center).norm() < radius + 0.5 && !poles.iter().any(|q| (q - p).norm() < 1e-12) {
                poles.push(p);
            }
        }
        // Shells may overlap: the density sums every shell containing `x`.
        let shells = vec![SHELL_RADIUS.min(radius).max(10.0 * eps); poles.len()];
        Self {
            center,
            radius,
            outer,
            poles,
            shells,
            budget,
        }
    }

    #[inline]
    fn to_plane(&self, x: Complex64) -> (Complex64, f64) {
        if self.outer {
            let z = x.inv();
            let r2 = x.norm_sqr();
            (z, 1.0 / (r2 * r2))
        } else {
            (x, 1.0)
        }
    }

    #[inline]
    fn density(&self, x: Complex64, alpha: f64, eps: f64) -> Option<f64> {
        let mut shell = 0.0;
        for (p, s) in self.poles.iter().zip(&self.shells) {
            let r = (x - p).norm();
            if r < eps {
                return None;
            }
            if r < *s {
                shell += 1.0 / (2.0 * PI * (s - eps) * r);
            }
        }
        let area = PI * self.radius * self.radius;
        let alpha = if self.poles.is_empty() { 0.0 } else { alpha };
        let k = self.poles.len().max(1) as f64;
        Some((1.0 - alpha) / area + alpha * shell / k)
    }

    #[inline]
    fn draw(&self, rng: &mut RandomStream, alpha: f64, eps: f64) -> Complex64 {
        let theta = 2.0 * PI * rng.uniform();
        if !self.poles.is_empty() && rng.uniform() < alpha {
            let k = rng.index(self.poles.len());
            let r = eps + (self.shells[k] - eps) * rng.uniform();
            self.poles[k] + Complex64::from_polar(r, theta)
        } else {
            let r = self.radius * rng.uniform().sqrt();
            self.center + Complex64::from_polar(r, theta)
        }
    }
}

/// Integrates `k` components sharing the same nodes. `eval` writes the
/// integrand values at `z` into its output slice.
#[allow(clippy::too_many_arguments)]
pub fn integrate_with<F>(
    k: usize,
    eval: F,
    poles: &[Complex64],
    decay_order: i32,
    region: &Region,
    budget: usize,
    rng: &RandomStream,
    opts: &QuadratureOptions,
) -> Result<Vec<IntegralEstimate>>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    let bounded = region.is_bounded();
    if !bounded && decay_order < 3 {
        return Err(Error::NonIntegrable { decay: decay_order });
    }
    let eps = opts.epsilon;
    let strata = match region.bounding_disk() {
        Some((c, r)) => vec![Stratum::new(c, r, false, poles, budget, eps)],
        None => {
            let r0 = chart_radius(opts.inner_radius, poles);
            let inner_budget = budget / 2;
            let mut outer_poles: Vec<Complex64> = poles
                .iter()
                .filter(|p| p.norm() > 0.5 * r0)
                .map(|p| p.inv())
                .collect();
            outer_poles.push(Complex64::new(0.0, 0.0));
            vec![
                Stratum::new(Complex64::new(0.0, 0.0), r0, false, poles, inner_budget, eps),
                Stratum::new(Complex64::new(0.0, 0.0), 1.0 / r0, true, &outer_poles, budget - inner_budget, eps),
            ]
        }
    };

    let alpha = opts.shell_fraction;
    let mut totals = vec![
        IntegralEstimate {
            value: Complex64::new(0.0, 0.0),
            stderr: 0.0,
            nodes: 0,
            pole_correction: 0.0,
            skipped: 0,
        };
        k
    ];
    let mut variances = vec![0.0; k];

    for (si, stratum) in strata.iter().enumerate() {
        if stratum.budget == 0 {
            continue;
        }
        let stream = rng.split(si as u64);
        let chunks = stratum.budget.div_ceil(opts.chunk);
        let integrand = |x: Complex64, out: &mut [Complex64]| -> bool {
            let (z, jac) = stratum.to_plane(x);
            if !region.contains(z) {
                out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
                return true;
            }
            eval(z, out);
            out.iter_mut().for_each(|o| *o *= jac);
            true
        };
        let partials: Vec<Moments> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut local = stream.split(c as u64);
                let n = opts.chunk.min(stratum.budget - c * opts.chunk);
                let mut m = Moments::new(k);
                let mut buf = vec![Complex64::new(0.0, 0.0); k];
                for _ in 0..n {
                    let x = stratum.draw(&mut local, alpha, eps);
                    let inside = (x - stratum.center).norm() < stratum.radius;
                    let Some(q) = stratum.density(x, alpha, eps).filter(|_| inside) else {
                        // Outside the chart or inside an excluded disk: a zero sample.
                        continue;
                    };
                    integrand(x, &mut buf);
                    for i in 0..k {
                        let v = buf[i] / q;
                        if v.re.is_finite() && v.im.is_finite() {
                            m.re[i].add(v.re);
                            m.im[i].add(v.im);
                            m.sq[i].add(v.norm_sqr());
                        } else {
                            m.skipped[i] += 1;
                        }
                    }
                }
                m
            })
            .collect();
        let mut acc = Moments::new(k);
        for p in &partials {
            acc.merge(p);
        }
        let n = stratum.budget as f64;
        let corrections = pole_corrections(k, stratum, &integrand, eps, opts.residue_radius);
        for i in 0..k {
            let mean = Complex64::new(acc.re[i].value() / n, acc.im[i].value() / n);
            let second = acc.sq[i].value() / n;
            let var = (second - mean.norm_sqr()).max(0.0) * n / (n - 1.0).max(1.0);
            totals[i].value += mean;
            variances[i] += var / n;
            totals[i].nodes += stratum.budget;
            totals[i].skipped += acc.skipped[i];
            totals[i].pole_correction += corrections[i];
        }
    }
    for i in 0..k {
        totals[i].stderr = variances[i].sqrt();
    }
    Ok(totals)
}

/// `Σ 2πε · mean_θ |(x - p) g(x)|` over the poles whose excluded disk meets
/// the chart; the mean is taken on the circle of radius `rho`.
fn pole_corrections<G>(k: usize, stratum: &Stratum, integrand: &G, eps: f64, rho: f64) -> Vec<f64>
where
    G: Fn(Complex64, &mut [Complex64]) -> bool,
{
    const ANGLES: usize = 32;
    let mut out = vec![0.0; k];
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for &p in &stratum.poles {
        if (p - stratum.center).norm() > stratum.radius + eps {
            continue;
        }
        let mut mean = vec![0.0; k];
        for j in 0..ANGLES {
            let offset = Complex64::from_polar(rho, 2.0 * PI * (j as f64 + 0.5) / ANGLES as f64);
            integrand(p + offset, &mut buf);
            for i in 0..k {
                let v = (buf[i] * offset).norm();
                if v.is_finite() {
                    mean[i] += v / ANGLES as f64;
                }
            }
        }
        for i in 0..k {
            out[i] += 2.0 * PI * eps * mean[i];
        }
    }
    out
}

/// Inner chart radius: the default unless a pole sits within 0.05 of the
/// chart circle, in which case the nearest clear radius is used.
fn chart_radius(default: f64, poles: &[Complex64]) -> f64 {
    let clear = |r: f64| poles.iter().all(|p| (p.norm() - r).abs() > 0.05);
    for step in 0..40 {
        for sign in [1.0, -1.0] {
            let r = default + sign * 0.125 * step as f64;
            if r > 0.25 && clear(r) {
                return r;
            }
        }
    }
    default
}

pub fn integrate(f: &Field, region: &Region, budget: usize, rng: &RandomStream) -> Result<IntegralEstimate> {
    integrate_opts(f, region, budget, rng, &QuadratureOptions::default())
}

pub fn integrate_opts(
    f: &Field,
    region: &Region,
    budget: usize,
    rng: &RandomStream,
    opts: &QuadratureOptions,
) -> Result<IntegralEstimate> {
    let est = integrate_with(
        1,
        |z, out| out[0] = f.eval(z),
        f.poles(),
        f.decay_order(),
        region,
        budget,
        rng,
        opts,
    )?;
    Ok(est[0])
}

/// Several fields on common nodes.
pub fn integrate_many(fields: &[Field], region: &Region, budget: usize, rng: &RandomStream) -> Result<Vec<IntegralEstimate>> {
    let mut poles = Vec::new();
    for f in fields {
        poles.extend_from_slice(f.poles());
    }
    let decay = fields.iter().map(Field::decay_order).min().unwrap_or(i32::MAX);
    integrate_with(
        fields.len(),
        |z, out| {
            for (o, f) in out.iter_mut().zip(fields) {
                *o = f.eval(z);
            }
        },
        &poles,
        decay,
        region,
        budget,
        rng,
        &QuadratureOptions::default(),
    )
}

/// `‖f‖_{L¹(A)}`.
pub fn l1_norm(f: &Field, region: &Region, budget: usize, rng: &RandomStream) -> Result<IntegralEstimate> {
    integrate(&f.modulus(), region, budget, rng)
}

/// `∫_A μ φ |dz|²`.
pub fn pairing(mu: &Field, phi: &Field, region: &Region, budget: usize, rng: &RandomStream) -> Result<IntegralEstimate> {
    integrate(&mu.mul(phi), region, budget, rng)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DualitySide {
    pub lhs: IntegralEstimate,
    pub rhs: IntegralEstimate,
    pub residual: f64,
    pub combined_stderr: f64,
}

impl DualitySide {
    fn new(lhs: IntegralEstimate, rhs: IntegralEstimate) -> Self {
        Self {
            residual: (lhs.value - rhs.value).norm(),
            combined_stderr: lhs.stderr.hypot(rhs.stderr),
            lhs,
            rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DualityResidual {
    /// `∫_A μ R*φ` against `∫_{R⁻¹A} B_R μ · φ`.
    pub signed: DualitySide,
    /// `∫_A μ |R*|φ` against `∫_{R⁻¹A} |B_R| μ · φ`.
    pub modulus: DualitySide,
}

/// Both duality identities, each side from its own independent stream.
pub fn duality_residual(
    r: &RationalMap,
    mu: &Field,
    phi: &Field,
    region: &Region,
    budget: usize,
    rng: &RandomStream,
) -> Result<DualityResidual> {
    let back = Region::preimage(r, region.clone());
    let mut sides = Vec::with_capacity(2);
    for (i, modulus) in [false, true].into_iter().enumerate() {
        let lhs = pairing(mu, &ruelle_apply(r, phi, modulus), region, budget, &rng.split(2 * i as u64))?;
        let rhs = pairing(&beltrami_apply(r, mu, modulus), phi, &back, budget, &rng.split(2 * i as u64 + 1))?;
        sides.push(DualitySide::new(lhs, rhs));
    }
    Ok(DualityResidual {
        signed: sides[0],
        modulus: sides[1],
    })
}
