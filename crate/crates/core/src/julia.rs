//! Julia and postcritical point sets, distance queries, and the Böttcher
//! coordinate of a polynomial near infinity.

use crate::branches::fiber_roots;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::rational::{RationalMap, MERGE_TOL};
use crate::rng::RandomStream;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    InverseIteration,
    /// Inverse iteration from a generic point, used when no fixed point repels.
    InverseIterationGeneric,
    ForwardOrbit,
}

/// A finite, deduplicated point set with a grid index over its finite part.
#[derive(Clone, Debug)]
pub struct PointSet {
    points: Vec<SpherePoint>,
    generator: Generator,
    grid: Grid,
}

impl PointSet {
    pub fn new(points: Vec<SpherePoint>, generator: Generator) -> Self {
        let points = dedup(points, MERGE_TOL);
        let finite: Vec<Complex64> = points.iter().filter_map(SpherePoint::finite).collect();
        Self {
            grid: Grid::build(&finite),
            points,
            generator,
        }
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains_infinity(&self) -> bool {
        self.points.iter().any(SpherePoint::is_infinite)
    }

    /// Euclidean distance from `z` to the finite part of the set.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.grid.nearest(z)
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        PointSet::new(pts, self.generator)
    }

    /// `re,im` rows; infinity is written as `inf,inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for p in &self.points {
            match p {
                SpherePoint::Finite(z) => writeln!(out, "{},{}", z.re, z.im).unwrap(),
                SpherePoint::Infinity => out.push_str("inf,inf\n"),
            }
        }
        out
    }
}

fn cell_key(z: Complex64, h: f64) -> (i64, i64) {
    ((z.re / h).floor() as i64, (z.im / h).floor() as i64)
}

fn dedup(points: Vec<SpherePoint>, tol: f64) -> Vec<SpherePoint> {
    let mut out: Vec<SpherePoint> = Vec::with_capacity(points.len());
    let mut seen: HashMap<(i64, i64), Vec<Complex64>> = HashMap::new();
    let mut has_infinity = false;
    for p in points {
        match p {
            SpherePoint::Infinity => {
                if !has_infinity {
                    has_infinity = true;
                    out.push(p);
                }
            }
            SpherePoint::Finite(z) => {
                let (i, j) = cell_key(z, tol);
                let dup = (-1..=1).any(|di| {
                    (-1..=1).any(|dj| {
                        seen.get(&(i + di, j + dj))
                            .is_some_and(|v| v.iter().any(|w| (w - z).norm() <= tol))
                    })
                });
                if !dup {
                    seen.entry((i, j)).or_default().push(z);
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Uniform bucket grid for nearest-point queries.
#[derive(Clone, Debug, Default)]
struct Grid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<Complex64>>,
    origin: Complex64,
    extent: i64,
}

impl Grid {
    fn build(points: &[Complex64]) -> Self {
        if points.is_empty() {
            return Self::default();
        }
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-9);
        let cell = span / (points.len() as f64).sqrt().ceil().max(1.0);
        let mut buckets: HashMap<(i64, i64), Vec<Complex64>> = HashMap::new();
        for &p in points {
            buckets.entry(cell_key(p - lo, cell)).or_default().push(p);
        }
        Self {
            cell,
            buckets,
            origin: lo,
            extent: (span / cell).ceil() as i64 + 1,
        }
    }

    fn nearest(&self, z: Complex64) -> f64 {
        if self.buckets.is_empty() {
            return f64::INFINITY;
        }
        let (ci, cj) = cell_key(z - self.origin, self.cell);
        // Distance from z to the grid's occupied box, in cells.
        let clamp = |c: i64| c.clamp(0, self.extent);
        let start = (ci - clamp(ci)).abs().max((cj - clamp(cj)).abs());
        let mut best = f64::INFINITY;
        if start > 2 {
            // Far outside the occupied box: rings would be mostly empty.
            for v in self.buckets.values() {
                for p in v {
                    best = best.min((p - z).norm());
                }
            }
            return best;
        }
        let mut ring = start;
        loop {
            for (i, j) in ring_cells(ci, cj, ring) {
                if let Some(v) = self.buckets.get(&(i, j)) {
                    for p in v {
                        best = best.min((p - z).norm());
                    }
                }
            }
            // Every unvisited cell is at least `ring · cell` away.
            if best <= ring as f64 * self.cell || ring > start + self.extent + 1 {
                return best;
            }
            ring += 1;
        }
    }
}

fn ring_cells(ci: i64, cj: i64, r: i64) -> Vec<(i64, i64)> {
    if r == 0 {
        return vec![(ci, cj)];
    }
    let mut out = Vec::with_capacity(8 * r as usize);
    for d in -r..=r {
        out.push((ci + d, cj - r));
        out.push((ci + d, cj + r));
    }
    for d in -r + 1..r {
        out.push((ci - r, cj + d));
        out.push((ci + r, cj + d));
    }
    out
}

/// Random backward orbit started at a repelling fixed point; the first
/// `burn` points are discarded and `count` are kept before deduplication.
pub fn julia_sample(r: &RationalMap, count: usize, burn: usize, rng: &mut RandomStream) -> Result<PointSet> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let (start, generator) = match repelling_start(r)? {
        Some(z) => (z, Generator::InverseIteration),
        None => (Complex64::new(0.123_456_7, 0.345_678_9), Generator::InverseIterationGeneric),
    };
    let mut points = Vec::with_capacity(count);
    let mut z = start;
    for step in 0..burn + count {
        if step >= burn {
            points.push(SpherePoint::Finite(z));
        }
        let (roots, _) = fiber_roots(r, z)?;
        if roots.is_empty() {
            break;
        }
        z = roots[rng.index(roots.len())];
    }
    Ok(PointSet::new(points, generator))
}

/// A finite repelling fixed point, or a finite preimage of a repelling `∞`.
fn repelling_start(r: &RationalMap) -> Result<Option<Complex64>> {
    let fixed = r.fixed_points()?;
    let mut best: Option<(f64, Complex64)> = None;
    let mut infinity_repels = false;
    for p in &fixed {
        let m = r.multiplier(*p).norm();
        if m <= 1.0 + 1e-9 {
            continue;
        }
        match p {
            SpherePoint::Finite(z) => {
                if best.is_none_or(|(bm, _)| m > bm) {
                    best = Some((m, *z));
                }
            }
            SpherePoint::Infinity => infinity_repels = true,
        }
    }
    if let Some((_, z)) = best {
        return Ok(Some(z));
    }
    if infinity_repels {
        let poles = crate::roots::roots(r.den().coeffs())?;
        return Ok(poles.first().copied());
    }
    Ok(None)
}

/// Strict variant reporting the absence of a repelling fixed point.
pub fn repelling_fixed_point(r: &RationalMap) -> Result<Complex64> {
    repelling_start(r)?.ok_or(Error::NoRepellingFixedPoint)
}

pub fn postcritical_approx(r: &RationalMap, depth: usize) -> Result<PointSet> {
    let (points, _) = r.postcritical_orbit(depth, MERGE_TOL)?;
    Ok(PointSet::new(points, Generator::ForwardOrbit))
}

/// `dist(z, K)⁻²`, the quasihyperbolic stand-in for `λ_K²(z)`.
pub fn quasihyperbolic_weight(z: SpherePoint, k: &PointSet) -> Result<f64> {
    match z {
        SpherePoint::Infinity => {
            if k.contains_infinity() {
                Err(Error::OnBoundary(0.0))
            } else {
                Ok(0.0)
            }
        }
        SpherePoint::Finite(z) => {
            let d = k.distance(z);
            if d <= 1e-12 {
                return Err(Error::OnBoundary(d));
            }
            Ok(d.powi(-2))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BottcherKind {
    Coordinate,
    Beltrami,
}

const MAX_ESCAPE: usize = 200;
/// Relative step for `Φ'`; with one Richardson step the truncation error is
/// `O(h⁴)`, so rounding (`~1e-16/h`) is the term to keep small.
const FD_STEP: f64 = 1e-3;

/// The Böttcher coordinate of a polynomial near infinity.
#[derive(Clone, Debug)]
pub struct Bottcher {
    coeffs: Vec<Complex64>,
    lead: Complex64,
    degree: usize,
    radius: f64,
}

impl Bottcher {
    pub fn new(poly: &RationalMap) -> Result<Self> {
        if !poly.is_polynomial() {
            return Err(Error::InvalidArgument("Böttcher coordinate needs a polynomial map".into()));
        }
        // Normalize away a constant denominator.
        let den = poly.den().coeff(0);
        let coeffs: Vec<Complex64> = poly.num().coeffs().iter().map(|c| c / den).collect();
        let degree = coeffs.len() - 1;
        let lead = coeffs[degree];
        let radius = 2.0 * coeffs.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
        Ok(Self {
            coeffs,
            lead,
            degree,
            radius,
        })
    }

    pub fn escape_radius(&self) -> f64 {
        self.radius
    }

    /// `ε(z)` with `P(z) = a·z^d·(1 + ε(z))`.
    fn excess(&self, z: Complex64) -> Complex64 {
        let w = z.inv();
        let mut acc = Complex64::new(0.0, 0.0);
        // Σ_{k<d} (p_k/a)·w^{d-k}, by Horner in w.
        for c in &self.coeffs[..self.degree] {
            acc = (acc + c / self.lead) * w;
        }
        acc
    }

    fn step(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `Φ(z) = lim (Pⁿ(z))^{d⁻ⁿ}` by telescoping logarithms:
    /// `log Φ = log z + log a/(d−1) + Σ d^{-(n+1)} log(1 + ε(zₙ))`.
    pub fn coordinate(&self, z: Complex64) -> Result<Complex64> {
        let d = self.degree as f64;
        let mut log_phi = z.ln() + self.lead.ln() / (d - 1.0);
        let mut zn = z;
        let mut weight = 1.0 / d;
        let mut escaped = false;
        for _ in 0..MAX_ESCAPE {
            let eps = self.excess(zn);
            if eps.norm() >= 1.0 {
                // The principal branch is not continuous along this orbit.
                return Err(Error::NotEscaped {
                    radius: self.radius,
                    iterations: MAX_ESCAPE,
                });
            }
            log_phi += (Complex64::new(1.0, 0.0) + eps).ln() * weight;
            if zn.norm() > self.radius {
                escaped = true;
            }
            if escaped && eps.norm() * weight < 1e-18 {
                return Ok(log_phi.exp());
            }
            zn = self.step(zn);
            if !(zn.re.is_finite() && zn.im.is_finite()) {
                return Ok(log_phi.exp());
            }
            weight /= d;
        }
        if escaped {
            Ok(log_phi.exp())
        } else {
            Err(Error::NotEscaped {
                radius: self.radius,
                iterations: MAX_ESCAPE,
            })
        }
    }

    /// `Φ'` by central differences with one Richardson step.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let h = FD_STEP * z.norm().max(1.0);
        let central = |h: f64| -> Result<Complex64> {
            let hz = Complex64::new(h, 0.0);
            Ok((self.coordinate(z + hz)? - self.coordinate(z - hz)?) / (2.0 * h))
        };
        let coarse = central(h)?;
        let fine = central(h / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// `ν = Φ·conj(Φ')/(conj(Φ)·Φ')`.
    pub fn beltrami(&self, z: Complex64) -> Result<Complex64> {
        let phi = self.coordinate(z)?;
        let dphi = self.derivative(z)?;
        let v = phi * dphi.conj() / (phi.conj() * dphi);
        Ok(v / v.norm())
    }
}

/// Böttcher coordinate or its invariant Beltrami coefficient as a field;
/// NaN where the orbit does not escape.
pub fn bottcher_field(poly: &RationalMap, kind: BottcherKind) -> Result<Field> {
    let b = Arc::new(Bottcher::new(poly)?);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    Ok(match kind {
        BottcherKind::Coordinate => Field::new(move |z| b.coordinate(z).unwrap_or(nan), Vec::new(), -1),
        BottcherKind::Beltrami => Field::new(move |z| b.beltrami(z).unwrap_or(nan), Vec::new(), 0),
    })
}
