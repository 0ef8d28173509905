//! Rational maps of the Riemann sphere.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::poly::Polynomial;
use crate::roots;
use crate::sphere::{MoebiusTransform, SpherePoint, CHART_RADIUS};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Resultant threshold for unit-norm numerator and denominator.
pub const RESULTANT_TOL: f64 = 1e-10;
/// Default tolerance for merging orbit points.
pub const MERGE_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `R = P / Q` with `d = max(deg P, deg Q) >= 2` and no common root.
#[derive(Clone, Debug)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
    degree: usize,
    dnum: Polynomial,
    dden: Polynomial,
    // Infinity chart: R(1/w) = w^shift * num_rev(w) / den_rev(w).
    num_rev: Polynomial,
    den_rev: Polynomial,
    shift: i32,
    critical: OnceLock<Result<CriticalData>>,
}

#[derive(Clone, Debug)]
pub struct CriticalData {
    /// Critical points with multiplicity (local degree minus one).
    pub critical_points: Vec<(SpherePoint, usize)>,
    /// Distinct critical values.
    pub critical_values: Vec<SpherePoint>,
}

impl CriticalData {
    pub fn total_multiplicity(&self) -> usize {
        self.critical_points.iter().map(|(_, m)| m).sum()
    }
}

impl RationalMap {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        let (Some(dp), Some(dq)) = (num.degree(), den.degree()) else {
            return Err(Error::InvalidMap("numerator and denominator must be nonzero".into()));
        };
        let degree = dp.max(dq);
        if degree < 2 {
            return Err(Error::InvalidMap(format!("degree {degree} < 2")));
        }
        let res = normalized_resultant(&num, &den);
        // The unit-norm Sylvester determinant shrinks geometrically with
        // degree, so a small value is confirmed against the roots of Q.
        if res <= RESULTANT_TOL && shares_root(&num, &den)? {
            return Err(Error::InvalidMap(format!(
                "numerator and denominator share a root (resultant {res:e})"
            )));
        }
        Ok(Self {
            dnum: num.derivative(),
            dden: den.derivative(),
            num_rev: num.reversed(dp),
            den_rev: den.reversed(dq),
            shift: dq as i32 - dp as i32,
            critical: OnceLock::new(),
            num,
            den,
            degree,
        })
    }

    /// A polynomial map.
    pub fn polynomial(p: Polynomial) -> Result<Self> {
        Self::new(p, Polynomial::constant(Complex64::new(1.0, 0.0)))
    }

    pub fn from_real(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::from_real(num), Polynomial::from_real(den))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// `R(z)` and `R'(z)` at a finite point, using the infinity chart when
    /// `|z| > CHART_RADIUS`. Poles give non-finite values.
    #[inline]
    pub fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        if z.norm_sqr() <= CHART_RADIUS * CHART_RADIUS {
            let (p, dp) = self.num.eval_with_derivative(z);
            let (q, dq) = self.den.eval_with_derivative(z);
            let inv = q.inv();
            let r = p * inv;
            (r, (dp - r * dq) * inv)
        } else {
            let w = z.inv();
            let (a, da) = self.num_rev.eval_with_derivative(w);
            let (b, db) = self.den_rev.eval_with_derivative(w);
            let ratio = a / b;
            let dratio = (da * b - a * db) / (b * b);
            let k = self.shift;
            let g = w.powi(k) * ratio;
            let dg = w.powi(k) * dratio + ratio * (k as f64) * w.powi(k - 1);
            (g, -dg * w * w)
        }
    }

    #[inline]
    pub fn value(&self, z: Complex64) -> Complex64 {
        if z.norm_sqr() <= CHART_RADIUS * CHART_RADIUS {
            self.num.eval(z) / self.den.eval(z)
        } else {
            let w = z.inv();
            w.powi(self.shift) * self.num_rev.eval(w) / self.den_rev.eval(w)
        }
    }

    /// `R(z)` on the sphere and, on request, the derivative in the charts
    /// adapted to `z` and `R(z)` (`1/z` at infinity on either side).
    pub fn evaluate(&self, z: SpherePoint, with_derivative: bool) -> (SpherePoint, Option<Complex64>) {
        match z {
            SpherePoint::Infinity => {
                let a0 = self.num_rev.coeff(0);
                let b0 = self.den_rev.coeff(0);
                let k = self.shift;
                if k >= 0 {
                    let value = if k == 0 { a0 / b0 } else { ZERO };
                    let d = with_derivative.then(|| chart_derivative_at_zero(k as usize, &self.num_rev, &self.den_rev));
                    (SpherePoint::Finite(value), d)
                } else {
                    let d = with_derivative.then(|| chart_derivative_at_zero((-k) as usize, &self.den_rev, &self.num_rev));
                    (SpherePoint::Infinity, d)
                }
            }
            SpherePoint::Finite(z) => {
                if z.norm() <= CHART_RADIUS && self.den.eval(z) == ZERO {
                    let d = with_derivative.then(|| self.dden.eval(z) / self.num.eval(z));
                    return (SpherePoint::Infinity, d);
                }
                let (r, dr) = self.value_and_derivative(z);
                let image = SpherePoint::new(r);
                (image, with_derivative.then_some(dr))
            }
        }
    }

    /// `R'` in the chart adapted to `z` (see [`RationalMap::evaluate`]).
    pub fn multiplier(&self, z: SpherePoint) -> Complex64 {
        self.evaluate(z, true).1.unwrap()
    }

    pub fn apply(&self, z: SpherePoint) -> SpherePoint {
        self.evaluate(z, false).0
    }

    /// `W = P'Q - PQ'`, whose roots are the finite critical points.
    pub fn wronskian(&self) -> Polynomial {
        &(&self.dnum * &self.den) - &(&self.num * &self.dden)
    }

    /// Cached [`RationalMap::critical_data`].
    pub fn critical(&self) -> Result<&CriticalData> {
        self.critical
            .get_or_init(|| self.critical_data())
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn critical_data(&self) -> Result<CriticalData> {
        let (w, _) = self.wronskian().trim_relative(1e-12);
        let finite_count = w.degree().unwrap_or(0);
        let raw = roots::roots(w.coeffs())?;
        let mut points: Vec<(SpherePoint, usize)> = cluster(&raw, 1e-6)
            .into_iter()
            .map(|(z, m)| {
                let z = if m == 1 { roots::polish(w.coeffs(), z, 2) } else { z };
                (SpherePoint::Finite(z), m)
            })
            .collect();
        let at_infinity = 2 * self.degree - 2 - finite_count;
        if at_infinity > 0 {
            points.push((SpherePoint::Infinity, at_infinity));
        }
        let mut values: Vec<SpherePoint> = Vec::new();
        for (c, _) in &points {
            let v = self.orbit_step(*c, MERGE_TOL).unwrap_or(SpherePoint::Infinity);
            if !values.iter().any(|u| u.approx_eq(&v, MERGE_TOL)) {
                values.push(v);
            }
        }
        Ok(CriticalData {
            critical_points: points,
            critical_values: values,
        })
    }

    /// All `d + 1` fixed points with multiplicity.
    pub fn fixed_points(&self) -> Result<Vec<SpherePoint>> {
        let shifted = &Polynomial::identity() * &self.den;
        let (f, _) = (&self.num - &shifted).trim_relative(1e-12);
        let finite = f.degree().unwrap_or(0);
        let mut out: Vec<SpherePoint> = roots::roots(f.coeffs())?
            .into_iter()
            .map(|z| SpherePoint::Finite(roots::polish(f.coeffs(), z, 2)))
            .collect();
        for _ in finite..self.degree + 1 {
            out.push(SpherePoint::Infinity);
        }
        Ok(out)
    }

    /// Conjugate by the Möbius map `M` with `M(p) = 0`, `M(q) = 1`, `M(r) = ∞`.
    pub fn moebius_normalize(
        &self,
        p: SpherePoint,
        q: SpherePoint,
        r: SpherePoint,
    ) -> Result<(RationalMap, MoebiusTransform)> {
        let pts = [p, q, r];
        for i in 0..3 {
            for j in i + 1..3 {
                if pts[i].chordal_distance(&pts[j]) <= MERGE_TOL {
                    return Err(Error::DegenerateFixedPoints);
                }
            }
            if self.apply(pts[i]).chordal_distance(&pts[i]) > 1e-6 {
                return Err(Error::InvalidArgument(format!("{} is not a fixed point", pts[i])));
            }
        }
        let m = MoebiusTransform::from_three_points(p, q, r)?;
        Ok((self.conjugate(&m)?, m))
    }

    /// `M ∘ R ∘ M⁻¹`, scaled so the denominator's leading coefficient is 1.
    pub fn conjugate(&self, m: &MoebiusTransform) -> Result<RationalMap> {
        let inv = m.inverse();
        let x = Polynomial::new(vec![inv.b, inv.a]);
        let y = Polynomial::new(vec![inv.d, inv.c]);
        let (p, q) = self.homogeneous_substitute(&x, &y);
        let num = &p.scale(m.a) + &q.scale(m.b);
        let den = &p.scale(m.c) + &q.scale(m.d);
        finish_normalized(num, den)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RationalMap) -> Result<RationalMap> {
        let (p, q) = self.homogeneous_substitute(&other.num, &other.den);
        // Composing in homogeneous form may leave both sides padded by the
        // degree mismatch of `other`; trimming handles it.
        finish_normalized(p, q)
    }

    pub fn iterate(&self, n: usize) -> Result<RationalMap> {
        if n == 0 {
            return Err(Error::InvalidArgument("the identity is not a valid map".into()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// `(Σ p_k x^k y^{d-k}, Σ q_k x^k y^{d-k})` for polynomials `x`, `y`.
    fn homogeneous_substitute(&self, x: &Polynomial, y: &Polynomial) -> (Polynomial, Polynomial) {
        let d = self.degree;
        let xs: Vec<Polynomial> = (0..=d).map(|k| x.pow(k)).collect();
        let ys: Vec<Polynomial> = (0..=d).map(|k| y.pow(k)).collect();
        let mut p = Polynomial::zero();
        let mut q = Polynomial::zero();
        for k in 0..=d {
            let basis = &xs[k] * &ys[d - k];
            p = &p + &basis.scale(self.num.coeff(k));
            q = &q + &basis.scale(self.den.coeff(k));
        }
        (p, q)
    }

    /// One orbit step with pole snapping: a finite point where `|Q|` is below
    /// `tol` times its rounding scale maps to infinity. `None` when the value overflows without a
    /// pole (an escaping orbit).
    fn orbit_step(&self, x: SpherePoint, tol: f64) -> Option<SpherePoint> {
        match x {
            SpherePoint::Infinity => Some(self.apply(x)),
            SpherePoint::Finite(z) => {
                let p = self.num.eval(z);
                let q = self.den.eval(z);
                if !(p.re.is_finite() && p.im.is_finite()) {
                    return None;
                }
                let q_scale: f64 = self
                    .den
                    .coeffs()
                    .iter()
                    .rev()
                    .fold(0.0, |acc, c| acc * z.norm() + c.norm());
                if q.norm() <= tol * q_scale {
                    return Some(SpherePoint::Infinity);
                }
                let v = p / q;
                (v.re.is_finite() && v.im.is_finite()).then_some(SpherePoint::Finite(v))
            }
        }
    }

    /// Forward orbits of the critical values up to `depth` points each.
    ///
    /// Each orbit is followed until it revisits one of its own points within
    /// `merge_tol`; `pcf` is true when every orbit closed before `depth`.
    pub fn postcritical_orbit(&self, depth: usize, merge_tol: f64) -> Result<(Vec<SpherePoint>, bool)> {
        let crit = self.critical()?;
        let mut set: Vec<SpherePoint> = Vec::new();
        let mut pcf = true;
        for &v in &crit.critical_values {
            let mut orbit: Vec<SpherePoint> = Vec::new();
            let mut x = Some(v);
            let mut closed = false;
            while let Some(pt) = x {
                if orbit.iter().any(|o| o.approx_eq(&pt, merge_tol)) {
                    closed = true;
                    break;
                }
                if orbit.len() == depth {
                    break;
                }
                orbit.push(pt);
                x = self.orbit_step(pt, merge_tol);
            }
            pcf &= closed;
            for pt in orbit {
                if !set.iter().any(|o| o.approx_eq(&pt, merge_tol)) {
                    set.push(pt);
                }
            }
        }
        Ok((set, pcf))
    }
}

/// Derivative at `w = 0` of `w^m A(w) / B(w)`.
fn chart_derivative_at_zero(m: usize, a: &Polynomial, b: &Polynomial) -> Complex64 {
    let (a0, a1, b0, b1) = (a.coeff(0), a.coeff(1), b.coeff(0), b.coeff(1));
    match m {
        0 => (a1 * b0 - a0 * b1) / (b0 * b0),
        1 => a0 / b0,
        _ => ZERO,
    }
}

fn finish_normalized(num: Polynomial, den: Polynomial) -> Result<RationalMap> {
    let scale = num.norm().max(den.norm());
    let num = num.chop(1e-14 * scale);
    let den = den.chop(1e-14 * scale);
    let lead = den.leading();
    if lead == ZERO {
        return Err(Error::InvalidMap("denominator vanished after conjugation".into()));
    }
    let s = lead.inv();
    RationalMap::new(num.scale(s), den.scale(s))
}

/// Groups roots lying within `tol·max(1,|z|)` of each other; returns cluster
/// centroids with sizes.
pub(crate) fn cluster(points: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    let mut used = vec![false; points.len()];
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![points[i]];
        // Transitive closure so chains of a spread cluster merge.
        let mut k = 0;
        while k < members.len() {
            let c = members[k];
            for j in 0..points.len() {
                if !used[j] && (points[j] - c).norm() <= tol * c.norm().max(1.0) {
                    used[j] = true;
                    members.push(points[j]);
                }
            }
            k += 1;
        }
        let n = members.len();
        let centroid = members.iter().sum::<Complex64>() / n as f64;
        out.push((centroid, n));
    }
    out
}

/// True if `P` nearly vanishes (relative to its rounding floor scale) at
/// some root of `Q`.
fn shares_root(p: &Polynomial, q: &Polynomial) -> Result<bool> {
    if q.degree().unwrap_or(0) == 0 {
        return Ok(false);
    }
    for beta in roots::roots(q.coeffs())? {
        let scale: f64 = p
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * beta.norm().powi(k as i32))
            .sum();
        if p.eval(beta).norm() <= 1e-8 * scale {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `|Res(P, Q)|` after scaling both to unit coefficient norm.
pub fn normalized_resultant(p: &Polynomial, q: &Polynomial) -> f64 {
    let (m, n) = (p.degree().unwrap_or(0), q.degree().unwrap_or(0));
    if m + n == 0 {
        return 1.0;
    }
    let pn = p.scale(Complex64::new(1.0 / p.norm(), 0.0));
    let qn = q.scale(Complex64::new(1.0 / q.norm(), 0.0));
    let size = m + n;
    let mut s = CMatrix::zeros(size, size);
    // Sylvester rows hold descending coefficients.
    for i in 0..n {
        for k in 0..=m {
            s[(i, i + k)] = pn.coeff(m - k);
        }
    }
    for i in 0..m {
        for k in 0..=n {
            s[(n + i, i + k)] = qn.coeff(n - k);
        }
    }
    s.determinant().norm()
}
