//! Transfer operators as lazy field transformations.
//!
//! `R*` (Ruelle) pushes a field forward through the inverse branches,
//! `B_R` (Beltrami) pulls back a Beltrami coefficient, and the `L_p` family
//! interpolates between them. Images are [`Field`]s that solve for the
//! preimage fan at every evaluation.

use crate::branches::fiber_roots;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::rational::RationalMap;
use crate::rng::{point_label, RandomStream};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn nan() -> Complex64 {
    Complex64::new(f64::NAN, f64::NAN)
}

#[inline]
fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `(x1 - a)(x2 - a) / ((z - x1)(z - x2)(z - a))`; with `(x1, x2) = (0, 1)`
/// this is `γ_a`.
pub fn gamma_field(x1: SpherePoint, x2: SpherePoint, a: SpherePoint) -> Result<Field> {
    let (Some(x1), Some(x2), Some(a)) = (x1.finite(), x2.finite(), a.finite()) else {
        return Err(Error::InvalidArgument("γ poles must be finite".into()));
    };
    if x1 == x2 {
        return Err(Error::InvalidArgument("x1 and x2 must differ".into()));
    }
    if a == x1 || a == x2 {
        return Err(Error::ZeroField(format!("{a}")));
    }
    let k = (x1 - a) * (x2 - a);
    Ok(Field::new(move |z| k / ((z - x1) * (z - x2) * (z - a)), vec![x1, x2, a], 3))
}

/// `γ_v(z) = v(v-1) / (z(z-1)(z-v))`.
pub fn gamma(v: Complex64) -> Result<Field> {
    gamma_field(SpherePoint::real(0.0), SpherePoint::real(1.0), SpherePoint::Finite(v))
}

/// Residues of `γ_v` at `0`, `1`, `v`.
pub fn gamma_residues(v: Complex64) -> [Complex64; 3] {
    let one = Complex64::new(1.0, 0.0);
    [v - one, -v, one]
}

/// Finite images of `points` under `R`, plus the finite critical values.
fn pushed_poles(r: &RationalMap, points: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = points
        .iter()
        .filter_map(|&p| r.apply(SpherePoint::Finite(p)).finite())
        .collect();
    if let Ok(cd) = r.critical() {
        out.extend(cd.critical_values.iter().filter_map(|v| v.finite()));
    }
    out
}

/// `(R*φ)(z)`, or `(|R*|φ)(z)` with `modulus`. Non-finite at critical values
/// and at values whose fiber reaches infinity.
#[inline]
pub fn ruelle_at(r: &RationalMap, phi: &Field, z: Complex64, modulus: bool) -> Complex64 {
    let Ok((roots, at_infinity)) = fiber_roots(r, z) else {
        return nan();
    };
    if at_infinity > 0 {
        return nan();
    }
    let mut acc = ZERO;
    for w in roots {
        let (_, dr) = r.value_and_derivative(w);
        let dz = dr.inv();
        let factor = if modulus {
            Complex64::new(dz.norm_sqr(), 0.0)
        } else {
            dz * dz
        };
        acc += phi.eval(w) * factor;
    }
    acc
}

pub fn ruelle_apply(r: &RationalMap, phi: &Field, modulus: bool) -> Field {
    let map = Arc::new(r.clone());
    let f = phi.clone();
    let poles = pushed_poles(r, phi.poles());
    let cost = phi.cost_hint() * r.degree() as u64 + 8;
    Field::new(move |z| ruelle_at(&map, &f, z, modulus), poles, phi.decay_order().min(3)).with_cost(cost)
}

/// `μ(R)·conj(R')/R'`, or `μ(R)` with `modulus`; NaN where `R' = 0`.
pub fn beltrami_apply(r: &RationalMap, mu: &Field, modulus: bool) -> Field {
    let map = Arc::new(r.clone());
    let f = mu.clone();
    let cost = mu.cost_hint() + 2;
    Field::new(
        move |z| {
            let (v, dr) = map.value_and_derivative(z);
            let m = f.eval_extended(v);
            if modulus {
                return m;
            }
            if dr.norm() == 0.0 || !is_finite(dr) {
                return nan();
            }
            m * dr.conj() / dr
        },
        Vec::new(),
        0,
    )
    .with_cost(cost)
}

/// Poles of `φ∘R` from poles of `φ`, plus the poles of `R`.
fn pulled_poles(r: &RationalMap, phi: &Field) -> Vec<Complex64> {
    let mut out = Vec::new();
    for &p in phi.poles() {
        if let Ok((roots, _)) = fiber_roots(r, p) {
            out.extend(roots);
        }
    }
    if let Ok((roots, _)) = fiber_roots_at_infinity(r) {
        out.extend(roots);
    }
    out
}

fn fiber_roots_at_infinity(r: &RationalMap) -> Result<(Vec<Complex64>, usize)> {
    match r.den().degree() {
        Some(0) | None => Ok((Vec::new(), 0)),
        Some(_) => Ok((crate::roots::roots(r.den().coeffs())?, 0)),
    }
}

/// `R_*φ = φ(R)·R'² / d`, the right inverse of `R*`.
pub fn normalized_pullback(r: &RationalMap, phi: &Field) -> Field {
    let map = Arc::new(r.clone());
    let f = phi.clone();
    let d = r.degree() as f64;
    let poles = pulled_poles(r, phi);
    Field::new(
        move |z| {
            let (v, dr) = map.value_and_derivative(z);
            if !is_finite(v) {
                return nan();
            }
            f.eval(v) * dr * dr / d
        },
        poles,
        phi.decay_order().min(3),
    )
    .with_cost(phi.cost_hint() + 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    Pull,
    Push,
}

/// The `L_p` operators.
///
/// `Pull`: `d^{-1/p}·φ(R)·|R'|^{2/p}·R'/conj(R')`.
/// `Push`: `d^{-1/p}·Σ φ(ζ)·(ζ'/conj ζ')·|ζ'|^{2/q}` with `1/p + 1/q = 1`,
/// the adjoint of `Pull` for the same `p` under `∫ a·conj(b)`. Pushing with
/// the conjugate exponent inverts pulling: `push(q) ∘ pull(p) = Id`.
pub fn lp_operator(r: &RationalMap, p: f64, phi: &Field, direction: Direction) -> Result<Field> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let q = p / (p - 1.0);
    let map = Arc::new(r.clone());
    let f = phi.clone();
    let c = (r.degree() as f64).powf(-1.0 / p);
    Ok(match direction {
        Direction::Pull => {
            let poles = pulled_poles(r, phi);
            Field::new(
                move |z| {
                    let (v, dr) = map.value_and_derivative(z);
                    if !is_finite(v) || dr.norm() == 0.0 {
                        return nan();
                    }
                    let n = dr.norm();
                    f.eval(v) * (dr / dr.conj()) * (c * n.powf(2.0 / p))
                },
                poles,
                0,
            )
            .with_cost(phi.cost_hint() + 2)
        }
        Direction::Push => {
            let poles = pushed_poles(r, phi.poles());
            let cost = phi.cost_hint() * r.degree() as u64 + 8;
            Field::new(
                move |z| {
                    let Ok((roots, at_infinity)) = fiber_roots(&map, z) else {
                        return nan();
                    };
                    if at_infinity > 0 {
                        return nan();
                    }
                    let mut acc = ZERO;
                    for w in roots {
                        let (_, dr) = map.value_and_derivative(w);
                        let dz = dr.inv();
                        acc += f.eval(w) * (dz / dz.conj()) * dz.norm().powf(2.0 / q);
                    }
                    acc * c
                },
                poles,
                0,
            )
            .with_cost(cost)
        }
    })
}

/// How `(R*)ⁿ` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PowerMode {
    /// Full backward tree; fails with `TreeTooLarge` beyond `cap` leaves.
    Exact { cap: u128 },
    /// Mean of `samples` random backward paths.
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact levels up to `exact_depth`, random paths beyond.
    Hybrid { exact_depth: usize, samples: usize, seed: u64 },
}

impl PowerMode {
    pub fn exact() -> Self {
        PowerMode::Exact {
            cap: crate::branches::TREE_CAP,
        }
    }
}

/// Level sums `S_i(z) = ((R*)^i φ)(z)` for `i = 0..=depth` from one
/// breadth-first sweep of the backward tree.
pub fn power_profile(r: &RationalMap, phi: &Field, z: Complex64, depth: usize, modulus: bool) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(depth + 1);
    out.push(phi.eval(z));
    let mut level: Vec<(Complex64, Complex64)> = vec![(z, Complex64::new(1.0, 0.0))];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * r.degree());
        let mut sum = ZERO;
        for &(x, weight) in &level {
            match fiber_roots(r, x) {
                Ok((roots, 0)) => {
                    for w in roots {
                        let (_, dr) = r.value_and_derivative(w);
                        let wt = weight / dr;
                        let factor = if modulus {
                            Complex64::new(wt.norm_sqr(), 0.0)
                        } else {
                            wt * wt
                        };
                        sum += phi.eval(w) * factor;
                        next.push((w, wt));
                    }
                }
                _ => sum += nan(),
            }
        }
        out.push(sum);
        level = next;
    }
    out
}

/// Unbiased random-path estimates of `S_i(z)` for `i = 0..=depth`, with
/// standard errors; every path contributes to every level.
pub fn power_profile_mc(
    r: &RationalMap,
    phi: &Field,
    z: Complex64,
    depth: usize,
    modulus: bool,
    samples: usize,
    rng: &mut RandomStream,
) -> (Vec<Complex64>, Vec<f64>) {
    let d = r.degree();
    let mut sum = vec![ZERO; depth + 1];
    let mut sum_sq = vec![0.0; depth + 1];
    for _ in 0..samples {
        let mut x = z;
        let mut weight = Complex64::new(1.0, 0.0);
        let mut scale = 1.0;
        for i in 0..=depth {
            let factor = if modulus {
                Complex64::new(weight.norm_sqr(), 0.0)
            } else {
                weight * weight
            };
            let est = phi.eval(x) * factor * scale;
            sum[i] += est;
            sum_sq[i] += est.norm_sqr();
            if i == depth {
                break;
            }
            match fiber_roots(r, x) {
                Ok((roots, 0)) => {
                    let w = roots[rng.index(roots.len())];
                    let (_, dr) = r.value_and_derivative(w);
                    weight /= dr;
                    x = w;
                    scale *= d as f64;
                }
                _ => {
                    for j in i + 1..=depth {
                        sum[j] += nan();
                    }
                    break;
                }
            }
        }
    }
    let m = samples as f64;
    let means: Vec<Complex64> = sum.iter().map(|s| s / m).collect();
    let errs = means
        .iter()
        .zip(&sum_sq)
        .map(|(mean, sq)| {
            if samples < 2 {
                return f64::NAN;
            }
            let var = (sq / m - mean.norm_sqr()).max(0.0) * m / (m - 1.0);
            (var / m).sqrt()
        })
        .collect();
    (means, errs)
}

/// `S_i(z)` for `i < n` under the given mode.
pub fn profile(r: &RationalMap, phi: &Field, z: Complex64, n: usize, modulus: bool, mode: PowerMode) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let depth = n - 1;
    match mode {
        PowerMode::Exact { cap } => {
            check_tree(r, depth, cap)?;
            Ok(power_profile(r, phi, z, depth, modulus))
        }
        PowerMode::MonteCarlo { samples, seed } => {
            let mut rng = RandomStream::new(seed).split(point_label(z));
            Ok(power_profile_mc(r, phi, z, depth, modulus, samples, &mut rng).0)
        }
        PowerMode::Hybrid { exact_depth, samples, seed } => {
            let exact_levels = depth.min(exact_depth);
            let mut out = power_profile(r, phi, z, exact_levels, modulus);
            if depth > exact_levels {
                let mut rng = RandomStream::new(seed).split(point_label(z));
                let (mc, _) = power_profile_mc(r, phi, z, depth, modulus, samples, &mut rng);
                out.extend_from_slice(&mc[exact_levels + 1..]);
            }
            Ok(out)
        }
    }
}

fn check_tree(r: &RationalMap, depth: usize, cap: u128) -> Result<()> {
    let size = (r.degree() as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::TreeTooLarge { size, cap });
    }
    Ok(())
}

/// Declared poles of `(R*)^i φ` for `i ≤ n`.
fn power_poles(r: &RationalMap, phi: &Field, n: usize) -> Vec<Complex64> {
    let mut all = phi.poles().to_vec();
    let mut current = phi.poles().to_vec();
    for _ in 0..n {
        current = pushed_poles(r, &current);
        current.dedup_by(|a, b| (*a - *b).norm() <= 1e-12);
        current.truncate(256);
        all.extend_from_slice(&current);
    }
    all
}

/// `(R*)ⁿ φ`.
pub fn ruelle_power(r: &RationalMap, n: usize, phi: &Field, mode: PowerMode) -> Result<Field> {
    if let PowerMode::Exact { cap } = mode {
        check_tree(r, n, cap)?;
    }
    if n == 0 {
        return Ok(phi.clone());
    }
    let map = Arc::new(r.clone());
    let f = phi.clone();
    let poles = power_poles(r, phi, n);
    let cost = phi.cost_hint() * (r.degree() as u64).saturating_pow(n as u32);
    Ok(Field::new(
        move |z| match profile(&map, &f, z, n + 1, false, mode) {
            Ok(levels) => levels[n],
            Err(_) => nan(),
        },
        poles,
        phi.decay_order().min(3),
    )
    .with_cost(cost))
}

/// Random-path estimate of `((R*)ⁿ φ)(z)` with its standard error.
pub fn ruelle_power_mc(
    r: &RationalMap,
    n: usize,
    phi: &Field,
    z: Complex64,
    samples: usize,
    rng: &mut RandomStream,
) -> (Complex64, f64) {
    let (means, errs) = power_profile_mc(r, phi, z, n, false, samples, rng);
    (means[n], errs[n])
}

/// `A_n φ = (1/n) Σ_{i<n} (R*)^i φ`; `A_0` is the zero field.
pub fn cesaro_average(r: &RationalMap, n: usize, phi: &Field, mode: PowerMode) -> Result<Field> {
    if n == 0 {
        return Ok(Field::zero());
    }
    if let PowerMode::Exact { cap } = mode {
        check_tree(r, n - 1, cap)?;
    }
    if n == 1 {
        return Ok(phi.clone());
    }
    let map = Arc::new(r.clone());
    let f = phi.clone();
    let poles = power_poles(r, phi, n - 1);
    Ok(Field::new(
        move |z| match profile(&map, &f, z, n, false, mode) {
            Ok(levels) => levels.iter().sum::<Complex64>() / n as f64,
            Err(_) => nan(),
        },
        poles,
        phi.decay_order().min(3),
    )
    .with_cost(phi.cost_hint() * (r.degree() as u64).saturating_pow(n as u32)))
}

/// Cesàro averages `A_n` for every `n` in `ns` from one shared profile.
pub fn cesaro_from_profile(levels: &[Complex64], ns: &[usize]) -> Vec<Complex64> {
    let mut prefix = Vec::with_capacity(levels.len() + 1);
    let mut acc = ZERO;
    prefix.push(acc);
    for &s in levels {
        acc += s;
        prefix.push(acc);
    }
    ns.iter()
        .map(|&n| if n == 0 { ZERO } else { prefix[n] / n as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> RationalMap {
        RationalMap::from_real(&[0.0, 0.0, 1.0], &[1.0]).unwrap()
    }

    fn chebyshev() -> RationalMap {
        RationalMap::from_real(&[0.0, -2.0, 3.0], &[1.0]).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let g = gamma(c(2.0, 0.0)).unwrap();
        assert!((g.eval(c(3.0, 0.0)) - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let w = gamma_field(SpherePoint::real(0.0), SpherePoint::real(1.0), SpherePoint::real(2.0)).unwrap();
        assert_eq!(w.eval(c(0.3, 0.4)), g.eval(c(0.3, 0.4)));
        assert!(matches!(gamma(c(1.0, 0.0)), Err(Error::ZeroField(_))));
        assert!(matches!(gamma(c(0.0, 0.0)), Err(Error::ZeroField(_))));
        assert_eq!(g.decay_order(), 3);
    }

    #[test]
    fn gamma_residue_table() {
        let v = c(0.3, -0.7);
        let g = gamma(v).unwrap();
        let h = 1e-7;
        for (p, res) in [c(0.0, 0.0), c(1.0, 0.0), v].into_iter().zip(gamma_residues(v)) {
            let z = p + h;
            assert!((g.eval(z) * h - res).norm() < 1e-5);
        }
    }

    #[test]
    fn ruelle_examples() {
        let one = Field::constant(c(1.0, 0.0));
        let r1 = ruelle_apply(&square(), &one, false);
        let z = c(0.4, -1.1);
        assert!((r1.eval(z) - (z * 2.0).inv()).norm() < 1e-14);

        let g2 = gamma(c(2.0, 0.0)).unwrap();
        let v = ruelle_apply(&square(), &g2, false).eval(c(9.0, 0.0));
        assert!((v - c(1.0 / 120.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn chebyshev_eigenfunction() {
        let g = gamma(c(-1.0 / 3.0, 0.0)).unwrap();
        let rg = ruelle_apply(&chebyshev(), &g, false);
        for z in [c(0.7, 0.2), c(-2.0, 1.5), c(0.1, -0.05)] {
            assert!((rg.eval(z) + g.eval(z) * 0.5).norm() < 1e-12 * g.eval(z).norm().max(1.0));
        }
        let r4 = ruelle_power(&chebyshev(), 4, &g, PowerMode::exact()).unwrap();
        let z = c(0.37, 0.81);
        assert!((r4.eval(z) - g.eval(z) * 0.0625).norm() < 1e-12);
    }

    #[test]
    fn beltrami_examples() {
        let one = Field::constant(c(1.0, 0.0));
        let b = beltrami_apply(&square(), &one, false);
        assert!((b.eval(c(0.0, 1.0)) - c(-1.0, 0.0)).norm() < 1e-15);
        let mu = Field::new(|z| z.conj() / (1.0 + z.norm_sqr()), Vec::new(), 0);
        let bm = beltrami_apply(&square(), &mu, true);
        let z = c(0.3, 0.6);
        assert_eq!(bm.eval(z), mu.eval(z * z));
        assert!(b.eval(c(0.0, 0.0)).re.is_nan());
    }

    #[test]
    fn pullback_examples() {
        let one = Field::constant(c(1.0, 0.0));
        let p = normalized_pullback(&square(), &one);
        assert!((p.eval(c(1.0, 0.0)) - c(2.0, 0.0)).norm() < 1e-15);
        let g2 = gamma(c(2.0, 0.0)).unwrap();
        let back = ruelle_apply(&square(), &normalized_pullback(&square(), &g2), false);
        assert!((back.eval(c(3.0, 0.0)) - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lp_examples() {
        let one = Field::constant(c(1.0, 0.0));
        let pull = lp_operator(&square(), 2.0, &one, Direction::Pull).unwrap();
        assert!((pull.eval(c(1.0, 0.0)) - c(2f64.sqrt(), 0.0)).norm() < 1e-14);
        let g2 = gamma(c(2.0, 0.0)).unwrap();
        for p in [2.0, 3.0, 1.5] {
            let q = p / (p - 1.0);
            let pulled = lp_operator(&square(), p, &g2, Direction::Pull).unwrap();
            let back = lp_operator(&square(), q, &pulled, Direction::Push).unwrap();
            assert!((back.eval(c(3.0, 0.0)) - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
        }
        assert_eq!(
            lp_operator(&square(), 1.0, &one, Direction::Pull).unwrap_err(),
            Error::InvalidExponent(1.0)
        );
    }

    #[test]
    fn power_one_is_ruelle() {
        let g = gamma(c(0.5, 0.5)).unwrap();
        let r = RationalMap::from_real(&[-1.0, 0.0, 1.0], &[1.0]).unwrap();
        let p1 = ruelle_power(&r, 1, &g, PowerMode::exact()).unwrap();
        let a = ruelle_apply(&r, &g, false);
        let z = c(0.2, 0.9);
        assert!((p1.eval(z) - a.eval(z)).norm() < 1e-12);
    }

    #[test]
    fn cesaro_examples() {
        let g = gamma(c(-1.0 / 3.0, 0.0)).unwrap();
        let a1 = cesaro_average(&chebyshev(), 1, &g, PowerMode::exact()).unwrap();
        let z = c(0.6, 0.3);
        assert_eq!(a1.eval(z), g.eval(z));
        for n in [2usize, 5, 8] {
            let a = cesaro_average(&chebyshev(), n, &g, PowerMode::exact()).unwrap();
            let k = (1.0 - (-0.5f64).powi(n as i32)) / (1.5 * n as f64);
            assert!((a.eval(z) - g.eval(z) * k).norm() < 1e-12);
        }
        let a0 = cesaro_average(&chebyshev(), 0, &g, PowerMode::exact()).unwrap();
        assert_eq!(a0.eval(z), c(0.0, 0.0));
    }

    #[test]
    fn mc_profile_agrees_with_exact() {
        let r = RationalMap::from_real(&[-1.0, 0.0, 1.0], &[1.0]).unwrap();
        let g = gamma(c(0.5, 0.5)).unwrap();
        let z = c(0.3, 1.7);
        let exact = power_profile(&r, &g, z, 6, false);
        let mut rng = RandomStream::new(5);
        let (mc, err) = power_profile_mc(&r, &g, z, 6, false, 20_000, &mut rng);
        for i in 0..=6 {
            assert!((mc[i] - exact[i]).norm() <= 4.0 * err[i] + 1e-14, "level {i}");
        }
    }
}
