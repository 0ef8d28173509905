//! Inverse branches: preimage fans, backward trees and sampled backward orbits.

use crate::error::{Error, Result};
use crate::rational::RationalMap;
use crate::rng::RandomStream;
use crate::roots;
use crate::sphere::SpherePoint;
use num_complex::Complex64;

/// Default cap on the number of leaves of an enumerated backward tree.
pub const TREE_CAP: u128 = 65_536;
/// Preimages closer than this (relative) form a multiplicity cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Distance to a critical value that raises the critical-fiber warning.
pub const CRITICAL_FIBER_TOL: f64 = 1e-8;

const SAMPLE_RETRIES: usize = 8;

/// Derivative `ζ' = 1/R'(ζ)` of an inverse branch at the base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BranchDerivative {
    Finite(Complex64),
    /// The preimage is a critical point; the branch is not differentiable.
    Critical,
    /// The preimage or the base is infinity; coordinates are chart-dependent.
    AtInfinity,
}

impl BranchDerivative {
    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            BranchDerivative::Finite(c) => Some(c),
            _ => None,
        }
    }

    /// The derivative, or a NaN marker for singular branches.
    #[inline]
    pub fn value_or_nan(&self) -> Complex64 {
        self.finite().unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch {
    pub point: SpherePoint,
    pub dzeta: BranchDerivative,
}

#[derive(Clone, Debug)]
pub struct PreimageFan {
    pub base: SpherePoint,
    /// Exactly `d` branches, repeated according to multiplicity.
    pub branches: Vec<Branch>,
    /// The base lies within [`CRITICAL_FIBER_TOL`] of a critical value.
    pub near_critical: bool,
}

impl PreimageFan {
    /// `Σ ζ_i'²`, i.e. `R*(1)` at the base.
    pub fn derivative_square_sum(&self) -> Complex64 {
        self.branches.iter().map(|b| {
            let d = b.dzeta.value_or_nan();
            d * d
        }).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackwardOrbit {
    /// `w_0 = z, …, w_n` with `R(w_k) = w_{k-1}`.
    pub points: Vec<SpherePoint>,
    /// `Π ζ'` along the path, `((Rⁿ)'(w_n))⁻¹`.
    pub weight: Complex64,
    pub sampling_prob: f64,
}

impl BackwardOrbit {
    pub fn end(&self) -> SpherePoint {
        *self.points.last().unwrap()
    }
}

/// Finite solutions of `P(w) - zQ(w) = 0` and the number of solutions at
/// infinity (from leading-coefficient cancellation).
pub fn fiber_roots(r: &RationalMap, z: Complex64) -> Result<(Vec<Complex64>, usize)> {
    let d = r.degree();
    let mut coeffs: Vec<Complex64> = (0..=d).map(|k| r.num().coeff(k) - z * r.den().coeff(k)).collect();
    let scale: f64 = coeffs.iter().map(|c| c.norm()).sum();
    let mut at_infinity = 0;
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= 1e-12 * scale {
        coeffs.pop();
        at_infinity += 1;
    }
    let roots = match coeffs.len() {
        1 => Vec::new(),
        2 => vec![-coeffs[0] / coeffs[1]],
        3 => quadratic(coeffs[2], coeffs[1], coeffs[0]).to_vec(),
        _ => roots::roots(&coeffs)?
            .into_iter()
            .map(|w| roots::polish(&coeffs, w, 2))
            .collect(),
    };
    Ok((roots, at_infinity))
}

/// Both roots of `a w² + b w + c` without cancellation.
#[inline]
pub fn quadratic(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - a * c * 4.0).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { b + disc } else { b - disc };
    let q = s * -0.5;
    if q.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [q / a, c / q]
}

/// The `d` preimages of `z` with branch derivatives.
pub fn preimages(r: &RationalMap, z: SpherePoint) -> Result<PreimageFan> {
    match z {
        SpherePoint::Infinity => {
            let (poles, _) = r.den().trim_relative(0.0);
            let finite = if poles.degree().unwrap_or(0) == 0 {
                Vec::new()
            } else {
                roots::roots(poles.coeffs())?
            };
            let mut branches: Vec<Branch> = finite
                .into_iter()
                .map(|w| Branch {
                    point: SpherePoint::Finite(w),
                    dzeta: BranchDerivative::AtInfinity,
                })
                .collect();
            while branches.len() < r.degree() {
                branches.push(Branch {
                    point: SpherePoint::Infinity,
                    dzeta: BranchDerivative::AtInfinity,
                });
            }
            let near_critical = r
                .critical()?
                .critical_values
                .iter()
                .any(|v| v.is_infinite());
            Ok(PreimageFan {
                base: z,
                branches,
                near_critical,
            })
        }
        SpherePoint::Finite(zc) => {
            let (finite, at_infinity) = fiber_roots(r, zc)?;
            let mut branches = Vec::with_capacity(r.degree());
            for (i, &w) in finite.iter().enumerate() {
                let clustered = finite
                    .iter()
                    .enumerate()
                    .any(|(j, &u)| j != i && (u - w).norm() <= CLUSTER_TOL * w.norm().max(1.0));
                let dzeta = if clustered {
                    BranchDerivative::Critical
                } else {
                    let (_, dr) = r.value_and_derivative(w);
                    let inv = dr.inv();
                    if dr.norm() == 0.0 || !(inv.re.is_finite() && inv.im.is_finite()) {
                        BranchDerivative::Critical
                    } else {
                        BranchDerivative::Finite(inv)
                    }
                };
                branches.push(Branch {
                    point: SpherePoint::Finite(w),
                    dzeta,
                });
            }
            for _ in 0..at_infinity {
                branches.push(Branch {
                    point: SpherePoint::Infinity,
                    dzeta: BranchDerivative::AtInfinity,
                });
            }
            let near_critical = r.critical()?.critical_values.iter().any(|v| {
                v.finite()
                    .is_some_and(|v| (v - zc).norm() <= CRITICAL_FIBER_TOL)
            });
            Ok(PreimageFan {
                base: z,
                branches,
                near_critical,
            })
        }
    }
}

/// Like [`preimages`] but refuses critical fibers.
pub fn preimages_strict(r: &RationalMap, z: SpherePoint) -> Result<PreimageFan> {
    let fan = preimages(r, z)?;
    if fan.near_critical {
        let distance = match z {
            SpherePoint::Finite(zc) => r
                .critical()?
                .critical_values
                .iter()
                .filter_map(|v| v.finite())
                .map(|v| (v - zc).norm())
                .fold(f64::INFINITY, f64::min),
            SpherePoint::Infinity => 0.0,
        };
        return Err(Error::CriticalFiber { distance });
    }
    Ok(fan)
}

/// All `dⁿ` backward orbits of depth `n`.
pub fn backward_tree(r: &RationalMap, z: SpherePoint, n: usize, cap: u128) -> Result<Vec<BackwardOrbit>> {
    let size = (r.degree() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::TreeTooLarge { size, cap });
    }
    let prob = 1.0 / size as f64;
    let mut level = vec![BackwardOrbit {
        points: vec![z],
        weight: Complex64::new(1.0, 0.0),
        sampling_prob: prob,
    }];
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * r.degree());
        for orbit in level {
            let fan = preimages(r, orbit.end())?;
            for b in fan.branches {
                let mut points = orbit.points.clone();
                points.push(b.point);
                next.push(BackwardOrbit {
                    points,
                    weight: orbit.weight * b.dzeta.value_or_nan(),
                    sampling_prob: prob,
                });
            }
        }
        level = next;
    }
    Ok(level)
}

/// One backward orbit with a uniformly random branch at each step.
///
/// A step that lands on a critical branch is redrawn at most a few times; if
/// every retry is critical the fiber is reported.
pub fn backward_sample(r: &RationalMap, z: SpherePoint, n: usize, rng: &mut RandomStream) -> Result<BackwardOrbit> {
    let d = r.degree();
    let mut points = Vec::with_capacity(n + 1);
    points.push(z);
    let mut weight = Complex64::new(1.0, 0.0);
    let mut current = z;
    for _ in 0..n {
        let fan = preimages(r, current)?;
        let mut chosen = None;
        for _ in 0..SAMPLE_RETRIES {
            let b = fan.branches[rng.index(d)];
            if b.dzeta != BranchDerivative::Critical {
                chosen = Some(b);
                break;
            }
        }
        let Some(b) = chosen else {
            return Err(Error::CriticalFiber { distance: 0.0 });
        };
        weight *= b.dzeta.value_or_nan();
        current = b.point;
        points.push(current);
    }
    Ok(BackwardOrbit {
        points,
        weight,
        sampling_prob: (d as f64).powi(-(n as i32)),
    })
}
