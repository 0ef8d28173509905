//! Transfer matrices of `R*` on the γ-basis of `Hol(R)`.
//!
//! For a map fixing `0, 1, ∞`, `R*γ_a` is rational with simple poles at
//! `R(a)`, `0`, `1` and the critical values, and decays like `z⁻³`. Such a
//! function is determined by its residues off `{0, 1}`: the coefficient of
//! `γ_b` is the residue at `b`. Residues are computed twice, from the local
//! branch formulas and from contour means, and the two must agree.

use crate::eigen::{spectrum, Spectrum};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::CMatrix;
use crate::operators::{gamma, ruelle_at};
use crate::rational::{RationalMap, MERGE_TOL};
use crate::rng::RandomStream;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Contour radius for residue extraction.
pub const CONTOUR_RADIUS: f64 = 1e-3;
const CONTOUR_NODES: usize = 64;
/// Allowed disagreement between analytic and contour residues.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
/// Abort threshold for pointwise column reconstruction.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;
const ORBIT_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueEntry {
    pub point: Complex64,
    /// `None` when the point has a higher-order critical contribution.
    pub analytic: Option<Complex64>,
    pub contour: Complex64,
}

impl ResidueEntry {
    pub fn value(&self) -> Complex64 {
        self.analytic.unwrap_or(self.contour)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueTable {
    pub entries: Vec<ResidueEntry>,
    /// `Σ res`, zero for decay order at least 2.
    pub sum: Complex64,
    /// `Σ res·pole`, zero for decay order at least 3.
    pub first_moment: Complex64,
    pub max_disagreement: f64,
}

impl ResidueTable {
    pub fn at(&self, z: Complex64, tol: f64) -> Complex64 {
        self.entries
            .iter()
            .filter(|e| (e.point - z).norm() <= tol)
            .map(ResidueEntry::value)
            .sum()
    }
}

/// Circular mean of `(z − x)·g(z)` on `|z − x| = ρ`.
pub fn contour_residue<G: Fn(Complex64) -> Complex64>(g: G, x: Complex64, rho: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..CONTOUR_NODES {
        let offset = Complex64::from_polar(rho, TAU * (k as f64 + 0.5) / CONTOUR_NODES as f64);
        acc += offset * g(x + offset);
    }
    acc / CONTOUR_NODES as f64
}

fn add_at(entries: &mut Vec<(Complex64, Option<Complex64>)>, point: Complex64, value: Option<Complex64>) {
    if let Some(slot) = entries.iter_mut().find(|(p, _)| (p - point).norm() <= MERGE_TOL * point.norm().max(1.0)) {
        slot.1 = match (slot.1, value) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
    } else {
        entries.push((point, value));
    }
}

/// Residues of `R*φ` at its candidate poles: the finite images of the poles
/// of `φ` and the finite critical values.
///
/// A regular pole `p` of `φ` contributes `res_p(φ)/R'(p)` at `R(p)`; a simple
/// critical point `c` contributes `φ(c)/R''(c)` at `R(c)`. Points touched by a
/// critical point of higher multiplicity, or one at infinity, get contour
/// values only.
pub fn pushforward_residues(r: &RationalMap, phi: &Field) -> Result<ResidueTable> {
    let mut entries: Vec<(Complex64, Option<Complex64>)> = Vec::new();
    for &p in phi.poles() {
        let (v, dv) = r.value_and_derivative(p);
        if !(v.re.is_finite() && v.im.is_finite()) || v.norm() > crate::sphere::CHART_RADIUS {
            continue;
        }
        if dv.norm() < 1e-8 {
            return Err(Error::InvalidArgument(format!("pole {p} of φ is a critical point")));
        }
        let res = contour_residue(|z| phi.eval(z), p, CONTOUR_RADIUS);
        add_at(&mut entries, v, Some(res / dv));
    }
    for (c, mult) in &r.critical()?.critical_points {
        let value = r.apply(*c);
        let Some(v) = value.finite() else { continue };
        let analytic = match (c, mult) {
            (SpherePoint::Finite(c), 1) => {
                let d2 = second_derivative(r, *c);
                Some(phi.eval(*c) / d2)
            }
            _ => None,
        };
        add_at(&mut entries, v, analytic);
    }

    let pushed = |z: Complex64| ruelle_at(r, phi, z, false);
    let mut table = ResidueTable {
        entries: Vec::with_capacity(entries.len()),
        sum: Complex64::new(0.0, 0.0),
        first_moment: Complex64::new(0.0, 0.0),
        max_disagreement: 0.0,
    };
    for (point, analytic) in entries {
        let contour = contour_residue(pushed, point, CONTOUR_RADIUS);
        if let Some(a) = analytic {
            let gap = (a - contour).norm() / a.norm().max(1.0);
            table.max_disagreement = table.max_disagreement.max(gap);
        }
        let entry = ResidueEntry {
            point,
            analytic,
            contour,
        };
        table.sum += entry.value();
        table.first_moment += entry.value() * point;
        table.entries.push(entry);
    }
    if table.max_disagreement > CROSS_CHECK_TOL {
        return Err(Error::ResidueMismatch(table.max_disagreement));
    }
    Ok(table)
}

/// `R''(c)` from `R = P/Q`: `(P''Q − PQ'')/Q² − 2Q'·R'/Q`.
fn second_derivative(r: &RationalMap, z: Complex64) -> Complex64 {
    let (p, dp, ddp) = r.num().eval_with_two_derivatives(z);
    let (q, dq, ddq) = r.den().eval_with_two_derivatives(z);
    let d1 = (dp * q - p * dq) / (q * q);
    (ddp * q - p * ddq) / (q * q) - 2.0 * dq * d1 / q
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolBasis {
    pub poles: Vec<Complex64>,
}

impl HolBasis {
    /// Finite postcritical points other than `0` and `1`.
    pub fn for_map(r: &RationalMap) -> Result<Self> {
        let (orbit, pcf) = r.postcritical_orbit(ORBIT_DEPTH, MERGE_TOL)?;
        if !pcf {
            return Err(Error::NotPcf(ORBIT_DEPTH));
        }
        let poles: Vec<Complex64> = orbit
            .iter()
            .filter_map(SpherePoint::finite)
            .filter(|a| a.norm() > MERGE_TOL && (a - 1.0).norm() > MERGE_TOL)
            .collect();
        if poles.is_empty() {
            return Err(Error::EmptyBasis);
        }
        Ok(Self { poles })
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn index_of(&self, z: Complex64) -> Option<usize> {
        self.poles.iter().position(|a| (a - z).norm() <= 1e-7 * a.norm().max(1.0))
    }

    /// `Σ c_a γ_a`.
    pub fn expand(&self, coeffs: &[Complex64]) -> Result<Field> {
        let mut acc = Field::zero();
        for (a, c) in self.poles.iter().zip(coeffs) {
            acc = acc.add(&gamma(*a)?.scale(*c));
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub basis: HolBasis,
    /// `entries[(b, a)]` is the coefficient of `γ_b` in `R*γ_a`.
    pub entries: CMatrix,
    pub reconstruction_residual: f64,
    pub residue_disagreement: f64,
}

fn check_normalized(r: &RationalMap) -> Result<()> {
    let ok = |z: f64| {
        r.apply(SpherePoint::real(z))
            .finite()
            .is_some_and(|w| (w - z).norm() <= 1e-9)
    };
    if !ok(0.0) || !ok(1.0) || !r.apply(SpherePoint::Infinity).is_infinite() {
        return Err(Error::InvalidArgument("transfer matrix needs a map fixing 0, 1 and ∞".into()));
    }
    Ok(())
}

pub fn transfer_matrix(r: &RationalMap) -> Result<TransferMatrix> {
    check_normalized(r)?;
    let basis = HolBasis::for_map(r)?;
    let n = basis.len();
    let mut entries = CMatrix::zeros(n, n);
    let mut disagreement: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let avoid = avoid_points(r, &basis)?;
    for (col, &a) in basis.poles.iter().enumerate() {
        let g = gamma(a)?;
        let table = pushforward_residues(r, &g)?;
        disagreement = disagreement.max(table.max_disagreement);
        for e in &table.entries {
            let value = e.value();
            match basis.index_of(e.point) {
                Some(row) => entries[(row, col)] += value,
                None => {
                    let at_fixed = e.point.norm() <= 1e-7 || (e.point - 1.0).norm() <= 1e-7;
                    if !at_fixed && value.norm() > 1e-9 {
                        return Err(Error::ExpansionResidual(value.norm()));
                    }
                }
            }
        }
        let expanded = basis.expand(&entries.column(col))?;
        let mut rng = RandomStream::new(0x5eed).split(col as u64);
        for z in admissible_points(&avoid, 50, &mut rng) {
            let direct = ruelle_at(r, &g, z, false);
            let err = (expanded.eval(z) - direct).norm() / direct.norm().max(1.0);
            residual = residual.max(err);
        }
    }
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::ExpansionResidual(residual));
    }
    Ok(TransferMatrix {
        basis,
        entries,
        reconstruction_residual: residual,
        residue_disagreement: disagreement,
    })
}

fn avoid_points(r: &RationalMap, basis: &HolBasis) -> Result<Vec<Complex64>> {
    let mut avoid = basis.poles.clone();
    avoid.push(Complex64::new(0.0, 0.0));
    avoid.push(Complex64::new(1.0, 0.0));
    avoid.extend(r.critical()?.critical_values.iter().filter_map(SpherePoint::finite));
    Ok(avoid)
}

/// Uniform points in `|z| < 3` at least 0.1 away from `avoid`.
pub fn admissible_points(avoid: &[Complex64], count: usize, rng: &mut RandomStream) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = 3.0 * rng.uniform().sqrt() * Complex64::from_polar(1.0, TAU * rng.uniform());
        if avoid.iter().all(|a| (z - a).norm() >= 0.1) {
            out.push(z);
        }
    }
    out
}

pub fn eigen_spectrum(m: &TransferMatrix) -> Result<Spectrum> {
    spectrum(&m.entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn chebyshev() -> RationalMap {
        RationalMap::from_real(&[0.0, -2.0, 3.0], &[1.0]).unwrap()
    }

    #[test]
    fn chebyshev_residue_table() {
        let g = gamma(c(-1.0 / 3.0, 0.0)).unwrap();
        let table = pushforward_residues(&chebyshev(), &g).unwrap();
        for (z, want) in [(0.0, 2.0 / 3.0), (1.0, -1.0 / 6.0), (-1.0 / 3.0, -0.5)] {
            assert!((table.at(c(z, 0.0), 1e-9) - c(want, 0.0)).norm() < 1e-9, "at {z}");
        }
        assert!(table.sum.norm() < 1e-8);
        assert!(table.first_moment.norm() < 1e-8);
        assert!(table.max_disagreement < 1e-8);
    }

    #[test]
    fn regular_pole_contribution() {
        // R = z² − 1: R'(1) = 2, so the residue 1 at z = 1 gives 1/2 at R(1) = 0.
        let r = RationalMap::from_real(&[-1.0, 0.0, 1.0], &[1.0]).unwrap();
        let phi = Field::new(|z| (z - 1.0).inv() - (z - 5.0).inv(), vec![c(1.0, 0.0), c(5.0, 0.0)], 2);
        let table = pushforward_residues(&r, &phi).unwrap();
        assert!((table.at(c(0.0, 0.0), 1e-9) - c(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn chebyshev_matrix() {
        let m = transfer_matrix(&chebyshev()).unwrap();
        assert_eq!(m.basis.len(), 1);
        assert!((m.entries[(0, 0)] - c(-0.5, 0.0)).norm() < 1e-8);
        assert!(m.reconstruction_residual < 1e-8);
        let s = eigen_spectrum(&m).unwrap();
        assert!((s.values[0] - c(-0.5, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn requires_normalization_and_pcf() {
        let r = RationalMap::from_real(&[-1.0, 0.0, 1.0], &[1.0]).unwrap();
        assert!(matches!(transfer_matrix(&r), Err(Error::InvalidArgument(_))));
        // z² fixes 0, 1, ∞ and its only critical values are 0 and ∞.
        let sq = RationalMap::from_real(&[0.0, 0.0, 1.0], &[1.0]).unwrap();
        assert_eq!(transfer_matrix(&sq).unwrap_err(), Error::EmptyBasis);
        // λw + (1 − λ)w² with λ = 1 + i√3 is conjugate to z² + 1, whose
        // critical orbit escapes.
        let lambda = c(1.0, 3f64.sqrt());
        let np = RationalMap::polynomial(crate::Polynomial::new(vec![c(0.0, 0.0), lambda, 1.0 - lambda])).unwrap();
        assert_eq!(transfer_matrix(&np).unwrap_err(), Error::NotPcf(ORBIT_DEPTH));
    }

    #[test]
    fn normalized_lattes_has_eigenvalue_one() {
        let params = crate::lattes::LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap();
        let r = crate::lattes::lattes_map(&params).unwrap();
        let x = (1.0 + 2.0 / 3f64.sqrt()).sqrt();
        let (nr, m) = r
            .moebius_normalize(SpherePoint::real(x), SpherePoint::real(-x), SpherePoint::Infinity)
            .unwrap();
        let tm = transfer_matrix(&nr).unwrap();
        assert_eq!(tm.basis.len(), 3);
        let s = eigen_spectrum(&tm).unwrap();
        let k = s.nearest(c(1.0, 0.0)).unwrap();
        assert!((s.values[k] - c(1.0, 0.0)).norm() < 1e-6, "{:?}", s.values);
        assert!(s.spectral_radius() <= 1.0 + 1e-6);
        // M(z) = αz + β transports res_e(1/s) to res_e/α at M(e).
        let alpha = m.derivative(c(0.0, 0.0));
        let mut oracle: Vec<Complex64> = vec![c(0.0, 0.0); 3];
        for (e, res) in [(0.0, -0.25), (1.0, 0.125), (-1.0, 0.125)] {
            let a = m.apply(SpherePoint::real(e)).finite().unwrap();
            oracle[tm.basis.index_of(a).unwrap()] = c(res, 0.0) / alpha;
        }
        let v = &s.vectors[k];
        let (piv, _) = oracle.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
        let scale = oracle[piv] / v[piv];
        for (o, x) in oracle.iter().zip(v) {
            assert!((o - x * scale).norm() <= 1e-6 * oracle[piv].norm());
        }
    }
}
