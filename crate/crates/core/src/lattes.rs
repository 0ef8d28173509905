//! Flexible Lattès maps from the Weierstrass duplication formula.
//!
//! With `s(z) = 4z³ − g2·z − g3`, the map `R` satisfies `R(℘(u)) = ℘(2u)`.
//! The flat differential `du²` descends to `f(z) dz² = dz²/s(z)`, so
//! `f(R)·R'² = 4f`. From this one identity: `R*f = f`, `|R*||f| = |f|`, the
//! line field `ν = s/|s|` is `B_R`-invariant, and `|f|^{1/p}·f/|f|` is fixed
//! by the pull-back `L_p` operator.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::operators::{beltrami_apply, lp_operator, ruelle_apply, Direction};
use crate::poly::Polynomial;
use crate::rational::RationalMap;
use crate::rng::RandomStream;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LattesParams {
    pub g2: Complex64,
    pub g3: Complex64,
}

impl LattesParams {
    pub fn new(g2: Complex64, g3: Complex64) -> Result<Self> {
        let p = Self { g2, g3 };
        p.validate()?;
        Ok(p)
    }

    pub fn discriminant(&self) -> Complex64 {
        self.g2.powu(3) - 27.0 * self.g3 * self.g3
    }

    fn validate(&self) -> Result<()> {
        let disc = self.discriminant();
        let scale = self.g2.norm().powi(3) + 27.0 * self.g3.norm_sqr();
        if !(disc.norm() > 1e-10 * scale) {
            return Err(Error::DegenerateLattice(format!("{disc}")));
        }
        Ok(())
    }

    /// `s(z) = 4z³ − g2·z − g3`.
    pub fn cubic(&self) -> Polynomial {
        Polynomial::new(vec![-self.g3, -self.g2, Complex64::new(0.0, 0.0), Complex64::new(4.0, 0.0)])
    }
}

/// `R(z) = (z⁴ + (g2/2)z² + 2g3·z + g2²/16) / (4z³ − g2·z − g3)`.
pub fn lattes_map(p: &LattesParams) -> Result<RationalMap> {
    p.validate()?;
    let num = Polynomial::new(vec![
        p.g2 * p.g2 / 16.0,
        2.0 * p.g3,
        p.g2 / 2.0,
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    ]);
    RationalMap::new(num, p.cubic())
}

/// `f = 1/s` and the invariant line field `ν = s/|s| = conj(f)/|f|`.
#[derive(Clone, Debug)]
pub struct LattesInvariants {
    pub params: LattesParams,
    pub f: Field,
    pub nu: Field,
    /// Roots of `s`: the poles of `f` and the finite critical values of `R`.
    pub roots: Vec<Complex64>,
}

impl LattesInvariants {
    /// `ψ_p = |f|^{1/p}·f/|f|`, the fixed point of the pull-back `L_p`
    /// operator. Its phase is `conj(ν)`.
    pub fn psi(&self, p: f64) -> Result<Field> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        let s = self.params.cubic();
        Ok(Field::new(
            move |z| {
                let f = s.eval(z).inv();
                f * f.norm().powf(1.0 / p - 1.0)
            },
            self.roots.clone(),
            0,
        ))
    }
}

pub fn lattes_invariants(p: &LattesParams) -> Result<LattesInvariants> {
    p.validate()?;
    let s = p.cubic();
    let roots = crate::roots::roots(s.coeffs())?;
    let sf = s.clone();
    let f = Field::new(move |z| sf.eval(z).inv(), roots.clone(), 3);
    let nu = Field::new(
        move |z| {
            let v = s.eval(z);
            v / v.norm()
        },
        Vec::new(),
        0,
    )
    .with_infinity(Complex64::new(f64::NAN, f64::NAN));
    Ok(LattesInvariants {
        params: *p,
        f,
        nu,
        roots,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LattesReport {
    pub points: usize,
    pub rejected: usize,
    /// `sup |R*f − f| / |f|`.
    pub ruelle: f64,
    /// `sup ||R*||f| − |f|| / |f|`.
    pub ruelle_modulus: f64,
    /// `sup |B_Rν − ν|`.
    pub beltrami: f64,
    /// `(p, sup |R_{*p}ψ_p − ψ_p|)`.
    pub lp: Vec<(f64, f64)>,
}

impl LattesReport {
    pub fn max_residual(&self) -> f64 {
        self.lp
            .iter()
            .map(|(_, r)| *r)
            .fold(self.ruelle.max(self.ruelle_modulus).max(self.beltrami), f64::max)
    }
}

/// Sampling disk for admissible points.
const SAMPLE_RADIUS: f64 = 3.0;
/// Minimum distance to poles and critical values.
const CLEARANCE: f64 = 0.1;

/// Supremum residuals of the fixed-point identities over `n_points` random
/// admissible points.
pub fn lattes_residuals(p: &LattesParams, n_points: usize, rng: &mut RandomStream) -> Result<LattesReport> {
    let r = lattes_map(p)?;
    let inv = lattes_invariants(p)?;
    let mut avoid = inv.roots.clone();
    avoid.extend(
        r.critical()?
            .critical_values
            .iter()
            .filter_map(SpherePoint::finite),
    );
    let rf = ruelle_apply(&r, &inv.f, false);
    let rf_mod = ruelle_apply(&r, &inv.f.modulus(), true);
    let bnu = beltrami_apply(&r, &inv.nu, false);
    let lps = [2.0, 3.0]
        .iter()
        .map(|&q| Ok((q, inv.psi(q)?, lp_operator(&r, q, &inv.psi(q)?, Direction::Pull)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut report = LattesReport {
        points: n_points,
        rejected: 0,
        ruelle: 0.0,
        ruelle_modulus: 0.0,
        beltrami: 0.0,
        lp: lps.iter().map(|(q, _, _)| (*q, 0.0)).collect(),
    };
    let mut taken = 0;
    while taken < n_points {
        let z = SAMPLE_RADIUS * rng.uniform().sqrt() * Complex64::from_polar(1.0, std::f64::consts::TAU * rng.uniform());
        if avoid.iter().any(|a| (z - a).norm() < CLEARANCE) {
            report.rejected += 1;
            continue;
        }
        taken += 1;
        let f = inv.f.eval(z);
        report.ruelle = report.ruelle.max((rf.eval(z) - f).norm() / f.norm());
        report.ruelle_modulus = report.ruelle_modulus.max((rf_mod.eval(z).re - f.norm()).abs() / f.norm());
        report.beltrami = report.beltrami.max((bnu.eval(z) - inv.nu.eval(z)).norm());
        for (slot, (_, psi, pulled)) in report.lp.iter_mut().zip(&lps) {
            slot.1 = slot.1.max((pulled.eval(z) - psi.eval(z)).norm());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Laurent coefficients of ℘: `℘(u) = u⁻² + Σ_{k≥2} c_k u^{2k−2}`.
    fn laurent(g2: Complex64, g3: Complex64, terms: usize) -> Vec<Complex64> {
        let mut cs = vec![c(0.0, 0.0); terms + 2];
        cs[2] = g2 / 20.0;
        cs[3] = g3 / 28.0;
        for k in 4..terms + 2 {
            let mut acc = c(0.0, 0.0);
            for m in 2..=k - 2 {
                acc += cs[m] * cs[k - m];
            }
            cs[k] = acc * 3.0 / (((2 * k + 1) * (k - 3)) as f64);
        }
        cs
    }

    fn wp(cs: &[Complex64], u: Complex64) -> (Complex64, Complex64) {
        let u2 = u * u;
        let mut value = u2.inv();
        let mut deriv = -2.0 * u2.inv() / u;
        for (k, ck) in cs.iter().enumerate().skip(2) {
            let e = 2 * k as i32 - 2;
            value += ck * u.powi(e);
            deriv += ck * e as f64 * u.powi(e - 1);
        }
        (value, deriv)
    }

    #[test]
    fn laurent_oracle_satisfies_the_differential_equation() {
        for (g2, g3) in [(c(4.0, 0.0), c(0.0, 0.0)), (c(4.0, 1.0), c(1.0, 0.0))] {
            let cs = laurent(g2, g3, 60);
            let u = c(0.21, 0.13);
            let (x, dx) = wp(&cs, u);
            let rhs = 4.0 * x * x * x - g2 * x - g3;
            assert!((dx * dx - rhs).norm() < 1e-9 * rhs.norm());
        }
    }

    #[test]
    fn duplication_against_laurent_oracle() {
        for (g2, g3) in [(c(4.0, 0.0), c(0.0, 0.0)), (c(4.0, 1.0), c(1.0, 0.0))] {
            let r = lattes_map(&LattesParams::new(g2, g3).unwrap()).unwrap();
            let cs = laurent(g2, g3, 80);
            let mut rng = RandomStream::new(5);
            for _ in 0..20 {
                let u = Complex64::from_polar(0.1 + 0.2 * rng.uniform(), std::f64::consts::TAU * rng.uniform());
                let (x, _) = wp(&cs, u);
                let (x2, _) = wp(&cs, 2.0 * u);
                assert!((r.value(x) - x2).norm() < 1e-9 * x2.norm(), "u={u}");
            }
        }
    }

    #[test]
    fn square_lattice_examples() {
        let p = LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap();
        let r = lattes_map(&p).unwrap();
        assert!((r.value(c(2.0, 0.0)) - c(25.0 / 24.0, 0.0)).norm() < 1e-14);
        let inv = lattes_invariants(&p).unwrap();
        assert!((inv.nu.eval(c(2.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((inv.f.eval(c(2.0, 0.0)) - c(1.0 / 24.0, 0.0)).norm() < 1e-15);
        let mut roots = inv.roots.clone();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (got, want) in roots.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-12);
        }
        // Partial fractions of 1/(4z(z-1)(z+1)).
        for (e, res) in [(0.0, -0.25), (1.0, 0.125), (-1.0, 0.125)] {
            let z = c(e, 0.0) + c(1e-7, 0.0);
            assert!(((z - c(e, 0.0)) * inv.f.eval(z) - c(res, 0.0)).norm() < 1e-6);
        }
        let (orbit, pcf) = r.postcritical_orbit(20, 1e-9).unwrap();
        assert!(pcf);
        assert_eq!(orbit.len(), 4);
    }

    #[test]
    fn degenerate_lattice() {
        // g2³ = 27 g3² with g2 = 3, g3 = 1.
        let err = LattesParams::new(c(3.0, 0.0), c(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateLattice(_)));
    }

    #[test]
    fn fixed_point_residuals() {
        for (g2, g3) in [(c(4.0, 0.0), c(0.0, 0.0)), (c(4.0, 1.0), c(1.0, 0.0))] {
            let p = LattesParams::new(g2, g3).unwrap();
            let report = lattes_residuals(&p, 200, &mut RandomStream::new(1)).unwrap();
            assert!(report.max_residual() <= 1e-7, "{report:?}");
        }
    }

    #[test]
    fn phase_alignment() {
        let inv = lattes_invariants(&LattesParams::new(c(4.0, 1.0), c(1.0, 0.0)).unwrap()).unwrap();
        let z = c(0.4, 1.3);
        let prod = inv.nu.eval(z) * inv.f.eval(z);
        assert!((prod - c(inv.f.eval(z).norm(), 0.0)).norm() < 1e-14);
    }
}
