//! Cross-module identities on the two reference maps and a few PCF maps.
//!
//! The PCF maps used for transfer matrices have strictly preperiodic
//! critical points; a periodic critical point puts a basis pole on a
//! critical point, which the residue table rejects.

use ruelle_core::eigen::spectrum;
use ruelle_core::hol::{eigen_spectrum, transfer_matrix};
use ruelle_core::julia::julia_sample;
use ruelle_core::lattes::{lattes_invariants, lattes_map, LattesParams};
use ruelle_core::linalg::CMatrix;
use ruelle_core::operators::{cesaro_average, gamma, ruelle_apply, PowerMode};
use ruelle_core::quadrature::{duality_residual, integrate_many, Region};
use ruelle_core::{Complex64, Field, RandomStream, RationalMap, SpherePoint};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn basilica() -> RationalMap {
    RationalMap::from_real(&[-1.0, 0.0, 1.0], &[1.0]).unwrap()
}

fn chebyshev() -> RationalMap {
    RationalMap::from_real(&[0.0, -2.0, 3.0], &[1.0]).unwrap()
}

/// `z² + i` (critical orbit `0 → i → −1+i → −i → −1+i`) moved so that two
/// finite fixed points sit at 0 and 1.
fn normalized_dendrite() -> RationalMap {
    let r = RationalMap::new(
        ruelle_core::Polynomial::new(vec![c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)]),
        ruelle_core::Polynomial::from_real(&[1.0]),
    )
    .unwrap();
    let s = (c(1.0, 0.0) - c(0.0, 4.0)).sqrt();
    let (m, _) = r
        .moebius_normalize(
            SpherePoint::Finite((s + 1.0) / 2.0),
            SpherePoint::Finite((-s + 1.0) / 2.0),
            SpherePoint::Infinity,
        )
        .unwrap();
    m
}

fn normalized_lattes() -> RationalMap {
    let r = lattes_map(&LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap()).unwrap();
    let x = (1.0 + 2.0 / 3f64.sqrt()).sqrt();
    let (m, _) = r
        .moebius_normalize(SpherePoint::real(x), SpherePoint::real(-x), SpherePoint::Infinity)
        .unwrap();
    m
}

#[test]
fn pcf_spectra_are_contractive() {
    for r in [chebyshev(), normalized_dendrite(), normalized_lattes()] {
        let tm = transfer_matrix(&r).unwrap();
        let s = eigen_spectrum(&tm).unwrap();
        assert!(s.spectral_radius() <= 1.0 + 1e-6, "{:?}", s.values);
        assert!(tm.reconstruction_residual <= 1e-6);
    }
}

#[test]
fn matrix_cesaro_matches_operator_cesaro() {
    let r = normalized_dendrite();
    let tm = transfer_matrix(&r).unwrap();
    let v = tm.basis.poles[0];
    let k = tm.basis.len();
    let mut e = vec![c(0.0, 0.0); k];
    e[0] = c(1.0, 0.0);
    let n = 5;
    let mut acc = vec![c(0.0, 0.0); k];
    let mut x = e.clone();
    for _ in 0..n {
        for (a, b) in acc.iter_mut().zip(&x) {
            *a += b / n as f64;
        }
        x = tm.entries.mul_vec(&x);
    }
    let from_matrix = tm.basis.expand(&acc).unwrap();
    let direct = cesaro_average(&r, n, &gamma(v).unwrap(), PowerMode::exact()).unwrap();
    for z in [c(0.3, 0.9), c(-1.2, 0.4), c(2.1, -0.7)] {
        let a = from_matrix.eval(z);
        let b = direct.eval(z);
        assert!((a - b).norm() <= 1e-8 * b.norm().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn contraction_chain_on_plane() {
    let rng = RandomStream::new(31);
    for (r, phi) in [
        (basilica(), gamma(c(-1.0, 0.0)).unwrap()),
        (chebyshev(), gamma(c(-1.0 / 3.0, 0.0)).unwrap()),
        (basilica(), gamma(c(0.5, 1.0)).unwrap()),
    ] {
        let fields = [
            ruelle_apply(&r, &phi, false).modulus(),
            ruelle_apply(&r, &phi.modulus(), true),
            phi.modulus(),
        ];
        let est = integrate_many(&fields, &Region::WholePlane, 60_000, &rng).unwrap();
        for w in est.windows(2) {
            let slack = 3.0 * w[0].stderr.hypot(w[1].stderr);
            assert!(w[0].value.re <= w[1].value.re + slack, "{:?}", est);
        }
    }
}

#[test]
fn characteristic_function_is_not_fixed() {
    let r = basilica();
    let chi = Field::new(|z| c(if z.norm() < 1.0 { 1.0 } else { 0.0 }, 0.0), Vec::new(), i32::MAX);
    let diff = ruelle_apply(&r, &chi, false).sub(&chi).modulus();
    let est = ruelle_core::quadrature::integrate(&diff, &Region::disk(c(0.0, 0.0), 2.5), 60_000, &RandomStream::new(2)).unwrap();
    assert!(est.value.re - 3.0 * est.stderr >= 0.1, "{est:?}");
}

#[test]
fn lattes_duality_modulus_side() {
    let p = LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap();
    let r = lattes_map(&p).unwrap();
    let f = lattes_invariants(&p).unwrap().f;
    let mu = Field::new(|z| z.conj() / (1.0 + z.norm_sqr()), Vec::new(), 0);
    let res = duality_residual(&r, &mu, &f, &Region::disk(c(0.0, 0.0), 2.0), 100_000, &RandomStream::new(8)).unwrap();
    for side in [res.signed, res.modulus] {
        assert!(side.residual <= 4.0 * side.combined_stderr, "{side:?}");
    }
}

#[test]
fn julia_samples_are_forward_invariant() {
    let r = basilica();
    let mut rng = RandomStream::new(12);
    let k = julia_sample(&r, 4000, 50, &mut rng).unwrap();
    let close = k
        .points()
        .iter()
        .filter_map(|p| p.finite())
        .filter(|&z| k.distance(r.value(z)) < 0.05)
        .count();
    assert!(close as f64 >= 0.95 * k.len() as f64, "{close}/{}", k.len());
}

#[test]
fn spectrum_of_companion_matrix() {
    // Companion matrix of (x − 1)(x + 0.5)(x − 0.25i).
    let roots = [c(1.0, 0.0), c(-0.5, 0.0), c(0.0, 0.25)];
    let e1: Complex64 = roots.iter().sum();
    let e2 = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2];
    let e3 = roots[0] * roots[1] * roots[2];
    let m = CMatrix::from_rows(&[
        vec![e1, -e2, e3],
        vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
    ]);
    let s = spectrum(&m).unwrap();
    for r in roots {
        let k = s.nearest(r).unwrap();
        assert!((s.values[k] - r).norm() < 1e-12);
    }
}
