//! Randomized invariants of the numerical core.

use proptest::prelude::*;
use ruelle_core::branches::{backward_tree, preimages};
use ruelle_core::ergodic::{mixing_correlation, phase_sequence, DensitySampler, LattesDensity};
use ruelle_core::julia::{bottcher_field, quasihyperbolic_weight, BottcherKind, Generator, PointSet};
use ruelle_core::lattes::{lattes_map, LattesParams};
use ruelle_core::operators::{
    beltrami_apply, gamma, lp_operator, normalized_pullback, power_profile, power_profile_mc, ruelle_apply, ruelle_at,
    Direction,
};
use ruelle_core::quadrature::Region;
use ruelle_core::{Complex64, Field, Polynomial, RandomStream, RationalMap, SpherePoint};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| c(re, im))
}

/// Maps of degree 2 or 3 with coefficients in the box `[-2, 2]²`.
fn rational_map() -> impl Strategy<Value = RationalMap> {
    (2usize..=3)
        .prop_flat_map(|d| (prop::collection::vec(complex(2.0), d + 1), 0..=d, prop::collection::vec(complex(2.0), d + 1)))
        .prop_filter_map("degenerate map", |(num, dq, den)| {
            let mut num = num;
            let top = num.len() - 1;
            if num[top].norm() < 0.1 {
                num[top] = c(1.0, 0.0);
            }
            let mut den: Vec<Complex64> = den.into_iter().take(dq + 1).collect();
            if den[dq].norm() < 0.1 {
                den[dq] = c(1.0, 0.0);
            }
            RationalMap::new(Polynomial::new(num), Polynomial::new(den)).ok()
        })
}

fn distance_to_critical_values(r: &RationalMap, z: Complex64) -> f64 {
    r.critical()
        .unwrap()
        .critical_values
        .iter()
        .filter_map(|v| v.finite())
        .map(|v| (v - z).norm())
        .fold(f64::INFINITY, f64::min)
}

fn basilica() -> RationalMap {
    RationalMap::from_real(&[-1.0, 0.0, 1.0], &[1.0]).unwrap()
}

fn lattes() -> RationalMap {
    lattes_map(&LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap()).unwrap()
}

fn test_maps() -> Vec<RationalMap> {
    vec![basilica(), lattes()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evaluation_matches_quotient(r in rational_map(), z in complex(3.0)) {
        let q = r.den().eval(z);
        prop_assume!(q.norm() > 1e-3);
        let direct = r.num().eval(z) / q;
        let v = r.value(z);
        prop_assert!((v - direct).norm() <= 1e-12 * direct.norm().max(1.0), "{v} vs {direct}");
        match r.evaluate(SpherePoint::Finite(z), false).0 {
            SpherePoint::Finite(w) => prop_assert!((w - direct).norm() <= 1e-12 * direct.norm().max(1.0)),
            SpherePoint::Infinity => prop_assert!(direct.norm() > 1e8),
        }
    }

    #[test]
    fn riemann_hurwitz(r in rational_map()) {
        let crit = r.critical().unwrap();
        prop_assert_eq!(crit.total_multiplicity(), 2 * r.degree() - 2);
    }

    #[test]
    fn normalization_fixes_three_points(cpar in complex(0.6)) {
        // z² + c has finite fixed points (1 ± sqrt(1 − 4c))/2 and ∞.
        let r = RationalMap::new(Polynomial::new(vec![cpar, c(0.0, 0.0), c(1.0, 0.0)]), Polynomial::from_real(&[1.0])).unwrap();
        let disc = (c(1.0, 0.0) - cpar * 4.0).sqrt();
        prop_assume!(disc.norm() > 0.05);
        let p = SpherePoint::Finite((c(1.0, 0.0) + disc) / 2.0);
        let q = SpherePoint::Finite((c(1.0, 0.0) - disc) / 2.0);
        let (m, _) = r.moebius_normalize(p, q, SpherePoint::Infinity).unwrap();
        prop_assert!(m.apply(SpherePoint::real(0.0)).approx_eq(&SpherePoint::real(0.0), 1e-12));
        prop_assert!(m.apply(SpherePoint::real(1.0)).approx_eq(&SpherePoint::real(1.0), 1e-12));
        prop_assert!(m.apply(SpherePoint::Infinity).is_infinite()
            || m.apply(SpherePoint::Infinity).chordal_distance(&SpherePoint::Infinity) <= 1e-12);
    }

    #[test]
    fn postcritical_orbit_grows_with_depth(cpar in complex(1.2), depth in 1usize..12) {
        let r = RationalMap::new(Polynomial::new(vec![cpar, c(0.0, 0.0), c(1.0, 0.0)]), Polynomial::from_real(&[1.0])).unwrap();
        let (small, _) = r.postcritical_orbit(depth, 1e-9).unwrap();
        let (large, _) = r.postcritical_orbit(depth + 1, 1e-9).unwrap();
        for x in &small {
            prop_assert!(large.iter().any(|y| x.approx_eq(y, 1e-9)), "{x} lost at depth {}", depth + 1);
        }
    }

    #[test]
    fn fiber_sum_is_ruelle_of_one(r in rational_map(), z in complex(2.0)) {
        prop_assume!(distance_to_critical_values(&r, z) > 1e-3);
        let fan = preimages(&r, SpherePoint::Finite(z)).unwrap();
        prop_assume!(fan.branches.iter().all(|b| !b.point.is_infinite()));
        let one = Field::constant(c(1.0, 0.0));
        let direct = ruelle_at(&r, &one, z, false);
        let sum = fan.derivative_square_sum();
        prop_assert!((sum - direct).norm() <= 1e-9 * direct.norm().max(1.0), "{sum} vs {direct}");
    }

    #[test]
    fn fiber_sum_of_square_map(z in complex(3.0)) {
        prop_assume!(z.norm() > 1e-3);
        let r = RationalMap::from_real(&[0.0, 0.0, 1.0], &[1.0]).unwrap();
        let fan = preimages(&r, SpherePoint::Finite(z)).unwrap();
        let want = (z * 2.0).inv();
        prop_assert!((fan.derivative_square_sum() - want).norm() <= 1e-12 * want.norm());
    }

    #[test]
    fn polished_preimages(r in rational_map(), z in complex(2.0)) {
        prop_assume!(distance_to_critical_values(&r, z) > 1e-4);
        let fan = preimages(&r, SpherePoint::Finite(z)).unwrap();
        for b in &fan.branches {
            if let Some(w) = b.point.finite() {
                let res = (r.value(w) - z).norm();
                prop_assert!(res < 1e-12 * z.norm().max(1.0), "residual {res:e} at {w}");
            }
        }
    }

    #[test]
    fn tree_weights_are_modulus_powers(z in complex(1.5), depth in 1usize..5) {
        let r = basilica();
        prop_assume!(distance_to_critical_values(&r, z) > 1e-2);
        let tree = backward_tree(&r, SpherePoint::Finite(z), depth, 1 << 20).unwrap();
        let sum: f64 = tree.iter().map(|o| o.weight.norm_sqr()).sum();
        let one = Field::constant(c(1.0, 0.0));
        let exact = power_profile(&r, &one, z, depth, true)[depth].re;
        prop_assert!((sum - exact).abs() <= 1e-10 * exact.max(1.0));
        let mut rng = RandomStream::new(depth as u64);
        let (mc, se) = power_profile_mc(&r, &one, z, depth, true, 4000, &mut rng);
        prop_assert!((mc[depth].re - exact).abs() <= 3.0 * se[depth] + 1e-12, "{} ± {} vs {exact}", mc[depth].re, se[depth]);
    }

    #[test]
    fn ruelle_modulus_bound(v in complex(2.0), z in complex(2.0), which in 0usize..2) {
        let r = &test_maps()[which];
        prop_assume!((v - c(0.0, 0.0)).norm() > 0.05 && (v - c(1.0, 0.0)).norm() > 0.05);
        prop_assume!(distance_to_critical_values(r, z) > 1e-3);
        let phi = gamma(v).unwrap();
        let signed = ruelle_apply(r, &phi, false).eval(z);
        let bound = ruelle_apply(r, &phi.modulus(), true).eval(z);
        prop_assume!(signed.norm().is_finite() && bound.re.is_finite());
        prop_assert!(signed.norm() <= bound.re * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn beltrami_modulus_commutes(z in complex(2.0), which in 0usize..2, a in complex(1.0)) {
        let r = &test_maps()[which];
        let mu = Field::new(move |w| (w - a) / ((w - a).norm() + 1.0), Vec::new(), 0);
        let lhs = beltrami_apply(r, &mu.modulus(), true).eval(z);
        let rhs = beltrami_apply(r, &mu, false).eval(z).norm();
        prop_assume!(rhs.is_finite());
        prop_assert!((lhs.re - rhs).abs() <= 1e-12);
    }

    #[test]
    fn pushforward_inverts_normalized_pullback(v in complex(2.0), z in complex(2.0), which in 0usize..2) {
        let r = &test_maps()[which];
        prop_assume!(v.norm() > 0.05 && (v - c(1.0, 0.0)).norm() > 0.05);
        prop_assume!(distance_to_critical_values(r, z) > 1e-3);
        prop_assume!(z.norm() > 0.05 && (z - c(1.0, 0.0)).norm() > 0.05 && (z - v).norm() > 0.05);
        let phi = gamma(v).unwrap();
        let back = ruelle_apply(r, &normalized_pullback(r, &phi), false).eval(z);
        let want = phi.eval(z);
        prop_assert!((back - want).norm() <= 1e-9 * want.norm().max(1.0), "{back} vs {want}");
    }

    #[test]
    fn lp_push_inverts_pull(z in complex(2.0), which in 0usize..2, p in 1.2f64..4.0, a in complex(1.0)) {
        let r = &test_maps()[which];
        prop_assume!(distance_to_critical_values(r, z) > 1e-3);
        let q = p / (p - 1.0);
        let phi = Field::new(move |w| (w - a) / (1.0 + w.norm_sqr()), Vec::new(), 1);
        let pulled = lp_operator(r, p, &phi, Direction::Pull).unwrap();
        let back = lp_operator(r, q, &pulled, Direction::Push).unwrap().eval(z);
        let want = phi.eval(z);
        prop_assert!((back - want).norm() <= 1e-9 * want.norm().max(1.0), "{back} vs {want}");
    }

    #[test]
    fn pushforward_stays_holomorphic(v in complex(2.0), z in complex(2.5)) {
        let r = basilica();
        prop_assume!(v.norm() > 0.1 && (v - c(1.0, 0.0)).norm() > 0.1);
        let pushed = ruelle_apply(&r, &gamma(v).unwrap(), false);
        // P_R = {0, −1} for z² − 1; the image also has poles at R(0), R(1), R(v).
        let avoid = [c(0.0, 0.0), c(-1.0, 0.0), r.value(c(1.0, 0.0)), r.value(v)];
        prop_assume!(avoid.iter().all(|p| (z - p).norm() >= 0.1));
        // Circle average of f·e^{iθ}: picks out ∂̄f, while a holomorphic f
        // only leaks its Taylor term of order N − 1.
        const N: usize = 16;
        let h = 0.01;
        let dbar = (0..N)
            .map(|j| {
                let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / N as f64);
                pushed.eval(z + e * h) * e
            })
            .sum::<Complex64>()
            / (N as f64 * h);
        prop_assert!(dbar.norm() <= 1e-6, "∂̄ residual {:e}", dbar.norm());
    }

    #[test]
    fn bottcher_nu_is_unimodular(cpar in complex(0.5), z in complex(8.0)) {
        prop_assume!(z.norm() > 3.0);
        let r = RationalMap::new(Polynomial::new(vec![cpar, c(0.0, 0.0), c(1.0, 0.0)]), Polynomial::from_real(&[1.0])).unwrap();
        let nu = bottcher_field(&r, BottcherKind::Beltrami).unwrap();
        let w = nu.eval(z);
        prop_assert!((w.norm() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn weight_grows_under_refinement(
        base in prop::collection::vec(complex(2.0), 1..10),
        extra in prop::collection::vec(complex(2.0), 1..10),
        z in complex(3.0),
    ) {
        let k = PointSet::new(base.iter().map(|&p| SpherePoint::Finite(p)).collect(), Generator::ForwardOrbit);
        let finer = k.union(&PointSet::new(extra.iter().map(|&p| SpherePoint::Finite(p)).collect(), Generator::ForwardOrbit));
        let (Ok(w0), Ok(w1)) = (quasihyperbolic_weight(SpherePoint::Finite(z), &k), quasihyperbolic_weight(SpherePoint::Finite(z), &finer)) else {
            return Ok(());
        };
        prop_assert!(w0 > 0.0);
        prop_assert!(w1 >= w0);
    }

    #[test]
    fn phases_are_unimodular(z in complex(2.0)) {
        let seq = match phase_sequence(&lattes(), SpherePoint::Finite(z), 12) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        for p in seq {
            prop_assert!((p.norm() - 1.0).abs() <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mixing_at_zero_is_empirical_covariance(
        ca in complex(1.0), ra in 0.2f64..0.8,
        cb in complex(1.0), rb in 0.2f64..0.8,
        seed in 0u64..1000,
    ) {
        let p = LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap();
        let rng = RandomStream::new(seed);
        let sampler = LattesDensity::new(&p, 100_000, &RandomStream::new(5)).unwrap();
        let a = Region::disk(ca, ra);
        let b = Region::disk(cb, rb);
        // One chunk: the estimator draws from rng.split(0).
        let budget = 4000;
        let rec = mixing_correlation(&lattes(), &sampler, &a, &b, &[0], budget, &rng).unwrap();
        let mut local = rng.split(0);
        let (mut na, mut nb, mut nab) = (0.0, 0.0, 0.0);
        for _ in 0..budget {
            let x = sampler.sample(&mut local);
            let (ia, ib) = (a.contains(x), b.contains(x));
            na += ia as u8 as f64;
            nb += ib as u8 as f64;
            nab += (ia && ib) as u8 as f64;
        }
        let m = budget as f64;
        let want = nab / m - (na / m) * (nb / m);
        prop_assert!((rec[0].value.re - want).abs() <= 1e-15);
    }
}
