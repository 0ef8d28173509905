//! The experiment registry.

use crate::config::{complex, ExperimentConfig};
use crate::report::{Assertion, Series, SeriesRow};
use crate::LabError;
use num_complex::Complex64;
use ruelle_core::ergodic::{
    cesaro_trace, dissipative_partial_sums, eigen_cesaro_ratio, ev_probe, ev_sequence, mixing_correlation,
    LattesDensity, PowerPlan, SeriesRecord, Tag,
};
use ruelle_core::hol::{admissible_points, eigen_spectrum, transfer_matrix};
use ruelle_core::julia::{bottcher_field, postcritical_approx, BottcherKind};
use ruelle_core::lattes::{lattes_invariants, lattes_residuals};
use ruelle_core::operators::{
    beltrami_apply, gamma, lp_operator, normalized_pullback, ruelle_apply, Direction, PowerMode,
};
use ruelle_core::quadrature::{duality_residual, integrate, integrate_many, l1_norm, Region};
use ruelle_core::{Field, RandomStream, RationalMap, SpherePoint};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub scalars: BTreeMap<String, f64>,
    pub series: Vec<Series>,
    pub assertions: Vec<Assertion>,
}

impl Outcome {
    fn scalar(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.insert(name.into(), value);
    }

    fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    fn series(&mut self, name: &str, records: &[SeriesRecord]) {
        self.series.push(Series {
            name: name.into(),
            rows: records.iter().map(SeriesRow::from).collect(),
        });
    }
}

pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub details: &'static str,
    pub run: fn(&ExperimentConfig) -> Result<Outcome, LabError>,
}

pub static EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "duality",
        summary: "∫_A μ·R*φ against ∫_{R⁻¹A} B_Rμ·φ, signed and modulus",
        details: "μ = z̄/(1+|z|²); φ = γ_v (v, default −1) or f = 1/s for a Lattès map.\n\
                  region: A (default disk(0,2)). Asserts residual ≤ 3 combined stderr,\n\
                  combined stderr ≤ 1e-2·|LHS| for both identities, and ‖R*φ‖₁ ≤ ‖φ‖₁ on ℂ.",
        run: duality,
    },
    Experiment {
        name: "lattes-residuals",
        summary: "R*f = f, |R*||f| = |f|, B_Rν = ν and L_p fixed points at random points",
        details: "map must be a Lattès map. points (default 200), p_list (default [2, 3]).\n\
                  Asserts every supremum residual ≤ 1e-7.",
        run: lattes_residuals_exp,
    },
    Experiment {
        name: "cesaro-trace",
        summary: "‖A_n γ_v‖₁ over n_list with the contraction bound",
        details: "v (default −1/3), n_list (default [1,2,4,8,16,32]), region (default plane).\n\
                  ‖γ_v‖₁ comes from an independent stream at 4× budget. With `eigenvalue`\n\
                  set, also asserts |R*γ_v − λγ_v| ≤ 1e-9 at 100 points and the closed form\n\
                  |1−λⁿ|/(n|1−λ|)·‖γ_v‖₁ within 3 combined stderr.",
        run: cesaro,
    },
    Experiment {
        name: "hol-spectrum",
        summary: "transfer matrix of R* on Hol(R) and its spectrum",
        details: "fixed_points: two finite fixed points moved to 0 and 1 (∞ must be fixed).\n\
                  Asserts spectral radius ≤ 1 + 1e-6. With `eigenvalue`, asserts a match\n\
                  within 1e-8. For a Lattès map, asserts eigenvalue 1 within 1e-6 and an\n\
                  eigenvector proportional to the transported residues of 1/s within 1e-6.",
        run: hol_spectrum,
    },
    Experiment {
        name: "ev-seq",
        summary: "E_v probe sequence with the quasihyperbolic proxy (exploratory)",
        details: "v (default −1/3), n_list (last entry is n_max, default 8). K is the\n\
                  postcritical set; ψ = conj(μ)·dist(z,K)⁻² with μ = z̄/(1+|z|²). Values are\n\
                  exploratory; the contraction bound |E_n| ≤ sup|μ|·‖γ_v‖₁ is asserted.",
        run: ev_seq,
    },
    Experiment {
        name: "mixing",
        summary: "ν(B ∩ R⁻ⁿA) − ν(A)ν(B) under the Lattès density",
        details: "map must be a Lattès map. region, region_b: A and B (defaults\n\
                  disk(0.5+0.5i, 0.4) and disk(−0.5−0.5i, 0.4)); n_list (default 0..=6);\n\
                  budget = ν-samples. Asserts |corr| ≤ 0.05 + 3 stderr at the last n.",
        run: mixing,
    },
    Experiment {
        name: "dissipative",
        summary: "partial sums Σ|R*|ⁿf for f = |γ_v| at basin points",
        details: "v (default −1), points (default 20) uniform in region (default disk(0, 0.3)),\n\
                  n_list (last entry is N, default 12). Asserts every tail |S_N − S_{N/2}| ≤ 1e-6.",
        run: dissipative,
    },
    Experiment {
        name: "lp-duality",
        summary: "R*∘R_* = Id and push_q∘pull_p = Id pointwise",
        details: "φ = γ_v (v, default 0.5+0.5i); points (default 200); p_list (default [2, 3]).\n\
                  Asserts both compositions within 1e-9 (relative to max(1, |φ|)). For a\n\
                  Lattès map, also asserts |R_{*p}ψ_p − ψ_p| ≤ 1e-7 at the same points.",
        run: lp_duality,
    },
    Experiment {
        name: "chiA",
        summary: "‖R*χ_A − χ_A‖₁ for a disk A",
        details: "region: A (default disk(0,1)). Asserts estimate − 3 stderr ≥ 0.1 and\n\
                  ‖R*χ_A‖₁ ≤ ‖χ_A‖₁ within 3 combined stderr.",
        run: chi_a,
    },
    Experiment {
        name: "bottcher",
        summary: "invariance of the Böttcher Beltrami coefficient",
        details: "map must be a polynomial. points (default 50) with 3 < |z| < 6.\n\
                  Asserts |B_Rν − ν| ≤ 1e-6; for z^d also |ν − z/z̄| ≤ 1e-10.",
        run: bottcher,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `z̄/(1+|z|²)`, bounded by 1/2.
fn test_mu() -> Field {
    Field::new(|z| z.conj() / (1.0 + z.norm_sqr()), Vec::new(), 0)
}

fn critical_values(r: &RationalMap) -> Result<Vec<Complex64>, LabError> {
    Ok(r.critical()?.critical_values.iter().filter_map(SpherePoint::finite).collect())
}

fn record(n: usize, value: Complex64, stderr: f64, tag: Tag) -> SeriesRecord {
    SeriesRecord { n, value, stderr, tag }
}

fn duality(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let r = cfg.map.build()?;
    let phi = match cfg.map.lattes_params()? {
        Some(p) => lattes_invariants(&p)?.f,
        None => gamma(cfg.v_or(c(-1.0, 0.0)))?,
    };
    let region = cfg.region_or(Region::disk(c(0.0, 0.0), 2.0));
    let rng = RandomStream::new(cfg.seed);
    let res = duality_residual(&r, &test_mu(), &phi, &region, cfg.budget, &rng.split(0))?;
    let mut out = Outcome::default();
    for (name, side) in [("signed", res.signed), ("modulus", res.modulus)] {
        out.scalar(format!("{name}.lhs_re"), side.lhs.value.re);
        out.scalar(format!("{name}.lhs_im"), side.lhs.value.im);
        out.scalar(format!("{name}.rhs_re"), side.rhs.value.re);
        out.scalar(format!("{name}.rhs_im"), side.rhs.value.im);
        out.scalar(format!("{name}.residual"), side.residual);
        out.scalar(format!("{name}.combined_stderr"), side.combined_stderr);
        out.check(Assertion::at_most(format!("{name}.residual"), side.residual, 3.0 * side.combined_stderr));
        out.check(Assertion::at_most(
            format!("{name}.combined_stderr"),
            side.combined_stderr,
            1e-2 * side.lhs.value.norm(),
        ));
    }
    let norms = integrate_many(
        &[ruelle_apply(&r, &phi, false).modulus(), phi.modulus()],
        &Region::WholePlane,
        (cfg.budget / 4).max(1),
        &rng.split(1),
    )?;
    contraction(&mut out, "contraction.ruelle", norms[0].value.re, norms[0].stderr, norms[1].value.re, norms[1].stderr);
    Ok(out)
}

fn contraction(out: &mut Outcome, name: &str, value: f64, se: f64, bound: f64, bound_se: f64) {
    out.scalar(format!("{name}.value"), value);
    out.scalar(format!("{name}.stderr"), se);
    out.scalar(format!("{name}.bound"), bound);
    out.scalar(format!("{name}.bound_stderr"), bound_se);
    out.check(Assertion::at_most(name, value, bound + 3.0 * se.hypot(bound_se)));
}

fn require_lattes(cfg: &ExperimentConfig) -> Result<ruelle_core::lattes::LattesParams, LabError> {
    cfg.map
        .lattes_params()?
        .ok_or_else(|| LabError::Config(format!("experiment {} needs a Lattès map", cfg.experiment)))
}

fn lattes_residuals_exp(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let p = require_lattes(cfg)?;
    let mut rng = RandomStream::new(cfg.seed);
    let report = lattes_residuals(&p, cfg.points.unwrap_or(200), &mut rng)?;
    let mut out = Outcome::default();
    out.scalar("points", report.points as f64);
    out.scalar("rejected", report.rejected as f64);
    out.check(Assertion::at_most("ruelle", report.ruelle, 1e-7));
    out.check(Assertion::at_most("ruelle_modulus", report.ruelle_modulus, 1e-7));
    out.check(Assertion::at_most("beltrami", report.beltrami, 1e-7));
    for (q, res) in &report.lp {
        out.check(Assertion::at_most(format!("lp.p={q}"), *res, 1e-7));
    }
    Ok(out)
}

fn cesaro(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let r = cfg.map.build()?;
    let v = cfg.v_or(c(-1.0 / 3.0, 0.0));
    let ns = cfg.n_list.clone().unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32]);
    let region = cfg.region_or(Region::WholePlane);
    let rng = RandomStream::new(cfg.seed);
    let plan = PowerPlan {
        seed: cfg.seed,
        ..Default::default()
    };
    let trace = cesaro_trace(&r, v, &ns, &region, cfg.budget, &rng.split(0), &plan)?;
    let g = gamma(v)?;
    let norm = l1_norm(&g, &region, 4 * cfg.budget, &rng.split(1))?;
    let mut out = Outcome::default();
    out.scalar("gamma_norm", norm.value.re);
    out.scalar("gamma_norm_stderr", norm.stderr);
    out.series("trace", &trace);
    for rec in &trace {
        contraction(
            &mut out,
            &format!("contraction.n={}", rec.n),
            rec.value.re,
            rec.stderr,
            norm.value.re,
            norm.stderr,
        );
    }
    if let Some(lambda) = cfg.eigenvalue.map(complex) {
        let rg = ruelle_apply(&r, &g, false);
        let mut avoid = vec![c(0.0, 0.0), c(1.0, 0.0), v];
        avoid.extend(critical_values(&r)?);
        let pts = admissible_points(&avoid, 100, &mut rng.split(2));
        let eig = pts
            .iter()
            .map(|&z| (rg.eval(z) - lambda * g.eval(z)).norm())
            .fold(0.0, f64::max);
        out.check(Assertion::at_most("eigenrelation", eig, 1e-9));
        let mut closed = Vec::with_capacity(trace.len());
        for rec in &trace {
            let ratio = eigen_cesaro_ratio(lambda, rec.n);
            let want = ratio * norm.value.re;
            let se = rec.stderr.hypot(ratio * norm.stderr);
            closed.push(record(rec.n, c(want, 0.0), ratio * norm.stderr, Tag::Asserted));
            out.check(Assertion::at_most(format!("closed_form.n={}", rec.n), (rec.value.re - want).abs(), 3.0 * se));
        }
        out.series("closed_form", &closed);
    }
    Ok(out)
}

fn hol_spectrum(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let r = cfg.map.build()?;
    let (map, m) = match cfg.normalization() {
        Some((p, q)) => {
            let (nr, m) = r.moebius_normalize(p, q, SpherePoint::Infinity)?;
            (nr, Some(m))
        }
        None => (r, None),
    };
    let tm = transfer_matrix(&map)?;
    let s = eigen_spectrum(&tm)?;
    let mut out = Outcome::default();
    out.scalar("dimension", tm.basis.len() as f64);
    out.scalar("reconstruction_residual", tm.reconstruction_residual);
    out.scalar("residue_disagreement", tm.residue_disagreement);
    let rows: Vec<SeriesRecord> = s
        .values
        .iter()
        .enumerate()
        .map(|(i, &l)| record(i, l, 0.0, Tag::Asserted))
        .collect();
    out.series("eigenvalues", &rows);
    out.check(Assertion::at_most("spectral_radius", s.spectral_radius(), 1.0 + 1e-6));
    if let Some(lambda) = cfg.eigenvalue.map(complex) {
        let k = s.nearest(lambda).expect("nonempty spectrum");
        out.check(Assertion::at_most("eigenvalue", (s.values[k] - lambda).norm(), 1e-8));
    }
    if let Some(p) = cfg.map.lattes_params()? {
        let k = s.nearest(c(1.0, 0.0)).expect("nonempty spectrum");
        out.check(Assertion::at_most("eigenvalue_one", (s.values[k] - 1.0).norm(), 1e-6));
        // 1/s has residue 1/s'(e) at each root e; an affine M sends it to
        // res/α at M(e).
        let m = m.unwrap_or_else(ruelle_core::MoebiusTransform::identity);
        if m.c.norm() != 0.0 {
            return Err(LabError::Config("normalization must fix ∞".into()));
        }
        let alpha = m.derivative(c(0.0, 0.0));
        let ds = p.cubic().derivative();
        let mut oracle = vec![c(0.0, 0.0); tm.basis.len()];
        for e in lattes_invariants(&p)?.roots {
            let image = m.apply(SpherePoint::Finite(e)).finite().expect("affine image");
            if let Some(i) = tm.basis.index_of(image) {
                oracle[i] = ds.eval(e).inv() / alpha;
            }
        }
        let v = &s.vectors[k];
        let (piv, _) = oracle
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("nonempty basis");
        let scale = oracle[piv] / v[piv];
        let err = oracle
            .iter()
            .zip(v)
            .map(|(o, x)| (o - x * scale).norm())
            .fold(0.0, f64::max)
            / oracle[piv].norm();
        out.check(Assertion::at_most("eigenvector", err, 1e-6));
    }
    Ok(out)
}

fn ev_seq(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let r = cfg.map.build()?;
    let v = cfg.v_or(c(-1.0 / 3.0, 0.0));
    let n_max = cfg.n_list.as_ref().and_then(|l| l.last().copied()).unwrap_or(8);
    let k = postcritical_approx(&r, 64)?;
    let mu = test_mu();
    let psi = ev_probe(&mu, &k);
    let rng = RandomStream::new(cfg.seed);
    let plan = PowerPlan {
        seed: cfg.seed,
        ..Default::default()
    };
    let seq = ev_sequence(&r, v, &psi, n_max, &k, cfg.budget, &rng.split(0), &plan)?;
    let norm = l1_norm(&gamma(v)?, &Region::WholePlane, cfg.budget, &rng.split(1))?;
    let mut out = Outcome::default();
    out.series("ev", &seq);
    out.scalar("gamma_norm", norm.value.re);
    for s in &seq {
        // |E_n| ≤ sup|μ|·‖A_n γ_v‖₁ ≤ ‖γ_v‖₁ / 2.
        contraction(
            &mut out,
            &format!("contraction.n={}", s.n),
            s.value.norm(),
            s.stderr,
            0.5 * norm.value.re,
            0.5 * norm.stderr,
        );
    }
    Ok(out)
}

fn mixing(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let p = require_lattes(cfg)?;
    let r = cfg.map.build()?;
    let a = cfg.region_or(Region::disk(c(0.5, 0.5), 0.4));
    let b = cfg
        .region_b
        .as_ref()
        .map_or(Region::disk(c(-0.5, -0.5), 0.4), |s| s.build());
    let ns = cfg.n_list.clone().unwrap_or_else(|| (0..=6).collect());
    let rng = RandomStream::new(cfg.seed);
    let sampler = LattesDensity::new(&p, 400_000, &rng.split(0))?;
    let corr = mixing_correlation(&r, &sampler, &a, &b, &ns, cfg.budget, &rng.split(1))?;
    let mut out = Outcome::default();
    out.scalar("mass", sampler.mass.value.re);
    out.scalar("mass_stderr", sampler.mass.stderr);
    out.series("correlation", &corr);
    if let Some(last) = corr.last() {
        out.check(Assertion::at_most(
            format!("correlation.n={}", last.n),
            last.value.re.abs(),
            0.05 + 3.0 * last.stderr,
        ));
    }
    Ok(out)
}

fn dissipative(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let r = cfg.map.build()?;
    let v = cfg.v_or(c(-1.0, 0.0));
    let f = gamma(v)?.modulus();
    let n = cfg.n_list.as_ref().and_then(|l| l.last().copied()).unwrap_or(12);
    let region = cfg.region_or(Region::disk(c(0.0, 0.0), 0.3));
    let Some((center, radius)) = region.bounding_disk() else {
        return Err(LabError::Config("dissipative needs a bounded region".into()));
    };
    let mut rng = RandomStream::new(cfg.seed);
    let count = cfg.points.unwrap_or(20);
    let mut pts = Vec::with_capacity(count);
    while pts.len() < count {
        let z = center + Complex64::from_polar(radius * rng.uniform().sqrt(), std::f64::consts::TAU * rng.uniform());
        if region.contains(z) {
            pts.push(z);
        }
    }
    let rows = dissipative_partial_sums(&r, &f, &pts, n, PowerMode::exact())?;
    let mut out = Outcome::default();
    let tails: Vec<SeriesRecord> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| record(i, c(row.tail, 0.0), 0.0, Tag::Asserted))
        .collect();
    out.series("tail", &tails);
    if let Some(first) = rows.first() {
        let sums: Vec<SeriesRecord> = first
            .partial_sums
            .iter()
            .enumerate()
            .map(|(k, s)| record(k, c(*s, 0.0), 0.0, Tag::Exploratory))
            .collect();
        out.series("partial_sums_first_point", &sums);
    }
    let worst = rows.iter().map(|r| r.tail).fold(0.0, f64::max);
    out.scalar("cauchy_points", rows.iter().filter(|r| r.cauchy).count() as f64);
    out.check(Assertion::at_most(format!("tail.N={n}"), worst, ruelle_core::ergodic::CAUCHY_TOL));
    Ok(out)
}

fn lp_duality(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let r = cfg.map.build()?;
    let v = cfg.v_or(c(0.5, 0.5));
    let phi = gamma(v)?;
    let p_list = cfg.p_list.clone().unwrap_or_else(|| vec![2.0, 3.0]);
    let mut avoid = vec![c(0.0, 0.0), c(1.0, 0.0), v];
    avoid.extend(critical_values(&r)?);
    let lattes = cfg.map.lattes_params()?.map(|p| lattes_invariants(&p)).transpose()?;
    if let Some(inv) = &lattes {
        avoid.extend(inv.roots.iter().copied());
    }
    let mut rng = RandomStream::new(cfg.seed);
    let pts = admissible_points(&avoid, cfg.points.unwrap_or(200), &mut rng);
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(1.0);
    let mut out = Outcome::default();

    let back = ruelle_apply(&r, &normalized_pullback(&r, &phi), false);
    let err = pts.iter().map(|&z| rel(back.eval(z), phi.eval(z))).fold(0.0, f64::max);
    out.check(Assertion::at_most("ruelle_after_pullback", err, 1e-9));
    for &p in &p_list {
        let q = p / (p - 1.0);
        let pulled = lp_operator(&r, p, &phi, Direction::Pull)?;
        let pushed = lp_operator(&r, q, &pulled, Direction::Push)?;
        let err = pts.iter().map(|&z| rel(pushed.eval(z), phi.eval(z))).fold(0.0, f64::max);
        out.check(Assertion::at_most(format!("push_q_after_pull_p.p={p}"), err, 1e-9));
        if let Some(inv) = &lattes {
            let psi = inv.psi(p)?;
            let image = lp_operator(&r, p, &psi, Direction::Pull)?;
            let err = pts.iter().map(|&z| (image.eval(z) - psi.eval(z)).norm()).fold(0.0, f64::max);
            out.check(Assertion::at_most(format!("psi_fixed.p={p}"), err, 1e-7));
        }
    }
    Ok(out)
}

fn chi_a(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let r = cfg.map.build()?;
    let a = cfg.region_or(Region::disk(c(0.0, 0.0), 1.0));
    if !a.is_bounded() {
        return Err(LabError::Config("chiA needs a bounded region".into()));
    }
    let inside = a.clone();
    let chi = Field::new(move |z| c(if inside.contains(z) { 1.0 } else { 0.0 }, 0.0), Vec::new(), i32::MAX);
    let pushed = ruelle_apply(&r, &chi, false);
    let rng = RandomStream::new(cfg.seed);
    let diff = integrate(&pushed.sub(&chi).modulus(), &Region::WholePlane, cfg.budget, &rng.split(0))?;
    let norms = integrate_many(&[pushed.modulus(), chi.clone()], &Region::WholePlane, cfg.budget, &rng.split(1))?;
    let mut out = Outcome::default();
    out.scalar("difference", diff.value.re);
    out.scalar("difference_stderr", diff.stderr);
    out.check(Assertion::at_least("difference_lower_bound", diff.value.re - 3.0 * diff.stderr, 0.1));
    contraction(&mut out, "contraction.ruelle", norms[0].value.re, norms[0].stderr, norms[1].value.re, norms[1].stderr);
    Ok(out)
}

fn bottcher(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    let r = cfg.map.build()?;
    let nu = bottcher_field(&r, BottcherKind::Beltrami)?;
    let pulled = beltrami_apply(&r, &nu, false);
    let mut rng = RandomStream::new(cfg.seed);
    let count = cfg.points.unwrap_or(50);
    let pts: Vec<Complex64> = (0..count)
        .map(|_| Complex64::from_polar(3.0 + 3.0 * rng.uniform(), std::f64::consts::TAU * rng.uniform()))
        .collect();
    let mut out = Outcome::default();
    let inv = pts.iter().map(|&z| (pulled.eval(z) - nu.eval(z)).norm()).fold(0.0, f64::max);
    out.check(Assertion::at_most("invariance", inv, 1e-6));
    let monomial = r.den().degree() == Some(0)
        && r.num().coeffs()[..r.degree()].iter().all(|c| c.norm() == 0.0)
        && r.num().leading() == r.den().coeff(0);
    if monomial {
        let err = pts.iter().map(|&z| (nu.eval(z) - z / z.conj()).norm()).fold(0.0, f64::max);
        out.check(Assertion::at_most("closed_form", err, 1e-10));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        for (i, a) in EXPERIMENTS.iter().enumerate() {
            assert!(EXPERIMENTS[i + 1..].iter().all(|b| b.name != a.name));
        }
        assert!(find("duality").is_some());
        assert!(find("nope").is_none());
    }
}
