//! Numerical probes of ergodic behavior: Cesàro norm traces, `E_v`
//! sequences, degenerating-sequence verdicts, dissipative partial sums,
//! mixing correlations and derivative phases.
//!
//! Only statements with a closed form behind them are asserted; everything
//! else is reported with the `Exploratory` tag.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::hol::transfer_matrix;
use crate::julia::PointSet;
use crate::lattes::{lattes_invariants, LattesParams};
use crate::operators::{cesaro_from_profile, gamma, power_profile, power_profile_mc, PowerMode};
use crate::quadrature::{integrate_many, integrate_with, IntegralEstimate, QuadratureOptions, Region};
use crate::rational::{RationalMap, MERGE_TOL};
use crate::rng::{point_label, RandomStream};
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Asserted,
    Exploratory,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub n: usize,
    pub value: Complex64,
    pub stderr: f64,
    pub tag: Tag,
}

impl SeriesRecord {
    fn from_estimate(n: usize, e: &IntegralEstimate, tag: Tag) -> Self {
        Self {
            n,
            value: e.value,
            stderr: e.stderr,
            tag,
        }
    }
}

/// How the levels `(R*)^i γ_v` are evaluated at a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerPlan {
    /// Levels up to this depth come from the full backward tree.
    pub exact_depth: usize,
    /// Random paths per node for deeper levels when no finite `Hol(R)`
    /// representation is available; 0 makes deep levels an error.
    pub tail_samples: usize,
    pub seed: u64,
}

impl Default for PowerPlan {
    fn default() -> Self {
        Self {
            exact_depth: 6,
            tail_samples: 256,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
enum Tail {
    None,
    /// `coeffs[j]` expands level `exact_depth + 1 + j` in the γ-basis.
    Hol { basis: Vec<Complex64>, coeffs: Vec<Vec<Complex64>> },
    MonteCarlo { samples: usize, seed: u64 },
}

/// Evaluates `S_i(z) = ((R*)^i γ_v)(z)` for `i < levels`.
#[derive(Clone, Debug)]
pub struct LevelEvaluator {
    map: RationalMap,
    phi: Field,
    levels: usize,
    exact_depth: usize,
    tail: Tail,
}

impl LevelEvaluator {
    pub fn for_gamma(r: &RationalMap, v: Complex64, levels: usize, plan: &PowerPlan) -> Result<Self> {
        let phi = gamma(v)?;
        let exact_depth = plan.exact_depth.min(levels.saturating_sub(1));
        let mut tail = Tail::None;
        if levels > exact_depth + 1 {
            tail = match hol_tail(r, v, exact_depth, levels) {
                Some(t) => t,
                None if plan.tail_samples > 0 => Tail::MonteCarlo {
                    samples: plan.tail_samples,
                    seed: plan.seed,
                },
                None => {
                    let size = (r.degree() as u128).checked_pow((levels - 1) as u32).unwrap_or(u128::MAX);
                    return Err(Error::TreeTooLarge {
                        size,
                        cap: crate::branches::TREE_CAP,
                    });
                }
            };
        }
        Ok(Self {
            map: r.clone(),
            phi,
            levels,
            exact_depth,
            tail,
        })
    }

    pub fn uses_hol_tail(&self) -> bool {
        matches!(self.tail, Tail::Hol { .. })
    }

    pub fn levels(&self, z: Complex64) -> Vec<Complex64> {
        let mut out = power_profile(&self.map, &self.phi, z, self.exact_depth, false);
        match &self.tail {
            Tail::None => {}
            Tail::Hol { basis, coeffs } => {
                let g: Vec<Complex64> = basis
                    .iter()
                    .map(|&a| a * (a - 1.0) / (z * (z - 1.0) * (z - a)))
                    .collect();
                for c in coeffs {
                    out.push(c.iter().zip(&g).map(|(x, y)| x * y).sum());
                }
            }
            Tail::MonteCarlo { samples, seed } => {
                let mut rng = RandomStream::new(*seed).split(point_label(z));
                let (mc, _) = power_profile_mc(&self.map, &self.phi, z, self.levels - 1, false, *samples, &mut rng);
                out.extend_from_slice(&mc[self.exact_depth + 1..]);
            }
        }
        out
    }
}

/// Exact deep levels from the transfer matrix, when `R` is normalized, PCF
/// and `v` is a basis point.
fn hol_tail(r: &RationalMap, v: Complex64, exact_depth: usize, levels: usize) -> Option<Tail> {
    let tm = transfer_matrix(r).ok()?;
    let idx = tm.basis.index_of(v)?;
    let n = tm.basis.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    c[idx] = Complex64::new(1.0, 0.0);
    let mut coeffs = Vec::with_capacity(levels - exact_depth - 1);
    for i in 1..levels {
        c = tm.entries.mul_vec(&c);
        if i > exact_depth {
            coeffs.push(c.clone());
        }
    }
    Some(Tail::Hol {
        basis: tm.basis.poles.clone(),
        coeffs,
    })
}

/// Finite points that can carry poles of `A_n γ_v`: `{0, 1, v}`, their
/// forward orbits and the postcritical set.
fn level_poles(r: &RationalMap, v: Complex64, depth: usize) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), v];
    let (pc, _) = r.postcritical_orbit(64, MERGE_TOL)?;
    out.extend(pc.iter().filter_map(SpherePoint::finite));
    for seed in [0.0, 1.0] {
        push_orbit(r, Complex64::new(seed, 0.0), depth, &mut out);
    }
    push_orbit(r, v, depth, &mut out);
    Ok(out)
}

fn push_orbit(r: &RationalMap, z: Complex64, depth: usize, out: &mut Vec<Complex64>) {
    let mut x = SpherePoint::Finite(z);
    for _ in 0..depth.min(64) {
        x = r.apply(x);
        match x.finite() {
            Some(w) if !out.iter().any(|p| (p - w).norm() <= MERGE_TOL) => out.push(w),
            Some(_) => {}
            None => break,
        }
    }
}

/// `‖A_n γ_v‖_{L¹(A)}` for each `n` in `n_list`, on common nodes.
pub fn cesaro_trace(
    r: &RationalMap,
    v: Complex64,
    n_list: &[usize],
    region: &Region,
    budget: usize,
    rng: &RandomStream,
    plan: &PowerPlan,
) -> Result<Vec<SeriesRecord>> {
    check_indices(n_list)?;
    let n_max = *n_list.last().unwrap_or(&1);
    let eval = LevelEvaluator::for_gamma(r, v, n_max, plan)?;
    let poles = level_poles(r, v, n_max)?;
    let estimates = integrate_with(
        n_list.len(),
        |z, out| {
            let levels = eval.levels(z);
            for (o, a) in out.iter_mut().zip(cesaro_from_profile(&levels, n_list)) {
                *o = Complex64::new(a.norm(), 0.0);
            }
        },
        &poles,
        3,
        region,
        budget,
        rng,
        &QuadratureOptions::default(),
    )?;
    Ok(n_list
        .iter()
        .zip(&estimates)
        .map(|(&n, e)| SeriesRecord::from_estimate(n, e, Tag::Asserted))
        .collect())
}

fn check_indices(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n_list must be strictly increasing and start at 1 or later".into()));
    }
    Ok(())
}

/// `ψ = conj(μ)·dist(z, K)⁻²`: the proxy for `λ_K²·conj(μ)` with `μ` bounded.
/// With it, the `E_v` integrand reduces to `μ·A_n(γ_v)`.
pub fn ev_probe(mu: &Field, k: &PointSet) -> Field {
    let m = mu.clone();
    let k = k.clone();
    Field::new(
        move |z| {
            let d = k.distance(z);
            m.eval(z).conj() / (d * d)
        },
        Vec::new(),
        mu.decay_order().saturating_add(2),
    )
}

/// `E_v(ψ)_n = ∫ dist(z, K)²·conj(ψ(z))·A_n(γ_v)(z) |dz|²` for `n = 1..=n_max`.
#[allow(clippy::too_many_arguments)]
pub fn ev_sequence(
    r: &RationalMap,
    v: Complex64,
    psi: &Field,
    n_max: usize,
    k: &PointSet,
    budget: usize,
    rng: &RandomStream,
    plan: &PowerPlan,
) -> Result<Vec<SeriesRecord>> {
    if k.is_empty() {
        return Err(Error::InvalidArgument("K must be nonempty".into()));
    }
    if n_max == 0 {
        return Ok(Vec::new());
    }
    let ns: Vec<usize> = (1..=n_max).collect();
    let eval = LevelEvaluator::for_gamma(r, v, n_max, plan)?;
    let mut poles = level_poles(r, v, n_max)?;
    poles.extend_from_slice(psi.poles());
    let decay = psi.decay_order().saturating_sub(2).saturating_add(3);
    let estimates = integrate_with(
        n_max,
        |z, out| {
            let d = k.distance(z);
            let w = d * d * psi.eval(z).conj();
            if w == Complex64::new(0.0, 0.0) {
                out.iter_mut().for_each(|o| *o = w);
                return;
            }
            let levels = eval.levels(z);
            for (o, a) in out.iter_mut().zip(cesaro_from_profile(&levels, &ns)) {
                *o = w * a;
            }
        },
        &poles,
        decay,
        &Region::WholePlane,
        budget,
        rng,
        &QuadratureOptions::default(),
    )?;
    Ok(ns
        .iter()
        .zip(&estimates)
        .map(|(&n, e)| SeriesRecord::from_estimate(n, e, Tag::Exploratory))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Degenerating,
    NormConvergent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeThresholds {
    pub norm_floor: f64,
    pub norm_ceiling: f64,
    /// Required decay of the pointwise maximum from first to last field.
    pub decay_factor: f64,
    /// Relative tolerance for the last successive `L¹` difference.
    pub difference_tol: f64,
}

impl Default for ProbeThresholds {
    fn default() -> Self {
        Self {
            norm_floor: 0.01,
            norm_ceiling: 100.0,
            decay_factor: 2.0,
            difference_tol: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub verdict: Verdict,
    pub norms: Vec<IntegralEstimate>,
    pub differences: Vec<IntegralEstimate>,
    pub sup_on_grid: Vec<f64>,
}

/// Classifies a finite sequence of fields as degenerating (norms bounded
/// away from 0 and ∞ while pointwise values collapse), norm-convergent, or
/// neither. The thresholds are heuristics for finite runs.
pub fn degenerating_probe(
    fields: &[Field],
    probe_grid: &[Complex64],
    region: &Region,
    budget: usize,
    rng: &RandomStream,
    thresholds: &ProbeThresholds,
) -> Result<ProbeReport> {
    if fields.len() < 4 {
        return Err(Error::InvalidArgument("degenerating_probe needs at least four fields".into()));
    }
    let mut integrands: Vec<Field> = fields.iter().map(Field::modulus).collect();
    integrands.extend(fields.windows(2).map(|w| w[1].sub(&w[0]).modulus()));
    let all = integrate_many(&integrands, region, budget, rng)?;
    let (norms, differences) = all.split_at(fields.len());
    let sup_on_grid: Vec<f64> = fields
        .iter()
        .map(|f| {
            probe_grid
                .iter()
                .map(|z| f.eval(*z).norm())
                .filter(|x| x.is_finite())
                .fold(0.0, f64::max)
        })
        .collect();

    let bounded = norms
        .iter()
        .all(|e| e.value.re >= thresholds.norm_floor && e.value.re <= thresholds.norm_ceiling);
    let monotone = sup_on_grid.windows(2).all(|w| w[1] <= w[0]);
    let collapsed = sup_on_grid[0] >= thresholds.decay_factor * sup_on_grid[sup_on_grid.len() - 1];
    let scale = norms.iter().map(|e| e.value.re).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let last = differences[differences.len() - 1];
    let converging = last.value.re <= thresholds.difference_tol * scale + 3.0 * last.stderr;

    let verdict = if bounded && monotone && collapsed {
        Verdict::Degenerating
    } else if converging {
        Verdict::NormConvergent
    } else {
        Verdict::Inconclusive
    };
    Ok(ProbeReport {
        verdict,
        norms: norms.to_vec(),
        differences: differences.to_vec(),
        sup_on_grid,
    })
}

/// Cauchy threshold for dissipative partial sums.
pub const CAUCHY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipativeRow {
    pub z: Complex64,
    /// `S_0, …, S_N`.
    pub partial_sums: Vec<f64>,
    /// `|S_N − S_{⌊N/2⌋}|`.
    pub tail: f64,
    pub cauchy: bool,
}

/// `S_N(z) = Σ_{n≤N} (|R*|ⁿ f)(z)` for a nonnegative `f`.
pub fn dissipative_partial_sums(
    r: &RationalMap,
    f: &Field,
    z_list: &[Complex64],
    n: usize,
    mode: PowerMode,
) -> Result<Vec<DissipativeRow>> {
    z_list
        .par_iter()
        .map(|&z| {
            let levels = crate::operators::profile(r, f, z, n + 1, true, mode)?;
            if let Some(neg) = levels.iter().find(|x| x.re < -1e-12) {
                return Err(Error::InvalidArgument(format!("f takes a negative value {neg}")));
            }
            let mut acc = 0.0;
            let partial_sums: Vec<f64> = levels
                .iter()
                .map(|x| {
                    acc += x.re;
                    acc
                })
                .collect();
            let tail = (partial_sums[n] - partial_sums[n / 2]).abs();
            Ok(DissipativeRow {
                z,
                partial_sums,
                tail,
                cauchy: tail <= CAUCHY_TOL,
            })
        })
        .collect()
}

/// A sampler for a probability measure on the plane.
pub trait DensitySampler: Sync {
    fn sample(&self, rng: &mut RandomStream) -> Complex64;
}

/// Exact sampler for `ν = |f|/‖f‖₁` with `f = 1/s` by rejection.
///
/// The proposal majorizes `|f|`: inside `|z| ≤ R0` by `Σ|res_i|/|z − e_i|`
/// (partial fractions and the triangle inequality), outside by `C/|z|³` with
/// `C = 1/(4(1 − ρ/R0)³)`, `ρ = max|e_i|`.
#[derive(Clone, Debug)]
pub struct LattesDensity {
    s: crate::Polynomial,
    roots: Vec<Complex64>,
    residues: Vec<f64>,
    inner: f64,
    outer_c: f64,
    inner_mass: Vec<f64>,
    outer_mass: f64,
    /// `‖f‖₁` from quadrature.
    pub mass: IntegralEstimate,
}

impl LattesDensity {
    pub fn new(p: &LattesParams, mass_budget: usize, rng: &RandomStream) -> Result<Self> {
        let inv = lattes_invariants(p)?;
        let s = p.cubic();
        let ds = s.derivative();
        let roots = inv.roots.clone();
        let residues: Vec<f64> = roots.iter().map(|e| ds.eval(*e).inv().norm()).collect();
        let rho = roots.iter().map(|e| e.norm()).fold(0.0, f64::max);
        let inner = 2.0 * rho + 1.0;
        let outer_c = 0.25 / (1.0 - rho / inner).powi(3);
        // Component i is |res_i|/|z − e_i| on the disk D(e_i, 2·inner).
        let inner_mass: Vec<f64> = residues.iter().map(|r| r * TAU * 2.0 * inner).collect();
        let outer_mass = TAU * outer_c / inner;
        let mass = crate::quadrature::l1_norm(&inv.f, &Region::WholePlane, mass_budget, rng)?;
        let rel = mass.stderr / mass.value.norm();
        if !(rel <= 0.01) {
            return Err(Error::MassEstimateFailure(rel));
        }
        Ok(Self {
            s,
            roots,
            residues,
            inner,
            outer_c,
            inner_mass,
            outer_mass,
            mass,
        })
    }

    fn proposal_density(&self, z: Complex64) -> f64 {
        let r = z.norm();
        if r <= self.inner {
            self.roots
                .iter()
                .zip(&self.residues)
                .map(|(e, res)| res / (z - e).norm())
                .sum()
        } else {
            self.outer_c / (r * r * r)
        }
    }

    /// Total mass of the majorant's proposal (before restriction).
    pub fn proposal_mass(&self) -> f64 {
        self.inner_mass.iter().sum::<f64>() + self.outer_mass
    }
}

impl DensitySampler for LattesDensity {
    fn sample(&self, rng: &mut RandomStream) -> Complex64 {
        let total = self.proposal_mass();
        loop {
            let mut u = rng.uniform() * total;
            let z = if u < self.outer_mass {
                // P(|z| > t) = R0/t on |z| > R0.
                let r = self.inner / (1.0 - rng.uniform());
                Complex64::from_polar(r, TAU * rng.uniform())
            } else {
                u -= self.outer_mass;
                let mut k = 0;
                while k + 1 < self.inner_mass.len() && u >= self.inner_mass[k] {
                    u -= self.inner_mass[k];
                    k += 1;
                }
                // Density ∝ 1/r on D(e_k, 2·R0) has a uniform radius.
                let r = 2.0 * self.inner * rng.uniform();
                let z = self.roots[k] + Complex64::from_polar(r, TAU * rng.uniform());
                if z.norm() > self.inner {
                    continue;
                }
                z
            };
            let f = self.s.eval(z).inv().norm();
            if rng.uniform() * self.proposal_density(z) <= f {
                return z;
            }
        }
    }
}

const MIX_CHUNK: usize = 8192;

/// `ν(B ∩ R⁻ⁿA) − ν(A)ν(B)` for each `n`, from common samples.
pub fn mixing_correlation<S: DensitySampler>(
    r: &RationalMap,
    sampler: &S,
    a: &Region,
    b: &Region,
    n_list: &[usize],
    budget: usize,
    rng: &RandomStream,
) -> Result<Vec<SeriesRecord>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n_list must be strictly increasing".into()));
    }
    if budget < 2 {
        return Err(Error::InvalidArgument("budget must be at least 2".into()));
    }
    let k = n_list.len();
    let n_max = n_list.last().copied().unwrap_or(0);
    let chunks = budget.div_ceil(MIX_CHUNK);
    // Per chunk: Σ1_B, and per n: Σ1_A(Rⁿx), Σ1_B·1_A(Rⁿx).
    let partials: Vec<(u64, Vec<u64>, Vec<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut local = rng.split(c as u64);
            let count = MIX_CHUNK.min(budget - c * MIX_CHUNK);
            let mut nb = 0u64;
            let mut na = vec![0u64; k];
            let mut nab = vec![0u64; k];
            for _ in 0..count {
                let x = sampler.sample(&mut local);
                let in_b = b.contains(x);
                nb += in_b as u64;
                let mut y = SpherePoint::Finite(x);
                let mut slot = 0;
                for step in 0..=n_max {
                    if slot < k && n_list[slot] == step {
                        let in_a = y.finite().is_some_and(|w| a.contains(w));
                        na[slot] += in_a as u64;
                        nab[slot] += (in_a && in_b) as u64;
                        slot += 1;
                    }
                    if step < n_max {
                        y = r.apply(y);
                    }
                }
            }
            (nb, na, nab)
        })
        .collect();
    let mut nb = 0u64;
    let mut na = vec![0u64; k];
    let mut nab = vec![0u64; k];
    for (b_, a_, ab_) in &partials {
        nb += b_;
        for i in 0..k {
            na[i] += a_[i];
            nab[i] += ab_[i];
        }
    }
    let m = budget as f64;
    let pb = nb as f64 / m;
    Ok((0..k)
        .map(|i| {
            let pa = na[i] as f64 / m;
            let pab = nab[i] as f64 / m;
            // Centered product (X − p_B)(Y − p_A): its mean is the correlation;
            // the second moment follows from the 0/1 counts.
            let corr = pab - pa * pb;
            let second = pab * (1.0 - pa) * (1.0 - pb) * (1.0 - pa) * (1.0 - pb)
                + (pb - pab) * pa * pa * (1.0 - pb) * (1.0 - pb)
                + (pa - pab) * pb * pb * (1.0 - pa) * (1.0 - pa)
                + (1.0 - pa - pb + pab) * pa * pa * pb * pb;
            let var = (second - corr * corr).max(0.0) * m / (m - 1.0);
            SeriesRecord {
                n: n_list[i],
                value: Complex64::new(corr, 0.0),
                stderr: (var / m).sqrt(),
                tag: Tag::Asserted,
            }
        })
        .collect())
}

/// `conj((Rⁿ)'(x))/(Rⁿ)'(x)` for `n = 1..=N`, accumulated one step at a time.
pub fn phase_sequence(r: &RationalMap, x: SpherePoint, n: usize) -> Result<Vec<Complex64>> {
    let Some(mut z) = x.finite() else {
        return Err(Error::InvalidArgument("phase sequence needs a finite start".into()));
    };
    let mut phase = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(n);
    for step in 0..n {
        let (v, dr) = r.value_and_derivative(z);
        let scale = z.norm().max(1.0) * 1e-14;
        if !(dr.norm() > scale * f64::EPSILON) || !dr.re.is_finite() || !dr.im.is_finite() {
            return Err(Error::CriticalOrbit(step));
        }
        let u = dr / dr.norm();
        phase *= u.conj() * u.conj();
        phase /= phase.norm();
        out.push(phase);
        if !(v.re.is_finite() && v.im.is_finite()) {
            if step + 1 < n {
                return Err(Error::InvalidArgument(format!("orbit reaches infinity at step {}", step + 1)));
            }
            break;
        }
        z = v;
    }
    Ok(out)
}

/// `1 − |mean_x entry_n|` per `n` over several phase sequences; 0 when all
/// phases agree, near 1 when they are spread over the circle.
pub fn phase_dispersion(sequences: &[Vec<Complex64>]) -> Vec<f64> {
    let len = sequences.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mean: Complex64 = sequences.iter().map(|s| s[i]).sum::<Complex64>() / sequences.len() as f64;
            1.0 - mean.norm()
        })
        .collect()
}

/// Closed-form `‖A_n γ‖₁ / ‖γ‖₁` for an eigenfunction with eigenvalue `λ`:
/// `|1 − λⁿ| / (n·|1 − λ|)`.
pub fn eigen_cesaro_ratio(lambda: Complex64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if (lambda - 1.0).norm() == 0.0 {
        return 1.0;
    }
    (1.0 - lambda.powu(n as u32)).norm() / (n as f64 * (1.0 - lambda).norm())
}

/// Area of a disk, for reference values in tests and reports.
pub fn disk_area(radius: f64) -> f64 {
    PI * radius * radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ruelle_apply;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn chebyshev() -> RationalMap {
        RationalMap::from_real(&[0.0, -2.0, 3.0], &[1.0]).unwrap()
    }

    fn basilica() -> RationalMap {
        RationalMap::from_real(&[-1.0, 0.0, 1.0], &[1.0]).unwrap()
    }

    #[test]
    fn hol_tail_matches_tree_levels() {
        let r = chebyshev();
        let v = c(-1.0 / 3.0, 0.0);
        let deep = LevelEvaluator::for_gamma(&r, v, 10, &PowerPlan { exact_depth: 3, ..Default::default() }).unwrap();
        assert!(deep.uses_hol_tail());
        let tree = LevelEvaluator::for_gamma(&r, v, 10, &PowerPlan { exact_depth: 9, ..Default::default() }).unwrap();
        let z = c(0.4, 0.7);
        for (a, b) in deep.levels(z).iter().zip(tree.levels(z)) {
            assert!((a - b).norm() < 1e-10 * b.norm().max(1e-3));
        }
    }

    #[test]
    fn chebyshev_trace_closed_form() {
        let r = chebyshev();
        let v = c(-1.0 / 3.0, 0.0);
        let ns = [1, 2, 4, 8];
        let rng = RandomStream::new(11);
        let trace = cesaro_trace(&r, v, &ns, &Region::WholePlane, 20_000, &rng, &PowerPlan::default()).unwrap();
        let base = trace[0].value.re;
        for rec in &trace {
            let want = eigen_cesaro_ratio(c(-0.5, 0.0), rec.n) * base;
            assert!((rec.value.re - want).abs() < 1e-9 * base, "n={}", rec.n);
            assert!(rec.value.re <= base + 3.0 * rec.stderr);
        }
    }

    #[test]
    fn ev_sequence_zero_and_decay() {
        let r = chebyshev();
        let v = c(-1.0 / 3.0, 0.0);
        let k = crate::julia::postcritical_approx(&r, 20).unwrap();
        let rng = RandomStream::new(3);
        let zero = ev_sequence(&r, v, &Field::zero(), 4, &k, 2000, &rng, &PowerPlan::default()).unwrap();
        assert!(zero.iter().all(|s| s.value == c(0.0, 0.0)));
        let g = gamma(v).unwrap();
        let mu = g.map(|x| if x.norm() > 0.0 { x.conj() / x.norm() } else { x });
        let psi = ev_probe(&mu, &k);
        let seq = ev_sequence(&r, v, &psi, 8, &k, 20_000, &rng, &PowerPlan::default()).unwrap();
        for s in &seq {
            let want = eigen_cesaro_ratio(c(-0.5, 0.0), s.n) * seq[0].value.re;
            assert!((s.value.re - want).abs() < 1e-6 * seq[0].value.re.abs(), "n={}", s.n);
        }
    }

    #[test]
    fn probe_verdicts() {
        let g = gamma(c(2.0, 0.0)).unwrap();
        let rng = RandomStream::new(1);
        let grid = [c(0.5, 0.5), c(3.0, 1.0)];
        let same = vec![g.clone(); 4];
        let report = degenerating_probe(&same, &grid, &Region::WholePlane, 20_000, &rng, &ProbeThresholds::default()).unwrap();
        assert_eq!(report.verdict, Verdict::NormConvergent);
        let alternating: Vec<Field> = (0..4).map(|n| g.scale(c((-1.0f64).powi(n), 0.0))).collect();
        let report =
            degenerating_probe(&alternating, &grid, &Region::WholePlane, 20_000, &rng, &ProbeThresholds::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
        // Unit bumps moving off to infinity: norm fixed, pointwise collapse.
        let bumps: Vec<Field> = (0..4)
            .map(|j| {
                let center = c(4.0 * j as f64, 0.0);
                Field::new(move |z| c(if (z - center).norm() < 0.5 { 1.0 } else { 0.0 }, 0.0), Vec::new(), i32::MAX)
            })
            .collect();
        let grid: Vec<Complex64> = (0..20).map(|i| c(0.1 * i as f64 - 0.5, 0.0)).collect();
        let report = degenerating_probe(
            &bumps,
            &grid,
            &Region::disk(c(6.0, 0.0), 10.0),
            20_000,
            &rng,
            &ProbeThresholds::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Degenerating);
        assert!(degenerating_probe(&same[..3], &grid, &Region::WholePlane, 10, &rng, &ProbeThresholds::default()).is_err());
    }

    #[test]
    fn dissipative_rows() {
        let r = basilica();
        let f = gamma(c(-1.0, 0.0)).unwrap().modulus();
        let rows = dissipative_partial_sums(&r, &f, &[c(0.1, 0.05)], 0, PowerMode::exact()).unwrap();
        assert_eq!(rows[0].partial_sums, vec![f.eval(c(0.1, 0.05)).re]);
        let rows = dissipative_partial_sums(&r, &f, &[c(0.1, 0.05)], 8, PowerMode::exact()).unwrap();
        assert!(rows[0].partial_sums.windows(2).all(|w| w[1] >= w[0]));
        // One level equals |R*| applied once.
        let once = ruelle_apply(&r, &f, true).eval(c(0.1, 0.05)).re;
        assert!((rows[0].partial_sums[1] - rows[0].partial_sums[0] - once).abs() < 1e-12);
    }

    #[test]
    fn lattes_sampler_matches_density() {
        let p = LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap();
        let rng = RandomStream::new(21);
        let sampler = LattesDensity::new(&p, 400_000, &rng).unwrap();
        // ν(D(0, 0.5)) by sampling vs by quadrature.
        let disk = Region::disk(c(0.0, 0.0), 0.5);
        let mut local = rng.split(99);
        let n = 40_000;
        let hits = (0..n).filter(|_| disk.contains(sampler.sample(&mut local))).count() as f64 / n as f64;
        let inv = lattes_invariants(&p).unwrap();
        let part = crate::quadrature::l1_norm(&inv.f, &disk, 200_000, &rng.split(7)).unwrap();
        let want = part.value.re / sampler.mass.value.re;
        let se = (want * (1.0 - want) / n as f64).sqrt() + want * 0.02;
        assert!((hits - want).abs() < 4.0 * se, "{hits} vs {want}");
    }

    #[test]
    fn mixing_self_consistency() {
        let p = LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap();
        let r = crate::lattes::lattes_map(&p).unwrap();
        let rng = RandomStream::new(4);
        let sampler = LattesDensity::new(&p, 200_000, &rng).unwrap();
        let a = Region::disk(c(0.5, 0.5), 0.4);
        let b = Region::disk(c(-0.5, -0.5), 0.4);
        let same = mixing_correlation(&r, &sampler, &a, &a, &[0], 20_000, &rng).unwrap();
        assert!(same[0].value.re >= 0.0);
        let disjoint = mixing_correlation(&r, &sampler, &a, &b, &[0, 3], 20_000, &rng).unwrap();
        assert!(disjoint[0].value.re <= 0.0);
        let again = mixing_correlation(&r, &sampler, &a, &b, &[0, 3], 20_000, &rng).unwrap();
        assert_eq!(disjoint, again);
    }

    #[test]
    fn phases() {
        let sq = RationalMap::from_real(&[0.0, 0.0, 1.0], &[1.0]).unwrap();
        for (x, n) in [(0.7, 6), (1.0, 40), (1.1, 8)] {
            let seq = phase_sequence(&sq, SpherePoint::real(x), n).unwrap();
            assert!(seq.iter().all(|p| (p - c(1.0, 0.0)).norm() < 1e-15));
        }
        let lattes = crate::lattes::lattes_map(&LattesParams::new(c(4.0, 0.0), c(0.0, 0.0)).unwrap()).unwrap();
        let seq = phase_sequence(&lattes, SpherePoint::Finite(c(0.3, 0.4)), 20).unwrap();
        assert!(seq.iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
        // The basilica basin orbit falls onto the critical point 0.
        assert!(matches!(
            phase_sequence(&basilica(), SpherePoint::Finite(c(0.3, 0.4)), 30),
            Err(Error::CriticalOrbit(_))
        ));
        assert_eq!(phase_sequence(&sq, SpherePoint::real(0.0), 3).unwrap_err(), Error::CriticalOrbit(0));
    }
}
