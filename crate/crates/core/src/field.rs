//! Lazily composed pointwise-evaluable fields on the sphere.

use crate::sphere::SpherePoint;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

pub type EvalFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// A complex function on the plane with declared simple poles and decay.
///
/// `decay_order = k` declares `|f(z)|·|z|^k` bounded near infinity; `k >= 3`
/// is what integrability over the whole plane needs. Evaluation is pure, so
/// a field can be shared across threads and evaluated in any order.
#[derive(Clone)]
pub struct Field {
    eval: Arc<EvalFn>,
    poles: Arc<Vec<Complex64>>,
    decay_order: i32,
    cost_hint: u64,
    at_infinity: Complex64,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("poles", &self.poles)
            .field("decay_order", &self.decay_order)
            .field("cost_hint", &self.cost_hint)
            .finish()
    }
}

fn nan() -> Complex64 {
    Complex64::new(f64::NAN, f64::NAN)
}

impl Field {
    pub fn new<F>(f: F, poles: Vec<Complex64>, decay_order: i32) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            poles: Arc::new(dedup(poles)),
            decay_order,
            cost_hint: 1,
            at_infinity: if decay_order > 0 { Complex64::new(0.0, 0.0) } else { nan() },
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(move |_| c, Vec::new(), 0).with_infinity(c)
    }

    pub fn zero() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        // The zero field decays as fast as anything.
        Self::new(move |_| zero, Vec::new(), i32::MAX).with_infinity(zero)
    }

    pub fn with_cost(mut self, cost: u64) -> Self {
        self.cost_hint = cost.max(1);
        self
    }

    pub fn with_infinity(mut self, value: Complex64) -> Self {
        self.at_infinity = value;
        self
    }

    pub fn with_poles(mut self, poles: Vec<Complex64>) -> Self {
        self.poles = Arc::new(dedup(poles));
        self
    }

    pub fn with_decay(mut self, decay_order: i32) -> Self {
        self.decay_order = decay_order;
        self
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn eval_sphere(&self, z: SpherePoint) -> Complex64 {
        match z {
            SpherePoint::Finite(z) => self.eval(z),
            SpherePoint::Infinity => self.at_infinity,
        }
    }

    /// Evaluates at a finite value, or at infinity for non-finite input.
    #[inline]
    pub fn eval_extended(&self, z: Complex64) -> Complex64 {
        if z.re.is_finite() && z.im.is_finite() {
            self.eval(z)
        } else {
            self.at_infinity
        }
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn decay_order(&self) -> i32 {
        self.decay_order
    }

    pub fn cost_hint(&self) -> u64 {
        self.cost_hint
    }

    pub fn at_infinity(&self) -> Complex64 {
        self.at_infinity
    }

    pub fn scale(&self, c: Complex64) -> Field {
        let f = self.clone();
        Field {
            eval: Arc::new(move |z| f.eval(z) * c),
            at_infinity: self.at_infinity * c,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.combine(other, |a, b| a + b, self.decay_order.min(other.decay_order))
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.combine(other, |a, b| a - b, self.decay_order.min(other.decay_order))
    }

    pub fn mul(&self, other: &Field) -> Field {
        self.combine(other, |a, b| a * b, self.decay_order.saturating_add(other.decay_order))
    }

    fn combine(&self, other: &Field, op: fn(Complex64, Complex64) -> Complex64, decay: i32) -> Field {
        let (f, g) = (self.clone(), other.clone());
        let mut poles = self.poles.to_vec();
        poles.extend_from_slice(&other.poles);
        Field {
            eval: Arc::new(move |z| op(f.eval(z), g.eval(z))),
            poles: Arc::new(dedup(poles)),
            decay_order: decay,
            cost_hint: self.cost_hint + other.cost_hint,
            at_infinity: op(self.at_infinity, other.at_infinity),
        }
    }

    /// Pointwise map of values, keeping poles and decay.
    pub fn map<F>(&self, op: F) -> Field
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let f = self.clone();
        let at_infinity = op(self.at_infinity);
        Field {
            eval: Arc::new(move |z| op(f.eval(z))),
            at_infinity,
            ..self.clone()
        }
    }

    pub fn conj(&self) -> Field {
        self.map(|v| v.conj())
    }

    /// `|f|` as a real-valued field.
    pub fn modulus(&self) -> Field {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    /// `f · 1_S` for a membership predicate `S`.
    pub fn restrict<P>(&self, inside: P) -> Field
    where
        P: Fn(Complex64) -> bool + Send + Sync + 'static,
    {
        let f = self.clone();
        Field {
            eval: Arc::new(move |z| if inside(z) { f.eval(z) } else { Complex64::new(0.0, 0.0) }),
            ..self.clone()
        }
    }
}

fn dedup(points: Vec<Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(points.len());
    for p in points {
        if p.re.is_finite() && p.im.is_finite() && !out.iter().any(|q| (q - p).norm() <= 1e-12 * p.norm().max(1.0)) {
            out.push(p);
        }
    }
    out
}
