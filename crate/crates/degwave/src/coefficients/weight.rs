//! The Feller weight eta(x) = exp(int_{1/2}^x b/a ds) and sigma = a/eta,
//! which turn a u_xx + b u_x into the divergence form sigma (eta u_x)_x.

use super::profile::CoefficientProfile;
use crate::error::{Error, Result};

/// Gauss-Legendre 7-point nodes/weights on [-1,1]. Interior nodes only, so
/// integrable endpoint singularities of b/a never get evaluated at 0.
const GL_NODES: [f64; 7] = [
    -0.949107912342758,
    -0.741531185599394,
    -0.405845151377397,
    0.0,
    0.405845151377397,
    0.741531185599394,
    0.949107912342758,
];
const GL_WEIGHTS: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

const MAX_DEPTH: u32 = 40;
const DIVERGENCE_GUARD: f64 = 1e3;
/// Left of this point the x = u^4 substitution is applied.
const SUBSTITUTION_CUT: f64 = 0.01;

fn gauss(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut s = 0.0;
    for (n, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        s += w * f(mid + half * n);
    }
    s * half
}

fn adaptive(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, whole: f64, depth: u32, acc: &mut QuadAccumulator) {
    let mid = 0.5 * (lo + hi);
    let left = gauss(f, lo, mid);
    let right = gauss(f, mid, hi);
    let refined = left + right;
    if acc.sum.abs() + refined.abs() > DIVERGENCE_GUARD {
        acc.diverged = true;
        return;
    }
    if (refined - whole).abs() <= acc.tol * refined.abs().max(1.0) || depth == 0 {
        if depth == 0 && (refined - whole).abs() > 1e3 * acc.tol * refined.abs().max(1.0) {
            acc.diverged = true;
            return;
        }
        acc.sum += refined;
        return;
    }
    adaptive(f, lo, mid, left, depth - 1, acc);
    if acc.diverged {
        return;
    }
    adaptive(f, mid, hi, right, depth - 1, acc);
}

/// Evaluates eta and sigma for a coefficient pair by adaptive quadrature.
#[derive(Debug, Clone)]
pub struct WeightEvaluator {
    pub a: CoefficientProfile,
    pub b: CoefficientProfile,
    pub quadrature_tolerance: f64,
}

impl WeightEvaluator {
    pub fn new(a: CoefficientProfile, b: CoefficientProfile) -> Self {
        Self { a, b, quadrature_tolerance: 1e-11 }
    }

    fn ratio(&self, x: f64) -> f64 {
        self.b.eval_unchecked(x) / self.a.eval_unchecked(x)
    }

    /// int_lo^hi b/a ds, adaptive bisection on a 7-point Gauss rule. Near the
    /// degenerate endpoint the substitution x = u^4 regularizes the integrable
    /// power singularities of b/a, so the rule converges there too.
    pub fn drift_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        debug_assert!(lo <= hi);
        if self.b.is_zero() || lo == hi {
            return Ok(0.0);
        }
        let err = |range: &str| {
            Error::Integrability(format!(
                "quadrature of b/a over {range} did not converge; b/a may not be integrable at 0"
            ))
        };
        let mut total = 0.0;
        let ratio = |x: f64| self.ratio(x);
        if lo < SUBSTITUTION_CUT {
            let cut = hi.min(SUBSTITUTION_CUT);
            let transformed = |u: f64| 4.0 * u * u * u * ratio(u * u * u * u);
            total += self
                .integrate(&transformed, lo.powf(0.25), cut.powf(0.25))
                .ok_or_else(|| err(&format!("[{lo}, {cut}]")))?;
        }
        if hi > SUBSTITUTION_CUT {
            let reg_lo = lo.max(SUBSTITUTION_CUT);
            total += self
                .integrate(&ratio, reg_lo, hi)
                .ok_or_else(|| err(&format!("[{reg_lo}, {hi}]")))?;
        }
        if !total.is_finite() {
            return Err(err(&format!("[{lo}, {hi}]")));
        }
        Ok(total)
    }

    fn integrate(&self, f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
        if lo >= hi {
            return Some(0.0);
        }
        let whole = gauss(f, lo, hi);
        let mut acc = QuadAccumulator { sum: 0.0, tol: self.quadrature_tolerance, diverged: false };
        adaptive(f, lo, hi, whole, MAX_DEPTH, &mut acc);
        if acc.diverged || !acc.sum.is_finite() {
            None
        } else {
            Some(acc.sum)
        }
    }

    /// The Feller weight eta(x) = exp(int_{1/2}^x b/a ds).
    pub fn eta(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("eta evaluated outside [0,1]: x = {x}")));
        }
        if self.b.is_zero() {
            return Ok(1.0);
        }
        let integral = if x >= 0.5 {
            self.drift_integral(0.5, x)?
        } else {
            -self.drift_integral(x, 0.5)?
        };
        Ok(integral.exp())
    }

    /// sigma(x) = a(x)/eta(x); at x = 0 the value is the limit, which is 0
    /// whenever a degenerates (eta stays bounded).
    pub fn sigma(&self, x: f64) -> Result<f64> {
        if x == 0.0 && self.a.vanishes_at_zero() {
            return Ok(0.0);
        }
        Ok(self.a.eval(x)? / self.eta(x)?)
    }
}

struct QuadAccumulator {
    sum: f64,
    tol: f64,
    diverged: bool,
}
