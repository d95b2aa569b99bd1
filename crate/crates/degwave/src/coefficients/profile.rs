//! Coefficient functions of the two systems: the diffusion coefficient `a`,
//! the drift coefficient `b` and the localized damping coefficient `h`.

use crate::error::{Error, Result};

/// Which coefficient a profile stands for. Validation differs: the diffusion
/// coefficient must be positive on (0,1], the drift may vanish or change sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Diffusion,
    Drift,
}

#[derive(Debug, Clone)]
pub enum ProfileKind {
    /// c * x^k on [0,1].
    PowerLaw { c: f64, k: f64 },
    /// Monotone cubic interpolant through tabulated samples.
    Tabulated(MonotoneCubic),
}

/// A coefficient function on [0,1], either in closed power-law form or
/// tabulated with monotone cubic interpolation.
#[derive(Debug, Clone)]
pub struct CoefficientProfile {
    pub role: Role,
    pub kind: ProfileKind,
}

impl CoefficientProfile {
    pub fn power_law(role: Role, c: f64, k: f64) -> Result<Self> {
        if !c.is_finite() || !k.is_finite() {
            return Err(Error::InvalidCoefficient("non-finite power-law parameter".into()));
        }
        if k < 0.0 {
            return Err(Error::InvalidCoefficient(format!("exponent must be >= 0, got {k}")));
        }
        if role == Role::Diffusion && c <= 0.0 {
            return Err(Error::InvalidCoefficient(format!(
                "diffusion power-law coefficient must be > 0, got {c}"
            )));
        }
        Ok(Self { role, kind: ProfileKind::PowerLaw { c, k } })
    }

    pub fn tabulated(role: Role, samples: &[(f64, f64)]) -> Result<Self> {
        let interp = MonotoneCubic::new(samples)?;
        if role == Role::Diffusion {
            // a > 0 on (0,1]; interior zeros make 1/a meaningless.
            for &(x, v) in &samples[1..] {
                if v <= 0.0 {
                    return Err(Error::InvalidCoefficient(format!(
                        "tabulated diffusion coefficient non-positive at x = {x}"
                    )));
                }
            }
        }
        Ok(Self { role, kind: ProfileKind::Tabulated(interp) })
    }

    /// Convenience constructors for the configurations used throughout.
    pub fn constant(role: Role, c: f64) -> Result<Self> {
        Self::power_law(role, c, 0.0)
    }

    pub fn zero_drift() -> Self {
        Self { role: Role::Drift, kind: ProfileKind::PowerLaw { c: 0.0, k: 0.0 } }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("coefficient evaluated outside [0,1]: x = {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the domain guard, for inner loops that already
    /// clamp their arguments.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::PowerLaw { c, k } => {
                if *k == 0.0 {
                    *c
                } else {
                    c * x.powf(*k)
                }
            }
            ProfileKind::Tabulated(t) => t.eval(x),
        }
    }

    /// Derivative: closed form for power laws, the interpolant's derivative
    /// for tabulated profiles.
    pub fn deriv(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::PowerLaw { c, k } => {
                if *k == 0.0 {
                    0.0
                } else {
                    c * k * x.powf(k - 1.0)
                }
            }
            ProfileKind::Tabulated(t) => t.deriv(x),
        }
    }

    /// True when the profile is identically zero (used to short-circuit the
    /// Feller weight to 1).
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            ProfileKind::PowerLaw { c, .. } => *c == 0.0,
            ProfileKind::Tabulated(t) => t.values().iter().all(|&v| v == 0.0),
        }
    }

    /// True when a(0) = 0, i.e. the profile degenerates at the left endpoint.
    pub fn vanishes_at_zero(&self) -> bool {
        match &self.kind {
            ProfileKind::PowerLaw { c, k } => *c == 0.0 || *k > 0.0,
            ProfileKind::Tabulated(t) => t.values()[0] == 0.0,
        }
    }
}

/// Damping coefficient h: zero outside [x1,x2], |(x-x1)^a1 (x-x2)^a2| inside.
#[derive(Debug, Clone, Copy)]
pub struct DampingProfile {
    pub x1: f64,
    pub x2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl DampingProfile {
    pub fn new(x1: f64, x2: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(0.0 < x1 && x1 < x2 && x2 < 1.0) {
            return Err(Error::Configuration(format!(
                "damping support must satisfy 0 < x1 < x2 < 1, got x1 = {x1}, x2 = {x2}"
            )));
        }
        if alpha1 < 0.0 || alpha2 < 0.0 {
            return Err(Error::Configuration("damping exponents must be >= 0".into()));
        }
        Ok(Self { x1, x2, alpha1, alpha2 })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("damping evaluated outside [0,1]: x = {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    pub fn eval_unchecked(&self, x: f64) -> f64 {
        if x < self.x1 || x > self.x2 {
            return 0.0;
        }
        // |(x-x1)^a1 (x-x2)^a2| with the convention 0^0 = 1.
        (x - self.x1).powf(self.alpha1) * (self.x2 - x).powf(self.alpha2)
    }
}

/// Fritsch–Carlson monotone cubic Hermite interpolation on a strictly
/// increasing grid covering [0,1].
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    tangents: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidCoefficient("tabulated profile needs >= 3 samples".into()));
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
        if xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
            return Err(Error::InvalidCoefficient("tabulated samples must cover [0,1]".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCoefficient("tabulated x-samples must be strictly increasing".into()));
        }
        let n = xs.len();
        let mut secants = vec![0.0; n - 1];
        for i in 0..n - 1 {
            secants[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut tangents = vec![0.0; n];
        tangents[0] = secants[0];
        tangents[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            if secants[i - 1] * secants[i] <= 0.0 {
                tangents[i] = 0.0;
            } else {
                tangents[i] = (secants[i - 1] + secants[i]) / 2.0;
            }
        }
        // Fritsch-Carlson limiter keeps the interpolant monotone per interval.
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                tangents[i] = 0.0;
                tangents[i + 1] = 0.0;
            } else {
                let alpha = tangents[i] / secants[i];
                let beta = tangents[i + 1] / secants[i];
                let r = alpha.hypot(beta);
                if r > 3.0 {
                    tangents[i] = 3.0 * alpha / r * secants[i];
                    tangents[i + 1] = 3.0 * beta / r * secants[i];
                }
            }
        }
        Ok(Self { xs, ys, tangents })
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn abscissas(&self) -> &[f64] {
        &self.xs
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.ys[i] + h10 * h * self.tangents[i] + h01 * self.ys[i + 1] + h11 * h * self.tangents[i + 1]
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let d00 = (6.0 * t * t - 6.0 * t) / h;
        let d10 = 3.0 * t * t - 4.0 * t + 1.0;
        let d01 = (-6.0 * t * t + 6.0 * t) / h;
        let d11 = 3.0 * t * t - 2.0 * t;
        d00 * self.ys[i] + d10 * self.tangents[i] + d01 * self.ys[i + 1] + d11 * self.tangents[i + 1]
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_eval() {
        let a = CoefficientProfile::power_law(Role::Diffusion, 1.0, 0.5).unwrap();
        assert_relative_eq!(a.eval(0.25).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn damping_outside_support_is_zero() {
        let h = DampingProfile::new(0.2, 0.8, 1.0, 1.0).unwrap();
        assert_eq!(h.eval(0.1).unwrap(), 0.0);
        assert_eq!(h.eval(0.9).unwrap(), 0.0);
    }

    #[test]
    fn damping_inside_support() {
        let h = DampingProfile::new(0.2, 0.8, 1.0, 1.0).unwrap();
        assert_relative_eq!(h.eval(0.5).unwrap(), 0.09, max_relative = 1e-14);
    }

    #[test]
    fn damping_flat_exponents_jump_to_one() {
        // 0^0 = 1 so h jumps to 1 at the support edges.
        let h = DampingProfile::new(0.2, 0.8, 0.0, 0.0).unwrap();
        assert_eq!(h.eval(0.2).unwrap(), 1.0);
        assert_eq!(h.eval(0.5).unwrap(), 1.0);
        assert_eq!(h.eval(0.19).unwrap(), 0.0);
    }

    #[test]
    fn eval_outside_domain_errors() {
        let a = CoefficientProfile::power_law(Role::Diffusion, 1.0, 0.5).unwrap();
        assert!(a.eval(-0.1).is_err());
        assert!(a.eval(1.1).is_err());
    }

    #[test]
    fn tabulated_requires_increasing_cover() {
        assert!(CoefficientProfile::tabulated(Role::Drift, &[(0.0, 1.0), (0.5, 1.0)]).is_err());
        assert!(CoefficientProfile::tabulated(Role::Drift, &[(0.1, 1.0), (0.5, 1.0), (1.0, 1.0)]).is_err());
        assert!(CoefficientProfile::tabulated(Role::Drift, &[(0.0, 1.0), (0.5, 1.0), (0.4, 1.0)]).is_err());
    }

    #[test]
    fn tabulated_interpolates_samples_and_stays_monotone() {
        let samples: Vec<(f64, f64)> = (0..=10).map(|i| {
            let x = i as f64 / 10.0;
            (x, x.sqrt())
        }).collect();
        let a = CoefficientProfile::tabulated(Role::Diffusion, &samples).unwrap();
        for &(x, v) in &samples {
            assert_relative_eq!(a.eval(x).unwrap(), v, max_relative = 1e-12);
        }
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = a.eval(i as f64 / 1000.0).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn interior_zero_diffusion_rejected() {
        let samples = vec![(0.0, 0.0), (0.5, 0.0), (1.0, 1.0)];
        assert!(CoefficientProfile::tabulated(Role::Diffusion, &samples).is_err());
    }
}
