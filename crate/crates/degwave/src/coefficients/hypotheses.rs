//! Degeneracy constant, the M/N constants and the two stability hypotheses,
//! plus the damped-region feasibility threshold and the Hardy-Poincare
//! constant.

use super::profile::{CoefficientProfile, ProfileKind};
use super::sup::{self, BASE_POINTS};
use super::weight::WeightEvaluator;
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Classification of the degeneracy at x = 0 by K = sup x|a'|/a.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    NonDegenerate,
    WeaklyDegenerate,
    StronglyDegenerate,
    OutOfScope,
}

#[derive(Debug, Clone, Copy)]
pub struct DegeneracyReport {
    pub k: f64,
    pub classification: Degeneracy,
    pub sup_location: f64,
}

impl Degeneracy {
    fn classify(k: f64) -> Self {
        if k >= 2.0 {
            Degeneracy::OutOfScope
        } else if k >= 1.0 {
            Degeneracy::StronglyDegenerate
        } else if k > 0.0 {
            Degeneracy::WeaklyDegenerate
        } else {
            Degeneracy::NonDegenerate
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Degeneracy::NonDegenerate => "non-degenerate",
            Degeneracy::WeaklyDegenerate => "weakly-degenerate",
            Degeneracy::StronglyDegenerate => "strongly-degenerate",
            Degeneracy::OutOfScope => "out-of-scope",
        }
    }
}

/// K = sup_{(0,1]} x|a'(x)|/a(x). Closed form K = k for power laws,
/// sampling + refinement for tabulated profiles.
pub fn degeneracy_constant(a: &CoefficientProfile) -> Result<DegeneracyReport> {
    match &a.kind {
        ProfileKind::PowerLaw { k, .. } => Ok(DegeneracyReport {
            k: *k,
            classification: Degeneracy::classify(*k),
            sup_location: 1.0,
        }),
        ProfileKind::Tabulated(table) => {
            for i in 1..=1000 {
                let x = i as f64 / 1000.0;
                if a.eval_unchecked(x) <= 0.0 {
                    return Err(Error::InvalidCoefficient(format!(
                        "diffusion coefficient vanishes at interior point x = {x}"
                    )));
                }
            }
            // Below the first interior sample the interpolant is essentially
            // linear, which would force x a'/a -> 1 regardless of the data;
            // the tabulated profile only resolves behaviour from that
            // abscissa on, so the sup is taken there.
            let first = table.abscissas()[1];
            let r = sup::sup_abs(
                |x| x * a.deriv(x).abs() / a.eval_unchecked(x),
                first,
                1.0,
                BASE_POINTS,
            );
            Ok(DegeneracyReport {
                k: r.value,
                classification: Degeneracy::classify(r.value),
                sup_location: r.location,
            })
        }
    }
}

/// The four localized constants of the internal-damping hypothesis,
/// taken over (0, x1+2e) and (x2-2e, 1).
#[derive(Debug, Clone, Copy)]
pub struct MConstants {
    pub m01: f64,
    pub m02: f64,
    pub m11: f64,
    pub m12: f64,
    pub epsilon: f64,
    pub x1: f64,
    pub x2: f64,
}

/// The two global constants of the transmission hypothesis, over (0,1).
#[derive(Debug, Clone, Copy)]
pub struct NConstants {
    pub n1: f64,
    pub n2: f64,
}

fn drift_quotient<'c>(a: &'c CoefficientProfile, b: &'c CoefficientProfile) -> impl Fn(f64) -> f64 + 'c {
    move |x| x * b.eval_unchecked(x) / a.eval_unchecked(x)
}

fn deriv_quotient<'c>(a: &'c CoefficientProfile, b: &'c CoefficientProfile) -> impl Fn(f64) -> f64 + 'c {
    move |x| x * (a.deriv(x) - b.eval_unchecked(x)) / a.eval_unchecked(x)
}

pub fn m_constants(
    a: &CoefficientProfile,
    b: &CoefficientProfile,
    x1: f64,
    x2: f64,
    epsilon: f64,
) -> Result<MConstants> {
    if !(0.0 < x1 && x1 < x2 && x2 < 1.0) {
        return Err(Error::Configuration(format!(
            "damped region must satisfy 0 < x1 < x2 < 1, got x1 = {x1}, x2 = {x2}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < (x2 - x1) / 4.0) {
        return Err(Error::Configuration(format!(
            "epsilon must lie in (0, (x2-x1)/4), got {epsilon}"
        )));
    }
    let left = x1 + 2.0 * epsilon;
    let right = x2 - 2.0 * epsilon;
    if left >= right {
        return Err(Error::Configuration(
            "interval ordering violated: x1 + 2e must be below x2 - 2e".into(),
        ));
    }
    let m01 = sup::sup_abs(drift_quotient(a, b), 0.0, left, BASE_POINTS).value;
    let m02 = sup::sup_abs(deriv_quotient(a, b), 0.0, left, BASE_POINTS).value;
    let m11 = sup::sup_abs(|x| (x - 1.0) * b.eval_unchecked(x) / a.eval_unchecked(x), right, 1.0, BASE_POINTS).value;
    let m12 = sup::sup_abs(
        |x| (x - 1.0) * (a.deriv(x) - b.eval_unchecked(x)) / a.eval_unchecked(x),
        right,
        1.0,
        BASE_POINTS,
    )
    .value;
    Ok(MConstants { m01, m02, m11, m12, epsilon, x1, x2 })
}

pub fn n_constants(a: &CoefficientProfile, b: &CoefficientProfile) -> Result<NConstants> {
    let n1 = sup::sup_abs(deriv_quotient(a, b), 0.0, 1.0, BASE_POINTS).value;
    let n2 = sup::sup_abs(drift_quotient(a, b), 0.0, 1.0, BASE_POINTS).value;
    Ok(NConstants { n1, n2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    InternalDamping,
    Transmission,
}

impl SystemKind {
    pub fn label(&self) -> &'static str {
        match self {
            SystemKind::InternalDamping => "internal-damping",
            SystemKind::Transmission => "transmission",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum HypothesisConstants {
    M(MConstants),
    N(NConstants),
}

/// Outcome of checking the stability hypothesis of either system: the
/// degeneracy data, the relevant constants and the two margins whose joint
/// positivity is the verdict.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub system: SystemKind,
    pub degeneracy: DegeneracyReport,
    pub constants: HypothesisConstants,
    pub bound1: f64,
    pub margin1: f64,
    pub margin2: f64,
    pub verdict: bool,
}

fn require_in_scope(a: &CoefficientProfile) -> Result<DegeneracyReport> {
    let deg = degeneracy_constant(a)?;
    if deg.k >= 2.0 {
        return Err(Error::OutOfScope(format!(
            "degeneracy constant K = {} >= 2; stability analysis requires K < 2",
            deg.k
        )));
    }
    Ok(deg)
}

/// Internal damping: M01 + M11 < 1 - K/2 and M02 + M12 < 1 + K/2.
pub fn check_hypothesis_internal(
    a: &CoefficientProfile,
    b: &CoefficientProfile,
    x1: f64,
    x2: f64,
    epsilon: f64,
) -> Result<HypothesisReport> {
    let deg = require_in_scope(a)?;
    let m = m_constants(a, b, x1, x2, epsilon)?;
    let bound1 = 1.0 - deg.k / 2.0;
    let bound2 = 1.0 + deg.k / 2.0;
    let margin1 = bound1 - (m.m01 + m.m11);
    let margin2 = bound2 - (m.m02 + m.m12);
    Ok(HypothesisReport {
        system: SystemKind::InternalDamping,
        degeneracy: deg,
        constants: HypothesisConstants::M(m),
        bound1,
        margin1,
        margin2,
        verdict: margin1 > 0.0 && margin2 > 0.0,
    })
}

/// Transmission: N1 < 1 + K/2 and N2 < 1 - K/2.
pub fn check_hypothesis_transmission(
    a: &CoefficientProfile,
    b: &CoefficientProfile,
) -> Result<HypothesisReport> {
    let deg = require_in_scope(a)?;
    let n = n_constants(a, b)?;
    let bound1 = 1.0 + deg.k / 2.0;
    let bound2 = 1.0 - deg.k / 2.0;
    let margin1 = bound1 - n.n1;
    let margin2 = bound2 - n.n2;
    Ok(HypothesisReport {
        system: SystemKind::Transmission,
        degeneracy: deg,
        constants: HypothesisConstants::N(n),
        bound1,
        margin1,
        margin2,
        verdict: margin1 > 0.0 && margin2 > 0.0,
    })
}

impl HypothesisReport {
    /// Flat key=value block, one entry per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "system={}", self.system.label());
        let _ = writeln!(s, "K={:.12}", self.degeneracy.k);
        let _ = writeln!(s, "classification={}", self.degeneracy.classification.label());
        match &self.constants {
            HypothesisConstants::M(m) => {
                let _ = writeln!(s, "M01={:.12}", m.m01);
                let _ = writeln!(s, "M02={:.12}", m.m02);
                let _ = writeln!(s, "M11={:.12}", m.m11);
                let _ = writeln!(s, "M12={:.12}", m.m12);
                let _ = writeln!(s, "x1={}", m.x1);
                let _ = writeln!(s, "x2={}", m.x2);
                let _ = writeln!(s, "epsilon={}", m.epsilon);
            }
            HypothesisConstants::N(n) => {
                let _ = writeln!(s, "N1={:.12}", n.n1);
                let _ = writeln!(s, "N2={:.12}", n.n2);
            }
        }
        let _ = writeln!(s, "bound1={:.12}", self.bound1);
        let _ = writeln!(s, "margin1={:.12}", self.margin1);
        let _ = writeln!(s, "margin2={:.12}", self.margin2);
        let _ = writeln!(s, "verdict={}", self.verdict);
        s
    }

    pub fn csv_header() -> &'static str {
        "system,K,classification,c1,c2,c3,c4,bound1,margin1,margin2,verdict"
    }

    /// CSV row; M-constant reports fill c1..c4 with M01,M02,M11,M12 and
    /// N-constant reports fill c1,c2 with N1,N2.
    pub fn to_csv_row(&self) -> String {
        let (c1, c2, c3, c4) = match &self.constants {
            HypothesisConstants::M(m) => (m.m01, m.m02, m.m11, m.m12),
            HypothesisConstants::N(n) => (n.n1, n.n2, f64::NAN, f64::NAN),
        };
        format!(
            "{},{:.12},{},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12},{}",
            self.system.label(),
            self.degeneracy.k,
            self.degeneracy.classification.label(),
            c1,
            c2,
            c3,
            c4,
            self.bound1,
            self.margin1,
            self.margin2,
            self.verdict
        )
    }
}

/// Width of the vanishing left interval used when taking the limit
/// x1 + 2e -> 0 in the feasibility threshold.
const LIMIT_WIDTH: f64 = 1e-14;
const BISECT_TOL: f64 = 1e-8;

/// Smallest s in (0,1) such that the internal-damping hypothesis is
/// satisfiable for every x2 - 2e > s in the limit x1 + 2e -> 0. Both
/// inequalities of the hypothesis are accounted for; the binding one
/// determines the threshold.
pub fn damped_region_threshold(a: &CoefficientProfile, b: &CoefficientProfile) -> Result<f64> {
    let deg = require_in_scope(a)?;
    let l1 = sup::sup_abs(drift_quotient(a, b), 0.0, LIMIT_WIDTH, BASE_POINTS).value;
    let l2 = sup::sup_abs(deriv_quotient(a, b), 0.0, LIMIT_WIDTH, BASE_POINTS).value;
    let bound1 = 1.0 - deg.k / 2.0;
    let bound2 = 1.0 + deg.k / 2.0;

    let excess1 = |s: f64| {
        l1 + sup::sup_abs(|x| (x - 1.0) * b.eval_unchecked(x) / a.eval_unchecked(x), s, 1.0, BASE_POINTS).value
            - bound1
    };
    let excess2 = |s: f64| {
        l2 + sup::sup_abs(
            |x| (x - 1.0) * (a.deriv(x) - b.eval_unchecked(x)) / a.eval_unchecked(x),
            s,
            1.0,
            BASE_POINTS,
        )
        .value
            - bound2
    };
    let r1 = threshold_root(&excess1)?;
    let r2 = threshold_root(&excess2)?;
    Ok(r1.max(r2))
}

/// Root of a non-increasing excess function on (0,1): 0 when the condition
/// already holds near 0, infeasible when it fails up to 1.
fn threshold_root(excess: &impl Fn(f64) -> f64) -> Result<f64> {
    let mut lo = LIMIT_WIDTH;
    let mut hi = 1.0 - 1e-9;
    if excess(lo) <= 0.0 {
        return Ok(0.0);
    }
    if excess(hi) > 0.0 {
        return Err(Error::Infeasible(
            "hypothesis condition cannot be met for any damped region in (0,1)".into(),
        ));
    }
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sharp Dirichlet Poincare constant of (0,1): ||u||^2 <= C_P ||u_x||^2.
pub const POINCARE_CONSTANT: f64 = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// C_HP = (4/a(1) + max_{[beta,1]}(1/a) C_P) max_{[0,1]} eta.
pub fn hardy_poincare_constant(
    a: &CoefficientProfile,
    b: &CoefficientProfile,
    beta: f64,
) -> Result<f64> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0,1), got {beta}")));
    }
    let a1 = a.eval(1.0)?;
    if a1 <= 0.0 {
        return Err(Error::InvalidCoefficient("a(1) must be positive".into()));
    }
    let inv_a_max = sup::sup_abs(|x| 1.0 / a.eval_unchecked(x), beta, 1.0, 4000).value;
    let w = WeightEvaluator::new(a.clone(), b.clone());
    let mut eta_max = f64::NEG_INFINITY;
    for i in 0..=2000 {
        let x = i as f64 / 2000.0;
        eta_max = eta_max.max(w.eta(x)?);
    }
    Ok((4.0 / a1 + inv_a_max * POINCARE_CONSTANT) * eta_max)
}

/// Minimizes C_HP over a grid of beta values and returns (beta, constant).
pub fn hardy_poincare_best(
    a: &CoefficientProfile,
    b: &CoefficientProfile,
) -> Result<(f64, f64)> {
    let mut best = (0.5, hardy_poincare_constant(a, b, 0.5)?);
    for i in 1..=9 {
        let beta = i as f64 / 10.0;
        let c = hardy_poincare_constant(a, b, beta)?;
        if c < best.1 {
            best = (beta, c);
        }
    }
    Ok(best)
}
