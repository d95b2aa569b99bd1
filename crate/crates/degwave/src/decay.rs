//! Decay-rate estimation from energy traces and the combined stability
//! verdict.
//!
//! The fit is on log E over a tail window; since energy is quadratic in the
//! state, the fitted slope is -2 tau where tau is the state-norm rate
//! (E(t) ~ E(0) m e^{-2 tau t}).

use crate::coefficients::HypothesisReport;
use crate::error::{Error, Result};
use crate::simulate::EnergyTrace;
use crate::spectral::ResolventScan;
use std::fmt::Write as _;

const ENERGY_FLOOR: f64 = 1e-300;
const MIN_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Fitted prefactor m in E(t) ~ E(0) m e^{-2 tau t}.
    pub m_factor: f64,
    /// Fitted state-norm decay rate (energy slope is -2 tau).
    pub tau: f64,
    pub r_squared: f64,
    /// (t_start, t_end) of the fit window.
    pub window: (f64, f64),
    /// Set when the trace shows no measurable decay (flat log-energy).
    pub no_decay: bool,
}

/// Least-squares line through (t, log E) over the trailing
/// `window_fraction` of the time span.
pub fn fit_decay(trace: &EnergyTrace, window_fraction: f64) -> Result<DecayFit> {
    if !(0.0 < window_fraction && window_fraction <= 1.0) {
        return Err(Error::Configuration(format!(
            "window fraction must lie in (0,1], got {window_fraction}"
        )));
    }
    let (t0, t_end) = match (trace.times.first(), trace.times.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => return Err(Error::FitInfeasible("trace too short to fit".into())),
    };
    let t_start = t_end - window_fraction * (t_end - t0);
    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(trace.energy.iter())
        .filter(|(t, e)| **t >= t_start && **e > ENERGY_FLOOR)
        .map(|(t, e)| (*t, e.ln()))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::FitInfeasible(format!(
            "only {} usable samples in the fit window (need >= {MIN_SAMPLES})",
            pts.len()
        )));
    }

    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;

    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    // flat log-energy: the regression is degenerate; report a perfect flat
    // fit with the no-decay flag rather than 0/0
    let flat = ss_tot <= 1e-18 * n * mean_y.abs().max(1.0).powi(2);
    let r_squared = if flat { 1.0 } else { 1.0 - ss_res / ss_tot };

    let tau = -slope / 2.0;
    let e0 = trace.energy[0];
    let m_factor = if e0 > 0.0 { intercept.exp() / e0 } else { f64::NAN };
    Ok(DecayFit {
        m_factor,
        tau,
        r_squared,
        window: (t_start, t_end),
        no_decay: flat || tau.abs() < 1e-9,
    })
}

/// Aggregated stability evidence.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub hypothesis: HypothesisReport,
    pub fit: DecayFit,
    pub sup_norm: f64,
    pub bound_kappa: f64,
    pub abscissa: f64,
    /// |tau - (-abscissa)| / |abscissa|.
    pub agreement_ratio: f64,
    pub stable: bool,
    pub failed_pillars: Vec<&'static str>,
}

/// EXPONENTIALLY_STABLE requires: hypothesis verdict, fitted tau > 0,
/// negative spectral abscissa and a finite resolvent sup along the scan.
pub fn stability_verdict(
    hyp: &HypothesisReport,
    fit: &DecayFit,
    scanres: &ResolventScan,
    abscissa: f64,
) -> Result<StabilityReport> {
    if scanres.lambdas.is_empty() {
        return Err(Error::Contract("stability verdict needs a non-empty resolvent scan".into()));
    }
    if !abscissa.is_finite() {
        return Err(Error::Contract(format!("spectral abscissa is not finite: {abscissa}")));
    }
    let mut failed = Vec::new();
    if !hyp.verdict {
        failed.push("hypothesis");
    }
    if !(fit.tau > 0.0 && !fit.no_decay) {
        failed.push("decay-rate");
    }
    if !(abscissa < 0.0) {
        failed.push("spectral-abscissa");
    }
    if !scanres.sup_norm.is_finite() {
        failed.push("resolvent-sup");
    }
    let agreement_ratio = if abscissa != 0.0 {
        (fit.tau - (-abscissa)).abs() / abscissa.abs()
    } else {
        f64::INFINITY
    };
    Ok(StabilityReport {
        hypothesis: hyp.clone(),
        fit: *fit,
        sup_norm: scanres.sup_norm,
        bound_kappa: scanres.bound_kappa,
        abscissa,
        agreement_ratio,
        stable: failed.is_empty(),
        failed_pillars: failed,
    })
}

impl StabilityReport {
    pub fn verdict_label(&self) -> &'static str {
        if self.stable {
            "EXPONENTIALLY_STABLE"
        } else {
            "NOT_STABLE"
        }
    }

    /// Flat key=value report (energy slope is -2 tau by convention; both
    /// rates below are state-norm rates).
    pub fn to_text(&self) -> String {
        let mut s = self.hypothesis.to_text();
        let _ = writeln!(s, "tau={:.12}", self.fit.tau);
        let _ = writeln!(s, "m_factor={:.12}", self.fit.m_factor);
        let _ = writeln!(s, "r_squared={:.12}", self.fit.r_squared);
        let _ = writeln!(s, "fit_window_start={:.12}", self.fit.window.0);
        let _ = writeln!(s, "fit_window_end={:.12}", self.fit.window.1);
        let _ = writeln!(s, "no_decay={}", self.fit.no_decay);
        let _ = writeln!(s, "spectral_abscissa={:.12}", self.abscissa);
        let _ = writeln!(s, "resolvent_sup={:.12}", self.sup_norm);
        let _ = writeln!(s, "bound_kappa={:.12}", self.bound_kappa);
        let _ = writeln!(s, "tau_vs_abscissa_ratio={:.12}", self.agreement_ratio);
        let _ = writeln!(s, "failed_pillars={}", self.failed_pillars.join("+"));
        let _ = writeln!(s, "stability={}", self.verdict_label());
        s
    }

    pub fn csv_header() -> &'static str {
        "system,hypothesis,tau,m_factor,r_squared,no_decay,abscissa,resolvent_sup,bound_kappa,agreement_ratio,stability"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:.12},{:.12},{:.12},{},{:.12},{:.12},{:.12},{:.12},{}",
            self.hypothesis.system.label(),
            self.hypothesis.verdict,
            self.fit.tau,
            self.fit.m_factor,
            self.fit.r_squared,
            self.fit.no_decay,
            self.abscissa,
            self.sup_norm,
            self.bound_kappa,
            self.agreement_ratio,
            self.verdict_label()
        )
    }
}
