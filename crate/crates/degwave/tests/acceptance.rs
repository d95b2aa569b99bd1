//! Acceptance gate: every release criterion as one test, each printing a
//! single `[PASS]`/`[FAIL]` line (visible with `--nocapture`). Tolerances
//! are stated inline next to each assertion.

use degwave::coefficients::{
    check_hypothesis_internal, damped_region_threshold, degeneracy_constant, hardy_poincare_best,
    m_constants, n_constants, sup::sample_grid, CoefficientProfile, DampingProfile, Role,
    WeightEvaluator,
};
use degwave::config::ExperimentConfig;
use degwave::decay::fit_decay;
use degwave::mesh::Mesh;
use degwave::operator::{CoefficientSet, GeneratorMatrix};
use degwave::simulate::{initial_condition, run, InitialCondition};
use degwave::spectral::{
    distance_to_spectrum, logspace, scan, spectral_abscissa, spectrum, ResolventContext,
};
use ndarray_linalg::eigh::Eigh;
use ndarray_linalg::UPLO;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

const BUNDLED: [(&str, &str); 4] = [
    ("wd_internal", include_str!("../configs/wd_internal.cfg")),
    ("sd_internal", include_str!("../configs/sd_internal.cfg")),
    ("transmission_wd", include_str!("../configs/transmission_wd.cfg")),
    ("transmission_sd", include_str!("../configs/transmission_sd.cfg")),
];

fn sqrt_a() -> CoefficientProfile {
    CoefficientProfile::power_law(Role::Diffusion, 1.0, 0.5).unwrap()
}

fn xsqrt_a() -> CoefficientProfile {
    CoefficientProfile::power_law(Role::Diffusion, 1.0, 1.5).unwrap()
}

fn const_b(c: f64) -> CoefficientProfile {
    CoefficientProfile::constant(Role::Drift, c).unwrap()
}

fn linear_b(c: f64) -> CoefficientProfile {
    CoefficientProfile::power_law(Role::Drift, c, 1.0).unwrap()
}

/// Reports the criterion outcome as a single line; panics on failure so the
/// harness counts it.
struct Criterion(&'static str);

impl Criterion {
    fn check(&self, ok: bool, detail: &str) {
        if ok {
            println!("[PASS] {}: {detail}", self.0);
        } else {
            println!("[FAIL] {}: {detail}", self.0);
            panic!("criterion failed: {}: {detail}", self.0);
        }
    }
}

#[test]
fn criterion_01_hypothesis_numerics() {
    let c = Criterion("hypothesis numerics (K and N constants)");
    let k_wd = degeneracy_constant(&sqrt_a()).unwrap().k;
    let k_sd = degeneracy_constant(&xsqrt_a()).unwrap().k;
    let n_wd = n_constants(&sqrt_a(), &const_b(0.5)).unwrap();
    let n_sd = n_constants(&xsqrt_a(), &linear_b(0.125)).unwrap();
    let errs = [
        (k_wd - 0.5).abs(),
        (k_sd - 1.5).abs(),
        (n_wd.n1 - 0.5).abs(),
        (n_wd.n2 - 0.5).abs(),
        (n_sd.n1 - 1.5).abs(),
        (n_sd.n2 - 0.125).abs(),
    ];
    let ok = errs[0] <= 1e-12 && errs[1] <= 1e-12 && errs[2..].iter().all(|e| *e <= 1e-9);
    c.check(
        ok,
        &format!(
            "K = {k_wd:.15}/{k_sd:.15}, N(sqrt) = ({:.12}, {:.12}), N(x^3/2) = ({:.12}, {:.12})",
            n_wd.n1, n_wd.n2, n_sd.n1, n_sd.n2
        ),
    );
}

#[test]
fn criterion_02_thresholds() {
    let c = Criterion("damped-region thresholds");
    let exact = (41.0 - 3.0 * 73.0f64.sqrt()) / 32.0;
    let wd = damped_region_threshold(&sqrt_a(), &const_b(1.0)).unwrap();
    let sd = damped_region_threshold(&xsqrt_a(), &linear_b(0.125)).unwrap();
    let ok = (wd - exact).abs() <= 1e-6
        && format!("{wd:.4}") == "0.4802"
        && (sd - 0.8471).abs() <= 5e-4;
    c.check(ok, &format!("wd = {wd:.7} (closed form {exact:.7}), sd = {sd:.5}"));
}

#[test]
fn criterion_03_hypothesis_verdicts() {
    let c = Criterion("hypothesis verdicts on the bundled examples");
    let mut all = true;
    let mut detail = String::new();
    for (name, text) in BUNDLED {
        let cfg = ExperimentConfig::from_str(text, Path::new(".")).unwrap();
        let verdict = cfg.hypothesis_report().unwrap().verdict;
        all &= verdict;
        detail.push_str(&format!("{name}={verdict} "));
    }
    // Same weakly degenerate pair, damped region shrunk until its full
    // strength part starts at 0.3 — below the 0.4802 threshold.
    let shrunk = check_hypothesis_internal(&sqrt_a(), &const_b(1.0), 0.05, 0.4, 0.05).unwrap();
    all &= !shrunk.verdict;
    detail.push_str(&format!("shrunk={}", shrunk.verdict));
    c.check(all, &detail);
}

fn wd_internal_system(n: usize, damped: bool) -> GeneratorMatrix {
    let damping = damped.then(|| DampingProfile::new(0.05, 0.9, 1.0, 1.0).unwrap());
    let coeffs = CoefficientSet::new(sqrt_a(), const_b(1.0), damping);
    let mesh = Mesh::build_graded(n, 1.0).unwrap();
    GeneratorMatrix::assemble_internal(&mesh, &coeffs).unwrap()
}

fn sd_transmission_system(n: usize, damped: bool) -> GeneratorMatrix {
    let coeffs = CoefficientSet::new(xsqrt_a(), linear_b(0.125), None);
    let mesh = Mesh::build_composite(n, 1.0, n, 2.0).unwrap();
    GeneratorMatrix::assemble_transmission(&mesh, &coeffs, 2.0, damped).unwrap()
}

/// (max eigenvalue of sym(WA), largest |entry| of sym(WA), Frobenius ||WA||).
fn dissipativity_numbers(g: &GeneratorMatrix) -> (f64, f64, f64) {
    let wa = g.energy_weight().dot(g.matrix());
    let sym = 0.5 * (&wa + &wa.t());
    let fro = wa.iter().map(|x| x * x).sum::<f64>().sqrt();
    let max_entry = sym.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (eigs, _) = sym.eigh(UPLO::Lower).unwrap();
    let max_eig = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (max_eig, max_entry, fro)
}

#[test]
fn criterion_04_discrete_dissipativity() {
    let c = Criterion("discrete dissipativity of sym(WA)");
    let mut ok = true;
    let mut detail = String::new();
    for (label, damped, undamped) in [
        ("internal", wd_internal_system(256, true), wd_internal_system(256, false)),
        ("transmission", sd_transmission_system(256, true), sd_transmission_system(256, false)),
    ] {
        let (max_eig, _, fro) = dissipativity_numbers(&damped);
        ok &= max_eig <= 1e-10 * fro;
        let (_, max_entry0, fro0) = dissipativity_numbers(&undamped);
        ok &= max_entry0 <= 1e-12 * fro0;
        detail.push_str(&format!(
            "{label}: max_eig/||WA|| = {:.2e}, undamped residual = {:.2e} ",
            max_eig / fro,
            max_entry0 / fro0
        ));
    }
    c.check(ok, &detail);
}

#[test]
fn criterion_05_energy_conservation() {
    let c = Criterion("energy conservation over 5000 steps");
    let mut ok = true;
    let mut detail = String::new();
    for (label, g) in [
        ("internal", wd_internal_system(64, false)),
        ("transmission", sd_transmission_system(64, false)),
    ] {
        let s0 = initial_condition(
            g.mesh(),
            &InitialCondition::GaussianPulse { center: 0.5, width: 0.1 },
        )
        .unwrap();
        let trace = run(&g, &s0, 1e-3, 5.0).unwrap();
        assert_eq!(trace.energy.len(), 5001);
        let e0 = trace.energy[0];
        let drift = trace
            .energy
            .iter()
            .map(|e| (e - e0).abs() / e0)
            .fold(0.0f64, f64::max);
        ok &= drift < 1e-10;
        detail.push_str(&format!("{label} drift = {drift:.2e} "));
    }
    c.check(ok, &detail);
}

#[test]
fn criterion_06_identity_residual_convergence() {
    let c = Criterion("dissipation identity residual is O(dt^2)");
    let mut ok = true;
    let mut detail = String::new();
    for (label, g) in [
        ("internal", wd_internal_system(64, true)),
        ("transmission", sd_transmission_system(64, true)),
    ] {
        // smooth low-frequency data: the residual's O(dt^2) leading term
        // must not be polluted by barely-resolved modes (omega dt = O(1))
        let s0 = initial_condition(g.mesh(), &InitialCondition::SineMode(1)).unwrap();
        let max_residual = |dt: f64| {
            let trace = run(&g, &s0, dt, 1.0).unwrap();
            trace.identity_residual.iter().skip(1).fold(0.0f64, |m, r| m.max(*r))
        };
        let ratio = max_residual(2e-3) / max_residual(1e-3);
        ok &= (3.0..=5.0).contains(&ratio);
        detail.push_str(&format!("{label} ratio = {ratio:.3} "));
    }
    c.check(ok, &detail);
}

#[test]
fn criterion_07_exponential_stability_pipeline() {
    let c = Criterion("exponential stability of all four examples");
    let mut ok = true;
    let mut detail = String::new();
    for (name, text) in BUNDLED {
        let cfg = ExperimentConfig::from_str(text, Path::new(".")).unwrap();
        let g = cfg.build_generator().unwrap();
        let s0 = cfg.initial_state(&g).unwrap();
        let trace = run(&g, &s0, cfg.time.dt, cfg.time.t_end).unwrap();
        let fit = fit_decay(&trace, 0.5).unwrap();
        let abscissa = spectral_abscissa(&spectrum(&g).unwrap());
        let res = scan(&g, &cfg.scan_grid().unwrap()).unwrap();
        let agreement = (fit.tau - (-abscissa)).abs() / abscissa.abs();
        ok &= fit.tau > 0.0
            && fit.r_squared > 0.99
            && abscissa < 0.0
            && res.sup_norm.is_finite()
            && agreement < 0.2;
        detail.push_str(&format!(
            "{name}: tau = {:.3e}, r2 = {:.4}, abscissa = {:.3e}, agreement = {:.3} | ",
            fit.tau, fit.r_squared, abscissa, agreement
        ));
    }
    c.check(ok, &detail);
}

#[test]
fn criterion_08_hardy_poincare() {
    let c = Criterion("Hardy-Poincare inequality on random test functions");
    const CELLS: usize = 1024;
    const FUNCS: usize = 200;
    const MODES: usize = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let pairs = [(sqrt_a(), const_b(1.0)), (xsqrt_a(), linear_b(0.125))];
    let sigmas: Vec<Vec<f64>> = pairs
        .iter()
        .map(|(a, b)| {
            let w = WeightEvaluator::new(a.clone(), b.clone());
            (1..CELLS).map(|i| w.sigma(i as f64 / CELLS as f64).unwrap()).collect()
        })
        .collect();
    let constants: Vec<f64> =
        pairs.iter().map(|(a, b)| hardy_poincare_best(a, b).unwrap().1).collect();
    let h = 1.0 / CELLS as f64;
    let mut violations = 0usize;
    let mut min_slack = f64::INFINITY;
    for _ in 0..FUNCS {
        let coef: Vec<f64> = (0..MODES).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = |x: f64| -> f64 {
            coef.iter()
                .enumerate()
                .map(|(k, ck)| ck * ((k + 1) as f64 * std::f64::consts::PI * x).sin())
                .sum()
        };
        let ux = |x: f64| -> f64 {
            coef.iter()
                .enumerate()
                .map(|(k, ck)| {
                    let w = (k + 1) as f64 * std::f64::consts::PI;
                    ck * w * (w * x).cos()
                })
                .sum()
        };
        // trapezoid on the uniform grid; boundary terms vanish (u = 0)
        let grad: f64 = (0..=CELLS)
            .map(|i| {
                let w = if i == 0 || i == CELLS { 0.5 } else { 1.0 };
                w * ux(i as f64 / CELLS as f64).powi(2)
            })
            .sum::<f64>()
            * h;
        for (sigma, chp) in sigmas.iter().zip(constants.iter()) {
            let weighted: f64 = (1..CELLS)
                .map(|i| u(i as f64 / CELLS as f64).powi(2) / sigma[i - 1])
                .sum::<f64>()
                * h;
            min_slack = min_slack.min(chp * grad - weighted);
            if weighted > chp * grad {
                violations += 1;
            }
        }
        // raw Hardy inequality with the classical constant 4
        let hardy: f64 = (1..CELLS)
            .map(|i| {
                let x = i as f64 / CELLS as f64;
                (u(x) / x).powi(2)
            })
            .sum::<f64>()
            * h;
        min_slack = min_slack.min(4.0 * grad - hardy);
        if hardy > 4.0 * grad {
            violations += 1;
        }
    }
    c.check(
        violations == 0,
        &format!("{FUNCS} functions x 3 inequalities, violations = {violations}, min slack = {min_slack:.3e}"),
    );
}

/// Plain max over a 10^6-point sample grid — the refinement-free oracle.
fn brute_sup(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    sample_grid(lo, hi, 1_000_000)
        .into_iter()
        .map(|x| f(x).abs())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_09_oracle_equivalence() {
    let c = Criterion("M/N constants vs brute-force sampler");
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1e-300);
    let mut worst = 0.0f64;

    for (a, b, x1, x2, eps) in [
        (sqrt_a(), const_b(1.0), 0.05, 0.9, 0.05),
        (xsqrt_a(), linear_b(0.125), 0.22, 0.98, 0.04),
    ] {
        let m = m_constants(&a, &b, x1, x2, eps).unwrap();
        let (left, right) = (x1 + 2.0 * eps, x2 - 2.0 * eps);
        let drift = |x: f64| x * b.eval_unchecked(x) / a.eval_unchecked(x);
        let deriv = |x: f64| x * (a.deriv(x) - b.eval_unchecked(x)) / a.eval_unchecked(x);
        let tail_drift = |x: f64| (x - 1.0) * b.eval_unchecked(x) / a.eval_unchecked(x);
        let tail_deriv =
            |x: f64| (x - 1.0) * (a.deriv(x) - b.eval_unchecked(x)) / a.eval_unchecked(x);
        worst = worst
            .max(rel(m.m01, brute_sup(drift, 0.0, left)))
            .max(rel(m.m02, brute_sup(deriv, 0.0, left)))
            .max(rel(m.m11, brute_sup(tail_drift, right, 1.0)))
            .max(rel(m.m12, brute_sup(tail_deriv, right, 1.0)));
    }
    for (a, b) in [(sqrt_a(), const_b(0.5)), (xsqrt_a(), linear_b(0.125))] {
        let n = n_constants(&a, &b).unwrap();
        let drift = |x: f64| x * b.eval_unchecked(x) / a.eval_unchecked(x);
        let deriv = |x: f64| x * (a.deriv(x) - b.eval_unchecked(x)) / a.eval_unchecked(x);
        worst = worst
            .max(rel(n.n1, brute_sup(deriv, 0.0, 1.0)))
            .max(rel(n.n2, brute_sup(drift, 0.0, 1.0)));
    }
    c.check(worst <= 1e-6, &format!("worst relative deviation = {worst:.3e}"));
}

#[test]
fn criterion_10_frequency_domain_sanity() {
    let c = Criterion("frequency-domain sanity");
    let g = wd_internal_system(64, true);
    let eigs = spectrum(&g).unwrap();
    let ctx = ResolventContext::new(&g).unwrap();
    let grid = logspace(0.1, 100.0, 60).unwrap();
    let mut sym_err = 0.0f64;
    let mut dist_ok = true;
    for &l in &grid {
        let plus = ctx.norm_at(l);
        let minus = ctx.norm_at(-l);
        sym_err = sym_err.max((plus - minus).abs() / plus);
        dist_ok &= plus >= (1.0 / distance_to_spectrum(&eigs, l)) * (1.0 - 1e-10);
    }

    // conservative string: imaginary eigenvalues approach +-ik*pi at O(n^-2)
    let string_modes = |n: usize| -> Vec<f64> {
        let coeffs = CoefficientSet::new(
            CoefficientProfile::power_law(Role::Diffusion, 1.0, 0.0).unwrap(),
            CoefficientProfile::zero_drift(),
            None,
        );
        let mesh = Mesh::build_graded(n, 1.0).unwrap();
        let g = GeneratorMatrix::assemble_internal(&mesh, &coeffs).unwrap();
        let mut pos: Vec<f64> = spectrum(&g)
            .unwrap()
            .into_iter()
            .filter(|z| z.im > 0.0)
            .map(|z| z.im)
            .collect();
        pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pos
    };
    let errs: Vec<f64> = [64, 128, 256]
        .map(|n| {
            let modes = string_modes(n);
            (1..=5)
                .map(|k| (modes[k - 1] - k as f64 * std::f64::consts::PI).abs())
                .fold(0.0f64, f64::max)
        })
        .to_vec();
    let order1 = (errs[0] / errs[1]).log2();
    let order2 = (errs[1] / errs[2]).log2();
    let ok = sym_err <= 1e-10 && dist_ok && order1 >= 1.8 && order2 >= 1.8;
    c.check(
        ok,
        &format!(
            "symmetry error = {sym_err:.2e}, norm >= 1/dist on all 60 points = {dist_ok}, orders = {order1:.2}/{order2:.2}"
        ),
    );
}
