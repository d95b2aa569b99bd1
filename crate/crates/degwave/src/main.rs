//! Command-line front end: hypothesis checks, simulation, spectral and
//! resolvent scans, the combined stability verdict, and a demo that runs
//! the four bundled example configurations end to end.

use clap::{Parser, Subcommand};
use degwave::config::ExperimentConfig;
use degwave::decay::{fit_decay, stability_verdict, StabilityReport};
use degwave::simulate::{dump_state, run_observed};
use degwave::spectral::{dump_spectrum_csv, scan, spectral_abscissa, spectrum};
use degwave::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Fraction of the time horizon used as the decay-fit tail window.
const FIT_WINDOW: f64 = 0.5;

const BUNDLED: [(&str, &str); 4] = [
    ("wd_internal", include_str!("../configs/wd_internal.cfg")),
    ("sd_internal", include_str!("../configs/sd_internal.cfg")),
    ("transmission_wd", include_str!("../configs/transmission_wd.cfg")),
    ("transmission_sd", include_str!("../configs/transmission_sd.cfg")),
];

#[derive(Parser)]
#[command(name = "degwave", version, about = "Degenerate wave equation stability laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML); required for all commands but demo.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory override (default: the config's output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit 1 unless the verdict is EXPONENTIALLY_STABLE.
    #[arg(long, global = true)]
    assert_stable: bool,
    /// Worker threads for the resolvent scan.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized helpers; the pipeline itself is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the coefficient hypothesis and print all constants.
    Check,
    /// Integrate the configured initial data; write the energy trace.
    Simulate,
    /// Compute the generator spectrum; write it as CSV.
    Spectrum,
    /// Scan the resolvent norm along the imaginary axis.
    Resolvent,
    /// Full pipeline: hypothesis, simulation, decay fit, spectrum, scan.
    Verdict,
    /// Run all four bundled example configurations end to end.
    Demo,
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    std::process::exit(match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    });
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match cli.command {
        Command::Demo => cmd_demo(cli),
        _ => {
            let path = cli.config.as_ref().ok_or_else(|| {
                Error::Configuration("this command needs --config <path>".into())
            })?;
            let cfg = ExperimentConfig::load(path)?;
            let out = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
            match cli.command {
                Command::Check => cmd_check(&cfg),
                Command::Simulate => cmd_simulate(&cfg, &out),
                Command::Spectrum => cmd_spectrum(&cfg, &out),
                Command::Resolvent => cmd_resolvent(&cfg, &out),
                Command::Verdict => cmd_verdict(&cfg, &out, cli.assert_stable),
                Command::Demo => unreachable!(),
            }
        }
    }
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(out).map_err(Error::from)?;
    Ok(BufWriter::new(File::create(out.join(name)).map_err(Error::from)?))
}

fn cmd_check(cfg: &ExperimentConfig) -> Result<i32> {
    let report = cfg.hypothesis_report()?;
    print!("{}", report.to_text());
    Ok(if report.verdict { 0 } else { 1 })
}

fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    let g = cfg.build_generator()?;
    let s0 = cfg.initial_state(&g)?;
    let mut initial = create(out, "state_initial.csv")?;
    dump_state(g.mesh(), &s0, &mut initial).map_err(Error::from)?;
    let mut last = s0.clone();
    let trace = run_observed(&g, &s0, cfg.time.dt, cfg.time.t_end, |_, _, s| {
        last = s.clone();
    })?;
    let mut final_out = create(out, "state_final.csv")?;
    dump_state(g.mesh(), &last, &mut final_out).map_err(Error::from)?;
    trace
        .dump_csv(create(out, "trace.csv")?)
        .map_err(Error::from)?;
    println!(
        "steps={} E0={:.6e} E_end={:.6e}",
        trace.times.len() - 1,
        trace.energy[0],
        trace.energy[trace.energy.len() - 1]
    );
    Ok(0)
}

fn cmd_spectrum(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    let g = cfg.build_generator()?;
    let eigs = spectrum(&g)?;
    dump_spectrum_csv(&eigs, create(out, "spectrum.csv")?).map_err(Error::from)?;
    println!("dim={} spectral_abscissa={:.12e}", g.dim(), spectral_abscissa(&eigs));
    Ok(0)
}

fn cmd_resolvent(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    let g = cfg.build_generator()?;
    let res = scan(&g, &cfg.scan_grid()?)?;
    res.dump_csv(create(out, "resolvent.csv")?).map_err(Error::from)?;
    println!("sup_norm={:.12e} bound_kappa={:.12e}", res.sup_norm, res.bound_kappa);
    Ok(0)
}

/// Runs the full pipeline for one configuration, writing every artifact
/// into `out`: trace, spectrum, resolvent scan, verdict text + CSV.
fn run_pipeline(cfg: &ExperimentConfig, out: &Path) -> Result<StabilityReport> {
    let hyp = cfg.hypothesis_report()?;
    let g = cfg.build_generator()?;
    let s0 = cfg.initial_state(&g)?;
    let trace = run_observed(&g, &s0, cfg.time.dt, cfg.time.t_end, |_, _, _| {})?;
    trace
        .dump_csv(create(out, "trace.csv")?)
        .map_err(Error::from)?;
    let fit = fit_decay(&trace, FIT_WINDOW)?;
    let eigs = spectrum(&g)?;
    dump_spectrum_csv(&eigs, create(out, "spectrum.csv")?).map_err(Error::from)?;
    let abscissa = spectral_abscissa(&eigs);
    let res = scan(&g, &cfg.scan_grid()?)?;
    res.dump_csv(create(out, "resolvent.csv")?).map_err(Error::from)?;
    let report = stability_verdict(&hyp, &fit, &res, abscissa)?;
    let mut verdict_txt = create(out, "verdict.txt")?;
    write!(verdict_txt, "{}", report.to_text()).map_err(Error::from)?;
    let mut verdict_csv = create(out, "verdict.csv")?;
    writeln!(verdict_csv, "{}", StabilityReport::csv_header())
        .and_then(|_| writeln!(verdict_csv, "{}", report.to_csv_row()))
        .map_err(Error::from)?;
    Ok(report)
}

fn cmd_verdict(cfg: &ExperimentConfig, out: &Path, assert_stable: bool) -> Result<i32> {
    let report = run_pipeline(cfg, out)?;
    print!("{}", report.to_text());
    Ok(if assert_stable && !report.stable { 1 } else { 0 })
}

fn cmd_demo(cli: &Cli) -> Result<i32> {
    let root = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut all_stable = true;
    let mut rows = Vec::new();
    for (name, text) in BUNDLED {
        let cfg = ExperimentConfig::from_str(text, &root)?;
        let out = root.join(name);
        let mut cfg_copy = create(&out, "config.cfg")?;
        write!(cfg_copy, "{}", cfg.dump()?).map_err(Error::from)?;
        let report = run_pipeline(&cfg, &out)?;
        all_stable &= report.stable;
        rows.push((name, report));
    }
    println!(
        "{:<16} {:>7} {:<9} {:>9} {:>9} {:>12} {:>13} {:>21}",
        "config", "K", "class", "margin1", "margin2", "tau", "abscissa", "verdict"
    );
    for (name, r) in &rows {
        println!(
            "{:<16} {:>7.4} {:<9} {:>9.4} {:>9.4} {:>12.4e} {:>13.4e} {:>21}",
            name,
            r.hypothesis.degeneracy.k,
            r.hypothesis.degeneracy.classification.label(),
            r.hypothesis.margin1,
            r.hypothesis.margin2,
            r.fit.tau,
            r.abscissa,
            r.verdict_label()
        );
    }
    write_plot_script(&root)?;
    println!("artifacts in {}; plot with: gnuplot {}/plots.gp", root.display(), root.display());
    Ok(if cli.assert_stable && !all_stable { 1 } else { 0 })
}

fn write_plot_script(root: &Path) -> Result<()> {
    let mut gp = create(root, "plots.gp")?;
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset terminal pngcairo size 1200,800\n\n");
    s.push_str("set output 'energy.png'\nset logscale y\nset xlabel 't'\nset ylabel 'E(t)'\nplot \\\n");
    for (i, (name, _)) in BUNDLED.iter().enumerate() {
        let sep = if i + 1 < BUNDLED.len() { ", \\\n" } else { "\n" };
        s.push_str(&format!("  '{name}/trace.csv' using 1:2 skip 1 with lines title '{name}'{sep}"));
    }
    s.push_str("\nset output 'resolvent.png'\nset logscale xy\nset xlabel 'lambda'\nset ylabel '||(i lambda - A)^{-1}||'\nplot \\\n");
    for (i, (name, _)) in BUNDLED.iter().enumerate() {
        let sep = if i + 1 < BUNDLED.len() { ", \\\n" } else { "\n" };
        s.push_str(&format!(
            "  '{name}/resolvent.csv' using 1:2 skip 1 with lines title '{name}'{sep}"
        ));
    }
    s.push_str("\nset output 'spectrum.png'\nunset logscale\nset xlabel 'Re'\nset ylabel 'Im'\nplot \\\n");
    for (i, (name, _)) in BUNDLED.iter().enumerate() {
        let sep = if i + 1 < BUNDLED.len() { ", \\\n" } else { "\n" };
        s.push_str(&format!(
            "  '{name}/spectrum.csv' using 1:2 skip 1 with points pt 7 ps 0.3 title '{name}'{sep}"
        ));
    }
    gp.write_all(s.as_bytes()).map_err(Error::from)
}
