//! TOML experiment configuration: one file describes an entire run —
//! coefficients, damping, mesh, time grid, scan grid, initial data and
//! output location. Loading re-validates every constraint owned by the
//! numerical modules, so a config that loads is a config that runs.

use crate::coefficients::{
    check_hypothesis_internal, check_hypothesis_transmission, CoefficientProfile, DampingProfile,
    HypothesisReport, Role, SystemKind,
};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::operator::{CoefficientSet, GeneratorMatrix};
use crate::simulate::InitialCondition;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Smallest accepted mesh resolution for configured experiments. Coarser
/// meshes are fine for unit-scale diagnostics but not for reported runs.
pub const MIN_MESH_CELLS: usize = 16;

/// A coefficient given either in closed form c * x^k or as a two-column
/// CSV table `x,value` covering [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub powerlaw: Option<PowerLawSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawSpec {
    pub c: f64,
    pub k: f64,
}

impl CoefficientSpec {
    pub fn power_law(c: f64, k: f64) -> Self {
        Self { powerlaw: Some(PowerLawSpec { c, k }), table: None }
    }

    /// Resolves the spec to a profile; table paths are taken relative to
    /// `base` (the config file's directory).
    pub fn build(&self, role: Role, base: &Path) -> Result<CoefficientProfile> {
        match (&self.powerlaw, &self.table) {
            (Some(p), None) => CoefficientProfile::power_law(role, p.c, p.k),
            (None, Some(rel)) => {
                let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
                let samples = read_table(&path)?;
                CoefficientProfile::tabulated(role, &samples)
            }
            _ => Err(Error::Configuration(
                "coefficient spec needs exactly one of `powerlaw` or `table`".into(),
            )),
        }
    }
}

fn read_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Configuration(format!("cannot read table {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (ln == 0 && line.starts_with('x')) {
            continue;
        }
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Configuration(format!("{}:{}: missing column", path.display(), ln + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Configuration(format!("{}:{}: {e}", path.display(), ln + 1)))
        };
        rows.push((parse(it.next())?, parse(it.next())?));
    }
    Ok(rows)
}

/// Internal-damping geometry: h = alpha1 on (x1, x1+eps], alpha2 on
/// [x2-eps, x2), linear in between, supported in (x1, x2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSpec {
    pub x1: f64,
    pub x2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub epsilon: f64,
}

/// Transmission geometry: degenerate equation on (0, 1), classical wave
/// on (1, L), feedback at x = L when `boundary_damping` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionSpec {
    pub l: f64,
    pub boundary_damping: bool,
    /// Cells on the classical side; defaults to the left count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_right: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub n: usize,
    /// Power grading of the node distribution; 1 = uniform.
    pub grading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum InitialSpec {
    /// sin(mode * pi * x / L), zero velocity.
    Sine { mode: usize },
    /// Gaussian displacement pulse, zero velocity.
    Gaussian { center: f64, width: f64 },
    /// Snapshot CSV written by a previous run.
    File { path: PathBuf },
    /// Real part of the eigenvector with the largest real-part eigenvalue;
    /// isolates the asymptotic decay rate.
    SlowestMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemKind,
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<DampingSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transmission: Option<TransmissionSpec>,
    pub mesh: MeshSpec,
    pub time: TimeSpec,
    pub scan: ScanSpec,
    pub initial: InitialSpec,
    pub output_dir: PathBuf,
    /// Directory table paths resolve against; set on load, not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::Configuration(format!("config parse error: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        Self::from_str(&text, &base)
    }

    /// Serializes back to TOML; a dump reloads to an equal config.
    pub fn dump(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Configuration(format!("config serialize error: {e}")))
    }

    /// Re-checks every module-owned constraint so failures surface at load
    /// time with a configuration error rather than mid-pipeline.
    pub fn validate(&self) -> Result<()> {
        if self.mesh.n < MIN_MESH_CELLS {
            return Err(Error::Configuration(format!(
                "mesh.n = {} is below the minimum {MIN_MESH_CELLS}",
                self.mesh.n
            )));
        }
        match self.system {
            SystemKind::InternalDamping => {
                if self.transmission.is_some() {
                    return Err(Error::Configuration(
                        "internal-damping config must not carry a [transmission] section".into(),
                    ));
                }
                if let Some(d) = &self.damping {
                    DampingProfile::new(d.x1, d.x2, d.alpha1, d.alpha2)?;
                    if !(d.epsilon > 0.0 && d.x1 + 2.0 * d.epsilon < d.x2 - 2.0 * d.epsilon) {
                        return Err(Error::Configuration(format!(
                            "need 0 < eps and x1 + 2eps < x2 - 2eps, got x1={}, x2={}, eps={}",
                            d.x1, d.x2, d.epsilon
                        )));
                    }
                }
            }
            SystemKind::Transmission => {
                if self.damping.is_some() {
                    return Err(Error::Configuration(
                        "transmission config must not carry a [damping] section".into(),
                    ));
                }
                let t = self.transmission.as_ref().ok_or_else(|| {
                    Error::Configuration("transmission config needs a [transmission] section".into())
                })?;
                if t.l <= 1.0 {
                    return Err(Error::Configuration(format!(
                        "transmission length L must exceed 1, got {}",
                        t.l
                    )));
                }
                if t.n_right.unwrap_or(self.mesh.n) < MIN_MESH_CELLS {
                    return Err(Error::Configuration(format!(
                        "transmission.n_right = {} is below the minimum {MIN_MESH_CELLS}",
                        t.n_right.unwrap_or(self.mesh.n)
                    )));
                }
            }
        }
        if !(self.time.dt > 0.0 && self.time.t_end > 0.0) {
            return Err(Error::Configuration(format!(
                "time step and horizon must be positive, got dt={}, t_end={}",
                self.time.dt, self.time.t_end
            )));
        }
        if self.time.t_end < self.time.dt {
            return Err(Error::Configuration("time.t_end is shorter than one step".into()));
        }
        crate::spectral::logspace(self.scan.lo, self.scan.hi, self.scan.points)?;
        // Build the profiles once to surface range errors (this re-runs on
        // the accessors; profile construction is cheap).
        self.profile_a()?;
        self.profile_b()?;
        Ok(())
    }

    pub fn profile_a(&self) -> Result<CoefficientProfile> {
        self.a.build(Role::Diffusion, &self.base_dir)
    }

    pub fn profile_b(&self) -> Result<CoefficientProfile> {
        self.b.build(Role::Drift, &self.base_dir)
    }

    pub fn coefficient_set(&self) -> Result<CoefficientSet> {
        let damping = match &self.damping {
            Some(d) => Some(DampingProfile::new(d.x1, d.x2, d.alpha1, d.alpha2)?),
            None => None,
        };
        Ok(CoefficientSet::new(self.profile_a()?, self.profile_b()?, damping))
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match (&self.system, &self.transmission) {
            (SystemKind::Transmission, Some(t)) => Mesh::build_composite(
                self.mesh.n,
                self.mesh.grading,
                t.n_right.unwrap_or(self.mesh.n),
                t.l,
            ),
            _ => Mesh::build_graded(self.mesh.n, self.mesh.grading),
        }
    }

    pub fn build_generator(&self) -> Result<GeneratorMatrix> {
        let mesh = self.build_mesh()?;
        let coeffs = self.coefficient_set()?;
        match (&self.system, &self.transmission) {
            (SystemKind::Transmission, Some(t)) => {
                GeneratorMatrix::assemble_transmission(&mesh, &coeffs, t.l, t.boundary_damping)
            }
            _ => GeneratorMatrix::assemble_internal(&mesh, &coeffs),
        }
    }

    /// Hypothesis check for this configuration. Internal configs without a
    /// damping section are conservative and fail by construction.
    pub fn hypothesis_report(&self) -> Result<HypothesisReport> {
        let a = self.profile_a()?;
        let b = self.profile_b()?;
        match self.system {
            SystemKind::InternalDamping => match &self.damping {
                Some(d) => check_hypothesis_internal(&a, &b, d.x1, d.x2, d.epsilon),
                None => {
                    // No damped region at all: the hypothesis fails outright.
                    use crate::coefficients::{
                        degeneracy_constant, HypothesisConstants, MConstants,
                    };
                    let deg = degeneracy_constant(&a)?;
                    Ok(HypothesisReport {
                        system: SystemKind::InternalDamping,
                        bound1: 1.0 - deg.k / 2.0,
                        degeneracy: deg,
                        constants: HypothesisConstants::M(MConstants {
                            m01: f64::INFINITY,
                            m02: f64::INFINITY,
                            m11: f64::INFINITY,
                            m12: f64::INFINITY,
                            epsilon: 0.0,
                            x1: 0.0,
                            x2: 0.0,
                        }),
                        margin1: f64::NEG_INFINITY,
                        margin2: f64::NEG_INFINITY,
                        verdict: false,
                    })
                }
            },
            SystemKind::Transmission => check_hypothesis_transmission(&a, &b),
        }
    }

    /// Builds the configured initial state on the given generator's mesh.
    pub fn initial_state(&self, g: &GeneratorMatrix) -> Result<crate::operator::StateVector> {
        match &self.initial {
            InitialSpec::Sine { mode } => {
                crate::simulate::initial_condition(g.mesh(), &InitialCondition::SineMode(*mode))
            }
            InitialSpec::Gaussian { center, width } => crate::simulate::initial_condition(
                g.mesh(),
                &InitialCondition::GaussianPulse { center: *center, width: *width },
            ),
            InitialSpec::File { path } => {
                let full = if path.is_absolute() { path.clone() } else { self.base_dir.join(path) };
                crate::simulate::initial_condition(g.mesh(), &InitialCondition::Custom(full))
            }
            InitialSpec::SlowestMode => {
                let (_, s0) = crate::spectral::slowest_mode_state(g)?;
                Ok(s0)
            }
        }
    }

    pub fn scan_grid(&self) -> Result<Vec<f64>> {
        crate::spectral::logspace(self.scan.lo, self.scan.hi, self.scan.points)
    }
}
