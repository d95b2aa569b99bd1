//! Coefficient functions and the hypothesis machinery built on them:
//! degeneracy constant, Feller weight, localized sup constants and the
//! stability hypotheses of both systems.

mod hypotheses;
mod profile;
pub mod sup;
mod weight;

pub use hypotheses::{
    check_hypothesis_internal, check_hypothesis_transmission, damped_region_threshold,
    degeneracy_constant, hardy_poincare_best, hardy_poincare_constant, m_constants, n_constants,
    Degeneracy, DegeneracyReport, HypothesisConstants, HypothesisReport, MConstants, NConstants,
    SystemKind, POINCARE_CONSTANT,
};
pub use profile::{CoefficientProfile, DampingProfile, MonotoneCubic, ProfileKind, Role};
pub use weight::WeightEvaluator;
