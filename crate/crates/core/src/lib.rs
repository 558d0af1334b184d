//! Shannon differential and discrete entropy, Kullback-Leibler divergence and
//! variation distance for explicitly represented densities and PMFs, with
//! certificates for entropy convergence of density sequences.
//!
//! All logarithms are base 2.

pub mod certificate;
pub mod certifier;
pub mod density;
pub mod discrete;
mod error;
pub mod measures;
pub mod probe;
pub mod quadrature;
pub mod scenarios;
pub mod sweep;

pub use certificate::{Certificate, Consistency, Hypothesis, HypothesisStatus, Theorem, Verdict};
pub use certifier::{
    certify_corollary, certify_discrete_pointwise, certify_thm1, certify_thm2, certify_thm3,
    kl_decomposition_check, CertifyOptions, DeclaredBounds, FamilySpec,
};
pub use density::{Density, Direction, Point, RatioFunction, StepFunction, SupportSpec};
pub use discrete::{
    discrete_entropy, discrete_kl, discrete_variation, equivalence_diagnostic, DiscreteFamily,
    DiscretePmf,
};
pub use error::{Error, Result};
pub use measures::{
    differential_entropy, kl_divergence, kolmogorov_distance, pinsker_check, variation_distance,
    Finiteness, MeasureOptions, MeasureValue, Quantity,
};
pub use scenarios::{Scenario, ScenarioFamily};
pub use sweep::{SweepRecord, QuantitySet};
