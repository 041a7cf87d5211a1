//! Bayesian direct and inverse problems for abstract argumentation.
//!
//! The generative model places an independent Bernoulli prior on every
//! attack variable and, given an attack relation, labels each set of
//! arguments acceptable with a probability determined by how well the set
//! agrees with the relation's extensions. On top of this the crate offers
//! exact posterior enumeration, Gibbs sampling, ML/MAP estimation,
//! evidence and posterior-predictive queries, and an experiment harness.
//!
//! Module map:
//! - [`af`]: frameworks and grounded/complete/preferred/stable extensions.
//! - [`space`]: attack variables, priors, clamps, assignments, observations.
//! - [`accept`]: agreement counts and the acceptability parameters.
//! - [`bayes`]: exact inference by enumeration.
//! - [`gibbs`]: the Gibbs sampler.
//! - [`io`]: file formats.
//! - [`harness`]: cross-validation and synthetic experiments.

pub mod accept;
pub mod af;
pub mod bayes;
pub mod error;
pub mod gibbs;
pub mod harness;
pub mod io;
pub mod space;

pub use accept::{Evaluator, ModelConfig, ParameterFamily};
pub use af::{
    ArgSet, ArgumentNames, ArgumentationFramework, ExtensionSet, NamedFramework, Semantics,
};
pub use bayes::{PosteriorDistribution, PosteriorKind};
pub use error::{Error, Result};
pub use gibbs::{GibbsConfig, SampleHistogram};
pub use space::{AttackAssignment, AttackVariableSpace, Observation, VariableMode};
