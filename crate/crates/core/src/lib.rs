//! Generalized risk measures `Psi(X | Q)` on finite outcome spaces.
//!
//! A loss `X` is evaluated against a *set* of probability scenarios `Q`
//! rather than a single fixed model. The crate provides
//!
//! - [`space`]: outcome spaces, scenarios, laws and the couplings used by the
//!   property checks (identically distributed pairs, comonotone pairs, mixtures);
//! - [`cores`]: single-scenario measures (VaR, ES, Choquet/distortion,
//!   penalized mean, expected utility, certainty equivalent);
//! - [`aggregators`]: worst-case, average, multi-prior, variational, smooth
//!   ambiguity and misspecification aggregation over scenario sets;
//! - [`axioms`]: randomized audits and witness search for the axiom families;
//! - [`theorems`]: constructive checks of the representation results;
//! - [`cli`]: the JSON file formats and the `genrisk` command-line driver.

pub mod aggregators;
pub mod axioms;
pub mod cli;
pub mod cores;
pub mod rng;
pub mod space;
pub mod theorems;

pub use aggregators::{AggregatorSpec, EvalError, GeneralizedRiskMeasure, Measure};
pub use cores::{Core, CoreError, CoreSpec, Distortion, PenaltyFunction, UtilityFunction};
pub use space::{
    DiscreteDistribution, Event, OutcomeSpace, RandomVariable, Scenario, ScenarioSet, SpaceError,
};
