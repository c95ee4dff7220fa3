//! Constructive checks of the representation results.
//!
//! Each verifier recovers the representing object (worst-case maximum,
//! distortion, expectation, KL minimizer) and compares it with the measure.
//! A report whose premises hold while its conclusion fails is flagged as
//! [`TheoremStatus::TheoremContradiction`]; that state signals a bug in the
//! implementation or in the instance generator.

mod choquet;
mod coherent;
mod kl;
mod table;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregators::EvalError;
use crate::cores::CoreError;
use crate::space::SpaceError;

pub use choquet::{recover_distortion, verify_choquet_rep, ChoquetGap, ChoquetRepReport, RecoveredDistortion};
pub use coherent::{verify_coherent_rep, CoherentRepReport, ConclusionCheck};
pub use kl::{kl_objective, verify_kl_closed_form, verify_kl_closed_form_with, KlReport, KL_SAMPLES};
pub use table::{verify_worst_case_rep, PsiTable, TableCheck, TableViolation, WorstCaseRepReport, MAX_UNIVERSE};

#[derive(Debug, Error)]
pub enum TheoremError {
    #[error("table lacks an entry for position `{position}` on {subset:?}")]
    IncompleteTable { position: String, subset: Vec<String> },
    #[error("scenario universe of size {0} exceeds the limit of {MAX_UNIVERSE}")]
    UniverseTooLarge(usize),
    #[error("grid infeasible: {0}")]
    GridInfeasible(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<CoreError> for TheoremError {
    fn from(e: CoreError) -> Self {
        TheoremError::Eval(e.into())
    }
}

impl From<SpaceError> for TheoremError {
    fn from(e: SpaceError) -> Self {
        TheoremError::Eval(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TheoremStatus {
    /// Premises and conclusion agree.
    Consistent,
    TheoremContradiction,
}

impl TheoremStatus {
    pub fn from_agreement(premises: bool, conclusion: bool) -> Self {
        if premises && !conclusion {
            TheoremStatus::TheoremContradiction
        } else {
            TheoremStatus::Consistent
        }
    }
}
