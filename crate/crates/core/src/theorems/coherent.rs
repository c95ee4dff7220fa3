use std::collections::BTreeMap;

use serde::Serialize;

use crate::aggregators::WorstCaseOf;
use crate::axioms::{audit_axioms, AxiomId, AxiomResult, InstanceFamily};
use crate::cores::Core;
use crate::rng::{any_mass_style, any_value_style, random_scenario, random_values, trial_rng};
use crate::space::OutcomeSpace;

use super::{TheoremError, TheoremStatus};
use rand::Rng;

const PREMISES: [AxiomId; 4] = [AxiomId::C0, AxiomId::C1, AxiomId::B2, AxiomId::Std];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConclusionCheck {
    pub pass: bool,
    pub checked: usize,
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentRepReport {
    pub premises: BTreeMap<AxiomId, AxiomResult>,
    pub premises_hold: bool,
    /// `core(X|P) = E^P[X]`; only checked when all premises pass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<ConclusionCheck>,
    pub status: TheoremStatus,
}

/// Audits additivity, monotonicity, loss law invariance and standardness of
/// the core; when all pass, checks that the core is the expectation.
pub fn verify_coherent_rep(
    core: &dyn Core,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<CoherentRepReport, TheoremError> {
    let target = WorstCaseOf(core);
    let report = audit_axioms(&target, &PREMISES, &InstanceFamily::singletons(), trials, seed, tol);
    let premises_hold = report.all_pass();
    let conclusion = if premises_hold {
        let mut max_gap = 0.0f64;
        for i in 0..trials {
            let mut rng = trial_rng(seed, 0xE5, i as u64);
            let space = OutcomeSpace::new(rng.gen_range(1..=16))?;
            let ms = any_mass_style(&mut rng);
            let vs = any_value_style(&mut rng);
            let p = random_scenario(&mut rng, space, ms).with_id("P");
            let x = random_values(&mut rng, space, vs);
            let gap = (core.eval(&x, &p)? - x.expectation(&p)?).abs();
            if gap > max_gap || gap.is_nan() {
                max_gap = gap;
            }
        }
        Some(ConclusionCheck {
            pass: max_gap <= tol,
            checked: trials,
            max_gap,
        })
    } else {
        None
    };
    let status = TheoremStatus::from_agreement(premises_hold, conclusion.as_ref().is_none_or(|c| c.pass));
    Ok(CoherentRepReport {
        premises: report.results,
        premises_hold,
        conclusion,
        status,
    })
}
