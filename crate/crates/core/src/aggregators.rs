//! Generalized risk measures `Psi(X | Q)` built from cores.
//!
//! Scenario sets are finite, so every `sup`/`min` is a max/min over the set;
//! ties resolve to the first scenario in input order.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cores::{
    certainty_equivalent, kl_divergence, Core, CoreError, CoreSpec, PenaltyFunction,
    UtilityFunction,
};
use crate::space::{OutcomeSpace, RandomVariable, Scenario, ScenarioSet, SpaceError};

/// Tolerance under which two multi-prior values compare equal.
pub const COMPARE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("scenario set is empty")]
    EmptyScenarioSet,
    #[error("weights do not match the scenario set: {0}")]
    WeightMismatch(String),
    #[error("every scenario carries an infinite penalty")]
    AllExcluded,
    #[error("invalid aggregator: {0}")]
    Invalid(String),
}

impl From<SpaceError> for EvalError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::EmptyScenarioSet => EvalError::EmptyScenarioSet,
            other => EvalError::Core(CoreError::Space(other)),
        }
    }
}

/// How the variational aggregator is signed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationalSign {
    /// `min_P (E^P[u(X)] - gamma(P))`, the preference-functional form.
    UtilityMin,
    /// `sup_P (psi(F_{X|P}) - gamma(P))` with `psi` the core, the risk form.
    RiskSup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MisspecificationCost {
    Kl,
    Zero,
}

/// Candidate scenarios for the outer minimum of the misspecification criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CandidateGrid {
    Explicit(Vec<Scenario>),
    /// All masses `k_i / resolution` on the simplex.
    Lattice { lattice: usize },
}

impl CandidateGrid {
    pub fn scenarios(&self, space: OutcomeSpace) -> Result<Vec<Scenario>, EvalError> {
        match self {
            CandidateGrid::Explicit(v) => {
                if v.is_empty() {
                    return Err(EvalError::EmptyScenarioSet);
                }
                if let Some(s) = v.iter().find(|s| s.len() != space.size()) {
                    return Err(SpaceError::LengthMismatch {
                        expected: space.size(),
                        got: s.len(),
                    }
                    .into());
                }
                Ok(v.clone())
            }
            CandidateGrid::Lattice { lattice } => simplex_lattice(space, *lattice),
        }
    }
}

/// Every scenario whose masses are multiples of `1 / resolution`.
pub fn simplex_lattice(space: OutcomeSpace, resolution: usize) -> Result<Vec<Scenario>, EvalError> {
    if resolution == 0 {
        return Err(EvalError::Invalid("lattice resolution must be positive".into()));
    }
    let n = space.size();
    let mut out = Vec::new();
    let mut counts = vec![0usize; n];
    fn rec(
        i: usize,
        left: usize,
        counts: &mut Vec<usize>,
        resolution: usize,
        space: OutcomeSpace,
        out: &mut Vec<Scenario>,
    ) -> Result<(), EvalError> {
        let n = counts.len();
        if i + 1 == n {
            counts[i] = left;
            let mass = counts.iter().map(|&c| c as f64 / resolution as f64).collect();
            out.push(Scenario::new(space, mass)?);
            return Ok(());
        }
        for c in 0..=left {
            counts[i] = c;
            rec(i + 1, left - c, counts, resolution, space, out)?;
        }
        Ok(())
    }
    rec(0, resolution, &mut counts, resolution, space, &mut out)?;
    Ok(out)
}

/// How `Psi(. | Q)` is assembled from single-scenario evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AggregatorSpec {
    WorstCase,
    /// Weighted average, weights keyed by scenario id. On a sub-collection the
    /// restricted weights are renormalized.
    Average { weights: BTreeMap<String, f64> },
    MultiPrior { utility: UtilityFunction },
    Variational {
        utility: UtilityFunction,
        penalty: PenaltyFunction,
        sign: VariationalSign,
    },
    Smooth {
        utility: UtilityFunction,
        phi: UtilityFunction,
        weights: BTreeMap<String, f64>,
    },
    Misspecification {
        utility: UtilityFunction,
        cost: MisspecificationCost,
        candidates: CandidateGrid,
    },
}

impl AggregatorSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        let check_weights = |w: &BTreeMap<String, f64>| -> Result<(), EvalError> {
            if w.is_empty() {
                return Err(EvalError::WeightMismatch("no weights given".into()));
            }
            if let Some((id, v)) = w.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                return Err(EvalError::WeightMismatch(format!(
                    "weight {v} for `{id}` is not a nonnegative number"
                )));
            }
            let total: f64 = w.values().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(EvalError::WeightMismatch(format!(
                    "weights sum to {total}, not 1"
                )));
            }
            Ok(())
        };
        match self {
            AggregatorSpec::WorstCase => Ok(()),
            AggregatorSpec::Average { weights } => check_weights(weights),
            AggregatorSpec::MultiPrior { utility } => Ok(utility.validate()?),
            AggregatorSpec::Variational {
                utility, penalty, ..
            } => {
                utility.validate()?;
                Ok(penalty.validate()?)
            }
            AggregatorSpec::Smooth {
                utility,
                phi,
                weights,
            } => {
                utility.validate()?;
                phi.validate()?;
                check_weights(weights)
            }
            AggregatorSpec::Misspecification {
                utility,
                candidates,
                ..
            } => {
                utility.validate()?;
                match candidates {
                    CandidateGrid::Explicit(v) if v.is_empty() => Err(EvalError::EmptyScenarioSet),
                    CandidateGrid::Lattice { lattice: 0 } => {
                        Err(EvalError::Invalid("lattice resolution must be positive".into()))
                    }
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Anything that evaluates a loss against a scenario set.
pub trait Measure: Send + Sync {
    fn eval_set(&self, x: &RandomVariable, q: &ScenarioSet) -> Result<f64, EvalError>;

    /// `Psi(X | P) = Psi(X | {P})`.
    fn eval_single(&self, x: &RandomVariable, p: &Scenario) -> Result<f64, EvalError> {
        self.eval_set(x, &ScenarioSet::singleton(p.clone()))
    }

    fn regime_alpha(&self) -> Option<f64> {
        None
    }
}

/// A core paired with an aggregator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedRiskMeasure {
    pub core: CoreSpec,
    pub aggregator: AggregatorSpec,
}

impl GeneralizedRiskMeasure {
    pub fn new(core: CoreSpec, aggregator: AggregatorSpec) -> Result<Self, EvalError> {
        core.validate()?;
        aggregator.validate()?;
        Ok(Self { core, aggregator })
    }

    pub fn worst_case(core: CoreSpec) -> Self {
        Self {
            core,
            aggregator: AggregatorSpec::WorstCase,
        }
    }

    pub fn evaluate(&self, x: &RandomVariable, q: &ScenarioSet) -> Result<f64, EvalError> {
        match &self.aggregator {
            AggregatorSpec::WorstCase => worst_case_eval(&self.core, x, q),
            AggregatorSpec::Average { weights } => {
                average_eval(&self.core, x, q, &restricted_weights(weights, q)?)
            }
            AggregatorSpec::MultiPrior { utility } => multi_prior_eval(utility, x, q),
            AggregatorSpec::Variational {
                utility,
                penalty,
                sign,
            } => variational_eval(utility, penalty, &self.core, x, q, *sign),
            AggregatorSpec::Smooth {
                utility,
                phi,
                weights,
            } => smooth_ambiguity_eval(utility, phi, x, q, &restricted_weights(weights, q)?),
            AggregatorSpec::Misspecification {
                utility,
                cost,
                candidates,
            } => {
                let cands = candidates.scenarios(q.space())?;
                misspecification_eval(utility, *cost, x, q, &cands)
            }
        }
    }
}

impl Measure for GeneralizedRiskMeasure {
    fn eval_set(&self, x: &RandomVariable, q: &ScenarioSet) -> Result<f64, EvalError> {
        self.evaluate(x, q)
    }

    fn regime_alpha(&self) -> Option<f64> {
        self.core.regime_alpha()
    }
}

/// The worst-case measure induced by an arbitrary core.
pub struct WorstCaseOf<'a>(pub &'a dyn Core);

impl Measure for WorstCaseOf<'_> {
    fn eval_set(&self, x: &RandomVariable, q: &ScenarioSet) -> Result<f64, EvalError> {
        worst_case_eval(self.0, x, q)
    }

    fn eval_single(&self, x: &RandomVariable, p: &Scenario) -> Result<f64, EvalError> {
        Ok(self.0.eval(x, p)?)
    }

    fn regime_alpha(&self) -> Option<f64> {
        self.0.regime_alpha()
    }
}

/// Weights of `q`'s scenarios taken from an id-keyed table and renormalized.
pub fn restricted_weights(
    table: &BTreeMap<String, f64>,
    q: &ScenarioSet,
) -> Result<Vec<f64>, EvalError> {
    let raw: Vec<f64> = q
        .iter()
        .map(|p| {
            let id = p.id().unwrap_or("<unlabeled>");
            table
                .get(id)
                .copied()
                .ok_or_else(|| EvalError::WeightMismatch(format!("no weight for scenario `{id}`")))
        })
        .collect::<Result<_, _>>()?;
    let total: f64 = raw.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(EvalError::WeightMismatch(
            "selected scenarios carry zero total weight".into(),
        ));
    }
    if (total - 1.0).abs() <= 1e-12 {
        return Ok(raw);
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Index and value of the maximum, first index winning ties.
fn argmax(values: impl IntoIterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v.is_nan() || v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

fn argmin(values: impl IntoIterator<Item = f64>) -> Option<(usize, f64)> {
    argmax(values.into_iter().map(|v| -v)).map(|(i, v)| (i, -v))
}

/// `max_{P in Q} core(X | P)`.
pub fn worst_case_eval(core: &dyn Core, x: &RandomVariable, q: &ScenarioSet) -> Result<f64, EvalError> {
    let values: Vec<f64> = q.iter().map(|p| core.eval(x, p)).collect::<Result<_, _>>()?;
    argmax(values).map(|(_, v)| v).ok_or(EvalError::EmptyScenarioSet)
}

/// The scenario attaining the worst case, with its value.
pub fn worst_case_argmax<'q>(
    core: &dyn Core,
    x: &RandomVariable,
    q: &'q ScenarioSet,
) -> Result<(&'q Scenario, f64), EvalError> {
    let values: Vec<f64> = q.iter().map(|p| core.eval(x, p)).collect::<Result<_, _>>()?;
    let (i, v) = argmax(values).ok_or(EvalError::EmptyScenarioSet)?;
    Ok((&q.scenarios()[i], v))
}

/// `sum_P w_P core(X | P)`, weights aligned with `q`.
pub fn average_eval(
    core: &dyn Core,
    x: &RandomVariable,
    q: &ScenarioSet,
    weights: &[f64],
) -> Result<f64, EvalError> {
    if weights.len() != q.len() {
        return Err(EvalError::WeightMismatch(format!(
            "{} weights for {} scenarios",
            weights.len(),
            q.len()
        )));
    }
    check_probability_vector(weights)?;
    let mut terms = Vec::with_capacity(q.len());
    for (p, &w) in q.iter().zip(weights) {
        if w > 0.0 {
            terms.push((w, core.eval(x, p)?));
        }
    }
    // A weighted average of equal values is that value, exactly.
    if terms.iter().all(|(_, v)| *v == terms[0].1) {
        return Ok(terms[0].1);
    }
    Ok(terms.iter().map(|(w, v)| w * v).sum())
}

fn check_probability_vector(weights: &[f64]) -> Result<(), EvalError> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(EvalError::WeightMismatch("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(EvalError::WeightMismatch(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Constant value of `x` when it is the same number on every atom.
fn constant_over(x: &RandomVariable, _q: &ScenarioSet) -> Option<f64> {
    let v = x.values();
    v.iter().all(|&a| a == v[0]).then_some(v[0])
}

fn expected_utilities(
    u: &UtilityFunction,
    x: &RandomVariable,
    q: &ScenarioSet,
) -> Result<Vec<f64>, EvalError> {
    let ux = RandomVariable::from_values(
        x.values()
            .iter()
            .map(|&v| u.apply(v))
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    q.iter()
        .map(|p| ux.expectation(p).map_err(EvalError::from))
        .collect()
}

/// `u^{-1}(min_{P in Q} E^P[u(X)])`.
pub fn multi_prior_eval(u: &UtilityFunction, x: &RandomVariable, q: &ScenarioSet) -> Result<f64, EvalError> {
    let (_, v) = multi_prior_argmin(u, x, q)?;
    if let Some(c) = constant_over(x, q) {
        return Ok(c);
    }
    Ok(u.inverse(v)?)
}

/// Index of the minimizing scenario and the minimal expected utility.
pub fn multi_prior_argmin(
    u: &UtilityFunction,
    x: &RandomVariable,
    q: &ScenarioSet,
) -> Result<(usize, f64), EvalError> {
    argmin(expected_utilities(u, x, q)?).ok_or(EvalError::EmptyScenarioSet)
}

/// Multi-prior evaluation on a selected sub-collection `select(Q)`; the
/// identity selection reduces to [`multi_prior_eval`].
pub fn imprecise_information_eval(
    u: &UtilityFunction,
    x: &RandomVariable,
    q: &ScenarioSet,
    select: impl Fn(&ScenarioSet) -> Result<ScenarioSet, EvalError>,
) -> Result<f64, EvalError> {
    multi_prior_eval(u, x, &select(q)?)
}

/// Variational aggregation; scenarios with `gamma = +inf` are excluded.
pub fn variational_eval(
    u: &UtilityFunction,
    gamma: &PenaltyFunction,
    core: &dyn Core,
    x: &RandomVariable,
    q: &ScenarioSet,
    sign: VariationalSign,
) -> Result<f64, EvalError> {
    if q.is_empty() {
        return Err(EvalError::EmptyScenarioSet);
    }
    let mut values = Vec::with_capacity(q.len());
    match sign {
        VariationalSign::UtilityMin => {
            let eu = expected_utilities(u, x, q)?;
            for (p, e) in q.iter().zip(eu) {
                let g = gamma.value(p)?;
                if g < f64::INFINITY {
                    values.push(e - g);
                }
            }
            argmin(values).map(|(_, v)| v).ok_or(EvalError::AllExcluded)
        }
        VariationalSign::RiskSup => {
            for p in q {
                let g = gamma.value(p)?;
                if g < f64::INFINITY {
                    values.push(core.eval(x, p)? - g);
                }
            }
            argmax(values).map(|(_, v)| v).ok_or(EvalError::AllExcluded)
        }
    }
}

/// `phi^{-1}(sum_P w_P phi(CE_P(X)))` with `CE_P` the certainty equivalent under `u`.
pub fn smooth_ambiguity_eval(
    u: &UtilityFunction,
    phi: &UtilityFunction,
    x: &RandomVariable,
    q: &ScenarioSet,
    weights: &[f64],
) -> Result<f64, EvalError> {
    if weights.len() != q.len() {
        return Err(EvalError::WeightMismatch(format!(
            "{} weights for {} scenarios",
            weights.len(),
            q.len()
        )));
    }
    check_probability_vector(weights)?;
    let ces: Vec<f64> = q
        .iter()
        .map(|p| certainty_equivalent(x, p, u))
        .collect::<Result<_, _>>()?;
    let active: Vec<(f64, f64)> = ces
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&c, &w)| (c, w))
        .collect();
    if active.iter().all(|(c, _)| *c == active[0].0) {
        return Ok(active[0].0);
    }
    let mut acc = 0.0;
    for (c, w) in active {
        acc += w * phi.apply(c)?;
    }
    Ok(phi.inverse(acc)?)
}

/// `min_{P in candidates} { E^P[u(X)] + min_{Q' in Q} c(P, Q') }`.
pub fn misspecification_eval(
    u: &UtilityFunction,
    cost: MisspecificationCost,
    x: &RandomVariable,
    q: &ScenarioSet,
    candidates: &[Scenario],
) -> Result<f64, EvalError> {
    if candidates.is_empty() || q.is_empty() {
        return Err(EvalError::EmptyScenarioSet);
    }
    let ux = RandomVariable::from_values(
        x.values()
            .iter()
            .map(|&v| u.apply(v))
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    let mut best = f64::INFINITY;
    for p in candidates {
        let c = match cost {
            MisspecificationCost::Zero => 0.0,
            MisspecificationCost::Kl => {
                let mut m = f64::INFINITY;
                for r in q {
                    m = m.min(kl_divergence(p, r)?);
                }
                m
            }
        };
        if c == f64::INFINITY {
            continue;
        }
        let v = ux.expectation(p)? + c;
        if v < best {
            best = v;
        }
    }
    Ok(best)
}

/// Compares `(X1, Q1)` with `(X2, Q2)` by minimal expected utility.
///
/// `Greater` means side 1 is preferred (its worst expected utility is larger).
pub fn compare_multi_prior(
    u: &UtilityFunction,
    x1: &RandomVariable,
    q1: &ScenarioSet,
    x2: &RandomVariable,
    q2: &ScenarioSet,
) -> Result<Ordering, EvalError> {
    let (_, a) = multi_prior_argmin(u, x1, q1)?;
    let (_, b) = multi_prior_argmin(u, x2, q2)?;
    Ok(if (a - b).abs() <= COMPARE_TOL {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cores::{CoreSpec, Distortion};

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::from_values(v.to_vec()).unwrap()
    }

    fn sc(id: &str, m: &[f64]) -> Scenario {
        Scenario::new(OutcomeSpace::new(m.len()).unwrap(), m.to_vec())
            .unwrap()
            .with_id(id)
    }

    fn set(v: Vec<Scenario>) -> ScenarioSet {
        ScenarioSet::new(v).unwrap()
    }

    const ES_HALF: CoreSpec = CoreSpec::Es { alpha: 0.5 };

    #[test]
    fn worst_case_examples() {
        let x = rv(&[0.0, 10.0]);
        let q = set(vec![sc("A", &[0.8, 0.2]), sc("B", &[0.4, 0.6])]);
        assert!((worst_case_eval(&ES_HALF, &x, &q).unwrap() - 10.0).abs() < 1e-12);
        let single = set(vec![sc("A", &[0.8, 0.2])]);
        assert_eq!(
            worst_case_eval(&ES_HALF, &x, &single).unwrap(),
            ES_HALF.eval(&x, &single.scenarios()[0]).unwrap()
        );
        assert_eq!(worst_case_eval(&ES_HALF, &rv(&[2.5, 2.5]), &q).unwrap(), 2.5);
    }

    #[test]
    fn average_examples() {
        let x = rv(&[0.0, 10.0]);
        let q = set(vec![sc("A", &[0.8, 0.2]), sc("B", &[0.4, 0.6])]);
        assert!((average_eval(&ES_HALF, &x, &q, &[0.5, 0.5]).unwrap() - 7.0).abs() < 1e-12);
        let a = average_eval(&ES_HALF, &x, &q, &[1.0, 0.0]).unwrap();
        assert_eq!(a, ES_HALF.eval(&x, &q.scenarios()[0]).unwrap());
        assert_eq!(average_eval(&ES_HALF, &rv(&[3.0, 3.0]), &q, &[0.3, 0.7]).unwrap(), 3.0);
        assert!(matches!(
            average_eval(&ES_HALF, &x, &q, &[1.0]),
            Err(EvalError::WeightMismatch(_))
        ));
    }

    #[test]
    fn average_on_subsets_renormalizes() {
        let m = GeneralizedRiskMeasure::new(
            ES_HALF,
            AggregatorSpec::Average {
                weights: [("P1".to_string(), 0.5), ("P2".to_string(), 0.5)].into(),
            },
        )
        .unwrap();
        let x = rv(&[0.0, 10.0]);
        let p1 = sc("P1", &[0.4, 0.6]);
        let p2 = sc("P2", &[0.8, 0.2]);
        let big = m.evaluate(&x, &set(vec![p1.clone(), p2])).unwrap();
        let small = m.evaluate(&x, &set(vec![p1])).unwrap();
        assert!((small - 10.0).abs() < 1e-12);
        assert!((big - 7.0).abs() < 1e-12);
    }

    #[test]
    fn multi_prior_examples() {
        let u = UtilityFunction::Identity;
        let x = rv(&[0.0, 10.0]);
        let q = set(vec![sc("A", &[0.5, 0.5]), sc("B", &[0.9, 0.1])]);
        assert!((multi_prior_eval(&u, &x, &q).unwrap() - 1.0).abs() < 1e-12);
        let e = UtilityFunction::Exponential { a: 0.3 };
        let single = set(vec![sc("A", &[0.5, 0.5])]);
        let ce = certainty_equivalent(&x, &single.scenarios()[0], &e).unwrap();
        assert_eq!(multi_prior_eval(&e, &x, &single).unwrap(), ce);
        assert_eq!(multi_prior_eval(&e, &rv(&[1.7, 1.7]), &q).unwrap(), 1.7);
    }

    #[test]
    fn variational_examples() {
        let u = UtilityFunction::Identity;
        let x = rv(&[0.0, 10.0]);
        let p1 = sc("P1", &[0.5, 0.5]);
        let p2 = sc("P2", &[0.1, 0.9]);
        let q = set(vec![p1.clone(), p2.clone()]);
        let zero = variational_eval(&u, &PenaltyFunction::Zero, &CoreSpec::Expectation, &x, &q, VariationalSign::UtilityMin)
            .unwrap();
        assert_eq!(zero, multi_prior_eval(&u, &x, &q).unwrap());

        let table = PenaltyFunction::table([("P1", 0.0), ("P2", 3.0)]);
        let v = variational_eval(&u, &table, &CoreSpec::Expectation, &x, &q, VariationalSign::RiskSup).unwrap();
        assert!((v - 6.0).abs() < 1e-12);

        let excl = PenaltyFunction::table([("P1", 0.0), ("P2", f64::INFINITY)]);
        let v = variational_eval(&u, &excl, &CoreSpec::Expectation, &x, &q, VariationalSign::RiskSup).unwrap();
        assert!((v - 5.0).abs() < 1e-12);

        let all = PenaltyFunction::table([("P1", f64::INFINITY), ("P2", f64::INFINITY)]);
        assert_eq!(
            variational_eval(&u, &all, &CoreSpec::Expectation, &x, &q, VariationalSign::RiskSup),
            Err(EvalError::AllExcluded)
        );
    }

    #[test]
    fn smooth_examples() {
        let id = UtilityFunction::Identity;
        let x = rv(&[0.0, 10.0]);
        let q = set(vec![sc("A", &[0.5, 0.5]), sc("B", &[0.9, 0.1])]);
        assert!((smooth_ambiguity_eval(&id, &id, &x, &q, &[0.5, 0.5]).unwrap() - 3.0).abs() < 1e-12);
        let e = UtilityFunction::Exponential { a: 0.2 };
        let single = set(vec![sc("A", &[0.5, 0.5])]);
        let ce = certainty_equivalent(&x, &single.scenarios()[0], &e).unwrap();
        let v = smooth_ambiguity_eval(&e, &UtilityFunction::Exponential { a: 1.0 }, &x, &single, &[1.0]).unwrap();
        assert_eq!(v, ce);
    }

    #[test]
    fn misspecification_bounds() {
        let id = UtilityFunction::Identity;
        let sp = OutcomeSpace::new(2).unwrap();
        let x = rv(&[0.0, std::f64::consts::LN_2]);
        let q = set(vec![Scenario::uniform(sp).with_id("Q")]);
        let cands = simplex_lattice(sp, 100).unwrap();
        let zero = misspecification_eval(&id, MisspecificationCost::Zero, &x, &q, &cands).unwrap();
        assert_eq!(zero, 0.0);
        let own: Vec<Scenario> = q.scenarios().to_vec();
        let kl_own = misspecification_eval(&id, MisspecificationCost::Kl, &x, &q, &own).unwrap();
        assert!(kl_own <= multi_prior_eval(&id, &x, &q).unwrap() + 1e-15);
        let v = misspecification_eval(&id, MisspecificationCost::Kl, &x, &q, &cands).unwrap();
        let v_star = -(0.75f64).ln();
        assert!(v >= v_star - 1e-12 && v - v_star < 1e-3, "{v} vs {v_star}");
    }

    #[test]
    fn comparisons() {
        let u = UtilityFunction::Identity;
        let x = rv(&[0.0, 10.0]);
        let q1 = set(vec![sc("A", &[0.5, 0.5])]);
        let q2 = set(vec![sc("B", &[0.9, 0.1])]);
        assert_eq!(compare_multi_prior(&u, &x, &q1, &x, &q1).unwrap(), Ordering::Equal);
        assert_eq!(compare_multi_prior(&u, &x, &q1, &x, &q2).unwrap(), Ordering::Greater);
        let both = set(vec![sc("A", &[0.5, 0.5]), sc("B", &[0.9, 0.1])]);
        assert_ne!(compare_multi_prior(&u, &x, &both, &x, &q1).unwrap(), Ordering::Greater);
    }

    #[test]
    fn lattice_counts() {
        let sp = OutcomeSpace::new(3).unwrap();
        assert_eq!(simplex_lattice(sp, 4).unwrap().len(), 15);
    }

    #[test]
    fn distortion_worst_case() {
        let m = GeneralizedRiskMeasure::worst_case(CoreSpec::Distortion { h: Distortion::Identity });
        let q = set(vec![sc("A", &[0.5, 0.5]), sc("B", &[0.9, 0.1])]);
        assert!((m.evaluate(&rv(&[0.0, 10.0]), &q).unwrap() - 5.0).abs() < 1e-12);
    }
}
