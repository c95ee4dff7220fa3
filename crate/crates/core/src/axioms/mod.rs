//! Axiom audits and counterexample search.
//!
//! Every axiom is phrased as a relation `lhs <= rhs` or `lhs = rhs` between two
//! evaluations on a concrete [`Instance`]. Audits sample instances from seeded
//! per-trial generators; a violation is reported as a [`Witness`] that carries
//! the full instance and replays against the same measure.
//!
//! Verdicts are evidence over the sampled family, not proofs. `Inconclusive`
//! is reported whenever nothing could be checked (infeasible couplings, the
//! small-space regime guard for VaR-family cores, evaluation errors).

mod audit;
mod check;
mod generate;
mod search;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregators::{EvalError, Measure};
use crate::space::{RandomVariable, Scenario, ScenarioSet, SpaceError};

pub use audit::{
    audit_ambiguity, audit_axioms, audit_law_invariance, audit_measure, audit_scenario_axioms, audit_shape,
    audit_traditional, audit_traditional_core,
};
pub use generate::{find_unambiguous_events, InstanceFamily};
pub use search::{search_witness, SearchError, SEARCH_TOL};

/// Default slack for inequality axioms.
pub const INEQ_TOL: f64 = 1e-9;
/// Default tolerance for equality-type law-invariance checks.
pub const EQ_TOL: f64 = 1e-12;
/// Agreement required between a stored witness and its replay.
pub const REPLAY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxiomId {
    A1,
    A2,
    A3,
    #[serde(rename = "STD")]
    Std,
    B1,
    B2,
    B3,
    B4,
    B5,
    C0,
    C1,
    C2,
    C3,
    C4,
    C5,
    #[serde(rename = "CONVEX_X")]
    ConvexX,
    #[serde(rename = "CONCAVE_P")]
    ConcaveP,
}

impl AxiomId {
    pub const ALL: [AxiomId; 17] = [
        AxiomId::A1,
        AxiomId::A2,
        AxiomId::A3,
        AxiomId::Std,
        AxiomId::B1,
        AxiomId::B2,
        AxiomId::B3,
        AxiomId::B4,
        AxiomId::B5,
        AxiomId::C0,
        AxiomId::C1,
        AxiomId::C2,
        AxiomId::C3,
        AxiomId::C4,
        AxiomId::C5,
        AxiomId::ConvexX,
        AxiomId::ConcaveP,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            AxiomId::A1 => "A1",
            AxiomId::A2 => "A2",
            AxiomId::A3 => "A3",
            AxiomId::Std => "STD",
            AxiomId::B1 => "B1",
            AxiomId::B2 => "B2",
            AxiomId::B3 => "B3",
            AxiomId::B4 => "B4",
            AxiomId::B5 => "B5",
            AxiomId::C0 => "C0",
            AxiomId::C1 => "C1",
            AxiomId::C2 => "C2",
            AxiomId::C3 => "C3",
            AxiomId::C4 => "C4",
            AxiomId::C5 => "C5",
            AxiomId::ConvexX => "CONVEX_X",
            AxiomId::ConcaveP => "CONCAVE_P",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            AxiomId::A1 => "uncertainty aversion: Psi(X|Q) <= Psi(X|R) for Q subset of R",
            AxiomId::A2 => "scenario monotonicity",
            AxiomId::A3 => "scenario upper bound: Psi(X|Q) <= max_P Psi(X|P)",
            AxiomId::Std => "standardness: Psi(s|Q) = s",
            AxiomId::B1 => "strong law invariance",
            AxiomId::B2 => "loss law invariance",
            AxiomId::B3 => "scenario law invariance",
            AxiomId::B4 => "ambiguity sensitivity",
            AxiomId::B5 => "scenario-only penalty differences",
            AxiomId::C0 => "additivity of the core",
            AxiomId::C1 => "monotonicity",
            AxiomId::C2 => "cash additivity",
            AxiomId::C3 => "positive homogeneity",
            AxiomId::C4 => "subadditivity",
            AxiomId::C5 => "comonotonic additivity",
            AxiomId::ConvexX => "convexity in the loss",
            AxiomId::ConcaveP => "concavity in the scenario",
        }
    }

    /// True for axioms stated on the core alone (single scenarios).
    pub fn is_core_level(&self) -> bool {
        !matches!(
            self,
            AxiomId::A1
                | AxiomId::A2
                | AxiomId::A3
                | AxiomId::Std
                | AxiomId::C1
                | AxiomId::C2
                | AxiomId::C3
                | AxiomId::C4
                | AxiomId::C5
        )
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownAxiom(pub String);

impl fmt::Display for UnknownAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown axiom `{}`", self.0)
    }
}

impl std::error::Error for UnknownAxiom {}

impl FromStr for AxiomId {
    type Err = UnknownAxiom;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase();
        AxiomId::ALL
            .into_iter()
            .find(|a| a.label() == key)
            .ok_or_else(|| UnknownAxiom(s.trim().to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs <= rhs + tol`.
    Le,
    /// `|lhs - rhs| <= tol`.
    Eq,
}

impl Relation {
    pub fn violated(&self, gap: f64, tol: f64) -> bool {
        match self {
            Relation::Le => gap > tol,
            Relation::Eq => gap.abs() > tol,
        }
    }
}

/// The concrete inputs of one axiom check.
///
/// Variables are `x, y, z, w` in the order the axiom names them; scenario
/// `p` is `scenarios[0]` and `q` is `scenarios[1]`; `sets` lists scenario ids
/// for axioms stated on collections (`[Q]` or `[Q, R]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub scenarios: Vec<Scenario>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<Vec<String>>,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Cash shift (C2), scale (C3) or the constant itself (STD).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    /// Atoms of the event for the indicator part of B4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<Vec<usize>>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    fn var(v: &[f64]) -> Result<RandomVariable, SpaceError> {
        RandomVariable::from_values(v.to_vec())
    }

    pub fn x(&self) -> Result<RandomVariable, SpaceError> {
        Self::var(&self.x)
    }

    fn field(&self, v: &Option<Vec<f64>>, name: &str) -> Result<RandomVariable, EvalError> {
        match v {
            Some(v) => Ok(Self::var(v)?),
            None => Err(EvalError::Invalid(format!("instance lacks `{name}`"))),
        }
    }

    pub fn y(&self) -> Result<RandomVariable, EvalError> {
        self.field(&self.y, "y")
    }

    pub fn z(&self) -> Result<RandomVariable, EvalError> {
        self.field(&self.z, "z")
    }

    pub fn w(&self) -> Result<RandomVariable, EvalError> {
        self.field(&self.w, "w")
    }

    pub fn p(&self) -> Result<&Scenario, EvalError> {
        self.scenarios
            .first()
            .ok_or_else(|| EvalError::Invalid("instance lacks scenario p".into()))
    }

    pub fn q(&self) -> Result<&Scenario, EvalError> {
        self.scenarios
            .get(1)
            .ok_or_else(|| EvalError::Invalid("instance lacks scenario q".into()))
    }

    pub fn lambda(&self) -> Result<f64, EvalError> {
        self.lambda
            .ok_or_else(|| EvalError::Invalid("instance lacks lambda".into()))
    }

    pub fn constant(&self) -> Result<f64, EvalError> {
        self.constant
            .ok_or_else(|| EvalError::Invalid("instance lacks constant".into()))
    }

    /// The collection `sets[i]`, resolved against the stored scenarios.
    pub fn set(&self, i: usize) -> Result<ScenarioSet, EvalError> {
        let ids = self
            .sets
            .get(i)
            .ok_or_else(|| EvalError::Invalid(format!("instance lacks scenario set {i}")))?;
        let members = ids
            .iter()
            .map(|id| {
                self.scenarios
                    .iter()
                    .find(|s| s.id() == Some(id.as_str()))
                    .cloned()
                    .ok_or_else(|| EvalError::Invalid(format!("set refers to unknown id `{id}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScenarioSet::new(members)?)
    }
}

/// A replayable violation of one axiom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub axiom: AxiomId,
    pub relation: Relation,
    pub instance: Instance,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tolerance: f64,
}

/// Result of re-evaluating a witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replay {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub premise_holds: bool,
    pub violates: bool,
}

impl Witness {
    pub fn replay(&self, target: &dyn Measure) -> Result<Replay, EvalError> {
        let premise_holds = check::premise(self.axiom, target, &self.instance)?;
        let (lhs, rhs) = check::sides(self.axiom, target, &self.instance)?;
        let gap = lhs - rhs;
        Ok(Replay {
            lhs,
            rhs,
            gap,
            premise_holds,
            violates: premise_holds && self.relation.violated(gap, self.tolerance),
        })
    }

    /// Replays and checks that stored and recomputed sides agree within
    /// [`REPLAY_TOL`] and that the axiom is still violated.
    pub fn certify(&self, target: &dyn Measure) -> Result<bool, EvalError> {
        let r = self.replay(target)?;
        Ok(r.violates
            && (r.lhs - self.lhs).abs() <= REPLAY_TOL
            && (r.rhs - self.rhs).abs() <= REPLAY_TOL
            && (self.gap - (self.lhs - self.rhs)).abs() <= REPLAY_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { witness: Box<Witness> },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fail { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn short(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail { .. } => "fail",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomResult {
    #[serde(flatten)]
    pub verdict: Verdict,
    /// Instances on which the relation was evaluated.
    pub checked: usize,
    pub tolerance: f64,
    /// Trials that could not be evaluated (reason in `skip_reasons`).
    pub skipped: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub skip_reasons: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub results: BTreeMap<AxiomId, AxiomResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn new(trials: usize, seed: u64, tolerance: f64) -> Self {
        Self {
            trials,
            seed,
            tolerance,
            results: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn verdict(&self, axiom: AxiomId) -> Option<&Verdict> {
        self.results.get(&axiom).map(|r| &r.verdict)
    }

    pub fn all_pass(&self) -> bool {
        self.results.values().all(|r| r.verdict.is_pass())
    }

    pub fn any_fail(&self) -> bool {
        self.results.values().any(|r| r.verdict.is_fail())
    }

    /// Folds `other` into `self`; results for the same axiom are replaced.
    pub fn merge(&mut self, other: AuditReport) {
        self.results.extend(other.results);
        self.notes.extend(other.notes);
    }

    pub fn retain(&mut self, axioms: &[AxiomId]) {
        self.results.retain(|a, _| axioms.contains(a));
    }
}
