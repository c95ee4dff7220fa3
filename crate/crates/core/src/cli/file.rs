use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use num_traits::CheckedAdd;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregators::{AggregatorSpec, EvalError, GeneralizedRiskMeasure};
use crate::cores::CoreSpec;
use crate::space::{OutcomeSpace, RandomVariable, Scenario, ScenarioSet, SpaceError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format {0}, expected {FORMAT_VERSION}")]
    Format(u32),
    #[error("scenario `{id}`: {message}")]
    Scenario { id: String, message: String },
    #[error("position `{id}`: {message}")]
    Position { id: String, message: String },
    #[error("measure: {0}")]
    Measure(String),
    #[error("{0}")]
    Invalid(String),
}

/// A scenario mass as written: a JSON number or an exact `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MassValue {
    Decimal(f64),
    Exact(String),
}

impl MassValue {
    fn ratio(&self) -> Result<Option<Ratio<i64>>, String> {
        match self {
            MassValue::Decimal(_) => Ok(None),
            MassValue::Exact(s) => s
                .trim()
                .parse::<Ratio<i64>>()
                .map(Some)
                .map_err(|_| format!("`{s}` is not a rational of the form p/q")),
        }
    }
}

impl fmt::Display for MassValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MassValue::Decimal(v) => write!(f, "{v}"),
            MassValue::Exact(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionEntry {
    pub id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub id: String,
    pub mass: Vec<MassValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureEntry {
    pub core: CoreSpec,
    pub aggregator: AggregatorSpec,
}

/// Input document: positions, scenarios and the measure to apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioFile {
    pub format: u32,
    pub outcomes: usize,
    pub positions: Vec<PositionEntry>,
    pub scenarios: Vec<ScenarioEntry>,
    pub measure: MeasureEntry,
}

/// A validated [`PortfolioFile`].
#[derive(Debug, Clone)]
pub struct Portfolio {
    pub space: OutcomeSpace,
    pub positions: Vec<(String, RandomVariable)>,
    pub scenarios: ScenarioSet,
    pub measure: GeneralizedRiskMeasure,
}

impl PortfolioFile {
    pub fn parse(text: &str, path: &str) -> Result<Self, InputError> {
        serde_json::from_str(text).map_err(|e| InputError::Syntax {
            path: path.to_string(),
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })
    }

    pub fn read(path: &Path) -> Result<Self, InputError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
            path: shown.clone(),
            source,
        })?;
        Self::parse(&text, &shown)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("portfolio serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<Portfolio, InputError> {
        if self.format != FORMAT_VERSION {
            return Err(InputError::Format(self.format));
        }
        let space = OutcomeSpace::new(self.outcomes)
            .map_err(|e| InputError::Invalid(format!("outcomes: {e}")))?;
        let n = space.size();

        let mut positions = Vec::with_capacity(self.positions.len());
        for p in &self.positions {
            if positions.iter().any(|(id, _)| id == &p.id) {
                return Err(position_err(&p.id, "duplicate id"));
            }
            let x = RandomVariable::new(space, p.values.clone())
                .map_err(|e| position_err(&p.id, &e.to_string()))?;
            positions.push((p.id.clone(), x));
        }
        if positions.is_empty() {
            return Err(InputError::Invalid("at least one position is required".into()));
        }

        let mut scenarios = Vec::with_capacity(self.scenarios.len());
        for s in &self.scenarios {
            if s.mass.len() != n {
                return Err(scenario_err(
                    &s.id,
                    &format!("mass row has {} entries, expected {n}", s.mass.len()),
                ));
            }
            let ratios = s
                .mass
                .iter()
                .map(MassValue::ratio)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| scenario_err(&s.id, &m))?;
            if ratios.iter().all(Option::is_some) {
                let total = ratios
                    .iter()
                    .flatten()
                    .try_fold(Ratio::from_integer(0i64), |acc, r| acc.checked_add(r))
                    .ok_or_else(|| scenario_err(&s.id, "rational masses overflow"))?;
                if total != Ratio::from_integer(1) {
                    return Err(scenario_err(&s.id, &format!("masses sum to {total}, not 1")));
                }
            }
            let mass: Vec<f64> = s
                .mass
                .iter()
                .zip(&ratios)
                .map(|(m, r)| match (m, r) {
                    (MassValue::Decimal(v), _) => *v,
                    (_, Some(r)) => *r.numer() as f64 / *r.denom() as f64,
                    _ => unreachable!("exact masses always parse"),
                })
                .collect();
            let sc = Scenario::new(space, mass).map_err(|e| scenario_err(&s.id, &describe(&e)))?;
            scenarios.push(sc.with_id(s.id.clone()));
        }
        let scenarios = ScenarioSet::new(scenarios).map_err(|e| match e {
            SpaceError::DuplicateId(id) => scenario_err(&id, "duplicate id"),
            SpaceError::EmptyScenarioSet => InputError::Invalid("at least one scenario is required".into()),
            other => InputError::Invalid(other.to_string()),
        })?;

        let measure = GeneralizedRiskMeasure::new(self.measure.core.clone(), self.measure.aggregator.clone())
            .map_err(|e: EvalError| InputError::Measure(e.to_string()))?;
        Ok(Portfolio {
            space,
            positions,
            scenarios,
            measure,
        })
    }
}

fn describe(e: &SpaceError) -> String {
    match e {
        SpaceError::NegativeMass { index, value } => format!("negative mass {value} at outcome {index}"),
        SpaceError::NonFinite { index } => format!("non-finite mass at outcome {index}"),
        other => other.to_string(),
    }
}

fn scenario_err(id: &str, message: &str) -> InputError {
    InputError::Scenario {
        id: id.to_string(),
        message: message.to_string(),
    }
}

fn position_err(id: &str, message: &str) -> InputError {
    InputError::Position {
        id: id.to_string(),
        message: message.to_string(),
    }
}

/// serde_json appends " at line L column C"; the location is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
