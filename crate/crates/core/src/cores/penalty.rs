use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{kl_divergence, CoreError};
use crate::space::Scenario;

/// Penalty `gamma` on scenarios, with values in `(-inf, +inf]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PenaltyFunction {
    Zero,
    /// Keyed by scenario id, so equal-mass scenarios may carry different penalties.
    Table {
        #[serde(with = "extended_map")]
        values: BTreeMap<String, f64>,
    },
    KlToReference { reference: Scenario },
}

impl PenaltyFunction {
    pub fn table<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        PenaltyFunction::Table {
            values: entries.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if let PenaltyFunction::Table { values } = self {
            if let Some((id, v)) = values.iter().find(|(_, v)| v.is_nan() || **v == f64::NEG_INFINITY) {
                return Err(CoreError::InvalidParameter(format!(
                    "penalty for `{id}` must lie in (-inf, +inf], got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, p: &Scenario) -> Result<f64, CoreError> {
        match self {
            PenaltyFunction::Zero => Ok(0.0),
            PenaltyFunction::Table { values } => {
                let id = p.id().unwrap_or("<unlabeled>");
                values
                    .get(id)
                    .copied()
                    .ok_or_else(|| CoreError::UnknownScenario(id.to_string()))
            }
            PenaltyFunction::KlToReference { reference } => Ok(kl_divergence(p, reference)?),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PenaltyFunction::Zero => true,
            PenaltyFunction::Table { values } => values.values().all(|&v| v == 0.0),
            PenaltyFunction::KlToReference { .. } => false,
        }
    }
}

/// JSON has no infinity literal: `+inf` is written as the string `"inf"`.
pub mod extended_real {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn to_repr(v: f64) -> impl Serialize {
        if v == f64::INFINITY {
            Repr::Text("inf".into())
        } else if v == f64::NEG_INFINITY {
            Repr::Text("-inf".into())
        } else {
            Repr::Num(v)
        }
    }

    pub fn parse(text: &str) -> Option<f64> {
        match text.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
            "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
            other => other.parse().ok(),
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => {
                parse(&t).ok_or_else(|| serde::de::Error::custom(format!("not a number: `{t}`")))
            }
        }
    }
}

mod extended_map {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Ext(#[serde(with = "super::extended_real")] f64);

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<&String, Ext> = m.iter().map(|(k, v)| (k, Ext(*v))).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let m = BTreeMap::<String, Ext>::deserialize(d)?;
        Ok(m.into_iter().map(|(k, v)| (k, v.0)).collect())
    }
}
