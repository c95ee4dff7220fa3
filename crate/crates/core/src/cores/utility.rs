use serde::{Deserialize, Serialize};

use super::CoreError;

/// Strictly increasing utility with a closed-form inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UtilityFunction {
    Identity,
    /// `u(x) = (1 - exp(-a x)) / a`, `a != 0`.
    Exponential { a: f64 },
    /// `u(x) = x^exponent` on `x >= 0`.
    Power { exponent: f64 },
}

impl UtilityFunction {
    pub fn validate(&self) -> Result<(), CoreError> {
        match self {
            UtilityFunction::Identity => Ok(()),
            UtilityFunction::Exponential { a } if a.is_finite() && *a != 0.0 => Ok(()),
            UtilityFunction::Power { exponent } if exponent.is_finite() && *exponent > 0.0 => {
                Ok(())
            }
            other => Err(CoreError::InvalidParameter(format!(
                "invalid utility parameters: {other:?}"
            ))),
        }
    }

    pub fn apply(&self, x: f64) -> Result<f64, CoreError> {
        let y = match *self {
            UtilityFunction::Identity => x,
            UtilityFunction::Exponential { a } => -(-a * x).exp_m1() / a,
            UtilityFunction::Power { exponent } => {
                if x < 0.0 {
                    return Err(CoreError::UtilityDomain(x));
                }
                x.powf(exponent)
            }
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(CoreError::UtilityDomain(x))
        }
    }

    pub fn inverse(&self, y: f64) -> Result<f64, CoreError> {
        let x = match *self {
            UtilityFunction::Identity => y,
            UtilityFunction::Exponential { a } => {
                if 1.0 - a * y <= 0.0 {
                    return Err(CoreError::UtilityDomain(y));
                }
                -(-a * y).ln_1p() / a
            }
            UtilityFunction::Power { exponent } => {
                if y < 0.0 {
                    return Err(CoreError::UtilityDomain(y));
                }
                y.powf(1.0 / exponent)
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(CoreError::UtilityDomain(y))
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, UtilityFunction::Identity)
            || matches!(self, UtilityFunction::Power { exponent } if *exponent == 1.0)
    }
}
