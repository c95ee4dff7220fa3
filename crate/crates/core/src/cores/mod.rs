//! Single-scenario risk measures (cores) `(X, P) -> Psi(X | P)`.
//!
//! The primitives here (VaR, ES, Choquet integral, KL divergence) are exact
//! on finite spaces: ES integrates the piecewise-constant quantile function
//! over its breakpoints and the Choquet integral is a finite level-set sum.

mod distortion;
mod penalty;
mod utility;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distortion::{Distortion, CONCAVITY_GRID_STEP};
pub(crate) use distortion::interpolate;
pub use penalty::{extended_real, PenaltyFunction};
pub use utility::UtilityFunction;

use crate::space::{distribution_of, quantile, RandomVariable, Scenario, SpaceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("level {0} outside the admissible range")]
    BadAlpha(f64),
    #[error("penalty has no entry for scenario `{0}`")]
    UnknownScenario(String),
    #[error("value {0} outside the utility's domain")]
    UtilityDomain(f64),
    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),
    #[error("{0}")]
    InvalidParameter(String),
}

/// Anything that evaluates a loss under a single scenario.
pub trait Core: Send + Sync {
    fn eval(&self, x: &RandomVariable, p: &Scenario) -> Result<f64, CoreError>;

    /// Level of a VaR-family core, used by the small-space regime guard.
    fn regime_alpha(&self) -> Option<f64> {
        None
    }

    fn describe(&self) -> String {
        "black-box core".to_string()
    }
}

/// Adapter turning a closure into a [`Core`].
pub struct FnCore<F> {
    f: F,
    name: String,
}

impl<F> FnCore<F>
where
    F: Fn(&RandomVariable, &Scenario) -> Result<f64, CoreError> + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self {
            f,
            name: name.into(),
        }
    }
}

impl<F> Core for FnCore<F>
where
    F: Fn(&RandomVariable, &Scenario) -> Result<f64, CoreError> + Send + Sync,
{
    fn eval(&self, x: &RandomVariable, p: &Scenario) -> Result<f64, CoreError> {
        (self.f)(x, p)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Declarative description of a built-in core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CoreSpec {
    Expectation,
    Var { alpha: f64 },
    Es { alpha: f64 },
    Distortion { h: Distortion },
    /// `E^P[X] - gamma(P)`.
    PenalizedMean { penalty: PenaltyFunction },
    /// `E^P[X] - <c, X>`: a penalty on the loss itself rather than its law.
    LossPenalizedMean { coefficients: Vec<f64> },
    ExpectedUtility { utility: UtilityFunction },
    CertaintyEquivalent { utility: UtilityFunction },
}

impl CoreSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        match self {
            CoreSpec::Expectation => Ok(()),
            CoreSpec::Var { alpha } => check_var_alpha(*alpha),
            CoreSpec::Es { alpha } => check_es_alpha(*alpha),
            CoreSpec::Distortion { h } => h.validate(),
            CoreSpec::PenalizedMean { penalty } => penalty.validate(),
            CoreSpec::LossPenalizedMean { coefficients } => {
                if coefficients.iter().all(|c| c.is_finite()) {
                    Ok(())
                } else {
                    Err(CoreError::InvalidParameter(
                        "loss penalty coefficients must be finite".into(),
                    ))
                }
            }
            CoreSpec::ExpectedUtility { utility } | CoreSpec::CertaintyEquivalent { utility } => {
                utility.validate()
            }
        }
    }

    /// True for cores with `Psi(s | P) = s` on every constant `s`.
    pub fn is_standard(&self) -> bool {
        match self {
            CoreSpec::PenalizedMean { penalty } => penalty.is_zero(),
            CoreSpec::LossPenalizedMean { .. } => false,
            CoreSpec::ExpectedUtility { utility } => utility.is_identity(),
            _ => true,
        }
    }

    /// True when the value depends on scenario ids, not only on masses.
    pub fn uses_scenario_ids(&self) -> bool {
        matches!(
            self,
            CoreSpec::PenalizedMean {
                penalty: PenaltyFunction::Table { .. }
            }
        )
    }

    /// The distortion this core integrates against, when it is a Choquet core.
    pub fn as_distortion(&self) -> Option<Distortion> {
        match self {
            CoreSpec::Expectation => Some(Distortion::Identity),
            CoreSpec::Es { alpha } => Some(Distortion::EsTail { alpha: *alpha }),
            CoreSpec::Distortion { h } => Some(h.clone()),
            _ => None,
        }
    }
}

impl Core for CoreSpec {
    fn eval(&self, x: &RandomVariable, p: &Scenario) -> Result<f64, CoreError> {
        evaluate_core(self, x, p)
    }

    fn regime_alpha(&self) -> Option<f64> {
        match self {
            CoreSpec::Var { alpha } | CoreSpec::Es { alpha } => Some(*alpha),
            _ => None,
        }
    }

    fn describe(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{self:?}"))
    }
}

fn check_var_alpha(alpha: f64) -> Result<(), CoreError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(CoreError::BadAlpha(alpha))
    }
}

fn check_es_alpha(alpha: f64) -> Result<(), CoreError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CoreError::BadAlpha(alpha))
    }
}

/// Value-at-Risk: the left `alpha`-quantile of the law of `x` under `p`.
pub fn var(x: &RandomVariable, p: &Scenario, alpha: f64) -> Result<f64, CoreError> {
    check_var_alpha(alpha)?;
    Ok(quantile(&distribution_of(x, p)?, alpha)?)
}

/// Expected Shortfall `1/(1-alpha) * int_alpha^1 VaR_b db`, integrated exactly
/// over the breakpoints of the tail mass, accumulated from the largest value down.
pub fn es(x: &RandomVariable, p: &Scenario, alpha: f64) -> Result<f64, CoreError> {
    check_es_alpha(alpha)?;
    let f = distribution_of(x, p)?;
    if f.is_degenerate() {
        return Ok(f.min());
    }
    let width = 1.0 - alpha;
    let mut above = 0.0;
    let mut acc = 0.0;
    for (j, (&v, &m)) in f.support().iter().zip(f.mass()).enumerate().rev() {
        let room = (width - above).max(0.0);
        let len = if j == 0 { room } else { m.min(room) };
        acc += v * len;
        above += m;
        if above >= width {
            break;
        }
    }
    Ok(acc / (1.0 - alpha))
}

/// Choquet integral of `x` against `h ∘ p` as a level-set sum:
/// `x_(k) + sum_i (x_(i) - x_(i+1)) h(P(X >= x_(i)))` over distinct values
/// sorted descending.
pub fn choquet(x: &RandomVariable, p: &Scenario, h: &Distortion) -> Result<f64, CoreError> {
    let f = distribution_of(x, p)?;
    let (support, mass) = (f.support(), f.mass());
    let k = support.len();
    let mut acc = support[0];
    let mut tail = 0.0;
    for i in (1..k).rev() {
        tail += mass[i];
        acc += (support[i] - support[i - 1]) * h.eval(tail);
    }
    Ok(acc)
}

/// Choquet integral as the rearrangement sum `sum_i x_(i) [h(S_i) - h(S_{i-1})]`
/// with `S_i = P(X >= x_(i))`, `S_0 = 0` and the last `S` pinned to 1.
///
/// Accepts any function on `[0, 1]`, normalized or not.
pub fn choquet_rearrangement(
    x: &RandomVariable,
    p: &Scenario,
    h: impl Fn(f64) -> f64,
) -> Result<f64, CoreError> {
    let f = distribution_of(x, p)?;
    let (support, mass) = (f.support(), f.mass());
    let k = support.len();
    let mut acc = 0.0;
    let mut prev_s = 0.0;
    let mut prev_h = h(0.0);
    for i in (0..k).rev() {
        let s = if i == 0 { 1.0 } else { prev_s + mass[i] };
        let hs = h(s);
        acc += support[i] * (hs - prev_h);
        prev_s = s;
        prev_h = hs;
    }
    Ok(acc)
}

/// `KL(p || q) = sum p_i ln(p_i / q_i)`; `+inf` when `p` is not absolutely
/// continuous with respect to `q`.
pub fn kl_divergence(p: &Scenario, q: &Scenario) -> Result<f64, CoreError> {
    if p.len() != q.len() {
        return Err(SpaceError::LengthMismatch {
            expected: p.len(),
            got: q.len(),
        }
        .into());
    }
    let mut acc = 0.0;
    for (&a, &b) in p.mass().iter().zip(q.mass()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += a * (a / b).ln();
    }
    Ok(acc.max(0.0))
}

fn expected_utility(x: &RandomVariable, p: &Scenario, u: &UtilityFunction) -> Result<f64, CoreError> {
    let ux = RandomVariable::from_values(
        x.values()
            .iter()
            .map(|&v| u.apply(v))
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    Ok(ux.expectation(p)?)
}

/// Certainty equivalent `u^{-1}(E^P[u(X)])`; exact on a.s. constant losses.
pub fn certainty_equivalent(
    x: &RandomVariable,
    p: &Scenario,
    u: &UtilityFunction,
) -> Result<f64, CoreError> {
    if p.len() != x.len() {
        return Err(SpaceError::LengthMismatch {
            expected: x.len(),
            got: p.len(),
        }
        .into());
    }
    if let Some(c) = x.as_constant_under(p) {
        return Ok(c);
    }
    u.inverse(expected_utility(x, p, u)?)
}

pub fn evaluate_core(spec: &CoreSpec, x: &RandomVariable, p: &Scenario) -> Result<f64, CoreError> {
    match spec {
        CoreSpec::Expectation => Ok(x.expectation(p)?),
        CoreSpec::Var { alpha } => var(x, p, *alpha),
        CoreSpec::Es { alpha } => es(x, p, *alpha),
        CoreSpec::Distortion { h } => choquet(x, p, h),
        CoreSpec::PenalizedMean { penalty } => {
            let mean = x.expectation(p)?;
            Ok(mean - penalty.value(p)?)
        }
        CoreSpec::LossPenalizedMean { coefficients } => {
            if coefficients.len() != x.len() {
                return Err(SpaceError::LengthMismatch {
                    expected: x.len(),
                    got: coefficients.len(),
                }
                .into());
            }
            let beta: f64 = coefficients.iter().zip(x.values()).map(|(c, v)| c * v).sum();
            Ok(x.expectation(p)? - beta)
        }
        CoreSpec::ExpectedUtility { utility } => expected_utility(x, p, utility),
        CoreSpec::CertaintyEquivalent { utility } => certainty_equivalent(x, p, utility),
    }
}
