use rand::Rng;
use serde::Serialize;

use crate::cores::kl_divergence;
use crate::rng::{random_scenario, trial_rng, MassStyle};
use crate::space::{mix_scenarios, RandomVariable, Scenario};

use super::TheoremError;

/// Number of random scenarios compared against the minimum.
pub const KL_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlReport {
    /// `-ln E^Q[exp(-Z)]`.
    pub v_star: f64,
    /// Minimizer with `P*_i` proportional to `Q_i exp(-Z_i)`.
    pub p_star: Vec<f64>,
    /// `|E^{P*}[Z] + KL(P*||Q) - v*|`.
    pub stationarity_gap: f64,
    pub samples: usize,
    /// Smallest `objective(P) - v*` over the samples.
    pub min_excess: f64,
    pub pass: bool,
}

/// `E^P[Z] + KL(P||Q)`.
pub fn kl_objective(p: &Scenario, q: &Scenario, z: &RandomVariable) -> Result<f64, TheoremError> {
    Ok(z.expectation(p)? + kl_divergence(p, q)?)
}

/// Closed-form check of `min_P E^P[Z] + KL(P||Q)` with [`KL_SAMPLES`] samples.
pub fn verify_kl_closed_form(q: &Scenario, z: &RandomVariable, tol: f64) -> Result<KlReport, TheoremError> {
    verify_kl_closed_form_with(q, z, tol, KL_SAMPLES, 0)
}

pub fn verify_kl_closed_form_with(
    q: &Scenario,
    z: &RandomVariable,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<KlReport, TheoremError> {
    if q.len() != z.len() {
        return Err(TheoremError::InvalidInput(format!(
            "scenario has {} atoms, loss has {}",
            q.len(),
            z.len()
        )));
    }
    if q.mass().iter().any(|&m| m <= 0.0) {
        return Err(TheoremError::InvalidInput("reference scenario must be strictly positive".into()));
    }
    let zv = z.values();
    let zmin = zv.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = q
        .mass()
        .iter()
        .zip(zv)
        .map(|(qi, zi)| qi * (-(zi - zmin)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let v_star = zmin - total.ln();
    let p_star = Scenario::new(q.space(), weights.iter().map(|w| w / total).collect())?;
    let stationarity_gap = (kl_objective(&p_star, q, z)? - v_star).abs();

    let mut min_excess = f64::INFINITY;
    for i in 0..samples {
        let mut rng = trial_rng(seed, 0x4B1, i as u64);
        let style = match i % 4 {
            0 => MassStyle::Continuous,
            1 => MassStyle::Sparse,
            2 => MassStyle::Grid(16),
            _ => MassStyle::Continuous,
        };
        let mut p = random_scenario(&mut rng, q.space(), style);
        if i % 4 == 3 {
            // Close to the minimizer, where the objective is flattest.
            p = mix_scenarios(&p_star, &p, rng.gen_range(0.9..1.0))?;
        }
        min_excess = min_excess.min(kl_objective(&p, q, z)? - v_star);
    }
    let pass = stationarity_gap <= tol && (samples == 0 || min_excess >= -tol);
    Ok(KlReport {
        v_star,
        p_star: p_star.mass().to_vec(),
        stationarity_gap,
        samples,
        min_excess,
        pass,
    })
}
