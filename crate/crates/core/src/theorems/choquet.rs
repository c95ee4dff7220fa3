use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cores::{choquet_rearrangement, interpolate, Core};
use crate::rng::trial_rng;
use crate::space::{couple, CouplingOrder, DiscreteDistribution, RandomVariable, Scenario, SpaceError, DEFAULT_COUPLING_BUDGET};

use super::TheoremError;

/// Distortion values read off a core on nested events of mass `j/k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredDistortion {
    pub grid: Vec<f64>,
    pub h_values: Vec<f64>,
    pub monotone: bool,
    /// Slopes between consecutive grid points are nonincreasing.
    pub concavity_certificate: bool,
    /// `h(0) = 0` and `h(1) = 1`.
    pub normalized: bool,
    /// Block index of each atom; event `A_j` is the union of blocks `0..j`.
    pub blocks: Vec<usize>,
}

impl RecoveredDistortion {
    pub fn eval(&self, t: f64) -> f64 {
        interpolate(&self.grid, &self.h_values, t)
    }

    pub fn resolution(&self) -> usize {
        self.grid.len() - 1
    }
}

/// Evaluates the core on indicators of nested events with `P(A_j) = j/k`.
pub fn recover_distortion(core: &dyn Core, p: &Scenario, k: usize) -> Result<RecoveredDistortion, TheoremError> {
    if k == 0 {
        return Err(TheoremError::GridInfeasible("grid resolution must be positive".into()));
    }
    let target = DiscreteDistribution::new((0..k).map(|j| j as f64).collect(), vec![1.0 / k as f64; k])?;
    let order = CouplingOrder {
        atom_rank: None,
        value_order: Some((0..k).collect()),
    };
    let labels = match couple(&target, p, &order, DEFAULT_COUPLING_BUDGET) {
        Ok(y) => y,
        Err(SpaceError::Infeasible) => {
            return Err(TheoremError::GridInfeasible(format!(
                "masses of `{p}` cannot be split into {k} blocks of mass 1/{k}"
            )))
        }
        Err(SpaceError::SearchExhausted(b)) => {
            return Err(TheoremError::GridInfeasible(format!(
                "block search exhausted its budget of {b} nodes"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let blocks: Vec<usize> = labels.values().iter().map(|&v| v as usize).collect();

    let mut grid = Vec::with_capacity(k + 1);
    let mut h_values = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let ind = RandomVariable::from_values(
            blocks.iter().map(|&b| if b < j { 1.0 } else { 0.0 }).collect(),
        )?;
        grid.push(j as f64 / k as f64);
        h_values.push(core.eval(&ind, p)?);
    }
    let monotone = h_values.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let slopes: Vec<f64> = h_values.windows(2).map(|w| (w[1] - w[0]) * k as f64).collect();
    let concavity_certificate = slopes
        .windows(2)
        .all(|s| s[1] <= s[0] + 1e-9 * (1.0 + s[0].abs()));
    let normalized = h_values[0].abs() <= 1e-12 && (h_values[k] - 1.0).abs() <= 1e-12;
    Ok(RecoveredDistortion {
        grid,
        h_values,
        monotone,
        concavity_certificate,
        normalized,
        blocks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoquetGap {
    pub x: Vec<f64>,
    pub core_value: f64,
    pub choquet_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoquetRepReport {
    pub pass: bool,
    pub trials: usize,
    pub max_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<ChoquetGap>,
}

/// Compares the core with the Choquet integral against the recovered `h` on
/// losses constant on the recovered blocks, so every level set has grid mass.
/// The first two trials are the constants 0 and 1.
pub fn verify_choquet_rep(
    core: &dyn Core,
    p: &Scenario,
    h: &RecoveredDistortion,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<ChoquetRepReport, TheoremError> {
    if h.blocks.len() != p.len() {
        return Err(TheoremError::InvalidInput(format!(
            "distortion was recovered on {} atoms, scenario has {}",
            h.blocks.len(),
            p.len()
        )));
    }
    let k = h.resolution();
    let mut max_gap = 0.0f64;
    let mut worst = None;
    for i in 0..trials {
        let per_block: Vec<f64> = match i {
            0 => vec![0.0; k],
            1 => vec![1.0; k],
            _ => {
                let mut rng = trial_rng(seed, 0xC40, i as u64);
                let integer = rng.gen_bool(0.5);
                (0..k)
                    .map(|_| {
                        if integer {
                            rng.gen_range(-5..=5) as f64
                        } else {
                            rng.gen_range(-10.0..10.0)
                        }
                    })
                    .collect()
            }
        };
        let x = RandomVariable::from_values(h.blocks.iter().map(|&b| per_block[b]).collect())?;
        let c = core.eval(&x, p)?;
        let ch = choquet_rearrangement(&x, p, |t| h.eval(t))?;
        let gap = (c - ch).abs();
        if gap > max_gap || gap.is_nan() || worst.is_none() {
            if gap > max_gap || gap.is_nan() {
                max_gap = gap;
            }
            worst = Some(ChoquetGap {
                x: x.values().to_vec(),
                core_value: c,
                choquet_value: ch,
            });
        }
    }
    Ok(ChoquetRepReport {
        pass: max_gap <= tol,
        trials,
        max_gap,
        worst: if max_gap > 0.0 { worst } else { None },
    })
}
