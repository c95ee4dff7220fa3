//! Seeded instance sampling.
//!
//! Every trial gets its own generator derived from `(seed, stream, index)`, so
//! results never depend on evaluation order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::space::{OutcomeSpace, RandomVariable, Scenario};

pub type TrialRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for trial `index` of stream `stream` under `seed`.
pub fn trial_rng(seed: u64, stream: u64, index: u64) -> TrialRng {
    let s = splitmix(splitmix(seed ^ splitmix(stream)) ^ index);
    ChaCha8Rng::seed_from_u64(s)
}

/// How scenario masses are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassStyle {
    /// Normalized uniform draws.
    Continuous,
    /// Multiples of `1 / denominator`.
    Grid(u32),
    Uniform,
    /// Continuous draws with roughly a third of the atoms zeroed.
    Sparse,
}

/// How loss values are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueStyle {
    /// Uniform on `[-scale, scale]`.
    Continuous(f64),
    /// Integers in `[-bound, bound]` (frequent ties).
    Integer(i32),
}

pub fn random_scenario(rng: &mut TrialRng, space: OutcomeSpace, style: MassStyle) -> Scenario {
    let n = space.size();
    let mass: Vec<f64> = match style {
        MassStyle::Uniform => return Scenario::uniform(space),
        MassStyle::Continuous => normalize((0..n).map(|_| rng.gen::<f64>() + 1e-3).collect()),
        MassStyle::Sparse => {
            let mut w: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.35) { 0.0 } else { rng.gen::<f64>() + 1e-3 })
                .collect();
            if w.iter().all(|&v| v == 0.0) {
                w[rng.gen_range(0..n)] = 1.0;
            }
            normalize(w)
        }
        MassStyle::Grid(den) => {
            let mut counts = vec![0u32; n];
            for _ in 0..den {
                counts[rng.gen_range(0..n)] += 1;
            }
            counts.iter().map(|&c| c as f64 / den as f64).collect()
        }
    };
    Scenario::new(space, mass).expect("sampled masses form a probability vector")
}

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

pub fn random_values(rng: &mut TrialRng, space: OutcomeSpace, style: ValueStyle) -> RandomVariable {
    let values = (0..space.size())
        .map(|_| match style {
            ValueStyle::Continuous(scale) => rng.gen_range(-scale..=scale),
            ValueStyle::Integer(bound) => rng.gen_range(-bound..=bound) as f64,
        })
        .collect();
    RandomVariable::from_values(values).expect("finite samples")
}

/// Picks one of the mass styles, weighted toward continuous draws.
pub fn any_mass_style(rng: &mut TrialRng) -> MassStyle {
    match rng.gen_range(0..10) {
        0..=3 => MassStyle::Continuous,
        4 | 5 => MassStyle::Grid([4, 8, 10, 12, 16][rng.gen_range(0..5)]),
        6 | 7 => MassStyle::Uniform,
        _ => MassStyle::Sparse,
    }
}

pub fn any_value_style(rng: &mut TrialRng) -> ValueStyle {
    if rng.gen_bool(0.5) {
        ValueStyle::Continuous(10.0)
    } else {
        ValueStyle::Integer(5)
    }
}

/// A scenario whose masses are a permutation of `p`'s masses.
pub fn permuted_scenario(rng: &mut TrialRng, p: &Scenario) -> Scenario {
    let mut mass = p.mass().to_vec();
    mass.shuffle(rng);
    Scenario::new(p.space(), mass).expect("permutation keeps validity")
}

/// A random nondecreasing map: a positive slope plus optional call-style kinks.
pub fn random_increasing(rng: &mut TrialRng) -> impl Fn(f64) -> f64 {
    let slope = rng.gen_range(0.0..3.0);
    let kink = rng.gen_range(-5.0..5.0);
    let kink_slope = rng.gen_range(0.0..3.0);
    let offset = rng.gen_range(-5.0..5.0);
    let step_at = rng.gen_range(-5.0..5.0);
    let step = if rng.gen_bool(0.5) { rng.gen_range(0.0..4.0) } else { 0.0 };
    move |z: f64| {
        offset + slope * z + kink_slope * (z - kink).max(0.0) + if z >= step_at { step } else { 0.0 }
    }
}

pub fn random_lambda(rng: &mut TrialRng) -> f64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(1..=9) as f64 / 10.0
    } else {
        rng.gen_range(0.0..1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = (0..4).map(|i| trial_rng(7, 1, i).gen()).collect();
        let b: Vec<u64> = (0..4).map(|i| trial_rng(7, 1, i).gen()).collect();
        assert_eq!(a, b);
        assert_ne!(trial_rng(7, 1, 0).gen::<u64>(), trial_rng(7, 2, 0).gen::<u64>());
    }

    #[test]
    fn sampled_scenarios_validate() {
        let sp = OutcomeSpace::new(17).unwrap();
        for i in 0..200 {
            let mut rng = trial_rng(1, 0, i);
            let style = any_mass_style(&mut rng);
            let p = random_scenario(&mut rng, sp, style);
            assert_eq!(p.len(), 17);
        }
    }

    #[test]
    fn increasing_maps_are_monotone() {
        let mut rng = trial_rng(3, 0, 0);
        for _ in 0..50 {
            let f = random_increasing(&mut rng);
            let mut prev = f(-10.0);
            for k in -99..=100 {
                let v = f(k as f64 / 10.0);
                assert!(v >= prev);
                prev = v;
            }
        }
    }
}
