use thiserror::Error;

use crate::aggregators::Measure;
use crate::rng::trial_rng;
use crate::space::{OutcomeSpace, Scenario};

use super::check::{check, Trial};
use super::generate::{InstanceFamily, Sampler};
use super::{AxiomId, Instance, Witness};

/// Slack used when searching for violations.
pub const SEARCH_TOL: f64 = 1e-9;

const SHRINK_ROUNDS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no violation of {axiom} found within {budget} evaluations")]
    NotFound { axiom: AxiomId, budget: usize },
    #[error("no instance of {axiom} could be checked: {reason}")]
    Inconclusive { axiom: AxiomId, reason: String },
}

/// Searches for a violation of `axiom` and shrinks it.
///
/// Small spaces with uniform masses and losses in `{0,..,3}` are enumerated
/// first, then seeded random instances are drawn until `budget` checks have
/// been spent. A found witness is shrunk greedily (fewer atoms, simpler
/// masses and values) while it stays a certified violation.
pub fn search_witness(
    axiom: AxiomId,
    target: &dyn Measure,
    budget: usize,
    seed: u64,
) -> Result<Witness, SearchError> {
    let mut spent = 0usize;
    let mut checked = 0usize;
    let mut last_reason = String::from("budget is zero");
    let mut found = None;

    for inst in exhaustive_small(axiom, target) {
        if spent >= budget {
            break;
        }
        spent += 1;
        match check(axiom, target, inst, SEARCH_TOL) {
            Trial::Violated(w) => {
                found = Some(*w);
                break;
            }
            Trial::Holds => checked += 1,
            Trial::Skipped(r) => last_reason = r,
        }
    }

    let small = InstanceFamily {
        n_max: 4,
        small: true,
        ..InstanceFamily::default()
    };
    let wide = InstanceFamily {
        n_max: 10,
        ..InstanceFamily::default()
    };
    let mut i = 0u64;
    while found.is_none() && spent < budget {
        let family = if i.is_multiple_of(2) { &small } else { &wide };
        let mut sampler = Sampler {
            family,
            target,
            rng: trial_rng(seed, 0x5EA4_0000 + axiom as u64, i),
            index: i,
        };
        i += 1;
        spent += 1;
        match sampler.draw(axiom) {
            Ok(inst) => match check(axiom, target, inst, SEARCH_TOL) {
                Trial::Violated(w) => found = Some(*w),
                Trial::Holds => checked += 1,
                Trial::Skipped(r) => last_reason = r,
            },
            Err(r) => last_reason = r,
        }
    }

    match found {
        Some(w) => Ok(shrink(w, target)),
        None if checked == 0 => Err(SearchError::Inconclusive {
            axiom,
            reason: last_reason,
        }),
        None => Err(SearchError::NotFound { axiom, budget }),
    }
}

/// Enumeration over uniform scenarios on two and three atoms.
fn exhaustive_small(axiom: AxiomId, target: &dyn Measure) -> Box<dyn Iterator<Item = Instance> + '_> {
    let two_vars = matches!(
        axiom,
        AxiomId::C0 | AxiomId::C1 | AxiomId::C4 | AxiomId::C5 | AxiomId::ConvexX
    );
    let one_var = matches!(axiom, AxiomId::C2 | AxiomId::C3);
    if !two_vars && !one_var {
        return Box::new(std::iter::empty());
    }
    let guard = target.regime_alpha();
    let iter = (2usize..=3)
        .filter(move |&n| guard.is_none_or(|a| a <= 1.0 - 1.0 / n as f64))
        .flat_map(move |n| {
            let space = OutcomeSpace::new(n).expect("n >= 2");
            let p = Scenario::uniform(space).with_id("P");
            let grid = value_grid(n);
            let ys = if two_vars { value_grid(n) } else { vec![vec![]] };
            let params: Vec<f64> = match axiom {
                AxiomId::C2 => vec![1.0, -1.0, 2.0],
                AxiomId::C3 => vec![2.0, 0.5, 3.0],
                AxiomId::ConvexX => vec![0.5],
                _ => vec![f64::NAN],
            };
            let mut out = Vec::new();
            for x in &grid {
                for y in &ys {
                    for &c in &params {
                        let mut inst = Instance {
                            scenarios: vec![p.clone()],
                            sets: vec![vec!["P".into()]],
                            x: x.clone(),
                            y: two_vars.then(|| y.clone()),
                            z: None,
                            w: None,
                            lambda: None,
                            constant: None,
                            event: None,
                        };
                        match axiom {
                            AxiomId::C2 | AxiomId::C3 => inst.constant = Some(c),
                            AxiomId::ConvexX => inst.lambda = Some(c),
                            _ => {}
                        }
                        out.push(inst);
                    }
                }
            }
            out
        });
    Box::new(iter)
}

fn value_grid(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..4).map(move |k| {
                    let mut v = v.clone();
                    v.push(k as f64);
                    v
                })
            })
            .collect();
    }
    out
}

/// Greedy simplification that keeps the violation.
fn shrink(mut w: Witness, target: &dyn Measure) -> Witness {
    let guard = target.regime_alpha();
    for _ in 0..SHRINK_ROUNDS {
        let mut improved = false;
        for cand in candidates(&w.instance) {
            if let Some(a) = guard {
                if a > 1.0 - 1.0 / cand.n() as f64 {
                    continue;
                }
            }
            if let Trial::Violated(next) = check(w.axiom, target, cand, w.tolerance) {
                if next.certify(target).unwrap_or(false) {
                    w = *next;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
    w
}

fn candidates(inst: &Instance) -> Vec<Instance> {
    let mut out = Vec::new();
    let n = inst.n();
    if n > 1 {
        for i in 0..n {
            if let Some(c) = drop_atom(inst, i) {
                out.push(c);
            }
        }
    }
    for (k, s) in inst.scenarios.iter().enumerate() {
        let space = s.space();
        let mut simpler = vec![Scenario::uniform(space)];
        for den in [2, 3, 4, 5, 6, 8, 10, 12] {
            if let Some(m) = snap(s.mass(), den) {
                if let Ok(sc) = Scenario::new(space, m) {
                    simpler.push(sc);
                }
            }
        }
        for sc in simpler {
            if sc.mass() != s.mass() {
                let mut c = inst.clone();
                c.scenarios[k] = match s.id() {
                    Some(id) => sc.with_id(id),
                    None => sc,
                };
                out.push(c);
            }
        }
    }
    for slot in 0..4 {
        let Some(values) = var_slot(inst, slot) else { continue };
        for (j, &v) in values.iter().enumerate() {
            for nv in [0.0, v.round(), (v * 10.0).round() / 10.0] {
                if nv != v {
                    let mut c = inst.clone();
                    var_slot_mut(&mut c, slot).expect("slot exists")[j] = nv;
                    out.push(c);
                }
            }
        }
    }
    if let Some(l) = inst.lambda {
        for nl in [0.5, (l * 10.0).round() / 10.0] {
            if nl != l {
                let mut c = inst.clone();
                c.lambda = Some(nl);
                out.push(c);
            }
        }
    }
    if let Some(k) = inst.constant {
        for nk in [1.0, k.round()] {
            if nk != k {
                let mut c = inst.clone();
                c.constant = Some(nk);
                if c.sets.len() == 1 && c.x.iter().all(|&v| v == k) {
                    c.x = vec![nk; n];
                }
                out.push(c);
            }
        }
    }
    out
}

fn var_slot(inst: &Instance, slot: usize) -> Option<&Vec<f64>> {
    match slot {
        0 => Some(&inst.x),
        1 => inst.y.as_ref(),
        2 => inst.z.as_ref(),
        _ => inst.w.as_ref(),
    }
}

fn var_slot_mut(inst: &mut Instance, slot: usize) -> Option<&mut Vec<f64>> {
    match slot {
        0 => Some(&mut inst.x),
        1 => inst.y.as_mut(),
        2 => inst.z.as_mut(),
        _ => inst.w.as_mut(),
    }
}

fn drop_atom(inst: &Instance, i: usize) -> Option<Instance> {
    let n = inst.n();
    let space = OutcomeSpace::new(n - 1).ok()?;
    let mut c = inst.clone();
    for slot in 0..4 {
        if let Some(v) = var_slot_mut(&mut c, slot) {
            v.remove(i);
        }
    }
    for s in c.scenarios.iter_mut() {
        let rest = 1.0 - s.mass()[i];
        if rest <= 1e-12 {
            return None;
        }
        let mass = s
            .mass()
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, m)| m / rest)
            .collect();
        let sc = Scenario::new(space, mass).ok()?;
        *s = match s.id() {
            Some(id) => sc.with_id(id),
            None => sc,
        };
    }
    if let Some(ev) = &mut c.event {
        ev.retain(|&a| a != i);
        for a in ev.iter_mut() {
            if *a > i {
                *a -= 1;
            }
        }
    }
    Some(c)
}

/// Masses rounded to multiples of `1/den` by largest remainder.
fn snap(mass: &[f64], den: u32) -> Option<Vec<f64>> {
    let d = den as f64;
    let scaled: Vec<f64> = mass.iter().map(|m| m * d).collect();
    let mut counts: Vec<u32> = scaled.iter().map(|s| s.floor() as u32).collect();
    let mut left = den.checked_sub(counts.iter().sum())?;
    let mut order: Vec<usize> = (0..mass.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in &order {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    Some(counts.into_iter().map(|c| c as f64 / d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::WorstCaseOf;
    use crate::cores::CoreSpec;

    #[test]
    fn var_subadditivity_witness_is_small() {
        let core = CoreSpec::Var { alpha: 0.5 };
        let target = WorstCaseOf(&core);
        let w = search_witness(AxiomId::C4, &target, 10_000, 0).unwrap();
        assert!(w.instance.n() <= 3);
        assert!(w.gap > SEARCH_TOL);
        assert!(w.certify(&target).unwrap());
    }

    #[test]
    fn es_has_no_subadditivity_witness() {
        let core = CoreSpec::Es { alpha: 0.5 };
        let r = search_witness(AxiomId::C4, &WorstCaseOf(&core), 3_000, 1);
        assert!(matches!(r, Err(SearchError::NotFound { .. })));
    }

    #[test]
    fn regime_guard_makes_search_inconclusive() {
        let core = CoreSpec::Var { alpha: 0.95 };
        let r = search_witness(AxiomId::B4, &WorstCaseOf(&core), 200, 1);
        assert!(matches!(r, Err(SearchError::Inconclusive { .. })));
    }

    #[test]
    fn snapping_keeps_total_mass() {
        let m = snap(&[0.33, 0.33, 0.34], 4).unwrap();
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shrinking_drops_irrelevant_atoms() {
        let core = CoreSpec::Var { alpha: 0.5 };
        let target = WorstCaseOf(&core);
        let sp = OutcomeSpace::new(4).unwrap();
        let inst = Instance {
            scenarios: vec![Scenario::uniform(sp).with_id("P")],
            sets: vec![vec!["P".into()]],
            x: vec![0.0, 1.0, 0.0, 1.0],
            y: Some(vec![1.0, 0.0, 1.0, 0.0]),
            z: None,
            w: None,
            lambda: None,
            constant: None,
            event: None,
        };
        let Trial::Violated(w) = check(AxiomId::C4, &target, inst, SEARCH_TOL) else {
            panic!("expected a violation");
        };
        let small = shrink(*w, &target);
        assert_eq!(small.instance.n(), 2);
    }
}
