use crate::aggregators::{EvalError, Measure};
use crate::space::{
    comonotone_violation, mix_scenarios, same_law, Event, RandomVariable, ScenarioSet, MASS_TOL,
};

use super::{AxiomId, Instance, Relation, Witness};

pub(crate) fn relation(axiom: AxiomId) -> Relation {
    match axiom {
        AxiomId::A1 | AxiomId::A2 | AxiomId::A3 | AxiomId::C1 | AxiomId::C4 => Relation::Le,
        AxiomId::ConvexX | AxiomId::ConcaveP => Relation::Le,
        AxiomId::B4 => Relation::Le,
        _ => Relation::Eq,
    }
}

/// B4 has an inequality part and an equality part on indicators.
pub(crate) fn relation_for(axiom: AxiomId, inst: &Instance) -> Relation {
    if axiom == AxiomId::B4 && inst.event.is_some() {
        Relation::Eq
    } else {
        relation(axiom)
    }
}

fn single(target: &dyn Measure, x: &RandomVariable, inst: &Instance, which: usize) -> Result<f64, EvalError> {
    let p = if which == 0 { inst.p()? } else { inst.q()? };
    target.eval_single(x, p)
}

fn event_of(inst: &Instance) -> Result<Option<Event>, EvalError> {
    match &inst.event {
        Some(atoms) => {
            let space = inst.p()?.space();
            Ok(Some(Event::new(space, atoms.iter().copied())?))
        }
        None => Ok(None),
    }
}

/// Whether the hypotheses of `axiom` hold on `inst`.
pub(crate) fn premise(axiom: AxiomId, target: &dyn Measure, inst: &Instance) -> Result<bool, EvalError> {
    let x = inst.x()?;
    Ok(match axiom {
        AxiomId::A1 => {
            let (q, r) = (inst.set(0)?, inst.set(1)?);
            q.ids().iter().all(|id| r.get(id).is_some())
        }
        AxiomId::A2 => {
            let (q, y) = (inst.set(0)?, inst.y()?);
            let mut ok = true;
            for p in q.iter() {
                if target.eval_single(&x, p)? > target.eval_single(&y, p)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
        AxiomId::Std => {
            let s = inst.constant()?;
            inst.set(0)?;
            x.values().iter().all(|&v| v == s)
        }
        AxiomId::B1 => same_law(&x, inst.p()?, &inst.y()?, inst.q()?)?,
        AxiomId::B2 => same_law(&x, inst.p()?, &inst.y()?, inst.p()?)?,
        AxiomId::B3 => same_law(&x, inst.p()?, &x, inst.q()?)?,
        AxiomId::B4 | AxiomId::ConcaveP => {
            let (p, q, lambda) = (inst.p()?, inst.q()?, inst.lambda()?);
            let in_range = (0.0..=1.0).contains(&lambda) && p.space() == q.space();
            match event_of(inst)? {
                Some(a) if axiom == AxiomId::B4 => {
                    in_range
                        && (p.prob(&a) - q.prob(&a)).abs() <= MASS_TOL
                        && x.values() == a.indicator(p.space()).values()
                }
                _ => in_range,
            }
        }
        AxiomId::B5 => {
            let (p, q) = (inst.p()?, inst.q()?);
            same_law(&x, p, &inst.y()?, q)? && same_law(&inst.z()?, p, &inst.w()?, q)?
        }
        AxiomId::C1 => x.le(&inst.y()?),
        AxiomId::C3 => inst.constant()? > 0.0,
        AxiomId::C5 => comonotone_violation(&x, &inst.y()?).is_none(),
        AxiomId::ConvexX => (0.0..=1.0).contains(&inst.lambda()?),
        AxiomId::A3 | AxiomId::C0 | AxiomId::C2 | AxiomId::C4 => true,
    })
}

/// Left and right sides of the relation of `axiom` on `inst`.
pub(crate) fn sides(axiom: AxiomId, target: &dyn Measure, inst: &Instance) -> Result<(f64, f64), EvalError> {
    let x = inst.x()?;
    match axiom {
        AxiomId::A1 => Ok((target.eval_set(&x, &inst.set(0)?)?, target.eval_set(&x, &inst.set(1)?)?)),
        AxiomId::A2 => {
            let q = inst.set(0)?;
            Ok((target.eval_set(&x, &q)?, target.eval_set(&inst.y()?, &q)?))
        }
        AxiomId::A3 => {
            let q = inst.set(0)?;
            Ok((target.eval_set(&x, &q)?, max_single(target, &x, &q)?))
        }
        AxiomId::Std => Ok((target.eval_set(&x, &inst.set(0)?)?, inst.constant()?)),
        AxiomId::B1 => Ok((single(target, &x, inst, 0)?, single(target, &inst.y()?, inst, 1)?)),
        AxiomId::B2 => Ok((single(target, &x, inst, 0)?, single(target, &inst.y()?, inst, 0)?)),
        AxiomId::B3 => Ok((single(target, &x, inst, 0)?, single(target, &x, inst, 1)?)),
        AxiomId::B4 | AxiomId::ConcaveP => {
            let (p, q, lambda) = (inst.p()?, inst.q()?, inst.lambda()?);
            let mix = mix_scenarios(p, q, lambda)?;
            let at_mix = target.eval_single(&x, &mix)?;
            let blend = lambda * target.eval_single(&x, p)? + (1.0 - lambda) * target.eval_single(&x, q)?;
            if axiom == AxiomId::B4 && inst.event.is_some() {
                Ok((at_mix, blend))
            } else {
                Ok((blend, at_mix))
            }
        }
        AxiomId::B5 => {
            let lhs = single(target, &x, inst, 0)? - single(target, &inst.y()?, inst, 1)?;
            let rhs = single(target, &inst.z()?, inst, 0)? - single(target, &inst.w()?, inst, 1)?;
            Ok((lhs, rhs))
        }
        AxiomId::C0 => {
            let y = inst.y()?;
            let p = inst.p()?;
            let lhs = target.eval_single(&x.add(&y)?, p)?;
            Ok((lhs, target.eval_single(&x, p)? + target.eval_single(&y, p)?))
        }
        AxiomId::C1 => {
            let q = inst.set(0)?;
            Ok((target.eval_set(&x, &q)?, target.eval_set(&inst.y()?, &q)?))
        }
        AxiomId::C2 => {
            let (q, m) = (inst.set(0)?, inst.constant()?);
            Ok((target.eval_set(&x.shift(m)?, &q)?, target.eval_set(&x, &q)? + m))
        }
        AxiomId::C3 => {
            let (q, k) = (inst.set(0)?, inst.constant()?);
            Ok((target.eval_set(&x.scale(k)?, &q)?, k * target.eval_set(&x, &q)?))
        }
        AxiomId::C4 | AxiomId::C5 => {
            let (q, y) = (inst.set(0)?, inst.y()?);
            let lhs = target.eval_set(&x.add(&y)?, &q)?;
            Ok((lhs, target.eval_set(&x, &q)? + target.eval_set(&y, &q)?))
        }
        AxiomId::ConvexX => {
            let (p, y, lambda) = (inst.p()?, inst.y()?, inst.lambda()?);
            let lhs = target.eval_single(&x.mix(&y, lambda)?, p)?;
            let rhs = lambda * target.eval_single(&x, p)? + (1.0 - lambda) * target.eval_single(&y, p)?;
            Ok((lhs, rhs))
        }
    }
}

fn max_single(target: &dyn Measure, x: &RandomVariable, q: &ScenarioSet) -> Result<f64, EvalError> {
    let mut best = f64::NEG_INFINITY;
    for p in q.iter() {
        best = best.max(target.eval_single(x, p)?);
    }
    Ok(best)
}

/// Outcome of checking one instance.
#[derive(Debug)]
pub(crate) enum Trial {
    Holds,
    Violated(Box<Witness>),
    Skipped(String),
}

pub(crate) fn check(axiom: AxiomId, target: &dyn Measure, inst: Instance, tol: f64) -> Trial {
    match premise(axiom, target, &inst) {
        Ok(true) => {}
        Ok(false) => return Trial::Skipped("premise not met".into()),
        Err(e) => return Trial::Skipped(skip_label(&e)),
    }
    let (lhs, rhs) = match sides(axiom, target, &inst) {
        Ok(s) => s,
        Err(e) => return Trial::Skipped(skip_label(&e)),
    };
    let gap = lhs - rhs;
    if gap.is_nan() || (lhs.is_infinite() && lhs == rhs) {
        return Trial::Skipped("non-finite evaluation".into());
    }
    let relation = relation_for(axiom, &inst);
    if relation.violated(gap, tol) {
        Trial::Violated(Box::new(Witness {
            axiom,
            relation,
            instance: inst,
            lhs,
            rhs,
            gap,
            tolerance: tol,
        }))
    } else {
        Trial::Holds
    }
}

/// Coarse reason used to group skipped trials.
pub(crate) fn skip_label(e: &EvalError) -> String {
    let s = e.to_string();
    match s.find(':') {
        Some(i) if i > 0 => s[..i].to_string(),
        _ => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::GeneralizedRiskMeasure;
    use crate::cores::CoreSpec;
    use crate::space::{OutcomeSpace, Scenario};

    fn base(x: Vec<f64>) -> Instance {
        Instance {
            scenarios: vec![],
            sets: vec![],
            x,
            y: None,
            z: None,
            w: None,
            lambda: None,
            constant: None,
            event: None,
        }
    }

    #[test]
    fn var_subadditivity_counterexample() {
        let sp = OutcomeSpace::new(2).unwrap();
        let m = GeneralizedRiskMeasure::worst_case(CoreSpec::Var { alpha: 0.5 });
        let mut inst = base(vec![0.0, 1.0]);
        inst.y = Some(vec![1.0, 0.0]);
        inst.scenarios = vec![Scenario::uniform(sp).with_id("P")];
        inst.sets = vec![vec!["P".into()]];
        match check(AxiomId::C4, &m, inst, 1e-9) {
            Trial::Violated(w) => {
                assert_eq!((w.lhs, w.rhs), (1.0, 0.0));
                assert!(w.certify(&m).unwrap());
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn unmet_premise_is_skipped() {
        let sp = OutcomeSpace::new(2).unwrap();
        let m = GeneralizedRiskMeasure::worst_case(CoreSpec::Expectation);
        let mut inst = base(vec![0.0, 1.0]);
        inst.y = Some(vec![0.0, 2.0]);
        inst.scenarios = vec![Scenario::uniform(sp).with_id("P")];
        assert!(matches!(check(AxiomId::B2, &m, inst, 1e-12), Trial::Skipped(_)));
    }
}
