use std::collections::BTreeMap;

use crate::aggregators::{GeneralizedRiskMeasure, Measure, WorstCaseOf};
use crate::cores::Core;
use crate::rng::trial_rng;

use super::check::{check, Trial};
use super::generate::{InstanceFamily, Sampler};
use super::{AuditReport, AxiomId, AxiomResult, Instance, Verdict, EQ_TOL, INEQ_TOL};

#[derive(Default)]
struct Tally {
    checked: usize,
    skipped: usize,
    reasons: BTreeMap<String, usize>,
    witness: Option<Box<super::Witness>>,
    checked_event: usize,
}

impl Tally {
    fn record(&mut self, outcome: Trial, had_event: bool) {
        match outcome {
            Trial::Holds => {
                self.checked += 1;
                self.checked_event += had_event as usize;
            }
            Trial::Violated(w) => {
                self.checked += 1;
                self.checked_event += had_event as usize;
                self.witness = Some(w);
            }
            Trial::Skipped(reason) => {
                self.skipped += 1;
                *self.reasons.entry(reason).or_default() += 1;
            }
        }
    }

    fn run(&mut self, axiom: AxiomId, target: &dyn Measure, inst: Instance, tol: f64) {
        let had_event = inst.event.is_some();
        self.record(check(axiom, target, inst, tol), had_event);
    }

    fn finish(self, tol: f64) -> AxiomResult {
        let verdict = match self.witness {
            Some(witness) => Verdict::Fail { witness },
            None if self.checked > 0 => Verdict::Pass,
            None => {
                let top = self
                    .reasons
                    .iter()
                    .max_by_key(|(_, c)| **c)
                    .map(|(r, _)| r.clone())
                    .unwrap_or_else(|| "no trials".into());
                Verdict::Inconclusive {
                    reason: format!("no instance could be checked ({top})"),
                }
            }
        };
        AxiomResult {
            verdict,
            checked: self.checked,
            tolerance: tol,
            skipped: self.skipped,
            skip_reasons: self.reasons,
        }
    }
}

/// Runs `trials` seeded draws for `axiom`, stopping at the first violation.
fn run_random(
    tally: &mut Tally,
    axiom: AxiomId,
    target: &dyn Measure,
    family: &InstanceFamily,
    trials: usize,
    seed: u64,
    tol: f64,
) {
    for i in 0..trials as u64 {
        if tally.witness.is_some() {
            return;
        }
        let mut sampler = Sampler {
            family,
            target,
            rng: trial_rng(seed, axiom as u64, i),
            index: i,
        };
        match sampler.draw(axiom) {
            Ok(inst) => tally.run(axiom, target, inst, tol),
            Err(reason) => tally.record(Trial::Skipped(reason), false),
        }
    }
}

fn audit_group(
    axioms: &[AxiomId],
    target: &dyn Measure,
    family: &InstanceFamily,
    trials: usize,
    seed: u64,
    tol: f64,
) -> (AuditReport, BTreeMap<AxiomId, usize>) {
    let mut report = AuditReport::new(trials, seed, tol);
    let mut event_counts = BTreeMap::new();
    for &axiom in axioms {
        let mut tally = Tally::default();
        if axiom == AxiomId::A1 {
            exhaustive_nested(&mut tally, target, family, tol);
        }
        run_random(&mut tally, axiom, target, family, trials, seed, tol);
        event_counts.insert(axiom, tally.checked_event);
        report.results.insert(axiom, tally.finish(tol));
    }
    (report, event_counts)
}

/// All nested pairs `Q subset R` of a small fixed universe, for every fixed position.
fn exhaustive_nested(tally: &mut Tally, target: &dyn Measure, family: &InstanceFamily, tol: f64) {
    let Some(u) = &family.universe else { return };
    if u.len() > 8 || family.positions.is_empty() {
        return;
    }
    let full = (1u64 << u.len()) - 1;
    for x in &family.positions {
        for r_mask in 1..=full {
            let r = u.subset(r_mask).expect("nonempty mask");
            let mut q_mask = r_mask;
            while q_mask > 0 {
                if tally.witness.is_some() {
                    return;
                }
                let q = u.subset(q_mask).expect("nonempty mask");
                let inst = Instance {
                    scenarios: r.scenarios().to_vec(),
                    sets: vec![ids(q.ids()), ids(r.ids())],
                    x: x.values().to_vec(),
                    y: None,
                    z: None,
                    w: None,
                    lambda: None,
                    constant: None,
                    event: None,
                };
                tally.run(AxiomId::A1, target, inst, tol);
                q_mask = (q_mask - 1) & r_mask;
            }
        }
    }
}

fn ids(v: Vec<&str>) -> Vec<String> {
    v.into_iter().map(str::to_string).collect()
}

/// Audits an arbitrary selection of axioms against one target.
pub fn audit_axioms(
    target: &dyn Measure,
    axioms: &[AxiomId],
    family: &InstanceFamily,
    trials: usize,
    seed: u64,
    tol: f64,
) -> AuditReport {
    audit_group(axioms, target, family, trials, seed, tol).0
}

/// Audits A1, A2, A3 and standardness of a measure.
pub fn audit_scenario_axioms(
    m: &dyn Measure,
    family: &InstanceFamily,
    trials: usize,
    seed: u64,
    tol: f64,
) -> AuditReport {
    let axioms = [AxiomId::A1, AxiomId::A2, AxiomId::A3, AxiomId::Std];
    audit_group(&axioms, m, family, trials, seed, tol).0
}

/// Audits B1, B2 and B3 of a core.
pub fn audit_law_invariance(
    core: &dyn Core,
    family: &InstanceFamily,
    trials: usize,
    seed: u64,
    tol: f64,
) -> AuditReport {
    let target = WorstCaseOf(core);
    let axioms = [AxiomId::B1, AxiomId::B2, AxiomId::B3];
    let (mut report, _) = audit_group(&axioms, &target, family, trials, seed, tol);
    let pass = |a| report.verdict(a).is_some_and(Verdict::is_pass);
    let fail = |a| report.verdict(a).is_some_and(Verdict::is_fail);
    let note = match (pass(AxiomId::B2) && pass(AxiomId::B3), pass(AxiomId::B1), fail(AxiomId::B1)) {
        (true, true, _) => "B2 and B3 pass and B1 passes: consistent with B2+B3 => B1",
        (true, _, true) => {
            "B2 and B3 pass but B1 fails on this finite family (the implication needs an atomless space)"
        }
        (false, _, _) => "B2 or B3 does not pass: B2+B3 => B1 not exercised",
        _ => "B2 and B3 pass but B1 is inconclusive",
    };
    report.notes.push(note.to_string());
    report
}

/// Audits B4 (both parts) and B5 of a core.
pub fn audit_ambiguity(
    core: &dyn Core,
    family: &InstanceFamily,
    trials: usize,
    seed: u64,
    tol: f64,
) -> AuditReport {
    let target = WorstCaseOf(core);
    let axioms = [AxiomId::B4, AxiomId::B5];
    let (mut report, events) = audit_group(&axioms, &target, family, trials, seed, tol);
    if let Some(r) = report.results.get(&AxiomId::B4) {
        let ev = events.get(&AxiomId::B4).copied().unwrap_or(0);
        report.notes.push(format!(
            "B4: {} mixture checks, {} indicator checks on events with P(A) = Q(A)",
            r.checked - ev,
            ev
        ));
    }
    if let Some(r) = report.results.get(&AxiomId::B5) {
        let attempted = r.checked + r.skipped;
        let rate = if attempted == 0 { 0.0 } else { r.checked as f64 / attempted as f64 };
        report.notes.push(format!(
            "B5: {} of {} quadruples feasible (rate {:.3})",
            r.checked, attempted, rate
        ));
    }
    report
}

/// Audits C0 through C5 of `X -> Psi(X|Q)`.
pub fn audit_traditional(
    m: &dyn Measure,
    family: &InstanceFamily,
    trials: usize,
    seed: u64,
    tol: f64,
) -> AuditReport {
    let axioms = [
        AxiomId::C0,
        AxiomId::C1,
        AxiomId::C2,
        AxiomId::C3,
        AxiomId::C4,
        AxiomId::C5,
    ];
    audit_group(&axioms, m, family, trials, seed, tol).0
}

/// C0 through C5 for a core at single scenarios.
pub fn audit_traditional_core(core: &dyn Core, trials: usize, seed: u64, tol: f64) -> AuditReport {
    audit_traditional(&WorstCaseOf(core), &InstanceFamily::singletons(), trials, seed, tol)
}

/// Audits convexity in the loss and concavity in the scenario of a core.
pub fn audit_shape(
    core: &dyn Core,
    family: &InstanceFamily,
    trials: usize,
    seed: u64,
    tol: f64,
) -> AuditReport {
    let axioms = [AxiomId::ConvexX, AxiomId::ConcaveP];
    audit_group(&axioms, &WorstCaseOf(core), family, trials, seed, tol).0
}

/// Audits the requested axioms of a measure and its core.
///
/// Set-level axioms use the measure on the family's universe; core-level
/// axioms use the core alone. `tol` overrides the per-group defaults.
pub fn audit_measure(
    m: &GeneralizedRiskMeasure,
    family: &InstanceFamily,
    axioms: &[AxiomId],
    trials: usize,
    seed: u64,
    tol: Option<f64>,
) -> AuditReport {
    let wants = |group: &[AxiomId]| group.iter().any(|a| axioms.contains(a));
    let mut report = AuditReport::new(trials, seed, tol.unwrap_or(INEQ_TOL));
    // Core-level axioms range over all scenarios on the same outcomes, unless
    // the core is keyed by scenario id.
    let core_family = match &family.universe {
        Some(u) if !m.core.uses_scenario_ids() => InstanceFamily {
            n_min: u.space().size(),
            n_max: u.space().size(),
            universe: None,
            ..family.clone()
        },
        _ => family.clone(),
    };
    if wants(&[AxiomId::A1, AxiomId::A2, AxiomId::A3, AxiomId::Std]) {
        report.merge(audit_scenario_axioms(m, family, trials, seed, tol.unwrap_or(INEQ_TOL)));
    }
    if wants(&[AxiomId::B1, AxiomId::B2, AxiomId::B3]) {
        report.merge(audit_law_invariance(&m.core, &core_family, trials, seed, tol.unwrap_or(EQ_TOL)));
    }
    if wants(&[AxiomId::B4, AxiomId::B5]) {
        report.merge(audit_ambiguity(&m.core, &core_family, trials, seed, tol.unwrap_or(INEQ_TOL)));
    }
    if wants(&[AxiomId::C0, AxiomId::C1, AxiomId::C2, AxiomId::C3, AxiomId::C4, AxiomId::C5]) {
        report.merge(audit_traditional(m, family, trials, seed, tol.unwrap_or(INEQ_TOL)));
    }
    if wants(&[AxiomId::ConvexX, AxiomId::ConcaveP]) {
        report.merge(audit_shape(&m.core, &core_family, trials, seed, tol.unwrap_or(INEQ_TOL)));
    }
    report.retain(axioms);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::AggregatorSpec;
    use crate::cores::{CoreSpec, PenaltyFunction};
    use crate::space::{OutcomeSpace, RandomVariable, Scenario, ScenarioSet};

    #[test]
    fn worst_case_es_passes_scenario_axioms() {
        let m = GeneralizedRiskMeasure::worst_case(CoreSpec::Es { alpha: 0.9 });
        let fam = InstanceFamily {
            n_max: 12,
            ..InstanceFamily::default()
        };
        let r = audit_scenario_axioms(&m, &fam, 200, 42, INEQ_TOL);
        assert!(r.all_pass(), "{r:?}");
        assert_eq!(r.results.len(), 4);
    }

    #[test]
    fn es_is_law_invariant() {
        let r = audit_law_invariance(&CoreSpec::Es { alpha: 0.5 }, &InstanceFamily::default(), 200, 1, EQ_TOL);
        assert!(r.all_pass(), "{r:?}");
        assert!(r.notes[0].contains("consistent"));
    }

    #[test]
    fn penalized_mean_breaks_scenario_law_invariance() {
        let sp = OutcomeSpace::new(2).unwrap();
        let u = ScenarioSet::new(vec![
            Scenario::uniform(sp).with_id("P1"),
            Scenario::uniform(sp).with_id("P2"),
        ])
        .unwrap();
        let core = CoreSpec::PenalizedMean {
            penalty: PenaltyFunction::table([("P1", 0.0), ("P2", 1.0)]),
        };
        let fam = InstanceFamily::with_universe(u, vec![]);
        let r = audit_law_invariance(&core, &fam, 100, 5, EQ_TOL);
        assert!(r.verdict(AxiomId::B3).unwrap().is_fail());
        assert!(r.verdict(AxiomId::B2).unwrap().is_pass());
        let w = r.verdict(AxiomId::B3).unwrap().witness().unwrap();
        assert!(w.certify(&WorstCaseOf(&core)).unwrap());
    }

    #[test]
    fn var_fails_subadditivity() {
        let r = audit_traditional_core(&CoreSpec::Var { alpha: 0.5 }, 300, 9, INEQ_TOL);
        assert!(r.verdict(AxiomId::C4).unwrap().is_fail());
        assert!(r.verdict(AxiomId::C2).unwrap().is_pass());
        assert!(r.verdict(AxiomId::C5).unwrap().is_pass());
    }

    #[test]
    fn average_of_es_fails_uncertainty_aversion_on_nested_pair() {
        let sp = OutcomeSpace::new(4).unwrap();
        let p1 = Scenario::new(sp, vec![0.1, 0.1, 0.1, 0.7]).unwrap().with_id("P1");
        let p2 = Scenario::new(sp, vec![0.7, 0.1, 0.1, 0.1]).unwrap().with_id("P2");
        let u = ScenarioSet::new(vec![p1, p2]).unwrap();
        let m = GeneralizedRiskMeasure::new(
            CoreSpec::Es { alpha: 0.5 },
            AggregatorSpec::Average {
                weights: [("P1".to_string(), 0.5), ("P2".to_string(), 0.5)].into(),
            },
        )
        .unwrap();
        let x = RandomVariable::from_values(vec![0.0, 0.0, 0.0, 10.0]).unwrap();
        let fam = InstanceFamily::with_universe(u, vec![x]);
        let r = audit_scenario_axioms(&m, &fam, 10, 0, INEQ_TOL);
        let w = r.verdict(AxiomId::A1).unwrap().witness().unwrap();
        assert!(w.lhs > w.rhs);
        assert_eq!(w.instance.sets[0], vec!["P1".to_string()]);
        assert!(w.certify(&m).unwrap());
    }

    #[test]
    fn audits_are_deterministic() {
        let core = CoreSpec::Var { alpha: 0.75 };
        let a = audit_ambiguity(&core, &InstanceFamily::default(), 60, 3, INEQ_TOL);
        let b = audit_ambiguity(&core, &InstanceFamily::default(), 60, 3, INEQ_TOL);
        assert_eq!(a, b);
    }
}
