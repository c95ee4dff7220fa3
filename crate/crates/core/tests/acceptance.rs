//! End-to-end acceptance checks, one line per criterion.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;

use genrisk::aggregators::{misspecification_eval, MisspecificationCost, WorstCaseOf};
use genrisk::axioms::{
    audit_axioms, audit_law_invariance, audit_scenario_axioms, search_witness, AuditReport, AxiomId, Instance,
    InstanceFamily, Relation, Verdict, Witness, EQ_TOL, INEQ_TOL, SEARCH_TOL,
};
use genrisk::cli::PortfolioFile;
use genrisk::cores::{choquet, choquet_rearrangement, es};
use genrisk::rng::{any_mass_style, any_value_style, random_scenario, random_values, trial_rng, MassStyle, ValueStyle};
use genrisk::theorems::{
    recover_distortion, verify_choquet_rep, verify_coherent_rep, verify_kl_closed_form, verify_worst_case_rep,
    PsiTable, TheoremStatus,
};
use genrisk::{
    CoreSpec, Distortion, GeneralizedRiskMeasure, OutcomeSpace, PenaltyFunction, RandomVariable, Scenario,
    ScenarioSet, UtilityFunction,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || {
        format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64())
    })
}

fn space(n: usize) -> OutcomeSpace {
    OutcomeSpace::new(n).unwrap()
}

fn rv(v: &[f64]) -> RandomVariable {
    RandomVariable::from_values(v.to_vec()).unwrap()
}

fn load(name: &str) -> genrisk::cli::Portfolio {
    PortfolioFile::read(&fixtures().join(name)).unwrap().validate().unwrap()
}

fn random_core(rng: &mut impl Rng, n: usize) -> CoreSpec {
    let alpha = rng.gen_range(0.05..0.95);
    match rng.gen_range(0..8) {
        0 => CoreSpec::Expectation,
        1 => CoreSpec::Var { alpha },
        2 => CoreSpec::Es { alpha },
        3 => CoreSpec::Distortion {
            h: Distortion::Power {
                exponent: rng.gen_range(0.1..1.0),
            },
        },
        4 => CoreSpec::ExpectedUtility {
            utility: UtilityFunction::Exponential {
                a: rng.gen_range(0.05..0.5),
            },
        },
        5 => CoreSpec::CertaintyEquivalent {
            utility: UtilityFunction::Exponential {
                a: rng.gen_range(0.05..0.5),
            },
        },
        6 => CoreSpec::PenalizedMean {
            penalty: PenaltyFunction::KlToReference {
                reference: Scenario::uniform(space(n)),
            },
        },
        _ => CoreSpec::LossPenalizedMean {
            coefficients: (0..n).map(|_| rng.gen_range(-0.2..0.2)).collect(),
        },
    }
}

fn worst_case_representation() -> Outcome {
    let start = Instant::now();
    let (mut entries, mut worst) = (0usize, 0.0f64);
    for i in 0..1000u64 {
        let mut rng = trial_rng(1, 1, i);
        let n = rng.gen_range(1..=16);
        let k = rng.gen_range(1..=6);
        let core = random_core(&mut rng, n);
        let universe = ScenarioSet::new(
            (0..k)
                .map(|j| {
                    let ms = any_mass_style(&mut rng);
                    random_scenario(&mut rng, space(n), ms).with_id(format!("P{j}"))
                })
                .collect(),
        )
        .unwrap();
        let positions = (0..rng.gen_range(1..=3))
            .map(|j| {
                let vs = any_value_style(&mut rng);
                (format!("X{j}"), random_values(&mut rng, space(n), vs))
            })
            .collect();
        let m = GeneralizedRiskMeasure::worst_case(core.clone());
        let table = PsiTable::from_measure(&m, universe, positions).map_err(|e| format!("table {i}: {e}"))?;
        let r = verify_worst_case_rep(&table, 1e-12);
        ensure(r.status == TheoremStatus::Consistent, || format!("table {i} ({core:?}): contradiction"))?;
        ensure(r.premises_hold && r.representation.holds, || {
            format!("table {i} ({core:?}): {:?}", r.representation.first)
        })?;
        entries += r.representation.checked;
        worst = worst.max(r.representation.max_gap);
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("1000 tables, {entries} entries, max gap {worst:e}"))
}

fn es_coherence() -> Outcome {
    let start = Instant::now();
    let axioms = [
        AxiomId::C1,
        AxiomId::C2,
        AxiomId::C3,
        AxiomId::C4,
        AxiomId::C5,
        AxiomId::ConvexX,
        AxiomId::ConcaveP,
    ];
    let family = InstanceFamily {
        n_max: 64,
        ..InstanceFamily::singletons()
    };
    let mut checked = 0;
    for (s, alpha) in [0.5, 0.9].into_iter().enumerate() {
        let m = GeneralizedRiskMeasure::worst_case(CoreSpec::Es { alpha });
        let r = audit_axioms(&m, &axioms, &family, 10_000, s as u64, 1e-9);
        for (a, res) in &r.results {
            ensure(res.verdict.is_pass(), || format!("ES({alpha}) {a}: {:?}", res.verdict))?;
            ensure(res.checked >= 10_000, || format!("ES({alpha}) {a}: only {} checked", res.checked))?;
            checked += res.checked;
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("{checked} checks over 7 axioms and alpha in {{0.5, 0.9}}"))
}

fn var_subadditivity_failure() -> Outcome {
    let m = GeneralizedRiskMeasure::worst_case(CoreSpec::Var { alpha: 0.5 });
    let w = search_witness(AxiomId::C4, &m, 10_000, 0).map_err(|e| e.to_string())?;
    ensure(w.certify(&m).unwrap(), || "searched witness does not certify".into())?;

    let p = Scenario::uniform(space(3)).with_id("P");
    let canonical = Witness {
        axiom: AxiomId::C4,
        relation: Relation::Le,
        instance: Instance {
            scenarios: vec![p],
            sets: vec![vec!["P".into()]],
            x: vec![0.0, 0.0, 3.0],
            y: Some(vec![0.0, 3.0, 0.0]),
            z: None,
            w: None,
            lambda: None,
            constant: None,
            event: None,
        },
        lhs: 3.0,
        rhs: 0.0,
        gap: 3.0,
        tolerance: SEARCH_TOL,
    };
    let r = canonical.replay(&m).unwrap();
    ensure(r.gap == 3.0 && r.violates, || format!("canonical replay {r:?}"))?;
    ensure(canonical.certify(&m).unwrap(), || "canonical witness does not certify".into())?;
    Ok(format!(
        "searched witness n={} gap {}; canonical gap {}",
        w.instance.n(),
        w.gap,
        r.gap
    ))
}

fn average_es_violation() -> Outcome {
    let pf = load("average_es.json");
    let scenarios = pf.scenarios.scenarios().to_vec();
    let fixed = Witness {
        axiom: AxiomId::A1,
        relation: Relation::Le,
        instance: Instance {
            scenarios,
            sets: vec![vec!["P1".into()], vec!["P1".into(), "P2".into()]],
            x: pf.positions[0].1.values().to_vec(),
            y: None,
            z: None,
            w: None,
            lambda: None,
            constant: None,
            event: None,
        },
        lhs: 10.0,
        rhs: 7.0,
        gap: 3.0,
        tolerance: INEQ_TOL,
    };
    let r = fixed.replay(&pf.measure).unwrap();
    ensure(r.lhs == 10.0 && r.rhs == 7.0 && r.violates, || format!("replay {r:?}"))?;

    let family = InstanceFamily::with_universe(pf.scenarios.clone(), pf.positions.iter().map(|p| p.1.clone()).collect());
    let a = audit_scenario_axioms(&pf.measure, &family, 1000, 0, INEQ_TOL);
    let b = audit_scenario_axioms(&pf.measure, &family, 1000, 0, INEQ_TOL);
    ensure(a == b, || "audit is not deterministic".into())?;
    let w = a
        .verdict(AxiomId::A1)
        .and_then(Verdict::witness)
        .ok_or_else(|| format!("A1 verdict {:?}", a.verdict(AxiomId::A1)))?;
    ensure(w.certify(&pf.measure).unwrap(), || "audit witness does not certify".into())?;
    Ok(format!("fixed 10 > 7 replays; audit witness {} > {}", w.lhs, w.rhs))
}

/// Midpoint rule on a `step` grid anchored at 0 for
/// `int_{-inf}^0 (h(P(X>t)) - 1) dt + int_0^inf h(P(X>t)) dt`.
/// The survival function is constant between breakpoints, so the midpoints in
/// each piece are counted rather than visited.
fn grid_choquet(x: &[f64], p: &[f64], h: &dyn Fn(f64) -> f64, step: f64) -> f64 {
    let mut pts: Vec<f64> = x.to_vec();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let s: f64 = x.iter().zip(p).filter(|(v, _)| **v > mid).map(|(_, m)| m).sum();
        let f = if mid >= 0.0 { h(s.min(1.0)) } else { h(s.min(1.0)) - 1.0 };
        let lo = (a / step - 0.5).floor() as i64 + 1;
        let hi = (b / step - 0.5).ceil() as i64 - 1;
        total += f * (hi - lo + 1).max(0) as f64 * step;
    }
    total
}

fn choquet_equivalences() -> Outcome {
    let distortions = [
        Distortion::Identity,
        Distortion::sqrt(),
        Distortion::Power { exponent: 0.25 },
        Distortion::EsTail { alpha: 0.5 },
        Distortion::EsTail { alpha: 0.9 },
        Distortion::Grid {
            t: vec![0.0, 0.2, 0.5, 1.0],
            h: vec![0.0, 0.4, 0.75, 1.0],
        },
    ];
    let (mut exact_gap, mut grid_gap) = (0.0f64, 0.0f64);
    for (d, h) in distortions.iter().enumerate() {
        ensure(h.is_concave(), || format!("{h:?} is not concave"))?;
        for i in 0..1000u64 {
            let mut rng = trial_rng(5, d as u64, i);
            let n = rng.gen_range(1..=16);
            let ms = any_mass_style(&mut rng);
            let p = random_scenario(&mut rng, space(n), ms);
            let vs = any_value_style(&mut rng);
            let x = random_values(&mut rng, space(n), vs);
            let level = choquet(&x, &p, h).unwrap();
            let rearr = choquet_rearrangement(&x, &p, |t| h.eval(t)).unwrap();
            let mut exact = (level - rearr).abs();
            if let Distortion::EsTail { alpha } = h {
                exact = exact.max((es(&x, &p, *alpha).unwrap() - level).abs());
            }
            let grid = (grid_choquet(x.values(), p.mass(), &|t| h.eval(t), 1e-4) - level).abs();
            ensure(exact <= 1e-9, || format!("{h:?} trial {i}: exact paths differ by {exact:e}"))?;
            ensure(grid <= 1e-3, || format!("{h:?} trial {i}: grid oracle differs by {grid:e}"))?;
            exact_gap = exact_gap.max(exact);
            grid_gap = grid_gap.max(grid);
        }
    }
    Ok(format!(
        "{} distortions x 1000; exact gap {exact_gap:e}, grid gap {grid_gap:e}",
        distortions.len()
    ))
}

fn distortion_round_trip() -> Outcome {
    let hs = [
        Distortion::Identity,
        Distortion::sqrt(),
        Distortion::EsTail { alpha: 0.5 },
        Distortion::EsTail { alpha: 0.9 },
    ];
    let mut worst = 0.0f64;
    for h in &hs {
        for n in [10, 20, 50] {
            let p = Scenario::uniform(space(n)).with_id("P");
            let core = CoreSpec::Distortion { h: h.clone() };
            let rec = recover_distortion(&core, &p, n).map_err(|e| e.to_string())?;
            for (t, v) in rec.grid.iter().zip(&rec.h_values) {
                ensure((v - h.eval(*t)).abs() <= 1e-12, || format!("{h:?} n={n}: h({t}) = {v}"))?;
            }
            let r = verify_choquet_rep(&core, &p, &rec, 1000, n as u64, 1e-9).map_err(|e| e.to_string())?;
            ensure(r.pass, || format!("{h:?} n={n}: max gap {:e}", r.max_gap))?;
            worst = worst.max(r.max_gap);
        }
    }
    Ok(format!("12 cases, max gap {worst:e}"))
}

fn expectation_characterization() -> Outcome {
    let r = verify_coherent_rep(&CoreSpec::Expectation, 1000, 0, INEQ_TOL).map_err(|e| e.to_string())?;
    let c = r.conclusion.as_ref().ok_or("premises did not hold for the expectation")?;
    ensure(c.pass && c.max_gap == 0.0, || format!("conclusion {c:?}"))?;
    ensure(r.status == TheoremStatus::Consistent, || "contradiction".into())?;
    let mut found = Vec::new();
    for core in [CoreSpec::Es { alpha: 0.5 }, CoreSpec::Var { alpha: 0.5 }] {
        let r = verify_coherent_rep(&core, 1000, 0, INEQ_TOL).map_err(|e| e.to_string())?;
        let w = r.premises[&AxiomId::C0]
            .verdict
            .witness()
            .ok_or_else(|| format!("{core:?}: no C0 witness"))?;
        ensure(w.certify(&WorstCaseOf(&core)).unwrap(), || format!("{core:?}: C0 witness does not certify"))?;
        ensure(r.conclusion.is_none() && r.status == TheoremStatus::Consistent, || {
            format!("{core:?}: {:?}", r.status)
        })?;
        found.push(format!("n={}", w.instance.n()));
    }
    Ok(format!("expectation exact; C0 witnesses for ES, VaR ({})", found.join(", ")))
}

fn kl_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let mut rng = trial_rng(8, 0, i);
        let n = rng.gen_range(1..=32);
        let q = random_scenario(&mut rng, space(n), MassStyle::Continuous);
        let z = random_values(&mut rng, space(n), ValueStyle::Continuous(5.0));
        let r = verify_kl_closed_form(&q, &z, 1e-9).map_err(|e| e.to_string())?;
        ensure(r.pass, || format!("case {i}: {r:?}"))?;
        worst = worst.max(r.stationarity_gap);
    }
    let q = ScenarioSet::singleton(Scenario::uniform(space(2)).with_id("Q"));
    let z = rv(&[0.0, 2f64.ln()]);
    let cands = genrisk::aggregators::simplex_lattice(space(2), 10_000).unwrap();
    let v = misspecification_eval(&UtilityFunction::Identity, MisspecificationCost::Kl, &z, &q, &cands).unwrap();
    let v_star = -(0.75f64).ln();
    let excess = v - v_star;
    ensure((0.0..1e-3).contains(&excess), || format!("misspecification excess {excess:e}"))?;
    Ok(format!("100 cases, stationarity gap {worst:e}; lattice excess {excess:e}"))
}

fn taxonomy() -> Outcome {
    let trials = 1000;
    let run = |core: &CoreSpec, family: &InstanceFamily| audit_law_invariance(core, family, trials, 0, EQ_TOL);
    let penalized = load("penalized_mean.json");
    let rows: Vec<(&str, CoreSpec, InstanceFamily, [Option<bool>; 3])> = vec![
        (
            "distortion",
            CoreSpec::Distortion { h: Distortion::sqrt() },
            InstanceFamily::default(),
            [Some(true), Some(true), Some(true)],
        ),
        (
            "penalized",
            penalized.measure.core.clone(),
            InstanceFamily::with_universe(penalized.scenarios.clone(), vec![]),
            [None, Some(true), Some(false)],
        ),
        (
            "beta-penalized",
            CoreSpec::LossPenalizedMean {
                coefficients: vec![0.3, 0.0, 0.0, 0.1],
            },
            InstanceFamily::default(),
            [None, Some(false), Some(true)],
        ),
    ];
    let mut cells = Vec::new();
    for (name, core, family, expect) in &rows {
        let r: AuditReport = run(core, family);
        ensure(r == run(core, family), || format!("{name}: not deterministic"))?;
        let mut row = Vec::new();
        for (a, want) in [AxiomId::B1, AxiomId::B2, AxiomId::B3].into_iter().zip(expect) {
            let v = r.verdict(a).unwrap();
            if let Some(w) = v.witness() {
                ensure(w.certify(&WorstCaseOf(core)).unwrap(), || format!("{name} {a}: witness does not certify"))?;
            }
            match want {
                Some(true) => ensure(v.is_pass(), || format!("{name} {a}: {}", v.short()))?,
                Some(false) => ensure(v.is_fail(), || format!("{name} {a}: {}", v.short()))?,
                None => {}
            }
            row.push(if want.is_some() { v.short() } else { "-" });
        }
        cells.push(format!("{name} ({})", row.join(",")));
    }
    Ok(cells.join("; "))
}

fn run_cli(args: &[&str]) -> Result<(i32, Vec<u8>, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_genrisk"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout, out.stderr))
}

fn determinism() -> Outcome {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    let all: Vec<&str> = AxiomId::ALL.iter().map(|a| a.label()).collect();
    let all = all.join(",");
    let mut runs = 0;
    for f in &files {
        let input = f.to_str().unwrap();
        let commands: [Vec<&str>; 2] = [
            vec!["evaluate", "--input", input],
            vec!["audit", "--input", input, "--axioms", &all, "--trials", "200", "--seed", "7"],
        ];
        for args in &commands {
            let a = run_cli(args)?;
            let b = run_cli(args)?;
            ensure(a == b, || format!("{} {}: outputs differ", args[0], f.display()))?;
            ensure(!a.1.is_empty(), || format!("{} {}: empty output", args[0], f.display()))?;
            runs += 1;
        }
    }
    Ok(format!("{} fixtures, {runs} command pairs identical", files.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("worst-case representation on random tables", worst_case_representation),
        ("ES coherence suite", es_coherence),
        ("VaR subadditivity witness", var_subadditivity_failure),
        ("average-ES uncertainty aversion violation", average_es_violation),
        ("Choquet integral equivalences", choquet_equivalences),
        ("distortion recovery round trip", distortion_round_trip),
        ("expectation characterization", expectation_characterization),
        ("KL closed form", kl_closed_form),
        ("law-invariance taxonomy", taxonomy),
        ("CLI determinism on fixtures", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({secs:.2} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
