use rand::seq::SliceRandom;
use rand::Rng;

use crate::aggregators::Measure;
use crate::rng::{
    any_mass_style, any_value_style, permuted_scenario, random_increasing, random_lambda,
    random_scenario, random_values, MassStyle, TrialRng, ValueStyle,
};
use crate::space::{
    couple, distribution_of, make_comonotone_pair, CouplingOrder, OutcomeSpace, RandomVariable,
    Scenario, ScenarioSet, SpaceError, DEFAULT_COUPLING_BUDGET, MASS_TOL,
};

use super::{AxiomId, Instance};

/// The space of instances an audit draws from.
#[derive(Debug, Clone)]
pub struct InstanceFamily {
    pub n_min: usize,
    pub n_max: usize,
    /// Upper bound on the size of randomly drawn scenario collections.
    pub max_scenarios: usize,
    /// Fixed labeled scenarios; when present, `n` is their space size.
    pub universe: Option<ScenarioSet>,
    /// Fixed losses mixed into the random draws.
    pub positions: Vec<RandomVariable>,
    /// Small integer losses and uniform masses, for witness search.
    pub small: bool,
}

impl Default for InstanceFamily {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 8,
            max_scenarios: 4,
            universe: None,
            positions: Vec::new(),
            small: false,
        }
    }
}

impl InstanceFamily {
    pub fn with_universe(universe: ScenarioSet, positions: Vec<RandomVariable>) -> Self {
        let n = universe.space().size();
        Self {
            n_min: n,
            n_max: n,
            max_scenarios: universe.len(),
            universe: Some(universe),
            positions,
            small: false,
        }
    }

    /// Collections of a single scenario, so that set-level axioms probe the core.
    pub fn singletons() -> Self {
        Self {
            max_scenarios: 1,
            ..Self::default()
        }
    }

    fn n_range(&self, regime: Option<f64>) -> Result<(usize, usize), String> {
        let mut lo = self.n_min.max(1);
        if let Some(alpha) = regime {
            // Smallest n with alpha <= 1 - 1/n.
            let need = if alpha >= 1.0 {
                usize::MAX
            } else {
                (1.0 / (1.0 - alpha) - 1e-9).ceil().max(1.0) as usize
            };
            lo = lo.max(need);
        }
        if lo > self.n_max {
            return Err("regime guard: alpha > 1 - 1/n".into());
        }
        Ok((lo, self.n_max))
    }
}

type Draw<T> = Result<T, String>;

/// Draws one instance for `axiom`, or explains why none was produced.
pub(crate) struct Sampler<'a> {
    pub family: &'a InstanceFamily,
    pub target: &'a dyn Measure,
    pub rng: TrialRng,
    pub index: u64,
}

impl Sampler<'_> {
    fn space(&mut self, cap: Option<usize>) -> Draw<OutcomeSpace> {
        let (lo, mut hi) = self.family.n_range(self.target.regime_alpha())?;
        if let Some(c) = cap {
            if self.family.universe.is_none() {
                hi = hi.min(c.max(lo));
            }
        }
        let n = if let Some(u) = &self.family.universe {
            let n = u.space().size();
            if n < lo {
                return Err("regime guard: alpha > 1 - 1/n".into());
            }
            n
        } else {
            self.rng.gen_range(lo..=hi)
        };
        OutcomeSpace::new(n).map_err(|e| e.to_string())
    }

    fn mass_style(&mut self) -> MassStyle {
        if self.family.small {
            if self.rng.gen_bool(0.6) {
                MassStyle::Uniform
            } else {
                MassStyle::Grid(4)
            }
        } else {
            any_mass_style(&mut self.rng)
        }
    }

    fn value_style(&mut self) -> ValueStyle {
        if self.family.small {
            ValueStyle::Integer(3)
        } else {
            any_value_style(&mut self.rng)
        }
    }

    fn scenario(&mut self, space: OutcomeSpace, id: &str) -> Scenario {
        let style = self.mass_style();
        random_scenario(&mut self.rng, space, style).with_id(id)
    }

    /// A scenario from the universe when one is fixed.
    fn pick(&mut self, space: OutcomeSpace, id: &str) -> Scenario {
        match &self.family.universe {
            Some(u) => u.scenarios()[self.rng.gen_range(0..u.len())].clone(),
            None => self.scenario(space, id),
        }
    }

    /// Two scenarios with distinct ids.
    fn pick_two(&mut self, space: OutcomeSpace) -> (Scenario, Scenario) {
        match &self.family.universe {
            Some(u) if u.len() >= 2 => {
                let mut idx: Vec<usize> = (0..u.len()).collect();
                idx.shuffle(&mut self.rng);
                (u.scenarios()[idx[0]].clone(), u.scenarios()[idx[1]].clone())
            }
            _ => {
                let p = self.pick(space, "P");
                let q = if self.rng.gen_bool(0.3) {
                    permuted_scenario(&mut self.rng, &p).with_id("Q")
                } else {
                    self.scenario(space, "Q")
                };
                (p, q)
            }
        }
    }

    fn universe(&mut self, space: OutcomeSpace) -> ScenarioSet {
        match &self.family.universe {
            Some(u) => u.clone(),
            None => {
                let k = self.rng.gen_range(1..=self.family.max_scenarios.max(1));
                let members = (0..k).map(|i| self.scenario(space, &format!("S{i}"))).collect();
                ScenarioSet::new(members).expect("generated ids are distinct")
            }
        }
    }

    /// A nonempty random sub-collection given as a bit mask.
    fn sub_mask(&mut self, within: u64) -> u64 {
        let bits: Vec<u64> = (0..64).filter(|b| within >> b & 1 == 1).collect();
        loop {
            let m = bits
                .iter()
                .filter(|_| self.rng.gen_bool(0.5))
                .fold(0u64, |acc, b| acc | 1 << b);
            if m != 0 {
                return m;
            }
        }
    }

    fn values(&mut self, space: OutcomeSpace) -> Vec<f64> {
        let fixed: Vec<&RandomVariable> = self
            .family
            .positions
            .iter()
            .filter(|x| x.len() == space.size())
            .collect();
        if !fixed.is_empty() && self.rng.gen_bool(0.5) {
            return fixed[self.rng.gen_range(0..fixed.len())].values().to_vec();
        }
        let style = self.value_style();
        random_values(&mut self.rng, space, style).values().to_vec()
    }

    fn order(&mut self, n: usize, k: usize) -> CouplingOrder {
        let mut rank: Vec<usize> = (0..n).collect();
        rank.shuffle(&mut self.rng);
        let mut vals: Vec<usize> = (0..k).collect();
        if self.rng.gen_bool(0.5) {
            vals.shuffle(&mut self.rng);
        } else {
            vals.reverse();
        }
        CouplingOrder {
            atom_rank: Some(rank),
            value_order: Some(vals),
        }
    }

    /// A loss under `q` with the law of `x` under `p`.
    fn coupled(&mut self, x: &[f64], p: &Scenario, q: &Scenario) -> Draw<Vec<f64>> {
        let x = RandomVariable::from_values(x.to_vec()).map_err(|e| e.to_string())?;
        let law = distribution_of(&x, p).map_err(|e| e.to_string())?;
        let order = self.order(q.len(), law.len());
        match couple(&law, q, &order, DEFAULT_COUPLING_BUDGET) {
            Ok(y) => Ok(y.values().to_vec()),
            Err(SpaceError::Infeasible) => Err("coupling infeasible".into()),
            Err(SpaceError::SearchExhausted(_)) => Err("coupling search exhausted".into()),
            Err(e) => Err(e.to_string()),
        }
    }

    fn empty(x: Vec<f64>, scenarios: Vec<Scenario>) -> Instance {
        Instance {
            scenarios,
            sets: Vec::new(),
            x,
            y: None,
            z: None,
            w: None,
            lambda: None,
            constant: None,
            event: None,
        }
    }

    fn set_instance(&mut self, space: OutcomeSpace) -> (Instance, ScenarioSet) {
        let u = self.universe(space);
        let q = if self.family.universe.is_some() && !self.rng.gen_bool(0.3) {
            u.clone()
        } else {
            let full = if u.len() >= 64 { u64::MAX } else { (1u64 << u.len()) - 1 };
            let m = self.sub_mask(full);
            u.subset(m).expect("nonempty mask")
        };
        let x = self.values(space);
        let mut inst = Self::empty(x, q.scenarios().to_vec());
        inst.sets = vec![q.ids().iter().map(|s| s.to_string()).collect()];
        (inst, q)
    }

    pub fn draw(&mut self, axiom: AxiomId) -> Draw<Instance> {
        let cap = match axiom {
            AxiomId::B4 if self.index % 2 == 1 => Some(10),
            _ => None,
        };
        let space = self.space(cap)?;
        let n = space.size();
        match axiom {
            AxiomId::A1 => {
                let u = self.universe(space);
                let full = if u.len() >= 64 { u64::MAX } else { (1u64 << u.len()) - 1 };
                let r_mask = self.sub_mask(full);
                let q_mask = self.sub_mask(r_mask);
                let r = u.subset(r_mask).map_err(|e| e.to_string())?;
                let q = u.subset(q_mask).map_err(|e| e.to_string())?;
                let x = self.values(space);
                let mut inst = Self::empty(x, r.scenarios().to_vec());
                inst.sets = vec![ids(&q), ids(&r)];
                Ok(inst)
            }
            AxiomId::A2 => {
                let (mut inst, q) = self.set_instance(space);
                let x = RandomVariable::from_values(inst.x.clone()).map_err(|e| e.to_string())?;
                let y = if self.rng.gen_bool(0.5) {
                    let bump: Vec<f64> = (0..n).map(|_| self.rng.gen_range(0.0..3.0)).collect();
                    inst.x.iter().zip(bump).map(|(a, b)| a + b).collect()
                } else {
                    let y0 = self.values(space);
                    let yv = RandomVariable::from_values(y0.clone()).map_err(|e| e.to_string())?;
                    let mut d = f64::NEG_INFINITY;
                    for p in q.iter() {
                        let lhs = self.target.eval_single(&x, p).map_err(|e| e.to_string())?;
                        let rhs = self.target.eval_single(&yv, p).map_err(|e| e.to_string())?;
                        d = d.max(lhs - rhs);
                    }
                    if !d.is_finite() {
                        return Err("non-finite evaluation".into());
                    }
                    let d = d.max(0.0) + 1e-9;
                    y0.into_iter().map(|v| v + d).collect()
                };
                inst.y = Some(y);
                Ok(inst)
            }
            AxiomId::A3 | AxiomId::C2 | AxiomId::C3 => {
                let (mut inst, _) = self.set_instance(space);
                match axiom {
                    AxiomId::C2 => inst.constant = Some(self.rng.gen_range(-10.0..10.0)),
                    AxiomId::C3 => inst.constant = Some(self.rng.gen_range(0.05..5.0)),
                    _ => {}
                }
                Ok(inst)
            }
            AxiomId::Std => {
                let (mut inst, _) = self.set_instance(space);
                let s = if self.index == 0 { 0.0 } else { self.rng.gen_range(-10.0..10.0) };
                inst.x = vec![s; n];
                inst.constant = Some(s);
                Ok(inst)
            }
            AxiomId::C1 | AxiomId::C4 => {
                let (mut inst, _) = self.set_instance(space);
                inst.y = Some(if axiom == AxiomId::C1 {
                    let x = inst.x.clone();
                    x.iter().map(|a| a + self.rng.gen_range(0.0..3.0)).collect()
                } else {
                    self.values(space)
                });
                Ok(inst)
            }
            AxiomId::C5 => {
                let (mut inst, _) = self.set_instance(space);
                let z = RandomVariable::from_values(inst.x.clone()).map_err(|e| e.to_string())?;
                let f = random_increasing(&mut self.rng);
                let g = random_increasing(&mut self.rng);
                let (x, y) = make_comonotone_pair(&z, f, g).map_err(|e| e.to_string())?;
                inst.x = x.values().to_vec();
                inst.y = Some(y.values().to_vec());
                Ok(inst)
            }
            AxiomId::C0 | AxiomId::ConvexX => {
                let p = self.pick(space, "P");
                let mut inst = Self::empty(self.values(space), vec![p]);
                inst.y = Some(self.values(space));
                if axiom == AxiomId::ConvexX {
                    inst.lambda = Some(random_lambda(&mut self.rng));
                }
                Ok(inst)
            }
            AxiomId::B1 => {
                let (p, q) = self.pick_two(space);
                let q = if self.family.universe.is_none() && self.rng.gen_bool(0.5) {
                    permuted_scenario(&mut self.rng, &p).with_id("Q")
                } else {
                    q
                };
                let x = self.values(space);
                let y = self.coupled(&x, &p, &q)?;
                let mut inst = Self::empty(x, vec![p, q]);
                inst.y = Some(y);
                Ok(inst)
            }
            AxiomId::B2 => {
                let p = self.pick(space, "P");
                let x = self.values(space);
                let y = self.coupled(&x, &p, &p)?;
                let mut inst = Self::empty(x, vec![p]);
                inst.y = Some(y);
                Ok(inst)
            }
            AxiomId::B3 => self.draw_b3(space),
            AxiomId::B4 | AxiomId::ConcaveP => {
                let lambda = if self.index % 4 < 2 {
                    (1 + (self.index / 4) % 9) as f64 / 10.0
                } else {
                    random_lambda(&mut self.rng)
                };
                if axiom == AxiomId::B4 && self.index % 2 == 1 {
                    return self.draw_b4_event(space, lambda);
                }
                let (p, q) = self.pick_two(space);
                let mut inst = Self::empty(self.values(space), vec![p, q]);
                inst.lambda = Some(lambda);
                Ok(inst)
            }
            AxiomId::B5 => {
                let (p, q) = self.pick_two(space);
                let q = if self.family.universe.is_none() && self.rng.gen_bool(0.5) {
                    permuted_scenario(&mut self.rng, &p).with_id("Q")
                } else {
                    q
                };
                let x = self.values(space);
                let z = self.values(space);
                let y = self.coupled(&x, &p, &q)?;
                let w = self.coupled(&z, &p, &q)?;
                let mut inst = Self::empty(x, vec![p, q]);
                inst.y = Some(y);
                inst.z = Some(z);
                inst.w = Some(w);
                Ok(inst)
            }
        }
    }

    fn draw_b3(&mut self, space: OutcomeSpace) -> Draw<Instance> {
        let n = space.size();
        let from_universe = matches!(&self.family.universe, Some(u) if u.len() >= 2);
        if from_universe && self.rng.gen_bool(0.7) {
            // Free values only where the two scenarios agree.
            let (p, q) = self.pick_two(space);
            let c = self.rng.gen_range(-5i32..=5) as f64;
            let free = self.values(space);
            let x = (0..n)
                .map(|i| if (p.mass()[i] - q.mass()[i]).abs() <= MASS_TOL { free[i] } else { c })
                .collect();
            return Ok(Self::empty(x, vec![p, q]));
        }
        // Redistribute mass inside the level sets of an integer-valued loss.
        let p = self.pick(space, "P");
        let bound = self.rng.gen_range(1..=3);
        let x: Vec<f64> = (0..n).map(|_| self.rng.gen_range(-bound..=bound) as f64).collect();
        let mut mass = vec![0.0; n];
        let mut levels: Vec<f64> = x.clone();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        for level in levels {
            let atoms: Vec<usize> = (0..n).filter(|&i| x[i] == level).collect();
            let total: f64 = atoms.iter().map(|&i| p.mass()[i]).sum();
            let w: Vec<f64> = atoms.iter().map(|_| self.rng.gen::<f64>() + 1e-3).collect();
            let wsum: f64 = w.iter().sum();
            for (k, &i) in atoms.iter().enumerate() {
                mass[i] = total * w[k] / wsum;
            }
        }
        let q = Scenario::new(space, mass).map_err(|e| e.to_string())?.with_id("Q");
        Ok(Self::empty(x, vec![p, q]))
    }

    fn draw_b4_event(&mut self, space: OutcomeSpace, lambda: f64) -> Draw<Instance> {
        let den = [2u32, 3, 4, 6, 8][self.rng.gen_range(0..5)];
        let (p, q) = match &self.family.universe {
            Some(u) if u.len() >= 2 => self.pick_two(space),
            _ => (
                random_scenario(&mut self.rng, space, MassStyle::Grid(den)).with_id("P"),
                random_scenario(&mut self.rng, space, MassStyle::Grid(den)).with_id("Q"),
            ),
        };
        let events = find_unambiguous_events(&p, &q, 4096);
        if events.is_empty() {
            return Err("no nontrivial event with P(A) = Q(A)".into());
        }
        let a = events[self.rng.gen_range(0..events.len())].clone();
        let x = (0..space.size()).map(|i| if a.contains(&i) { 1.0 } else { 0.0 }).collect();
        let mut inst = Self::empty(x, vec![p, q]);
        inst.lambda = Some(lambda);
        inst.event = Some(a);
        Ok(inst)
    }
}

fn ids(q: &ScenarioSet) -> Vec<String> {
    q.ids().iter().map(|s| s.to_string()).collect()
}

/// Nontrivial events with `P(A) = Q(A)`; exhaustive for up to 16 atoms,
/// otherwise a deterministic sample of `limit` masks.
pub fn find_unambiguous_events(p: &Scenario, q: &Scenario, limit: usize) -> Vec<Vec<usize>> {
    let n = p.len();
    let diff: Vec<f64> = p.mass().iter().zip(q.mass()).map(|(a, b)| a - b).collect();
    let pm = p.mass();
    let accept = |atoms: &[usize]| {
        let d: f64 = atoms.iter().map(|&i| diff[i]).sum();
        let mass: f64 = atoms.iter().map(|&i| pm[i]).sum();
        d.abs() <= MASS_TOL && mass > MASS_TOL && mass < 1.0 - MASS_TOL
    };
    let mut out = Vec::new();
    if n <= 16 {
        for mask in 1u32..(1u32 << n) - 1 {
            let atoms: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if accept(&atoms) {
                out.push(atoms);
                if out.len() >= limit {
                    break;
                }
            }
        }
    } else {
        let mut rng = crate::rng::trial_rng(n as u64, 0xE7, 0);
        for _ in 0..limit {
            let atoms: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if accept(&atoms) {
                out.push(atoms);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::GeneralizedRiskMeasure;
    use crate::cores::CoreSpec;
    use crate::rng::trial_rng;

    #[test]
    fn events_with_equal_mass() {
        let sp = OutcomeSpace::new(3).unwrap();
        let p = Scenario::new(sp, vec![0.5, 0.25, 0.25]).unwrap();
        let q = Scenario::new(sp, vec![0.5, 0.5, 0.0]).unwrap();
        let ev = find_unambiguous_events(&p, &q, 100);
        assert!(ev.contains(&vec![0]));
        assert!(ev.contains(&vec![1, 2]));
        assert!(!ev.contains(&vec![1]));
    }

    #[test]
    fn regime_guard_blocks_small_spaces() {
        let fam = InstanceFamily {
            n_min: 2,
            n_max: 4,
            ..InstanceFamily::default()
        };
        assert!(fam.n_range(Some(0.9)).is_err());
        assert_eq!(fam.n_range(Some(0.75)).unwrap(), (4, 4));
        assert_eq!(fam.n_range(Some(0.5)).unwrap(), (2, 4));
    }

    #[test]
    fn draws_satisfy_structural_premises() {
        let m = GeneralizedRiskMeasure::worst_case(CoreSpec::Es { alpha: 0.5 });
        let fam = InstanceFamily::default();
        for axiom in AxiomId::ALL {
            for i in 0..40 {
                let mut s = Sampler {
                    family: &fam,
                    target: &m,
                    rng: trial_rng(11, axiom as u64, i),
                    index: i,
                };
                if let Ok(inst) = s.draw(axiom) {
                    assert!(
                        super::super::check::premise(axiom, &m, &inst).unwrap(),
                        "{axiom} trial {i}"
                    );
                }
            }
        }
    }
}
