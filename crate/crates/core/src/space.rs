//! Finite outcome spaces, scenarios and random variables.
//!
//! Everything here is immutable once validated. Scenarios are checked but
//! never renormalized; a mass vector that does not sum to one is an error,
//! not something to repair.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for all probability-mass comparisons.
pub const MASS_TOL: f64 = 1e-12;

/// Node budget for the atom-partition search used by couplings.
pub const DEFAULT_COUPLING_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("outcome space must have at least one atom")]
    EmptySpace,
    #[error("length mismatch: expected {expected} atoms, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("negative mass {value} at atom {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("masses sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("non-finite entry at atom {index}")]
    NonFinite { index: usize },
    #[error("mixing weight {0} outside [0, 1]")]
    BadLambda(f64),
    #[error("quantile level {0} outside (0, 1]")]
    BadAlpha(f64),
    #[error("no partition of the scenario's atoms realizes the target law")]
    Infeasible,
    #[error("atom-partition search exhausted its budget of {0} nodes")]
    SearchExhausted(usize),
    #[error("pair is not comonotone at atoms {0} and {1}")]
    NotMonotone(usize, usize),
    #[error("atom index {index} outside outcome space of size {n}")]
    AtomOutOfRange { index: usize, n: usize },
    #[error("scenario set is empty")]
    EmptyScenarioSet,
    #[error("scenario in a set has no id")]
    MissingId,
    #[error("duplicate scenario id `{0}`")]
    DuplicateId(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

pub type Result<T, E = SpaceError> = std::result::Result<T, E>;

/// A finite outcome space with atoms `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutcomeSpace {
    n: usize,
}

impl OutcomeSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SpaceError::EmptySpace);
        }
        Ok(Self { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(SpaceError::LengthMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }
}

/// A probability vector over the atoms of an outcome space.
///
/// The optional id is part of the scenario's identity: two scenarios with
/// equal masses but different ids are different scenarios (penalty tables
/// rely on this).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRaw")]
pub struct Scenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    mass: Vec<f64>,
}

#[derive(Deserialize)]
struct ScenarioRaw {
    id: Option<String>,
    mass: Vec<f64>,
}

impl TryFrom<ScenarioRaw> for Scenario {
    type Error = SpaceError;

    fn try_from(raw: ScenarioRaw) -> Result<Self> {
        let space = OutcomeSpace::new(raw.mass.len())?;
        let s = make_scenario(space, raw.mass)?;
        Ok(match raw.id {
            Some(id) => s.with_id(id),
            None => s,
        })
    }
}

/// Validates `mass` against `space` and wraps it as a [`Scenario`].
pub fn make_scenario(space: OutcomeSpace, mass: Vec<f64>) -> Result<Scenario> {
    space.check_len(mass.len())?;
    for (index, &m) in mass.iter().enumerate() {
        if !m.is_finite() {
            return Err(SpaceError::NonFinite { index });
        }
        if m < 0.0 {
            return Err(SpaceError::NegativeMass { index, value: m });
        }
    }
    let sum: f64 = mass.iter().sum();
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(SpaceError::NotNormalized { sum });
    }
    Ok(Scenario { id: None, mass })
}

impl Scenario {
    pub fn new(space: OutcomeSpace, mass: Vec<f64>) -> Result<Self> {
        make_scenario(space, mass)
    }

    pub fn uniform(space: OutcomeSpace) -> Self {
        let n = space.size();
        Self {
            id: None,
            mass: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on one atom.
    pub fn dirac(space: OutcomeSpace, atom: usize) -> Result<Self> {
        if atom >= space.size() {
            return Err(SpaceError::AtomOutOfRange {
                index: atom,
                n: space.size(),
            });
        }
        let mut mass = vec![0.0; space.size()];
        mass[atom] = 1.0;
        Ok(Self { id: None, mass })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn without_id(mut self) -> Self {
        self.id = None;
        self
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn space(&self) -> OutcomeSpace {
        OutcomeSpace { n: self.mass.len() }
    }

    pub fn prob(&self, event: &Event) -> f64 {
        event.atoms.iter().map(|&i| self.mass[i]).sum()
    }

    /// True when every atom carries the same mass.
    pub fn is_uniform(&self) -> bool {
        let first = self.mass[0];
        self.mass.iter().all(|&m| (m - first).abs() <= MASS_TOL)
    }

    /// Same masses, ignoring ids, within [`MASS_TOL`].
    pub fn same_masses(&self, other: &Scenario) -> bool {
        self.len() == other.len()
            && self
                .mass
                .iter()
                .zip(&other.mass)
                .all(|(a, b)| (a - b).abs() <= MASS_TOL)
    }
}

/// Returns `lambda * p + (1 - lambda) * q` entrywise (without an id).
pub fn mix_scenarios(p: &Scenario, q: &Scenario, lambda: f64) -> Result<Scenario> {
    if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
        return Err(SpaceError::BadLambda(lambda));
    }
    p.space().check_len(q.len())?;
    let mass = p
        .mass
        .iter()
        .zip(&q.mass)
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    Ok(Scenario { id: None, mass })
}

/// A real-valued loss on the atoms of an outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomVariable {
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(space: OutcomeSpace, values: Vec<f64>) -> Result<Self> {
        space.check_len(values.len())?;
        Self::from_values(values)
    }

    /// Builds a variable from raw values; the space is implied by the length.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(SpaceError::EmptySpace);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpaceError::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn constant(space: OutcomeSpace, c: f64) -> Self {
        Self {
            values: vec![c; space.size()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn space(&self) -> OutcomeSpace {
        OutcomeSpace {
            n: self.values.len(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.space().check_len(other.len())?;
        Self::from_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn shift(&self, m: f64) -> Result<Self> {
        self.map(|v| v + m)
    }

    pub fn scale(&self, k: f64) -> Result<Self> {
        self.map(|v| k * v)
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        self.zip_with(other, |a, b| lambda * a + (1.0 - lambda) * b)
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.len() == other.len() && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// Expectation under `p`. Exact on variables that are `p`-a.s. constant.
    pub fn expectation(&self, p: &Scenario) -> Result<f64> {
        self.space().check_len(p.len())?;
        if let Some(c) = self.as_constant_under(p) {
            return Ok(c);
        }
        Ok(self.values.iter().zip(&p.mass).map(|(x, m)| x * m).sum())
    }

    /// The common value when the variable is constant on the support of `p`.
    pub fn as_constant_under(&self, p: &Scenario) -> Option<f64> {
        let mut it = self
            .values
            .iter()
            .zip(&p.mass)
            .filter(|(_, &m)| m > 0.0)
            .map(|(&v, _)| v);
        let first = it.next()?;
        it.all(|v| v == first).then_some(first)
    }
}

/// A subset of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Event {
    atoms: Vec<usize>,
}

impl Event {
    pub fn new(space: OutcomeSpace, atoms: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut atoms: Vec<usize> = atoms.into_iter().collect();
        atoms.sort_unstable();
        atoms.dedup();
        if let Some(&index) = atoms.iter().find(|&&i| i >= space.size()) {
            return Err(SpaceError::AtomOutOfRange {
                index,
                n: space.size(),
            });
        }
        Ok(Self { atoms })
    }

    /// Event given by the set bits of `mask`.
    pub fn from_mask(space: OutcomeSpace, mask: u64) -> Result<Self> {
        Self::new(space, (0..64).filter(|b| mask >> b & 1 == 1))
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn indicator(&self, space: OutcomeSpace) -> RandomVariable {
        let mut values = vec![0.0; space.size()];
        for &i in &self.atoms {
            values[i] = 1.0;
        }
        RandomVariable { values }
    }
}

/// A nonempty ordered collection of scenarios with distinct ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        let first = scenarios.first().ok_or(SpaceError::EmptyScenarioSet)?;
        let space = first.space();
        let mut seen = std::collections::BTreeSet::new();
        for s in &scenarios {
            space.check_len(s.len())?;
            let id = s.id().ok_or(SpaceError::MissingId)?;
            if !seen.insert(id.to_string()) {
                return Err(SpaceError::DuplicateId(id.to_string()));
            }
        }
        Ok(Self { scenarios })
    }

    /// Labels unlabeled scenarios `P0`, `P1`, ... by position.
    pub fn labeled(scenarios: Vec<Scenario>) -> Result<Self> {
        let scenarios = scenarios
            .into_iter()
            .enumerate()
            .map(|(i, s)| match s.id {
                Some(_) => s,
                None => s.with_id(format!("P{i}")),
            })
            .collect();
        Self::new(scenarios)
    }

    pub fn singleton(p: Scenario) -> Self {
        let p = if p.id.is_some() { p } else { p.with_id("P0") };
        Self { scenarios: vec![p] }
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn space(&self) -> OutcomeSpace {
        self.scenarios[0].space()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scenario> {
        self.scenarios.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id() == Some(id))
    }

    /// The sub-collection selected by the set bits of `mask` (bit i = scenario i).
    pub fn subset(&self, mask: u64) -> Result<Self> {
        let picked: Vec<Scenario> = self
            .scenarios
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, s)| s.clone())
            .collect();
        Self::new(picked)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.scenarios.iter().filter_map(|s| s.id()).collect()
    }
}

impl<'a> IntoIterator for &'a ScenarioSet {
    type Item = &'a Scenario;
    type IntoIter = std::slice::Iter<'a, Scenario>;

    fn into_iter(self) -> Self::IntoIter {
        self.scenarios.iter()
    }
}

/// A finitely supported law: strictly increasing support with positive masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    mass: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(support: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != mass.len() {
            return Err(SpaceError::InvalidDistribution(
                "support and mass must be nonempty and of equal length".into(),
            ));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpaceError::InvalidDistribution(
                "support must be strictly increasing".into(),
            ));
        }
        if let Some(index) = support.iter().position(|v| !v.is_finite()) {
            return Err(SpaceError::NonFinite { index });
        }
        if mass.iter().any(|&m| !m.is_finite() || m <= 0.0) {
            return Err(SpaceError::InvalidDistribution(
                "masses must be positive".into(),
            ));
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(SpaceError::NotNormalized { sum });
        }
        Ok(Self { support, mass })
    }

    pub fn point(c: f64) -> Self {
        Self {
            support: vec![c],
            mass: vec![1.0],
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.support.last().expect("nonempty support")
    }

    pub fn min(&self) -> f64 {
        self.support[0]
    }

    pub fn is_degenerate(&self) -> bool {
        self.support.len() == 1
    }

    /// Mass-wise mixture `lambda * self + (1 - lambda) * other`.
    pub fn mixture(&self, other: &Self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(SpaceError::BadLambda(lambda));
        }
        let mut pairs: Vec<(f64, f64)> = self
            .support
            .iter()
            .zip(&self.mass)
            .map(|(&v, &m)| (v, lambda * m))
            .chain(
                other
                    .support
                    .iter()
                    .zip(&other.mass)
                    .map(|(&v, &m)| (v, (1.0 - lambda) * m)),
            )
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(merge_sorted(pairs))
    }

    /// Same support and masses within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.support == other.support
            && self
                .mass
                .iter()
                .zip(&other.mass)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

fn merge_sorted(pairs: Vec<(f64, f64)>) -> DiscreteDistribution {
    let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut mass: Vec<f64> = Vec::with_capacity(pairs.len());
    for (v, m) in pairs {
        if m <= 0.0 {
            continue;
        }
        match support.last() {
            Some(&last) if last == v => *mass.last_mut().unwrap() += m,
            _ => {
                support.push(v);
                mass.push(m);
            }
        }
    }
    DiscreteDistribution { support, mass }
}

/// The law of `x` under `p`: masses aggregated by value, zero-mass values dropped.
pub fn distribution_of(x: &RandomVariable, p: &Scenario) -> Result<DiscreteDistribution> {
    x.space().check_len(p.len())?;
    let mut pairs: Vec<(f64, f64)> = x.values.iter().copied().zip(p.mass.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(merge_sorted(pairs))
}

/// Left quantile: the smallest support point whose cumulative mass reaches `alpha`.
pub fn quantile(f: &DiscreteDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SpaceError::BadAlpha(alpha));
    }
    let mut cum = 0.0;
    for (&v, &m) in f.support.iter().zip(&f.mass) {
        cum += m;
        if cum >= alpha - MASS_TOL {
            return Ok(v);
        }
    }
    Ok(f.max())
}

/// Two laws are equal when supports match exactly and masses within [`MASS_TOL`].
pub fn same_law(x: &RandomVariable, p: &Scenario, y: &RandomVariable, q: &Scenario) -> Result<bool> {
    Ok(distribution_of(x, p)?.approx_eq(&distribution_of(y, q)?, MASS_TOL))
}

/// Search order for [`couple`]. Atoms are always visited heaviest first; the
/// orders only break ties and choose which target value is tried first.
#[derive(Debug, Clone, Default)]
pub struct CouplingOrder {
    /// Tie-break rank per atom of the receiving scenario (lower goes first).
    pub atom_rank: Option<Vec<usize>>,
    /// Order in which target support points are tried, as indices into the support.
    pub value_order: Option<Vec<usize>>,
}

/// Finds `Y` with `distribution_of(Y, q) == distribution_of(x, p)`.
///
/// The deterministic search visits `q`'s atoms heaviest first and offers each
/// the largest remaining target value first.
pub fn make_identically_distributed_pair(
    x: &RandomVariable,
    p: &Scenario,
    q: &Scenario,
) -> Result<RandomVariable> {
    let target = distribution_of(x, p)?;
    couple(&target, q, &CouplingOrder::default(), DEFAULT_COUPLING_BUDGET)
}

/// Partitions the atoms of `q` into groups whose masses match `target`'s masses.
pub fn couple(
    target: &DiscreteDistribution,
    q: &Scenario,
    order: &CouplingOrder,
    budget: usize,
) -> Result<RandomVariable> {
    let n = q.len();
    let k = target.len();
    let rank = |i: usize| order.atom_rank.as_ref().map_or(i, |r| r[i]);
    let mut atoms: Vec<usize> = (0..n).filter(|&i| q.mass[i] > 0.0).collect();
    atoms.sort_by(|&a, &b| {
        q.mass[b]
            .partial_cmp(&q.mass[a])
            .unwrap_or(Ordering::Equal)
            .then(rank(a).cmp(&rank(b)))
    });
    let value_order: Vec<usize> = match &order.value_order {
        Some(v) => v.clone(),
        None => (0..k).rev().collect(),
    };

    let mut search = PartitionSearch {
        masses: atoms.iter().map(|&i| q.mass[i]).collect(),
        capacity: target.mass.clone(),
        assignment: vec![usize::MAX; atoms.len()],
        value_order,
        nodes: 0,
        budget,
    };
    match search.run(0) {
        Some(true) => {}
        Some(false) => return Err(SpaceError::Infeasible),
        None => return Err(SpaceError::SearchExhausted(budget)),
    }

    let fallback = target.support[search.value_order[0]];
    let mut values = vec![fallback; n];
    for (slot, &atom) in atoms.iter().enumerate() {
        values[atom] = target.support[search.assignment[slot]];
    }
    Ok(RandomVariable { values })
}

struct PartitionSearch {
    masses: Vec<f64>,
    capacity: Vec<f64>,
    assignment: Vec<usize>,
    value_order: Vec<usize>,
    nodes: usize,
    budget: usize,
}

impl PartitionSearch {
    /// `Some(found)` on a completed search, `None` when the budget ran out.
    fn run(&mut self, slot: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        if slot == self.masses.len() {
            return Some(self.capacity.iter().all(|c| c.abs() <= MASS_TOL));
        }
        // Atoms are sorted descending, so the last one is the smallest left.
        let smallest = *self.masses.last().unwrap();
        if self
            .capacity
            .iter()
            .any(|&c| c > MASS_TOL && c < smallest - MASS_TOL)
        {
            return Some(false);
        }
        let m = self.masses[slot];
        let mut tried: Vec<f64> = Vec::new();
        for idx in 0..self.value_order.len() {
            let j = self.value_order[idx];
            let cap = self.capacity[j];
            if cap < m - MASS_TOL {
                continue;
            }
            // Equal remaining capacities give symmetric subtrees.
            if tried.iter().any(|&t| (t - cap).abs() <= MASS_TOL) {
                continue;
            }
            tried.push(cap);
            self.capacity[j] -= m;
            self.assignment[slot] = j;
            match self.run(slot + 1) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
            self.capacity[j] += m;
        }
        Some(false)
    }
}

/// Returns `(f(z), g(z))`, verified comonotone on every pair of atoms.
pub fn make_comonotone_pair(
    z: &RandomVariable,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<(RandomVariable, RandomVariable)> {
    let x = z.map(f)?;
    let y = z.map(g)?;
    if let Some((i, j)) = comonotone_violation(&x, &y) {
        return Err(SpaceError::NotMonotone(i, j));
    }
    Ok((x, y))
}

/// First atom pair where `(x_i - x_j)(y_i - y_j) < 0`, if any.
pub fn comonotone_violation(x: &RandomVariable, y: &RandomVariable) -> Option<(usize, usize)> {
    let (xv, yv) = (x.values(), y.values());
    for i in 0..xv.len() {
        for j in (i + 1)..xv.len() {
            if (xv[i] - xv[j]) * (yv[i] - yv[j]) < 0.0 {
                return Some((i, j));
            }
        }
    }
    None
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(f, "{id}{:?}", self.mass),
            None => write!(f, "{:?}", self.mass),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: usize) -> OutcomeSpace {
        OutcomeSpace::new(n).unwrap()
    }

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::from_values(v.to_vec()).unwrap()
    }

    fn sc(m: &[f64]) -> Scenario {
        make_scenario(sp(m.len()), m.to_vec()).unwrap()
    }

    #[test]
    fn make_scenario_validates() {
        let u = make_scenario(sp(4), vec![0.25; 4]).unwrap();
        assert_eq!(u.mass(), &[0.25; 4]);
        assert!(matches!(
            make_scenario(sp(2), vec![0.7, -0.2]),
            Err(SpaceError::NegativeMass { index: 1, .. })
        ));
        assert!(matches!(
            make_scenario(sp(2), vec![0.6, 0.6]),
            Err(SpaceError::NotNormalized { .. })
        ));
        assert!(matches!(
            make_scenario(sp(3), vec![0.5, 0.5]),
            Err(SpaceError::LengthMismatch { expected: 3, got: 2 })
        ));
        assert!(OutcomeSpace::new(0).is_err());
    }

    #[test]
    fn mixing() {
        let p = sc(&[0.3, 0.7]);
        let q = sc(&[0.9, 0.1]);
        assert_eq!(mix_scenarios(&p, &q, 1.0).unwrap().mass(), p.mass());
        assert_eq!(
            mix_scenarios(&sc(&[1.0, 0.0]), &sc(&[0.0, 1.0]), 0.5).unwrap().mass(),
            &[0.5, 0.5]
        );
        let m = mix_scenarios(&sc(&[0.8, 0.2]), &sc(&[0.4, 0.6]), 0.25).unwrap();
        assert!((m.mass()[0] - 0.5).abs() < 1e-15 && (m.mass()[1] - 0.5).abs() < 1e-15);
        assert!(matches!(mix_scenarios(&p, &q, 1.5), Err(SpaceError::BadLambda(_))));
    }

    #[test]
    fn distributions() {
        let f = distribution_of(&rv(&[0.0, 0.0, 3.0]), &Scenario::uniform(sp(3))).unwrap();
        assert_eq!(f.support(), &[0.0, 3.0]);
        assert!((f.mass()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.mass()[1] - 1.0 / 3.0).abs() < 1e-15);

        let c = distribution_of(&rv(&[2.5; 4]), &Scenario::uniform(sp(4))).unwrap();
        assert_eq!(c.support(), &[2.5]);

        let d = distribution_of(&rv(&[0.0, 0.0, 3.0]), &sc(&[0.5, 0.5, 0.0])).unwrap();
        assert_eq!(d.support(), &[0.0]);
        assert_eq!(d.mass(), &[1.0]);
    }

    #[test]
    fn quantiles() {
        let f = DiscreteDistribution::new(vec![0.0, 3.0], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(quantile(&f, 0.5).unwrap(), 0.0);
        assert_eq!(quantile(&f, 0.7).unwrap(), 3.0);
        assert_eq!(quantile(&f, 1.0).unwrap(), 3.0);
        let pt = DiscreteDistribution::point(-1.5);
        for a in [0.01, 0.5, 1.0] {
            assert_eq!(quantile(&pt, a).unwrap(), -1.5);
        }
        assert!(matches!(quantile(&f, 0.0), Err(SpaceError::BadAlpha(_))));
        assert!(matches!(quantile(&f, 1.01), Err(SpaceError::BadAlpha(_))));
    }

    #[test]
    fn identically_distributed_pairs() {
        let p = Scenario::uniform(sp(4));
        let q = sc(&[0.5, 0.25, 0.125, 0.125]);
        let y = make_identically_distributed_pair(&rv(&[0.0, 0.0, 1.0, 1.0]), &p, &q).unwrap();
        assert_eq!(y.values(), &[1.0, 0.0, 0.0, 0.0]);

        let y = make_identically_distributed_pair(&rv(&[1.0, 2.0, 3.0, 4.0]), &p, &p).unwrap();
        assert_eq!(y.values(), &[4.0, 3.0, 2.0, 1.0]);

        // Target {0: 1/3, 1: 2/3} cannot be carved out of halves.
        let err = make_identically_distributed_pair(
            &rv(&[0.0, 1.0, 1.0]),
            &Scenario::uniform(sp(3)),
            &sc(&[0.5, 0.5, 0.0]),
        );
        assert_eq!(err, Err(SpaceError::Infeasible));
    }

    #[test]
    fn coupling_assigns_zero_mass_atoms() {
        let x = rv(&[1.0, 2.0, 2.0]);
        let p = sc(&[0.5, 0.25, 0.25]);
        let q = sc(&[0.0, 0.5, 0.5]);
        let y = make_identically_distributed_pair(&x, &p, &q).unwrap();
        assert!(same_law(&x, &p, &y, &q).unwrap());
    }

    #[test]
    fn comonotone_pairs() {
        let z = rv(&[1.0, 2.0, 3.0]);
        let (x, y) = make_comonotone_pair(&z, |v| v, |v| v).unwrap();
        assert_eq!(x, z);
        assert_eq!(y, z);
        let (x, y) = make_comonotone_pair(&z, |v| 2.0 * v, |v| v * v).unwrap();
        assert_eq!(x.values(), &[2.0, 4.0, 6.0]);
        assert_eq!(y.values(), &[1.0, 4.0, 9.0]);
        assert!(matches!(
            make_comonotone_pair(&z, |v| v, |v| -v),
            Err(SpaceError::NotMonotone(0, 1))
        ));
    }

    #[test]
    fn scenario_sets() {
        let a = sc(&[0.5, 0.5]).with_id("A");
        let b = sc(&[0.1, 0.9]).with_id("A");
        assert!(matches!(
            ScenarioSet::new(vec![a.clone(), b]),
            Err(SpaceError::DuplicateId(_))
        ));
        assert!(matches!(ScenarioSet::new(vec![]), Err(SpaceError::EmptyScenarioSet)));
        assert!(matches!(
            ScenarioSet::new(vec![sc(&[1.0, 0.0])]),
            Err(SpaceError::MissingId)
        ));
        let set = ScenarioSet::labeled(vec![a, sc(&[1.0, 0.0])]).unwrap();
        assert_eq!(set.ids(), vec!["A", "P1"]);
        assert_eq!(set.subset(0b10).unwrap().ids(), vec!["P1"]);
    }

    #[test]
    fn events() {
        let e = Event::new(sp(4), [2, 0, 2]).unwrap();
        assert_eq!(e.atoms(), &[0, 2]);
        assert_eq!(e.indicator(sp(4)).values(), &[1.0, 0.0, 1.0, 0.0]);
        assert!((sc(&[0.1, 0.2, 0.3, 0.4]).prob(&e) - 0.4).abs() < 1e-15);
        assert!(Event::new(sp(2), [5]).is_err());
    }
}
