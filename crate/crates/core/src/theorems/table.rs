use serde::Serialize;

use crate::aggregators::Measure;
use crate::space::{RandomVariable, ScenarioSet};

use super::{TheoremError, TheoremStatus};

/// Largest scenario universe a table may enumerate.
pub const MAX_UNIVERSE: usize = 12;

/// Values of a measure on every position and every nonempty sub-collection
/// of a finite scenario universe. Subsets are bit masks over the universe order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiTable {
    universe: ScenarioSet,
    positions: Vec<(String, RandomVariable)>,
    /// `values[position][mask - 1]`.
    values: Vec<Vec<f64>>,
}

impl PsiTable {
    /// Builds a table from `(position id, subset ids, value)` entries; every
    /// position must have a value on every nonempty subset.
    pub fn from_entries<I>(
        universe: ScenarioSet,
        positions: Vec<(String, RandomVariable)>,
        entries: I,
    ) -> Result<Self, TheoremError>
    where
        I: IntoIterator<Item = (String, Vec<String>, f64)>,
    {
        let k = universe.len();
        if k > MAX_UNIVERSE {
            return Err(TheoremError::UniverseTooLarge(k));
        }
        let ids: Vec<String> = universe.ids().iter().map(|s| s.to_string()).collect();
        let mut values = vec![vec![f64::NAN; (1 << k) - 1]; positions.len()];
        for (pos, subset, v) in entries {
            let pi = positions
                .iter()
                .position(|(id, _)| *id == pos)
                .ok_or_else(|| TheoremError::InvalidInput(format!("unknown position `{pos}`")))?;
            let mut mask = 0usize;
            for s in &subset {
                let i = ids
                    .iter()
                    .position(|id| id == s)
                    .ok_or_else(|| TheoremError::InvalidInput(format!("unknown scenario `{s}`")))?;
                mask |= 1 << i;
            }
            if mask == 0 {
                return Err(TheoremError::InvalidInput("empty subset".into()));
            }
            values[pi][mask - 1] = v;
        }
        for (pi, row) in values.iter().enumerate() {
            if let Some(m) = row.iter().position(|v| v.is_nan()) {
                return Err(TheoremError::IncompleteTable {
                    position: positions[pi].0.clone(),
                    subset: subset_ids(&ids, m + 1),
                });
            }
        }
        Ok(Self {
            universe,
            positions,
            values,
        })
    }

    /// Tabulates `m` on all nonempty subsets.
    pub fn from_measure(
        m: &dyn Measure,
        universe: ScenarioSet,
        positions: Vec<(String, RandomVariable)>,
    ) -> Result<Self, TheoremError> {
        let k = universe.len();
        if k > MAX_UNIVERSE {
            return Err(TheoremError::UniverseTooLarge(k));
        }
        let mut values = Vec::with_capacity(positions.len());
        for (_, x) in &positions {
            let mut row = Vec::with_capacity((1 << k) - 1);
            for mask in 1..(1u64 << k) {
                row.push(m.eval_set(x, &universe.subset(mask)?)?);
            }
            values.push(row);
        }
        Ok(Self {
            universe,
            positions,
            values,
        })
    }

    pub fn universe(&self) -> &ScenarioSet {
        &self.universe
    }

    pub fn positions(&self) -> &[(String, RandomVariable)] {
        &self.positions
    }

    pub fn value(&self, position: usize, mask: usize) -> f64 {
        self.values[position][mask - 1]
    }

    pub fn set_value(&mut self, position: usize, mask: usize, v: f64) {
        self.values[position][mask - 1] = v;
    }

    fn ids(&self) -> Vec<String> {
        self.universe.ids().iter().map(|s| s.to_string()).collect()
    }
}

fn subset_ids(ids: &[String], mask: usize) -> Vec<String> {
    ids.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, s)| s.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableViolation {
    pub position: String,
    pub subset: Vec<String>,
    /// The superset (A1) or the dominating position (A2) involved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub against: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCheck {
    pub holds: bool,
    pub checked: usize,
    pub violations: usize,
    pub max_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first: Option<TableViolation>,
}

impl TableCheck {
    fn new() -> Self {
        Self {
            holds: true,
            checked: 0,
            violations: 0,
            max_gap: 0.0,
            first: None,
        }
    }

    fn record(&mut self, gap: f64, tol: f64, violation: impl FnOnce() -> TableViolation) {
        self.checked += 1;
        if gap > self.max_gap || gap.is_nan() {
            self.max_gap = gap;
        }
        if gap.is_nan() || gap > tol {
            self.holds = false;
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(violation());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseRepReport {
    pub a1: TableCheck,
    pub a2: TableCheck,
    /// A2 against constant positions under standardness: `Psi(X|Q) <= max_P Psi(X|P)`.
    pub a3: TableCheck,
    pub premises_hold: bool,
    /// `|Psi(X|Q) - max_P Psi(X|{P})|` on every entry.
    pub representation: TableCheck,
    pub status: TheoremStatus,
}

/// Checks uncertainty aversion and scenario monotonicity on the table, and
/// whether every entry equals the maximum over singletons.
pub fn verify_worst_case_rep(table: &PsiTable, tol: f64) -> WorstCaseRepReport {
    let k = table.universe.len();
    let ids = table.ids();
    let full = (1usize << k) - 1;
    let singles: Vec<Vec<f64>> = (0..table.positions.len())
        .map(|p| (0..k).map(|i| table.value(p, 1 << i)).collect())
        .collect();
    let max_over = |p: usize, mask: usize| {
        (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| singles[p][i])
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut a1 = TableCheck::new();
    let mut a2 = TableCheck::new();
    let mut a3 = TableCheck::new();
    let mut rep = TableCheck::new();
    for (p, (pid, _)) in table.positions.iter().enumerate() {
        for mask in 1..=full {
            let v = table.value(p, mask);
            // Removing one scenario at a time covers all nested pairs by transitivity.
            for i in (0..k).filter(|i| mask >> i & 1 == 1) {
                let sub = mask & !(1 << i);
                if sub != 0 {
                    let lhs = table.value(p, sub);
                    a1.record(lhs - v, tol, || TableViolation {
                        position: pid.clone(),
                        subset: subset_ids(&ids, sub),
                        against: Some(subset_ids(&ids, mask).join(",")),
                        lhs,
                        rhs: v,
                    });
                }
            }
            let m = max_over(p, mask);
            a3.record(v - m, tol, || TableViolation {
                position: pid.clone(),
                subset: subset_ids(&ids, mask),
                against: None,
                lhs: v,
                rhs: m,
            });
            rep.record((v - m).abs(), tol, || TableViolation {
                position: pid.clone(),
                subset: subset_ids(&ids, mask),
                against: None,
                lhs: v,
                rhs: m,
            });
            for (q, (qid, _)) in table.positions.iter().enumerate() {
                if q == p {
                    continue;
                }
                let dominated = (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .all(|i| singles[p][i] <= singles[q][i]);
                if dominated {
                    let w = table.value(q, mask);
                    a2.record(v - w, tol, || TableViolation {
                        position: pid.clone(),
                        subset: subset_ids(&ids, mask),
                        against: Some(qid.clone()),
                        lhs: v,
                        rhs: w,
                    });
                }
            }
        }
    }
    let premises_hold = a1.holds && a2.holds && a3.holds;
    let status = if premises_hold != rep.holds {
        TheoremStatus::TheoremContradiction
    } else {
        TheoremStatus::Consistent
    };
    WorstCaseRepReport {
        a1,
        a2,
        a3,
        premises_hold,
        representation: rep,
        status,
    }
}
