//! Consistency of a knowledge base via linear feasibility.
//!
//! A distribution over the worlds is a model of `(A | B)[d]` when
//! `P(AB) = d * P(B)`, so each constraint contributes one linear equality
//! over the world probabilities; together with the simplex constraints this
//! gives a feasibility problem whose solvability is exactly consistency.
//! Phase-one simplex decides it and hands back a witness distribution.
//!
//! Note the model relation carefully: a conditional whose antecedent gets
//! probability zero is satisfied *vacuously*. A base like
//! `{(A | B)[0.9], (!A | B)[0.9]}` is therefore consistent — any model just
//! pushes `P(B)` to zero. Callers expecting strict conditioning should add
//! an explicit `(B)[p]` constraint with `p > 0`.

use crate::kb::{CompiledKb, KnowledgeBase};
use crate::simplex::{self, LpResult};
use crate::{Error, Result};

/// A witness distribution must satisfy every constraint row this tightly.
pub const WITNESS_RESIDUAL_TOL: f64 = 1e-9;
/// Default cap on the number of constraints for subset enumeration.
pub const DEFAULT_SUBSET_CAP: usize = 20;

/// A probability distribution over the worlds of a signature.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates nonnegativity and unit mass (within `1e-9`); entries in
    /// `[-1e-9, 0)` are clamped to zero.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let mut probs = probs;
        let mut sum = 0.0;
        for p in probs.iter_mut() {
            if *p < 0.0 {
                if *p < -WITNESS_RESIDUAL_TOL {
                    return Err(Error::InvalidKnowledgeBase(format!(
                        "negative world probability {p}"
                    )));
                }
                *p = 0.0;
            }
            sum += *p;
        }
        if (sum - 1.0).abs() > WITNESS_RESIDUAL_TOL {
            return Err(Error::InvalidKnowledgeBase(format!(
                "world probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Distribution { probs })
    }

    pub fn uniform(world_count: u64) -> Self {
        let n = world_count.max(1) as usize;
        Distribution {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// All mass on a single world.
    pub fn point_mass(world_count: u64, world: u64) -> Self {
        let mut probs = vec![0.0; world_count as usize];
        probs[world as usize] = 1.0;
        Distribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total probability of a set of worlds.
    pub fn prob_of(&self, set: &crate::logic::WorldSet) -> f64 {
        set.iter().map(|w| self.probs[w as usize]).sum()
    }
}

/// The linear system translating a compiled knowledge base: one homogeneous
/// row per constraint plus the normalization `sum = 1` row; nonnegativity of
/// the world probabilities is implicit.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub world_count: usize,
    /// Row `i` is `sum_{w in Mod(A_i B_i)} a_w - d_i * sum_{w in Mod(B_i)} a_w`,
    /// with right-hand side zero.
    pub constraint_rows: Vec<Vec<f64>>,
    /// All-ones row with right-hand side one.
    pub sum_row: Vec<f64>,
}

/// Builds the constraint system for a compiled knowledge base.
pub fn build_cs(ckb: &CompiledKb) -> LinearSystem {
    let wc = ckb.world_count() as usize;
    let rows = ckb
        .kb()
        .constraints()
        .iter()
        .zip(ckb.sets())
        .map(|(c, sets)| {
            let mut row = vec![0.0; wc];
            for w in sets.joint.iter() {
                row[w as usize] += 1.0;
            }
            for w in sets.condition.iter() {
                row[w as usize] -= c.prob;
            }
            row
        })
        .collect();
    LinearSystem {
        world_count: wc,
        constraint_rows: rows,
        sum_row: vec![1.0; wc],
    }
}

/// Decides consistency; on success the witness satisfies every constraint
/// row within [`WITNESS_RESIDUAL_TOL`]. Deterministic for a given base.
pub fn is_consistent(kb: &KnowledgeBase) -> Result<(bool, Option<Distribution>)> {
    let sys = build_cs(&kb.compile());
    let full = mask_all(kb.len());
    match solve_subset(&sys, full)? {
        Some(dist) => Ok((true, Some(dist))),
        None => Ok((false, None)),
    }
}

fn mask_all(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Phase-one feasibility for the rows selected by `mask`.
pub(crate) fn solve_subset(sys: &LinearSystem, mask: u64) -> Result<Option<Distribution>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (i, row) in sys.constraint_rows.iter().enumerate() {
        if mask & (1u64 << i) != 0 {
            rows.push(row.clone());
            rhs.push(0.0);
        }
    }
    rows.push(sys.sum_row.clone());
    rhs.push(1.0);
    let zeros = vec![0.0; sys.world_count];
    match simplex::solve(&zeros, &rows, &rhs) {
        LpResult::Optimal { x, .. } => Ok(Some(Distribution::new(x).map_err(|e| {
            Error::Numerical(format!("feasible point is not a distribution: {e}"))
        })?)),
        LpResult::Infeasible { .. } => Ok(None),
        LpResult::Unbounded | LpResult::PivotLimit => Err(Error::Numerical(
            "simplex did not terminate on a feasibility problem".into(),
        )),
    }
}

/// Minimal inconsistent subsets and the derived free flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisReport {
    /// Each subset lists constraint positions in ascending order; the
    /// subsets appear in order of (size, position pattern). Every listed
    /// subset is inconsistent and all of its proper subsets are consistent.
    pub subsets: Vec<Vec<usize>>,
    /// `free[i]` iff constraint `i` belongs to no listed subset.
    pub free: Vec<bool>,
}

/// Exact enumeration of all inclusion-minimal inconsistent subsets, with the
/// default cap of [`DEFAULT_SUBSET_CAP`] constraints.
pub fn minimal_inconsistent_subsets(kb: &KnowledgeBase) -> Result<MisReport> {
    minimal_inconsistent_subsets_with_cap(kb, DEFAULT_SUBSET_CAP)
}

/// Exact enumeration with an explicit cap.
///
/// Candidates are visited in order of increasing cardinality, pruning every
/// superset of an already-found inconsistent subset; what remains
/// inconsistent at size `k` is minimal because all smaller subsets were
/// already decided.
pub fn minimal_inconsistent_subsets_with_cap(kb: &KnowledgeBase, cap: usize) -> Result<MisReport> {
    let n = kb.len();
    if n > cap.min(63) {
        return Err(Error::SubsetCapExceeded {
            n,
            cap: cap.min(63),
        });
    }
    let sys = build_cs(&kb.compile());
    let mut mis_masks: Vec<u64> = Vec::new();
    for size in 1..=n {
        let mut mask = mask_all(size);
        let limit = 1u64 << n;
        while mask < limit {
            if !mis_masks.iter().any(|&m| m & !mask == 0) && solve_subset(&sys, mask)?.is_none() {
                mis_masks.push(mask);
            }
            mask = next_same_popcount(mask);
            if mask == 0 {
                break;
            }
        }
    }
    let subsets: Vec<Vec<usize>> = mis_masks
        .iter()
        .map(|&m| (0..n).filter(|i| m & (1u64 << i) != 0).collect())
        .collect();
    let free = (0..n)
        .map(|i| !mis_masks.iter().any(|&m| m & (1u64 << i) != 0))
        .collect();
    Ok(MisReport { subsets, free })
}

/// Gosper's hack: next larger integer with the same popcount (0 on overflow).
fn next_same_popcount(v: u64) -> u64 {
    let c = v & v.wrapping_neg();
    let r = v.wrapping_add(c);
    if r == 0 || c == 0 {
        return 0;
    }
    (((r ^ v) >> 2) / c) | r
}

/// True iff the constraint takes part in no minimal inconsistent subset.
pub fn is_free(kb: &KnowledgeBase, index: usize) -> Result<bool> {
    assert!(index < kb.len(), "constraint index out of range");
    Ok(minimal_inconsistent_subsets(kb)?.free[index])
}
