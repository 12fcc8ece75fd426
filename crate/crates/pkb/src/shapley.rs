//! Shapley values for coalition games, and blame attribution for
//! inconsistent knowledge bases.
//!
//! A coalition game assigns every subset of players a payoff; the Shapley
//! value splits the grand coalition's payoff fairly — it is the unique
//! division satisfying efficiency, symmetry and the dummy-player property.
//! Taking the constraints of a knowledge base as players and the
//! inconsistency measure of each sub-base as the payoff turns the split into
//! a per-constraint blame assignment: the values sum to the base's total
//! inconsistency and constraints that never contribute get zero.
//!
//! Subset payoffs are memoized in a `2^n` table (each subset is evaluated
//! exactly once) and weighted by exact rational coefficients built by a
//! multiplicative recurrence, so the combinatorics stay exact up to the
//! player cap of 20. Because a player outside a subset contributes a zero
//! marginal, the summation only visits subsets containing the player.

use num::rational::BigRational;
use num::{BigInt, FromPrimitive, One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::kb::KnowledgeBase;
use crate::measure::{inc_star, SolverConfig};
use crate::{Error, Result};

/// Exact enumeration is capped at this many players/constraints.
pub const DEFAULT_PLAYER_CAP: usize = 20;

/// Subset payoffs are expected to be super-additive; larger violations are
/// surfaced as warnings.
const SUPER_ADDITIVITY_TOL: f64 = 1e-4;

/// A coalition game: a player count and a payoff for every subset of
/// players, addressed by bitmask.
pub struct CoalitionGame<'a> {
    players: usize,
    value: Box<dyn Fn(u64) -> f64 + Sync + 'a>,
}

impl<'a> CoalitionGame<'a> {
    pub fn new(players: usize, value: impl Fn(u64) -> f64 + Sync + 'a) -> Self {
        CoalitionGame {
            players,
            value: Box::new(value),
        }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn value(&self, subset: u64) -> f64 {
        (self.value)(subset)
    }
}

/// Shapley values in player order.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyReport {
    pub values: Vec<f64>,
    /// Sum of the values; equals the grand-coalition payoff up to floating
    /// point accumulation.
    pub total: f64,
    /// Size of the memoized payoff table.
    pub subsets_evaluated: usize,
    /// Detected invariant violations (nonzero empty payoff, super-additivity
    /// failures beyond tolerance). Never fatal.
    pub warnings: Vec<String>,
}

/// Computes Shapley values for an arbitrary coalition game.
pub fn shapley_generic(game: &CoalitionGame) -> Result<ShapleyReport> {
    let n = game.players();
    if n > DEFAULT_PLAYER_CAP {
        return Err(Error::SubsetCapExceeded {
            n,
            cap: DEFAULT_PLAYER_CAP,
        });
    }
    let table: Vec<f64> = (0..1u64 << n).map(|mask| game.value(mask)).collect();
    Ok(shapley_from_table(n, &table))
}

pub(crate) fn shapley_from_table(n: usize, table: &[f64]) -> ShapleyReport {
    debug_assert_eq!(table.len(), 1usize << n);
    let mut warnings = Vec::new();
    if table[0] != 0.0 {
        warnings.push(format!(
            "empty coalition has payoff {}, expected 0",
            table[0]
        ));
    }
    check_super_additivity(n, table, &mut warnings);

    let coeffs = coefficient_table(n);
    let coeffs_f64: Vec<f64> = coeffs.iter().map(|c| c.to_f64().unwrap()).collect();
    let mut values = vec![0.0; n];
    for (i, value) in values.iter_mut().enumerate() {
        let bit = 1u64 << i;
        let mut by_size = vec![0.0f64; n + 1];
        for mask in 0..table.len() as u64 {
            if mask & bit != 0 {
                let size = mask.count_ones() as usize;
                by_size[size] += table[mask as usize] - table[(mask & !bit) as usize];
            }
        }
        *value = by_size
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, s)| coeffs_f64[k] * s)
            .sum();
    }
    let total = values.iter().sum();
    ShapleyReport {
        values,
        total,
        subsets_evaluated: table.len(),
        warnings,
    }
}

/// Scans all disjoint subset pairs for super-additivity violations. The scan
/// is cubic in subset count (3^n pairs) and is skipped above 13 players.
fn check_super_additivity(n: usize, table: &[f64], warnings: &mut Vec<String>) {
    if n > 13 {
        return;
    }
    let full = (1u64 << n) - 1;
    let mut violations = 0usize;
    let mut worst: Option<(u64, u64, f64)> = None;
    for s in 1..=full {
        let complement = full & !s;
        let mut t = complement;
        while t > 0 {
            if t > s {
                let gap = table[s as usize] + table[t as usize] - table[(s | t) as usize];
                if gap > SUPER_ADDITIVITY_TOL {
                    violations += 1;
                    if worst.is_none_or(|(_, _, g)| gap > g) {
                        worst = Some((s, t, gap));
                    }
                }
            }
            t = (t - 1) & complement;
        }
    }
    if let Some((s, t, gap)) = worst {
        warnings.push(format!(
            "super-additivity violated on {violations} disjoint pair(s); worst: v({s:#b}) + v({t:#b}) exceeds v(union) by {gap:.3e}"
        ));
    }
}

/// Exact subset coefficients `(k-1)!(n-k)!/n!` for sizes `k = 1..=n`, built
/// multiplicatively: the size-n coefficient is `1/n` and
/// `coeff(k) = coeff(k+1) * (n-k) / k`.
fn coefficient_table(n: usize) -> Vec<BigRational> {
    let mut coeffs = vec![BigRational::zero(); n + 1];
    if n == 0 {
        return coeffs;
    }
    coeffs[n] = BigRational::new(BigInt::one(), BigInt::from_usize(n).unwrap());
    for k in (1..n).rev() {
        coeffs[k] = &coeffs[k + 1]
            * BigRational::new(
                BigInt::from_usize(n - k).unwrap(),
                BigInt::from_usize(k).unwrap(),
            );
    }
    coeffs
}

/// Blame attribution: Shapley values of the game whose players are the
/// constraints and whose payoff for a subset is that sub-base's measured
/// inconsistency. Report order matches constraint order.
pub fn shapley_inconsistency(kb: &KnowledgeBase, cfg: &SolverConfig) -> Result<ShapleyReport> {
    shapley_inconsistency_with_threads(kb, cfg, 1)
}

/// Like [`shapley_inconsistency`], evaluating subset measures on `threads`
/// worker threads. Each subset's solver seed is derived from the subset
/// mask, so the result is identical to the serial computation.
pub fn shapley_inconsistency_with_threads(
    kb: &KnowledgeBase,
    cfg: &SolverConfig,
    threads: usize,
) -> Result<ShapleyReport> {
    let n = kb.len();
    if n > DEFAULT_PLAYER_CAP {
        return Err(Error::SubsetCapExceeded {
            n,
            cap: DEFAULT_PLAYER_CAP,
        });
    }
    let subset_value = |mask: u64| -> Result<f64> {
        let sub = kb.subset_by_mask(mask);
        let sub_cfg = cfg.clone().with_seed(subset_seed(cfg.seed, mask));
        Ok(inc_star(&sub, &sub_cfg)?.value)
    };
    let masks = 0..1u64 << n;
    let table: Vec<f64> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
        pool.install(|| {
            masks
                .into_par_iter()
                .map(subset_value)
                .collect::<Result<_>>()
        })?
    } else {
        masks.map(subset_value).collect::<Result<_>>()?
    };
    Ok(shapley_from_table(n, &table))
}

fn subset_seed(seed: u64, mask: u64) -> u64 {
    splitmix64(seed ^ mask.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
