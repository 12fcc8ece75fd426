//! Seeded random generation of small knowledge bases, used by the property
//! and acceptance suites and handy for fuzzing the solvers.

use rand::Rng;

use crate::kb::{check_self_consistency, Constraint, KnowledgeBase};
use crate::logic::{Formula, Signature};

/// Shape of generated knowledge bases.
#[derive(Debug, Clone)]
pub struct RandomKbConfig {
    /// Constraint count is drawn uniformly from `1..=max_constraints`.
    pub max_constraints: usize,
    /// Maximum formula nesting depth.
    pub max_depth: u32,
    /// Probabilities are multiples of this step.
    pub prob_step: f64,
}

impl Default for RandomKbConfig {
    fn default() -> Self {
        RandomKbConfig {
            max_constraints: 4,
            max_depth: 2,
            prob_step: 0.05,
        }
    }
}

/// A random formula mentioning only the given variables.
pub fn random_formula<R: Rng>(rng: &mut R, sig: &Signature, vars: &[usize], depth: u32) -> Formula {
    let roll: f64 = rng.random();
    if depth == 0 || vars.is_empty() {
        if roll < 0.06 || vars.is_empty() {
            return Formula::Top;
        }
        return random_literal(rng, sig, vars);
    }
    if roll < 0.45 {
        random_literal(rng, sig, vars)
    } else if roll < 0.60 {
        Formula::not(random_formula(rng, sig, vars, depth - 1))
    } else if roll < 0.80 {
        Formula::and(
            random_formula(rng, sig, vars, depth - 1),
            random_formula(rng, sig, vars, depth - 1),
        )
    } else if roll < 0.95 {
        Formula::or(
            random_formula(rng, sig, vars, depth - 1),
            random_formula(rng, sig, vars, depth - 1),
        )
    } else {
        Formula::Top
    }
}

fn random_literal<R: Rng>(rng: &mut R, sig: &Signature, vars: &[usize]) -> Formula {
    let var = vars[rng.random_range(0..vars.len())];
    let value = rng.random_range(0..sig.variables()[var].values().len());
    Formula::Lit { var, value }
}

fn random_prob<R: Rng>(rng: &mut R, step: f64) -> f64 {
    let steps = (1.0 / step).round() as u32;
    step * rng.random_range(0..=steps) as f64
}

/// A random self-consistent constraint over the given variables. Falls back
/// to a plain literal constraint if rejection sampling runs long.
pub fn random_constraint<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    vars: &[usize],
    cfg: &RandomKbConfig,
) -> Constraint {
    for _ in 0..64 {
        let consequent = random_formula(rng, sig, vars, cfg.max_depth);
        let antecedent = if rng.random::<f64>() < 0.5 {
            Formula::Top
        } else {
            random_formula(rng, sig, vars, cfg.max_depth.saturating_sub(1))
        };
        let c = Constraint::new(consequent, antecedent, random_prob(rng, cfg.prob_step));
        if check_self_consistency(&c, sig) {
            return c;
        }
    }
    let lit = random_literal(rng, sig, vars);
    Constraint::unconditional(lit, 0.5)
}

/// A random knowledge base whose formulas mention only the given variables.
pub fn random_kb<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    vars: &[usize],
    cfg: &RandomKbConfig,
) -> KnowledgeBase {
    let count = rng.random_range(1..=cfg.max_constraints.max(1));
    let constraints = (0..count)
        .map(|_| random_constraint(rng, sig, vars, cfg))
        .collect();
    KnowledgeBase::new(sig.clone(), constraints).expect("generated constraints are validated")
}
