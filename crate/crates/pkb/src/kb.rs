//! Probabilistic constraints and knowledge bases.
//!
//! A constraint `(A | B)[d]` reads "if B then A with probability d" and is
//! satisfied by a distribution `P` when `P(AB) = d * P(B)`. Note that this
//! makes a constraint vacuously satisfied whenever `P(B) = 0`; see the
//! `feasibility` module documentation for the consequences. A knowledge base
//! is an ordered sequence of constraints over a shared signature; the order
//! fixes constraint indices throughout reporting.
//!
//! Constraint identity is positional: two textually identical constraints
//! are distinct elements, which keeps subset enumeration (minimal
//! inconsistent subsets, Shapley values) unambiguous.

use crate::logic::{models, Formula, Signature, WorldSet};
use crate::{Error, Result};

/// A conditional probabilistic constraint `(consequent | antecedent)[prob]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub consequent: Formula,
    /// `Formula::Top` for unconditional constraints written `(A)[d]`.
    pub antecedent: Formula,
    pub prob: f64,
    /// Optional identifier used in reports; constraints without one are
    /// reported positionally as `r1`, `r2`, ...
    pub label: Option<String>,
}

impl Constraint {
    pub fn new(consequent: Formula, antecedent: Formula, prob: f64) -> Self {
        Constraint {
            consequent,
            antecedent,
            prob,
            label: None,
        }
    }

    /// Unconditional constraint `(consequent)[prob]`.
    pub fn unconditional(consequent: Formula, prob: f64) -> Self {
        Constraint::new(consequent, Formula::Top, prob)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Renders the constraint in the text syntax, e.g. `(A | !B)[0.8]`.
    pub fn render(&self, sig: &Signature) -> String {
        if self.antecedent == Formula::Top {
            format!("({})[{}]", self.consequent.render(sig), self.prob)
        } else {
            format!(
                "({} | {})[{}]",
                self.consequent.render(sig),
                self.antecedent.render(sig),
                self.prob
            )
        }
    }
}

/// Decides whether a single constraint can be satisfied non-vacuously, i.e.
/// whether some distribution gives the antecedent positive probability and
/// the conditional the stated value.
///
/// Equivalently: the singleton knowledge base `{c}` extended with
/// `(antecedent)[1]` is consistent. With `k = |Mod(AB)|` and `m = |Mod(B)|`
/// this reduces to counting: `m > 0`, and `d = 0` when `k = 0`, and `d = 1`
/// when `k = m` (mass on `Mod(B)` can realize any intermediate ratio
/// otherwise). Constraints like `(A | !A)[d]` with `d > 0` are rejected even
/// though `P(!A) = 0` would satisfy them vacuously.
pub fn check_self_consistency(c: &Constraint, sig: &Signature) -> bool {
    let mod_b = models(&c.antecedent, sig);
    let mod_ab = models(&c.consequent, sig).intersection(&mod_b);
    let m = mod_b.len();
    let k = mod_ab.len();
    if m == 0 {
        return false;
    }
    if k == 0 {
        return c.prob == 0.0;
    }
    if k == m {
        return c.prob == 1.0;
    }
    true
}

/// An ordered collection of constraints over a shared signature.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    signature: Signature,
    constraints: Vec<Constraint>,
}

impl KnowledgeBase {
    /// Validates and builds a knowledge base: formulas must be well-formed,
    /// probabilities in `[0, 1]`, labels unique, and every constraint
    /// self-consistent.
    pub fn new(signature: Signature, constraints: Vec<Constraint>) -> Result<Self> {
        for (i, c) in constraints.iter().enumerate() {
            if !c.consequent.is_well_formed(&signature) || !c.antecedent.is_well_formed(&signature)
            {
                return Err(Error::InvalidKnowledgeBase(format!(
                    "constraint {i} references a variable or value outside the signature"
                )));
            }
            if !(0.0..=1.0).contains(&c.prob) {
                return Err(Error::InvalidKnowledgeBase(format!(
                    "constraint {i} has probability {} outside [0,1]",
                    c.prob
                )));
            }
            if let Some(label) = &c.label {
                for prev in &constraints[..i] {
                    if prev.label.as_deref() == Some(label) {
                        return Err(Error::InvalidKnowledgeBase(format!(
                            "duplicate constraint label '{label}'"
                        )));
                    }
                }
            }
            if !check_self_consistency(c, &signature) {
                return Err(Error::SelfInconsistent {
                    index: i,
                    text: c.render(&signature),
                });
            }
        }
        Ok(KnowledgeBase {
            signature,
            constraints,
        })
    }

    /// A knowledge base with no constraints.
    pub fn empty(signature: Signature) -> Self {
        KnowledgeBase {
            signature,
            constraints: Vec::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// The sub-base selected by a bitmask over constraint positions,
    /// preserving order. Validation is skipped: members of a valid base stay
    /// valid.
    pub fn subset_by_mask(&self, mask: u64) -> KnowledgeBase {
        debug_assert!(self.constraints.len() < 64);
        debug_assert!(mask >> self.constraints.len() == 0);
        let constraints = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1u64 << i) != 0)
            .map(|(_, c)| c.clone())
            .collect();
        KnowledgeBase {
            signature: self.signature.clone(),
            constraints,
        }
    }

    /// Replaces the probabilities while keeping every conditional skeleton:
    /// the result has constraints `(A_i | B_i)[probs[i]]`.
    ///
    /// Fails if some replacement breaks self-consistency, which can only
    /// happen for conditionals whose consequent-antecedent conjunction is
    /// unsatisfiable (probability must stay 0) or covers the whole
    /// antecedent (must stay 1).
    pub fn characteristic(&self, probs: &[f64]) -> Result<KnowledgeBase> {
        if probs.len() != self.constraints.len() {
            return Err(Error::LengthMismatch {
                expected: self.constraints.len(),
                got: probs.len(),
            });
        }
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (i, (c, &p)) in self.constraints.iter().zip(probs).enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidKnowledgeBase(format!(
                    "replacement probability {p} for constraint {i} is outside [0,1]"
                )));
            }
            let mut replaced = c.clone();
            replaced.prob = p;
            if !check_self_consistency(&replaced, &self.signature) {
                return Err(Error::SelfInconsistent {
                    index: i,
                    text: replaced.render(&self.signature),
                });
            }
            constraints.push(replaced);
        }
        Ok(KnowledgeBase {
            signature: self.signature.clone(),
            constraints,
        })
    }

    /// Precomputes the model sets every solver pass reuses.
    pub fn compile(&self) -> CompiledKb {
        let sets = self
            .constraints
            .iter()
            .map(|c| {
                let condition = models(&c.antecedent, &self.signature);
                let joint = models(&c.consequent, &self.signature).intersection(&condition);
                ConstraintSets { joint, condition }
            })
            .collect();
        CompiledKb {
            kb: self.clone(),
            sets,
        }
    }

    /// Serializes to the text format; `parse_kb` round-trips the result.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in self.signature.variables() {
            if v.is_binary() {
                out.push_str(&format!("var {}\n", v.name()));
            } else {
                out.push_str(&format!("var {}: {}\n", v.name(), v.values().join(", ")));
            }
        }
        for c in &self.constraints {
            out.push_str(&c.render(&self.signature));
            out.push('\n');
        }
        out
    }
}

/// Cached model sets for one constraint: `Mod(AB)` and `Mod(B)`.
#[derive(Debug, Clone)]
pub struct ConstraintSets {
    pub joint: WorldSet,
    pub condition: WorldSet,
}

/// A knowledge base plus the per-constraint model sets.
#[derive(Debug, Clone)]
pub struct CompiledKb {
    kb: KnowledgeBase,
    sets: Vec<ConstraintSets>,
}

impl CompiledKb {
    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn sets(&self) -> &[ConstraintSets] {
        &self.sets
    }

    pub fn world_count(&self) -> u64 {
        self.kb.signature().world_count()
    }

    /// `(P(A_i B_i), P(B_i))` under the world probabilities `probs`.
    pub fn prob_pair(&self, i: usize, probs: &[f64]) -> (f64, f64) {
        let sets = &self.sets[i];
        let p_joint: f64 = sets.joint.iter().map(|w| probs[w as usize]).sum();
        let p_cond: f64 = sets.condition.iter().map(|w| probs[w as usize]).sum();
        (p_joint, p_cond)
    }
}

/// Serializes a knowledge base to the text format.
pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    kb.to_text()
}
