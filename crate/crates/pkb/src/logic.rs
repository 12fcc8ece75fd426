//! Propositional language over finite-domain variables.
//!
//! A [`Signature`] fixes an ordered list of variables, each with a finite
//! domain of at least two values. A [`World`] assigns every variable exactly
//! one domain value; the set of all worlds is indexed `0..world_count` by a
//! mixed-radix encoding (first variable most significant, first domain value
//! first). [`Formula`]s are built from literal tests `V = v` with negation,
//! conjunction and disjunction, and evaluate classically on worlds.
//!
//! Worlds are enumerated explicitly, so signatures are capped at
//! [`DEFAULT_WORLD_CAP`] worlds (configurable per construction).

use crate::{Error, Result};

/// Default limit on the number of worlds a signature may span (2^20).
pub const DEFAULT_WORLD_CAP: u64 = 1 << 20;

/// A named variable with a finite, ordered domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    values: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Self {
        Variable {
            name: name.into(),
            values,
        }
    }

    /// A boolean variable with domain `{true, false}`.
    pub fn binary(name: impl Into<String>) -> Self {
        Variable::new(name, vec!["true".to_owned(), "false".to_owned()])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    /// True iff the domain is exactly `{true, false}`, which enables the
    /// bare-name shorthand in the text syntax.
    pub fn is_binary(&self) -> bool {
        self.values.len() == 2 && self.values[0] == "true" && self.values[1] == "false"
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

/// An ordered set of variables together with the derived world indexing.
///
/// The empty signature is valid and spans exactly one world (the empty
/// assignment), which keeps probability distributions well-defined for
/// degenerate inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    vars: Vec<Variable>,
    /// Mixed-radix strides; `strides[i]` is the product of the domain sizes
    /// of all variables after `i`.
    strides: Vec<u64>,
    world_count: u64,
}

impl Signature {
    /// Builds a signature with the default world cap.
    pub fn new(vars: Vec<Variable>) -> Result<Self> {
        Signature::with_cap(vars, DEFAULT_WORLD_CAP)
    }

    /// Builds a signature, failing if it spans more than `cap` worlds.
    pub fn with_cap(vars: Vec<Variable>, cap: u64) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if v.values.len() < 2 {
                return Err(Error::InvalidSignature(format!(
                    "variable '{}' needs at least 2 domain values",
                    v.name
                )));
            }
            for (j, w) in vars.iter().enumerate() {
                if i < j && v.name == w.name {
                    return Err(Error::InvalidSignature(format!(
                        "duplicate variable '{}'",
                        v.name
                    )));
                }
            }
            for (a, x) in v.values.iter().enumerate() {
                if v.values[..a].contains(x) {
                    return Err(Error::InvalidSignature(format!(
                        "duplicate value '{}' in domain of '{}'",
                        x, v.name
                    )));
                }
            }
        }
        let mut count: u128 = 1;
        for v in &vars {
            count = count.saturating_mul(v.values.len() as u128);
            if count > cap as u128 {
                return Err(Error::WorldCapExceeded {
                    world_count: count,
                    cap,
                });
            }
        }
        let world_count = count as u64;
        let mut strides = vec![1u64; vars.len()];
        for i in (0..vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * vars[i + 1].values.len() as u64;
        }
        Ok(Signature {
            vars,
            strides,
            world_count,
        })
    }

    /// The signature with no variables; it spans the single empty world.
    pub fn empty() -> Self {
        Signature {
            vars: Vec::new(),
            strides: Vec::new(),
            world_count: 1,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn world_count(&self) -> u64 {
        self.world_count
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Value index assigned to variable `var` by the world with the given
    /// index.
    pub fn value_digit(&self, world_index: u64, var: usize) -> usize {
        ((world_index / self.strides[var]) % self.vars[var].values.len() as u64) as usize
    }

    /// Decodes a world index into a full assignment.
    pub fn world(&self, index: u64) -> World {
        assert!(index < self.world_count, "world index out of range");
        let assignment = (0..self.vars.len())
            .map(|v| self.value_digit(index, v))
            .collect();
        World { index, assignment }
    }

    /// All worlds in ascending index order.
    pub fn worlds(&self) -> impl Iterator<Item = World> + '_ {
        (0..self.world_count).map(|i| self.world(i))
    }
}

/// A complete assignment of one domain value per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    index: u64,
    /// Value index per variable, in signature order.
    assignment: Vec<usize>,
}

impl World {
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Value index assigned to variable `var`.
    pub fn value(&self, var: usize) -> usize {
        self.assignment[var]
    }

    /// Renders the world as a conjunction in the text syntax, e.g.
    /// `A && !B && Color=red`. The empty world renders as `top`.
    pub fn describe(&self, sig: &Signature) -> String {
        if self.assignment.is_empty() {
            return "top".to_owned();
        }
        let parts: Vec<String> = sig
            .variables()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v.is_binary() {
                    if self.assignment[i] == 0 {
                        v.name().to_owned()
                    } else {
                        format!("!{}", v.name())
                    }
                } else {
                    format!("{}={}", v.name(), v.values()[self.assignment[i]])
                }
            })
            .collect();
        parts.join(" && ")
    }
}

/// All worlds of the signature in ascending index order.
pub fn enumerate_worlds(sig: &Signature) -> Vec<World> {
    sig.worlds().collect()
}

/// A propositional formula over a signature.
///
/// Literals store variable and value *indices*; use [`Formula::lit`] or the
/// parser to resolve names. A formula is well-formed for a signature when all
/// its indices are in range; the constructors below cannot produce dangling
/// indices for the signature they were given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    /// The tautology.
    Top,
    /// `variable = value`, by index into the signature.
    Lit {
        var: usize,
        value: usize,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Literal `var = value`, resolving names against the signature.
    pub fn lit(sig: &Signature, var: &str, value: &str) -> Result<Formula> {
        let vi = sig
            .var_index(var)
            .ok_or_else(|| Error::InvalidKnowledgeBase(format!("unknown variable '{var}'")))?;
        let value = sig.variables()[vi].value_index(value).ok_or_else(|| {
            Error::InvalidKnowledgeBase(format!("unknown value '{value}' for variable '{var}'"))
        })?;
        Ok(Formula::Lit { var: vi, value })
    }

    /// Bare-name shorthand for a binary variable: `var` means `var = true`.
    pub fn var(sig: &Signature, var: &str) -> Result<Formula> {
        let vi = sig
            .var_index(var)
            .ok_or_else(|| Error::InvalidKnowledgeBase(format!("unknown variable '{var}'")))?;
        if !sig.variables()[vi].is_binary() {
            return Err(Error::InvalidKnowledgeBase(format!(
                "variable '{var}' is not binary; write {var}=VALUE"
            )));
        }
        Ok(Formula::Lit { var: vi, value: 0 })
    }

    #[allow(clippy::should_implement_trait)] // constructor, not an operator
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// True iff every literal references an existing variable/value pair.
    pub fn is_well_formed(&self, sig: &Signature) -> bool {
        match self {
            Formula::Top => true,
            Formula::Lit { var, value } => {
                *var < sig.variables().len() && *value < sig.variables()[*var].values().len()
            }
            Formula::Not(f) => f.is_well_formed(sig),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.is_well_formed(sig) && b.is_well_formed(sig)
            }
        }
    }

    /// Renders the formula in the text syntax with minimal parentheses.
    pub fn render(&self, sig: &Signature) -> String {
        let mut out = String::new();
        self.render_or(sig, &mut out);
        out
    }

    fn render_or(&self, sig: &Signature, out: &mut String) {
        if let Formula::Or(a, b) = self {
            a.render_or(sig, out);
            out.push_str(" || ");
            b.render_and(sig, out);
        } else {
            self.render_and(sig, out);
        }
    }

    fn render_and(&self, sig: &Signature, out: &mut String) {
        if let Formula::And(a, b) = self {
            a.render_and(sig, out);
            out.push_str(" && ");
            b.render_unary(sig, out);
        } else {
            self.render_unary(sig, out);
        }
    }

    fn render_unary(&self, sig: &Signature, out: &mut String) {
        match self {
            Formula::Top => out.push_str("top"),
            Formula::Lit { var, value } => {
                let v = &sig.variables()[*var];
                if v.is_binary() && *value == 0 {
                    out.push_str(v.name());
                } else {
                    out.push_str(v.name());
                    out.push('=');
                    out.push_str(&v.values()[*value]);
                }
            }
            Formula::Not(f) => {
                out.push('!');
                f.render_unary(sig, out);
            }
            _ => {
                out.push('(');
                self.render_or(sig, out);
                out.push(')');
            }
        }
    }
}

/// Classical satisfaction of a formula in a world.
pub fn satisfies(world: &World, f: &Formula) -> bool {
    match f {
        Formula::Top => true,
        Formula::Lit { var, value } => world.value(*var) == *value,
        Formula::Not(g) => !satisfies(world, g),
        Formula::And(a, b) => satisfies(world, a) && satisfies(world, b),
        Formula::Or(a, b) => satisfies(world, a) || satisfies(world, b),
    }
}

/// The model set of a formula: exactly the worlds that satisfy it.
///
/// Computed set-algebraically (literal masks combined with bitset
/// operations), which [`satisfies`] cross-checks pointwise in tests.
pub fn models(f: &Formula, sig: &Signature) -> WorldSet {
    match f {
        Formula::Top => WorldSet::full(sig.world_count()),
        Formula::Lit { var, value } => literal_set(sig, *var, *value),
        Formula::Not(g) => models(g, sig).complement(),
        Formula::And(a, b) => models(a, sig).intersection(&models(b, sig)),
        Formula::Or(a, b) => models(a, sig).union(&models(b, sig)),
    }
}

fn literal_set(sig: &Signature, var: usize, value: usize) -> WorldSet {
    let mut set = WorldSet::empty(sig.world_count());
    let stride = sig.strides[var];
    let period = stride * sig.vars[var].values.len() as u64;
    let mut base = value as u64 * stride;
    while base < sig.world_count() {
        for w in base..base + stride {
            set.insert(w);
        }
        base += period;
    }
    set
}

/// A subset of the worlds of a signature, stored as a bitset over world
/// indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldSet {
    universe: u64,
    blocks: Vec<u64>,
}

impl WorldSet {
    pub fn empty(universe: u64) -> Self {
        WorldSet {
            universe,
            blocks: vec![0; universe.div_ceil(64) as usize],
        }
    }

    pub fn full(universe: u64) -> Self {
        WorldSet::empty(universe).complement()
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn insert(&mut self, w: u64) {
        debug_assert!(w < self.universe);
        self.blocks[(w / 64) as usize] |= 1u64 << (w % 64);
    }

    pub fn contains(&self, w: u64) -> bool {
        w < self.universe && self.blocks[(w / 64) as usize] & (1u64 << (w % 64)) != 0
    }

    /// Number of member worlds.
    pub fn len(&self) -> u64 {
        self.blocks.iter().map(|b| b.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        debug_assert_eq!(self.universe, other.universe);
        WorldSet {
            universe: self.universe,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn intersection(&self, other: &WorldSet) -> WorldSet {
        debug_assert_eq!(self.universe, other.universe);
        WorldSet {
            universe: self.universe,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn complement(&self) -> WorldSet {
        let mut blocks: Vec<u64> = self.blocks.iter().map(|b| !b).collect();
        let tail = self.universe % 64;
        if tail != 0 {
            if let Some(last) = blocks.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        WorldSet {
            universe: self.universe,
            blocks,
        }
    }

    /// Iterates member world indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.blocks.iter().enumerate().flat_map(|(i, &block)| {
            let mut b = block;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let t = b.trailing_zeros() as u64;
                    b &= b - 1;
                    Some(i as u64 * 64 + t)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_binary() -> Signature {
        Signature::new(vec![Variable::binary("A"), Variable::binary("B")]).unwrap()
    }

    #[test]
    fn enumerates_two_binary_variables() {
        let sig = two_binary();
        let worlds = enumerate_worlds(&sig);
        assert_eq!(worlds.len(), 4);
        // Ascending index order: AB, A!B, !AB, !A!B.
        assert_eq!(worlds[0].assignment(), &[0, 0]);
        assert_eq!(worlds[1].assignment(), &[0, 1]);
        assert_eq!(worlds[2].assignment(), &[1, 0]);
        assert_eq!(worlds[3].assignment(), &[1, 1]);
    }

    #[test]
    fn enumerates_mixed_domains() {
        let sig = Signature::new(vec![
            Variable::new("Color", vec!["r".into(), "g".into(), "b".into()]),
            Variable::binary("A"),
        ])
        .unwrap();
        assert_eq!(enumerate_worlds(&sig).len(), 6);
    }

    #[test]
    fn empty_signature_has_one_world() {
        let sig = Signature::empty();
        let worlds = enumerate_worlds(&sig);
        assert_eq!(worlds.len(), 1);
        assert_eq!(worlds[0].assignment(), &[] as &[usize]);
        assert_eq!(worlds[0].describe(&sig), "top");
    }

    #[test]
    fn world_cap_is_enforced() {
        let vars: Vec<Variable> = (0..8).map(|i| Variable::binary(format!("V{i}"))).collect();
        match Signature::with_cap(vars, 100) {
            Err(Error::WorldCapExceeded { world_count, cap }) => {
                assert!(world_count > 100);
                assert_eq!(cap, 100);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn index_assignment_round_trip() {
        let sig = Signature::new(vec![
            Variable::binary("A"),
            Variable::new("C", vec!["x".into(), "y".into(), "z".into()]),
            Variable::binary("B"),
        ])
        .unwrap();
        for w in sig.worlds() {
            let again = sig.world(w.index());
            assert_eq!(again, w);
        }
    }

    #[test]
    fn satisfies_examples() {
        let sig = two_binary();
        // w = A && !B
        let w = sig.world(1);
        let a = Formula::var(&sig, "A").unwrap();
        let b = Formula::var(&sig, "B").unwrap();
        assert!(satisfies(&w, &Formula::or(a.clone(), b.clone())));
        assert!(!satisfies(&w, &Formula::and(a.clone(), b.clone())));
        for w in sig.worlds() {
            assert!(satisfies(&w, &Formula::Top));
        }
    }

    #[test]
    fn models_examples() {
        let sig = two_binary();
        let a = Formula::var(&sig, "A").unwrap();
        let b = Formula::var(&sig, "B").unwrap();
        let mod_b = models(&b, &sig);
        assert_eq!(mod_b.iter().collect::<Vec<_>>(), vec![0, 2]);
        let contradiction = Formula::and(a.clone(), Formula::not(a.clone()));
        assert!(models(&contradiction, &sig).is_empty());

        let color = Signature::new(vec![Variable::new(
            "Color",
            vec!["r".into(), "g".into(), "b".into()],
        )])
        .unwrap();
        let red = Formula::lit(&color, "Color", "r").unwrap();
        assert_eq!(models(&red, &color).len(), 1);
    }

    #[test]
    fn render_round_trip_shapes() {
        let sig = two_binary();
        let a = Formula::var(&sig, "A").unwrap();
        let b = Formula::var(&sig, "B").unwrap();
        let f = Formula::and(a.clone(), Formula::or(b.clone(), Formula::not(a.clone())));
        assert_eq!(f.render(&sig), "A && (B || !A)");
        let g = Formula::or(Formula::and(a.clone(), b.clone()), Formula::Top);
        assert_eq!(g.render(&sig), "A && B || top");
    }

    #[test]
    fn worldset_ops() {
        let mut s = WorldSet::empty(130);
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert_eq!(s.len(), 3);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        let c = s.complement();
        assert_eq!(c.len(), 127);
        assert!(s.intersection(&c).is_empty());
        assert_eq!(s.union(&c).len(), 130);
    }
}
