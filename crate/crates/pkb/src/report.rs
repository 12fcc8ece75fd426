//! Machine-readable analysis reports.
//!
//! The JSON schema uses lower-camel-case keys; optional sections are omitted
//! rather than serialized as null. Every floating-point field is rounded to
//! 12 significant digits before serialization so reports are byte-stable
//! decimal renderings of the library's values.

use serde::Serialize;

use crate::feasibility::Distribution;
use crate::kb::KnowledgeBase;
use crate::logic::Signature;

/// Aggregated result of a command-line analysis.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inc_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inc_star_normalized: Option<f64>,
    pub per_constraint: Vec<ConstraintReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mis: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessEntry>>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintReport {
    pub label: String,
    pub d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjusted_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shapley: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessEntry {
    pub world: String,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Default)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    pub starts: usize,
    pub iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsets_evaluated: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    /// Rounds every floating-point field to 12 significant digits.
    pub fn rounded(mut self) -> Self {
        self.inc_star = self.inc_star.map(round_sig12);
        self.inc_star_normalized = self.inc_star_normalized.map(round_sig12);
        for c in &mut self.per_constraint {
            c.d = round_sig12(c.d);
            c.eta = c.eta.map(round_sig12);
            c.tau = c.tau.map(round_sig12);
            c.adjusted_d = c.adjusted_d.map(round_sig12);
            c.shapley = c.shapley.map(round_sig12);
        }
        if let Some(witness) = &mut self.witness {
            for e in witness.iter_mut() {
                e.p = round_sig12(e.p);
            }
        }
        self.diagnostics.max_residual = round_sig12(self.diagnostics.max_residual);
        self.diagnostics.oracle = self.diagnostics.oracle.map(round_sig12);
        self
    }
}

/// Rounds to 12 significant decimal digits; zeros and non-finite values pass
/// through (negative zero normalizes to zero).
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x + 0.0;
    }
    format!("{x:.11e}").parse().unwrap()
}

/// Report label of a constraint: its explicit label, or `r<position>`.
pub fn constraint_label(kb: &KnowledgeBase, index: usize) -> String {
    kb.constraints()[index]
        .label
        .clone()
        .unwrap_or_else(|| format!("r{}", index + 1))
}

/// Renders a witness distribution world by world.
pub fn witness_entries(sig: &Signature, dist: &Distribution) -> Vec<WitnessEntry> {
    dist.probs()
        .iter()
        .enumerate()
        .map(|(i, &p)| WitnessEntry {
            world: sig.world(i as u64).describe(sig),
            p,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_truncates_to_12_digits() {
        assert_eq!(round_sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig12(0.5), 0.5);
        assert_eq!(round_sig12(0.0), 0.0);
        assert_eq!(round_sig12(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(round_sig12(1e-15), 1e-15);
    }

    #[test]
    fn report_serializes_camel_case_and_skips_absent_sections() {
        let report = AnalysisReport {
            consistent: false,
            inc_star: Some(0.5),
            inc_star_normalized: Some(0.125),
            per_constraint: vec![ConstraintReport {
                label: "r1".into(),
                d: 0.2,
                eta: Some(0.5),
                tau: Some(0.0),
                adjusted_d: Some(0.7),
                shapley: None,
            }],
            mis: None,
            witness: None,
            diagnostics: Diagnostics::default(),
        };
        let json = serde_json::to_string(&report.rounded()).unwrap();
        assert!(json.contains("\"incStar\":0.5"));
        assert!(json.contains("\"incStarNormalized\":0.125"));
        assert!(json.contains("\"adjustedD\":0.7"));
        assert!(json.contains("\"maxResidual\":0.0"));
        assert!(!json.contains("mis"));
        assert!(!json.contains("witness"));
        assert!(!json.contains("shapley"));
        assert!(!json.contains("warnings"));
    }
}
