use coherence_core::CheckReport;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min_gap: Option<f64>,
    pub argmin_digest: Option<String>,
    pub violation_count: usize,
}

impl Summary {
    /// Minimum gap over `entries` plus the number of unsatisfied ones. Ties
    /// keep the first entry.
    pub fn of(entries: &[CheckReport]) -> Self {
        let argmin = entries.iter().reduce(|best, r| if r.gap < best.gap { r } else { best });
        Self {
            min_gap: argmin.map(|r| r.gap),
            argmin_digest: argmin.map(|r| r.state_digest.clone()),
            violation_count: entries.iter().filter(|r| !r.satisfied).count(),
        }
    }
}

/// How an observed number is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    Near {
        expected: f64,
        tolerance: f64,
    },
    AtMost {
        bound: f64,
    },
    AtLeast {
        bound: f64,
    },
    Below {
        bound: f64,
    },
    /// Recorded for reference only; always passes.
    Info,
}

impl Rule {
    pub fn accepts(self, observed: f64) -> bool {
        match self {
            Rule::Near { expected, tolerance } => (observed - expected).abs() <= tolerance,
            Rule::AtMost { bound } => observed <= bound,
            Rule::AtLeast { bound } => observed >= bound,
            Rule::Below { bound } => observed < bound,
            Rule::Info => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub name: String,
    pub observed: f64,
    #[serde(flatten)]
    pub rule: Rule,
    pub passed: bool,
}

impl Expectation {
    pub fn new(name: impl Into<String>, observed: f64, rule: Rule) -> Self {
        Self {
            name: name.into(),
            observed,
            rule,
            passed: rule.accepts(observed),
        }
    }
}

/// Value of a single measure on a single state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub measure: coherence_core::MeasureId,
    pub state_kind: String,
    pub dims: Vec<usize>,
    pub value: f64,
    /// `closed-form` for pure inputs, `convex-roof` otherwise.
    pub method: String,
    pub normalization: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub qubit_closed_form: Option<coherence_core::QubitClosedForm>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub roof: Option<RoofSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofSummary {
    pub ensemble_size: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub converged: bool,
    pub iterations_used: usize,
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<String>,
    pub command: String,
    pub seed: u64,
    pub entries: Vec<CheckReport>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub expectations: Vec<Expectation>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evaluation: Option<Evaluation>,
}

impl ReportDocument {
    pub fn new(command: &str, seed: u64, entries: Vec<CheckReport>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: None,
            command: command.to_string(),
            seed,
            summary: Summary::of(&entries),
            entries,
            expectations: Vec::new(),
            evaluation: None,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.expectations.iter().all(|e| e.passed)
    }

    pub fn expectation(&self, name: &str) -> Option<&Expectation> {
        self.expectations.iter().find(|e| e.name == name)
    }

    pub fn entry(&self, label: &str) -> Option<&CheckReport> {
        self.entries.iter().find(|r| r.label.as_deref() == Some(label))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// One row per entry: measure, condition, lhs, rhs_sum, gap, certification.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["measure", "condition", "lhs", "rhs_sum", "gap", "certification"])?;
        for r in &self.entries {
            let cert = serde_json::to_value(r.certification).expect("enum serializes");
            w.write_record([
                r.measure.name().to_string(),
                r.condition.name().to_string(),
                r.lhs.to_string(),
                r.rhs_sum().to_string(),
                r.gap.to_string(),
                cert.as_str().unwrap_or_default().to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use coherence_core::{theorem_condition_check, BipartitePureState, CheckOptions, MeasureId};

    fn uniform() -> BipartitePureState {
        BipartitePureState::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()
    }

    #[test]
    fn summary_tracks_minimum() {
        let opts = CheckOptions::default();
        let entries: Vec<_> = [MeasureId::Formation, MeasureId::Geometric, MeasureId::Fidelity]
            .into_iter()
            .map(|m| theorem_condition_check(m, &uniform(), &opts))
            .collect();
        let s = Summary::of(&entries);
        assert!((s.min_gap.unwrap() - (3f64.sqrt() / 2.0 - 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(s.violation_count, 2);
        assert_eq!(Summary::of(&[]).min_gap, None);
    }

    #[test]
    fn rules() {
        assert!(Rule::Near {
            expected: 1.0,
            tolerance: 0.1
        }
        .accepts(1.05));
        assert!(!Rule::Near {
            expected: 1.0,
            tolerance: 0.1
        }
        .accepts(1.2));
        assert!(Rule::AtMost { bound: 0.0 }.accepts(0.0));
        assert!(!Rule::Below { bound: 0.0 }.accepts(0.0));
        assert!(Rule::Info.accepts(f64::NAN));
    }

    #[test]
    fn csv_has_one_row_per_entry() {
        let r = theorem_condition_check(MeasureId::Geometric, &uniform(), &CheckOptions::default());
        let doc = ReportDocument::new("check", 0, vec![r]);
        let text = doc.to_csv().unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "measure,condition,lhs,rhs_sum,gap,certification");
        assert_eq!(lines[1], "geometric,sufficient,0.75,1,-0.25,exact");
    }
}
