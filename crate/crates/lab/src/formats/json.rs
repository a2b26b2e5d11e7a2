use std::collections::BTreeMap;

use plateau_core::bounds::{AlphaBounds, CheckReport, TrainedStats};
use plateau_core::trainer::StepHalving;
use serde::{Deserialize, Serialize};

/// Stage events of a training run. Class labels are one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventsFile {
    pub dataset_hash: String,
    pub model_kind: String,
    pub learn_order: Vec<usize>,
    pub s: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_small: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_large: Vec<Option<f64>>,
    pub bias_drop: Vec<Option<f64>>,
    pub step_halvings: Vec<StepHalving>,
    pub steps: usize,
    pub final_time: f64,
    pub final_misclassified: usize,
    pub diverged_at: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_diagonal_order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub induction: Option<InductionSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionSummary {
    pub slack: f64,
    pub rows_checked: usize,
    /// Number of snapshots failing each condition.
    pub failures: BTreeMap<String, usize>,
    pub first_failure: Option<(f64, String)>,
    pub last_class: usize,
    pub final_bias_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsFile {
    pub dataset_hash: String,
    #[serde(flatten)]
    pub bounds: AlphaBounds,
    pub stats: TrainedStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub dataset_hash: String,
    pub passed: bool,
    #[serde(flatten)]
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsFile {
    pub dataset_hash: String,
    pub bias_rate: Vec<f64>,
    pub decomposition: Vec<f64>,
    pub sum: f64,
    pub max_abs_difference: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use plateau_core::bounds::{BoundsKind, ClaimResult, ClaimStatus, RawAlphas};

    fn round_trip<T: Serialize + for<'de> Deserialize<'de> + PartialEq + std::fmt::Debug>(v: &T) {
        let text = serde_json::to_string_pretty(v).unwrap();
        assert_eq!(&serde_json::from_str::<T>(&text).unwrap(), v);
    }

    #[test]
    fn bounds_and_report_round_trip() {
        let raw = RawAlphas {
            alpha1: 0.1 + 0.2,
            alpha2: 1.0 / 3.0,
            alpha3: 2.5,
            alpha4: None,
        };
        let bounds = AlphaBounds {
            kind: BoundsKind::Fcn,
            alpha1: raw.alpha1,
            alpha2: raw.alpha2,
            alpha3: 1.0,
            alpha4: None,
            unclamped: raw,
            epsilon: 0.01,
            slack: 1.0,
            delta_limit: 0.0370,
            hypothesis_met: false,
        };
        let stats = TrainedStats {
            delta: 1.49,
            r: 6,
            bias_sorted: vec![0.3, -0.1],
            top: 0,
            gaps: vec![],
            delta_min: 0.4,
            delta_max: 0.4,
            w_diag: vec![],
            w_min: None,
            w_max: None,
            r_min: None,
            r_max: None,
            v_max: Some(2.2),
        };
        let file = BoundsFile {
            dataset_hash: "h".into(),
            bounds,
            stats,
        };
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains("\"alpha1\"") && text.contains("\"stats\""));
        round_trip(&file);

        let report = ReportFile {
            dataset_hash: "h".into(),
            passed: true,
            report: CheckReport {
                claims: vec![ClaimResult {
                    name: "loss_decreasing".into(),
                    status: ClaimStatus::Vacuous,
                    observed: None,
                    window: None,
                    points: 0,
                    worst_alpha: None,
                    worst_violation: 0.0,
                    tolerance: 1e-9,
                }],
                hypothesis_met: true,
            },
        };
        round_trip(&report);
    }

    #[test]
    fn events_skip_absent_fields() {
        let ev = EventsFile {
            dataset_hash: "h".into(),
            model_kind: "mlp".into(),
            learn_order: vec![2, 1],
            s: vec![Some(3.0), None],
            t_small: vec![],
            t_large: vec![],
            bias_drop: vec![None, None],
            step_halvings: vec![],
            steps: 10,
            final_time: 0.1,
            final_misclassified: 1,
            diverged_at: None,
            initial_diagonal_order: None,
            induction: None,
        };
        let text = serde_json::to_string(&ev).unwrap();
        assert!(!text.contains("t_small") && !text.contains("induction"));
        round_trip(&ev);
    }
}
