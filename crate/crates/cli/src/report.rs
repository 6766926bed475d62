//! Run reports and their CSV rows.

use rqbc::bitmath::{epsilon_bound, max_accepted_mismatches};
use rqbc::harness::{HidingEstimate, Scenario, ScenarioOutcome, TrialOutcome};
use rqbc::protocols::{Variant, VerdictStatus};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioFile;

/// One CSV row per trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    #[serde(with = "crate::config::seed")]
    pub seed: u64,
    pub committed: Option<u8>,
    pub hidden_bit: Option<u8>,
    pub status0: String,
    pub statistic0: Option<f64>,
    pub status1: String,
    pub statistic1: Option<f64>,
    pub committed_accepted: Option<bool>,
    pub pretest_accepted: Option<bool>,
    pub leak_correct: Option<bool>,
}

impl TrialRow {
    pub fn new(t: &TrialOutcome) -> Self {
        let e = &t.verdict.entries;
        Self {
            trial: t.trial,
            seed: t.seed,
            committed: t.committed,
            hidden_bit: t.hidden_bit,
            status0: e[0].status.to_string(),
            statistic0: e[0].statistic,
            status1: e[1].status.to_string(),
            statistic1: e[1].statistic,
            committed_accepted: t.committed.map(|b| t.verdict.accepted(b as usize)),
            pretest_accepted: t.pretest.and_then(|v| {
                t.committed
                    .map(|b| v.status(b as usize) == VerdictStatus::Accepted)
            }),
            leak_correct: t.leak_correct,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub acceptance0: f64,
    pub acceptance1: f64,
    pub committed_acceptance: Option<f64>,
    pub wrong_bit_acceptance: Option<f64>,
    pub both_accepted: f64,
    pub mean_statistic0: Option<f64>,
    pub mean_statistic1: Option<f64>,
    pub pretest_acceptance: Option<f64>,
    pub leak_rate: Option<f64>,
}

/// Analytic quantities for the configured parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    /// Largest accepted mismatch count (CHSH variants).
    pub max_mismatches: Option<usize>,
    pub radius_fraction: Option<f64>,
    pub epsilon: Option<f64>,
    /// Half-width `C N^{3/4}` of the RCCBC distance window.
    pub distance_window: Option<f64>,
}

impl Bounds {
    pub fn for_scenario(s: &Scenario) -> Self {
        let c = &s.config;
        match c.variant {
            Variant::Rccbc => Self {
                max_mismatches: None,
                radius_fraction: None,
                epsilon: None,
                distance_window: Some(c.c_param * (c.n as f64).powf(0.75)),
            },
            _ => {
                let b = epsilon_bound(c.n, c.xi).ok();
                Self {
                    max_mismatches: max_accepted_mismatches(c.n, c.xi),
                    radius_fraction: b.map(|b| b.radius_fraction),
                    epsilon: b.map(|b| b.epsilon),
                    distance_window: None,
                }
            }
        }
    }
}

/// Everything needed to reproduce and judge a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub scenario: ScenarioFile,
    pub summary: Aggregates,
    pub hiding: Option<HidingEstimate>,
    pub bounds: Bounds,
    pub trials: Vec<TrialRow>,
}

impl RunReport {
    pub fn new(s: &Scenario, out: &ScenarioOutcome) -> Self {
        let m = &out.summary;
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: ScenarioFile::from_scenario(s),
            summary: Aggregates {
                trials: m.trials,
                acceptance0: m.acceptance[0],
                acceptance1: m.acceptance[1],
                committed_acceptance: m.committed_acceptance,
                wrong_bit_acceptance: m.wrong_bit_acceptance,
                both_accepted: m.both_accepted,
                mean_statistic0: m.mean_statistic[0],
                mean_statistic1: m.mean_statistic[1],
                pretest_acceptance: m.pretest_acceptance,
                leak_rate: m.leak_rate,
            },
            hiding: m.hiding,
            bounds: Bounds::for_scenario(s),
            trials: out.trials.iter().map(TrialRow::new).collect(),
        }
    }

    /// Human-readable lines for stderr.
    pub fn summary_lines(&self) -> Vec<String> {
        let s = &self.summary;
        let opt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let sc = &self.scenario;
        let mut lines = vec![
            format!(
                "scenario {} ({} N={}), {} trials, seed {}",
                sc.name.as_deref().unwrap_or("?"),
                sc.protocol.variant.map_or("?".into(), |v| v.to_string()),
                sc.protocol.n.unwrap_or(0),
                s.trials,
                sc.seed.unwrap_or(0)
            ),
            format!(
                "acceptance: bit 0 {:.4}, bit 1 {:.4}, both {:.4}",
                s.acceptance0, s.acceptance1, s.both_accepted
            ),
            format!(
                "committed bit accepted {}, wrong bit accepted {}",
                opt(s.committed_acceptance),
                opt(s.wrong_bit_acceptance)
            ),
            format!(
                "mean statistic: bit 0 {}, bit 1 {}",
                opt(s.mean_statistic0),
                opt(s.mean_statistic1)
            ),
        ];
        if let Some(p) = s.pretest_acceptance {
            lines.push(format!("pre-test acceptance {p:.4}"));
        }
        if let Some(l) = s.leak_rate {
            lines.push(format!("memory leak guess rate {l:.4}"));
        }
        if let Some(h) = &self.hiding {
            lines.push(format!(
                "hiding advantage {:.4} ± {:.4} over {:?} views",
                h.advantage, h.std_error, h.samples
            ));
        }
        if let Some(e) = self.bounds.epsilon {
            lines.push(format!("binding bound ε ≤ {e:.6e}"));
        }
        lines
    }
}
