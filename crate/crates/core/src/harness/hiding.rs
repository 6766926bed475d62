//! How well Bob can guess a bit from his view before unveiling.
//!
//! Views are discrete records, so the estimator is a histogram classifier:
//! per-view counts under each label, guess the label with the larger
//! empirical frequency. Fitting and scoring on the same samples overstates
//! the advantage when views are sparse, so samples are split by index parity
//! and each half is scored with counts from the other half.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HidingEstimate {
    /// Best-guess probability minus 1/2, clamped to `[0, 1/2]`.
    pub advantage: f64,
    /// Unclamped balanced accuracy minus 1/2; negative values are noise.
    pub raw: f64,
    pub std_error: f64,
    /// In-sample total variation between the two empirical view
    /// distributions. Biased upward when views are sparse.
    pub plug_in_tv: f64,
    pub samples: [usize; 2],
    /// Distinct views seen.
    pub bins: usize,
}

impl HidingEstimate {
    /// Total variation between the view distributions implied by the
    /// advantage: a best guess succeeds with probability `(1 + TV)/2`.
    pub fn total_variation(&self) -> f64 {
        2.0 * self.advantage
    }
}

/// Estimates Bob's advantage in guessing the label from `views[0]` (label 0)
/// and `views[1]` (label 1).
pub fn estimate_hiding_advantage<K: Ord + Clone>(
    views0: &[K],
    views1: &[K],
) -> Result<HidingEstimate, HarnessError> {
    for (label, v) in [views0, views1].into_iter().enumerate() {
        if v.len() < 2 {
            return Err(HarnessError::InsufficientSamples {
                label,
                found: v.len(),
            });
        }
    }
    let views = [views0, views1];
    let mut correct = [0usize; 2];
    for fold in 0..2 {
        let mut counts: BTreeMap<&K, [usize; 2]> = BTreeMap::new();
        let mut train = [0usize; 2];
        for (label, vs) in views.iter().enumerate() {
            for v in vs.iter().skip(1 - fold).step_by(2) {
                counts.entry(v).or_default()[label] += 1;
                train[label] += 1;
            }
        }
        for (label, vs) in views.iter().enumerate() {
            for v in vs.iter().skip(fold).step_by(2) {
                let c = counts.get(v).copied().unwrap_or([0, 0]);
                // compare c1/train1 with c0/train0 without dividing; ties guess 0
                let guess = (c[1] * train[0] > c[0] * train[1]) as usize;
                correct[label] += (guess == label) as usize;
            }
        }
    }
    let n = [views0.len() as f64, views1.len() as f64];
    let acc = [correct[0] as f64 / n[0], correct[1] as f64 / n[1]];
    let raw = (acc[0] + acc[1]) / 2.0 - 0.5;
    let std_error = (acc[0] * (1.0 - acc[0]) / n[0] + acc[1] * (1.0 - acc[1]) / n[1]).sqrt() / 2.0;

    let mut all: BTreeMap<&K, [usize; 2]> = BTreeMap::new();
    for (label, vs) in views.iter().enumerate() {
        for v in vs.iter() {
            all.entry(v).or_default()[label] += 1;
        }
    }
    let plug_in_tv = all
        .values()
        .map(|c| (c[0] as f64 / n[0] - c[1] as f64 / n[1]).abs())
        .sum::<f64>()
        / 2.0;
    Ok(HidingEstimate {
        advantage: raw.clamp(0.0, 0.5),
        raw,
        std_error,
        plug_in_tv,
        samples: [views0.len(), views1.len()],
        bins: all.len(),
    })
}

/// Two-sample total-variation estimate between view samples `a` and `b`.
pub fn two_sample_tv<K: Ord + Clone>(a: &[K], b: &[K]) -> Result<f64, HarnessError> {
    Ok(estimate_hiding_advantage(a, b)?.total_variation())
}
