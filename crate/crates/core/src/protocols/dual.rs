//! Two parallel runs of a CHSH variant. A bit value is accepted only if both
//! runs accept it; declining commits opposite bits in the two runs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chsh::{run_chsh_variant, AliceConduct, AliceDevices, Decisions, ProtocolRun};
use super::transcript::{Verdict, VerdictEntry, VerdictStatus};
use super::{ProtocolConfig, ProtocolError, Variant};
use crate::harness::SeedNode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualIntent {
    Commit(u8),
    Decline,
}

#[derive(Clone, Debug)]
pub struct DualRun {
    pub runs: [ProtocolRun; 2],
    /// Bits committed in the two runs.
    pub bits: [u8; 2],
    pub verdict: Verdict,
}

fn combine(a: &VerdictEntry, b: &VerdictEntry) -> VerdictEntry {
    use VerdictStatus::*;
    let status = match (a.status, b.status) {
        (Accepted, Accepted) => Accepted,
        (NotUnveiled, NotUnveiled) => NotUnveiled,
        _ => Rejected,
    };
    let statistic = match (a.statistic, b.statistic) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let point = if a.point.t >= b.point.t {
        a.point
    } else {
        b.point
    };
    VerdictEntry {
        status,
        statistic,
        point,
    }
}

/// Runs the two sub-runs with seeds derived from `config.seed` and reusing
/// `devices` in both.
pub fn run_dual(
    config: &ProtocolConfig,
    intent: DualIntent,
    unveil: [bool; 2],
    devices: &mut AliceDevices,
) -> Result<DualRun, ProtocolError> {
    let inner = match config.variant {
        Variant::DualRun(v) => v,
        other => return Err(ProtocolError::VariantMismatch(other.to_string())),
    };
    let root = SeedNode(config.seed);
    let bits = match intent {
        DualIntent::Commit(b) => [b & 1, b & 1],
        DualIntent::Decline => {
            let first = root.rng("decline").random::<bool>() as u8;
            [first, 1 - first]
        }
    };
    let mut runs = Vec::with_capacity(2);
    for (k, label) in ["run-a", "run-b"].into_iter().enumerate() {
        let mut sub = config.clone();
        sub.variant = Variant::Chsh(inner);
        sub.seed = root.child(label).0;
        let mut decisions = Decisions::commit(bits[k]);
        decisions.unveil = unveil;
        runs.push(run_chsh_variant(
            &sub,
            AliceConduct::Devices { decisions, devices },
        )?);
    }
    let runs: [ProtocolRun; 2] = runs.try_into().expect("two runs");
    let verdict = Verdict {
        entries: [0, 1].map(|i| combine(&runs[0].verdict.entries[i], &runs[1].verdict.entries[i])),
    };
    Ok(DualRun {
        runs,
        bits,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::ChshVariant;

    fn cfg(seed: u64) -> ProtocolConfig {
        ProtocolConfig::new(Variant::DualRun(ChshVariant::Chsh2), 1500).with_seed(seed)
    }

    #[test]
    fn committing_accepts_only_the_committed_bit() {
        let run = run_dual(
            &cfg(1),
            DualIntent::Commit(1),
            [true, true],
            &mut AliceDevices::default(),
        )
        .unwrap();
        assert_eq!(run.bits, [1, 1]);
        assert!(run.verdict.accepted(1));
        assert_eq!(run.verdict.status(0), VerdictStatus::Rejected);
    }

    #[test]
    fn declining_accepts_neither_bit() {
        for seed in 0..4 {
            let run = run_dual(
                &cfg(seed),
                DualIntent::Decline,
                [true, true],
                &mut AliceDevices::default(),
            )
            .unwrap();
            assert_ne!(run.bits[0], run.bits[1]);
            assert!(!run.verdict.accepted(0) && !run.verdict.accepted(1));
        }
    }

    #[test]
    fn silence_in_both_runs_is_not_unveiled() {
        let run = run_dual(
            &cfg(2),
            DualIntent::Commit(0),
            [false, false],
            &mut AliceDevices::default(),
        )
        .unwrap();
        assert_eq!(run.verdict.status(0), VerdictStatus::NotUnveiled);
    }

    #[test]
    fn plain_variants_are_refused() {
        let c = ProtocolConfig::new(Variant::CHSH1, 4);
        assert!(matches!(
            run_dual(
                &c,
                DualIntent::Decline,
                [true, true],
                &mut AliceDevices::default()
            ),
            Err(ProtocolError::VariantMismatch(_))
        ));
    }
}
