//! End-to-end protocol runs against counts computed here.

use std::collections::BTreeMap;

use rqbc::adversary::{brute_force_epsilon_chsh, half_subsets, RccbcClaims, RccbcStrategy};
use rqbc::protocols::chsh::{commit_block, commit_pair_index, unveil_block, unveil_pair_index};
use rqbc::protocols::{
    run_chsh_variant, run_dual, run_rccbc, AliceConduct, AliceDevices, ChshVariant, Decisions,
    DualIntent, ProtocolConfig, ProtocolRun, Variant, VerdictStatus,
};
use rqbc::BitString;

fn honest(cfg: &ProtocolConfig, decisions: Decisions) -> ProtocolRun {
    let mut devices = AliceDevices::default();
    run_chsh_variant(
        cfg,
        AliceConduct::Devices {
            decisions,
            devices: &mut devices,
        },
    )
    .unwrap()
}

/// `P(Binomial(n, p) ≤ k)`.
fn binomial_cdf(n: usize, p: f64, k: usize) -> f64 {
    let mut term = (1.0 - p).powi(n as i32);
    let mut sum = 0.0;
    for m in 0..=k.min(n) {
        sum += term;
        term *= (n - m) as f64 / (m + 1) as f64 * p / (1.0 - p);
    }
    sum
}

#[test]
fn committer_and_unveiler_indices() {
    let n = 5;
    let range = |f: &dyn Fn(usize) -> usize| (1..=n).map(f).collect::<Vec<_>>();
    let low: Vec<usize> = (1..=n).collect();
    let high: Vec<usize> = (n + 1..=2 * n).collect();
    assert_eq!(range(&|j| commit_pair_index(n, 0, 0, j)), low);
    assert_eq!(range(&|j| commit_pair_index(n, 1, 0, j)), high);
    assert_eq!(range(&|j| commit_pair_index(n, 1, 1, j)), low);
    assert_eq!(range(&|j| commit_pair_index(n, 0, 1, j)), high);
    assert_eq!(range(&|j| unveil_pair_index(n, 0, 0, j)), low);
    assert_eq!(range(&|j| unveil_pair_index(n, 1, 0, j)), high);
    assert_eq!(range(&|j| unveil_pair_index(n, 1, 1, j)), low);
    assert_eq!(range(&|j| unveil_pair_index(n, 0, 1, j)), high);
    for i in 0..2u8 {
        for x in 0..2u8 {
            assert_eq!(commit_block(n, i, x), unveil_block(n, i as usize, x));
        }
    }
}

#[test]
fn honest_runs_bind_to_the_committed_bit() {
    for v in [ChshVariant::Chsh1, ChshVariant::Chsh2, ChshVariant::Chsh3] {
        for b in 0..2u8 {
            let cfg = ProtocolConfig::new(Variant::Chsh(v), 10_000).with_seed(7 + b as u64);
            let run = honest(&cfg, Decisions::commit(b));
            assert_eq!(
                run.verdict.status(b as usize),
                VerdictStatus::Accepted,
                "{v:?} b={b}"
            );
            assert_eq!(
                run.verdict.status(1 - b as usize),
                VerdictStatus::Rejected,
                "{v:?} b={b}"
            );
            // the wrong side sits near random guessing
            let wrong = run.verdict.entries[1 - b as usize].statistic.unwrap() / 10_000.0;
            assert!((wrong - 0.5).abs() < 0.03, "{wrong}");
        }
    }
}

#[test]
fn large_honest_runs_never_cross_over() {
    let mut accepted = 0;
    for k in 0..200u64 {
        let b = (k & 1) as u8;
        let cfg = ProtocolConfig::new(Variant::CHSH1, 10_000).with_seed(1000 + k);
        let run = honest(&cfg, Decisions::commit(b));
        assert!(!run.verdict.accepted(1 - b as usize));
        accepted += run.verdict.accepted(b as usize) as usize;
    }
    assert!(accepted >= 198, "{accepted}");
}

#[test]
fn silence_and_single_unveils() {
    let cfg = ProtocolConfig::new(Variant::CHSH2, 2000).with_seed(3);
    let run = honest(&cfg, Decisions::silent(Some(1)));
    assert_eq!(run.verdict.status(0), VerdictStatus::NotUnveiled);
    assert_eq!(run.verdict.status(1), VerdictStatus::NotUnveiled);
    let run = honest(&cfg, Decisions::commit(1).unveiling(1));
    assert_eq!(run.verdict.status(0), VerdictStatus::NotUnveiled);
    assert_eq!(run.verdict.status(1), VerdictStatus::Accepted);
}

#[test]
fn small_n_acceptance_is_a_binomial_tail() {
    // N = 10, ξ = 0.05: threshold 1.96 mismatches, per-round rate (2 − √2)/4
    let n = 10;
    let xi = 0.05;
    let rate = (2.0 - 2f64.sqrt()) / 4.0;
    let limit = (n as f64 * (rate + xi)).ceil() as usize - 1;
    let want = binomial_cdf(n, rate, limit);
    assert!((want - 0.5574).abs() < 1e-3, "{want}");
    let trials = 4000;
    let hits = (0..trials as u64)
        .filter(|&k| {
            let cfg = ProtocolConfig::new(Variant::CHSH1, n)
                .with_xi(xi)
                .with_seed(k);
            honest(&cfg, Decisions::commit(0)).verdict.accepted(0)
        })
        .count();
    let got = hits as f64 / trials as f64;
    let sigma = (want * (1.0 - want) / trials as f64).sqrt();
    assert!((got - want).abs() < 4.0 * sigma, "{got} vs {want}");
}

#[test]
fn oracle_strategy_runs_reach_its_value() {
    let (n, xi) = (4, 0.05);
    let l0 = BitString::from_mask(0b0110, n);
    let best = brute_force_epsilon_chsh(n, xi, &l0).unwrap();
    let trials = 3000;
    let mut counts = [0usize; 2];
    for k in 0..trials as u64 {
        let cfg = ProtocolConfig::new(Variant::CHSH1, n)
            .with_xi(xi)
            .with_l0(l0.clone())
            .with_seed(k);
        let run = run_chsh_variant(&cfg, AliceConduct::Strategy(&best.strategy)).unwrap();
        for (i, c) in counts.iter_mut().enumerate() {
            *c += run.verdict.accepted(i) as usize;
        }
    }
    for (p, c) in [best.p0, best.p1].into_iter().zip(counts) {
        let got = c as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt().max(1e-3);
        assert!((got - p).abs() < 4.0 * sigma, "{got} vs {p}");
    }
}

#[test]
fn rccbc_honest_and_inconsistent_claims() {
    let cfg = ProtocolConfig::new(Variant::Rccbc, 64).with_c(1.0);
    let mut ok = 0;
    for k in 0..200u64 {
        let run = run_rccbc(&cfg.clone().with_seed(k), Decisions::commit(0), None).unwrap();
        assert!(!run.verdict.accepted(1));
        ok += run.verdict.accepted(0) as usize;
    }
    // 1 − 2 exp(−2 C² √N) ≈ 0.99999998
    assert!(ok >= 199, "{ok}");

    let n = 8;
    let zeros = BitString::zeros(n);
    let claims: BTreeMap<u64, RccbcClaims> = half_subsets(n)
        .into_iter()
        .map(|m| {
            let c = RccbcClaims {
                s0_j: BitString::zeros(n / 2),
                s1_j: BitString::zeros(n / 2),
                s_jbar: BitString::ones(n / 2),
            };
            (m, c)
        })
        .collect();
    let strat = RccbcStrategy::new(zeros.clone(), zeros, claims).unwrap();
    let cfg = ProtocolConfig::new(Variant::Rccbc, n)
        .with_c(1.0)
        .with_seed(5);
    let run = run_rccbc(&cfg, Decisions::commit(0), Some(&strat)).unwrap();
    assert_eq!(run.verdict.status(0), VerdictStatus::Rejected);
    assert_eq!(run.verdict.status(1), VerdictStatus::Rejected);
}

#[test]
fn dual_runs_commit_or_decline() {
    let cfg = ProtocolConfig::new(Variant::DualRun(ChshVariant::Chsh2), 2000);
    for k in 0..20u64 {
        let cfg = cfg.clone().with_seed(k);
        let mut devices = AliceDevices::default();
        let run = run_dual(&cfg, DualIntent::Commit(1), [true, true], &mut devices).unwrap();
        assert!(run.verdict.accepted(1) && !run.verdict.accepted(0));
        let mut devices = AliceDevices::default();
        let run = run_dual(&cfg, DualIntent::Decline, [true, true], &mut devices).unwrap();
        assert_ne!(run.bits[0], run.bits[1]);
        assert!(!run.verdict.accepted(0) && !run.verdict.accepted(1));
    }
    let inner = ProtocolConfig::new(Variant::CHSH2, 20);
    let mut devices = AliceDevices::default();
    assert!(run_dual(&inner, DualIntent::Decline, [true, true], &mut devices).is_err());
}
