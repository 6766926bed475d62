//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! lines are always printed; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use rqbc::adversary::{
    brute_force_epsilon_chsh, brute_force_epsilon_rccbc, chsh3_game_optimum,
    evaluate_nosignalling_lp, Chsh3Game,
};
use rqbc::bitmath::{
    binary_entropy, chsh_value_from_score, epsilon_bound, hamming_ball_bound, hamming_ball_volume,
};
use rqbc::harness::{
    audit_no_signalling, builtin, builtins, run_scenario, two_sample_tv, AliceBehavior,
    DeviceProgram, Scenario, Site,
};
use rqbc::protocols::{ChshVariant, EventKind, ProtocolConfig, TranscriptEvent, Variant};
use rqbc::BitString;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let took = start.elapsed();
    (
        took <= limit,
        format!("{:.2}s of {}s", took.as_secs_f64(), limit.as_secs()),
    )
}

/// 1. Honest completeness for CHSH1 at N = 10⁴.
fn honest_completeness() -> Outcome {
    let start = Instant::now();
    let s = builtin("honest-chsh1").unwrap();
    let n = s.config.n as f64;
    let out = run_scenario(&s).unwrap();
    let accepted = out
        .trials
        .iter()
        .filter(|t| t.verdict.accepted(t.committed.unwrap() as usize))
        .count();
    let scores: Vec<f64> = out
        .trials
        .iter()
        .map(|t| {
            t.verdict.entries[t.committed.unwrap() as usize]
                .statistic
                .unwrap()
        })
        .collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let p = (2.0 + 2f64.sqrt()) / 4.0;
    let tol = 4.0 * (n * p * (1.0 - p)).sqrt();
    let (fast, time) = within(Duration::from_secs(10), start);
    outcome(
        accepted >= 99 && (mean - n * p).abs() <= tol && fast,
        format!(
            "accepted {accepted}/100, mean score {mean:.1} vs {:.1} ± {tol:.1}, {time}",
            n * p
        ),
    )
}

/// 2. Brute-force binding optimum never exceeds the analytic bound.
fn binding_vs_bound() -> Outcome {
    let start = Instant::now();
    let mut worst_gap = f64::INFINITY;
    let mut violations = Vec::new();
    for xi in [0.02, 0.05, 0.10] {
        for n in (1..=6).chain([8]) {
            let l0 = BitString::from_mask(0b1011_0110 & ((1 << n) - 1), n);
            let eps = brute_force_epsilon_chsh(n, xi, &l0).unwrap().epsilon_star;
            let bound = epsilon_bound(n, xi).unwrap().epsilon;
            worst_gap = worst_gap.min(bound - eps);
            if eps > bound {
                violations.push(format!("N={n} ξ={xi}: {eps} > {bound}"));
            }
        }
    }
    let n1 = brute_force_epsilon_chsh(1, 0.05, &BitString::zeros(1))
        .unwrap()
        .epsilon_star;
    let (fast, time) = within(Duration::from_secs(60), start);
    outcome(
        violations.is_empty() && n1 == 0.5 && fast,
        format!(
            "violations {violations:?}, smallest bound − ε* {worst_gap:.4}, ε*(1, 0.05) = {n1}, {time}"
        ),
    )
}

/// 3. No-signalling LP at N = 1 sits between the deterministic optimum and the bound.
fn nosignalling_lp() -> Outcome {
    let start = Instant::now();
    let l0 = BitString::zeros(1);
    let det = brute_force_epsilon_chsh(1, 0.05, &l0).unwrap().epsilon_star;
    let exact = evaluate_nosignalling_lp::<BigRational>(1, 0.05, &l0).unwrap();
    let float = evaluate_nosignalling_lp::<f64>(1, 0.05, &l0).unwrap();
    let ns = rqbc::adversary::LpScalar::to_f64(&exact);
    let bound = epsilon_bound(1, 0.05).unwrap().epsilon;
    let (fast, time) = within(Duration::from_secs(5), start);
    outcome(
        det <= ns && ns <= bound && (float - ns).abs() < 1e-9 && fast,
        format!("ε* {det} ≤ ε_ns {exact} (f64 {float}) ≤ bound {bound:.4}, {time}"),
    )
}

/// 4. CHSH3 with independent unveiling strings has the complementary-game optimum.
fn chsh3_reduction() -> Outcome {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut ok = true;
    for n in 1..=3 {
        let ind = chsh3_game_optimum(n, 0.05, Chsh3Game::Independent).unwrap();
        let comp = chsh3_game_optimum(n, 0.05, Chsh3Game::Complementary).unwrap();
        ok &= (ind - comp).abs() < 1e-12;
        rows.push(format!("N={n}: {ind} vs {comp}"));
    }
    let (fast, time) = within(Duration::from_secs(60), start);
    outcome(ok && fast, format!("{}, {time}", rows.join("; ")))
}

fn hiding_scenario(name: &str, committer: DeviceProgram) -> Scenario {
    let mut s = builtin("honest-chsh1").unwrap();
    s.name = name.to_string();
    s.config.n = 3;
    s.repeat = 20_000;
    s.devices.committer = committer;
    s
}

/// 5. Bob's commit-phase view carries no information about the bit.
fn hiding() -> Outcome {
    let cases = [
        ("honest", DeviceProgram::Honest),
        ("memoryful", DeviceProgram::Memoryful),
        (
            "location-conditioned",
            DeviceProgram::LocationConditioned {
                site: Site::P,
                radius: 1e-6,
            },
        ),
        ("constant-output", DeviceProgram::ConstantOutput { bit: 1 }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, program) in cases {
        let out = run_scenario(&hiding_scenario(name, program)).unwrap();
        let h = out.summary.hiding.unwrap();
        ok &= h.advantage <= 0.02 && h.samples.iter().all(|&k| k >= 9_500);
        parts.push(format!("{name} {:.4} (n={:?})", h.advantage, h.samples));
    }
    outcome(ok, parts.join(", "))
}

fn acceptance_at_delta(delta: f64) -> (f64, f64) {
    let mut s = builtin("noisy-chsh1").unwrap();
    s.name = format!("noisy-chsh1-{delta}");
    s.config = s.config.with_delta(delta);
    s.repeat = 100;
    let out = run_scenario(&s).unwrap();
    let mean = out
        .trials
        .iter()
        .map(|t| {
            t.verdict.entries[t.committed.unwrap() as usize]
                .statistic
                .unwrap()
        })
        .sum::<f64>()
        / out.trials.len() as f64;
    (
        out.summary.committed_acceptance.unwrap(),
        mean / s.config.n as f64,
    )
}

/// 6. Error tolerance at ξ = 0.05.
fn error_tolerance() -> Outcome {
    let (low, low_score) = acceptance_at_delta(0.02);
    let (high, high_score) = acceptance_at_delta(0.2);
    outcome(
        low >= 0.99 && high <= 0.01,
        format!("δ=0.02 accepts {low} (score {low_score:.4}), δ=0.2 accepts {high} (score {high_score:.4})"),
    )
}

/// 7. RCCBC completeness, binding against the wrong bit, and oracle trend.
fn rccbc() -> Outcome {
    let out = run_scenario(&builtin("honest-rccbc").unwrap()).unwrap();
    let honest = out.summary.committed_acceptance.unwrap();
    let wrong = out.summary.wrong_bit_acceptance.unwrap();
    let eps: Vec<f64> = [8, 10, 12]
        .iter()
        .map(|&n| brute_force_epsilon_rccbc(n, 0.5).unwrap().epsilon_star)
        .collect();
    let decreasing = eps.windows(2).all(|w| w[1] < w[0]);
    outcome(
        honest >= 0.99 && wrong == 0.0 && out.trials.len() == 1000 && decreasing,
        format!(
            "honest {honest}, wrong bit {wrong} over {} trials, ε*(8,10,12; C=0.5) = {eps:?}",
            out.trials.len()
        ),
    )
}

fn dual_views(behavior: AliceBehavior, name: &str) -> Vec<String> {
    let mut s = builtin("dual-commit").unwrap();
    s.name = name.to_string();
    s.config = ProtocolConfig::new(Variant::DualRun(ChshVariant::Chsh2), 2);
    s.behavior = behavior;
    s.repeat = 10_000;
    run_scenario(&s)
        .unwrap()
        .trials
        .into_iter()
        .map(|t| t.view)
        .collect()
}

/// 8. Committing and declining look the same to Bob when nothing is unveiled.
fn dual_run() -> Outcome {
    let commit = dual_views(
        AliceBehavior::Honest {
            b: None,
            unveil: [false, false],
            disciplined: true,
        },
        "dual-silent-commit",
    );
    let decline = dual_views(
        AliceBehavior::Decline {
            unveil: [false, false],
        },
        "dual-silent-decline",
    );
    let tv = two_sample_tv(&commit, &decline).unwrap();
    outcome(
        tv <= 0.02,
        format!(
            "two-sample TV {tv:.4} over {} + {} views",
            commit.len(),
            decline.len()
        ),
    )
}

/// 9. Causality audit on all builtins, a planted violation, reproducibility.
fn structural_causality() -> Outcome {
    let mut failures = Vec::new();
    let mut audited = 0;
    for s in builtins() {
        let out = run_scenario(&s).unwrap();
        for t in out.trials.iter().flat_map(|t| &t.transcripts) {
            audited += 1;
            if let Err(v) = audit_no_signalling(t) {
                failures.push(format!("{}: {}", s.name, v[0]));
            }
        }
    }
    let mut s = builtin("honest-chsh1").unwrap();
    s.repeat = 2;
    s.config.n = 64;
    let a = run_scenario(&s).unwrap();
    let b = run_scenario(&s).unwrap();
    let identical = a
        .trials
        .iter()
        .zip(&b.trials)
        .all(|(x, y)| x.transcripts[0].render() == y.transcripts[0].render());
    let mut planted = a.trials[0].transcripts[0].clone();
    planted.events.push(TranscriptEvent {
        agent: rqbc::harness::AgentId::A1,
        point: s.config.layout.unveil_points[1],
        kind: EventKind::Compute,
        label: "O1".into(),
        peer: None,
        message: None,
        payload: String::new(),
        inputs: vec!["L".into()],
    });
    let caught = audit_no_signalling(&planted).is_err();
    outcome(
        failures.is_empty() && caught && identical,
        format!("{audited} transcripts audited, failures {failures:?}, planted violation caught {caught}, reproducible {identical}"),
    )
}

/// 10. Coding bounds and CHSH value arithmetic.
fn math_kernel() -> Outcome {
    let mut bad = Vec::new();
    for n in 0..=20usize {
        for r in 0..=n / 2 {
            let v = hamming_ball_volume(n, r).unwrap() as f64;
            let b: f64 = hamming_ball_bound(n, r).unwrap();
            if v > b * (1.0 + 1e-12) {
                bad.push((n, r));
            }
        }
    }
    let n = 10_000;
    let value: f64 = chsh_value_from_score(n, n as f64 * (2.0 + 2f64.sqrt()) / 4.0).unwrap();
    let h: f64 = binary_entropy(0.5).unwrap();
    outcome(
        bad.is_empty() && (value - 2.0 * 2f64.sqrt()).abs() < 1e-12 && h == 1.0,
        format!("ball violations {bad:?}, value {value}, H(1/2) = {h}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("honest completeness (CHSH1)", honest_completeness),
        ("binding vs analytic bound", binding_vs_bound),
        ("no-signalling LP sanity", nosignalling_lp),
        ("CHSH3 reduction", chsh3_reduction),
        ("hiding", hiding),
        ("error tolerance", error_tolerance),
        ("RCCBC", rccbc),
        ("dual-run indistinguishability", dual_run),
        ("structural causality", structural_causality),
        ("math kernel", math_kernel),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        println!("{tag} {:>2} {name}: {}", k + 1, o.detail);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
