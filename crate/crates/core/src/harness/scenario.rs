//! Named, seeded, repeatable protocol experiments.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hiding::{estimate_hiding_advantage, HidingEstimate};
use super::{AgentId, HarnessError, SeedNode};
use crate::adversary::{brute_force_epsilon_chsh, brute_force_epsilon_rccbc};
use crate::protocols::{
    agreed_l0, run_chsh_variant, run_dual, run_rccbc, AliceConduct, AliceDevices, ChshVariant,
    Decisions, DualIntent, EventKind, ProtocolConfig, Transcript, Variant, Verdict,
};
use crate::quantum::{programs, DeviceSpec};
use crate::{ProtocolLayout, SpacetimePoint};

/// A spacetime site named relative to the protocol layout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Site {
    P,
    Q0,
    Q1,
    At(SpacetimePoint),
}

impl Site {
    pub fn resolve(&self, layout: &ProtocolLayout) -> SpacetimePoint {
        match self {
            Site::P => layout.commit_point,
            Site::Q0 => layout.unveil_points[0],
            Site::Q1 => layout.unveil_points[1],
            Site::At(p) => *p,
        }
    }
}

fn default_radius() -> f64 {
    1e-6
}

/// Device programs by name, resolved against the layout when a trial starts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "program", rename_all = "kebab-case")]
pub enum DeviceProgram {
    #[default]
    Honest,
    ConstantOutput {
        bit: u8,
    },
    Memoryful,
    LocationConditioned {
        site: Site,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    ConstantAt {
        site: Site,
        bit: u8,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    BlockLeak,
    HiddenVariable,
    BlockRecorder,
    Custom {
        spec: DeviceSpec,
    },
}

impl DeviceProgram {
    pub fn build(&self, layout: &ProtocolLayout) -> DeviceSpec {
        match self {
            DeviceProgram::Honest => DeviceSpec::honest(),
            DeviceProgram::ConstantOutput { bit } => programs::constant_output(*bit),
            DeviceProgram::Memoryful => programs::memoryful(),
            DeviceProgram::LocationConditioned { site, radius } => {
                programs::location_conditioned(site.resolve(layout), *radius)
            }
            DeviceProgram::ConstantAt { site, bit, radius } => {
                programs::constant_at(site.resolve(layout), *radius, *bit)
            }
            DeviceProgram::BlockLeak => programs::block_leak(),
            DeviceProgram::HiddenVariable => programs::hidden_variable(),
            DeviceProgram::BlockRecorder => programs::block_recorder(),
            DeviceProgram::Custom { spec } => spec.clone(),
        }
    }
}

/// Programs for Alice's three untrusted devices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DevicePrograms {
    pub committer: DeviceProgram,
    pub unveiler0: DeviceProgram,
    pub unveiler1: DeviceProgram,
}

impl DevicePrograms {
    pub fn build(&self, layout: &ProtocolLayout) -> AliceDevices {
        AliceDevices {
            committer: self.committer.build(layout),
            unveilers: [self.unveiler0.build(layout), self.unveiler1.build(layout)],
        }
    }
}

fn both() -> [bool; 2] {
    [true, true]
}

fn yes() -> bool {
    true
}

/// What Alice does in each trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AliceBehavior {
    /// Commit `b` (drawn per trial when absent) and unveil per `unveil`.
    Honest {
        #[serde(default)]
        b: Option<u8>,
        #[serde(default = "both")]
        unveil: [bool; 2],
        #[serde(default = "yes")]
        disciplined: bool,
    },
    /// Decline to commit; dual-run variants commit opposite bits.
    Decline {
        #[serde(default = "both")]
        unveil: [bool; 2],
    },
    /// Play the brute-force optimal classical strategy (CHSH1 or RCCBC).
    OracleOptimal,
    /// Two consecutive runs on the same devices: run 1 commits a random bit
    /// without unveiling, run 2 commits and `A_0` unveils. Bob guesses run
    /// 1's bit from the first bits of `O` (run 1) and `O⁰` (run 2).
    MemoryReuse { disciplined: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub config: ProtocolConfig,
    pub behavior: AliceBehavior,
    #[serde(default)]
    pub devices: DevicePrograms,
    pub repeat: usize,
    /// Master seed; trial seeds derive from it and the scenario name.
    pub seed: u64,
    /// When set, each trial first runs on the layout shifted by this offset
    /// with the same devices, as Alice's own pre-test.
    #[serde(default)]
    pub pretest_offset: Option<SpacetimePoint>,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    /// Bit committed in the run the verdict refers to.
    pub committed: Option<u8>,
    /// Bit whose secrecy the view is scored against.
    pub hidden_bit: Option<u8>,
    pub transcripts: Vec<Transcript>,
    pub verdict: Verdict,
    pub pretest: Option<Verdict>,
    /// Bob's pre-unveil view, rendered.
    pub view: String,
    /// Memory reuse only: whether Bob's guess of run 1's bit was right.
    pub leak_correct: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub trials: usize,
    /// Per bit value, share of trials accepting it.
    pub acceptance: [f64; 2],
    /// Share of trials accepting the committed bit, over trials with one.
    pub committed_acceptance: Option<f64>,
    pub wrong_bit_acceptance: Option<f64>,
    pub both_accepted: f64,
    /// Mean verification statistic per bit value, over trials that have one.
    pub mean_statistic: [Option<f64>; 2],
    pub pretest_acceptance: Option<f64>,
    pub leak_rate: Option<f64>,
    pub hiding: Option<HidingEstimate>,
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub trials: Vec<TrialOutcome>,
    pub summary: ScenarioSummary,
}

/// Bob's commit-phase knowledge: everything `B_c` holds before either
/// unveiling time.
pub fn bob_commit_view(transcript: &Transcript, layout: &ProtocolLayout) -> String {
    let cutoff = layout.unveil_points[0].t.min(layout.unveil_points[1].t);
    transcript
        .events
        .iter()
        .filter(|e| {
            e.agent == AgentId::Bc
                && e.point.t < cutoff
                && matches!(
                    e.kind,
                    EventKind::Generate | EventKind::Compute | EventKind::Receive
                )
        })
        .map(|e| format!("{}={}", e.label, e.payload))
        .collect::<Vec<_>>()
        .join(";")
}

fn received_first_bit(t: &Transcript, agent: AgentId, label: &str) -> Option<char> {
    t.events
        .iter()
        .find(|e| e.agent == agent && e.kind == EventKind::Receive && e.label == label)
        .and_then(|e| e.payload.chars().next())
}

fn run_trial(scenario: &Scenario, trial: usize) -> Result<TrialOutcome, HarnessError> {
    let node = SeedNode::scenario(scenario.seed, &scenario.name).trial(trial as u64);
    let mut config = scenario.config.clone();
    config.seed = node.0;
    let layout = config.layout;
    let mut devices = scenario.devices.build(&layout);
    let mut choice = node.rng("alice-choice");
    let random_bit = choice.random::<bool>() as u8;

    let pretest = match scenario.pretest_offset {
        Some(offset) => {
            let mut pre = config.clone().with_layout(layout.translated(&offset));
            pre.seed = node.child("pretest").0;
            let (_, verdict, _) = run_behaviour(scenario, &pre, &mut devices, random_bit)?;
            Some(verdict)
        }
        None => None,
    };

    if let AliceBehavior::MemoryReuse { disciplined } = scenario.behavior {
        let b1 = random_bit;
        let b2 = choice.random::<bool>() as u8;
        let mut first = config.clone();
        first.seed = node.child("run-1").0;
        let mut silent = Decisions::silent(Some(b1));
        silent.disciplined = disciplined;
        let run1 = run_chsh_variant(
            &first,
            AliceConduct::Devices {
                decisions: silent,
                devices: &mut devices,
            },
        )?;
        let mut second = config.clone();
        second.seed = node.child("run-2").0;
        let run2 = run_chsh_variant(
            &second,
            AliceConduct::Devices {
                decisions: Decisions::commit(b2).unveiling(0),
                devices: &mut devices,
            },
        )?;
        let o = received_first_bit(&run1.transcript, AgentId::Bc, "O");
        let o0 = received_first_bit(&run2.transcript, AgentId::B0, "O0");
        let view = format!("O[1]={};O0'[1]={}", o.unwrap_or('?'), o0.unwrap_or('?'));
        let leak_correct = match (o, o0) {
            (Some(a), Some(c)) if a != '-' && c != '-' => Some(((a != c) as u8) == b1),
            _ => Some(false),
        };
        return Ok(TrialOutcome {
            trial,
            seed: node.0,
            committed: Some(b2),
            hidden_bit: Some(b1),
            transcripts: vec![run1.transcript, run2.transcript],
            verdict: run2.verdict,
            pretest,
            view,
            leak_correct,
        });
    }

    let (transcripts, verdict, committed) =
        run_behaviour(scenario, &config, &mut devices, random_bit)?;
    let view = transcripts
        .iter()
        .map(|t| bob_commit_view(t, &layout))
        .collect::<Vec<_>>()
        .join("|");
    let hidden_bit = match scenario.behavior {
        AliceBehavior::Decline { .. } if matches!(config.variant, Variant::DualRun(_)) => {
            Some(random_bit)
        }
        _ => committed,
    };
    Ok(TrialOutcome {
        trial,
        seed: node.0,
        committed,
        hidden_bit,
        transcripts,
        verdict,
        pretest,
        view,
        leak_correct: None,
    })
}

/// Runs the scenario's behaviour once; returns transcripts, verdict and the
/// committed bit.
fn run_behaviour(
    scenario: &Scenario,
    config: &ProtocolConfig,
    devices: &mut AliceDevices,
    random_bit: u8,
) -> Result<(Vec<Transcript>, Verdict, Option<u8>), HarnessError> {
    let decisions = match &scenario.behavior {
        AliceBehavior::Honest {
            b,
            unveil,
            disciplined,
        } => Decisions {
            b: Some(b.unwrap_or(random_bit) & 1),
            unveil: *unveil,
            disciplined: *disciplined,
        },
        AliceBehavior::Decline { unveil } => Decisions {
            b: None,
            unveil: *unveil,
            disciplined: true,
        },
        AliceBehavior::MemoryReuse { .. } => Decisions::commit(random_bit),
        AliceBehavior::OracleOptimal => {
            return match config.variant {
                Variant::Chsh(ChshVariant::Chsh1) => {
                    let l0 = agreed_l0(config);
                    let best = brute_force_epsilon_chsh(config.n, config.xi, &l0)?;
                    let mut pinned = config.clone();
                    pinned.l0 = Some(l0);
                    let run = run_chsh_variant(&pinned, AliceConduct::Strategy(&best.strategy))?;
                    Ok((vec![run.transcript], run.verdict, None))
                }
                Variant::Rccbc => {
                    let best = brute_force_epsilon_rccbc(config.n, config.c_param)?;
                    let run = run_rccbc(config, Decisions::commit(0), Some(&best.strategy))?;
                    Ok((vec![run.transcript], run.verdict, None))
                }
                other => Err(HarnessError::InvalidScenario(format!(
                    "oracle-optimal play is defined for chsh1 and rccbc, not {other}"
                ))),
            };
        }
    };
    match config.variant {
        Variant::Chsh(_) => {
            let run = run_chsh_variant(config, AliceConduct::Devices { decisions, devices })?;
            Ok((vec![run.transcript], run.verdict, decisions.b))
        }
        Variant::Rccbc => {
            let run = run_rccbc(config, decisions, None)?;
            Ok((vec![run.transcript], run.verdict, decisions.b))
        }
        Variant::DualRun(_) => {
            let intent = match decisions.b {
                Some(b) => DualIntent::Commit(b),
                None => DualIntent::Decline,
            };
            let run = run_dual(config, intent, decisions.unveil, devices)?;
            let [a, b] = run.runs;
            Ok((vec![a.transcript, b.transcript], run.verdict, decisions.b))
        }
    }
}

fn summarise(scenario: &Scenario, trials: &[TrialOutcome]) -> ScenarioSummary {
    let n = trials.len().max(1) as f64;
    let share =
        |f: &dyn Fn(&TrialOutcome) -> bool| trials.iter().filter(|t| f(t)).count() as f64 / n;
    let acceptance = [
        share(&|t| t.verdict.accepted(0)),
        share(&|t| t.verdict.accepted(1)),
    ];
    let with_bit: Vec<(&TrialOutcome, u8)> = trials
        .iter()
        .filter_map(|t| t.committed.map(|b| (t, b)))
        .collect();
    let rate = |f: &dyn Fn(&TrialOutcome, u8) -> bool| {
        (!with_bit.is_empty()).then(|| {
            with_bit.iter().filter(|(t, b)| f(t, *b)).count() as f64 / with_bit.len() as f64
        })
    };
    let mean_statistic = [0, 1].map(|i| {
        let xs: Vec<f64> = trials
            .iter()
            .filter_map(|t| t.verdict.entries[i].statistic)
            .collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    });
    let pretests: Vec<bool> = trials
        .iter()
        .filter_map(|t| {
            t.pretest
                .map(|v| t.committed.is_some_and(|b| v.accepted(b as usize)))
        })
        .collect();
    let leaks: Vec<bool> = trials.iter().filter_map(|t| t.leak_correct).collect();
    let mut views: [Vec<&str>; 2] = [Vec::new(), Vec::new()];
    for t in trials {
        if let Some(b) = t.hidden_bit {
            views[b as usize].push(&t.view);
        }
    }
    ScenarioSummary {
        name: scenario.name.clone(),
        trials: trials.len(),
        acceptance,
        committed_acceptance: rate(&|t, b| t.verdict.accepted(b as usize)),
        wrong_bit_acceptance: rate(&|t, b| t.verdict.accepted(1 - b as usize)),
        both_accepted: share(&|t| t.verdict.accepted(0) && t.verdict.accepted(1)),
        mean_statistic,
        pretest_acceptance: (!pretests.is_empty())
            .then(|| pretests.iter().filter(|&&p| p).count() as f64 / pretests.len() as f64),
        leak_rate: (!leaks.is_empty())
            .then(|| leaks.iter().filter(|&&p| p).count() as f64 / leaks.len() as f64),
        hiding: estimate_hiding_advantage(&views[0], &views[1]).ok(),
    }
}

/// Runs every trial, in parallel on the current rayon pool. Trial seeds
/// depend only on the master seed, scenario name and trial index, so results
/// do not depend on the degree of parallelism.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioOutcome, HarnessError> {
    if scenario.repeat == 0 {
        return Err(HarnessError::InvalidScenario(
            "repeat must be positive".into(),
        ));
    }
    scenario.config.validate()?;
    let trials = (0..scenario.repeat)
        .into_par_iter()
        .map(|k| run_trial(scenario, k))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarise(scenario, &trials);
    Ok(ScenarioOutcome { trials, summary })
}

fn scenario(
    name: &str,
    config: ProtocolConfig,
    behavior: AliceBehavior,
    repeat: usize,
) -> Scenario {
    Scenario {
        name: name.to_string(),
        config,
        behavior,
        devices: DevicePrograms::default(),
        repeat,
        seed: 1,
        pretest_offset: None,
    }
}

fn honest_random() -> AliceBehavior {
    AliceBehavior::Honest {
        b: None,
        unveil: both(),
        disciplined: true,
    }
}

/// Names of the builtin scenarios, in listing order.
pub const BUILTIN_NAMES: [&str; 13] = [
    "honest-chsh1",
    "honest-chsh2",
    "honest-chsh3",
    "honest-rccbc",
    "noisy-chsh1",
    "dual-commit",
    "dual-decline",
    "location-attack",
    "memory-attack-reuse",
    "memory-attack-disciplined",
    "oracle-cheat-chsh1",
    "oracle-cheat-rccbc",
    "decline-chsh2",
];

/// A builtin scenario by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    let chsh = |v: Variant, n: usize| ProtocolConfig::new(v, n);
    let s = match name {
        "honest-chsh1" => scenario(name, chsh(Variant::CHSH1, 10_000), honest_random(), 100),
        "honest-chsh2" => scenario(name, chsh(Variant::CHSH2, 10_000), honest_random(), 20),
        "honest-chsh3" => scenario(name, chsh(Variant::CHSH3, 10_000), honest_random(), 20),
        "honest-rccbc" => scenario(
            name,
            ProtocolConfig::new(Variant::Rccbc, 64),
            honest_random(),
            1000,
        ),
        "noisy-chsh1" => scenario(
            name,
            chsh(Variant::CHSH1, 10_000).with_delta(0.02),
            honest_random(),
            50,
        ),
        "dual-commit" => scenario(
            name,
            chsh(Variant::DualRun(ChshVariant::Chsh2), 2000),
            honest_random(),
            20,
        ),
        "dual-decline" => scenario(
            name,
            chsh(Variant::DualRun(ChshVariant::Chsh2), 2000),
            AliceBehavior::Decline { unveil: both() },
            20,
        ),
        "decline-chsh2" => scenario(
            name,
            chsh(Variant::CHSH2, 2000),
            AliceBehavior::Decline { unveil: both() },
            20,
        ),
        "location-attack" => {
            let mut s = scenario(
                name,
                chsh(Variant::CHSH1, 2000),
                AliceBehavior::Honest {
                    b: Some(0),
                    unveil: both(),
                    disciplined: true,
                },
                20,
            );
            s.devices.unveiler0 = DeviceProgram::ConstantAt {
                site: Site::Q0,
                bit: 0,
                radius: default_radius(),
            };
            s.pretest_offset = Some(SpacetimePoint::new(5.0, 0.0, 0.0, -3.0));
            s
        }
        "memory-attack-reuse" | "memory-attack-disciplined" => {
            let mut s = scenario(
                name,
                chsh(Variant::CHSH1, 200),
                AliceBehavior::MemoryReuse {
                    disciplined: name.ends_with("disciplined"),
                },
                400,
            );
            s.devices.committer = DeviceProgram::BlockLeak;
            s.devices.unveiler0 = DeviceProgram::BlockRecorder;
            s
        }
        "oracle-cheat-chsh1" => scenario(
            name,
            chsh(Variant::CHSH1, 4),
            AliceBehavior::OracleOptimal,
            200,
        ),
        "oracle-cheat-rccbc" => scenario(
            name,
            ProtocolConfig::new(Variant::Rccbc, 8).with_c(0.25),
            AliceBehavior::OracleOptimal,
            200,
        ),
        _ => return None,
    };
    Some(s)
}

pub fn builtins() -> Vec<Scenario> {
    BUILTIN_NAMES.iter().filter_map(|n| builtin(n)).collect()
}
