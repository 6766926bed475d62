use rand::seq::index::sample;
use rand::Rng;

use super::chsh::{Decisions, ProtocolRun};
use super::engine::{Engine, Protocol, Value};
use super::transcript::VerdictStatus;
use super::{CommitState, ProtocolConfig, ProtocolError, Variant};
use crate::adversary::RccbcStrategy;
use crate::bitmath::{rccbc_distance_accepts, BitString};
use crate::harness::{AgentId, RunStreams};

/// A uniformly random size-`n/2` subset of `{1, …, n}`, ascending.
pub fn random_half_subset<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut js: Vec<usize> = sample(rng, n, n / 2).into_iter().map(|k| k + 1).collect();
    js.sort_unstable();
    js
}

/// One-based positions not in `j`, ascending.
pub fn complement_subset(n: usize, j: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; n + 1];
    for &k in j {
        inside[k] = true;
    }
    (1..=n).filter(|&k| !inside[k]).collect()
}

fn indexed(s: &BitString, positions: &[usize]) -> Vec<(usize, u8)> {
    positions.iter().map(|&k| (k, s.get(k - 1))).collect()
}

/// Result of Bob's RCCBC test for one bit value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RccbcCheck {
    /// `d(S⁰_J, S¹_J)` on the labelled substrings.
    pub distance: usize,
    pub distance_ok: bool,
    /// The unveiled `S^i` equals `S^i_J ∪ S_J̄` label by label.
    pub consistent: bool,
    pub accepted: bool,
}

/// Distance check on the labelled `J` substrings and exact label-consistent
/// match of the unveiled string against `S^i_J ∪ S_J̄`.
pub fn verify_rccbc(
    n: usize,
    c_param: f64,
    i: usize,
    s0_j: &[(usize, u8)],
    s1_j: &[(usize, u8)],
    s_jbar: &[(usize, u8)],
    s_i: &BitString,
) -> Result<RccbcCheck, ProtocolError> {
    if s_i.len() != n {
        return Err(ProtocolError::WrongLength {
            what: "S^i",
            expected: n,
            found: s_i.len(),
        });
    }
    let half = n / 2;
    for (what, part) in [("S0_J", s0_j), ("S1_J", s1_j), ("S_Jbar", s_jbar)] {
        if part.len() != half {
            return Err(ProtocolError::WrongLength {
                what,
                expected: half,
                found: part.len(),
            });
        }
    }
    let same_labels = s0_j.iter().zip(s1_j).all(|(a, b)| a.0 == b.0);
    let distance = s0_j.iter().zip(s1_j).filter(|(a, b)| a.1 != b.1).count();
    let distance_ok = same_labels && rccbc_distance_accepts(distance, n, c_param);
    let claimed_j = if i == 0 { s0_j } else { s1_j };
    let mut covered = vec![false; n + 1];
    let mut consistent = true;
    for &(k, bit) in claimed_j.iter().chain(s_jbar) {
        if k == 0 || k > n || covered[k] || s_i.get(k - 1) != bit {
            consistent = false;
            break;
        }
        covered[k] = true;
    }
    Ok(RccbcCheck {
        distance,
        distance_ok,
        consistent,
        accepted: distance_ok && consistent,
    })
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Prepare,
    Commit,
    Unveil(usize),
}

struct RccbcProtocol<'a> {
    config: &'a ProtocolConfig,
    decisions: Decisions,
    strategy: Option<&'a RccbcStrategy>,
    streams: RunStreams,
}

fn s_label(i: usize) -> &'static str {
    ["S0", "S1"][i & 1]
}

fn s_j_label(i: usize) -> &'static str {
    ["S0_J", "S1_J"][i & 1]
}

const CLAIMS: [&str; 3] = ["S0_J", "S1_J", "S_Jbar"];

impl RccbcProtocol<'_> {
    fn on_commit_input(&mut self, eng: &mut Engine<Step>) -> Result<(), ProtocolError> {
        let n = self.config.n;
        let j = eng.read_subset(AgentId::Ac, "J")?;
        let jbar = complement_subset(n, &j);
        if let Some(s) = self.strategy {
            let claims = s.respond(&j)?;
            eng.compute(
                AgentId::Ac,
                "S0_J",
                Value::Indexed(indexed_claim(&claims.s0_j, &j)),
                &["J", "strategy"],
            )?;
            eng.compute(
                AgentId::Ac,
                "S1_J",
                Value::Indexed(indexed_claim(&claims.s1_j, &j)),
                &["J", "strategy"],
            )?;
            eng.compute(
                AgentId::Ac,
                "S_Jbar",
                Value::Indexed(indexed_claim(&claims.s_jbar, &jbar)),
                &["J", "strategy"],
            )?;
        } else {
            for i in 0..2 {
                let s = eng.read_bits(AgentId::Ac, s_label(i))?;
                eng.compute(
                    AgentId::Ac,
                    s_j_label(i),
                    Value::Indexed(indexed(&s, &j)),
                    &["J", s_label(i)],
                )?;
            }
            match self.decisions.b {
                Some(b) => {
                    eng.generate(AgentId::Ac, "b", Value::Bit(b))?;
                    let s = eng.read_bits(AgentId::Ac, s_label(b as usize))?;
                    eng.compute(
                        AgentId::Ac,
                        "S_Jbar",
                        Value::Indexed(indexed(&s, &jbar)),
                        &["J", "b", s_label(b as usize)],
                    )?;
                }
                None => {
                    let s = BitString::random(n, &mut self.streams.alice);
                    eng.generate(AgentId::Ac, "S_Jbar", Value::Indexed(indexed(&s, &jbar)))?;
                }
            }
        }
        for label in CLAIMS {
            for to in [AgentId::Bc, AgentId::V0, AgentId::V1] {
                eng.send(AgentId::Ac, to, label)?;
            }
        }
        Ok(())
    }

    fn try_verify(&mut self, eng: &mut Engine<Step>, i: usize) -> Result<(), ProtocolError> {
        let v = AgentId::verifier(i);
        let needed = ["J", "S0_J", "S1_J", "S_Jbar", s_label(i)];
        if eng.has_verdict(i) || !needed.iter().all(|l| eng.holds(v, l)) {
            return Ok(());
        }
        let check = verify_rccbc(
            self.config.n,
            self.config.c_param,
            i,
            &eng.read_indexed(v, "S0_J")?,
            &eng.read_indexed(v, "S1_J")?,
            &eng.read_indexed(v, "S_Jbar")?,
            &eng.read_bits(v, s_label(i))?,
        )?;
        let status = if check.accepted {
            VerdictStatus::Accepted
        } else {
            VerdictStatus::Rejected
        };
        eng.verdict(v, i, status, Some(check.distance as f64), &needed)
    }
}

fn indexed_claim(bits: &BitString, positions: &[usize]) -> Vec<(usize, u8)> {
    positions
        .iter()
        .enumerate()
        .map(|(k, &p)| (p, bits.get(k)))
        .collect()
}

impl Protocol for RccbcProtocol<'_> {
    type Step = Step;

    fn on_step(
        &mut self,
        eng: &mut Engine<Step>,
        agent: AgentId,
        step: Step,
    ) -> Result<(), ProtocolError> {
        match step {
            Step::Prepare => {
                if self.strategy.is_some() {
                    for a in [AgentId::Ac, AgentId::A0, AgentId::A1] {
                        eng.generate(a, "strategy", Value::Opaque("pre-agreed".into()))?;
                    }
                    return Ok(());
                }
                for i in 0..2 {
                    let s = BitString::random(self.config.n, &mut self.streams.alice);
                    eng.generate(AgentId::Ac, s_label(i), Value::Bits(s))?;
                    eng.send(AgentId::Ac, AgentId::unveiler(i), s_label(i))?;
                }
                Ok(())
            }
            Step::Commit => {
                let j = random_half_subset(self.config.n, &mut self.streams.bob);
                eng.generate(AgentId::Bc, "J", Value::Subset(j))?;
                for to in [AgentId::Ac, AgentId::V0, AgentId::V1] {
                    eng.send(AgentId::Bc, to, "J")?;
                }
                Ok(())
            }
            Step::Unveil(i) => {
                let unveils = self.strategy.is_some() || self.decisions.unveil[i];
                if !unveils {
                    return Ok(());
                }
                if let Some(s) = self.strategy {
                    let full = if i == 0 {
                        s.s0_full.clone()
                    } else {
                        s.s1_full.clone()
                    };
                    eng.compute(agent, s_label(i), Value::Bits(full), &["strategy"])?;
                }
                eng.send(agent, AgentId::bob_unveil(i), s_label(i))?;
                eng.send(agent, AgentId::verifier(i), s_label(i))
            }
        }
    }

    fn on_receive(
        &mut self,
        eng: &mut Engine<Step>,
        agent: AgentId,
        label: &str,
    ) -> Result<(), ProtocolError> {
        match (agent, label) {
            (AgentId::Ac, "J") => self.on_commit_input(eng),
            (AgentId::V0, _) => self.try_verify(eng, 0),
            (AgentId::V1, _) => self.try_verify(eng, 1),
            _ => Ok(()),
        }
    }
}

/// Executes one RCCBC run. With a strategy, Alice's agents play it and
/// `decisions` is ignored.
pub fn run_rccbc(
    config: &ProtocolConfig,
    decisions: Decisions,
    strategy: Option<&RccbcStrategy>,
) -> Result<ProtocolRun, ProtocolError> {
    if config.variant != Variant::Rccbc {
        return Err(ProtocolError::VariantMismatch(config.variant.to_string()));
    }
    config.validate()?;
    if let Some(s) = strategy {
        if s.n() != config.n {
            return Err(ProtocolError::WrongLength {
                what: "strategy",
                expected: config.n,
                found: s.n(),
            });
        }
    }
    let mut eng = Engine::new("rccbc", config.layout, config.travel_speed, config.verifier)?;
    eng.schedule_step(AgentId::Ac, eng.prep_time, Step::Prepare);
    eng.schedule_step(AgentId::Bc, config.layout.commit_point.t, Step::Commit);
    for i in 0..2 {
        eng.schedule_step(
            AgentId::unveiler(i),
            config.layout.unveil_points[i].t,
            Step::Unveil(i),
        );
    }
    let mut protocol = RccbcProtocol {
        config,
        decisions,
        strategy,
        streams: RunStreams::from_seed(config.seed),
    };
    let (transcript, verdict) = eng.run(&mut protocol)?;
    let mut state = CommitState::new(config.n, 0);
    state.b = decisions.b.filter(|_| strategy.is_none());
    state.committed = true;
    state.unveiled = if strategy.is_some() {
        [true, true]
    } else {
        decisions.unveil
    };
    Ok(ProtocolRun {
        transcript,
        verdict,
        state,
    })
}
