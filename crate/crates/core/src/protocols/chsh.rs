use rand::Rng;
use serde::{Deserialize, Serialize};

use super::engine::{Engine, Protocol, Value};
use super::transcript::{Transcript, Verdict, VerdictStatus};
use super::{ChshVariant, Outcomes, ProtocolConfig, ProtocolError, Variant};
use crate::adversary::ReducedStrategy;
use crate::bitmath::{mismatch_threshold, BitString};
use crate::harness::{AgentId, RunStreams, SeedNode};
use crate::quantum::{
    direction_for_bit, DeviceSpec, EntangledRegistry, MeasureRequest, Role, Side,
};
use crate::{DirectionSet, SpacetimePoint};

/// One-based index of the `a`-side qubit the committer measures in round `j`
/// when committing to `b`: `j + xN` for `b = 0`, `N + j − xN` for `b = 1`.
pub fn commit_pair_index(n: usize, b: u8, x: u8, j: usize) -> usize {
    let x = x as usize;
    if b == 0 {
        j + x * n
    } else {
        n + j - x * n
    }
}

/// One-based index of the qubit unveiler `i` measures in round `j`:
/// `j + xN + iN − 2ixN`.
pub fn unveil_pair_index(n: usize, i: usize, x: u8, j: usize) -> usize {
    let x = x as usize;
    j + x * n + i * n - 2 * i * x * n
}

/// Block (`0` for pairs `1..N`, `1` for `N+1..2N`) the committer measures.
pub fn commit_block(n: usize, b: u8, x: u8) -> usize {
    (commit_pair_index(n, b, x, 1) - 1) / n
}

/// Block held and measured by unveiler `i`.
pub fn unveil_block(n: usize, i: usize, x: u8) -> usize {
    (unveil_pair_index(n, i, x, 1) - 1) / n
}

/// Alice's secret state for one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitState {
    pub n: usize,
    /// `A_c`'s secret random bit.
    pub x: u8,
    /// Committed value; `None` when declined or not yet committed.
    pub b: Option<u8>,
    pub committed: bool,
    pub unveiled: [bool; 2],
}

impl CommitState {
    pub fn new(n: usize, x: u8) -> Self {
        Self {
            n,
            x: x & 1,
            b: None,
            committed: false,
            unveiled: [false; 2],
        }
    }

    /// Zero-based `b`-side pair indices held by `A_0` and `A_1`.
    pub fn assignment(&self) -> [std::ops::Range<usize>; 2] {
        [0, 1].map(|i| {
            let k = unveil_block(self.n, i, self.x);
            k * self.n..(k + 1) * self.n
        })
    }
}

/// Alice's untrusted devices; memory persists across runs that reuse them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AliceDevices {
    pub committer: DeviceSpec,
    pub unveilers: [DeviceSpec; 2],
}

impl Default for AliceDevices {
    fn default() -> Self {
        Self {
            committer: DeviceSpec::honest(),
            unveilers: [DeviceSpec::honest(), DeviceSpec::honest()],
        }
    }
}

/// What Alice's agents decide to do in one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decisions {
    /// Bit to commit; `None` declines by returning random outcomes.
    pub b: Option<u8>,
    pub unveil: [bool; 2],
    /// A disciplined unveiler never operates its device unless unveiling.
    pub disciplined: bool,
}

impl Decisions {
    pub fn commit(b: u8) -> Self {
        Self {
            b: Some(b & 1),
            unveil: [true, true],
            disciplined: true,
        }
    }

    pub fn silent(b: Option<u8>) -> Self {
        Self {
            b,
            unveil: [false, false],
            disciplined: true,
        }
    }

    pub fn unveiling(mut self, i: usize) -> Self {
        self.unveil = [false, false];
        self.unveil[i & 1] = true;
        self
    }

    pub fn undisciplined(mut self) -> Self {
        self.disciplined = false;
        self
    }
}

/// Draws `x` and prepares the `2N` pairs.
pub fn prepare(
    config: &ProtocolConfig,
    streams: &mut RunStreams,
) -> Result<(CommitState, EntangledRegistry), ProtocolError> {
    config.validate()?;
    let x = streams.alice.random::<bool>() as u8;
    let registry = EntangledRegistry::prepare(config.n, &config.pair_noise(), &mut streams.devices);
    Ok((CommitState::new(config.n, x), registry))
}

/// `A_c` measures the `a`-side block for `b` along `X` or `Y` per `L_j`.
#[allow(clippy::too_many_arguments)]
pub fn commit<R: Rng + ?Sized>(
    state: &mut CommitState,
    l: &BitString,
    b: u8,
    registry: &mut EntangledRegistry,
    directions: &DirectionSet,
    device: &mut DeviceSpec,
    location: SpacetimePoint,
    rng: &mut R,
) -> Result<Outcomes, ProtocolError> {
    if state.committed {
        return Err(ProtocolError::AlreadyCommitted);
    }
    check_len("L", l, state.n)?;
    state.committed = true;
    state.b = Some(b & 1);
    let mut out = Vec::with_capacity(state.n);
    for j in 1..=state.n {
        let setting = l.get(j - 1);
        let request = MeasureRequest {
            direction: direction_for_bit(directions, Role::Committer, setting),
            setting,
            flip_outcome: false,
            location,
        };
        let pair = commit_pair_index(state.n, b & 1, state.x, j) - 1;
        out.push(registry.measure(pair, Side::A, &request, device, rng)?);
    }
    Ok(Outcomes::from_options(&out))
}

/// `A_i` measures its `b`-side block along `X′` or `Y′` per `L^i_j`.
#[allow(clippy::too_many_arguments)]
pub fn unveil<R: Rng + ?Sized>(
    state: &mut CommitState,
    i: usize,
    l_i: &BitString,
    registry: &mut EntangledRegistry,
    directions: &DirectionSet,
    device: &mut DeviceSpec,
    location: SpacetimePoint,
    rng: &mut R,
) -> Result<Outcomes, ProtocolError> {
    let i = i & 1;
    if state.unveiled[i] {
        return Err(ProtocolError::AlreadyUnveiled(i));
    }
    check_len("L^i", l_i, state.n)?;
    state.unveiled[i] = true;
    let mut out = Vec::with_capacity(state.n);
    for j in 1..=state.n {
        let setting = l_i.get(j - 1);
        let request = MeasureRequest {
            direction: direction_for_bit(directions, Role::Unveiler, setting),
            setting,
            flip_outcome: directions.outcome_flip_unveiler,
            location,
        };
        let pair = unveil_pair_index(state.n, i, state.x, j) - 1;
        out.push(registry.measure(pair, Side::B, &request, device, rng)?);
    }
    Ok(Outcomes::from_options(&out))
}

fn check_len(what: &'static str, s: &BitString, n: usize) -> Result<(), ProtocolError> {
    if s.len() != n {
        return Err(ProtocolError::WrongLength {
            what,
            expected: n,
            found: s.len(),
        });
    }
    Ok(())
}

/// Result of Bob's CHSH test for one bit value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshCheck {
    /// Rounds with `O^i_j ⊕ O_j ≠ L^i_j L_j`, lost rounds included.
    pub mismatches: usize,
    /// `N − mismatches`.
    pub score: usize,
    pub accepted: bool,
}

/// Accepts iff `d(O^i ⊕ O, L^i L) < N(1/2 − 1/(2√2) + ξ)`, equivalently a
/// score strictly above `N((2 + √2)/4 − ξ)`.
pub fn verify_chsh(
    o: &Outcomes,
    o_i: &Outcomes,
    l: &BitString,
    l_i: &BitString,
    xi: f64,
) -> Result<ChshCheck, ProtocolError> {
    let n = l.len();
    for (what, len) in [("O", o.len()), ("O^i", o_i.len()), ("L^i", l_i.len())] {
        if len != n {
            return Err(ProtocolError::WrongLength {
                what,
                expected: n,
                found: len,
            });
        }
    }
    let mismatches = o_i.mismatches(o, &l_i.and(l)?)?;
    Ok(ChshCheck {
        mismatches,
        score: n - mismatches,
        accepted: (mismatches as f64) < mismatch_threshold(n, xi),
    })
}

/// Who produces Alice's outputs.
#[derive(Debug)]
pub enum AliceConduct<'a> {
    /// Agents follow `decisions` and operate the given devices.
    Devices {
        decisions: Decisions,
        devices: &'a mut AliceDevices,
    },
    /// A pre-agreed classical strategy: `O = O′(L)`, `O⁰ = 0`, `O¹ = D`,
    /// both unveilers always announce. Devices are not used.
    Strategy(&'a ReducedStrategy),
}

/// Output of one protocol run.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub transcript: Transcript,
    pub verdict: Verdict,
    pub state: CommitState,
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Prepare,
    Commit,
    Unveil(usize),
}

struct ChshProtocol<'a> {
    variant: ChshVariant,
    config: &'a ProtocolConfig,
    conduct: AliceConduct<'a>,
    streams: RunStreams,
    state: CommitState,
    registry: EntangledRegistry,
    agreed_l0: BitString,
}

fn l_label(i: usize) -> &'static str {
    ["L0", "L1"][i & 1]
}

fn o_label(i: usize) -> &'static str {
    ["O0", "O1"][i & 1]
}

fn qubits_label(i: usize) -> &'static str {
    ["qubits0", "qubits1"][i & 1]
}

impl ChshProtocol<'_> {
    fn on_prepare(&mut self, eng: &mut Engine<Step>, agent: AgentId) -> Result<(), ProtocolError> {
        match agent {
            AgentId::Ac => match &self.conduct {
                AliceConduct::Strategy(_) => {
                    for a in [AgentId::Ac, AgentId::A0, AgentId::A1] {
                        eng.generate(a, "strategy", Value::Opaque("pre-agreed".into()))?;
                    }
                }
                AliceConduct::Devices { .. } => {
                    eng.generate(
                        AgentId::Ac,
                        "pairs",
                        Value::Opaque(format!("{}", 2 * self.config.n)),
                    )?;
                    eng.generate(AgentId::Ac, "x", Value::Bit(self.state.x))?;
                    for i in 0..2 {
                        eng.compute(
                            AgentId::Ac,
                            qubits_label(i),
                            Value::Opaque(format!("{} qubits", self.config.n)),
                            &["pairs", "x"],
                        )?;
                        eng.send(AgentId::Ac, AgentId::unveiler(i), qubits_label(i))?;
                    }
                }
            },
            AgentId::Bc if self.variant == ChshVariant::Chsh2 => {
                let l0 = BitString::random(self.config.n, &mut self.streams.bob);
                let l1 = l0.complement();
                eng.generate(AgentId::Bc, "L0", Value::Bits(l0))?;
                eng.compute(AgentId::Bc, "L1", Value::Bits(l1), &["L0"])?;
                eng.send(AgentId::Bc, AgentId::B0, "L0")?;
                eng.send(AgentId::Bc, AgentId::B1, "L1")?;
            }
            AgentId::B0 | AgentId::B1 if self.variant == ChshVariant::Chsh1 => {
                let i = (agent == AgentId::B1) as usize;
                let l = if i == 0 {
                    self.agreed_l0.clone()
                } else {
                    self.agreed_l0.complement()
                };
                eng.generate(agent, l_label(i), Value::Bits(l))?;
            }
            _ => {}
        }
        Ok(())
    }

    fn on_commit_input(&mut self, eng: &mut Engine<Step>) -> Result<(), ProtocolError> {
        let l = eng.read_bits(AgentId::Ac, "L")?;
        let here = eng.here(AgentId::Ac);
        match &mut self.conduct {
            AliceConduct::Strategy(s) => {
                let o = s.respond(&l)?;
                eng.compute(AgentId::Ac, "O", Value::Bits(o), &["L", "strategy"])?;
            }
            AliceConduct::Devices { decisions, devices } => match decisions.b {
                Some(b) => {
                    eng.generate(AgentId::Ac, "b", Value::Bit(b))?;
                    let o = commit(
                        &mut self.state,
                        &l,
                        b,
                        &mut self.registry,
                        &self.config.directions,
                        &mut devices.committer,
                        here,
                        &mut self.streams.noise,
                    )?;
                    eng.measure(
                        AgentId::Ac,
                        "O",
                        Value::Outcomes(o),
                        &["L", "b", "x", "pairs"],
                    )?;
                }
                None => {
                    let o = BitString::random(self.config.n, &mut self.streams.alice);
                    eng.generate(AgentId::Ac, "O", Value::Bits(o))?;
                }
            },
        }
        for to in [AgentId::Bc, AgentId::V0, AgentId::V1] {
            eng.send(AgentId::Ac, to, "O")?;
        }
        Ok(())
    }

    fn on_unveil_input(&mut self, eng: &mut Engine<Step>, i: usize) -> Result<(), ProtocolError> {
        let agent = AgentId::unveiler(i);
        let here = eng.here(agent);
        match &mut self.conduct {
            AliceConduct::Strategy(s) => {
                let o = if i == 0 {
                    BitString::zeros(self.config.n)
                } else {
                    s.d_offset().clone()
                };
                eng.compute(agent, o_label(i), Value::Bits(o), &["strategy"])?;
            }
            AliceConduct::Devices { decisions, devices } => {
                if !decisions.unveil[i] && decisions.disciplined {
                    return Ok(());
                }
                let l_i = eng.read_bits(agent, l_label(i))?;
                let o = unveil(
                    &mut self.state,
                    i,
                    &l_i,
                    &mut self.registry,
                    &self.config.directions,
                    &mut devices.unveilers[i],
                    here,
                    &mut self.streams.noise,
                )?;
                eng.measure(
                    agent,
                    o_label(i),
                    Value::Outcomes(o),
                    &[l_label(i), qubits_label(i)],
                )?;
                if !decisions.unveil[i] {
                    return Ok(());
                }
            }
        }
        eng.send(agent, AgentId::bob_unveil(i), o_label(i))?;
        eng.send(agent, AgentId::verifier(i), o_label(i))?;
        Ok(())
    }

    fn try_verify(&mut self, eng: &mut Engine<Step>, i: usize) -> Result<(), ProtocolError> {
        let v = AgentId::verifier(i);
        let needed = ["L", "O", l_label(i), o_label(i)];
        if eng.has_verdict(i) || !needed.iter().all(|l| eng.holds(v, l)) {
            return Ok(());
        }
        let check = verify_chsh(
            &eng.read_outcomes(v, "O")?,
            &eng.read_outcomes(v, o_label(i))?,
            &eng.read_bits(v, "L")?,
            &eng.read_bits(v, l_label(i))?,
            self.config.xi,
        )?;
        let status = if check.accepted {
            VerdictStatus::Accepted
        } else {
            VerdictStatus::Rejected
        };
        eng.verdict(v, i, status, Some(check.score as f64), &needed)
    }
}

impl Protocol for ChshProtocol<'_> {
    type Step = Step;

    fn on_step(
        &mut self,
        eng: &mut Engine<Step>,
        agent: AgentId,
        step: Step,
    ) -> Result<(), ProtocolError> {
        match step {
            Step::Prepare => self.on_prepare(eng, agent),
            Step::Commit => {
                let l = BitString::random(self.config.n, &mut self.streams.bob);
                eng.generate(AgentId::Bc, "L", Value::Bits(l))?;
                for to in [AgentId::Ac, AgentId::V0, AgentId::V1] {
                    eng.send(AgentId::Bc, to, "L")?;
                }
                Ok(())
            }
            Step::Unveil(i) => {
                let b = AgentId::bob_unveil(i);
                if self.variant == ChshVariant::Chsh3 {
                    let l = BitString::random(self.config.n, &mut self.streams.bob_q[i]);
                    eng.generate(b, l_label(i), Value::Bits(l))?;
                }
                eng.send(b, AgentId::unveiler(i), l_label(i))?;
                eng.send(b, AgentId::verifier(i), l_label(i))
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
            (AgentId::Ac, "L") => self.on_commit_input(eng),
            (AgentId::A0, "L0") => self.on_unveil_input(eng, 0),
            (AgentId::A1, "L1") => self.on_unveil_input(eng, 1),
            (AgentId::V0, _) => self.try_verify(eng, 0),
            (AgentId::V1, _) => self.try_verify(eng, 1),
            _ => Ok(()),
        }
    }
}

/// The pre-agreed `L⁰` of CHSH1: from the configuration, or drawn from the
/// seed tree so that it is fixed before the run.
pub fn agreed_l0(config: &ProtocolConfig) -> BitString {
    config.l0.clone().unwrap_or_else(|| {
        let mut rng = SeedNode(config.seed).rng("agreed");
        BitString::random(config.n, &mut rng)
    })
}

/// Executes one run of a CHSH variant end to end on the event engine.
pub fn run_chsh_variant(
    config: &ProtocolConfig,
    conduct: AliceConduct<'_>,
) -> Result<ProtocolRun, ProtocolError> {
    let variant = match config.variant {
        Variant::Chsh(v) => v,
        other => return Err(ProtocolError::VariantMismatch(other.to_string())),
    };
    if let AliceConduct::Strategy(s) = &conduct {
        if s.n() != config.n {
            return Err(ProtocolError::WrongLength {
                what: "strategy",
                expected: config.n,
                found: s.n(),
            });
        }
    }
    let mut streams = RunStreams::from_seed(config.seed);
    let (state, registry) = prepare(config, &mut streams)?;
    let mut eng = Engine::new(
        config.variant.to_string(),
        config.layout,
        config.travel_speed,
        config.verifier,
    )?;
    let prep = eng.prep_time;
    for a in [AgentId::Bc, AgentId::Ac, AgentId::B0, AgentId::B1] {
        eng.schedule_step(a, prep, Step::Prepare);
    }
    eng.schedule_step(AgentId::Bc, config.layout.commit_point.t, Step::Commit);
    for i in 0..2 {
        eng.schedule_step(
            AgentId::bob_unveil(i),
            config.layout.unveil_points[i].t,
            Step::Unveil(i),
        );
    }
    let mut protocol = ChshProtocol {
        variant,
        config,
        conduct,
        streams,
        state,
        registry,
        agreed_l0: agreed_l0(config),
    };
    let (transcript, verdict) = eng.run(&mut protocol)?;
    Ok(ProtocolRun {
        transcript,
        verdict,
        state: protocol.state,
    })
}
