//! Event-driven execution shared by the protocol variants.
//!
//! Agents hold data by label. A value becomes available to an agent when it
//! generates or computes it, or when a message carrying it is received on the
//! agent's worldline. Reading a label the agent does not hold is an error, so
//! protocol logic cannot use information before it could have arrived.

use std::collections::{BTreeMap, BTreeSet};

use super::transcript::{
    EventKind, Transcript, TranscriptEvent, Verdict, VerdictEntry, VerdictStatus,
};
use super::{Outcomes, ProtocolError, VerifierPlacement};
use crate::bitmath::BitString;
use crate::geometry::earliest_joint_reception;
use crate::harness::{deliver, AgentId, Scheduler, Worldline};
use crate::{ProtocolLayout, SpacetimePoint};

/// Data an agent can hold.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Value {
    Bit(u8),
    Bits(BitString),
    Outcomes(Outcomes),
    /// One-based positions.
    Subset(Vec<usize>),
    /// `(one-based position, bit)` pairs.
    Indexed(Vec<(usize, u8)>),
    /// Physical systems or shared strategy data with no transcript rendering.
    Opaque(String),
}

impl Value {
    pub(crate) fn render(&self) -> String {
        match self {
            Value::Bit(b) => b.to_string(),
            Value::Bits(s) => s.to_string(),
            Value::Outcomes(o) => o.to_string(),
            Value::Subset(js) => js
                .iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join(","),
            Value::Indexed(v) => v
                .iter()
                .map(|(j, b)| format!("{j}:{b}"))
                .collect::<Vec<_>>()
                .join(","),
            Value::Opaque(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Action<S> {
    Step(S),
    Deliver {
        id: u64,
        from: AgentId,
        label: String,
    },
}

/// Protocol-specific logic driven by the engine.
pub(crate) trait Protocol {
    type Step: Clone;

    fn on_step(
        &mut self,
        eng: &mut Engine<Self::Step>,
        agent: AgentId,
        step: Self::Step,
    ) -> Result<(), ProtocolError>;

    fn on_receive(
        &mut self,
        eng: &mut Engine<Self::Step>,
        agent: AgentId,
        label: &str,
    ) -> Result<(), ProtocolError>;
}

pub(crate) struct Engine<S> {
    pub layout: ProtocolLayout,
    pub prep_time: f64,
    worldlines: BTreeMap<AgentId, Worldline>,
    sched: Scheduler<Action<S>>,
    now: f64,
    store: BTreeMap<String, Value>,
    held: BTreeSet<(AgentId, String)>,
    next_message: u64,
    transcript: Transcript,
    verdicts: [Option<VerdictEntry>; 2],
}

impl<S: Clone> Engine<S> {
    /// Places the agents: `B_c`, `A_c` at `P`; `B_i` at `Q_i`; `A_i` leaving
    /// `P`'s position at the preparation time and arriving at `Q_i` no later
    /// than `t(Q_i)`; verifiers per `placement`.
    pub fn new(
        label: impl Into<String>,
        layout: ProtocolLayout,
        travel_speed: f64,
        placement: VerifierPlacement,
    ) -> Result<Self, ProtocolError> {
        let p = layout.commit_point;
        let prep_time = (0..2)
            .map(|i| {
                let q = layout.unveil_points[i];
                q.t - p.spatial_distance(&q) / travel_speed
            })
            .fold(p.t, f64::min);
        let depart = p.at_time(prep_time);
        let mut worldlines = BTreeMap::new();
        worldlines.insert(AgentId::Bc, Worldline::Static(p));
        worldlines.insert(AgentId::Ac, Worldline::Static(p));
        for i in 0..2 {
            let q = layout.unveil_points[i];
            worldlines.insert(AgentId::bob_unveil(i), Worldline::Static(q));
            worldlines.insert(
                AgentId::unveiler(i),
                Worldline::Travel {
                    depart,
                    destination: q,
                    speed: travel_speed,
                },
            );
            let v = match placement {
                VerifierPlacement::EarliestJoint => earliest_joint_reception(&layout, i)?,
                VerifierPlacement::CommitAgent => p,
                VerifierPlacement::UnveilAgent => q,
            };
            worldlines.insert(AgentId::verifier(i), Worldline::Static(v));
        }
        Ok(Self {
            layout,
            prep_time,
            worldlines,
            sched: Scheduler::new(),
            now: prep_time,
            store: BTreeMap::new(),
            held: BTreeSet::new(),
            next_message: 0,
            transcript: Transcript::new(label),
            verdicts: [None, None],
        })
    }

    pub fn worldline(&self, agent: AgentId) -> &Worldline {
        &self.worldlines[&agent]
    }

    pub fn here(&self, agent: AgentId) -> SpacetimePoint {
        self.worldline(agent).position_at(self.now)
    }

    pub fn schedule_step(&mut self, agent: AgentId, t: f64, step: S) {
        let at = self.worldline(agent).position_at(t);
        self.sched.schedule(agent, at, Action::Step(step));
    }

    pub fn holds(&self, agent: AgentId, label: &str) -> bool {
        self.held.contains(&(agent, label.to_string()))
    }

    pub fn read(&self, agent: AgentId, label: &str) -> Result<&Value, ProtocolError> {
        if !self.holds(agent, label) {
            return Err(ProtocolError::NotHeld {
                agent,
                label: label.to_string(),
            });
        }
        Ok(&self.store[label])
    }

    pub fn read_bits(&self, agent: AgentId, label: &str) -> Result<BitString, ProtocolError> {
        match self.read(agent, label)? {
            Value::Bits(b) => Ok(b.clone()),
            other => Err(ProtocolError::UnexpectedValue {
                label: label.to_string(),
                found: other.render(),
            }),
        }
    }

    pub fn read_outcomes(&self, agent: AgentId, label: &str) -> Result<Outcomes, ProtocolError> {
        match self.read(agent, label)? {
            Value::Outcomes(o) => Ok(o.clone()),
            Value::Bits(b) => Ok(Outcomes::complete(b.clone())),
            other => Err(ProtocolError::UnexpectedValue {
                label: label.to_string(),
                found: other.render(),
            }),
        }
    }

    pub fn read_subset(&self, agent: AgentId, label: &str) -> Result<Vec<usize>, ProtocolError> {
        match self.read(agent, label)? {
            Value::Subset(js) => Ok(js.clone()),
            other => Err(ProtocolError::UnexpectedValue {
                label: label.to_string(),
                found: other.render(),
            }),
        }
    }

    pub fn read_indexed(
        &self,
        agent: AgentId,
        label: &str,
    ) -> Result<Vec<(usize, u8)>, ProtocolError> {
        match self.read(agent, label)? {
            Value::Indexed(v) => Ok(v.clone()),
            other => Err(ProtocolError::UnexpectedValue {
                label: label.to_string(),
                found: other.render(),
            }),
        }
    }

    fn record(
        &mut self,
        agent: AgentId,
        kind: EventKind,
        label: &str,
        peer: Option<AgentId>,
        message: Option<u64>,
        payload: String,
        inputs: &[&str],
    ) -> Result<(), ProtocolError> {
        for input in inputs {
            if !self.holds(agent, input) {
                return Err(ProtocolError::NotHeld {
                    agent,
                    label: input.to_string(),
                });
            }
        }
        let point = self.here(agent);
        self.transcript.events.push(TranscriptEvent {
            agent,
            point,
            kind,
            label: label.to_string(),
            peer,
            message,
            payload,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        });
        Ok(())
    }

    fn bind(&mut self, agent: AgentId, label: &str, value: Value) -> Result<(), ProtocolError> {
        if let Some(existing) = self.store.get(label) {
            if existing != &value {
                return Err(ProtocolError::Relabelled(label.to_string()));
            }
        }
        self.store.insert(label.to_string(), value);
        self.held.insert((agent, label.to_string()));
        Ok(())
    }

    /// Fresh randomness or pre-agreed data entering `agent`'s lab.
    pub fn generate(
        &mut self,
        agent: AgentId,
        label: &str,
        value: Value,
    ) -> Result<(), ProtocolError> {
        self.record(
            agent,
            EventKind::Generate,
            label,
            None,
            None,
            value.render(),
            &[],
        )?;
        self.bind(agent, label, value)
    }

    /// A value derived from held data.
    pub fn compute(
        &mut self,
        agent: AgentId,
        label: &str,
        value: Value,
        inputs: &[&str],
    ) -> Result<(), ProtocolError> {
        self.record(
            agent,
            EventKind::Compute,
            label,
            None,
            None,
            value.render(),
            inputs,
        )?;
        self.bind(agent, label, value)
    }

    /// A device invocation's outputs.
    pub fn measure(
        &mut self,
        agent: AgentId,
        label: &str,
        value: Value,
        inputs: &[&str],
    ) -> Result<(), ProtocolError> {
        self.record(
            agent,
            EventKind::Measure,
            label,
            None,
            None,
            value.render(),
            inputs,
        )?;
        self.bind(agent, label, value)
    }

    /// Sends a held value at light speed; reception is scheduled on the
    /// recipient's worldline.
    pub fn send(&mut self, from: AgentId, to: AgentId, label: &str) -> Result<(), ProtocolError> {
        let payload = self.read(from, label)?.render();
        let id = self.next_message;
        self.next_message += 1;
        self.record(
            from,
            EventKind::Send,
            label,
            Some(to),
            Some(id),
            payload,
            &[label],
        )?;
        let at = deliver(&self.here(from), self.worldline(to));
        self.sched.schedule(
            to,
            at,
            Action::Deliver {
                id,
                from,
                label: label.to_string(),
            },
        );
        Ok(())
    }

    pub fn verdict(
        &mut self,
        agent: AgentId,
        i: usize,
        status: VerdictStatus,
        statistic: Option<f64>,
        inputs: &[&str],
    ) -> Result<(), ProtocolError> {
        let point = self.here(agent);
        let payload = match statistic {
            Some(s) => format!("{status}:{s}"),
            None => status.to_string(),
        };
        self.record(
            agent,
            EventKind::Verdict,
            &format!("verdict{i}"),
            None,
            None,
            payload,
            inputs,
        )?;
        self.verdicts[i] = Some(VerdictEntry {
            status,
            statistic,
            point,
        });
        Ok(())
    }

    pub fn has_verdict(&self, i: usize) -> bool {
        self.verdicts[i].is_some()
    }

    /// Point at which verifier `i` holds both the commitment data from `P`
    /// and the unveiling data from `Q_i`.
    pub fn verdict_point(&self, i: usize) -> SpacetimePoint {
        let w = self.worldline(AgentId::verifier(i));
        let from_p = deliver(&self.layout.commit_point, w);
        let from_q = deliver(&self.layout.unveil_points[i], w);
        w.position_at(from_p.t.max(from_q.t))
    }

    /// Runs the event loop to exhaustion and records `NotUnveiled` for every
    /// bit value without a verdict.
    pub fn run<P: Protocol<Step = S>>(
        mut self,
        protocol: &mut P,
    ) -> Result<(Transcript, Verdict), ProtocolError> {
        while let Some(ev) = self.sched.pop() {
            self.now = ev.sim_time;
            match ev.action {
                Action::Step(step) => protocol.on_step(&mut self, ev.agent, step)?,
                Action::Deliver { id, from, label } => {
                    let value = self.store[&label].clone();
                    self.record(
                        ev.agent,
                        EventKind::Receive,
                        &label,
                        Some(from),
                        Some(id),
                        value.render(),
                        &[],
                    )?;
                    self.held.insert((ev.agent, label.clone()));
                    protocol.on_receive(&mut self, ev.agent, &label)?;
                }
            }
        }
        for i in 0..2 {
            if self.verdicts[i].is_none() {
                let point = self.verdict_point(i);
                self.now = point.t;
                let agent = AgentId::verifier(i);
                let held: Vec<String> = self
                    .held
                    .iter()
                    .filter(|(a, _)| *a == agent)
                    .map(|(_, l)| l.clone())
                    .collect();
                let inputs: Vec<&str> = held.iter().map(String::as_str).collect();
                self.verdict(agent, i, VerdictStatus::NotUnveiled, None, &inputs)?;
            }
        }
        // the closing verdicts may predate the last delivery; restore time order
        self.transcript
            .events
            .sort_by(|a, b| a.point.t.total_cmp(&b.point.t));
        let verdict = Verdict {
            entries: [self.verdicts[0].unwrap(), self.verdicts[1].unwrap()],
        };
        self.transcript.verdict = Some(verdict);
        Ok((self.transcript, verdict))
    }
}
