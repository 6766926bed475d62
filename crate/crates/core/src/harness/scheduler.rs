use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{causal_relation, CausalRelation};
use crate::SpacetimePoint;

/// Alice's agents `A_c`, `A_0`, `A_1`, Bob's agents `B_c`, `B_0`, `B_1`, and
/// Bob's verifiers `V_0`, `V_1` that compute verdicts.
///
/// The declaration order is the tie-break order of the scheduler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgentId {
    Bc,
    Ac,
    B0,
    B1,
    A0,
    A1,
    V0,
    V1,
}

impl AgentId {
    pub const ALL: [AgentId; 8] = [
        AgentId::Bc,
        AgentId::Ac,
        AgentId::B0,
        AgentId::B1,
        AgentId::A0,
        AgentId::A1,
        AgentId::V0,
        AgentId::V1,
    ];

    pub fn unveiler(i: usize) -> Self {
        [AgentId::A0, AgentId::A1][i & 1]
    }

    pub fn bob_unveil(i: usize) -> Self {
        [AgentId::B0, AgentId::B1][i & 1]
    }

    pub fn verifier(i: usize) -> Self {
        [AgentId::V0, AgentId::V1][i & 1]
    }

    pub fn is_bob(self) -> bool {
        !matches!(self, AgentId::Ac | AgentId::A0 | AgentId::A1)
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentId::Bc => "B_c",
            AgentId::Ac => "A_c",
            AgentId::B0 => "B_0",
            AgentId::B1 => "B_1",
            AgentId::A0 => "A_0",
            AgentId::A1 => "A_1",
            AgentId::V0 => "V_0",
            AgentId::V1 => "V_1",
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown agent {s:?}"))
    }
}

/// Spatial trajectory of an agent: static, or a single straight journey at
/// constant speed below `c` starting at `depart`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Worldline {
    Static(SpacetimePoint),
    Travel {
        depart: SpacetimePoint,
        destination: SpacetimePoint,
        speed: f64,
    },
}

impl Worldline {
    /// The agent's event at coordinate time `t`.
    pub fn position_at(&self, t: f64) -> SpacetimePoint {
        match *self {
            Worldline::Static(p) => p.at_time(t),
            Worldline::Travel {
                depart,
                destination,
                speed,
            } => {
                let length = depart.spatial_distance(&destination);
                if t <= depart.t || length == 0.0 {
                    return depart.at_time(t);
                }
                let travelled = ((t - depart.t) * speed).min(length);
                let f = travelled / length;
                SpacetimePoint::new(
                    depart.x + (destination.x - depart.x) * f,
                    depart.y + (destination.y - depart.y) * f,
                    depart.z + (destination.z - depart.z) * f,
                    t,
                )
            }
        }
    }

    /// Coordinate time at which a travelling agent arrives; static agents are always there.
    pub fn arrival_time(&self) -> f64 {
        match *self {
            Worldline::Static(_) => f64::NEG_INFINITY,
            Worldline::Travel {
                depart,
                destination,
                speed,
            } => depart.t + depart.spatial_distance(&destination) / speed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CausalityFault {
    #[error("reception demanded at {at} is not in the causal future of the emission at {from} ({relation:?})")]
    Unreachable {
        from: SpacetimePoint,
        at: SpacetimePoint,
        relation: CausalRelation,
    },
    #[error("{agent} is not at {at}")]
    NotOnWorldline { agent: AgentId, at: SpacetimePoint },
}

/// Earliest event on `recipient` reached by a light signal emitted at `from`.
pub fn deliver(from: &SpacetimePoint, recipient: &Worldline) -> SpacetimePoint {
    match recipient {
        Worldline::Static(p) => p.at_time(from.t + from.spatial_distance(p)),
        Worldline::Travel { .. } => {
            // t − t_from − |r(t) − r_from| is strictly increasing for speed < 1
            let gap = |t: f64| t - from.t - recipient.position_at(t).spatial_distance(from);
            let mut lo = from.t;
            let mut hi = from.t + 1.0;
            while gap(hi) < 0.0 {
                hi = from.t + 2.0 * (hi - from.t);
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if gap(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            recipient.position_at(hi)
        }
    }
}

/// Reception at a point the protocol logic demands; faults unless the point
/// lies in the causal future of the emission.
pub fn deliver_at(
    from: &SpacetimePoint,
    at: &SpacetimePoint,
) -> Result<SpacetimePoint, CausalityFault> {
    let relation = causal_relation(from, at);
    if relation.is_reachable() {
        Ok(*at)
    } else {
        Err(CausalityFault::Unreachable {
            from: *from,
            at: *at,
            relation,
        })
    }
}

/// One pending event.
#[derive(Clone, Debug)]
pub struct ScheduledEvent<A> {
    pub sim_time: f64,
    pub location: SpacetimePoint,
    pub agent: AgentId,
    pub seq: u64,
    pub action: A,
}

impl<A> ScheduledEvent<A> {
    fn key(&self) -> (f64, AgentId, u64) {
        (self.sim_time, self.agent, self.seq)
    }
}

impl<A> PartialEq for ScheduledEvent<A> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<A> Eq for ScheduledEvent<A> {}

impl<A> PartialOrd for ScheduledEvent<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<A> Ord for ScheduledEvent<A> {
    // reversed: BinaryHeap is a max-heap and we pop the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        let (ta, aa, sa) = self.key();
        let (tb, ab, sb) = other.key();
        tb.total_cmp(&ta).then(ab.cmp(&aa)).then(sb.cmp(&sa))
    }
}

/// Event queue ordered by `(sim_time, agent, sequence number)`.
#[derive(Debug)]
pub struct Scheduler<A> {
    heap: BinaryHeap<ScheduledEvent<A>>,
    next_seq: u64,
    now: f64,
}

impl<A> Default for Scheduler<A> {
    fn default() -> Self {
        Self {
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: f64::NEG_INFINITY,
        }
    }
}

impl<A> Scheduler<A> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queues `action` for `agent` at `location`; events in the past of the
    /// current simulated time are rejected.
    pub fn schedule(&mut self, agent: AgentId, location: SpacetimePoint, action: A) -> u64 {
        assert!(
            location.t >= self.now,
            "event at t = {} scheduled after the clock reached {}",
            location.t,
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(ScheduledEvent {
            sim_time: location.t,
            location,
            agent,
            seq,
            action,
        });
        seq
    }

    pub fn pop(&mut self) -> Option<ScheduledEvent<A>> {
        let ev = self.heap.pop()?;
        self.now = ev.sim_time;
        Some(ev)
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
