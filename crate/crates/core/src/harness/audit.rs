//! Static check that a transcript respects secure-lab isolation and light
//! speed: every value an agent uses was generated, computed or measured by
//! that agent, or arrived in a message whose emission point causally
//! precedes its reception.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::AgentId;
use crate::geometry::{causal_relation, CausalRelation};
use crate::protocols::{EventKind, Transcript};

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    /// A receive with no send carrying that message id.
    UnmatchedReceive,
    /// A receive whose emission point cannot reach the reception point.
    Acausal(CausalRelation),
    /// Sender, label or payload of a receive disagree with its send.
    Tampered(String),
    /// An input not held by the agent when the event happened.
    NotHeld(String),
    DuplicateMessage,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Position of the offending event in the transcript.
    pub event: usize,
    pub agent: AgentId,
    pub label: String,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "event {} ({} `{}`): ",
            self.event, self.agent, self.label
        )?;
        match &self.kind {
            ViolationKind::UnmatchedReceive => f.write_str("received without a matching send"),
            ViolationKind::Acausal(rel) => write!(f, "reception is {rel:?} from emission"),
            ViolationKind::Tampered(what) => write!(f, "{what} differs from the send"),
            ViolationKind::NotHeld(input) => write!(f, "uses `{input}` before holding it"),
            ViolationKind::DuplicateMessage => f.write_str("message id delivered twice"),
        }
    }
}

/// Audits one transcript; `Ok(())` when no violation is found.
pub fn audit_no_signalling(transcript: &Transcript) -> Result<(), Vec<Violation>> {
    let events = &transcript.events;
    let mut sends = BTreeMap::new();
    for (k, e) in events.iter().enumerate() {
        if e.kind == EventKind::Send {
            if let Some(id) = e.message {
                sends.entry(id).or_insert(k);
            }
        }
    }
    let mut violations = Vec::new();
    let mut held: BTreeSet<(AgentId, &str)> = BTreeSet::new();
    let mut delivered = BTreeSet::new();
    for (k, e) in events.iter().enumerate() {
        let mut flag = |kind| {
            violations.push(Violation {
                event: k,
                agent: e.agent,
                label: e.label.clone(),
                kind,
            })
        };
        for input in &e.inputs {
            if !held.contains(&(e.agent, input.as_str())) {
                flag(ViolationKind::NotHeld(input.clone()));
            }
        }
        match e.kind {
            EventKind::Receive => {
                let Some(&s) = e.message.and_then(|id| sends.get(&id)) else {
                    flag(ViolationKind::UnmatchedReceive);
                    continue;
                };
                if !delivered.insert(e.message) {
                    flag(ViolationKind::DuplicateMessage);
                }
                let send = &events[s];
                if s > k {
                    flag(ViolationKind::Acausal(causal_relation(
                        &send.point,
                        &e.point,
                    )));
                } else {
                    let rel = causal_relation(&send.point, &e.point);
                    if !rel.is_reachable() {
                        flag(ViolationKind::Acausal(rel));
                    }
                }
                if send.peer != Some(e.agent) || e.peer != Some(send.agent) {
                    flag(ViolationKind::Tampered("addressing".into()));
                }
                if send.label != e.label {
                    flag(ViolationKind::Tampered("label".into()));
                }
                if send.payload != e.payload {
                    flag(ViolationKind::Tampered("payload".into()));
                }
                held.insert((e.agent, e.label.as_str()));
            }
            EventKind::Generate | EventKind::Compute | EventKind::Measure => {
                held.insert((e.agent, e.label.as_str()));
            }
            EventKind::Send | EventKind::Verdict => {}
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
