//! Causally ordered run records and their line format.
//!
//! ```text
//! RUN      <label>
//! EVENT    <t> <agent> <x> <y> <z> <kind> <label> <peer> <msg> <payload> <inputs>
//! VERDICT  <i> <status> <statistic> <x> <y> <z> <t>
//! ```
//!
//! Fields are tab separated. `-` marks an absent peer, message id or
//! statistic; `.` marks an empty payload or input list. Inputs are comma
//! separated labels. Reals use the shortest representation that parses back
//! to the same value, so a rendered transcript is byte-stable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::harness::AgentId;
use crate::SpacetimePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// Fresh randomness or pre-agreed data entering an agent's lab.
    Generate,
    /// A value computed from data the agent already holds.
    Compute,
    /// A device invocation.
    Measure,
    Send,
    Receive,
    Verdict,
}

impl EventKind {
    const ALL: [EventKind; 6] = [
        EventKind::Generate,
        EventKind::Compute,
        EventKind::Measure,
        EventKind::Send,
        EventKind::Receive,
        EventKind::Verdict,
    ];

    fn name(self) -> &'static str {
        match self {
            EventKind::Generate => "GENERATE",
            EventKind::Compute => "COMPUTE",
            EventKind::Measure => "MEASURE",
            EventKind::Send => "SEND",
            EventKind::Receive => "RECEIVE",
            EventKind::Verdict => "VERDICT",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptEvent {
    pub agent: AgentId,
    pub point: SpacetimePoint,
    pub kind: EventKind,
    pub label: String,
    /// Recipient of a send, sender of a receive.
    pub peer: Option<AgentId>,
    /// Pairs a receive with its send.
    pub message: Option<u64>,
    pub payload: String,
    /// Labels of the data this event depends on.
    pub inputs: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictStatus {
    Accepted,
    Rejected,
    NotUnveiled,
}

impl VerdictStatus {
    fn name(self) -> &'static str {
        match self {
            VerdictStatus::Accepted => "accepted",
            VerdictStatus::Rejected => "rejected",
            VerdictStatus::NotUnveiled => "not-unveiled",
        }
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VerdictStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            VerdictStatus::Accepted,
            VerdictStatus::Rejected,
            VerdictStatus::NotUnveiled,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| format!("unknown verdict status {s:?}"))
    }
}

/// Bob's decision for one bit value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub status: VerdictStatus,
    /// CHSH game score for the CHSH variants, `d(S⁰_J, S¹_J)` for RCCBC.
    pub statistic: Option<f64>,
    pub point: SpacetimePoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub entries: [VerdictEntry; 2],
}

impl Verdict {
    pub fn status(&self, i: usize) -> VerdictStatus {
        self.entries[i & 1].status
    }

    pub fn accepted(&self, i: usize) -> bool {
        self.status(i) == VerdictStatus::Accepted
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub label: String,
    pub events: Vec<TranscriptEvent>,
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("transcript line {line}: {reason}")]
pub struct TranscriptParseError {
    pub line: usize,
    pub reason: String,
}

fn or_dot(items: &[String]) -> String {
    if items.is_empty() {
        ".".to_string()
    } else {
        items.join(",")
    }
}

impl fmt::Display for TranscriptEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.point;
        let peer = self.peer.map_or("-", |a| a.name());
        let msg = self.message.map_or("-".to_string(), |m| m.to_string());
        let payload = if self.payload.is_empty() {
            "."
        } else {
            &self.payload
        };
        write!(
            f,
            "EVENT\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.t,
            self.agent,
            p.x,
            p.y,
            p.z,
            self.kind.name(),
            self.label,
            peer,
            msg,
            payload,
            or_dot(&self.inputs)
        )
    }
}

impl Transcript {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            events: Vec::new(),
            verdict: None,
        }
    }

    /// The line-format rendering, one line per record, newline terminated.
    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, TranscriptParseError> {
        text.parse()
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RUN\t{}", self.label)?;
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        if let Some(v) = &self.verdict {
            for (i, e) in v.entries.iter().enumerate() {
                let stat = e.statistic.map_or("-".to_string(), |s| s.to_string());
                writeln!(
                    f,
                    "VERDICT\t{i}\t{}\t{stat}\t{}\t{}\t{}\t{}",
                    e.status, e.point.x, e.point.y, e.point.z, e.point.t
                )?;
            }
        }
        Ok(())
    }
}

impl FromStr for Transcript {
    type Err = TranscriptParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut transcript: Option<Transcript> = None;
        let mut verdicts: Vec<(usize, VerdictEntry)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |reason: String| TranscriptParseError { line, reason };
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            let real = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(format!("bad number {s:?}")))
            };
            match fields[0] {
                "RUN" => {
                    if transcript.is_some() {
                        return Err(err("second RUN header".into()));
                    }
                    transcript = Some(Transcript::new(fields.get(1).copied().unwrap_or("")));
                }
                "EVENT" => {
                    let t = transcript
                        .as_mut()
                        .ok_or_else(|| err("EVENT before RUN".into()))?;
                    if fields.len() != 12 {
                        return Err(err(format!("expected 12 fields, found {}", fields.len())));
                    }
                    let kind = EventKind::ALL
                        .into_iter()
                        .find(|k| k.name() == fields[6])
                        .ok_or_else(|| err(format!("unknown event kind {:?}", fields[6])))?;
                    let peer = match fields[8] {
                        "-" => None,
                        s => Some(s.parse::<AgentId>().map_err(err)?),
                    };
                    let message = match fields[9] {
                        "-" => None,
                        s => Some(
                            s.parse::<u64>()
                                .map_err(|_| err(format!("bad message id {s:?}")))?,
                        ),
                    };
                    let payload = match fields[10] {
                        "." => String::new(),
                        s => s.to_string(),
                    };
                    let inputs = match fields[11] {
                        "." => Vec::new(),
                        s => s.split(',').map(str::to_string).collect(),
                    };
                    t.events.push(TranscriptEvent {
                        agent: fields[2].parse::<AgentId>().map_err(err)?,
                        point: SpacetimePoint::new(
                            real(fields[3])?,
                            real(fields[4])?,
                            real(fields[5])?,
                            real(fields[1])?,
                        ),
                        kind,
                        label: fields[7].to_string(),
                        peer,
                        message,
                        payload,
                        inputs,
                    });
                }
                "VERDICT" => {
                    if fields.len() != 8 {
                        return Err(err(format!("expected 8 fields, found {}", fields.len())));
                    }
                    let i = match fields[1] {
                        "0" => 0,
                        "1" => 1,
                        s => return Err(err(format!("bad bit value {s:?}"))),
                    };
                    let statistic = match fields[3] {
                        "-" => None,
                        s => Some(real(s)?),
                    };
                    verdicts.push((
                        i,
                        VerdictEntry {
                            status: fields[2].parse().map_err(err)?,
                            statistic,
                            point: SpacetimePoint::new(
                                real(fields[4])?,
                                real(fields[5])?,
                                real(fields[6])?,
                                real(fields[7])?,
                            ),
                        },
                    ));
                }
                other => return Err(err(format!("unknown record type {other:?}"))),
            }
        }
        let mut transcript = transcript.ok_or(TranscriptParseError {
            line: 0,
            reason: "missing RUN header".into(),
        })?;
        if !verdicts.is_empty() {
            let mut entries = [None, None];
            for (i, e) in verdicts {
                entries[i] = Some(e);
            }
            match entries {
                [Some(a), Some(b)] => transcript.verdict = Some(Verdict { entries: [a, b] }),
                _ => {
                    return Err(TranscriptParseError {
                        line: 0,
                        reason: "verdict records must cover both bit values".into(),
                    })
                }
            }
        }
        Ok(transcript)
    }
}
