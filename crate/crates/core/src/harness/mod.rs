//! Discrete-event execution, seeding, scenarios and audits.

mod audit;
mod hiding;
mod scenario;
mod scheduler;
mod seeds;

pub use audit::{audit_no_signalling, Violation, ViolationKind};
pub use hiding::{estimate_hiding_advantage, two_sample_tv, HidingEstimate};
pub use scenario::{
    bob_commit_view, builtin, builtins, run_scenario, AliceBehavior, DeviceProgram, DevicePrograms,
    Scenario, ScenarioOutcome, ScenarioSummary, Site, TrialOutcome, BUILTIN_NAMES,
};
pub use scheduler::{
    deliver, deliver_at, AgentId, CausalityFault, ScheduledEvent, Scheduler, Worldline,
};
pub use seeds::{fnv1a, splitmix64, RunStreams, SeedNode};

use crate::{AdversaryError, ProtocolError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("label {label} has {found} samples, at least 2 are needed")]
    InsufficientSamples { label: usize, found: usize },
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}
