//! The commitment protocols run end to end on a causality-enforcing engine.

pub mod chsh;
mod config;
pub mod dual;
pub(crate) mod engine;
mod outcomes;
pub mod rccbc;
pub mod transcript;

pub use chsh::{
    agreed_l0, commit, prepare, run_chsh_variant, unveil, verify_chsh, AliceConduct, AliceDevices,
    ChshCheck, CommitState, Decisions, ProtocolRun,
};
pub use config::{ChshVariant, ProtocolConfig, Variant, VerifierPlacement};
pub use dual::{run_dual, DualIntent, DualRun};
pub use outcomes::Outcomes;
pub use rccbc::{run_rccbc, verify_rccbc, RccbcCheck};
pub use transcript::{
    EventKind, Transcript, TranscriptEvent, TranscriptParseError, Verdict, VerdictEntry,
    VerdictStatus,
};

use crate::harness::{AgentId, CausalityFault};
use crate::{BitmathError, InvalidLayout, QuantumError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error(transparent)]
    Bitmath(#[from] BitmathError),
    #[error(transparent)]
    Layout(#[from] InvalidLayout),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Causality(#[from] CausalityFault),
    #[error("the commitment has already been made")]
    AlreadyCommitted,
    #[error("unveiler {0} has already unveiled")]
    AlreadyUnveiled(usize),
    #[error("{what} has length {found}, expected {expected}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{agent} does not hold `{label}`")]
    NotHeld { agent: AgentId, label: String },
    #[error("`{label}` holds an unexpected value {found:?}")]
    UnexpectedValue { label: String, found: String },
    #[error("`{0}` bound to two different values")]
    Relabelled(String),
    #[error(transparent)]
    Adversary(#[from] crate::adversary::AdversaryError),
    #[error("operation not available for variant {0}")]
    VariantMismatch(String),
}
