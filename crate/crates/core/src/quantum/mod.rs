//! Singlet statistics and the untrusted-device abstraction.

pub mod device;
mod directions;
mod registry;

pub use device::{
    programs, DeviceInput, DeviceKind, DeviceMemory, DeviceSpec, LocationPredicate,
    MemoryPredicate, MemoryUpdate, NoiseModel, OutputExpr, RoundPredicate, Rule, SettingPredicate,
};
pub use directions::{
    canonical_direction_set, deterministic_round_win_probability, direction_for_bit,
    honest_round_win_probability, per_pair_win_probabilities, singlet_joint_distribution,
    Direction, DirectionSet, Role,
};
pub use registry::{EntangledRegistry, MeasureRequest, PairFault, RoundRecord, Side};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum QuantumError {
    #[error("invalid direction set: {0}")]
    InvalidDirectionSet(String),
    #[error(
        "noise parameters must lie in [0, 1] (delta = {delta}, loss fraction = {loss_fraction})"
    )]
    InvalidNoise { delta: f64, loss_fraction: f64 },
    #[error("side {side:?} of pair {pair_index} was already measured")]
    AlreadyMeasured { pair_index: usize, side: Side },
    #[error("pair index {pair_index} out of range for {len} pairs")]
    IndexOutOfRange { pair_index: usize, len: usize },
}
