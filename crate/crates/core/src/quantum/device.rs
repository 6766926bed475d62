//! Untrusted measurement devices.
//!
//! An honest device reproduces singlet statistics. A malicious device runs a
//! small declarative program: an ordered rule list where the first rule whose
//! predicates match decides the output and the memory update. Devices carry
//! mutable memory that survives across protocol runs when a device is reused.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::QuantumError;
use crate::geometry::causal_relation;
use crate::SpacetimePoint;

/// Per-invocation readout noise: with probability `delta` the outcome is
/// either lost (`loss_fraction` of the time) or replaced by a fair coin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub delta: f64,
    #[serde(default = "default_loss_fraction")]
    pub loss_fraction: f64,
}

fn default_loss_fraction() -> f64 {
    0.5
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            delta: 0.0,
            loss_fraction: default_loss_fraction(),
        }
    }

    pub fn new(delta: f64, loss_fraction: f64) -> Result<Self, QuantumError> {
        let m = Self {
            delta,
            loss_fraction,
        };
        m.validate()?;
        Ok(m)
    }

    /// Accepts `0 ≤ δ ≤ 1`; protocol configurations additionally require `δ < 1`.
    pub fn validate(&self) -> Result<(), QuantumError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if unit(self.delta) && unit(self.loss_fraction) {
            Ok(())
        } else {
            Err(QuantumError::InvalidNoise {
                delta: self.delta,
                loss_fraction: self.loss_fraction,
            })
        }
    }
}

/// Named bits a device remembers between invocations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceMemory(BTreeMap<String, u8>);

impl DeviceMemory {
    pub fn get(&self, key: &str) -> Option<u8> {
        self.0.get(key).copied()
    }

    pub fn set(&mut self, key: &str, bit: u8) {
        self.0.insert(key.to_string(), bit & 1);
    }

    pub fn clear(&mut self, key: &str) {
        self.0.remove(key);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Everything a device can observe when it is invoked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviceInput {
    /// Declared setting bit (the `L_j` or `L^i_j` that selects the direction).
    pub setting: u8,
    /// Zero-based index of the pair in the registry.
    pub pair_index: usize,
    /// Number of pairs per block (`N`).
    pub block_size: usize,
    /// Where the invocation happens.
    pub location: SpacetimePoint,
    /// Shared randomness embedded in both devices of this pair at preparation.
    pub hidden: u8,
}

impl DeviceInput {
    /// `0` for pairs `1..N`, `1` for pairs `N+1..2N`.
    pub fn block_index(&self) -> u8 {
        (self.pair_index >= self.block_size) as u8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocationPredicate {
    Any,
    /// Within spacetime distance `radius` of `point` (coincident up to tolerance when `radius` is 0).
    Near {
        point: SpacetimePoint,
        radius: f64,
    },
    NotNear {
        point: SpacetimePoint,
        radius: f64,
    },
}

impl LocationPredicate {
    fn matches(&self, at: &SpacetimePoint) -> bool {
        let near = |point: &SpacetimePoint, radius: f64| {
            let dt = at.t - point.t;
            let dr = at.spatial_distance(point);
            (dt * dt + dr * dr).sqrt() <= radius
                || causal_relation(point, at) == crate::geometry::CausalRelation::Coincident
        };
        match self {
            LocationPredicate::Any => true,
            LocationPredicate::Near { point, radius } => near(point, *radius),
            LocationPredicate::NotNear { point, radius } => !near(point, *radius),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingPredicate {
    Any,
    Equals(u8),
}

/// Which round of a run the invocation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundPredicate {
    Any,
    /// The first pair of a block: the start of a run for this device.
    First,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryPredicate {
    Any,
    IsSet(String),
    IsUnset(String),
    Equals(String, u8),
}

impl MemoryPredicate {
    fn matches(&self, memory: &DeviceMemory) -> bool {
        match self {
            MemoryPredicate::Any => true,
            MemoryPredicate::IsSet(k) => memory.get(k).is_some(),
            MemoryPredicate::IsUnset(k) => memory.get(k).is_none(),
            MemoryPredicate::Equals(k, v) => memory.get(k) == Some(*v & 1),
        }
    }
}

/// What a matching rule outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputExpr {
    /// Behave like an honest singlet measurement.
    Honest,
    Constant(u8),
    Setting,
    NotSetting,
    Hidden,
    /// Which half of the registry the measured pair belongs to.
    BlockIndex,
    /// A remembered bit; honest behaviour when the key is unset.
    Memory(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryUpdate {
    None,
    RecordSetting(String),
    RecordOutput(String),
    RecordBlockIndex(String),
    Set(String, u8),
    Clear(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    #[serde(default = "any_location")]
    pub location: LocationPredicate,
    #[serde(default = "any_setting")]
    pub setting: SettingPredicate,
    #[serde(default = "any_round")]
    pub round: RoundPredicate,
    #[serde(default = "any_memory")]
    pub memory: MemoryPredicate,
    pub output: OutputExpr,
    #[serde(default = "no_update")]
    pub update: MemoryUpdate,
}

fn any_location() -> LocationPredicate {
    LocationPredicate::Any
}
fn any_setting() -> SettingPredicate {
    SettingPredicate::Any
}
fn any_round() -> RoundPredicate {
    RoundPredicate::Any
}
fn any_memory() -> MemoryPredicate {
    MemoryPredicate::Any
}
fn no_update() -> MemoryUpdate {
    MemoryUpdate::None
}

impl Rule {
    pub fn always(output: OutputExpr) -> Self {
        Self {
            location: any_location(),
            setting: any_setting(),
            round: any_round(),
            memory: any_memory(),
            output,
            update: no_update(),
        }
    }

    pub fn at_location(mut self, location: LocationPredicate) -> Self {
        self.location = location;
        self
    }

    pub fn in_first_round(mut self) -> Self {
        self.round = RoundPredicate::First;
        self
    }

    pub fn when_memory(mut self, memory: MemoryPredicate) -> Self {
        self.memory = memory;
        self
    }

    pub fn then_update(mut self, update: MemoryUpdate) -> Self {
        self.update = update;
        self
    }

    fn matches(&self, input: &DeviceInput, memory: &DeviceMemory) -> bool {
        let setting_ok = match self.setting {
            SettingPredicate::Any => true,
            SettingPredicate::Equals(b) => input.setting == b & 1,
        };
        let round_ok = match self.round {
            RoundPredicate::Any => true,
            RoundPredicate::First => {
                input.block_size > 0 && input.pair_index % input.block_size == 0
            }
        };
        setting_ok
            && round_ok
            && self.location.matches(&input.location)
            && self.memory.matches(memory)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "rules")]
pub enum DeviceKind {
    HonestSinglet,
    Malicious(Vec<Rule>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub kind: DeviceKind,
    pub noise: NoiseModel,
    pub memory: DeviceMemory,
}

/// Result of consulting a device program: either a fixed output or a request
/// to fall back to honest singlet sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ProgramOutput {
    Honest,
    Fixed(u8),
}

impl DeviceSpec {
    pub fn honest() -> Self {
        Self {
            kind: DeviceKind::HonestSinglet,
            noise: NoiseModel::noiseless(),
            memory: DeviceMemory::default(),
        }
    }

    pub fn malicious(rules: Vec<Rule>) -> Self {
        Self {
            kind: DeviceKind::Malicious(rules),
            ..Self::honest()
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn is_honest(&self) -> bool {
        matches!(self.kind, DeviceKind::HonestSinglet)
    }

    /// Runs the program's output selection. Memory updates that depend on
    /// the final output are applied by [`DeviceSpec::apply_update`].
    pub(crate) fn select(&self, input: &DeviceInput) -> (ProgramOutput, Option<usize>) {
        let rules = match &self.kind {
            DeviceKind::HonestSinglet => return (ProgramOutput::Honest, None),
            DeviceKind::Malicious(rules) => rules,
        };
        let Some(idx) = rules.iter().position(|r| r.matches(input, &self.memory)) else {
            return (ProgramOutput::Honest, None);
        };
        let out = match &rules[idx].output {
            OutputExpr::Honest => ProgramOutput::Honest,
            OutputExpr::Constant(b) => ProgramOutput::Fixed(b & 1),
            OutputExpr::Setting => ProgramOutput::Fixed(input.setting),
            OutputExpr::NotSetting => ProgramOutput::Fixed(input.setting ^ 1),
            OutputExpr::Hidden => ProgramOutput::Fixed(input.hidden),
            OutputExpr::BlockIndex => ProgramOutput::Fixed(input.block_index()),
            OutputExpr::Memory(k) => match self.memory.get(k) {
                Some(b) => ProgramOutput::Fixed(b),
                None => ProgramOutput::Honest,
            },
        };
        (out, Some(idx))
    }

    pub(crate) fn apply_update(
        &mut self,
        rule: Option<usize>,
        input: &DeviceInput,
        output: Option<u8>,
    ) {
        let DeviceKind::Malicious(rules) = &self.kind else {
            return;
        };
        let Some(update) = rule.map(|i| rules[i].update.clone()) else {
            return;
        };
        match update {
            MemoryUpdate::None => {}
            MemoryUpdate::RecordSetting(k) => self.memory.set(&k, input.setting),
            MemoryUpdate::RecordOutput(k) => match output {
                Some(b) => self.memory.set(&k, b),
                None => self.memory.clear(&k),
            },
            MemoryUpdate::RecordBlockIndex(k) => self.memory.set(&k, input.block_index()),
            MemoryUpdate::Set(k, b) => self.memory.set(&k, b),
            MemoryUpdate::Clear(k) => self.memory.clear(&k),
        }
    }
}

/// Library of adversarial device programs used by the builtin scenarios.
pub mod programs {
    use super::*;

    /// Always outputs `bit`.
    pub fn constant_output(bit: u8) -> DeviceSpec {
        DeviceSpec::malicious(vec![Rule::always(OutputExpr::Constant(bit))])
    }

    /// Outputs the setting it saw on the previous invocation (honest the first time).
    pub fn memoryful() -> DeviceSpec {
        DeviceSpec::malicious(vec![Rule::always(OutputExpr::Memory(
            "last-setting".into(),
        ))
        .then_update(MemoryUpdate::RecordSetting("last-setting".into()))])
    }

    /// Honest everywhere except near `point`, where it reveals which block
    /// of pairs it is measuring.
    pub fn location_conditioned(point: SpacetimePoint, radius: f64) -> DeviceSpec {
        DeviceSpec::malicious(vec![Rule::always(OutputExpr::BlockIndex)
            .at_location(LocationPredicate::Near { point, radius })])
    }

    /// Honest everywhere except near `point`, where it outputs `bit`.
    pub fn constant_at(point: SpacetimePoint, radius: f64, bit: u8) -> DeviceSpec {
        DeviceSpec::malicious(vec![Rule::always(OutputExpr::Constant(bit))
            .at_location(LocationPredicate::Near { point, radius })])
    }

    /// Always reveals the block index of the measured pair.
    pub fn block_leak() -> DeviceSpec {
        DeviceSpec::malicious(vec![Rule::always(OutputExpr::BlockIndex)])
    }

    /// Outputs the pair's shared hidden bit: a local hidden-variable model.
    pub fn hidden_variable() -> DeviceSpec {
        DeviceSpec::malicious(vec![Rule::always(OutputExpr::Hidden)])
    }

    /// Records which block it measured in a run and replays that as its
    /// first output in the next run.
    pub fn block_recorder() -> DeviceSpec {
        let key = "held-block".to_string();
        DeviceSpec::malicious(vec![
            Rule::always(OutputExpr::Memory(key.clone()))
                .in_first_round()
                .when_memory(MemoryPredicate::IsSet(key.clone()))
                .then_update(MemoryUpdate::RecordBlockIndex(key.clone())),
            Rule::always(OutputExpr::Honest)
                .when_memory(MemoryPredicate::IsUnset(key.clone()))
                .then_update(MemoryUpdate::RecordBlockIndex(key)),
        ])
    }
}
