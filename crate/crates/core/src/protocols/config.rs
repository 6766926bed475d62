use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::bitmath::{check_xi, BitString};
use crate::geometry::validate_layout;
use crate::quantum::{canonical_direction_set, NoiseModel};
use crate::{DirectionSet, ProtocolLayout};

/// How the unveilers' setting strings `L⁰`, `L¹` are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChshVariant {
    /// Public, pre-agreed `L⁰` with `L¹` its complement.
    Chsh1,
    /// `B_c` draws `L⁰` in advance and keeps it secret until `Q_i`.
    Chsh2,
    /// Each `B_i` draws `L^i` independently at `Q_i`.
    Chsh3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Chsh(ChshVariant),
    Rccbc,
    /// Two simultaneous runs of a CHSH variant (declining to commit).
    DualRun(ChshVariant),
}

impl Variant {
    pub const CHSH1: Variant = Variant::Chsh(ChshVariant::Chsh1);
    pub const CHSH2: Variant = Variant::Chsh(ChshVariant::Chsh2);
    pub const CHSH3: Variant = Variant::Chsh(ChshVariant::Chsh3);

    pub fn chsh(&self) -> Option<ChshVariant> {
        match *self {
            Variant::Chsh(v) | Variant::DualRun(v) => Some(v),
            Variant::Rccbc => None,
        }
    }
}

impl fmt::Display for ChshVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChshVariant::Chsh1 => "chsh1",
            ChshVariant::Chsh2 => "chsh2",
            ChshVariant::Chsh3 => "chsh3",
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Chsh(v) => write!(f, "{v}"),
            Variant::Rccbc => f.write_str("rccbc"),
            Variant::DualRun(v) => write!(f, "dual-{v}"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chsh = |v: &str| match v {
            "chsh1" => Some(ChshVariant::Chsh1),
            "chsh2" => Some(ChshVariant::Chsh2),
            "chsh3" => Some(ChshVariant::Chsh3),
            _ => None,
        };
        let lower = s.to_ascii_lowercase();
        if lower == "rccbc" {
            return Ok(Variant::Rccbc);
        }
        if let Some(v) = chsh(&lower) {
            return Ok(Variant::Chsh(v));
        }
        if let Some(v) = lower.strip_prefix("dual-").and_then(chsh) {
            return Ok(Variant::DualRun(v));
        }
        Err(format!(
            "unknown variant {s:?} (expected chsh1, chsh2, chsh3, rccbc or dual-chshN)"
        ))
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Where Bob's verifier for bit value `i` sits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifierPlacement {
    /// On the segment `P–Q_i`, at the earliest point holding both broadcasts.
    #[default]
    EarliestJoint,
    /// With `B_c` at `P`'s position.
    CommitAgent,
    /// With `B_i` at `Q_i`'s position.
    UnveilAgent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub variant: Variant,
    pub n: usize,
    /// Security parameter `ξ` of the CHSH variants.
    pub xi: f64,
    /// Distance-check constant `C` of RCCBC.
    pub c_param: f64,
    /// Combined per-pair error and loss rate `δ`.
    pub delta: f64,
    /// Share of `δ` that manifests as loss rather than a random outcome.
    pub loss_fraction: f64,
    pub layout: ProtocolLayout,
    /// The pre-agreed `L⁰` of CHSH1; drawn from the seed tree when absent.
    pub l0: Option<BitString>,
    pub seed: u64,
    pub directions: DirectionSet,
    /// Speed of `A_0`, `A_1` on their way to `Q_0`, `Q_1`, as a fraction of `c`.
    pub travel_speed: f64,
    pub verifier: VerifierPlacement,
}

impl ProtocolConfig {
    pub fn new(variant: Variant, n: usize) -> Self {
        Self {
            variant,
            n,
            xi: 0.05,
            c_param: 1.0,
            delta: 0.0,
            loss_fraction: 0.5,
            layout: ProtocolLayout::symmetric(1.0, 0.5),
            l0: None,
            seed: 0,
            directions: canonical_direction_set(),
            travel_speed: 0.9,
            verifier: VerifierPlacement::EarliestJoint,
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_c(mut self, c_param: f64) -> Self {
        self.c_param = c_param;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_layout(mut self, layout: ProtocolLayout) -> Self {
        self.layout = layout;
        self
    }

    pub fn with_l0(mut self, l0: BitString) -> Self {
        self.l0 = Some(l0);
        self
    }

    pub fn pair_noise(&self) -> NoiseModel {
        NoiseModel {
            delta: self.delta,
            loss_fraction: self.loss_fraction,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |field: &'static str, reason: String| {
            Err(ProtocolError::InvalidConfig { field, reason })
        };
        if self.n == 0 {
            return bad("n", "N must be positive".into());
        }
        match self.variant {
            Variant::Rccbc => {
                if self.n % 2 != 0 {
                    return bad("n", format!("RCCBC needs an even N, got {}", self.n));
                }
                if !(self.c_param > 0.0 && self.c_param.is_finite()) {
                    return bad("c", format!("C must be positive, got {}", self.c_param));
                }
            }
            _ => {
                check_xi(self.xi).map_err(|e| ProtocolError::InvalidConfig {
                    field: "xi",
                    reason: e.to_string(),
                })?;
                self.directions
                    .validate()
                    .map_err(|e| ProtocolError::InvalidConfig {
                        field: "directions",
                        reason: e.to_string(),
                    })?;
            }
        }
        if !(0.0..1.0).contains(&self.delta) {
            return bad(
                "delta",
                format!("delta must lie in [0, 1), got {}", self.delta),
            );
        }
        if !(0.0..=1.0).contains(&self.loss_fraction) {
            return bad(
                "loss_fraction",
                format!(
                    "loss fraction must lie in [0, 1], got {}",
                    self.loss_fraction
                ),
            );
        }
        if !(self.travel_speed > 0.0 && self.travel_speed < 1.0) {
            return bad(
                "travel_speed",
                format!("travel speed must lie in (0, 1), got {}", self.travel_speed),
            );
        }
        if let Some(l0) = &self.l0 {
            if l0.len() != self.n {
                return bad(
                    "l0",
                    format!("L0 has length {}, expected {}", l0.len(), self.n),
                );
            }
        }
        validate_layout(&self.layout).map_err(|e| ProtocolError::InvalidConfig {
            field: "layout",
            reason: e.to_string(),
        })?;
        Ok(())
    }
}
