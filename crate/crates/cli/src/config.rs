//! Scenario files: TOML, every field optional, layered over a builtin.
//!
//! ```toml
//! base = "honest-chsh1"      # builtin to start from
//! name = "my-run"
//! repeat = 50
//! seed = 7
//!
//! [protocol]
//! variant = "chsh2"          # chsh1 | chsh2 | chsh3 | rccbc | dual-chshN
//! n = 2000
//! xi = 0.05
//!
//! [layout]                   # points as [x, y, z, t]
//! P = [0.0, 0.0, 0.0, 0.0]
//! Q0 = [-1.0, 0.0, 0.0, 0.5]
//! Q1 = [1.0, 0.0, 0.0, 0.5]
//!
//! [behavior]
//! kind = "honest"
//! b = 1
//!
//! [devices.committer]
//! program = "memoryful"
//! ```
//!
//! Without `base`, `protocol.variant` and `protocol.n` are required and Alice
//! commits a random bit honestly.

use anyhow::{anyhow, bail, Context, Result};
use rqbc::harness::{builtin, AliceBehavior, DevicePrograms, Scenario, BUILTIN_NAMES};
use rqbc::protocols::{ProtocolConfig, Variant, VerifierPlacement};
use rqbc::{BitString, ProtocolLayout, SpacetimePoint};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    pub name: Option<String>,
    pub repeat: Option<usize>,
    #[serde(default, with = "opt_seed")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub protocol: ProtocolSection,
    pub layout: Option<LayoutSection>,
    pub behavior: Option<AliceBehavior>,
    pub devices: Option<DevicePrograms>,
    pub pretest_offset: Option<[f64; 4]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub variant: Option<Variant>,
    pub n: Option<usize>,
    pub xi: Option<f64>,
    pub c: Option<f64>,
    pub delta: Option<f64>,
    pub loss_fraction: Option<f64>,
    pub travel_speed: Option<f64>,
    pub verifier: Option<VerifierPlacement>,
    pub l0: Option<BitString>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSection {
    #[serde(rename = "P")]
    pub p: [f64; 4],
    #[serde(rename = "Q0")]
    pub q0: [f64; 4],
    #[serde(rename = "Q1")]
    pub q1: [f64; 4],
}

fn point(c: [f64; 4]) -> SpacetimePoint {
    SpacetimePoint::new(c[0], c[1], c[2], c[3])
}

fn coords(p: &SpacetimePoint) -> [f64; 4] {
    [p.x, p.y, p.z, p.t]
}

impl LayoutSection {
    pub fn to_layout(self) -> ProtocolLayout {
        let (p, q0, q1) = (point(self.p), point(self.q0), point(self.q1));
        ProtocolLayout {
            commit_point: p,
            unveil_points: [q0, q1],
            distance: p.spatial_distance(&q0).max(p.spatial_distance(&q1)),
        }
    }

    pub fn from_layout(l: &ProtocolLayout) -> Self {
        Self {
            p: coords(&l.commit_point),
            q0: coords(&l.unveil_points[0]),
            q1: coords(&l.unveil_points[1]),
        }
    }
}

/// Parses a scenario file. A full run report is accepted too, in which case
/// its `[scenario]` table is used.
pub fn parse(text: &str) -> Result<ScenarioFile> {
    let table: toml::Table = toml::from_str(text)?;
    if let Some(toml::Value::Table(inner)) = table.get("scenario") {
        return Ok(ScenarioFile::deserialize(inner.clone()).context("in the [scenario] table")?);
    }
    Ok(toml::from_str(text)?)
}

impl ScenarioFile {
    /// The echo of a resolved scenario; parsing it back gives the same scenario.
    pub fn from_scenario(s: &Scenario) -> Self {
        let c = &s.config;
        Self {
            base: None,
            name: Some(s.name.clone()),
            repeat: Some(s.repeat),
            seed: Some(s.seed),
            protocol: ProtocolSection {
                variant: Some(c.variant),
                n: Some(c.n),
                xi: Some(c.xi),
                c: Some(c.c_param),
                delta: Some(c.delta),
                loss_fraction: Some(c.loss_fraction),
                travel_speed: Some(c.travel_speed),
                verifier: Some(c.verifier),
                l0: c.l0.clone(),
            },
            layout: Some(LayoutSection::from_layout(&c.layout)),
            behavior: Some(s.behavior.clone()),
            devices: Some(s.devices.clone()),
            pretest_offset: s.pretest_offset.as_ref().map(coords),
        }
    }

    /// Resolves against `base` (or defaults). The seed is left as found;
    /// `seed_given` reports whether anything set it.
    pub fn resolve(&self) -> Result<(Scenario, bool)> {
        let base = match &self.base {
            Some(name) => Some(builtin(name).ok_or_else(|| {
                anyhow!(
                    "unknown base scenario {name:?}; builtins are {}",
                    BUILTIN_NAMES.join(", ")
                )
            })?),
            None => None,
        };
        let seed_given = self.seed.is_some() || base.is_some();
        let p = &self.protocol;
        let mut s = match base {
            Some(s) => s,
            None => {
                let Some(variant) = p.variant else {
                    bail!("protocol.variant is required without a base scenario");
                };
                let Some(n) = p.n else {
                    bail!("protocol.n is required without a base scenario");
                };
                Scenario {
                    name: self
                        .name
                        .clone()
                        .unwrap_or_else(|| format!("custom-{variant}")),
                    config: ProtocolConfig::new(variant, n),
                    behavior: AliceBehavior::Honest {
                        b: None,
                        unveil: [true, true],
                        disciplined: true,
                    },
                    devices: DevicePrograms::default(),
                    repeat: 1,
                    seed: 0,
                    pretest_offset: None,
                }
            }
        };
        let c = &mut s.config;
        if let Some(v) = p.variant {
            c.variant = v;
        }
        if let Some(n) = p.n {
            c.n = n;
        }
        if let Some(x) = p.xi {
            c.xi = x;
        }
        if let Some(x) = p.c {
            c.c_param = x;
        }
        if let Some(x) = p.delta {
            c.delta = x;
        }
        if let Some(x) = p.loss_fraction {
            c.loss_fraction = x;
        }
        if let Some(x) = p.travel_speed {
            c.travel_speed = x;
        }
        if let Some(x) = p.verifier {
            c.verifier = x;
        }
        if let Some(l0) = &p.l0 {
            c.l0 = Some(l0.clone());
        }
        if let Some(l) = self.layout {
            c.layout = l.to_layout();
        }
        if let Some(name) = &self.name {
            s.name = name.clone();
        }
        if let Some(r) = self.repeat {
            s.repeat = r;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(b) = &self.behavior {
            s.behavior = b.clone();
        }
        if let Some(d) = &self.devices {
            s.devices = d.clone();
        }
        if let Some(o) = self.pretest_offset {
            s.pretest_offset = Some(point(o));
        }
        Ok((s, seed_given))
    }
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` are written
/// as decimal strings. Either form is read back.
pub mod seed {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*v) {
            Ok(i) => s.serialize_i64(i),
            Err(_) => s.collect_str(v),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

mod opt_seed {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    struct Wrap(#[serde(with = "super::seed")] u64);

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => super::seed::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            let text = toml::to_string(&ScenarioFile::from_scenario(&s)).unwrap();
            let (back, seeded) = parse(&text).unwrap().resolve().unwrap();
            assert!(seeded);
            assert_eq!(back, s, "{name}:\n{text}");
        }
    }

    #[test]
    fn large_seeds_survive_toml() {
        let mut s = builtin("honest-chsh2").unwrap();
        s.seed = u64::MAX - 3;
        let text = toml::to_string(&ScenarioFile::from_scenario(&s)).unwrap();
        assert!(text.contains("seed = \"18446744073709551612\""), "{text}");
        assert_eq!(
            parse(&text).unwrap().resolve().unwrap().0.seed,
            u64::MAX - 3
        );
        assert_eq!(
            parse("seed = 5\nbase = \"honest-chsh2\"").unwrap().seed,
            Some(5)
        );
    }

    #[test]
    fn base_with_overrides() {
        let f = parse("base = \"honest-rccbc\"\nrepeat = 3\n[protocol]\nc = 0.5\n").unwrap();
        let (s, _) = f.resolve().unwrap();
        assert_eq!(s.config.variant, Variant::Rccbc);
        assert_eq!((s.repeat, s.config.c_param, s.config.n), (3, 0.5, 64));
    }

    #[test]
    fn unknown_field_is_named() {
        let err = parse("[protocol]\nvariant = \"chsh1\"\nnn = 4\n").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("nn") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn missing_variant_without_base() {
        let err = parse("[protocol]\nn = 4\n").unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("protocol.variant"));
    }
}
