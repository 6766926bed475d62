use rand::Rng;
use serde::{Deserialize, Serialize};

use super::device::{DeviceInput, DeviceSpec, NoiseModel, ProgramOutput};
use super::directions::Direction;
use super::QuantumError;
use crate::SpacetimePoint;

/// Half of a pair: `a` stays with the committer, `b` travels to an unveiler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    fn other(self) -> Self {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Preparation or transmission fault of a whole pair, drawn once at preparation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairFault {
    None,
    /// Neither side produces a usable outcome.
    Lost,
    /// Both sides produce independent fair coins.
    Decohered,
}

#[derive(Clone, Copy, Debug, Default)]
struct SideRecord {
    consumed: bool,
    /// Raw singlet outcome and its angle, recorded only for honest sampling so
    /// that the partner can be conditioned on it.
    raw: Option<(u8, f64)>,
}

#[derive(Clone, Debug)]
struct PairState {
    hidden: u8,
    fault: PairFault,
    sides: [SideRecord; 2],
}

/// What the measuring agent asks of its device for one pair.
#[derive(Clone, Copy, Debug)]
pub struct MeasureRequest {
    pub direction: Direction<f64>,
    pub setting: u8,
    /// Complement honest outcomes (the unveiler's labelling convention).
    pub flip_outcome: bool,
    pub location: SpacetimePoint,
}

/// The `2N` prepared pairs and their measurement bookkeeping.
///
/// The first side measured samples a uniform marginal; the second samples the
/// singlet conditional on the first side's raw outcome. Each side of each
/// pair can be measured once.
#[derive(Clone, Debug)]
pub struct EntangledRegistry {
    pairs: Vec<PairState>,
    block_size: usize,
}

impl EntangledRegistry {
    /// Prepares `2 * block_size` pairs. `pair_noise` assigns per-pair faults:
    /// with probability `delta` a pair is lost (`loss_fraction`) or decohered.
    pub fn prepare<R: Rng + ?Sized>(
        block_size: usize,
        pair_noise: &NoiseModel,
        rng: &mut R,
    ) -> Self {
        let pairs = (0..2 * block_size)
            .map(|_| {
                let hidden = rng.random::<bool>() as u8;
                let fault = if pair_noise.delta > 0.0 && rng.random_bool(pair_noise.delta) {
                    if rng.random_bool(pair_noise.loss_fraction) {
                        PairFault::Lost
                    } else {
                        PairFault::Decohered
                    }
                } else {
                    PairFault::None
                };
                PairState {
                    hidden,
                    fault,
                    sides: [SideRecord::default(); 2],
                }
            })
            .collect();
        Self { pairs, block_size }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn fault(&self, pair_index: usize) -> PairFault {
        self.pairs[pair_index].fault
    }

    pub fn is_measured(&self, pair_index: usize, side: Side) -> bool {
        self.pairs[pair_index].sides[side as usize].consumed
    }

    /// Measures one side of one pair with `device`. Returns `None` for a loss.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        pair_index: usize,
        side: Side,
        request: &MeasureRequest,
        device: &mut DeviceSpec,
        rng: &mut R,
    ) -> Result<Option<u8>, QuantumError> {
        let len = self.pairs.len();
        let pair = self
            .pairs
            .get_mut(pair_index)
            .ok_or(QuantumError::IndexOutOfRange { pair_index, len })?;
        if pair.sides[side as usize].consumed {
            return Err(QuantumError::AlreadyMeasured { pair_index, side });
        }
        pair.sides[side as usize].consumed = true;

        let input = DeviceInput {
            setting: request.setting & 1,
            pair_index,
            block_size: self.block_size,
            location: request.location,
            hidden: pair.hidden,
        };
        let (selected, rule) = device.select(&input);
        let output = match selected {
            ProgramOutput::Fixed(bit) => Some(bit),
            ProgramOutput::Honest => {
                let raw = match pair.fault {
                    PairFault::Lost => None,
                    PairFault::Decohered => Some(rng.random::<bool>() as u8),
                    PairFault::None => {
                        let angle = request.direction.angle();
                        let raw = match pair.sides[side.other() as usize].raw {
                            Some((partner, partner_angle)) => {
                                // P(outcomes differ) = (1 + cos Δ)/2
                                let differ = 0.5 * (1.0 + (angle - partner_angle).cos());
                                partner ^ rng.random_bool(differ.clamp(0.0, 1.0)) as u8
                            }
                            None => rng.random::<bool>() as u8,
                        };
                        pair.sides[side as usize].raw = Some((raw, angle));
                        Some(raw)
                    }
                };
                raw.and_then(|r| apply_readout_noise(r, &device.noise, rng))
                    .map(|r| r ^ request.flip_outcome as u8)
            }
        };
        device.apply_update(rule, &input, output);
        Ok(output)
    }
}

fn apply_readout_noise<R: Rng + ?Sized>(bit: u8, noise: &NoiseModel, rng: &mut R) -> Option<u8> {
    if noise.delta > 0.0 && rng.random_bool(noise.delta) {
        if rng.random_bool(noise.loss_fraction) {
            None
        } else {
            Some(rng.random::<bool>() as u8)
        }
    } else {
        Some(bit)
    }
}

/// One Bell round: both settings and both reported outcomes (`None` when lost).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    pub setting_committer: u8,
    pub setting_unveiler: u8,
    pub outcome_committer: Option<u8>,
    pub outcome_unveiler: Option<u8>,
}

impl RoundRecord {
    pub fn lost(&self) -> bool {
        self.outcome_committer.is_none() || self.outcome_unveiler.is_none()
    }

    /// `t ⊕ s = x·y`; lost rounds never win.
    pub fn wins(&self) -> bool {
        match (self.outcome_committer, self.outcome_unveiler) {
            (Some(t), Some(s)) => t ^ s == self.setting_committer & self.setting_unveiler,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::device::programs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn req(angle: f64) -> MeasureRequest {
        MeasureRequest {
            direction: Direction::new(angle),
            setting: 0,
            flip_outcome: false,
            location: SpacetimePoint::origin(),
        }
    }

    #[test]
    fn equal_angles_give_opposite_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut reg = EntangledRegistry::prepare(50, &NoiseModel::noiseless(), &mut rng);
        let mut dev = DeviceSpec::honest();
        for i in 0..reg.len() {
            let a = reg
                .measure(i, Side::A, &req(0.7), &mut dev, &mut rng)
                .unwrap();
            let b = reg
                .measure(i, Side::B, &req(0.7), &mut dev, &mut rng)
                .unwrap();
            assert_eq!(a.unwrap() ^ b.unwrap(), 1);
        }
    }

    #[test]
    fn double_measurement_and_range_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut reg = EntangledRegistry::prepare(1, &NoiseModel::noiseless(), &mut rng);
        let mut dev = DeviceSpec::honest();
        reg.measure(0, Side::A, &req(0.0), &mut dev, &mut rng)
            .unwrap();
        assert_eq!(
            reg.measure(0, Side::A, &req(0.0), &mut dev, &mut rng),
            Err(QuantumError::AlreadyMeasured {
                pair_index: 0,
                side: Side::A
            })
        );
        assert_eq!(
            reg.measure(2, Side::B, &req(0.0), &mut dev, &mut rng),
            Err(QuantumError::IndexOutOfRange {
                pair_index: 2,
                len: 2
            })
        );
        assert!(reg.is_measured(0, Side::A) && !reg.is_measured(0, Side::B));
    }

    #[test]
    fn total_readout_noise_decorrelates_or_loses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut reg = EntangledRegistry::prepare(2000, &NoiseModel::noiseless(), &mut rng);
        let mut honest = DeviceSpec::honest();
        let mut noisy = DeviceSpec::honest().with_noise(NoiseModel::new(1.0, 0.5).unwrap());
        let (mut lost, mut same, mut kept) = (0, 0, 0);
        for i in 0..reg.len() {
            let a = reg
                .measure(i, Side::A, &req(0.0), &mut honest, &mut rng)
                .unwrap();
            match reg
                .measure(i, Side::B, &req(0.0), &mut noisy, &mut rng)
                .unwrap()
            {
                None => lost += 1,
                Some(b) => {
                    kept += 1;
                    same += (a.unwrap() == b) as usize;
                }
            }
        }
        let n = reg.len() as f64;
        assert!((lost as f64 / n - 0.5).abs() < 0.05);
        // without noise equal angles never agree; with a fair coin they agree half the time
        assert!((same as f64 / kept as f64 - 0.5).abs() < 0.06);
    }

    #[test]
    fn pair_faults_follow_the_noise_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let reg = EntangledRegistry::prepare(5000, &NoiseModel::new(0.2, 0.5).unwrap(), &mut rng);
        let faulty = (0..reg.len())
            .filter(|&i| reg.fault(i) != PairFault::None)
            .count();
        assert!((faulty as f64 / reg.len() as f64 - 0.2).abs() < 0.02);
    }

    #[test]
    fn location_attack_device_is_honest_elsewhere() {
        let q0 = SpacetimePoint::on_line(-1.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut reg = EntangledRegistry::prepare(500, &NoiseModel::noiseless(), &mut rng);
        let mut honest = DeviceSpec::honest();
        let mut dev = programs::constant_at(q0, 1e-6, 0);
        let elsewhere = MeasureRequest {
            location: SpacetimePoint::on_line(40.0, -3.0),
            ..req(0.0)
        };
        for i in 0..reg.len() {
            let a = reg
                .measure(i, Side::A, &req(0.0), &mut honest, &mut rng)
                .unwrap();
            let b = reg
                .measure(i, Side::B, &elsewhere, &mut dev, &mut rng)
                .unwrap();
            assert_eq!(a.unwrap() ^ b.unwrap(), 1);
        }
        let at_q0 = MeasureRequest {
            location: q0,
            ..req(0.0)
        };
        let mut reg = EntangledRegistry::prepare(500, &NoiseModel::noiseless(), &mut rng);
        for i in 0..reg.len() {
            assert_eq!(
                reg.measure(i, Side::B, &at_q0, &mut dev, &mut rng).unwrap(),
                Some(0)
            );
        }
    }

    #[test]
    fn round_record_scoring() {
        let r = RoundRecord {
            setting_committer: 1,
            setting_unveiler: 1,
            outcome_committer: Some(0),
            outcome_unveiler: Some(1),
        };
        assert!(r.wins());
        let lost = RoundRecord {
            outcome_unveiler: None,
            ..r
        };
        assert!(lost.lost() && !lost.wins());
    }
}
