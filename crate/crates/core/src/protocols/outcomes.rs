use std::fmt;
use std::str::FromStr;

use crate::bitmath::{BitString, BitmathError};

/// Measurement outcomes with per-position loss flags.
///
/// Rendered as ASCII with `-` marking a lost position. Lost positions hold a
/// zero in `bits`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Outcomes {
    bits: BitString,
    lost: BitString,
}

impl Outcomes {
    pub fn complete(bits: BitString) -> Self {
        let lost = BitString::zeros(bits.len());
        Self { bits, lost }
    }

    pub fn from_options(values: &[Option<u8>]) -> Self {
        let bits: Vec<u8> = values.iter().map(|v| v.unwrap_or(0) & 1).collect();
        let lost: Vec<u8> = values.iter().map(|v| v.is_none() as u8).collect();
        Self {
            bits: BitString::from_bits(&bits),
            lost: BitString::from_bits(&lost),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, j: usize) -> Option<u8> {
        (self.lost.get(j) == 0).then(|| self.bits.get(j))
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn lost(&self) -> &BitString {
        &self.lost
    }

    pub fn loss_count(&self) -> usize {
        self.lost.weight()
    }

    /// Positions where `self ⊕ other ≠ target`, counting any lost position on
    /// either side as a mismatch.
    pub fn mismatches(&self, other: &Outcomes, target: &BitString) -> Result<usize, BitmathError> {
        let wrong = self.bits.xor(&other.bits)?.xor(target)?;
        Ok(wrong.or(&self.lost)?.or(&other.lost)?.weight())
    }
}

impl fmt::Display for Outcomes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len())
            .map(|j| match self.get(j) {
                Some(0) => '0',
                Some(_) => '1',
                None => '-',
            })
            .collect();
        f.write_str(&s)
    }
}

impl FromStr for Outcomes {
    type Err = BitmathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = s
            .chars()
            .enumerate()
            .map(|(position, ch)| match ch {
                '0' => Ok(Some(0)),
                '1' => Ok(Some(1)),
                '-' => Ok(None),
                _ => Err(BitmathError::InvalidCharacter { ch, position }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_options(&values))
    }
}
