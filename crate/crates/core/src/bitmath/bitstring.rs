use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::BitmathError;

const WORD: usize = 64;

/// Fixed-length binary string packed into 64-bit words.
///
/// Position `0` is the leftmost character of the ASCII rendering (index
/// `j = 1` in one-based notation). Bits beyond `len` in the last word are
/// always zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        Self::zeros(len).complement()
    }

    /// Builds a string from `{0, 1}` values; any nonzero value counts as `1`.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                s.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        s
    }

    /// Interprets bit `j` of `mask` as position `j`; `len` must be at most 64.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        assert!(len <= WORD, "mask strings hold at most 64 bits");
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = mask & low_mask(len);
        }
        s
    }

    /// Inverse of [`BitString::from_mask`]; panics for strings longer than 64 bits.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len <= WORD, "mask strings hold at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    /// Uniformly random string.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = rng.random();
        }
        s.clear_tail();
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> u8 {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        ((self.words[i / WORD] >> (i % WORD)) & 1) as u8
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let m = 1u64 << (i % WORD);
        if bit != 0 {
            self.words[i / WORD] |= m;
        } else {
            self.words[i / WORD] &= !m;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &Self) -> Result<Self, BitmathError> {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn and(&self, other: &Self) -> Result<Self, BitmathError> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Result<Self, BitmathError> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn complement(&self) -> Self {
        let mut s = Self {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        s.clear_tail();
        s
    }

    /// The substring at the given positions, in the order given.
    pub fn select(&self, positions: &[usize]) -> Self {
        let mut s = Self::zeros(positions.len());
        for (k, &p) in positions.iter().enumerate() {
            s.set(k, self.get(p));
        }
        s
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self, BitmathError> {
        check_lengths(self, other)?;
        let mut s = Self {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            len: self.len,
        };
        s.clear_tail();
        Ok(s)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= low_mask(rem);
            }
        }
    }
}

fn low_mask(bits: usize) -> u64 {
    if bits >= WORD {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn check_lengths(a: &BitString, b: &BitString) -> Result<(), BitmathError> {
    if a.len != b.len {
        return Err(BitmathError::LengthMismatch {
            left: a.len,
            right: b.len,
        });
    }
    Ok(())
}

/// Number of positions at which `a` and `b` differ.
pub fn hamming_distance(a: &BitString, b: &BitString) -> Result<usize, BitmathError> {
    check_lengths(a, b)?;
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum())
}

pub fn bitwise_xor(a: &BitString, b: &BitString) -> Result<BitString, BitmathError> {
    a.xor(b)
}

pub fn bitwise_and(a: &BitString, b: &BitString) -> Result<BitString, BitmathError> {
    a.and(b)
}

pub fn complement(a: &BitString) -> BitString {
    a.complement()
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self
            .iter()
            .map(|b| if b == 1 { '1' } else { '0' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitmathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Self::zeros(s.chars().count());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => out.set(i, 1),
                _ => return Err(BitmathError::InvalidCharacter { ch, position: i }),
            }
        }
        Ok(out)
    }
}

impl serde::Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
