use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lex_mask, AdversaryError};
use crate::bitmath::{rccbc_distance_accepts, BitString};
use crate::protocols::verify_rccbc;

/// Largest `N` accepted by [`brute_force_epsilon_rccbc`].
pub const DEFAULT_RCCBC_CAP: usize = 14;

/// Bit mask of a one-based subset.
pub fn subset_mask(j: &[usize]) -> u64 {
    j.iter().fold(0, |m, &k| m | 1 << (k - 1))
}

fn positions(mask: u64, n: usize) -> Vec<usize> {
    (0..n)
        .filter(|&k| mask >> k & 1 == 1)
        .map(|k| k + 1)
        .collect()
}

/// Masks of all size-`n/2` subsets of `{1, …, n}`, ascending.
pub fn half_subsets(n: usize) -> Vec<u64> {
    (0..1u64 << n)
        .filter(|m| m.count_ones() as usize == n / 2)
        .collect()
}

/// The committer's announcement for one `J`. Each string lists bits in
/// ascending order of the positions of `J` (or `J̄`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RccbcClaims {
    pub s0_j: BitString,
    pub s1_j: BitString,
    pub s_jbar: BitString,
}

/// Unveilers' constant strings and the committer's response to every `J`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RccbcStrategy {
    pub s0_full: BitString,
    pub s1_full: BitString,
    claims: BTreeMap<u64, RccbcClaims>,
}

impl RccbcStrategy {
    pub fn new(
        s0_full: BitString,
        s1_full: BitString,
        claims: BTreeMap<u64, RccbcClaims>,
    ) -> Result<Self, AdversaryError> {
        let n = s0_full.len();
        if n == 0 {
            return Err(AdversaryError::Empty);
        }
        if n % 2 != 0 {
            return Err(AdversaryError::OddLength(n));
        }
        if n > 63 {
            return Err(AdversaryError::TooLarge { n, cap: 63 });
        }
        if s1_full.len() != n {
            return Err(AdversaryError::WrongLength {
                what: "s1_full",
                expected: n,
                found: s1_full.len(),
            });
        }
        for m in half_subsets(n) {
            let c = claims.get(&m).ok_or_else(|| {
                AdversaryError::MissingResponse(format!("J = {:?}", positions(m, n)))
            })?;
            for (what, s) in [("S0_J", &c.s0_j), ("S1_J", &c.s1_j), ("S_Jbar", &c.s_jbar)] {
                if s.len() != n / 2 {
                    return Err(AdversaryError::WrongLength {
                        what,
                        expected: n / 2,
                        found: s.len(),
                    });
                }
            }
        }
        Ok(Self {
            s0_full,
            s1_full,
            claims,
        })
    }

    /// Honest-looking claims read off the two constant strings, with `S_J̄`
    /// taken from `S⁰`.
    pub fn consistent(s0_full: BitString, s1_full: BitString) -> Result<Self, AdversaryError> {
        let n = s0_full.len();
        let claims = half_subsets(n)
            .into_iter()
            .map(|m| {
                let j = positions(m, n);
                let jbar = positions(!m & ((1u64 << n) - 1), n);
                (m, truthful(&s0_full, &s1_full, &j, &jbar))
            })
            .collect();
        Self::new(s0_full, s1_full, claims)
    }

    pub fn n(&self) -> usize {
        self.s0_full.len()
    }

    pub fn respond(&self, j: &[usize]) -> Result<RccbcClaims, AdversaryError> {
        self.claims
            .get(&subset_mask(j))
            .cloned()
            .ok_or_else(|| AdversaryError::MissingResponse(format!("J = {j:?}")))
    }
}

fn select(s: &BitString, pos: &[usize]) -> BitString {
    BitString::from_bits(&pos.iter().map(|&k| s.get(k - 1)).collect::<Vec<_>>())
}

fn truthful(s0: &BitString, s1: &BitString, j: &[usize], jbar: &[usize]) -> RccbcClaims {
    RccbcClaims {
        s0_j: select(s0, j),
        s1_j: select(s1, j),
        s_jbar: select(s0, jbar),
    }
}

fn labelled(bits: &BitString, pos: &[usize]) -> Vec<(usize, u8)> {
    pos.iter()
        .enumerate()
        .map(|(k, &p)| (p, bits.get(k)))
        .collect()
}

/// Exact `(p₀, p₁)` over uniform `J`, each bit value checked with the
/// protocol's own verification.
pub fn evaluate_rccbc_strategy(
    strategy: &RccbcStrategy,
    c_param: f64,
) -> Result<(f64, f64), AdversaryError> {
    let n = strategy.n();
    let subsets = half_subsets(n);
    let mut counts = [0usize; 2];
    for &m in &subsets {
        let j = positions(m, n);
        let jbar = positions(!m & ((1u64 << n) - 1), n);
        let c = strategy.respond(&j)?;
        for (i, s_i) in [&strategy.s0_full, &strategy.s1_full]
            .into_iter()
            .enumerate()
        {
            let check = verify_rccbc(
                n,
                c_param,
                i,
                &labelled(&c.s0_j, &j),
                &labelled(&c.s1_j, &j),
                &labelled(&c.s_jbar, &jbar),
                s_i,
            )
            .map_err(|e| AdversaryError::MissingResponse(e.to_string()))?;
            counts[i] += check.accepted as usize;
        }
    }
    let total = subsets.len() as f64;
    Ok((counts[0] as f64 / total, counts[1] as f64 / total))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RccbcResult {
    pub epsilon_star: f64,
    pub p0: f64,
    pub p1: f64,
    pub strategy: RccbcStrategy,
}

pub fn brute_force_epsilon_rccbc(n: usize, c_param: f64) -> Result<RccbcResult, AdversaryError> {
    brute_force_epsilon_rccbc_capped(n, c_param, DEFAULT_RCCBC_CAP)
}

/// Exhaustive RCCBC optimum.
///
/// Both bits pass for a given `J` only if the single announced `S_J̄` matches
/// both unveiled strings there and the labelled `J` claims match them on `J`,
/// so `S⁰ ⊕ S¹` must vanish off `J` and its weight must pass the distance
/// check. Otherwise one bit passes alone if any distance does. XOR-ing both strings by `S⁰` changes
/// neither condition, so `S⁰ = 0` and the search runs over `w = S¹`.
/// When no distance at all passes the check nothing is ever accepted and the
/// result is `−1`.
/// Ties go to the lexicographically smallest `w`.
pub fn brute_force_epsilon_rccbc_capped(
    n: usize,
    c_param: f64,
    cap: usize,
) -> Result<RccbcResult, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::Empty);
    }
    if n % 2 != 0 {
        return Err(AdversaryError::OddLength(n));
    }
    if n > cap.min(63) {
        return Err(AdversaryError::TooLarge { n, cap });
    }
    if !(c_param > 0.0 && c_param.is_finite()) {
        return Err(AdversaryError::InvalidConstant(c_param));
    }
    let subsets = half_subsets(n);
    let both: Vec<usize> = (0..1u64 << n)
        .into_par_iter()
        .map(|k| {
            let w = lex_mask(k, n);
            if !rccbc_distance_accepts(w.count_ones() as usize, n, c_param) {
                return 0;
            }
            subsets.iter().filter(|&&m| w & !m == 0).count()
        })
        .collect();
    let (best_k, best) =
        both.iter().enumerate().fold(
            (0usize, 0usize),
            |acc, (k, &c)| if c > acc.1 { (k, c) } else { acc },
        );
    let s0 = BitString::zeros(n);
    let w = lex_mask(best_k as u64, n);
    let s1 = BitString::from_mask(w, n);
    let full = (1u64 << n) - 1;
    let mut claims = BTreeMap::new();
    for &m in &subsets {
        let j = positions(m, n);
        let jbar = positions(!m & full, n);
        let mut c = truthful(&s0, &s1, &j, &jbar);
        if !rccbc_distance_accepts((w & m).count_ones() as usize, n, c_param) {
            // make bit 0 pass by moving the S¹_J claim to a passing distance
            if let Some(d) = (0..=n / 2).find(|&d| rccbc_distance_accepts(d, n, c_param)) {
                let mut s1_j = c.s0_j.clone();
                for k in 0..d {
                    s1_j.set(k, 1 - s1_j.get(k));
                }
                c.s1_j = s1_j;
            }
        }
        claims.insert(m, c);
    }
    let strategy = RccbcStrategy::new(s0, s1, claims)?;
    let (p0, p1) = evaluate_rccbc_strategy(&strategy, c_param)?;
    let any_passes = (0..=n / 2).any(|d| rccbc_distance_accepts(d, n, c_param));
    Ok(RccbcResult {
        epsilon_star: if any_passes {
            best as f64 / subsets.len() as f64
        } else {
            -1.0
        },
        p0,
        p1,
        strategy,
    })
}
