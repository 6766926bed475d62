use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AdversaryError;
use crate::bitmath::{check_xi, max_accepted_mismatches, BitString};

/// Largest `N` accepted by [`brute_force_epsilon_chsh`].
pub const DEFAULT_CHSH_CAP: usize = 12;
/// Largest `N` accepted by the unoptimised reference search.
pub const NAIVE_CHSH_CAP: usize = 6;
/// Largest `N` for the exhaustive CHSH3 game comparison.
pub const CHSH3_ORACLE_CAP: usize = 3;

/// Bit mask of the `k`-th string of length `n` in lexicographic order
/// (position 0 is the most significant character).
pub fn lex_mask(k: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        k.reverse_bits() >> (64 - n)
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A deterministic cheating strategy in reduced form: constant offset
/// `D = O⁰ ⊕ O¹` and committer response `O′(L) = O(L) ⊕ O⁰`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedStrategy {
    n: usize,
    d_offset: BitString,
    /// Indexed by the bit mask of `L`.
    response: Vec<u64>,
}

impl ReducedStrategy {
    /// Largest `N` whose response table is materialised.
    pub const MAX_N: usize = 24;

    pub fn from_table(d_offset: BitString, response: Vec<u64>) -> Result<Self, AdversaryError> {
        let n = d_offset.len();
        if n == 0 {
            return Err(AdversaryError::Empty);
        }
        if n > Self::MAX_N {
            return Err(AdversaryError::TooLarge {
                n,
                cap: Self::MAX_N,
            });
        }
        if response.len() != 1 << n {
            return Err(AdversaryError::WrongLength {
                what: "response table",
                expected: 1 << n,
                found: response.len(),
            });
        }
        if let Some(bad) = response.iter().find(|&&m| m & !low_mask(n) != 0) {
            return Err(AdversaryError::MissingResponse(format!(
                "mask {bad:#x} wider than N"
            )));
        }
        Ok(Self {
            n,
            d_offset,
            response,
        })
    }

    pub fn from_fn(
        d_offset: BitString,
        f: impl Fn(&BitString) -> BitString,
    ) -> Result<Self, AdversaryError> {
        let n = d_offset.len();
        if n == 0 || n > Self::MAX_N {
            return Err(AdversaryError::TooLarge {
                n,
                cap: Self::MAX_N,
            });
        }
        let mut response = Vec::with_capacity(1 << n);
        for m in 0..1u64 << n {
            let o = f(&BitString::from_mask(m, n));
            if o.len() != n {
                return Err(AdversaryError::WrongLength {
                    what: "O′(L)",
                    expected: n,
                    found: o.len(),
                });
            }
            response.push(o.to_mask());
        }
        Self::from_table(d_offset, response)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_offset(&self) -> &BitString {
        &self.d_offset
    }

    pub fn response_mask(&self, l_mask: u64) -> u64 {
        self.response[(l_mask & low_mask(self.n)) as usize]
    }

    pub fn respond(&self, l: &BitString) -> Result<BitString, AdversaryError> {
        if l.len() != self.n {
            return Err(AdversaryError::WrongLength {
                what: "L",
                expected: self.n,
                found: l.len(),
            });
        }
        Ok(BitString::from_mask(
            self.response_mask(l.to_mask()),
            self.n,
        ))
    }
}

fn check_l0(n: usize, l0: &BitString) -> Result<(), AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::Empty);
    }
    if l0.len() != n {
        return Err(AdversaryError::WrongLength {
            what: "L⁰",
            expected: n,
            found: l0.len(),
        });
    }
    Ok(())
}

/// Accepted mismatch radius as a bound on popcount, `None` when no count passes.
fn radius(n: usize, xi: f64) -> Result<Option<u32>, AdversaryError> {
    check_xi(xi)?;
    Ok(max_accepted_mismatches(n, xi).map(|r| r as u32))
}

fn passes(r: Option<u32>, distance: u32) -> u32 {
    r.is_some_and(|r| distance <= r) as u32
}

/// Exact `(p₀, p₁)` over uniform `L`, with `L¹` the complement of `L⁰`:
/// bit 0 passes when `d(O′(L), L⁰L)` is below the mismatch threshold, bit 1
/// when `d(O′(L) ⊕ D, L¹L)` is.
pub fn evaluate_chsh_strategy(
    strategy: &ReducedStrategy,
    l0: &BitString,
    xi: f64,
) -> Result<(f64, f64), AdversaryError> {
    let n = strategy.n();
    check_l0(n, l0)?;
    let r = radius(n, xi)?;
    let l0m = l0.to_mask();
    let l1m = !l0m & low_mask(n);
    let d = strategy.d_offset().to_mask();
    let (mut c0, mut c1) = (0u64, 0u64);
    for l in 0..1u64 << n {
        let o = strategy.response_mask(l);
        c0 += passes(r, (o ^ (l0m & l)).count_ones()) as u64;
        c1 += passes(r, (o ^ d ^ (l1m & l)).count_ones()) as u64;
    }
    let total = (1u64 << n) as f64;
    Ok((c0 as f64 / total, c1 as f64 / total))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    /// `max (p₀ + p₁ − 1)` over deterministic strategies.
    pub epsilon_star: f64,
    pub p0: f64,
    pub p1: f64,
    pub strategy: ReducedStrategy,
}

/// Smallest-lex `O′` maximising the per-`L` pass count for offset `d`.
fn best_response(n: usize, r: Option<u32>, a: u64, b: u64, d: u64) -> (u64, u32) {
    let mut best = (0, 0);
    let mut found = false;
    for k in 0..1u64 << n {
        let o = lex_mask(k, n);
        let score = passes(r, (o ^ a).count_ones()) + passes(r, (o ^ d ^ b).count_ones());
        if !found || score > best.1 {
            best = (o, score);
            found = true;
            if score == 2 {
                break;
            }
        }
    }
    best
}

/// Exhaustive optimum for CHSH1 with pre-agreed `L⁰`, up to
/// [`DEFAULT_CHSH_CAP`].
pub fn brute_force_epsilon_chsh(
    n: usize,
    xi: f64,
    l0: &BitString,
) -> Result<BruteForceResult, AdversaryError> {
    brute_force_epsilon_chsh_capped(n, xi, l0, DEFAULT_CHSH_CAP)
}

/// As [`brute_force_epsilon_chsh`] with an explicit cap on `N`.
///
/// The score `p₀ + p₁` decomposes over `L`, so for each `D` the best `O′` is
/// chosen per `L`. Some `O′` lies within the accepted radius `r` of both
/// `L⁰L` and `D ⊕ L¹L` exactly when those two are within `2r` of each other;
/// otherwise one bit can always be made to pass. Ties go to the
/// lexicographically smallest `D`, then the smallest `O′` for each `L`.
pub fn brute_force_epsilon_chsh_capped(
    n: usize,
    xi: f64,
    l0: &BitString,
    cap: usize,
) -> Result<BruteForceResult, AdversaryError> {
    check_l0(n, l0)?;
    if n > cap.min(ReducedStrategy::MAX_N) {
        return Err(AdversaryError::TooLarge { n, cap });
    }
    let r = radius(n, xi)?;
    let l0m = l0.to_mask();
    let l1m = !l0m & low_mask(n);
    let per_l = |d: u64, l: u64| -> u64 {
        match r {
            None => 0,
            Some(r) => 1 + (((l0m & l) ^ (l1m & l) ^ d).count_ones() <= 2 * r) as u64,
        }
    };
    let totals: Vec<u64> = (0..1u64 << n)
        .into_par_iter()
        .map(|k| {
            let d = lex_mask(k, n);
            (0..1u64 << n).map(|l| per_l(d, l)).sum()
        })
        .collect();
    // first maximum in lexicographic order of D
    let (best_k, best_total) =
        totals.iter().enumerate().fold(
            (0usize, 0u64),
            |acc, (k, &t)| if t > acc.1 { (k, t) } else { acc },
        );
    let d = lex_mask(best_k as u64, n);
    let response: Vec<u64> = (0..1u64 << n)
        .into_par_iter()
        .map(|l| best_response(n, r, l0m & l, l1m & l, d).0)
        .collect();
    let strategy = ReducedStrategy::from_table(BitString::from_mask(d, n), response)?;
    let (p0, p1) = evaluate_chsh_strategy(&strategy, l0, xi)?;
    let total = (1u64 << n) as f64;
    Ok(BruteForceResult {
        epsilon_star: best_total as f64 / total - 1.0,
        p0,
        p1,
        strategy,
    })
}

/// Reference search with no shortcuts: every `D`, every `L`, every `O′`,
/// distances counted bit by bit. Returns `ε*` only.
pub fn brute_force_epsilon_chsh_naive(
    n: usize,
    xi: f64,
    l0: &BitString,
) -> Result<f64, AdversaryError> {
    check_l0(n, l0)?;
    if n > NAIVE_CHSH_CAP {
        return Err(AdversaryError::TooLarge {
            n,
            cap: NAIVE_CHSH_CAP,
        });
    }
    check_xi(xi)?;
    let threshold = crate::bitmath::mismatch_threshold(n, xi);
    let l1 = l0.complement();
    let strings: Vec<BitString> = (0..1u64 << n).map(|m| BitString::from_mask(m, n)).collect();
    let mut best = f64::NEG_INFINITY;
    for d in &strings {
        let mut total = 0usize;
        for l in &strings {
            let t0 = l0.and(l)?;
            let t1 = l1.and(l)?;
            let mut best_l = 0;
            for o in &strings {
                let m0 = (0..n).filter(|&j| o.get(j) != t0.get(j)).count();
                let m1 = (0..n).filter(|&j| o.get(j) ^ d.get(j) != t1.get(j)).count();
                let s = ((m0 as f64) < threshold) as usize + ((m1 as f64) < threshold) as usize;
                best_l = best_l.max(s);
            }
            total += best_l;
        }
        best = best.max(total as f64 / strings.len() as f64 - 1.0);
    }
    Ok(best)
}

/// How Bob's unveiling strings are drawn in the CHSH3 comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chsh3Game {
    /// `L⁰`, `L¹` independent and uniform, each seen only by its unveiler.
    Independent,
    /// `L¹ = ¬L⁰`, with `L⁰` uniform.
    Complementary,
}

/// `max (p₀ + p₁) − 1` over the unveilers' response tables `O⁰(L⁰)`,
/// `O¹(L¹)` for a fixed committer table `O(L)` (indexed by mask).
pub fn chsh3_strategy_value(
    o_table: &[u64],
    n: usize,
    xi: f64,
    game: Chsh3Game,
) -> Result<f64, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::Empty);
    }
    if o_table.len() != 1 << n {
        return Err(AdversaryError::WrongLength {
            what: "O table",
            expected: 1 << n,
            found: o_table.len(),
        });
    }
    let r = radius(n, xi)?;
    Ok(chsh3_value_with(o_table, n, r, game))
}

fn chsh3_value_with(o_table: &[u64], n: usize, r: Option<u32>, game: Chsh3Game) -> f64 {
    let size = 1usize << n;
    // count[li][o]: rounds over L where unveiler output o passes against input li
    let mut count = vec![0u32; size * size];
    for li in 0..size {
        for o in 0..size {
            count[li * size + o] = (0..size)
                .map(|l| passes(r, (o as u64 ^ o_table[l] ^ (li & l) as u64).count_ones()))
                .sum();
        }
    }
    let row = |li: usize| &count[li * size..(li + 1) * size];
    let total: u32 = match game {
        // each unveiler answers its own uniformly drawn input
        Chsh3Game::Independent => {
            2 * (0..size)
                .map(|li| row(li).iter().copied().max().unwrap_or(0))
                .sum::<u32>()
        }
        // one draw of L⁰ fixes both inputs; the unveilers' answers are chosen jointly
        Chsh3Game::Complementary => (0..size)
            .map(|l0| {
                let (a, b) = (row(l0), row(!l0 & (size - 1)));
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| x + y))
                    .max()
                    .unwrap_or(0)
            })
            .sum(),
    };
    total as f64 / (size * size) as f64 - 1.0
}

/// Exhaustive CHSH3 optimum over all committer tables, up to
/// [`CHSH3_ORACLE_CAP`]. XOR-ing every `O(L)` by a constant is absorbed by the
/// unveilers' answers, so tables with `O(0) = 0` suffice.
pub fn chsh3_game_optimum(n: usize, xi: f64, game: Chsh3Game) -> Result<f64, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::Empty);
    }
    if n > CHSH3_ORACLE_CAP {
        return Err(AdversaryError::TooLarge {
            n,
            cap: CHSH3_ORACLE_CAP,
        });
    }
    let r = radius(n, xi)?;
    let size = 1usize << n;
    let tables = 1u64 << (n * (size - 1));
    let best = (0..tables)
        .into_par_iter()
        .map_init(
            || vec![0u64; size],
            |table, code| {
                for l in 1..size {
                    table[l] = (code >> ((l - 1) * n)) & low_mask(n);
                }
                chsh3_value_with(table, n, r, game)
            },
        )
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}
