//! Cheating strategies and exhaustive oracles for small `N`.
//!
//! A deterministic CHSH1 strategy is a triple `(O(L), O⁰, O¹)`. Only
//! `O⁰ ⊕ O` and `O¹ ⊕ O` enter the verification, so strategies are searched in
//! the reduced form `O′ = O ⊕ O⁰`, `D = O⁰ ⊕ O¹`.

mod chsh;
mod lp;
mod rccbc;

pub use chsh::{
    brute_force_epsilon_chsh, brute_force_epsilon_chsh_capped, brute_force_epsilon_chsh_naive,
    chsh3_game_optimum, chsh3_strategy_value, evaluate_chsh_strategy, lex_mask, BruteForceResult,
    Chsh3Game, ReducedStrategy, CHSH3_ORACLE_CAP, DEFAULT_CHSH_CAP, NAIVE_CHSH_CAP,
};
pub use lp::{
    evaluate_nosignalling_lp, solve_lp, LinearProgram, LpOutcome, LpScalar, NOSIGNALLING_LP_CAP,
};
pub use rccbc::{
    brute_force_epsilon_rccbc, brute_force_epsilon_rccbc_capped, evaluate_rccbc_strategy,
    half_subsets, subset_mask, RccbcClaims, RccbcResult, RccbcStrategy, DEFAULT_RCCBC_CAP,
};

use crate::BitmathError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AdversaryError {
    #[error("N = {n} exceeds the oracle cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("N must be positive")]
    Empty,
    #[error("N = {0} must be even")]
    OddLength(usize),
    #[error("C must be positive and finite, got {0}")]
    InvalidConstant(f64),
    #[error(transparent)]
    Bitmath(#[from] BitmathError),
    #[error("{what} has length {found}, expected {expected}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("strategy has no response for {0}")]
    MissingResponse(String),
    #[error("linear program is {0}")]
    Lp(&'static str),
}
