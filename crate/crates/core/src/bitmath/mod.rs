//! Bit-string algebra and the analytic quantities of the binding proofs.

mod bitstring;
mod bounds;

pub use bitstring::{bitwise_and, bitwise_xor, complement, hamming_distance, BitString};
pub use bounds::{
    binary_entropy, check_xi, chsh_score_threshold, chsh_value_from_score, epsilon_bound,
    hamming_ball_bound, hamming_ball_volume, max_accepted_mismatches, mismatch_threshold,
    rccbc_distance_accepts, rccbc_distance_check, tsirelson_win_probability, xi_upper_limit,
    SecurityBound,
};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BitmathError {
    #[error("bit strings have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid character {ch:?} at position {position}; expected '0' or '1'")]
    InvalidCharacter { ch: char, position: usize },
    #[error("binary entropy is defined on [0, 1], got {0}")]
    EntropyDomain(f64),
    #[error("radius {r} exceeds string length {n}")]
    RadiusOutOfRange { n: usize, r: usize },
    #[error("the volume bound requires r <= n/2 (n = {n}, r = {r})")]
    RadiusAboveHalf { n: usize, r: usize },
    #[error("exact ball volume for n = {n} does not fit in 128 bits")]
    VolumeOverflow { n: usize },
    #[error("xi = {xi} is outside the admissible range 0 < xi < 1/(2*sqrt(2)) - 1/4 = {limit}")]
    XiOutOfRange { xi: f64, limit: f64 },
    #[error("score {score} is outside [0, {n}]")]
    ScoreOutOfRange { n: usize, score: f64 },
    #[error("N must be a positive even integer, got {n}")]
    OddLength { n: usize },
    #[error("the distance-check constant must be positive, got {0}")]
    NonPositiveConstant(f64),
}
