//! Closed-form quantities from the binding analysis: entropies, ball
//! volumes, verification thresholds and the resulting cheating bound.

use serde::Serialize;

use super::{hamming_distance, BitString, BitmathError};
use crate::scalar::Real;

fn f64_of<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Per-round CHSH win probability of an ideal singlet strategy, `(2 + √2) / 4`.
pub fn tsirelson_win_probability<T: Real>() -> T {
    (T::lit(2.0) + T::SQRT_2()) / T::lit(4.0)
}

/// `H(x) = −x log₂ x − (1 − x) log₂(1 − x)` with `H(0) = H(1) = 0`.
pub fn binary_entropy<T: Real>(x: T) -> Result<T, BitmathError> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(BitmathError::EntropyDomain(f64_of(x)));
    }
    let term = |p: T| {
        if p == T::zero() {
            T::zero()
        } else {
            -p * p.log2()
        }
    };
    Ok(term(x) + term(T::one() - x))
}

/// Exact number of strings within Hamming distance `r` of a fixed centre,
/// `Σ_{k ≤ r} C(n, k)`.
pub fn hamming_ball_volume(n: usize, r: usize) -> Result<u128, BitmathError> {
    if r > n {
        return Err(BitmathError::RadiusOutOfRange { n, r });
    }
    if n > 127 {
        return Err(BitmathError::VolumeOverflow { n });
    }
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=r {
        total += binom;
        // C(n, k+1) = C(n, k) (n − k) / (k + 1); exact because the product is divisible.
        binom = binom * (n - k) as u128 / (k + 1) as u128;
    }
    Ok(total)
}

/// `2^{n H(r/n)}`, an upper bound on the ball volume for `r ≤ n/2`.
pub fn hamming_ball_bound<T: Real>(n: usize, r: usize) -> Result<T, BitmathError> {
    if r > n {
        return Err(BitmathError::RadiusOutOfRange { n, r });
    }
    if 2 * r > n {
        return Err(BitmathError::RadiusAboveHalf { n, r });
    }
    if n == 0 {
        return Ok(T::one());
    }
    let h = binary_entropy(T::count(r) / T::count(n))?;
    Ok((T::count(n) * h).exp2())
}

/// Score `N((2 + √2)/4 − ξ)` that an unveiling must exceed.
pub fn chsh_score_threshold<T: Real>(n: usize, xi: T) -> T {
    T::count(n) * (tsirelson_win_probability::<T>() - xi)
}

/// Mismatch bound `N(1/2 − 1/(2√2) + ξ)`; complements the score threshold to `N`.
pub fn mismatch_threshold<T: Real>(n: usize, xi: T) -> T {
    let half = T::lit(0.5);
    T::count(n) * (half - half * T::FRAC_1_SQRT_2() + xi)
}

/// Largest integer mismatch count strictly below [`mismatch_threshold`],
/// or `None` when even zero mismatches fail.
pub fn max_accepted_mismatches<T: Real>(n: usize, xi: T) -> Option<usize> {
    let t = mismatch_threshold(n, xi);
    if t <= T::zero() {
        return None;
    }
    let mut m = t.floor().to_usize().unwrap_or(0).min(n);
    while m > 0 && T::count(m) >= t {
        m -= 1;
    }
    if T::count(m) < t {
        Some(m)
    } else {
        None
    }
}

/// Upper end of the admissible security parameter range, `1/(2√2) − 1/4`.
pub fn xi_upper_limit<T: Real>() -> T {
    T::lit(0.5) * T::FRAC_1_SQRT_2() - T::lit(0.25)
}

/// Checks `0 < ξ < 1/(2√2) − 1/4`.
pub fn check_xi<T: Real>(xi: T) -> Result<(), BitmathError> {
    if xi > T::zero() && xi < xi_upper_limit::<T>() {
        Ok(())
    } else {
        Err(BitmathError::XiOutOfRange {
            xi: f64_of(xi),
            limit: f64_of(xi_upper_limit::<T>()),
        })
    }
}

/// Binding bound for `n` rounds at security parameter `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecurityBound<T> {
    pub n: usize,
    pub xi: T,
    /// `r / N = 1 − 1/√2 + 2ξ`.
    pub radius_fraction: T,
    /// `H(r / N)`.
    pub entropy: T,
    /// `2^{−N(1 − H(r/N))}`.
    pub epsilon: T,
}

impl<T: Real> SecurityBound<T> {
    /// `log₂ ε`, which stays finite where `epsilon` underflows.
    pub fn log2_epsilon(&self) -> T {
        -T::count(self.n) * (T::one() - self.entropy)
    }
}

pub fn epsilon_bound<T: Real>(n: usize, xi: T) -> Result<SecurityBound<T>, BitmathError> {
    check_xi(xi)?;
    let two = T::lit(2.0);
    let radius_fraction = T::one() - T::FRAC_1_SQRT_2() + two * xi;
    let entropy = binary_entropy(radius_fraction)?;
    let epsilon = (-T::count(n) * (T::one() - entropy)).exp2();
    Ok(SecurityBound {
        n,
        xi,
        radius_fraction,
        entropy,
        epsilon,
    })
}

/// Average CHSH observable `(4/N)(2R − N)` for a game score `R` out of `N`.
///
/// The score is a real so that expected scores can be converted too.
pub fn chsh_value_from_score<T: Real>(n: usize, score: T) -> Result<T, BitmathError> {
    if n == 0 || !(score >= T::zero() && score <= T::count(n)) {
        return Err(BitmathError::ScoreOutOfRange {
            n,
            score: f64_of(score),
        });
    }
    let nn = T::count(n);
    Ok(T::lit(4.0) / nn * (T::lit(2.0) * score - nn))
}

/// Commitment-time check `|d(S⁰_J, S¹_J) − N/4| < C N^{3/4}` on the two
/// revealed half-length substrings.
///
/// Evaluated as `|4d − N|⁴ < 256 C⁴ N³`, which avoids the fractional power
/// and is exact for dyadic `C` and moderate `N`.
pub fn rccbc_distance_check(
    s0_j: &BitString,
    s1_j: &BitString,
    n: usize,
    c_param: f64,
) -> Result<bool, BitmathError> {
    if n == 0 || n % 2 != 0 {
        return Err(BitmathError::OddLength { n });
    }
    if !(c_param > 0.0 && c_param.is_finite()) {
        return Err(BitmathError::NonPositiveConstant(c_param));
    }
    for s in [s0_j, s1_j] {
        if s.len() != n / 2 {
            return Err(BitmathError::LengthMismatch {
                left: s.len(),
                right: n / 2,
            });
        }
    }
    let d = hamming_distance(s0_j, s1_j)?;
    Ok(rccbc_distance_accepts(d, n, c_param))
}

/// The distance predicate of [`rccbc_distance_check`] on a precomputed distance.
pub fn rccbc_distance_accepts(d: usize, n: usize, c_param: f64) -> bool {
    let dev = (4 * d as i64 - n as i64).unsigned_abs() as f64;
    let nf = n as f64;
    dev.powi(4) < 256.0 * c_param.powi(4) * nf * nf * nf
}
