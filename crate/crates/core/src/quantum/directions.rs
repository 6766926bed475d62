use serde::{Deserialize, Serialize};

use super::QuantumError;
use crate::scalar::Real;

/// Measurement direction in the agreed plane, stored as an angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Direction<T> {
    angle: T,
}

impl<T: Real> Direction<T> {
    pub fn new(angle: T) -> Self {
        let tau = T::TAU();
        let mut a = angle % tau;
        if a < T::zero() {
            a = a + tau;
        }
        if a >= tau {
            a = a - tau;
        }
        Self { angle: a }
    }

    pub fn angle(&self) -> T {
        self.angle
    }

    pub fn rotated(&self, by: T) -> Self {
        Self::new(self.angle + by)
    }
}

/// Distance of `a − b` from the nearest multiple of `π`, in `[0, π/2]`.
fn separation_mod_pi<T: Real>(a: Direction<T>, b: Direction<T>) -> T {
    let pi = T::PI();
    let d = (a.angle - b.angle).abs() % pi;
    d.min(pi - d)
}

/// Which party measures: the committer at `P` or an unveiler at `Q_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Committer,
    Unveiler,
}

/// The four agreed directions `X, Y, X′, Y′` and the unveiler's outcome
/// labelling convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet<T> {
    pub x_dir: Direction<T>,
    pub y_dir: Direction<T>,
    pub xp_dir: Direction<T>,
    pub yp_dir: Direction<T>,
    /// When set, the unveiler reports the complement of the raw singlet outcome.
    pub outcome_flip_unveiler: bool,
}

impl<T: Real> DirectionSet<T> {
    /// Checks `X ⟂ Y`, `X′ ⟂ Y′` and the `π/4` offsets `X–X′`, `Y–Y′`.
    pub fn validate(&self) -> Result<(), QuantumError> {
        let tol = T::lit(1e3) * T::tolerance();
        let quarter = T::FRAC_PI_4();
        let half = T::FRAC_PI_2();
        let checks = [
            (
                "X is not orthogonal to Y",
                separation_mod_pi(self.x_dir, self.y_dir),
                half,
            ),
            (
                "X' is not orthogonal to Y'",
                separation_mod_pi(self.xp_dir, self.yp_dir),
                half,
            ),
            (
                "X' is not pi/4 from X",
                separation_mod_pi(self.x_dir, self.xp_dir),
                quarter,
            ),
            (
                "Y' is not pi/4 from Y",
                separation_mod_pi(self.y_dir, self.yp_dir),
                quarter,
            ),
        ];
        for (msg, got, want) in checks {
            if (got - want).abs() > tol {
                return Err(QuantumError::InvalidDirectionSet(msg.to_string()));
            }
        }
        Ok(())
    }
}

/// `X = 0`, `Y = π/2`, `X′ = 3π/4`, `Y′ = π/4`, unveiler outcomes complemented.
///
/// With committer setting `L_j` and unveiler setting `L^i_j` this makes every
/// setting pair satisfy `t ⊕ s = L_j L^i_j` with probability `(2 + √2)/4`.
pub fn canonical_direction_set<T: Real>() -> DirectionSet<T> {
    let q = T::FRAC_PI_4();
    DirectionSet {
        x_dir: Direction::new(T::zero()),
        y_dir: Direction::new(T::FRAC_PI_2()),
        xp_dir: Direction::new(T::lit(3.0) * q),
        yp_dir: Direction::new(q),
        outcome_flip_unveiler: true,
    }
}

/// `(X)^{b}(Y)^{1−b}` for the committer, `(X′)^{b}(Y′)^{1−b}` for an unveiler.
pub fn direction_for_bit<T: Real>(
    ds: &DirectionSet<T>,
    role: Role,
    program_bit: u8,
) -> Direction<T> {
    match (role, program_bit != 0) {
        (Role::Committer, true) => ds.x_dir,
        (Role::Committer, false) => ds.y_dir,
        (Role::Unveiler, true) => ds.xp_dir,
        (Role::Unveiler, false) => ds.yp_dir,
    }
}

/// Joint outcome distribution `P[t][s]` for the singlet measured along `a` and `b`.
///
/// Equal outcomes have total probability `(1 − cos Δ)/2`, unequal ones
/// `(1 + cos Δ)/2`, each split evenly.
pub fn singlet_joint_distribution<T: Real>(a: Direction<T>, b: Direction<T>) -> [[T; 2]; 2] {
    let c = (a.angle - b.angle).cos();
    let quarter = T::lit(0.25);
    let same = quarter * (T::one() - c);
    let diff = quarter * (T::one() + c);
    [[same, diff], [diff, same]]
}

/// Probability that one round with settings `(x, y)` satisfies `t ⊕ s = x·y`,
/// for each of the four setting pairs, indexed `[x][y]`.
pub fn per_pair_win_probabilities<T: Real>(ds: &DirectionSet<T>) -> [[T; 2]; 2] {
    let mut out = [[T::zero(); 2]; 2];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let p = singlet_joint_distribution(
                direction_for_bit(ds, Role::Committer, x),
                direction_for_bit(ds, Role::Unveiler, y),
            );
            let flip = ds.outcome_flip_unveiler as u8;
            let mut win = T::zero();
            for t in 0..2u8 {
                for s in 0..2u8 {
                    if t ^ s ^ flip == x & y {
                        win = win + p[t as usize][s as usize];
                    }
                }
            }
            out[x as usize][y as usize] = win;
        }
    }
    out
}

/// Win probability averaged over the four setting pairs.
pub fn honest_round_win_probability<T: Real>(ds: &DirectionSet<T>) -> Result<T, QuantumError> {
    ds.validate()?;
    let p = per_pair_win_probabilities(ds);
    Ok((p[0][0] + p[0][1] + p[1][0] + p[1][1]) / T::lit(4.0))
}

/// Average win probability of a deterministic local strategy in which each
/// side's output is a function of its own setting only.
pub fn deterministic_round_win_probability(
    committer: impl Fn(u8) -> u8,
    unveiler: impl Fn(u8) -> u8,
) -> f64 {
    let wins = (0..2u8)
        .flat_map(|x| (0..2u8).map(move |y| (x, y)))
        .filter(|&(x, y)| (committer(x) ^ unveiler(y)) & 1 == x & y)
        .count();
    wins as f64 / 4.0
}
