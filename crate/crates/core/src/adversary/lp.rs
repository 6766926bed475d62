//! Dense two-phase simplex with Bland's rule, and the no-signalling
//! relaxation of the CHSH1 cheating problem.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

use super::AdversaryError;
use crate::bitmath::{check_xi, mismatch_threshold, BitString};

/// Largest `N` accepted by [`evaluate_nosignalling_lp`].
pub const NOSIGNALLING_LP_CAP: usize = 2;

/// Ordered field the simplex runs over. Floating types compare against a
/// tolerance; exact types against zero.
pub trait LpScalar: Num + Signed + Clone + PartialOrd + Debug {
    fn tolerance() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;

    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }
}

impl LpScalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for BigRational {
    fn tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// `maximise c·x` subject to `A x = b`, `x ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub equalities: Vec<(Vec<S>, S)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { value: S, x: Vec<S> },
    Infeasible,
    Unbounded,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
}

impl<S: LpScalar> Tableau<S> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        self.rhs[r] = self.rhs[r].clone() / p;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for k in 0..self.rows[i].len() {
                let delta = f.clone() * self.rows[r][k].clone();
                self.rows[i][k] = self.rows[i][k].clone() - delta;
            }
            self.rhs[i] = self.rhs[i].clone() - f * self.rhs[r].clone();
        }
        self.basis[r] = c;
    }

    /// Maximises `cost` over columns admitted by `allowed`; `false` when
    /// unbounded.
    fn optimise(&mut self, cost: &[S], allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| {
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    reduced = reduced - cost[b].clone() * self.rows[i][j].clone();
                }
                reduced.is_pos()
            });
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][j].is_pos() {
                    continue;
                }
                let ratio = self.rhs[i].clone() / self.rows[i][j].clone();
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        let diff = ratio.clone() - lr.clone();
                        if diff.is_negligible() {
                            self.basis[i] < self.basis[*li]
                        } else {
                            diff < S::zero()
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j),
                None => return false,
            }
        }
    }

    fn value(&self, cost: &[S]) -> S {
        self.basis
            .iter()
            .zip(&self.rhs)
            .fold(S::zero(), |acc, (&b, v)| acc + cost[b].clone() * v.clone())
    }
}

/// Solves `lp` exactly for exact scalars, to tolerance for floats.
pub fn solve_lp<S: LpScalar>(lp: &LinearProgram<S>) -> LpOutcome<S> {
    let n = lp.objective.len();
    let m = lp.equalities.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, (a, b)) in lp.equalities.iter().enumerate() {
        let flip = *b < S::zero();
        let mut row: Vec<S> = a
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        row.resize(n, S::zero());
        row.extend((0..m).map(|k| if k == i { S::one() } else { S::zero() }));
        rows.push(row);
        rhs.push(if flip { -b.clone() } else { b.clone() });
    }
    let mut tab = Tableau {
        rows,
        rhs,
        basis: (n..n + m).collect(),
    };
    let phase1: Vec<S> = (0..n + m)
        .map(|k| if k < n { S::zero() } else { -S::one() })
        .collect();
    tab.optimise(&phase1, n + m);
    if (-tab.value(&phase1)).is_pos() {
        return LpOutcome::Infeasible;
    }
    // drive artificials out of the basis; rows where that is impossible are redundant
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n {
            match (0..n).find(|&j| !tab.rows[r][j].is_negligible()) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.rhs.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let mut cost = lp.objective.clone();
    cost.resize(n + m, S::zero());
    if !tab.optimise(&cost, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![S::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs[i].clone();
        }
    }
    LpOutcome::Optimal {
        value: tab.value(&cost),
        x,
    }
}

/// Largest `p₀ + p₁ − 1` over all conditional distributions
/// `p(O, O⁰, O¹ | L)` whose `(O⁰, O¹)` marginal does not depend on `L`.
///
/// The unveilers receive no input in CHSH1, so this is the whole
/// no-signalling constraint set. Variables are indexed `(L, O, O⁰, O¹)`.
pub fn evaluate_nosignalling_lp<S: LpScalar>(
    n: usize,
    xi: f64,
    l0: &BitString,
) -> Result<S, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::Empty);
    }
    if n > NOSIGNALLING_LP_CAP {
        return Err(AdversaryError::TooLarge {
            n,
            cap: NOSIGNALLING_LP_CAP,
        });
    }
    if l0.len() != n {
        return Err(AdversaryError::WrongLength {
            what: "L⁰",
            expected: n,
            found: l0.len(),
        });
    }
    check_xi(xi)?;
    let threshold = mismatch_threshold(n, xi);
    let size = 1usize << n;
    let outputs = size * size * size;
    let var = |l: usize, o: usize, o0: usize, o1: usize| ((l * size + o) * size + o0) * size + o1;
    let nvars = size * outputs;
    let l0m = l0.to_mask() as usize;
    let l1m = !l0m & (size - 1);
    let pass = |diff: usize| ((diff.count_ones() as f64) < threshold) as i64;

    let mut objective = vec![S::zero(); nvars];
    for l in 0..size {
        for o in 0..size {
            for o0 in 0..size {
                for o1 in 0..size {
                    let wins = pass(o0 ^ o ^ (l0m & l)) + pass(o1 ^ o ^ (l1m & l));
                    objective[var(l, o, o0, o1)] = S::from_ratio(wins, size as i64);
                }
            }
        }
    }
    let mut equalities = Vec::new();
    for l in 0..size {
        let mut row = vec![S::zero(); nvars];
        for o in 0..size {
            for o0 in 0..size {
                for o1 in 0..size {
                    row[var(l, o, o0, o1)] = S::one();
                }
            }
        }
        equalities.push((row, S::one()));
    }
    for l in 1..size {
        for o0 in 0..size {
            for o1 in 0..size {
                let mut row = vec![S::zero(); nvars];
                for o in 0..size {
                    row[var(l, o, o0, o1)] = S::one();
                    row[var(0, o, o0, o1)] = -S::one();
                }
                equalities.push((row, S::zero()));
            }
        }
    }
    match solve_lp(&LinearProgram {
        objective,
        equalities,
    }) {
        LpOutcome::Optimal { value, .. } => Ok(value - S::one()),
        LpOutcome::Infeasible => Err(AdversaryError::Lp("infeasible")),
        LpOutcome::Unbounded => Err(AdversaryError::Lp("unbounded")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::from_ratio(a, b)
    }

    #[test]
    fn textbook_program() {
        // max 3x + 2y, x + y + s = 4, x + 3y + t = 6 → (4, 0), value 12
        let lp = LinearProgram {
            objective: vec![q(3, 1), q(2, 1), q(0, 1), q(0, 1)],
            equalities: vec![
                (vec![q(1, 1), q(1, 1), q(1, 1), q(0, 1)], q(4, 1)),
                (vec![q(1, 1), q(3, 1), q(0, 1), q(1, 1)], q(6, 1)),
            ],
        };
        match solve_lp(&lp) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, q(12, 1));
                assert_eq!(x[0], q(4, 1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            objective: vec![1.0],
            equalities: vec![(vec![1.0], -1.0)],
        };
        assert_eq!(solve_lp(&infeasible), LpOutcome::Infeasible);
        let unbounded = LinearProgram {
            objective: vec![1.0, 0.0],
            equalities: vec![(vec![1.0, -1.0], 0.0)],
        };
        assert_eq!(solve_lp(&unbounded), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let lp = LinearProgram {
            objective: vec![q(1, 1), q(1, 1)],
            equalities: vec![
                (vec![q(1, 1), q(1, 1)], q(1, 1)),
                (vec![q(2, 1), q(2, 1)], q(2, 1)),
            ],
        };
        assert!(matches!(solve_lp(&lp), LpOutcome::Optimal { value, .. } if value == q(1, 1)));
    }

    #[test]
    fn n1_exact_and_float_agree() {
        let l0: BitString = "0".parse().unwrap();
        let exact = evaluate_nosignalling_lp::<BigRational>(1, 0.05, &l0).unwrap();
        let float = evaluate_nosignalling_lp::<f64>(1, 0.05, &l0).unwrap();
        assert_eq!(exact, q(1, 2));
        assert!((float - 0.5).abs() < 1e-9);
    }
}
