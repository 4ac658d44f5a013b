use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::game::Game;
use crate::scalar::Scalar;

/// Numbers the search kernels can accumulate and compare.
pub(crate) trait Weight:
    Clone + PartialOrd + Zero + One + Add<Output = Self> + Mul<Output = Self> + Send + Sync
{
}

impl<T> Weight for T where
    T: Clone + PartialOrd + Zero + One + Add<Output = T> + Mul<Output = T> + Send + Sync
{
}

/// The value of a game as a sum over entries of `weight(entry, answers)`.
///
/// Entries are question tuples in the support; `weight` is the probability
/// mass of the entry times the acceptance probability of the answers.
pub(crate) trait Payoff<W>: Sync {
    fn players(&self) -> usize;
    fn question_count(&self, player: usize) -> usize;
    fn answer_count(&self, player: usize) -> usize;
    fn entries(&self) -> usize;
    fn question(&self, entry: usize, player: usize) -> usize;
    fn weight(&self, entry: usize, answers: &[usize]) -> W;
}

/// Dense per-question acceptance weights of a base game.
#[derive(Clone, Debug)]
pub(crate) struct Table<W> {
    pub question_counts: Vec<usize>,
    pub answer_counts: Vec<usize>,
    /// Row-major strides over the answer box (player 0 most significant).
    pub strides: Vec<usize>,
    pub questions: Vec<Vec<usize>>,
    /// `weights[e][answer index] = mu(q_e) * Pr[accept | q_e, answers]`
    pub weights: Vec<Vec<W>>,
}

impl<W> Table<W> {
    pub fn answer_index(&self, answers: &[usize]) -> usize {
        answers
            .iter()
            .zip(&self.strides)
            .map(|(a, s)| a * s)
            .sum()
    }
}

fn strides(counts: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; counts.len()];
    for i in (0..counts.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * counts[i + 1];
    }
    strides
}

impl<S: Scalar> Table<S> {
    pub fn compile(game: &Game<S>) -> Self {
        let answer_counts = game.answer_counts();
        let strides = strides(&answer_counts);
        let mut questions = Vec::new();
        let mut weights = Vec::new();
        for (q, mass) in game.distribution() {
            questions.push(q.0.clone());
            let row: Vec<S> = game
                .answer_tuples()
                .map(|a| mass.clone() * game.acceptance(q, &a))
                .collect();
            weights.push(row);
        }
        Table {
            question_counts: game.question_counts(),
            answer_counts,
            strides,
            questions,
            weights,
        }
    }

    /// Rescales all weights to integers over a common denominator `L`.
    ///
    /// Returns `None` when the scalar is inexact or when `L^power` would not
    /// fit in `u128` (sums over `power`-fold products stay below `L^power`).
    pub fn integerize(&self, power: u32) -> Option<(Table<u128>, BigInt)> {
        let mut lcm = BigInt::one();
        let mut ratios = Vec::with_capacity(self.weights.len());
        for row in &self.weights {
            let mut r = Vec::with_capacity(row.len());
            for w in row {
                let (n, d) = w.exact_ratio()?;
                lcm = lcm.lcm(&d);
                r.push((n, d));
            }
            ratios.push(r);
        }
        let limit = BigInt::from(u128::MAX);
        if num_traits::pow(lcm.clone(), power as usize) > limit {
            return None;
        }
        let weights = ratios
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(n, d)| (n * (&lcm / d)).to_u128())
                    .collect::<Option<Vec<u128>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Some((
            Table {
                question_counts: self.question_counts.clone(),
                answer_counts: self.answer_counts.clone(),
                strides: self.strides.clone(),
                questions: self.questions.clone(),
                weights,
            },
            lcm,
        ))
    }
}

impl<W: Weight> Payoff<W> for Table<W> {
    fn players(&self) -> usize {
        self.question_counts.len()
    }

    fn question_count(&self, player: usize) -> usize {
        self.question_counts[player]
    }

    fn answer_count(&self, player: usize) -> usize {
        self.answer_counts[player]
    }

    fn entries(&self) -> usize {
        self.questions.len()
    }

    fn question(&self, entry: usize, player: usize) -> usize {
        self.questions[entry][player]
    }

    fn weight(&self, entry: usize, answers: &[usize]) -> W {
        self.weights[entry][self.answer_index(answers)].clone()
    }
}

/// The n-fold parallel repetition of a base table, evaluated lazily.
///
/// Player `i` receives the question vector `(x_1..x_n)` encoded as
/// `sum_j x_j * |X_i|^j` and answers likewise. The weight of an entry is
/// the product of the per-coordinate base weights, so no product
/// predicate table is ever built.
pub(crate) struct Repeated<'a, W> {
    base: &'a Table<W>,
    n: usize,
    /// per entry, the base entry used in each coordinate
    coords: Vec<Vec<usize>>,
    /// per entry, the encoded question of each player
    questions: Vec<Vec<usize>>,
    question_counts: Vec<usize>,
    answer_counts: Vec<usize>,
}

impl<'a, W: Weight> Repeated<'a, W> {
    pub fn new(base: &'a Table<W>, n: usize) -> Self {
        let k = base.question_counts.len();
        let base_entries = base.questions.len();
        let mut coords = Vec::new();
        let mut questions = Vec::new();
        for combo in crate::game::TupleIter::new(vec![base_entries; n]) {
            let mut qs = vec![0usize; k];
            for (i, q) in qs.iter_mut().enumerate() {
                let radix = base.question_counts[i];
                let mut code = 0;
                for &e in combo.0.iter().rev() {
                    code = code * radix + base.questions[e][i];
                }
                *q = code;
            }
            coords.push(combo.0);
            questions.push(qs);
        }
        let question_counts = base
            .question_counts
            .iter()
            .map(|&c| c.pow(n as u32))
            .collect();
        let answer_counts = base
            .answer_counts
            .iter()
            .map(|&c| c.pow(n as u32))
            .collect();
        Repeated {
            base,
            n,
            coords,
            questions,
            question_counts,
            answer_counts,
        }
    }
}

impl<W: Weight> Payoff<W> for Repeated<'_, W> {
    fn players(&self) -> usize {
        self.question_counts.len()
    }

    fn question_count(&self, player: usize) -> usize {
        self.question_counts[player]
    }

    fn answer_count(&self, player: usize) -> usize {
        self.answer_counts[player]
    }

    fn entries(&self) -> usize {
        self.coords.len()
    }

    fn question(&self, entry: usize, player: usize) -> usize {
        self.questions[entry][player]
    }

    fn weight(&self, entry: usize, answers: &[usize]) -> W {
        let mut digits: Vec<usize> = answers.to_vec();
        let mut product = W::one();
        for j in 0..self.n {
            let mut idx = 0;
            for (i, d) in digits.iter_mut().enumerate() {
                let radix = self.base.answer_counts[i];
                idx += (*d % radix) * self.base.strides[i];
                *d /= radix;
            }
            let w = &self.base.weights[self.coords[entry][j]][idx];
            if w.is_zero() {
                return W::zero();
            }
            product = product * w.clone();
        }
        product
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::scalar::{rational, Rational};

    #[test]
    fn compiled_rows_sum_to_question_mass_for_accept_all() {
        let g = generators::accept_all(2, 2, 2);
        let t = Table::compile(&g);
        for row in &t.weights {
            assert!(row.iter().all(|w| *w == rational(1, 4)));
        }
    }

    #[test]
    fn integerized_table_matches_rationals() {
        let g = generators::chain3();
        let t = Table::compile(&g);
        let (it, lcm) = t.integerize(2).unwrap();
        assert_eq!(lcm, BigInt::from(3));
        for (r, ir) in t.weights.iter().zip(&it.weights) {
            for (w, iw) in r.iter().zip(ir) {
                assert_eq!(Rational::new(BigInt::from(*iw), lcm.clone()), *w);
            }
        }
        let f: Table<f64> = Table::compile(&g.to_scalar());
        assert!(f.integerize(1).is_none());
    }

    #[test]
    fn repeated_entries_form_the_product_support() {
        let g = generators::chsh();
        let t = Table::compile(&g);
        let r = Repeated::new(&t, 2);
        assert_eq!(Payoff::<Rational>::entries(&r), 16);
        // constant-zero answers in both coordinates: (3/4)^2
        let total = (0..16).fold(Rational::zero(), |acc, e| acc + r.weight(e, &[0, 0]));
        assert_eq!(total, rational(9, 16));
    }
}
