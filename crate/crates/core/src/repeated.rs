//! Parallel repetition.
//!
//! A [`RepeatedGame`] is a lazy wrapper: coordinates are sampled
//! independently, each coordinate draws its question and predicate jointly
//! from the base game, and the verifier accepts iff every coordinate
//! accepts. Player `i` sees the question vector `(x_1, .., x_n)` encoded as
//! the integer `sum_j x_j * |X_i|^j`; answers are encoded the same way.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::game::{Game, Tuple, TupleIter};
use crate::scalar::{Rational, Scalar};
use crate::strategy::Strategy;
use crate::value::table::Table;
use crate::value::{
    check_budget, climb_table, evaluate_table, maximize_table, strategy_space, LowerBound,
    Solution,
};

#[derive(Clone, Debug, PartialEq)]
pub struct RepeatedGame<S = Rational> {
    base: Game<S>,
    n: usize,
}

/// Encodes a coordinate vector in base `radix`, coordinate 0 least significant.
pub fn encode(digits: &[usize], radix: usize) -> usize {
    digits.iter().rev().fold(0, |acc, &d| acc * radix + d)
}

/// Inverse of [`encode`] for vectors of length `n`.
pub fn decode(mut code: usize, radix: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let d = code % radix;
            code /= radix;
            d
        })
        .collect()
}

impl<S: Scalar> RepeatedGame<S> {
    pub fn new(base: Game<S>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("repetition count must be at least 1".into()));
        }
        Ok(RepeatedGame { base, n })
    }

    pub fn base(&self) -> &Game<S> {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn question_counts(&self) -> Vec<usize> {
        self.base
            .question_counts()
            .iter()
            .map(|c| c.pow(self.n as u32))
            .collect()
    }

    pub fn answer_counts(&self) -> Vec<usize> {
        self.base
            .answer_counts()
            .iter()
            .map(|c| c.pow(self.n as u32))
            .collect()
    }

    /// `prod_i (|A_i|^n)^(|X_i|^n)`.
    pub fn strategy_space(&self) -> BigUint {
        strategy_space(&self.question_counts(), &self.answer_counts())
    }

    /// The product question distribution, keyed by coordinate vectors.
    pub fn question_distribution(&self) -> BTreeMap<Vec<Tuple>, S> {
        let support: Vec<(&Tuple, &S)> = self.base.distribution().iter().collect();
        TupleIter::new(vec![support.len(); self.n])
            .map(|combo| {
                let qs: Vec<Tuple> = combo.0.iter().map(|&e| support[e].0.clone()).collect();
                let w = combo
                    .0
                    .iter()
                    .fold(S::one(), |acc, &e| acc * support[e].1.clone());
                (qs, w)
            })
            .collect()
    }

    /// Marginal on player `player`'s question vectors.
    pub fn marginal(&self, player: usize) -> Result<BTreeMap<Vec<usize>, S>> {
        self.base.check_player(player)?;
        let mut out: BTreeMap<Vec<usize>, S> = BTreeMap::new();
        for (qs, w) in self.question_distribution() {
            let v: Vec<usize> = qs.iter().map(|q| q.at(player)).collect();
            let e = out.entry(v).or_insert_with(S::zero);
            *e = e.clone() + w;
        }
        Ok(out)
    }

    /// Strategy answering every coordinate independently with `base`.
    pub fn tensor_strategy(&self, base: &Strategy) -> Strategy {
        let qc = self.base.question_counts();
        let ac = self.base.answer_counts();
        Strategy::new(
            (0..self.base.players())
                .map(|i| {
                    (0..qc[i].pow(self.n as u32))
                        .map(|code| {
                            let xs = decode(code, qc[i], self.n);
                            let answers: Vec<usize> =
                                xs.iter().map(|&x| base.answer(i, x)).collect();
                            encode(&answers, ac[i])
                        })
                        .collect()
                })
                .collect(),
        )
    }

    /// Probability that all coordinates accept under `strategy`.
    pub fn acceptance_probability(&self, strategy: &Strategy) -> Result<S> {
        strategy.check(&self.question_counts(), &self.answer_counts())?;
        Ok(evaluate_table(&Table::compile(&self.base), self.n, strategy.maps()))
    }

    /// Exact value of the repeated game.
    pub fn exact_value(&self, budget: u128) -> Result<Solution<S>> {
        check_budget(self.strategy_space(), budget)?;
        let (value, maps) = maximize_table(&Table::compile(&self.base), self.n);
        Ok(Solution {
            value,
            strategy: Strategy::new(maps),
        })
    }

    /// Hill climbing, starting from `start` when given.
    pub fn local_search_value(
        &self,
        start: Option<&Strategy>,
        seed: u64,
        iterations: usize,
    ) -> LowerBound<S> {
        climb_table(
            &Table::compile(&self.base),
            self.n,
            start.map(|s| s.maps().to_vec()),
            seed,
            iterations,
        )
    }

    /// Hill climbing seeded with the n-fold tensor of the base game's optimal
    /// strategy, so the result is at least `val(G)^n`.
    pub fn local_search_from_tensor(
        &self,
        budget: u128,
        seed: u64,
        iterations: usize,
    ) -> Result<LowerBound<S>> {
        let base = self.base.exact_value(budget)?;
        let start = self.tensor_strategy(&base.strategy);
        Ok(self.local_search_value(Some(&start), seed, iterations))
    }
}

impl<S: Scalar> Game<S> {
    /// The n-fold parallel repetition of this game.
    pub fn repeated(&self, n: usize) -> Result<RepeatedGame<S>> {
        RepeatedGame::new(self.clone(), n)
    }
}
