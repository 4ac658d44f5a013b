//! Strategy evaluation and game values.

mod local;
mod search;
pub(crate) mod table;

use num_bigint::{BigInt, BigUint};
use num_traits::One;

use crate::error::{Error, Result};
use crate::game::Game;
use crate::scalar::{Rational, Scalar};
use crate::strategy::Strategy;
use table::{Payoff, Repeated, Table, Weight};

/// Default ceiling on the number of deterministic strategies searched.
pub const DEFAULT_BUDGET: u128 = 1 << 28;

/// An optimal (or best found) strategy and its value.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<S = Rational> {
    pub value: S,
    pub strategy: Strategy,
}

/// Result of a local search: a lower bound on the value, never the value
/// itself unless confirmed exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound<S = Rational> {
    pub value: S,
    pub strategy: Strategy,
    pub restarts: usize,
}

/// `prod_i answers_i ^ questions_i`, the number of deterministic strategies.
pub fn strategy_space(question_counts: &[usize], answer_counts: &[usize]) -> BigUint {
    question_counts
        .iter()
        .zip(answer_counts)
        .fold(BigUint::one(), |acc, (&q, &a)| {
            acc * num_traits::pow(BigUint::from(a), q)
        })
}

pub(crate) fn check_budget(size: BigUint, budget: u128) -> Result<()> {
    if size > BigUint::from(budget) {
        Err(Error::BudgetExceeded { size, budget })
    } else {
        Ok(())
    }
}

fn from_scaled<S: Scalar>(value: u128, denominator: BigInt) -> S {
    S::from_rational(&Rational::new(BigInt::from(value), denominator))
}

/// Exact maximization of an n-fold table, using `u128` arithmetic whenever
/// all weights share a small enough common denominator.
pub(crate) fn maximize_table<S: Scalar>(base: &Table<S>, n: usize) -> (S, Vec<Vec<usize>>) {
    if let Some((ints, lcm)) = base.integerize(n as u32) {
        let scale = num_traits::pow(lcm, n);
        let r = if n == 1 {
            search::maximize(&ints)
        } else {
            search::maximize(&Repeated::new(&ints, n))
        };
        (from_scaled(r.value, scale), r.maps)
    } else {
        let r = if n == 1 {
            search::maximize(base)
        } else {
            search::maximize(&Repeated::new(base, n))
        };
        (r.value, r.maps)
    }
}

pub(crate) fn evaluate_table<S: Scalar>(base: &Table<S>, n: usize, maps: &[Vec<usize>]) -> S {
    if n == 1 {
        search::payoff_of(base, maps)
    } else {
        search::payoff_of(&Repeated::new(base, n), maps)
    }
}

pub(crate) fn climb_table<S: Scalar>(
    base: &Table<S>,
    n: usize,
    start: Option<Vec<Vec<usize>>>,
    seed: u64,
    iterations: usize,
) -> LowerBound<S> {
    fn run<W: Weight, P: Payoff<W>>(
        p: &P,
        start: Option<Vec<Vec<usize>>>,
        seed: u64,
        iterations: usize,
    ) -> local::LocalResult<W> {
        local::climb(p, start, seed, iterations)
    }
    let (value, maps, restarts) = if let Some((ints, lcm)) = base.integerize(n as u32) {
        let scale = num_traits::pow(lcm, n);
        let r = if n == 1 {
            run(&ints, start, seed, iterations)
        } else {
            run(&Repeated::new(&ints, n), start, seed, iterations)
        };
        (from_scaled(r.value, scale), r.maps, r.restarts)
    } else {
        let r = if n == 1 {
            run(base, start, seed, iterations)
        } else {
            run(&Repeated::new(base, n), start, seed, iterations)
        };
        (r.value, r.maps, r.restarts)
    };
    LowerBound {
        value,
        strategy: Strategy::new(maps),
        restarts,
    }
}

impl<S: Scalar> Game<S> {
    /// Number of deterministic strategies.
    pub fn strategy_space(&self) -> BigUint {
        strategy_space(&self.question_counts(), &self.answer_counts())
    }

    /// Acceptance probability of a deterministic strategy.
    pub fn evaluate(&self, strategy: &Strategy) -> Result<S> {
        strategy.check(&self.question_counts(), &self.answer_counts())?;
        let mut total = S::zero();
        for (q, w) in &self.mu {
            total = total + w.clone() * self.acceptance(q, &strategy.respond(q));
        }
        Ok(total)
    }

    /// The exact value: the maximum of [`Game::evaluate`] over all
    /// deterministic strategies.
    pub fn exact_value(&self, budget: u128) -> Result<Solution<S>> {
        check_budget(self.strategy_space(), budget)?;
        let table = Table::compile(self);
        let (value, maps) = maximize_table(&table, 1);
        Ok(Solution {
            value,
            strategy: Strategy::new(maps),
        })
    }

    /// Best strategy found by seeded hill climbing.
    pub fn local_search_value(&self, seed: u64, iterations: usize) -> LowerBound<S> {
        climb_table(&Table::compile(self), 1, None, seed, iterations)
    }
}
