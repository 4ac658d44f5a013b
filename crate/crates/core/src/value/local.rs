//! Seeded coordinate-wise hill climbing with restarts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::search::payoff_of;
use super::table::{Payoff, Weight};

pub(crate) struct LocalResult<W> {
    pub value: W,
    pub maps: Vec<Vec<usize>>,
    pub restarts: usize,
}

fn restart_rng(seed: u64, restart: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ restart.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Climbs from `start` (if any) and then from random strategies until
/// `iterations` single-position moves have been evaluated.
///
/// A move re-optimizes one player's answer on one question with everyone
/// else fixed and is taken only on strict improvement.
pub(crate) fn climb<W: Weight, P: Payoff<W>>(
    payoff: &P,
    start: Option<Vec<Vec<usize>>>,
    seed: u64,
    iterations: usize,
) -> LocalResult<W> {
    let k = payoff.players();
    let mut by_position: Vec<Vec<Vec<usize>>> = (0..k)
        .map(|i| vec![Vec::new(); payoff.question_count(i)])
        .collect();
    for e in 0..payoff.entries() {
        for (i, lists) in by_position.iter_mut().enumerate() {
            lists[payoff.question(e, i)].push(e);
        }
    }
    let positions: Vec<(usize, usize)> = by_position
        .iter()
        .enumerate()
        .flat_map(|(i, lists)| {
            lists
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.is_empty())
                .map(move |(x, _)| (i, x))
        })
        .collect();

    let mut answers = vec![0; k];
    let mut local_value = |maps: &[Vec<usize>], i: usize, x: usize, a: usize| -> W {
        let mut s = W::zero();
        for &e in &by_position[i][x] {
            for (j, slot) in answers.iter_mut().enumerate() {
                *slot = if j == i { a } else { maps[j][payoff.question(e, j)] };
            }
            s = s + payoff.weight(e, &answers);
        }
        s
    };

    let mut best: Option<(W, Vec<Vec<usize>>)> = None;
    let mut spent = 0usize;
    let mut restart = 0u64;
    let mut start = start;
    loop {
        let mut rng = restart_rng(seed, restart);
        let mut maps: Vec<Vec<usize>> = match start.take() {
            Some(m) => m,
            None => (0..k)
                .map(|i| {
                    (0..payoff.question_count(i))
                        .map(|_| rng.gen_range(0..payoff.answer_count(i)))
                        .collect()
                })
                .collect(),
        };
        let mut order = positions.clone();
        let mut exhausted = false;
        loop {
            order.shuffle(&mut rng);
            let mut improved = false;
            for &(i, x) in &order {
                if spent >= iterations {
                    exhausted = true;
                    break;
                }
                spent += 1;
                let current = maps[i][x];
                let mut best_a = current;
                let mut best_v = local_value(&maps, i, x, current);
                for a in 0..payoff.answer_count(i) {
                    if a == current {
                        continue;
                    }
                    let v = local_value(&maps, i, x, a);
                    if v > best_v {
                        best_v = v;
                        best_a = a;
                    }
                }
                if best_a != current {
                    maps[i][x] = best_a;
                    improved = true;
                }
            }
            if exhausted || !improved {
                break;
            }
        }
        let v = payoff_of(payoff, &maps);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, maps));
        }
        restart += 1;
        if exhausted || spent >= iterations || positions.is_empty() {
            break;
        }
    }
    let (value, maps) = best.expect("at least one restart runs");
    LocalResult {
        value,
        maps,
        restarts: restart as usize,
    }
}
