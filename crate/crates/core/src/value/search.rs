//! Exhaustive strategy search with an exact best response for one player.
//!
//! The value is linear in each player's answer on each of its questions, so
//! once every other player is fixed, one player's optimal answers can be
//! chosen question by question. The search enumerates the strategies of
//! all players but the one with the largest strategy space and best-responds
//! for that player. Workers split the outer enumeration into contiguous
//! ranges; the reduction keeps the maximum with the smallest enumeration
//! index, so the result does not depend on the number of threads.

use rayon::prelude::*;

use super::table::{Payoff, Weight};

pub(crate) struct SearchResult<W> {
    pub value: W,
    pub maps: Vec<Vec<usize>>,
}

struct Layout {
    responder: usize,
    /// (player, question) positions enumerated in the outer loop
    positions: Vec<(usize, usize)>,
    radices: Vec<usize>,
    /// responder question -> entries asking it
    groups: Vec<(usize, Vec<usize>)>,
    total: u128,
}

fn used_questions<W, P: Payoff<W>>(payoff: &P) -> Vec<Vec<usize>> {
    let k = payoff.players();
    let mut used = vec![vec![false; 0]; k];
    for (i, u) in used.iter_mut().enumerate() {
        *u = vec![false; payoff.question_count(i)];
    }
    for e in 0..payoff.entries() {
        for (i, u) in used.iter_mut().enumerate() {
            u[payoff.question(e, i)] = true;
        }
    }
    used.into_iter()
        .map(|u| {
            u.iter()
                .enumerate()
                .filter_map(|(x, &b)| b.then_some(x))
                .collect()
        })
        .collect()
}

fn layout<W, P: Payoff<W>>(payoff: &P) -> Layout {
    let k = payoff.players();
    let used = used_questions(payoff);
    // log-size of each player's effective strategy space
    let size = |i: usize| used[i].len() as f64 * (payoff.answer_count(i) as f64).log2();
    let mut responder = 0;
    for i in 1..k {
        if size(i) >= size(responder) {
            responder = i;
        }
    }
    let mut positions = Vec::new();
    let mut radices = Vec::new();
    for (i, qs) in used.iter().enumerate() {
        if i == responder {
            continue;
        }
        for &x in qs {
            positions.push((i, x));
            radices.push(payoff.answer_count(i));
        }
    }
    let total = radices
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
        .expect("outer enumeration exceeds u128; budget check should prevent this");
    let groups = used[responder]
        .iter()
        .map(|&x| {
            let members = (0..payoff.entries())
                .filter(|&e| payoff.question(e, responder) == x)
                .collect();
            (x, members)
        })
        .collect();
    Layout {
        responder,
        positions,
        radices,
        groups,
        total,
    }
}

/// Value of the responder's best response given everyone else's maps;
/// writes the chosen answers into `maps[responder]` when `record` is set.
fn best_response<W: Weight, P: Payoff<W>>(
    payoff: &P,
    layout: &Layout,
    maps: &mut [Vec<usize>],
    answers: &mut [usize],
    record: bool,
) -> W {
    let b = layout.responder;
    let mut total = W::zero();
    for (x, members) in &layout.groups {
        let mut best: Option<(W, usize)> = None;
        for a in 0..payoff.answer_count(b) {
            let mut s = W::zero();
            for &e in members {
                for (i, slot) in answers.iter_mut().enumerate() {
                    *slot = if i == b { a } else { maps[i][payoff.question(e, i)] };
                }
                s = s + payoff.weight(e, answers);
            }
            if best.as_ref().is_none_or(|(v, _)| s > *v) {
                best = Some((s, a));
            }
        }
        let (v, a) = best.expect("answer alphabets are non-empty");
        if record {
            maps[b][*x] = a;
        }
        total = total + v;
    }
    total
}

fn decode(index: u128, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    let mut rest = index;
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d = (rest % r as u128) as usize;
        rest /= r as u128;
    }
    digits
}

fn install(layout: &Layout, digits: &[usize], maps: &mut [Vec<usize>]) {
    for (&(i, x), &d) in layout.positions.iter().zip(digits) {
        maps[i][x] = d;
    }
}

fn scan_range<W: Weight, P: Payoff<W>>(
    payoff: &P,
    layout: &Layout,
    start: u128,
    end: u128,
) -> Option<(W, u128)> {
    let k = payoff.players();
    let mut maps: Vec<Vec<usize>> = (0..k).map(|i| vec![0; payoff.question_count(i)]).collect();
    let mut answers = vec![0; k];
    let mut digits = decode(start, &layout.radices);
    install(layout, &digits, &mut maps);
    let mut best: Option<(W, u128)> = None;
    let mut index = start;
    while index < end {
        let v = best_response(payoff, layout, &mut maps, &mut answers, false);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, index));
        }
        index += 1;
        // odometer step, last position least significant
        for pos in (0..digits.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < layout.radices[pos] {
                let (i, x) = layout.positions[pos];
                maps[i][x] = digits[pos];
                break;
            }
            digits[pos] = 0;
            let (i, x) = layout.positions[pos];
            maps[i][x] = 0;
        }
    }
    best
}

fn better<W: PartialOrd>(a: Option<(W, u128)>, b: Option<(W, u128)>) -> Option<(W, u128)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.0 > a.0 || (!(a.0 > b.0) && b.1 < a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// Maximum of the payoff over all deterministic strategies, with the
/// lexicographically first optimal strategy as witness. Questions that occur
/// in no entry are answered with 0.
pub(crate) fn maximize<W: Weight, P: Payoff<W>>(payoff: &P) -> SearchResult<W> {
    let layout = layout(payoff);
    let chunks: u128 = (rayon::current_num_threads() as u128 * 8).clamp(1, layout.total);
    let step = layout.total.div_ceil(chunks);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * step;
            let end = ((c + 1) * step).min(layout.total);
            if start >= end {
                None
            } else {
                scan_range(payoff, &layout, start, end)
            }
        })
        .reduce(|| None, better);
    let (_, index) = best.expect("strategy space is non-empty");

    let k = payoff.players();
    let mut maps: Vec<Vec<usize>> = (0..k).map(|i| vec![0; payoff.question_count(i)]).collect();
    install(&layout, &decode(index, &layout.radices), &mut maps);
    let mut answers = vec![0; k];
    let value = best_response(payoff, &layout, &mut maps, &mut answers, true);
    SearchResult { value, maps }
}

/// Payoff of a fixed strategy.
pub(crate) fn payoff_of<W: Weight, P: Payoff<W>>(payoff: &P, maps: &[Vec<usize>]) -> W {
    let k = payoff.players();
    let mut answers = vec![0; k];
    let mut total = W::zero();
    for e in 0..payoff.entries() {
        for (i, slot) in answers.iter_mut().enumerate() {
            *slot = maps[i][payoff.question(e, i)];
        }
        total = total + payoff.weight(e, &answers);
    }
    total
}
