//! Independent reference computations used by the integration tests.
//!
//! Everything here is written directly from the definitions, using only the
//! public data accessors of a game, so that the library's search kernels,
//! lazy repetition and link code are checked against separate code paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use repgame::game::int_labels;
use repgame::{Game, Predicate, Rational, Tuple};

pub type Maps = Vec<Vec<usize>>;

pub fn r(n: i64, d: i64) -> Rational {
    repgame::rational(n, d)
}

/// All tuples of a mixed-radix box in lexicographic order.
pub fn boxes(radices: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &r in radices {
        let mut next = Vec::with_capacity(out.len() * r);
        for prefix in &out {
            for x in 0..r {
                let mut v = prefix.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Every deterministic strategy of a game.
pub fn strategies(game: &Game) -> Vec<Maps> {
    let qc = game.question_counts();
    let ac = game.answer_counts();
    let per_player: Vec<Vec<Vec<usize>>> = qc
        .iter()
        .zip(&ac)
        .map(|(&q, &a)| boxes(&vec![a; q]))
        .collect();
    let pick = boxes(&per_player.iter().map(Vec::len).collect::<Vec<_>>());
    pick.into_iter()
        .map(|choice| {
            choice
                .iter()
                .enumerate()
                .map(|(i, &c)| per_player[i][c].clone())
                .collect()
        })
        .collect()
}

fn respond(maps: &Maps, q: &Tuple) -> Tuple {
    Tuple(q.0.iter().enumerate().map(|(i, &x)| maps[i][x]).collect())
}

/// `Pr[accept | q, a]` straight from the mixture.
pub fn accept_prob(game: &Game, q: &Tuple, a: &Tuple) -> Rational {
    let mut total = Rational::zero();
    for (p, w) in &game.mixes()[q] {
        if game.predicates()[*p].accepts(q, a) {
            total += w;
        }
    }
    total
}

pub fn eval(game: &Game, maps: &Maps) -> Rational {
    let mut total = Rational::zero();
    for (q, w) in game.distribution() {
        total += w * accept_prob(game, q, &respond(maps, q));
    }
    total
}

/// Maximum of [`eval`] over every strategy.
pub fn brute_value(game: &Game) -> Rational {
    strategies(game)
        .iter()
        .map(|s| eval(game, s))
        .max()
        .expect("non-empty strategy set")
}

/// Exact value: enumerate all players but the last, who best-responds
/// question by question.
pub fn best_response_value(game: &Game) -> Rational {
    let k = game.players();
    let qc = game.question_counts();
    let ac = game.answer_counts();
    let last = k - 1;
    // weight[q][a] for every answer tuple
    let answers: Vec<Tuple> = boxes(&ac).into_iter().map(Tuple).collect();
    let table: Vec<(Tuple, Vec<(Tuple, Rational)>)> = game
        .distribution()
        .iter()
        .map(|(q, w)| {
            let row = answers
                .iter()
                .map(|a| (a.clone(), w * accept_prob(game, q, a)))
                .filter(|(_, x)| !x.is_zero())
                .collect();
            (q.clone(), row)
        })
        .collect();
    let per_player: Vec<Vec<Vec<usize>>> = (0..last).map(|i| boxes(&vec![ac[i]; qc[i]])).collect();
    let mut best = Rational::zero();
    for choice in boxes(&per_player.iter().map(Vec::len).collect::<Vec<_>>()) {
        // score[x][b]: mass when the last player answers b to x
        let mut score = vec![vec![Rational::zero(); ac[last]]; qc[last]];
        for (q, row) in &table {
            for (a, w) in row {
                if (0..last).all(|i| per_player[i][choice[i]][q.at(i)] == a.at(i)) {
                    score[q.at(last)][a.at(last)] += w;
                }
            }
        }
        let mut total = Rational::zero();
        for row in score {
            total += row.into_iter().max().expect("non-empty answers");
        }
        if total > best {
            best = total;
        }
    }
    best
}

fn encode(digits: &[usize], radix: usize) -> usize {
    let mut code = 0;
    let mut scale = 1;
    for &d in digits {
        code += d * scale;
        scale *= radix;
    }
    code
}

/// Explicit n-fold repetition: product alphabets (coordinate 0 is the
/// least significant digit), product distribution, and one predicate per
/// combination of coordinate predicates.
pub fn materialize_repeated(game: &Game, n: usize) -> Game {
    let k = game.players();
    let qc = game.question_counts();
    let ac = game.answer_counts();
    let support: Vec<(&Tuple, &Rational)> = game.distribution().iter().collect();
    let preds = game.predicates().len();
    let combos = boxes(&vec![preds; n]);
    let vector = |coords: &[&Tuple], radices: &[usize]| -> Tuple {
        Tuple(
            (0..k)
                .map(|j| encode(&coords.iter().map(|t| t.at(j)).collect::<Vec<_>>(), radices[j]))
                .collect(),
        )
    };
    let answer_vectors: Vec<Vec<Tuple>> = boxes(&vec![answers_len(&ac); n])
        .into_iter()
        .map(|c| c.into_iter().map(|e| Tuple(boxes(&ac)[e].clone())).collect())
        .collect();

    let mut mu = BTreeMap::new();
    let mut mix: BTreeMap<Tuple, BTreeMap<usize, Rational>> = BTreeMap::new();
    let mut accepts: Vec<Vec<(Tuple, Tuple)>> = vec![Vec::new(); combos.len()];
    for pick in boxes(&vec![support.len(); n]) {
        let qs: Vec<&Tuple> = pick.iter().map(|&e| support[e].0).collect();
        let w = pick.iter().fold(Rational::one(), |acc, &e| acc * support[e].1);
        let key = vector(&qs, &qc);
        mu.insert(key.clone(), w);
        let mut weights = BTreeMap::new();
        for (c, combo) in combos.iter().enumerate() {
            let nu = combo
                .iter()
                .zip(&qs)
                .fold(Rational::one(), |acc, (p, q)| {
                    acc * game.mixes()[*q].get(p).cloned().unwrap_or_default()
                });
            if nu.is_zero() {
                continue;
            }
            weights.insert(c, nu);
            for av in &answer_vectors {
                let ok = combo
                    .iter()
                    .zip(qs.iter().zip(av))
                    .all(|(p, (q, a))| game.predicates()[*p].accepts(q, a));
                if ok {
                    let refs: Vec<&Tuple> = av.iter().collect();
                    accepts[c].push((key.clone(), vector(&refs, &ac)));
                }
            }
        }
        mix.insert(key, weights);
    }
    Game::new(
        qc.iter().map(|&x| int_labels(x.pow(n as u32))).collect(),
        ac.iter().map(|&x| int_labels(x.pow(n as u32))).collect(),
        mu,
        accepts.into_iter().map(Predicate::base).collect(),
        mix,
    )
    .expect("materialized repetition is a valid game")
}

fn answers_len(ac: &[usize]) -> usize {
    ac.iter().product()
}

/// `mu(q) mu(q') / mu_i(q_i)` over all support pairs with a common pivot.
pub fn links(dist: &BTreeMap<Tuple, Rational>, i: usize) -> BTreeMap<(Tuple, Tuple), Rational> {
    let mut marginal: BTreeMap<usize, Rational> = BTreeMap::new();
    for (q, w) in dist {
        *marginal.entry(q.at(i)).or_insert_with(Rational::zero) += w;
    }
    let mut out = BTreeMap::new();
    for (q, w) in dist {
        for (q2, w2) in dist {
            if q.at(i) == q2.at(i) {
                out.insert((q.clone(), q2.clone()), w * w2 / &marginal[&q.at(i)]);
            }
        }
    }
    out
}

/// `(M, slot lists)`: predicates in ascending index order, each repeated
/// `nu_q(P) * M` times.
pub fn slots(game: &Game) -> (usize, BTreeMap<Tuple, Vec<usize>>) {
    let mut m = num_bigint::BigInt::one();
    for ws in game.mixes().values() {
        for w in ws.values() {
            m = m.lcm(w.denom());
        }
    }
    let m = m.to_usize().expect("small denominator");
    let table = game
        .mixes()
        .iter()
        .map(|(q, ws)| {
            let mut list = Vec::new();
            for (p, w) in ws {
                let count = (w * Rational::from_integer(m.into())).to_integer().to_usize().unwrap();
                list.extend(std::iter::repeat(*p).take(count));
            }
            (q.clone(), list)
        })
        .collect();
    (m, table)
}

/// Probability over a link from `L_i` and a shared uniform slot that the
/// slot's predicates accept the strategy's answers on both tuples.
pub fn consistency(game: &Game, i: usize, maps: &Maps) -> Rational {
    let (m, table) = slots(game);
    let mut total = Rational::zero();
    for ((q, q2), w) in links(game.distribution(), i) {
        let (a, a2) = (respond(maps, &q), respond(maps, &q2));
        let hits = (0..m)
            .filter(|&s| {
                game.predicates()[table[&q][s]].accepts(&q, &a)
                    && game.predicates()[table[&q2][s]].accepts(&q2, &a2)
                    && a.at(i) == a2.at(i)
            })
            .count();
        total += w * r(hits as i64, m as i64);
    }
    total
}

pub fn splice(q: &Tuple, q2: &Tuple, p: usize) -> Tuple {
    let mut out = q2.clone();
    out.0[p] = q.at(p);
    out
}

/// Acceptance probability of the transformed game under a strategy, read
/// off the verifier's sampling procedure: draw a link, ask the splice,
/// accept off-diagonal links, and apply the original mixture on the
/// diagonal.
pub fn transformed_eval(game: &Game, i: usize, p: usize, maps: &Maps) -> Rational {
    let mut total = Rational::zero();
    for ((q, q2), w) in links(game.distribution(), i) {
        if q != q2 {
            total += w;
        } else {
            let asked = splice(&q, &q2, p);
            total += w * accept_prob(game, &q, &respond(maps, &asked));
        }
    }
    total
}

/// Fixed point of repeated unweighted passes over `beta`.
pub fn closure_fixpoint(support: &BTreeSet<Tuple>, beta: &[(usize, usize)]) -> (BTreeSet<Tuple>, usize) {
    let mut current = support.clone();
    let mut passes = 0;
    loop {
        passes += 1;
        let before = current.clone();
        for &(i, p) in beta {
            let snapshot: Vec<Tuple> = current.iter().cloned().collect();
            for a in &snapshot {
                for b in &snapshot {
                    if a.at(i) == b.at(i) {
                        current.insert(splice(a, b, p));
                    }
                }
            }
        }
        if current == before {
            return (current, passes);
        }
    }
}
