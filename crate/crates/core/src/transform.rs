//! The link transformations `T^i_p`, their sequences and saturation loop,
//! predicate deduplication, uniformization into explicit predicate slots,
//! and the conversion of a uniformized game into a plain (k+1)-player game.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::game::{int_labels, Game, Predicate, Tuple};
use crate::links::{links_of, mix_intervals, pi_p};
use crate::scalar::Scalar;
use crate::structure::connectivity;

/// Default ceiling on the number of uniform predicate slots.
pub const DEFAULT_M_CAP: u64 = 1_000_000;

/// A non-empty sequence of `(i, p)` transformation steps, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformSpec {
    steps: Vec<(usize, usize)>,
}

impl TransformSpec {
    pub fn new(steps: Vec<(usize, usize)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::EmptySpec);
        }
        Ok(TransformSpec { steps })
    }

    /// All of `[k] x [k]` in row-major order.
    pub fn row_major(k: usize) -> Self {
        TransformSpec {
            steps: (0..k).flat_map(|i| (0..k).map(move |p| (i, p))).collect(),
        }
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn check(&self, players: usize) -> Result<()> {
        for &(i, p) in &self.steps {
            for x in [i, p] {
                if x >= players {
                    return Err(Error::PlayerOutOfRange { player: x, players });
                }
            }
        }
        Ok(())
    }

    /// Parses a JSON list of 1-based `[i, p]` pairs.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let bad = |location: String, message: &str| Error::Parse {
            location,
            message: message.to_string(),
        };
        let list = value
            .as_array()
            .ok_or_else(|| bad("spec".into(), "expected a list of [i, p] pairs"))?;
        let mut steps = Vec::with_capacity(list.len());
        for (n, entry) in list.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| bad(format!("spec[{n}]"), "expected a pair [i, p]"))?;
            let mut idx = [0usize; 2];
            for (slot, v) in pair.iter().enumerate() {
                idx[slot] = v
                    .as_u64()
                    .filter(|&x| x >= 1)
                    .ok_or_else(|| bad(format!("spec[{n}][{slot}]"), "expected a player number >= 1"))?
                    as usize
                    - 1;
            }
            steps.push((idx[0], idx[1]));
        }
        TransformSpec::new(steps)
    }

    /// JSON list of 1-based pairs.
    pub fn to_json(&self) -> String {
        let v: Vec<Value> = self
            .steps
            .iter()
            .map(|&(i, p)| Value::from(vec![i + 1, p + 1]))
            .collect();
        Value::from(v).to_string()
    }
}

/// Support after one unweighted step: every splice of an i-link of the
/// current support is added.
pub fn support_closure(support: &BTreeSet<Tuple>, i: usize, p: usize) -> BTreeSet<Tuple> {
    let mut by_pivot: BTreeMap<usize, Vec<&Tuple>> = BTreeMap::new();
    for q in support {
        by_pivot.entry(q.at(i)).or_default().push(q);
    }
    let mut out = support.clone();
    for group in by_pivot.values() {
        for a in group {
            for b in group {
                out.insert(pi_p(&((*a).clone(), (*b).clone()), p));
            }
        }
    }
    out
}

/// `T^i_p` (0-based players). The question is the splice of a link drawn
/// from `L_i`; off-diagonal links accept by default, the diagonal link
/// `(q, q)` keeps the original predicate mixture at `q`.
pub fn transform<S: Scalar>(game: &Game<S>, i: usize, p: usize) -> Result<Game<S>> {
    game.check_player(i)?;
    game.check_player(p)?;
    let links = links_of(&game.mu, i);
    let mut mu: BTreeMap<Tuple, S> = BTreeMap::new();
    let mut off: BTreeMap<Tuple, S> = BTreeMap::new();
    for (link, w) in &links.atoms {
        let q = pi_p(link, p);
        let e = mu.entry(q.clone()).or_insert_with(S::zero);
        *e = e.clone() + w.clone();
        if link.0 != link.1 {
            let e = off.entry(q).or_insert_with(S::zero);
            *e = e.clone() + w.clone();
        }
    }

    let mut predicates = game.predicates.clone();
    let accept_all = if off.is_empty() {
        None
    } else {
        Some(game.accept_all_index().unwrap_or_else(|| {
            predicates.push(Predicate::AcceptAll);
            predicates.len() - 1
        }))
    };

    let mut mix: BTreeMap<Tuple, BTreeMap<usize, S>> = BTreeMap::new();
    for (q, total) in &mu {
        let mut weights: BTreeMap<usize, S> = BTreeMap::new();
        if let Some(w) = off.get(q) {
            let aa = accept_all.expect("AcceptAll present when off-diagonal mass exists");
            weights.insert(aa, w.clone() / total.clone());
        }
        let diag = links.weight(&(q.clone(), q.clone()));
        if !diag.is_zero() {
            for (pred, nu) in &game.mix[q] {
                let e = weights.entry(*pred).or_insert_with(S::zero);
                *e = e.clone() + diag.clone() * nu.clone() / total.clone();
            }
        }
        mix.insert(q.clone(), weights);
    }

    Game {
        questions: game.questions.clone(),
        answers: game.answers.clone(),
        mu,
        predicates,
        mix,
    }
    .validate()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Extension {
    All,
    Set(BTreeSet<Tuple>),
}

fn extension_at<S: Scalar>(game: &Game<S>, pred: usize, q: &Tuple, total: usize) -> Extension {
    match &game.predicates[pred] {
        Predicate::AcceptAll => Extension::All,
        Predicate::Base { accepts } => {
            let set = accepts.get(q).cloned().unwrap_or_default();
            if set.len() == total {
                Extension::All
            } else {
                Extension::Set(set)
            }
        }
    }
}

/// Merges predicates that accept the same answers at a question, then drops
/// predicates no longer referenced and renumbers the rest in order.
pub fn dedup_predicates<S: Scalar>(game: &Game<S>) -> Game<S> {
    let total: usize = game.answer_counts().iter().product();
    let aa = game.accept_all_index();
    let mut mix: BTreeMap<Tuple, BTreeMap<usize, S>> = BTreeMap::new();
    for (q, weights) in &game.mix {
        let mut groups: BTreeMap<Extension, (usize, S)> = BTreeMap::new();
        for (&pred, w) in weights {
            let ext = extension_at(game, pred, q, total);
            let entry = groups.entry(ext).or_insert_with(|| (pred, S::zero()));
            entry.1 = entry.1.clone() + w.clone();
        }
        let mut merged: BTreeMap<usize, S> = BTreeMap::new();
        for (ext, (first, w)) in groups {
            let rep = match (ext, aa) {
                (Extension::All, Some(a)) => a,
                _ => first,
            };
            merged.insert(rep, w);
        }
        mix.insert(q.clone(), merged);
    }
    let used: BTreeSet<usize> = mix.values().flat_map(|m| m.keys().copied()).collect();
    let renumber: BTreeMap<usize, usize> = used.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    Game {
        questions: game.questions.clone(),
        answers: game.answers.clone(),
        mu: game.mu.clone(),
        predicates: used.iter().map(|&o| game.predicates[o].clone()).collect(),
        mix: mix
            .into_iter()
            .map(|(q, m)| (q, m.into_iter().map(|(p, w)| (renumber[&p], w)).collect()))
            .collect(),
    }
}

/// Applies the steps left to right, deduplicating after each one.
pub fn transform_seq<S: Scalar>(game: &Game<S>, spec: &TransformSpec) -> Result<Game<S>> {
    spec.check(game.players())?;
    let mut g = game.clone();
    for &(i, p) in spec.steps() {
        g = dedup_predicates(&transform(&g, i, p)?);
    }
    Ok(g)
}

/// Least common multiple of the denominators of every mixture weight.
pub fn predicate_denominator<S: Scalar>(game: &Game<S>) -> Result<BigUint> {
    let mut m = BigInt::one();
    for weights in game.mix.values() {
        for w in weights.values() {
            let (_, den) = w.exact_ratio().ok_or(Error::InexactScalar)?;
            m = m.lcm(&den);
        }
    }
    Ok(m.to_biguint().expect("denominators are positive"))
}

/// Per supported question, the predicate index behind each of the `M`
/// uniform slots: predicates in ascending index order, predicate `P`
/// occupying `nu_q(P) * M` consecutive slots.
pub fn slot_table<S: Scalar>(game: &Game<S>, m_cap: u64) -> Result<(usize, BTreeMap<Tuple, Vec<usize>>)> {
    if !S::is_exact() {
        return Err(Error::InexactScalar);
    }
    let m = predicate_denominator(game)?;
    let slots = match m.to_u64() {
        Some(v) if v <= m_cap => v as usize,
        _ => return Err(Error::MBlowup { m, cap: m_cap }),
    };
    let mut table = BTreeMap::new();
    for (q, weights) in &game.mix {
        let mut refs = Vec::with_capacity(slots);
        for (p, _, end) in mix_intervals(weights) {
            let (num, den) = end.exact_ratio().expect("exact scalar");
            let upto = (num * BigInt::from(slots) / den)
                .to_usize()
                .expect("slot index fits");
            refs.resize(upto, p);
        }
        table.insert(q.clone(), refs);
    }
    Ok((slots, table))
}

/// Rewrites the mixtures as a uniform choice among `M` slot predicates.
/// A slot that refers to the same predicate at every question reuses it;
/// otherwise the slot predicate is assembled question by question, with
/// `AcceptAll` spelled out as every answer tuple.
pub fn uniformize<S: Scalar>(game: &Game<S>, m_cap: u64) -> Result<Game<S>> {
    let (slots, table) = slot_table(game, m_cap)?;
    let answers: Vec<Tuple> = game.answer_tuples().collect();
    let mut predicates = Vec::with_capacity(slots);
    for m in 0..slots {
        let refs: BTreeSet<usize> = table.values().map(|r| r[m]).collect();
        if refs.len() == 1 {
            predicates.push(game.predicates[*refs.first().unwrap()].clone());
            continue;
        }
        let mut accepts: BTreeMap<Tuple, BTreeSet<Tuple>> = BTreeMap::new();
        for (q, r) in &table {
            let set: BTreeSet<Tuple> = match &game.predicates[r[m]] {
                Predicate::AcceptAll => answers.iter().cloned().collect(),
                Predicate::Base { accepts } => accepts.get(q).cloned().unwrap_or_default(),
            };
            if !set.is_empty() {
                accepts.insert(q.clone(), set);
            }
        }
        predicates.push(Predicate::Base { accepts });
    }
    let share = S::one() / S::from_integer(slots as i64);
    let uniform: BTreeMap<usize, S> = (0..slots).map(|m| (m, share.clone())).collect();
    Ok(Game {
        questions: game.questions.clone(),
        answers: game.answers.clone(),
        mu: game.mu.clone(),
        predicates,
        mix: game.mu.keys().map(|q| (q.clone(), uniform.clone())).collect(),
    })
}

/// Whether every supported question mixes all predicates uniformly.
pub fn is_uniformized<S: Scalar>(game: &Game<S>) -> bool {
    let m = game.predicates.len();
    let share = S::one() / S::from_integer(m as i64);
    game.mix
        .values()
        .all(|w| w.len() == m && w.iter().enumerate().all(|(n, (&p, x))| p == n && *x == share))
}

/// Adds a player who is asked the slot index and has a single answer, so the
/// random predicate becomes part of the question.
pub fn to_plain_game<S: Scalar>(game: &Game<S>) -> Result<Game<S>> {
    if !is_uniformized(game) {
        return Err(Error::NotUniformized {
            reason: "mixtures must be uniform over all predicates".into(),
        });
    }
    let m = game.predicates.len();
    let share = S::one() / S::from_integer(m as i64);
    let mut questions = game.questions.clone();
    questions.push(int_labels(m));
    let mut answers = game.answers.clone();
    answers.push(int_labels(1));
    let all: Vec<Tuple> = game.answer_tuples().collect();
    let extend = |t: &Tuple, x: usize| {
        let mut v = t.0.clone();
        v.push(x);
        Tuple(v)
    };
    let mut mu = BTreeMap::new();
    let mut accepts: BTreeMap<Tuple, BTreeSet<Tuple>> = BTreeMap::new();
    for (q, w) in &game.mu {
        for (slot, pred) in game.predicates.iter().enumerate() {
            let key = extend(q, slot);
            mu.insert(key.clone(), w.clone() * share.clone());
            let set: BTreeSet<Tuple> = all
                .iter()
                .filter(|a| pred.accepts(q, a))
                .map(|a| extend(a, 0))
                .collect();
            if !set.is_empty() {
                accepts.insert(key, set);
            }
        }
    }
    Game::with_single_predicate(questions, answers, mu, Predicate::Base { accepts })
}

/// `sum_q L_i(q, q)`.
pub fn diagonal_mass<S: Scalar>(game: &Game<S>, i: usize) -> Result<S> {
    Ok(game.link_distribution(i)?.diagonal_mass())
}

/// The largest `d` with `mu~ >= d * mu` guaranteed by the diagonal links,
/// namely `min_q L_i(q, q) / mu(q) = min_q mu(q) / mu_i(q_i)`. The
/// transformed game dominates this share of the original game, so its value
/// is at most `1 - eps * d`.
pub fn convex_coefficient<S: Scalar>(game: &Game<S>, i: usize) -> Result<S> {
    let marginal = game.marginal(i)?;
    let mut best: Option<S> = None;
    for (q, w) in &game.mu {
        let c = w.clone() / marginal[&q.at(i)].clone();
        if best.as_ref().map_or(true, |b| c < *b) {
            best = Some(c);
        }
    }
    Ok(best.expect("validated games have support"))
}

/// One row of the saturation log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassRecord {
    pub pass: usize,
    pub step: usize,
    pub support_size: usize,
    /// Predicate denominator after the step.
    pub m: BigUint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Saturation<S> {
    pub game: Game<S>,
    /// Passes including the final pass that adds nothing.
    pub passes_used: usize,
    /// Individual transformations applied.
    pub transforms_applied: usize,
    pub log: Vec<PassRecord>,
}

impl<S> Saturation<S> {
    pub fn log_csv(&self) -> String {
        let mut out = String::from("pass,step,support_size,M\n");
        for r in &self.log {
            out.push_str(&format!("{},{},{},{}\n", r.pass, r.step, r.support_size, r.m));
        }
        out
    }
}

/// Repeats the `beta` pass until a pass adds no question tuple.
///
/// Which passes grow the support is decided on the support alone; only those
/// passes are applied to the weighted game, and the closing pass that adds
/// nothing is logged but leaves the game untouched.
pub fn saturate<S: Scalar>(
    game: &Game<S>,
    beta: Option<&TransformSpec>,
    max_passes: Option<usize>,
) -> Result<Saturation<S>> {
    if !connectivity(game).is_loosely_connected() {
        return Err(Error::NotLooselyConnected);
    }
    let default_beta = TransformSpec::row_major(game.players());
    let beta = beta.unwrap_or(&default_beta);
    beta.check(game.players())?;
    let max_passes = max_passes.unwrap_or_else(|| game.question_counts().iter().product());

    let mut g = game.clone();
    let mut log = Vec::new();
    let mut transforms_applied = 0;
    let mut pass = 0;
    loop {
        pass += 1;
        if pass > max_passes {
            return Err(Error::MaxPassesExceeded { passes: max_passes });
        }
        let start = g.support_set();
        let mut support = start.clone();
        for &(i, p) in beta.steps() {
            support = support_closure(&support, i, p);
        }
        if support == start {
            let m = predicate_denominator(&g).unwrap_or_default();
            for step in 0..beta.steps().len() {
                log.push(PassRecord {
                    pass,
                    step: step + 1,
                    support_size: start.len(),
                    m: m.clone(),
                });
            }
            break;
        }
        for (step, &(i, p)) in beta.steps().iter().enumerate() {
            g = dedup_predicates(&transform(&g, i, p)?);
            transforms_applied += 1;
            log.push(PassRecord {
                pass,
                step: step + 1,
                support_size: g.mu.len(),
                m: predicate_denominator(&g).unwrap_or_default(),
            });
        }
    }
    Ok(Saturation {
        game: g,
        passes_used: pass,
        transforms_applied,
        log,
    })
}

/// Product of the per-player question labels used by the support.
pub fn full_support<S: Scalar>(game: &Game<S>) -> BTreeSet<Tuple> {
    let used: Vec<Vec<usize>> = (0..game.players())
        .map(|i| game.used_questions(i).into_iter().collect())
        .collect();
    crate::game::TupleIter::new(used.iter().map(Vec::len).collect())
        .map(|pick| Tuple(pick.0.iter().enumerate().map(|(i, &x)| used[i][x]).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::scalar::rational;
    use crate::structure::is_projection;
    use crate::value::DEFAULT_BUDGET;

    fn t(v: &[usize]) -> Tuple {
        Tuple(v.to_vec())
    }

    #[test]
    fn chain3_transform_adds_accepting_questions() {
        let g = generators::chain3();
        let tg = transform(&g, 0, 1).unwrap();
        let support = tg.support_set();
        assert!(support.contains(&t(&[0, 0, 1])));
        assert!(support.contains(&t(&[0, 1, 0])));
        assert_eq!(support.len(), 5);
        let aa = tg.accept_all_index().unwrap();
        for q in [t(&[0, 0, 1]), t(&[0, 1, 0])] {
            assert_eq!(tg.mix_at(&q).unwrap(), &BTreeMap::from([(aa, rational(1, 1))]));
            assert_eq!(tg.weight(&q), rational(1, 6));
        }
        // (0,0,0) keeps its diagonal 1/6 and gains nothing else
        assert_eq!(tg.weight(&t(&[0, 0, 0])), rational(1, 6));
        assert_eq!(tg.weight(&t(&[1, 1, 0])), rational(1, 3));
        assert_eq!(support_closure(&g.support_set(), 0, 1), support);
    }

    #[test]
    fn trivial_transforms() {
        let s = generators::single_tuple(3);
        for i in 0..3 {
            for p in 0..3 {
                assert_eq!(transform(&s, i, p).unwrap(), s);
            }
        }
        let a = generators::accept_all(2, 2, 2);
        let ta = transform(&a, 0, 1).unwrap();
        assert_eq!(ta.predicates(), a.predicates());
        assert_eq!(ta.exact_value(DEFAULT_BUDGET).unwrap().value, rational(1, 1));
    }

    #[test]
    fn slot_layout_follows_weights() {
        let mut g = generators::chain3();
        g.predicates.insert(0, Predicate::AcceptAll);
        for m in g.mix.values_mut() {
            *m = BTreeMap::from([(0, rational(1, 3)), (1, rational(2, 3))]);
        }
        let g = g.validate().unwrap();
        let (m, table) = slot_table(&g, DEFAULT_M_CAP).unwrap();
        assert_eq!(m, 3);
        assert!(table.values().all(|r| r == &vec![0, 1, 1]));
        let u = uniformize(&g, DEFAULT_M_CAP).unwrap();
        assert_eq!(u.predicates().len(), 3);
        assert!(is_uniformized(&u));
        assert_eq!(
            u.exact_value(DEFAULT_BUDGET).unwrap().value,
            g.exact_value(DEFAULT_BUDGET).unwrap().value
        );
        assert!(matches!(uniformize(&g, 2), Err(Error::MBlowup { .. })));
    }

    #[test]
    fn uniform_game_is_fixed() {
        let g = generators::chain3();
        assert_eq!(uniformize(&g, DEFAULT_M_CAP).unwrap(), g);
    }

    #[test]
    fn dedup_merges_equal_extensions() {
        let mut g = generators::accept_all(2, 1, 2);
        g.predicates.push(Predicate::AcceptAll);
        let q = t(&[0, 0]);
        g.mix.insert(q.clone(), BTreeMap::from([(0, rational(1, 2)), (1, rational(1, 2))]));
        let d = dedup_predicates(&g);
        assert_eq!(d.predicates().len(), 1);
        assert_eq!(d.mix_at(&q).unwrap(), &BTreeMap::from([(0, rational(1, 1))]));

        // a base predicate accepting every answer is AcceptAll there
        let full = Predicate::base(g.answer_tuples().map(|a| (q.clone(), a)));
        let mut h = generators::accept_all(2, 1, 2);
        h.predicates.push(full);
        h.mix.insert(q.clone(), BTreeMap::from([(0, rational(1, 4)), (1, rational(3, 4))]));
        let d = dedup_predicates(&h);
        assert_eq!(d.mix_at(&q).unwrap(), &BTreeMap::from([(0, rational(1, 1))]));
    }

    #[test]
    fn transforms_keep_projection() {
        let g = generators::chain3();
        for i in 0..3 {
            for p in 0..3 {
                assert!(is_projection(&transform(&g, i, p).unwrap()).holds());
            }
        }
    }

    #[test]
    fn plain_game_preserves_value() {
        let g = uniformize(&transform(&generators::chain3(), 0, 1).unwrap(), DEFAULT_M_CAP).unwrap();
        let plain = to_plain_game(&g).unwrap();
        assert_eq!(plain.players(), 4);
        assert_eq!(
            plain.exact_value(DEFAULT_BUDGET).unwrap().value,
            g.exact_value(DEFAULT_BUDGET).unwrap().value
        );
        let raw = transform(&generators::chain3(), 0, 1).unwrap();
        assert!(matches!(to_plain_game(&raw), Err(Error::NotUniformized { .. })));
    }

    #[test]
    fn saturation_of_chain3() {
        let s = saturate(&generators::chain3(), None, None).unwrap();
        assert_eq!(s.game.support().count(), 8);
        assert!(s.passes_used <= 8);
        assert!(connectivity(&s.game).is_connected());
        assert_eq!(s.game.support_set(), full_support(&generators::chain3()));
        assert!(s.log_csv().starts_with("pass,step,support_size,M\n"));
    }

    #[test]
    fn saturation_leaves_full_support_alone() {
        let g = generators::chsh();
        let s = saturate(&g, None, None).unwrap();
        assert_eq!(s.game, g);
        assert_eq!(s.passes_used, 1);
        assert_eq!(s.transforms_applied, 0);
        assert!(matches!(
            saturate(&generators::diag3_uniform(), None, None),
            Err(Error::NotLooselyConnected)
        ));
    }

    #[test]
    fn spec_json_is_one_based() {
        let s = TransformSpec::from_json("[[1,2],[3,3]]").unwrap();
        assert_eq!(s.steps(), &[(0, 1), (2, 2)]);
        assert_eq!(s.to_json(), "[[1,2],[3,3]]");
        assert_eq!(TransformSpec::from_json("[]"), Err(Error::EmptySpec));
        assert!(TransformSpec::from_json("[[0,1]]").is_err());
        assert!(s.check(2).is_err());
    }

    #[test]
    fn convex_coefficient_of_chain3() {
        let g = generators::chain3();
        assert_eq!(convex_coefficient(&g, 0).unwrap(), rational(1, 2));
        assert_eq!(diagonal_mass(&g, 0).unwrap(), rational(2, 3));
    }
}
