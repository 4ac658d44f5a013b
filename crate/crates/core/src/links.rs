//! i-links: ordered pairs of question tuples that agree on a pivot player's
//! question, their distribution, the splice map and link consistency.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::game::{Game, Predicate, Tuple, TupleIter};
use crate::repeated::{encode, RepeatedGame};
use crate::scalar::{Rational, Scalar};
use crate::strategy::Strategy;
use crate::value::check_budget;

pub type Link = (Tuple, Tuple);

/// The distribution `L_i` on i-links: pick the pivot question `v` from the
/// marginal of player `i`, then two tuples independently from `mu`
/// conditioned on `v`. The weight of `(q, q')` is `mu(q) mu(q') / mu_i(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkDistribution<S = Rational> {
    pub pivot: usize,
    pub atoms: BTreeMap<Link, S>,
}

impl<S: Scalar> LinkDistribution<S> {
    pub fn weight(&self, link: &Link) -> S {
        self.atoms.get(link).cloned().unwrap_or_else(S::zero)
    }

    pub fn total(&self) -> S {
        crate::scalar::sum(self.atoms.values())
    }

    /// `sum_q L(q, q)`.
    pub fn diagonal_mass(&self) -> S {
        crate::scalar::sum(self.atoms.iter().filter(|((a, b), _)| a == b).map(|(_, w)| w))
    }
}

/// Link atoms of an arbitrary question distribution.
pub(crate) fn links_of<S: Scalar>(mu: &BTreeMap<Tuple, S>, pivot: usize) -> LinkDistribution<S> {
    let mut by_pivot: BTreeMap<usize, Vec<(&Tuple, &S)>> = BTreeMap::new();
    for (q, w) in mu {
        by_pivot.entry(q.at(pivot)).or_default().push((q, w));
    }
    let mut atoms = BTreeMap::new();
    for group in by_pivot.values() {
        let marginal = crate::scalar::sum(group.iter().map(|(_, w)| *w));
        for (q, wq) in group {
            for (q2, wq2) in group {
                let w = (*wq).clone() * (*wq2).clone() / marginal.clone();
                atoms.insert(((*q).clone(), (*q2).clone()), w);
            }
        }
    }
    LinkDistribution { pivot, atoms }
}

impl<S: Scalar> Game<S> {
    /// The i-link distribution of this game (0-based pivot).
    pub fn link_distribution(&self, pivot: usize) -> Result<LinkDistribution<S>> {
        self.check_player(pivot)?;
        Ok(links_of(&self.mu, pivot))
    }

    /// The n-fold product of [`Game::link_distribution`]. Atoms are keyed by
    /// question tuples of the repeated game, each player's question vector
    /// encoded as in [`crate::repeated::encode`].
    pub fn product_link_distribution(
        &self,
        pivot: usize,
        n: usize,
        budget: u128,
    ) -> Result<LinkDistribution<S>> {
        if n == 0 {
            return Err(Error::InvalidParams("repetition count must be at least 1".into()));
        }
        let base = self.link_distribution(pivot)?;
        check_budget(
            num_traits::pow(BigUint::from(base.atoms.len()), n),
            budget,
        )?;
        let qc = self.question_counts();
        let atoms: Vec<(&Link, &S)> = base.atoms.iter().collect();
        let splice = |coords: &[&Tuple]| -> Tuple {
            Tuple(
                (0..qc.len())
                    .map(|j| {
                        let xs: Vec<usize> = coords.iter().map(|q| q.at(j)).collect();
                        encode(&xs, qc[j])
                    })
                    .collect(),
            )
        };
        let mut out = BTreeMap::new();
        for combo in TupleIter::new(vec![atoms.len(); n]) {
            let picked: Vec<&(&Link, &S)> = combo.0.iter().map(|&e| &atoms[e]).collect();
            let left: Vec<&Tuple> = picked.iter().map(|(l, _)| &l.0).collect();
            let right: Vec<&Tuple> = picked.iter().map(|(l, _)| &l.1).collect();
            let w = picked
                .iter()
                .fold(S::one(), |acc, (_, w)| acc * (*w).clone());
            out.insert((splice(&left), splice(&right)), w);
        }
        Ok(LinkDistribution { pivot, atoms: out })
    }
}

impl<S: Scalar> RepeatedGame<S> {
    /// Question distribution of the repeated game over encoded tuples.
    pub fn encoded_distribution(&self) -> BTreeMap<Tuple, S> {
        let qc = self.base().question_counts();
        self.question_distribution()
            .into_iter()
            .map(|(qs, w)| {
                let t = (0..qc.len())
                    .map(|j| {
                        let xs: Vec<usize> = qs.iter().map(|q| q.at(j)).collect();
                        encode(&xs, qc[j])
                    })
                    .collect();
                (Tuple(t), w)
            })
            .collect()
    }

    /// Links of the repeated game, computed from its own question
    /// distribution and marginal.
    pub fn link_distribution(&self, pivot: usize) -> Result<LinkDistribution<S>> {
        self.base().check_player(pivot)?;
        Ok(links_of(&self.encoded_distribution(), pivot))
    }
}

/// Splices a link: player `p`'s question from the first tuple, every other
/// question from the second.
pub fn pi_p(link: &Link, p: usize) -> Tuple {
    let mut out = link.1.clone();
    out.0[p] = link.0.at(p);
    out
}

/// Whether `predicate` accepts both sides of the link and the two answer
/// tuples agree at the pivot.
pub fn r_consistent(
    link: &Link,
    predicate: &Predicate,
    answers: (&Tuple, &Tuple),
    pivot: usize,
) -> Result<bool> {
    if link.0.at(pivot) != link.1.at(pivot) {
        return Err(Error::PivotMismatch { pivot });
    }
    Ok(predicate.accepts(&link.0, answers.0)
        && predicate.accepts(&link.1, answers.1)
        && answers.0.at(pivot) == answers.1.at(pivot))
}

/// Cumulative layout of a mixture on `[0, 1)`: predicate indices in
/// ascending order, each owning an interval of length equal to its weight.
/// This is the slot order used by uniformization.
pub(crate) fn mix_intervals<S: Scalar>(mix: &BTreeMap<usize, S>) -> Vec<(usize, S, S)> {
    let mut start = S::zero();
    mix.iter()
        .map(|(&p, w)| {
            let end = start.clone() + w.clone();
            let iv = (p, start.clone(), end.clone());
            start = end;
            iv
        })
        .collect()
}

fn overlap<S: Scalar>(a: &(usize, S, S), b: &(usize, S, S)) -> Option<S> {
    let lo = if a.1 > b.1 { a.1.clone() } else { b.1.clone() };
    let hi = if a.2 < b.2 { a.2.clone() } else { b.2.clone() };
    (hi > lo).then(|| hi - lo)
}

/// Probability that a link drawn from `L_i` together with a shared uniform
/// predicate slot is consistent with the strategy: the slot's predicate
/// accepts the strategy's answers on both tuples. Pivot agreement is
/// automatic for a strategy.
pub fn consistency_probability<S: Scalar>(
    game: &Game<S>,
    pivot: usize,
    strategy: &Strategy,
) -> Result<S> {
    strategy.check(&game.question_counts(), &game.answer_counts())?;
    let links = game.link_distribution(pivot)?;
    // per question: slot intervals whose predicate accepts the strategy
    let accepted: BTreeMap<&Tuple, Vec<(usize, S, S)>> = game
        .mix
        .iter()
        .map(|(q, mix)| {
            let a = strategy.respond(q);
            let ivs = mix_intervals(mix)
                .into_iter()
                .filter(|(p, _, _)| game.predicates[*p].accepts(q, &a))
                .collect();
            (q, ivs)
        })
        .collect();
    let mut total = S::zero();
    for ((q, q2), w) in &links.atoms {
        let mut both = S::zero();
        for a in &accepted[q] {
            for b in &accepted[q2] {
                if let Some(len) = overlap(a, b) {
                    both = both + len;
                }
            }
        }
        total = total + w.clone() * both;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::scalar::rational;
    use crate::value::DEFAULT_BUDGET;

    fn t(v: &[usize]) -> Tuple {
        Tuple(v.to_vec())
    }

    #[test]
    fn chain3_links_at_first_player() {
        let l = generators::chain3().link_distribution(0).unwrap();
        assert_eq!(l.atoms.len(), 5);
        let a = t(&[0, 0, 0]);
        let b = t(&[0, 1, 1]);
        for link in [(a.clone(), a.clone()), (a.clone(), b.clone()), (b.clone(), a), (b.clone(), b)] {
            assert_eq!(l.weight(&link), rational(1, 6));
        }
        let c = t(&[1, 1, 0]);
        assert_eq!(l.weight(&(c.clone(), c)), rational(1, 3));
        assert_eq!(l.total(), rational(1, 1));
    }

    #[test]
    fn chsh_and_single_links() {
        let l = generators::chsh().link_distribution(0).unwrap();
        assert_eq!(l.atoms.len(), 8);
        assert!(l.atoms.values().all(|w| *w == rational(1, 8)));
        let s = generators::single_tuple(3);
        for i in 0..3 {
            let l = s.link_distribution(i).unwrap();
            assert_eq!(l.atoms.len(), 1);
            assert_eq!(l.total(), rational(1, 1));
        }
        assert!(s.link_distribution(3).is_err());
    }

    #[test]
    fn product_links_match_repeated_links() {
        let g = generators::chain3();
        for i in 0..3 {
            let p = g.product_link_distribution(i, 2, DEFAULT_BUDGET).unwrap();
            assert_eq!(p.atoms.len(), 25);
            let r = g.repeated(2).unwrap().link_distribution(i).unwrap();
            assert_eq!(p, r);
        }
        let s = generators::single_tuple(2);
        let p = s.product_link_distribution(0, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.atoms.len(), 1);
        assert_eq!(p.total(), rational(1, 1));
        assert!(g.product_link_distribution(0, 2, 24).is_err());
    }

    #[test]
    fn splice() {
        assert_eq!(pi_p(&(t(&[0, 0, 0]), t(&[0, 1, 1])), 1), t(&[0, 0, 1]));
        assert_eq!(pi_p(&(t(&[1, 1, 0]), t(&[0, 1, 1])), 0), t(&[1, 1, 1]));
        let q = t(&[1, 0, 1]);
        for p in 0..3 {
            assert_eq!(pi_p(&(q.clone(), q.clone()), p), q);
        }
    }

    #[test]
    fn consistency_checks() {
        let g = generators::chain3();
        let p = &g.predicates()[0];
        let link = (t(&[0, 0, 0]), t(&[0, 1, 1]));
        let zero = t(&[0, 0, 0]);
        assert!(r_consistent(&link, p, (&zero, &zero), 0).unwrap());
        let mixed = t(&[0, 1, 1]);
        assert!(!r_consistent(&link, p, (&zero, &mixed), 0).unwrap());
        assert!(r_consistent(&link, &Predicate::AcceptAll, (&zero, &mixed), 0).unwrap());
        assert_eq!(
            r_consistent(&link, p, (&zero, &zero), 1),
            Err(Error::PivotMismatch { pivot: 1 })
        );
    }

    #[test]
    fn consistency_probability_examples() {
        let g = generators::chain3();
        let s = Strategy::constant(&[2, 2, 2], 0);
        // the two pivot-0 tuples are accepted, the third is not
        assert_eq!(consistency_probability(&g, 0, &s).unwrap(), rational(2, 3));
        let all = generators::accept_all(3, 2, 2);
        assert_eq!(consistency_probability(&all, 1, &s).unwrap(), rational(1, 1));
    }
}
