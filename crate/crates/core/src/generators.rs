//! Deterministic generators for the bundled example games and a seeded
//! random projection-game generator.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{int_labels, Game, Predicate, Tuple, TupleIter};
use crate::scalar::{rational, Rational};

fn binary(k: usize) -> Vec<Vec<crate::game::Label>> {
    vec![int_labels(2); k]
}

fn uniform(support: &[Tuple]) -> BTreeMap<Tuple, Rational> {
    let w = rational(1, support.len() as i64);
    support.iter().map(|q| (q.clone(), w.clone())).collect()
}

/// Two players, binary questions and answers, uniform questions; accept iff
/// `a1 xor a2 = x1 and x2`.
pub fn chsh() -> Game {
    let support: Vec<Tuple> = TupleIter::new(vec![2, 2]).collect();
    let pred = Predicate::base(support.iter().flat_map(|q| {
        let target = q.at(0) & q.at(1);
        TupleIter::new(vec![2, 2])
            .filter(move |a| a.at(0) ^ a.at(1) == target)
            .map(move |a| (q.clone(), a))
    }));
    Game::with_single_predicate(binary(2), binary(2), uniform(&support), pred)
        .expect("chsh is well formed")
}

/// Three players, uniform on `(0,0,0)`, `(0,1,1)`, `(1,1,0)`. The first two
/// questions require all answers equal, the third `a1 = a2 = not a3`.
pub fn chain3() -> Game {
    let support = vec![
        Tuple::from([0, 0, 0]),
        Tuple::from([0, 1, 1]),
        Tuple::from([1, 1, 0]),
    ];
    let pred = Predicate::base(support.iter().flat_map(|q| {
        let flip = *q == Tuple::from([1, 1, 0]);
        (0..2).map(move |b| {
            let c = if flip { 1 - b } else { b };
            (q.clone(), Tuple::from([b, b, c]))
        })
    }));
    Game::with_single_predicate(binary(3), binary(3), uniform(&support), pred)
        .expect("chain3 is well formed")
}

/// The GHZ game: questions uniform on even-parity triples, accept iff
/// `a1 xor a2 xor a3 = x1 or x2 or x3`.
pub fn ghz() -> Game {
    let support = vec![
        Tuple::from([0, 0, 0]),
        Tuple::from([0, 1, 1]),
        Tuple::from([1, 0, 1]),
        Tuple::from([1, 1, 0]),
    ];
    let pred = Predicate::base(support.iter().flat_map(|q| {
        let target = q.at(0) | q.at(1) | q.at(2);
        TupleIter::new(vec![2, 2, 2])
            .filter(move |a| a.at(0) ^ a.at(1) ^ a.at(2) == target)
            .map(move |a| (q.clone(), a))
    }));
    Game::with_single_predicate(binary(3), binary(3), uniform(&support), pred)
        .expect("ghz is well formed")
}

/// Three players, support `{(0,0,0), (1,1,1)}` with the given weights,
/// accepting everything.
pub fn diag3(w0: Rational, w1: Rational) -> Result<Game> {
    let mu = BTreeMap::from([(Tuple::from([0, 0, 0]), w0), (Tuple::from([1, 1, 1]), w1)]);
    Game::with_single_predicate(binary(3), binary(3), mu, Predicate::AcceptAll)
}

/// `diag3` with equal weights.
pub fn diag3_uniform() -> Game {
    diag3(rational(1, 2), rational(1, 2)).expect("diag3 is well formed")
}

/// A `k`-player game with one question tuple and binary answers, accepting
/// only the all-zero answer.
pub fn single_tuple(k: usize) -> Game {
    let q = Tuple(vec![0; k]);
    let pred = Predicate::base([(q.clone(), Tuple(vec![0; k]))]);
    Game::with_single_predicate(
        vec![int_labels(1); k],
        vec![int_labels(2); k],
        BTreeMap::from([(q, rational(1, 1))]),
        pred,
    )
    .expect("single tuple game is well formed")
}

/// Uniform product questions, every answer accepted.
pub fn accept_all(k: usize, questions: usize, answers: usize) -> Game {
    let support: Vec<Tuple> = TupleIter::new(vec![questions; k]).collect();
    Game::with_single_predicate(
        vec![int_labels(questions); k],
        vec![int_labels(answers); k],
        uniform(&support),
        Predicate::AcceptAll,
    )
    .expect("accept-all game is well formed")
}

/// A literal of a 3-clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Literal {
    pub variable: usize,
    pub negated: bool,
}

/// A clause over three distinct variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Clause(pub [Literal; 3]);

impl Clause {
    /// The unique clause falsified exactly by `assignment` on `vars`.
    pub fn excluding(vars: [usize; 3], assignment: [bool; 3]) -> Self {
        Clause(std::array::from_fn(|j| Literal {
            variable: vars[j],
            negated: assignment[j],
        }))
    }

    pub fn position(&self, variable: usize) -> Option<usize> {
        self.0.iter().position(|l| l.variable == variable)
    }

    /// Answer `a` encodes the values of the three literal variables in bits
    /// 0, 1, 2.
    pub fn satisfied_by(&self, answer: usize) -> bool {
        self.0
            .iter()
            .enumerate()
            .any(|(j, l)| ((answer >> j) & 1 == 1) != l.negated)
    }
}

/// The consistency game of simultaneous 3-SAT instances, one per player.
///
/// The verifier picks a variable `x` uniformly, sends player `i` a uniformly
/// random clause of instance `i` containing `x`, and accepts iff every
/// answer satisfies its clause and all answers agree on `x`. There is one
/// predicate per variable, so a question tuple whose clauses share several
/// variables carries a mixture.
pub fn sat_consistency(variables: usize, instances: &[Vec<Clause>]) -> Result<Game> {
    let k = instances.len();
    if k < 2 {
        return Err(Error::TooFewPlayers(k));
    }
    for clauses in instances {
        for c in clauses {
            let vars: BTreeSet<usize> = c.0.iter().map(|l| l.variable).collect();
            if vars.len() != 3 || vars.iter().any(|&v| v >= variables) {
                return Err(Error::InvalidParams(format!(
                    "clause {c:?} must use three distinct variables below {variables}"
                )));
            }
        }
    }
    // containing[i][x] = clauses of instance i containing x
    let mut containing = vec![vec![Vec::new(); variables]; k];
    for (i, clauses) in instances.iter().enumerate() {
        for (ci, c) in clauses.iter().enumerate() {
            for l in &c.0 {
                containing[i][l.variable].push(ci);
            }
        }
        for (x, list) in containing[i].iter().enumerate() {
            if list.is_empty() {
                return Err(Error::UncoveredVariable {
                    instance: i,
                    variable: x,
                });
            }
        }
    }

    let mut joint: BTreeMap<Tuple, BTreeMap<usize, Rational>> = BTreeMap::new();
    for x in 0..variables {
        let radices: Vec<usize> = (0..k).map(|i| containing[i][x].len()).collect();
        let denom: i64 = variables as i64 * radices.iter().map(|&r| r as i64).product::<i64>();
        for pick in TupleIter::new(radices) {
            let q = Tuple((0..k).map(|i| containing[i][x][pick.at(i)]).collect());
            let e = joint.entry(q).or_default().entry(x).or_default();
            *e += rational(1, denom);
        }
    }

    let mut accepts: Vec<Vec<(Tuple, Tuple)>> = vec![Vec::new(); variables];
    for (q, by_var) in &joint {
        let clauses: Vec<&Clause> = (0..k).map(|i| &instances[i][q.at(i)]).collect();
        for &x in by_var.keys() {
            for a in TupleIter::new(vec![8; k]) {
                let ok = clauses
                    .iter()
                    .enumerate()
                    .all(|(i, c)| c.satisfied_by(a.at(i)));
                if !ok {
                    continue;
                }
                let values: BTreeSet<usize> = clauses
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (a.at(i) >> c.position(x).expect("clause contains x")) & 1)
                    .collect();
                if values.len() == 1 {
                    accepts[x].push((q.clone(), a));
                }
            }
        }
    }

    let mut mu = BTreeMap::new();
    let mut mix = BTreeMap::new();
    for (q, by_var) in joint {
        let total: Rational = by_var.values().sum();
        let weights = by_var
            .into_iter()
            .map(|(x, w)| (x, w / &total))
            .collect::<BTreeMap<_, _>>();
        mu.insert(q.clone(), total);
        mix.insert(q, weights);
    }
    let predicates = accepts.into_iter().map(Predicate::base).collect();
    Game::new(
        instances.iter().map(|c| int_labels(c.len())).collect(),
        vec![int_labels(8); k],
        mu,
        predicates,
        mix,
    )
}

fn bits(v: usize) -> [bool; 3] {
    [v & 1 == 1, v & 2 == 2, v & 4 == 4]
}

/// Three instances over variables `x0, x1, x2` such that any two are
/// simultaneously satisfiable and all three are not. Instance `i` excludes
/// the assignments listed in `excluded[i]` (bit `j` is the value of `x_j`).
pub fn sat_three_instance_clauses() -> Vec<Vec<Clause>> {
    let excluded: [[usize; 3]; 3] = [[0, 1, 2], [3, 4, 5], [6, 7, 0]];
    excluded
        .iter()
        .map(|ex| {
            ex.iter()
                .map(|&v| Clause::excluding([0, 1, 2], bits(v)))
                .collect()
        })
        .collect()
}

/// The consistency game of [`sat_three_instance_clauses`].
pub fn sat_three_instances() -> Game {
    sat_consistency(3, &sat_three_instance_clauses()).expect("instance is well formed")
}

/// Parameters for [`random_projection_game`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorParams {
    pub seed: u64,
    pub players: usize,
    pub questions: usize,
    pub answers: usize,
    /// Probability (in percent) that a question tuple is in the support.
    pub density_percent: u32,
    /// Inclusive range for the number of projection classes `D_q`.
    pub classes: (usize, usize),
    /// Question weights are drawn from `1..=max_weight` before normalizing.
    pub max_weight: u32,
    /// Number of coordinate-disjoint support blocks; values above 1 give
    /// games that are not loosely connected.
    pub blocks: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 42,
            players: 3,
            questions: 2,
            answers: 2,
            density_percent: 50,
            classes: (1, 2),
            max_weight: 3,
            blocks: 1,
        }
    }
}

/// A seeded random projection game: for each supported question, surjective
/// projections of every player's answers onto `[D_q]`, accepting iff all
/// projections agree.
pub fn random_projection_game(params: &GeneratorParams) -> Result<Game> {
    let GeneratorParams {
        seed,
        players: k,
        questions,
        answers,
        density_percent,
        classes,
        max_weight,
        blocks,
    } = params.clone();
    if k < 2 || questions == 0 || answers == 0 || blocks == 0 || max_weight == 0 {
        return Err(Error::InvalidParams(format!("{params:?}")));
    }
    if blocks > questions {
        return Err(Error::InvalidParams(
            "more blocks than questions per player".into(),
        ));
    }
    if classes.0 == 0 || classes.0 > classes.1 {
        return Err(Error::InvalidParams("class range must be non-empty and positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block_of = |x: usize| x % blocks;

    let mut support: Vec<Tuple> = TupleIter::new(vec![questions; k])
        .filter(|q| q.0.iter().all(|&x| block_of(x) == block_of(q.at(0))))
        .filter(|_| rng.gen_range(0..100) < density_percent)
        .collect();
    // every block keeps at least one tuple
    for b in 0..blocks {
        if !support.iter().any(|q| block_of(q.at(0)) == b) {
            support.push(Tuple(vec![b; k]));
        }
    }
    support.sort();
    support.dedup();

    let raw: Vec<u32> = support.iter().map(|_| rng.gen_range(1..=max_weight)).collect();
    let total: u32 = raw.iter().sum();
    let mu: BTreeMap<Tuple, Rational> = support
        .iter()
        .zip(&raw)
        .map(|(q, &w)| {
            (
                q.clone(),
                Rational::new(BigInt::from(w), BigInt::from(total)),
            )
        })
        .collect();

    let max_classes = classes.1.min(answers);
    let min_classes = classes.0.min(max_classes);
    let mut pairs = Vec::new();
    for q in &support {
        let d = rng.gen_range(min_classes..=max_classes);
        let sigma: Vec<Vec<usize>> = (0..k)
            .map(|_| {
                let mut labels: Vec<usize> = (0..answers)
                    .map(|a| if a < d { a } else { rng.gen_range(0..d) })
                    .collect();
                labels.shuffle(&mut rng);
                labels
            })
            .collect();
        for a in TupleIter::new(vec![answers; k]) {
            let c = sigma[0][a.at(0)];
            if (1..k).all(|i| sigma[i][a.at(i)] == c) {
                pairs.push((q.clone(), a));
            }
        }
    }
    Game::with_single_predicate(
        vec![int_labels(questions); k],
        vec![int_labels(answers); k],
        mu,
        Predicate::base(pairs),
    )
}

/// Two players who share the single clause `x0 | x1 | x2`.
pub fn sat_shared_clause() -> Game {
    let c = Clause::excluding([0, 1, 2], [false, false, false]);
    sat_consistency(3, &[vec![c], vec![c]]).expect("instance is well formed")
}

/// The small example games, each small enough for exact two-fold
/// repetition.
pub fn bundled() -> Vec<(&'static str, Game)> {
    vec![
        ("chsh", chsh()),
        ("chain3", chain3()),
        ("ghz", ghz()),
        ("diag3", diag3_uniform()),
        ("single", single_tuple(3)),
        ("accept_all", accept_all(2, 2, 2)),
        ("sat_shared", sat_shared_clause()),
    ]
}

/// [`bundled`] plus the three-instance SAT game.
pub fn catalog() -> Vec<(&'static str, Game)> {
    let mut all = bundled();
    all.push(("sat3", sat_three_instances()));
    all
}

/// Looks up a catalog game by name.
pub fn by_name(name: &str) -> Option<Game> {
    catalog()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::DEFAULT_BUDGET;

    #[test]
    fn bundled_games_validate() {
        for (name, g) in catalog() {
            assert!(g.clone().validate().is_ok(), "{name}");
        }
    }

    #[test]
    fn ghz_value() {
        assert_eq!(
            ghz().exact_value(DEFAULT_BUDGET).unwrap().value,
            rational(3, 4)
        );
    }

    #[test]
    fn shared_clause_has_value_one() {
        let g = sat_shared_clause();
        assert_eq!(g.exact_value(DEFAULT_BUDGET).unwrap().value, rational(1, 1));
    }

    #[test]
    fn uncovered_variable_is_reported() {
        let c = Clause::excluding([0, 1, 2], [false, false, false]);
        let err = sat_consistency(4, &[vec![c], vec![c]]).unwrap_err();
        assert_eq!(
            err,
            Error::UncoveredVariable {
                instance: 0,
                variable: 3
            }
        );
    }

    #[test]
    fn three_instance_scenario() {
        let all = sat_three_instance_clauses();
        let g = sat_three_instances();
        assert!(g.exact_value(DEFAULT_BUDGET).unwrap().value < rational(1, 1));
        for drop in 0..3 {
            let sub: Vec<Vec<Clause>> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, c)| c.clone())
                .collect();
            let sg = sat_consistency(3, &sub).unwrap();
            assert_eq!(
                sg.exact_value(DEFAULT_BUDGET).unwrap().value,
                rational(1, 1),
                "dropping instance {drop}"
            );
        }
    }

    #[test]
    fn random_games_are_reproducible() {
        let p = GeneratorParams::default();
        assert_eq!(
            random_projection_game(&p).unwrap(),
            random_projection_game(&p).unwrap()
        );
    }

    #[test]
    fn single_class_games_have_value_one() {
        for seed in 0..5 {
            let p = GeneratorParams {
                seed,
                classes: (1, 1),
                ..GeneratorParams::default()
            };
            let g = random_projection_game(&p).unwrap();
            assert_eq!(g.exact_value(DEFAULT_BUDGET).unwrap().value, rational(1, 1));
        }
    }
}
