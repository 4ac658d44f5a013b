//! Static analyzers: the projection property, connectivity of the
//! question support, and decomposition into loosely-connected parts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::game::{Game, Tuple, TupleIter};
use crate::scalar::Scalar;
use crate::union_find::UnionFind;

/// Projection maps for one (question, predicate) pair.
///
/// `sigma[i][a]` is the class of player `i`'s answer `a`, or `None` when
/// `a` occurs in no accepted answer tuple (such answers can be sent to
/// distinct fresh per-player classes). Answers are accepted iff all
/// classes are `Some` and equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionMaps {
    pub question: Tuple,
    pub predicate: usize,
    /// Number of accepting components `D_q`.
    pub classes: usize,
    pub sigma: Vec<Vec<Option<usize>>>,
}

impl ProjectionMaps {
    pub fn predicts_accept(&self, answer: &Tuple) -> bool {
        let first = self.sigma[0][answer.at(0)];
        first.is_some()
            && answer
                .0
                .iter()
                .enumerate()
                .all(|(i, &a)| self.sigma[i][a] == first)
    }

    /// Checks the maps against the predicate on every answer tuple.
    pub fn verify<S: Scalar>(&self, game: &Game<S>) -> bool {
        let p = &game.predicates()[self.predicate];
        game.answer_tuples()
            .all(|a| p.accepts(&self.question, &a) == self.predicts_accept(&a))
    }
}

/// An accepting component whose answer sets do not span a complete
/// k-partite hypergraph, with one missing hyperedge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MissingHyperedge {
    pub question: Tuple,
    pub predicate: usize,
    pub component: usize,
    pub answer: Tuple,
}

impl MissingHyperedge {
    /// Confirms the witness from scratch: the answer tuple is rejected, yet
    /// all of its vertices lie in one connected component of the accepted
    /// answer hypergraph (found by breadth-first search).
    pub fn verify<S: Scalar>(&self, game: &Game<S>) -> bool {
        let p = &game.predicates()[self.predicate];
        if p.accepts(&self.question, &self.answer) {
            return false;
        }
        let accepted: Vec<Tuple> = game
            .answer_tuples()
            .filter(|a| p.accepts(&self.question, a))
            .collect();
        let start = (0, self.answer.at(0));
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some((i, v)) = queue.pop_front() {
            for t in accepted.iter().filter(|t| t.at(i) == v) {
                for (j, &w) in t.0.iter().enumerate() {
                    if seen.insert((j, w)) {
                        queue.push_back((j, w));
                    }
                }
            }
        }
        self.answer
            .0
            .iter()
            .enumerate()
            .all(|(i, &a)| seen.contains(&(i, a)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProjectionWitness {
    /// Maps for every supported question and every predicate it uses.
    Holds(Vec<ProjectionMaps>),
    Fails(MissingHyperedge),
}

impl ProjectionWitness {
    pub fn holds(&self) -> bool {
        matches!(self, ProjectionWitness::Holds(_))
    }
}

fn check_question<S: Scalar>(
    game: &Game<S>,
    q: &Tuple,
    predicate: usize,
) -> Result<ProjectionMaps, MissingHyperedge> {
    let k = game.players();
    let counts = game.answer_counts();
    let offsets: Vec<usize> = counts
        .iter()
        .scan(0, |acc, &c| {
            let o = *acc;
            *acc += c;
            Some(o)
        })
        .collect();
    let vertex = |i: usize, a: usize| offsets[i] + a;
    let p = &game.predicates()[predicate];
    let accepted: Vec<Tuple> = game.answer_tuples().filter(|a| p.accepts(q, a)).collect();

    let mut uf = UnionFind::new(counts.iter().sum());
    for a in &accepted {
        for i in 1..k {
            uf.union(vertex(0, a.at(0)), vertex(i, a.at(i)));
        }
    }
    // classes in first-seen order over accepted tuples
    let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut sigma: Vec<Vec<Option<usize>>> = counts.iter().map(|&c| vec![None; c]).collect();
    for a in &accepted {
        for (i, &ai) in a.0.iter().enumerate() {
            let r = uf.find(vertex(i, ai));
            let next = class_of_root.len();
            let c = *class_of_root.entry(r).or_insert(next);
            sigma[i][ai] = Some(c);
        }
    }
    let classes = class_of_root.len();

    let mut members: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); k]; classes];
    for (i, row) in sigma.iter().enumerate() {
        for (a, c) in row.iter().enumerate() {
            if let Some(c) = c {
                members[*c][i].push(a);
            }
        }
    }
    let mut edge_count = vec![0usize; classes];
    for a in &accepted {
        edge_count[sigma[0][a.at(0)].expect("accepted answers are classified")] += 1;
    }
    for (c, sets) in members.iter().enumerate() {
        let complete: usize = sets.iter().map(Vec::len).product();
        if complete != edge_count[c] {
            let radices: Vec<usize> = sets.iter().map(Vec::len).collect();
            let missing = TupleIter::new(radices)
                .map(|pick| Tuple((0..k).map(|i| sets[i][pick.at(i)]).collect()))
                .find(|a| !p.accepts(q, a))
                .expect("an incomplete component has a missing hyperedge");
            return Err(MissingHyperedge {
                question: q.clone(),
                predicate,
                component: c,
                answer: missing,
            });
        }
    }
    Ok(ProjectionMaps {
        question: q.clone(),
        predicate,
        classes,
        sigma,
    })
}

/// Checks the projection property for every supported question and every
/// predicate with positive weight there. Stops at the first failure in
/// lexicographic question order.
pub fn is_projection<S: Scalar>(game: &Game<S>) -> ProjectionWitness {
    let mut maps = Vec::new();
    for q in game.support() {
        let preds = game.mix_at(q).map(|m| m.keys().copied().collect::<Vec<_>>());
        for p in preds.unwrap_or_default() {
            match check_question(game, q, p) {
                Ok(m) => maps.push(m),
                Err(w) => return ProjectionWitness::Fails(w),
            }
        }
    }
    ProjectionWitness::Holds(maps)
}

/// Component structure of the question support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityReport {
    /// Components of the support under "differ in exactly one coordinate".
    pub tuple_components: Vec<Vec<Tuple>>,
    /// Per player, components of the used questions, where two questions
    /// are adjacent if some completion of the other players' questions puts
    /// both in the support.
    pub player_components: Vec<Vec<Vec<usize>>>,
    /// Components of the support under "share at least one coordinate".
    pub loose_components: Vec<Vec<Tuple>>,
}

impl ConnectivityReport {
    pub fn is_connected(&self) -> bool {
        self.tuple_components.len() == 1
    }

    pub fn is_player_wise_connected(&self) -> bool {
        self.player_components.iter().all(|c| c.len() == 1)
    }

    pub fn is_loosely_connected(&self) -> bool {
        self.loose_components.len() == 1
    }

    /// For a game that is not loosely connected: per player, the labels of
    /// the first loose component versus all the others.
    pub fn splitting_partition(&self) -> Option<Vec<(BTreeSet<usize>, BTreeSet<usize>)>> {
        if self.is_loosely_connected() {
            return None;
        }
        let k = self.loose_components[0][0].len();
        Some(
            (0..k)
                .map(|i| {
                    let first: BTreeSet<usize> =
                        self.loose_components[0].iter().map(|q| q.at(i)).collect();
                    let rest: BTreeSet<usize> = self.loose_components[1..]
                        .iter()
                        .flatten()
                        .map(|q| q.at(i))
                        .collect();
                    (first, rest)
                })
                .collect(),
        )
    }
}

fn without(q: &Tuple, j: usize) -> Vec<usize> {
    q.0.iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, &x)| x)
        .collect()
}

fn group_components(support: &[Tuple], uf: &mut UnionFind) -> Vec<Vec<Tuple>> {
    uf.groups()
        .into_iter()
        .map(|g| g.into_iter().map(|e| support[e].clone()).collect())
        .collect()
}

/// Connectivity of a set of question tuples with `k` players.
pub fn analyze_support(support: &BTreeSet<Tuple>, k: usize) -> ConnectivityReport {
    let support: Vec<Tuple> = support.iter().cloned().collect();

    let mut tuple_uf = UnionFind::new(support.len());
    let mut player_components = Vec::with_capacity(k);
    for j in 0..k {
        let mut buckets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (e, q) in support.iter().enumerate() {
            buckets.entry(without(q, j)).or_default().push(e);
        }
        // questions to player j, indexed densely
        let used: Vec<usize> = support
            .iter()
            .map(|q| q.at(j))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let pos = |x: usize| used.binary_search(&x).expect("used label");
        let mut player_uf = UnionFind::new(used.len());
        for members in buckets.values() {
            for w in members.windows(2) {
                tuple_uf.union(w[0], w[1]);
                player_uf.union(pos(support[w[0]].at(j)), pos(support[w[1]].at(j)));
            }
        }
        player_components.push(
            player_uf
                .groups()
                .into_iter()
                .map(|g| g.into_iter().map(|x| used[x]).collect())
                .collect(),
        );
    }

    let mut loose_uf = UnionFind::new(support.len());
    for j in 0..k {
        let mut first: BTreeMap<usize, usize> = BTreeMap::new();
        for (e, q) in support.iter().enumerate() {
            match first.get(&q.at(j)) {
                Some(&f) => {
                    loose_uf.union(f, e);
                }
                None => {
                    first.insert(q.at(j), e);
                }
            }
        }
    }

    ConnectivityReport {
        tuple_components: group_components(&support, &mut tuple_uf),
        player_components,
        loose_components: group_components(&support, &mut loose_uf),
    }
}

pub fn connectivity<S: Scalar>(game: &Game<S>) -> ConnectivityReport {
    analyze_support(&game.support_set(), game.players())
}

pub fn is_connected<S: Scalar>(game: &Game<S>) -> (bool, ConnectivityReport) {
    let r = connectivity(game);
    (r.is_connected(), r)
}

pub fn is_player_wise_connected<S: Scalar>(game: &Game<S>) -> (bool, ConnectivityReport) {
    let r = connectivity(game);
    (r.is_player_wise_connected(), r)
}

pub fn is_loosely_connected<S: Scalar>(game: &Game<S>) -> (bool, ConnectivityReport) {
    let r = connectivity(game);
    (r.is_loosely_connected(), r)
}

/// Splits the game along its loose components. Each part keeps the
/// alphabets, predicates and mixtures of the original and renormalizes the
/// question distribution; it is paired with its probability mass.
pub fn decompose_loosely<S: Scalar>(game: &Game<S>) -> Vec<(Game<S>, S)> {
    let report = connectivity(game);
    report
        .loose_components
        .iter()
        .map(|component| {
            let mass = crate::scalar::sum(component.iter().map(|q| &game.mu[q]));
            let mu = component
                .iter()
                .map(|q| (q.clone(), game.mu[q].clone() / mass.clone()))
                .collect();
            let mix = component
                .iter()
                .map(|q| (q.clone(), game.mix[q].clone()))
                .collect();
            let part = Game {
                questions: game.questions.clone(),
                answers: game.answers.clone(),
                mu,
                predicates: game.predicates.clone(),
                mix,
            };
            (part, mass)
        })
        .collect()
}

/// Which graph to render.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// Support tuples, edges between tuples differing in one coordinate.
    Tuple,
    /// Questions of one player, edges when they share a completion.
    Player(usize),
    /// Support tuples, edges between tuples sharing a coordinate.
    Loose,
}

/// Renders a support graph in Graphviz DOT syntax.
pub fn to_dot<S: Scalar>(game: &Game<S>, kind: GraphKind) -> String {
    let support: Vec<Tuple> = game.support().cloned().collect();
    let mut out = String::new();
    let name = match kind {
        GraphKind::Tuple => "tuple_graph".to_string(),
        GraphKind::Player(i) => format!("player_{}_graph", i + 1),
        GraphKind::Loose => "loose_graph".to_string(),
    };
    writeln!(out, "graph {name} {{").unwrap();
    match kind {
        GraphKind::Tuple | GraphKind::Loose => {
            for q in &support {
                writeln!(out, "  \"{q}\";").unwrap();
            }
            for (a, qa) in support.iter().enumerate() {
                for qb in &support[a + 1..] {
                    let same = qa.0.iter().zip(&qb.0).filter(|(x, y)| x == y).count();
                    let linked = match kind {
                        GraphKind::Tuple => same + 1 == qa.len(),
                        _ => same > 0,
                    };
                    if linked {
                        writeln!(out, "  \"{qa}\" -- \"{qb}\";").unwrap();
                    }
                }
            }
        }
        GraphKind::Player(i) => {
            let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
            let mut buckets: BTreeMap<Vec<usize>, BTreeSet<usize>> = BTreeMap::new();
            for q in &support {
                buckets.entry(without(q, i)).or_default().insert(q.at(i));
            }
            for xs in buckets.values() {
                let xs: Vec<usize> = xs.iter().copied().collect();
                for a in 0..xs.len() {
                    for b in a + 1..xs.len() {
                        edges.insert((xs[a], xs[b]));
                    }
                }
            }
            for x in game.used_questions(i) {
                writeln!(out, "  \"{}\";", game.question_labels(i)[x]).unwrap();
            }
            for (a, b) in edges {
                let labels = game.question_labels(i);
                writeln!(out, "  \"{}\" -- \"{}\";", labels[a], labels[b]).unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::scalar::rational;

    #[test]
    fn chsh_is_a_projection_game_with_two_classes() {
        match is_projection(&generators::chsh()) {
            ProjectionWitness::Holds(maps) => {
                assert_eq!(maps.len(), 4);
                for m in &maps {
                    assert_eq!(m.classes, 2);
                    assert!(m.verify(&generators::chsh()));
                }
            }
            w => panic!("expected projection, got {w:?}"),
        }
    }

    #[test]
    fn ghz_fails_with_a_verifiable_witness() {
        let g = generators::ghz();
        match is_projection(&g) {
            ProjectionWitness::Fails(w) => {
                assert_eq!(w.question, Tuple::from([0, 0, 0]));
                assert!(w.verify(&g));
            }
            w => panic!("expected failure, got {w:?}"),
        }
    }

    #[test]
    fn accept_all_has_one_class() {
        match is_projection(&generators::accept_all(3, 2, 2)) {
            ProjectionWitness::Holds(maps) => assert!(maps.iter().all(|m| m.classes == 1)),
            w => panic!("{w:?}"),
        }
    }

    #[test]
    fn chain3_classes() {
        match is_projection(&generators::chain3()) {
            ProjectionWitness::Holds(maps) => {
                assert!(maps.iter().all(|m| m.classes == 2));
                let flip = &maps[2];
                assert_eq!(flip.question, Tuple::from([1, 1, 0]));
                // first-seen order: (0,0,1) is the first accepted tuple
                assert_eq!(flip.sigma[0], vec![Some(0), Some(1)]);
                assert_eq!(flip.sigma[2], vec![Some(1), Some(0)]);
            }
            w => panic!("{w:?}"),
        }
    }

    #[test]
    fn sat_answers_outside_the_clause_are_unclassified() {
        let g = generators::sat_three_instances();
        match is_projection(&g) {
            ProjectionWitness::Holds(maps) => {
                for m in &maps {
                    assert_eq!(m.classes, 2);
                    assert!(m.sigma[0].iter().filter(|c| c.is_none()).count() == 1);
                }
                assert!(maps.iter().all(|m| m.verify(&g)));
            }
            w => panic!("{w:?}"),
        }
    }

    #[test]
    fn connectivity_of_examples() {
        let chsh = connectivity(&generators::chsh());
        assert!(chsh.is_connected());
        assert!(chsh.is_player_wise_connected());
        assert!(chsh.is_loosely_connected());

        let chain = connectivity(&generators::chain3());
        assert!(!chain.is_connected());
        assert_eq!(chain.tuple_components.len(), 3);
        assert!(chain.is_loosely_connected());

        let single = connectivity(&generators::single_tuple(3));
        assert!(single.is_connected() && single.is_player_wise_connected());

        let diag = connectivity(&generators::diag3_uniform());
        assert!(!diag.is_player_wise_connected());
        assert!(diag.player_components.iter().all(|c| c.len() == 2));
        assert!(!diag.is_loosely_connected());
        let split = diag.splitting_partition().unwrap();
        for (a, b) in split {
            assert_eq!(a, BTreeSet::from([0]));
            assert_eq!(b, BTreeSet::from([1]));
        }
    }

    #[test]
    fn decomposition_masses() {
        let parts = decompose_loosely(&generators::diag3_uniform());
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|(_, m)| *m == rational(1, 2)));
        for (g, _) in &parts {
            assert_eq!(g.support().count(), 1);
            assert!(g.clone().validate().is_ok());
        }

        let parts = decompose_loosely(&generators::chain3());
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].1, rational(1, 1));
        assert_eq!(parts[0].0, generators::chain3());

        let skew = generators::diag3(rational(1, 3), rational(2, 3)).unwrap();
        let masses: Vec<_> = decompose_loosely(&skew).into_iter().map(|(_, m)| m).collect();
        assert_eq!(masses, vec![rational(1, 3), rational(2, 3)]);
    }

    #[test]
    fn dot_output_lists_edges() {
        let dot = to_dot(&generators::chsh(), GraphKind::Tuple);
        assert!(dot.starts_with("graph tuple_graph {"));
        assert_eq!(dot.matches(" -- ").count(), 4);
        let dot = to_dot(&generators::chain3(), GraphKind::Loose);
        assert_eq!(dot.matches(" -- ").count(), 3);
        let dot = to_dot(&generators::diag3_uniform(), GraphKind::Player(0));
        assert_eq!(dot.matches(" -- ").count(), 0);
    }
}
