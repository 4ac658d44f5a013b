//! The game data model: question/answer alphabets, the question
//! distribution, predicate atoms and per-question predicate mixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// A length-k vector of label indices, one per player.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple(pub Vec<usize>);

pub type QuestionTuple = Tuple;
pub type AnswerTuple = Tuple;

impl Tuple {
    pub fn new(components: impl Into<Vec<usize>>) -> Self {
        Tuple(components.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The component for `player` (the question or answer of that player).
    pub fn at(&self, player: usize) -> usize {
        self.0[player]
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Tuple {
    fn from(v: Vec<usize>) -> Self {
        Tuple(v)
    }
}

impl<const N: usize> From<[usize; N]> for Tuple {
    fn from(v: [usize; N]) -> Self {
        Tuple(v.to_vec())
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A human-facing alphabet label. Games refer to labels by index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Int(i64),
    Text(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(v) => write!(f, "{v}"),
            Label::Text(s) => f.write_str(s),
        }
    }
}

/// `0..n` as integer labels.
pub fn int_labels(n: usize) -> Vec<Label> {
    (0..n as i64).map(Label::Int).collect()
}

/// A verifier predicate: either accept everything, or accept exactly the
/// listed (question, answer) pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicate {
    AcceptAll,
    Base {
        /// question tuple -> accepted answer tuples
        accepts: BTreeMap<Tuple, BTreeSet<Tuple>>,
    },
}

impl Predicate {
    pub fn base(pairs: impl IntoIterator<Item = (Tuple, Tuple)>) -> Self {
        let mut accepts: BTreeMap<Tuple, BTreeSet<Tuple>> = BTreeMap::new();
        for (q, a) in pairs {
            accepts.entry(q).or_default().insert(a);
        }
        Predicate::Base { accepts }
    }

    pub fn accepts(&self, question: &Tuple, answer: &Tuple) -> bool {
        match self {
            Predicate::AcceptAll => true,
            Predicate::Base { accepts } => accepts
                .get(question)
                .is_some_and(|set| set.contains(answer)),
        }
    }

    pub fn is_accept_all(&self) -> bool {
        matches!(self, Predicate::AcceptAll)
    }
}

/// A finite k-player one-round game with a random predicate.
///
/// The verifier samples `q ~ mu`, then a predicate index `P ~ mix[q]`, and
/// accepts answers `a` iff `predicates[P]` accepts `(q, a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Game<S = Rational> {
    pub(crate) questions: Vec<Vec<Label>>,
    pub(crate) answers: Vec<Vec<Label>>,
    pub(crate) mu: BTreeMap<Tuple, S>,
    pub(crate) predicates: Vec<Predicate>,
    pub(crate) mix: BTreeMap<Tuple, BTreeMap<usize, S>>,
}

impl<S: Scalar> Game<S> {
    /// Assembles and validates a game.
    pub fn new(
        questions: Vec<Vec<Label>>,
        answers: Vec<Vec<Label>>,
        mu: BTreeMap<Tuple, S>,
        predicates: Vec<Predicate>,
        mix: BTreeMap<Tuple, BTreeMap<usize, S>>,
    ) -> Result<Self> {
        Game {
            questions,
            answers,
            mu,
            predicates,
            mix,
        }
        .validate()
    }

    /// A game with a single predicate applied at every supported question.
    pub fn with_single_predicate(
        questions: Vec<Vec<Label>>,
        answers: Vec<Vec<Label>>,
        mu: BTreeMap<Tuple, S>,
        predicate: Predicate,
    ) -> Result<Self> {
        let mix = mu
            .keys()
            .map(|q| (q.clone(), BTreeMap::from([(0, S::one())])))
            .collect();
        Self::new(questions, answers, mu, vec![predicate], mix)
    }

    /// Checks every structural invariant and returns the normalized game:
    /// zero-weight questions and mixture entries are dropped, as are
    /// mixtures for unsupported questions.
    pub fn validate(mut self) -> Result<Self> {
        let k = self.questions.len();
        if k < 2 {
            return Err(Error::TooFewPlayers(k));
        }
        if self.answers.len() != k {
            return Err(Error::ArityMismatch {
                what: "answer alphabets".into(),
                expected: k,
                found: self.answers.len(),
            });
        }
        for i in 0..k {
            if self.questions[i].is_empty() {
                return Err(Error::EmptyAlphabet {
                    player: i,
                    what: "question",
                });
            }
            if self.answers[i].is_empty() {
                return Err(Error::EmptyAlphabet {
                    player: i,
                    what: "answer",
                });
            }
        }

        let mut total = S::zero();
        for (q, w) in &self.mu {
            self.check_question(q, &format!("mu entry {q}"))?;
            if *w < S::zero() {
                return Err(Error::NegativeWeight {
                    what: format!("mu entry {q}"),
                });
            }
            total = total + w.clone();
        }
        if !total.approx_eq(&S::one()) {
            return Err(Error::DistributionNotNormalized {
                what: "question distribution".into(),
                sum: format_scalar(&total),
            });
        }
        self.mu.retain(|_, w| !w.is_zero());
        if self.mu.is_empty() {
            return Err(Error::EmptySupport);
        }

        for (idx, p) in self.predicates.iter().enumerate() {
            if let Predicate::Base { accepts } = p {
                for (q, set) in accepts {
                    self.check_question(q, &format!("predicate {idx}"))?;
                    for a in set {
                        self.check_answer(a, &format!("predicate {idx} at {q}"))?;
                    }
                }
            }
        }

        for (q, weights) in &self.mix {
            self.check_question(q, &format!("mix entry {q}"))?;
            for (p, w) in weights {
                if *p >= self.predicates.len() {
                    return Err(Error::UnknownPredicate {
                        what: format!("mix entry {q}"),
                        index: *p,
                    });
                }
                if *w < S::zero() {
                    return Err(Error::NegativeWeight {
                        what: format!("mix entry {q}, predicate {p}"),
                    });
                }
            }
        }
        let support: BTreeSet<Tuple> = self.mu.keys().cloned().collect();
        self.mix.retain(|q, _| support.contains(q));
        for q in &support {
            let weights = self.mix.get_mut(q).ok_or_else(|| Error::MissingMix {
                question: q.to_string(),
            })?;
            weights.retain(|_, w| !w.is_zero());
            let s = crate::scalar::sum(weights.values());
            if !s.approx_eq(&S::one()) {
                return Err(Error::DistributionNotNormalized {
                    what: format!("predicate mixture at {q}"),
                    sum: format_scalar(&s),
                });
            }
        }
        Ok(self)
    }

    fn check_tuple(&self, t: &Tuple, alphabets: &[Vec<Label>], what: &str) -> Result<()> {
        if t.len() != alphabets.len() {
            return Err(Error::ArityMismatch {
                what: what.to_string(),
                expected: alphabets.len(),
                found: t.len(),
            });
        }
        for (player, (&c, alphabet)) in t.0.iter().zip(alphabets).enumerate() {
            if c >= alphabet.len() {
                return Err(Error::UnknownLabel {
                    what: what.to_string(),
                    player,
                    index: c,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_question(&self, q: &Tuple, what: &str) -> Result<()> {
        self.check_tuple(q, &self.questions, what)
    }

    pub(crate) fn check_answer(&self, a: &Tuple, what: &str) -> Result<()> {
        self.check_tuple(a, &self.answers, what)
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.players() {
            Err(Error::PlayerOutOfRange {
                player,
                players: self.players(),
            })
        } else {
            Ok(())
        }
    }

    /// Number of players k.
    pub fn players(&self) -> usize {
        self.questions.len()
    }

    pub fn question_labels(&self, player: usize) -> &[Label] {
        &self.questions[player]
    }

    pub fn answer_labels(&self, player: usize) -> &[Label] {
        &self.answers[player]
    }

    pub fn question_count(&self, player: usize) -> usize {
        self.questions[player].len()
    }

    pub fn answer_count(&self, player: usize) -> usize {
        self.answers[player].len()
    }

    pub fn question_counts(&self) -> Vec<usize> {
        self.questions.iter().map(Vec::len).collect()
    }

    pub fn answer_counts(&self) -> Vec<usize> {
        self.answers.iter().map(Vec::len).collect()
    }

    pub fn distribution(&self) -> &BTreeMap<Tuple, S> {
        &self.mu
    }

    pub fn weight(&self, q: &Tuple) -> S {
        self.mu.get(q).cloned().unwrap_or_else(S::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &Tuple> {
        self.mu.keys()
    }

    pub fn support_set(&self) -> BTreeSet<Tuple> {
        self.mu.keys().cloned().collect()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn mixes(&self) -> &BTreeMap<Tuple, BTreeMap<usize, S>> {
        &self.mix
    }

    /// Predicate mixture at a supported question.
    pub fn mix_at(&self, q: &Tuple) -> Option<&BTreeMap<usize, S>> {
        self.mix.get(q)
    }

    /// Probability that the verifier accepts `answer` on question `q`,
    /// averaged over the predicate mixture at `q`.
    pub fn acceptance(&self, q: &Tuple, answer: &Tuple) -> S {
        self.mix.get(q).map_or_else(S::zero, |weights| {
            weights
                .iter()
                .filter(|(p, _)| self.predicates[**p].accepts(q, answer))
                .fold(S::zero(), |acc, (_, w)| acc + w.clone())
        })
    }

    /// The marginal distribution of the question to `player`.
    pub fn marginal(&self, player: usize) -> Result<BTreeMap<usize, S>> {
        self.check_player(player)?;
        let mut out: BTreeMap<usize, S> = BTreeMap::new();
        for (q, w) in &self.mu {
            let e = out.entry(q.at(player)).or_insert_with(S::zero);
            *e = e.clone() + w.clone();
        }
        Ok(out)
    }

    /// Questions to `player` that occur in the support.
    pub fn used_questions(&self, player: usize) -> BTreeSet<usize> {
        self.mu.keys().map(|q| q.at(player)).collect()
    }

    /// All answer tuples in lexicographic order.
    pub fn answer_tuples(&self) -> impl Iterator<Item = Tuple> + '_ {
        TupleIter::new(self.answer_counts())
    }

    /// Index of the `AcceptAll` atom, if present.
    pub fn accept_all_index(&self) -> Option<usize> {
        self.predicates.iter().position(Predicate::is_accept_all)
    }

    /// Converts every weight to another scalar type.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Game<T> {
        Game {
            questions: self.questions.clone(),
            answers: self.answers.clone(),
            mu: self.mu.iter().map(|(q, w)| (q.clone(), f(w))).collect(),
            predicates: self.predicates.clone(),
            mix: self
                .mix
                .iter()
                .map(|(q, ws)| (q.clone(), ws.iter().map(|(p, w)| (*p, f(w))).collect()))
                .collect(),
        }
    }
}

impl Game<Rational> {
    /// The same game over another scalar type.
    pub fn to_scalar<T: Scalar>(&self) -> Game<T> {
        self.map_scalar(T::from_rational)
    }
}

pub(crate) fn format_scalar<S: Scalar>(s: &S) -> String {
    match s.exact_ratio() {
        Some((n, d)) if d == num_bigint::BigInt::from(1) => n.to_string(),
        Some((n, d)) => format!("{n}/{d}"),
        None => format!("{:?}", s),
    }
}

/// Lexicographic enumeration of all tuples in a mixed-radix box.
#[derive(Clone, Debug)]
pub struct TupleIter {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl TupleIter {
    pub fn new(radices: Vec<usize>) -> Self {
        let next = if radices.iter().all(|&r| r > 0) {
            Some(vec![0; radices.len()])
        } else {
            None
        };
        TupleIter { radices, next }
    }
}

impl Iterator for TupleIter {
    type Item = Tuple;

    fn next(&mut self) -> Option<Tuple> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.radices[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(Tuple(current))
    }
}
